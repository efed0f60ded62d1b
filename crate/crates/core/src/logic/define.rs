//! Formulas that define specific sets: finite relations, graphs of
//! monotone maps, and the coded relation of a step.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use fixedbitset::FixedBitSet;

use super::eval::{extension, DEFAULT_BUDGET};
use super::formula::{Formula, Term};
use crate::error::{Error, Result};
use crate::order::{Id, Poset};

/// `{(x, y) : g(x) <= y}`.
pub fn upper_graph(g: &BTreeMap<Id, Id>, p: &Poset) -> BTreeSet<(Id, Id)> {
    let mut out = BTreeSet::new();
    for (&x, &gx) in g {
        for y in p.ids() {
            if p.le(gx, y) {
                out.insert((x, y));
            }
        }
    }
    out
}

/// Recovers `g` from `{(x, y) : g(x) <= y}`: `g(x)` is the `z` with
/// `(x, z)` in the set and `z <= y` for every `(x, y)` in it.
pub fn graph_transform(b: &BTreeSet<(Id, Id)>, p: &Poset) -> Result<BTreeMap<Id, Id>> {
    let mut rows: BTreeMap<Id, Vec<Id>> = p.ids().map(|x| (x, Vec::new())).collect();
    for &(x, y) in b {
        rows.get_mut(&x).ok_or(Error::UnknownElement(x))?.push(y);
    }
    let mut g = BTreeMap::new();
    for (x, ys) in rows {
        let mut least = ys.iter().copied().filter(|&z| ys.iter().all(|&y| p.le(z, y)));
        match (least.next(), least.next()) {
            (Some(z), None) => {
                g.insert(x, z);
            }
            _ => return Err(Error::NotAFunctionGraph(x)),
        }
    }
    Ok(g)
}

/// `G(x, z) := B(x, z) and forall y (B(x, y) -> z <= y)`, free in `x`, `z`.
pub fn graph_formula(b: impl Fn(Term, Term) -> Formula) -> Formula {
    let (x, y, z) = (Term::var("x"), Term::var("y"), Term::var("z"));
    Formula::and([
        b(x.clone(), z.clone()),
        Formula::forall("y", Formula::implies(b(x, y.clone()), Formula::Le(z, y))),
    ])
}

/// Finite disjunction defining a set of pairs, free in `x`, `y`.
pub fn define_finite_relation(s: &BTreeSet<(Id, Id)>) -> Formula {
    Formula::or(s.iter().map(|&(a, b)| Formula::and([Formula::eq("x", a), Formula::eq("y", b)])))
}

/// Down-closure inside `a` of the minimal elements of `a` (a maximal
/// antichain of `a`); every element of `a` is above some element of it.
pub fn lower_fringe(p: &Poset, a: &BTreeSet<Id>) -> Result<BTreeSet<Id>> {
    if let Some(&x) = a.iter().find(|x| !p.contains(**x)) {
        return Err(Error::UnknownElement(x));
    }
    let antichain: Vec<Id> = a.iter().copied().filter(|&x| !a.iter().any(|&y| p.lt(y, x))).collect();
    Ok(a.iter().copied().filter(|&g| antichain.iter().any(|&b| p.le(g, b))).collect())
}

pub fn check_monotone(p: &Poset, g: &BTreeMap<Id, Id>) -> Result<()> {
    for x in p.ids() {
        let gx = *g.get(&x).ok_or_else(|| Error::Invalid(format!("map undefined at {x}")))?;
        if !p.contains(gx) {
            return Err(Error::UnknownElement(gx));
        }
    }
    for (a, b) in p.lt_pairs() {
        if !p.le(g[&a], g[&b]) {
            return Err(Error::NotMonotone(a, b));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DefinitionCertificate {
    /// Defines the graph of the map, free in `x` and `z`.
    pub formula: Formula,
    pub parameters: Vec<Id>,
    pub p0: BTreeSet<Id>,
    pub p1: BTreeSet<Id>,
    /// The extension of `formula` equals the graph.
    pub verified: bool,
    /// Symmetric difference between extension and graph.
    pub mismatches: Vec<(Id, Id)>,
    pub claim1_failures: Vec<Id>,
    /// `(alpha, i)` where the bound characterisation fails.
    pub claim2_failures: Vec<(Id, Id)>,
    /// Both parameter sets are below the threshold.
    pub small: bool,
}

/// Pieces of the construction: the moved values closed downward, the
/// fibres outside it and their fringes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneData {
    pub p0: BTreeSet<Id>,
    pub fibres: BTreeMap<Id, BTreeSet<Id>>,
    pub fixed: BTreeSet<Id>,
    pub p1: BTreeSet<Id>,
}

pub fn monotone_data(p: &Poset, g: &BTreeMap<Id, Id>) -> Result<MonotoneData> {
    check_monotone(p, g)?;
    let mut p0 = BTreeSet::new();
    for (&x, &gx) in g {
        if gx != x {
            p0.insert(gx);
            p0.extend(p.down_set(gx)?);
        }
    }
    let mut fibres: BTreeMap<Id, BTreeSet<Id>> = BTreeMap::new();
    let mut fixed = BTreeSet::new();
    for (&x, &gx) in g {
        if p0.contains(&x) {
            continue;
        }
        if gx == x {
            fixed.insert(x);
        } else {
            fibres.entry(gx).or_default().insert(x);
        }
    }
    let mut p1 = lower_fringe(p, &fixed)?;
    for fibre in fibres.values() {
        p1.extend(lower_fringe(p, fibre)?);
    }
    Ok(MonotoneData { p0, fibres, fixed, p1 })
}

fn claim_failures(p: &Poset, g: &BTreeMap<Id, Id>, data: &MonotoneData) -> (Vec<Id>, Vec<(Id, Id)>) {
    let ids: Vec<Id> = p.ids().collect();
    let pos: HashMap<Id, usize> = ids.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let mut ups: HashMap<Id, FixedBitSet> = HashMap::new();
    let mut up = |x: Id| -> FixedBitSet {
        ups.entry(x)
            .or_insert_with(|| {
                let mut b = FixedBitSet::with_capacity(ids.len());
                b.insert(pos[&x]);
                for y in p.up_set(x).expect("x is in p") {
                    b.insert(pos[&y]);
                }
                b
            })
            .clone()
    };
    let mut claim1 = Vec::new();
    let mut claim2 = Vec::new();
    for alpha in p.ids().filter(|a| !data.p0.contains(a)) {
        let below: Vec<Id> = data.p1.iter().copied().filter(|&b| p.le(b, alpha)).collect();
        let fixed = g[&alpha] == alpha;
        if fixed != below.iter().any(|&b| g[&b] == b) {
            claim1.push(alpha);
        }
        if fixed {
            continue;
        }
        // {i : g(gamma) <= i for all gamma in P1 below alpha}
        let mut bound = FixedBitSet::with_capacity(ids.len());
        bound.insert_range(..);
        for &c in &below {
            bound.intersect_with(&up(g[&c]));
        }
        let lhs = up(g[&alpha]);
        claim2.extend(lhs.symmetric_difference(&bound).map(|i| (alpha, ids[i])));
    }
    (claim1, claim2)
}

/// `B(x, y)`, meaning `g(x) <= y`, from the restrictions of `g` to `P0` and `P1`.
fn bound_formula(g: &BTreeMap<Id, Id>, data: &MonotoneData, x: Term, y: Term) -> Formula {
    let in_p0 = Formula::or(data.p0.iter().map(|&q| Formula::eq(x.clone(), q)));
    let on_p0 = Formula::or(
        data.p0
            .iter()
            .map(|&q| Formula::and([Formula::eq(x.clone(), q), Formula::le(g[&q], y.clone())])),
    );
    let fix = Formula::or(data.p1.iter().filter(|&&b| g[&b] == b).map(|&b| Formula::le(b, x.clone())));
    let fixed_branch =
        Formula::and([Formula::not(in_p0.clone()), fix.clone(), Formula::Le(x.clone(), y.clone())]);
    let moved_branch = Formula::and([
        Formula::not(in_p0),
        Formula::not(fix),
        // the value lies in P0
        Formula::or(data.p0.iter().map(|&j| Formula::le(j, y.clone()))),
        Formula::and(
            data.p1
                .iter()
                .map(|&c| Formula::implies(Formula::le(c, x.clone()), Formula::le(g[&c], y.clone()))),
        ),
    ]);
    Formula::or([on_p0, fixed_branch, moved_branch])
}

/// Builds and verifies a definition of a monotone map's graph from its
/// values on `P0` and `P1`.
pub fn synthesize_monotone_definition(
    p: &Poset,
    g: &BTreeMap<Id, Id>,
    small_threshold: usize,
) -> Result<DefinitionCertificate> {
    let data = monotone_data(p, g)?;
    let (claim1_failures, claim2_failures) = claim_failures(p, g, &data);
    let formula = graph_formula(|x, y| bound_formula(g, &data, x, y));
    let found = extension(&formula, p, &["x", "z"], DEFAULT_BUDGET)?;
    let graph: BTreeSet<Vec<Id>> = g.iter().map(|(&x, &z)| vec![x, z]).collect();
    let mismatches: Vec<(Id, Id)> = found.symmetric_difference(&graph).map(|t| (t[0], t[1])).collect();
    Ok(DefinitionCertificate {
        parameters: formula.parameters().into_iter().collect(),
        formula,
        verified: mismatches.is_empty(),
        mismatches,
        claim1_failures,
        claim2_failures,
        small: data.p0.len() < small_threshold && data.p1.len() < small_threshold,
        p0: data.p0,
        p1: data.p1,
    })
}

struct Names(usize);

impl Names {
    fn fresh(&mut self, stem: &str) -> String {
        self.0 += 1;
        format!("{stem}{}", self.0)
    }
}

/// `z` is the unique minimal upper bound of the incomparable `x`, `y`.
fn f_value(names: &mut Names, x: &Term, y: &Term, z: &Term) -> Formula {
    let w = names.fresh("w");
    Formula::and([
        Formula::lt(x.clone(), z.clone()),
        Formula::lt(y.clone(), z.clone()),
        Formula::not(Formula::Le(x.clone(), y.clone())),
        Formula::not(Formula::Le(y.clone(), x.clone())),
        Formula::forall(
            &w,
            Formula::implies(
                Formula::and([Formula::le(x.clone(), w.as_str()), Formula::le(y.clone(), w.as_str())]),
                Formula::le(z.clone(), w.as_str()),
            ),
        ),
    ])
}

/// `v` is the value of exactly one unordered pair.
fn base_point(names: &mut Names, v: &Term) -> Formula {
    let [u1, u2, u3, u4] = ["u", "u", "u", "u"].map(|s| Term::Var(names.fresh(s)));
    let same = Formula::or([
        Formula::and([Formula::Eq(u3.clone(), u1.clone()), Formula::Eq(u4.clone(), u2.clone())]),
        Formula::and([Formula::Eq(u3.clone(), u2.clone()), Formula::Eq(u4.clone(), u1.clone())]),
    ]);
    let unique = Formula::forall(
        &var_name(&u3),
        Formula::forall(&var_name(&u4), Formula::implies(f_value(names, &u3, &u4, v), same)),
    );
    let pair = f_value(names, &u1, &u2, v);
    Formula::exists_all(&[&var_name(&u1), &var_name(&u2)], Formula::and([pair, unique]))
}

fn var_name(t: &Term) -> String {
    match t {
        Term::Var(v) => v.clone(),
        Term::Param(_) => unreachable!("fresh names are variables"),
    }
}

fn defined(names: &mut Names, x: &Term, y: &Term) -> Formula {
    let z = Term::Var(names.fresh("z"));
    Formula::exists(&var_name(&z), f_value(names, x, y, &z))
}

/// `F(a, x)` is one of the triangle's vertices.
fn hits(names: &mut Names, a: &Term, x: &Term, triangle: &[Term; 3]) -> Formula {
    Formula::or(triangle.iter().map(|t| f_value(names, a, x, t)).collect::<Vec<_>>())
}

/// Exactly `k` elements `x` have `F(a, x)` in the triangle.
fn exactly(names: &mut Names, a: &Term, k: usize, triangle: &[Term; 3]) -> Formula {
    let xs: Vec<Term> = (0..k).map(|_| Term::Var(names.fresh("x"))).collect();
    let other = Term::Var(names.fresh("x"));
    let closing = Formula::forall(
        &var_name(&other),
        Formula::implies(
            hits(names, a, &other, triangle),
            Formula::or(xs.iter().map(|x| Formula::Eq(other.clone(), x.clone())).collect::<Vec<_>>()),
        ),
    );
    let mut body = closing;
    for i in (0..k).rev() {
        let mut parts = vec![hits(names, a, &xs[i], triangle)];
        parts.extend((0..i).map(|j| Formula::not(Formula::Eq(xs[i].clone(), xs[j].clone()))));
        parts.push(body);
        body = Formula::exists(&var_name(&xs[i]), Formula::and(parts));
    }
    body
}

/// Two-variable formula in `alpha`, `beta` defining the relation coded
/// at `e`, with `F` read off the order.
pub fn build_decoder_formula(e: Id) -> Formula {
    let mut names = Names(0);
    let n = &mut names;
    let [ta, tb, tc, g1, g2, s] = ["ta", "tb", "tc", "g1", "g2", "s"].map(Term::var);
    let (alpha, beta) = (Term::var("alpha"), Term::var("beta"));
    let e = Term::Param(e);
    let triangle = [ta.clone(), tb.clone(), tc.clone()];
    let counts = Formula::or([
        Formula::and([
            Formula::not(Formula::Eq(alpha.clone(), beta.clone())),
            exactly(n, &alpha, 2, &triangle),
            exactly(n, &beta, 3, &triangle),
        ]),
        Formula::and([Formula::Eq(alpha.clone(), beta.clone()), exactly(n, &alpha, 5, &triangle)]),
    ]);
    let body = Formula::and([
        Formula::lt(e.clone(), tc.clone()),
        base_point(n, &tc),
        Formula::exists("s", f_value(n, &e, &s, &tc)),
        Formula::lt(tc.clone(), g1.clone()),
        Formula::lt(ta.clone(), g1.clone()),
        f_value(n, &ta, &tc, &g1),
        Formula::not(base_point(n, &ta)),
        Formula::lt(tc.clone(), g2.clone()),
        Formula::lt(tb.clone(), g2.clone()),
        f_value(n, &tb, &tc, &g2),
        Formula::not(base_point(n, &tb)),
        defined(n, &ta, &tb),
        counts,
    ]);
    Formula::exists_all(&["tc", "g1", "ta", "g2", "tb"], body)
}
