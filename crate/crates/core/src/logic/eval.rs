//! Evaluation over a finite poset. Formulas are compiled to an arena with
//! one slot per variable binding; quantifier ranges are narrowed by order
//! atoms that any witness must satisfy, and quantified subformulas are
//! memoized on the values of their free variables.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use fixedbitset::FixedBitSet;

use super::formula::{Formula, Term};
use crate::error::{Error, Result};
use crate::order::{Id, Poset};

const UNBOUND: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CTerm {
    Slot(usize),
    Elem(usize),
}

#[derive(Clone, Debug)]
enum Guard {
    /// Range is the down-set of the term, inclusive.
    Below(CTerm),
    Above(CTerm),
    Equal(CTerm),
    All(Vec<Guard>),
    Any(Vec<Guard>),
}

#[derive(Clone, Debug)]
enum Node {
    True,
    False,
    Le(CTerm, CTerm),
    Eq(CTerm, CTerm),
    Not(usize),
    And(Vec<usize>),
    Or(Vec<usize>),
    Implies(usize, usize),
    Exists(usize, usize, Option<Guard>),
    Forall(usize, usize, Option<Guard>),
}

#[derive(Debug)]
struct Compiled {
    nodes: Vec<Node>,
    free: Vec<Vec<usize>>,
    memoize: Vec<bool>,
    slots: usize,
    names: BTreeMap<String, usize>,
    root: usize,
}

struct Compiler<'p> {
    poset: &'p Poset,
    nodes: Vec<Node>,
    free: Vec<Vec<usize>>,
    size: Vec<usize>,
    scope: Vec<(String, usize)>,
    slots: usize,
}

fn merge(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

impl Compiler<'_> {
    fn term(&self, t: &Term) -> Result<CTerm> {
        match t {
            Term::Param(id) => Ok(CTerm::Elem(self.poset.idx(*id)?)),
            Term::Var(v) => self
                .scope
                .iter()
                .rev()
                .find(|(name, _)| name == v)
                .map(|&(_, s)| CTerm::Slot(s))
                .ok_or_else(|| Error::UnboundVariable(v.clone())),
        }
    }

    fn push(&mut self, node: Node, free: Vec<usize>, size: usize) -> usize {
        self.nodes.push(node);
        self.free.push(free);
        self.size.push(size);
        self.nodes.len() - 1
    }

    fn term_free(t: CTerm) -> Vec<usize> {
        match t {
            CTerm::Slot(s) => vec![s],
            CTerm::Elem(_) => vec![],
        }
    }

    fn compile(&mut self, phi: &Formula) -> Result<usize> {
        Ok(match phi {
            Formula::True => self.push(Node::True, vec![], 1),
            Formula::False => self.push(Node::False, vec![], 1),
            Formula::Le(a, b) | Formula::Eq(a, b) => {
                let (a, b) = (self.term(a)?, self.term(b)?);
                let free = merge(&Self::term_free(a), &Self::term_free(b));
                let node = if matches!(phi, Formula::Le(..)) { Node::Le(a, b) } else { Node::Eq(a, b) };
                self.push(node, free, 1)
            }
            Formula::Not(p) => {
                let p = self.compile(p)?;
                let (free, size) = (self.free[p].clone(), self.size[p] + 1);
                self.push(Node::Not(p), free, size)
            }
            Formula::And(ps) | Formula::Or(ps) => {
                let ids = ps.iter().map(|p| self.compile(p)).collect::<Result<Vec<_>>>()?;
                let free = ids.iter().fold(vec![], |acc, &i| merge(&acc, &self.free[i]));
                let size = 1 + ids.iter().map(|&i| self.size[i]).sum::<usize>();
                let node = if matches!(phi, Formula::And(_)) { Node::And(ids) } else { Node::Or(ids) };
                self.push(node, free, size)
            }
            Formula::Implies(a, b) => {
                let (a, b) = (self.compile(a)?, self.compile(b)?);
                let free = merge(&self.free[a], &self.free[b]);
                let size = 1 + self.size[a] + self.size[b];
                self.push(Node::Implies(a, b), free, size)
            }
            Formula::Exists(v, p) | Formula::Forall(v, p) => {
                let slot = self.slots;
                self.slots += 1;
                self.scope.push((v.clone(), slot));
                let body = self.compile(p)?;
                self.scope.pop();
                let free: Vec<usize> = self.free[body].iter().copied().filter(|&s| s != slot).collect();
                let size = 1 + self.size[body];
                let node = if matches!(phi, Formula::Exists(..)) {
                    Node::Exists(slot, body, witness_guard(&self.nodes, slot, body))
                } else {
                    Node::Forall(slot, body, counter_guard(&self.nodes, slot, body))
                };
                self.push(node, free, size)
            }
        })
    }
}

/// A range containing every value of `slot` that makes `n` true.
fn witness_guard(nodes: &[Node], slot: usize, n: usize) -> Option<Guard> {
    let other = |t: CTerm| t != CTerm::Slot(slot);
    match &nodes[n] {
        Node::Le(a, b) if *a == CTerm::Slot(slot) && other(*b) => Some(Guard::Below(*b)),
        Node::Le(a, b) if *b == CTerm::Slot(slot) && other(*a) => Some(Guard::Above(*a)),
        Node::Eq(a, b) if *a == CTerm::Slot(slot) && other(*b) => Some(Guard::Equal(*b)),
        Node::Eq(a, b) if *b == CTerm::Slot(slot) && other(*a) => Some(Guard::Equal(*a)),
        Node::And(ps) => {
            let gs: Vec<Guard> = ps.iter().filter_map(|&p| witness_guard(nodes, slot, p)).collect();
            (!gs.is_empty()).then_some(Guard::All(gs))
        }
        Node::Or(ps) => ps
            .iter()
            .map(|&p| witness_guard(nodes, slot, p))
            .collect::<Option<Vec<_>>>()
            .map(Guard::Any),
        Node::Exists(_, body, _) | Node::Forall(_, body, _) => witness_guard(nodes, slot, *body),
        Node::Not(p) => counter_guard(nodes, slot, *p),
        _ => None,
    }
}

/// A range containing every value of `slot` that makes `n` false.
fn counter_guard(nodes: &[Node], slot: usize, n: usize) -> Option<Guard> {
    match &nodes[n] {
        Node::Implies(a, _) => witness_guard(nodes, slot, *a),
        Node::Forall(_, body, _) => counter_guard(nodes, slot, *body),
        Node::Not(p) => witness_guard(nodes, slot, *p),
        Node::Or(ps) => {
            let gs: Vec<Guard> = ps.iter().filter_map(|&p| counter_guard(nodes, slot, p)).collect();
            (!gs.is_empty()).then_some(Guard::All(gs))
        }
        _ => None,
    }
}

/// Subformulas at least this large are memoized.
const MEMO_SIZE: usize = 6;

fn compile(phi: &Formula, poset: &Poset, names: &[String]) -> Result<Compiled> {
    let mut c = Compiler { poset, nodes: vec![], free: vec![], size: vec![], scope: vec![], slots: 0 };
    let mut slot_of = BTreeMap::new();
    for name in names {
        if !slot_of.contains_key(name) {
            slot_of.insert(name.clone(), c.slots);
            c.scope.push((name.clone(), c.slots));
            c.slots += 1;
        }
    }
    let root = c.compile(phi)?;
    let memoize = (0..c.nodes.len())
        .map(|i| matches!(c.nodes[i], Node::Exists(..) | Node::Forall(..)) || c.size[i] >= MEMO_SIZE)
        .collect();
    Ok(Compiled { nodes: c.nodes, free: c.free, memoize, slots: c.slots, names: slot_of, root })
}

/// Nodes with at most two free variables and at most this many table
/// entries get a flat memo.
const DENSE_LIMIT: usize = 1 << 20;

/// Memo for one node: a flat table indexed by the free-slot values when
/// small enough, a hash map otherwise.
#[derive(Clone, Debug)]
enum Memo {
    Dense(Vec<u8>),
    Sparse(HashMap<Box<[u32]>, bool>),
}

impl Memo {
    fn new(free: usize, n: usize) -> Memo {
        match n.checked_pow(free as u32) {
            Some(size) if free <= 2 && size <= DENSE_LIMIT => Memo::Dense(Vec::new()),
            _ => Memo::Sparse(HashMap::new()),
        }
    }
}

struct Run<'a> {
    poset: &'a Poset,
    c: &'a Compiled,
    memo: Vec<Memo>,
    key: Vec<u32>,
}

impl Run<'_> {
    fn value(&self, t: CTerm, env: &[u32]) -> Option<usize> {
        match t {
            CTerm::Elem(i) => Some(i),
            CTerm::Slot(s) => (env[s] != UNBOUND).then_some(env[s] as usize),
        }
    }

    fn range(&self, g: &Guard, env: &[u32]) -> Option<FixedBitSet> {
        let n = self.poset.len();
        match g {
            Guard::Below(t) | Guard::Above(t) | Guard::Equal(t) => {
                let i = self.value(*t, env)?;
                let mut bits = match g {
                    Guard::Below(_) => self.poset.below_bits(i).clone(),
                    Guard::Above(_) => self.poset.above_bits(i).clone(),
                    _ => FixedBitSet::with_capacity(n),
                };
                bits.insert(i);
                Some(bits)
            }
            Guard::All(gs) => gs.iter().filter_map(|g| self.range(g, env)).reduce(|mut a, b| {
                a.intersect_with(&b);
                a
            }),
            Guard::Any(gs) => {
                let mut out = FixedBitSet::with_capacity(n);
                for g in gs {
                    out.union_with(&self.range(g, env)?);
                }
                Some(out)
            }
        }
    }

    fn candidates(&self, guard: &Option<Guard>, env: &[u32]) -> Vec<u32> {
        match guard.as_ref().and_then(|g| self.range(g, env)) {
            Some(bits) => bits.ones().map(|i| i as u32).collect(),
            None => (0..self.poset.len() as u32).collect(),
        }
    }

    fn eval(&mut self, n: usize, env: &mut [u32]) -> bool {
        if !self.c.memoize[n] {
            return self.eval_node(n, env);
        }
        let size = self.poset.len();
        match &mut self.memo[n] {
            Memo::Dense(table) => {
                let free = &self.c.free[n];
                if table.is_empty() {
                    table.resize(size.pow(free.len() as u32), 0);
                }
                if free.iter().any(|&s| env[s] == UNBOUND) {
                    return self.eval_node(n, env);
                }
                let at = free.iter().fold(0usize, |acc, &s| acc * size + env[s] as usize);
                match table[at] {
                    1 => false,
                    2 => true,
                    _ => {
                        let v = self.eval_node(n, env);
                        if let Memo::Dense(table) = &mut self.memo[n] {
                            table[at] = 1 + v as u8;
                        }
                        v
                    }
                }
            }
            Memo::Sparse(map) => {
                self.key.clear();
                self.key.extend(self.c.free[n].iter().map(|&s| env[s]));
                if let Some(&v) = map.get(self.key.as_slice()) {
                    return v;
                }
                let key: Box<[u32]> = self.key.as_slice().into();
                let v = self.eval_node(n, env);
                if let Memo::Sparse(map) = &mut self.memo[n] {
                    map.insert(key, v);
                }
                v
            }
        }
    }

    fn eval_node(&mut self, n: usize, env: &mut [u32]) -> bool {
        let c = self.c;
        match &c.nodes[n] {
            Node::True => true,
            Node::False => false,
            Node::Le(a, b) => {
                let (a, b) = (self.value(*a, env).expect("bound"), self.value(*b, env).expect("bound"));
                a == b || self.poset.below_bits(b).contains(a)
            }
            Node::Eq(a, b) => self.value(*a, env) == self.value(*b, env),
            Node::Not(p) => !self.eval(*p, env),
            Node::And(ps) => ps.iter().all(|&p| self.eval(p, env)),
            Node::Or(ps) => ps.iter().any(|&p| self.eval(p, env)),
            Node::Implies(a, b) => !self.eval(*a, env) || self.eval(*b, env),
            Node::Exists(slot, body, guard) | Node::Forall(slot, body, guard) => {
                let exists = matches!(c.nodes[n], Node::Exists(..));
                let mut result = !exists;
                for i in self.candidates(guard, env) {
                    env[*slot] = i;
                    if self.eval(*body, env) == exists {
                        result = exists;
                        break;
                    }
                }
                env[*slot] = UNBOUND;
                result
            }
        }
    }
}

/// A formula compiled against one poset, with a persistent memo.
pub struct Model<'p> {
    poset: &'p Poset,
    compiled: Compiled,
    memo: Vec<Memo>,
}

impl<'p> Model<'p> {
    /// Free variables of `phi` must appear in `vars`; parameters must be
    /// carrier elements.
    pub fn new(phi: &Formula, poset: &'p Poset, vars: &[&str]) -> Result<Model<'p>> {
        let names: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
        if let Some(v) = phi.free_vars().into_iter().find(|v| !names.contains(v)) {
            return Err(Error::UnboundVariable(v));
        }
        let compiled = compile(phi, poset, &names)?;
        let memo = compiled.free.iter().map(|f| Memo::new(f.len(), poset.len())).collect();
        Ok(Model { poset, compiled, memo })
    }

    fn run<T>(&mut self, f: impl FnOnce(&mut Run) -> T) -> T {
        let mut run = Run { poset: self.poset, c: &self.compiled, memo: std::mem::take(&mut self.memo), key: vec![] };
        let out = f(&mut run);
        self.memo = run.memo;
        out
    }

    fn env(&self, assignment: &BTreeMap<String, Id>) -> Result<Vec<u32>> {
        let mut env = vec![UNBOUND; self.compiled.slots];
        for (name, &slot) in &self.compiled.names {
            let id = assignment.get(name).ok_or_else(|| Error::UnboundVariable(name.clone()))?;
            env[slot] = self.poset.idx(*id)? as u32;
        }
        Ok(env)
    }

    pub fn holds(&mut self, assignment: &BTreeMap<String, Id>) -> Result<bool> {
        let mut env = self.env(assignment)?;
        let root = self.compiled.root;
        Ok(self.run(|r| r.eval(root, &mut env)))
    }

    /// Tuples over `vars` (in the order given to `new`) satisfying the
    /// formula; fails once more than `budget` partial assignments are tried.
    pub fn extension(&mut self, budget: usize) -> Result<BTreeSet<Vec<Id>>> {
        let c = &self.compiled;
        let mut prefix = Vec::new();
        let mut conjuncts = Vec::new();
        flatten(c, c.root, &mut prefix, &mut conjuncts);
        let mut free_slots: Vec<(usize, String)> = c.names.iter().map(|(n, &s)| (s, n.clone())).collect();
        free_slots.sort();
        let mut order: Vec<usize> = prefix;
        order.extend(free_slots.iter().map(|(s, _)| *s));
        let position: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut at_level: Vec<Vec<usize>> = vec![vec![]; order.len() + 1];
        for &k in &conjuncts {
            let level = c.free[k].iter().map(|s| position[s] + 1).max().unwrap_or(0);
            at_level[level].push(k);
        }
        // guards computed against the conjunction of all top conjuncts
        let guards: Vec<Option<Guard>> = order
            .iter()
            .map(|&slot| {
                let gs: Vec<Guard> = conjuncts.iter().filter_map(|&k| witness_guard(&c.nodes, slot, k)).collect();
                (!gs.is_empty()).then_some(Guard::All(gs))
            })
            .collect();
        let search = Search { order, at_level, guards, free_slots: free_slots.iter().map(|(s, _)| *s).collect() };
        let mut env = vec![UNBOUND; c.slots];
        let mut found = BTreeSet::new();
        let mut steps = 0usize;
        let poset = self.poset;
        let ok = self.run(|r| {
            if !search.at_level[0].iter().all(|&k| r.eval(k, &mut env)) {
                return Ok(());
            }
            search.dfs(r, 0, &mut env, &mut found, &mut steps, budget)
        });
        ok?;
        Ok(found
            .into_iter()
            .map(|t: Vec<u32>| t.into_iter().map(|i| poset.id_at(i as usize)).collect())
            .collect())
    }
}

fn flatten(c: &Compiled, n: usize, prefix: &mut Vec<usize>, conjuncts: &mut Vec<usize>) {
    match &c.nodes[n] {
        Node::Exists(slot, body, _) => {
            prefix.push(*slot);
            flatten(c, *body, prefix, conjuncts);
        }
        Node::And(ps) => ps.iter().for_each(|&p| flatten(c, p, prefix, conjuncts)),
        _ => conjuncts.push(n),
    }
}

struct Search {
    order: Vec<usize>,
    at_level: Vec<Vec<usize>>,
    guards: Vec<Option<Guard>>,
    free_slots: Vec<usize>,
}

impl Search {
    fn dfs(
        &self,
        r: &mut Run,
        level: usize,
        env: &mut [u32],
        found: &mut BTreeSet<Vec<u32>>,
        steps: &mut usize,
        budget: usize,
    ) -> Result<()> {
        if level == self.order.len() {
            found.insert(self.free_slots.iter().map(|&s| env[s]).collect());
            return Ok(());
        }
        let slot = self.order[level];
        for i in r.candidates(&self.guards[level], env) {
            *steps += 1;
            if *steps > budget {
                return Err(Error::BudgetExceeded(format!("extension search exceeded {budget} assignments")));
            }
            env[slot] = i;
            if self.at_level[level + 1].iter().all(|&k| r.eval(k, env)) {
                self.dfs(r, level + 1, env, found, steps, budget)?;
            }
        }
        env[slot] = UNBOUND;
        Ok(())
    }
}

/// Truth of `phi` under `assignment`, which must cover its free variables.
pub fn evaluate(phi: &Formula, poset: &Poset, assignment: &BTreeMap<String, Id>) -> Result<bool> {
    let vars: Vec<&str> = assignment.keys().map(String::as_str).collect();
    Model::new(phi, poset, &vars)?.holds(assignment)
}

/// Default cap on partial assignments tried by `extension`.
pub const DEFAULT_BUDGET: usize = 50_000_000;

/// Satisfying tuples over `vars`; tuple entries follow `vars` order.
pub fn extension(phi: &Formula, poset: &Poset, vars: &[&str], budget: usize) -> Result<BTreeSet<Vec<Id>>> {
    let mut sorted: Vec<&str> = vars.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != vars.len() {
        return Err(Error::Invalid("repeated variable in extension tuple".into()));
    }
    Model::new(phi, poset, vars)?.extension(budget)
}
