use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::order::Id;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    /// A carrier element fixed in the formula.
    Param(Id),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }
}

impl From<Id> for Term {
    fn from(id: Id) -> Term {
        Term::Param(id)
    }
}

impl From<&str> for Term {
    fn from(name: &str) -> Term {
        Term::var(name)
    }
}

impl From<&String> for Term {
    fn from(name: &String) -> Term {
        Term::Var(name.clone())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Param(id) => write!(f, "#{id}"),
        }
    }
}

/// First-order formula over `<=` and `=`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Le(Term, Term),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn le(a: impl Into<Term>, b: impl Into<Term>) -> Formula {
        Formula::Le(a.into(), b.into())
    }

    pub fn eq(a: impl Into<Term>, b: impl Into<Term>) -> Formula {
        Formula::Eq(a.into(), b.into())
    }

    /// `a <= b` and not `a = b`.
    pub fn lt(a: impl Into<Term>, b: impl Into<Term>) -> Formula {
        let (a, b) = (a.into(), b.into());
        Formula::And(vec![Formula::Le(a.clone(), b.clone()), Formula::not(Formula::Eq(a, b))])
    }

    pub fn ne(a: impl Into<Term>, b: impl Into<Term>) -> Formula {
        Formula::not(Formula::eq(a, b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(phi: Formula) -> Formula {
        Formula::Not(Box::new(phi))
    }

    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let parts: Vec<Formula> = parts.into_iter().collect();
        if parts.is_empty() {
            Formula::True
        } else {
            Formula::And(parts)
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let parts: Vec<Formula> = parts.into_iter().collect();
        if parts.is_empty() {
            Formula::False
        } else {
            Formula::Or(parts)
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(v: &str, body: Formula) -> Formula {
        Formula::Exists(v.to_string(), Box::new(body))
    }

    pub fn forall(v: &str, body: Formula) -> Formula {
        Formula::Forall(v.to_string(), Box::new(body))
    }

    /// Nested existentials, outermost first.
    pub fn exists_all(vars: &[&str], body: Formula) -> Formula {
        vars.iter().rev().fold(body, |acc, v| Formula::exists(v, acc))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut term = |t: &Term, bound: &Vec<String>| {
            if let Term::Var(v) = t {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Le(a, b) | Formula::Eq(a, b) => {
                term(a, bound);
                term(b, bound);
            }
            Formula::Not(p) => p.collect_free(bound, out),
            Formula::And(ps) | Formula::Or(ps) => ps.iter().for_each(|p| p.collect_free(bound, out)),
            Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, p) | Formula::Forall(v, p) => {
                bound.push(v.clone());
                p.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn parameters(&self) -> BTreeSet<Id> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| {
            if let Term::Param(id) = t {
                out.insert(*id);
            }
        });
        out
    }

    fn visit_terms(&self, f: &mut impl FnMut(&Term)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Le(a, b) | Formula::Eq(a, b) => {
                f(a);
                f(b);
            }
            Formula::Not(p) | Formula::Exists(_, p) | Formula::Forall(_, p) => p.visit_terms(f),
            Formula::And(ps) | Formula::Or(ps) => ps.iter().for_each(|p| p.visit_terms(f)),
            Formula::Implies(a, b) => {
                a.visit_terms(f);
                b.visit_terms(f);
            }
        }
    }

    /// Number of nested quantifiers along the deepest path.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Le(..) | Formula::Eq(..) => 0,
            Formula::Not(p) => p.quantifier_depth(),
            Formula::And(ps) | Formula::Or(ps) => ps.iter().map(Formula::quantifier_depth).max().unwrap_or(0),
            Formula::Implies(a, b) => a.quantifier_depth().max(b.quantifier_depth()),
            Formula::Exists(_, p) | Formula::Forall(_, p) => 1 + p.quantifier_depth(),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, head: &str, ps: &[Formula]| {
            write!(f, "({head}")?;
            for p in ps {
                write!(f, " {p}")?;
            }
            f.write_str(")")
        };
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Le(a, b) => write!(f, "(le {a} {b})"),
            Formula::Eq(a, b) => write!(f, "(eq {a} {b})"),
            Formula::Not(p) => write!(f, "(not {p})"),
            Formula::And(ps) => list(f, "and", ps),
            Formula::Or(ps) => list(f, "or", ps),
            Formula::Implies(a, b) => write!(f, "(-> {a} {b})"),
            Formula::Exists(v, p) => write!(f, "(exists {v} {p})"),
            Formula::Forall(v, p) => write!(f, "(forall {v} {p})"),
        }
    }
}

#[derive(Debug, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        match ch {
            '(' | ')' => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(ch.to_string());
            }
            c if c.is_whitespace() => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
            c => current.push(c),
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

fn read(tokens: &[String], pos: &mut usize) -> Result<Sexp> {
    let token = tokens.get(*pos).ok_or_else(|| Error::Parse("unexpected end of formula".into()))?;
    *pos += 1;
    match token.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos).map(String::as_str) {
                    Some(")") => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    Some(_) => items.push(read(tokens, pos)?),
                    None => return Err(Error::Parse("unbalanced parenthesis".into())),
                }
            }
        }
        ")" => Err(Error::Parse("unexpected `)`".into())),
        atom => Ok(Sexp::Atom(atom.to_string())),
    }
}

fn term(s: &Sexp) -> Result<Term> {
    match s {
        Sexp::Atom(a) => match a.strip_prefix('#') {
            Some(n) => n
                .parse::<u32>()
                .map(|n| Term::Param(Id(n)))
                .map_err(|_| Error::Parse(format!("bad parameter `{a}`"))),
            None if is_identifier(a) => Ok(Term::Var(a.clone())),
            None => Err(Error::Parse(format!("bad variable `{a}`"))),
        },
        Sexp::List(_) => Err(Error::Parse("expected a term".into())),
    }
}

fn is_identifier(a: &str) -> bool {
    let mut chars = a.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
        && !matches!(a, "true" | "false")
}

fn formula(s: &Sexp) -> Result<Formula> {
    let items = match s {
        Sexp::Atom(a) if a == "true" => return Ok(Formula::True),
        Sexp::Atom(a) if a == "false" => return Ok(Formula::False),
        Sexp::Atom(a) => return Err(Error::Parse(format!("unexpected atom `{a}`"))),
        Sexp::List(items) => items,
    };
    let (head, args) = match items.split_first() {
        Some((Sexp::Atom(h), args)) => (h.as_str(), args),
        _ => return Err(Error::Parse("expected an operator".into())),
    };
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(Error::Parse(format!("`{head}` takes {n} arguments, got {}", args.len())))
        }
    };
    match head {
        "le" | "eq" | "lt" => {
            arity(2)?;
            let (a, b) = (term(&args[0])?, term(&args[1])?);
            Ok(match head {
                "le" => Formula::Le(a, b),
                "eq" => Formula::Eq(a, b),
                _ => Formula::lt(a, b),
            })
        }
        "not" => {
            arity(1)?;
            Ok(Formula::not(formula(&args[0])?))
        }
        "and" | "or" => {
            let parts = args.iter().map(formula).collect::<Result<Vec<_>>>()?;
            Ok(if head == "and" { Formula::And(parts) } else { Formula::Or(parts) })
        }
        "->" => {
            arity(2)?;
            Ok(Formula::implies(formula(&args[0])?, formula(&args[1])?))
        }
        "exists" | "forall" => {
            arity(2)?;
            let v = match term(&args[0])? {
                Term::Var(v) => v,
                Term::Param(_) => return Err(Error::Parse("cannot quantify a parameter".into())),
            };
            let body = Box::new(formula(&args[1])?);
            Ok(if head == "exists" { Formula::Exists(v, body) } else { Formula::Forall(v, body) })
        }
        other => Err(Error::Parse(format!("unknown operator `{other}`"))),
    }
}

impl FromStr for Formula {
    type Err = Error;

    fn from_str(text: &str) -> Result<Formula> {
        let tokens = tokenize(text);
        let mut pos = 0;
        let sexp = read(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::Parse("trailing input after formula".into()));
        }
        formula(&sexp)
    }
}
