//! Translation of pure DATALOG¬ programs to PS programs whose models are
//! the supported models.
//!
//! For a clause `r`: `p(X) :- q1(X1), .., qm(Xm), not q(m+1)(..), .., not qn(..)`
//! with body-only variables `Y`, a fresh predicate `d_r(X,Y)` stands for
//! the body. The rules
//!
//! ```text
//! d_r(X,Y) -> qi(Xi).                 i = 1..m
//! d_r(X,Y), qi(Xi) -> false.          i = m+1..n
//! q1(X1), .., qm(Xm) -> d_r(X,Y) | q(m+1)(..) | .. | qn(..).
//! d_r(X,Y) -> p(X).
//! ```
//!
//! make `d_r` equivalent to the body and `p` true when some body holds;
//! `p(X) -> d_r1(X,_,..) | .. | d_rk(X,_,..)` over the clauses of `p` gives
//! the converse.

use crate::ast::{Atom, DataProgramPair, GroundAtom, Literal, PredAtom, Rule, Term};
use crate::solver::{self, SolveOptions};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// `head :- positive, not negative.`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DatalogClause {
    pub head: PredAtom,
    pub positive: Vec<PredAtom>,
    pub negative: Vec<PredAtom>,
}

impl fmt::Display for DatalogClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        let body: Vec<String> = self
            .positive
            .iter()
            .map(ToString::to_string)
            .chain(self.negative.iter().map(|a| format!("not {a}")))
            .collect();
        if !body.is_empty() {
            write!(f, " :- {}", body.join(", "))?;
        }
        f.write_str(".")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TranslateError {
    #[error("the program is not pure: {0}")]
    NotPure(String),
    #[error("the data instance is empty")]
    EmptyData,
    #[error(transparent)]
    Pipeline(Box<crate::Error>),
}

impl TranslateError {
    pub fn code(&self) -> &'static str {
        match self {
            TranslateError::NotPure(_) => "E_NOT_PURE",
            TranslateError::EmptyData => "E_EMPTY_DATA",
            TranslateError::Pipeline(e) => e.code(),
        }
    }
}

impl From<crate::Error> for TranslateError {
    fn from(e: crate::Error) -> Self {
        TranslateError::Pipeline(Box::new(e))
    }
}

/// A constant-free program in head-normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PureProgram {
    clauses: Vec<DatalogClause>,
    intentional: BTreeSet<String>,
    extensional: BTreeMap<String, usize>,
}

fn not_pure(msg: String) -> TranslateError {
    TranslateError::NotPure(msg)
}

impl PureProgram {
    /// Checks purity: every clause for `p` has the same head `p(X)` with
    /// `X` distinct variables, no constants occur, some predicate occurs
    /// only in bodies, and no predicate name starts with `__`.
    pub fn new(clauses: Vec<DatalogClause>) -> Result<Self, TranslateError> {
        let mut heads: BTreeMap<&str, &PredAtom> = BTreeMap::new();
        for c in &clauses {
            let mut seen = BTreeSet::new();
            for t in &c.head.args {
                match t {
                    Term::Var(v) if seen.insert(v) => {}
                    _ => return Err(not_pure(format!("head arguments of `{c}` are not distinct variables"))),
                }
            }
            if let Some(h) = heads.insert(&c.head.pred, &c.head) {
                if *h != c.head {
                    return Err(not_pure(format!("clauses for `{}` have different heads", c.head.pred)));
                }
            }
            for a in std::iter::once(&c.head).chain(&c.positive).chain(&c.negative) {
                if a.pred.starts_with("__") {
                    return Err(not_pure(format!("predicate names starting with `__` are reserved: `{}`", a.pred)));
                }
                if a.args.iter().any(|t| !matches!(t, Term::Var(_))) {
                    return Err(not_pure(format!("`{c}` contains a constant")));
                }
            }
        }
        let intentional: BTreeSet<String> = heads.keys().map(|s| s.to_string()).collect();
        let mut extensional = BTreeMap::new();
        for c in &clauses {
            for a in c.positive.iter().chain(&c.negative) {
                if !intentional.contains(&a.pred) {
                    extensional.insert(a.pred.clone(), a.args.len());
                }
            }
        }
        if extensional.is_empty() {
            return Err(not_pure("no extensional predicate".into()));
        }
        Ok(PureProgram { clauses, intentional, extensional })
    }

    pub fn clauses(&self) -> &[DatalogClause] {
        &self.clauses
    }

    pub fn intentional(&self) -> &BTreeSet<String> {
        &self.intentional
    }

    /// Extensional predicates with their arities.
    pub fn extensional(&self) -> &BTreeMap<String, usize> {
        &self.extensional
    }
}

/// Name of the predicate standing for the body of the `index`-th clause
/// (from 1) for `pred`.
pub fn body_predicate(pred: &str, index: usize) -> String {
    format!("__d_{pred}_{index}")
}

fn lit(a: &PredAtom) -> Literal {
    Literal::Atom(Atom::Pred(a.clone()))
}

/// Translates a pure program to a PS program.
pub fn to_ps(p: &PureProgram) -> Vec<Rule> {
    let mut rules = Vec::new();
    let mut defs: BTreeMap<&str, Vec<PredAtom>> = BTreeMap::new();
    for c in &p.clauses {
        let def = defs.entry(&c.head.pred).or_default();
        let name = body_predicate(&c.head.pred, def.len() + 1);
        let mut args = c.head.args.clone();
        for a in c.positive.iter().chain(&c.negative) {
            for t in &a.args {
                if !args.contains(t) {
                    args.push(t.clone());
                }
            }
        }
        let d = PredAtom::new(name, args);
        for q in &c.positive {
            rules.push(Rule::new(vec![lit(&d)], vec![lit(q)]));
        }
        for q in &c.negative {
            rules.push(Rule::new(vec![lit(&d), lit(q)], vec![]));
        }
        rules.push(Rule::new(
            c.positive.iter().map(lit).collect(),
            std::iter::once(&d).chain(&c.negative).map(lit).collect(),
        ));
        rules.push(Rule::new(vec![lit(&d)], vec![lit(&c.head)]));
        // The body variables become placeholders in the completion.
        let mut e = d.clone();
        for t in &mut e.args[c.head.args.len()..] {
            *t = Term::Placeholder;
        }
        def.push(e);
    }
    for c in &p.clauses {
        if let Some(def) = defs.remove(c.head.pred.as_str()) {
            rules.push(Rule::new(vec![lit(&c.head)], def.iter().map(lit).collect()));
        }
    }
    rules
}

/// Supported models of `data` with `p`, projected to the predicates in
/// `show`; sorted and free of duplicates.
pub fn supported_models(
    data: &[GroundAtom],
    p: &PureProgram,
    show: &[String],
) -> Result<Vec<Vec<GroundAtom>>, TranslateError> {
    if data.is_empty() {
        return Err(TranslateError::EmptyData);
    }
    let mut pair = DataProgramPair::new(data.to_vec(), to_ps(p));
    for (pred, &arity) in &p.extensional {
        pair = pair.declare_data(pred.clone(), arity);
    }
    let core = match crate::core_of(&pair) {
        Ok(core) => core,
        Err(crate::Error::Ground(e)) if e.code() == "E_INCONSISTENT" => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut out = BTreeSet::new();
    solver::solve(&core, &SolveOptions::all(), |m| {
        let proj: Vec<GroundAtom> =
            m.atoms.iter().map(|&a| core.atom(a)).filter(|a| show.contains(&a.pred)).cloned().collect();
        out.insert(proj);
        true
    });
    Ok(out.into_iter().collect())
}

/// Parses `.dlg` text into a pure program.
pub fn parse_pure(text: &str) -> Result<PureProgram, crate::Error> {
    Ok(PureProgram::new(crate::parser::parse_datalog(text)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Constant;

    fn sym_fact(pred: &str, args: &[&str]) -> GroundAtom {
        GroundAtom::new(pred, args.iter().map(|a| Constant::sym(*a)).collect())
    }

    fn strings(models: &[Vec<GroundAtom>]) -> Vec<String> {
        models.iter().map(|m| m.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")).collect()
    }

    #[test]
    fn single_clause_translation() {
        let p = parse_pure("p(X) :- e(X), not q(X).").unwrap();
        let shown: Vec<String> = to_ps(&p).iter().map(ToString::to_string).collect();
        assert_eq!(
            shown,
            [
                "__d_p_1(X) -> e(X).",
                "__d_p_1(X), q(X) -> false.",
                "e(X) -> __d_p_1(X) | q(X).",
                "__d_p_1(X) -> p(X).",
                "p(X) -> __d_p_1(X).",
            ]
        );
    }

    #[test]
    fn body_variables_become_placeholders() {
        let p = parse_pure("tc(X,Y) :- r(X,Y). tc(X,Y) :- r(X,Z), tc(Z,Y).").unwrap();
        let rules = to_ps(&p);
        assert_eq!(rules[5].to_string(), "r(X,Z), tc(Z,Y) -> __d_tc_2(X,Y,Z).");
        assert_eq!(rules.last().unwrap().to_string(), "tc(X,Y) -> __d_tc_1(X,Y) | __d_tc_2(X,Y,_).");
    }

    #[test]
    fn purity_violations() {
        for text in [
            "p(X,X) :- e(X).",
            "p(a) :- e(a).",
            "p(X) :- e(X). p(Y) :- e(Y).",
            "p(X) :- q(X). q(X) :- p(X).",
            "__p(X) :- e(X).",
        ] {
            assert_eq!(parse_pure(text).unwrap_err().code(), "E_NOT_PURE", "{text}");
        }
    }

    #[test]
    fn two_supported_models() {
        let p = parse_pure("p(X) :- e(X), not q(X). q(X) :- e(X), not p(X).").unwrap();
        let show = ["p".to_string(), "q".to_string()];
        let models = supported_models(&[sym_fact("e", &["a"])], &p, &show).unwrap();
        assert_eq!(strings(&models), ["p(a)", "q(a)"]);
    }

    #[test]
    fn transitive_closure_is_unique() {
        let p = parse_pure("tc(X,Y) :- r(X,Y). tc(X,Y) :- r(X,Z), tc(Z,Y).").unwrap();
        let data = [sym_fact("r", &["a", "b"]), sym_fact("r", &["b", "c"])];
        let models = supported_models(&data, &p, &["tc".to_string()]).unwrap();
        assert_eq!(strings(&models), ["tc(a,b) tc(a,c) tc(b,c)"]);
    }

    #[test]
    fn empty_data_is_rejected() {
        let p = parse_pure("p(X) :- e(X).").unwrap();
        assert_eq!(supported_models(&[], &p, &[]).unwrap_err().code(), "E_EMPTY_DATA");
    }

    #[test]
    fn clause_display() {
        let p = parse_pure("p(X) :- e(X), not q(X).").unwrap();
        assert_eq!(p.clauses()[0].to_string(), "p(X) :- e(X), not q(X).");
    }
}
