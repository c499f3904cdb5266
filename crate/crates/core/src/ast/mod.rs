//! Abstract syntax of data-program pairs.
//!
//! Terms are constants, variables, the `_` placeholder of e-atoms, and
//! (before desugaring) arithmetic expression trees. Rules have a
//! conjunctive antecedent and a disjunctive consequent, each made of
//! ordinary atoms, predefined comparison/arithmetic atoms and cardinality
//! atoms.

mod desugar;
mod display;
mod validate;

pub use desugar::desugar_arithmetic;
pub use validate::{
    classify_set_variables, validate, Bindings, DataProgramPair, PredClass, PredInfo, Signature, ValidatedPair,
    ValidationError,
};

use std::fmt;

/// A constant of the Herbrand universe.
///
/// The derived order puts integers first (ascending) and symbols after
/// them (lexicographic), which is the order used for the universe.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constant {
    Int(i64),
    Sym(String),
}

impl Constant {
    pub fn sym(s: impl Into<String>) -> Self {
        Constant::Sym(s.into())
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Constant::Int(i) => Some(*i),
            Constant::Sym(_) => None,
        }
    }
}

impl From<i64> for Constant {
    fn from(v: i64) -> Self {
        Constant::Int(v)
    }
}

impl From<&str> for Constant {
    fn from(v: &str) -> Self {
        Constant::Sym(v.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

/// Raised when integer arithmetic leaves the 64-bit signed range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Overflow;

impl ArithOp {
    /// Evaluates `a op b`. `Ok(None)` means the result is undefined
    /// (division or remainder by zero). Division truncates toward zero.
    pub fn apply(self, a: i64, b: i64) -> Result<Option<i64>, Overflow> {
        let r = match self {
            ArithOp::Add => a.checked_add(b),
            ArithOp::Sub => a.checked_sub(b),
            ArithOp::Mul => a.checked_mul(b),
            ArithOp::Div | ArithOp::Mod if b == 0 => return Ok(None),
            ArithOp::Div => a.checked_div(b),
            ArithOp::Mod => a.checked_rem(b),
        };
        r.map(Some).ok_or(Overflow)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
            ArithOp::Mod => "mod",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            ArithOp::Add | ArithOp::Sub => 1,
            ArithOp::Mul | ArithOp::Div | ArithOp::Mod => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    /// Order comparisons only hold between integers; `=` and `!=` compare
    /// any two constants.
    pub fn holds(self, a: &Constant, b: &Constant) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            _ => match (a.as_int(), b.as_int()) {
                (Some(x), Some(y)) => match self {
                    CmpOp::Lt => x < y,
                    CmpOp::Le => x <= y,
                    CmpOp::Gt => x > y,
                    CmpOp::Ge => x >= y,
                    CmpOp::Eq | CmpOp::Ne => unreachable!(),
                },
                _ => false,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Const(Constant),
    Var(String),
    /// The `_` of an e-atom.
    Placeholder,
    /// Arithmetic expression; only present before desugaring.
    Expr(ArithOp, Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn sym(name: impl Into<String>) -> Self {
        Term::Const(Constant::Sym(name.into()))
    }

    pub fn int(v: i64) -> Self {
        Term::Const(Constant::Int(v))
    }

    pub fn is_simple(&self) -> bool {
        !matches!(self, Term::Expr(..))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Const(_) => true,
            Term::Var(_) | Term::Placeholder => false,
            Term::Expr(_, a, b) => a.is_ground() && b.is_ground(),
        }
    }

    pub fn has_placeholder(&self) -> bool {
        match self {
            Term::Placeholder => true,
            Term::Expr(_, a, b) => a.has_placeholder() || b.has_placeholder(),
            _ => false,
        }
    }

    pub fn has_expr(&self) -> bool {
        matches!(self, Term::Expr(..))
    }

    pub(crate) fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Var(v) => out.push(v),
            Term::Expr(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            _ => {}
        }
    }

    pub(crate) fn rename_var(&mut self, from: &str, to: &str) {
        match self {
            Term::Var(v) if v == from => *v = to.to_string(),
            Term::Expr(_, a, b) => {
                a.rename_var(from, to);
                b.rename_var(from, to);
            }
            _ => {}
        }
    }

    pub(crate) fn map_consts(&mut self, f: &mut impl FnMut(&mut Constant)) {
        match self {
            Term::Const(c) => f(c),
            Term::Expr(_, a, b) => {
                a.map_consts(f);
                b.map_consts(f);
            }
            _ => {}
        }
    }

    pub(crate) fn collect_consts<'a>(&'a self, out: &mut Vec<&'a Constant>) {
        match self {
            Term::Const(c) => out.push(c),
            Term::Expr(_, a, b) => {
                a.collect_consts(out);
                b.collect_consts(out);
            }
            _ => {}
        }
    }
}

/// An atom over a user relation symbol (data or program predicate).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredAtom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl PredAtom {
    pub fn new(pred: impl Into<String>, args: Vec<Term>) -> Self {
        PredAtom { pred: pred.into(), args }
    }

    /// An atom with at least one placeholder argument is an e-atom.
    pub fn is_e_atom(&self) -> bool {
        self.args.iter().any(Term::has_placeholder)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Pred(PredAtom),
    /// `lhs op rhs`.
    Cmp {
        op: CmpOp,
        lhs: Term,
        rhs: Term,
    },
    /// `result = lhs op rhs`, produced by desugaring.
    Arith {
        op: ArithOp,
        result: Term,
        lhs: Term,
        rhs: Term,
    },
}

impl Atom {
    pub fn pred(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Atom::Pred(PredAtom::new(pred, args))
    }

    pub fn is_predefined(&self) -> bool {
        !matches!(self, Atom::Pred(_))
    }

    pub(crate) fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Pred(p) => p.args.iter().collect(),
            Atom::Cmp { lhs, rhs, .. } => vec![lhs, rhs],
            Atom::Arith { result, lhs, rhs, .. } => vec![result, lhs, rhs],
        }
    }

    pub(crate) fn terms_mut(&mut self) -> Vec<&mut Term> {
        match self {
            Atom::Pred(p) => p.args.iter_mut().collect(),
            Atom::Cmp { lhs, rhs, .. } => vec![lhs, rhs],
            Atom::Arith { result, lhs, rhs, .. } => vec![result, lhs, rhs],
        }
    }

    pub(crate) fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        for t in self.terms() {
            t.collect_vars(out);
        }
    }

    pub fn has_placeholder(&self) -> bool {
        self.terms().iter().any(|t| t.has_placeholder())
    }
}

/// `template : cond, cond` inside a cardinality atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetDefinition {
    pub template: PredAtom,
    pub conditions: Vec<Atom>,
}

impl SetDefinition {
    pub fn new(template: PredAtom, conditions: Vec<Atom>) -> Self {
        SetDefinition { template, conditions }
    }

    pub(crate) fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        for t in &self.template.args {
            t.collect_vars(out);
        }
        for c in &self.conditions {
            c.collect_vars(out);
        }
    }
}

/// `L { S1 ; ... ; Sk } U`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CardinalityAtom {
    pub lower: Option<Term>,
    pub upper: Option<Term>,
    pub defs: Vec<SetDefinition>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Atom(Atom),
    Card(CardinalityAtom),
}

impl From<Atom> for Literal {
    fn from(a: Atom) -> Self {
        Literal::Atom(a)
    }
}

impl From<CardinalityAtom> for Literal {
    fn from(c: CardinalityAtom) -> Self {
        Literal::Card(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flavor {
    Generating,
    Horn,
    Verifying,
}

/// Location of a construct in its source text.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SourceSpan {
    pub file: Option<String>,
    pub line: usize,
    pub column: usize,
    pub start: usize,
    pub end: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.file {
            Some(file) => write!(f, "{file}:{}:{}", self.line, self.column),
            None => write!(f, "{}:{}", self.line, self.column),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub antecedent: Vec<Literal>,
    pub consequent: Vec<Literal>,
    /// `Horn` for rules written with `<-`. Rules written with `->` are
    /// left unset by the parser and classified by [`validate`]; setting
    /// `Generating` explicitly asks validation to check that the rule may
    /// belong to the generating part.
    pub flavor: Option<Flavor>,
    pub span: Option<SourceSpan>,
}

impl Rule {
    pub fn new(antecedent: Vec<Literal>, consequent: Vec<Literal>) -> Self {
        Rule { antecedent, consequent, flavor: None, span: None }
    }

    pub fn horn(head: PredAtom, body: Vec<Atom>) -> Self {
        Rule {
            antecedent: body.into_iter().map(Literal::Atom).collect(),
            consequent: vec![Literal::Atom(Atom::Pred(head))],
            flavor: Some(Flavor::Horn),
            span: None,
        }
    }

    pub fn with_flavor(mut self, flavor: Flavor) -> Self {
        self.flavor = Some(flavor);
        self
    }

    pub fn is_horn(&self) -> bool {
        self.flavor == Some(Flavor::Horn)
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.antecedent.iter().chain(self.consequent.iter())
    }

    /// Names of all predicates of ordinary atoms in the rule, including
    /// templates and conditions of set definitions.
    pub fn predicates(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for lit in self.literals() {
            match lit {
                Literal::Atom(Atom::Pred(p)) => out.push(p.pred.as_str()),
                Literal::Atom(_) => {}
                Literal::Card(c) => {
                    for d in &c.defs {
                        out.push(d.template.pred.as_str());
                        for cond in &d.conditions {
                            if let Atom::Pred(p) = cond {
                                out.push(p.pred.as_str());
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Every variable name occurring anywhere in the rule.
    pub fn all_vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for lit in self.literals() {
            match lit {
                Literal::Atom(a) => a.collect_vars(&mut out),
                Literal::Card(c) => {
                    for b in c.lower.iter().chain(c.upper.iter()) {
                        b.collect_vars(&mut out);
                    }
                    for d in &c.defs {
                        d.collect_vars(&mut out);
                    }
                }
            }
        }
        out
    }
}

/// A ground atom over a user predicate. Data facts and the atoms of a
/// ground theory both use this type.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub pred: String,
    pub args: Vec<Constant>,
}

impl GroundAtom {
    pub fn new(pred: impl Into<String>, args: Vec<Constant>) -> Self {
        GroundAtom { pred: pred.into(), args }
    }
}
