//! Propositional theories over interned ground atoms, and the `.gnd`
//! text format.

use crate::ast::GroundAtom;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

pub type AtomId = u32;

/// `lower { members } upper` over atom ids. Members are sorted and
/// distinct.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CAtom {
    pub lower: u32,
    pub upper: u32,
    pub members: Vec<AtomId>,
}

impl CAtom {
    pub fn new(lower: u32, upper: u32, mut members: Vec<AtomId>) -> Self {
        members.sort_unstable();
        members.dedup();
        CAtom { lower, upper, members }
    }

    pub fn count<I: Interpretation + ?Sized>(&self, m: &I) -> usize {
        self.members.iter().filter(|&&a| m.holds(a)).count()
    }

    pub fn holds<I: Interpretation + ?Sized>(&self, m: &I) -> bool {
        let k = self.count(m) as u64;
        u64::from(self.lower) <= k && k <= u64::from(self.upper)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GLit {
    Atom(AtomId),
    Card(CAtom),
}

impl GLit {
    pub fn holds<I: Interpretation + ?Sized>(&self, m: &I) -> bool {
        match self {
            GLit::Atom(a) => m.holds(*a),
            GLit::Card(c) => c.holds(m),
        }
    }

    pub fn atoms(&self) -> &[AtomId] {
        match self {
            GLit::Atom(a) => std::slice::from_ref(a),
            GLit::Card(c) => &c.members,
        }
    }

    fn size(&self) -> usize {
        self.atoms().len()
    }
}

/// `A1, ..., Am -> B1 | ... | Bn` over ground literals. An empty
/// antecedent is `true`, an empty consequent `false`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GRule {
    pub antecedent: Vec<GLit>,
    pub consequent: Vec<GLit>,
}

impl GRule {
    pub fn new(antecedent: Vec<GLit>, consequent: Vec<GLit>) -> Self {
        GRule { antecedent, consequent }
    }

    pub fn atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.antecedent.iter().chain(&self.consequent).flat_map(|l| l.atoms().iter().copied())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HornRule {
    pub head: AtomId,
    pub body: Vec<AtomId>,
}

/// Truth of ground atoms.
pub trait Interpretation {
    fn holds(&self, atom: AtomId) -> bool;
}

impl Interpretation for [bool] {
    fn holds(&self, atom: AtomId) -> bool {
        self[atom as usize]
    }
}

impl Interpretation for Vec<bool> {
    fn holds(&self, atom: AtomId) -> bool {
        self[atom as usize]
    }
}

impl Interpretation for BTreeSet<AtomId> {
    fn holds(&self, atom: AtomId) -> bool {
        self.contains(&atom)
    }
}

impl Interpretation for HashSet<AtomId> {
    fn holds(&self, atom: AtomId) -> bool {
        self.contains(&atom)
    }
}

/// True iff some antecedent literal is false or some consequent literal
/// is true under `m`.
pub fn satisfies<I: Interpretation + ?Sized>(m: &I, rule: &GRule) -> bool {
    rule.antecedent.iter().any(|l| !l.holds(m)) || rule.consequent.iter().any(|l| l.holds(m))
}

/// Least model of `base` closed under `horn`, by counter-based forward
/// chaining. `base` and the result are indexed by atom id.
pub fn closure_of(base: &[bool], horn: &[HornRule]) -> Vec<bool> {
    let mut out = base.to_vec();
    let mut remaining: Vec<usize> = horn.iter().map(|h| h.body.len()).collect();
    let mut watch: HashMap<AtomId, Vec<usize>> = HashMap::new();
    for (i, h) in horn.iter().enumerate() {
        for &b in &h.body {
            watch.entry(b).or_default().push(i);
        }
    }
    let mut queue: Vec<AtomId> = (0..out.len() as AtomId).filter(|&a| out[a as usize]).collect();
    let fire = |i: usize, out: &mut Vec<bool>, queue: &mut Vec<AtomId>| {
        let head = horn[i].head;
        if !out[head as usize] {
            out[head as usize] = true;
            queue.push(head);
        }
    };
    for i in 0..horn.len() {
        if remaining[i] == 0 {
            fire(i, &mut out, &mut queue);
        }
    }
    while let Some(a) = queue.pop() {
        if let Some(rs) = watch.get(&a) {
            for &i in rs {
                remaining[i] -= 1;
                if remaining[i] == 0 {
                    fire(i, &mut out, &mut queue);
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("core file, line {line}: {message}")]
pub struct CoreFormatError {
    pub line: usize,
    pub message: String,
}

/// A propositional theory: the atom table, rules over atom ids, Horn
/// rules, and the atoms whose value is fixed.
///
/// Closure atoms (atoms of predicates defined by Horn rules) are never
/// part of a model; their value is the least fixpoint of the Horn rules
/// over the model. A rule mentioning a closure atom is a verifying rule.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GroundTheory {
    atoms: Vec<GroundAtom>,
    index: HashMap<GroundAtom, AtomId>,
    closure: Vec<bool>,
    fixed: Vec<Option<bool>>,
    pub rules: Vec<GRule>,
    pub horn: Vec<HornRule>,
}

impl GroundTheory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns `atom`, returning its id. Interning an atom twice returns
    /// the same id.
    pub fn add_atom(&mut self, atom: GroundAtom, closure: bool) -> AtomId {
        if let Some(&id) = self.index.get(&atom) {
            return id;
        }
        let id = self.atoms.len() as AtomId;
        self.index.insert(atom.clone(), id);
        self.atoms.push(atom);
        self.closure.push(closure);
        self.fixed.push(None);
        id
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom(&self, id: AtomId) -> &GroundAtom {
        &self.atoms[id as usize]
    }

    pub fn atoms(&self) -> &[GroundAtom] {
        &self.atoms
    }

    pub fn lookup(&self, atom: &GroundAtom) -> Option<AtomId> {
        self.index.get(atom).copied()
    }

    pub fn is_closure(&self, id: AtomId) -> bool {
        self.closure[id as usize]
    }

    pub(crate) fn set_closure(&mut self, id: AtomId, closure: bool) {
        self.closure[id as usize] = closure;
    }

    /// Value fixed during simplification, if any.
    pub fn fixed(&self, id: AtomId) -> Option<bool> {
        self.fixed[id as usize]
    }

    pub fn fix(&mut self, id: AtomId, value: bool) {
        self.fixed[id as usize] = Some(value);
    }

    /// Atoms fixed true. Without the closure atoms among them this is the
    /// set T of atoms true in every model.
    pub fn forced_true(&self) -> impl Iterator<Item = AtomId> + '_ {
        (0..self.atoms.len() as AtomId).filter(|&a| self.fixed(a) == Some(true))
    }

    /// Atoms fixed false.
    pub fn forced_false(&self) -> impl Iterator<Item = AtomId> + '_ {
        (0..self.atoms.len() as AtomId).filter(|&a| self.fixed(a) == Some(false))
    }

    /// Atoms that are neither fixed nor closure atoms.
    pub fn free_atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        (0..self.atoms.len() as AtomId).filter(|&a| self.fixed(a).is_none() && !self.is_closure(a))
    }

    pub fn is_verifying(&self, rule: &GRule) -> bool {
        rule.atoms().any(|a| self.is_closure(a))
    }

    pub fn has_catoms(&self) -> bool {
        self.rules.iter().any(|r| r.antecedent.iter().chain(&r.consequent).any(|l| matches!(l, GLit::Card(_))))
    }

    /// Total number of atom occurrences in rules and Horn rules, counting
    /// every member of a c-atom.
    pub fn size(&self) -> usize {
        let rules: usize =
            self.rules.iter().map(|r| r.antecedent.iter().chain(&r.consequent).map(GLit::size).sum::<usize>()).sum();
        let horn: usize = self.horn.iter().map(|h| 1 + h.body.len()).sum();
        rules + horn
    }

    /// Decides whether `m` (indexed by atom id) is a model: fixed atoms
    /// have their fixed value, and the closure of the non-closure atoms of
    /// `m` satisfies every rule. Values of closure atoms in `m` are ignored.
    pub fn is_model(&self, m: &[bool]) -> bool {
        let mut base = m.to_vec();
        for a in 0..self.atoms.len() {
            if self.closure[a] {
                base[a] = false;
            } else if let Some(v) = self.fixed[a] {
                if base[a] != v {
                    return false;
                }
            }
        }
        let closed = closure_of(&base, &self.horn);
        self.rules.iter().all(|r| satisfies(closed.as_slice(), r))
    }

    fn write_lit(&self, out: &mut String, lit: &GLit) {
        match lit {
            GLit::Atom(a) => write!(out, "{}", self.atom(*a)).unwrap(),
            GLit::Card(c) => {
                write!(out, "{} {{ ", c.lower).unwrap();
                for (i, m) in c.members.iter().enumerate() {
                    if i > 0 {
                        out.push_str("; ");
                    }
                    write!(out, "{}", self.atom(*m)).unwrap();
                }
                write!(out, " }} {}", c.upper).unwrap();
            }
        }
    }

    /// Prints a rule in program syntax, naming atoms.
    pub fn rule_to_string(&self, rule: &GRule) -> String {
        let mut out = String::new();
        let join = |out: &mut String, lits: &[GLit], sep: &str| {
            for (i, l) in lits.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                self.write_lit(out, l);
            }
        };
        match (rule.antecedent.is_empty(), rule.consequent.is_empty()) {
            (true, true) => out.push_str("true -> false"),
            (true, false) => join(&mut out, &rule.consequent, " | "),
            (false, true) => {
                join(&mut out, &rule.antecedent, ", ");
                out.push_str(" -> false");
            }
            (false, false) => {
                join(&mut out, &rule.antecedent, ", ");
                out.push_str(" -> ");
                join(&mut out, &rule.consequent, " | ");
            }
        }
        out.push('.');
        out
    }

    pub fn horn_to_string(&self, rule: &HornRule) -> String {
        let mut out = format!("{} <- ", self.atom(rule.head));
        if rule.body.is_empty() {
            out.push_str("true");
        }
        for (i, b) in rule.body.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            write!(out, "{}", self.atom(*b)).unwrap();
        }
        out.push('.');
        out
    }

    /// All rules and Horn rules in program syntax, one per line.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            out.push_str(&self.rule_to_string(r));
            out.push('\n');
        }
        for h in &self.horn {
            out.push_str(&self.horn_to_string(h));
            out.push('\n');
        }
        out
    }

    /// Serializes to the `.gnd` format.
    pub fn to_gnd(&self) -> String {
        let mut out = String::from("gnd 1\n");
        for (i, a) in self.atoms.iter().enumerate() {
            writeln!(out, "a {i} {a}").unwrap();
        }
        for a in (0..self.atoms.len() as AtomId).filter(|&a| self.is_closure(a)) {
            writeln!(out, "k {a}").unwrap();
        }
        for a in self.forced_true() {
            writeln!(out, "t {a}").unwrap();
        }
        for a in self.forced_false() {
            writeln!(out, "f {a}").unwrap();
        }
        let lits = |out: &mut String, lits: &[GLit]| {
            for l in lits {
                match l {
                    GLit::Atom(a) => write!(out, " {a}").unwrap(),
                    GLit::Card(c) => {
                        write!(out, " c {} {} (", c.lower, c.upper).unwrap();
                        for m in &c.members {
                            write!(out, " {m}").unwrap();
                        }
                        out.push_str(" )");
                    }
                }
            }
        };
        for r in &self.rules {
            out.push('r');
            lits(&mut out, &r.antecedent);
            out.push_str(" =>");
            lits(&mut out, &r.consequent);
            out.push('\n');
        }
        for h in &self.horn {
            write!(out, "h {} <-", h.head).unwrap();
            for b in &h.body {
                write!(out, " {b}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Reads the `.gnd` format. Atoms listed on `k` lines and heads of
    /// Horn rules are closure atoms.
    pub fn from_gnd(text: &str) -> Result<Self, CoreFormatError> {
        let mut t = GroundTheory::new();
        let mut seen_header = false;
        for (ln, line) in text.lines().enumerate() {
            let line_no = ln + 1;
            let err = |message: String| CoreFormatError { line: line_no, message };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if !seen_header {
                if line != "gnd 1" {
                    return Err(err("expected header `gnd 1`".into()));
                }
                seen_header = true;
                continue;
            }
            let (kind, rest) = line.split_once(' ').unwrap_or((line, ""));
            let n = t.atoms.len();
            let id = |s: &str| -> Result<AtomId, CoreFormatError> {
                let v: AtomId = s.parse().map_err(|_| err(format!("bad atom id `{s}`")))?;
                if (v as usize) < n {
                    Ok(v)
                } else {
                    Err(err(format!("unknown atom id {v}")))
                }
            };
            match kind {
                "a" => {
                    let (num, atom) = rest.split_once(' ').ok_or_else(|| err("malformed atom line".into()))?;
                    if num.parse::<usize>().ok() != Some(n) {
                        return Err(err(format!("expected atom id {n}")));
                    }
                    let atom = crate::parser::parse_ground_atom(atom).map_err(|e| err(e.message()))?;
                    if t.lookup(&atom).is_some() {
                        return Err(err(format!("atom `{atom}` listed twice")));
                    }
                    t.add_atom(atom, false);
                }
                "k" => {
                    let a = id(rest.trim())?;
                    t.set_closure(a, true);
                }
                "t" | "f" => {
                    let a = id(rest.trim())?;
                    t.fix(a, kind == "t");
                }
                "r" => {
                    let toks: Vec<&str> = rest.split_whitespace().collect();
                    let arrow = toks.iter().position(|&s| s == "=>").ok_or_else(|| err("missing `=>`".into()))?;
                    let parse_lits = |toks: &[&str]| -> Result<Vec<GLit>, CoreFormatError> {
                        let mut out = Vec::new();
                        let mut i = 0;
                        while i < toks.len() {
                            if toks[i] == "c" {
                                let bound = |s: Option<&&str>| -> Result<u32, CoreFormatError> {
                                    s.and_then(|s| s.parse().ok()).ok_or_else(|| err("bad c-atom bound".into()))
                                };
                                let lo = bound(toks.get(i + 1))?;
                                let hi = bound(toks.get(i + 2))?;
                                if toks.get(i + 3) != Some(&"(") {
                                    return Err(err("expected `(`".into()));
                                }
                                let close = toks[i + 4..]
                                    .iter()
                                    .position(|&s| s == ")")
                                    .ok_or_else(|| err("expected `)`".into()))?
                                    + i
                                    + 4;
                                let members =
                                    toks[i + 4..close].iter().map(|s| id(s)).collect::<Result<Vec<_>, _>>()?;
                                out.push(GLit::Card(CAtom::new(lo, hi, members)));
                                i = close + 1;
                            } else {
                                out.push(GLit::Atom(id(toks[i])?));
                                i += 1;
                            }
                        }
                        Ok(out)
                    };
                    let antecedent = parse_lits(&toks[..arrow])?;
                    let consequent = parse_lits(&toks[arrow + 1..])?;
                    t.rules.push(GRule { antecedent, consequent });
                }
                "h" => {
                    let toks: Vec<&str> = rest.split_whitespace().collect();
                    if toks.len() < 2 || toks[1] != "<-" {
                        return Err(err("malformed Horn line".into()));
                    }
                    let head = id(toks[0])?;
                    let body = toks[2..].iter().map(|s| id(s)).collect::<Result<Vec<_>, _>>()?;
                    t.horn.push(HornRule { head, body });
                }
                other => return Err(err(format!("unknown line kind `{other}`"))),
            }
        }
        if !seen_header {
            return Err(CoreFormatError { line: 1, message: "expected header `gnd 1`".into() });
        }
        let heads: Vec<AtomId> = t.horn.iter().map(|h| h.head).collect();
        for h in heads {
            t.set_closure(h, true);
        }
        Ok(t)
    }
}
