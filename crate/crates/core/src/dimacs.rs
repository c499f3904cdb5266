//! DIMACS CNF export of plain cores and lifting of external assignments.
//!
//! Only cores without c-atoms and Horn rules are exported. Variables are
//! the free atoms of the core in id order; fixed atoms are left out, so
//! CNF models correspond one to one to core models.

use crate::solver::Model;
use crate::theory::{AtomId, GLit, GroundTheory};
use std::collections::HashMap;
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DimacsError {
    #[error("the core contains cardinality atoms; export needs a plain core")]
    CatomPresent,
    #[error("the core contains Horn rules; export needs a plain core")]
    HornPresent,
    #[error("variable {0} is not in the map")]
    UnknownVar(i64),
    #[error("the assignment does not satisfy rule `{rule}`")]
    ModelMismatch { rule: String },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

impl DimacsError {
    pub fn code(&self) -> &'static str {
        match self {
            DimacsError::CatomPresent => "E_CATOM_PRESENT",
            DimacsError::HornPresent => "E_HORN_PRESENT",
            DimacsError::UnknownVar(_) => "E_UNKNOWN_VAR",
            DimacsError::ModelMismatch { .. } => "E_MODEL_MISMATCH",
            DimacsError::Malformed { .. } => "E_BAD_ASSIGNMENT",
        }
    }
}

/// Bijection between DIMACS variables `1..=n` and atom ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarMap {
    atoms: Vec<AtomId>,
    vars: HashMap<AtomId, u32>,
}

impl VarMap {
    pub fn from_atoms(atoms: Vec<AtomId>) -> Self {
        let vars = atoms.iter().enumerate().map(|(i, &a)| (a, i as u32 + 1)).collect();
        VarMap { atoms, vars }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn var(&self, atom: AtomId) -> Option<u32> {
        self.vars.get(&atom).copied()
    }

    pub fn atom(&self, var: u32) -> Option<AtomId> {
        self.atoms.get((var as usize).checked_sub(1)?).copied()
    }

    /// One line `<var> <atom>` per variable.
    pub fn to_text(&self, core: &GroundTheory) -> String {
        let mut out = String::new();
        for (i, &a) in self.atoms.iter().enumerate() {
            writeln!(out, "{} {}", i + 1, core.atom(a)).unwrap();
        }
        out
    }

    /// Reads a map written by [`VarMap::to_text`] for `core`.
    pub fn parse(text: &str, core: &GroundTheory) -> Result<Self, DimacsError> {
        let mut atoms = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| DimacsError::Malformed { line: i + 1, message };
            let (var, atom) = line.split_once(' ').ok_or_else(|| bad("expected `<var> <atom>`".into()))?;
            if var.parse::<usize>().ok() != Some(atoms.len() + 1) {
                return Err(bad(format!("expected variable {}", atoms.len() + 1)));
            }
            let ga = crate::parser::parse_ground_atom(atom).map_err(|e| bad(e.message()))?;
            atoms.push(core.lookup(&ga).ok_or_else(|| bad(format!("`{ga}` is not an atom of the core")))?);
        }
        Ok(VarMap::from_atoms(atoms))
    }
}

/// Exports `core` as CNF. Each rule `A1, .., Am -> B1 | .. | Bn` becomes
/// the clause `-A1 .. -Am B1 .. Bn 0`.
pub fn export_cnf(core: &GroundTheory) -> Result<(String, VarMap), DimacsError> {
    export_cnf_annotated(core, &[])
}

/// Like [`export_cnf`], with `comments` written as `c` lines after the
/// fixed ones.
pub fn export_cnf_annotated(core: &GroundTheory, comments: &[String]) -> Result<(String, VarMap), DimacsError> {
    if core.has_catoms() {
        return Err(DimacsError::CatomPresent);
    }
    if !core.horn.is_empty() {
        return Err(DimacsError::HornPresent);
    }
    let map = VarMap::from_atoms(core.free_atoms().collect());
    let mut out = String::new();
    writeln!(out, "c psplus {}", env!("CARGO_PKG_VERSION")).unwrap();
    for c in comments {
        writeln!(out, "c {c}").unwrap();
    }
    writeln!(out, "p cnf {} {}", map.len(), core.rules.len()).unwrap();
    for r in &core.rules {
        let lits = r.antecedent.iter().map(|l| (l, false)).chain(r.consequent.iter().map(|l| (l, true)));
        for (lit, positive) in lits {
            let GLit::Atom(a) = lit else { unreachable!("checked above") };
            let v = map.var(*a).expect("rules of a core mention only free atoms");
            write!(out, "{}{} ", if positive { "" } else { "-" }, v).unwrap();
        }
        out.push_str("0\n");
    }
    Ok((out, map))
}

/// Parses solver output: `v` lines or bare literals, with `c` and `s`
/// lines ignored and `0` ending the assignment. Returns the variables
/// assigned true. Unmentioned variables are false.
pub fn parse_assignment(text: &str, map: &VarMap) -> Result<Vec<u32>, DimacsError> {
    let mut seen: HashMap<u32, usize> = HashMap::new();
    let mut trues = Vec::new();
    'lines: for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        let body = match line.split_once(char::is_whitespace).map_or((line, ""), |p| p) {
            ("c" | "s", _) => continue,
            ("v", rest) => rest,
            _ if line.starts_with('c') || line.starts_with('s') => continue,
            _ => line,
        };
        for tok in body.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| DimacsError::Malformed { line: i + 1, message: format!("`{tok}` is not a literal") })?;
            if lit == 0 {
                break 'lines;
            }
            let var = u32::try_from(lit.unsigned_abs()).map_err(|_| DimacsError::UnknownVar(lit))?;
            if map.atom(var).is_none() {
                return Err(DimacsError::UnknownVar(lit.abs()));
            }
            if let Some(prev) = seen.insert(var, i + 1) {
                return Err(DimacsError::Malformed {
                    line: i + 1,
                    message: format!("variable {var} already assigned on line {prev}"),
                });
            }
            if lit > 0 {
                trues.push(var);
            }
        }
    }
    Ok(trues)
}

/// Lifts an external assignment to a model of `core` and checks it.
pub fn lift_model(text: &str, map: &VarMap, core: &GroundTheory) -> Result<Model, DimacsError> {
    let trues = parse_assignment(text, map)?;
    let mut m: Vec<bool> =
        (0..core.num_atoms() as AtomId).map(|a| core.fixed(a) == Some(true) && !core.is_closure(a)).collect();
    for v in trues {
        m[map.atom(v).expect("checked") as usize] = true;
    }
    if let Some(r) = core.rules.iter().find(|r| !crate::theory::satisfies(m.as_slice(), r)) {
        return Err(DimacsError::ModelMismatch { rule: core.rule_to_string(r) });
    }
    if !core.is_model(&m) {
        return Err(DimacsError::ModelMismatch { rule: "fixed atoms".into() });
    }
    Ok(Model { atoms: (0..core.num_atoms() as AtomId).filter(|&a| m[a as usize]).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::GroundAtom;
    use crate::theory::{CAtom, GRule, HornRule};

    fn abc() -> GroundTheory {
        let mut t = GroundTheory::new();
        for n in ["a", "b", "c"] {
            t.add_atom(GroundAtom::new(n, vec![]), false);
        }
        t.rules.push(GRule::new(vec![GLit::Atom(0)], vec![GLit::Atom(1), GLit::Atom(2)]));
        t
    }

    fn body(cnf: &str) -> Vec<&str> {
        cnf.lines().filter(|l| !l.starts_with('c')).collect()
    }

    #[test]
    fn export_plain_rule() {
        let (cnf, map) = export_cnf(&abc()).unwrap();
        assert_eq!(body(&cnf), ["p cnf 3 1", "-1 2 3 0"]);
        assert_eq!(map.to_text(&abc()), "1 a\n2 b\n3 c\n");
    }

    #[test]
    fn export_constraint() {
        let mut t = GroundTheory::new();
        t.add_atom(GroundAtom::new("a", vec![]), false);
        t.rules.push(GRule::new(vec![GLit::Atom(0)], vec![]));
        assert_eq!(body(&export_cnf(&t).unwrap().0), ["p cnf 1 1", "-1 0"]);
    }

    #[test]
    fn empty_core() {
        assert_eq!(body(&export_cnf(&GroundTheory::new()).unwrap().0), ["p cnf 0 0"]);
    }

    #[test]
    fn refuses_catoms_and_horn() {
        let mut t = abc();
        t.rules.push(GRule::new(vec![], vec![GLit::Card(CAtom::new(1, 1, vec![0, 1]))]));
        assert_eq!(export_cnf(&t).unwrap_err().code(), "E_CATOM_PRESENT");
        let mut t = abc();
        t.horn.push(HornRule { head: 2, body: vec![] });
        assert_eq!(export_cnf(&t).unwrap_err().code(), "E_HORN_PRESENT");
    }

    #[test]
    fn lifting() {
        let t = abc();
        let (_, map) = export_cnf(&t).unwrap();
        assert_eq!(lift_model("1 -2 3", &map, &t).unwrap().atoms, vec![0, 2]);
        assert_eq!(lift_model("s SATISFIABLE\nv 1 -2\nv 3 0\n", &map, &t).unwrap().atoms, vec![0, 2]);
        assert_eq!(lift_model("1 -2 -3", &map, &t).unwrap_err().code(), "E_MODEL_MISMATCH");
        assert_eq!(lift_model("4", &map, &t).unwrap_err().code(), "E_UNKNOWN_VAR");
        assert_eq!(lift_model("1 -1", &map, &t).unwrap_err().code(), "E_BAD_ASSIGNMENT");
    }

    #[test]
    fn fixed_atoms_are_not_variables() {
        let mut t = abc();
        t.fix(0, true);
        t.rules[0] = GRule::new(vec![], vec![GLit::Atom(1), GLit::Atom(2)]);
        let (cnf, map) = export_cnf(&t).unwrap();
        assert_eq!(body(&cnf), ["p cnf 2 1", "1 2 0"]);
        assert_eq!(lift_model("-1 2", &map, &t).unwrap().atoms, vec![0, 2]);
        assert_eq!(VarMap::parse(&map.to_text(&t), &t).unwrap(), map);
    }
}
