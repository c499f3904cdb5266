//! Simplification of a ground theory to its core.
//!
//! Root-level propagation fixes atoms; rules are then reduced by those
//! values. The result has the same atom table and the same models.

use super::GroundError;
use crate::solver::engine::{Conflict, Engine};
use crate::theory::{AtomId, CAtom, GLit, GRule, GroundTheory, HornRule};
use std::collections::HashSet;

/// Value of a literal after root propagation, or its residual form.
enum Reduced {
    Value(bool),
    Lit(GLit),
}

fn reduce_card(e: &Engine, c: &CAtom) -> CAtom {
    let t = c.members.iter().filter(|&&m| e.get(m) == Some(true)).count() as u32;
    let rest: Vec<AtomId> = c.members.iter().copied().filter(|&m| e.get(m).is_none()).collect();
    let u = rest.len() as u32;
    CAtom::new(c.lower.saturating_sub(t), c.upper.saturating_sub(t).min(u), rest)
}

fn reduce(e: &Engine, elem: u32, lit: &GLit) -> Reduced {
    match (e.get(elem), lit) {
        (Some(v), _) => Reduced::Value(v),
        (None, GLit::Atom(a)) => Reduced::Lit(GLit::Atom(*a)),
        (None, GLit::Card(c)) => Reduced::Lit(GLit::Card(reduce_card(e, c))),
    }
}

/// Sorts and deduplicates both sides. Returns `None` for a tautology.
fn normalize(mut r: GRule) -> Option<GRule> {
    r.antecedent.sort();
    r.antecedent.dedup();
    r.consequent.sort();
    r.consequent.dedup();
    if r.antecedent.iter().any(|l| r.consequent.binary_search(l).is_ok()) {
        return None;
    }
    Some(r)
}

/// Propagates at the root and reduces the theory by the values found.
/// Atoms assigned by propagation are recorded as fixed, closure atoms
/// included.
pub fn simplify_to_core(raw: &GroundTheory) -> Result<GroundTheory, GroundError> {
    let mut e = Engine::new(raw);
    if let Err(conflict) = e.init(raw) {
        let rule = match conflict {
            Conflict::Clause(i) => raw.rule_to_string(&raw.rules[i as usize]),
            Conflict::Card(c) => raw.rule_to_string(&GRule::new(vec![], vec![GLit::Card(e.cards[c as usize].clone())])),
        };
        return Err(GroundError::Inconsistent { rule });
    }

    let mut core = raw.clone();
    core.rules.clear();
    core.horn.clear();
    for a in 0..raw.num_atoms() as AtomId {
        if let Some(v) = e.get(a) {
            core.fix(a, v);
        }
    }

    // Constraints of c-atoms whose value is known but not yet implied by
    // their members.
    let mut units = Vec::new();
    for c in 0..e.cards.len() {
        let elem = (e.na + c) as u32;
        if let Some(v) = e.get(elem) {
            if e.card_determined(c) != Some(v) {
                let lit = GLit::Card(reduce_card(&e, &e.cards[c]));
                units.push(if v { GRule::new(vec![], vec![lit]) } else { GRule::new(vec![lit], vec![]) });
            }
        }
    }

    let mut seen = HashSet::new();
    let mut emit = |r: GRule, core: &mut GroundTheory| {
        if let Some(r) = normalize(r) {
            if seen.insert(r.clone()) {
                core.rules.push(r);
            }
        }
    };
    'rules: for (i, r) in raw.rules.iter().enumerate() {
        let elems = &e.rule_elems[i];
        let n = r.antecedent.len();
        let mut ante = Vec::new();
        let mut cons = Vec::new();
        for (k, lit) in r.antecedent.iter().chain(&r.consequent).enumerate() {
            let in_ante = k < n;
            match reduce(&e, elems[k], lit) {
                Reduced::Value(v) if v != in_ante => continue 'rules,
                Reduced::Value(_) => {}
                Reduced::Lit(l) if in_ante => ante.push(l),
                Reduced::Lit(l) => cons.push(l),
            }
        }
        emit(GRule::new(ante, cons), &mut core);
    }
    for r in units {
        emit(r, &mut core);
    }

    let mut seen_horn = HashSet::new();
    for h in &raw.horn {
        if e.get(h.head).is_some() || h.body.iter().any(|&b| e.get(b) == Some(false)) {
            continue;
        }
        let mut body: Vec<AtomId> = h.body.iter().copied().filter(|&b| e.get(b).is_none()).collect();
        body.sort_unstable();
        body.dedup();
        let h = HornRule { head: h.head, body };
        if seen_horn.insert(h.clone()) {
            core.horn.push(h);
        }
    }
    Ok(core)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::GroundAtom;
    use crate::solver::all_models;

    fn theory(n: usize, closure: &[usize]) -> GroundTheory {
        let mut t = GroundTheory::new();
        for i in 0..n {
            t.add_atom(GroundAtom::new(format!("x{i}"), vec![]), closure.contains(&i));
        }
        t
    }

    fn models(t: &GroundTheory) -> Vec<Vec<AtomId>> {
        let mut m: Vec<Vec<AtomId>> = all_models(t).into_iter().map(|m| m.atoms).collect();
        m.sort();
        m
    }

    #[test]
    fn facts_fix_atoms_and_vanish() {
        let mut t = theory(3, &[]);
        t.rules.push(GRule::new(vec![], vec![GLit::Atom(0)]));
        t.rules.push(GRule::new(vec![GLit::Atom(0)], vec![GLit::Atom(1), GLit::Atom(2)]));
        t.rules.push(GRule::new(vec![GLit::Atom(0)], vec![GLit::Atom(1), GLit::Atom(2)]));
        let core = simplify_to_core(&t).unwrap();
        assert_eq!(core.fixed(0), Some(true));
        assert_eq!(core.pretty(), "x1 | x2.\n");
        assert_eq!(models(&t), models(&core));
    }

    #[test]
    fn catoms_lose_fixed_members() {
        let mut t = theory(4, &[]);
        t.rules.push(GRule::new(vec![], vec![GLit::Atom(0)]));
        t.rules.push(GRule::new(vec![], vec![GLit::Card(CAtom::new(1, 2, vec![0, 1, 2, 3]))]));
        let core = simplify_to_core(&t).unwrap();
        assert_eq!(core.pretty(), "0 { x1; x2; x3 } 1.\n");
        assert_eq!(models(&t), models(&core));
    }

    #[test]
    fn contradiction_is_reported() {
        let mut t = theory(1, &[]);
        t.rules.push(GRule::new(vec![], vec![GLit::Atom(0)]));
        t.rules.push(GRule::new(vec![GLit::Atom(0)], vec![]));
        assert_eq!(simplify_to_core(&t).unwrap_err().code(), "E_INCONSISTENT");
    }

    #[test]
    fn tautologies_are_dropped() {
        let mut t = theory(2, &[]);
        t.rules.push(GRule::new(vec![GLit::Atom(0), GLit::Atom(1)], vec![GLit::Atom(1)]));
        assert_eq!(simplify_to_core(&t).unwrap().rules.len(), 0);
    }

    #[test]
    fn horn_rules_reduce() {
        // x0 fact, x2 <- x0, x1 ; x1 free ; x3 unsupported closure atom.
        let mut t = theory(4, &[2, 3]);
        t.rules.push(GRule::new(vec![], vec![GLit::Atom(0)]));
        t.rules.push(GRule::new(vec![GLit::Atom(3)], vec![GLit::Atom(1)]));
        t.rules.push(GRule::new(vec![GLit::Atom(2)], vec![]));
        t.horn.push(HornRule { head: 2, body: vec![0, 1] });
        let core = simplify_to_core(&t).unwrap();
        assert_eq!(core.fixed(3), Some(false));
        assert_eq!(core.horn, vec![HornRule { head: 2, body: vec![1] }]);
        assert_eq!(core.pretty(), "x2 -> false.\nx2 <- x1.\n");
        assert_eq!(models(&t), models(&core));
        assert_eq!(models(&core), vec![vec![0]]);
    }

    #[test]
    fn forced_catom_becomes_a_unit_rule() {
        let mut t = theory(3, &[]);
        let c = GLit::Card(CAtom::new(1, 1, vec![0, 1, 2]));
        t.rules.push(GRule::new(vec![], vec![GLit::Atom(0)]));
        t.rules.push(GRule::new(vec![GLit::Atom(0)], vec![c.clone()]));
        let core = simplify_to_core(&t).unwrap();
        assert_eq!(models(&t), models(&core));
        assert!(core.rules.is_empty());
        assert_eq!(core.fixed(1), Some(false));
    }
}
