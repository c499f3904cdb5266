//! Counter-based unit propagation over rules, c-atoms and Horn rules.
//!
//! Elements are the atoms of the theory followed by its distinct c-atoms.
//! A rule `A1, .., Am -> B1 | .. | Bn` becomes the clause
//! `-A1 | .. | -Am | B1 | .. | Bn` over elements. Closure atoms are only
//! ever assigned by the Horn rules: true once a rule body holds, false
//! once every rule for them has a false body atom.

use crate::theory::{AtomId, CAtom, GLit, GroundTheory, HornRule};
use std::collections::HashMap;

pub(crate) type Elem = u32;

const UNASSIGNED: i8 = -1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reason {
    Decision,
    /// Value fixed in the theory.
    Fixed,
    Clause(u32),
    /// Member value forced by an assigned c-atom.
    Card(u32),
    /// C-atom value determined by its members.
    Implied(u32),
    Horn(u32),
    Unsupported,
}

/// A rule or c-atom that cannot be satisfied under the current
/// assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conflict {
    Clause(u32),
    Card(u32),
}

pub(crate) struct Engine {
    pub na: usize,
    pub closure: Vec<bool>,
    pub clauses: Vec<Vec<(Elem, bool)>>,
    pub cards: Vec<CAtom>,
    pub horn: Vec<HornRule>,
    occ: Vec<Vec<(u32, bool)>>,
    member_of: Vec<Vec<u32>>,
    body_occ: Vec<Vec<u32>>,
    /// Index of the element of each rule literal, per rule.
    pub rule_elems: Vec<Vec<Elem>>,

    pub value: Vec<i8>,
    pub level: Vec<u32>,
    pub reason: Vec<Reason>,
    pub trail: Vec<Elem>,
    qhead: usize,
    trail_lim: Vec<usize>,

    pub cl_sat: Vec<u32>,
    pub cl_false: Vec<u32>,
    pub card_true: Vec<u32>,
    pub card_false: Vec<u32>,
    /// Closure members not yet assigned.
    pub card_pending: Vec<u32>,
    horn_remaining: Vec<u32>,
    horn_dead: Vec<u32>,
    support: Vec<u32>,

    pub propagations: u64,
}

impl Engine {
    pub fn new(t: &GroundTheory) -> Self {
        let na = t.num_atoms();
        let closure: Vec<bool> = (0..na as AtomId).map(|a| t.is_closure(a)).collect();
        let mut card_ids: HashMap<&CAtom, u32> = HashMap::new();
        let mut cards: Vec<CAtom> = Vec::new();
        let mut clauses = Vec::with_capacity(t.rules.len());
        let mut rule_elems = Vec::with_capacity(t.rules.len());
        for r in &t.rules {
            let mut lits: Vec<(Elem, bool)> = Vec::new();
            let mut elems = Vec::new();
            let sides = r.antecedent.iter().map(|l| (l, false)).chain(r.consequent.iter().map(|l| (l, true)));
            for (lit, sign) in sides {
                let e = match lit {
                    GLit::Atom(a) => *a,
                    GLit::Card(c) => {
                        let id = *card_ids.entry(c).or_insert_with(|| {
                            cards.push(c.clone());
                            (cards.len() - 1) as u32
                        });
                        na as u32 + id
                    }
                };
                elems.push(e);
                if !lits.contains(&(e, sign)) {
                    lits.push((e, sign));
                }
            }
            clauses.push(lits);
            rule_elems.push(elems);
        }
        let ne = na + cards.len();
        let mut occ = vec![Vec::new(); ne];
        for (i, c) in clauses.iter().enumerate() {
            for &(e, s) in c {
                occ[e as usize].push((i as u32, s));
            }
        }
        let mut member_of = vec![Vec::new(); na];
        let mut card_pending = vec![0; cards.len()];
        for (i, c) in cards.iter().enumerate() {
            for &m in &c.members {
                member_of[m as usize].push(i as u32);
                if closure[m as usize] {
                    card_pending[i] += 1;
                }
            }
        }
        let horn: Vec<HornRule> = t
            .horn
            .iter()
            .map(|h| {
                let mut body = h.body.clone();
                body.sort_unstable();
                body.dedup();
                HornRule { head: h.head, body }
            })
            .collect();
        let mut body_occ = vec![Vec::new(); na];
        let mut support = vec![0; na];
        for (i, h) in horn.iter().enumerate() {
            for &b in &h.body {
                body_occ[b as usize].push(i as u32);
            }
            support[h.head as usize] += 1;
        }
        Engine {
            na,
            closure,
            cl_sat: vec![0; clauses.len()],
            cl_false: vec![0; clauses.len()],
            card_true: vec![0; cards.len()],
            card_false: vec![0; cards.len()],
            card_pending,
            horn_remaining: horn.iter().map(|h| h.body.len() as u32).collect(),
            horn_dead: vec![0; horn.len()],
            support,
            clauses,
            cards,
            horn,
            occ,
            member_of,
            body_occ,
            rule_elems,
            value: vec![UNASSIGNED; ne],
            level: vec![0; ne],
            reason: vec![Reason::Decision; ne],
            trail: Vec::new(),
            qhead: 0,
            trail_lim: Vec::new(),
            propagations: 0,
        }
    }

    pub fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    pub fn get(&self, e: Elem) -> Option<bool> {
        match self.value[e as usize] {
            UNASSIGNED => None,
            v => Some(v == 1),
        }
    }

    pub fn is_card(&self, e: Elem) -> bool {
        e as usize >= self.na
    }

    /// Assigns an unassigned element. Returns false if it already holds
    /// the opposite value.
    pub fn assign(&mut self, e: Elem, v: bool, reason: Reason) -> bool {
        match self.get(e) {
            Some(cur) => cur == v,
            None => {
                let i = e as usize;
                self.value[i] = v as i8;
                self.level[i] = self.trail_lim.len() as u32;
                self.reason[i] = reason;
                self.trail.push(e);
                true
            }
        }
    }

    /// Assigns fixed atoms and runs the checks for rules that are unit or
    /// empty from the start, then propagates.
    pub fn init(&mut self, t: &GroundTheory) -> Result<(), Conflict> {
        for a in 0..self.na as AtomId {
            if let Some(v) = t.fixed(a) {
                self.assign(a, v, Reason::Fixed);
            }
        }
        for i in 0..self.clauses.len() {
            self.check_clause(i as u32)?;
        }
        for c in 0..self.cards.len() {
            self.check_card(c as u32)?;
        }
        for i in 0..self.horn.len() {
            if self.horn_remaining[i] == 0 {
                let head = self.horn[i].head;
                self.assign(head, true, Reason::Horn(i as u32));
            }
        }
        for a in 0..self.na {
            if self.closure[a] && self.support[a] == 0 {
                self.assign(a as Elem, false, Reason::Unsupported);
            }
        }
        self.propagate()
    }

    pub fn new_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    pub fn backtrack(&mut self, level: usize) {
        if level >= self.trail_lim.len() {
            return;
        }
        let keep = self.trail_lim[level];
        while self.trail.len() > keep {
            let idx = self.trail.len() - 1;
            let e = self.trail.pop().unwrap();
            if idx < self.qhead {
                self.update(e, false);
            }
            self.value[e as usize] = UNASSIGNED;
        }
        self.qhead = self.qhead.min(self.trail.len());
        self.trail_lim.truncate(level);
    }

    pub fn propagate(&mut self) -> Result<(), Conflict> {
        while self.qhead < self.trail.len() {
            let e = self.trail[self.qhead];
            self.qhead += 1;
            self.propagations += 1;
            self.update(e, true);
            self.check_after(e)?;
        }
        Ok(())
    }

    /// Applies (`forward`) or reverts the counter changes of the
    /// assignment of `e`.
    fn update(&mut self, e: Elem, forward: bool) {
        let v = self.value[e as usize] == 1;
        let step = |x: &mut u32| {
            if forward {
                *x += 1
            } else {
                *x -= 1
            }
        };
        for &(ci, sign) in &self.occ[e as usize] {
            if sign == v {
                step(&mut self.cl_sat[ci as usize]);
            } else {
                step(&mut self.cl_false[ci as usize]);
            }
        }
        if self.is_card(e) {
            return;
        }
        let closure = self.closure[e as usize];
        for &c in &self.member_of[e as usize] {
            let c = c as usize;
            if v {
                step(&mut self.card_true[c]);
            } else {
                step(&mut self.card_false[c]);
            }
            if closure {
                // Pending counts go down as members are assigned.
                if forward {
                    self.card_pending[c] -= 1;
                } else {
                    self.card_pending[c] += 1;
                }
            }
        }
        for &h in &self.body_occ[e as usize] {
            let h = h as usize;
            if v {
                if forward {
                    self.horn_remaining[h] -= 1;
                } else {
                    self.horn_remaining[h] += 1;
                }
            } else {
                step(&mut self.horn_dead[h]);
                let head = self.horn[h].head as usize;
                let first_dead = self.horn_dead[h] == if forward { 1 } else { 0 };
                if first_dead {
                    if forward {
                        self.support[head] -= 1;
                    } else {
                        self.support[head] += 1;
                    }
                }
            }
        }
    }

    fn check_after(&mut self, e: Elem) -> Result<(), Conflict> {
        let v = self.value[e as usize] == 1;
        for k in 0..self.occ[e as usize].len() {
            let (ci, sign) = self.occ[e as usize][k];
            if sign != v {
                self.check_clause(ci)?;
            }
        }
        if self.is_card(e) {
            return self.check_card(e - self.na as u32);
        }
        for k in 0..self.member_of[e as usize].len() {
            let c = self.member_of[e as usize][k];
            self.check_card(c)?;
        }
        for k in 0..self.body_occ[e as usize].len() {
            let h = self.body_occ[e as usize][k] as usize;
            let head = self.horn[h].head;
            if v {
                if self.horn_remaining[h] == 0 {
                    let ok = self.assign(head, true, Reason::Horn(h as u32));
                    debug_assert!(ok, "a supported closure atom cannot be false");
                }
            } else if self.support[head as usize] == 0 {
                self.assign(head, false, Reason::Unsupported);
            }
        }
        Ok(())
    }

    fn check_clause(&mut self, ci: u32) -> Result<(), Conflict> {
        let i = ci as usize;
        if self.cl_sat[i] > 0 {
            return Ok(());
        }
        let unassigned = self.clauses[i].len() as u32 - self.cl_false[i];
        if unassigned == 0 {
            return Err(Conflict::Clause(ci));
        }
        if unassigned == 1 {
            let lit = self.clauses[i].iter().copied().find(|&(e, _)| self.value[e as usize] == UNASSIGNED);
            if let Some((e, sign)) = lit {
                // Closure atoms only follow from the Horn rules.
                if self.is_card(e) || !self.closure[e as usize] {
                    self.assign(e, sign, Reason::Clause(ci));
                }
            }
        }
        Ok(())
    }

    /// Value of a c-atom implied by the processed member values, if any.
    pub fn card_determined(&self, c: usize) -> Option<bool> {
        let card = &self.cards[c];
        let (lo, hi) = (card.lower, card.upper);
        let t = self.card_true[c];
        let u = card.members.len() as u32 - t - self.card_false[c];
        if t >= lo && t + u <= hi {
            Some(true)
        } else if t > hi || t + u < lo {
            Some(false)
        } else {
            None
        }
    }

    fn check_card(&mut self, c: u32) -> Result<(), Conflict> {
        let ci = c as usize;
        let e = self.na as u32 + c;
        let det = self.card_determined(ci);
        let Some(val) = self.get(e) else {
            if let Some(d) = det {
                self.assign(e, d, Reason::Implied(c));
            }
            return Ok(());
        };
        match det {
            Some(d) if d != val => return Err(Conflict::Card(c)),
            Some(_) => return Ok(()),
            None => {}
        }
        if self.card_pending[ci] > 0 {
            return Ok(());
        }
        let card = &self.cards[ci];
        let (lo, hi) = (card.lower, card.upper);
        let t = self.card_true[ci];
        let max = card.members.len() as u32 - self.card_false[ci];
        let rest = if val {
            if t == hi {
                Some(false)
            } else if max == lo {
                Some(true)
            } else {
                None
            }
        } else if t >= lo && max == hi + 1 {
            Some(true)
        } else if max <= hi && t + 1 == lo {
            Some(false)
        } else {
            None
        };
        if let Some(v) = rest {
            for k in 0..self.cards[ci].members.len() {
                let m = self.cards[ci].members[k];
                if self.value[m as usize] == UNASSIGNED {
                    self.assign(m, v, Reason::Card(c));
                }
            }
        }
        Ok(())
    }

    /// Unassigned members of c-atom `c`.
    pub fn unassigned_members(&self, c: usize) -> Vec<AtomId> {
        self.cards[c].members.iter().copied().filter(|&m| self.value[m as usize] == UNASSIGNED).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::GroundAtom;
    use crate::theory::GRule;

    fn theory(n: usize) -> GroundTheory {
        let mut t = GroundTheory::new();
        for i in 0..n {
            t.add_atom(GroundAtom::new(format!("x{i}"), vec![]), false);
        }
        t
    }

    fn card(lo: u32, hi: u32, m: &[AtomId]) -> GLit {
        GLit::Card(CAtom::new(lo, hi, m.to_vec()))
    }

    #[test]
    fn exactly_one_forces_rest_false() {
        let mut t = theory(4);
        t.rules.push(GRule::new(vec![], vec![card(1, 1, &[0, 1, 2, 3])]));
        let mut e = Engine::new(&t);
        e.init(&t).unwrap();
        e.new_level();
        e.assign(0, true, Reason::Decision);
        e.propagate().unwrap();
        assert_eq!((e.get(1), e.get(2), e.get(3)), (Some(false), Some(false), Some(false)));
    }

    #[test]
    fn lower_bound_forces_rest_true() {
        let mut t = theory(3);
        t.rules.push(GRule::new(vec![], vec![card(2, 3, &[0, 1, 2])]));
        let mut e = Engine::new(&t);
        e.init(&t).unwrap();
        e.new_level();
        e.assign(0, false, Reason::Decision);
        e.propagate().unwrap();
        assert_eq!((e.get(1), e.get(2)), (Some(true), Some(true)));
    }

    #[test]
    fn unit_clause() {
        let mut t = theory(3);
        t.rules.push(GRule::new(vec![GLit::Atom(0), GLit::Atom(1)], vec![GLit::Atom(2)]));
        let mut e = Engine::new(&t);
        e.init(&t).unwrap();
        e.new_level();
        e.assign(0, true, Reason::Decision);
        e.assign(1, true, Reason::Decision);
        e.propagate().unwrap();
        assert_eq!(e.get(2), Some(true));
        assert_eq!(e.reason[2], Reason::Clause(0));
    }

    #[test]
    fn false_catom_with_lower_met_must_exceed_upper() {
        // 1 { x0; x1; x2 } 1 -> false, x0 true, x1 unassigned, x2 unassigned:
        // no propagation yet; after x2 false the count must reach 2.
        let mut t = theory(3);
        t.rules.push(GRule::new(vec![card(1, 1, &[0, 1, 2])], vec![]));
        let mut e = Engine::new(&t);
        e.init(&t).unwrap();
        e.new_level();
        e.assign(0, true, Reason::Decision);
        e.propagate().unwrap();
        assert_eq!(e.get(1), None);
        e.assign(2, false, Reason::Decision);
        e.propagate().unwrap();
        assert_eq!(e.get(1), Some(true));
    }

    #[test]
    fn backtracking_restores_counters() {
        let mut t = theory(4);
        t.rules.push(GRule::new(vec![], vec![card(1, 2, &[0, 1, 2, 3])]));
        t.rules.push(GRule::new(vec![GLit::Atom(0)], vec![GLit::Atom(1)]));
        let mut e = Engine::new(&t);
        e.init(&t).unwrap();
        let snapshot =
            (e.value.clone(), e.cl_sat.clone(), e.cl_false.clone(), e.card_true.clone(), e.card_false.clone());
        e.new_level();
        e.assign(0, true, Reason::Decision);
        e.propagate().unwrap();
        assert_eq!(e.get(1), Some(true));
        e.backtrack(0);
        assert_eq!(
            snapshot,
            (e.value.clone(), e.cl_sat.clone(), e.cl_false.clone(), e.card_true.clone(), e.card_false.clone())
        );
    }

    #[test]
    fn horn_support_and_firing() {
        // x2 <- x0. x2 <- x1.
        let mut t = theory(3);
        t.set_closure(2, true);
        t.horn.push(HornRule { head: 2, body: vec![0] });
        t.horn.push(HornRule { head: 2, body: vec![1] });
        let mut e = Engine::new(&t);
        e.init(&t).unwrap();
        e.new_level();
        e.assign(0, false, Reason::Decision);
        e.propagate().unwrap();
        assert_eq!(e.get(2), None);
        e.assign(1, false, Reason::Decision);
        e.propagate().unwrap();
        assert_eq!(e.get(2), Some(false));
        e.backtrack(0);
        e.new_level();
        e.assign(1, true, Reason::Decision);
        e.propagate().unwrap();
        assert_eq!(e.get(2), Some(true));
    }

    #[test]
    fn clause_conflict_is_reported() {
        let mut t = theory(1);
        t.rules.push(GRule::new(vec![], vec![GLit::Atom(0)]));
        t.rules.push(GRule::new(vec![GLit::Atom(0)], vec![]));
        let mut e = Engine::new(&t);
        assert!(matches!(e.init(&t), Err(Conflict::Clause(_))));
    }
}
