//! Backtracking search over a ground core.
//!
//! Each node propagates to a fixpoint, then branches either on a forced
//! c-atom whose satisfying completions are few enough (one branch per
//! completion) or on the heaviest unassigned atom, true first. When every
//! non-closure atom is assigned the Horn closure is computed and the rules
//! are re-checked against it.

pub(crate) mod engine;

pub use engine::{Conflict, Reason};

use crate::theory::{closure_of, satisfies, AtomId, GRule, GroundTheory, HornRule};
use engine::{Elem, Engine};
use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

/// Weight cap: a clause with `u` unassigned literals weighs `2^(16 - u)`.
const WEIGHT_CAP: u32 = 16;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolveOptions {
    /// Stop after this many models; `None` enumerates all of them.
    pub max_models: Option<u64>,
}

impl SolveOptions {
    pub fn all() -> Self {
        SolveOptions { max_models: None }
    }

    pub fn first(n: u64) -> Self {
        SolveOptions { max_models: Some(n) }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub backtracks: u64,
    pub verifications: u64,
    pub models: u64,
    pub elapsed: Duration,
}

impl fmt::Display for SolverStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "models:        {}", self.models)?;
        writeln!(f, "decisions:     {}", self.decisions)?;
        writeln!(f, "propagations:  {}", self.propagations)?;
        writeln!(f, "conflicts:     {}", self.conflicts)?;
        writeln!(f, "backtracks:    {}", self.backtracks)?;
        writeln!(f, "verifications: {}", self.verifications)?;
        write!(f, "time:          {:.3}s", self.elapsed.as_secs_f64())
    }
}

/// The true non-closure atoms of a model, fixed atoms included, in id
/// order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Model {
    pub atoms: Vec<AtomId>,
}

impl Model {
    /// Atoms of the model printed with `theory`, keeping only the
    /// predicates in `show` when it is given.
    pub fn render(&self, theory: &GroundTheory, show: Option<&[String]>) -> Vec<String> {
        self.atoms
            .iter()
            .map(|&a| theory.atom(a))
            .filter(|a| show.is_none_or(|s| s.iter().any(|p| *p == a.pred)))
            .map(|a| a.to_string())
            .collect()
    }
}

/// How the search splits the current node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BranchPlan {
    /// Assign the atom true, then false.
    Atom { atom: AtomId },
    /// One branch per completion; `completions[i][j]` is the value of
    /// `members[j]`.
    CAtom { catom: u32, members: Vec<AtomId>, completions: Vec<Vec<bool>> },
}

impl BranchPlan {
    pub fn len(&self) -> usize {
        match self {
            BranchPlan::Atom { .. } => 2,
            BranchPlan::CAtom { completions, .. } => completions.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Assignments made by alternative `i`.
    pub fn alternative(&self, i: usize) -> Vec<(AtomId, bool)> {
        match self {
            BranchPlan::Atom { atom } => vec![(*atom, i == 0)],
            BranchPlan::CAtom { members, completions, .. } => {
                members.iter().copied().zip(completions[i].iter().copied()).collect()
            }
        }
    }
}

/// Least model of `m` under `horn`.
pub fn closure(m: &BTreeSet<AtomId>, horn: &[HornRule]) -> BTreeSet<AtomId> {
    let n = m
        .iter()
        .copied()
        .chain(horn.iter().flat_map(|h| std::iter::once(h.head).chain(h.body.iter().copied())))
        .max()
        .map_or(0, |a| a as usize + 1);
    let mut base = vec![false; n];
    for &a in m {
        base[a as usize] = true;
    }
    closure_of(&base, horn).into_iter().enumerate().filter(|&(_, v)| v).map(|(i, _)| i as AtomId).collect()
}

/// True iff the closed set satisfies every rule.
pub fn verify(closed: &BTreeSet<AtomId>, verifying: &[GRule]) -> bool {
    verifying.iter().all(|r| satisfies(closed, r))
}

fn binomial_sum(u: u32, lo: i64, hi: i64) -> u128 {
    // Sum of C(u, j) for j in [lo, hi], saturating.
    let mut total: u128 = 0;
    let mut c: u128 = 1;
    for j in 0..=u as i64 {
        if j >= lo && j <= hi {
            total = total.saturating_add(c);
        }
        c = c.checked_mul((u as i64 - j) as u128).map_or(u128::MAX, |x| x / (j as u128 + 1));
    }
    total
}

/// Search state over one core.
pub struct Solver<'a> {
    theory: &'a GroundTheory,
    engine: Engine,
    stats: SolverStats,
    root_ok: Option<bool>,
}

impl<'a> Solver<'a> {
    pub fn new(theory: &'a GroundTheory) -> Self {
        Solver { theory, engine: Engine::new(theory), stats: SolverStats::default(), root_ok: None }
    }

    /// Propagates fixed atoms and unit rules at the root. Returns false if
    /// the core is unsatisfiable by propagation alone.
    pub fn propagate_root(&mut self) -> bool {
        if let Some(ok) = self.root_ok {
            return ok;
        }
        let ok = self.engine.init(self.theory).is_ok();
        self.root_ok = Some(ok);
        ok
    }

    /// Current value of an atom.
    pub fn value(&self, atom: AtomId) -> Option<bool> {
        self.engine.get(atom)
    }

    /// Opens a decision level, assigns `atom` and propagates. Returns the
    /// conflict, if any.
    pub fn decide(&mut self, atom: AtomId, value: bool) -> Result<(), Conflict> {
        self.engine.new_level();
        if !self.engine.assign(atom, value, Reason::Decision) {
            return Err(Conflict::Clause(u32::MAX));
        }
        self.engine.propagate()
    }

    pub fn backtrack(&mut self, level: usize) {
        self.engine.backtrack(level);
    }

    pub fn decision_level(&self) -> usize {
        self.engine.decision_level()
    }

    /// Value, level and reason of every assigned atom.
    pub fn assignment(&self) -> Vec<Option<(bool, u32, Reason)>> {
        (0..self.engine.na)
            .map(|a| self.engine.get(a as Elem).map(|v| (v, self.engine.level[a], self.engine.reason[a])))
            .collect()
    }

    fn weights(&self) -> Vec<u64> {
        let e = &self.engine;
        let mut w = vec![0u64; e.na];
        let weight = |u: u32| 1u64 << (WEIGHT_CAP - u.min(WEIGHT_CAP));
        let add_members = |w: &mut Vec<u64>, c: usize, x: u64| {
            for &m in &e.cards[c].members {
                if e.get(m).is_none() && !e.closure[m as usize] {
                    w[m as usize] += x;
                }
            }
        };
        for (i, lits) in e.clauses.iter().enumerate() {
            if e.cl_sat[i] > 0 {
                continue;
            }
            let u = lits.len() as u32 - e.cl_false[i];
            let x = weight(u);
            for &(el, _) in lits {
                if e.get(el).is_some() {
                    continue;
                }
                if e.is_card(el) {
                    add_members(&mut w, el as usize - e.na, x);
                } else if !e.closure[el as usize] {
                    w[el as usize] += x;
                }
            }
        }
        for c in 0..e.cards.len() {
            if e.get((e.na + c) as Elem).is_some() && e.card_determined(c).is_none() {
                let u = e.unassigned_members(c).len() as u32;
                add_members(&mut w, c, weight(u));
            }
        }
        w
    }

    /// Completions of the unassigned members of an assigned, undetermined
    /// c-atom, true-first in member order.
    fn completions(&self, c: usize, members: &[AtomId]) -> Vec<Vec<bool>> {
        let e = &self.engine;
        let card = &e.cards[c];
        let val = e.get((e.na + c) as Elem).expect("assigned");
        let t = e.card_true[c] as i64;
        let (lo, hi) = (card.lower as i64 - t, card.upper as i64 - t);
        let ok = |j: i64| (lo <= j && j <= hi) == val;
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(members.len());
        fn rec(cur: &mut Vec<bool>, count: i64, n: usize, ok: &dyn Fn(i64) -> bool, out: &mut Vec<Vec<bool>>) {
            let rest = (n - cur.len()) as i64;
            if !(count..=count + rest).any(ok) {
                return;
            }
            if rest == 0 {
                out.push(cur.clone());
                return;
            }
            for v in [true, false] {
                cur.push(v);
                rec(cur, count + v as i64, n, ok, out);
                cur.pop();
            }
        }
        rec(&mut cur, 0, members.len(), &ok, &mut out);
        out
    }

    /// Picks how to split the current node, or `None` when every
    /// non-closure atom is assigned. Call after propagation.
    pub fn choose_branch(&self) -> Option<BranchPlan> {
        let e = &self.engine;
        let w = self.weights();
        let mut best: Option<(u64, usize, Vec<AtomId>)> = None;
        for c in 0..e.cards.len() {
            let Some(val) = e.get((e.na + c) as Elem) else { continue };
            if e.card_determined(c).is_some() || e.card_pending[c] > 0 {
                continue;
            }
            let members = e.unassigned_members(c);
            let u = members.len() as u32;
            let t = e.card_true[c] as i64;
            let (lo, hi) = (e.cards[c].lower as i64 - t, e.cards[c].upper as i64 - t);
            let count = if val {
                binomial_sum(u, lo, hi)
            } else {
                binomial_sum(u, 0, lo - 1).saturating_add(binomial_sum(u, hi + 1, u as i64))
            };
            if count > u as u128 {
                continue;
            }
            let score: u64 = members.iter().map(|&m| w[m as usize]).sum();
            if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
                best = Some((score, c, members));
            }
        }
        if let Some((_, c, members)) = best {
            let completions = self.completions(c, &members);
            return Some(BranchPlan::CAtom { catom: c as u32, members, completions });
        }
        (0..e.na)
            .filter(|&a| e.get(a as Elem).is_none() && !e.closure[a])
            .max_by(|&a, &b| w[a].cmp(&w[b]).then(b.cmp(&a)))
            .map(|a| BranchPlan::Atom { atom: a as AtomId })
    }

    /// Closure and full re-check at a node where every non-closure atom
    /// is assigned.
    fn leaf_model(&mut self) -> Option<Model> {
        self.stats.verifications += 1;
        let e = &self.engine;
        let base: Vec<bool> = (0..e.na).map(|a| !e.closure[a] && e.get(a as Elem) == Some(true)).collect();
        let closed = closure_of(&base, &self.theory.horn);
        if !self.theory.rules.iter().all(|r| satisfies(closed.as_slice(), r)) {
            return None;
        }
        Some(Model { atoms: (0..e.na as AtomId).filter(|&a| base[a as usize]).collect() })
    }

    /// Enumerates models, calling `on_model` for each; stops when it
    /// returns false or the model limit is reached.
    pub fn run(&mut self, opts: &SolveOptions, mut on_model: impl FnMut(&Model) -> bool) -> SolverStats {
        let start = Instant::now();
        self.search(opts, &mut on_model);
        self.stats.propagations = self.engine.propagations;
        self.stats.elapsed = start.elapsed();
        self.stats.clone()
    }

    fn search(&mut self, opts: &SolveOptions, on_model: &mut dyn FnMut(&Model) -> bool) {
        if opts.max_models == Some(0) {
            return;
        }
        if !self.propagate_root() {
            self.stats.conflicts += 1;
            return;
        }
        let base_level = self.engine.decision_level();
        // Open plans with the index of the next alternative to try.
        let mut stack: Vec<(BranchPlan, usize)> = Vec::new();
        loop {
            match self.choose_branch() {
                Some(plan) => stack.push((plan, 0)),
                None => {
                    if let Some(m) = self.leaf_model() {
                        self.stats.models += 1;
                        let more = on_model(&m);
                        if !more || opts.max_models.is_some_and(|n| self.stats.models >= n) {
                            self.engine.backtrack(base_level);
                            return;
                        }
                    }
                }
            }
            // Move to the next open alternative.
            loop {
                let depth = stack.len();
                let Some((plan, next)) = stack.last_mut() else {
                    self.engine.backtrack(base_level);
                    return;
                };
                if self.engine.decision_level() > base_level + depth - 1 {
                    self.stats.backtracks += 1;
                    self.engine.backtrack(base_level + depth - 1);
                }
                if *next == plan.len() {
                    stack.pop();
                    continue;
                }
                let alt = plan.alternative(*next);
                *next += 1;
                self.stats.decisions += 1;
                self.engine.new_level();
                let mut ok = true;
                for (a, v) in alt {
                    if !self.engine.assign(a, v, Reason::Decision) {
                        ok = false;
                        break;
                    }
                }
                if ok && self.engine.propagate().is_ok() {
                    break;
                }
                self.stats.conflicts += 1;
            }
        }
    }
}

/// Enumerates models of `core`; see [`Solver::run`].
pub fn solve(core: &GroundTheory, opts: &SolveOptions, on_model: impl FnMut(&Model) -> bool) -> SolverStats {
    Solver::new(core).run(opts, on_model)
}

/// All models of `core`, in search order.
pub fn all_models(core: &GroundTheory) -> Vec<Model> {
    let mut out = Vec::new();
    solve(core, &SolveOptions::all(), |m| {
        out.push(m.clone());
        true
    });
    out
}
