//! Brute-force oracles and random generators shared by the integration
//! tests. Nothing here calls the solver.

#![allow(dead_code)]

use psplus::ast::{Constant, GroundAtom, PredAtom, Term};
use psplus::theory::{AtomId, CAtom, GLit, GRule, GroundTheory, HornRule};
use psplus::translate::DatalogClause;
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};

pub fn atoms(n: usize, closure: &[bool]) -> GroundTheory {
    let mut t = GroundTheory::new();
    for i in 0..n {
        t.add_atom(GroundAtom::new(format!("x{i}"), vec![]), closure.get(i).copied().unwrap_or(false));
    }
    t
}

fn lit_true(l: &GLit, m: &[bool]) -> bool {
    match l {
        GLit::Atom(a) => m[*a as usize],
        GLit::Card(c) => {
            let k = c.members.iter().filter(|&&a| m[a as usize]).count() as u32;
            c.lower <= k && k <= c.upper
        }
    }
}

/// Models by enumerating every subset of the non-closure atoms: fixed
/// atoms must keep their value, closure atoms are derived by naive
/// iteration of the Horn rules, and every rule must hold afterwards.
pub fn brute_force_models(t: &GroundTheory) -> BTreeSet<Vec<AtomId>> {
    let n = t.num_atoms();
    let open: Vec<usize> = (0..n).filter(|&a| !t.is_closure(a as AtomId)).collect();
    assert!(open.len() <= 22, "too many atoms for enumeration");
    let mut out = BTreeSet::new();
    for mask in 0u64..1 << open.len() {
        let mut m = vec![false; n];
        for (i, &a) in open.iter().enumerate() {
            m[a] = mask >> i & 1 == 1;
        }
        if open.iter().any(|&a| t.fixed(a as AtomId).is_some_and(|v| v != m[a])) {
            continue;
        }
        let mut changed = true;
        while changed {
            changed = false;
            for h in &t.horn {
                if !m[h.head as usize] && h.body.iter().all(|&b| m[b as usize]) {
                    m[h.head as usize] = true;
                    changed = true;
                }
            }
        }
        let ok = t
            .rules
            .iter()
            .all(|r| r.antecedent.iter().any(|l| !lit_true(l, &m)) || r.consequent.iter().any(|l| lit_true(l, &m)));
        if ok {
            out.insert(open.iter().copied().filter(|&a| m[a]).map(|a| a as AtomId).collect());
        }
    }
    out
}

fn random_lit<R: Rng>(rng: &mut R, n: usize, catoms: bool) -> GLit {
    if catoms && rng.random_bool(0.25) {
        let size = rng.random_range(1..=n.min(5));
        let members: Vec<AtomId> = (0..size).map(|_| rng.random_range(0..n) as AtomId).collect();
        let c = CAtom::new(0, 0, members);
        let k = c.members.len() as u32;
        let lo = rng.random_range(0..=k);
        let hi = rng.random_range(lo..=k);
        GLit::Card(CAtom { lower: lo, upper: hi, ..c })
    } else {
        GLit::Atom(rng.random_range(0..n) as AtomId)
    }
}

/// A random core over at most `max_atoms` atoms. With `horn`, some atoms
/// are closure atoms defined by Horn rules.
pub fn random_core<R: Rng>(rng: &mut R, max_atoms: usize, catoms: bool, horn: bool) -> GroundTheory {
    let n = rng.random_range(1..=max_atoms);
    let closure: Vec<bool> = (0..n).map(|_| horn && rng.random_bool(0.3)).collect();
    let mut t = atoms(n, &closure);
    let heads: Vec<AtomId> = (0..n as AtomId).filter(|&a| closure[a as usize]).collect();
    for &h in &heads {
        for _ in 0..rng.random_range(0..=2) {
            let len = rng.random_range(0..=2);
            let body = (0..len).map(|_| rng.random_range(0..n) as AtomId).collect();
            t.horn.push(HornRule { head: h, body });
        }
    }
    let rules = rng.random_range(0..=n + n / 2 + 2);
    for _ in 0..rules {
        let a = rng.random_range(0..=2);
        let c = rng.random_range(0..=2);
        let ante = (0..a).map(|_| random_lit(rng, n, catoms)).collect();
        let cons = (0..c).map(|_| random_lit(rng, n, catoms)).collect();
        t.rules.push(GRule::new(ante, cons));
    }
    t
}

/// Satisfying assignments of DIMACS text, each as a line of literals.
pub fn brute_force_cnf(cnf: &str) -> Vec<String> {
    let mut vars = 0;
    let mut clauses: Vec<(u64, u64)> = Vec::new();
    for line in cnf.lines() {
        if line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("p cnf ") {
            vars = rest.split_whitespace().next().unwrap().parse::<u32>().unwrap();
            continue;
        }
        let (mut pos, mut neg) = (0u64, 0u64);
        for tok in line.split_whitespace() {
            let l: i64 = tok.parse().unwrap();
            match l {
                0 => break,
                l if l > 0 => pos |= 1 << (l - 1),
                l => neg |= 1 << (-l - 1),
            }
        }
        clauses.push((pos, neg));
    }
    assert!(vars <= 24);
    let mut out = Vec::new();
    for a in 0u64..1 << vars {
        if clauses.iter().all(|&(p, n)| a & p != 0 || !a & n != 0) {
            let lits: Vec<String> =
                (0..vars).map(|v| if a >> v & 1 == 1 { format!("{}", v + 1) } else { format!("-{}", v + 1) }).collect();
            out.push(format!("v {} 0", lits.join(" ")));
        }
    }
    out
}

fn var(i: usize) -> Term {
    Term::var(["X", "Y", "Z", "W"][i])
}

/// A random pure program: at most three predicates of arity at most two,
/// at most three clauses, and at least one extensional predicate.
pub fn random_pure_program<R: Rng>(rng: &mut R) -> Vec<DatalogClause> {
    let npreds = rng.random_range(2..=3);
    let nint = rng.random_range(1..npreds);
    // Extensional predicates have positive arity so that the data
    // mentions constants.
    let arity: Vec<usize> = (0..npreds).map(|i| rng.random_range(usize::from(i >= nint)..=2)).collect();
    let name = |i: usize| if i < nint { format!("p{i}") } else { format!("e{i}") };
    let nclauses = rng.random_range(1..=3);
    let mut out = Vec::new();
    for c in 0..nclauses {
        // Every intentional predicate gets at least one clause.
        let p = if c < nint { c } else { rng.random_range(0..nint) };
        let head = PredAtom::new(name(p), (0..arity[p]).map(var).collect());
        let (mut positive, mut negative) = (Vec::new(), Vec::new());
        for _ in 0..rng.random_range(1..=3) {
            let q = rng.random_range(0..npreds);
            let atom = PredAtom::new(name(q), (0..arity[q]).map(|_| var(rng.random_range(0..3))).collect());
            if rng.random_bool(0.4) {
                negative.push(atom);
            } else {
                positive.push(atom);
            }
        }
        out.push(DatalogClause { head, positive, negative });
    }
    // Make sure some body mentions an extensional predicate.
    if !out.iter().any(|c| c.positive.iter().chain(&c.negative).any(|a| a.pred.starts_with('e'))) {
        let e = nint;
        out[0].positive.push(PredAtom::new(name(e), (0..arity[e]).map(|_| var(rng.random_range(0..3))).collect()));
    }
    out
}

fn tuples(consts: &[Constant], arity: usize) -> Vec<Vec<Constant>> {
    let mut out = vec![vec![]];
    for _ in 0..arity {
        out = out.into_iter().flat_map(|t| consts.iter().map(move |c| [t.clone(), vec![c.clone()]].concat())).collect();
    }
    out
}

fn ground(a: &PredAtom, s: &BTreeMap<String, Constant>) -> GroundAtom {
    GroundAtom::new(
        a.pred.clone(),
        a.args.iter().map(|t| if let Term::Var(v) = t { s[v].clone() } else { unreachable!() }).collect(),
    )
}

/// Supported models of `data` with `program`, projected to the
/// intentional predicates: every subset of the intentional Herbrand base
/// is tested against the Clark completion.
pub fn clark_oracle(program: &[DatalogClause], data: &BTreeSet<GroundAtom>) -> BTreeSet<Vec<GroundAtom>> {
    let consts: Vec<Constant> =
        data.iter().flat_map(|a| a.args.iter().cloned()).collect::<BTreeSet<_>>().into_iter().collect();
    let mut arity = BTreeMap::new();
    for c in program {
        arity.insert(c.head.pred.clone(), c.head.args.len());
    }
    let base: Vec<GroundAtom> = arity
        .iter()
        .flat_map(|(p, &k)| tuples(&consts, k).into_iter().map(move |args| GroundAtom::new(p.clone(), args)))
        .collect();
    assert!(base.len() <= 20);
    let mut out = BTreeSet::new();
    for mask in 0u64..1 << base.len() {
        let s: BTreeSet<&GroundAtom> =
            base.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, a)| a).collect();
        let holds = |a: &GroundAtom| data.contains(a) || s.contains(a);
        let supported = |atom: &GroundAtom| {
            program.iter().filter(|c| c.head.pred == atom.pred).any(|c| {
                let mut vars: Vec<String> = Vec::new();
                for a in std::iter::once(&c.head).chain(&c.positive).chain(&c.negative) {
                    for t in &a.args {
                        if let Term::Var(v) = t {
                            if !vars.contains(v) {
                                vars.push(v.clone());
                            }
                        }
                    }
                }
                tuples(&consts, vars.len()).into_iter().any(|vals| {
                    let sub: BTreeMap<String, Constant> = vars.iter().cloned().zip(vals).collect();
                    ground(&c.head, &sub) == *atom
                        && c.positive.iter().all(|a| holds(&ground(a, &sub)))
                        && c.negative.iter().all(|a| !holds(&ground(a, &sub)))
                })
            })
        };
        if base.iter().all(|a| s.contains(a) == supported(a)) {
            out.insert(s.into_iter().cloned().collect());
        }
    }
    out
}

/// Random facts over the extensional predicates of `program`.
pub fn random_data<R: Rng>(rng: &mut R, program: &[DatalogClause]) -> BTreeSet<GroundAtom> {
    let nconsts = rng.random_range(1..=3);
    let consts: Vec<Constant> = ["a", "b", "c"][..nconsts].iter().map(|s| Constant::sym(*s)).collect();
    let heads: BTreeSet<&str> = program.iter().map(|c| c.head.pred.as_str()).collect();
    let mut ext = BTreeMap::new();
    for c in program {
        for a in c.positive.iter().chain(&c.negative) {
            if !heads.contains(a.pred.as_str()) {
                ext.insert(a.pred.clone(), a.args.len());
            }
        }
    }
    let mut data = BTreeSet::new();
    for (p, &k) in &ext {
        for args in tuples(&consts, k) {
            if rng.random_bool(0.5) {
                data.insert(GroundAtom::new(p.clone(), args));
            }
        }
    }
    // The instance must be nonempty and mention every constant.
    let (p, &k) = ext.iter().next().unwrap();
    for c in &consts {
        data.insert(GroundAtom::new(p.clone(), vec![c.clone(); k]));
    }
    data
}
