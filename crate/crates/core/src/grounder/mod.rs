//! Grounding of validated pairs and simplification to the ground core.
//!
//! Every rule is compiled into a plan of steps over its variables:
//! enumerate a variable over the universe, compute it from an arithmetic
//! atom whose operands are known, or test a data or predefined atom as
//! soon as its variables are bound. Each complete substitution yields one
//! ground rule with data and predefined atoms evaluated away.
//!
//! Variables that occur only in arithmetic atoms, as the result of at least
//! one, are intermediate: they may take integer values outside the
//! universe. Every other variable ranges over the universe.

mod simplify;

pub use simplify::simplify_to_core;

use crate::ast::{
    classify_set_variables, ArithOp, Atom, CardinalityAtom, CmpOp, Constant, Flavor, GroundAtom, Literal, PredAtom,
    PredClass, Rule, Term, ValidatedPair,
};
use crate::theory::{AtomId, CAtom, GLit, GRule, GroundTheory, HornRule};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

/// Largest Herbrand base the grounder interns.
pub const MAX_ATOMS: u128 = 4_000_000;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GroundError {
    #[error("integer overflow while grounding `{rule}`")]
    Overflow { rule: String },
    #[error("the Herbrand base has {atoms} atoms, more than the limit of {MAX_ATOMS}")]
    TooLarge { atoms: u128 },
    #[error("propagation falsifies `{rule}`; the pair has no models")]
    Inconsistent { rule: String },
}

impl GroundError {
    pub fn code(&self) -> &'static str {
        match self {
            GroundError::Overflow { .. } => "E_OVERFLOW",
            GroundError::TooLarge { .. } => "E_TOO_LARGE",
            GroundError::Inconsistent { .. } => "E_INCONSISTENT",
        }
    }
}

fn eval_term(t: &Term) -> Result<Option<Constant>, GroundError> {
    Ok(match t {
        Term::Const(c) => Some(c.clone()),
        Term::Expr(op, a, b) => {
            let (Some(Constant::Int(x)), Some(Constant::Int(y))) = (eval_term(a)?, eval_term(b)?) else {
                return Ok(None);
            };
            op.apply(x, y).map_err(|_| GroundError::Overflow { rule: t.to_string() })?.map(Constant::Int)
        }
        Term::Var(_) | Term::Placeholder => None,
    })
}

/// Truth of a ground predefined atom. Arithmetic on a symbolic constant,
/// and division or remainder by zero, make the atom false.
pub fn eval_predefined(atom: &Atom) -> Result<bool, GroundError> {
    match atom {
        Atom::Cmp { op, lhs, rhs } => Ok(match (eval_term(lhs)?, eval_term(rhs)?) {
            (Some(a), Some(b)) => op.holds(&a, &b),
            _ => false,
        }),
        Atom::Arith { op, result, lhs, rhs } => {
            let expr = Term::Expr(*op, Box::new(lhs.clone()), Box::new(rhs.clone()));
            Ok(match (eval_term(result)?, eval_term(&expr)?) {
                (Some(Constant::Int(r)), Some(Constant::Int(v))) => r == v,
                _ => false,
            })
        }
        Atom::Pred(_) => Ok(false),
    }
}

/// Replaces the placeholders of `atom` by universe constants in every
/// possible way; the last placeholder varies fastest.
pub fn expand_e_atom(atom: &PredAtom, universe: &[Constant]) -> Vec<PredAtom> {
    let mut out = vec![atom.clone()];
    for pos in 0..atom.args.len() {
        if atom.args[pos] != Term::Placeholder {
            continue;
        }
        out = out
            .into_iter()
            .flat_map(|a| {
                universe.iter().map(move |c| {
                    let mut a = a.clone();
                    a.args[pos] = Term::Const(c.clone());
                    a
                })
            })
            .collect();
    }
    out
}

/// A value during grounding: a universe constant by index, or an integer
/// outside the universe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Val {
    C(u32),
    X(i64),
}

struct Universe {
    consts: Vec<Constant>,
    ints: HashMap<i64, u32>,
    index: HashMap<Constant, u32>,
}

impl Universe {
    fn new(consts: &[Constant]) -> Self {
        let index: HashMap<Constant, u32> = consts.iter().enumerate().map(|(i, c)| (c.clone(), i as u32)).collect();
        let ints = consts.iter().enumerate().filter_map(|(i, c)| c.as_int().map(|v| (v, i as u32))).collect();
        Universe { consts: consts.to_vec(), ints, index }
    }

    fn int(&self, v: Val) -> Option<i64> {
        match v {
            Val::C(i) => self.consts[i as usize].as_int(),
            Val::X(x) => Some(x),
        }
    }

    fn of_int(&self, x: i64) -> Val {
        self.ints.get(&x).map_or(Val::X(x), |&i| Val::C(i))
    }

    fn of_const(&self, c: &Constant) -> Val {
        match self.index.get(c) {
            Some(&i) => Val::C(i),
            None => Val::X(c.as_int().expect("symbols of the program are in the universe")),
        }
    }

    #[cfg(test)]
    fn constant(&self, v: Val) -> Constant {
        match v {
            Val::C(i) => self.consts[i as usize].clone(),
            Val::X(x) => Constant::Int(x),
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Arg {
    Var(usize),
    Val(Val),
}

#[derive(Clone, Debug)]
enum Test {
    Data { pred: usize, args: Vec<Arg>, want: bool },
    Cmp { op: CmpOp, lhs: Arg, rhs: Arg, want: bool },
    Arith { op: ArithOp, result: Arg, lhs: Arg, rhs: Arg, want: bool },
}

#[derive(Clone, Debug)]
enum Step {
    Enum(usize),
    Compute { var: usize, op: ArithOp, lhs: Arg, rhs: Arg, in_universe: bool },
    Test(Test),
}

#[derive(Clone, Debug)]
enum AArg {
    Arg(Arg),
    Hole,
}

/// A program atom: block offset in the atom table and arguments.
#[derive(Clone, Debug)]
struct AtomTpl {
    offset: u32,
    args: Vec<AArg>,
}

#[derive(Clone, Debug)]
struct DefTpl {
    steps: Vec<Step>,
    template: Option<AtomTpl>,
}

#[derive(Clone, Debug)]
struct CardTpl {
    lower: Option<Arg>,
    upper: Option<Arg>,
    defs: Vec<DefTpl>,
}

#[derive(Clone, Debug)]
enum LitTpl {
    Atom(AtomTpl),
    Card(CardTpl),
}

struct Compiled {
    nvars: usize,
    steps: Vec<Step>,
    ante: Vec<LitTpl>,
    cons: Vec<LitTpl>,
    horn: bool,
    text: String,
}

#[derive(Clone, Copy)]
enum PredKind {
    Data(usize),
    Program(u32),
    Absent,
}

struct Ctx<'a> {
    universe: Universe,
    preds: HashMap<&'a str, PredKind>,
    data: Vec<HashSet<Vec<u32>>>,
    radix: u64,
}

/// Variable naming and classification for one rule.
struct Vars {
    index: BTreeMap<String, usize>,
    intermediate: Vec<bool>,
}

impl Vars {
    fn id(&self, v: &str) -> usize {
        self.index[v]
    }
}

fn rule_vars(rule: &Rule) -> Vars {
    let mut names: Vec<&str> = rule.all_vars();
    names.sort_unstable();
    names.dedup();
    let index: BTreeMap<String, usize> = names.iter().enumerate().map(|(i, v)| (v.to_string(), i)).collect();
    // A variable is intermediate when every occurrence is inside an
    // arithmetic atom and one of them defines it.
    let mut elsewhere = BTreeSet::new();
    let mut defined = BTreeSet::new();
    for lit in rule.literals() {
        match lit {
            Literal::Atom(Atom::Arith { result, .. }) => {
                if let Term::Var(v) = result {
                    defined.insert(v.clone());
                }
            }
            Literal::Atom(a) => {
                let mut vs = Vec::new();
                a.collect_vars(&mut vs);
                elsewhere.extend(vs.into_iter().map(str::to_string));
            }
            Literal::Card(c) => {
                let mut vs = Vec::new();
                for b in c.lower.iter().chain(c.upper.iter()) {
                    b.collect_vars(&mut vs);
                }
                for d in &c.defs {
                    for t in &d.template.args {
                        t.collect_vars(&mut vs);
                    }
                    for cond in &d.conditions {
                        match cond {
                            Atom::Arith { result: Term::Var(v), .. } => {
                                defined.insert(v.clone());
                            }
                            Atom::Arith { .. } => {}
                            other => other.collect_vars(&mut vs),
                        }
                    }
                }
                elsewhere.extend(vs.into_iter().map(str::to_string));
            }
        }
    }
    let intermediate = names.iter().map(|v| defined.contains(*v) && !elsewhere.contains(*v)).collect();
    Vars { index, intermediate }
}

impl<'a> Ctx<'a> {
    fn arg(&self, t: &Term, vars: &Vars) -> Arg {
        match t {
            Term::Var(v) => Arg::Var(vars.id(v)),
            Term::Const(c) => Arg::Val(self.universe.of_const(c)),
            Term::Placeholder | Term::Expr(..) => unreachable!("validated rules are desugared"),
        }
    }

    fn atom_tpl(&self, offset: u32, p: &PredAtom, vars: &Vars) -> AtomTpl {
        let args = p
            .args
            .iter()
            .map(|t| match t {
                Term::Placeholder => AArg::Hole,
                t => AArg::Arg(self.arg(t, vars)),
            })
            .collect();
        AtomTpl { offset, args }
    }

    fn test_of(&self, a: &Atom, vars: &Vars, want: bool) -> Option<Test> {
        Some(match a {
            Atom::Pred(p) => match self.preds[p.pred.as_str()] {
                PredKind::Data(pred) => {
                    Test::Data { pred, args: p.args.iter().map(|t| self.arg(t, vars)).collect(), want }
                }
                _ => return None,
            },
            Atom::Cmp { op, lhs, rhs } => {
                Test::Cmp { op: *op, lhs: self.arg(lhs, vars), rhs: self.arg(rhs, vars), want }
            }
            Atom::Arith { op, result, lhs, rhs } => Test::Arith {
                op: *op,
                result: self.arg(result, vars),
                lhs: self.arg(lhs, vars),
                rhs: self.arg(rhs, vars),
                want,
            },
        })
    }

    fn compile_card(&self, c: &CardinalityAtom, vars: &Vars, rule_bound: &[bool]) -> CardTpl {
        let defs = c
            .defs
            .iter()
            .map(|d| {
                let (locals, _) = classify_set_variables(d);
                let locals: Vec<usize> = locals.iter().map(|v| vars.id(v)).collect();
                let template = match self.preds[d.template.pred.as_str()] {
                    PredKind::Program(offset) => Some(self.atom_tpl(offset, &d.template, vars)),
                    _ => None,
                };
                let tests: Vec<Test> =
                    d.conditions.iter().map(|a| self.test_of(a, vars, true).expect("data condition")).collect();
                let mut order = Vec::new();
                for cond in &d.conditions {
                    if let Atom::Pred(p) = cond {
                        push_vars(&p.args, vars, &mut order);
                    }
                }
                for cond in &d.conditions {
                    push_vars(&cond.terms().into_iter().cloned().collect::<Vec<_>>(), vars, &mut order);
                }
                push_vars(&d.template.args, vars, &mut order);
                order.retain(|v| locals.contains(v));
                let steps = plan(order, tests, rule_bound.to_vec(), &vars.intermediate);
                DefTpl { steps, template }
            })
            .collect();
        CardTpl {
            lower: c.lower.as_ref().map(|t| self.arg(t, vars)),
            upper: c.upper.as_ref().map(|t| self.arg(t, vars)),
            defs,
        }
    }

    fn compile(&self, rule: &Rule) -> Option<Compiled> {
        let vars = rule_vars(rule);
        let n = vars.index.len();
        let mut local = vec![false; n];
        for lit in rule.literals() {
            if let Literal::Card(c) = lit {
                for d in &c.defs {
                    for v in classify_set_variables(d).0 {
                        local[vars.id(&v)] = true;
                    }
                }
            }
        }
        let mut tests = Vec::new();
        let mut ante = Vec::new();
        let mut cons = Vec::new();
        // Priority order of rule-level variables.
        let (mut data_vars, mut prog_vars, mut builtin_vars, mut card_vars, mut head_vars) =
            (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut cards = Vec::new();
        for lit in &rule.antecedent {
            match lit {
                Literal::Atom(Atom::Pred(p)) => match self.preds[p.pred.as_str()] {
                    PredKind::Data(_) => {
                        tests.push(self.test_of(&Atom::Pred(p.clone()), &vars, true).unwrap());
                        push_vars(&p.args, &vars, &mut data_vars);
                    }
                    PredKind::Program(offset) => {
                        ante.push(Some(LitTpl::Atom(self.atom_tpl(offset, p, &vars))));
                        push_vars(&p.args, &vars, &mut prog_vars);
                    }
                    // Absent atoms are false: the rule never applies.
                    PredKind::Absent => return None,
                },
                Literal::Atom(a) => {
                    tests.push(self.test_of(a, &vars, true).unwrap());
                    push_vars(&a.terms().into_iter().cloned().collect::<Vec<_>>(), &vars, &mut builtin_vars);
                }
                Literal::Card(c) => {
                    cards.push((true, ante.len(), c));
                    ante.push(None);
                }
            }
        }
        for lit in &rule.consequent {
            match lit {
                Literal::Atom(Atom::Pred(p)) => match self.preds[p.pred.as_str()] {
                    PredKind::Data(_) => {
                        tests.push(self.test_of(&Atom::Pred(p.clone()), &vars, false).unwrap());
                        push_vars(&p.args, &vars, &mut head_vars);
                    }
                    PredKind::Program(offset) => {
                        cons.push(Some(LitTpl::Atom(self.atom_tpl(offset, p, &vars))));
                        push_vars(&p.args, &vars, &mut head_vars);
                    }
                    PredKind::Absent => {}
                },
                Literal::Atom(a) => {
                    tests.push(self.test_of(a, &vars, false).unwrap());
                    push_vars(&a.terms().into_iter().cloned().collect::<Vec<_>>(), &vars, &mut head_vars);
                }
                Literal::Card(c) => {
                    cards.push((false, cons.len(), c));
                    cons.push(None);
                }
            }
        }
        for (_, _, c) in &cards {
            let mut ts: Vec<Term> = c.lower.iter().chain(c.upper.iter()).cloned().collect();
            for d in &c.defs {
                ts.extend(d.template.args.iter().cloned());
                for cond in &d.conditions {
                    ts.extend(cond.terms().into_iter().cloned());
                }
            }
            push_vars(&ts, &vars, &mut card_vars);
        }
        let mut order: Vec<usize> = Vec::new();
        for v in data_vars.into_iter().chain(prog_vars).chain(builtin_vars).chain(card_vars).chain(head_vars) {
            if !local[v] && !order.contains(&v) {
                order.push(v);
            }
        }
        let steps = plan(order, tests, vec![false; n], &vars.intermediate);
        let mut rule_bound = vec![false; n];
        for s in &steps {
            match s {
                Step::Enum(v) | Step::Compute { var: v, .. } => rule_bound[*v] = true,
                Step::Test(_) => {}
            }
        }
        for (in_ante, pos, c) in cards {
            let tpl = Some(LitTpl::Card(self.compile_card(c, &vars, &rule_bound)));
            if in_ante {
                ante[pos] = tpl;
            } else {
                cons[pos] = tpl;
            }
        }
        Some(Compiled {
            nvars: n,
            steps,
            ante: ante.into_iter().map(Option::unwrap).collect(),
            cons: cons.into_iter().map(Option::unwrap).collect(),
            horn: rule.flavor == Some(Flavor::Horn),
            text: rule.to_string(),
        })
    }

    fn value_int(&self, a: Arg, env: &[Val]) -> Option<i64> {
        self.universe.int(self.val(a, env))
    }

    fn val(&self, a: Arg, env: &[Val]) -> Val {
        match a {
            Arg::Var(v) => env[v],
            Arg::Val(x) => x,
        }
    }

    fn eval(&self, t: &Test, env: &[Val], text: &str) -> Result<bool, GroundError> {
        Ok(match t {
            Test::Data { pred, args, want } => {
                let mut key = Vec::with_capacity(args.len());
                let mut present = true;
                for &a in args {
                    match self.val(a, env) {
                        Val::C(i) => key.push(i),
                        Val::X(_) => {
                            present = false;
                            break;
                        }
                    }
                }
                (present && self.data[*pred].contains(&key)) == *want
            }
            Test::Cmp { op, lhs, rhs, want } => {
                let (a, b) = (self.val(*lhs, env), self.val(*rhs, env));
                let holds = match op {
                    CmpOp::Eq => a == b,
                    CmpOp::Ne => a != b,
                    _ => match (self.universe.int(a), self.universe.int(b)) {
                        (Some(x), Some(y)) => op.holds(&Constant::Int(x), &Constant::Int(y)),
                        _ => false,
                    },
                };
                holds == *want
            }
            Test::Arith { op, result, lhs, rhs, want } => {
                let holds = match (self.value_int(*result, env), self.value_int(*lhs, env), self.value_int(*rhs, env)) {
                    (Some(r), Some(x), Some(y)) => {
                        op.apply(x, y).map_err(|_| GroundError::Overflow { rule: text.to_string() })? == Some(r)
                    }
                    _ => false,
                };
                holds == *want
            }
        })
    }

    fn run(
        &self,
        steps: &[Step],
        env: &mut Vec<Val>,
        text: &str,
        f: &mut dyn FnMut(&mut Vec<Val>) -> Result<(), GroundError>,
    ) -> Result<(), GroundError> {
        let Some((step, rest)) = steps.split_first() else {
            return f(env);
        };
        match step {
            Step::Enum(v) => {
                for i in 0..self.universe.consts.len() {
                    env[*v] = Val::C(i as u32);
                    self.run(rest, env, text, f)?;
                }
            }
            Step::Compute { var, op, lhs, rhs, in_universe } => {
                let (Some(x), Some(y)) = (self.value_int(*lhs, env), self.value_int(*rhs, env)) else {
                    return Ok(());
                };
                let Some(r) = op.apply(x, y).map_err(|_| GroundError::Overflow { rule: text.to_string() })? else {
                    return Ok(());
                };
                let v = self.universe.of_int(r);
                if *in_universe && matches!(v, Val::X(_)) {
                    return Ok(());
                }
                env[*var] = v;
                self.run(rest, env, text, f)?;
            }
            Step::Test(t) => {
                if self.eval(t, env, text)? {
                    self.run(rest, env, text, f)?;
                }
            }
        }
        Ok(())
    }

    /// Id of a ground program atom; `None` if an argument lies outside the
    /// universe (no such atom exists).
    fn atom_id(&self, tpl: &AtomTpl, env: &[Val], holes: &[u32]) -> Option<AtomId> {
        let mut id: u64 = 0;
        let mut h = 0;
        for a in &tpl.args {
            let i = match a {
                AArg::Hole => {
                    h += 1;
                    holes[h - 1]
                }
                AArg::Arg(a) => match self.val(*a, env) {
                    Val::C(i) => i,
                    Val::X(_) => return None,
                },
            };
            id = id * self.radix + u64::from(i);
        }
        Some(tpl.offset + id as AtomId)
    }

    fn expand(&self, tpl: &AtomTpl, env: &[Val], out: &mut Vec<GLit>) {
        let nholes = tpl.args.iter().filter(|a| matches!(a, AArg::Hole)).count();
        let mut holes = vec![0u32; nholes];
        loop {
            if let Some(id) = self.atom_id(tpl, env, &holes) {
                out.push(GLit::Atom(id));
            }
            // Odometer over the holes, last one fastest.
            let mut k = nholes;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                holes[k] += 1;
                if u64::from(holes[k]) < self.radix {
                    break;
                }
                holes[k] = 0;
            }
        }
    }

    /// `Ok(None)` stands for a c-atom that grounds to `false`, and a
    /// `GLit` of `None` members for `true`.
    fn ground_card(&self, c: &CardTpl, env: &mut Vec<Val>, text: &str) -> Result<Truth, GroundError> {
        let bound = |a: Option<Arg>, env: &[Val]| -> Option<Option<i64>> {
            match a {
                None => Some(None),
                Some(a) => self.value_int(a, env).filter(|&v| v >= 0).map(Some),
            }
        };
        let (Some(lo), Some(hi)) = (bound(c.lower, env), bound(c.upper, env)) else {
            return Ok(Truth::False);
        };
        let mut members = Vec::new();
        for d in &c.defs {
            let Some(tpl) = &d.template else { continue };
            self.run(&d.steps, env, text, &mut |env| {
                if let Some(id) = self.atom_id(tpl, env, &[]) {
                    members.push(id);
                }
                Ok(())
            })?;
        }
        members.sort_unstable();
        members.dedup();
        let k = members.len() as i64;
        let lo = lo.unwrap_or(0);
        let hi = hi.unwrap_or(k).min(k);
        if lo > k || hi < lo {
            return Ok(Truth::False);
        }
        if lo == 0 && hi == k {
            return Ok(Truth::True);
        }
        Ok(Truth::Lit(GLit::Card(CAtom { lower: lo as u32, upper: hi as u32, members })))
    }
}

enum Truth {
    True,
    False,
    Lit(GLit),
}

fn push_vars(terms: &[Term], vars: &Vars, out: &mut Vec<usize>) {
    let mut names = Vec::new();
    for t in terms {
        t.collect_vars(&mut names);
    }
    for n in names {
        let v = vars.id(n);
        if !out.contains(&v) {
            out.push(v);
        }
    }
}

fn test_vars(t: &Test) -> Vec<usize> {
    let args: Vec<Arg> = match t {
        Test::Data { args, .. } => args.clone(),
        Test::Cmp { lhs, rhs, .. } => vec![*lhs, *rhs],
        Test::Arith { result, lhs, rhs, .. } => vec![*result, *lhs, *rhs],
    };
    args.into_iter().filter_map(|a| if let Arg::Var(v) = a { Some(v) } else { None }).collect()
}

/// Orders enumeration, computation and tests. `order` lists the
/// variables to bind by priority; variables defined by an arithmetic test
/// are moved to the end so that they are computed when possible.
fn plan(order: Vec<usize>, tests: Vec<Test>, mut bound: Vec<bool>, intermediate: &[bool]) -> Vec<Step> {
    let generated: BTreeSet<usize> = tests
        .iter()
        .filter_map(|t| match t {
            Test::Arith { result: Arg::Var(v), want: true, .. } => Some(*v),
            _ => None,
        })
        .collect();
    let (mut order, gen_last): (Vec<usize>, Vec<usize>) = order.into_iter().partition(|v| !generated.contains(v));
    order.extend(gen_last);
    let mut pending: Vec<Option<Test>> = tests.into_iter().map(Some).collect();
    let mut steps = Vec::new();
    let mut next = 0;
    loop {
        let mut progress = true;
        while progress {
            progress = false;
            for slot in pending.iter_mut() {
                let Some(t) = slot else { continue };
                if test_vars(t).iter().all(|&v| bound[v]) {
                    steps.push(Step::Test(slot.take().unwrap()));
                    progress = true;
                    continue;
                }
                if let Test::Arith { op, result: Arg::Var(r), lhs, rhs, want: true } = t {
                    let known = |a: &Arg| matches!(a, Arg::Val(_)) || matches!(a, Arg::Var(v) if bound[*v]);
                    if !bound[*r] && known(lhs) && known(rhs) {
                        let r = *r;
                        steps.push(Step::Compute {
                            var: r,
                            op: *op,
                            lhs: *lhs,
                            rhs: *rhs,
                            in_universe: !intermediate[r],
                        });
                        bound[r] = true;
                        *slot = None;
                        progress = true;
                    }
                }
            }
        }
        while next < order.len() && bound[order[next]] {
            next += 1;
        }
        if next == order.len() {
            break;
        }
        let v = order[next];
        steps.push(Step::Enum(v));
        bound[v] = true;
    }
    debug_assert!(pending.iter().all(Option::is_none));
    steps
}

/// Grounds a validated pair. Data and predefined atoms are evaluated
/// away; the atom table holds the full Herbrand base of the generating
/// and closure predicates, ordered by predicate and then by arguments in
/// universe order.
pub fn ground_pair(pair: &ValidatedPair) -> Result<GroundTheory, GroundError> {
    let universe = Universe::new(&pair.universe);
    let radix = universe.consts.len() as u64;
    let mut theory = GroundTheory::new();
    let mut preds: HashMap<&str, PredKind> = HashMap::new();
    let mut data: Vec<HashSet<Vec<u32>>> = Vec::new();
    let mut data_index: HashMap<&str, usize> = HashMap::new();
    let mut total: u128 = 0;
    for (name, info) in pair.signature.iter() {
        if info.class == PredClass::Program && !info.is_absent() {
            total += u128::from(radix).pow(info.arity as u32);
        }
        let kind = match info.class {
            PredClass::Data => {
                data_index.insert(name, data.len());
                data.push(HashSet::new());
                PredKind::Data(data.len() - 1)
            }
            PredClass::Program if info.is_absent() => PredKind::Absent,
            PredClass::Program => PredKind::Program(0),
        };
        preds.insert(name.as_str(), kind);
    }
    if total > MAX_ATOMS {
        return Err(GroundError::TooLarge { atoms: total });
    }
    for (name, info) in pair.signature.iter() {
        let Some(PredKind::Program(_)) = preds.get(name.as_str()) else { continue };
        let offset = theory.num_atoms() as u32;
        preds.insert(name.as_str(), PredKind::Program(offset));
        let count = u64::from(radix as u32).pow(info.arity as u32);
        let mut args = vec![0usize; info.arity];
        for _ in 0..count {
            let atom = GroundAtom::new(name.clone(), args.iter().map(|&i| universe.consts[i].clone()).collect());
            theory.add_atom(atom, info.closure);
            for k in (0..info.arity).rev() {
                args[k] += 1;
                if args[k] < universe.consts.len() {
                    break;
                }
                args[k] = 0;
            }
        }
    }
    for f in &pair.data {
        let key = f.args.iter().map(|c| universe.index[c]).collect();
        data[data_index[f.pred.as_str()]].insert(key);
    }
    let ctx = Ctx { universe, preds, data, radix };

    for rule in &pair.rules {
        let Some(c) = ctx.compile(rule) else { continue };
        let mut env = vec![Val::C(0); c.nvars];
        let mut out_rules = Vec::new();
        let mut out_horn = Vec::new();
        ctx.run(&c.steps, &mut env, &c.text, &mut |env| {
            let mut ante = Vec::new();
            for l in &c.ante {
                match l {
                    LitTpl::Atom(t) => match ctx.atom_id(t, env, &[]) {
                        Some(id) => ante.push(GLit::Atom(id)),
                        None => return Ok(()),
                    },
                    LitTpl::Card(card) => match ctx.ground_card(card, env, &c.text)? {
                        Truth::True => {}
                        Truth::False => return Ok(()),
                        Truth::Lit(l) => ante.push(l),
                    },
                }
            }
            let mut cons = Vec::new();
            for l in &c.cons {
                match l {
                    LitTpl::Atom(t) => ctx.expand(t, env, &mut cons),
                    LitTpl::Card(card) => match ctx.ground_card(card, env, &c.text)? {
                        Truth::True => return Ok(()),
                        Truth::False => {}
                        Truth::Lit(l) => cons.push(l),
                    },
                }
            }
            if c.horn {
                let [GLit::Atom(head)] = cons[..] else { unreachable!("Horn heads are single atoms") };
                let body = ante.iter().map(|l| if let GLit::Atom(a) = l { *a } else { unreachable!() }).collect();
                out_horn.push(HornRule { head, body });
            } else {
                out_rules.push(GRule::new(ante, cons));
            }
            Ok(())
        })?;
        theory.rules.extend(out_rules);
        theory.horn.extend(out_horn);
    }
    Ok(theory)
}
