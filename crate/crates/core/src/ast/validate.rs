//! Static checks, rule classification and normalization of a data-program
//! pair.

use super::*;
use std::collections::{BTreeMap, BTreeSet};

/// Named constants supplied from outside the program text (`-c n=8`).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bindings(BTreeMap<String, Constant>);

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the previous value if `name` was already bound.
    pub fn insert(&mut self, name: impl Into<String>, value: Constant) -> Option<Constant> {
        self.0.insert(name.into(), value)
    }

    pub fn get(&self, name: &str) -> Option<&Constant> {
        self.0.get(name)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Constant)> {
        self.0.iter()
    }

    pub(crate) fn resolve(&self, c: &mut Constant) {
        if let Constant::Sym(name) = c {
            if let Some(v) = self.0.get(name) {
                *c = v.clone();
            }
        }
    }
}

impl<S: Into<String>> FromIterator<(S, Constant)> for Bindings {
    fn from_iter<I: IntoIterator<Item = (S, Constant)>>(iter: I) -> Self {
        Bindings(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DataProgramPair {
    pub data: Vec<GroundAtom>,
    pub program: Vec<Rule>,
    pub bindings: Bindings,
    /// Predicates that are data predicates even when `data` holds no fact
    /// for them (an empty edge relation, say), with their arities.
    pub data_predicates: BTreeMap<String, usize>,
}

impl DataProgramPair {
    pub fn new(data: Vec<GroundAtom>, program: Vec<Rule>) -> Self {
        DataProgramPair { data, program, ..Default::default() }
    }

    pub fn with_bindings(mut self, bindings: Bindings) -> Self {
        self.bindings = bindings;
        self
    }

    pub fn declare_data(mut self, pred: impl Into<String>, arity: usize) -> Self {
        self.data_predicates.insert(pred.into(), arity);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PredClass {
    /// Interpreted by the facts of the data set under the closed-world
    /// assumption.
    Data,
    /// Interpreted by solving.
    Program,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PredInfo {
    pub arity: usize,
    pub class: PredClass,
    /// Head predicate of some Horn rule.
    pub closure: bool,
    /// Occurs in some generating rule.
    pub generating: bool,
}

impl PredInfo {
    /// Program predicate that is neither generated nor defined by Horn
    /// rules. Its atoms lie outside the Herbrand base the models range
    /// over, so they are false.
    pub fn is_absent(&self) -> bool {
        self.class == PredClass::Program && !self.closure && !self.generating
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Signature {
    preds: BTreeMap<String, PredInfo>,
}

impl Signature {
    pub fn get(&self, pred: &str) -> Option<&PredInfo> {
        self.preds.get(pred)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &PredInfo)> {
        self.preds.iter()
    }

    pub fn is_data(&self, pred: &str) -> bool {
        self.get(pred).is_some_and(|p| p.class == PredClass::Data)
    }
}

/// A pair after validation: bindings substituted, rules flavored and
/// desugared, bound variables renamed apart.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidatedPair {
    pub data: BTreeSet<GroundAtom>,
    pub rules: Vec<Rule>,
    pub signature: Signature,
    /// Herbrand universe: integers ascending, then symbols.
    pub universe: Vec<Constant>,
}

impl ValidatedPair {
    pub fn rules_of(&self, flavor: Flavor) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(move |r| r.flavor == Some(flavor))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    #[error("placeholder in the antecedent of `{rule}`")]
    EatomInBody { rule: String },
    #[error("placeholder outside a consequent program atom in `{rule}`")]
    PlaceholderMisplaced { rule: String },
    #[error("`{pred}` is defined by Horn rules but occurs in the generating rule `{rule}`")]
    HornHeadInGenerating { pred: String, rule: String },
    #[error("program predicate `{pred}` used as a set-definition condition in `{rule}`")]
    ProgramPredInSetCondition { pred: String, rule: String },
    #[error("set-definition template `{pred}` is not a program predicate in `{rule}`")]
    BadSetTemplate { pred: String, rule: String },
    #[error("`{pred}` used with arity {first} and arity {second}")]
    ArityMismatch { pred: String, first: usize, second: usize },
    #[error("malformed Horn rule `{rule}`: {reason}")]
    HornShape { rule: String, reason: &'static str },
    #[error("the pair contains no constant symbol")]
    NoConstants,
}

impl ValidationError {
    pub fn code(&self) -> &'static str {
        match self {
            ValidationError::EatomInBody { .. } => "E_EATOM_IN_BODY",
            ValidationError::PlaceholderMisplaced { .. } => "E_PLACEHOLDER",
            ValidationError::HornHeadInGenerating { .. } => "E_HORN_HEAD_IN_G",
            ValidationError::ProgramPredInSetCondition { .. } => "E_PROGRAM_PRED_IN_SETCOND",
            ValidationError::BadSetTemplate { .. } => "E_SET_TEMPLATE",
            ValidationError::ArityMismatch { .. } => "E_ARITY_MISMATCH",
            ValidationError::HornShape { .. } => "E_HORN_SHAPE",
            ValidationError::NoConstants => "E_NO_CONSTANTS",
        }
    }
}

/// Splits the variables of a set definition into bound and free ones.
///
/// A variable is bound when it is an argument of a data condition, or
/// when a condition defines it arithmetically (`T = X + 1`), which covers
/// the variables desugaring introduces. All other variables are free and
/// range over the universe with the rest of the rule.
pub fn classify_set_variables(def: &SetDefinition) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut bound = BTreeSet::new();
    for cond in &def.conditions {
        match cond {
            Atom::Pred(p) => {
                let mut vs = Vec::new();
                for t in &p.args {
                    t.collect_vars(&mut vs);
                }
                bound.extend(vs.into_iter().map(str::to_string));
            }
            Atom::Arith { result: Term::Var(v), .. } => {
                bound.insert(v.clone());
            }
            _ => {}
        }
    }
    let mut all = Vec::new();
    def.collect_vars(&mut all);
    let free = all.into_iter().filter(|v| !bound.contains(*v)).map(str::to_string).collect();
    (bound, free)
}

fn record_arity(sig: &mut BTreeMap<String, usize>, pred: &str, arity: usize) -> Result<(), ValidationError> {
    match sig.get(pred) {
        Some(&a) if a != arity => {
            Err(ValidationError::ArityMismatch { pred: pred.to_string(), first: a, second: arity })
        }
        Some(_) => Ok(()),
        None => {
            sig.insert(pred.to_string(), arity);
            Ok(())
        }
    }
}

fn rule_atoms(rule: &Rule) -> Vec<&PredAtom> {
    let mut out = Vec::new();
    for lit in rule.literals() {
        match lit {
            Literal::Atom(Atom::Pred(p)) => out.push(p),
            Literal::Atom(_) => {}
            Literal::Card(c) => {
                for d in &c.defs {
                    out.push(&d.template);
                    for cond in &d.conditions {
                        if let Atom::Pred(p) = cond {
                            out.push(p);
                        }
                    }
                }
            }
        }
    }
    out
}

fn resolve_rule(rule: &mut Rule, bindings: &Bindings) {
    let mut f = |c: &mut Constant| bindings.resolve(c);
    let resolve_atom = |a: &mut Atom, f: &mut dyn FnMut(&mut Constant)| {
        for t in a.terms_mut() {
            t.map_consts(&mut |c| f(c));
        }
    };
    for lit in rule.antecedent.iter_mut().chain(rule.consequent.iter_mut()) {
        match lit {
            Literal::Atom(a) => resolve_atom(a, &mut f),
            Literal::Card(c) => {
                for b in c.lower.iter_mut().chain(c.upper.iter_mut()) {
                    b.map_consts(&mut f);
                }
                for d in &mut c.defs {
                    for t in &mut d.template.args {
                        t.map_consts(&mut f);
                    }
                    for cond in &mut d.conditions {
                        resolve_atom(cond, &mut f);
                    }
                }
            }
        }
    }
}

fn check_placeholders(rule: &Rule, sig: &Signature) -> Result<(), ValidationError> {
    let text = || rule.to_string();
    for lit in &rule.antecedent {
        let bad = match lit {
            Literal::Atom(a) => a.has_placeholder(),
            Literal::Card(c) => card_has_placeholder(c),
        };
        if bad {
            return Err(ValidationError::EatomInBody { rule: text() });
        }
    }
    for lit in &rule.consequent {
        let bad = match lit {
            Literal::Atom(Atom::Pred(p)) => {
                p.is_e_atom() && (sig.is_data(&p.pred) || p.args.iter().any(|t| t.has_expr() && t.has_placeholder()))
            }
            Literal::Atom(a) => a.has_placeholder(),
            Literal::Card(c) => card_has_placeholder(c),
        };
        if bad {
            return Err(ValidationError::PlaceholderMisplaced { rule: text() });
        }
    }
    Ok(())
}

fn card_has_placeholder(c: &CardinalityAtom) -> bool {
    c.lower.iter().chain(c.upper.iter()).any(Term::has_placeholder)
        || c.defs.iter().any(|d| {
            d.template.args.iter().any(Term::has_placeholder) || d.conditions.iter().any(Atom::has_placeholder)
        })
}

fn check_set_definitions(rule: &Rule, sig: &Signature) -> Result<(), ValidationError> {
    for lit in rule.literals() {
        let Literal::Card(c) = lit else { continue };
        for d in &c.defs {
            if sig.is_data(&d.template.pred) {
                return Err(ValidationError::BadSetTemplate { pred: d.template.pred.clone(), rule: rule.to_string() });
            }
            for cond in &d.conditions {
                if let Atom::Pred(p) = cond {
                    if !sig.is_data(&p.pred) {
                        return Err(ValidationError::ProgramPredInSetCondition {
                            pred: p.pred.clone(),
                            rule: rule.to_string(),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

fn check_horn(rule: &Rule, sig: &Signature) -> Result<(), ValidationError> {
    let fail = |reason| Err(ValidationError::HornShape { rule: rule.to_string(), reason });
    let [Literal::Atom(Atom::Pred(head))] = rule.consequent.as_slice() else {
        return fail("the head must be a single atom");
    };
    if head.is_e_atom() {
        return fail("the head must not contain placeholders");
    }
    if sig.is_data(&head.pred) {
        return fail("the head must be a program atom");
    }
    if rule.antecedent.iter().any(|l| matches!(l, Literal::Card(_))) {
        return fail("the body must not contain cardinality atoms");
    }
    Ok(())
}

/// Renames bound variables of set definitions that also occur elsewhere
/// in the rule, so that bound and free variable names are disjoint.
fn rename_bound_apart(rule: &mut Rule) {
    let mut used: BTreeSet<String> = rule.all_vars().into_iter().map(str::to_string).collect();
    let n_ante = rule.antecedent.len();
    let positions: Vec<(usize, usize)> = rule
        .literals()
        .enumerate()
        .filter_map(|(i, l)| match l {
            Literal::Card(c) => Some((i, c.defs.len())),
            _ => None,
        })
        .flat_map(|(i, n)| (0..n).map(move |j| (i, j)))
        .collect();
    for (li, di) in positions {
        let lit_ref = |r: &Rule| -> CardinalityAtom {
            let l = if li < n_ante { &r.antecedent[li] } else { &r.consequent[li - n_ante] };
            match l {
                Literal::Card(c) => c.clone(),
                _ => unreachable!(),
            }
        };
        let card = lit_ref(rule);
        let (bound, _) = classify_set_variables(&card.defs[di]);
        // Variables occurring outside this definition.
        let mut outside = Vec::new();
        for (k, lit) in rule.literals().enumerate() {
            match lit {
                Literal::Atom(a) => a.collect_vars(&mut outside),
                Literal::Card(c) => {
                    for b in c.lower.iter().chain(c.upper.iter()) {
                        b.collect_vars(&mut outside);
                    }
                    for (j, d) in c.defs.iter().enumerate() {
                        if !(k == li && j == di) {
                            d.collect_vars(&mut outside);
                        }
                    }
                }
            }
        }
        let outside: BTreeSet<String> = outside.into_iter().map(str::to_string).collect();
        let clashes: Vec<String> = bound.intersection(&outside).cloned().collect();
        if clashes.is_empty() {
            continue;
        }
        let lit = if li < n_ante { &mut rule.antecedent[li] } else { &mut rule.consequent[li - n_ante] };
        let Literal::Card(c) = lit else { unreachable!() };
        let def = &mut c.defs[di];
        for v in clashes {
            let mut k = 1;
            let fresh = loop {
                let cand = format!("{v}_{k}");
                if !used.contains(&cand) {
                    break cand;
                }
                k += 1;
            };
            used.insert(fresh.clone());
            for t in &mut def.template.args {
                t.rename_var(&v, &fresh);
            }
            for cond in &mut def.conditions {
                for t in cond.terms_mut() {
                    t.rename_var(&v, &fresh);
                }
            }
        }
    }
}

fn collect_rule_consts<'a>(rule: &'a Rule, out: &mut Vec<&'a Constant>) {
    for lit in rule.literals() {
        match lit {
            Literal::Atom(a) => {
                for t in a.terms() {
                    t.collect_consts(out);
                }
            }
            Literal::Card(c) => {
                for b in c.lower.iter().chain(c.upper.iter()) {
                    b.collect_consts(out);
                }
                for d in &c.defs {
                    for t in &d.template.args {
                        t.collect_consts(out);
                    }
                    for cond in &d.conditions {
                        for t in cond.terms() {
                            t.collect_consts(out);
                        }
                    }
                }
            }
        }
    }
}

/// Validates a pair and brings it into the form the grounder expects.
pub fn validate(pair: &DataProgramPair) -> Result<ValidatedPair, ValidationError> {
    let data: BTreeSet<GroundAtom> = pair
        .data
        .iter()
        .map(|a| {
            let mut a = a.clone();
            a.args.iter_mut().for_each(|c| pair.bindings.resolve(c));
            a
        })
        .collect();
    let mut rules: Vec<Rule> = pair.program.clone();
    for r in &mut rules {
        resolve_rule(r, &pair.bindings);
    }

    let mut arities = BTreeMap::new();
    let mut data_preds = BTreeSet::new();
    for (p, &a) in &pair.data_predicates {
        record_arity(&mut arities, p, a)?;
        data_preds.insert(p.clone());
    }
    for f in &data {
        record_arity(&mut arities, &f.pred, f.args.len())?;
        data_preds.insert(f.pred.clone());
    }
    for r in &rules {
        for p in rule_atoms(r) {
            record_arity(&mut arities, &p.pred, p.args.len())?;
        }
    }
    let mut sig = Signature {
        preds: arities
            .into_iter()
            .map(|(p, arity)| {
                let class = if data_preds.contains(&p) { PredClass::Data } else { PredClass::Program };
                (p, PredInfo { arity, class, closure: false, generating: false })
            })
            .collect(),
    };

    for r in &rules {
        if r.is_horn() {
            check_horn(r, &sig)?;
            if let [Literal::Atom(Atom::Pred(head))] = r.consequent.as_slice() {
                sig.preds.get_mut(&head.pred).expect("recorded").closure = true;
            }
        }
    }
    for r in &mut rules {
        check_placeholders(r, &sig)?;
        check_set_definitions(r, &sig)?;
        if r.is_horn() {
            continue;
        }
        let closure_pred = r.predicates().into_iter().find(|p| sig.get(p).is_some_and(|i| i.closure));
        match (r.flavor, closure_pred) {
            (Some(Flavor::Generating), Some(p)) => {
                return Err(ValidationError::HornHeadInGenerating { pred: p.to_string(), rule: r.to_string() });
            }
            (_, Some(_)) => r.flavor = Some(Flavor::Verifying),
            (_, None) => r.flavor = Some(Flavor::Generating),
        }
    }
    for r in &rules {
        if r.flavor == Some(Flavor::Generating) {
            for p in r.predicates() {
                sig.preds.get_mut(p).expect("recorded").generating = true;
            }
        }
    }

    let mut consts: Vec<&Constant> = data.iter().flat_map(|a| a.args.iter()).collect();
    for r in &rules {
        collect_rule_consts(r, &mut consts);
    }
    consts.extend(pair.bindings.iter().map(|(_, v)| v));
    let universe: BTreeSet<Constant> = consts.into_iter().cloned().collect();
    if universe.is_empty() {
        return Err(ValidationError::NoConstants);
    }

    let rules = rules
        .iter()
        .map(|r| {
            let mut r = desugar_arithmetic(r);
            rename_bound_apart(&mut r);
            r
        })
        .collect();

    Ok(ValidatedPair { data, rules, signature: sig, universe: universe.into_iter().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_data, parse_program};

    fn pair(data: &str, prog: &str) -> DataProgramPair {
        DataProgramPair::new(parse_data(data).unwrap(), parse_program(prog).unwrap())
    }

    const HC_HORN: &str = "
        hc_edge(X,Y) -> edge(X,Y).
        vtx(X) -> 1 { hc_edge(Y,X) : vtx(Y) } 1.
        vtx(X) -> 1 { hc_edge(X,Y) : vtx(Y) } 1.
        visit(Y) <- visit(X), hc_edge(X,Y).
        visit(X) <- start(X).
        vtx(X) -> visit(X).
    ";

    #[test]
    fn hamiltonian_rules_are_flavored() {
        let v = validate(&pair("vtx(1). vtx(2). edge(1,2). edge(2,1). start(1).", HC_HORN)).unwrap();
        let flavors: Vec<_> = v.rules.iter().map(|r| r.flavor.unwrap()).collect();
        use Flavor::*;
        assert_eq!(flavors, vec![Generating, Generating, Generating, Horn, Horn, Verifying]);
        assert!(v.signature.get("visit").unwrap().closure);
        assert!(v.signature.get("hc_edge").unwrap().generating);
    }

    #[test]
    fn placeholder_in_antecedent_is_rejected() {
        let err = validate(&pair("q(a).", "p(_), q(X) -> r(X).")).unwrap_err();
        assert_eq!(err.code(), "E_EATOM_IN_BODY");
    }

    #[test]
    fn horn_head_in_generating_rule_is_rejected() {
        let mut p = pair("e(a,b).", "visit(Y) <- visit(X), e(X,Y). visit(X) -> false.");
        p.program[1].flavor = Some(Flavor::Generating);
        let err = validate(&p).unwrap_err();
        assert_eq!(err.code(), "E_HORN_HEAD_IN_G");
        // Without the explicit flavor the same rule is a verifying rule.
        p.program[1].flavor = None;
        let v = validate(&p).unwrap();
        assert_eq!(v.rules[1].flavor, Some(Flavor::Verifying));
    }

    #[test]
    fn program_predicate_as_condition_is_rejected() {
        let err = validate(&pair("d(1).", "d(X) -> 1 { p(X,Y) : q(Y) }. q(1).")).unwrap_err();
        assert_eq!(err.code(), "E_PROGRAM_PRED_IN_SETCOND");
    }

    #[test]
    fn arity_mismatch_is_rejected() {
        let err = validate(&pair("vtx(1).", "vtx(X,Y) -> p(X).")).unwrap_err();
        assert_eq!(err.code(), "E_ARITY_MISMATCH");
    }

    #[test]
    fn theory_without_constants_is_rejected() {
        let err = validate(&pair("", "p(X) -> q(X).")).unwrap_err();
        assert_eq!(err, ValidationError::NoConstants);
    }

    #[test]
    fn classify_examples() {
        let prog = parse_program("d1(X) -> X { p(X,Y) : d1(Y), Y >= X ; q(Z) : d2(Z) }.").unwrap();
        let Literal::Card(c) = &prog[0].consequent[0] else { panic!() };
        let set = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        assert_eq!(classify_set_variables(&c.defs[0]), (set(&["Y"]), set(&["X"])));
        assert_eq!(classify_set_variables(&c.defs[1]), (set(&["Z"]), set(&[])));
        let bare = SetDefinition::new(PredAtom::new("p", vec![Term::var("X"), Term::var("Y")]), vec![]);
        assert_eq!(classify_set_variables(&bare), (set(&[]), set(&["X", "Y"])));
    }

    #[test]
    fn bound_variables_are_renamed_apart() {
        let v = validate(&pair("d(1). d(2).", "d(Y) -> 1 { p(Y) : d(Y) }.")).unwrap();
        assert_eq!(v.rules[0].to_string(), "d(Y) -> 1 { p(Y_1) : d(Y_1) }.");
    }

    #[test]
    fn bindings_and_universe() {
        let p = pair("index(1). index(2).", "index(R) -> q(R,n).")
            .with_bindings([("n", Constant::Int(5))].into_iter().collect());
        let v = validate(&p).unwrap();
        assert_eq!(v.rules[0].to_string(), "index(R) -> q(R,5).");
        assert_eq!(v.universe, vec![Constant::Int(1), Constant::Int(2), Constant::Int(5)]);
    }

    #[test]
    fn universe_orders_integers_before_symbols() {
        let v = validate(&pair("p(b). p(3). p(a). p(-1).", "p(X) -> q(X).")).unwrap();
        let u: Vec<String> = v.universe.iter().map(|c| c.to_string()).collect();
        assert_eq!(u, ["-1", "3", "a", "b"]);
    }
}
