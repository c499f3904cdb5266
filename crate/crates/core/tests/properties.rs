mod common;

use proptest::prelude::*;
use psplus::ast::{self, desugar_arithmetic, GroundAtom};
use psplus::bench::{generate_instance, InstanceSpec, Problem, Variant};
use psplus::grounder::{ground_pair, simplify_to_core, GroundError};
use psplus::parser;
use psplus::solver::{self, BranchPlan, Solver};
use psplus::theory::{AtomId, CAtom, GLit, GRule, GroundTheory, HornRule};
use psplus::translate::{self, PureProgram};
use psplus::DataProgramPair;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// Small programs over d/1 (data), p/1 and q/2.

const CONSTS: [&str; 3] = ["a", "b", "c"];

fn term<R: Rng>(rng: &mut R, vars: &[&'static str]) -> String {
    if !vars.is_empty() && rng.random_bool(0.7) {
        vars[rng.random_range(0..vars.len())].to_string()
    } else {
        CONSTS[rng.random_range(0..CONSTS.len())].to_string()
    }
}

fn atom<R: Rng>(rng: &mut R, preds: &[&str], vars: &[&'static str]) -> String {
    match preds[rng.random_range(0..preds.len())] {
        "q" => format!("q({},{})", term(rng, vars), term(rng, vars)),
        p => format!("{p}({})", term(rng, vars)),
    }
}

/// A rule whose consequent variables all occur in the antecedent.
fn plain_rule<R: Rng>(rng: &mut R) -> String {
    let ante: Vec<String> = (0..rng.random_range(0..=2)).map(|_| atom(rng, &["d", "p", "q"], &["X", "Y"])).collect();
    let bound: Vec<&'static str> = ["X", "Y"].into_iter().filter(|v| ante.iter().any(|a| a.contains(v))).collect();
    let cons: Vec<String> = (0..rng.random_range(0..=2)).map(|_| atom(rng, &["p", "q"], &bound)).collect();
    match (ante.is_empty(), cons.is_empty()) {
        (true, true) => "p(a).".into(),
        (true, false) => format!("{}.", cons.join(" | ")),
        (false, true) => format!("{} -> false.", ante.join(", ")),
        (false, false) => format!("{} -> {}.", ante.join(", "), cons.join(" | ")),
    }
}

fn small_pair(seed: u64) -> (String, String) {
    let mut r = rng(seed);
    let data: Vec<String> = CONSTS[..2].iter().filter(|_| r.random_bool(0.7)).map(|c| format!("d({c}).")).collect();
    let data = if data.is_empty() { "d(a).".to_string() } else { data.join(" ") };
    let rules: Vec<String> = (0..r.random_range(1..=3)).map(|_| plain_rule(&mut r)).collect();
    (data, rules.join("\n"))
}

/// Models of a small program found by checking every subset of the
/// atoms of its predicates against every instance of every rule.
fn brute_force_program(data: &BTreeSet<GroundAtom>, rules: &[ast::Rule], universe: &[String]) -> BTreeSet<Vec<String>> {
    // Predicates the program never mentions are false.
    let mentions = |p: &str| rules.iter().any(|r| r.to_string().contains(&format!("{p}(")));
    let mut hb: Vec<String> = Vec::new();
    if mentions("p") {
        hb.extend(universe.iter().map(|u| format!("p({u})")));
    }
    if mentions("q") {
        for u in universe {
            hb.extend(universe.iter().map(|v| format!("q({u},{v})")));
        }
    }
    let data: BTreeSet<String> = data.iter().map(ToString::to_string).collect();
    // Instances of each rule, as (antecedent, consequent) atom strings.
    let mut instances = Vec::new();
    for r in rules {
        let text = r.to_string();
        for x in universe {
            for y in universe {
                let inst = text.replace('X', x).replace('Y', y);
                let (ante, cons) = match inst.split_once(" -> ") {
                    Some((a, c)) => (a.to_string(), c.trim_end_matches('.').to_string()),
                    None => (String::new(), inst.trim_end_matches('.').to_string()),
                };
                let split = |s: &str, sep: &str| -> Vec<String> {
                    s.split(sep).map(str::trim).filter(|a| !a.is_empty() && *a != "false").map(String::from).collect()
                };
                instances.push((split(&ante, "), "), split(&cons, " | ")));
            }
        }
    }
    // `split` on "), " drops the parenthesis; put it back.
    for (ante, _) in &mut instances {
        for a in ante.iter_mut() {
            if !a.ends_with(')') {
                a.push(')');
            }
        }
    }
    let mut out = BTreeSet::new();
    for mask in 0u32..1 << hb.len() {
        let m: BTreeSet<&str> =
            hb.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, a)| a.as_str()).collect();
        let holds = |a: &String| data.contains(a) || m.contains(a.as_str());
        if instances.iter().all(|(ante, cons)| !ante.iter().all(holds) || cons.iter().any(holds)) {
            out.insert(m.iter().map(|s| s.to_string()).collect());
        }
    }
    out
}

fn core_models(core: &GroundTheory) -> BTreeSet<Vec<String>> {
    solver::all_models(core)
        .iter()
        .map(|m| {
            let mut v = m.render(core, None);
            v.sort();
            v
        })
        .collect()
}

// Richer rule text for the parser.

fn rich_rule<R: Rng>(rng: &mut R) -> String {
    let mut ante = Vec::new();
    for _ in 0..rng.random_range(0..=2) {
        ante.push(match rng.random_range(0..4) {
            0 => format!("{} != {}", term(rng, &["X"]), term(rng, &["Y"])),
            1 => format!("q(X,{})", ["Y", "_", "1", "X+1"][rng.random_range(0..4)]),
            _ => atom(rng, &["d", "p", "q"], &["X", "Y"]),
        });
    }
    let mut cons = Vec::new();
    for _ in 0..rng.random_range(0..=2) {
        cons.push(match rng.random_range(0..4) {
            0 => format!("{} {{ q(X,Z) : d(Z) }} {}", rng.random_range(0..2), rng.random_range(1..3)),
            1 => format!("p(X*2-{})", rng.random_range(0..5)),
            _ => atom(rng, &["p", "q"], &["X", "Y"]),
        });
    }
    let horn = rng.random_bool(0.1);
    match (ante.is_empty(), cons.is_empty()) {
        (true, true) => "p(1).".into(),
        (true, false) => format!("{}.", cons.join(" | ")),
        (false, true) => format!("{} -> false.", ante.join(", ")),
        (false, false) if horn => format!("r(X) <- {}.", ante.join(", ")),
        (false, false) => format!("{} -> {}.", ante.join(", "), cons.join(" | ")),
    }
}

fn rich_program(seed: u64) -> String {
    let mut r = rng(seed);
    (0..r.random_range(1..=4)).map(|_| rich_rule(&mut r)).collect::<Vec<_>>().join("\n")
}

fn show(rules: &[ast::Rule]) -> String {
    rules.iter().map(|r| format!("{r}\n")).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn printing_is_a_fixpoint(seed in any::<u64>()) {
        let text = rich_program(seed);
        let once = show(&parser::parse_program(&text).unwrap());
        let twice = show(&parser::parse_program(&once).unwrap());
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn parse_error_spans_lie_inside_the_input(text in "[a-zX-Z0-9(),.|{}:_ <>=!+*-]{0,40}") {
        if let Err(e) = parser::parse_program(&text) {
            prop_assert!(e.span.start <= e.span.end && e.span.end <= text.len(), "{:?} in {:?}", e.span, text);
        }
    }

    #[test]
    fn parsing_is_deterministic(seed in any::<u64>()) {
        let text = rich_program(seed);
        prop_assert_eq!(parser::parse_program(&text).unwrap(), parser::parse_program(&text).unwrap());
    }

    #[test]
    fn desugaring_is_idempotent(seed in any::<u64>()) {
        for r in parser::parse_program(&rich_program(seed)).unwrap() {
            let once = desugar_arithmetic(&r);
            prop_assert_eq!(desugar_arithmetic(&once), once);
        }
    }

    #[test]
    fn validation_is_deterministic(seed in any::<u64>()) {
        let pair = DataProgramPair::new(parser::parse_data("d(1). d(2).").unwrap(), parser::parse_program(&rich_program(seed)).unwrap());
        match (ast::validate(&pair), ast::validate(&pair)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
            _ => prop_assert!(false, "validation outcome differs"),
        }
    }

    #[test]
    fn grounding_agrees_with_enumeration(seed in any::<u64>()) {
        let (data_text, text) = small_pair(seed);
        let data = parser::parse_data(&data_text).unwrap();
        let rules = parser::parse_program(&text).unwrap();
        let pair = DataProgramPair::new(data.clone(), rules.clone());
        let v = ast::validate(&pair).unwrap();
        let universe: Vec<String> = v.universe.iter().map(ToString::to_string).collect();
        let expected = brute_force_program(&data.into_iter().collect(), &rules, &universe);
        let found = match psplus::core_of(&pair) {
            Ok(core) => {
                for r in &core.rules {
                    for a in r.atoms() {
                        prop_assert!(core.atom(a).pred != "d", "data atom in `{}`", core.rule_to_string(r));
                    }
                }
                core_models(&core)
            }
            Err(e) if e.code() == "E_INCONSISTENT" => BTreeSet::new(),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert_eq!(found, expected, "{}", text);
    }

    #[test]
    fn grounding_is_deterministic(seed in any::<u64>()) {
        let (data, text) = small_pair(seed);
        let pair = DataProgramPair::new(parser::parse_data(&data).unwrap(), parser::parse_program(&text).unwrap());
        let v = ast::validate(&pair).unwrap();
        let a = ground_pair(&v).unwrap();
        let b = ground_pair(&ast::validate(&pair).unwrap()).unwrap();
        prop_assert_eq!(a.to_gnd(), b.to_gnd());
    }

    #[test]
    fn simplification_preserves_models(seed in any::<u64>()) {
        let raw = common::random_core(&mut rng(seed), 10, true, true);
        let expected = common::brute_force_models(&raw);
        match simplify_to_core(&raw) {
            Ok(core) => prop_assert_eq!(common::brute_force_models(&core), expected),
            Err(GroundError::Inconsistent { .. }) => prop_assert!(expected.is_empty()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn core_files_round_trip(seed in any::<u64>()) {
        let raw = common::random_core(&mut rng(seed), 10, true, true);
        let Ok(core) = simplify_to_core(&raw) else { return Ok(()) };
        let text = core.to_gnd();
        let back = GroundTheory::from_gnd(&text).unwrap();
        prop_assert_eq!(back.to_gnd(), text);
        prop_assert_eq!(common::brute_force_models(&back), common::brute_force_models(&core));
    }

    #[test]
    fn cnf_export_is_deterministic(seed in any::<u64>()) {
        let core = common::random_core(&mut rng(seed), 12, false, false);
        let (a, ma) = psplus::dimacs::export_cnf(&core).unwrap();
        let (b, mb) = psplus::dimacs::export_cnf(&core.clone()).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!(ma.to_text(&core), mb.to_text(&core));
    }

    #[test]
    fn closure_is_monotone_and_idempotent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.random_range(1..12u32);
        let horn: Vec<HornRule> = (0..r.random_range(0..12))
            .map(|_| HornRule { head: r.random_range(0..n), body: (0..r.random_range(0..3)).map(|_| r.random_range(0..n)).collect() })
            .collect();
        let small: BTreeSet<AtomId> = (0..n).filter(|_| r.random_bool(0.3)).collect();
        let mut large = small.clone();
        large.extend((0..n).filter(|_| r.random_bool(0.3)));
        let cs = solver::closure(&small, &horn);
        let cl = solver::closure(&large, &horn);
        prop_assert!(cs.is_subset(&cl));
        prop_assert_eq!(solver::closure(&cs, &horn), cs.clone());
        prop_assert!(small.is_subset(&cs));
    }

    #[test]
    fn emitted_models_satisfy_every_rule(seed in any::<u64>()) {
        let core = common::random_core(&mut rng(seed), 14, true, false);
        for m in solver::all_models(&core) {
            let mut v = vec![false; core.num_atoms()];
            for &a in &m.atoms {
                v[a as usize] = true;
            }
            for r in &core.rules {
                prop_assert!(psplus::theory::satisfies(v.as_slice(), r), "{}", core.rule_to_string(r));
            }
        }
    }

    #[test]
    fn backtracking_restores_the_assignment(seed in any::<u64>()) {
        let core = common::random_core(&mut rng(seed), 12, true, true);
        let mut s = Solver::new(&core);
        if !s.propagate_root() {
            return Ok(());
        }
        let before = s.assignment();
        let level = s.decision_level();
        let mut r = rng(seed ^ 1);
        for _ in 0..3 {
            let free: Vec<AtomId> = (0..core.num_atoms() as AtomId).filter(|&a| s.value(a).is_none() && !core.is_closure(a)).collect();
            if free.is_empty() {
                break;
            }
            let a = free[r.random_range(0..free.len())];
            if s.decide(a, r.random_bool(0.5)).is_err() {
                break;
            }
        }
        s.backtrack(level);
        prop_assert_eq!(s.assignment(), before);
    }

    #[test]
    fn catom_completions_are_exactly_the_satisfying_ones(
        k in 1usize..7,
        bounds in (0u32..7, 0u32..7),
        fixed in proptest::collection::vec(0u8..3, 7),
    ) {
        let (lo, hi) = (bounds.0.min(bounds.1), bounds.0.max(bounds.1));
        let mut t = common::atoms(k, &[]);
        let card = CAtom::new(lo, hi, (0..k as AtomId).collect());
        t.rules.push(GRule::new(vec![], vec![GLit::Card(card)]));
        for (a, &f) in fixed.iter().take(k).enumerate() {
            match f {
                1 => t.rules.push(GRule::new(vec![], vec![GLit::Atom(a as AtomId)])),
                2 => t.rules.push(GRule::new(vec![GLit::Atom(a as AtomId)], vec![])),
                _ => {}
            }
        }
        let mut s = Solver::new(&t);
        if !s.propagate_root() {
            return Ok(());
        }
        let Some(BranchPlan::CAtom { members, completions, .. }) = s.choose_branch() else { return Ok(()) };
        let t_true = (0..k as AtomId).filter(|&a| s.value(a) == Some(true)).count() as u32;
        let mut expected = BTreeSet::new();
        for mask in 0u32..1 << members.len() {
            let c: Vec<bool> = (0..members.len()).map(|i| mask >> i & 1 == 1).collect();
            let count = t_true + c.iter().filter(|&&b| b).count() as u32;
            if lo <= count && count <= hi {
                expected.insert(c);
            }
        }
        let got: BTreeSet<Vec<bool>> = completions.iter().cloned().collect();
        prop_assert_eq!(got.len(), completions.len(), "duplicate completions");
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn translations_validate(seed in any::<u64>()) {
        let mut r = rng(seed);
        let clauses = common::random_pure_program(&mut r);
        let Ok(pure) = PureProgram::new(clauses) else { return Ok(()) };
        let data: Vec<GroundAtom> = common::random_data(&mut r, pure.clauses()).into_iter().collect();
        let rules = translate::to_ps(&pure);
        let mut pair = DataProgramPair::new(data, rules.clone());
        for (p, &a) in pure.extensional() {
            pair = pair.declare_data(p.clone(), a);
        }
        prop_assert!(ast::validate(&pair).is_ok());
        for r in &rules {
            for a in r.to_string().split(|c: char| !c.is_alphanumeric() && c != '_') {
                if a.starts_with("__d_") {
                    prop_assert!(!pure.intentional().contains(a) && !pure.extensional().contains_key(a));
                }
            }
        }
    }

    #[test]
    fn generators_are_reproducible(seed in any::<u64>(), n in 2u32..9, problem in 0usize..5) {
        let problem = Problem::ALL[problem];
        let m = (2 * n).min(n * (n - 1) / 2);
        let variant = if problem == Problem::TransitiveClosure { Variant::Plain } else { Variant::Extended };
        let spec = InstanceSpec::new(problem, variant, n).edges(m).bound(3).seed(seed);
        let a = generate_instance(&spec).unwrap();
        let b = generate_instance(&spec).unwrap();
        prop_assert_eq!(a.data, b.data);
        prop_assert_eq!(a.bindings, b.bindings);
    }
}
