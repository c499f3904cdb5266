//! Benchmark encodings, seeded instance generators and brute-force
//! oracles.

mod graph;
pub mod oracle;

pub use graph::{random_graph, Graph};

use crate::ast::{Bindings, Constant, DataProgramPair, GroundAtom};
use crate::solver::{self, SolveOptions, SolverStats};
use crate::theory::GroundTheory;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BenchError {
    #[error("bad instance parameters: {0}")]
    BadParams(String),
    #[error("instance too large for the brute-force oracle: {0}")]
    TooLarge(String),
}

impl BenchError {
    pub fn code(&self) -> &'static str {
        match self {
            BenchError::BadParams(_) => "E_BAD_PARAMS",
            BenchError::TooLarge(_) => "E_TOO_LARGE",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Problem {
    Coloring,
    VertexCover,
    Hamiltonian,
    NQueens,
    TransitiveClosure,
}

impl Problem {
    pub const ALL: [Problem; 5] =
        [Problem::Coloring, Problem::VertexCover, Problem::Hamiltonian, Problem::NQueens, Problem::TransitiveClosure];

    pub fn name(self) -> &'static str {
        match self {
            Problem::Coloring => "coloring",
            Problem::VertexCover => "vertex-cover",
            Problem::Hamiltonian => "hamiltonian",
            Problem::NQueens => "nqueens",
            Problem::TransitiveClosure => "transitive-closure",
        }
    }

    pub fn is_directed(self) -> bool {
        matches!(self, Problem::Hamiltonian | Problem::TransitiveClosure)
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        Problem::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| BenchError::BadParams(format!("unknown problem `{s}`")))
    }
}

/// `Plain` encodings use only PS rules; `Extended` ones use c-atoms or
/// Horn rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Plain,
    Extended,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Plain => "plain",
            Variant::Extended => "extended",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "plain" => Ok(Variant::Plain),
            "extended" => Ok(Variant::Extended),
            _ => Err(BenchError::BadParams(format!("unknown variant `{s}`"))),
        }
    }
}

/// The shipped program files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Encoding {
    Coloring,
    ColoringCard,
    VertexCover,
    VertexCoverCard,
    Hamiltonian,
    HamiltonianHorn,
    NQueens,
    NQueensCard,
    TransitiveClosure,
}

impl Encoding {
    pub fn of(problem: Problem, variant: Variant) -> Option<Encoding> {
        use Encoding::*;
        Some(match (problem, variant) {
            (Problem::Coloring, Variant::Plain) => Coloring,
            (Problem::Coloring, Variant::Extended) => ColoringCard,
            (Problem::VertexCover, Variant::Plain) => VertexCover,
            (Problem::VertexCover, Variant::Extended) => VertexCoverCard,
            (Problem::Hamiltonian, Variant::Plain) => Hamiltonian,
            (Problem::Hamiltonian, Variant::Extended) => HamiltonianHorn,
            (Problem::NQueens, Variant::Plain) => NQueens,
            (Problem::NQueens, Variant::Extended) => NQueensCard,
            (Problem::TransitiveClosure, Variant::Plain) => TransitiveClosure,
            (Problem::TransitiveClosure, Variant::Extended) => return None,
        })
    }

    pub fn file_name(self) -> &'static str {
        match self {
            Encoding::Coloring => "coloring.ps",
            Encoding::ColoringCard => "coloring_card.ps",
            Encoding::VertexCover => "vertex_cover.ps",
            Encoding::VertexCoverCard => "vertex_cover_card.ps",
            Encoding::Hamiltonian => "hamiltonian.ps",
            Encoding::HamiltonianHorn => "hamiltonian_horn.ps",
            Encoding::NQueens => "nqueens.ps",
            Encoding::NQueensCard => "nqueens_card.ps",
            Encoding::TransitiveClosure => "tc.ps",
        }
    }
}

/// Text of a shipped program file.
pub fn encoding(e: Encoding) -> &'static str {
    match e {
        Encoding::Coloring => include_str!("../../encodings/coloring.ps"),
        Encoding::ColoringCard => include_str!("../../encodings/coloring_card.ps"),
        Encoding::VertexCover => include_str!("../../encodings/vertex_cover.ps"),
        Encoding::VertexCoverCard => include_str!("../../encodings/vertex_cover_card.ps"),
        Encoding::Hamiltonian => include_str!("../../encodings/hamiltonian.ps"),
        Encoding::HamiltonianHorn => include_str!("../../encodings/hamiltonian_horn.ps"),
        Encoding::NQueens => include_str!("../../encodings/nqueens.ps"),
        Encoding::NQueensCard => include_str!("../../encodings/nqueens_card.ps"),
        Encoding::TransitiveClosure => include_str!("../../encodings/tc.ps"),
    }
}

/// The transitive-closure program in DATALOG¬ syntax.
pub const TC_DATALOG: &str = include_str!("../../encodings/tc.dlg");

/// Parameters of a generated instance. `n` is the number of vertices
/// (board size for n-queens), `m` the number of edges and `k` the number
/// of colors or the cover size bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceSpec {
    pub problem: Problem,
    pub variant: Variant,
    pub n: u32,
    pub m: u32,
    pub k: u32,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(problem: Problem, variant: Variant, n: u32) -> Self {
        InstanceSpec { problem, variant, n, m: 0, k: 0, seed: 0 }
    }

    pub fn edges(mut self, m: u32) -> Self {
        self.m = m;
        self
    }

    pub fn bound(mut self, k: u32) -> Self {
        self.k = k;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn encoding(&self) -> Result<Encoding, BenchError> {
        Encoding::of(self.problem, self.variant)
            .ok_or_else(|| BenchError::BadParams(format!("{} has no {} encoding", self.problem, self.variant)))
    }
}

impl fmt::Display for InstanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} n={}", self.problem, self.n)?;
        if self.problem != Problem::NQueens {
            write!(f, " m={} seed={}", self.m, self.seed)?;
        }
        if matches!(self.problem, Problem::Coloring | Problem::VertexCover) {
            write!(f, " k={}", self.k)?;
        }
        Ok(())
    }
}

/// A generated data set together with the program to solve it with.
#[derive(Clone, Debug)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub graph: Option<Graph>,
    pub data: Vec<GroundAtom>,
    pub bindings: Bindings,
    pub encoding: Encoding,
    data_preds: Vec<(&'static str, usize)>,
}

fn fact(pred: &str, args: &[u32]) -> GroundAtom {
    GroundAtom::new(pred, args.iter().map(|&a| Constant::Int(i64::from(a))).collect())
}

impl Instance {
    /// Data-program pair of the instance, with every data predicate
    /// declared so that empty relations stay data.
    pub fn pair(&self) -> DataProgramPair {
        let program = crate::parser::parse_program(encoding(self.encoding)).expect("shipped encodings parse");
        let mut pair = DataProgramPair::new(self.data.clone(), program).with_bindings(self.bindings.clone());
        for &(p, a) in &self.data_preds {
            pair = pair.declare_data(p, a);
        }
        pair
    }

    /// Same data with the cover bound replaced by `k`.
    pub fn with_bound(&self, k: u32) -> Result<Instance, BenchError> {
        generate_instance(&self.spec.clone().bound(k))
    }
}

/// Builds the data set of `spec`. Vertices are `1..=n`; undirected edges
/// are stored once, as `edge(v,w)` with `v < w`.
pub fn generate_instance(spec: &InstanceSpec) -> Result<Instance, BenchError> {
    let encoding = spec.encoding()?;
    if spec.n == 0 {
        return Err(BenchError::BadParams("n must be positive".into()));
    }
    let graph = match spec.problem {
        Problem::NQueens => None,
        p => Some(random_graph(spec.n, spec.m, p.is_directed(), spec.seed)?),
    };
    let mut data = Vec::new();
    let mut bindings = Bindings::new();
    let mut data_preds = vec![];
    if let Some(g) = &graph {
        data_preds.extend([("vtx", 1), ("edge", 2)]);
        data.extend((1..=g.n).map(|v| fact("vtx", &[v])));
        data.extend(g.edges.iter().map(|&(v, w)| fact("edge", &[v, w])));
    }
    let index = |data: &mut Vec<GroundAtom>, k: u32| data.extend((1..=k).map(|i| fact("index", &[i])));
    match (spec.problem, spec.variant) {
        (Problem::Coloring, _) => {
            if spec.k == 0 {
                return Err(BenchError::BadParams("coloring needs k >= 1 colors".into()));
            }
            data_preds.push(("color", 1));
            data.extend((1..=spec.k).map(|i| fact("color", &[i])));
        }
        (Problem::VertexCover, Variant::Plain) => {
            data_preds.push(("index", 1));
            index(&mut data, spec.k);
        }
        (Problem::VertexCover, Variant::Extended) => {
            data_preds.push(("size", 1));
            data.push(fact("size", &[spec.k]));
        }
        (Problem::Hamiltonian, Variant::Plain) => {
            data_preds.push(("index", 1));
            index(&mut data, spec.n);
            bindings.insert("n", Constant::Int(i64::from(spec.n)));
        }
        (Problem::Hamiltonian, Variant::Extended) => {
            data_preds.push(("start", 1));
            data.push(fact("start", &[1]));
        }
        (Problem::NQueens, _) => {
            data_preds.push(("index", 1));
            index(&mut data, spec.n);
            bindings.insert("n", Constant::Int(i64::from(spec.n)));
        }
        (Problem::TransitiveClosure, _) => {
            data_preds.push(("index", 1));
            index(&mut data, spec.n);
        }
    }
    data.sort();
    Ok(Instance { spec: spec.clone(), graph, data, bindings, encoding, data_preds })
}

/// Models of `instance` as sets of ground atoms, with the core they were
/// computed from. An inconsistent core has no models.
pub fn solve_instance(
    instance: &Instance,
    opts: &SolveOptions,
) -> Result<(Option<GroundTheory>, Vec<BTreeSet<GroundAtom>>, SolverStats), crate::Error> {
    let core = match crate::core_of(&instance.pair()) {
        Ok(core) => core,
        Err(crate::Error::Ground(e)) if e.code() == "E_INCONSISTENT" => {
            return Ok((None, Vec::new(), SolverStats::default()));
        }
        Err(e) => return Err(e),
    };
    let mut models = Vec::new();
    let stats = solver::solve(&core, opts, |m| {
        models.push(m.atoms.iter().map(|&a| core.atom(a).clone()).collect());
        true
    });
    Ok((Some(core), models, stats))
}

fn int_args(a: &GroundAtom) -> Vec<u32> {
    a.args.iter().map(|c| c.as_int().expect("integer constants") as u32).collect()
}

fn project<'a>(model: &'a BTreeSet<GroundAtom>, pred: &'a str) -> impl Iterator<Item = Vec<u32>> + 'a {
    model.iter().filter(move |a| a.pred == pred).map(int_args)
}

/// Outcome of [`check_correspondence`]: every violated correspondence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub violations: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.violations.push(msg());
        }
    }
}

/// Checks the models of an instance against the brute-force oracle:
/// colorings and queen placements correspond one to one; every model
/// projects to a vertex cover of size at most k and every such cover
/// arises; Hamiltonian models number `n` times the cycles for the plain
/// encoding and exactly the cycles otherwise; transitive closure has a
/// single model matching the oracle relation.
pub fn check_correspondence(instance: &Instance, models: &[BTreeSet<GroundAtom>]) -> Result<Report, BenchError> {
    let mut r = Report::default();
    let spec = &instance.spec;
    match spec.problem {
        Problem::Coloring => {
            let g = instance.graph.as_ref().unwrap();
            let expected = oracle::count_colorings(g, spec.k)?;
            r.check(models.len() as u64 == expected, || format!("{} models, {expected} colorings", models.len()));
            let mut seen = BTreeSet::new();
            for m in models {
                let mut color = vec![0; g.n as usize + 1];
                for a in project(m, "clrd") {
                    color[a[0] as usize] = a[1];
                }
                r.check(oracle::is_coloring(g, spec.k, &color[1..]), || format!("model is not a coloring: {color:?}"));
                seen.insert(color);
            }
            r.check(seen.len() == models.len(), || "two models give the same coloring".into());
        }
        Problem::VertexCover => {
            let g = instance.graph.as_ref().unwrap();
            let pred = if spec.variant == Variant::Plain { "vc" } else { "invc" };
            let mut covers = BTreeSet::new();
            for m in models {
                let w: BTreeSet<u32> = project(m, pred).map(|a| *a.last().unwrap()).collect();
                r.check(w.len() as u32 <= spec.k && oracle::is_cover(g, &w), || format!("{w:?} is not a small cover"));
                covers.insert(w);
            }
            let expected = oracle::small_covers(g, spec.k)?;
            r.check(covers == expected, || format!("{} covers found, {} expected", covers.len(), expected.len()));
        }
        Problem::Hamiltonian => {
            let g = instance.graph.as_ref().unwrap();
            let cycles = oracle::hamiltonian_cycles(g)?;
            let factor = if spec.variant == Variant::Plain { u64::from(g.n) } else { 1 };
            let expected = factor * cycles.len() as u64;
            r.check(models.len() as u64 == expected, || format!("{} models, {expected} expected", models.len()));
            for m in models {
                let mut succ = vec![0; g.n as usize + 1];
                if spec.variant == Variant::Plain {
                    let mut perm = vec![0; g.n as usize];
                    for a in project(m, "hc_perm") {
                        perm[a[0] as usize - 1] = a[1];
                    }
                    for i in 0..perm.len() {
                        succ[perm[i] as usize] = perm[(i + 1) % perm.len()];
                    }
                } else {
                    for a in project(m, "hc_edge") {
                        succ[a[0] as usize] = a[1];
                    }
                }
                let cycle = oracle::cycle_from(&succ);
                r.check(cycle.as_ref().is_some_and(|c| cycles.contains(c)), || {
                    format!("model is not a cycle: {succ:?}")
                });
            }
        }
        Problem::NQueens => {
            let expected = oracle::count_queens(spec.n)?;
            r.check(models.len() as u64 == expected, || format!("{} models, {expected} placements", models.len()));
            for m in models {
                let qs: Vec<Vec<u32>> = project(m, "q").collect();
                r.check(oracle::is_queens(spec.n, &qs), || format!("not a placement: {qs:?}"));
            }
        }
        Problem::TransitiveClosure => {
            let g = instance.graph.as_ref().unwrap();
            r.check(models.len() == 1, || format!("{} models, 1 expected", models.len()));
            let expected = oracle::transitive_closure(g)?;
            for m in models {
                let tc: BTreeSet<(u32, u32)> = project(m, "tc").map(|a| (a[0], a[1])).collect();
                r.check(tc == expected, || format!("tc projection {tc:?} differs from {expected:?}"));
            }
        }
    }
    Ok(r)
}

/// Smallest k for which the cover pair has a model, found by lowering k
/// from the number of vertices until the pair becomes unsatisfiable.
pub fn min_cover_by_probing(instance: &Instance) -> Result<u32, crate::Error> {
    let mut best = None;
    let mut k = instance.spec.n;
    loop {
        let (_, models, _) = solve_instance(&instance.with_bound(k)?, &SolveOptions::first(1))?;
        if models.is_empty() {
            break;
        }
        best = Some(k);
        if k == 0 {
            break;
        }
        k -= 1;
    }
    Ok(best.expect("the full vertex set is a cover"))
}

/// One line of `bench` output.
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub spec: String,
    pub variant: Variant,
    pub atoms: usize,
    pub rules: usize,
    pub core_size: usize,
    pub models: u64,
    pub decisions: u64,
    pub seconds: f64,
}

impl BenchRow {
    pub const HEADER: &'static str = "spec,variant,atoms,rules,core_size,models,decisions,time";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.6}",
            self.spec, self.variant, self.atoms, self.rules, self.core_size, self.models, self.decisions, self.seconds
        )
    }
}

/// Grounds and solves an instance, counting up to `max_models` models.
pub fn run_bench(spec: &InstanceSpec, max_models: Option<u64>) -> Result<BenchRow, crate::Error> {
    let start = Instant::now();
    let instance = generate_instance(spec)?;
    let (core, models, stats) = solve_instance(&instance, &SolveOptions { max_models })?;
    Ok(BenchRow {
        spec: spec.to_string(),
        variant: spec.variant,
        atoms: core.as_ref().map_or(0, GroundTheory::num_atoms),
        rules: core.as_ref().map_or(0, |c| c.rules.len() + c.horn.len()),
        core_size: core.as_ref().map_or(0, GroundTheory::size),
        models: models.len() as u64,
        decisions: stats.decisions,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coloring_layout() {
        let spec = InstanceSpec::new(Problem::Coloring, Variant::Extended, 3).edges(3).bound(3);
        let inst = generate_instance(&spec).unwrap();
        let shown: Vec<String> = inst.data.iter().map(ToString::to_string).collect();
        assert_eq!(
            shown,
            ["color(1)", "color(2)", "color(3)", "edge(1,2)", "edge(1,3)", "edge(2,3)", "vtx(1)", "vtx(2)", "vtx(3)"]
        );
        let (_, models, _) = solve_instance(&inst, &SolveOptions::all()).unwrap();
        assert_eq!(models.len(), 6);
        assert!(check_correspondence(&inst, &models).unwrap().passed());
    }

    #[test]
    fn hamiltonian_horn_layout_has_start() {
        let spec = InstanceSpec::new(Problem::Hamiltonian, Variant::Extended, 3).edges(3).seed(1);
        let inst = generate_instance(&spec).unwrap();
        assert!(inst.data.contains(&fact("start", &[1])));
    }

    #[test]
    fn nqueens_layout() {
        let inst = generate_instance(&InstanceSpec::new(Problem::NQueens, Variant::Plain, 4)).unwrap();
        let shown: Vec<String> = inst.data.iter().map(ToString::to_string).collect();
        assert_eq!(shown, ["index(1)", "index(2)", "index(3)", "index(4)"]);
        assert_eq!(inst.bindings.get("n"), Some(&Constant::Int(4)));
    }

    #[test]
    fn four_queens_both_encodings() {
        for variant in [Variant::Plain, Variant::Extended] {
            let inst = generate_instance(&InstanceSpec::new(Problem::NQueens, variant, 4)).unwrap();
            let (_, models, _) = solve_instance(&inst, &SolveOptions::all()).unwrap();
            assert_eq!(models.len(), 2, "{variant}");
            assert!(check_correspondence(&inst, &models).unwrap().passed());
        }
    }

    #[test]
    fn bad_params() {
        let spec = InstanceSpec::new(Problem::Coloring, Variant::Plain, 3).edges(4).bound(2);
        assert_eq!(generate_instance(&spec).unwrap_err().code(), "E_BAD_PARAMS");
        let spec = InstanceSpec::new(Problem::TransitiveClosure, Variant::Extended, 3);
        assert_eq!(generate_instance(&spec).unwrap_err().code(), "E_BAD_PARAMS");
    }

    #[test]
    fn encodings_parse() {
        use Encoding::*;
        for e in [
            Coloring,
            ColoringCard,
            VertexCover,
            VertexCoverCard,
            Hamiltonian,
            HamiltonianHorn,
            NQueens,
            NQueensCard,
            TransitiveClosure,
        ] {
            crate::parser::parse_program(encoding(e)).unwrap_or_else(|err| panic!("{}: {err}", e.file_name()));
        }
        crate::parser::parse_datalog(TC_DATALOG).unwrap();
    }

    #[test]
    fn csv_row() {
        let row = run_bench(&InstanceSpec::new(Problem::NQueens, Variant::Extended, 4), None).unwrap();
        assert_eq!(row.models, 2);
        assert!(row.csv().starts_with("nqueens n=4,extended,"));
    }
}
