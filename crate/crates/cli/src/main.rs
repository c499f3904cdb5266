//! `psplus`: ground, solve, export and translate PS+ programs.
//!
//! Exit status: 0 success, 2 input or usage errors, 3 core not exportable
//! as CNF, 10 satisfiable, 20 unsatisfiable.

use clap::{Args, Parser, Subcommand};
use psplus::bench::{self, InstanceSpec, Problem, Variant};
use psplus::solver::{self, SolveOptions};
use psplus::{dimacs, parser, translate, DataProgramPair, GroundTheory};
use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_ERROR: u8 = 2;
const EXIT_NOT_PLAIN: u8 = 3;
const EXIT_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;

#[derive(Parser)]
#[command(name = "psplus", version, about = "Grounder and solver for PS+ programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground a data-program pair and write its core.
    Ground {
        #[command(flatten)]
        input: Sources,
        /// Write the core here instead of stdout.
        #[arg(short = 'o', value_name = "FILE")]
        output: Option<PathBuf>,
        /// Print rules in program syntax instead of the core format.
        #[arg(long)]
        pretty: bool,
    },
    /// Compute models of a pair or of a core file.
    Solve {
        #[command(flatten)]
        input: Sources,
        /// Read a core written by `ground` instead of sources.
        #[arg(long, value_name = "FILE", conflicts_with_all = ["data", "program", "constants"])]
        core: Option<PathBuf>,
        #[command(flatten)]
        output: ModelOutput,
        /// Print search statistics after the models.
        #[arg(long)]
        stats: bool,
    },
    /// Export a plain core as DIMACS CNF, or lift a SAT solver's answer.
    Cnf {
        #[command(flatten)]
        input: Sources,
        #[arg(long, value_name = "FILE", conflicts_with_all = ["data", "program", "constants"])]
        core: Option<PathBuf>,
        /// Write the CNF here instead of stdout.
        #[arg(long, value_name = "FILE")]
        dimacs: Option<PathBuf>,
        /// Variable map: written on export, read with `--lift`.
        #[arg(long, value_name = "FILE")]
        map: Option<PathBuf>,
        /// Lift an assignment (DIMACS solver output) to a model.
        #[arg(long, value_name = "FILE", requires = "map")]
        lift: Option<PathBuf>,
    },
    /// Translate a DATALOG program to PS; with data, list its supported models.
    Translate {
        #[arg(short = 'p', value_name = "FILE", required = true)]
        program: Vec<PathBuf>,
        #[arg(short = 'd', value_name = "FILE")]
        data: Vec<PathBuf>,
        /// Write the PS program here instead of stdout.
        #[arg(short = 'o', value_name = "FILE")]
        output: Option<PathBuf>,
        /// Predicates to print; defaults to the intentional ones.
        #[arg(long, value_delimiter = ',', value_name = "P1,P2")]
        show: Option<Vec<String>>,
    },
    /// Generate benchmark instances and print one CSV row per instance.
    Bench(BenchArgs),
}

#[derive(Args)]
struct Sources {
    /// Data file; repeat to take the union of facts.
    #[arg(short = 'd', value_name = "FILE")]
    data: Vec<PathBuf>,
    /// Program file; repeat to concatenate rules.
    #[arg(short = 'p', value_name = "FILE")]
    program: Vec<PathBuf>,
    /// Constant binding, such as `n=8`.
    #[arg(short = 'c', value_name = "NAME=VALUE")]
    constants: Vec<String>,
}

#[derive(Args)]
struct ModelOutput {
    /// Number of models to print; 0 counts all models without printing.
    #[arg(long = "models", default_value_t = 1, value_name = "N")]
    models: u64,
    /// Print only atoms of these predicates.
    #[arg(long, value_delimiter = ',', value_name = "P1,P2")]
    show: Option<Vec<String>>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    problem: Problem,
    #[arg(long, default_value = "extended")]
    variant: Variant,
    /// Vertices, or board size for n-queens.
    #[arg(short = 'n')]
    n: u32,
    /// Edges; defaults to 2n.
    #[arg(short = 'm')]
    m: Option<u32>,
    /// Colors or cover size.
    #[arg(short = 'k', default_value_t = 3)]
    k: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instances to generate, with consecutive seeds.
    #[arg(long, default_value_t = 1)]
    runs: u64,
    /// Stop each search after N models; 0 enumerates all.
    #[arg(long = "models", default_value_t = 0, value_name = "N")]
    models: u64,
}

/// A failure with its diagnostic code and exit status.
struct Failure {
    code: &'static str,
    exit: u8,
    message: String,
}

impl Failure {
    fn new(code: &'static str, message: impl Into<String>) -> Self {
        let exit = match code {
            "E_CATOM_PRESENT" | "E_HORN_PRESENT" => EXIT_NOT_PLAIN,
            "E_INCONSISTENT" => EXIT_UNSAT,
            _ => EXIT_ERROR,
        };
        Failure { code, exit, message: message.into() }
    }
}

impl From<psplus::Error> for Failure {
    fn from(e: psplus::Error) -> Self {
        Failure::new(e.code(), e.to_string())
    }
}

macro_rules! via_pipeline {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                psplus::Error::from(e).into()
            }
        }
    )*};
}

via_pipeline!(
    parser::ParseError,
    parser::BindingError,
    psplus::grounder::GroundError,
    psplus::theory::CoreFormatError,
    dimacs::DimacsError,
    translate::TranslateError,
    bench::BenchError
);

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new("E_IO", format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    let res = match path {
        Some(p) => fs::write(p, text).map_err(|e| (p.display().to_string(), e)),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| ("stdout".into(), e)),
    };
    res.map_err(|(p, e)| Failure::new("E_IO", format!("{p}: {e}")))
}

impl Sources {
    fn pair(&self) -> Result<DataProgramPair, Failure> {
        if self.program.is_empty() {
            return Err(Failure::new("E_USAGE", "no program given (-p) and no core (--core)"));
        }
        let bindings = parser::parse_constants(&self.constants)?;
        let mut data = BTreeSet::new();
        for path in &self.data {
            let name = path.display().to_string();
            data.extend(parser::parse_data_with(&read(path)?, Some(&name), &bindings)?);
        }
        let mut program = Vec::new();
        for path in &self.program {
            let name = path.display().to_string();
            program.extend(parser::parse_program_named(&read(path)?, Some(&name))?);
        }
        Ok(DataProgramPair::new(data.into_iter().collect(), program).with_bindings(bindings))
    }

    /// The core of the pair, or the one stored in `core`.
    fn core(&self, core: Option<&Path>) -> Result<GroundTheory, Failure> {
        match core {
            Some(path) => Ok(GroundTheory::from_gnd(&read(path)?)?),
            None => Ok(psplus::core_of(&self.pair()?)?),
        }
    }
}

fn ground(input: &Sources, output: Option<&Path>, pretty: bool) -> Result<u8, Failure> {
    let core = input.core(None)?;
    write_out(output, &if pretty { core.pretty() } else { core.to_gnd() })?;
    eprintln!(
        "atoms: {}, free: {}, rules: {}, horn: {}, size: {}",
        core.num_atoms(),
        core.free_atoms().count(),
        core.rules.len(),
        core.horn.len(),
        core.size()
    );
    Ok(0)
}

fn solve(input: &Sources, core: Option<&Path>, out: &ModelOutput, stats: bool) -> Result<u8, Failure> {
    let core = match input.core(core) {
        Err(f) if f.code == "E_INCONSISTENT" => {
            if out.models == 0 && !stats {
                println!("models: 0");
            }
            return Ok(EXIT_UNSAT);
        }
        other => other?,
    };
    let opts = if out.models == 0 { SolveOptions::all() } else { SolveOptions::first(out.models) };
    let show = out.show.as_deref();
    let mut stdout = std::io::stdout().lock();
    let st = solver::solve(&core, &opts, |m| {
        if out.models > 0 {
            // A closed pipe ends the enumeration.
            return writeln!(stdout, "{}", m.render(&core, show).join(" ")).is_ok();
        }
        true
    });
    if stats {
        let _ = writeln!(stdout, "{st}");
    } else if out.models == 0 {
        let _ = writeln!(stdout, "models: {}", st.models);
    }
    Ok(if st.models > 0 { EXIT_SAT } else { EXIT_UNSAT })
}

fn cnf(
    input: &Sources,
    core: Option<&Path>,
    dimacs_path: Option<&Path>,
    map_path: Option<&Path>,
    lift: Option<&Path>,
) -> Result<u8, Failure> {
    let origin = match core {
        Some(p) => format!("core {}", p.display()),
        None => input.program.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(" "),
    };
    let core = input.core(core)?;
    if let Some(lift) = lift {
        let map = dimacs::VarMap::parse(&read(map_path.expect("required by clap"))?, &core)?;
        let model = dimacs::lift_model(&read(lift)?, &map, &core)?;
        println!("{}", model.render(&core, None).join(" "));
        return Ok(EXIT_SAT);
    }
    let (text, map) = dimacs::export_cnf_annotated(&core, &[format!("source {origin}")])?;
    write_out(dimacs_path, &text)?;
    if let Some(p) = map_path {
        write_out(Some(p), &map.to_text(&core))?;
    }
    Ok(0)
}

fn translate_cmd(
    program: &[PathBuf],
    data: &[PathBuf],
    output: Option<&Path>,
    show: Option<&[String]>,
) -> Result<u8, Failure> {
    let mut text = String::new();
    for p in program {
        text.push_str(&read(p)?);
        text.push('\n');
    }
    let pure = translate::parse_pure(&text)?;
    if data.is_empty() {
        let rules: String = translate::to_ps(&pure).iter().map(|r| format!("{r}\n")).collect();
        write_out(output, &rules)?;
        return Ok(0);
    }
    let mut facts = BTreeSet::new();
    for p in data {
        let name = p.display().to_string();
        facts.extend(parser::parse_data_with(&read(p)?, Some(&name), &psplus::Bindings::new())?);
    }
    let show: Vec<String> = match show {
        Some(s) => s.to_vec(),
        None => pure.intentional().iter().cloned().collect(),
    };
    let facts: Vec<_> = facts.into_iter().collect();
    let models = translate::supported_models(&facts, &pure, &show)?;
    let lines: String =
        models.iter().map(|m| m.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ") + "\n").collect();
    write_out(output, &lines)?;
    Ok(if models.is_empty() { EXIT_UNSAT } else { EXIT_SAT })
}

fn bench_cmd(a: &BenchArgs) -> Result<u8, Failure> {
    println!("{}", bench::BenchRow::HEADER);
    let max = (a.models > 0).then_some(a.models);
    for i in 0..a.runs {
        let spec =
            InstanceSpec::new(a.problem, a.variant, a.n).edges(a.m.unwrap_or(2 * a.n)).bound(a.k).seed(a.seed + i);
        println!("{}", bench::run_bench(&spec, max)?.csv());
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Ground { input, output, pretty } => ground(&input, output.as_deref(), pretty),
        Command::Solve { input, core, output, stats } => solve(&input, core.as_deref(), &output, stats),
        Command::Cnf { input, core, dimacs, map, lift } => {
            cnf(&input, core.as_deref(), dimacs.as_deref(), map.as_deref(), lift.as_deref())
        }
        Command::Translate { program, data, output, show } => {
            translate_cmd(&program, &data, output.as_deref(), show.as_deref())
        }
        Command::Bench(a) => bench_cmd(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            if f.exit == EXIT_UNSAT {
                eprintln!("unsatisfiable: {}", f.message);
            } else {
                eprintln!("error[{}]: {}", f.code, f.message);
            }
            ExitCode::from(f.exit)
        }
    }
}
