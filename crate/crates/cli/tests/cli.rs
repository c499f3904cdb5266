use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const ENCODINGS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/encodings");

fn psplus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psplus")).args(args).output().expect("binary runs")
}

fn status(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn encoding(name: &str) -> String {
    format!("{ENCODINGS}/{name}")
}

struct Dir(tempfile::TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, text: &str) -> String {
        let p: PathBuf = self.0.path().join(name);
        fs::write(&p, text).unwrap();
        p.display().to_string()
    }

    fn path(&self, name: &str) -> String {
        self.0.path().join(name).display().to_string()
    }
}

const K3: &str = "vtx(1..3). edge(1,2). edge(2,3). edge(1,3). color(1..3).";

#[test]
fn nonmonotonic_pair() {
    let d = Dir::new();
    let t1 = d.file("t1.ps", "p(_). p(a) -> false.");
    let t2 = d.file("t2.ps", "p(_). p(a) -> false. p(b).");
    let out = psplus(&["solve", "-p", &t1]);
    assert_eq!(status(&out), 20);
    assert_eq!(stdout(&out), "");
    let out = psplus(&["solve", "-p", &t2, "--models", "5"]);
    assert_eq!(status(&out), 10);
    assert_eq!(stdout(&out), "p(b)\n");
}

#[test]
fn ground_reports_inconsistency() {
    let d = Dir::new();
    let t1 = d.file("t1.ps", "p(_). p(a) -> false.");
    let gnd = d.path("t1.gnd");
    assert_eq!(status(&psplus(&["ground", "-p", &t1, "-o", &gnd])), 20);
}

#[test]
fn count_only_mode() {
    let d = Dir::new();
    let data = d.file("k3.dps", K3);
    let out = psplus(&["solve", "-d", &data, "-p", &encoding("coloring_card.ps"), "--models", "0"]);
    assert_eq!(status(&out), 10);
    assert_eq!(stdout(&out), "models: 6\n");
}

#[test]
fn ground_then_solve_matches_direct_solve() {
    let d = Dir::new();
    let data = d.file("k3.dps", K3);
    let gnd = d.path("k3.gnd");
    let out = psplus(&["ground", "-d", &data, "-p", &encoding("coloring.ps"), "-o", &gnd]);
    assert_eq!(status(&out), 0);
    assert!(stderr(&out).starts_with("atoms: 9,"), "{}", stderr(&out));
    let direct = psplus(&["solve", "-d", &data, "-p", &encoding("coloring.ps"), "--models", "100"]);
    let staged = psplus(&["solve", "--core", &gnd, "--models", "100"]);
    assert_eq!(status(&direct), 10);
    assert_eq!(status(&staged), 10);
    assert_eq!(stdout(&direct), stdout(&staged));
    assert_eq!(stdout(&direct).lines().count(), 6);
}

#[test]
fn show_filters_predicates() {
    let d = Dir::new();
    let idx = d.file("idx.dps", "index(1..n).");
    let out = psplus(&["solve", "-d", &idx, "-p", &encoding("nqueens.ps"), "-c", "n=4", "--models", "0"]);
    assert_eq!(stdout(&out), "models: 2\n");
    let out = psplus(&["solve", "-d", &idx, "-p", &encoding("nqueens_card.ps"), "-c", "n=4", "--show", "index"]);
    assert_eq!(stdout(&out), "\n");
}

#[test]
fn repeated_inputs_concatenate() {
    let d = Dir::new();
    let a = d.file("a.dps", "dom(a).");
    let b = d.file("b.dps", "dom(b).");
    let p1 = d.file("p1.ps", "dom(X) -> p(X) | q(X).");
    let p2 = d.file("p2.ps", "p(X) -> false.");
    let out = psplus(&["solve", "-d", &a, "-d", &b, "-p", &p1, "-p", &p2, "--show", "q"]);
    assert_eq!(stdout(&out), "q(a) q(b)\n");
}

#[test]
fn cnf_export_and_lift() {
    let d = Dir::new();
    let data = d.file("k3.dps", K3);
    let cnf = d.path("k3.cnf");
    let map = d.path("k3.map");
    let out = psplus(&["cnf", "-d", &data, "-p", &encoding("coloring.ps"), "--dimacs", &cnf, "--map", &map]);
    assert_eq!(status(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(&cnf).unwrap();
    assert!(text.lines().any(|l| l.starts_with("p cnf 9 ")), "{text}");
    let map_text = fs::read_to_string(&map).unwrap();
    assert_eq!(map_text.lines().count(), 9);

    // Vertex v gets color v.
    let trues: Vec<String> = map_text
        .lines()
        .map(|l| l.split_once(' ').unwrap())
        .map(|(v, atom)| {
            if atom == "clrd(1,1)" || atom == "clrd(2,2)" || atom == "clrd(3,3)" {
                v.to_string()
            } else {
                format!("-{v}")
            }
        })
        .collect();
    let answer = d.file("answer", &format!("s SATISFIABLE\nv {} 0\n", trues.join(" ")));
    let out = psplus(&["cnf", "-d", &data, "-p", &encoding("coloring.ps"), "--map", &map, "--lift", &answer]);
    assert_eq!(status(&out), 10, "{}", stderr(&out));
    assert_eq!(stdout(&out), "clrd(1,1) clrd(2,2) clrd(3,3)\n");

    let bad = d.file("bad", "v 0\n");
    let out = psplus(&["cnf", "-d", &data, "-p", &encoding("coloring.ps"), "--map", &map, "--lift", &bad]);
    assert_eq!(status(&out), 2);
    assert!(stderr(&out).contains("E_MODEL_MISMATCH"));
}

#[test]
fn cnf_refuses_cardinality_atoms() {
    let d = Dir::new();
    let idx = d.file("idx.dps", "index(1..n).");
    let out = psplus(&["cnf", "-d", &idx, "-p", &encoding("nqueens_card.ps"), "-c", "n=4"]);
    assert_eq!(status(&out), 3);
    assert!(stderr(&out).contains("E_CATOM_PRESENT"));
}

#[test]
fn cnf_of_empty_core() {
    let d = Dir::new();
    let gnd = d.file("empty.gnd", "gnd 1\n");
    let out = psplus(&["cnf", "--core", &gnd]);
    assert_eq!(status(&out), 0);
    assert!(stdout(&out).lines().any(|l| l == "p cnf 0 0"));
}

#[test]
fn missing_file() {
    let out = psplus(&["ground", "-p", "/nonexistent/prog.ps"]);
    assert_eq!(status(&out), 2);
    assert!(stderr(&out).contains("E_IO"));
}

#[test]
fn parse_errors_exit_2() {
    let d = Dir::new();
    let p = d.file("bad.ps", "p(X) -> ");
    let out = psplus(&["ground", "-p", &p]);
    assert_eq!(status(&out), 2);
    assert!(stderr(&out).starts_with("error[E_"));
}

#[test]
fn corrupt_core_exits_2() {
    let d = Dir::new();
    let gnd = d.file("bad.gnd", "not a core\n");
    let out = psplus(&["solve", "--core", &gnd]);
    assert_eq!(status(&out), 2);
    assert!(stderr(&out).contains("E_CORE_FORMAT"));
}

#[test]
fn translate_lists_supported_models() {
    let d = Dir::new();
    let p = d.file("x.dlg", "p(X) :- e(X), not q(X). q(X) :- e(X), not p(X).");
    let e = d.file("e.dps", "e(a).");
    let out = psplus(&["translate", "-p", &p, "-d", &e]);
    assert_eq!(status(&out), 10);
    assert_eq!(stdout(&out), "p(a)\nq(a)\n");

    let ps = d.path("x.ps");
    assert_eq!(status(&psplus(&["translate", "-p", &p, "-o", &ps])), 0);
    let out = psplus(&["solve", "-d", &e, "-p", &ps, "--models", "0"]);
    assert_eq!(stdout(&out), "models: 2\n");
}

#[test]
fn bench_emits_csv() {
    let out = psplus(&["bench", "--problem", "nqueens", "-n", "5", "--variant", "plain"]);
    assert_eq!(status(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "spec,variant,atoms,rules,core_size,models,decisions,time");
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[..2], ["nqueens n=5", "plain"]);
    assert_eq!(fields[5], "10");
    assert!(Path::new(ENCODINGS).is_dir());
}

#[test]
fn bench_rejects_unknown_problem() {
    let out = psplus(&["bench", "--problem", "sudoku", "-n", "5"]);
    assert_eq!(status(&out), 2);
}
