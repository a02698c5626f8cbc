use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const COVER: &str = "free vset XV; free eset XE; forall edge e. forall vertex u. forall vertex v. \
    ((((u != v) & adj(u, e)) & adj(v, e)) -> (((u in XV) | (v in XV)) | (e in XE)))";

/// Same variables as `COVER` but ignores `XE`, so it has fewer models.
const VERTEX_COVER: &str = "free vset XV; free eset XE; forall edge e. forall vertex u. forall vertex v. \
    ((((u != v) & adj(u, e)) & adj(v, e)) -> ((u in XV) | (v in XV)))";

struct Work {
    dir: TempDir,
}

impl Work {
    fn new() -> Work {
        let w = Work { dir: TempDir::new().unwrap() };
        w.write("k3.gr", "p gr 3 3\n1 2\n2 3\n1 3\n");
        w.write("p3.gr", "c path\np gr 3 2\n1 2\n2 3\n");
        // Bag 1 has three neighbours, so no rooting makes this a path.
        w.write("star.gr", "p gr 5 4\n1 2\n1 3\n1 4\n1 5\n");
        w.write("star.td", "s td 4 2 5\nb 1 1 2\nb 2 1 3\nb 3 1 4\nb 4 1 5\n1 2\n1 3\n1 4\n");
        w.write("cover.mso", COVER);
        w.write("vcover.mso", VERTEX_COVER);
        w
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) {
        fs::write(self.path(name), text).unwrap();
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_mso2dd")).current_dir(self.dir.path()).args(args).output().unwrap()
    }

    fn compile(&self, graph: &str, formula: &str, target: &str, out: &str) {
        let o = self.run(&["compile", "--graph", graph, "--formula", formula, "--target", target, "--out", out]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(Path::new(&self.path(out)).exists());
    }
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn compile_verify_and_query_both_targets() {
    let w = Work::new();
    for target in ["sdd", "obdd"] {
        let out = format!("k3.{target}.json");
        w.compile("k3.gr", "cover.mso", target, &out);
        let o = w.run(&["verify", "--graph", "k3.gr", "--formula", "cover.mso", "--diagram", &out]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).starts_with("OK"));

        let o = w.run(&["query", "--diagram", &out, "--query", "sat"]);
        assert_eq!(stdout(&o).trim(), "SAT");
        // Edges missed by XV are forced into XE, the rest are free:
        // 1 + 3 * 4 + 3 * 8 + 8.
        let o = w.run(&["query", "--diagram", &out, "--query", "count"]);
        assert_eq!(stdout(&o).trim(), "45");
        let o = w.run(&["query", "--diagram", &out, "--query", "min-card", "--targets", "XV", "--zero", "XE"]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).starts_with("min-card 2"));
    }
}

#[test]
fn min_card_on_path_picks_the_middle_vertex() {
    let w = Work::new();
    w.compile("p3.gr", "cover.mso", "obdd", "p3.json");
    let o = w.run(&["query", "--diagram", "p3.json", "--query", "min-card", "--targets", "XV", "--zero", "XE"]);
    let text = stdout(&o);
    assert!(text.starts_with("min-card 1"), "{text}");
    assert!(text.contains("member XV 2"), "{text}");
}

#[test]
fn obdd_target_rejects_a_branching_decomposition() {
    let w = Work::new();
    let o = w.run(&["compile", "--graph", "star.gr", "--td", "star.td", "--formula", "cover.mso", "--target", "obdd"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("path decomposition required"), "{}", stderr(&o));
    let o = w.run(&["compile", "--graph", "star.gr", "--td", "star.td", "--formula", "cover.mso", "--target", "sdd"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn verify_reports_a_wrong_diagram() {
    let w = Work::new();
    w.compile("k3.gr", "vcover.mso", "sdd", "wrong.json");
    let o = w.run(&["verify", "--graph", "k3.gr", "--formula", "cover.mso", "--diagram", "wrong.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("MISMATCH"));

    w.write("broken.json", "{\"kind\": \"obdd\"");
    let o = w.run(&["verify", "--graph", "k3.gr", "--formula", "cover.mso", "--diagram", "broken.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_refuses_instances_over_the_cap() {
    let w = Work::new();
    let o = w.run(&["verify", "--graph", "k3.gr", "--formula", "cover.mso", "--cap", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cap"), "{}", stderr(&o));
}

#[test]
fn bench_and_exports() {
    let w = Work::new();
    let o = w.run(&["bench-kt", "--k", "2", "--r-max", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("293"), "{}", stdout(&o));

    let o = w.run(&["export-cnf", "--graph", "k3.gr"]);
    assert!(stdout(&o).contains("p cnf 6 3"), "{}", stdout(&o));

    w.compile("k3.gr", "cover.mso", "obdd", "k3.json");
    let o = w.run(&["export-dot", "--diagram", "k3.json"]);
    assert!(stdout(&o).starts_with("digraph"), "{}", stdout(&o));
    let o = w.run(&["export-dot", "--graph", "star.gr", "--td", "star.td"]);
    assert!(stdout(&o).contains("join"), "{}", stdout(&o));
}
