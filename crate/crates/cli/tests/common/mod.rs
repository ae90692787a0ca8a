//! Fixture files and a runner for the `fm` binary.
#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;
use std::process::Command;

use tempfile::TempDir;

pub struct Run {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

impl Run {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.stdout).expect("stdout is JSON")
    }
}

pub fn fm(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_fm"))
        .args(args)
        .env_remove("FM_BUDGET")
        .output()
        .expect("fm runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: out.stdout,
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub struct Fixtures {
    dir: TempDir,
}

const FILES: &[(&str, &str)] = &[
    ("c3.txt", "0 1\n1 2\n0 2\n"),
    ("c4.json", r#"{"vertices":[0,1,2,3],"edges":[[0,1],[1,2],[2,3],[0,3]]}"#),
    ("k4.txt", "0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n"),
    ("path.txt", "0 1\n1 2\n2 3\n"),
    ("bowtie.txt", "0 1\n1 2\n0 2\n2 3\n3 4\n2 4\n"),
    // ∅ = 0, {∅} = 1, {{∅}} = 2.
    ("v.json", r#"{"size":3,"pairs":[[0,1],[1,2]]}"#),
    ("matrix.txt", "0 1 0\n0 0 1\n0 0 0\n"),
    ("square-split.json", "[[[0,1],[2,3]],[[1,2],[0,3]]]"),
    ("square-whole.json", "[[[0,1],[1,2],[2,3],[0,3]]]"),
    ("stages.json", r#"[{"vertices":[],"edges":[]},{"vertices":[0,1],"edges":[[0,1]]},{"vertices":[0,1,2,3],"edges":[[0,1],[1,2],[2,3],[0,3]]}]"#),
    ("family.json", "[[1,2],[1,3],[1,4],[2,3]]"),
    ("petals.json", "[[1,2],[1,3],[1,4]]"),
    ("model.json", r#"{"elements":[1,2],"sets":[[1,2]]}"#),
    ("mapping.json", r#"{"1":[2],"2":[3],"3":[1],"4":[]}"#),
    ("corpus.json", r#"{"generator":{"model":"gnp","n":5,"p":0.5,"count":3},"seed":7}"#),
    ("cycles.json", r#"{"generator":{"model":"union-of-cycles","n":5,"d":2,"count":3},"seed":1}"#),
    ("pack.json", r#"{"name":"empty","formulas":["Ex Ay ~(y in x)"]}"#),
    ("garbage.json", "{not json"),
];

impl Fixtures {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().expect("temp dir");
        for (name, body) in FILES {
            fs::write(dir.path().join(name), body).expect("fixture written");
        }
        Fixtures { dir }
    }

    pub fn path(&self, name: &str) -> String {
        let p: PathBuf = self.dir.path().join(name);
        p.to_str().expect("utf-8 path").to_string()
    }

    /// One invocation per documented subcommand, with the exit code each
    /// must produce.
    pub fn invocations(&self) -> Vec<(Vec<String>, i32)> {
        let p = |n: &str| self.path(n);
        let cases: Vec<(Vec<String>, i32)> = vec![
            (vec!["parse".into(), "--formula".into(), "(Ex (x in y) -> (y = y))".into()], 0),
            (args(&["eval", "--structure", &p("v.json"), "--formula", "Ey (y in x)", "--valuation", "x=2", "--validate"]), 0),
            (args(&["eval", "--structure", &p("matrix.txt"), "--formula", "Ey (y in x)", "--valuation", "x=1", "--subset", "1,2"]), 0),
            (args(&["relativize", "--formula", "Ey (y in x)", "--structure", &p("v.json"), "--subset", "0,1", "--validate"]), 0),
            (args(&["universe", "--rank", "3", "--validate"]), 0),
            (args(&["universe", "--graph", &p("c3.txt")]), 0),
            (args(&["hull", "--structure", &p("v.json"), "--pack", "empty-set", "--seed-elems", "2", "--validate"]), 0),
            (args(&["hull", "--graph", &p("path.txt"), "--pack", &p("pack.json")]), 0),
            (args(&["chain", "--graph", &p("c3.txt"), "--pack", "members", "--validate"]), 0),
            (args(&["slice", "--graph", &p("c4.json")]), 0),
            (args(&["slice", "--graph", &p("c4.json"), "--stages", &p("stages.json")]), 0),
            (args(&["probe", "--graph", &p("c3.txt"), "--pack", "path"]), 1),
            (args(&["probe", "--graph", &p("c3.txt"), "--pack", "common-neighbour", "--validate"]), 0),
            (args(&["probe", "--corpus", &p("cycles.json"), "--pack", "common-neighbour", "--workers", "2", "--validate"]), 1),
            (args(&["graph", "bonds", "--graph", &p("k4.txt"), "--validate"]), 0),
            (args(&["graph", "gamma", "--graph", &p("k4.txt"), "--x", "0", "--y", "3", "--validate"]), 0),
            (args(&["graph", "nw", "--graph", &p("bowtie.txt"), "--validate"]), 0),
            (args(&["graph", "nw", "--graph", &p("path.txt")]), 1),
            (args(&["graph", "veblen", "--graph", &p("bowtie.txt"), "--validate"]), 0),
            (args(&["graph", "bridges", "--graph", &p("path.txt"), "--validate"]), 0),
            (args(&["graph", "dcc", "--graph", &p("k4.txt"), "--validate"]), 0),
            (args(&["graph", "dcc", "--graph", &p("k4.txt"), "--budget", "1"]), 3),
            (args(&["bondfaithful", "check", "--graph", &p("c4.json"), "--parts", &p("square-whole.json"), "--kappa", "4"]), 0),
            (args(&["bondfaithful", "check", "--graph", &p("c4.json"), "--parts", &p("square-split.json"), "--kappa", "2"]), 1),
            (args(&["bondfaithful", "search", "--graph", &p("bowtie.txt"), "--kappa", "3", "--validate"]), 0),
            (args(&["bondfaithful", "search", "--graph", &p("c4.json"), "--kappa", "2"]), 1),
            (args(&["bondfaithful", "search", "--corpus", &p("corpus.json"), "--kappa", "1", "--workers", "3"]), 0),
            (args(&["sunflower", "check", "--family", &p("petals.json")]), 0),
            (args(&["sunflower", "find", "--family", &p("family.json"), "--petals", "3", "--validate"]), 0),
            (args(&["sunflower", "find", "--family", &p("family.json"), "--petals", "4"]), 1),
            (args(&["sunflower", "max", "--family", &p("family.json")]), 0),
            (args(&["sunflower", "trace", "--family", &p("family.json"), "--model", &p("model.json"), "--validate"]), 0),
            (args(&["freeset", "--mapping", &p("mapping.json"), "--validate"]), 0),
            (args(&["corpus", "gen", "--spec", &p("corpus.json"), "--validate"]), 0),
            (args(&["parse", "--formula", "Ex (x in"]), 2),
            (args(&["graph", "nw", "--graph", &p("garbage.json")]), 2),
            (args(&["eval", "--structure", &p("v.json"), "--formula", "x in y", "--valuation", "x=9"]), 2),
            (args(&["universe", "--rank", "5"]), 2),
            (args(&["graph", "dcc", "--graph", &p("k4.txt"), "--format", "dot"]), 2),
        ];
        cases
    }
}

pub fn args(a: &[&str]) -> Vec<String> {
    a.iter().map(|s| s.to_string()).collect()
}

/// Runs every invocation twice and reports the first problem found.
pub fn check_invocations(fx: &Fixtures) -> Result<usize, String> {
    let cases = fx.invocations();
    for (argv, expected) in &cases {
        let refs: Vec<&str> = argv.iter().map(String::as_str).collect();
        let first = fm(&refs);
        let second = fm(&refs);
        if first.code != *expected {
            return Err(format!("`fm {}` exited {} (expected {expected}): {}", argv.join(" "), first.code, first.stderr));
        }
        if first.stdout != second.stdout || first.code != second.code {
            return Err(format!("`fm {}` is not deterministic", argv.join(" ")));
        }
    }
    Ok(cases.len())
}
