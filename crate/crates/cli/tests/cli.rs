mod common;

use common::{fm, Fixtures};

#[test]
fn every_subcommand_is_deterministic_with_the_right_exit_code() {
    let fx = Fixtures::new();
    common::check_invocations(&fx).unwrap();
}

#[test]
fn reports_carry_the_schema_and_command() {
    let fx = Fixtures::new();
    let r = fm(&["graph", "nw", "--graph", &fx.path("bowtie.txt")]);
    assert_eq!(r.code, 0);
    let v = r.json();
    assert_eq!(v["schema"], "fm-report/1");
    assert_eq!(v["command"], "graph nw");
    assert_eq!(v["nw"], true);
}

#[test]
fn exit_zero_on_success() {
    let r = fm(&["parse", "--formula", "Ax (x = x)"]);
    assert_eq!(r.code, 0);
    assert!(r.stderr.is_empty());
}

#[test]
fn exit_one_on_a_split_bond() {
    let fx = Fixtures::new();
    let r = fm(&["bondfaithful", "check", "--graph", &fx.path("c4.json"), "--parts", &fx.path("square-split.json"), "--kappa", "2"]);
    assert_eq!(r.code, 1);
    let v = r.json();
    assert_eq!(v["report"]["containment_ok"], false);
    assert_eq!(v["report"]["verdict"], false);
}

#[test]
fn exit_one_on_a_probe_counterexample() {
    let fx = Fixtures::new();
    let r = fm(&["probe", "--graph", &fx.path("c3.txt"), "--pack", "path", "--format", "text"]);
    assert_eq!(r.code, 1);
    assert!(String::from_utf8_lossy(&r.stdout).contains("counterexamples"));
}

#[test]
fn exit_two_on_bad_input() {
    let fx = Fixtures::new();
    let r = fm(&["parse", "--formula", "Ex (x in"]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.is_empty());
    assert!(r.stderr.starts_with("fm parse:"));
    assert_eq!(fm(&["graph", "bonds", "--graph", &fx.path("missing.txt")]).code, 2);
    assert_eq!(fm(&["no-such-command"]).code, 2);
}

#[test]
fn exit_three_when_the_budget_runs_out() {
    let fx = Fixtures::new();
    let r = fm(&["graph", "dcc", "--graph", &fx.path("k4.txt"), "--budget", "1"]);
    assert_eq!(r.code, 3);
    assert_eq!(r.json()["double_cover"]["outcome"], "budget_exhausted");
    let r = fm(&["hull", "--structure", &fx.path("v.json"), "--pack", "pairing", "--seed-elems", "0,1", "--budget", "1"]);
    assert_eq!(r.code, 3);
}

#[test]
fn workers_do_not_change_the_report() {
    let fx = Fixtures::new();
    let corpus = fx.path("corpus.json");
    let one = fm(&["bondfaithful", "search", "--corpus", &corpus, "--kappa", "2"]);
    let four = fm(&["bondfaithful", "search", "--corpus", &corpus, "--kappa", "2", "--workers", "4"]);
    assert_eq!(one.stdout, four.stdout);
    let one = fm(&["probe", "--corpus", &corpus, "--pack", "members"]);
    let four = fm(&["probe", "--corpus", &corpus, "--pack", "members", "--workers", "4"]);
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn text_and_dot_renderings() {
    let fx = Fixtures::new();
    let r = fm(&["graph", "veblen", "--graph", &fx.path("bowtie.txt"), "--format", "dot"]);
    assert_eq!(r.code, 0);
    assert!(String::from_utf8_lossy(&r.stdout).contains("graph G {"));
    let r = fm(&["graph", "dcc", "--graph", &fx.path("k4.txt"), "--format", "text"]);
    assert_eq!(r.code, 0);
    assert_eq!(String::from_utf8_lossy(&r.stdout).lines().count(), 4);
}

#[test]
fn structures_load_from_a_universe_report() {
    let fx = Fixtures::new();
    let dump = fm(&["universe", "--rank", "3"]);
    let path = fx.path("v3.json");
    std::fs::write(&path, &dump.stdout).unwrap();
    let r = fm(&["hull", "--structure", &path, "--pack", "pairing", "--seed-elems", "0,1", "--validate"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json()["validation"]["ok"], true);
}
