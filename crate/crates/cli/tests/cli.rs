use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn stww(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stww"))
        .args(args)
        .env_remove("STWW_SAT_SOLVER")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bwmc_single_clause() {
    let dir = TempDir::new().unwrap();
    let cnf = write(&dir, "f.cnf", "p cnf 2 1\n1 2 0\n");
    let tws = write(&dir, "f.tws", "p tws 3 1\n1 2\n");
    let o = stww(&["bwmc", s(&cnf), s(&tws), "-k", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("2"));
    let o = stww(&["--json", "bwmc", s(&cnf), s(&tws), "-k", "2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["value"], "3");
    assert_eq!(v["decimal"], "3.000000");
}

#[test]
fn weighted_counts_print_fractions() {
    let dir = TempDir::new().unwrap();
    let cnf = write(&dir, "w.cnf", "p cnf 2 1\nc p weight 1 1/2 0\nc p weight -1 1/3 0\n1 2 0\n");
    let tws = write(&dir, "w.tws", "p tws 3 1\n1 2\n");
    let o = stww(&["bwmc", s(&cnf), s(&tws), "-k", "2"]);
    let oracle = stww(&["oracle", "bwmc", s(&cnf), "-k", "2"]);
    assert_eq!(stdout(&o), stdout(&oracle));
    // x1=1 (1/2, both values of x2) + x1=0,x2=1 (1/3)
    assert_eq!(stdout(&o).lines().next(), Some("4/3"));
}

#[test]
fn verify_reports_offending_step() {
    let dir = TempDir::new().unwrap();
    // x1 in a positive clause, x2 in a negative one: merging them makes red edges
    let cnf = write(&dir, "f.cnf", "p cnf 2 2\n1 0\n-2 0\n");
    let tws = write(&dir, "f.tws", "c width 0\np tws 4 2\n1 2\n3 4\n");
    let o = stww(&["verify", s(&cnf), s(&tws), "--bipartite"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("step 1"));
    let ok = write(&dir, "ok.tws", "p tws 4 2\n1 2\n3 4\n");
    let o = stww(&["verify", s(&cnf), s(&ok), "--bipartite"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "width 2");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let cnf = write(&dir, "f.cnf", "p cnf 2 1\n1 2 0\n");
    let broken = write(&dir, "b.cnf", "p cnf 1 1\n5 0\n");
    assert_eq!(stww(&["nonsense"]).status.code(), Some(64));
    assert_eq!(stww(&["greedy", s(&broken)]).status.code(), Some(65));
    assert_eq!(stww(&["exact", s(&cnf)]).status.code(), Some(71));
    // width 0 needs no solver call, width 1 does
    let mixed = write(&dir, "m.cnf", "p cnf 2 1\n1 -2 0\n");
    let o = stww(&["exact", s(&mixed), "--solver", "/nonexistent/solver"]);
    assert_eq!(o.status.code(), Some(71));
}

#[test]
fn exact_timeout_reports_bound() {
    let dir = TempDir::new().unwrap();
    let slow = write(&dir, "slow.sh", "#!/bin/sh\nsleep 20\n");
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        fs::set_permissions(&slow, fs::Permissions::from_mode(0o755)).unwrap();
    }
    // x1 positive, x2 negative in one clause: width 1
    let cnf = write(&dir, "f.cnf", "p cnf 2 1\n1 -2 0\n");
    let o = stww(&["exact", s(&cnf), "--solver", s(&slow), "--timeout", "0.2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8_lossy(&o.stderr).trim(), "*1");
    let o = stww(&["--json", "exact", s(&cnf), "--solver", s(&slow), "--timeout", "0.2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["exact"], false);
}

#[test]
fn exact_by_brute_force() {
    let dir = TempDir::new().unwrap();
    let cnf = write(&dir, "f.cnf", "p cnf 2 1\n1 -2 0\n");
    let out = dir.path().join("f.tws");
    let o = stww(&["exact", s(&cnf), "--bruteforce", "-o", s(&out)]);
    assert_eq!(stdout(&o).trim(), "1");
    let v = stww(&["verify", s(&cnf), s(&out), "--bipartite"]);
    assert_eq!(stdout(&v).trim(), "width 1");
}

#[test]
fn greedy_matches_library_and_threads_do_not_matter() {
    let dir = TempDir::new().unwrap();
    let o = stww(&["gen", "ksat", "--vars", "8", "--width", "3", "--clauses", "10", "--seed", "4"]);
    let text = stdout(&o);
    let cnf = write(&dir, "r.cnf", &text);
    let f = stww::cnf::parse_dimacs(&text).unwrap().formula;
    assert_eq!(f, stww::generators::gen_random_ksat(8, 3, 10, 4).unwrap());

    let seq = stww::bounds::greedy_sequence(&stww::incidence_graph(&f), true);
    let mut expected = seq.clone();
    expected.declared_width = Some(stww::verify(&stww::incidence_graph(&f), &seq, true).width);
    let o = stww(&["greedy", s(&cnf), "--bipartite"]);
    assert_eq!(stdout(&o), expected.to_tws());

    let tws = write(&dir, "r.tws", &stdout(&o));
    let one = stww(&["--threads", "1", "bwmc", s(&cnf), s(&tws), "-k", "3"]);
    let four = stww(&["--threads", "4", "bwmc", s(&cnf), s(&tws), "-k", "3"]);
    assert_eq!(stdout(&one), stdout(&four));
    assert_eq!(stdout(&one), stdout(&stww(&["oracle", "bwmc", s(&cnf), "-k", "3"])));
}

#[test]
fn bipartize_round_trip() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", "p graph 4 4\ns 1 var\ns 2 cla\ns 3 var\ns 4 cla\n1 2 +\n2 3 +\n3 4 -\n4 1 +\n");
    let seq = write(&dir, "s.tws", "p tws 4 3\n1 2\n3 4\n1 3\n");
    let out = dir.path().join("b.tws");
    let o = stww(&["bipartize", s(&g), s(&seq), "-o", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("input width"));
    let v = stww(&["verify", s(&g), s(&out), "--bipartite"]);
    assert!(v.status.success());
}

#[test]
fn generators_and_oracles() {
    let dir = TempDir::new().unwrap();
    let o = stww(&["gen", "hitset", "--universe", "3", "--sets", "1,2;2,3", "-k", "1"]);
    let f = write(&dir, "h.cnf", &stdout(&o));
    assert_eq!(stdout(&stww(&["oracle", "bsat", s(&f), "-k", "1"])).trim(), "true");
    let o = stww(&["gen", "hitset", "--universe", "2", "--sets", "1;2", "-k", "1"]);
    let f = write(&dir, "h2.cnf", &stdout(&o));
    assert_eq!(stdout(&stww(&["oracle", "bsat", s(&f), "-k", "1"])).trim(), "false");

    let o = stww(&["gen", "partclique", "--parts", "1,2;3,4", "--edges", "1-3"]);
    let f = write(&dir, "p.cnf", &stdout(&o));
    assert_eq!(stdout(&stww(&["oracle", "bsat", s(&f), "-k", "2"])).trim(), "true");
    assert!(stww(&["gen", "partclique", "--random", "3", "2", "0.5", "--seed", "1"]).status.success());

    let o = stww(&["gen", "grid", "--side", "3"]);
    let g = stww::SignedTrigraph::parse_edge_list(&stdout(&o)).unwrap();
    assert_eq!((g.num_vertices(), g.num_edges()), (9, 12));
    let o = stww(&["gen", "subclique", "-d", "3", "--counts", "1,2,3", "--signs", "random", "--seed", "2"]);
    let g = stww::SignedTrigraph::parse_edge_list(&stdout(&o)).unwrap();
    assert_eq!(g.num_vertices(), 9);
    assert_eq!(stww(&["gen", "grid", "--side", "1"]).status.code(), Some(64));
}
