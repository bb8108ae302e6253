use std::fs;
use std::path::{Path, PathBuf};

use hardattn_cli::{dispatch, SUBCOMMANDS};
use tempfile::TempDir;

fn samples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../samples")
}

fn sample(name: &str) -> String {
    samples().join(name).display().to_string()
}

fn run(args: &[&str]) -> (i32, String) {
    dispatch(std::iter::once("hardattn").chain(args.iter().copied()))
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

#[test]
fn run_prints_a_verdict() {
    assert_eq!(run(&["run", "--model", &sample("since.ltl"), "--word", "ba"]), (0, "accept\n".into()));
    assert_eq!(run(&["run", "-m", &sample("since.uhat"), "-w", "ab"]), (0, "reject\n".into()));
    let (code, out) = run(&["run", "-m", &sample("last_a.brasp"), "-w", "ab", "--trace"]);
    assert_eq!(code, 0);
    assert!(out.contains("Y      | 0 1"), "{out}");
    assert!(out.ends_with("accept\n"));
}

#[test]
fn translate_then_compare() {
    let dir = TempDir::new().unwrap();
    let uhat = path(&dir, "f.uhat");
    let (code, out) = run(&["translate", "--from", "ltl", "--to", "uhat", "--in", &sample("ab_star.ltl"), "--out", &uhat]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("target: uhat"));
    let (code, out) = run(&["equiv", "--a", &sample("ab_star.ltl"), "--b", &uhat, "--max-len", "5"]);
    assert_eq!((code, out.as_str()), (0, "equivalent up to length 5\n"));
    // and back again
    let ltl = path(&dir, "back.ltl");
    assert_eq!(run(&["translate", "--to", "ltl", "--in", &uhat, "--out", &ltl]).0, 0);
    assert_eq!(run(&["equiv", "--a", &ltl, "--b", &sample("ab_star.ltl"), "--max-len", "5"]).0, 0);
}

#[test]
fn brasp_translations() {
    let dir = TempDir::new().unwrap();
    let uhat = path(&dir, "p.uhat");
    let ltl = path(&dir, "p.ltl");
    assert_eq!(run(&["translate", "--to", "uhat", "--in", &sample("last_a.brasp"), "--out", &uhat]).0, 0);
    assert_eq!(run(&["translate", "--to", "ltl", "--in", &sample("last_a.brasp"), "--out", &ltl]).0, 0);
    for other in [&uhat, &ltl] {
        let (code, out) = run(&["equiv", "--a", &sample("last_a.brasp"), "--b", other, "--max-len", "6"]);
        assert_eq!(code, 0, "{out}");
    }
    let (code, out) = run(&["translate", "--from", "ltl", "--to", "brasp", "--in", &sample("since.ltl"), "--out", &ltl]);
    assert_eq!(code, 2);
    assert!(out.contains("no translation"));
}

#[test]
fn compiled_tiling_witness_is_the_search_result() {
    let dir = TempDir::new().unwrap();
    let tiles = path(&dir, "one.tiles");
    fs::write(&tiles, "n 1\ntile l 0 0 1 0\ntile r 1 0 0 0\nfinal r\n").unwrap();
    let brasp = path(&dir, "one.brasp");
    assert_eq!(run(&["compile-tiling", "--in", &tiles, "--out", &brasp]).0, 0);
    let (code, out) = run(&["empty", "--model", &brasp, "--max-len", "6"]);
    assert_eq!(code, 0);
    let (_, found) = run(&["search-tiling", "--in", &tiles]);
    let encoding = found.lines().find_map(|l| l.strip_prefix("encoding: ")).unwrap();
    assert!(out.contains(&format!("word: {encoding}\n")), "{out}");
    assert_eq!(encoding, "0l#1r#");
}

#[test]
fn exit_codes_follow_outcomes() {
    let dir = TempDir::new().unwrap();
    let never = path(&dir, "never.ltl");
    fs::write(&never, "alphabet: a b\noutput: last\nfalse\n").unwrap();
    let (code, out) = run(&["empty", "-m", &never, "--max-len", "3"]);
    assert_eq!(code, 1);
    assert_eq!(out, "outcome: exhausted\nmax_len: 3\nexamined: 14\n");
    assert_eq!(run(&["min-witness", "-m", &never, "--max-len", "3"]), (1, "none\n".into()));
    let (code, out) = run(&["equiv", "--a", &never, "--b", &sample("since.ltl"), "--max-len", "3"]);
    assert_eq!(code, 1);
    assert_eq!(out, "counterexample: ba\na: reject\nb: accept\n");
    assert_eq!(run(&["search-tiling", "--in", &sample("two_rows.tiles"), "--max-rows", "1"]).0, 1);
}

#[test]
fn usage_and_file_errors_exit_with_two() {
    let (code, out) = run(&["run", "--nope"]);
    assert_eq!(code, 2);
    assert!(out.contains("Usage"));
    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.brasp");
    fs::write(&bad, "alphabet: a b\noutput: Y last\ndef Y(i) = Q[a](i) &\n").unwrap();
    let (code, out) = run(&["run", "-m", &bad, "-w", "a"]);
    assert_eq!(code, 2);
    assert!(out.contains("bad.brasp") && out.contains("line 3"), "{out}");
    let (code, out) = run(&["run", "-m", &path(&dir, "model.txt"), "-w", "a"]);
    assert_eq!(code, 2);
    assert!(out.contains("--kind"));
    let (code, out) = run(&["run", "-m", &sample("since.ltl"), "-w", "abc"]);
    assert_eq!(code, 2);
    assert!(out.contains("\"abc\""));
}

#[test]
fn kind_flag_overrides_extension() {
    let dir = TempDir::new().unwrap();
    let renamed = path(&dir, "model.txt");
    fs::copy(samples().join("since.ltl"), &renamed).unwrap();
    assert_eq!(run(&["run", "-m", &renamed, "--kind", "ltl", "-w", "ba"]), (0, "accept\n".into()));
}

#[test]
fn records_are_json_lines() {
    let (code, out) = run(&["--format", "records", "empty", "-m", &sample("since.ltl"), "--max-len", "3"]);
    assert_eq!(code, 0);
    let value: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(value["outcome"], "witness");
    assert_eq!(value["word"], "ba");
    let (_, out) = run(&["mutate", "-m", &sample("since.ltl"), "-w", "abab", "--trials", "5", "--format", "records"]);
    assert_eq!(out.lines().count(), 6);
    for line in out.lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }
}

#[test]
fn output_is_reproducible() {
    let args = ["mutate", "-m", &sample("last_a.brasp"), "-w", "aabab", "--trials", "40", "--seed", "9"];
    assert_eq!(run(&args), run(&args));
    let other = ["mutate", "-m", &sample("last_a.brasp"), "-w", "aabab", "--trials", "40", "--seed", "10"];
    assert_ne!(run(&args).1, run(&other).1);
    let empty = ["empty", "-m", &sample("ab_star.ltl"), "--max-len", "4", "--workers", "3"];
    assert_eq!(run(&empty), run(&["empty", "-m", &sample("ab_star.ltl"), "--max-len", "4"]));
}

#[test]
fn chain_words_are_listed() {
    let dir = TempDir::new().unwrap();
    let out_file = path(&dir, "h.brasp");
    let (code, out) = run(&["hchain", "--n", "2", "--words", "2", "--out", &out_file]);
    assert_eq!(code, 0);
    assert_eq!(out, "00a#01b#10a#11b#\n00a#01b#10c#11b#\n");
    let (code, out) = run(&["run", "-m", &out_file, "-w", "00a#01b#10a#11b#"]);
    assert_eq!((code, out.as_str()), (0, "accept\n"));
    assert_eq!(run(&["run", "-m", &out_file, "-w", "00a#01a#10a#11b#"]).1, "reject\n");
}

#[test]
fn every_subcommand_is_reachable() {
    let dir = TempDir::new().unwrap();
    let t = |name: &str| path(&dir, name);
    let invocations: Vec<Vec<String>> = vec![
        vec!["run".into(), "-m".into(), sample("since.ltl"), "-w".into(), "ab".into()],
        vec!["translate".into(), "--to".into(), "uhat".into(), "--in".into(), sample("since.ltl"), "--out".into(), t("x.uhat")],
        vec!["compile-tiling".into(), "--in".into(), sample("two_rows.tiles"), "--out".into(), t("x.brasp")],
        vec!["hchain".into()],
        vec!["empty".into(), "-m".into(), sample("since.ltl"), "--max-len".into(), "3".into()],
        vec!["min-witness".into(), "-m".into(), sample("since.ltl"), "--max-len".into(), "3".into()],
        vec!["equiv".into(), "--a".into(), sample("since.ltl"), "--b".into(), sample("since.uhat"), "--max-len".into(), "4".into()],
        vec!["mutate".into(), "-m".into(), sample("since.ltl"), "-w".into(), "ab".into()],
        vec!["verify-tiling".into(), "--in".into(), sample("two_rows.tiles"), "--grid".into(), sample("two_rows.grid")],
        vec!["search-tiling".into(), "--in".into(), sample("two_rows.tiles")],
        vec!["reachable".into(), "-m".into(), sample("since.uhat")],
    ];
    assert_eq!(invocations.len(), SUBCOMMANDS.len());
    for (args, name) in invocations.iter().zip(SUBCOMMANDS) {
        assert_eq!(&args[0], name);
        let (code, out) = dispatch(std::iter::once("hardattn".to_string()).chain(args.iter().cloned()));
        assert_eq!(code, 0, "{name}: {out}");
        assert!(!out.is_empty());
    }
    let (_, help) = run(&["--help"]);
    for name in SUBCOMMANDS {
        assert!(help.contains(name), "{name} missing from help");
    }
}

#[test]
fn reachable_reports_blowup() {
    let (code, out) = run(&["reachable", "-m", &sample("since.uhat"), "--cap", "2"]);
    assert_eq!(code, 2);
    assert!(out.contains("layer"), "{out}");
}

#[test]
fn grid_verification() {
    assert_eq!(run(&["verify-tiling", "--in", &sample("two_rows.tiles"), "--grid", &sample("two_rows.grid")]), (0, "valid\n".into()));
    let dir = TempDir::new().unwrap();
    let flipped = path(&dir, "g.grid");
    fs::write(&flipped, "hi hi\nlo lo\n").unwrap();
    assert_eq!(run(&["verify-tiling", "--in", &sample("two_rows.tiles"), "--grid", &flipped]), (0, "invalid\n".into()));
    fs::write(&flipped, "hi\n").unwrap();
    assert_eq!(run(&["verify-tiling", "--in", &sample("two_rows.tiles"), "--grid", &flipped]).0, 2);
}
