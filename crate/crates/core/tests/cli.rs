use std::io::Write;
use std::process::{Command, Output, Stdio};

fn muforge(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_muforge"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn muforge");
    let mut input = child.stdin.take().expect("stdin");
    input.write_all(stdin.unwrap_or("").as_bytes()).expect("write stdin");
    drop(input);
    child.wait_with_output().expect("run muforge")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn beta() -> String {
    stdout(&muforge(&["gen", "beta"], None))
}

#[test]
fn depth_of_beta_matches_golden() {
    let o = muforge(&["--json", "depth", "-"], Some(&beta()));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), include_str!("golden/beta_depth.json"));
}

#[test]
fn witness_of_beta_matches_golden() {
    let o = muforge(&["--json", "witness", "-"], Some(&beta()));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), include_str!("golden/beta_witness.jsonl"));
}

#[test]
fn equivalence_verdicts_set_the_exit_code() {
    let alpha = stdout(&muforge(&["gen", "alpha"], None));
    let o = muforge(&["--json", "equiv", alpha.trim(), beta().trim()], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"verdict\":\"equivalent\""));
    let o = muforge(&["equiv", "p | ~p", "tt"], None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sat_and_model_checking() {
    assert_eq!(muforge(&["sat", "p & ~p"], None).status.code(), Some(1));
    assert_eq!(muforge(&["sat", "-"], Some(&beta())).status.code(), Some(0));
    let dir = std::env::temp_dir().join(format!("muforge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let ks = dir.join("two.ks");
    std::fs::write(&ks, "state s0 p\nstate s1\ninit s0\nedge s0 s1\nedge s1 s0\n").unwrap();
    let ks = ks.to_str().unwrap();
    let o = muforge(&["--json", "mc", ks, "nu X. p & ->{X}"], None);
    assert_eq!((o.status.code(), stdout(&o).trim()), (Some(1), "{\"holds\":false}"));
    assert_eq!(muforge(&["mc", ks, "nu X. p & ->{->{X}}"], None).status.code(), Some(0));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn errors_map_to_exit_codes() {
    let o = muforge(&["--json", "parse", "mu X. (p"], None);
    assert_eq!(o.status.code(), Some(3));
    let o = muforge(&["gen", "alpha-n", "--n", "5"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--allow-large"));
}

#[test]
fn parse_prints_a_fixed_point() {
    let once = stdout(&muforge(&["parse", "-"], Some(&beta())));
    let twice = stdout(&muforge(&["parse", "-"], Some(&once)));
    assert_eq!(once, twice);
}
