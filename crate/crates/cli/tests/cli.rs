use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn hosc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hosc"))
        .args(args)
        .current_dir(dir)
        .env_remove("HOSC_WORKERS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn reference_spec(dir: &Path) {
    fs::write(dir.join("ref.dts"), "0 6 7\n0 2 5\n").unwrap();
    let out = hosc(&["construct", "--L", "2", "--M", "2", "--block-side", "8", "--dts", "ref.dts", "--out", "spec.json"], dir);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn construct_writes_a_loadable_spec() {
    let dir = TempDir::new().unwrap();
    reference_spec(dir.path());
    let json = fs::read_to_string(dir.path().join("spec.json")).unwrap();
    let spec = hosc::construction::HoscSpec::from_json(&json).unwrap();
    assert_eq!(spec.combined_ruler(), vec![0, 1, 5, 11, 12, 14]);
    assert!(stderr(&hosc(&["construct", "--spec", "spec.json"], dir.path())).contains("combined ruler"));
}

#[test]
fn exit_codes_separate_bad_config_from_failed_verification() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    // repeated difference: the code would have two constraints sharing positions
    fs::write(d.join("bad.dts"), "0 1 2\n").unwrap();
    assert_eq!(code(&hosc(&["construct", "--L", "1", "--M", "2", "--block-side", "8", "--dts", "bad.dts"], d)), 2);
    fs::write(d.join("bad.net"), "m 5\n1 0 0 1\n0 1 1 0\n0 1 1 0\n").unwrap();
    assert_eq!(code(&hosc(&["net-verify", "--net", "bad.net"], d)), 2);
    fs::write(d.join("ok.dts"), "0 1 3\n").unwrap();
    assert_eq!(code(&hosc(&["construct", "--L", "1", "--M", "2", "--block-side", "5", "--dts", "ok.dts", "--net", "bad.net"], d)), 2);

    // configuration problems
    assert_eq!(code(&hosc(&["construct", "--L", "1", "--M", "9", "--block-side", "8"], d)), 1);
    assert_eq!(code(&hosc(&["construct", "--L", "1", "--M", "2"], d)), 1);
    assert_eq!(code(&hosc(&["simulate", "--preset", "nope", "--p", "0.01"], d)), 1);
    assert_eq!(code(&hosc(&["no-such-command"], d)), 1);
    assert_eq!(code(&hosc(&["encode", "--spec", "missing.json"], d)), 1);
}

#[test]
fn net_verify_and_dts_tools() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let out = hosc(&["net-verify", "--M", "4", "--block-side", "5", "--family", "involution", "--out", "inv.net"], d);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(code(&hosc(&["net-verify", "--net", "inv.net"], d)), 0);

    let out = hosc(&["dts-search", "--L", "2", "--M", "2", "--objective", "slen", "--cap", "7"], d);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# slen: 11"), "{text}");

    fs::write(d.join("g.dts"), "0 1 4 6\n").unwrap();
    let out = hosc(&["dts-combine", "--x", "g.dts", "--y", "g.dts", "--out", "z.dts"], d);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let z = hosc::dts::DifferenceTriangleSet::parse(&fs::read_to_string(d.join("z.dts")).unwrap()).unwrap();
    assert_eq!((z.num_rulers(), z.sum_of_lengths()), (14, 1020));
}

#[test]
fn encode_channel_decode_round_trip() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    reference_spec(d);
    let msg: Vec<u8> = (0..3000u32).map(|i| (i * 37 % 251) as u8).collect();
    fs::write(d.join("msg.bin"), &msg).unwrap();
    assert_eq!(code(&hosc(&["encode", "--spec", "spec.json", "--input", "msg.bin", "--out", "tx.bin"], d)), 0);

    for (p, seed) in [("0", "1"), ("0.002", "5")] {
        let out = hosc(&["channel", "--spec", "spec.json", "--p", p, "--seed", seed, "--input", "tx.bin", "--out", "rx.bin"], d);
        assert_eq!(code(&out), 0);
        let flips: u64 = stderr(&out).split_whitespace().next().unwrap().parse().unwrap();
        assert_eq!(flips == 0, p == "0");
        let out = hosc(&["decode", "--spec", "spec.json", "--input", "rx.bin", "--out", "msg.out"], d);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let got = fs::read(d.join("msg.out")).unwrap();
        assert_eq!(&got[..msg.len()], &msg[..], "p = {p}");
        assert!(got[msg.len()..].iter().all(|&b| b == 0));
    }
    fs::write(d.join("short.bin"), [0u8; 3]).unwrap();
    assert_eq!(code(&hosc(&["decode", "--spec", "spec.json", "--input", "short.bin"], d)), 1);
}

#[test]
fn simulate_csv_is_independent_of_worker_count() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let args = |out: &'static str, workers: &'static str| {
        vec![
            "simulate", "--L", "2", "--M", "2", "--block-side", "8", "--W", "12", "--I", "3", "--p", "0.02", "--p",
            "0.01", "--seed", "3", "--min-errors", "30", "--max-bits", "400000", "--target-ber", "1e-4", "--chunk",
            "50", "--workers", workers, "--out", out,
        ]
    };
    for (out, w) in [("a.csv", "1"), ("b.csv", "2"), ("c.csv", "3")] {
        let res = hosc(&args(out, w), d);
        assert_eq!(code(&res), 0, "{}", stderr(&res));
    }
    let res = Command::new(env!("CARGO_BIN_EXE_hosc"))
        .args(&args("e.csv", "1")[..args("e.csv", "1").len() - 4])
        .args(["--out", "e.csv"])
        .env("HOSC_WORKERS", "2")
        .current_dir(d)
        .output()
        .unwrap();
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let a = fs::read(d.join("a.csv")).unwrap();
    for other in ["b.csv", "c.csv", "e.csv"] {
        assert_eq!(a, fs::read(d.join(other)).unwrap(), "{other}");
    }
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# {\"spec_hash\""));
    assert_eq!(text.lines().count(), 4);

    let out = hosc(&["plotdata", "a.csv", "b.csv"], d);
    assert_eq!(code(&out), 0);
    let plot = String::from_utf8(out.stdout).unwrap();
    assert_eq!(plot.matches("# (2,2,8,1,12,3,").count(), 2);
}
