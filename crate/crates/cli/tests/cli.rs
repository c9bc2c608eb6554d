use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use frameforge_cli::report::{GroupReport, LiftReport, SelectReport, SparsifyReport, SynthReport};
use frameforge_core::expframe_line::dft_submatrix;
use frameforge_core::random::random_parseval_frame;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn frameforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frameforge"))
        .args(args)
        .env_remove("FRAMEFORGE_THREADS")
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_matrix(dir: &Path, name: &str, m: &frameforge_core::ComplexMatrix) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(&m.to_file()).unwrap()).unwrap();
    p
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(frameforge(&["--help"]).status.code(), Some(0));
    let v = frameforge(&["--version"]);
    assert_eq!(v.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&v.stdout).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(frameforge(&[]).status.code(), Some(64));
    assert_eq!(frameforge(&["synth", "--bogus"]).status.code(), Some(64));
    assert_eq!(frameforge(&["density", "--points", "x.json"]).status.code(), Some(64));
}

#[test]
fn malformed_spectrum_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = frameforge(&["synth", "--spectrum", path_str(&fixture("bad_spectrum.json")), "--epsilon", "1", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("cells") && err.contains("bad_spectrum.json"), "{err}");
    assert!(!out.exists());

    let missing = frameforge(&["synth", "--spectrum", "/nonexistent/s.json", "--epsilon", "1", "--out", path_str(&out)]);
    assert_eq!(missing.status.code(), Some(2));
    let bad_eps = frameforge(&["synth", "--spectrum", path_str(&fixture("grid16.json")), "--epsilon", "0", "--out", path_str(&out)]);
    assert_eq!(bad_eps.status.code(), Some(2));
}

#[test]
fn sweep_matches_the_golden_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let mut args = vec!["synth"];
    let specs = ["grid16.json", "grid32.json", "two_intervals.json", "wide.json"].map(fixture);
    for s in &specs {
        args.extend(["--spectrum", path_str(s)]);
    }
    args.extend(["--sweep-epsilon", "0.5,1,2", "--csv", path_str(&csv)]);
    let o = frameforge(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let got = std::fs::read_to_string(&csv).unwrap();
    let want = std::fs::read_to_string(fixture("sweep_golden.csv")).unwrap();
    assert_eq!(got, want);
}

#[test]
fn reports_are_reproducible_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, extra: &[&str]| -> String {
        let out = dir.path().join(name);
        let spec = fixture("grid32.json");
        let mut args = vec!["synth", "--spectrum", path_str(&spec), "--epsilon", "1", "--out", path_str(&out)];
        args.extend(extra);
        let o = frameforge(&args);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read_to_string(out).unwrap()
    };
    let a = run("a.json", &["--seed", "5", "--demo-pw"]);
    let b = run("b.json", &["--seed", "5", "--demo-pw"]);
    assert_eq!(a, b);
    let parsed: SynthReport = serde_json::from_str(&a).unwrap();
    assert_eq!(serde_json::to_string_pretty(&parsed).unwrap() + "\n", a);
    let demo = parsed.demo.unwrap();
    assert!((demo.truncated_sum - demo.samples.sample_energy).abs() <= 1e-12 * demo.truncated_sum);
    assert!(demo.converged_lower_ratio >= 1.0 - 1e-6 && demo.converged_upper_ratio <= 1.0 + 1e-6);
    assert!(!dir.path().join("a.json.timing.json").exists());
    run("c.json", &["--timing"]);
    assert!(dir.path().join("c.json.timing.json").exists());
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = vec![];
    for threads in ["1", "4"] {
        let csv = dir.path().join(format!("t{threads}.csv"));
        let o = Command::new(env!("CARGO_BIN_EXE_frameforge"))
            .args(["synth", "--spectrum", path_str(&fixture("grid16.json")), "--spectrum", path_str(&fixture("grid32.json"))])
            .args(["--sweep-epsilon", "0.5,2", "--csv", path_str(&csv)])
            .env("FRAMEFORGE_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        outputs.push(std::fs::read(csv).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let bad = Command::new(env!("CARGO_BIN_EXE_frameforge"))
        .args(["synth", "--spectrum", path_str(&fixture("grid16.json")), "--epsilon", "1"])
        .args(["--out", path_str(&dir.path().join("x.json"))])
        .env("FRAMEFORGE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn group_synth_reports_the_density_identity() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["z8.json", "z4z6.json"] {
        let out = dir.path().join("g.json");
        let o = frameforge(&["group-synth", "--spectrum", path_str(&fixture(f)), "--epsilon", "1", "--out", path_str(&out), "--verify"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let text = std::fs::read_to_string(&out).unwrap();
        let r: GroupReport = serde_json::from_str(&text).unwrap();
        assert!(r.density_identity.holds);
        assert!(r.brute_force.as_ref().unwrap().max_abs_diff < 1e-10);
        assert!(r.frame.q <= r.frame.budget);
        assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", text);
    }
}

#[test]
fn lift_check_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("l.json");
    let o = frameforge(&["lift-check", "--input", path_str(&fixture("lift_z4.json")), "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let r: LiftReport = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert!(r.bounds_equal);
    assert!((r.result.lifted_bounds.0 - 4.0).abs() < 1e-12);
}

#[test]
fn select_with_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let m = dft_submatrix(6, &[0, 2, 4]).scale(1.0 / 6f64.sqrt());
    let path = write_matrix(dir.path(), "m.json", &m);
    let out = dir.path().join("s.json");
    let o = frameforge(&["select", "--matrix", path_str(&path), "--epsilon", "0.5", "--out", path_str(&out), "--oracle"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: SelectReport = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(r.selection.indices.len() <= 5);
    let oracle = r.oracle.unwrap();
    assert!(oracle.ratio > 0.0 && oracle.ratio <= 1.0 + 1e-12);

    let big = dft_submatrix(32, &[0, 1]).scale(1.0 / 32f64.sqrt());
    let path = write_matrix(dir.path(), "big.json", &big);
    let o = frameforge(&["select", "--matrix", path_str(&path), "--epsilon", "1", "--out", path_str(&out), "--oracle"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sparsify_and_quantization_failure() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let frame = random_parseval_frame(12, 3, &mut rng);
    let path = write_matrix(dir.path(), "f.json", frame.matrix());
    let out = dir.path().join("sp.json");
    let o = frameforge(&["sparsify", "--matrix", path_str(&path), "--d", "2", "--out", path_str(&out), "--quantize", "0.3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: SparsifyReport = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(r.support.len() <= 6);
    assert!(r.bounds.0 >= r.targets.0 - 1e-9 && r.bounds.1 <= r.targets.1 + 1e-9);
    assert!(r.quantization.unwrap().deviation < 0.3);

    let o = frameforge(&["sparsify", "--matrix", path_str(&path), "--d", "2", "--out", path_str(&out), "--quantize", "1e-17", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));

    let not_parseval = dft_submatrix(4, &[0, 1]);
    let path = write_matrix(dir.path(), "np.json", &not_parseval);
    let o = frameforge(&["sparsify", "--matrix", path_str(&path), "--d", "2", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn density_csv_for_a_sampling_set() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let o = frameforge(&["density", "--points", path_str(&fixture("periodic.json")), "--r", "40,400", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(headers.iter().collect::<Vec<_>>(), ["r", "d_minus", "d_plus", "exact", "points"]);
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let r: f64 = rec[0].parse().unwrap();
        let lo: f64 = rec[1].parse().unwrap();
        let hi: f64 = rec[2].parse().unwrap();
        assert_eq!(&rec[3], "0.5");
        assert!((lo - 0.5).abs() <= 2.0 / r && (hi - 0.5).abs() <= 2.0 / r);
    }
}

#[test]
fn pw_demo_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pw.json");
    let o = frameforge(&["pw-demo", "--spectrum", path_str(&fixture("grid16.json")), "--epsilon", "1", "--out", path_str(&out), "--L", "32"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: SynthReport = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r.command, "pw-demo");
    let demo = r.demo.unwrap();
    assert_eq!(demo.l, 32);
    assert!(demo.truncated_sum <= demo.converged.value * (1.0 + 1e-12));
}

#[test]
fn in_process_run_matches_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let code = frameforge_cli::run(["frameforge", "synth", "--spectrum", path_str(&fixture("half.json")), "--epsilon", "1", "--out", path_str(&a)]);
    assert_eq!(code, 0);
    frameforge(&["synth", "--spectrum", path_str(&fixture("half.json")), "--epsilon", "1", "--out", path_str(&b)]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}
