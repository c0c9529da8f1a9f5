use std::process::{Command, Output};

fn selftest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selftest"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn ideal_stats_passes() {
    let o = selftest(&["ideal-stats", "--grid", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("theta,statistic,simulated,formula,deviation"));
    assert_eq!(text.lines().count(), 1 + 5 * 12);
}

#[test]
fn check_result1_passes_and_perturbation_fails() {
    let o = selftest(&["check-result1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("C24"));
    let o = selftest(&["check-result1", "--perturb", "C1=0.21"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn swap_fidelity_passes() {
    let o = selftest(&["swap-fidelity", "--grid", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("realization,theta,fidelity,deviation,ancilla_011,ancilla_101,ancilla_110"));
    assert!(text.lines().any(|l| l.starts_with("result1,")));
}

#[test]
fn sweep_theta_is_deterministic() {
    let run = || {
        let o = selftest(&["sweep-theta", "--grid", "0,0.7853981633974483", "--jobs", "1"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        stdout(&o)
    };
    let strip = |s: String| -> Vec<String> {
        // Drop the runtime column.
        s.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect()
    };
    let a = strip(run());
    assert_eq!(a[0], "theta,fidelity_lower_bound,solver_status,gap,basis_size");
    assert_eq!(a.len(), 3);
    for row in &a[1..] {
        let bound: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!(bound > 0.9996, "{row}");
    }
    assert_eq!(a, strip(run()));
}

#[test]
fn sweep_noise_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("noise.csv");
    let o = selftest(&[
        "sweep-noise", "--target", "general", "--theta", "0.3", "--grid", "0,0.05",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("epsilon,fidelity_lower_bound,solver_status,gap,runtime_s"));
    let bounds: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(bounds.len(), 2);
    assert!(bounds[1] <= bounds[0] + 1e-6);
}

#[test]
fn export_sdpa_writes_a_readable_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.dat-s");
    let o = selftest(&["export-sdpa", "--theta", "0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let sdp = selftest_core::sdp::read_sdpa_file(&out).unwrap();
    assert!(sdp.num_vars() > 0);
}

#[test]
fn config_file_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# grid for the test\ngrid = 2\n").unwrap();
    let o = selftest(&["ideal-stats", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1 + 2 * 12);
}

#[test]
fn bad_arguments_exit_with_error() {
    assert_eq!(selftest(&["sweep-theta", "--theta", "3.0"]).status.code(), Some(2));
    assert_eq!(selftest(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(selftest(&["sweep-noise", "--backend", "nonsense"]).status.code(), Some(2));
    assert_eq!(selftest(&["--help"]).status.code(), Some(0));
}
