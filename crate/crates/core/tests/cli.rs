//! End-to-end runs of the experiments and the `qpercept` binary.

use std::path::Path;
use std::process::Command;

use qpercept::experiments::{
    cmd_multi_agent, cmd_oscillator_curves, ExperimentConfig, MultiAgentConfig,
    OscillatorCurvesConfig, RunOptions,
};

fn qpercept(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qpercept"))
        .args(args)
        .output()
        .unwrap();
    let text =
        String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap_or(-1), text)
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn oscillator_curves_writes_table_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = cmd_oscillator_curves(
        &OscillatorCurvesConfig::default(),
        &RunOptions::new(dir.path()),
    )
    .unwrap();
    assert!(outcome.passed());
    let csv = std::fs::read_to_string(dir.path().join("oscillator_curves.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("# eta,lower,upper,rel_entropy,d_entropy_d_eta,derivative_infinite")
    );
    assert_eq!(csv.lines().count(), 10_001);
    assert!(csv.lines().last().unwrap().starts_with("1,0,0,0,-inf,1"));

    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("oscillator_curves_summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["n_failed"], 0);
    assert_eq!(summary["config"]["points"], 10_000);
}

#[test]
fn multi_agent_small_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = MultiAgentConfig {
        n_trajectories: 64,
        t_final: 1.0,
        sample_stride: 20,
        ..MultiAgentConfig::default()
    };
    let outcome = cmd_multi_agent(
        &cfg,
        &RunOptions::new(dir.path()).with_seed(7).with_threads(2),
    )
    .unwrap();
    assert!(
        outcome.passed(),
        "{:?}",
        outcome.failures().collect::<Vec<_>>()
    );
    let csv = std::fs::read_to_string(dir.path().join("multi_agent_0_1.csv")).unwrap();
    assert_eq!(
        csv.lines().next(),
        Some("# t,mean_trace_dist,se,lower,upper,lower_ok,upper_ok")
    );
    // t = 0 plus 100 steps / stride 20
    assert_eq!(csv.lines().count(), 1 + 6);
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("multi_agent_summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["seed"], 7);
    assert_eq!(summary["n_trajectories"], 64);
    assert_eq!(summary["threads"], 2);
}

#[test]
fn config_sections_parse() {
    let cfg = ExperimentConfig::from_toml(
        "[multi-agent]\nchannels = [\"x\", \"y\", \"z\"]\ntau_m = [1.0, 2.0, 0.5]\n",
    )
    .unwrap();
    assert_eq!(cfg.multi_agent.channels.len(), 3);
    assert!(ExperimentConfig::from_toml("[jz]\nlevls = 4\n").is_err());
}

#[test]
fn binary_succeeds_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "[oscillator-curves]\ncheck_max = 0.9\n",
    );
    let out = dir.path().join("out");
    let (code, text) = qpercept(&[
        "oscillator-curves",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("1/1 checks passed"), "{text}");
    assert!(out.join("oscillator_curves.csv").exists());
}

#[test]
fn binary_reports_check_failure_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    // a derivative tolerance no finite difference can meet
    let cfg = write(
        dir.path(),
        "c.toml",
        "[oscillator-curves]\npoints = 101\nderivative_tolerance = 1e-300\n",
    );
    let out = dir.path().join("out");
    let (code, text) = qpercept(&[
        "oscillator-curves",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 1, "{text}");
    assert!(
        text.contains("FAIL derivative_vs_finite_difference"),
        "{text}"
    );
}

#[test]
fn binary_rejects_bad_configuration_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let cases = [
        ("unknown.toml", "[jz]\nlevls = 4\n", "levls"),
        ("syntax.toml", "[jz\n", "line"),
        ("range.toml", "[jz]\netas = [0.5, 1.5]\n", "jz.etas[1]"),
        ("dt.toml", "[qubit-verify]\ndt = 0.5\n", "qubit-verify.dt"),
    ];
    for (name, body, needle) in cases {
        let cfg = write(dir.path(), name, body);
        let cmd = if body.contains("qubit") {
            "qubit-verify"
        } else {
            "jz"
        };
        let (code, text) = qpercept(&[cmd, "--config", &cfg, "--out", out]);
        assert_eq!(code, 2, "{name}: {text}");
        assert!(text.contains(needle), "{name}: {text}");
    }
    let (code, text) = qpercept(&[
        "jz",
        "--config",
        dir.path().join("missing.toml").to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "{text}");
    let (code, text) = qpercept(&["multi-agent", "--threads", "0", "--out", out]);
    assert_eq!(code, 2, "{text}");
}

#[test]
fn shipped_defaults_file_matches_built_in_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/defaults.toml");
    let loaded = ExperimentConfig::load(&path).unwrap();
    assert_eq!(loaded, ExperimentConfig::default());
}
