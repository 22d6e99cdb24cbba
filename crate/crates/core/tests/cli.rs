use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use parisian_dividends::dividend_ruin_delay::optimal_barrier;
use parisian_dividends::parisian_ruin::{ParisianScale, ParisianSpec};
use parisian_dividends::RiskModel;

const CL_MODEL: &str = r#"
[model]
kind = "cramer_lundberg_exp"
premium = 2.0
intensity = 1.0
claim_rate = 1.0
"#;

const BM_MODEL: &str = r#"
[model]
kind = "brownian_drift"
drift = 1.0
volatility = 1.0
"#;

struct Run {
    dir: tempfile::TempDir,
}

impl Run {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// Writes `config` (with an `[output]` section pointing at `out.<ext>`)
    /// and runs `cmd`.
    fn exec(&self, cmd: &str, config: &str, format: &str) -> (Output, PathBuf) {
        let out = self.path(&format!("out.{format}"));
        let text = format!(
            "{config}\n[output]\npath = {:?}\nformat = \"{format}\"\n",
            out.to_str().unwrap()
        );
        let cfg = self.path("run.toml");
        std::fs::write(&cfg, text).unwrap();
        (invoke(cmd, &cfg), out)
    }
}

fn invoke(cmd: &str, cfg: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parisian"))
        .args([cmd, "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

fn grid(lo: f64, hi: f64, n: usize) -> String {
    format!("\n[grid]\nx_min = {lo:?}\nx_max = {hi:?}\nn_points = {n}\n")
}

#[test]
fn value_ruin_delay_header_and_barrier_row() {
    let run = Run::new();
    let a = optimal_barrier(&cl(), 0.1, ParisianSpec::new(1.0).unwrap()).unwrap();
    let cfg = format!(
        "{CL_MODEL}\n[control]\nq = 0.1\nzeta = 1.0\nbarrier = \"optimal\"\n{}",
        grid(a, a, 1)
    );
    let (o, out) = run.exec("value-ruin-delay", &cfg, "csv");
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = csv(&out);
    assert_eq!(header, "x,v,v_prime,barrier,V,V_prime");
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert_eq!(f(&r[3]), a);
    let s = ParisianScale::new(cl(), 0.1, ParisianSpec::new(1.0).unwrap()).unwrap();
    let expect = s.value(a) / s.derivative(a, 1);
    assert!((f(&r[1]) - expect).abs() < 1e-12 * expect);
    assert!((f(&r[1]) - f(&r[4]) / f(&r[5])).abs() < 1e-12 * expect);
}

#[test]
fn optimal_barrier_report_matches_library() {
    let run = Run::new();
    let cfg = format!("{BM_MODEL}\n[control]\nq = 0.05\nzeta = 1.0\n");
    let (o, out) = run.exec("optimal-barrier", &cfg, "json");
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    let a = optimal_barrier(&bm(), 0.05, ParisianSpec::new(1.0).unwrap()).unwrap();
    assert_eq!(v["a_star"].as_f64().unwrap(), a);
    assert_eq!(v["method"], "closed_form");
    assert!(v["V_second_at_a_star"].as_f64().unwrap().abs() < 1e-8);
}

#[test]
fn barrier_column_is_constant_optimal_level() {
    let run = Run::new();
    let cfg = format!(
        "{BM_MODEL}\n[control]\nq = 0.05\nzeta = 1.0\nbarrier = \"optimal\"\n{}",
        grid(0.0, 5.0, 11)
    );
    let (o, out) = run.exec("value-ruin-delay", &cfg, "csv");
    assert!(o.status.success(), "{}", stderr(&o));
    let a = optimal_barrier(&bm(), 0.05, ParisianSpec::new(1.0).unwrap()).unwrap();
    let (_, rows) = csv(&out);
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| f(&r[3]) == a));
}

#[test]
fn ruin_prob_table() {
    let run = Run::new();
    let cfg = format!("{CL_MODEL}\n[control]\nzeta = 1.0\n{}", grid(0.0, 4.0, 9));
    let (o, out) = run.exec("ruin-prob", &cfg, "csv");
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = csv(&out);
    assert_eq!(header, "x,parisian_ruin_prob,classical_ruin_prob");
    for r in &rows {
        assert!(f(&r[1]) <= f(&r[2]));
        let x = f(&r[0]);
        assert!((f(&r[2]) - 0.5 * (-0.5 * x).exp()).abs() < 1e-14);
    }
}

#[test]
fn payment_delay_table_and_note() {
    let run = Run::new();
    let cfg = format!(
        "{CL_MODEL}\n[control]\nq = 0.1\nd = 1.0\nbarrier = 2.0\n{}",
        grid(0.0, 4.0, 5)
    );
    let (o, out) = run.exec("value-payment-delay", &cfg, "csv");
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("unit_premium"));
    let (header, rows) = csv(&out);
    assert_eq!(header, "x,v,va,region");
    let regions: Vec<&str> = rows.iter().map(|r| r[3].as_str()).collect();
    assert_eq!(regions, ["below", "below", "below", "above", "above"]);
    assert_eq!(f(&rows[2][1]), f(&rows[2][2]));
}

#[test]
fn payment_delay_without_delay_is_classical() {
    let run = Run::new();
    let cfg = format!(
        "{CL_MODEL}\n[control]\nq = 0.1\nd = 0.0\nbarrier = 2.0\n{}",
        grid(1.0, 1.0, 1)
    );
    let (o, out) = run.exec("value-payment-delay", &cfg, "csv");
    assert!(o.status.success(), "{}", stderr(&o));
    let w = parisian_dividends::ScaleEval::new(cl(), 0.1).unwrap();
    let (_, rows) = csv(&out);
    assert!((f(&rows[0][1]) - w.W(1.0) / w.w_prime(2.0)).abs() < 1e-12);
}

#[test]
fn simulate_is_deterministic() {
    let run = Run::new();
    let cfg = format!(
        "{CL_MODEL}\n[control]\nq = 0.1\nzeta = 1.0\nbarrier = 2.0\n\n[sim]\nn_paths = 5000\nseed = 42\ntarget = \"ruin_delay\"\nx = 1.0\n"
    );
    let (o1, out) = run.exec("simulate", &cfg, "json");
    assert!(o1.status.success(), "{}", stderr(&o1));
    let first = std::fs::read(&out).unwrap();
    let (o2, out) = run.exec("simulate", &cfg, "json");
    assert!(o2.status.success());
    assert_eq!(first, std::fs::read(&out).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&first).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    let mut expect = vec![
        "mean",
        "std_error",
        "n_paths",
        "censoring_bias_bound",
        "seed",
    ];
    expect.sort();
    let mut keys = keys;
    keys.sort();
    assert_eq!(keys, expect);
    assert_eq!(v["n_paths"], 5000);
    assert_eq!(v["seed"], 42);
}

#[test]
fn verify_passes_at_optimum_and_fails_below() {
    let run = Run::new();
    let base = format!("{CL_MODEL}\n[control]\nq = 0.1\nzeta = 1.0\n");
    let (o, out) = run.exec("verify", &format!("{base}barrier = \"optimal\"\n"), "csv");
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = csv(&out);
    assert_eq!(header, "x,hjb_value,v_prime,pass");
    assert_eq!(rows.len(), 200);
    assert!(rows.iter().all(|r| r[3] == "true"));
    let summary = run.path("out.summary.json");
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(v["passed"], true);

    let a = optimal_barrier(&cl(), 0.1, ParisianSpec::new(1.0).unwrap()).unwrap();
    let (o, out) = run.exec("verify", &format!("{base}barrier = {:?}\n", a / 2.0), "csv");
    assert_eq!(o.status.code(), Some(1));
    let (_, rows) = csv(&out);
    assert!(rows.iter().any(|r| r[3] == "false"));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(v["passed"], false);
}

#[test]
fn json_tables_are_arrays_of_flat_rows() {
    let run = Run::new();
    let cfg = format!("{BM_MODEL}\n[control]\nzeta = 0.5\n{}", grid(0.0, 1.0, 3));
    let (o, out) = run.exec("ruin-prob", &cfg, "json");
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows
        .iter()
        .all(|r| r.as_object().unwrap().values().all(|x| x.is_number())));
}

#[test]
fn stdout_when_no_path_given() {
    let run = Run::new();
    let cfg = run.path("run.toml");
    std::fs::write(
        &cfg,
        format!("{CL_MODEL}\n[control]\nq = 0.1\nzeta = 1.0\n"),
    )
    .unwrap();
    let o = invoke("optimal-barrier", &cfg);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("a_star,V_second_at_a_star,method\n"));
}

#[test]
fn validation_errors_exit_with_two_and_write_nothing() {
    let cases = [
        // negative window
        format!(
            "{CL_MODEL}\n[control]\nq = 0.1\nzeta = -1.0\nbarrier = 1.0\n{}",
            grid(0.0, 1.0, 3)
        ),
        // unknown key
        format!(
            "{CL_MODEL}\n[control]\nq = 0.1\nzeta = 1.0\nrate = 1\n{}",
            grid(0.0, 1.0, 3)
        ),
        // parameter of the other model
        format!(
            "{CL_MODEL}volatility = 1.0\n[control]\nq = 0.1\nzeta = 1.0\n{}",
            grid(0.0, 1.0, 3)
        ),
        // net profit condition
        format!(
            "{}\n[control]\nq = 0.1\nzeta = 1.0\n{}",
            CL_MODEL.replace("2.0", "0.5"),
            grid(0.0, 1.0, 3)
        ),
        // empty grid
        format!(
            "{CL_MODEL}\n[control]\nq = 0.1\nzeta = 1.0\nbarrier = 1.0\n{}",
            grid(0.0, 1.0, 0)
        ),
        // zero discount rate
        format!(
            "{CL_MODEL}\n[control]\nq = 0.0\nzeta = 1.0\nbarrier = 1.0\n{}",
            grid(0.0, 1.0, 3)
        ),
    ];
    for (i, cfg) in cases.iter().enumerate() {
        let run = Run::new();
        let (o, out) = run.exec("value-ruin-delay", cfg, "csv");
        assert_eq!(o.status.code(), Some(2), "case {i}: {}", stderr(&o));
        assert!(!out.exists(), "case {i}");
    }
    let run = Run::new();
    let (o, out) = run.exec(
        "verify",
        &format!(
            "{CL_MODEL}\n[control]\nq = 0.1\nzeta = 1.0\nbarrier = 1.0\n{}",
            grid(0.0, 1.0, 0)
        ),
        "csv",
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    let (o, out) = run.exec(
        "simulate",
        &format!("{CL_MODEL}\n[control]\nq = 0.1\nzeta = 1.0\nbarrier = 1.0\n[sim]\nn_paths = 0\ntarget = \"ruin_delay\"\nx = 1.0\n"),
        "json",
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    let (o, _) = run.exec(
        "value-payment-delay",
        &format!(
            "{CL_MODEL}\n[control]\nq = 0.1\nd = 1.0\nbarrier = \"optimal\"\n{}",
            grid(0.0, 1.0, 2)
        ),
        "csv",
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn parse_errors_point_at_the_line() {
    let run = Run::new();
    let (o, _) = run.exec(
        "ruin-prob",
        &format!("{CL_MODEL}\n[control]\nzeta = 1.0\nfoo = 2\n"),
        "csv",
    );
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line") && err.contains("foo"), "{err}");
}

#[test]
fn missing_config_file_is_a_validation_error() {
    let o = invoke("ruin-prob", Path::new("/nonexistent/run.toml"));
    assert_eq!(o.status.code(), Some(2));
}

fn cl() -> RiskModel {
    RiskModel::cramer_lundberg(2.0, 1.0, 1.0).unwrap()
}

fn bm() -> RiskModel {
    RiskModel::brownian(1.0, 1.0).unwrap()
}
