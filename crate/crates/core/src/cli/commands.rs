//! The six subcommands. Each is a pure function of the parsed config.

use crate::dividend_payment_delay::{PaymentDelayValue, RuinNormalization};
use crate::dividend_ruin_delay::{
    default_verify_grid, hjb_verify, optimal_barrier, optimal_barrier_report, BarrierPolicy,
    HjbTolerance, RuinDelayValue, Smooth,
};
use crate::error::Error;
use crate::levy_model::RiskModel;
use crate::parisian_ruin::{classical_ruin_probability, parisian_ruin_probability, ParisianSpec};
use crate::simulate::{simulate_parisian_ruin_prob, simulate_payment_delay, simulate_ruin_delay};

use super::config::{linspace, BarrierChoice, ConfigError, RunConfig, SimTarget};
use super::output::{Cell, Report, Table};

/// Largest accepted `|v(a−) − v(a+)|` before payment-delay values are emitted.
pub const CONTINUITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Numeric(#[from] Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(Error::InvalidArgument(_) | Error::UnsupportedModel(_)) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Table(Table),
    Report(Report),
}

/// What a command produced, before anything is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: Body,
    /// Verification summary, written next to the main output.
    pub summary: Option<Report>,
    /// Informational lines for standard error.
    pub notes: Vec<String>,
    /// Set when the output is complete but the command must still report
    /// failure.
    pub failure: Option<String>,
}

impl Outcome {
    fn plain(body: Body) -> Self {
        Self {
            body,
            summary: None,
            notes: Vec::new(),
            failure: None,
        }
    }
}

type CmdResult = Result<Outcome, CliError>;

fn resolve_barrier(
    cfg: &RunConfig,
    model: &RiskModel,
    q: f64,
    spec: ParisianSpec,
) -> Result<f64, CliError> {
    match cfg.barrier()? {
        BarrierChoice::Level(a) => Ok(a),
        BarrierChoice::Named(_) => Ok(optimal_barrier(model, q, spec)?),
    }
}

fn finite(name: &str, x: f64, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation(format!("{name} at x = {x}")).into())
    }
}

pub fn value_ruin_delay(cfg: &RunConfig) -> CmdResult {
    let model = cfg.model()?;
    let q = cfg.positive_q()?;
    let spec = cfg.parisian()?;
    let xs = cfg.grid_points()?;
    let a = resolve_barrier(cfg, &model, q, spec)?;
    let v = RuinDelayValue::new(model, q, spec, BarrierPolicy::new(a)?)?;
    let scale = v.scale();
    let mut table = Table::new(&["x", "v", "v_prime", "barrier", "V", "V_prime"]);
    for x in xs {
        let vx = finite("v", x, v.value(x).max(0.0))?;
        let dv = finite("v_prime", x, v.first(x))?;
        let big = finite("V", x, scale.value(x))?;
        let big_d = if x >= 0.0 {
            scale.derivative(x, 1)
        } else {
            dv * v.slope_at_barrier()
        };
        let big_d = finite("V_prime", x, big_d)?;
        table.push([x, vx, dv, a, big, big_d].map(Cell::Num).to_vec());
    }
    Ok(Outcome::plain(Body::Table(table)))
}

pub fn optimal_barrier_cmd(cfg: &RunConfig) -> CmdResult {
    let model = cfg.model()?;
    let q = cfg.positive_q()?;
    let spec = cfg.parisian()?;
    let r = optimal_barrier_report(&model, q, spec)?;
    Ok(Outcome::plain(Body::Report(Report::new(vec![
        ("a_star", Cell::Num(r.a_star)),
        ("V_second_at_a_star", Cell::Num(r.v_second_at_a_star)),
        ("method", Cell::Text(r.method.as_str().into())),
    ]))))
}

pub fn ruin_prob(cfg: &RunConfig) -> CmdResult {
    let model = cfg.model()?;
    let spec = cfg.parisian()?;
    let xs = cfg.grid_points()?;
    let mut table = Table::new(&["x", "parisian_ruin_prob", "classical_ruin_prob"]);
    for x in xs {
        let p = parisian_ruin_probability(&model, spec, x)?;
        let c = classical_ruin_probability(&model, x)?;
        table.push(vec![Cell::Num(x), Cell::Num(p), Cell::Num(c)]);
    }
    Ok(Outcome::plain(Body::Table(table)))
}

pub fn value_payment_delay(cfg: &RunConfig) -> CmdResult {
    let model = cfg.model()?;
    let q = cfg.positive_q()?;
    let spec = cfg.payment()?;
    let a = match cfg.barrier()? {
        BarrierChoice::Level(a) if a > 0.0 => a,
        BarrierChoice::Level(a) => {
            return Err(ConfigError(format!("control.barrier must be positive here, got {a}")).into())
        }
        BarrierChoice::Named(_) => {
            return Err(ConfigError(
                "control.barrier = \"optimal\" is not available for the payment-delay strategy; give a level"
                    .into(),
            )
            .into())
        }
    };
    let xs = cfg.grid_points()?;
    let v = PaymentDelayValue::new(model, q, spec, a)?;
    let gap = v.continuity_gap()?;
    if !(gap <= CONTINUITY_TOLERANCE) {
        return Err(Error::InternalConsistency(format!(
            "value is discontinuous at the barrier: |v(a−) − v(a+)| = {gap:e}"
        ))
        .into());
    }
    let va = v.boundary_value();
    let mut table = Table::new(&["x", "v", "va", "region"]);
    for x in xs {
        let vx = finite("v", x, v.value(x)?)?;
        let region = if x <= a { "below" } else { "above" };
        table.push(vec![
            Cell::Num(x),
            Cell::Num(vx),
            Cell::Num(va),
            Cell::Text(region.into()),
        ]);
    }
    let mut out = Outcome::plain(Body::Table(table));
    if matches!(model, RiskModel::CramerLundbergExp { .. }) && spec.d > 0.0 {
        out.notes.push(format!(
            "finite-time ruin normalization: {}",
            RuinNormalization::default().as_str()
        ));
    }
    Ok(out)
}

pub fn simulate(cfg: &RunConfig) -> CmdResult {
    let model = cfg.model()?;
    let sim = cfg.sim_config()?;
    let section = cfg.sim.as_ref().expect("checked by sim_config");
    let target = section
        .target
        .ok_or_else(|| ConfigError("sim.target is required".into()))?;
    let x = section
        .x
        .ok_or_else(|| ConfigError("sim.x is required".into()))?;
    let est = match target {
        SimTarget::RuinDelay => {
            let q = cfg.positive_q()?;
            let spec = cfg.parisian()?;
            let a = resolve_barrier(cfg, &model, q, spec)?;
            simulate_ruin_delay(&model, q, spec, BarrierPolicy::new(a)?, x, &sim)?
        }
        SimTarget::PaymentDelay => {
            let q = cfg.positive_q()?;
            let spec = cfg.payment()?;
            let a = match cfg.barrier()? {
                BarrierChoice::Level(a) => a,
                BarrierChoice::Named(_) => {
                    return Err(ConfigError(
                        "control.barrier = \"optimal\" is not available for sim.target = \"payment_delay\""
                            .into(),
                    )
                    .into())
                }
            };
            simulate_payment_delay(&model, q, spec, BarrierPolicy::new(a)?, x, &sim)?
        }
        SimTarget::ParisianRuin => {
            let spec = cfg.parisian()?;
            let cap = section
                .time_cap
                .ok_or_else(|| ConfigError("sim.time_cap is required for parisian_ruin".into()))?;
            simulate_parisian_ruin_prob(&model, spec, x, &sim, cap)?
        }
    };
    Ok(Outcome::plain(Body::Report(Report::new(vec![
        ("mean", Cell::Num(est.mean)),
        ("std_error", Cell::Num(est.std_error)),
        ("n_paths", Cell::Int(sim.n_paths)),
        ("censoring_bias_bound", Cell::Num(est.censoring_bias_bound)),
        ("seed", Cell::Int(sim.seed)),
    ]))))
}

pub fn verify(cfg: &RunConfig) -> CmdResult {
    let model = cfg.model()?;
    let q = cfg.positive_q()?;
    let spec = cfg.parisian()?;
    let a = resolve_barrier(cfg, &model, q, spec)?;
    let grid = match cfg.grid {
        Some(g) => linspace(g)?,
        None => default_verify_grid(a),
    };
    let tol = HjbTolerance::default();
    let r = hjb_verify(&model, q, spec, BarrierPolicy::new(a)?, &grid, tol)?;
    let mut table = Table::new(&["x", "hjb_value", "v_prime", "pass"]);
    for i in 0..r.grid.len() {
        table.push(vec![
            Cell::Num(r.grid[i]),
            Cell::Num(r.hjb_values[i]),
            Cell::Num(r.derivative_values[i]),
            Cell::Bool(r.point_passed[i]),
        ]);
    }
    let failed = r.point_passed.iter().filter(|&&p| !p).count();
    let summary = Report::new(vec![
        ("passed", Cell::Bool(r.passed)),
        ("barrier", Cell::Num(a)),
        ("max_violation", Cell::Num(r.max_violation)),
        ("n_points", Cell::Int(r.grid.len() as u64)),
        ("n_failed", Cell::Int(failed as u64)),
        ("tol_equality", Cell::Num(tol.equality)),
        ("tol_inequality", Cell::Num(tol.inequality)),
        ("tol_derivative", Cell::Num(tol.derivative)),
    ]);
    Ok(Outcome {
        body: Body::Table(table),
        summary: Some(summary),
        notes: Vec::new(),
        failure: (!r.passed).then(|| {
            format!(
                "HJB verification failed at {failed} of {} points",
                r.grid.len()
            )
        }),
    })
}
