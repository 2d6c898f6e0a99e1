//! Command-line front end. Every command emits a [`RunReport`] as JSON on
//! standard output; `sweep` also writes a CSV grid.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mzi_paradox::exploration::{argmax, SweepCell};
use mzi_paradox::interferometry::joint_probability;
use mzi_paradox::nonlocality::{admissible_entries, LogicalStatementSet, Setting};
use mzi_paradox::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub const SCHEMA_VERSION: &str = "1";
pub const CSV_HEADER: &str = "r,phi,p_u1u2,p_c1c2,violation";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "mzi-paradox",
    version,
    about = "Coupled Mach-Zehnder interferometer simulator"
)]
pub struct Cli {
    /// Emit JSON on standard output (the only format; accepted for scripts).
    #[arg(long, global = true)]
    pub json: bool,
    /// Read phase arguments in degrees instead of radians.
    #[arg(long, global = true)]
    pub degrees: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single interferometer with an optional bomb in arm u.
    Ev {
        #[arg(long, allow_negative_numbers = true)]
        r: f64,
        #[arg(long)]
        bomb: bool,
    },
    /// Annihilation-coupled pair.
    Annihilation {
        #[arg(long, allow_negative_numbers = true)]
        r: f64,
        #[arg(long)]
        place_u_plus: bool,
        #[arg(long)]
        place_u_minus: bool,
    },
    /// Phase-coupled pair.
    Phase {
        #[arg(long, allow_negative_numbers = true)]
        r: f64,
        #[arg(long, allow_negative_numbers = true)]
        phi: f64,
        #[arg(long)]
        place_u1: bool,
        #[arg(long)]
        place_u2: bool,
    },
    /// Bell inequality and local-model test for the phase-coupled pair.
    Bell {
        #[arg(long, allow_negative_numbers = true)]
        r: f64,
        #[arg(long, allow_negative_numbers = true)]
        phi: f64,
    },
    /// Violation over an (r, phi) grid, written as CSV.
    Sweep {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Grid scan plus golden-section refinement of the violation.
    Optimize {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 1e-8)]
        refine_tol: f64,
    },
    /// Gravitational coupling phase and the best violation it allows.
    Gravity {
        /// Mass in kg.
        #[arg(long, allow_negative_numbers = true)]
        mass: f64,
        /// Interacting arm length in m.
        #[arg(long, allow_negative_numbers = true)]
        length: f64,
        /// Arm separation in m.
        #[arg(long, allow_negative_numbers = true)]
        distance: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.05)]
    pub r_min: f64,
    #[arg(long, default_value_t = 0.95)]
    pub r_max: f64,
    #[arg(long, default_value_t = 200)]
    pub r_steps: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi_min: f64,
    /// Defaults to 2pi (or 360 with --degrees).
    #[arg(long, allow_negative_numbers = true)]
    pub phi_max: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub phi_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: String,
    pub command: String,
    pub inputs: Value,
    pub outputs: Value,
}

impl RunReport {
    fn new(command: &str, inputs: Value, outputs: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            inputs,
            outputs,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}

/// Rounds to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Probability for reporting: rounded, with round-off below zero clamped.
pub fn prob(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        sig12(x)
    }
}

/// Decimal text of a reported real, identical to its JSON form.
pub fn format_real(x: f64) -> String {
    serde_json::to_string(&sig12(x)).expect("finite reals serialize")
}

fn phase_in(phi: f64, degrees: bool) -> f64 {
    if degrees {
        phi.to_radians()
    } else {
        phi
    }
}

fn params(r: f64) -> Result<BeamSplitterParams, CliError> {
    BeamSplitterParams::from_reflection(r).map_err(domain)
}

fn table(dist: &OutcomeDistribution) -> Value {
    let map = dist
        .iter()
        .map(|(label, p)| (label.to_string(), json!(prob(p))))
        .collect::<serde_json::Map<_, _>>();
    Value::Object(map)
}

fn cell_json(c: &SweepCell) -> Value {
    json!({
        "r": sig12(c.r),
        "phi": sig12(c.phi),
        "p_u1u2": prob(c.p_u1u2),
        "p_c1c2": prob(c.p_c1c2),
        "violation": sig12(c.violation),
    })
}

impl GridArgs {
    fn grid(&self, degrees: bool) -> Result<SweepGrid, CliError> {
        let phi_max = self
            .phi_max
            .map(|p| phase_in(p, degrees))
            .unwrap_or(std::f64::consts::TAU);
        SweepGrid::new(
            self.r_min,
            self.r_max,
            self.r_steps,
            phase_in(self.phi_min, degrees),
            phi_max,
            self.phi_steps,
        )
        .map_err(domain)
    }
}

fn grid_json(g: &SweepGrid) -> Value {
    json!({
        "r_min": sig12(g.r_min),
        "r_max": sig12(g.r_max),
        "r_steps": g.r_steps,
        "phi_min": sig12(g.phi_min),
        "phi_max": sig12(g.phi_max),
        "phi_steps": g.phi_steps,
    })
}

/// Writes the sweep grid as CSV, one row per cell in row-major order.
pub fn write_csv(path: &Path, cells: &[SweepCell]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "{CSV_HEADER}").map_err(io)?;
    for c in cells {
        writeln!(
            w,
            "{},{},{},{},{}",
            format_real(c.r),
            format_real(c.phi),
            format_real(prob(c.p_u1u2)),
            format_real(prob(c.p_c1c2)),
            format_real(c.violation)
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn execute(cli: &Cli) -> Result<RunReport, CliError> {
    let deg = cli.degrees;
    match &cli.command {
        Command::Ev { r, bomb } => {
            let p = params(*r)?;
            let dist = run_ev(&p, *bomb);
            let single = |port| dist.probability(Label::Pair(port, Port::None));
            Ok(RunReport::new(
                "ev",
                json!({ "r": r, "bomb": bomb }),
                json!({
                    "t": sig12(p.t()),
                    "p_c": prob(single(Port::C)),
                    "p_d": prob(single(Port::D)),
                    "p_exploded": prob(single(Port::Exploded)),
                    "retest_efficiency": sig12(ev_retest_efficiency(&p)),
                }),
            ))
        }
        Command::Annihilation {
            r,
            place_u_plus,
            place_u_minus,
        } => {
            let p = params(*r)?;
            let cfg = ExperimentConfig::annihilation(p, *place_u_plus, *place_u_minus);
            let dist = run_annihilation(&cfg).map_err(domain)?;
            Ok(RunReport::new(
                "annihilation",
                json!({ "r": r, "place_u_plus": place_u_plus, "place_u_minus": place_u_minus }),
                json!({
                    "table": table(&dist),
                    "p_dplus_dminus": prob(joint_probability(&dist, Port::D, Port::D)),
                    "p_uplus_uminus": prob(joint_probability(&dist, Port::AbsorbedU, Port::AbsorbedU)),
                    "p_gamma": prob(dist.probability(Label::Gamma)),
                    "total": sig12(dist.total()),
                }),
            ))
        }
        Command::Phase {
            r,
            phi,
            place_u1,
            place_u2,
        } => {
            let p = params(*r)?;
            let phi_rad = phase_in(*phi, deg);
            let cfg = ExperimentConfig::phase(p, phi_rad, *place_u1, *place_u2);
            let dist = run_phase(&cfg).map_err(domain)?;
            let coeff = dark_port_coefficient(&p, phi_rad);
            Ok(RunReport::new(
                "phase",
                json!({ "r": r, "phi": phi, "degrees": deg, "place_u1": place_u1, "place_u2": place_u2 }),
                json!({
                    "phi_rad": sig12(phi_rad),
                    "table": table(&dist),
                    "p_u1_u2": prob(joint_probability(&dist, Port::AbsorbedU, Port::AbsorbedU)),
                    "p_c1_c2": prob(joint_probability(&dist, Port::C, Port::C)),
                    "p_u1_d2": prob(joint_probability(&dist, Port::AbsorbedU, Port::D)),
                    "p_d1_u2": prob(joint_probability(&dist, Port::D, Port::AbsorbedU)),
                    "p_d1": prob(dist.marginal(Particle::First, Port::D)),
                    "p_d2": prob(dist.marginal(Particle::Second, Port::D)),
                    "dark_port_coefficient": { "re": sig12(coeff.re), "im": sig12(coeff.im) },
                    "total": sig12(dist.total()),
                }),
            ))
        }
        Command::Bell { r, phi } => {
            let p = params(*r)?;
            let phi_rad = phase_in(*phi, deg);
            let behavior = behavior_from_phase_setup(&p, phi_rad).map_err(domain)?;
            Ok(RunReport::new(
                "bell",
                json!({ "r": r, "phi": phi, "degrees": deg }),
                bell_outputs(&behavior)?,
            ))
        }
        Command::Sweep { grid, out } => {
            let g = grid.grid(deg)?;
            let cells = sweep(&g).map_err(domain)?;
            write_csv(out, &cells)?;
            let best = argmax(&cells).expect("validated grids are non-empty");
            Ok(RunReport::new(
                "sweep",
                json!({ "grid": grid_json(&g), "out": out.display().to_string() }),
                json!({
                    "rows": cells.len(),
                    "argmax": cell_json(best),
                }),
            ))
        }
        Command::Optimize { grid, refine_tol } => {
            let g = grid.grid(deg)?;
            let opt = find_max_violation(&g, *refine_tol).map_err(domain)?;
            Ok(RunReport::new(
                "optimize",
                json!({ "grid": grid_json(&g), "refine_tol": refine_tol }),
                json!({
                    "r_star": sig12(opt.r_star),
                    "phi_star": sig12(opt.phi_star),
                    "violation_star": sig12(opt.violation_star),
                    "iterations": opt.iterations,
                    "boundary": opt.boundary,
                    "converged": opt.converged,
                }),
            ))
        }
        Command::Gravity {
            mass,
            length,
            distance,
        } => {
            let g = GravityParams::new(*mass, *length, *distance).map_err(domain)?;
            let phi = gravity_phase(&g);
            let best = max_violation_at_phi(phi, 1e-10).map_err(domain)?;
            Ok(RunReport::new(
                "gravity",
                json!({ "mass": mass, "length": length, "distance": distance }),
                json!({
                    "phi": sig12(phi),
                    "phi_wrapped": sig12(phi.rem_euclid(std::f64::consts::TAU)),
                    "best_r": sig12(best.r),
                    "best_violation": sig12(best.violation),
                    "nonlocal": best.violation > mzi_paradox::nonlocality::FEASIBILITY_TOL,
                }),
            ))
        }
    }
}

fn bell_outputs(behavior: &BehaviorTable) -> Result<Value, CliError> {
    let report = bell_violation(behavior).map_err(domain)?;
    let lhv = match lhv_membership(behavior).map_err(domain)? {
        LhvVerdict::Feasible { weights, residual } => json!({
            "verdict": "feasible",
            "residual": sig12(residual),
            "weights": weights
                .iter()
                .map(|(d, w)| json!({
                    "first": { "u_present": d.first.when_present, "u_absent": d.first.when_absent },
                    "second": { "u_present": d.second.when_present, "u_absent": d.second.when_absent },
                    "weight": sig12(*w),
                }))
                .collect::<Vec<_>>(),
        }),
        LhvVerdict::Infeasible { certificate } => json!({
            "verdict": "infeasible",
            "certificate": {
                "value": sig12(certificate.value),
                "coefficients": admissible_entries()
                    .zip(&certificate.coefficients)
                    .filter(|(_, c)| **c != 0.0)
                    .map(|((s1, s2, o1, o2), c)| {
                        let key = format!("{}/{}:{:?},{:?}", setting_name(s1), setting_name(s2), o1, o2);
                        (key, json!(sig12(*c)))
                    })
                    .collect::<serde_json::Map<_, _>>(),
            },
        }),
    };
    let constants = hardy_constants();
    let excess = logical_inequality(&LogicalStatementSet::hardy_statements(behavior));
    Ok(json!({
        "p_u1u2": prob(report.p_u1u2),
        "p_u1_notc2": prob(report.p_u1_notc2),
        "p_notc1_u2": prob(report.p_notc1_u2),
        "p_c1c2": prob(report.p_c1c2),
        "violation": sig12(report.violation),
        "lhv_feasible": report.lhv_feasible,
        "logical_excess": sig12(excess),
        "lhv": lhv,
        "qubit_max": sig12(constants.qubit_max),
        "golden_check": constants.golden_check,
        "tuned_phase_probability": sig12(constants.tuned_phase_probability),
    }))
}

fn setting_name(s: Setting) -> &'static str {
    match s {
        Setting::UPresent => "u_present",
        Setting::UAbsent => "u_absent",
    }
}
