//! Bell-inequality analysis of the phase-coupled pair.
//!
//! Each side chooses a setting: `U` detector present (outcomes `U`, `C`, `D`)
//! or absent (outcomes `C`, `D`). The four experiments form a two-setting
//! behavior. It is tested against the inequality
//!
//! ```text
//! p(U1,U2) - p(U1,!C2) - p(!C1,U2) - p(C1,C2) <= 0
//! ```
//!
//! and against the local polytope spanned by the 36 deterministic strategies.
//! A linear program decides membership of the polytope.

use std::f64::consts::SQRT_2;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::interferometry::{run_phase, ExperimentConfig, ExperimentError};
use crate::lp::{solve_feasibility, Feasibility, LpError};
use crate::state::{BeamSplitterParams, Port};

/// Tolerance for normalization of each joint-setting table.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Tolerance for no-signaling and LHV feasibility.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NonlocalityError {
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("non-finite or negative probability {value} at {at}")]
    BadProbability { value: f64, at: String },
    #[error("table for settings ({0}, {1}) sums to {2}, not 1")]
    NotNormalized(Setting, Setting, f64),
    #[error("outcome U recorded with no U detector at {0}")]
    ImpossibleOutcome(String),
    #[error("marginals depend on the remote setting (residual {0:e})")]
    Signaling(f64),
    #[error("statement probability {0} outside [0, 1]")]
    StatementOutOfRange(f64),
    #[error("a statement set needs at least one statement")]
    EmptyStatementSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    UPresent,
    UAbsent,
}

impl Setting {
    pub const ALL: [Setting; 2] = [Setting::UPresent, Setting::UAbsent];

    fn index(self) -> usize {
        self as usize
    }

    /// Outcomes available under this setting.
    pub fn outcomes(self) -> &'static [Outcome] {
        match self {
            Setting::UPresent => &[Outcome::U, Outcome::C, Outcome::D],
            Setting::UAbsent => &[Outcome::C, Outcome::D],
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Setting::UPresent => "u_present",
            Setting::UAbsent => "u_absent",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Outcome {
    U,
    C,
    D,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::U, Outcome::C, Outcome::D];

    fn index(self) -> usize {
        self as usize
    }

    fn from_port(port: Port) -> Option<Self> {
        match port {
            Port::AbsorbedU => Some(Outcome::U),
            Port::C => Some(Outcome::C),
            Port::D => Some(Outcome::D),
            _ => None,
        }
    }
}

type Cells = [[[[f64; 3]; 3]; 2]; 2];

/// Joint outcome probabilities for every pair of settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BehaviorTable {
    cells: Cells,
}

/// Every admissible `(s1, s2, o1, o2)` index, in a fixed order.
pub fn admissible_entries() -> impl Iterator<Item = (Setting, Setting, Outcome, Outcome)> {
    Setting::ALL.into_iter().flat_map(|s1| {
        Setting::ALL.into_iter().flat_map(move |s2| {
            s1.outcomes()
                .iter()
                .flat_map(move |&o1| s2.outcomes().iter().map(move |&o2| (s1, s2, o1, o2)))
        })
    })
}

impl BehaviorTable {
    /// Builds and validates a behavior: nonnegative entries, zero weight on
    /// `U` without a detector, normalized tables and no signaling.
    pub fn from_fn(
        f: impl Fn(Setting, Setting, Outcome, Outcome) -> f64,
    ) -> Result<Self, NonlocalityError> {
        let mut cells: Cells = Default::default();
        for s1 in Setting::ALL {
            for s2 in Setting::ALL {
                for o1 in Outcome::ALL {
                    for o2 in Outcome::ALL {
                        let v = f(s1, s2, o1, o2);
                        let at = || format!("({s1}, {s2}, {o1:?}, {o2:?})");
                        if !v.is_finite() || v < -NORMALIZATION_TOL {
                            return Err(NonlocalityError::BadProbability { value: v, at: at() });
                        }
                        let admissible = s1.outcomes().contains(&o1) && s2.outcomes().contains(&o2);
                        if !admissible && v > NORMALIZATION_TOL {
                            return Err(NonlocalityError::ImpossibleOutcome(at()));
                        }
                        cells[s1.index()][s2.index()][o1.index()][o2.index()] =
                            if admissible { v.max(0.0) } else { 0.0 };
                    }
                }
            }
        }
        let table = Self { cells };
        for s1 in Setting::ALL {
            for s2 in Setting::ALL {
                let sum = table.setting_total(s1, s2);
                if (sum - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(NonlocalityError::NotNormalized(s1, s2, sum));
                }
            }
        }
        let residual = table.no_signaling_residual();
        if residual > FEASIBILITY_TOL {
            return Err(NonlocalityError::Signaling(residual));
        }
        Ok(table)
    }

    pub fn get(&self, s1: Setting, s2: Setting, o1: Outcome, o2: Outcome) -> f64 {
        self.cells[s1.index()][s2.index()][o1.index()][o2.index()]
    }

    fn setting_total(&self, s1: Setting, s2: Setting) -> f64 {
        self.cells[s1.index()][s2.index()].iter().flatten().sum()
    }

    /// Sum of `p(o1, o2 | s1, s2)` over the outcome pairs accepted by `pred`.
    pub fn event(&self, s1: Setting, s2: Setting, pred: impl Fn(Outcome, Outcome) -> bool) -> f64 {
        let mut total = 0.0;
        for &o1 in s1.outcomes() {
            for &o2 in s2.outcomes() {
                if pred(o1, o2) {
                    total += self.get(s1, s2, o1, o2);
                }
            }
        }
        total
    }

    /// Largest change of either side's marginal when the remote setting is
    /// switched.
    pub fn no_signaling_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for s in Setting::ALL {
            for &o in s.outcomes() {
                let first = |remote| self.event(s, remote, |a, _| a == o);
                let second = |remote| self.event(remote, s, |_, b| b == o);
                worst = worst
                    .max((first(Setting::UPresent) - first(Setting::UAbsent)).abs())
                    .max((second(Setting::UPresent) - second(Setting::UAbsent)).abs());
            }
        }
        worst
    }

    fn admissible_vector(&self) -> Vec<f64> {
        admissible_entries()
            .map(|(s1, s2, o1, o2)| self.get(s1, s2, o1, o2))
            .collect()
    }
}

/// Runs the phase-coupled pair under all four detector placements.
pub fn behavior_from_phase_setup(
    bs: &BeamSplitterParams,
    phi: f64,
) -> Result<BehaviorTable, NonlocalityError> {
    let mut tables = [[[[0.0; 3]; 3]; 2]; 2];
    for s1 in Setting::ALL {
        for s2 in Setting::ALL {
            let config =
                ExperimentConfig::phase(*bs, phi, s1 == Setting::UPresent, s2 == Setting::UPresent);
            let dist = run_phase(&config)?;
            for (label, p) in dist.iter() {
                let crate::state::Label::Pair(a, b) = label else {
                    unreachable!("phase coupling never produces annihilation radiation")
                };
                let (Some(o1), Some(o2)) = (Outcome::from_port(a), Outcome::from_port(b)) else {
                    unreachable!("phase setup ends on U, C or D on both sides")
                };
                tables[s1.index()][s2.index()][o1.index()][o2.index()] += p;
            }
        }
    }
    BehaviorTable::from_fn(|s1, s2, o1, o2| tables[s1.index()][s2.index()][o1.index()][o2.index()])
}

/// The four terms of the inequality and their combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellTerms {
    pub p_u1u2: f64,
    pub p_u1_notc2: f64,
    pub p_notc1_u2: f64,
    pub p_c1c2: f64,
    pub violation: f64,
}

pub fn bell_terms(behavior: &BehaviorTable) -> BellTerms {
    use Outcome::*;
    use Setting::*;
    let p_u1u2 = behavior.get(UPresent, UPresent, U, U);
    let p_u1_notc2 = behavior.event(UPresent, UAbsent, |a, b| a == U && b != C);
    let p_notc1_u2 = behavior.event(UAbsent, UPresent, |a, b| a != C && b == U);
    let p_c1c2 = behavior.get(UAbsent, UAbsent, C, C);
    BellTerms {
        p_u1u2,
        p_u1_notc2,
        p_notc1_u2,
        p_c1c2,
        violation: p_u1u2 - p_u1_notc2 - p_notc1_u2 - p_c1c2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellReport {
    pub p_u1u2: f64,
    pub p_u1_notc2: f64,
    pub p_notc1_u2: f64,
    pub p_c1c2: f64,
    pub violation: f64,
    pub lhv_feasible: bool,
}

/// Evaluates the inequality and decides local-polytope membership.
pub fn bell_violation(behavior: &BehaviorTable) -> Result<BellReport, NonlocalityError> {
    let t = bell_terms(behavior);
    let lhv_feasible = lhv_membership(behavior)?.is_feasible();
    Ok(BellReport {
        p_u1u2: t.p_u1u2,
        p_u1_notc2: t.p_u1_notc2,
        p_notc1_u2: t.p_notc1_u2,
        p_c1c2: t.p_c1c2,
        violation: t.violation,
        lhv_feasible,
    })
}

/// One side's response function: a fixed outcome per setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct LocalStrategy {
    pub when_present: Outcome,
    pub when_absent: Outcome,
}

impl LocalStrategy {
    pub fn all() -> Vec<LocalStrategy> {
        let mut out = Vec::with_capacity(6);
        for &when_present in Setting::UPresent.outcomes() {
            for &when_absent in Setting::UAbsent.outcomes() {
                out.push(LocalStrategy {
                    when_present,
                    when_absent,
                });
            }
        }
        out
    }

    pub fn respond(&self, setting: Setting) -> Outcome {
        match setting {
            Setting::UPresent => self.when_present,
            Setting::UAbsent => self.when_absent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct DeterministicStrategy {
    pub first: LocalStrategy,
    pub second: LocalStrategy,
}

impl DeterministicStrategy {
    pub fn behavior(&self) -> BehaviorTable {
        BehaviorTable::from_fn(|s1, s2, o1, o2| {
            if self.first.respond(s1) == o1 && self.second.respond(s2) == o2 {
                1.0
            } else {
                0.0
            }
        })
        .expect("deterministic behaviors are valid")
    }
}

/// The 36 vertices of the local polytope.
pub fn enumerate_deterministic_strategies() -> Vec<DeterministicStrategy> {
    let locals = LocalStrategy::all();
    locals
        .iter()
        .flat_map(|&first| {
            locals
                .iter()
                .map(move |&second| DeterministicStrategy { first, second })
        })
        .collect()
}

/// Linear functional on behaviors that separates the input from every local
/// behavior: nonpositive on all deterministic strategies, positive on the
/// input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparatingFunctional {
    /// One coefficient per entry of [`admissible_entries`].
    pub coefficients: Vec<f64>,
    /// Value of the functional on the input behavior.
    pub value: f64,
}

impl SeparatingFunctional {
    pub fn evaluate(&self, behavior: &BehaviorTable) -> f64 {
        self.coefficients
            .iter()
            .zip(behavior.admissible_vector())
            .map(|(c, p)| c * p)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum LhvVerdict {
    Feasible {
        /// Strategies with nonzero weight.
        weights: Vec<(DeterministicStrategy, f64)>,
        /// Largest entrywise deviation of the recombined behavior.
        residual: f64,
    },
    Infeasible {
        certificate: SeparatingFunctional,
    },
}

impl LhvVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LhvVerdict::Feasible { .. })
    }
}

/// Decides whether the behavior is a convex combination of deterministic
/// strategies, within [`FEASIBILITY_TOL`].
pub fn lhv_membership(behavior: &BehaviorTable) -> Result<LhvVerdict, NonlocalityError> {
    let strategies = enumerate_deterministic_strategies();
    let columns: Vec<Vec<f64>> = strategies
        .iter()
        .map(|s| s.behavior().admissible_vector())
        .collect();
    let b = behavior.admissible_vector();
    // One row per admissible entry. Normalization of the weights follows
    // from normalization of every setting table.
    let a: Vec<Vec<f64>> = (0..b.len())
        .map(|i| columns.iter().map(|col| col[i]).collect())
        .collect();
    let outcome = solve_feasibility(&a, &b, FEASIBILITY_TOL)?;
    Ok(match outcome.feasibility {
        Feasibility::Feasible { x, residual } => LhvVerdict::Feasible {
            weights: strategies
                .into_iter()
                .zip(x)
                .filter(|(_, w)| *w > 0.0)
                .collect(),
            residual,
        },
        Feasibility::Infeasible { certificate, gap } => LhvVerdict::Infeasible {
            certificate: SeparatingFunctional {
                coefficients: certificate,
                value: gap,
            },
        },
    })
}

/// Probabilities of a set of logical statements.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogicalStatementSet {
    probabilities: Vec<f64>,
}

impl LogicalStatementSet {
    pub fn new(probabilities: Vec<f64>) -> Result<Self, NonlocalityError> {
        if probabilities.is_empty() {
            return Err(NonlocalityError::EmptyStatementSet);
        }
        if let Some(&p) = probabilities
            .iter()
            .find(|p| !(p.is_finite() && (0.0..=1.0).contains(*p)))
        {
            return Err(NonlocalityError::StatementOutOfRange(p));
        }
        Ok(Self { probabilities })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// The statements `U1 & U2`, `!(U1 & !C2)`, `!(!C1 & U2)`, `!(C1 & C2)`,
    /// each read off the experiment where it is testable.
    pub fn hardy_statements(behavior: &BehaviorTable) -> Self {
        let t = bell_terms(behavior);
        let clamp = |p: f64| p.clamp(0.0, 1.0);
        Self {
            probabilities: vec![
                clamp(t.p_u1u2),
                clamp(1.0 - t.p_u1_notc2),
                clamp(1.0 - t.p_notc1_u2),
                clamp(1.0 - t.p_c1c2),
            ],
        }
    }
}

/// `sum p(S_n) - (N - 1)`. A positive value means the statements cannot all
/// hold jointly with the observed frequencies.
pub fn logical_inequality(statements: &LogicalStatementSet) -> f64 {
    let n = statements.probabilities.len() as f64;
    statements.probabilities.iter().sum::<f64>() - (n - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardyConstants {
    /// Largest probability of the paradox for two qubits, `(5 sqrt 5 - 11) / 2`.
    pub qubit_max: f64,
    /// Golden mean to the power -5.
    pub golden_inverse_fifth: f64,
    pub golden_check: bool,
    /// `r^4` at the tuned phase-coupled point, `(3 - 2 sqrt 2) / 2`.
    pub tuned_phase_probability: f64,
}

pub fn hardy_constants() -> HardyConstants {
    let sqrt5 = 5f64.sqrt();
    let qubit_max = (5.0 * sqrt5 - 11.0) / 2.0;
    let tau = (1.0 + sqrt5) / 2.0;
    let golden_inverse_fifth = tau.powi(-5);
    HardyConstants {
        qubit_max,
        golden_inverse_fifth,
        golden_check: (qubit_max - golden_inverse_fifth).abs() < 1e-12,
        tuned_phase_probability: (3.0 - 2.0 * SQRT_2) / 2.0,
    }
}
