//! Exact-amplitude simulation of coupled Mach-Zehnder interferometers.
//!
//! Two interferometers, each tuned so that one output stays dark, are coupled
//! either by annihilation on overlapping arms or by a joint phase on a pair of
//! arms. The crate reproduces the resulting Hardy-type paradox, evaluates the
//! associated Bell inequality, decides local-hidden-variable feasibility with
//! a small linear program and maps the violation over the beamsplitter
//! reflectivity and the coupling phase.

pub mod exploration;
pub mod interferometry;
pub mod lp;
pub mod nonlocality;
pub mod state;

pub use exploration::{
    find_dark_port_tuning, find_max_violation, max_violation_at_phi, sweep, Optimum, SweepCell,
    SweepGrid,
};
pub use interferometry::{
    dark_port_coefficient, ev_retest_efficiency, gravity_phase, run_annihilation, run_ev,
    run_phase, CouplingKind, ExperimentConfig, GravityParams,
};
pub use nonlocality::{
    behavior_from_phase_setup, bell_violation, enumerate_deterministic_strategies, hardy_constants,
    lhv_membership, logical_inequality, BehaviorTable, BellReport, DeterministicStrategy,
    HardyConstants, LhvVerdict, LogicalStatementSet,
};
pub use state::{
    Arm, BeamSplitterParams, ComplexAmp, JointState, Label, OutcomeDistribution, Particle, Port,
    Sink,
};
