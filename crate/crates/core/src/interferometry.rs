//! The three setups built from the state engine: a single Elitzur-Vaidman
//! interferometer, the annihilation-coupled pair and the phase-coupled pair.
//!
//! Wiring is fixed per setup. Annihilation couples the two `u` arms, phase
//! coupling acts on the two `v` arms, and optional `U` detectors always sit on
//! the `u` arms. A particle that is not absorbed still passes the second
//! beamsplitter on its side.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::state::{
    Arm, BeamSplitterParams, ComplexAmp, JointState, OutcomeDistribution, Particle, Port, Sink,
};

/// Newtonian constant of gravitation (CODATA 2018), m^3 kg^-1 s^-2.
pub const GRAVITATIONAL_CONSTANT: f64 = 6.674_30e-11;
/// Reduced Planck constant (CODATA 2018), J s.
pub const REDUCED_PLANCK: f64 = 1.054_571_817e-34;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("{setup} setup requires {expected} coupling, got {found:?}")]
    WrongCoupling {
        setup: &'static str,
        expected: &'static str,
        found: CouplingKind,
    },
    #[error("coupling phase must be finite, got {0}")]
    NonFinitePhase(f64),
    #[error("gravity parameter {name} must be finite and strictly positive, got {value}")]
    InvalidGravity { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingKind {
    None,
    Annihilation,
    Phase { phi: f64 },
}

impl CouplingKind {
    /// Coupling phase wrapped to `[0, 2pi)`, for reporting.
    pub fn normalized_phi(&self) -> Option<f64> {
        match *self {
            CouplingKind::Phase { phi } => Some(phi.rem_euclid(TAU)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub bs: BeamSplitterParams,
    pub coupling: CouplingKind,
    /// `U` detector in arm `u` of the first interferometer.
    pub u_detector_1: bool,
    /// `U` detector in arm `u` of the second interferometer.
    pub u_detector_2: bool,
}

impl ExperimentConfig {
    pub fn annihilation(bs: BeamSplitterParams, u_detector_1: bool, u_detector_2: bool) -> Self {
        Self {
            bs,
            coupling: CouplingKind::Annihilation,
            u_detector_1,
            u_detector_2,
        }
    }

    pub fn phase(bs: BeamSplitterParams, phi: f64, u_detector_1: bool, u_detector_2: bool) -> Self {
        Self {
            bs,
            coupling: CouplingKind::Phase { phi },
            u_detector_1,
            u_detector_2,
        }
    }
}

/// Single interferometer, with or without a bomb whose trigger sits in arm `u`.
pub fn run_ev(bs: &BeamSplitterParams, bomb_present: bool) -> OutcomeDistribution {
    let p = Particle::First;
    let mut state = JointState::single().apply_bs1(p, bs).expect("fresh source");
    if bomb_present {
        state = state
            .apply_absorber(p, Arm::U, Sink::Exploded)
            .expect("absorber after BS1");
    }
    state
        .apply_bs2(p, bs)
        .and_then(|s| s.measure())
        .expect("BS2 after BS1 yields terminal ports")
}

/// Fraction of triggered bombs eventually certified without exploding when
/// every `C` click is retested: `t^2 r^2 / (1 - t^4) = t^2 / (1 + t^2)`.
pub fn ev_retest_efficiency(bs: &BeamSplitterParams) -> f64 {
    let t2 = bs.t() * bs.t();
    t2 / (1.0 + t2)
}

fn run_pair(config: &ExperimentConfig) -> JointState {
    let bs = &config.bs;
    let (a, b) = (Particle::First, Particle::Second);
    let mut state = JointState::pair()
        .apply_bs1(a, bs)
        .and_then(|s| s.apply_bs1(b, bs))
        .expect("fresh sources");
    state = match config.coupling {
        CouplingKind::None => Ok(state),
        CouplingKind::Annihilation => state.apply_annihilation_coupling(),
        CouplingKind::Phase { phi } => state.apply_phase_coupling(phi),
    }
    .expect("coupling directly after BS1");
    for (particle, placed) in [(a, config.u_detector_1), (b, config.u_detector_2)] {
        if placed {
            state = state
                .apply_absorber(particle, Arm::U, Sink::AbsorbedU)
                .expect("absorber on internal arms");
        }
    }
    state
        .apply_bs2(a, bs)
        .and_then(|s| s.apply_bs2(b, bs))
        .expect("BS2 on internal arms and sinks")
}

/// Runs the annihilation-coupled pair. Outcomes include the `gamma` sink.
pub fn run_annihilation(config: &ExperimentConfig) -> Result<OutcomeDistribution, ExperimentError> {
    if config.coupling != CouplingKind::Annihilation {
        return Err(ExperimentError::WrongCoupling {
            setup: "annihilation",
            expected: "annihilation",
            found: config.coupling,
        });
    }
    Ok(run_pair(config).measure().expect("terminal after BS2"))
}

/// Final joint state of the phase-coupled pair, before readout.
pub fn phase_final_state(config: &ExperimentConfig) -> Result<JointState, ExperimentError> {
    match config.coupling {
        CouplingKind::Phase { phi } if phi.is_finite() => Ok(run_pair(config)),
        CouplingKind::Phase { phi } => Err(ExperimentError::NonFinitePhase(phi)),
        found => Err(ExperimentError::WrongCoupling {
            setup: "phase",
            expected: "phase",
            found,
        }),
    }
}

/// Runs the phase-coupled pair.
pub fn run_phase(config: &ExperimentConfig) -> Result<OutcomeDistribution, ExperimentError> {
    Ok(phase_final_state(config)?
        .measure()
        .expect("terminal after BS2"))
}

/// Closed form of the `|c1>|c2>` amplitude with no detectors placed:
/// `-(r^4 + 2 r^2 t^2 + t^4 e^{i phi})`.
pub fn dark_port_coefficient(bs: &BeamSplitterParams, phi: f64) -> ComplexAmp {
    let r2 = bs.r() * bs.r();
    let t2 = bs.t() * bs.t();
    -(Complex64::from(r2 * r2 + 2.0 * r2 * t2) + Complex64::from_polar(t2 * t2, phi))
}

/// Probability of the joint outcome `(first, second)`.
pub fn joint_probability(dist: &OutcomeDistribution, first: Port, second: Port) -> f64 {
    dist.probability_where(|a, b| a == first && b == second)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GravityParams {
    mass: f64,
    length: f64,
    distance: f64,
}

impl GravityParams {
    /// Mass in kg, interacting arm length and arm separation in metres.
    pub fn new(mass: f64, length: f64, distance: f64) -> Result<Self, ExperimentError> {
        for (name, value) in [("mass", mass), ("length", length), ("distance", distance)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ExperimentError::InvalidGravity { name, value });
            }
        }
        Ok(Self {
            mass,
            length,
            distance,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }
}

/// Gravitationally induced coupling phase `G m^2 L / (hbar d)`.
pub fn gravity_phase(g: &GravityParams) -> f64 {
    GRAVITATIONAL_CONSTANT * g.mass * g.mass * g.length / (REDUCED_PLANCK * g.distance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Label;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    const TOL: f64 = 1e-12;

    fn bs(r: f64) -> BeamSplitterParams {
        BeamSplitterParams::from_reflection(r).unwrap()
    }

    fn single(p: Port) -> Label {
        Label::Pair(p, Port::None)
    }

    #[test]
    fn ev_without_bomb_is_dark() {
        for r in [0.01, 0.4, 0.8] {
            let d = run_ev(&bs(r), false);
            assert!((d.probability(single(Port::C)) - 1.0).abs() < TOL);
            assert_eq!(d.probability(single(Port::D)), 0.0);
        }
    }

    #[test]
    fn ev_balanced_with_bomb() {
        let d = run_ev(&BeamSplitterParams::balanced(), true);
        assert!((d.probability(single(Port::D)) - 0.25).abs() < TOL);
        assert!((d.probability(single(Port::C)) - 0.25).abs() < TOL);
        assert!((d.probability(single(Port::Exploded)) - 0.5).abs() < TOL);
        assert!((d.total() - 1.0).abs() < TOL);
    }

    #[test]
    fn retest_efficiency_balanced_is_one_third() {
        let e = ev_retest_efficiency(&BeamSplitterParams::balanced());
        assert!((e - 1.0 / 3.0).abs() < TOL);
    }

    #[test]
    fn wrong_coupling_is_rejected() {
        let cfg = ExperimentConfig::phase(bs(0.5), 1.0, false, false);
        assert!(matches!(
            run_annihilation(&cfg),
            Err(ExperimentError::WrongCoupling { .. })
        ));
        let cfg = ExperimentConfig::annihilation(bs(0.5), false, false);
        assert!(run_phase(&cfg).is_err());
        let cfg = ExperimentConfig::phase(bs(0.5), f64::NAN, false, false);
        assert!(matches!(
            run_phase(&cfg),
            Err(ExperimentError::NonFinitePhase(_))
        ));
    }

    #[test]
    fn annihilation_experiments_balanced() {
        let p = BeamSplitterParams::balanced();
        let one = run_annihilation(&ExperimentConfig::annihilation(p, false, false)).unwrap();
        assert!((joint_probability(&one, Port::D, Port::D) - 1.0 / 16.0).abs() < TOL);
        assert!((one.probability(Label::Gamma) - 0.25).abs() < TOL);

        let four = run_annihilation(&ExperimentConfig::annihilation(p, true, true)).unwrap();
        assert_eq!(
            joint_probability(&four, Port::AbsorbedU, Port::AbsorbedU),
            0.0
        );

        let two = run_annihilation(&ExperimentConfig::annihilation(p, false, true)).unwrap();
        assert!(two.probability_where(|a, b| a == Port::D && b != Port::AbsorbedU) < TOL);

        let three = run_annihilation(&ExperimentConfig::annihilation(p, true, false)).unwrap();
        assert!(three.probability_where(|a, b| a != Port::AbsorbedU && b == Port::D) < TOL);
    }

    #[test]
    fn phase_tuned_point() {
        let p = BeamSplitterParams::from_reflectance((2.0 - SQRT_2) / 2.0).unwrap();
        let four = run_phase(&ExperimentConfig::phase(p, PI, false, false)).unwrap();
        assert!(joint_probability(&four, Port::C, Port::C) < TOL);
        let one = run_phase(&ExperimentConfig::phase(p, PI, true, true)).unwrap();
        let p_uu = joint_probability(&one, Port::AbsorbedU, Port::AbsorbedU);
        assert!((p_uu - (3.0 - 2.0 * SQRT_2) / 2.0).abs() < TOL);
        assert!((p_uu - 0.0857).abs() < 5e-4);
    }

    #[test]
    fn dark_port_coefficient_limits() {
        for r in [0.1, 0.5, 0.9] {
            let c = dark_port_coefficient(&bs(r), 0.0);
            assert!((c - Complex64::from(-1.0)).norm() < TOL);
        }
        let p = BeamSplitterParams::from_reflectance((2.0 - SQRT_2) / 2.0).unwrap();
        assert!(dark_port_coefficient(&p, PI).norm() < TOL);
    }

    #[test]
    fn dark_port_coefficient_matches_simulation() {
        for (r, phi) in [(0.2, 0.3), (FRAC_1_SQRT_2, 2.0), (0.93, 5.5)] {
            let cfg = ExperimentConfig::phase(bs(r), phi, false, false);
            let amp = phase_final_state(&cfg)
                .unwrap()
                .amplitude(Label::Pair(Port::C, Port::C));
            assert!((amp - dark_port_coefficient(&cfg.bs, phi)).norm() < TOL);
        }
    }

    #[test]
    fn gravity_scaling() {
        let base = gravity_phase(&GravityParams::new(1e-14, 1e-4, 1e-6).unwrap());
        let m2 = gravity_phase(&GravityParams::new(2e-14, 1e-4, 1e-6).unwrap());
        let l2 = gravity_phase(&GravityParams::new(1e-14, 2e-4, 1e-6).unwrap());
        let d2 = gravity_phase(&GravityParams::new(1e-14, 1e-4, 2e-6).unwrap());
        assert!((m2 / base - 4.0).abs() < TOL);
        assert!((l2 / base - 2.0).abs() < TOL);
        assert!((d2 / base - 0.5).abs() < TOL);
    }

    #[test]
    fn gravity_hand_arithmetic() {
        // 6.6743e-11 * 1e-28 * 1e-4 / (1.054571817e-34 * 1e-6)
        //   = 6.6743e-43 / 1.054571817e-40 = 6.328919...e-3
        let phi = gravity_phase(&GravityParams::new(1e-14, 1e-4, 1e-6).unwrap());
        let hand = 6.6743 / 1.054571817 * 1e-3;
        assert!((phi - hand).abs() < 1e-15);
        assert!((phi - 6.328_919e-3).abs() < 1e-9);
    }

    #[test]
    fn gravity_rejects_nonpositive() {
        assert!(GravityParams::new(0.0, 1.0, 1.0).is_err());
        assert!(GravityParams::new(1.0, -1.0, 1.0).is_err());
        assert!(GravityParams::new(1.0, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn normalized_phi_wraps() {
        let c = CouplingKind::Phase { phi: -PI / 2.0 };
        assert!((c.normalized_phi().unwrap() - 1.5 * PI).abs() < TOL);
        assert_eq!(CouplingKind::Annihilation.normalized_phi(), None);
    }
}
