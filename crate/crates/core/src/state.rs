//! Exact complex-amplitude state of one or two particles travelling through
//! Mach-Zehnder interferometers.
//!
//! A [`JointState`] is a sparse map from joint labels to amplitudes. Each
//! particle carries a [`Port`]; single-particle states use [`Port::None`] for
//! the second slot. Annihilation radiation is the joint sink [`Label::Gamma`].
//!
//! Beamsplitter conventions (a factor `i` on every reflection):
//!
//! ```text
//! BS1:  |s> -> i r |u> + t |v>
//! BS2:  |u> -> r |c> + i t |d>
//!       |v> -> i t |c> + r |d>
//! ```

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

pub type ComplexAmp = Complex64;

/// Amplitudes with magnitude below this are dropped after every operation.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Tolerance on `t^2 + r^2 = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("invalid beamsplitter parameters t={t}, r={r}: {reason}")]
    InvalidBeamSplitter {
        t: f64,
        r: f64,
        reason: &'static str,
    },
    #[error("{op} applied to particle {particle} carrying amplitude on port {port}")]
    UnexpectedPort {
        op: &'static str,
        particle: Particle,
        port: Port,
    },
    #[error("{op} applied to a state holding annihilation radiation")]
    UnexpectedGamma { op: &'static str },
    #[error("cannot measure: amplitude remains on non-terminal port {0}")]
    NotTerminal(Port),
}

/// Per-particle path or detector label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Port {
    /// Source, before the first beamsplitter.
    S,
    /// Arm `u` between the beamsplitters.
    U,
    /// Arm `v` between the beamsplitters.
    V,
    /// Bright output detector.
    C,
    /// Dark output detector.
    D,
    /// Absorbed by a detector placed in arm `u`.
    AbsorbedU,
    /// Absorbed by a bomb trigger.
    Exploded,
    /// Empty slot of a single-particle state.
    None,
}

impl Port {
    pub const ALL: [Port; 8] = [
        Port::S,
        Port::U,
        Port::V,
        Port::C,
        Port::D,
        Port::AbsorbedU,
        Port::Exploded,
        Port::None,
    ];

    pub fn is_internal(self) -> bool {
        matches!(self, Port::U | Port::V)
    }

    pub fn is_sink(self) -> bool {
        matches!(self, Port::AbsorbedU | Port::Exploded)
    }

    /// Labels allowed in a measured state.
    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            Port::C | Port::D | Port::AbsorbedU | Port::Exploded | Port::None
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Port::S => "s",
            Port::U => "u",
            Port::V => "v",
            Port::C => "c",
            Port::D => "d",
            Port::AbsorbedU => "absorbed_u",
            Port::Exploded => "exploded",
            Port::None => "none",
        }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Joint basis label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Pair(Port, Port),
    /// Both particles annihilated into radiation.
    Gamma,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Pair(a, Port::None) => write!(f, "{a}"),
            Label::Pair(a, b) => write!(f, "{a},{b}"),
            Label::Gamma => f.write_str("gamma"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Particle {
    First,
    Second,
}

impl Particle {
    pub fn index(self) -> usize {
        match self {
            Particle::First => 1,
            Particle::Second => 2,
        }
    }

    fn port(self, a: Port, b: Port) -> Port {
        match self {
            Particle::First => a,
            Particle::Second => b,
        }
    }

    fn with_port(self, a: Port, b: Port, p: Port) -> Label {
        match self {
            Particle::First => Label::Pair(p, b),
            Particle::Second => Label::Pair(a, p),
        }
    }
}

impl fmt::Display for Particle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Internal arm of an interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Arm {
    U,
    V,
}

impl Arm {
    fn port(self) -> Port {
        match self {
            Arm::U => Port::U,
            Arm::V => Port::V,
        }
    }
}

/// Where an absorbed particle ends up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sink {
    AbsorbedU,
    Exploded,
}

impl Sink {
    fn port(self) -> Port {
        match self {
            Sink::AbsorbedU => Port::AbsorbedU,
            Sink::Exploded => Port::Exploded,
        }
    }
}

/// Real transmission and reflection amplitudes of the first beamsplitter.
/// The second beamsplitter swaps their roles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeamSplitterParams {
    t: f64,
    r: f64,
}

impl BeamSplitterParams {
    pub fn new(t: f64, r: f64) -> Result<Self, StateError> {
        let invalid = |reason| StateError::InvalidBeamSplitter { t, r, reason };
        if !t.is_finite() || !r.is_finite() {
            return Err(invalid("non-finite amplitude"));
        }
        if !(t > 0.0 && t < 1.0 && r > 0.0 && r < 1.0) {
            return Err(invalid("t and r must lie in (0, 1)"));
        }
        if (t * t + r * r - 1.0).abs() > NORMALIZATION_TOL {
            return Err(invalid("t^2 + r^2 must equal 1"));
        }
        Ok(Self { t, r })
    }

    /// Builds the pair from the reflection amplitude, with `t = sqrt(1 - r^2)`.
    pub fn from_reflection(r: f64) -> Result<Self, StateError> {
        if !r.is_finite() || !(r > 0.0 && r < 1.0) {
            return Err(StateError::InvalidBeamSplitter {
                t: f64::NAN,
                r,
                reason: "t and r must lie in (0, 1)",
            });
        }
        Self::new((1.0 - r * r).sqrt(), r)
    }

    /// Builds the pair from the reflectance `r^2`.
    pub fn from_reflectance(r2: f64) -> Result<Self, StateError> {
        if !r2.is_finite() || !(r2 > 0.0 && r2 < 1.0) {
            return Err(StateError::InvalidBeamSplitter {
                t: f64::NAN,
                r: r2.sqrt(),
                reason: "t and r must lie in (0, 1)",
            });
        }
        Self::new((1.0 - r2).sqrt(), r2.sqrt())
    }

    pub fn balanced() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self { t: h, r: h }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Image of `|s>` under the first beamsplitter, on `(|u>, |v>)`.
    pub fn bs1_column(&self) -> [ComplexAmp; 2] {
        [I * self.r, Complex64::from(self.t)]
    }

    /// 2x2 map of the second beamsplitter, rows `(c, d)`, columns `(u, v)`.
    pub fn bs2_matrix(&self) -> [[ComplexAmp; 2]; 2] {
        let (t, r) = (self.t, self.r);
        [[Complex64::from(r), I * t], [I * t, Complex64::from(r)]]
    }
}

/// Sparse superposition over joint labels.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    amps: BTreeMap<Label, ComplexAmp>,
}

impl JointState {
    /// One particle at the source.
    pub fn single() -> Self {
        Self::basis(Label::Pair(Port::S, Port::None))
    }

    /// Two particles, each at its source.
    pub fn pair() -> Self {
        Self::basis(Label::Pair(Port::S, Port::S))
    }

    pub fn basis(label: Label) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(label, Complex64::from(1.0));
        Self { amps }
    }

    /// Builds a state from raw amplitudes, merging repeated labels. No
    /// normalization is applied.
    pub fn from_amplitudes(it: impl IntoIterator<Item = (Label, ComplexAmp)>) -> Self {
        let mut amps = BTreeMap::new();
        for (label, a) in it {
            *amps.entry(label).or_insert(Complex64::from(0.0)) += a;
        }
        Self::pruned(amps)
    }

    fn pruned(mut amps: BTreeMap<Label, ComplexAmp>) -> Self {
        amps.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
        Self { amps }
    }

    pub fn amplitude(&self, label: Label) -> ComplexAmp {
        self.amps.get(&label).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Label, ComplexAmp)> + '_ {
        self.amps.iter().map(|(l, a)| (*l, *a))
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// Total squared norm, sinks included.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    /// Applies a single-particle linear map. `map` sends a port to a list of
    /// `(port, amplitude)` images and may reject the port.
    fn map_particle<F>(
        &self,
        particle: Particle,
        op: &'static str,
        map: F,
    ) -> Result<Self, StateError>
    where
        F: Fn(Port) -> Result<Vec<(Port, ComplexAmp)>, Port>,
    {
        let mut out = BTreeMap::new();
        for (&label, &amp) in &self.amps {
            match label {
                Label::Gamma => {
                    *out.entry(label).or_insert(Complex64::from(0.0)) += amp;
                }
                Label::Pair(a, b) => {
                    let images = map(particle.port(a, b))
                        .map_err(|port| StateError::UnexpectedPort { op, particle, port })?;
                    for (p, c) in images {
                        *out.entry(particle.with_port(a, b, p))
                            .or_insert(Complex64::from(0.0)) += c * amp;
                    }
                }
            }
        }
        Ok(Self::pruned(out))
    }

    /// First beamsplitter: `|s> -> i r |u> + t |v>` on the addressed particle.
    pub fn apply_bs1(
        &self,
        particle: Particle,
        bs: &BeamSplitterParams,
    ) -> Result<Self, StateError> {
        let [to_u, to_v] = bs.bs1_column();
        self.map_particle(particle, "bs1", |p| match p {
            Port::S => Ok(vec![(Port::U, to_u), (Port::V, to_v)]),
            other => Err(other),
        })
    }

    /// Second beamsplitter on the addressed particle. Sinks pass through.
    pub fn apply_bs2(
        &self,
        particle: Particle,
        bs: &BeamSplitterParams,
    ) -> Result<Self, StateError> {
        let m = bs.bs2_matrix();
        self.map_particle(particle, "bs2", |p| match p {
            Port::U => Ok(vec![(Port::C, m[0][0]), (Port::D, m[1][0])]),
            Port::V => Ok(vec![(Port::C, m[0][1]), (Port::D, m[1][1])]),
            p if p.is_sink() => Ok(vec![(p, Complex64::from(1.0))]),
            other => Err(other),
        })
    }

    /// Moves the addressed particle's amplitude on `arm` into `sink`, keeping
    /// the other particle's label.
    pub fn apply_absorber(
        &self,
        particle: Particle,
        arm: Arm,
        sink: Sink,
    ) -> Result<Self, StateError> {
        let target = arm.port();
        self.map_particle(particle, "absorber", |p| match p {
            p if p == target => Ok(vec![(sink.port(), Complex64::from(1.0))]),
            p if p.is_internal() || p.is_sink() => Ok(vec![(p, Complex64::from(1.0))]),
            other => Err(other),
        })
    }

    fn check_both_internal(&self, op: &'static str) -> Result<(), StateError> {
        for label in self.amps.keys() {
            match *label {
                Label::Gamma => return Err(StateError::UnexpectedGamma { op }),
                Label::Pair(a, b) => {
                    if !a.is_internal() {
                        return Err(StateError::UnexpectedPort {
                            op,
                            particle: Particle::First,
                            port: a,
                        });
                    }
                    if !b.is_internal() {
                        return Err(StateError::UnexpectedPort {
                            op,
                            particle: Particle::Second,
                            port: b,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// `|v>|v> -> e^{i phi} |v>|v>`; every other amplitude is left as is.
    pub fn apply_phase_coupling(&self, phi: f64) -> Result<Self, StateError> {
        self.check_both_internal("phase coupling")?;
        let phase = Complex64::from_polar(1.0, phi);
        let mut amps = self.amps.clone();
        if let Some(a) = amps.get_mut(&Label::Pair(Port::V, Port::V)) {
            *a *= phase;
        }
        Ok(Self::pruned(amps))
    }

    /// `|u>|u> -> |gamma>`.
    pub fn apply_annihilation_coupling(&self) -> Result<Self, StateError> {
        self.check_both_internal("annihilation coupling")?;
        let mut amps = self.amps.clone();
        if let Some(a) = amps.remove(&Label::Pair(Port::U, Port::U)) {
            *amps.entry(Label::Gamma).or_insert(Complex64::from(0.0)) += a;
        }
        Ok(Self::pruned(amps))
    }

    /// Born-rule readout. Every label must be terminal.
    pub fn measure(&self) -> Result<OutcomeDistribution, StateError> {
        let mut probabilities = BTreeMap::new();
        for (&label, amp) in &self.amps {
            if let Label::Pair(a, b) = label {
                for p in [a, b] {
                    if !p.is_terminal() {
                        return Err(StateError::NotTerminal(p));
                    }
                }
            }
            probabilities.insert(label, amp.norm_sqr());
        }
        Ok(OutcomeDistribution { probabilities })
    }
}

/// Probability table over joint terminal labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutcomeDistribution {
    probabilities: BTreeMap<Label, f64>,
}

impl OutcomeDistribution {
    pub fn probability(&self, label: Label) -> f64 {
        self.probabilities.get(&label).copied().unwrap_or(0.0)
    }

    /// Sum over two-particle labels matching `pred`. `Gamma` is excluded.
    pub fn probability_where(&self, pred: impl Fn(Port, Port) -> bool) -> f64 {
        self.probabilities
            .iter()
            .filter_map(|(l, p)| match *l {
                Label::Pair(a, b) if pred(a, b) => Some(*p),
                _ => None,
            })
            .fold(0.0, |acc, p| acc + p)
    }

    /// Marginal of one particle on `port`.
    pub fn marginal(&self, particle: Particle, port: Port) -> f64 {
        self.probability_where(|a, b| particle.port(a, b) == port)
    }

    pub fn total(&self) -> f64 {
        self.probabilities.values().fold(0.0, |acc, p| acc + p)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Label, f64)> + '_ {
        self.probabilities.iter().map(|(l, p)| (*l, *p))
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}
