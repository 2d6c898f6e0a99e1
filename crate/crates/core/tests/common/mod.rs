//! Test-only reference implementations, kept independent of the sparse
//! engine: a dense state vector over every joint label, and closed forms.

#![allow(dead_code)]

use mzi_paradox::{Arm, BeamSplitterParams, JointState, Label, Particle, Port, Sink};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::Rng;

pub const PORTS: [Port; 8] = [
    Port::S,
    Port::U,
    Port::V,
    Port::C,
    Port::D,
    Port::AbsorbedU,
    Port::Exploded,
    Port::None,
];
const N: usize = PORTS.len();
pub const DIM: usize = N * N + 1;
const GAMMA: usize = N * N;

fn port_index(p: Port) -> usize {
    PORTS.iter().position(|&q| q == p).unwrap()
}

pub fn label_index(label: Label) -> usize {
    match label {
        Label::Pair(a, b) => port_index(a) * N + port_index(b),
        Label::Gamma => GAMMA,
    }
}

pub fn all_labels() -> Vec<Label> {
    let mut out: Vec<Label> = PORTS
        .iter()
        .flat_map(|&a| PORTS.iter().map(move |&b| Label::Pair(a, b)))
        .collect();
    out.push(Label::Gamma);
    out
}

type Matrix = [[Complex64; N]; N];

fn identity() -> Matrix {
    let mut m = [[Complex64::new(0.0, 0.0); N]; N];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

fn set_column(m: &mut Matrix, from: Port, images: &[(Port, Complex64)]) {
    let c = port_index(from);
    for row in m.iter_mut() {
        row[c] = Complex64::new(0.0, 0.0);
    }
    for &(to, a) in images {
        m[port_index(to)][c] = a;
    }
}

/// Dense amplitude vector over all 65 joint labels.
#[derive(Clone, Debug)]
pub struct DenseState(pub Vec<Complex64>);

impl DenseState {
    pub fn basis(label: Label) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); DIM];
        v[label_index(label)] = Complex64::new(1.0, 0.0);
        Self(v)
    }

    fn apply_local(&self, particle: Particle, m: &Matrix) -> Self {
        let mut out = vec![Complex64::new(0.0, 0.0); DIM];
        out[GAMMA] = self.0[GAMMA];
        for a in 0..N {
            for b in 0..N {
                let amp = self.0[a * N + b];
                if amp == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..N {
                    match particle {
                        Particle::First => out[k * N + b] += m[k][a] * amp,
                        Particle::Second => out[a * N + k] += m[k][b] * amp,
                    }
                }
            }
        }
        Self(out)
    }

    pub fn bs1(&self, particle: Particle, t: f64, r: f64) -> Self {
        let mut m = identity();
        set_column(
            &mut m,
            Port::S,
            &[
                (Port::U, Complex64::new(0.0, r)),
                (Port::V, Complex64::new(t, 0.0)),
            ],
        );
        self.apply_local(particle, &m)
    }

    pub fn bs2(&self, particle: Particle, t: f64, r: f64) -> Self {
        let mut m = identity();
        set_column(
            &mut m,
            Port::U,
            &[
                (Port::C, Complex64::new(r, 0.0)),
                (Port::D, Complex64::new(0.0, t)),
            ],
        );
        set_column(
            &mut m,
            Port::V,
            &[
                (Port::C, Complex64::new(0.0, t)),
                (Port::D, Complex64::new(r, 0.0)),
            ],
        );
        self.apply_local(particle, &m)
    }

    pub fn absorb(&self, particle: Particle, arm: Port, sink: Port) -> Self {
        let mut m = identity();
        set_column(&mut m, arm, &[(sink, Complex64::new(1.0, 0.0))]);
        self.apply_local(particle, &m)
    }

    pub fn phase(&self, phi: f64) -> Self {
        let mut out = self.clone();
        out.0[label_index(Label::Pair(Port::V, Port::V))] *= Complex64::from_polar(1.0, phi);
        out
    }

    pub fn annihilate(&self) -> Self {
        let mut out = self.clone();
        let uu = label_index(Label::Pair(Port::U, Port::U));
        let moved = out.0[uu];
        out.0[GAMMA] += moved;
        out.0[uu] = Complex64::new(0.0, 0.0);
        out
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Coupling {
    None,
    Annihilation,
    Phase(f64),
}

/// A valid random pipeline: BS1 on every particle, optional coupling,
/// optional absorbers, optional BS2 on every particle.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub pair: bool,
    pub t: f64,
    pub r: f64,
    pub coupling: Coupling,
    pub absorbers: Vec<(Particle, Arm, Sink)>,
    pub finish: bool,
}

impl Pipeline {
    pub fn random(rng: &mut StdRng) -> Self {
        let pair = rng.random_bool(0.8);
        let r: f64 = rng.random_range(0.01..0.99);
        let t = (1.0 - r * r).sqrt();
        let coupling = if !pair {
            Coupling::None
        } else {
            match rng.random_range(0..3) {
                0 => Coupling::None,
                1 => Coupling::Annihilation,
                _ => Coupling::Phase(rng.random_range(-10.0..10.0)),
            }
        };
        let particles: &[Particle] = if pair {
            &[Particle::First, Particle::Second]
        } else {
            &[Particle::First]
        };
        let mut absorbers = Vec::new();
        for &p in particles {
            if rng.random_bool(0.5) {
                let arm = if rng.random_bool(0.7) { Arm::U } else { Arm::V };
                let sink = if rng.random_bool(0.5) {
                    Sink::AbsorbedU
                } else {
                    Sink::Exploded
                };
                absorbers.push((p, arm, sink));
            }
        }
        Self {
            pair,
            t,
            r,
            coupling,
            absorbers,
            finish: rng.random_bool(0.8),
        }
    }

    fn particles(&self) -> Vec<Particle> {
        if self.pair {
            vec![Particle::First, Particle::Second]
        } else {
            vec![Particle::First]
        }
    }

    pub fn run_sparse(&self) -> JointState {
        let bs = BeamSplitterParams::new(self.t, self.r).unwrap();
        let mut s = if self.pair {
            JointState::pair()
        } else {
            JointState::single()
        };
        for p in self.particles() {
            s = s.apply_bs1(p, &bs).unwrap();
        }
        s = match self.coupling {
            Coupling::None => s,
            Coupling::Annihilation => s.apply_annihilation_coupling().unwrap(),
            Coupling::Phase(phi) => s.apply_phase_coupling(phi).unwrap(),
        };
        for &(p, arm, sink) in &self.absorbers {
            s = s.apply_absorber(p, arm, sink).unwrap();
        }
        if self.finish {
            for p in self.particles() {
                s = s.apply_bs2(p, &bs).unwrap();
            }
        }
        s
    }

    pub fn run_dense(&self) -> DenseState {
        let start = if self.pair {
            Label::Pair(Port::S, Port::S)
        } else {
            Label::Pair(Port::S, Port::None)
        };
        let mut s = DenseState::basis(start);
        for p in self.particles() {
            s = s.bs1(p, self.t, self.r);
        }
        s = match self.coupling {
            Coupling::None => s,
            Coupling::Annihilation => s.annihilate(),
            Coupling::Phase(phi) => s.phase(phi),
        };
        for &(p, arm, sink) in &self.absorbers {
            let arm = match arm {
                Arm::U => Port::U,
                Arm::V => Port::V,
            };
            let sink = match sink {
                Sink::AbsorbedU => Port::AbsorbedU,
                Sink::Exploded => Port::Exploded,
            };
            s = s.absorb(p, arm, sink);
        }
        if self.finish {
            for p in self.particles() {
                s = s.bs2(p, self.t, self.r);
            }
        }
        s
    }
}

/// Largest amplitude difference between the engine and the dense oracle.
pub fn max_deviation(sparse: &JointState, dense: &DenseState) -> f64 {
    all_labels()
        .into_iter()
        .map(|l| (sparse.amplitude(l) - dense.0[label_index(l)]).norm())
        .fold(0.0, f64::max)
}

/// Bell violation at `phi = pi` from the closed-form amplitudes:
/// `r^4 - (r^4 + 2 r^2 t^2 - t^4)^2`.
pub fn closed_form_violation_at_pi(r: f64) -> f64 {
    let r2 = r * r;
    let t2 = 1.0 - r2;
    let amp = r2 * r2 + 2.0 * r2 * t2 - t2 * t2;
    r2 * r2 - amp * amp
}

/// Dense scan of the closed form at `phi = pi` with spacing `step`.
pub fn scan_argmax_at_pi(step: f64) -> (f64, f64) {
    let n = (1.0 / step) as usize;
    (1..n)
        .map(|i| {
            let r = i as f64 * step;
            (r, closed_form_violation_at_pi(r))
        })
        .fold((0.0, f64::NEG_INFINITY), |best, c| {
            if c.1 > best.1 {
                c
            } else {
                best
            }
        })
}

/// Retest protocol summed round by round: each round certifies with
/// probability `t^2 r^2`, sends the particle back on a `C` click with
/// probability `t^4` and explodes the bomb otherwise.
pub fn retest_rounds(t: f64, r: f64, rounds: usize) -> f64 {
    let detect = t * t * r * r;
    let again = t.powi(4);
    let mut alive = 1.0;
    let mut total = 0.0;
    for _ in 0..rounds {
        total += alive * detect;
        alive *= again;
    }
    total
}
