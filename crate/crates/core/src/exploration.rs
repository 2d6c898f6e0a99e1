//! Sweeps and optimization of the Bell violation over `(r, phi)`.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::nonlocality::{behavior_from_phase_setup, bell_terms, NonlocalityError};
use crate::state::BeamSplitterParams;

/// Reflection amplitudes the optimizer may visit.
pub const R_CLAMP: (f64, f64) = (1e-3, 1.0 - 1e-3);
/// Middle terms of the inequality must vanish to this level in every cell.
pub const MIDDLE_TERM_TOL: f64 = 1e-12;
const MAX_PASSES: usize = 200;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExplorationError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("refine tolerance must be at least 1e-10, got {0}")]
    RefineTolerance(f64),
    #[error("middle terms do not vanish at r={r}, phi={phi}: {value:e}")]
    MiddleTerm { r: f64, phi: f64, value: f64 },
    #[error(transparent)]
    Nonlocality(#[from] NonlocalityError),
}

/// Rectangular grid. `r` samples include both ends; `phi` samples cover the
/// half-open range `[phi_min, phi_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub r_steps: usize,
    pub phi_min: f64,
    pub phi_max: f64,
    pub phi_steps: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            r_min: 0.05,
            r_max: 0.95,
            r_steps: 200,
            phi_min: 0.0,
            phi_max: TAU,
            phi_steps: 200,
        }
    }
}

impl SweepGrid {
    pub fn new(
        r_min: f64,
        r_max: f64,
        r_steps: usize,
        phi_min: f64,
        phi_max: f64,
        phi_steps: usize,
    ) -> Result<Self, ExplorationError> {
        let grid = Self {
            r_min,
            r_max,
            r_steps,
            phi_min,
            phi_max,
            phi_steps,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), ExplorationError> {
        let bad = |m: String| Err(ExplorationError::InvalidGrid(m));
        if self.r_steps < 2 || self.phi_steps < 2 {
            return bad(format!(
                "need at least 2 steps per axis, got {}x{}",
                self.r_steps, self.phi_steps
            ));
        }
        if !(self.r_min > 0.0 && self.r_max < 1.0 && self.r_min < self.r_max) {
            return bad(format!(
                "r range [{}, {}] must be increasing and inside (0, 1)",
                self.r_min, self.r_max
            ));
        }
        if !(self.phi_min.is_finite() && self.phi_max.is_finite() && self.phi_min < self.phi_max) {
            return bad(format!(
                "phi range [{}, {}) must be finite and increasing",
                self.phi_min, self.phi_max
            ));
        }
        Ok(())
    }

    pub fn r_step(&self) -> f64 {
        (self.r_max - self.r_min) / (self.r_steps - 1) as f64
    }

    pub fn phi_step(&self) -> f64 {
        (self.phi_max - self.phi_min) / self.phi_steps as f64
    }

    pub fn r_at(&self, i: usize) -> f64 {
        if i + 1 == self.r_steps {
            self.r_max
        } else {
            self.r_min + i as f64 * self.r_step()
        }
    }

    pub fn phi_at(&self, j: usize) -> f64 {
        self.phi_min + j as f64 * self.phi_step()
    }

    pub fn len(&self) -> usize {
        self.r_steps * self.phi_steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCell {
    pub r: f64,
    pub phi: f64,
    pub p_u1u2: f64,
    pub p_c1c2: f64,
    pub violation: f64,
}

/// Simulates all four experiments at one point.
pub fn evaluate(r: f64, phi: f64) -> Result<SweepCell, ExplorationError> {
    let bs = BeamSplitterParams::from_reflection(r)
        .map_err(|e| ExplorationError::InvalidGrid(e.to_string()))?;
    let terms = bell_terms(&behavior_from_phase_setup(&bs, phi)?);
    let middle = terms.p_u1_notc2.max(terms.p_notc1_u2);
    if middle > MIDDLE_TERM_TOL {
        return Err(ExplorationError::MiddleTerm {
            r,
            phi,
            value: middle,
        });
    }
    Ok(SweepCell {
        r,
        phi,
        p_u1u2: terms.p_u1u2,
        p_c1c2: terms.p_c1c2,
        violation: terms.violation,
    })
}

/// One cell per grid point, row-major in `r` then `phi`. Cells are evaluated
/// in parallel; the output order does not depend on scheduling.
pub fn sweep(grid: &SweepGrid) -> Result<Vec<SweepCell>, ExplorationError> {
    grid.validate()?;
    (0..grid.len())
        .into_par_iter()
        .map(|k| {
            evaluate(
                grid.r_at(k / grid.phi_steps),
                grid.phi_at(k % grid.phi_steps),
            )
        })
        .collect()
}

/// First cell with the largest violation.
pub fn argmax(cells: &[SweepCell]) -> Option<&SweepCell> {
    cells
        .iter()
        .fold(None, |best: Option<&SweepCell>, c| match best {
            Some(b) if b.violation >= c.violation => Some(b),
            _ => Some(c),
        })
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`, stopping when
/// the bracket is narrower than `tol`. Returns the best point evaluated.
pub fn golden_section_max(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Optimum {
    pub r_star: f64,
    pub phi_star: f64,
    pub violation_star: f64,
    /// Coordinate passes performed after the grid scan.
    pub iterations: usize,
    /// The optimum sits on the edge of the search region.
    pub boundary: bool,
    /// Parameter changes fell below the requested tolerance.
    pub converged: bool,
}

fn objective(r: f64, phi: f64) -> f64 {
    evaluate(r, phi).map_or(f64::NEG_INFINITY, |c| c.violation)
}

/// Grid scan followed by alternating golden-section refinement of `r` and
/// `phi`. A refinement step is kept only if it does not lower the violation.
pub fn find_max_violation(grid: &SweepGrid, refine_tol: f64) -> Result<Optimum, ExplorationError> {
    if refine_tol.is_nan() || refine_tol < 1e-10 {
        return Err(ExplorationError::RefineTolerance(refine_tol));
    }
    let cells = sweep(grid)?;
    let best = *argmax(&cells).expect("validated grids are non-empty");
    let r_bounds = (grid.r_min.max(R_CLAMP.0), grid.r_max.min(R_CLAMP.1));
    let phi_bounds = (grid.phi_min, grid.phi_max);
    let (h_r, h_phi) = (grid.r_step(), grid.phi_step());

    let (mut r, mut phi, mut v) = (
        best.r.clamp(r_bounds.0, r_bounds.1),
        best.phi,
        best.violation,
    );
    if r != best.r {
        v = objective(r, phi);
    }
    let line_tol = refine_tol / 4.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_PASSES {
        iterations += 1;
        let (r_old, phi_old) = (r, phi);

        let lo = (r - h_r).max(r_bounds.0);
        let hi = (r + h_r).min(r_bounds.1);
        let (r_new, v_new) = golden_section_max(|x| objective(x, phi), lo, hi, line_tol);
        if v_new >= v {
            r = r_new;
            v = v_new;
        }

        let lo = (phi - h_phi).max(phi_bounds.0);
        let hi = (phi + h_phi).min(phi_bounds.1);
        let (phi_new, v_new) = golden_section_max(|x| objective(r, x), lo, hi, line_tol);
        if v_new >= v {
            phi = phi_new;
            v = v_new;
        }

        if (r - r_old).abs() < refine_tol && (phi - phi_old).abs() < refine_tol {
            converged = true;
            break;
        }
    }
    let edge = 4.0 * refine_tol;
    let boundary = r - r_bounds.0 <= edge
        || r_bounds.1 - r <= edge
        || phi - phi_bounds.0 <= edge
        || phi_bounds.1 - phi <= edge;
    Ok(Optimum {
        r_star: r,
        phi_star: phi,
        violation_star: v,
        iterations,
        boundary,
        converged,
    })
}

/// Best reflection amplitude for a fixed coupling phase, by a scan over the
/// clamped `r` range and golden-section refinement around the best sample.
pub fn max_violation_at_phi(phi: f64, refine_tol: f64) -> Result<SweepCell, ExplorationError> {
    const SAMPLES: usize = 500;
    let step = (R_CLAMP.1 - R_CLAMP.0) / (SAMPLES - 1) as f64;
    let cells = (0..SAMPLES)
        .map(|i| evaluate(R_CLAMP.0 + i as f64 * step, phi))
        .collect::<Result<Vec<_>, _>>()?;
    let best = argmax(&cells).expect("non-empty scan");
    let lo = (best.r - step).max(R_CLAMP.0);
    let hi = (best.r + step).min(R_CLAMP.1);
    let (r, v) = golden_section_max(|x| objective(x, phi), lo, hi, refine_tol);
    if v >= best.violation {
        evaluate(r, phi)
    } else {
        Ok(*best)
    }
}

/// Reflection amplitude `r` at which both `C` detectors never fire together,
/// if one exists. The dark-port amplitude is `A + B e^{i phi}` with
/// `A = 1 - t^4 > 0` and `B = t^4 > 0`, so it can only vanish when
/// `e^{i phi} = -1`; then `A = B` is solved by bisection in `r^2`.
pub fn find_dark_port_tuning(phi: f64) -> Option<f64> {
    if !phi.is_finite() {
        return None;
    }
    let wrapped = phi.rem_euclid(TAU);
    if (wrapped - PI).abs() > 1e-9 {
        return None;
    }
    // Real part of the amplitude as a function of x = r^2.
    let cos = wrapped.cos();
    let real = |x: f64| {
        let t4 = (1.0 - x) * (1.0 - x);
        (1.0 - t4) + t4 * cos
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    if real(lo) * real(hi) > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if real(lo) * real(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    Some((0.5 * (lo + hi)).sqrt())
}
