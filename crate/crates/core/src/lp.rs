//! Dense phase-one simplex for small feasibility problems
//! `A x = b, x >= 0`.
//!
//! Pivoting follows Bland's rule (lowest eligible index for both the entering
//! column and ratio-test ties), so the method terminates without cycling.
//! When the system is infeasible the optimal phase-one duals are returned as
//! a Farkas certificate `y` with `y^T A <= 0` and `y^T b > 0`.

use thiserror::Error;

/// Reduced costs and pivot elements smaller than this are treated as zero.
pub const PIVOT_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("constraint matrix has {rows} rows but right-hand side has {rhs}")]
    DimensionMismatch { rows: usize, rhs: usize },
    #[error("row {0} has a different length from row 0")]
    RaggedMatrix(usize),
    #[error("non-finite coefficient in the problem data")]
    NonFinite,
    #[error("simplex did not terminate within {0} pivots")]
    IterationLimit(usize),
    #[error("no admissible pivot row for entering column {0}")]
    Breakdown(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    /// A nonnegative `x` with `A x = b` up to the requested tolerance.
    Feasible { x: Vec<f64>, residual: f64 },
    /// `certificate^T A <= 0` column-wise while `certificate^T b = gap > 0`.
    Infeasible { certificate: Vec<f64>, gap: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phase1Outcome {
    pub feasibility: Feasibility,
    pub pivots: usize,
}

struct Tableau {
    rows: usize,
    structural: usize,
    /// `rows x (structural + rows)`, the current `B^-1 [A | I]`.
    body: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn cost(&self, col: usize) -> f64 {
        if col >= self.structural {
            1.0
        } else {
            0.0
        }
    }

    fn duals(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| {
                (0..self.rows)
                    .map(|k| self.cost(self.basis[k]) * self.body[k][self.structural + i])
                    .sum()
            })
            .collect()
    }

    fn reduced_cost(&self, col: usize) -> f64 {
        let z: f64 = (0..self.rows)
            .map(|k| self.cost(self.basis[k]) * self.body[k][col])
            .sum();
        self.cost(col) - z
    }

    fn objective(&self) -> f64 {
        (0..self.rows)
            .map(|k| self.cost(self.basis[k]) * self.rhs[k])
            .sum()
    }

    fn entering(&self) -> Option<usize> {
        let cols = self.structural + self.rows;
        (0..cols)
            .filter(|c| !self.basis.contains(c))
            .find(|&c| self.reduced_cost(c) < -PIVOT_EPS)
    }

    fn leaving(&self, col: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.rows {
            let a = self.body[i][col];
            if a <= PIVOT_EPS {
                continue;
            }
            let ratio = self.rhs[i] / a;
            best = match best {
                None => Some((i, ratio)),
                Some((j, r)) => {
                    if ratio < r - PIVOT_EPS
                        || ((ratio - r).abs() <= PIVOT_EPS && self.basis[i] < self.basis[j])
                    {
                        Some((i, ratio))
                    } else {
                        Some((j, r))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.body[row][col];
        for v in self.body[row].iter_mut() {
            *v /= p;
        }
        self.rhs[row] /= p;
        let pivot_row = self.body[row].clone();
        let pivot_rhs = self.rhs[row];
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let f = self.body[i][col];
            if f == 0.0 {
                continue;
            }
            for (v, pv) in self.body[i].iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.rhs[i] -= f * pivot_rhs;
            // Clean up round-off that would otherwise leave rhs slightly negative.
            if self.rhs[i].abs() < PIVOT_EPS * 1e-3 {
                self.rhs[i] = 0.0;
            }
        }
        self.basis[row] = col;
    }
}

/// Decides whether `A x = b` has a solution with `x >= 0`. The system counts
/// as feasible when the phase-one optimum (the total absolute residual) is at
/// most `tol`.
pub fn solve_feasibility(a: &[Vec<f64>], b: &[f64], tol: f64) -> Result<Phase1Outcome, LpError> {
    let rows = a.len();
    if rows != b.len() {
        return Err(LpError::DimensionMismatch { rows, rhs: b.len() });
    }
    let structural = a.first().map_or(0, |r| r.len());
    for (i, row) in a.iter().enumerate() {
        if row.len() != structural {
            return Err(LpError::RaggedMatrix(i));
        }
    }
    if a.iter().flatten().chain(b).any(|v| !v.is_finite()) {
        return Err(LpError::NonFinite);
    }

    // Flip rows so the right-hand side is nonnegative, then append an
    // identity block of artificial columns.
    let signs: Vec<f64> = b
        .iter()
        .map(|&v| if v < 0.0 { -1.0 } else { 1.0 })
        .collect();
    let body = (0..rows)
        .map(|i| {
            let mut row: Vec<f64> = a[i].iter().map(|v| v * signs[i]).collect();
            row.extend((0..rows).map(|k| if k == i { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    let mut tab = Tableau {
        rows,
        structural,
        body,
        rhs: b.iter().zip(&signs).map(|(v, s)| v * s).collect(),
        basis: (structural..structural + rows).collect(),
    };

    let limit = 50 * (structural + rows).max(1);
    let mut pivots = 0;
    while let Some(col) = tab.entering() {
        // Phase one is bounded below by zero, so an entering column always
        // has a positive entry.
        let row = tab.leaving(col).ok_or(LpError::Breakdown(col))?;
        tab.pivot(row, col);
        pivots += 1;
        if pivots > limit {
            return Err(LpError::IterationLimit(limit));
        }
    }

    let gap = tab.objective();
    let feasibility = if gap <= tol {
        let mut x = vec![0.0; structural];
        for (k, &col) in tab.basis.iter().enumerate() {
            if col < structural {
                x[col] = tab.rhs[k].max(0.0);
            }
        }
        let residual = a
            .iter()
            .zip(b)
            .map(|(row, bi)| (row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() - bi).abs())
            .fold(0.0, f64::max);
        Feasibility::Feasible { x, residual }
    } else {
        let certificate = tab.duals().iter().zip(&signs).map(|(y, s)| y * s).collect();
        Feasibility::Infeasible { certificate, gap }
    };
    Ok(Phase1Outcome {
        feasibility,
        pivots,
    })
}
