//! Linear programming in standard form: minimize `c.x` subject to
//! `A x = b`, `x >= 0`.
//!
//! [`solve`] is a dense two-phase simplex that falls back to Bland's rule
//! against cycling. [`solve_brute`] enumerates basic solutions and serves as
//! an independent oracle for small instances. [`model::LpModel`] translates problems with free variables and
//! inequality rows into standard form.

mod brute;
pub mod model;
mod simplex;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

pub use brute::{solve_brute, BRUTE_MAX};
pub use simplex::solve;

/// Feasibility and optimality tolerance (relative).
pub const TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct LpStandardForm {
    pub c: Vec<f64>,
    /// Row-major, `b.len()` rows of `c.len()` entries.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal solution; empty unless optimal.
    pub x: Vec<f64>,
    /// Equality multipliers; empty unless optimal.
    pub y: Vec<f64>,
    /// `c.x` when optimal, `+inf` when infeasible, `-inf` when unbounded.
    pub objective: f64,
}

impl LpSolution {
    pub(crate) fn infeasible() -> Self {
        LpSolution {
            status: LpStatus::Infeasible,
            x: Vec::new(),
            y: Vec::new(),
            objective: f64::INFINITY,
        }
    }

    pub(crate) fn unbounded() -> Self {
        LpSolution {
            status: LpStatus::Unbounded,
            x: Vec::new(),
            y: Vec::new(),
            objective: f64::NEG_INFINITY,
        }
    }
}

impl LpStandardForm {
    pub fn new(c: Vec<f64>, a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let p = LpStandardForm { c, a, b };
        p.check()?;
        Ok(p)
    }

    pub fn rows(&self) -> usize {
        self.b.len()
    }

    pub fn cols(&self) -> usize {
        self.c.len()
    }

    pub fn check(&self) -> Result<()> {
        if self.a.len() != self.b.len() {
            return Err(Error::LpShape(format!(
                "{} constraint rows but {} right-hand sides",
                self.a.len(),
                self.b.len()
            )));
        }
        for (i, row) in self.a.iter().enumerate() {
            if row.len() != self.c.len() {
                return Err(Error::LpShape(format!(
                    "row {i} has {} entries, expected {}",
                    row.len(),
                    self.c.len()
                )));
            }
        }
        let finite = self.c.iter().chain(&self.b).chain(self.a.iter().flatten());
        if finite.clone().any(|v| !v.is_finite()) {
            return Err(Error::LpShape("non-finite coefficient".to_string()));
        }
        Ok(())
    }

    /// Residuals of the optimality invariants for `sol`:
    /// `(primal infeasibility, most negative x, complementary slackness, duality gap)`.
    pub fn certificate(&self, sol: &LpSolution) -> Certificate {
        let primal = self
            .a
            .iter()
            .zip(&self.b)
            .map(|(row, bi)| (dot(row, &sol.x) - bi).abs())
            .fold(0.0, f64::max);
        let min_x = sol.x.iter().copied().fold(0.0, f64::min);
        let mut slack = 0.0f64;
        let mut dual_infeasibility = 0.0f64;
        for j in 0..self.cols() {
            let reduced = self.c[j] - (0..self.rows()).map(|i| self.a[i][j] * sol.y[i]).sum::<f64>();
            slack = slack.max((sol.x[j] * reduced).abs());
            dual_infeasibility = dual_infeasibility.max(-reduced);
        }
        let primal_obj = dot(&self.c, &sol.x);
        let dual_obj = dot(&self.b, &sol.y);
        Certificate {
            primal_residual: primal,
            min_x,
            complementary_slackness: slack,
            dual_infeasibility,
            duality_gap: (primal_obj - dual_obj).abs(),
        }
    }

    /// Plain-text dump for bug reports.
    pub fn dump(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for LpStandardForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:e}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(f, "lp {} {}", self.rows(), self.cols())?;
        writeln!(f, "c {}", join(&self.c))?;
        for (row, bi) in self.a.iter().zip(&self.b) {
            writeln!(f, "a {} = {bi:e}", join(row))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Certificate {
    pub primal_residual: f64,
    pub min_x: f64,
    pub complementary_slackness: f64,
    pub dual_infeasibility: f64,
    pub duality_gap: f64,
}

impl Certificate {
    /// Whether all optimality invariants hold for a problem with
    /// right-hand side `b` and optimal value `objective`.
    pub fn holds(&self, b: &[f64], objective: f64) -> bool {
        let b_inf = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
        self.primal_residual <= TOL * (1.0 + b_inf)
            && self.min_x >= -1e-10
            && self.complementary_slackness <= TOL
            && self.duality_gap <= TOL * (1.0 + objective.abs())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
