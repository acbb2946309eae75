use nalgebra::{DMatrix, DVector};

use super::{LpSolution, LpStandardForm, LpStatus};
use crate::error::{Error, Result};

/// Pivot elements smaller than this are treated as zero.
const PIVOT_EPS: f64 = 1e-9;
/// Reduced costs above `-OPT_EPS` count as nonnegative.
const OPT_EPS: f64 = 1e-9;
/// Phase-one optimum above this (relative to `1 + |b|_inf`) means infeasible.
const FEAS_EPS: f64 = 1e-8;
/// Consecutive degenerate pivots before switching to Bland's entering rule.
const DEGENERATE_LIMIT: usize = 50;

/// Simplex tableau over the original columns only. Artificial variables are
/// implicit: each starts basic in its row and is discarded once it leaves,
/// so its column is never needed.
struct Tableau {
    n: usize,
    /// Row-major, `m` rows of `n + 1` entries (columns, then right-hand side).
    cells: Vec<f64>,
    /// Reduced costs, last entry is minus the objective value.
    obj: Vec<f64>,
    /// Basic variable of each row; `n + i` is the artificial of row `i`.
    basis: Vec<usize>,
    scratch: Vec<f64>,
    pivots: usize,
    limit: usize,
}

fn row_at(cells: &[f64], width: usize, i: usize, j: usize) -> f64 {
    cells[i * width + j]
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn new(p: &LpStandardForm) -> Self {
        let (m, n) = (p.rows(), p.cols());
        let width = n + 1;
        let mut cells = vec![0.0; m * width];
        for (i, row) in cells.chunks_exact_mut(width).enumerate() {
            let sign = if p.b[i] < 0.0 { -1.0 } else { 1.0 };
            for j in 0..n {
                row[j] = sign * p.a[i][j];
            }
            row[n] = sign * p.b[i];
        }
        // Crash basis: a column with a single positive entry (a slack) can
        // start basic in its row instead of the artificial.
        let mut basis: Vec<usize> = (n..n + m).collect();
        for j in 0..n {
            let mut nonzero = (0..m).filter(|&i| cells[i * width + j] != 0.0);
            let (Some(i), None) = (nonzero.next(), nonzero.next()) else {
                continue;
            };
            let a = cells[i * width + j];
            if a > 0.0 && basis[i] >= n {
                cells[i * width..(i + 1) * width].iter_mut().for_each(|v| *v /= a);
                basis[i] = j;
            }
        }
        Tableau {
            n,
            cells,
            obj: vec![0.0; width],
            basis,
            scratch: vec![0.0; width],
            pivots: 0,
            limit: 20_000 + 200 * (n + m),
        }
    }

    fn width(&self) -> usize {
        self.n + 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.width() + j]
    }

    /// Sets the objective row for costs `cost` on the original columns and
    /// `artificial_cost` on every artificial.
    fn price(&mut self, cost: &[f64], artificial_cost: f64) {
        let (n, width) = (self.n, self.width());
        self.obj[..n].copy_from_slice(cost);
        self.obj[n] = 0.0;
        for (i, row) in self.cells.chunks_exact(width).enumerate() {
            let j = self.basis[i];
            let cb = if j < n { cost[j] } else { artificial_cost };
            if cb != 0.0 {
                for (o, v) in self.obj.iter_mut().zip(row) {
                    *o -= cb * v;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let width = self.width();
        let pivot_row = &mut self.cells[r * width..(r + 1) * width];
        let piv = pivot_row[s];
        for v in pivot_row.iter_mut() {
            *v /= piv;
        }
        self.scratch.copy_from_slice(pivot_row);
        let pr = &self.scratch;
        for (i, row) in self.cells.chunks_exact_mut(width).enumerate() {
            if i == r {
                continue;
            }
            let k = row[s];
            if k != 0.0 {
                for (v, p) in row.iter_mut().zip(pr) {
                    *v -= k * p;
                }
                row[s] = 0.0;
            }
        }
        let k = self.obj[s];
        if k != 0.0 {
            for (v, p) in self.obj.iter_mut().zip(pr) {
                *v -= k * p;
            }
            self.obj[s] = 0.0;
        }
        self.basis[r] = s;
        self.pivots += 1;
    }

    /// Largest-coefficient pricing, with ratio ties going to the largest
    /// pivot element. After `DEGENERATE_LIMIT` consecutive degenerate pivots
    /// both choices follow Bland's rule (lowest-index entering column,
    /// lowest-index leaving basic variable) until the objective moves again,
    /// which rules out cycling.
    fn run(&mut self) -> Result<Outcome> {
        let (n, width) = (self.n, self.width());
        let mut degenerate = 0;
        loop {
            let bland = degenerate >= DEGENERATE_LIMIT;
            let entering = if bland {
                (0..n).find(|&j| self.obj[j] < -OPT_EPS)
            } else {
                (0..n)
                    .filter(|&j| self.obj[j] < -OPT_EPS)
                    .min_by(|&a, &b| self.obj[a].total_cmp(&self.obj[b]).then(a.cmp(&b)))
            };
            let Some(s) = entering else {
                return Ok(Outcome::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.cells.chunks_exact(width).enumerate() {
                let a = row[s];
                if a <= PIVOT_EPS {
                    continue;
                }
                let ratio = row[n].max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        let preferred = if bland {
                            self.basis[i] < self.basis[r]
                        } else {
                            a > row_at(&self.cells, width, r, s)
                        };
                        if (!tie && ratio < best) || (tie && preferred) {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leave else {
                return Ok(Outcome::Unbounded);
            };
            if ratio <= PIVOT_EPS {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            if self.pivots >= self.limit {
                return Err(Error::IterationLimit(self.limit));
            }
            self.pivot(r, s);
        }
    }
}

/// Solves `p` with a dense two-phase simplex method.
///
/// The final basis is refactored from the original data to recover `x` and
/// the equality multipliers `y`. Results are deterministic.
pub fn solve(p: &LpStandardForm) -> Result<LpSolution> {
    p.check()?;
    let (m, n) = (p.rows(), p.cols());
    let mut t = Tableau::new(p);

    // Phase one: minimize the sum of artificials.
    t.price(&vec![0.0; n], 1.0);
    t.run()?;
    let b_inf = p.b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if -t.obj[n] > FEAS_EPS * (1.0 + b_inf) {
        return Ok(LpSolution::infeasible());
    }

    // Drive zero-level artificials out of the basis where possible; rows
    // where that fails are redundant and keep their artificial at zero.
    let mut is_basic = vec![false; n];
    for &j in &t.basis {
        if j < n {
            is_basic[j] = true;
        }
    }
    for r in 0..m {
        if t.basis[r] < n {
            continue;
        }
        let best = (0..n)
            .filter(|&j| !is_basic[j])
            .map(|j| (j, t.at(r, j).abs()))
            .filter(|&(_, v)| v > PIVOT_EPS)
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        if let Some((j, _)) = best {
            t.pivot(r, j);
            is_basic[j] = true;
        }
    }

    // Phase two.
    t.price(&p.c, 0.0);
    if let Outcome::Unbounded = t.run()? {
        return Ok(LpSolution::unbounded());
    }

    let (x, y) = refine(p, &t);
    let objective = super::dot(&p.c, &x);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        y,
        objective,
    })
}

/// Recomputes `x_B = B^-1 b` and `y = B^-T c_B` from the original data.
fn refine(p: &LpStandardForm, t: &Tableau) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = (p.rows(), p.cols());
    let column = |j: usize, i: usize| {
        if j < n {
            p.a[i][j]
        } else if j - n == i {
            // artificial of a row that was negated on entry
            if p.b[i] < 0.0 {
                -1.0
            } else {
                1.0
            }
        } else {
            0.0
        }
    };
    let basis_matrix = DMatrix::from_fn(m, m, |i, k| column(t.basis[k], i));
    let cb = DVector::from_fn(m, |k, _| if t.basis[k] < n { p.c[t.basis[k]] } else { 0.0 });
    let b = DVector::from_column_slice(&p.b);
    let mut x = vec![0.0; n];
    let lu = basis_matrix.clone().lu();
    let xb = lu.solve(&b);
    // B = P^T L U, so B^T y = c_B is U^T L^T (P y) = c_B.
    let y = lu.u().tr_solve_upper_triangular(&cb).and_then(|z| {
        let mut w = lu.l().tr_solve_lower_triangular(&z)?;
        lu.p().inv_permute_rows(&mut w);
        Some(w)
    });
    match (xb, y) {
        (Some(xb), Some(y)) => {
            for (k, &j) in t.basis.iter().enumerate() {
                if j < n {
                    x[j] = xb[k];
                }
            }
            (x, y.iter().copied().collect())
        }
        _ => {
            // Near-singular basis: tableau values and a least-squares y.
            for (k, &j) in t.basis.iter().enumerate() {
                if j < n {
                    x[j] = t.at(k, n);
                }
            }
            let y = basis_matrix
                .transpose()
                .svd(true, true)
                .solve(&cb, 1e-12)
                .map(|y| y.iter().copied().collect())
                .unwrap_or_else(|_| vec![0.0; m]);
            (x, y)
        }
    }
}
