use nalgebra::{DMatrix, DVector};

use super::{LpSolution, LpStandardForm, LpStatus};
use crate::error::{Error, Result};

/// Largest row or column count accepted by [`solve_brute`].
pub const BRUTE_MAX: usize = 14;

const RANK_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;

fn rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return 0;
    }
    svd.singular_values.iter().filter(|&&s| s > RANK_TOL * smax.max(1.0)).count()
}

/// A maximal set of linearly independent rows of `a`.
fn independent_rows(a: &DMatrix<f64>) -> Vec<usize> {
    let mut keep: Vec<usize> = Vec::new();
    for i in 0..a.nrows() {
        let mut trial = keep.clone();
        trial.push(i);
        if rank(&a.select_rows(&trial)) == trial.len() {
            keep = trial;
        }
    }
    keep
}

fn combinations(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Basic feasible solutions of `{x >= 0 : a x = b}` with their bases.
fn vertices(a: &DMatrix<f64>, b: &DVector<f64>) -> Vec<(Vec<usize>, DVector<f64>)> {
    let n = a.ncols();
    let rows = independent_rows(a);
    let full = DMatrix::from_fn(a.nrows(), n + 1, |i, j| if j < n { a[(i, j)] } else { b[i] });
    if rank(&full) > rows.len() {
        return Vec::new();
    }
    let a_red = a.select_rows(&rows);
    let b_red = b.select_rows(&rows);
    let r = rows.len();
    let scale = 1.0 + b.amax();
    if r == 0 {
        return vec![(Vec::new(), DVector::zeros(n))];
    }
    let mut out = Vec::new();
    combinations(n, r, |cols| {
        let basis = a_red.select_columns(cols);
        if rank(&basis) < r {
            return;
        }
        let Some(xb) = basis.lu().solve(&b_red) else {
            return;
        };
        if xb.iter().any(|&v| v < -FEAS_TOL * scale) {
            return;
        }
        let mut x = DVector::zeros(n);
        for (k, &j) in cols.iter().enumerate() {
            x[j] = xb[k].max(0.0);
        }
        if (a * &x - b).amax() > 1e-7 * scale {
            return;
        }
        out.push((cols.to_vec(), x));
    });
    out
}

/// Solves `p` by enumerating every basic solution. Intended as a test
/// oracle; limited to [`BRUTE_MAX`] rows and columns.
///
/// Unboundedness is detected from the extreme rays of `{d >= 0 : A d = 0}`,
/// which are the vertices of that cone cut by `sum(d) = 1`.
pub fn solve_brute(p: &LpStandardForm) -> Result<LpSolution> {
    p.check()?;
    let (m, n) = (p.rows(), p.cols());
    if m > BRUTE_MAX || n > BRUTE_MAX {
        return Err(Error::OracleTooLarge {
            rows: m,
            cols: n,
            max: BRUTE_MAX,
        });
    }
    let a = DMatrix::from_fn(m, n, |i, j| p.a[i][j]);
    let b = DVector::from_column_slice(&p.b);
    let c = DVector::from_column_slice(&p.c);

    let verts = vertices(&a, &b);
    if verts.is_empty() {
        return Ok(LpSolution::infeasible());
    }

    let ray_a = DMatrix::from_fn(m + 1, n, |i, j| if i < m { a[(i, j)] } else { 1.0 });
    let mut ray_b = DVector::zeros(m + 1);
    ray_b[m] = 1.0;
    if vertices(&ray_a, &ray_b)
        .iter()
        .any(|(_, d)| c.dot(d) < -FEAS_TOL)
    {
        return Ok(LpSolution::unbounded());
    }

    let (cols, x) = verts
        .into_iter()
        .min_by(|u, v| c.dot(&u.1).total_cmp(&c.dot(&v.1)))
        .expect("nonempty");

    let rows = independent_rows(&a);
    let basis = a.select_rows(&rows).select_columns(&cols);
    let cb = DVector::from_fn(cols.len(), |k, _| c[cols[k]]);
    let mut y = vec![0.0; m];
    let yr = (!cols.is_empty())
        .then(|| basis.transpose().lu().solve(&cb))
        .flatten();
    for (k, &i) in rows.iter().enumerate() {
        y[i] = yr.as_ref().map_or(0.0, |v| v[k]);
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective: c.dot(&x),
        x: x.iter().copied().collect(),
        y,
    })
}
