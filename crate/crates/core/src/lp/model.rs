//! Translation of general linear programs (free variables, inequality rows,
//! maximization) into [`LpStandardForm`].

use super::{solve, LpStandardForm, LpStatus};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    NonNegative,
    /// Split into positive and negative parts.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub usize);

#[derive(Debug, Clone)]
struct Row {
    terms: Vec<(Var, f64)>,
    cmp: Cmp,
    rhs: f64,
}

#[derive(Debug, Clone)]
pub struct LpModel {
    sense: Sense,
    kinds: Vec<VarKind>,
    objective: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone)]
pub struct ModelSolution {
    pub status: LpStatus,
    /// One value per model variable (empty unless optimal).
    pub values: Vec<f64>,
    /// Objective in the model's own sense.
    pub objective: f64,
    /// Multiplier of each model row for the minimization form.
    pub row_duals: Vec<f64>,
}

impl ModelSolution {
    pub fn value(&self, v: Var) -> f64 {
        self.values[v.0]
    }
}

impl LpModel {
    pub fn new(sense: Sense) -> Self {
        LpModel {
            sense,
            kinds: Vec::new(),
            objective: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn add_var(&mut self, kind: VarKind) -> Var {
        self.kinds.push(kind);
        self.objective.push(0.0);
        Var(self.kinds.len() - 1)
    }

    pub fn add_vars(&mut self, n: usize, kind: VarKind) -> Vec<Var> {
        (0..n).map(|_| self.add_var(kind)).collect()
    }

    pub fn set_objective(&mut self, v: Var, coef: f64) {
        self.objective[v.0] = coef;
    }

    /// Adds a row; repeated variables in `terms` are summed.
    pub fn add_row(&mut self, terms: Vec<(Var, f64)>, cmp: Cmp, rhs: f64) {
        self.rows.push(Row { terms, cmp, rhs });
    }

    pub fn var_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Standard form together with the column of each model variable
    /// (`(positive, negative)` part; the negative part only for free ones).
    pub fn to_standard_form(&self) -> (LpStandardForm, Vec<(usize, Option<usize>)>) {
        let mut columns = Vec::with_capacity(self.kinds.len());
        let mut n = 0;
        for kind in &self.kinds {
            match kind {
                VarKind::NonNegative => {
                    columns.push((n, None));
                    n += 1;
                }
                VarKind::Free => {
                    columns.push((n, Some(n + 1)));
                    n += 2;
                }
            }
        }
        let n_slack = self.rows.iter().filter(|r| r.cmp != Cmp::Eq).count();
        let total = n + n_slack;
        let flip = match self.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut c = vec![0.0; total];
        for (v, &coef) in self.objective.iter().enumerate() {
            let (p, q) = columns[v];
            c[p] = flip * coef;
            if let Some(q) = q {
                c[q] = -flip * coef;
            }
        }
        let mut a = Vec::with_capacity(self.rows.len());
        let mut b = Vec::with_capacity(self.rows.len());
        let mut slack = n;
        for row in &self.rows {
            let mut dense = vec![0.0; total];
            for &(v, coef) in &row.terms {
                let (p, q) = columns[v.0];
                dense[p] += coef;
                if let Some(q) = q {
                    dense[q] -= coef;
                }
            }
            match row.cmp {
                Cmp::Eq => {}
                Cmp::Le => {
                    dense[slack] = 1.0;
                    slack += 1;
                }
                Cmp::Ge => {
                    dense[slack] = -1.0;
                    slack += 1;
                }
            }
            a.push(dense);
            b.push(row.rhs);
        }
        (LpStandardForm { c, a, b }, columns)
    }

    pub fn solve(&self) -> Result<ModelSolution> {
        let (lp, columns) = self.to_standard_form();
        let sol = solve(&lp)?;
        let flip = match self.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        if sol.status != LpStatus::Optimal {
            let objective = match (sol.status, self.sense) {
                (LpStatus::Infeasible, Sense::Minimize) => f64::INFINITY,
                (LpStatus::Infeasible, Sense::Maximize) => f64::NEG_INFINITY,
                (_, Sense::Minimize) => f64::NEG_INFINITY,
                (_, Sense::Maximize) => f64::INFINITY,
            };
            return Ok(ModelSolution {
                status: sol.status,
                values: Vec::new(),
                objective,
                row_duals: Vec::new(),
            });
        }
        let values = columns
            .iter()
            .map(|&(p, q)| sol.x[p] - q.map_or(0.0, |q| sol.x[q]))
            .collect();
        Ok(ModelSolution {
            status: LpStatus::Optimal,
            values,
            objective: flip * sol.objective,
            row_duals: sol.y,
        })
    }
}
