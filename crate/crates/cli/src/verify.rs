//! Seeded invariant suite run by `stressopt verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use stressopt_core::capacity::{
    concentration_factor_for, generalized_k, generalized_k_dual_check, k_agrees,
    kinematic_limit_check, limit_analysis, Method, ENUMERATION_CAP,
};
use stressopt_core::kinematics::{
    assemble_with, isochoric_dim, rigid_kernel_dim, strain, traction_sup_norm, Clamping,
    DiscreteOperators,
};
use stressopt_core::lp::{solve, solve_brute, LpStatus};
use stressopt_core::matnorm::{NormPair, SymMatrix};
use stressopt_core::mesh::Mesh;
use stressopt_core::stress::{check_equilibrium, optimal_stress, stress_measure, Mode, DUALITY_TOL};
use stressopt_core::Result;

use crate::sample::{random_lp, random_traction};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// Largest normalized deviation seen (0 for exact checks).
    pub max_error: f64,
}

struct Tally {
    name: &'static str,
    failures: usize,
    cases: usize,
    max_error: f64,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            failures: 0,
            cases: 0,
            max_error: 0.0,
        }
    }

    /// Records a deviation against its allowed bound.
    fn record(&mut self, error: f64, bound: f64) {
        self.cases += 1;
        self.max_error = self.max_error.max(error);
        if !(error <= bound) {
            self.failures += 1;
        }
    }

    fn flag(&mut self, ok: bool) {
        self.record(if ok { 0.0 } else { 1.0 }, 0.0);
    }

    fn finish(self) -> Check {
        Check {
            name: self.name,
            passed: self.failures == 0,
            cases: self.cases,
            max_error: self.max_error,
        }
    }
}

fn modes(ops: &DiscreteOperators) -> Vec<Mode> {
    if ops.dim >= 2 && isochoric_dim(ops) > 0 {
        vec![Mode::Elastic, Mode::Plastic]
    } else {
        vec![Mode::Elastic]
    }
}

fn kernel_check(mesh: &Mesh, ops: &DiscreteOperators) -> Result<Check> {
    let mut tally = Tally::new("rigid_kernel");
    let free = assemble_with(mesh, NormPair::L1_LINF, Clamping::None)?;
    let d = mesh.dim;
    tally.flag(rigid_kernel_dim(&free) == d * (d + 1) / 2);
    tally.flag(rigid_kernel_dim(ops) == 0);
    Ok(tally.finish())
}

fn affine_check(mesh: &Mesh, rng: &mut ChaCha8Rng, trials: usize) -> Result<Check> {
    let mut tally = Tally::new("affine_exactness");
    let free = assemble_with(mesh, NormPair::L1_LINF, Clamping::None)?;
    let d = mesh.dim;
    for _ in 0..trials {
        let g: Vec<Vec<f64>> = (0..d)
            .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let shift: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w = free.interpolate(|x| {
            (0..d)
                .map(|i| shift[i] + (0..d).map(|j| g[i][j] * x[j]).sum::<f64>())
                .collect()
        });
        let sym: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| 0.5 * (g[i][j] + g[j][i])).collect())
            .collect();
        let rows: Vec<&[f64]> = sym.iter().map(Vec::as_slice).collect();
        let expected = SymMatrix::from_full(d, &rows);
        let error = strain(&free, &w)?
            .iter()
            .flat_map(|e| e.sub(&expected).components().to_vec())
            .fold(0.0, |m: f64, v| m.max(v.abs()));
        tally.record(error, 1e-12);
    }
    Ok(tally.finish())
}

fn lp_check(rng: &mut ChaCha8Rng, trials: usize) -> Result<Check> {
    let mut tally = Tally::new("lp_oracle");
    for _ in 0..trials {
        let lp = random_lp(rng);
        let fast = solve(&lp)?;
        let slow = solve_brute(&lp)?;
        if fast.status != slow.status {
            tally.flag(false);
            continue;
        }
        if fast.status == LpStatus::Optimal {
            let error = (fast.objective - slow.objective).abs() / (1.0 + slow.objective.abs());
            tally.record(error, 1e-7);
            tally.flag(lp.certificate(&fast).holds(&lp.b, fast.objective));
        } else {
            tally.flag(true);
        }
    }
    Ok(tally.finish())
}

/// Runs every invariant check on `mesh`, sampling with `seed`.
pub fn run(mesh: &Mesh, ops: &DiscreteOperators, seed: u64, trials: usize) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = vec![kernel_check(mesh, ops)?, affine_check(mesh, &mut rng, trials)?];

    let mut duality = Tally::new("duality_gap");
    let mut equilibrium = Tally::new("equilibrium");
    let mut attainment = Tally::new("attainment");
    let mut homogeneity = Tally::new("homogeneity");
    let mut limit = Tally::new("limit_identities");
    let tractions: Vec<_> = (0..trials).map(|_| random_traction(ops, &mut rng)).collect();
    let factors: Vec<f64> = (0..trials).map(|_| rng.gen_range(0.5..3.0)).collect();
    for mode in modes(ops) {
        for (t, &lambda) in tractions.iter().zip(&factors) {
            let t_norm = traction_sup_norm(ops, t)?;
            let r = optimal_stress(ops, t, mode)?;
            duality.record(r.duality_gap / (1.0 + r.sigma_opt), DUALITY_TOL);
            let eq = check_equilibrium(ops, &r.sigma_hat, t, 1e-8)?;
            equilibrium.record(eq.residual / (1.0 + t_norm), 1e-8);
            let measured = stress_measure(&r.sigma_hat, mode, ops.norm_pair);
            attainment.record((measured - r.sigma_opt).abs() / r.sigma_opt.max(1.0), 1e-7);
            let scaled = optimal_stress(ops, &t.scale(lambda), mode)?.sigma_opt;
            homogeneity.record((scaled - lambda * r.sigma_opt).abs() / (1.0 + scaled), 1e-6);
            if mode == Mode::Plastic && r.sigma_opt > 0.0 {
                let y0 = 1.0;
                let l = limit_analysis(ops, t, y0)?;
                limit.record((l.lambda_star * l.sigma_opt - y0).abs(), 1e-12);
                limit.record((l.sigma_opt_collapse - y0).abs(), 1e-6);
                let k = kinematic_limit_check(ops, t, y0)?;
                limit.record(k.gap / (1.0 + k.lambda_static), 1e-6);
            }
        }
    }
    checks.extend([duality, equilibrium, attainment, homogeneity].map(Tally::finish));
    if limit.cases > 0 {
        checks.push(limit.finish());
    }

    if ops.boundary_components() <= ENUMERATION_CAP {
        let mut capacity = Tally::new("capacity_bound");
        for mode in modes(ops) {
            let k = generalized_k(ops, mode, Method::ExactVertexEnumeration)?.k;
            let k_prime = generalized_k_dual_check(ops, mode)?.k_prime;
            capacity.flag(k_agrees(k, k_prime));
            for t in &tractions {
                let kt = concentration_factor_for(ops, t, mode)?;
                capacity.record((kt - k).max(0.0) / (1.0 + k), 1e-6);
            }
        }
        checks.push(capacity.finish());
    }

    checks.push(lp_check(&mut rng, trials)?);
    Ok(checks)
}
