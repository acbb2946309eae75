//! Seeded random instances shared by `verify` and the acceptance suite.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use stressopt_core::kinematics::{DiscreteOperators, TractionField};
use stressopt_core::lp::LpStandardForm;
use stressopt_core::mesh::{generate_bar, generate_rectangle, generate_tet_pair, Edge, Mesh};

/// Traction with components uniform in `[-2, 2)`, rejecting the zero field.
pub fn random_traction(ops: &DiscreteOperators, rng: &mut ChaCha8Rng) -> TractionField {
    loop {
        let flat: Vec<f64> = (0..ops.boundary_components())
            .map(|_| rng.gen_range(-2.0..2.0))
            .collect();
        let t = TractionField::from_flat(ops, &flat).expect("length matches");
        if !t.is_zero() {
            return t;
        }
    }
}

/// Small LP with integer data. Most instances are feasible by construction
/// (`b = A x0` with `x0 >= 0`); the rest take a random `b`.
pub fn random_lp(rng: &mut ChaCha8Rng) -> LpStandardForm {
    let m = rng.gen_range(1..=4);
    let n = rng.gen_range(m..=8);
    let a: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect())
        .collect();
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-2..=4) as f64).collect();
    let b = if rng.gen_bool(0.75) {
        let x0: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.5) { rng.gen_range(0..=3) as f64 } else { 0.0 })
            .collect();
        a.iter()
            .map(|row| row.iter().zip(&x0).map(|(p, q)| p * q).sum())
            .collect()
    } else {
        (0..m).map(|_| rng.gen_range(-4..=4) as f64).collect()
    };
    LpStandardForm::new(c, a, b).expect("consistent shape")
}

/// Random bar, rectangle or tet-pair mesh with moderate sizes.
pub fn random_mesh(rng: &mut ChaCha8Rng) -> Mesh {
    match rng.gen_range(0..10) {
        0..=3 => generate_bar(
            rng.gen_range(0.5..3.0),
            rng.gen_range(0.5..2.0),
            rng.gen_range(1..=8),
        ),
        4..=8 => {
            let edges = [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top];
            let support = edges[rng.gen_range(0..4)];
            let load = loop {
                let e = edges[rng.gen_range(0..4)];
                if e != support {
                    break e;
                }
            };
            generate_rectangle(
                rng.gen_range(0.5..2.0),
                rng.gen_range(0.5..2.0),
                rng.gen_range(1..=3),
                rng.gen_range(1..=3),
                support,
                load,
            )
        }
        _ => generate_tet_pair(rng.gen_range(0.5..2.0)),
    }
    .expect("generator parameters are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use stressopt_core::kinematics::assemble;
    use stressopt_core::matnorm::NormPair;

    #[test]
    fn sampling_is_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(random_lp(&mut a), random_lp(&mut b));
        assert_eq!(random_mesh(&mut a), random_mesh(&mut b));
        let ops = assemble(&generate_bar(1.0, 1.0, 2).unwrap(), NormPair::L1_LINF).unwrap();
        assert_eq!(random_traction(&ops, &mut a), random_traction(&ops, &mut b));
    }
}
