use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ridgekit_core::design::{chebyshev_center, generate_designs};
use ridgekit_core::doe::{synth_quadratic, uniform_inputs};
use ridgekit_core::quadsurf::{active_subspace, fit_quadratic, gradient_covariance, DimensionRule, QuadraticFitOptions, QuadraticModel, GAMMA_LEGACY, GAMMA_UNIFORM};
use ridgekit_core::simplex::{simplex_solve, LinearProgram, LpOutcome};
use ridgekit_core::subspace::{subspace_angle, Subspace};

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Smallest objective over every basic feasible point of `G z ≤ h`.
fn vertex_enumeration(c: &DVector<f64>, g: &DMatrix<f64>, h: &DVector<f64>) -> Option<f64> {
    let (rows, k) = g.shape();
    let mut best: Option<f64> = None;
    let mut pick = vec![0usize; k];
    fn combos(start: usize, depth: usize, rows: usize, pick: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if depth == pick.len() {
            out.push(pick.clone());
            return;
        }
        for r in start..rows {
            pick[depth] = r;
            combos(r + 1, depth + 1, rows, pick, out);
        }
    }
    let mut all = Vec::new();
    combos(0, 0, rows, &mut pick, &mut all);
    for set in all {
        let a = DMatrix::from_fn(k, k, |i, j| g[(set[i], j)]);
        let b = DVector::from_fn(k, |i, _| h[set[i]]);
        let lu = a.clone().lu();
        if a.determinant().abs() < 1e-10 {
            continue;
        }
        let Some(z) = lu.solve(&b) else { continue };
        let slack = h - g * &z;
        if slack.iter().all(|&s| s >= -1e-9) {
            let v = c.dot(&z);
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
    }
    best
}

#[test]
fn simplex_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut solved = 0;
    let mut infeasible = 0;
    for _ in 0..200 {
        let k = rng.random_range(2..=3);
        let extra = rng.random_range(1..=4);
        // Box rows keep every instance bounded.
        let mut g = DMatrix::zeros(2 * k + extra, k);
        let mut h = DVector::zeros(2 * k + extra);
        for j in 0..k {
            g[(2 * j, j)] = 1.0;
            g[(2 * j + 1, j)] = -1.0;
            h[2 * j] = rng.random_range(0.5..3.0);
            h[2 * j + 1] = rng.random_range(0.5..3.0);
        }
        for r in 2 * k..2 * k + extra {
            for j in 0..k {
                g[(r, j)] = rng.sample(StandardNormal);
            }
            h[r] = rng.random_range(-2.0..1.0);
        }
        let c = gaussian(&mut rng, k, 1).column(0).into_owned();
        let oracle = vertex_enumeration(&c, &g, &h);
        let outcome = simplex_solve(&LinearProgram::new(c.clone(), g.clone(), h.clone())).unwrap();
        match (oracle, outcome) {
            (Some(v), LpOutcome::Optimal { x, value }) => {
                assert!((v - value).abs() < 1e-9, "oracle {v} vs simplex {value}");
                assert!((c.dot(&x) - value).abs() < 1e-9);
                assert!((&h - &g * &x).iter().all(|&s| s >= -1e-9));
                solved += 1;
            }
            (None, LpOutcome::Infeasible) => infeasible += 1,
            (o, s) => panic!("oracle {o:?} disagrees with {s:?}"),
        }
    }
    assert!(solved > 50 && infeasible > 0, "solved {solved}, infeasible {infeasible}");
}

/// Sine of the largest principal angle via `‖(I − VVᵀ)U‖₂`.
fn principal_angle_oracle(u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    let resid = u - v * (v.transpose() * u);
    let s = resid.singular_values();
    s.max().min(1.0).asin()
}

#[test]
fn subspace_angle_matches_principal_angles() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let m = rng.random_range(2..12);
        let n = rng.random_range(1..m);
        let a = Subspace::orthonormalize(&gaussian(&mut rng, m, n)).unwrap();
        let b = Subspace::orthonormalize(&gaussian(&mut rng, m, n)).unwrap();
        let phi = subspace_angle(&a, &b).unwrap();
        assert!((phi - principal_angle_oracle(a.matrix(), b.matrix())).abs() < 1e-10);
    }
    let e1 = Subspace::<f64>::coordinate_axes(3, &[0]).unwrap();
    let e2 = Subspace::<f64>::coordinate_axes(3, &[1]).unwrap();
    assert!((subspace_angle(&e1, &e2).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
}

#[test]
fn gradient_covariance_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = 5;
    let g = gaussian(&mut rng, d, d);
    let a = (&g + g.transpose()) * 0.5;
    let c = gaussian(&mut rng, d, 1).column(0).into_owned();
    let model = QuadraticModel::new(a, c, 1.0).unwrap();
    let samples = 200_000;
    let x = uniform_inputs::<f64>(samples, d, 9);
    let grads = model.gradients(&x);
    let mc = grads.transpose() * &grads / samples as f64;
    let k = gradient_covariance(&model, GAMMA_UNIFORM).unwrap();
    let rel = (&mc - &k).norm() / k.norm();
    assert!(rel < 0.02, "relative Frobenius error {rel}");
    let legacy = gradient_covariance(&model, GAMMA_LEGACY).unwrap();
    assert!((&mc - &legacy).norm() / legacy.norm() > rel);
}

#[test]
fn quadratic_fit_recovers_ground_truth_and_eigenvectors() {
    let spectrum = [6.0, -4.0, 2.5, 1.0, 0.5, 0.2, 0.1, 0.0, 0.0, 0.0];
    let (doe, truth) = synth_quadratic::<f64>(10, 200, 77, &spectrum, true).unwrap();
    let fit = fit_quadratic(&doe, &QuadraticFitOptions::default()).unwrap();
    assert!((&fit.model.a - &truth.a).amax() < 1e-8);
    assert!((&fit.model.c - &truth.c).amax() < 1e-8);
    assert!((fit.model.e - truth.e).abs() < 1e-8);
    for gamma in [GAMMA_UNIFORM, GAMMA_LEGACY] {
        let k = gradient_covariance(&fit.model, gamma).unwrap();
        let (u, _) = active_subspace(&k, DimensionRule::Fixed(2)).unwrap();
        let analytic = &truth.a * &truth.a * gamma + &truth.c * truth.c.transpose();
        let eig = analytic.symmetric_eigen();
        let mut order: Vec<usize> = (0..10).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let top = DMatrix::from_fn(10, 2, |i, j| eig.eigenvectors[(i, order[j])]);
        let expected = Subspace::orthonormalize(&top).unwrap();
        assert!(subspace_angle(&u, &expected).unwrap() < 1e-7);
    }
}

#[test]
fn chebyshev_center_dominates_every_generated_design() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..30 {
        let u = Subspace::orthonormalize(&gaussian(&mut rng, 25, 2)).unwrap();
        let x0 = DVector::from_fn(25, |_, _| rng.random_range(-0.8..0.8));
        let y: Vec<f64> = (u.matrix().transpose() * &x0).iter().copied().collect();
        let center = chebyshev_center(&u, &y).unwrap();
        let batch = generate_designs(&u, &y, 4, trial).unwrap();
        assert_eq!(batch.designs.len(), 4);
        for d in &batch.designs {
            assert!(d.slack <= center.slack + 1e-9);
        }
    }
}

#[test]
fn infeasible_coordinates_are_reported() {
    let u = Subspace::<f64>::orthonormalize(&DMatrix::from_row_slice(4, 1, &[1.0, 1.0, 1.0, 1.0])).unwrap();
    let err = generate_designs(&u, &[5.0], 3, 0).unwrap_err();
    match err {
        ridgekit_core::Error::Infeasible { max_violation } => assert!((max_violation - 1.5).abs() < 1e-9),
        other => panic!("unexpected {other:?}"),
    }
}
