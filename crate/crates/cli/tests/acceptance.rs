//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ridgekit_core::design::{box_slack, chebyshev_center, generate_designs};
use ridgekit_core::doe::{synth_exp_ridge, synth_quadratic, synth_ridge, uniform_inputs, DesignOfExperiments, EXP_RIDGE_DIRECTION};
use ridgekit_core::io;
use ridgekit_core::metrics::{isentropic_efficiency, perf_metrics, Station, StationState};
use ridgekit_core::polybasis::make_index_set;
use ridgekit_core::quadsurf::{
    active_subspace, coefficient_count, fit_quadratic, gradient_covariance, DimensionRule, QuadraticFitOptions, QuadraticModel, GAMMA_LEGACY,
    GAMMA_UNIFORM,
};
use ridgekit_core::sdr::{contour_regression, phd, save, sir, ContourOptions};
use ridgekit_core::simplex::{simplex_solve, LinearProgram, LpOutcome};
use ridgekit_core::subspace::{subspace_angle, Subspace};
use ridgekit_core::varpro::{jacobian_at, residual_at, varpro_fit, VarproOptions};
use ridgekit_core::BasisKind;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn line(v: &[f64]) -> Subspace<f64> {
    Subspace::orthonormalize(&DMatrix::from_column_slice(v.len(), 1, v)).unwrap()
}

fn c1_coefficient_scaling() -> Check {
    let start = Instant::now();
    let got = [coefficient_count(25, 2), coefficient_count(50, 2), coefficient_count(100, 2)];
    let elapsed = start.elapsed();
    ensure(got == [351, 1326, 5151], || format!("counts {got:?}"))?;
    within(elapsed, Duration::from_millis(1))?;
    Ok(format!("counts {got:?} in {elapsed:?}"))
}

fn c2_quadratic_round_trip() -> Check {
    let start = Instant::now();
    let spectrum = [5.0, -3.0, 2.0, 1.2, 0.7, 0.4, 0.2, 0.1, 0.05, 0.0];
    let (doe, truth) = synth_quadratic::<f64>(10, 250, 13, &spectrum, true).map_err(|e| e.to_string())?;
    let fit = fit_quadratic(&doe, &QuadraticFitOptions::default()).map_err(|e| e.to_string())?;
    let err = (&fit.model.a - &truth.a).amax().max((&fit.model.c - &truth.c).amax()).max((fit.model.e - truth.e).abs());
    ensure(err < 1e-8, || format!("coefficient error {err:e}"))?;
    let mut worst: f64 = 0.0;
    for gamma in [GAMMA_UNIFORM, GAMMA_LEGACY] {
        let k = gradient_covariance(&fit.model, gamma).map_err(|e| e.to_string())?;
        let analytic = &truth.a * &truth.a * gamma + &truth.c * truth.c.transpose();
        let eig = analytic.symmetric_eigen();
        let mut order: Vec<usize> = (0..10).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        for n in 1..=3 {
            let (u, _) = active_subspace(&k, DimensionRule::Fixed(n)).map_err(|e| e.to_string())?;
            let expected = Subspace::orthonormalize(&DMatrix::from_fn(10, n, |i, j| eig.eigenvectors[(i, order[j])])).unwrap();
            worst = worst.max(subspace_angle(&u, &expected).unwrap());
        }
    }
    ensure(worst < 1e-7, || format!("eigenvector angle {worst:e}"))?;
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("coefficient error {err:.1e}, worst angle {worst:.1e} over gamma in {{1/3, 4/3}}"))
}

fn c3_covariance_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d = 5;
    let g = gaussian(&mut rng, d, d);
    let a = (&g + g.transpose()) * 0.5;
    let c = gaussian(&mut rng, d, 1).column(0).into_owned();
    let model = QuadraticModel::new(a, c, 0.0).unwrap();
    let samples = 1_000_000;
    let x = uniform_inputs::<f64>(samples, d, 21);
    let grads = model.gradients(&x);
    let mc = grads.tr_mul(&grads) / samples as f64;
    let k = gradient_covariance(&model, GAMMA_UNIFORM).map_err(|e| e.to_string())?;
    let rel = (&mc - &k).norm() / k.norm();
    ensure(rel < 0.02, || format!("relative Frobenius error {rel:.4}"))?;
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("relative Frobenius error {rel:.2e} with 1e6 samples"))
}

fn c4_varpro_exact_recovery() -> Check {
    let start = Instant::now();
    let (doe, truth) = synth_ridge::<f64>(10, 300, 4).map_err(|e| e.to_string())?;
    let options = VarproOptions { restarts: 5, seed: 1, ..Default::default() };
    let model = varpro_fit(&doe, 1, BasisKind::TotalOrder(3), &options).map_err(|e| e.to_string())?;
    let angle = subspace_angle(&model.subspace, &line(truth.direction.as_slice())).unwrap();
    ensure(model.residual_norm < 1e-8 && angle < 1e-6, || {
        format!("best restart residual {:e}, angle {angle:e}", model.residual_norm)
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut worst: f64 = 0.0;
    for inst in 0..20 {
        let m = rng.random_range(4..=8);
        let n = rng.random_range(1..=2);
        let p = rng.random_range(2..=3);
        let x = uniform_inputs::<f64>(60, m, 100 + inst);
        let w = gaussian(&mut rng, m, 1);
        let f = DVector::from_fn(60, |i, _| (x.row(i) * &w)[0].tanh() + 0.3 * x[(i, 0)] * x[(i, 1)]);
        let doe = DesignOfExperiments::new(x, f).unwrap();
        let idx = make_index_set(BasisKind::TotalOrder(p), n).unwrap();
        let u = Subspace::orthonormalize(&gaussian(&mut rng, m, n)).unwrap().into_matrix();
        let jac = jacobian_at(&u, &doe, &idx).map_err(|e| e.to_string())?;
        let h = 1e-6;
        let mut fd = DMatrix::zeros(jac.nrows(), jac.ncols());
        for k in 0..n {
            for j in 0..m {
                let (mut up, mut um) = (u.clone(), u.clone());
                up[(j, k)] += h;
                um[(j, k)] -= h;
                let col = (residual_at(&up, &doe, &idx).unwrap() - residual_at(&um, &doe, &idx).unwrap()) / (2.0 * h);
                fd.set_column(j + m * k, &col);
            }
        }
        worst = worst.max((&jac - &fd).norm() / jac.norm());
    }
    ensure(worst < 1e-5, || format!("Jacobian relative error {worst:e}"))?;
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "residual {:.1e}, angle {angle:.1e} (restart {}), Jacobian rel. error {worst:.1e} over 20 instances",
        model.residual_norm, model.restart
    ))
}

fn c5_exp_ridge_direction() -> Check {
    let start = Instant::now();
    let doe = synth_exp_ridge::<f64>(500, 5).map_err(|e| e.to_string())?;
    let model = varpro_fit(&doe, 1, BasisKind::TotalOrder(5), &VarproOptions::default()).map_err(|e| e.to_string())?;
    let angle = subspace_angle(&model.subspace, &line(&EXP_RIDGE_DIRECTION)).unwrap();
    ensure(angle < 0.05, || format!("angle {angle}"))?;
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("angle {angle:.1e} rad to [1,1,1,1]/2"))
}

fn gaussian_doe(n: usize, d: usize, seed: u64, f: impl Fn(&[f64]) -> f64) -> DesignOfExperiments<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = gaussian(&mut rng, n, d);
    let y = DVector::from_fn(n, |i, _| f(x.row(i).iter().copied().collect::<Vec<_>>().as_slice()));
    DesignOfExperiments::new(x, y).unwrap()
}

fn c6_sdr_behavior() -> Check {
    let start = Instant::now();
    let a = [1.0, -0.5, 0.25, 0.0, 0.75];
    let dot = move |x: &[f64]| x.iter().zip(a).map(|(u, v)| u * v).sum::<f64>();
    let truth = line(&a);
    let err = |e: ridgekit_core::Error| e.to_string();

    let mut sir_worst: f64 = 0.0;
    for (seed, f) in [(1u64, Box::new(move |x: &[f64]| dot(x).exp()) as Box<dyn Fn(&[f64]) -> f64>), (2, Box::new(move |x: &[f64]| dot(x).powi(3) + dot(x)))] {
        let doe = gaussian_doe(5000, 5, seed, f);
        sir_worst = sir_worst.max(subspace_angle(&sir(&doe, 10, 1).map_err(err)?.subspace, &truth).unwrap());
    }
    ensure(sir_worst < 0.1, || format!("SIR on monotone ridges: angle {sir_worst}"))?;

    let sym = gaussian_doe(5000, 5, 3, move |x| dot(x).powi(2));
    let sir_sym = subspace_angle(&sir(&sym, 10, 1).map_err(err)?.subspace, &truth).unwrap();
    let save_sym = subspace_angle(&save(&sym, 10, 1).map_err(err)?.subspace, &truth).unwrap();
    ensure(sir_sym > 1.0 && save_sym < 0.15, || format!("symmetric ridge: SIR {sir_sym}, SAVE {save_sym}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h = {
        let q = Subspace::orthonormalize(&gaussian(&mut rng, 5, 5)).unwrap().into_matrix();
        &q * DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 0.5, -0.3, 0.1])) * q.transpose()
    };
    let hessian = h.clone();
    let quad = gaussian_doe(10_000, 5, 4, move |x| {
        let v = DVector::from_column_slice(x);
        0.5 * (v.transpose() * &hessian * &v)[0]
    });
    let eig = h.symmetric_eigen();
    let lead = eig.eigenvalues.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).unwrap().0;
    let dominant = line(eig.eigenvectors.column(lead).as_slice());
    let phd_angle = subspace_angle(&phd(&quad, 1).map_err(err)?.subspace, &dominant).unwrap();
    ensure(phd_angle < 0.15, || format!("pHd angle {phd_angle}"))?;

    let mono = gaussian_doe(1000, 5, 5, move |x| dot(x) + 0.2 * dot(x).powi(3));
    let spread = mono.outputs().max() - mono.outputs().min();
    let cr = contour_regression(&mono, &ContourOptions::new(0.02 * spread), 1).map_err(err)?;
    let cr_angle = subspace_angle(&cr.subspace, &truth).unwrap();
    ensure(cr_angle < 0.2, || format!("CR angle {cr_angle}"))?;

    let base = gaussian_doe(2000, 5, 6, move |x| dot(x) + 0.3 * x[1] * x[2]);
    let moved = base.map_outputs(|v| (0.5 * v).exp() * 3.0 - 1.0).unwrap();
    for (name, u, v) in [
        ("SIR", sir(&base, 10, 2).map_err(err)?, sir(&moved, 10, 2).map_err(err)?),
        ("SAVE", save(&base, 10, 2).map_err(err)?, save(&moved, 10, 2).map_err(err)?),
    ] {
        ensure(u.subspace.matrix() == v.subspace.matrix() && u.eigenvalues == v.eigenvalues, || {
            format!("{name} changed under a monotone transform")
        })?;
    }
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!(
        "SIR monotone {sir_worst:.3}, SIR symmetric {sir_sym:.3}, SAVE symmetric {save_sym:.3}, pHd {phd_angle:.3}, CR {cr_angle:.3} rad; transform invariance bitwise"
    ))
}

fn principal_oracle(u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    (u - v * v.tr_mul(u)).singular_values().max().min(1.0).asin()
}

fn c7_subspace_metric() -> Check {
    let e1 = Subspace::<f64>::coordinate_axes(4, &[0]).unwrap();
    let e2 = Subspace::<f64>::coordinate_axes(4, &[1]).unwrap();
    let same = subspace_angle(&e1, &e1).unwrap();
    let orth = subspace_angle(&e1, &e2).unwrap();
    ensure(same == 0.0 && (orth - std::f64::consts::FRAC_PI_2).abs() < 1e-12, || format!("phi(U,U) = {same}, phi(e1,e2) = {orth}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut oracle_err, mut rot_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let m = rng.random_range(2..15);
        let n = rng.random_range(1..m);
        let a = Subspace::orthonormalize(&gaussian(&mut rng, m, n)).unwrap();
        let b = Subspace::orthonormalize(&gaussian(&mut rng, m, n)).unwrap();
        let phi = subspace_angle(&a, &b).unwrap();
        oracle_err = oracle_err.max((phi - principal_oracle(a.matrix(), b.matrix())).abs());
        let q = Subspace::orthonormalize(&gaussian(&mut rng, n, n)).unwrap().into_matrix();
        let rotated = Subspace::from_columns(a.matrix() * q).unwrap();
        rot_err = rot_err.max((subspace_angle(&rotated, &b).unwrap() - phi).abs());
    }
    ensure(oracle_err < 1e-10, || format!("principal-angle oracle error {oracle_err:e}"))?;
    ensure(rot_err < 1e-8, || format!("rotation error {rot_err:e}"))?;
    Ok(format!("phi(U,U) = 0, phi(e1,e2) = pi/2, oracle error {oracle_err:.1e}, rotation error {rot_err:.1e}"))
}

fn vertex_enumeration(c: &DVector<f64>, g: &DMatrix<f64>, h: &DVector<f64>) -> Option<f64> {
    let (rows, k) = g.shape();
    let mut best: Option<f64> = None;
    let mut stack = vec![(0usize, Vec::<usize>::new())];
    while let Some((start, set)) = stack.pop() {
        if set.len() == k {
            let a = DMatrix::from_fn(k, k, |i, j| g[(set[i], j)]);
            if a.determinant().abs() < 1e-10 {
                continue;
            }
            let b = DVector::from_fn(k, |i, _| h[set[i]]);
            let Some(z) = a.lu().solve(&b) else { continue };
            if (h - g * &z).iter().all(|&s| s >= -1e-9) {
                let v = c.dot(&z);
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
            continue;
        }
        for r in start..rows {
            let mut next = set.clone();
            next.push(r);
            stack.push((r + 1, next));
        }
    }
    best
}

fn c8_design_generation() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let (mut box_worst, mut y_worst, mut designs): (f64, f64, usize) = (f64::NEG_INFINITY, 0.0, 0);
    for trial in 0..100u64 {
        let u = Subspace::orthonormalize(&gaussian(&mut rng, 25, 2)).unwrap();
        let x0 = DVector::from_fn(25, |_, _| rng.random_range(-1.0..1.0));
        let y: Vec<f64> = u.matrix().tr_mul(&x0).iter().copied().collect();
        let batch = generate_designs(&u, &y, 6, trial).map_err(|e| format!("trial {trial}: {e}"))?;
        let center = chebyshev_center(&u, &y).map_err(|e| e.to_string())?;
        for d in &batch.designs {
            box_worst = box_worst.max(d.x.amax() - 1.0);
            let yy = u.matrix().tr_mul(&d.x);
            y_worst = y_worst.max(yy.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
            ensure(box_slack(&d.x) <= center.slack + 1e-9, || format!("trial {trial}: design slack exceeds the center's"))?;
            designs += 1;
        }
    }
    ensure(box_worst <= 1e-9, || format!("box violation {box_worst:e}"))?;
    ensure(y_worst < 1e-8, || format!("coordinate error {y_worst:e}"))?;

    let mut lp_worst: f64 = 0.0;
    let mut infeasible = 0;
    for _ in 0..200 {
        let k = rng.random_range(2..=3);
        let extra = rng.random_range(1..=5);
        let rows = 2 * k + extra;
        let mut g = DMatrix::zeros(rows, k);
        let mut h = DVector::zeros(rows);
        for j in 0..k {
            g[(2 * j, j)] = 1.0;
            g[(2 * j + 1, j)] = -1.0;
            h[2 * j] = rng.random_range(0.5..3.0);
            h[2 * j + 1] = rng.random_range(0.5..3.0);
        }
        for r in 2 * k..rows {
            for j in 0..k {
                g[(r, j)] = rng.sample(StandardNormal);
            }
            h[r] = rng.random_range(-2.0..1.0);
        }
        let c = gaussian(&mut rng, k, 1).column(0).into_owned();
        let oracle = vertex_enumeration(&c, &g, &h);
        match (oracle, simplex_solve(&LinearProgram::new(c, g, h)).map_err(|e| e.to_string())?) {
            (Some(v), LpOutcome::Optimal { value, .. }) => lp_worst = lp_worst.max((v - value).abs()),
            (None, LpOutcome::Infeasible) => infeasible += 1,
            (o, s) => return Err(format!("vertex enumeration {o:?} vs simplex {s:?}")),
        }
    }
    ensure(lp_worst < 1e-9, || format!("LP objective error {lp_worst:e}"))?;
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "{designs} designs: box excess {:.1e}, coordinate error {y_worst:.1e}; 200 LPs ({infeasible} infeasible) within {lp_worst:.1e}",
        box_worst.max(0.0)
    ))
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn ridgekit(cwd: &Path, args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ridgekit")).current_dir(cwd).args(args).output().map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    if !out.status.success() {
        return Err(format!("ridgekit {} failed: {stdout}{}", args.join(" "), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(stdout)
}

/// Every command writing artifacts, in dependency order.
const SCRIPT: &[&[&str]] = &[
    &["synth", "exp", "--samples", "400", "--seed", "3", "--out", "exp.csv"],
    &["synth", "quad", "--dim", "5", "--samples", "120", "--seed", "3", "--linear", "--out", "quad.csv", "--truth-out", "quad_truth.json"],
    &["synth", "ridge", "--dim", "6", "--samples", "200", "--seed", "3", "--out", "ridge.csv", "--truth-out", "ridge_u.csv"],
    &["fit", "quad", "--in", "exp.csv", "--n", "2", "--out", "q.json", "--subspace-out", "q_u.csv", "--summary-out", "q_sum.csv"],
    &["fit", "quad", "--in", "quad.csv", "--gamma", "1.3333333333333333", "--out", "q2.json"],
    &["fit", "sir", "--in", "exp.csv", "--n", "2", "--slices", "8", "--out", "sir.json", "--subspace-out", "sir_u.csv"],
    &["fit", "save", "--in", "exp.csv", "--n", "2", "--out", "save.json"],
    &["fit", "phd", "--in", "quad.csv", "--n", "2", "--out", "phd.json"],
    &["fit", "cr", "--in", "exp.csv", "--n", "1", "--tolerance-c", "0.3", "--seed", "5", "--out", "cr.json"],
    &["fit", "varpro", "--in", "ridge.csv", "--n", "1", "--degree", "3", "--seed", "7", "--out", "v.json", "--summary-out", "v_sum.csv"],
    &["bootstrap", "--in", "exp.csv", "--replicates", "40", "--subsample", "300", "--seed", "2", "--out", "boot.json"],
    &["angle", "--a", "q_u.csv", "--b", "sir.json"],
    &["project", "--in", "exp.csv", "--subspace", "sir_u.csv", "--out", "proj.csv"],
    &["surface", "--in", "exp.csv", "--subspace", "q_u.csv", "--name", "cruise", "--out", "cruise.json"],
    &["surface", "--in", "exp.csv", "--subspace", "sir_u.csv", "--degree", "3", "--name", "sea", "--out", "sea.json"],
    &["contour", "--point", "cruise.json", "--resolution", "9", "--out", "grid.csv"],
    &["design", "generate", "--point", "cruise.json", "--y", "0.1,-0.2", "--count", "5", "--seed", "4", "--out", "designs.json", "--parallel-out", "pc.csv"],
    &["design", "crossproject", "--designs", "designs.json", "--point", "sea.json", "--out", "cross.csv"],
    &["metrics", "--inlet", "10,100000,288", "--bypass", "6,200000,360", "--core", "4,200000,360", "--out", "metrics.csv"],
    &["normalize", "--in", "quad.csv", "--out", "quad_norm.csv", "--map", "quad_map.json"],
];

fn run_script() -> Result<(Workspace, Vec<String>), String> {
    let ws = Workspace { dir: tempfile::tempdir().map_err(|e| e.to_string())? };
    let mut lines = Vec::new();
    for args in SCRIPT {
        lines.push(ridgekit(ws.dir.path(), args)?);
    }
    Ok((ws, lines))
}

fn c9_determinism_and_io() -> Check {
    let (a, out_a) = run_script()?;
    let (b, out_b) = run_script()?;
    ensure(out_a == out_b, || "summary lines differ between runs".into())?;
    let mut files: Vec<String> = std::fs::read_dir(a.dir.path())
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    files.sort();
    for f in &files {
        let (x, y) = (std::fs::read(a.path(f)).unwrap(), std::fs::read(b.path(f)).unwrap());
        ensure(x == y, || format!("{f} differs between runs"))?;
    }

    let opts = io::DoeReadOptions::default();
    let doe = io::read_doe(a.path("exp.csv"), &opts).map_err(|e| e.to_string())?;
    let direct = synth_exp_ridge::<f64>(400, 3).unwrap();
    ensure(doe.inputs() == direct.inputs() && doe.outputs() == direct.outputs(), || "DoE file is not value-exact".into())?;
    let again = io::parse_doe(&io::doe_to_string(&doe).unwrap(), &opts).map_err(|e| e.to_string())?;
    ensure(again == doe, || "DoE round trip changed values".into())?;

    let u = io::read_subspace(a.path("q_u.csv")).map_err(|e| e.to_string())?;
    ensure(io::parse_subspace(&io::subspace_to_string(&u).unwrap()).unwrap() == u, || "subspace round trip changed values".into())?;

    for model in ["q.json", "q2.json", "sir.json", "save.json", "phd.json", "cr.json", "v.json", "boot.json", "cruise.json", "designs.json", "quad_map.json"] {
        let doc = io::read_document(a.path(model)).map_err(|e| format!("{model}: {e}"))?;
        let text = io::document_to_string(&doc).unwrap();
        ensure(io::parse_document(&text).unwrap() == doc, || format!("{model} round trip changed values"))?;
        ensure(text.as_bytes() == std::fs::read(a.path(model)).unwrap().as_slice(), || format!("{model} re-serializes differently"))?;
    }
    let q = match io::read_document(a.path("q.json")).unwrap() {
        io::Document::Quadratic(d) => d,
        _ => return Err("q.json is not a quadratic document".into()),
    };
    ensure(q.subspace.to_subspace().unwrap() == u, || "model subspace differs from the CSV export".into())?;
    ensure(out_a[11].contains("phi="), || "angle printed no phi".into())?;
    Ok(format!("{} commands, {} files byte-identical across runs; DoE, subspace and 11 model files value-exact", SCRIPT.len(), files.len()))
}

fn c10_performance_metrics() -> Check {
    let oracle = (2f64.powf(0.4 / 1.4) - 1.0) / 0.25 * 100.0;
    let eta = isentropic_efficiency(2.0, 1.25, 1.4).map_err(|e| e.to_string())?;
    ensure((eta - oracle).abs() < 1e-12, || format!("eta {eta} vs {oracle}"))?;
    let station = |m: f64, p: f64, t: f64| Station { mass_flow: m, pressure: p, temperature: t };
    let state = |beta: f64| StationState {
        inlet: station(10.0 * beta, 1.0e5, 288.0),
        bypass: station(6.0 * beta, 2.0e5, 360.0),
        core: station(4.0 * beta, 2.0e5, 360.0),
        gamma: 1.4,
    };
    let base = perf_metrics(&state(1.0)).map_err(|e| e.to_string())?;
    ensure((base.efficiency_percent - oracle).abs() < 1e-12, || format!("station efficiency {}", base.efficiency_percent))?;
    let mut worst: f64 = 0.0;
    for beta in [1e-3, 0.37, 2.0, 55.5, 1e4] {
        let m = perf_metrics(&state(beta)).map_err(|e| e.to_string())?;
        worst = worst
            .max((m.pressure_ratio - base.pressure_ratio).abs())
            .max((m.temperature_ratio - base.temperature_ratio).abs())
            .max((m.efficiency_percent - base.efficiency_percent).abs());
    }
    ensure(worst < 1e-12, || format!("scale invariance error {worst:e}"))?;
    Ok(format!("eta = {eta:.12}% (oracle {oracle:.12}%), scale error {worst:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("coefficient scaling", c1_coefficient_scaling),
        ("quadratic round trip", c2_quadratic_round_trip),
        ("covariance oracle", c3_covariance_oracle),
        ("variable-projection exact recovery", c4_varpro_exact_recovery),
        ("exp-ridge direction", c5_exp_ridge_direction),
        ("SDR behavior suite", c6_sdr_behavior),
        ("subspace metric", c7_subspace_metric),
        ("design generation", c8_design_generation),
        ("determinism and I/O", c9_determinism_and_io),
        ("performance metrics", c10_performance_metrics),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let elapsed = start.elapsed();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
