use std::io::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use ridgekit_core::design::{crossproject, generate_designs, parallel_weights};
use ridgekit_core::doe::{normalize_inputs, synth_exp_ridge, synth_quadratic, synth_ridge, DesignOfExperiments};
use ridgekit_core::io::{self, ColumnMap, Document, DoeReadOptions, OperatingPoint};
use ridgekit_core::metrics::{perf_metrics, Station, StationState};
use ridgekit_core::quadsurf::{
    active_subspace, bootstrap_eigenvalues, fit_quadratic, gradient_covariance, BootstrapOptions, DimensionRule, QuadraticFitOptions,
    QuadraticModel,
};
use ridgekit_core::sdr::{contour_regression, phd, save, sir, ContourOptions, SdrEstimate};
use ridgekit_core::subspace::{contour_grid, fit_response_surface, project, subspace_angle, Subspace};
use ridgekit_core::varpro::{varpro_fit, VarproOptions};
use ridgekit_core::{Error, Result};

use crate::args::{Command, DesignCommand, ExportArgs, FitCommand, InputArgs, ServeArgs, SynthCommand};
use crate::Summary;

pub(crate) fn execute(command: Command) -> Result<Summary> {
    match command {
        Command::Fit { method } => fit(method),
        Command::Bootstrap(a) => {
            let doe = load(&a.input)?;
            let options = BootstrapOptions { subsample_size: a.subsample, replicates: a.replicates, seed: a.seed, gamma: a.gamma };
            let report = bootstrap_eigenvalues(&doe, &options)?;
            let doc = io::BootstrapDoc { objective: doe.objective_name.clone(), gamma: a.gamma, seed: a.seed, eigen: (&report).into() };
            io::write_document(&a.out, &Document::Bootstrap(doc))?;
            let mut s = Summary::new("bootstrap");
            s.push("out", a.out.display()).push("replicates", a.replicates).push("subsample", a.subsample);
            if let (Some(lo), Some(hi)) = (&report.bootstrap_lo, &report.bootstrap_hi) {
                s.number("lambda1", report.eigenvalues[0]).number("lambda1_lo", lo[0]).number("lambda1_hi", hi[0]);
            }
            Ok(s)
        }
        Command::Angle(a) => {
            let u = load_subspace(&a.a)?;
            let v = load_subspace(&a.b)?;
            let phi = subspace_angle(&u, &v)?;
            let mut s = Summary::new("angle");
            s.number("phi", phi);
            Ok(s)
        }
        Command::Project(a) => {
            let doe = load(&a.input)?;
            let u = load_subspace(&a.subspace)?;
            let coords = project(doe.inputs(), &u)?;
            io::write_string(&a.out, &io::summary_plot_to_string(&coords, doe.outputs())?)?;
            let mut s = Summary::new("project");
            s.push("out", a.out.display()).push("samples", doe.len()).push("n", u.dim());
            Ok(s)
        }
        Command::Surface(a) => {
            let doe = load(&a.input)?;
            let u = load_subspace(&a.subspace)?;
            let coords = project(doe.inputs(), &u)?;
            let surface = fit_response_surface(&coords, doe.outputs(), a.basis.kind(2))?;
            let point = OperatingPoint {
                name: a.name.clone(),
                objective: doe.objective_name.clone(),
                subspace: u,
                surface,
                training_y: coords,
                training_f: doe.outputs().clone(),
            };
            io::write_document(&a.out, &Document::OperatingPoint(io::OperatingPointDoc::new(&point)))?;
            let mut s = Summary::new("surface");
            s.push("out", a.out.display())
                .push("name", &a.name)
                .push("n", point.subspace.dim())
                .push("terms", point.surface.alpha.len())
                .number("r_squared", point.surface.r_squared);
            Ok(s)
        }
        Command::Contour(a) => {
            let point = io::read_operating_point(&a.point)?;
            let grid = contour_grid(&point.surface, a.resolution)?;
            io::write_string(&a.out, &io::contour_to_string(&grid)?)?;
            let mut s = Summary::new("contour");
            s.push("out", a.out.display()).push("points", grid.len());
            Ok(s)
        }
        Command::Design { action } => design(action),
        Command::Synth { kind } => synth(kind),
        Command::Metrics(a) => {
            let st = |v: [f64; 3]| Station { mass_flow: v[0], pressure: v[1], temperature: v[2] };
            let state = StationState { inlet: st(a.inlet), bypass: st(a.bypass), core: st(a.core), gamma: a.heat_ratio };
            let m = perf_metrics(&state)?;
            let values = [
                ("pressure_ratio", m.pressure_ratio),
                ("temperature_ratio", m.temperature_ratio),
                ("efficiency_percent", m.efficiency_percent),
                ("capacity_core", m.capacity_core),
                ("capacity_bypass", m.capacity_bypass),
            ];
            let mut s = Summary::new("metrics");
            for (k, v) in values {
                s.number(k, v);
            }
            if let Some(out) = &a.out {
                let header: Vec<String> = values.iter().map(|(k, _)| k.to_string()).collect();
                let row = vec![values.iter().map(|&(_, v)| io::format_number(v)).collect()];
                io::write_string(out, &io::render_csv(&header, &row)?)?;
                s.push("out", out.display());
            }
            Ok(s)
        }
        Command::Normalize(a) => {
            let options = DoeReadOptions { normalized: false, columns: column_map(&a.input_columns, &a.output_column) };
            let doe = io::read_doe(&a.input, &options)?;
            let (normalized, map) = normalize_inputs(&doe)?;
            io::write_doe(&a.out, &normalized)?;
            io::write_document(&a.map, &Document::Normalization((&map).into()))?;
            let constant = map.lower.iter().zip(&map.upper).filter(|(lo, hi)| lo >= hi).count();
            let mut s = Summary::new("normalize");
            s.push("out", a.out.display()).push("map", a.map.display()).push("d", map.dim()).push("constant_columns", constant);
            Ok(s)
        }
        Command::Serve(a) => serve(a),
    }
}

fn column_map(inputs: &Option<Vec<String>>, output: &Option<String>) -> Option<ColumnMap> {
    match (inputs, output) {
        (Some(i), Some(o)) => Some(ColumnMap { inputs: i.clone(), output: o.clone() }),
        _ => None,
    }
}

fn load(a: &InputArgs) -> Result<DesignOfExperiments<f64>> {
    let options = DoeReadOptions { normalized: a.normalized, columns: column_map(&a.input_columns, &a.output_column) };
    io::read_doe(&a.input, &options).map_err(|e| with_path(&a.input, e))
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, message } => Error::Parse { line, message: format!("{}: {message}", path.display()) },
        Error::InvalidArgument(m) => Error::InvalidArgument(format!("{}: {m}", path.display())),
        other => other,
    }
}

/// Reads a subspace CSV or the subspace stored in a model document.
fn load_subspace(path: &Path) -> Result<Subspace<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        let doc = io::parse_document(&text).map_err(|e| with_path(path, e))?;
        let kind = doc.kind();
        doc.subspace()
            .unwrap_or_else(|| Err(Error::InvalidArgument(format!("{}: a {kind} document carries no subspace", path.display()))))
    } else {
        io::parse_subspace(&text).map_err(|e| with_path(path, e))
    }
}

fn export(export: &ExportArgs, doc: &Document, u: &Subspace<f64>, doe: &DesignOfExperiments<f64>, s: &mut Summary) -> Result<()> {
    io::write_document(&export.out, doc)?;
    s.push("out", export.out.display());
    if let Some(p) = &export.subspace_out {
        io::write_subspace(p, u)?;
        s.push("subspace_out", p.display());
    }
    if let Some(p) = &export.summary_out {
        let coords = project(doe.inputs(), u)?;
        io::write_string(p, &io::summary_plot_to_string(&coords, doe.outputs())?)?;
        s.push("summary_out", p.display());
    }
    Ok(())
}

fn quadratic_doc(model: &QuadraticModel<f64>, rank: usize, rank_deficient: bool, gamma: f64, rule: DimensionRule, objective: &str) -> Result<(io::QuadraticDoc, Subspace<f64>)> {
    let k = gradient_covariance(model, gamma)?;
    let (u, report) = active_subspace(&k, rule)?;
    let rows = |m: &DMatrix<f64>| m.row_iter().map(|r| r.iter().copied().collect()).collect();
    let doc = io::QuadraticDoc {
        objective: objective.to_string(),
        gamma,
        a: rows(&model.a),
        c: model.c.iter().copied().collect(),
        e: model.e,
        rank,
        rank_deficient,
        covariance: rows(&k),
        eigen: (&report).into(),
        subspace: (&u).into(),
    };
    Ok((doc, u))
}

fn sdr_summary(name: &str, est: &SdrEstimate<f64>, s: &mut Summary) {
    s.push("method", name).push("n", est.subspace.dim());
    if let Some(&l) = est.eigenvalues.first() {
        s.number("eigenvalue1", l);
    }
    if est.degenerate_slices > 0 {
        s.push("degenerate_slices", est.degenerate_slices);
    }
}

fn fit(method: FitCommand) -> Result<Summary> {
    let mut s = Summary::new("fit");
    match method {
        FitCommand::Quad { input, export: ex, n, max_dim, gamma, allow_undersampled } => {
            let doe = load(&input)?;
            let options = QuadraticFitOptions { allow_undersampled, ..Default::default() };
            let fit = fit_quadratic(&doe, &options)?;
            let rule = match n {
                Some(n) => DimensionRule::Fixed(n),
                None => DimensionRule::Gap { max_dim: max_dim.unwrap_or(doe.dim()) },
            };
            let (doc, u) = quadratic_doc(&fit.model, fit.rank, fit.rank_deficient, gamma, rule, &doe.objective_name)?;
            s.push("method", "quad").push("n", u.dim()).number("eigenvalue1", doc.eigen.eigenvalues[0]).number("gamma", gamma);
            if fit.rank_deficient {
                s.push("rank_deficient", true).push("rank", fit.rank);
            }
            export(&ex, &Document::Quadratic(doc), &u, &doe, &mut s)?;
        }
        FitCommand::Sir { input, export: ex, n, slices } => {
            let doe = load(&input)?;
            let est = sir(&doe, slices, n)?;
            sdr_summary("sir", &est, &mut s);
            let mut doc = io::SdrDoc::new(&est, &doe.objective_name, io::SdrMethod::Sir);
            doc.slices = Some(slices);
            export(&ex, &Document::Sdr(doc), &est.subspace, &doe, &mut s)?;
        }
        FitCommand::Save { input, export: ex, n, slices } => {
            let doe = load(&input)?;
            let est = save(&doe, slices, n)?;
            sdr_summary("save", &est, &mut s);
            let mut doc = io::SdrDoc::new(&est, &doe.objective_name, io::SdrMethod::Save);
            doc.slices = Some(slices);
            export(&ex, &Document::Sdr(doc), &est.subspace, &doe, &mut s)?;
        }
        FitCommand::Phd { input, export: ex, n } => {
            let doe = load(&input)?;
            let est = phd(&doe, n)?;
            sdr_summary("phd", &est, &mut s);
            let doc = io::SdrDoc::new(&est, &doe.objective_name, io::SdrMethod::Phd);
            export(&ex, &Document::Sdr(doc), &est.subspace, &doe, &mut s)?;
        }
        FitCommand::Cr { input, export: ex, n, tolerance_c, seed, pair_cap } => {
            let doe = load(&input)?;
            let est = contour_regression(&doe, &ContourOptions { tolerance: tolerance_c, pair_cap, seed }, n)?;
            sdr_summary("cr", &est, &mut s);
            let mut doc = io::SdrDoc::new(&est, &doe.objective_name, io::SdrMethod::Cr);
            doc.tolerance = Some(tolerance_c);
            doc.seed = Some(seed);
            export(&ex, &Document::Sdr(doc), &est.subspace, &doe, &mut s)?;
        }
        FitCommand::Varpro { input, export: ex, basis, n, seed, restarts, max_iterations } => {
            let doe = load(&input)?;
            let options = VarproOptions { max_iterations, restarts, seed, ..Default::default() };
            let model = varpro_fit(&doe, n, basis.kind(3), &options)?;
            s.push("method", "varpro")
                .push("n", n)
                .number("residual_norm", model.residual_norm)
                .number("r_squared", model.r_squared)
                .push("converged", model.converged)
                .push("restart", model.restart);
            let doc = io::RidgeDoc::new(&model, &doe.objective_name, seed, restarts);
            export(&ex, &Document::Ridge(doc), &model.subspace, &doe, &mut s)?;
        }
    }
    Ok(s)
}

fn design(action: DesignCommand) -> Result<Summary> {
    match action {
        DesignCommand::Generate { point, y, count, seed, out, parallel_out } => {
            let p = io::read_operating_point(&point)?;
            let batch = generate_designs(&p.subspace, &y, count, seed)?;
            let doc = io::DesignBatchDoc::new(&batch, &p.name, seed);
            io::write_document(&out, &Document::DesignBatch(doc))?;
            let mut s = Summary::new("design.generate");
            s.push("out", out.display()).push("point", &p.name).push("designs", batch.designs.len());
            if batch.short {
                s.push("short", true);
            }
            s.number("center_slack", batch.designs[0].slack);
            if let Some(pc) = parallel_out {
                let lead = p.subspace.column(0);
                let xs: Vec<DVector<f64>> = batch.designs.iter().map(|d| d.x.clone()).collect();
                let ws: Vec<DVector<f64>> = xs.iter().map(|x| parallel_weights(x, &lead)).collect();
                io::write_string(&pc, &io::parallel_coordinates_to_string(&xs, &ws)?)?;
                s.push("parallel_out", pc.display());
            }
            Ok(s)
        }
        DesignCommand::Crossproject { designs, point, out } => {
            let batch = match io::read_document(&designs)? {
                Document::DesignBatch(d) => d.to_batch()?,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "{}: expected a design_batch document, found {}",
                        designs.display(),
                        other.kind()
                    )))
                }
            };
            let p = io::read_operating_point(&point)?;
            let cross = crossproject(&batch, &p.surface, &p.subspace)?;
            io::write_string(&out, &io::cross_projection_to_string(&cross)?)?;
            let mut s = Summary::new("design.crossproject");
            s.push("out", out.display())
                .push("point", &p.name)
                .push("designs", cross.len())
                .push("extrapolated", cross.iter().filter(|c| c.extrapolated).count());
            Ok(s)
        }
    }
}

fn synth(kind: SynthCommand) -> Result<Summary> {
    let mut s = Summary::new("synth");
    match kind {
        SynthCommand::Exp { samples, seed, out } => {
            let doe = synth_exp_ridge::<f64>(samples, seed)?;
            io::write_doe(&out, &doe)?;
            s.push("kind", "exp").push("out", out.display()).push("samples", samples).push("d", 4);
        }
        SynthCommand::Quad { dim, samples, seed, spectrum, linear, out, truth_out, gamma } => {
            let spectrum = spectrum.unwrap_or_else(|| (0..dim).map(|i| 0.5f64.powi(i as i32)).collect());
            let (doe, model) = synth_quadratic::<f64>(dim, samples, seed, &spectrum, linear)?;
            io::write_doe(&out, &doe)?;
            s.push("kind", "quad").push("out", out.display()).push("samples", samples).push("d", dim);
            if let Some(t) = truth_out {
                let (doc, _) = quadratic_doc(&model, 0, false, gamma, DimensionRule::Gap { max_dim: dim }, &doe.objective_name)?;
                io::write_document(&t, &Document::Quadratic(doc))?;
                s.push("truth_out", t.display());
            }
        }
        SynthCommand::Ridge { dim, samples, seed, out, truth_out } => {
            let (doe, truth) = synth_ridge::<f64>(dim, samples, seed)?;
            io::write_doe(&out, &doe)?;
            s.push("kind", "ridge").push("out", out.display()).push("samples", samples).push("d", dim);
            if let Some(t) = truth_out {
                let u = Subspace::from_columns(DMatrix::from_column_slice(dim, 1, truth.direction.as_slice()))?;
                io::write_subspace(&t, &u)?;
                s.push("truth_out", t.display());
            }
        }
    }
    Ok(s)
}

fn serve(a: ServeArgs) -> Result<Summary> {
    let session = ridgekit_explorer::Session::load(&a.a, &a.b)?;
    let names: Vec<String> = session.points().iter().map(|p| p.name.clone()).collect();
    let d = session.dim();
    ridgekit_explorer::serve_blocking(session, a.addr, |addr| {
        let mut s = Summary::new("serve");
        s.push("listening", addr).push("d", d).push("points", names.join(","));
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "{}", s.render("ok"));
        let _ = out.flush();
    })?;
    Ok(Summary::new("serve"))
}
