//! Runs scenarios end to end and renders their artifacts.
//!
//! A `run` produces one report document plus one time-series file per
//! model (two of each when the scenario wraps a base model in its dual).
//! A `sweep` reruns the scenario at each requested total time with the
//! grid spacing held fixed and tabulates the per-pair scaling columns.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use adlab_core::diagnostics::{
    self, all_ordered_pairs, amplitudes, pairs_involving, spectrum_path, AmplitudePath,
    DiagnosticsReport, ReportOptions, SpectrumPath, TransitionAmplitudePath,
};
use adlab_core::models::{GroverAdiabatic, HamiltonianModel};
use adlab_core::numkernel::{eigh, StateVector};
use adlab_core::propagate::{check_step_phase, evolve, EvolutionTrace};

use crate::config::{
    build_model, BuiltModel, DiagnosticsConfig, InitialStateConfig, ModelConfig, ScenarioConfig,
};
use crate::report::ReportDoc;
use crate::CliError;

pub struct WrittenFile {
    pub path: PathBuf,
    pub summary: String,
}

/// Executes `run <config>`: full pipeline, report + time series on disk.
pub fn run_scenario(
    config: &ScenarioConfig,
    config_path: &Path,
    output_dir: &Path,
) -> Result<Vec<WrittenFile>, CliError> {
    let base_dir = scenario_dir(config_path);
    let built = build_model(&config.model, config.total_time, config.steps, &base_dir)?;
    check_selection_rule_target(config, &built)?;

    let stem = config.stem(config_path);
    let mut written = Vec::new();

    if let Some(dual) = built.as_dual() {
        // Base first, then its companion: the pair of reports is the point.
        let base_outcome = run_single(dual.base(), None, config)?;
        written.extend(write_outcome(
            output_dir,
            &format!("{stem}.base"),
            base_outcome,
        )?);
        let dual_outcome = run_single(dual, None, config)?;
        written.extend(write_outcome(output_dir, &stem, dual_outcome)?);
    } else {
        let outcome = run_single(built.as_dyn(), built.as_grover(), config)?;
        written.extend(write_outcome(output_dir, &stem, outcome)?);
    }
    Ok(written)
}

fn check_selection_rule_target(
    config: &ScenarioConfig,
    built: &BuiltModel,
) -> Result<(), CliError> {
    if config.diagnostics.selection_rule && built.as_grover().is_none() {
        return Err(CliError::validation(
            "selection_rule applies only to grover_adiabatic models",
        ));
    }
    Ok(())
}

fn scenario_dir(config_path: &Path) -> PathBuf {
    config_path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

struct RunOutcome {
    report: ReportDoc,
    timeseries: Option<String>,
}

fn write_outcome(
    output_dir: &Path,
    stem: &str,
    outcome: RunOutcome,
) -> Result<Vec<WrittenFile>, CliError> {
    std::fs::create_dir_all(output_dir)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", output_dir.display())))?;
    let mut written = Vec::new();

    let report_path = output_dir.join(format!("{stem}.report.txt"));
    write_text(&report_path, &outcome.report.to_text())?;
    written.push(WrittenFile {
        path: report_path,
        summary: format!("{} report entries", outcome.report.len()),
    });

    if let Some(timeseries) = outcome.timeseries {
        let ts_path = output_dir.join(format!("{stem}.timeseries.csv"));
        let rows = timeseries.lines().count().saturating_sub(1);
        write_text(&ts_path, &timeseries)?;
        written.push(WrittenFile {
            path: ts_path,
            summary: format!("{rows} time-series rows"),
        });
    }
    Ok(written)
}

fn write_text(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

fn resolve_pairs(diag: &DiagnosticsConfig, dim: usize, tracked: usize) -> Result<Vec<(usize, usize)>, CliError> {
    let pairs: Vec<(usize, usize)> = match &diag.pairs {
        Some(list) => list.iter().map(|[n, m]| (*n, *m)).collect(),
        None => {
            if dim <= 8 {
                all_ordered_pairs(dim)
            } else {
                pairs_involving(tracked, dim)
            }
        }
    };
    for &(n, m) in &pairs {
        if n == m || n >= dim || m >= dim {
            return Err(CliError::validation(format!(
                "pair ({n}, {m}) is not a valid ordered level pair for dimension {dim}"
            )));
        }
    }
    Ok(pairs)
}

fn initial_state(
    model: &dyn HamiltonianModel,
    config: &InitialStateConfig,
) -> Result<StateVector, CliError> {
    match config {
        InitialStateConfig::Level { level } => {
            if *level >= model.dim() {
                return Err(CliError::validation(format!(
                    "initial level {level} out of range for dimension {}",
                    model.dim()
                )));
            }
            let eig = eigh(&model.evaluate(0.0))?;
            Ok(eig.vectors[*level].clone())
        }
        InitialStateConfig::Amplitudes { amplitudes } => {
            if amplitudes.len() != model.dim() {
                return Err(CliError::validation(format!(
                    "initial_state.amplitudes has {} entries, model dimension is {}",
                    amplitudes.len(),
                    model.dim()
                )));
            }
            let state = StateVector::new(
                amplitudes
                    .iter()
                    .map(|[re, im]| num_complex::Complex64::new(*re, *im))
                    .collect(),
            );
            state.check_normalized(1e-10)?;
            Ok(state)
        }
    }
}

fn run_single(
    model: &dyn HamiltonianModel,
    grover: Option<&GroverAdiabatic>,
    config: &ScenarioConfig,
) -> Result<RunOutcome, CliError> {
    let diag = &config.diagnostics;
    let tracked = config.initial_state.level().unwrap_or(0);
    let pairs = resolve_pairs(diag, model.dim(), tracked)?;

    let mut doc = ReportDoc::new();
    echo_config(&mut doc, config);
    doc.put_text("run.model_label", model.label());
    doc.put_int("run.dim", model.dim() as i64);
    doc.put_f64("run.total_time", model.total_time());
    doc.put_int("run.steps", config.steps as i64);

    let mut timeseries = None;
    if diag.needs_trace() {
        let psi0 = initial_state(model, &config.initial_state)?;
        check_step_phase(model, config.steps)?;
        let trace = evolve(model, &psi0, config.steps, false)?;
        let path = spectrum_path(model, config.steps)?;
        let amp = amplitudes(&trace, &path)?;
        let options = ReportOptions {
            pairs: pairs.clone(),
            cutoff_threshold: diag.cutoff_threshold,
            min_time: None,
            with_metric: diag.metric,
            with_adiabatic_error: diag.adiabatic_error,
            with_fourier: diag.fourier,
            with_zero_count: diag.zero_count,
            with_drift: diag.drift,
        };
        let report = DiagnosticsReport::assemble(model, &trace, &path, &amp, &options)?;
        insert_report(&mut doc, &report, config);
        timeseries = Some(render_timeseries(
            diag,
            &trace,
            &path,
            &amp,
            &pairs,
            model,
        )?);
    } else if diag.needs_path() {
        let path = spectrum_path(model, config.steps)?;
        if diag.metric {
            for &(n, m) in &pairs {
                if path.is_degenerate(n, m) {
                    doc.put_bool(format!("diag.degenerate.{n}_{m}"), true);
                    continue;
                }
                let metric = diagnostics::traditional_metric(&path, model, n, m)?;
                doc.put_f64(format!("diag.metric.{n}_{m}"), metric);
            }
        }
        if diag.drift {
            for n in 0..path.levels() {
                let drift = diagnostics::eigenstate_drift(&path, n);
                insert_drift_summary(&mut doc, n, &drift);
            }
        }
    }

    if diag.min_time {
        let estimate = diagnostics::min_time(model, diag.min_time_s_steps, tracked)?;
        doc.put_f64("diag.min_time.value", estimate.t_min);
        doc.put_f64("diag.min_time.at_s", estimate.at_s);
        doc.put_int("diag.min_time.source_level", estimate.source_level as i64);
        doc.put_int("diag.min_time.partner_level", estimate.partner_level as i64);
        // The bound wants T to dominate this scale; report a concrete
        // suggestion instead of burying the margin in the math.
        doc.put_int("diag.min_time.recommended_multiplier", 10);
        doc.put_f64("diag.min_time.recommended_total_time", 10.0 * estimate.t_min);
    }
    if diag.min_gap {
        let gap = diagnostics::minimum_gap(model, diag.min_gap_s_steps, 0, 1)?;
        doc.put_f64("diag.min_gap.value", gap.gap);
        doc.put_f64("diag.min_gap.at_s", gap.at_s);
    }
    if diag.curvature {
        let check = diagnostics::curvature_check(
            model,
            tracked,
            diag.curvature_s,
            diag.curvature_step,
        )?;
        doc.put_f64("diag.curvature.analytic", check.analytic);
        doc.put_f64("diag.curvature.finite_difference", check.finite_difference);
        doc.put_f64("diag.curvature.relative_error", check.relative_error);
    }
    if diag.selection_rule {
        if let Some(grover) = grover {
            let samples = diag.selection_samples();
            let residual = diagnostics::grover_selection_rule(grover, &samples)?;
            doc.put_f64("diag.selection_rule.max_residual", residual);
            doc.put_int("diag.selection_rule.samples", samples.len() as i64);
        }
    }

    Ok(RunOutcome {
        report: doc,
        timeseries,
    })
}

fn echo_config(doc: &mut ReportDoc, config: &ScenarioConfig) {
    if let Some(label) = &config.label {
        doc.put_text("config.label", label);
    }
    doc.put_f64("config.total_time", config.total_time);
    doc.put_int("config.steps", config.steps as i64);
    echo_model(doc, "config.model", &config.model);
    match &config.initial_state {
        InitialStateConfig::Level { level } => {
            doc.put_int("config.initial_state.level", *level as i64);
        }
        InitialStateConfig::Amplitudes { amplitudes } => {
            for (i, [re, im]) in amplitudes.iter().enumerate() {
                doc.put_f64(format!("config.initial_state.amplitude.{i}.re"), *re);
                doc.put_f64(format!("config.initial_state.amplitude.{i}.im"), *im);
            }
        }
    }
    if let Some(sweep) = &config.sweep {
        for (i, t) in sweep.total_times.iter().enumerate() {
            doc.put_f64(format!("config.sweep.total_time.{i}"), *t);
        }
    }
    let tol = &config.tolerances;
    doc.put_f64("config.tolerances.norm_defect", tol.norm_defect);
    doc.put_f64(
        "config.tolerances.probability_completeness",
        tol.probability_completeness,
    );
    doc.put_f64(
        "config.tolerances.amplitude_completeness",
        tol.amplitude_completeness,
    );
    doc.put_f64(
        "config.tolerances.quadrature_consistency",
        tol.quadrature_consistency,
    );
}

fn echo_model(doc: &mut ReportDoc, prefix: &str, model: &ModelConfig) {
    doc.put_text(format!("{prefix}.name"), &model.name);
    if let Some(v) = model.eps {
        doc.put_f64(format!("{prefix}.eps"), v);
    }
    if let Some(v) = model.v {
        doc.put_f64(format!("{prefix}.v"), v);
    }
    if let Some(v) = model.omega0 {
        doc.put_f64(format!("{prefix}.omega0"), v);
    }
    if let Some(v) = model.turns {
        doc.put_int(format!("{prefix}.turns"), v as i64);
    }
    if let Some(p) = &model.h0_file {
        doc.put_text(format!("{prefix}.h0_file"), p.display().to_string());
    }
    if let Some(p) = &model.h1_file {
        doc.put_text(format!("{prefix}.h1_file"), p.display().to_string());
    }
    if let Some(v) = model.n_qubits {
        doc.put_int(format!("{prefix}.n_qubits"), v as i64);
    }
    if let Some(v) = model.marked {
        doc.put_int(format!("{prefix}.marked"), v as i64);
    }
    if let Some(v) = model.grid_points {
        doc.put_int(format!("{prefix}.grid_points"), v as i64);
    }
    if let Some(base) = &model.base {
        echo_model(doc, &format!("{prefix}.base"), base);
    }
}

fn pair_key(n: usize, m: usize) -> String {
    format!("{n}_{m}")
}

fn insert_report(doc: &mut ReportDoc, report: &DiagnosticsReport, config: &ScenarioConfig) {
    for (&(n, m), &value) in &report.traditional_metric {
        doc.put_f64(format!("diag.metric.{}", pair_key(n, m)), value);
    }
    for (&(n, m), eps) in &report.adiabatic_error {
        let key = pair_key(n, m);
        doc.put_f64(format!("diag.eps.{key}.re"), eps.re);
        doc.put_f64(format!("diag.eps.{key}.im"), eps.im);
        doc.put_f64(format!("diag.eps.{key}.abs"), eps.norm());
    }
    for (&m, eps) in &report.level_error {
        doc.put_f64(format!("diag.eps_level.{m}.re"), eps.re);
        doc.put_f64(format!("diag.eps_level.{m}.im"), eps.im);
        doc.put_f64(format!("diag.eps_level.{m}.abs"), eps.norm());
    }
    for (&m, change) in &report.error_direct {
        doc.put_f64(format!("diag.error_direct.{m}.re"), change.re);
        doc.put_f64(format!("diag.error_direct.{m}.im"), change.im);
        doc.put_f64(format!("diag.error_direct.{m}.abs"), change.norm());
    }
    for (&(n, m), &value) in &report.max_transition_amplitude {
        doc.put_f64(format!("diag.max_a.{}", pair_key(n, m)), value);
    }
    for (&(n, m), &value) in &report.max_transition_amplitude_live {
        doc.put_f64(format!("diag.max_a_live.{}", pair_key(n, m)), value);
    }
    for (&(n, m), count) in &report.zero_counts {
        let key = pair_key(n, m);
        doc.put_int(format!("diag.zeros.{key}.re"), count.real as i64);
        doc.put_int(format!("diag.zeros.{key}.im"), count.imag as i64);
        doc.put_int(format!("diag.zeros.{key}.total"), count.total() as i64);
    }
    for (&(n, m), &value) in &report.zero_count_bounds {
        doc.put_f64(format!("diag.bound.{}", pair_key(n, m)), value);
    }
    for (&(n, m), cutoff) in &report.cutoffs {
        let key = pair_key(n, m);
        doc.put_f64(format!("diag.cutoff.{key}.omega_tilde_c"), cutoff.omega_tilde_c);
        doc.put_bool(
            format!("diag.cutoff.{key}.all_below_threshold"),
            cutoff.all_below_threshold,
        );
    }
    for (&(n, m), &value) in &report.dominant_path {
        doc.put_f64(format!("diag.dominant.{}", pair_key(n, m)), value);
    }
    for &(n, m) in &report.skipped_degenerate {
        doc.put_bool(format!("diag.degenerate.{}", pair_key(n, m)), true);
    }

    let levels = report.probabilities.first().map_or(0, Vec::len);
    for n in 0..levels {
        let series = report.probabilities.iter().map(|row| row[n]);
        let min = series.clone().fold(f64::INFINITY, f64::min);
        let max = series.clone().fold(f64::NEG_INFINITY, f64::max);
        let last = report.probabilities.last().map_or(0.0, |row| row[n]);
        doc.put_f64(format!("diag.prob.min.{n}"), min);
        doc.put_f64(format!("diag.prob.max.{n}"), max);
        doc.put_f64(format!("diag.prob.final.{n}"), last);
    }
    for (n, drift) in report.drift.iter().enumerate() {
        insert_drift_summary(doc, n, drift);
    }

    // Invariant checks against the configured tolerances.
    let tol = &config.tolerances;
    doc.put_f64("invariants.norm_defect.value", report.max_norm_defect);
    doc.put_bool(
        "invariants.norm_defect.pass",
        report.max_norm_defect <= tol.norm_defect,
    );
    doc.put_f64(
        "invariants.probability_completeness.value",
        report.max_probability_defect,
    );
    doc.put_bool(
        "invariants.probability_completeness.pass",
        report.max_probability_defect <= tol.probability_completeness,
    );
    doc.put_f64(
        "invariants.amplitude_completeness.value",
        report.max_amplitude_defect,
    );
    doc.put_bool(
        "invariants.amplitude_completeness.pass",
        report.max_amplitude_defect <= tol.amplitude_completeness,
    );

    // The error integrals summed into a level must reproduce the direct
    // amplitude change, but only when every source pair was computed.
    let mut worst_consistency: Option<f64> = None;
    for (&m, eps_level) in &report.level_error {
        let complete = (0..levels)
            .filter(|&n| n != m)
            .all(|n| report.adiabatic_error.contains_key(&(n, m)));
        if !complete {
            continue;
        }
        if let Some(direct) = report.error_direct.get(&m) {
            let defect = (eps_level - direct).norm();
            worst_consistency = Some(worst_consistency.map_or(defect, |w: f64| w.max(defect)));
        }
    }
    if let Some(value) = worst_consistency {
        doc.put_f64("invariants.quadrature_consistency.value", value);
        doc.put_bool(
            "invariants.quadrature_consistency.pass",
            value <= tol.quadrature_consistency,
        );
    }

    // The frozen-amplitude bound is vacuous for source levels that start
    // empty (it degenerates to zero while the live error need not), so the
    // validity check covers only pairs with initial weight in the source.
    let mut worst_bound: Option<f64> = None;
    for (&pair, eps) in &report.adiabatic_error {
        let Some(bound) = report.zero_count_bounds.get(&pair) else {
            continue;
        };
        let frozen_peak = report
            .max_transition_amplitude
            .get(&pair)
            .copied()
            .unwrap_or(0.0);
        if frozen_peak <= 1e-12 {
            continue;
        }
        let excess = eps.norm() - bound;
        worst_bound = Some(worst_bound.map_or(excess, |w: f64| w.max(excess)));
    }
    if let Some(value) = worst_bound {
        doc.put_f64("invariants.bound_validity.value", value);
        doc.put_bool("invariants.bound_validity.pass", value <= 1e-12);
    }
}

fn insert_drift_summary(doc: &mut ReportDoc, level: usize, drift: &[f64]) {
    let min = drift.iter().copied().fold(f64::INFINITY, f64::min);
    let last = drift.last().copied().unwrap_or(1.0);
    doc.put_f64(format!("diag.drift.min.{level}"), min);
    doc.put_f64(format!("diag.drift.final.{level}"), last);
}

fn render_timeseries(
    diag: &DiagnosticsConfig,
    trace: &EvolutionTrace,
    path: &SpectrumPath,
    amp: &AmplitudePath,
    pairs: &[(usize, usize)],
    model: &dyn HamiltonianModel,
) -> Result<String, CliError> {
    let levels = path.levels();
    let probs = diagnostics::level_probabilities(trace, path)?;
    let drift: Vec<Vec<f64>> = if diag.drift {
        (0..levels)
            .map(|n| diagnostics::eigenstate_drift(path, n))
            .collect()
    } else {
        Vec::new()
    };
    let mut anm_series: Vec<(usize, usize, TransitionAmplitudePath)> = Vec::new();
    if diag.fourier || diag.adiabatic_error || diag.zero_count {
        for &(n, m) in pairs {
            if path.is_degenerate(n, m) {
                continue;
            }
            let anm = diagnostics::transition_amplitude_path(amp, path, model, n, m)?;
            anm_series.push((n, m, anm));
        }
    }

    let mut header = String::from("t");
    if diag.probabilities {
        for n in 0..levels {
            let _ = write!(header, ",p_{n}");
        }
    }
    if diag.amplitudes {
        for n in 0..levels {
            let _ = write!(header, ",abs_a_{n}");
        }
    }
    if diag.drift {
        for n in 0..levels {
            let _ = write!(header, ",drift_{n}");
        }
    }
    for (n, m, _) in &anm_series {
        let _ = write!(header, ",re_a_{n}_{m},im_a_{n}_{m}");
    }

    let len = trace.times.len();
    let stride = len.div_ceil(diag.timeseries_max_points).max(1);
    let mut rows: Vec<usize> = (0..len).step_by(stride).collect();
    if *rows.last().expect("non-empty grid") != len - 1 {
        rows.push(len - 1);
    }

    let mut out = header;
    out.push('\n');
    for &k in &rows {
        let _ = write!(out, "{:.16e}", trace.times[k]);
        if diag.probabilities {
            for p in &probs[k] {
                let _ = write!(out, ",{p:.16e}");
            }
        }
        if diag.amplitudes {
            for n in 0..levels {
                let _ = write!(out, ",{:.16e}", amp.amplitude(k, n).norm());
            }
        }
        if diag.drift {
            for series in &drift {
                let _ = write!(out, ",{:.16e}", series[k]);
            }
        }
        for (_, _, anm) in &anm_series {
            let a = anm.live()[k];
            let _ = write!(out, ",{:.16e},{:.16e}", a.re, a.im);
        }
        out.push('\n');
    }
    Ok(out)
}

/// One scaling-table row of `sweep <config>`.
struct SweepRow {
    total_time: f64,
    steps: usize,
    /// Per requested pair: (max |A| frozen, |eps|, zero count, cutoff, dominant path).
    columns: Vec<(f64, f64, usize, f64, f64)>,
}

/// Executes `sweep <config>`: one full run per total time, grid spacing
/// held fixed, independent entries evaluated in parallel.
pub fn sweep_scenario(
    config: &ScenarioConfig,
    config_path: &Path,
    output_dir: &Path,
) -> Result<Vec<WrittenFile>, CliError> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::validation("config has no [sweep] section"))?;
    let base_dir = scenario_dir(config_path);
    let pairs: Vec<(usize, usize)> = match &config.diagnostics.pairs {
        Some(list) => list.iter().map(|[n, m]| (*n, *m)).collect(),
        None => vec![(0, 1)],
    };

    let rows: Vec<SweepRow> = sweep
        .total_times
        .par_iter()
        .map(|&total_time| sweep_entry(config, &base_dir, &pairs, total_time))
        .collect::<Result<_, _>>()?;

    let mut out = String::from("total_time,steps");
    for &(n, m) in &pairs {
        let _ = write!(
            out,
            ",max_a_{n}_{m},eps_abs_{n}_{m},zeros_{n}_{m},cutoff_{n}_{m},dominant_{n}_{m}"
        );
    }
    out.push('\n');
    for row in &rows {
        let _ = write!(out, "{:.16e},{}", row.total_time, row.steps);
        for &(max_a, eps, zeros, cutoff, dominant) in &row.columns {
            let _ = write!(
                out,
                ",{max_a:.16e},{eps:.16e},{zeros},{cutoff:.16e},{dominant:.16e}"
            );
        }
        out.push('\n');
    }

    if rows.len() > 1 {
        let times: Vec<f64> = rows.iter().map(|r| r.total_time).collect();
        for (idx, &(n, m)) in pairs.iter().enumerate() {
            let max_a: Vec<f64> = rows.iter().map(|r| r.columns[idx].0).collect();
            if let Some(slope) = log_log_slope(&times, &max_a) {
                let _ = writeln!(out, "# slope max_a_{n}_{m} = {slope:.16e}");
            }
            let eps: Vec<f64> = rows.iter().map(|r| r.columns[idx].1).collect();
            if let Some(slope) = log_log_slope(&times, &eps) {
                let _ = writeln!(out, "# slope eps_abs_{n}_{m} = {slope:.16e}");
            }
        }
    }

    std::fs::create_dir_all(output_dir)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", output_dir.display())))?;
    let stem = config.stem(config_path);
    let path = output_dir.join(format!("{stem}.sweep.csv"));
    write_text(&path, &out)?;
    Ok(vec![WrittenFile {
        path,
        summary: format!("{} sweep rows", rows.len()),
    }])
}

fn sweep_entry(
    config: &ScenarioConfig,
    base_dir: &Path,
    pairs: &[(usize, usize)],
    total_time: f64,
) -> Result<SweepRow, CliError> {
    // Fixed grid spacing: steps scale with the total time.
    let scale = total_time / config.total_time;
    let steps = ((config.steps as f64 * scale).round() as usize).max(1);
    let mut model_cfg = config.model.clone();
    if let Some(gp) = model_cfg.grid_points {
        let scaled = (((gp - 1) as f64) * scale).round() as usize + 1;
        model_cfg.grid_points = Some(scaled.max(2));
    }
    let built = build_model(&model_cfg, total_time, steps, base_dir)?;
    let model = built.as_dyn();

    for &(n, m) in pairs {
        if n == m || n >= model.dim() || m >= model.dim() {
            return Err(CliError::validation(format!(
                "pair ({n}, {m}) is not a valid ordered level pair for dimension {}",
                model.dim()
            )));
        }
    }

    let psi0 = initial_state(model, &config.initial_state)?;
    check_step_phase(model, steps)?;
    let trace = evolve(model, &psi0, steps, false)?;
    let path = spectrum_path(model, steps)?;
    let amp = amplitudes(&trace, &path)?;

    let mut columns = Vec::with_capacity(pairs.len());
    for &(n, m) in pairs {
        path.ensure_pair(n, m)?;
        let anm = diagnostics::transition_amplitude_path(&amp, &path, model, n, m)?;
        let max_a = anm.frozen().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let eps = diagnostics::adiabatic_error(&anm, &path)?.norm();
        let count = diagnostics::count_derivative_zeros(anm.frozen());
        let frozen_spectrum =
            diagnostics::amplitude_spectrum(anm.frozen(), total_time);
        let cutoff = diagnostics::cutoff_frequency(
            &frozen_spectrum,
            config.diagnostics.cutoff_threshold,
        );
        let live_spectrum = diagnostics::amplitude_spectrum(anm.live(), total_time);
        let dominant = diagnostics::dominant_path_estimate(&live_spectrum, &path, n, m);
        columns.push((max_a, eps, count.total(), cutoff.omega_tilde_c, dominant));
    }
    Ok(SweepRow {
        total_time,
        steps,
        columns,
    })
}

/// Least-squares slope of ln(y) against ln(x); None unless every value is
/// positive and there are at least two points.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    if xs.iter().chain(ys.iter()).any(|&v| v <= 0.0) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mean_x = lx.iter().sum::<f64>() / lx.len() as f64;
    let mean_y = ly.iter().sum::<f64>() / ly.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in lx.iter().zip(ly.iter()) {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    (den > 0.0).then(|| num / den)
}

/// Text catalogue of every constructible model and its parameters.
pub fn list_models() -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Available models ([model] table in a scenario config):");
    let _ = writeln!(out);
    let _ = writeln!(out, "driven_two_level");
    let _ = writeln!(out, "    H(t) = -(eps/2) sigma_z - v sin(omega0 t) sigma_x");
    let _ = writeln!(out, "    required: eps > 0, v > 0, omega0 > 0");
    let _ = writeln!(out);
    let _ = writeln!(out, "rotating_field");
    let _ = writeln!(out, "    constant-gap field rotating from z through x,");
    let _ = writeln!(out, "    theta(t) = 2 pi turns t / T");
    let _ = writeln!(out, "    required: eps > 0; optional: turns >= 1 (default 1)");
    let _ = writeln!(out);
    let _ = writeln!(out, "linear_interpolation");
    let _ = writeln!(out, "    H(t) = (1 - t/T) H0 + (t/T) H1");
    let _ = writeln!(out, "    required: h0_file, h1_file (matrix files: `dim N` header,");
    let _ = writeln!(out, "    then N rows of N `re im` pairs; paths relative to the config)");
    let _ = writeln!(out);
    let _ = writeln!(out, "grover_adiabatic");
    let _ = writeln!(out, "    H(s) = (1-s)(I - |u><u|) + s(I - |m><m|), s = t/T");
    let _ = writeln!(out, "    required: n_qubits in 1..=6; optional: marked (default 0)");
    let _ = writeln!(out);
    let _ = writeln!(out, "dual_of");
    let _ = writeln!(out, "    companion system -U^dag(t) H(t) U(t) of a wrapped model;");
    let _ = writeln!(out, "    requires a [model.base] table with any model above");
    let _ = writeln!(out, "    optional: grid_points >= 2 (default steps + 1)");
    let _ = writeln!(out, "    `run` emits two reports: the base and its dual");
    out
}
