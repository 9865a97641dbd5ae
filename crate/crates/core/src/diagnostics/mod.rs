//! Adiabaticity diagnostics.
//!
//! Everything here is built on two objects: the [`SpectrumPath`] (the
//! gauge-fixed instantaneous eigensystem along the evolution grid) and the
//! [`AmplitudePath`] (the slow amplitudes a_n(t) of the state expanded in
//! the instantaneous eigenbasis with dynamical phases stripped).
//!
//! From these the module computes:
//!
//! * the traditional slowness metric max_t |<E_m|dE_n/dt>| / |E_n - E_m|,
//! * the per-pair transition amplitude density A_nm(t) and its exact
//!   integral form of the level error eps_nm, cross-checked against the
//!   direct amplitude change a_m(T) - a_m(0),
//! * the Fourier picture of A_nm over the dimensionless frequency
//!   w~ = w T, its support cutoff, and a resonance indicator that follows
//!   the mean-gap path through the time-frequency plane,
//! * integration-by-parts bookkeeping: zero counts of dA_nm/dt and the
//!   resulting error bound,
//! * the slow-evolution time bound max_s |<E_m|dH/ds|E_n>| / E_nm^2,
//!   energy-curvature identity checks and the search-model selection rule.

mod amplitude;
mod spectral;
mod spectrum;
mod theorem;

pub use amplitude::{
    adiabatic_error, amplitudes, error_direct, rwa_resonant_ground_population,
    transition_amplitude_path, AmplitudePath, TransitionAmplitudePath, QUAD_PHASE_LIMIT,
};
pub use spectral::{
    amplitude_spectrum, cutoff_frequency, dominant_path_estimate, AmplitudeSpectrum,
    CutoffFrequency, CUTOFF_THRESHOLD_FRACTION,
};
pub use spectrum::{
    coupling_element, eigenstate_drift, level_probabilities, max_probability_defect, minimum_gap,
    spectrum_path, traditional_metric, GapMinimum, GAP_TOL,
};
pub use theorem::{
    count_derivative_zeros, curvature_check, grover_selection_rule, min_time, zero_count_bound,
    CurvatureCheck, MinTimeEstimate, ZeroCount,
};

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::models::HamiltonianModel;
use crate::numkernel::StateVector;
use crate::propagate::EvolutionTrace;

/// Instantaneous eigenvalues, eigenvectors and accumulated phases along a
/// uniform time grid, continuity-matched across grid points and gauge-fixed
/// by discrete parallel transport (consecutive overlaps real and positive).
#[derive(Debug, Clone)]
pub struct SpectrumPath {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,             // [k][n]
    vectors: Vec<Vec<StateVector>>,    // [k][n]
    dynamical_phases: Vec<Vec<f64>>,   // [k][n], trapezoid of E_n from 0
    degenerate_pairs: BTreeMap<(usize, usize), DegenerateGapInfo>,
}

/// First grid point at which a level pair came closer than [`GAP_TOL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegenerateGapInfo {
    pub at_time: f64,
    pub gap: f64,
}

impl SpectrumPath {
    pub(crate) fn new(
        times: Vec<f64>,
        values: Vec<Vec<f64>>,
        vectors: Vec<Vec<StateVector>>,
        dynamical_phases: Vec<Vec<f64>>,
        degenerate_pairs: BTreeMap<(usize, usize), DegenerateGapInfo>,
    ) -> Self {
        SpectrumPath {
            times,
            values,
            vectors,
            dynamical_phases,
            degenerate_pairs,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of grid points (steps + 1).
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn levels(&self) -> usize {
        self.values[0].len()
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn total_time(&self) -> f64 {
        *self.times.last().expect("non-empty grid")
    }

    pub fn value(&self, k: usize, n: usize) -> f64 {
        self.values[k][n]
    }

    pub fn vector(&self, k: usize, n: usize) -> &StateVector {
        &self.vectors[k][n]
    }

    /// E_n(t_k) - E_m(t_k)
    pub fn gap(&self, k: usize, n: usize, m: usize) -> f64 {
        self.values[k][n] - self.values[k][m]
    }

    /// Integral of E_n from 0 to t_k (composite trapezoid).
    pub fn dynamical_phase(&self, k: usize, n: usize) -> f64 {
        self.dynamical_phases[k][n]
    }

    /// Integral of E_n - E_m from 0 to t_k.
    pub fn phase_difference(&self, k: usize, n: usize, m: usize) -> f64 {
        self.dynamical_phases[k][n] - self.dynamical_phases[k][m]
    }

    /// Running mean gap (1/t) * integral of E_nm; the t = 0 value is the
    /// instantaneous gap.
    pub fn mean_gap(&self, k: usize, n: usize, m: usize) -> f64 {
        if k == 0 {
            self.gap(0, n, m)
        } else {
            self.phase_difference(k, n, m) / self.times[k]
        }
    }

    pub fn is_degenerate(&self, n: usize, m: usize) -> bool {
        self.degenerate_pairs.contains_key(&ordered(n, m))
    }

    pub fn degenerate_pairs(&self) -> &BTreeMap<(usize, usize), DegenerateGapInfo> {
        &self.degenerate_pairs
    }

    /// Errors with the first offending time if the pair ever came closer
    /// than [`GAP_TOL`]; diagnostics that divide by the gap call this first.
    pub fn ensure_pair(&self, n: usize, m: usize) -> Result<()> {
        if let Some(info) = self.degenerate_pairs.get(&ordered(n, m)) {
            return Err(LabError::DegenerateGap {
                n,
                m,
                at_time: info.at_time,
                gap: info.gap,
                limit: GAP_TOL,
            });
        }
        Ok(())
    }

    pub(crate) fn check_grid(&self, times: &[f64]) -> Result<()> {
        if times.len() != self.times.len() {
            return Err(LabError::GridMismatch {
                reason: format!(
                    "{} grid points vs {}",
                    times.len(),
                    self.times.len()
                ),
            });
        }
        let tol = 1e-12 * self.total_time().max(1.0);
        for (a, b) in times.iter().zip(self.times.iter()) {
            if (a - b).abs() > tol {
                return Err(LabError::GridMismatch {
                    reason: format!("grid times differ: {a} vs {b}"),
                });
            }
        }
        Ok(())
    }
}

pub(crate) fn ordered(n: usize, m: usize) -> (usize, usize) {
    if n <= m {
        (n, m)
    } else {
        (m, n)
    }
}

/// Which levels enter the per-pair diagnostics of a report.
pub fn all_ordered_pairs(levels: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for n in 0..levels {
        for m in 0..levels {
            if n != m {
                pairs.push((n, m));
            }
        }
    }
    pairs
}

pub fn pairs_involving(level: usize, levels: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for m in 0..levels {
        if m != level {
            pairs.push((level, m));
            pairs.push((m, level));
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Knobs for [`DiagnosticsReport::assemble`].
#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub pairs: Vec<(usize, usize)>,
    pub cutoff_threshold: f64,
    pub min_time: Option<MinTimeOptions>,
    pub with_metric: bool,
    pub with_adiabatic_error: bool,
    pub with_fourier: bool,
    pub with_zero_count: bool,
    pub with_drift: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct MinTimeOptions {
    pub s_steps: usize,
    pub level: usize,
}

impl ReportOptions {
    /// Every diagnostic, all ordered pairs, for a system with `levels`
    /// levels. Per-pair work grows quadratically with the level count, so
    /// large systems should restrict `pairs`.
    pub fn standard(levels: usize) -> Self {
        ReportOptions {
            pairs: all_ordered_pairs(levels),
            cutoff_threshold: CUTOFF_THRESHOLD_FRACTION,
            min_time: Some(MinTimeOptions {
                s_steps: 2000,
                level: 0,
            }),
            with_metric: true,
            with_adiabatic_error: true,
            with_fourier: true,
            with_zero_count: true,
            with_drift: true,
        }
    }
}

/// Scalar adiabaticity diagnostics of one evolution, keyed per level pair.
///
/// Pairs that were flagged degenerate along the grid are skipped and listed
/// in `skipped_degenerate` instead of polluting the maps with unusable
/// values.
#[derive(Debug, Clone)]
pub struct DiagnosticsReport {
    pub pairs: Vec<(usize, usize)>,
    pub traditional_metric: BTreeMap<(usize, usize), f64>,
    /// eps_nm keyed by (source n, target m), live amplitudes.
    pub adiabatic_error: BTreeMap<(usize, usize), Complex64>,
    /// eps_m = -sum over sources n of eps_nm, per target level.
    pub level_error: BTreeMap<usize, Complex64>,
    /// a_m(T) - a_m(0) per level.
    pub error_direct: BTreeMap<usize, Complex64>,
    /// max_t |A_nm| with amplitudes frozen at their initial values.
    pub max_transition_amplitude: BTreeMap<(usize, usize), f64>,
    pub max_transition_amplitude_live: BTreeMap<(usize, usize), f64>,
    pub zero_counts: BTreeMap<(usize, usize), ZeroCount>,
    pub zero_count_bounds: BTreeMap<(usize, usize), f64>,
    /// Support cutoff of the frozen-amplitude spectrum over w~ = w T.
    pub cutoffs: BTreeMap<(usize, usize), CutoffFrequency>,
    /// Resonance indicator T max_t |A~_nm(w_nm(t)) E_nm(t)|, live spectrum.
    pub dominant_path: BTreeMap<(usize, usize), f64>,
    pub min_time: Option<MinTimeEstimate>,
    /// P_n(t_k), indexed by grid point then level.
    pub probabilities: Vec<Vec<f64>>,
    /// |<E_n(t_k)|E_n(0)>|, indexed by level then grid point.
    pub drift: Vec<Vec<f64>>,
    pub max_norm_defect: f64,
    pub max_probability_defect: f64,
    pub max_amplitude_defect: f64,
    pub skipped_degenerate: Vec<(usize, usize)>,
}

impl DiagnosticsReport {
    /// Runs every enabled diagnostic over a finished evolution.
    pub fn assemble(
        model: &dyn HamiltonianModel,
        trace: &EvolutionTrace,
        path: &SpectrumPath,
        amp: &AmplitudePath,
        options: &ReportOptions,
    ) -> Result<DiagnosticsReport> {
        let probabilities = level_probabilities(trace, path)?;
        let max_probability_defect = max_probability_defect(&probabilities);

        let mut report = DiagnosticsReport {
            pairs: options.pairs.clone(),
            traditional_metric: BTreeMap::new(),
            adiabatic_error: BTreeMap::new(),
            level_error: BTreeMap::new(),
            error_direct: BTreeMap::new(),
            max_transition_amplitude: BTreeMap::new(),
            max_transition_amplitude_live: BTreeMap::new(),
            zero_counts: BTreeMap::new(),
            zero_count_bounds: BTreeMap::new(),
            cutoffs: BTreeMap::new(),
            dominant_path: BTreeMap::new(),
            min_time: None,
            probabilities,
            drift: Vec::new(),
            max_norm_defect: trace.max_norm_defect(),
            max_probability_defect,
            max_amplitude_defect: amp.max_completeness_defect(),
            skipped_degenerate: Vec::new(),
        };

        let total_time = path.total_time();
        for &(n, m) in &options.pairs {
            if path.is_degenerate(n, m) {
                report.skipped_degenerate.push((n, m));
                continue;
            }
            if options.with_metric {
                report
                    .traditional_metric
                    .insert((n, m), traditional_metric(path, model, n, m)?);
            }

            let needs_path = options.with_adiabatic_error
                || options.with_fourier
                || options.with_zero_count;
            if !needs_path {
                continue;
            }
            let anm = transition_amplitude_path(amp, path, model, n, m)?;
            report
                .max_transition_amplitude
                .insert((n, m), max_modulus(anm.frozen()));
            report
                .max_transition_amplitude_live
                .insert((n, m), max_modulus(anm.live()));

            if options.with_adiabatic_error {
                let eps = adiabatic_error(&anm, path)?;
                report.adiabatic_error.insert((n, m), eps);
                *report
                    .level_error
                    .entry(m)
                    .or_insert(Complex64::new(0.0, 0.0)) -= eps;
            }
            if options.with_zero_count {
                let count = count_derivative_zeros(anm.frozen());
                let bound = zero_count_bound(anm.frozen(), &count);
                report.zero_counts.insert((n, m), count);
                report.zero_count_bounds.insert((n, m), bound);
            }
            if options.with_fourier {
                // The cutoff characterizes the schedule, so it reads the
                // frozen amplitudes; the resonance indicator follows the
                // amplitudes the system actually developed.
                let frozen_spectrum = amplitude_spectrum(anm.frozen(), total_time);
                report.cutoffs.insert(
                    (n, m),
                    cutoff_frequency(&frozen_spectrum, options.cutoff_threshold),
                );
                let live_spectrum = amplitude_spectrum(anm.live(), total_time);
                report.dominant_path.insert(
                    (n, m),
                    dominant_path_estimate(&live_spectrum, path, n, m),
                );
            }
        }

        for level in 0..path.levels() {
            report.error_direct.insert(level, error_direct(amp, level));
        }
        if options.with_drift {
            report.drift = (0..path.levels())
                .map(|n| eigenstate_drift(path, n))
                .collect();
        }
        if let Some(mt) = options.min_time {
            report.min_time = Some(min_time(model, mt.s_steps, mt.level)?);
        }
        Ok(report)
    }
}

fn max_modulus(samples: &[Complex64]) -> f64 {
    samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
