//! Slow amplitudes and the exact level-error integral.
//!
//! Expanding the state over the instantaneous eigenbasis with dynamical
//! phases stripped, a_n(t) = exp(+i Int E_n) <E_n(t)|psi(t)>, turns the
//! Schrödinger equation into coupled amplitude equations whose integrated
//! form equates the change a_m(T) - a_m(0) with a sum of oscillatory
//! integrals eps_nm over the transition amplitude densities A_nm(t). Both
//! sides are computed here independently so the quadrature can be checked
//! against the direct amplitude change.

use num_complex::Complex64;

use super::{coupling_element, SpectrumPath};
use crate::error::{LabError, Result};
use crate::models::HamiltonianModel;
use crate::propagate::EvolutionTrace;

/// Largest admissible per-sample phase |E_nm| dt in the oscillatory
/// quadrature of the level-error integral.
pub const QUAD_PHASE_LIMIT: f64 = 0.3;

/// The slow amplitudes a_n(t_k) for all levels on the evolution grid.
#[derive(Debug, Clone)]
pub struct AmplitudePath {
    times: Vec<f64>,
    values: Vec<Vec<Complex64>>, // [k][n]
}

impl AmplitudePath {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn levels(&self) -> usize {
        self.values[0].len()
    }

    pub fn amplitude(&self, k: usize, n: usize) -> Complex64 {
        self.values[k][n]
    }

    /// max_k |sum_n |a_n|^2 - 1|
    pub fn max_completeness_defect(&self) -> f64 {
        self.values
            .iter()
            .map(|row| (row.iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Projects the trace onto the gauge-fixed eigenpath:
/// a_n(t_k) = exp(+i Int_0^{t_k} E_n) <E_n(t_k)|psi(t_k)>.
pub fn amplitudes(trace: &EvolutionTrace, path: &SpectrumPath) -> Result<AmplitudePath> {
    path.check_grid(&trace.times)?;
    let levels = path.levels();
    let values = trace
        .states
        .iter()
        .enumerate()
        .map(|(k, psi)| {
            (0..levels)
                .map(|n| {
                    let phase = Complex64::new(0.0, path.dynamical_phase(k, n)).exp();
                    phase * path.vector(k, n).inner(psi)
                })
                .collect()
        })
        .collect();
    Ok(AmplitudePath {
        times: trace.times.clone(),
        values,
    })
}

/// The per-pair transition amplitude density
/// A_nm(t) = a_n(t) <E_m|dE_n/dt> / E_nm, sampled on the grid, together
/// with its lowest-order variant where a_n is frozen at a_n(0).
#[derive(Debug, Clone)]
pub struct TransitionAmplitudePath {
    source: usize,
    target: usize,
    times: Vec<f64>,
    live: Vec<Complex64>,
    frozen: Vec<Complex64>,
}

impl TransitionAmplitudePath {
    pub fn source(&self) -> usize {
        self.source
    }
    pub fn target(&self) -> usize {
        self.target
    }
    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn live(&self) -> &[Complex64] {
        &self.live
    }
    pub fn frozen(&self) -> &[Complex64] {
        &self.frozen
    }
}

/// Samples A_nm(t_k) for the ordered pair (source n, target m).
pub fn transition_amplitude_path(
    amp: &AmplitudePath,
    path: &SpectrumPath,
    model: &dyn HamiltonianModel,
    n: usize,
    m: usize,
) -> Result<TransitionAmplitudePath> {
    path.check_grid(amp.times())?;
    path.ensure_pair(n, m)?;
    let a0 = amp.amplitude(0, n);
    let mut live = Vec::with_capacity(path.len());
    let mut frozen = Vec::with_capacity(path.len());
    for k in 0..path.len() {
        let per_amplitude = coupling_element(path, model, k, n, m)? / path.gap(k, n, m);
        live.push(amp.amplitude(k, n) * per_amplitude);
        frozen.push(a0 * per_amplitude);
    }
    Ok(TransitionAmplitudePath {
        source: n,
        target: m,
        times: path.times().to_vec(),
        live,
        frozen,
    })
}

/// eps_nm = Int_0^T A_nm(t) E_nm(t) exp(-i Int_0^t E_nm) dt by composite
/// trapezoid over the stored grid, using the live amplitudes.
///
/// The integrand oscillates at the gap frequency, so the grid must resolve
/// it: max |E_nm| dt <= [`QUAD_PHASE_LIMIT`] or the call is refused.
pub fn adiabatic_error(anm: &TransitionAmplitudePath, path: &SpectrumPath) -> Result<Complex64> {
    let (n, m) = (anm.source(), anm.target());
    path.ensure_pair(n, m)?;
    let dt = path.dt();
    let mut worst = 0.0_f64;
    let mut worst_t = 0.0;
    for k in 0..path.len() {
        let phase = path.gap(k, n, m).abs() * dt;
        if phase > worst {
            worst = phase;
            worst_t = path.times()[k];
        }
    }
    if worst > QUAD_PHASE_LIMIT {
        let total = path.total_time();
        let suggested = (total * worst / (dt * QUAD_PHASE_LIMIT)).ceil() as usize;
        return Err(LabError::PhaseUnderResolved {
            phase: worst,
            at_time: worst_t,
            limit: QUAD_PHASE_LIMIT,
            suggested_steps: suggested.max(path.len()),
        });
    }

    let mut acc = Complex64::new(0.0, 0.0);
    let last = path.len() - 1;
    for k in 0..=last {
        let phase = Complex64::new(0.0, -path.phase_difference(k, n, m)).exp();
        let integrand = anm.live()[k] * path.gap(k, n, m) * phase;
        let weight = if k == 0 || k == last { 0.5 } else { 1.0 };
        acc += integrand * weight;
    }
    Ok(acc * dt)
}

/// a_m(T) - a_m(0): the exact amplitude change the error integrals add up to.
pub fn error_direct(amp: &AmplitudePath, m: usize) -> Complex64 {
    amp.amplitude(amp.len() - 1, m) - amp.amplitude(0, m)
}

/// Rotating-wave ground-level population (cos(v t) + 1) / 2 of the
/// resonantly driven two-level system; the closed-form oracle for
/// resonance scenarios.
pub fn rwa_resonant_ground_population(v: f64, t: f64) -> f64 {
    0.5 * ((v * t).cos() + 1.0)
}
