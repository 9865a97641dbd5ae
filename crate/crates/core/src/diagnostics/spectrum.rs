//! Gauge-fixed eigenpath construction and the diagnostics that read it
//! directly: coupling elements, the traditional slowness metric, level
//! populations and eigenstate drift.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{ordered, DegenerateGapInfo, SpectrumPath};
use crate::error::Result;
use crate::models::HamiltonianModel;
use crate::numkernel::{align_phases, eigh};
use crate::propagate::EvolutionTrace;

/// Level pairs whose gap falls below this anywhere on the grid are flagged
/// and excluded from every diagnostic that divides by the gap.
pub const GAP_TOL: f64 = 1e-8;

/// Diagonalizes H(t) on a uniform grid of `steps` intervals, matching
/// levels across grid points by maximum overlap and fixing eigenvector
/// phases by discrete parallel transport, then accumulates the dynamical
/// phases by the composite trapezoid rule.
pub fn spectrum_path(model: &dyn HamiltonianModel, steps: usize) -> Result<SpectrumPath> {
    assert!(steps >= 1, "need at least one step");
    let t_total = model.total_time();
    let dt = t_total / steps as f64;
    let levels = model.dim();

    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    let mut vectors = Vec::with_capacity(steps + 1);

    let mut current = eigh(&model.evaluate(0.0))?;
    times.push(0.0);
    values.push(current.values.clone());
    vectors.push(current.vectors.clone());

    for k in 1..=steps {
        let t = k as f64 * dt;
        let raw = eigh(&model.evaluate(t))?;
        let aligned = align_phases(&current, &raw)?;
        times.push(t);
        values.push(aligned.values.clone());
        vectors.push(aligned.vectors.clone());
        current = aligned;
    }

    let mut phases = vec![vec![0.0; levels]; steps + 1];
    for k in 1..=steps {
        for n in 0..levels {
            phases[k][n] =
                phases[k - 1][n] + 0.5 * dt * (values[k - 1][n] + values[k][n]);
        }
    }

    let mut degenerate: BTreeMap<(usize, usize), DegenerateGapInfo> = BTreeMap::new();
    for (k, vals) in values.iter().enumerate() {
        for n in 0..levels {
            for m in (n + 1)..levels {
                let gap = vals[n] - vals[m];
                if gap.abs() < GAP_TOL {
                    degenerate
                        .entry(ordered(n, m))
                        .or_insert(DegenerateGapInfo {
                            at_time: times[k],
                            gap,
                        });
                }
            }
        }
    }

    Ok(SpectrumPath::new(times, values, vectors, phases, degenerate))
}

/// <E_m(t_k)| dH/dt |E_n(t_k)> / (E_n - E_m), which equals the eigenvector
/// velocity overlap <E_m|dE_n/dt> for m != n. Always evaluated through the
/// analytic dH/dt, never by differencing eigenvectors.
pub fn coupling_element(
    path: &SpectrumPath,
    model: &dyn HamiltonianModel,
    k: usize,
    n: usize,
    m: usize,
) -> Result<Complex64> {
    assert_ne!(n, m, "coupling element needs two distinct levels");
    path.ensure_pair(n, m)?;
    let hdot = model.derivative(path.times()[k]);
    let element = path.vector(k, m).inner(&hdot.matvec(path.vector(k, n)));
    Ok(element / path.gap(k, n, m))
}

/// max over the grid of |<E_m|dE_n/dt> / E_nm| for one ordered pair.
pub fn traditional_metric(
    path: &SpectrumPath,
    model: &dyn HamiltonianModel,
    n: usize,
    m: usize,
) -> Result<f64> {
    path.ensure_pair(n, m)?;
    let mut worst: f64 = 0.0;
    for k in 0..path.len() {
        let coupling = coupling_element(path, model, k, n, m)?;
        worst = worst.max((coupling / path.gap(k, n, m)).norm());
    }
    Ok(worst)
}

/// P_n(t_k) = |<E_n(t_k)|psi(t_k)>|^2, indexed by grid point then level.
pub fn level_probabilities(
    trace: &EvolutionTrace,
    path: &SpectrumPath,
) -> Result<Vec<Vec<f64>>> {
    path.check_grid(&trace.times)?;
    let probs = trace
        .states
        .iter()
        .enumerate()
        .map(|(k, psi)| {
            (0..path.levels())
                .map(|n| path.vector(k, n).inner(psi).norm_sqr())
                .collect()
        })
        .collect();
    Ok(probs)
}

/// max_k |sum_n P_n(t_k) - 1|
pub fn max_probability_defect(probabilities: &[Vec<f64>]) -> f64 {
    probabilities
        .iter()
        .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// |<E_n(t_k)|E_n(0)>| per grid point.
pub fn eigenstate_drift(path: &SpectrumPath, n: usize) -> Vec<f64> {
    let start = path.vector(0, n);
    (0..path.len())
        .map(|k| start.inner(path.vector(k, n)).norm())
        .collect()
}

/// Smallest gap between two sorted levels over an s-grid, found by a dense
/// diagonalization sweep that needs no continuity tracking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapMinimum {
    pub gap: f64,
    pub at_s: f64,
}

pub fn minimum_gap(
    model: &dyn HamiltonianModel,
    s_steps: usize,
    lower: usize,
    upper: usize,
) -> Result<GapMinimum> {
    assert!(s_steps >= 1);
    let t_total = model.total_time();
    let mut best = GapMinimum {
        gap: f64::INFINITY,
        at_s: 0.0,
    };
    for j in 0..=s_steps {
        let s = j as f64 / s_steps as f64;
        let eig = eigh(&model.evaluate(s * t_total))?;
        let gap = eig.values[upper] - eig.values[lower];
        if gap < best.gap {
            best = GapMinimum { gap, at_s: s };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::LabError;
    use crate::models::{
        driven_two_level, linear_interpolation, rotating_field, DrivenTwoLevelParams,
    };
    use crate::numkernel::{ComplexMatrix, StateVector};
    use crate::propagate::evolve;
    use approx::assert_abs_diff_eq;

    fn constant_bias() -> impl HamiltonianModel {
        let h = ComplexMatrix::from_real_rows(&[&[-0.5, 0.0], &[0.0, 0.5]]);
        linear_interpolation(h.clone(), h, 10.0).unwrap()
    }

    #[test]
    fn constant_hamiltonian_gives_flat_path() {
        let model = constant_bias();
        let path = spectrum_path(&model, 100).unwrap();
        for k in 0..path.len() {
            assert_abs_diff_eq!(path.value(k, 0), -0.5, epsilon = 1e-13);
            assert_abs_diff_eq!(path.value(k, 1), 0.5, epsilon = 1e-13);
            assert_eq!(path.vector(k, 0), path.vector(0, 0));
        }
        // Dynamical phase of level n is E_n * t on a constant spectrum.
        assert_abs_diff_eq!(path.dynamical_phase(100, 0), -5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(path.phase_difference(100, 1, 0), 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(path.mean_gap(100, 1, 0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(path.mean_gap(0, 1, 0), 1.0, epsilon = 1e-12);

        for k in 0..path.len() {
            let c = coupling_element(&path, &model, k, 0, 1).unwrap();
            assert!(c.norm() <= 1e-14);
        }
        assert_abs_diff_eq!(
            traditional_metric(&path, &model, 0, 1).unwrap(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn driven_two_level_spectrum_matches_closed_form() {
        // E = -+ Omega/2 with Omega = sqrt(eps^2 + 4 v^2 sin^2(w0 t)).
        let t_total = 2.0 * std::f64::consts::PI;
        let model = driven_two_level(
            DrivenTwoLevelParams { eps: 1.0, v: 0.5, omega0: 1.0 },
            t_total,
        )
        .unwrap();
        let steps = 4096;
        let path = spectrum_path(&model, steps).unwrap();
        for k in (0..=steps).step_by(steps / 16) {
            let t = path.times()[k];
            let omega = (1.0 + 4.0 * 0.25 * (t.sin()).powi(2)).sqrt();
            assert_abs_diff_eq!(path.value(k, 0), -0.5 * omega, epsilon = 1e-10);
            assert_abs_diff_eq!(path.value(k, 1), 0.5 * omega, epsilon = 1e-10);
        }
        // Quarter period: sin = 1, E_0 = -sqrt(2)/2.
        let quarter = steps / 4;
        assert_abs_diff_eq!(
            path.value(quarter, 0),
            -0.5 * std::f64::consts::SQRT_2,
            epsilon = 1e-6
        );
    }

    #[test]
    fn rotating_field_has_constant_gap_and_real_consecutive_overlaps() {
        let model = rotating_field(1.0, 200.0, 1).unwrap();
        let path = spectrum_path(&model, 2000).unwrap();
        for k in 0..path.len() {
            assert_abs_diff_eq!(path.gap(k, 1, 0), 1.0, epsilon = 1e-12);
        }
        for k in 0..path.len() - 1 {
            for n in 0..2 {
                let ov = path.vector(k, n).inner(path.vector(k + 1, n));
                assert!(ov.im.abs() <= 1e-10, "gauge leak {:e}", ov.im);
                assert!(ov.re > 0.99);
            }
        }
    }

    #[test]
    fn coupling_magnitude_at_rest_matches_drive() {
        let model = driven_two_level(
            DrivenTwoLevelParams { eps: 1.0, v: 0.02, omega0: 1.0 },
            10.0,
        )
        .unwrap();
        let path = spectrum_path(&model, 1000).unwrap();
        let c = coupling_element(&path, &model, 0, 0, 1).unwrap();
        assert_abs_diff_eq!(c.norm(), 0.02, epsilon = 1e-12);
    }

    #[test]
    fn coupling_agrees_with_gauge_fixed_finite_differences() {
        let model = rotating_field(1.0, 200.0, 1).unwrap();
        let steps = 20_000;
        let path = spectrum_path(&model, steps).unwrap();
        let dt = path.dt();
        for k in (1..steps).step_by(steps / 7) {
            for (n, m) in [(0, 1), (1, 0)] {
                let analytic = coupling_element(&path, &model, k, n, m).unwrap();
                let fd_vec = path.vector(k + 1, n).sub(path.vector(k - 1, n));
                let fd = path.vector(k, m).inner(&fd_vec) / (2.0 * dt);
                assert!(
                    (analytic - fd).norm() <= 1e-6,
                    "pair ({n},{m}) at k={k}: {analytic} vs {fd}"
                );
            }
        }
    }

    #[test]
    fn metric_scales_inversely_with_total_time() {
        let h0 = ComplexMatrix::from_real_rows(&[&[-0.5, -0.05], &[-0.05, 0.5]]);
        let h1 = ComplexMatrix::from_real_rows(&[&[0.5, -0.05], &[-0.05, -0.5]]);
        let slow = linear_interpolation(h0.clone(), h1.clone(), 200.0).unwrap();
        let fast = linear_interpolation(h0, h1, 100.0).unwrap();
        let metric_fast =
            traditional_metric(&spectrum_path(&fast, 2000).unwrap(), &fast, 0, 1).unwrap();
        let metric_slow =
            traditional_metric(&spectrum_path(&slow, 4000).unwrap(), &slow, 0, 1).unwrap();
        assert_abs_diff_eq!(metric_slow / metric_fast, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_pair_is_flagged_and_refused() {
        // Two crossing levels with no avoided-crossing matrix element.
        let h0 = ComplexMatrix::from_real_rows(&[&[-0.5, 0.0], &[0.0, 0.5]]);
        let h1 = ComplexMatrix::from_real_rows(&[&[0.5, 0.0], &[0.0, -0.5]]);
        let model = linear_interpolation(h0, h1, 10.0).unwrap();
        let path = spectrum_path(&model, 100).unwrap();
        assert!(path.is_degenerate(0, 1));
        match coupling_element(&path, &model, 3, 0, 1) {
            Err(LabError::DegenerateGap { at_time, .. }) => {
                assert_abs_diff_eq!(at_time, 5.0, epsilon = 1e-9);
            }
            other => panic!("expected DegenerateGap, got {other:?}"),
        }
    }

    #[test]
    fn probabilities_stay_complete_and_drift_tracks_rotation() {
        let model = rotating_field(1.0, 200.0, 1).unwrap();
        let psi0 = eigh(&model.evaluate(0.0)).unwrap().vectors[0].clone();
        let steps = 4000;
        let trace = evolve(&model, &psi0, steps, false).unwrap();
        let path = spectrum_path(&model, steps).unwrap();
        let probs = level_probabilities(&trace, &path).unwrap();
        assert!(max_probability_defect(&probs) <= 1e-8);
        let min_ground = probs.iter().map(|row| row[0]).fold(1.0, f64::min);
        assert!(min_ground >= 0.99, "ground population dipped to {min_ground}");

        let drift = eigenstate_drift(&path, 0);
        assert_abs_diff_eq!(drift[0], 1.0, epsilon = 1e-12);
        assert!(drift[steps / 2] <= 1e-6, "half-turn overlap {}", drift[steps / 2]);

        // Stationary case: drift identically 1.
        let flat = constant_bias();
        let flat_path = spectrum_path(&flat, 50).unwrap();
        for v in eigenstate_drift(&flat_path, 0) {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn probabilities_reject_mismatched_grids() {
        let model = constant_bias();
        let trace = evolve(&model, &StateVector::basis(2, 0), 64, false).unwrap();
        let path = spectrum_path(&model, 65).unwrap();
        assert!(matches!(
            level_probabilities(&trace, &path),
            Err(LabError::GridMismatch { .. })
        ));
    }
}
