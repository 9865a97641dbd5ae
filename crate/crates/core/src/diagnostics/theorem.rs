//! Integration-by-parts bookkeeping and the reparametrized slowness bound.
//!
//! Between consecutive zeros of dA_nm/dt the amplitude density is monotone,
//! so the error integral is bounded by the number of such zeros times the
//! peak |A_nm|. Counting the zeros therefore separates two regimes: driven
//! oscillations make the count grow linearly with T and the bound useless
//! without a time cap, while for fixed schedule shapes the count is a
//! T-independent constant and slowing down wins.

use num_complex::Complex64;

use super::spectrum::GAP_TOL;
use crate::error::{LabError, Result};
use crate::models::{
    schedule_derivative, schedule_second_derivative, GroverAdiabatic, HamiltonianModel,
};
use crate::numkernel::eigh;

/// Zeros of the centered-difference derivative of a complex sample path,
/// counted separately for the real and imaginary components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroCount {
    pub real: usize,
    pub imag: usize,
}

impl ZeroCount {
    pub fn total(&self) -> usize {
        self.real + self.imag
    }
}

/// Counts sign changes of the centered difference of `samples` per
/// component. A maximal run of exact zeros counts as one zero; a sign flip
/// across such a run is not double-counted.
pub fn count_derivative_zeros(samples: &[Complex64]) -> ZeroCount {
    assert!(samples.len() >= 3, "need at least three samples");
    let diffs: Vec<Complex64> = (1..samples.len() - 1)
        .map(|k| samples[k + 1] - samples[k - 1])
        .collect();
    ZeroCount {
        real: count_component(diffs.iter().map(|d| d.re)),
        imag: count_component(diffs.iter().map(|d| d.im)),
    }
}

fn count_component(values: impl Iterator<Item = f64>) -> usize {
    let mut count = 0;
    let mut prev_sign = 0i8;
    let mut in_zero_run = false;
    for v in values {
        let sign = if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        };
        if sign == 0 {
            if !in_zero_run {
                count += 1;
                in_zero_run = true;
            }
        } else {
            if !in_zero_run && prev_sign != 0 && sign != prev_sign {
                count += 1;
            }
            prev_sign = sign;
            in_zero_run = false;
        }
    }
    count
}

/// 2 (M + 1) max_t |A_nm(t)| with M the component-sum zero count: the
/// integration-by-parts ceiling on |eps_nm|. The M + 1 covers the segment
/// endpoints t = 0 and t = T that bracket the M interior zeros.
pub fn zero_count_bound(samples: &[Complex64], count: &ZeroCount) -> f64 {
    let peak = samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
    2.0 * (count.total() + 1) as f64 * peak
}

/// The reparametrized slowness bound and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinTimeEstimate {
    /// max over the s-grid and partner levels of |<E_m|dH/ds|E_n>| / E_nm^2.
    pub t_min: f64,
    pub at_s: f64,
    pub source_level: usize,
    pub partner_level: usize,
}

/// Scans s in [0, 1] and every partner of `tracked_level`, evaluating
/// |<E_m|dH/ds|E_n>| / E_nm^2 from fresh diagonalizations. The result is
/// the total time scale against which T must be large; it is independent
/// of the model's own T for fixed schedule shapes.
pub fn min_time(
    model: &dyn HamiltonianModel,
    s_steps: usize,
    tracked_level: usize,
) -> Result<MinTimeEstimate> {
    assert!(s_steps >= 1);
    let t_total = model.total_time();
    let mut best = MinTimeEstimate {
        t_min: 0.0,
        at_s: 0.0,
        source_level: tracked_level,
        partner_level: tracked_level,
    };
    for j in 0..=s_steps {
        let s = j as f64 / s_steps as f64;
        let eig = eigh(&model.evaluate(s * t_total))?;
        let dh_ds = schedule_derivative(model, s);
        let moved = dh_ds.matvec(&eig.vectors[tracked_level]);
        for m in 0..eig.dim() {
            if m == tracked_level {
                continue;
            }
            let gap = eig.values[tracked_level] - eig.values[m];
            if gap.abs() < GAP_TOL {
                return Err(LabError::DegenerateGap {
                    n: tracked_level,
                    m,
                    at_time: s * t_total,
                    gap,
                    limit: GAP_TOL,
                });
            }
            let value = eig.vectors[m].inner(&moved).norm() / (gap * gap);
            if value > best.t_min {
                best = MinTimeEstimate {
                    t_min: value,
                    at_s: s,
                    source_level: tracked_level,
                    partner_level: m,
                };
            }
        }
    }
    Ok(best)
}

/// Both routes to the energy-level curvature d2E_n/ds2 at one interior s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureCheck {
    pub analytic: f64,
    pub finite_difference: f64,
    pub relative_error: f64,
}

/// Compares the sum-over-states curvature identity
/// d2E_n/ds2 = 2 sum_{m != n} |<E_m|dH/ds|E_n>|^2 / (E_n - E_m)
///             + <E_n|d2H/ds2|E_n>
/// against a central second difference of the eigenvalue itself.
pub fn curvature_check(
    model: &dyn HamiltonianModel,
    level: usize,
    s: f64,
    step: f64,
) -> Result<CurvatureCheck> {
    assert!(s - step > 0.0 && s + step < 1.0, "need an interior stencil");
    let t_total = model.total_time();
    let eig = eigh(&model.evaluate(s * t_total))?;
    let dh_ds = schedule_derivative(model, s);
    let moved = dh_ds.matvec(&eig.vectors[level]);

    let mut analytic = eig.vectors[level]
        .inner(&schedule_second_derivative(model, s).matvec(&eig.vectors[level]))
        .re;
    for m in 0..eig.dim() {
        if m == level {
            continue;
        }
        let gap = eig.values[level] - eig.values[m];
        if gap.abs() < GAP_TOL {
            return Err(LabError::DegenerateGap {
                n: level,
                m,
                at_time: s * t_total,
                gap,
                limit: GAP_TOL,
            });
        }
        analytic += 2.0 * eig.vectors[m].inner(&moved).norm_sqr() / gap;
    }

    let value_at = |s_point: f64| -> Result<f64> {
        Ok(eigh(&model.evaluate(s_point * t_total))?.values[level])
    };
    let finite_difference =
        (value_at(s + step)? - 2.0 * value_at(s)? + value_at(s - step)?) / (step * step);

    let scale = analytic.abs().max(finite_difference.abs());
    let relative_error = if scale <= 1e-12 {
        0.0
    } else {
        (analytic - finite_difference).abs() / scale
    };
    Ok(CurvatureCheck {
        analytic,
        finite_difference,
        relative_error,
    })
}

/// max over the given s-samples of || (I - P_01) dH/ds |E_0(s)> ||, where
/// P_01 projects onto the two lowest levels. The projector form needs no
/// basis choice inside degenerate upper bands. A residual at rounding
/// level certifies that only the two lowest levels couple to the ground
/// state anywhere along the search schedule.
pub fn grover_selection_rule(model: &GroverAdiabatic, s_samples: &[f64]) -> Result<f64> {
    let t_total = model.total_time();
    let mut worst: f64 = 0.0;
    for &s in s_samples {
        let eig = eigh(&model.evaluate(s * t_total))?;
        let moved = schedule_derivative(model, s).matvec(&eig.vectors[0]);
        let mut residual = moved.clone();
        for kept in 0..2.min(eig.dim()) {
            let overlap = eig.vectors[kept].inner(&moved);
            residual = residual.sub(&eig.vectors[kept].scaled(overlap));
        }
        worst = worst.max(residual.norm());
    }
    Ok(worst)
}
