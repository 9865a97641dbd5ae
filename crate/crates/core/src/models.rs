//! The Hamiltonian model zoo.
//!
//! Each model exposes H(t), the analytic dH/dt and d2H/dt2, and its total
//! evolution time T. Schedules that are naturally functions of the scaled
//! time s = t/T (linear interpolation, the adiabatic search Hamiltonian,
//! the rotating field) keep their shape fixed when T changes; the driven
//! two-level system oscillates at a fixed laboratory frequency instead.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::numkernel::{expm_minus_ih, ComplexMatrix, StateVector};
use crate::propagate::{accumulate_propagator, check_step_phase};

/// Time-dependent Hermitian generator on a fixed total time interval [0, T].
///
/// `evaluate` must return a Hermitian matrix for every t in [0, T], and
/// `derivative`/`second_derivative` its first and second time derivatives.
pub trait HamiltonianModel: Send + Sync {
    fn dim(&self) -> usize;
    fn total_time(&self) -> f64;
    fn label(&self) -> &str;
    fn evaluate(&self, t: f64) -> ComplexMatrix;
    fn derivative(&self, t: f64) -> ComplexMatrix;
    fn second_derivative(&self, t: f64) -> ComplexMatrix;
}

/// dH/ds at s = t/T, i.e. T * dH/dt evaluated at t = s T.
pub fn schedule_derivative(model: &dyn HamiltonianModel, s: f64) -> ComplexMatrix {
    let t_total = model.total_time();
    model.derivative(s * t_total).scaled_real(t_total)
}

/// d2H/ds2 at s = t/T.
pub fn schedule_second_derivative(model: &dyn HamiltonianModel, s: f64) -> ComplexMatrix {
    let t_total = model.total_time();
    model
        .second_derivative(s * t_total)
        .scaled_real(t_total * t_total)
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |i, j| match (i, j) {
        (0, 1) => Complex64::new(0.0, -1.0),
        (1, 0) => Complex64::new(0.0, 1.0),
        _ => Complex64::new(0.0, 0.0),
    })
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
}

fn require_positive(name: &str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(LabError::InvalidParams {
            reason: format!("{name} must be positive and finite, got {value}"),
        });
    }
    Ok(())
}

/// Bias, drive amplitude and drive frequency of the oscillating two-level
/// system H(t) = -(eps/2) sigma_z - v sin(omega0 t) sigma_x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivenTwoLevelParams {
    pub eps: f64,
    pub v: f64,
    pub omega0: f64,
}

impl DrivenTwoLevelParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("eps", self.eps)?;
        require_positive("v", self.v)?;
        require_positive("omega0", self.omega0)
    }
}

pub struct DrivenTwoLevel {
    params: DrivenTwoLevelParams,
    total_time: f64,
    label: String,
}

/// Two-level system driven by an oscillatory transverse force.
pub fn driven_two_level(params: DrivenTwoLevelParams, total_time: f64) -> Result<DrivenTwoLevel> {
    params.validate()?;
    require_positive("total_time", total_time)?;
    Ok(DrivenTwoLevel {
        params,
        total_time,
        label: "driven_two_level".to_owned(),
    })
}

impl HamiltonianModel for DrivenTwoLevel {
    fn dim(&self) -> usize {
        2
    }
    fn total_time(&self) -> f64 {
        self.total_time
    }
    fn label(&self) -> &str {
        &self.label
    }
    fn evaluate(&self, t: f64) -> ComplexMatrix {
        let p = &self.params;
        let off = -p.v * (p.omega0 * t).sin();
        ComplexMatrix::from_real_rows(&[&[-0.5 * p.eps, off], &[off, 0.5 * p.eps]])
    }
    fn derivative(&self, t: f64) -> ComplexMatrix {
        let p = &self.params;
        let off = -p.v * p.omega0 * (p.omega0 * t).cos();
        ComplexMatrix::from_real_rows(&[&[0.0, off], &[off, 0.0]])
    }
    fn second_derivative(&self, t: f64) -> ComplexMatrix {
        let p = &self.params;
        let off = p.v * p.omega0 * p.omega0 * (p.omega0 * t).sin();
        ComplexMatrix::from_real_rows(&[&[0.0, off], &[off, 0.0]])
    }
}

pub struct RotatingField {
    eps: f64,
    total_time: f64,
    turns: u32,
    label: String,
}

/// Constant-gap field whose direction rotates from z through x by
/// `turns` full revolutions over [0, T]:
/// H(t) = -(eps/2) (cos(theta) sigma_z + sin(theta) sigma_x) with
/// theta = 2 pi turns t / T. The spectrum is constant while the
/// eigenvectors sweep the whole great circle, so the overlap with the
/// initial eigenstate passes through zero.
pub fn rotating_field(eps: f64, total_time: f64, turns: u32) -> Result<RotatingField> {
    require_positive("eps", eps)?;
    require_positive("total_time", total_time)?;
    if turns < 1 {
        return Err(LabError::InvalidParams {
            reason: format!("turns must be at least 1, got {turns}"),
        });
    }
    Ok(RotatingField {
        eps,
        total_time,
        turns,
        label: "rotating_field".to_owned(),
    })
}

impl RotatingField {
    fn angular_rate(&self) -> f64 {
        2.0 * std::f64::consts::PI * f64::from(self.turns) / self.total_time
    }
    fn field_matrix(&self, theta: f64, scale: f64) -> ComplexMatrix {
        let z = scale * theta.cos();
        let x = scale * theta.sin();
        ComplexMatrix::from_real_rows(&[&[z, x], &[x, -z]])
    }
}

impl HamiltonianModel for RotatingField {
    fn dim(&self) -> usize {
        2
    }
    fn total_time(&self) -> f64 {
        self.total_time
    }
    fn label(&self) -> &str {
        &self.label
    }
    fn evaluate(&self, t: f64) -> ComplexMatrix {
        self.field_matrix(self.angular_rate() * t, -0.5 * self.eps)
    }
    fn derivative(&self, t: f64) -> ComplexMatrix {
        let w = self.angular_rate();
        let theta = w * t;
        // d/dt of (cos, sin) direction: w * (-sin, cos)
        let z = 0.5 * self.eps * w * theta.sin();
        let x = -0.5 * self.eps * w * theta.cos();
        ComplexMatrix::from_real_rows(&[&[z, x], &[x, -z]])
    }
    fn second_derivative(&self, t: f64) -> ComplexMatrix {
        let w = self.angular_rate();
        self.field_matrix(w * t, 0.5 * self.eps * w * w)
    }
}

pub struct LinearInterpolation {
    h_start: ComplexMatrix,
    h_end: ComplexMatrix,
    total_time: f64,
    label: String,
}

/// Straight-line schedule H(t) = (1 - t/T) H0 + (t/T) H1.
pub fn linear_interpolation(
    h_start: ComplexMatrix,
    h_end: ComplexMatrix,
    total_time: f64,
) -> Result<LinearInterpolation> {
    if h_start.dim() != h_end.dim() {
        return Err(LabError::DimMismatch {
            left: h_start.dim(),
            right: h_end.dim(),
        });
    }
    require_positive("total_time", total_time)?;
    for (name, h) in [("H0", &h_start), ("H1", &h_end)] {
        let defect = h.hermiticity_defect();
        if defect > crate::numkernel::HERMITICITY_TOL {
            return Err(LabError::InvalidParams {
                reason: format!("{name} is not Hermitian (defect {defect:.3e})"),
            });
        }
        if !h.is_finite() {
            return Err(LabError::InvalidParams {
                reason: format!("{name} has non-finite entries"),
            });
        }
    }
    Ok(LinearInterpolation {
        h_start,
        h_end,
        total_time,
        label: "linear_interpolation".to_owned(),
    })
}

impl HamiltonianModel for LinearInterpolation {
    fn dim(&self) -> usize {
        self.h_start.dim()
    }
    fn total_time(&self) -> f64 {
        self.total_time
    }
    fn label(&self) -> &str {
        &self.label
    }
    fn evaluate(&self, t: f64) -> ComplexMatrix {
        let s = t / self.total_time;
        self.h_start
            .scaled_real(1.0 - s)
            .add(&self.h_end.scaled_real(s))
    }
    fn derivative(&self, _t: f64) -> ComplexMatrix {
        self.h_end
            .sub(&self.h_start)
            .scaled_real(1.0 / self.total_time)
    }
    fn second_derivative(&self, _t: f64) -> ComplexMatrix {
        ComplexMatrix::zeros(self.dim())
    }
}

pub struct GroverAdiabatic {
    n_qubits: u32,
    marked: usize,
    h_start: ComplexMatrix,
    h_end: ComplexMatrix,
    total_time: f64,
    label: String,
}

/// Adiabatic search schedule H(s) = (1-s)(I - |u><u|) + s(I - |m><m|)
/// on n qubits, with |u> the uniform superposition and |m> the marked
/// basis state. Kept to n <= 6 so the dense kernel stays comfortable.
pub fn grover_adiabatic(n_qubits: u32, marked: usize, total_time: f64) -> Result<GroverAdiabatic> {
    if !(1..=6).contains(&n_qubits) {
        return Err(LabError::InvalidParams {
            reason: format!("n_qubits must be in 1..=6, got {n_qubits}"),
        });
    }
    let dim = 1usize << n_qubits;
    if marked >= dim {
        return Err(LabError::InvalidParams {
            reason: format!("marked index {marked} out of range for {dim} basis states"),
        });
    }
    require_positive("total_time", total_time)?;

    let amp = 1.0 / (dim as f64);
    let h_start = ComplexMatrix::from_fn(dim, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        Complex64::new(delta - amp, 0.0)
    });
    let h_end = ComplexMatrix::from_fn(dim, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        let proj = if i == marked && j == marked { 1.0 } else { 0.0 };
        Complex64::new(delta - proj, 0.0)
    });
    Ok(GroverAdiabatic {
        n_qubits,
        marked,
        h_start,
        h_end,
        total_time,
        label: "grover_adiabatic".to_owned(),
    })
}

impl GroverAdiabatic {
    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }
    pub fn marked(&self) -> usize {
        self.marked
    }
    /// Uniform superposition over all basis states.
    pub fn uniform_state(&self) -> StateVector {
        let dim = self.dim();
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        StateVector::new(vec![amp; dim])
    }
}

impl HamiltonianModel for GroverAdiabatic {
    fn dim(&self) -> usize {
        self.h_start.dim()
    }
    fn total_time(&self) -> f64 {
        self.total_time
    }
    fn label(&self) -> &str {
        &self.label
    }
    fn evaluate(&self, t: f64) -> ComplexMatrix {
        let s = t / self.total_time;
        self.h_start
            .scaled_real(1.0 - s)
            .add(&self.h_end.scaled_real(s))
    }
    fn derivative(&self, _t: f64) -> ComplexMatrix {
        self.h_end
            .sub(&self.h_start)
            .scaled_real(1.0 / self.total_time)
    }
    fn second_derivative(&self, _t: f64) -> ComplexMatrix {
        ComplexMatrix::zeros(self.dim())
    }
}

pub struct DualModel {
    base: Box<dyn HamiltonianModel>,
    propagators: Vec<ComplexMatrix>,
    grid_dt: f64,
    label: String,
}

/// Companion system -U^dag(t) H(t) U(t) built on the base model's
/// time-ordered propagator.
///
/// U(t) is stored on a uniform grid; off-grid queries compose one extra
/// midpoint exponential from the nearest grid point below, so the dual is
/// defined for every t in [0, T]. Its time derivatives are obtained by
/// finite differences of the assembled matrix on the grid spacing.
pub fn dual_of(base: Box<dyn HamiltonianModel>, grid_points: usize) -> Result<DualModel> {
    if grid_points < 2 {
        return Err(LabError::InvalidParams {
            reason: format!("grid_points must be at least 2, got {grid_points}"),
        });
    }
    let steps = grid_points - 1;
    check_step_phase(base.as_ref(), steps)?;
    let propagators = accumulate_propagator(base.as_ref(), steps)?;
    let grid_dt = base.total_time() / steps as f64;
    let label = format!("dual_of({})", base.label());
    Ok(DualModel {
        base,
        propagators,
        grid_dt,
        label,
    })
}

impl DualModel {
    pub fn base(&self) -> &dyn HamiltonianModel {
        self.base.as_ref()
    }

    /// U(t), exact on grid points, one extra exponential step off-grid.
    pub fn propagator_at(&self, t: f64) -> ComplexMatrix {
        let steps = self.propagators.len() - 1;
        let k = ((t / self.grid_dt).floor() as usize).min(steps);
        let t_k = k as f64 * self.grid_dt;
        let delta = t - t_k;
        if delta.abs() <= 1e-12 * self.grid_dt {
            return self.propagators[k].clone();
        }
        let h_mid = self.base.evaluate(t_k + 0.5 * delta);
        let step = expm_minus_ih(&h_mid, delta)
            .expect("midpoint exponential failed on the dual grid");
        step.mul(&self.propagators[k])
    }

    fn assemble(&self, t: f64) -> ComplexMatrix {
        let u = self.propagator_at(t);
        let h = self.base.evaluate(t);
        u.adjoint().mul(&h).mul(&u).scaled_real(-1.0).symmetrized()
    }
}

impl HamiltonianModel for DualModel {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn total_time(&self) -> f64 {
        self.base.total_time()
    }
    fn label(&self) -> &str {
        &self.label
    }
    fn evaluate(&self, t: f64) -> ComplexMatrix {
        self.assemble(t)
    }
    fn derivative(&self, t: f64) -> ComplexMatrix {
        let h = self.grid_dt;
        let lo = (t - h).max(0.0);
        let hi = (t + h).min(self.total_time());
        self.assemble(hi)
            .sub(&self.assemble(lo))
            .scaled_real(1.0 / (hi - lo))
    }
    fn second_derivative(&self, t: f64) -> ComplexMatrix {
        let h = self.grid_dt;
        let mid = t.clamp(h, self.total_time() - h);
        let f0 = self.assemble(mid - h);
        let f1 = self.assemble(mid);
        let f2 = self.assemble(mid + h);
        f0.add(&f2)
            .sub(&f1.scaled_real(2.0))
            .scaled_real(1.0 / (h * h))
    }
}
