//! Unitarity-preserving integration of i d/dt |psi> = H(t) |psi>.
//!
//! The stepper is the exponential midpoint rule: one Hermitian exponential
//! per step, psi_{k+1} = exp(-i H(t_k + dt/2) dt) psi_k. Each step is
//! unitary to eigensolver accuracy, so level populations stay meaningful
//! over long runs without renormalization; the scheme is second-order
//! accurate in dt.
//!
//! A hard guard rejects grids where the per-step phase |H| dt exceeds
//! [`STEP_PHASE_LIMIT`] anywhere on the grid, instead of silently
//! under-resolving the dynamics.

use crate::error::{LabError, Result};
use crate::models::HamiltonianModel;
use crate::numkernel::{expm_minus_ih, ComplexMatrix, StateVector};

/// Largest admissible per-step phase |H(t)| dt.
pub const STEP_PHASE_LIMIT: f64 = 0.1;

/// Tolerance on the initial state norm.
pub const STATE_NORM_TOL: f64 = 1e-10;

/// The integrated evolution on a uniform grid t_k = k T / N.
#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    pub label: String,
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// U(t_k) when requested; U(t_0) = I.
    pub propagators: Option<Vec<ComplexMatrix>>,
}

impl EvolutionTrace {
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trace has at least one state")
    }

    /// max_k | ||psi(t_k)|| - 1 |
    pub fn max_norm_defect(&self) -> f64 {
        self.states
            .iter()
            .map(|s| (s.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// max_k || psi(t_k) - U(t_k) psi(0) ||, when propagators were kept.
    pub fn max_propagator_defect(&self) -> Option<f64> {
        let props = self.propagators.as_ref()?;
        let psi0 = &self.states[0];
        Some(
            props
                .iter()
                .zip(self.states.iter())
                .map(|(u, psi)| u.matvec(psi0).sub(psi).norm())
                .fold(0.0, f64::max),
        )
    }
}

/// Checks the per-step phase guard |H(t_k)| dt <= [`STEP_PHASE_LIMIT`] on
/// every grid point of an N-step uniform grid.
pub fn check_step_phase(model: &dyn HamiltonianModel, steps: usize) -> Result<()> {
    assert!(steps >= 1, "need at least one step");
    let t_total = model.total_time();
    let dt = t_total / steps as f64;
    let mut worst = 0.0;
    let mut worst_t = 0.0;
    for k in 0..=steps {
        let t = k as f64 * dt;
        let phase = model.evaluate(t).inf_norm() * dt;
        if phase > worst {
            worst = phase;
            worst_t = t;
        }
    }
    if worst > STEP_PHASE_LIMIT {
        let suggested = (t_total * worst / (dt * STEP_PHASE_LIMIT)).ceil() as usize;
        return Err(LabError::GridTooCoarse {
            phase: worst,
            at_time: worst_t,
            limit: STEP_PHASE_LIMIT,
            suggested_steps: suggested.max(steps + 1),
        });
    }
    Ok(())
}

/// Integrates the Schrödinger equation over [0, T] with `steps` midpoint
/// exponential steps, recording every intermediate state and, optionally,
/// the accumulated propagator.
pub fn evolve(
    model: &dyn HamiltonianModel,
    psi0: &StateVector,
    steps: usize,
    keep_propagators: bool,
) -> Result<EvolutionTrace> {
    if psi0.dim() != model.dim() {
        return Err(LabError::DimMismatch {
            left: psi0.dim(),
            right: model.dim(),
        });
    }
    psi0.check_normalized(STATE_NORM_TOL)?;
    check_step_phase(model, steps)?;

    let t_total = model.total_time();
    let dt = t_total / steps as f64;

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut props = keep_propagators.then(|| {
        let mut v = Vec::with_capacity(steps + 1);
        v.push(ComplexMatrix::identity(model.dim()));
        v
    });

    times.push(0.0);
    states.push(psi0.clone());
    let mut psi = psi0.clone();
    for k in 0..steps {
        let t_mid = (k as f64 + 0.5) * dt;
        let step = expm_minus_ih(&model.evaluate(t_mid), dt)?;
        psi = step.matvec(&psi);
        times.push((k + 1) as f64 * dt);
        states.push(psi.clone());
        if let Some(list) = props.as_mut() {
            let next = step.mul(list.last().expect("propagator list is seeded"));
            list.push(next);
        }
    }

    Ok(EvolutionTrace {
        label: model.label().to_owned(),
        times,
        states,
        propagators: props,
    })
}

/// Accumulates U(t_k) on the same grid and stepping rule as [`evolve`]:
/// U(t_0) = I, U(t_{k+1}) = exp(-i H(t_k + dt/2) dt) U(t_k).
pub fn accumulate_propagator(
    model: &dyn HamiltonianModel,
    steps: usize,
) -> Result<Vec<ComplexMatrix>> {
    check_step_phase(model, steps)?;
    let dt = model.total_time() / steps as f64;
    let mut list = Vec::with_capacity(steps + 1);
    list.push(ComplexMatrix::identity(model.dim()));
    for k in 0..steps {
        let t_mid = (k as f64 + 0.5) * dt;
        let step = expm_minus_ih(&model.evaluate(t_mid), dt)?;
        list.push(step.mul(list.last().expect("seeded")));
    }
    Ok(list)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{
        driven_two_level, linear_interpolation, rotating_field, DrivenTwoLevelParams,
    };
    use crate::numkernel::eigh;

    fn constant_bias(total_time: f64) -> impl HamiltonianModel {
        // Constant H = -(1/2) sigma_z expressed as a degenerate interpolation.
        let h = ComplexMatrix::from_real_rows(&[&[-0.5, 0.0], &[0.0, 0.5]]);
        linear_interpolation(h.clone(), h, total_time).unwrap()
    }

    fn lz_with_transverse(total_time: f64) -> impl HamiltonianModel {
        let h0 = ComplexMatrix::from_real_rows(&[&[-0.5, -0.05], &[-0.05, 0.5]]);
        let h1 = ComplexMatrix::from_real_rows(&[&[0.5, -0.05], &[-0.05, -0.5]]);
        linear_interpolation(h0, h1, total_time).unwrap()
    }

    #[test]
    fn stationary_state_stays_put() {
        let model = constant_bias(25.0);
        let psi0 = StateVector::basis(2, 0);
        let trace = evolve(&model, &psi0, 500, false).unwrap();
        for state in &trace.states {
            let overlap = psi0.inner(state).norm();
            assert!((overlap - 1.0).abs() <= 1e-12);
        }
        assert!(trace.max_norm_defect() <= 1e-12);
    }

    #[test]
    fn resonant_drive_flips_population() {
        // Half a Rabi period at resonance leaves the system in the excited
        // instantaneous level.
        let v = 0.02;
        let t_total = std::f64::consts::PI / v;
        let model = driven_two_level(
            DrivenTwoLevelParams { eps: 1.0, v, omega0: 1.0 },
            t_total,
        )
        .unwrap();
        let psi0 = StateVector::basis(2, 0);
        let trace = evolve(&model, &psi0, 200_000, false).unwrap();
        let eig_final = eigh(&model.evaluate(t_total)).unwrap();
        let p_excited = eig_final.vectors[1].inner(trace.final_state()).norm_sqr();
        assert!(
            (p_excited - 1.0).abs() <= 0.05,
            "excited population {p_excited} should be ~1"
        );
    }

    #[test]
    fn slow_sweep_keeps_ground_population() {
        let t_total = 2000.0;
        let model = lz_with_transverse(t_total);
        let ground = eigh(&model.evaluate(0.0)).unwrap().vectors[0].clone();
        let coarse = evolve(&model, &ground, 20_000, false).unwrap();
        let fine = evolve(&model, &ground, 200_000, false).unwrap();

        let final_eig = eigh(&model.evaluate(t_total)).unwrap();
        for trace in [&coarse, &fine] {
            let p_ground = final_eig.vectors[0].inner(trace.final_state()).norm_sqr();
            assert!(p_ground >= 0.99, "ground population {p_ground}");
        }
        // The coarse run agrees with the 10x oracle.
        let diff = coarse.final_state().sub(fine.final_state()).norm();
        assert!(diff <= 1e-4, "coarse vs fine mismatch {diff:e}");
    }

    #[test]
    fn rejects_unnormalized_state() {
        let model = constant_bias(1.0);
        let psi0 = StateVector::new(vec![
            num_complex::Complex64::new(0.5, 0.0),
            num_complex::Complex64::new(0.0, 0.0),
        ]);
        assert!(matches!(
            evolve(&model, &psi0, 10, false),
            Err(LabError::NotNormalized { .. })
        ));
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let model = constant_bias(1.0);
        let psi0 = StateVector::basis(3, 0);
        assert!(matches!(
            evolve(&model, &psi0, 10, false),
            Err(LabError::DimMismatch { left: 3, right: 2 })
        ));
    }

    #[test]
    fn rejects_coarse_grid_loudly() {
        let model = constant_bias(100.0);
        match evolve(&model, &StateVector::basis(2, 0), 10, false) {
            Err(LabError::GridTooCoarse { phase, suggested_steps, .. }) => {
                assert!(phase > STEP_PHASE_LIMIT);
                assert!(suggested_steps >= 50);
            }
            other => panic!("expected GridTooCoarse, got {other:?}"),
        }
    }

    #[test]
    fn single_step_constant_hamiltonian_is_one_exponential() {
        let t_total = 0.05;
        let model = constant_bias(t_total);
        let from_accumulate = accumulate_propagator(&model, 1).unwrap();
        let direct = expm_minus_ih(&model.evaluate(0.0), t_total).unwrap();
        assert!(from_accumulate[1].sub(&direct).max_abs() <= 1e-14);
    }

    #[test]
    fn constant_hamiltonian_steps_commute() {
        let t_total = 10.0;
        let model = constant_bias(t_total);
        let props = accumulate_propagator(&model, 137).unwrap();
        let direct = expm_minus_ih(&model.evaluate(0.0), t_total).unwrap();
        assert!(props.last().unwrap().sub(&direct).max_abs() <= 1e-10);
    }

    #[test]
    fn accumulated_propagator_stays_unitary() {
        let model = rotating_field(1.0, 200.0, 1).unwrap();
        let props = accumulate_propagator(&model, 20_000).unwrap();
        let defect = props.last().unwrap().unitarity_defect();
        assert!(defect <= 1e-9, "unitarity defect {defect:e}");
    }

    #[test]
    fn propagator_reproduces_states() {
        let model = lz_with_transverse(100.0);
        let ground = eigh(&model.evaluate(0.0)).unwrap().vectors[0].clone();
        let trace = evolve(&model, &ground, 2_000, true).unwrap();
        let defect = trace.max_propagator_defect().unwrap();
        assert!(defect <= 1e-8, "propagator/state mismatch {defect:e}");
    }

    #[test]
    fn stepping_converges_at_second_order() {
        let cases: Vec<Box<dyn HamiltonianModel>> = vec![
            Box::new(
                driven_two_level(DrivenTwoLevelParams { eps: 1.0, v: 0.3, omega0: 1.0 }, 20.0)
                    .unwrap(),
            ),
            Box::new(rotating_field(1.0, 50.0, 1).unwrap()),
        ];
        for model in &cases {
            let psi0 = eigh(&model.evaluate(0.0)).unwrap().vectors[0].clone();
            let base_steps = 800;
            let oracle = evolve(model.as_ref(), &psi0, 20 * base_steps, false).unwrap();
            let coarse = evolve(model.as_ref(), &psi0, base_steps, false).unwrap();
            let fine = evolve(model.as_ref(), &psi0, 2 * base_steps, false).unwrap();
            let err_coarse = coarse.final_state().sub(oracle.final_state()).norm();
            let err_fine = fine.final_state().sub(oracle.final_state()).norm();
            let factor = err_coarse / err_fine;
            assert!(
                (3.2..=4.8).contains(&factor),
                "{}: expected ~4x error drop on dt halving, got {factor}",
                model.label()
            );
        }
    }
}
