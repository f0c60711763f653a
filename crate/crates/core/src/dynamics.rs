//! Exact numerical propagation of the master equation in the density-matrix
//! and coherence-vector pictures, built on an embedded Dormand-Prince 5(4)
//! pair with PI step control and 4th-order dense output.
//!
//! No renormalization or projection is applied during integration; trace and
//! positivity drift are reported as diagnostics so violations surface instead
//! of being masked.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg::{eig_hermitian, ComplexMatrix};
use crate::superop::{
    lindbladian_apply, CoherenceVector, DensityMatrix, NoiseChannel, SuperopError, SuperoperatorFn,
};

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("step size underflow at t={t:.6e} (h={h:.3e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("invalid initial state: {0}")]
    InvalidInitialState(String),
    #[error("invalid integrator config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Superop(#[from] SuperopError),
}

/// Tolerances, step bounds, and the dense-output grid.
#[derive(Debug, Clone)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub initial_step: f64,
    /// Strictly increasing output times within [0, tau].
    pub grid: Vec<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            initial_step: 0.0,
            grid: Vec::new(),
        }
    }
}

impl IntegratorConfig {
    pub fn with_uniform_grid(mut self, tau: f64, samples: usize) -> Self {
        self.grid = uniform_grid(tau, samples);
        self
    }

    fn validate(&self, tau: f64) -> Result<(), DynamicsError> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(DynamicsError::BadConfig("tolerances must be positive".into()));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DynamicsError::BadConfig("grid not strictly increasing".into()));
        }
        if let (Some(&first), Some(&last)) = (self.grid.first(), self.grid.last()) {
            if first < 0.0 || last > tau * (1.0 + 1e-12) {
                return Err(DynamicsError::BadConfig("grid outside [0, tau]".into()));
            }
        }
        Ok(())
    }
}

/// `samples` points, uniformly spaced, ending exactly at `tau` and starting
/// at 0.
pub fn uniform_grid(tau: f64, samples: usize) -> Vec<f64> {
    assert!(samples >= 2, "need at least two grid points");
    (0..samples)
        .map(|k| {
            if k == samples - 1 {
                // tau * k / (samples-1) can round below tau; pin the endpoint.
                tau
            } else {
                tau * k as f64 / (samples - 1) as f64
            }
        })
        .collect()
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
];
const C: [f64; 6] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0];
const B: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

fn axpy<const N: usize>(y: &mut [C64; N], a: f64, x: &[C64; N]) {
    for i in 0..N {
        y[i] += a * x[i];
    }
}

/// Integrate dy/dt = f(t, y) from 0 to tau, invoking `emit` at every dense
/// grid point (including t=0 if present) and returning the final state.
pub fn dopri5<const N: usize>(
    f: &mut dyn FnMut(f64, &[C64; N]) -> [C64; N],
    y0: [C64; N],
    tau: f64,
    cfg: &IntegratorConfig,
    emit: &mut dyn FnMut(f64, &[C64; N]),
) -> Result<[C64; N], DynamicsError> {
    cfg.validate(tau)?;
    if !(tau > 0.0) {
        return Err(DynamicsError::BadConfig("tau must be positive".into()));
    }

    let mut grid_iter = cfg.grid.iter().copied().peekable();
    if let Some(&t) = grid_iter.peek() {
        if t == 0.0 {
            emit(0.0, &y0);
            grid_iter.next();
        }
    }

    let mut t = 0.0f64;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = if cfg.initial_step > 0.0 {
        cfg.initial_step
    } else {
        initial_step_guess(f, &y, &k1, tau, cfg)
    };
    h = h.min(cfg.max_step).min(tau);

    let safe = 0.9;
    let beta = 0.04;
    let expo1 = 0.2 - beta * 0.75;
    let facc1: f64 = 1.0 / 0.2;
    let facc2: f64 = 1.0 / 10.0;
    let mut facold = 1e-4f64;
    let mut rejected = false;

    loop {
        if t >= tau {
            break;
        }
        if h < 16.0 * f64::EPSILON * t.abs().max(tau) {
            return Err(DynamicsError::StepUnderflow { t, h });
        }
        if t + h >= tau {
            h = tau - t;
        }

        // Stages.
        let mut k = [[C64::ZERO; N]; 7];
        k[0] = k1;
        for s in 1..6 {
            let mut ys = y;
            for j in 0..s {
                if A[s][j] != 0.0 {
                    axpy(&mut ys, h * A[s][j], &k[j]);
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut ynew = y;
        for j in 0..6 {
            if B[j] != 0.0 {
                axpy(&mut ynew, h * B[j], &k[j]);
            }
        }
        k[6] = f(t + h, &ynew);

        // Embedded error estimate.
        let mut err_sq = 0.0f64;
        for i in 0..N {
            let mut e = C64::ZERO;
            for j in 0..7 {
                if E[j] != 0.0 {
                    e += E[j] * k[j][i];
                }
            }
            e *= h;
            let sk = cfg.abs_tol + cfg.rel_tol * y[i].norm().max(ynew[i].norm());
            err_sq += (e.norm() / sk).powi(2);
        }
        let err = (err_sq / N as f64).sqrt();

        let fac11 = err.powf(expo1);
        let mut fac = fac11 / facold.powf(beta);
        fac = facc2.max(facc1.min(fac / safe));
        let mut hnew = h / fac;

        if err <= 1.0 {
            facold = err.max(1e-4);
            // Dense output coefficients for this step.
            let mut cont = [[C64::ZERO; N]; 5];
            for i in 0..N {
                let ydiff = ynew[i] - y[i];
                let bspl = h * k[0][i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - h * k[6][i] - bspl;
                let mut dsum = C64::ZERO;
                for j in 0..7 {
                    if D[j] != 0.0 {
                        dsum += D[j] * k[j][i];
                    }
                }
                cont[4][i] = h * dsum;
            }
            let t_new = t + h;
            while let Some(&tg) = grid_iter.peek() {
                if tg > t_new + 1e-14 * tau {
                    break;
                }
                let s = ((tg - t) / h).clamp(0.0, 1.0);
                let s1 = 1.0 - s;
                let mut yi = [C64::ZERO; N];
                for i in 0..N {
                    yi[i] = cont[0][i]
                        + s * (cont[1][i]
                            + s1 * (cont[2][i] + s * (cont[3][i] + s1 * cont[4][i])));
                }
                emit(tg, &yi);
                grid_iter.next();
            }

            k1 = k[6];
            y = ynew;
            t = t_new;
            if rejected {
                hnew = hnew.min(h);
                rejected = false;
            }
        } else {
            hnew = h / facc1.min(fac11 / safe);
            rejected = true;
        }
        h = hnew.min(cfg.max_step);
    }

    // Flush any grid point equal to tau (within roundoff).
    while let Some(&tg) = grid_iter.peek() {
        if tg >= tau * (1.0 - 1e-12) {
            emit(tg, &y);
            grid_iter.next();
        } else {
            break;
        }
    }

    Ok(y)
}

fn initial_step_guess<const N: usize>(
    f: &mut dyn FnMut(f64, &[C64; N]) -> [C64; N],
    y0: &[C64; N],
    f0: &[C64; N],
    tau: f64,
    cfg: &IntegratorConfig,
) -> f64 {
    let sk = |y: &[C64; N], i: usize| cfg.abs_tol + cfg.rel_tol * y[i].norm();
    let d0 = (0..N).map(|i| (y0[i].norm() / sk(y0, i)).powi(2)).sum::<f64>().sqrt();
    let d1 = (0..N).map(|i| (f0[i].norm() / sk(y0, i)).powi(2)).sum::<f64>().sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * tau } else { 0.01 * d0 / d1 };
    let mut y1 = *y0;
    axpy(&mut y1, h0, f0);
    let f1 = f(h0, &y1);
    let d2 = (0..N)
        .map(|i| ((f1[i] - f0[i]).norm() / sk(y0, i)).powi(2))
        .sum::<f64>()
        .sqrt()
        / h0;
    let d_max = d1.max(d2);
    let h1 = if d_max <= 1e-15 {
        (h0 * 1e-3).max(1e-6 * tau)
    } else {
        (0.01 / d_max).powf(0.2)
    };
    (100.0 * h0).min(h1).min(tau)
}

/// Time series of states with per-point diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub trace_error: Vec<f64>,
    pub min_eigenvalue: Vec<f64>,
    pub purity: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn matrix_to_state4(m: &ComplexMatrix) -> [C64; 4] {
    [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
}

fn state4_to_matrix(y: &[C64; 4]) -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![y[0], y[1]], vec![y[2], y[3]]])
}

/// Integrate the master equation d rho/dt = -i[H, rho] + dissipator(rho) for
/// a qubit and sample the dense grid.
pub fn integrate_master(
    h: impl Fn(f64) -> ComplexMatrix,
    channel: &NoiseChannel,
    rho0: &DensityMatrix,
    tau: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    rho0.validate().map_err(|e| DynamicsError::InvalidInitialState(e.to_string()))?;
    if rho0.dim() != 2 {
        return Err(DynamicsError::InvalidInitialState(format!(
            "expected a qubit state, got dimension {}",
            rho0.dim()
        )));
    }
    let mut rhs = |t: f64, y: &[C64; 4]| {
        let rho = state4_to_matrix(y);
        matrix_to_state4(&lindbladian_apply(&h(t), channel, &rho))
    };
    let mut traj = Trajectory {
        times: Vec::with_capacity(cfg.grid.len()),
        states: Vec::with_capacity(cfg.grid.len()),
        trace_error: Vec::with_capacity(cfg.grid.len()),
        min_eigenvalue: Vec::with_capacity(cfg.grid.len()),
        purity: Vec::with_capacity(cfg.grid.len()),
    };
    let mut emit = |t: f64, y: &[C64; 4]| {
        let m = state4_to_matrix(y);
        let trace_err = (m.trace() - C64::ONE).norm();
        let min_ev = eig_hermitian(&m.add(&m.adjoint()).scale(C64::from(0.5)))
            .map(|(vals, _)| vals[0])
            .unwrap_or(f64::NAN);
        let rho = DensityMatrix::new_unchecked(m);
        traj.times.push(t);
        traj.trace_error.push(trace_err);
        traj.min_eigenvalue.push(min_ev);
        traj.purity.push(rho.purity());
        traj.states.push(rho);
    };
    dopri5(&mut rhs, matrix_to_state4(rho0.matrix()), tau, cfg, &mut emit)?;
    Ok(traj)
}

/// Coherence-vector trajectory from the vectorized picture.
#[derive(Debug, Clone)]
pub struct CoherenceTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<CoherenceVector>,
}

/// Integrate d|rho>>/dt = L(t)|rho>> and sample the dense grid. Component 0
/// stays at its initial value because the first row of L vanishes.
pub fn integrate_superop(
    sup: &SuperoperatorFn,
    v0: &CoherenceVector,
    tau: f64,
    cfg: &IntegratorConfig,
) -> Result<CoherenceTrajectory, DynamicsError> {
    if sup.dim() != 4 || v0.len() != 4 {
        return Err(DynamicsError::InvalidInitialState(format!(
            "vectorized picture expects dimension 4, got {}",
            v0.len()
        )));
    }
    let mut y0 = [C64::ZERO; 4];
    y0.copy_from_slice(&v0.components);
    let mut rhs = |t: f64, y: &[C64; 4]| {
        let l = sup.eval(t);
        let mut out = [C64::ZERO; 4];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = C64::ZERO;
            for j in 0..4 {
                acc += l[(i, j)] * y[j];
            }
            *slot = acc;
        }
        out
    };
    let mut traj = CoherenceTrajectory { times: Vec::new(), states: Vec::new() };
    let mut emit = |t: f64, y: &[C64; 4]| {
        traj.times.push(t);
        traj.states.push(CoherenceVector::new(y.to_vec()).at_time(t));
    };
    dopri5(&mut rhs, y0, tau, cfg, &mut emit)?;
    Ok(traj)
}
