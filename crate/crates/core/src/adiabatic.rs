//! Adiabatic-condition diagnostics and propagation in the spectral
//! coefficient space: the adiabatic parameters xi_ba, the adiabatic quantum
//! condition verdict, adiabatic propagation of initial states, the exact
//! coupled coefficient ODE, and the asymptotic two-block check.
//!
//! Conventions: the state expands as |rho(t)>> = sum_a c_a(t) e^{L_a(t)}
//! |D_a(t)>> with L_a(t) the running integral of lambda_a; projecting the
//! vectorized master equation onto the biorthogonal frame gives
//!     dc_b/dt = -sum_a c_a e^{L_a - L_b} kappa_ba,      kappa_ba = <<E_b|dD_a/dt>>,
//! so with cross couplings suppressed c_b(t) = c_b(0) e^{-int kappa_bb}. All
//! exponential weights are handled in log space; the eta factor of xi spans
//! many orders of magnitude over millisecond horizons.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::dynamics::{dopri5, integrate_superop, DynamicsError, IntegratorConfig};
use crate::measurement::{fidelity, MeasurementError};
use crate::spectral::{
    default_derivative_step, frame_derivative, kappa_perturbative, SpectralError, SpectralFrame,
    SpectralPath,
};
use crate::superop::{
    devectorize, CoherenceVector, OnInvalidState, OperatorBasis, SuperopError, SuperoperatorFn,
};

#[derive(Debug, Error)]
pub enum AdiabaticError {
    #[error("gap |lambda_{b} - lambda_{a}| = {gap:.3e} below tolerance {tol:.3e}")]
    GapTooSmall { b: usize, a: usize, gap: f64, tol: f64 },
    #[error("initial state populates blocks {populated:?}; expected the zero block plus exactly one other")]
    InitialStateNotTwoBlock { populated: Vec<usize> },
    #[error("initial coefficient c_0 = {got} is not 1 (invalid state or frame)")]
    BadZeroCoefficient { got: C64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Superop(#[from] SuperopError),
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
}

/// Default threshold concretizing the "much smaller than one" adiabatic
/// quantum condition.
pub const AQC_THRESHOLD: f64 = 1e-2;

/// Adiabatic parameter
/// xi_ba(t) = | e^{int_0^t Re[lambda_a - lambda_b]} <<E_b|dD_a/dt>> /
/// (lambda_b - lambda_a) |, evaluated on the tracked path. Asymmetric in
/// (b, a) through the eta factor.
pub fn xi(
    path: &SpectralPath,
    sup: &SuperoperatorFn,
    b: usize,
    a: usize,
    t: f64,
) -> Result<f64, AdiabaticError> {
    assert_ne!(a, b, "xi is defined for distinct labels");
    // Pairings with the zero block vanish identically: D_0 is constant and
    // every other eigenvector keeps an exactly zero first component.
    if a == 0 || b == 0 {
        return Ok(0.0);
    }
    let frame = path.frame_at(sup, t)?;
    // Gap first: near-degenerate eigenvectors make the finite-difference
    // derivative meaningless, so the blown-up denominator is the signal.
    let gap = frame.eigenvalues[b] - frame.eigenvalues[a];
    let gap_tol = path.options().gap_tol_rel
        * frame.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if gap.norm() < gap_tol {
        return Err(AdiabaticError::GapTooSmall { b, a, gap: gap.norm(), tol: gap_tol });
    }
    let h = default_derivative_step(&frame);
    let ddot = frame_derivative(path, sup, a, t, h)?;
    let kappa = frame.project_left(b, &ddot);
    if kappa.norm() == 0.0 {
        return Ok(0.0);
    }
    let integrals = path.lambda_integrals(t);
    let eta_log = (integrals[a] - integrals[b]).re;
    let log_xi = eta_log + kappa.norm().ln() - gap.norm().ln();
    Ok(clamped_exp(log_xi))
}

fn clamped_exp(x: f64) -> f64 {
    x.min(700.0).exp()
}

/// Log of the eta factor e^{int Re[lambda_a - lambda_b]} at time t.
pub fn eta_log(path: &SpectralPath, b: usize, a: usize, t: f64) -> f64 {
    let integrals = path.lambda_integrals(t);
    (integrals[a] - integrals[b]).re
}

/// Per-pair xi table along the path grid plus the AQC verdict.
#[derive(Debug, Clone)]
pub struct AdiabaticReport {
    pub pairs: Vec<(usize, usize)>,
    pub times: Vec<f64>,
    /// xi[pair_index][time_index]
    pub xi: Vec<Vec<f64>>,
    /// log eta per pair and time (kept in log space to avoid overflow)
    pub eta_log: Vec<Vec<f64>>,
    pub max_xi: Vec<f64>,
    pub threshold: f64,
    pub verdict: bool,
}

impl AdiabaticReport {
    pub fn max_over_pairs(&self) -> f64 {
        self.max_xi.iter().copied().fold(0.0, f64::max)
    }
}

/// All (b, a) pairs with a drawn from the populated labels.
pub fn relevant_pairs(populated: &[usize], dim: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for &a in populated {
        for b in 0..dim {
            if b != a {
                pairs.push((b, a));
            }
        }
    }
    pairs
}

/// Evaluate xi for the given pairs at every path grid time and compare the
/// per-pair maxima against the threshold.
pub fn check_aqc(
    path: &SpectralPath,
    sup: &SuperoperatorFn,
    pairs: &[(usize, usize)],
    threshold: f64,
) -> Result<AdiabaticReport, AdiabaticError> {
    let times: Vec<f64> = path.frames().iter().map(|f| f.t).collect();
    let mut xi_table = vec![Vec::with_capacity(times.len()); pairs.len()];
    let mut eta_table = vec![Vec::with_capacity(times.len()); pairs.len()];

    // Running lambda integrals along the grid (trapezoid, incremental).
    let dim = path.dim();
    let mut lam_int = vec![C64::ZERO; dim];
    let mut prev_frame: Option<&SpectralFrame> = None;

    for frame in path.frames() {
        if let Some(prev) = prev_frame {
            let dt = frame.t - prev.t;
            for a in 0..dim {
                lam_int[a] += 0.5 * dt * (prev.eigenvalues[a] + frame.eigenvalues[a]);
            }
        }
        prev_frame = Some(frame);

        let scale = frame.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let gap_tol = path.options().gap_tol_rel * scale;
        // Gap screening first, then derivatives once per surviving source.
        for &(b, a) in pairs {
            if a == 0 || b == 0 {
                continue;
            }
            let gap = (frame.eigenvalues[b] - frame.eigenvalues[a]).norm();
            if gap < gap_tol {
                return Err(AdiabaticError::GapTooSmall { b, a, gap, tol: gap_tol });
            }
        }
        let mut ddots: Vec<Option<Vec<C64>>> = vec![None; dim];
        for &(b, a) in pairs {
            if a != 0 && b != 0 && ddots[a].is_none() {
                let h = default_derivative_step(frame);
                ddots[a] = Some(frame_derivative(path, sup, a, frame.t, h)?);
            }
        }
        for (idx, &(b, a)) in pairs.iter().enumerate() {
            let el = (lam_int[a] - lam_int[b]).re;
            eta_table[idx].push(el);
            if a == 0 || b == 0 {
                xi_table[idx].push(0.0);
                continue;
            }
            let kappa = frame.project_left(b, ddots[a].as_ref().unwrap());
            if kappa.norm() == 0.0 {
                xi_table[idx].push(0.0);
                continue;
            }
            let gap = (frame.eigenvalues[b] - frame.eigenvalues[a]).norm();
            xi_table[idx].push(clamped_exp(el + kappa.norm().ln() - gap.ln()));
        }
    }

    let max_xi: Vec<f64> =
        xi_table.iter().map(|row| row.iter().copied().fold(0.0, f64::max)).collect();
    let verdict = max_xi.iter().all(|&m| m < threshold);
    Ok(AdiabaticReport {
        pairs: pairs.to_vec(),
        times,
        xi: xi_table,
        eta_log: eta_table,
        max_xi,
        threshold,
        verdict,
    })
}

/// Spectral-space coefficients c_a plus the accumulated integrals
/// L_a = int_0^t lambda_a dt' (log-space decay/phase bookkeeping).
#[derive(Debug, Clone)]
pub struct CoefficientState {
    pub c: Vec<C64>,
    pub lambda_int: Vec<C64>,
}

impl CoefficientState {
    /// Labels carrying non-negligible weight.
    pub fn populated(&self, tol: f64) -> Vec<usize> {
        self.c
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(a, _)| a)
            .collect()
    }
}

/// Project an initial coherence vector onto the frame: c_a(0) = <<E_a|rho0>>.
/// The zero-block coefficient is snapped to exactly 1 after verifying it.
pub fn initial_coefficients(
    v0: &CoherenceVector,
    frame0: &SpectralFrame,
) -> Result<CoefficientState, AdiabaticError> {
    let dim = frame0.dim();
    assert_eq!(v0.len(), dim, "dimension mismatch");
    let mut c: Vec<C64> = (0..dim).map(|a| frame0.project_left(a, &v0.components)).collect();
    if (c[0] - C64::ONE).norm() > 1e-9 {
        return Err(AdiabaticError::BadZeroCoefficient { got: c[0] });
    }
    c[0] = C64::ONE;
    Ok(CoefficientState { c, lambda_int: vec![C64::ZERO; dim] })
}

/// Adiabatic propagation: |rho(t)>> = sum_a c_a(0)
/// e^{L_a(t) - int_0^t kappa_aa} |D_a(t)>>, with the diagonal (Berry-like)
/// term included via the gauge-consistent kappa_aa.
pub fn adiabatic_propagate(
    coeffs0: &CoefficientState,
    path: &SpectralPath,
    sup: &SuperoperatorFn,
    t: f64,
) -> Result<CoherenceVector, AdiabaticError> {
    let frame = path.frame_at(sup, t)?;
    let lam = path.lambda_integrals(t);
    let kap = diagonal_kappa_integrals(path, sup, t)?;
    let dim = path.dim();
    let mut v = vec![C64::ZERO; dim];
    for a in 0..dim {
        if coeffs0.c[a].norm() == 0.0 {
            continue;
        }
        let exponent = lam[a] - kap[a];
        let weight = coeffs0.c[a] * exp_clamped(exponent);
        let d = frame.right_vector(a);
        for (slot, comp) in v.iter_mut().zip(&d) {
            *slot += weight * comp;
        }
    }
    Ok(CoherenceVector::new(v).at_time(t))
}

fn exp_clamped(z: C64) -> C64 {
    C64::from_polar(clamped_exp(z.re), z.im)
}

/// Cumulative integrals of the diagonal kappa_aa along the path up to t
/// (trapezoid on the grid; kappa_00 is identically zero).
fn diagonal_kappa_integrals(
    path: &SpectralPath,
    sup: &SuperoperatorFn,
    t: f64,
) -> Result<Vec<C64>, AdiabaticError> {
    let dim = path.dim();
    let mut acc = vec![C64::ZERO; dim];
    let mut prev: Option<(f64, Vec<C64>)> = None;
    for frame in path.frames() {
        if frame.t > t && prev.is_some() {
            break;
        }
        let diag = kappa_diagonal_at(path, sup, frame.t)?;
        if let Some((t0, d0)) = &prev {
            let dt = frame.t.min(t) - t0;
            if dt > 0.0 {
                for a in 0..dim {
                    acc[a] += 0.5 * dt * (d0[a] + diag[a]);
                }
            }
        }
        prev = Some((frame.t, diag));
    }
    Ok(acc)
}

fn kappa_diagonal_at(
    path: &SpectralPath,
    sup: &SuperoperatorFn,
    t: f64,
) -> Result<Vec<C64>, AdiabaticError> {
    let reference = path.frame(path.bracketing_index(t));
    let frame = path.frame_at(sup, t)?;
    let h = default_derivative_step(&frame);
    let ldot = sup.derivative(t, h);
    let kappa = kappa_perturbative(&frame, reference, &ldot, path.options().gap_tol_rel)?;
    Ok((0..path.dim()).map(|a| kappa[(a, a)]).collect())
}

/// Whether the coefficient ODE keeps the inter-block couplings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingMode {
    Full,
    /// Zero the cross couplings, leaving only the diagonal kappa_bb terms;
    /// integrating in this mode must reproduce `adiabatic_propagate`.
    DiagonalOnly,
}

/// Coefficient-space trajectory sampled on the integrator grid.
#[derive(Debug, Clone)]
pub struct CoefficientTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<CoefficientState>,
}

/// Integrate the exact coupled coefficient ODE
/// dc_b/dt = -sum_a c_a e^{L_a - L_b} kappa_ba, dL_a/dt = lambda_a(t),
/// with kappa evaluated from a fresh decomposition aligned to the path.
pub fn integrate_coefficients(
    coeffs0: &CoefficientState,
    path: &SpectralPath,
    sup: &SuperoperatorFn,
    tau: f64,
    cfg: &IntegratorConfig,
    mode: CouplingMode,
) -> Result<CoefficientTrajectory, AdiabaticError> {
    let dim = path.dim();
    assert_eq!(dim, 4, "coefficient integration currently targets qubit superoperators");
    let mut y0 = [C64::ZERO; 8];
    y0[..4].copy_from_slice(&coeffs0.c);
    y0[4..].copy_from_slice(&coeffs0.lambda_int);

    let mut failure: Option<AdiabaticError> = None;
    let mut rhs = |t: f64, y: &[C64; 8]| -> [C64; 8] {
        let mut out = [C64::ZERO; 8];
        if failure.is_some() {
            return out;
        }
        let reference = path.frame(path.bracketing_index(t));
        let frame = match path.frame_at(sup, t) {
            Ok(f) => f,
            Err(e) => {
                failure = Some(e.into());
                return out;
            }
        };
        let h = default_derivative_step(&frame);
        let ldot = sup.derivative(t, h);
        let kappa =
            match kappa_perturbative(&frame, reference, &ldot, path.options().gap_tol_rel) {
                Ok(k) => k,
                Err(e) => {
                    failure = Some(e.into());
                    return out;
                }
            };
        for b in 0..4 {
            let mut acc = C64::ZERO;
            for a in 0..4 {
                if kappa[(b, a)] == C64::ZERO {
                    continue;
                }
                if mode == CouplingMode::DiagonalOnly && a != b {
                    continue;
                }
                let weight = if a == b {
                    C64::ONE
                } else {
                    exp_clamped(y[4 + a] - y[4 + b])
                };
                acc += y[a] * weight * kappa[(b, a)];
            }
            out[b] = -acc;
            out[4 + b] = frame.eigenvalues[b];
        }
        out
    };

    let mut traj = CoefficientTrajectory { times: Vec::new(), states: Vec::new() };
    let mut emit = |t: f64, y: &[C64; 8]| {
        traj.times.push(t);
        traj.states.push(CoefficientState {
            c: y[..4].to_vec(),
            lambda_int: y[4..].to_vec(),
        });
    };
    dopri5(&mut rhs, y0, tau, cfg, &mut emit)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(traj)
}

/// Reassemble the coherence vector sum_a c_a e^{L_a} |D_a(t)>> from a
/// coefficient state.
pub fn reconstruct_coherence(
    state: &CoefficientState,
    path: &SpectralPath,
    sup: &SuperoperatorFn,
    t: f64,
) -> Result<CoherenceVector, AdiabaticError> {
    let frame = path.frame_at(sup, t)?;
    let dim = frame.dim();
    let mut v = vec![C64::ZERO; dim];
    for a in 0..dim {
        let weight = state.c[a] * exp_clamped(state.lambda_int[a]);
        let d = frame.right_vector(a);
        for (slot, comp) in v.iter_mut().zip(&d) {
            *slot += weight * comp;
        }
    }
    Ok(CoherenceVector::new(v).at_time(t))
}

/// Convergence report for the asymptotic two-block theorem: fidelity between
/// the exact evolution and the adiabatic propagation on an increasing grid.
#[derive(Debug, Clone)]
pub struct TwoBlockReport {
    pub times: Vec<f64>,
    pub fidelities: Vec<f64>,
    pub final_fidelity: f64,
    pub threshold: f64,
    /// final_fidelity >= threshold
    pub converged: bool,
}

/// Check that a two-block initial state approaches the adiabatic solution.
/// Errors with `InitialStateNotTwoBlock` unless exactly one label besides the
/// zero block is populated.
pub fn asymptotic_two_block_check(
    path: &SpectralPath,
    sup: &SuperoperatorFn,
    v0: &CoherenceVector,
    grid: &[f64],
    threshold: f64,
    cfg: &IntegratorConfig,
) -> Result<TwoBlockReport, AdiabaticError> {
    let coeffs0 = initial_coefficients(v0, path.frame(0))?;
    let populated = coeffs0.populated(1e-8);
    let nonzero: Vec<usize> = populated.iter().copied().filter(|&a| a != 0).collect();
    if nonzero.len() != 1 {
        return Err(AdiabaticError::InitialStateNotTwoBlock { populated });
    }

    let tau = *grid.last().expect("empty grid");
    let mut cfg = cfg.clone();
    cfg.grid = grid.to_vec();
    let exact = integrate_superop(sup, v0, tau, &cfg)?;

    let basis = OperatorBasis::pauli();
    let mut fidelities = Vec::with_capacity(grid.len());
    for (k, &t) in exact.times.iter().enumerate() {
        let ad = adiabatic_propagate(&coeffs0, path, sup, t)?;
        let rho_exact = devectorize(&exact.states[k], &basis, OnInvalidState::Warn)?;
        let rho_ad = devectorize(&ad, &basis, OnInvalidState::Warn)?;
        fidelities.push(fidelity(&rho_exact, &rho_ad)?);
    }
    let final_fidelity = *fidelities.last().unwrap();
    Ok(TwoBlockReport {
        times: exact.times,
        fidelities,
        final_fidelity,
        threshold,
        converged: final_fidelity >= threshold,
    })
}
