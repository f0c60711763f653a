//! Operator-basis management, density-matrix vectorization, and construction
//! of the Lindblad superoperator matrix from a Hamiltonian plus dephasing
//! channel.
//!
//! A state rho is carried either as a density matrix or as the coherence
//! vector with components rho_n = Tr[rho sigma_n^dag]; the superoperator L(t)
//! generates d/dt |rho>> = L(t)|rho>> in the vectorized picture.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg::{eig_hermitian, ComplexMatrix, LinalgError};

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const EIGENVALUE_FLOOR: f64 = -1e-9;

#[derive(Debug, Error)]
pub enum SuperopError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Hamiltonian not Hermitian at t={t}: defect {defect:.3e}")]
    NonHermitianHamiltonian { t: f64, defect: f64 },
    #[error("not a valid density matrix: {0}")]
    NotAState(String),
    #[error("coherence vector component 0 is {got}, expected 1")]
    CoherenceNormalization { got: C64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub fn identity2() -> ComplexMatrix {
    ComplexMatrix::identity(2)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![C64::ZERO, C64::ONE], vec![C64::ONE, C64::ZERO]])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![C64::ZERO, C64::new(0.0, -1.0)], vec![
        C64::new(0.0, 1.0),
        C64::ZERO,
    ]])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![C64::ONE, C64::ZERO], vec![C64::ZERO, -C64::ONE]])
}

/// Matrix basis {sigma_n} with Tr[sigma_n] = D delta_n0 and
/// Tr[sigma_n sigma_m^dag] = D delta_nm.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<ComplexMatrix>,
}

impl OperatorBasis {
    /// The qubit basis {1, sigma_x, sigma_y, sigma_z}.
    pub fn pauli() -> Self {
        Self { dim: 2, elements: vec![identity2(), pauli_x(), pauli_y(), pauli_z()] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, n: usize) -> &ComplexMatrix {
        &self.elements[n]
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    /// Verify the two defining trace identities.
    pub fn validate(&self, tol: f64) -> Result<(), SuperopError> {
        let d = self.dim as f64;
        for (n, sn) in self.elements.iter().enumerate() {
            let tr = sn.trace();
            let want = if n == 0 { d } else { 0.0 };
            if (tr - C64::from(want)).norm() > tol {
                return Err(SuperopError::NotAState(format!(
                    "basis element {n} has trace {tr}, expected {want}"
                )));
            }
            for (m, sm) in self.elements.iter().enumerate() {
                let g = sn.mul(&sm.adjoint()).trace();
                let want = if n == m { d } else { 0.0 };
                if (g - C64::from(want)).norm() > tol {
                    return Err(SuperopError::NotAState(format!(
                        "basis Gram entry ({n},{m}) is {g}, expected {want}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Physical state: Hermitian, unit trace, positive semidefinite within
/// tolerance.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    m: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self, SuperopError> {
        let rho = Self { m };
        rho.validate()?;
        Ok(rho)
    }

    /// Skip invariant checks; for intermediate numerical states whose
    /// violations are monitored elsewhere.
    pub fn new_unchecked(m: ComplexMatrix) -> Self {
        Self { m }
    }

    pub fn validate(&self) -> Result<(), SuperopError> {
        if !self.m.is_square() {
            return Err(SuperopError::NotAState("not square".into()));
        }
        let defect = self.m.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(SuperopError::NotAState(format!("hermiticity_defect {defect:.3e}")));
        }
        let tr = self.m.trace();
        if (tr - C64::ONE).norm() > TRACE_TOL {
            return Err(SuperopError::NotAState(format!("trace {tr}")));
        }
        let (vals, _) = eig_hermitian(&self.m)?;
        if let Some(&min) = vals.first() {
            if min < EIGENVALUE_FLOOR {
                return Err(SuperopError::NotAState(format!("min eigenvalue {min:.3e}")));
            }
        }
        Ok(())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn purity(&self) -> f64 {
        self.m.mul(&self.m).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eig_hermitian(&self.m).map(|(vals, _)| vals[0]).unwrap_or(f64::NAN)
    }

    /// Qubit state from a Bloch vector (must lie in the unit ball).
    pub fn from_bloch(x: f64, y: f64, z: f64) -> Result<Self, SuperopError> {
        let mut m = identity2();
        let terms = [(x, pauli_x()), (y, pauli_y()), (z, pauli_z())];
        for (coeff, op) in terms {
            m = m.add(&op.scale(C64::from(coeff)));
        }
        Self::new(m.scale(C64::from(0.5)))
    }

    /// |0><0|
    pub fn ket0() -> Self {
        Self::from_bloch(0.0, 0.0, 1.0).unwrap()
    }

    /// |1><1|
    pub fn ket1() -> Self {
        Self::from_bloch(0.0, 0.0, -1.0).unwrap()
    }

    /// |+><+|
    pub fn plus() -> Self {
        Self::from_bloch(1.0, 0.0, 0.0).unwrap()
    }

    /// |-><-|
    pub fn minus() -> Self {
        Self::from_bloch(-1.0, 0.0, 0.0).unwrap()
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::new_unchecked(ComplexMatrix::identity(dim).scale(C64::from(1.0 / dim as f64)))
    }
}

/// Vectorized state |rho>> with components rho_n = Tr[rho sigma_n^dag].
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceVector {
    pub components: Vec<C64>,
    /// Optional time annotation carried through trajectories.
    pub time: Option<f64>,
}

impl CoherenceVector {
    pub fn new(components: Vec<C64>) -> Self {
        Self { components, time: None }
    }

    pub fn at_time(mut self, t: f64) -> Self {
        self.time = Some(t);
        self
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Dissipation channel as a list of jump operators with rates; the dissipator
/// is sum_k gamma_k (L rho L^dag - (1/2){L^dag L, rho}).
#[derive(Debug, Clone)]
pub struct NoiseChannel {
    jumps: Vec<(ComplexMatrix, f64)>,
}

impl NoiseChannel {
    pub fn new(jumps: Vec<(ComplexMatrix, f64)>) -> Self {
        assert!(jumps.iter().all(|&(_, rate)| rate >= 0.0), "negative rate");
        Self { jumps }
    }

    /// Pure dephasing gamma (sigma_z rho sigma_z - rho).
    pub fn dephasing(gamma: f64) -> Self {
        Self::new(vec![(pauli_z(), gamma)])
    }

    pub fn none() -> Self {
        Self { jumps: Vec::new() }
    }

    pub fn jumps(&self) -> &[(ComplexMatrix, f64)] {
        &self.jumps
    }

    /// Dissipator action on an operator.
    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let n = x.rows();
        let mut out = ComplexMatrix::zeros(n, n);
        for (l, rate) in &self.jumps {
            if *rate == 0.0 {
                continue;
            }
            let ldag = l.adjoint();
            let ldl = ldag.mul(l);
            let sandwich = l.mul(x).mul(&ldag);
            let anti = ldl.mul(x).add(&x.mul(&ldl)).scale(C64::from(0.5));
            out = out.add(&sandwich.sub(&anti).scale(C64::from(*rate)));
        }
        out
    }
}

/// Full Lindbladian action -i[H, x] + dissipator(x).
pub fn lindbladian_apply(
    h: &ComplexMatrix,
    channel: &NoiseChannel,
    x: &ComplexMatrix,
) -> ComplexMatrix {
    let comm = h.mul(x).sub(&x.mul(h));
    comm.scale(C64::new(0.0, -1.0)).add(&channel.apply(x))
}

pub fn vectorize(
    rho: &DensityMatrix,
    basis: &OperatorBasis,
) -> Result<CoherenceVector, SuperopError> {
    if rho.dim() != basis.dim() {
        return Err(SuperopError::DimensionMismatch { expected: basis.dim(), got: rho.dim() });
    }
    Ok(vectorize_operator(rho.matrix(), basis))
}

/// Vectorize an arbitrary operator (not necessarily a state).
pub fn vectorize_operator(x: &ComplexMatrix, basis: &OperatorBasis) -> CoherenceVector {
    let components = basis
        .elements()
        .iter()
        .map(|sigma| x.mul(&sigma.adjoint()).trace())
        .collect();
    CoherenceVector::new(components)
}

/// How to react when a devectorized matrix violates state invariants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnInvalidState {
    Fail,
    Warn,
}

pub fn devectorize(
    v: &CoherenceVector,
    basis: &OperatorBasis,
    policy: OnInvalidState,
) -> Result<DensityMatrix, SuperopError> {
    if v.len() != basis.len() {
        return Err(SuperopError::DimensionMismatch { expected: basis.len(), got: v.len() });
    }
    let rho0 = v.components[0];
    if (rho0 - C64::ONE).norm() > 1e-9 {
        return Err(SuperopError::CoherenceNormalization { got: rho0 });
    }
    let d = basis.dim();
    let mut m = ComplexMatrix::zeros(d, d);
    for (comp, sigma) in v.components.iter().zip(basis.elements()) {
        m = m.add(&sigma.scale(*comp));
    }
    m = m.scale(C64::from(1.0 / d as f64));
    match policy {
        OnInvalidState::Fail => DensityMatrix::new(m),
        OnInvalidState::Warn => Ok(DensityMatrix::new_unchecked(m)),
    }
}

/// Inner product <<a|b>> = D Tr[b a^dag] = sum_n b_n conj(a_n).
pub fn inner(a: &CoherenceVector, b: &CoherenceVector) -> Result<C64, SuperopError> {
    if a.len() != b.len() {
        return Err(SuperopError::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    Ok(a.components.iter().zip(&b.components).map(|(x, y)| x.conj() * y).sum())
}

type MatrixFn = Box<dyn Fn(f64) -> ComplexMatrix + Send + Sync>;

/// Time-parametrized superoperator matrix L(t), optionally with an analytic
/// time derivative.
pub struct SuperoperatorFn {
    dim: usize,
    eval: MatrixFn,
    deriv: Option<MatrixFn>,
}

impl SuperoperatorFn {
    pub fn new(dim: usize, eval: MatrixFn) -> Self {
        Self { dim, eval, deriv: None }
    }

    pub fn with_derivative(mut self, deriv: MatrixFn) -> Self {
        self.deriv = Some(deriv);
        self
    }

    /// Matrix dimension (D^2 for a D-level system).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, t: f64) -> ComplexMatrix {
        (self.eval)(t)
    }

    pub fn has_derivative(&self) -> bool {
        self.deriv.is_some()
    }

    /// Analytic dL/dt when available, else 4th-order central differences
    /// with step h.
    pub fn derivative(&self, t: f64, h: f64) -> ComplexMatrix {
        if let Some(d) = &self.deriv {
            return d(t);
        }
        let f = |s: f64| self.eval(s);
        let num = f(t - 2.0 * h)
            .add(&f(t + 2.0 * h).scale(C64::from(-1.0)))
            .add(&f(t + h).scale(C64::from(8.0)))
            .add(&f(t - h).scale(C64::from(-8.0)));
        num.scale(C64::from(1.0 / (12.0 * h)))
    }
}

/// Build the superoperator matrix from a Hamiltonian and noise channel via
/// L_nm = (1/D) Tr[sigma_n^dag (-i[H, sigma_m] + dissipator(sigma_m))].
///
/// The first row vanishes identically (trace preservation); it is asserted
/// small and then zeroed exactly. Passing `dh` (analytic dH/dt) equips the
/// result with an exact derivative: the superoperator map is linear in H and
/// the dissipative part is time-independent.
pub fn build_superop(
    h: impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static,
    dh: Option<Box<dyn Fn(f64) -> ComplexMatrix + Send + Sync>>,
    channel: NoiseChannel,
    basis: &OperatorBasis,
) -> Result<SuperoperatorFn, SuperopError> {
    let h0 = h(0.0);
    let defect = h0.hermiticity_defect();
    if defect > HERMITICITY_TOL * h0.max_abs().max(1.0) {
        return Err(SuperopError::NonHermitianHamiltonian { t: 0.0, defect });
    }
    let dim = basis.len();
    let basis_main = basis.clone();
    let basis_deriv = basis.clone();
    let channel_deriv = NoiseChannel::none();
    let channel_main = channel;

    let eval: MatrixFn = Box::new(move |t| {
        let ht = h(t);
        let defect = ht.hermiticity_defect();
        assert!(
            defect <= HERMITICITY_TOL * ht.max_abs().max(1.0),
            "Hamiltonian not Hermitian at t={t}: defect {defect:.3e}"
        );
        superop_matrix(&ht, &channel_main, &basis_main)
    });

    let sup = SuperoperatorFn::new(dim, eval);
    Ok(match dh {
        Some(dh) => sup.with_derivative(Box::new(move |t| {
            superop_matrix(&dh(t), &channel_deriv, &basis_deriv)
        })),
        None => sup,
    })
}

fn superop_matrix(h: &ComplexMatrix, channel: &NoiseChannel, basis: &OperatorBasis) -> ComplexMatrix {
    let n = basis.len();
    let d = basis.dim() as f64;
    let mut l = ComplexMatrix::zeros(n, n);
    for m in 0..n {
        let image = lindbladian_apply(h, channel, basis.element(m));
        for row in 0..n {
            l[(row, m)] = basis.element(row).adjoint().mul(&image).trace() / d;
        }
    }
    // Trace preservation makes the first row vanish structurally; verify the
    // numerics agree, then make it exact.
    let scale = l.norm_inf().max(1.0);
    for m in 0..n {
        debug_assert!(
            l[(0, m)].norm() <= 1e-12 * scale,
            "first-row entry {} unexpectedly large: {}",
            m,
            l[(0, m)]
        );
        l[(0, m)] = C64::ZERO;
    }
    l
}
