//! Figures of merit and a virtual-tomography pipeline: Uhlmann fidelity,
//! trace distance, Bloch extraction, seeded projective sampling in the three
//! Pauli bases, and linear-inversion state reconstruction with physical
//! projection.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::linalg::{eig_hermitian, sqrtm_psd, ComplexMatrix, LinalgError};
use crate::superop::{identity2, pauli_x, pauli_y, pauli_z, DensityMatrix};

#[derive(Debug, Error)]
pub enum MeasurementError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid protocol: {0}")]
    BadProtocol(String),
}

/// Uhlmann fidelity Tr[(rho1^(1/2) rho2 rho1^(1/2))^(1/2)].
pub fn fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64, MeasurementError> {
    let s1 = sqrtm_psd(rho1.matrix())?;
    let middle = s1.mul(rho2.matrix()).mul(&s1);
    let root = sqrtm_psd(&middle)?;
    Ok(root.trace().re.clamp(0.0, 1.0))
}

/// Qubit closed form sqrt(Tr[rho1 rho2] + 2 sqrt(det rho1 det rho2)); used to
/// cross-check the general matrix-root route.
pub fn fidelity_qubit_closed_form(rho1: &DensityMatrix, rho2: &DensityMatrix) -> f64 {
    let a = rho1.matrix();
    let b = rho2.matrix();
    let tr = a.mul(b).trace().re;
    let det = |m: &ComplexMatrix| (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
    let inner = tr + 2.0 * (det(a).max(0.0) * det(b).max(0.0)).sqrt();
    inner.max(0.0).sqrt().clamp(0.0, 1.0)
}

/// Trace distance (1/2) Tr |rho1 - rho2|.
pub fn trace_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64, MeasurementError> {
    let diff = rho1.matrix().sub(rho2.matrix());
    let herm = diff.add(&diff.adjoint()).scale(C64::from(0.5));
    let (vals, _) = eig_hermitian(&herm)?;
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}

/// Bloch components (Tr[rho sigma_x], Tr[rho sigma_y], Tr[rho sigma_z]).
pub fn bloch(rho: &DensityMatrix) -> [f64; 3] {
    let m = rho.matrix();
    [
        m.mul(&pauli_x()).trace().re,
        m.mul(&pauli_y()).trace().re,
        m.mul(&pauli_z()).trace().re,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    fn index(self) -> usize {
        match self {
            PauliAxis::X => 0,
            PauliAxis::Y => 1,
            PauliAxis::Z => 2,
        }
    }
}

/// Shot-noise protocol: projective measurements along the three Pauli axes.
#[derive(Debug, Clone)]
pub struct TomographyProtocol {
    pub shots: usize,
    pub repeats: usize,
    pub seed: u64,
    /// Symmetric readout bit-flip probability applied to every shot.
    pub readout_error: f64,
}

impl Default for TomographyProtocol {
    fn default() -> Self {
        Self { shots: 2000, repeats: 10, seed: 0, readout_error: 0.006 }
    }
}

impl TomographyProtocol {
    pub fn validate(&self) -> Result<(), MeasurementError> {
        if self.shots == 0 || self.repeats == 0 {
            return Err(MeasurementError::BadProtocol("shots and repeats must be >= 1".into()));
        }
        if !(0.0..=0.5).contains(&self.readout_error) {
            return Err(MeasurementError::BadProtocol(format!(
                "readout error {} outside [0, 0.5]",
                self.readout_error
            )));
        }
        Ok(())
    }

    /// One deterministic stream per (master seed, repeat, axis); repeats can
    /// therefore run in any order (or in parallel) with identical output.
    fn rng(&self, repeat: usize, axis: PauliAxis) -> ChaCha12Rng {
        let stream = self
            .seed
            .wrapping_mul(0x9e3779b97f4a7c15)
            .wrapping_add((repeat as u64) << 8)
            .wrapping_add(axis.index() as u64 + 1);
        ChaCha12Rng::seed_from_u64(stream)
    }
}

/// Number of +1 outcomes among `shots` projective measurements of the given
/// Pauli axis: binomial with success probability (1 + <sigma_axis>)/2,
/// bit-flipped with the protocol's readout error.
pub fn sample_counts(
    rho: &DensityMatrix,
    axis: PauliAxis,
    protocol: &TomographyProtocol,
    repeat: usize,
) -> Result<u64, MeasurementError> {
    protocol.validate()?;
    let expectation = bloch(rho)[axis.index()].clamp(-1.0, 1.0);
    let p_up = 0.5 * (1.0 + expectation);
    let p = p_up * (1.0 - protocol.readout_error) + (1.0 - p_up) * protocol.readout_error;
    let mut rng = protocol.rng(repeat, axis);
    let mut ups = 0u64;
    for _ in 0..protocol.shots {
        if rng.random::<f64>() < p {
            ups += 1;
        }
    }
    Ok(ups)
}

/// Raw per-repeat counts for the three axes.
#[derive(Debug, Clone)]
pub struct CountsRecord {
    pub repeat: usize,
    pub up_x: u64,
    pub up_y: u64,
    pub up_z: u64,
}

pub fn sample_all_axes(
    rho: &DensityMatrix,
    protocol: &TomographyProtocol,
) -> Result<Vec<CountsRecord>, MeasurementError> {
    (0..protocol.repeats)
        .map(|repeat| {
            Ok(CountsRecord {
                repeat,
                up_x: sample_counts(rho, PauliAxis::X, protocol, repeat)?,
                up_y: sample_counts(rho, PauliAxis::Y, protocol, repeat)?,
                up_z: sample_counts(rho, PauliAxis::Z, protocol, repeat)?,
            })
        })
        .collect()
}

/// Linear-inversion reconstruction with physical projection, plus spread
/// statistics across repeats.
#[derive(Debug, Clone)]
pub struct TomographyResult {
    pub states: Vec<DensityMatrix>,
    pub mean_state: DensityMatrix,
    /// Standard deviation of the empirical Bloch components across repeats.
    pub bloch_std: [f64; 3],
}

impl TomographyResult {
    /// Mean and standard deviation of the fidelity of each repeat's state
    /// against a reference.
    pub fn fidelity_stats(
        &self,
        reference: &DensityMatrix,
    ) -> Result<(f64, f64), MeasurementError> {
        let fids: Vec<f64> =
            self.states.iter().map(|s| fidelity(reference, s)).collect::<Result<_, _>>()?;
        Ok(mean_std(&fids))
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Reconstruct rho = (1 + sum_i r_i sigma_i)/2 from per-repeat counts, then
/// project onto the physical set (clip negative eigenvalues, renormalize).
pub fn reconstruct(
    counts: &[CountsRecord],
    shots: usize,
) -> Result<TomographyResult, MeasurementError> {
    if counts.is_empty() || shots == 0 {
        return Err(MeasurementError::BadProtocol("no counts to reconstruct from".into()));
    }
    let mut states = Vec::with_capacity(counts.len());
    let mut rs: Vec<[f64; 3]> = Vec::with_capacity(counts.len());
    for rec in counts {
        let r = [
            2.0 * rec.up_x as f64 / shots as f64 - 1.0,
            2.0 * rec.up_y as f64 / shots as f64 - 1.0,
            2.0 * rec.up_z as f64 / shots as f64 - 1.0,
        ];
        rs.push(r);
        states.push(project_physical(r)?);
    }
    let n = counts.len() as f64;
    let mean_r = [
        rs.iter().map(|r| r[0]).sum::<f64>() / n,
        rs.iter().map(|r| r[1]).sum::<f64>() / n,
        rs.iter().map(|r| r[2]).sum::<f64>() / n,
    ];
    let mean_state = project_physical(mean_r)?;
    let col = |i: usize| rs.iter().map(|r| r[i]).collect::<Vec<_>>();
    let bloch_std = [mean_std(&col(0)).1, mean_std(&col(1)).1, mean_std(&col(2)).1];
    Ok(TomographyResult { states, mean_state, bloch_std })
}

/// Infinite-shot limit of the reconstruction: exact probabilities instead of
/// samples, still passed through the physical projection.
pub fn reconstruct_exact(rho: &DensityMatrix) -> Result<DensityMatrix, MeasurementError> {
    let r = bloch(rho);
    project_physical(r)
}

fn project_physical(r: [f64; 3]) -> Result<DensityMatrix, MeasurementError> {
    let mut m = identity2();
    for (coeff, op) in [(r[0], pauli_x()), (r[1], pauli_y()), (r[2], pauli_z())] {
        m = m.add(&op.scale(C64::from(coeff)));
    }
    m = m.scale(C64::from(0.5));
    let (vals, vecs) = eig_hermitian(&m)?;
    let clipped: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    debug_assert!(total > 0.0);
    let mut out = ComplexMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = C64::ZERO;
            for (k, &lam) in clipped.iter().enumerate() {
                acc += vecs[(i, k)] * (lam / total) * vecs[(j, k)].conj();
            }
            out[(i, j)] = acc;
        }
    }
    // Hermitian clean-up so downstream validation sees an exact state.
    for i in 0..2 {
        for j in i + 1..2 {
            let avg = 0.5 * (out[(i, j)] + out[(j, i)].conj());
            out[(i, j)] = avg;
            out[(j, i)] = avg.conj();
        }
        out[(i, i)] = C64::from(out[(i, i)].re);
    }
    Ok(DensityMatrix::new_unchecked(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fidelity_basic_values() {
        let rho = DensityMatrix::from_bloch(0.3, -0.2, 0.4).unwrap();
        assert_abs_diff_eq!(fidelity(&rho, &rho).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(
            fidelity(&DensityMatrix::ket0(), &DensityMatrix::ket1()).unwrap(),
            0.0,
            epsilon = 1e-10
        );
        let mixed = DensityMatrix::maximally_mixed(2);
        assert_abs_diff_eq!(
            fidelity(&mixed, &DensityMatrix::plus()).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn fidelity_is_symmetric_and_matches_closed_form() {
        let pairs = [
            (DensityMatrix::from_bloch(0.1, 0.5, -0.3).unwrap(), DensityMatrix::plus()),
            (
                DensityMatrix::from_bloch(-0.7, 0.1, 0.2).unwrap(),
                DensityMatrix::from_bloch(0.0, 0.0, 0.9).unwrap(),
            ),
        ];
        for (a, b) in &pairs {
            let f_ab = fidelity(a, b).unwrap();
            let f_ba = fidelity(b, a).unwrap();
            assert_abs_diff_eq!(f_ab, f_ba, epsilon = 1e-10);
            assert_abs_diff_eq!(f_ab, fidelity_qubit_closed_form(a, b), epsilon = 1e-10);
        }
    }

    #[test]
    fn trace_distance_extremes() {
        let d = trace_distance(&DensityMatrix::ket0(), &DensityMatrix::ket1()).unwrap();
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-12);
        let rho = DensityMatrix::from_bloch(0.2, 0.2, 0.2).unwrap();
        assert_abs_diff_eq!(trace_distance(&rho, &rho).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn bloch_extraction() {
        assert_eq!(bloch(&DensityMatrix::plus()), [1.0, 0.0, 0.0]);
        assert_eq!(bloch(&DensityMatrix::maximally_mixed(2)), [0.0, 0.0, 0.0]);
        let r = bloch(&DensityMatrix::from_bloch(0.1, -0.5, 0.3).unwrap());
        assert_abs_diff_eq!(r[0], 0.1, epsilon = 1e-14);
        assert_abs_diff_eq!(r[1], -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(r[2], 0.3, epsilon = 1e-14);
    }

    #[test]
    fn sampling_deterministic_outcome_for_eigenstate() {
        let protocol =
            TomographyProtocol { shots: 500, repeats: 1, seed: 7, readout_error: 0.0 };
        let ups = sample_counts(&DensityMatrix::ket0(), PauliAxis::Z, &protocol, 0).unwrap();
        assert_eq!(ups, 500);
    }

    #[test]
    fn sampling_reproducible_for_fixed_seed() {
        let protocol = TomographyProtocol { seed: 42, ..Default::default() };
        let rho = DensityMatrix::from_bloch(0.3, 0.1, -0.4).unwrap();
        let a = sample_all_axes(&rho, &protocol).unwrap();
        let b = sample_all_axes(&rho, &protocol).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.up_x, x.up_y, x.up_z), (y.up_x, y.up_y, y.up_z));
        }
    }

    #[test]
    fn binomial_spread_matches_sqrt_npq() {
        // Maximally mixed along x: p = 1/2, sigma = sqrt(n/4) ~ 22.36 for
        // n = 2000. Sample many repeats and compare.
        let protocol =
            TomographyProtocol { shots: 2000, repeats: 400, seed: 3, readout_error: 0.0 };
        let mixed = DensityMatrix::maximally_mixed(2);
        let counts: Vec<f64> = (0..protocol.repeats)
            .map(|r| sample_counts(&mixed, PauliAxis::X, &protocol, r).unwrap() as f64)
            .collect();
        let (mean, std) = super::mean_std(&counts);
        assert!((mean - 1000.0).abs() < 4.0 * 22.36 / (400f64).sqrt() * 4.0);
        assert!((std - 22.36).abs() < 5.0, "std {std}");
    }

    #[test]
    fn reconstruct_exact_limit_is_identity() {
        let rho = DensityMatrix::from_bloch(0.4, -0.3, 0.5).unwrap();
        let rec = reconstruct_exact(&rho).unwrap();
        assert!(rec.matrix().approx_eq(rho.matrix(), 1e-12));
    }

    #[test]
    fn reconstruct_plus_state_with_paper_protocol() {
        let protocol =
            TomographyProtocol { shots: 2000, repeats: 10, seed: 11, readout_error: 0.0 };
        let truth = DensityMatrix::plus();
        let counts = sample_all_axes(&truth, &protocol).unwrap();
        let result = reconstruct(&counts, protocol.shots).unwrap();
        let (fid_mean, fid_std) = result.fidelity_stats(&truth).unwrap();
        assert!(fid_mean >= 0.995, "mean fidelity {fid_mean}");
        assert!(fid_std < 0.01);
        let f_mean_state = fidelity(&truth, &result.mean_state).unwrap();
        assert!(f_mean_state >= 0.995);
    }

    #[test]
    fn reconstruction_error_scales_as_inverse_sqrt_shots() {
        let truth = DensityMatrix::from_bloch(0.35, 0.2, -0.5).unwrap();
        let shot_counts = [100usize, 400, 1600, 6400, 25600];
        let repeats = 160;
        let mut log_n = Vec::new();
        let mut log_err = Vec::new();
        for (i, &shots) in shot_counts.iter().enumerate() {
            let protocol = TomographyProtocol {
                shots,
                repeats,
                seed: 1000 + i as u64,
                readout_error: 0.0,
            };
            let counts = sample_all_axes(&truth, &protocol).unwrap();
            let result = reconstruct(&counts, shots).unwrap();
            let err: f64 = result
                .states
                .iter()
                .map(|s| trace_distance(s, &truth).unwrap())
                .sum::<f64>()
                / repeats as f64;
            log_n.push((shots as f64).ln());
            log_err.push(err.ln());
        }
        // Least-squares slope on log-log.
        let n = log_n.len() as f64;
        let mx = log_n.iter().sum::<f64>() / n;
        let my = log_err.iter().sum::<f64>() / n;
        let slope = log_n
            .iter()
            .zip(&log_err)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum::<f64>()
            / log_n.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!((slope + 0.5).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn physical_projection_repairs_unphysical_bloch() {
        // Counts implying |r| > 1 must still produce a valid state.
        let records = vec![CountsRecord { repeat: 0, up_x: 100, up_y: 100, up_z: 100 }];
        let result = reconstruct(&records, 100).unwrap();
        result.states[0].validate().unwrap();
        let n = bloch(&result.states[0]);
        assert!((n[0].powi(2) + n[1].powi(2) + n[2].powi(2)).sqrt() <= 1.0 + 1e-9);
    }

    #[test]
    fn readout_error_shrinks_reconstructed_bloch() {
        let protocol =
            TomographyProtocol { shots: 20000, repeats: 4, seed: 5, readout_error: 0.05 };
        let truth = DensityMatrix::plus();
        let counts = sample_all_axes(&truth, &protocol).unwrap();
        let result = reconstruct(&counts, protocol.shots).unwrap();
        let r = bloch(&result.mean_state);
        // Expected shrinkage factor 1 - 2p = 0.9.
        assert!((r[0] - 0.9).abs() < 0.03, "x component {}", r[0]);
    }
}
