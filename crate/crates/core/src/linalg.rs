//! Minimal dense complex linear algebra: general (non-Hermitian)
//! eigendecomposition via Hessenberg reduction and shifted QR, Hermitian
//! Jacobi diagonalization, PSD matrix square root, LU solves.
//!
//! Everything here targets the small matrices of a vectorized qubit
//! (dimension at most D^2 = 16); no attempt is made at large-n performance.

use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("invalid shape {rows}x{cols} (entries: {len})")]
    BadShape { rows: usize, cols: usize, len: usize },
    #[error("non-finite entry at ({0},{1})")]
    NotFinite(usize, usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("QR iteration did not converge within {0} sweeps")]
    NonConvergence(usize),
    #[error("eigenpair residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("matrix is not Hermitian: max |H - H'| = {0:.3e}")]
    NotHermitian(f64),
    #[error("eigenvalue {0:.3e} below PSD clip tolerance")]
    NegativeSpectrum(f64),
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(LinalgError::BadShape { rows, cols, len: data.len() });
        }
        for (k, z) in data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(LinalgError::NotFinite(k / cols, k % cols));
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::ONE;
        }
        m
    }

    /// Build from nested row slices of (re, im) pairs; panics on ragged input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self { rows: r, cols: c, data: rows.concat() }
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        Self { rows, cols, data: entries.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        assert_eq!(v.len(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, a: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * a).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }

    /// Max row-sum norm.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest |H - H^dag| entry; zero for an exactly Hermitian matrix.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.rows, self.cols) == (other.rows, other.cols)
            && self.sub(other).max_abs() <= tol
    }

    /// Solve A x = b by LU with partial pivoting.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>, LinalgError> {
        let lu = Lu::factor(self)?;
        Ok(lu.solve(b))
    }

    pub fn inverse(&self) -> Result<Self, LinalgError> {
        let n = self.require_square()?;
        let lu = Lu::factor(self)?;
        let mut inv = Self::zeros(n, n);
        let mut e = vec![C64::ZERO; n];
        for j in 0..n {
            e[j] = C64::ONE;
            let col = lu.solve(&e);
            inv.set_column(j, &col);
            e[j] = C64::ZERO;
        }
        Ok(inv)
    }

    fn require_square(&self) -> Result<usize, LinalgError> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(LinalgError::NotSquare(self.rows, self.cols))
        }
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

struct Lu {
    n: usize,
    lu: ComplexMatrix,
    piv: Vec<usize>,
}

impl Lu {
    fn factor(a: &ComplexMatrix) -> Result<Self, LinalgError> {
        let n = a.require_square()?;
        let mut lu = a.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let scale = a.max_abs().max(1.0);
        for k in 0..n {
            let (mut p, mut best) = (k, lu[(k, k)].norm());
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    p = i;
                    best = v;
                }
            }
            if best <= f64::EPSILON * scale * 1e-2 {
                return Err(LinalgError::Singular);
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                piv.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let m = lu[(i, k)] / pivot;
                lu[(i, k)] = m;
                for j in k + 1..n {
                    let sub = m * lu[(k, j)];
                    lu[(i, j)] -= sub;
                }
            }
        }
        Ok(Self { n, lu, piv })
    }

    fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.piv.iter().map(|&p| b[p]).collect();
        // Forward substitution (L unit lower triangular).
        for i in 1..n {
            for j in 0..i {
                let sub = self.lu[(i, j)] * x[j];
                x[i] -= sub;
            }
        }
        // Back substitution with U.
        for i in (0..n).rev() {
            for j in i + 1..n {
                let sub = self.lu[(i, j)] * x[j];
                x[i] -= sub;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }
}

/// Result of a general eigendecomposition.
///
/// `values[k]` pairs with column `k` of `right_vectors` (unit Euclidean
/// norm). `condition_estimate` is the Frobenius condition number of the
/// eigenvector matrix; values around 1/eps signal a defective input.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub values: Vec<C64>,
    pub right_vectors: ComplexMatrix,
    pub condition_estimate: f64,
}

/// Relative residual tolerance enforced on every returned eigenpair.
pub const EIG_RESIDUAL_TOL: f64 = 1e-10;

const MAX_QR_SWEEPS_PER_EIGENVALUE: usize = 60;

/// General complex eigendecomposition: Hessenberg reduction followed by
/// shifted QR with deflation, eigenvectors by triangular back-substitution.
pub fn eig_general(m: &ComplexMatrix) -> Result<EigenResult, LinalgError> {
    let n = m.require_square()?;
    if n == 1 {
        return Ok(EigenResult {
            values: vec![m[(0, 0)]],
            right_vectors: ComplexMatrix::identity(1),
            condition_estimate: 1.0,
        });
    }

    let (mut h, mut z) = hessenberg(m);
    qr_iterate(&mut h, &mut z)?;

    let values: Vec<C64> = (0..n).map(|i| h[(i, i)]).collect();
    let scale = m.norm_inf().max(1.0);

    // Eigenvectors of the triangular factor, transformed back.
    let mut vecs = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let y = triangular_eigenvector(&h, k, scale);
        let mut v = z.matvec(&y);
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in v.iter_mut() {
            *c /= norm;
        }
        vecs.set_column(k, &v);
    }

    let tol = EIG_RESIDUAL_TOL * scale;
    for k in 0..n {
        let v = vecs.column(k);
        let mv = m.matvec(&v);
        let residual = mv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - values[k] * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual > tol {
            return Err(LinalgError::ResidualTooLarge { residual, tol });
        }
    }

    let condition_estimate = match vecs.inverse() {
        Ok(inv) => vecs.norm_fro() * inv.norm_fro(),
        Err(_) => f64::INFINITY,
    };

    Ok(EigenResult { values, right_vectors: vecs, condition_estimate })
}

/// Householder reduction to upper Hessenberg form; returns (H, Q) with
/// M = Q H Q^dag.
fn hessenberg(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = m.rows();
    let mut h = m.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        // Householder vector annihilating h[k+2.., k].
        let col: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= f64::EPSILON * h.norm_inf() {
            continue;
        }
        let x0 = col[0];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::ONE };
        let alpha = -phase * norm;
        let mut u = col.clone();
        u[0] -= alpha;
        let unorm_sq: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        if unorm_sq == 0.0 {
            continue;
        }
        let beta = 2.0 / unorm_sq;

        // H <- P H P with P = I - beta u u^dag acting on rows/cols k+1..n.
        for j in 0..n {
            let dot: C64 = u.iter().enumerate().map(|(i, ui)| ui.conj() * h[(k + 1 + i, j)]).sum();
            let f = dot * beta;
            for (i, ui) in u.iter().enumerate() {
                let sub = f * ui;
                h[(k + 1 + i, j)] -= sub;
            }
        }
        for i in 0..n {
            let dot: C64 = u.iter().enumerate().map(|(jj, uj)| h[(i, k + 1 + jj)] * uj).sum();
            let f = dot * beta;
            for (jj, uj) in u.iter().enumerate() {
                let sub = f * uj.conj();
                h[(i, k + 1 + jj)] -= sub;
            }
        }
        for i in 0..n {
            let dot: C64 = u.iter().enumerate().map(|(jj, uj)| q[(i, k + 1 + jj)] * uj).sum();
            let f = dot * beta;
            for (jj, uj) in u.iter().enumerate() {
                let sub = f * uj.conj();
                q[(i, k + 1 + jj)] -= sub;
            }
        }
    }
    // Clean the guaranteed-zero part.
    for i in 2..n {
        for j in 0..i - 1 {
            h[(i, j)] = C64::ZERO;
        }
    }
    (h, q)
}

struct Givens {
    c: f64,
    s: C64,
}

fn givens(a: C64, b: C64) -> (Givens, C64) {
    if b.norm() == 0.0 {
        return (Givens { c: 1.0, s: C64::ZERO }, a);
    }
    if a.norm() == 0.0 {
        // Swap-like rotation.
        let phase = b.conj() / b.norm();
        return (Givens { c: 0.0, s: phase }, b.norm().into());
    }
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let alpha = a / a.norm();
    let c = a.norm() / norm;
    let s = alpha * b.conj() / norm;
    (Givens { c, s }, alpha * norm)
}

/// Shifted QR iteration with deflation; H becomes upper triangular and Z
/// accumulates the similarity transform.
fn qr_iterate(h: &mut ComplexMatrix, z: &mut ComplexMatrix) -> Result<(), LinalgError> {
    let n = h.rows();
    let scale = h.norm_inf().max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * scale;
    let mut hi = n - 1;
    let mut stalls = 0usize;
    let mut total_sweeps = 0usize;
    let max_sweeps = MAX_QR_SWEEPS_PER_EIGENVALUE * n;

    'deflate: loop {
        // Zero negligible subdiagonals.
        for i in 1..=hi {
            let bound = f64::EPSILON * (h[(i - 1, i - 1)].norm() + h[(i, i)].norm()).max(small);
            if h[(i, i - 1)].norm() <= bound {
                h[(i, i - 1)] = C64::ZERO;
            }
        }
        // Deflate converged trailing eigenvalues.
        while hi > 0 && h[(hi, hi - 1)] == C64::ZERO {
            hi -= 1;
            stalls = 0;
        }
        if hi == 0 {
            return Ok(());
        }
        // Active window [lo, hi].
        let mut lo = hi;
        while lo > 0 && h[(lo, lo - 1)] != C64::ZERO {
            lo -= 1;
        }

        total_sweeps += 1;
        if total_sweeps > max_sweeps {
            return Err(LinalgError::NonConvergence(total_sweeps));
        }

        // Wilkinson shift from the trailing 2x2 block, with an exceptional
        // shift when progress stalls.
        let shift = if stalls > 0 && stalls % 12 == 0 {
            h[(hi, hi)] + C64::from(0.75 * h[(hi, hi - 1)].norm())
        } else {
            wilkinson_shift(h, hi)
        };
        stalls += 1;

        // Explicit shifted QR sweep on [lo, hi].
        let mut rotations = Vec::with_capacity(hi - lo);
        for i in lo..=hi {
            h[(i, i)] -= shift;
        }
        for k in lo..hi {
            let (g, r) = givens(h[(k, k)], h[(k + 1, k)]);
            h[(k, k)] = r;
            h[(k + 1, k)] = C64::ZERO;
            for j in k + 1..n {
                let u = h[(k, j)];
                let v = h[(k + 1, j)];
                h[(k, j)] = g.c * u + g.s * v;
                h[(k + 1, j)] = -g.s.conj() * u + g.c * v;
            }
            rotations.push(g);
        }
        for (k, g) in (lo..hi).zip(&rotations) {
            let top = (k + 2).min(hi + 1);
            for i in 0..top {
                let u = h[(i, k)];
                let v = h[(i, k + 1)];
                h[(i, k)] = u * g.c + v * g.s.conj();
                h[(i, k + 1)] = -u * g.s + v * g.c;
            }
            for i in 0..n {
                let u = z[(i, k)];
                let v = z[(i, k + 1)];
                z[(i, k)] = u * g.c + v * g.s.conj();
                z[(i, k + 1)] = -u * g.s + v * g.c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += shift;
        }
        continue 'deflate;
    }
}

fn wilkinson_shift(h: &ComplexMatrix, hi: usize) -> C64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).sqrt();
    let r1 = (tr + disc) / 2.0;
    let r2 = (tr - disc) / 2.0;
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// Eigenvector of an upper triangular matrix for the eigenvalue at index k,
/// by back-substitution with a perturbation guard on tiny pivots.
fn triangular_eigenvector(t: &ComplexMatrix, k: usize, scale: f64) -> Vec<C64> {
    let n = t.rows();
    let lambda = t[(k, k)];
    let smallden = f64::EPSILON * scale;
    let mut y = vec![C64::ZERO; n];
    y[k] = C64::ONE;
    for i in (0..k).rev() {
        let mut rhs = C64::ZERO;
        for j in i + 1..=k {
            rhs += t[(i, j)] * y[j];
        }
        let mut den = t[(i, i)] - lambda;
        if den.norm() < smallden {
            den = C64::from(smallden);
        }
        y[i] = -rhs / den;
        // Overflow guard for pathologically graded inputs.
        let mag = y[i].norm();
        if mag > 1.0 / f64::EPSILON {
            for entry in y.iter_mut() {
                *entry /= mag;
            }
        }
    }
    y
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns eigenvalues (ascending) and orthonormal eigenvectors
/// as matching columns.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), LinalgError> {
    let n = m.require_square()?;
    let defect = m.hermiticity_defect();
    let scale = m.max_abs().max(1.0);
    if defect > 1e-10 * scale {
        return Err(LinalgError::NotHermitian(defect));
    }
    let mut a = m.clone();
    // Symmetrize to kill roundoff-level asymmetry.
    for i in 0..n {
        for j in 0..n {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)].conj());
            a[(i, j)] = avg;
        }
        a[(i, i)] = C64::from(a[(i, i)].re);
    }
    let mut v = ComplexMatrix::identity(n);
    let tol = f64::EPSILON * a.norm_fro().max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let zpq = a[(p, q)];
                if zpq.norm() <= tol * 1e-2 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = zpq / zpq.norm();
                let theta = (aqq - app) / (2.0 * zpq.norm());
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = phase * (t * c);

                // A <- U^H A U with U = [[c, s], [-conj(s), c]] on (p, q).
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c - aiq * s.conj();
                    a[(i, q)] = aip * s + aiq * c;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = c * apj - s * aqj;
                    a[(q, j)] = s.conj() * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c - viq * s.conj();
                    v[(i, q)] = vip * s + viq * c;
                }
            }
        }
    }
    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (a[(i, i)].re, i)).collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let values: Vec<f64> = pairs.iter().map(|&(val, _)| val).collect();
    let mut vecs = ComplexMatrix::zeros(n, n);
    for (dst, &(_, src)) in pairs.iter().enumerate() {
        let col = v.column(src);
        vecs.set_column(dst, &col);
    }
    Ok((values, vecs))
}

/// Default clip tolerance for slightly negative eigenvalues in `sqrtm_psd`.
pub const PSD_CLIP_TOL: f64 = 1e-12;

/// Hermitian PSD principal square root. Eigenvalues in [-PSD_CLIP_TOL, 0)
/// are clipped to zero; anything more negative is rejected.
pub fn sqrtm_psd(h: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let n = h.require_square()?;
    let (values, vecs) = eig_hermitian(h)?;
    let scale = h.max_abs().max(1.0);
    let clip = PSD_CLIP_TOL * scale;
    let mut roots = Vec::with_capacity(n);
    for &val in &values {
        if val < -clip {
            return Err(LinalgError::NegativeSpectrum(val));
        }
        roots.push(val.max(0.0).sqrt());
    }
    // S = V diag(sqrt(lambda)) V^dag
    let mut s = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::ZERO;
            for (k, &r) in roots.iter().enumerate() {
                acc += vecs[(i, k)] * r * vecs[(j, k)].conj();
            }
            s[(i, j)] = acc;
        }
    }
    // Exact Hermitian symmetrization.
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (s[(i, j)] + s[(j, i)].conj());
            s[(i, j)] = avg;
            s[(j, i)] = avg.conj();
        }
        s[(i, i)] = C64::from(s[(i, i)].re);
    }
    Ok(s)
}
