//! Instantaneous biorthogonal spectral decomposition of the superoperator,
//! label-continuous tracking along a time grid, gauge fixing, and eigenvector
//! time derivatives.
//!
//! The superoperator is not Hermitian, so right eigenvectors |D_a>> pair with
//! left row vectors <<E_a| taken from the inverse of the right-eigenvector
//! matrix; the pairing <<E_a|D_b>> = delta_ab is bilinear (no conjugation).
//! The zero-eigenvalue block sits at label 0 with D_0 = (1, 0, ..., 0); for a
//! unital channel that vector is an exact eigenvector even in floating point,
//! and decompose() snaps it (and the structurally zero first components of
//! the other eigenvectors) to exact values so that downstream quantities like
//! kappa_{a0} vanish identically instead of being amplified by growing
//! exponential weights.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg::{eig_general, ComplexMatrix, LinalgError};
use crate::superop::SuperoperatorFn;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("superoperator is defective (condition estimate {condition:.3e})")]
    Defective { condition: f64 },
    #[error("no zero eigenvalue found (malformed superoperator, min |lambda| = {min_abs:.3e})")]
    NoZeroEigenvalue { min_abs: f64 },
    #[error("eigenvalue crossing near t={t:.6e}: labels {a} and {b} gap {gap:.3e} < tol {tol:.3e}")]
    CrossingDetected { t: f64, a: usize, b: usize, gap: f64, tol: f64 },
    #[error("ambiguous label matching at t={t:.6e} (cost margin {margin:.3e})")]
    AmbiguousMatching { t: f64, margin: f64 },
    #[error("derivative step too large: estimated relative error {estimate:.3e}")]
    StepTooLarge { estimate: f64 },
    #[error("time {t:.6e} does not advance the path (last = {last:.6e})")]
    NonMonotonicTime { t: f64, last: f64 },
    #[error("time {t:.6e} outside the path interior")]
    OutsidePath { t: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Condition-estimate threshold above which the one-dimensional-block
/// assumption is considered violated.
pub const DEFECTIVE_CONDITION_LIMIT: f64 = 1e8;

/// Instantaneous decomposition at one time.
#[derive(Debug, Clone)]
pub struct SpectralFrame {
    pub t: f64,
    /// Label-indexed eigenvalues; label 0 is the zero block.
    pub eigenvalues: Vec<C64>,
    /// Columns are the right eigenvectors |D_a>>, unit norm, gauge-fixed.
    pub right: ComplexMatrix,
    /// Rows are the left vectors <<E_a|; exactly the inverse of `right`.
    pub left: ComplexMatrix,
    pub condition_estimate: f64,
    /// True when exactly one eigenvalue lies within the zero tolerance.
    pub zero_unique: bool,
    /// Label pairs closer than the degeneracy tolerance.
    pub degenerate_pairs: Vec<(usize, usize)>,
    /// Smallest pairwise eigenvalue distance.
    pub min_gap: f64,
}

impl SpectralFrame {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn right_vector(&self, label: usize) -> Vec<C64> {
        self.right.column(label)
    }

    pub fn left_vector(&self, label: usize) -> Vec<C64> {
        self.left.row(label).to_vec()
    }

    /// Bilinear pairing <<E_label| v.
    pub fn project_left(&self, label: usize, v: &[C64]) -> C64 {
        self.left.row(label).iter().zip(v).map(|(e, x)| e * x).sum()
    }

    fn eigenvalue_scale(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE)
    }
}

/// Tracking options.
#[derive(Debug, Clone)]
pub struct PathOptions {
    /// Relative degeneracy/crossing tolerance: gap_tol = rel * max |lambda|.
    pub gap_tol_rel: f64,
    pub condition_limit: f64,
    /// Relative margin below which two label assignments count as a tie.
    pub ambiguity_tol: f64,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self { gap_tol_rel: 1e-6, condition_limit: DEFECTIVE_CONDITION_LIMIT, ambiguity_tol: 1e-6 }
    }
}

/// Decompose a superoperator matrix into a gauge-fixed biorthogonal frame.
///
/// Canonical label order: the zero block first, then eigenvalues with
/// negligible imaginary part by descending real part, then complex ones by
/// (descending real, ascending imaginary), so conjugate pairs order as
/// (-g - i|w|, -g + i|w|).
pub fn decompose(l: &ComplexMatrix, t: f64) -> Result<SpectralFrame, SpectralError> {
    decompose_with(l, t, &PathOptions::default())
}

pub fn decompose_with(
    l: &ComplexMatrix,
    t: f64,
    opts: &PathOptions,
) -> Result<SpectralFrame, SpectralError> {
    let n = l.rows();
    let scale = l.norm_inf().max(f64::MIN_POSITIVE);

    let eig = eig_general(l)?;
    if eig.condition_estimate > opts.condition_limit {
        return Err(SpectralError::Defective { condition: eig.condition_estimate });
    }

    // Identify the zero group.
    let zero_tol = 1e-9 * scale;
    let mut zero_idx: Vec<usize> = (0..n).filter(|&k| eig.values[k].norm() <= zero_tol).collect();
    if zero_idx.is_empty() {
        let min_abs = eig.values.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        return Err(SpectralError::NoZeroEigenvalue { min_abs });
    }
    // Representative with the largest first component becomes label 0.
    zero_idx.sort_by(|&a, &b| {
        let wa = eig.right_vectors[(0, a)].norm();
        let wb = eig.right_vectors[(0, b)].norm();
        wb.partial_cmp(&wa).unwrap()
    });

    let mut order: Vec<usize> = vec![zero_idx[0]];
    let mut rest: Vec<usize> = (0..n).filter(|k| *k != zero_idx[0]).collect();
    let im_tol = 1e-9 * scale;
    rest.sort_by(|&a, &b| {
        let (za, zb) = (eig.values[a], eig.values[b]);
        let real_a = za.im.abs() <= im_tol;
        let real_b = zb.im.abs() <= im_tol;
        real_b
            .cmp(&real_a)
            .then(zb.re.partial_cmp(&za.re).unwrap())
            .then(za.im.partial_cmp(&zb.im).unwrap())
    });
    order.extend(rest);

    let mut eigenvalues: Vec<C64> = order.iter().map(|&k| eig.values[k]).collect();
    let mut right = ComplexMatrix::zeros(n, n);
    for (label, &k) in order.iter().enumerate() {
        let col = eig.right_vectors.column(k);
        right.set_column(label, &col);
    }

    // Structural exactness: e_0 is an exact eigenvector whenever the first
    // column of L vanishes (unital channel), and every other eigenvector has
    // an exactly zero first component. Snap both before gauge fixing.
    let first_col_norm: f64 = (0..n).map(|i| l[(i, 0)].norm()).sum();
    if first_col_norm <= 1e-14 * scale {
        let mut e0 = vec![C64::ZERO; n];
        e0[0] = C64::ONE;
        right.set_column(0, &e0);
        eigenvalues[0] = C64::ZERO;
    }
    // Zeroing the first component also projects e_0 out of any degenerate
    // zero-group partner, which keeps the kernel basis deterministic when the
    // zero eigenvalue is doubled (gamma = 0).
    for label in 1..n {
        right[(0, label)] = C64::ZERO;
    }

    gauge_fix_largest_component(&mut right);
    let frame = finish_frame(t, eigenvalues, right, eig.condition_estimate, opts)?;
    Ok(frame)
}

/// Rotate each column so its largest-magnitude entry is real positive, then
/// normalize to unit Euclidean norm.
fn gauge_fix_largest_component(v: &mut ComplexMatrix) {
    let n = v.rows();
    for j in 0..n {
        let mut col = v.column(j);
        let pivot = (0..n)
            .max_by(|&a, &b| col[a].norm().partial_cmp(&col[b].norm()).unwrap())
            .unwrap();
        let ph = col[pivot];
        if ph.norm() > 0.0 {
            let phase = ph.conj() / ph.norm();
            for c in col.iter_mut() {
                *c *= phase;
            }
        }
        let norm = col.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in col.iter_mut() {
            *c /= norm;
        }
        // Clean the roundoff imaginary residue on the pivot.
        col[pivot] = C64::from(col[pivot].norm());
        v.set_column(j, &col);
    }
}

fn finish_frame(
    t: f64,
    eigenvalues: Vec<C64>,
    right: ComplexMatrix,
    condition_estimate: f64,
    opts: &PathOptions,
) -> Result<SpectralFrame, SpectralError> {
    let n = eigenvalues.len();
    let left = right.inverse()?;
    let scale =
        eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let gap_tol = opts.gap_tol_rel * scale;
    let mut degenerate_pairs = Vec::new();
    let mut min_gap = f64::INFINITY;
    for a in 0..n {
        for b in a + 1..n {
            let gap = (eigenvalues[a] - eigenvalues[b]).norm();
            min_gap = min_gap.min(gap);
            if gap < gap_tol {
                degenerate_pairs.push((a, b));
            }
        }
    }
    // The zero block's eigenvalue is snapped to exactly 0 when the first
    // column vanishes, so the uniqueness flag can use the absolute tolerance
    // demanded of "equals 0" rather than the relative grouping one.
    let zero_unique = eigenvalues.iter().filter(|z| z.norm() <= 1e-10).count() == 1;
    Ok(SpectralFrame {
        t,
        eigenvalues,
        right,
        left,
        condition_estimate,
        zero_unique,
        degenerate_pairs,
        min_gap,
    })
}

/// Relabel and re-gauge `frame` for continuity against `reference`:
/// labels by minimal combined eigenvalue-distance/eigenvector-overlap cost,
/// gauge by rotating each right vector so its overlap with the reference
/// vector is real positive.
pub fn align_to(
    frame: &SpectralFrame,
    reference: &SpectralFrame,
    opts: &PathOptions,
) -> Result<SpectralFrame, SpectralError> {
    let n = frame.dim();
    let scale = reference.eigenvalue_scale().max(frame.eigenvalue_scale());

    // Cost of assigning new label j to reference label i.
    let mut cost = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        let ref_col = reference.right.column(i);
        for j in 0..n {
            let lam_dist = (frame.eigenvalues[j] - reference.eigenvalues[i]).norm() / scale;
            let overlap = conj_dot(&ref_col, &frame.right.column(j)).norm();
            cost[i][j] = lam_dist + (1.0 - overlap);
        }
    }
    let (perm, best, second) = best_assignment(&cost);
    if let Some(second) = second {
        let margin = second - best;
        if margin <= opts.ambiguity_tol * (1.0 + best) {
            return Err(SpectralError::AmbiguousMatching { t: frame.t, margin });
        }
    }

    let mut eigenvalues = Vec::with_capacity(n);
    let mut right = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let j = perm[i];
        eigenvalues.push(frame.eigenvalues[j]);
        let mut col = frame.right.column(j);
        let overlap = conj_dot(&reference.right.column(i), &col);
        if overlap.norm() > 0.0 {
            let phase = overlap.conj() / overlap.norm();
            for c in col.iter_mut() {
                *c *= phase;
            }
        }
        right.set_column(i, &col);
    }
    finish_frame(frame.t, eigenvalues, right, frame.condition_estimate, opts)
}

fn conj_dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Brute-force minimal assignment over permutations (n <= 4 in practice).
/// Returns the best permutation, its cost, and the runner-up cost.
fn best_assignment(cost: &[Vec<f64>]) -> (Vec<usize>, f64, Option<f64>) {
    let n = cost.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut second: Option<f64> = None;
    permute(&mut idx, 0, &mut |perm| {
        let c: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        match &mut best {
            Some((bp, bc)) => {
                if c < *bc {
                    second = Some(*bc);
                    *bc = c;
                    bp.clone_from_slice(perm);
                } else {
                    second = Some(second.map_or(c, |s| s.min(c)));
                }
            }
            None => best = Some((perm.to_vec(), c)),
        }
    });
    let (perm, cost_best) = best.unwrap();
    (perm, cost_best, second)
}

fn permute(idx: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == idx.len() {
        visit(idx);
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute(idx, k + 1, visit);
        idx.swap(k, i);
    }
}

/// Label-consistent family of frames on a strictly increasing grid.
#[derive(Debug, Clone)]
pub struct SpectralPath {
    frames: Vec<SpectralFrame>,
    opts: PathOptions,
    /// Pairs degenerate already at the first frame; exempt from crossing
    /// detection (static degeneracies, e.g. the doubled zero at gamma = 0).
    initially_degenerate: Vec<(usize, usize)>,
    min_gap: f64,
}

impl SpectralPath {
    /// Decompose and track the superoperator across the grid.
    pub fn build(
        sup: &SuperoperatorFn,
        grid: &[f64],
        opts: PathOptions,
    ) -> Result<Self, SpectralError> {
        assert!(grid.len() >= 2, "need at least two grid points");
        let first = decompose_with(&sup.eval(grid[0]), grid[0], &opts)?;
        let mut path = Self::from_first_frame(first, opts);
        for &t in &grid[1..] {
            let frame = decompose_with(&sup.eval(t), t, &path.opts)?;
            path.track(frame)?;
        }
        Ok(path)
    }

    /// Start a path from an already decomposed frame; further frames are
    /// appended through [`SpectralPath::track`].
    pub fn from_first_frame(first: SpectralFrame, opts: PathOptions) -> Self {
        let initially_degenerate = first.degenerate_pairs.clone();
        let min_gap = track_min_gap(&first, &initially_degenerate);
        Self { frames: vec![first], opts, initially_degenerate, min_gap }
    }

    /// Append a frame, assigning labels and gauge for continuity.
    pub fn track(&mut self, frame: SpectralFrame) -> Result<(), SpectralError> {
        let last = self.frames.last().expect("path is never empty");
        if frame.t <= last.t {
            return Err(SpectralError::NonMonotonicTime { t: frame.t, last: last.t });
        }
        let aligned = align_to(&frame, last, &self.opts)?;
        // Crossing detection on pairs that started out separated.
        let scale = aligned.eigenvalue_scale();
        let tol = self.opts.gap_tol_rel * scale;
        for a in 0..aligned.dim() {
            for b in a + 1..aligned.dim() {
                if self.initially_degenerate.contains(&(a, b)) {
                    continue;
                }
                let gap = (aligned.eigenvalues[a] - aligned.eigenvalues[b]).norm();
                if gap < tol {
                    return Err(SpectralError::CrossingDetected { t: aligned.t, a, b, gap, tol });
                }
            }
        }
        self.min_gap = self.min_gap.min(track_min_gap(&aligned, &self.initially_degenerate));
        self.frames.push(aligned);
        Ok(())
    }

    pub fn frames(&self) -> &[SpectralFrame] {
        &self.frames
    }

    pub fn frame(&self, k: usize) -> &SpectralFrame {
        &self.frames[k]
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.frames[0].dim()
    }

    pub fn t_start(&self) -> f64 {
        self.frames[0].t
    }

    pub fn t_end(&self) -> f64 {
        self.frames.last().unwrap().t
    }

    pub fn options(&self) -> &PathOptions {
        &self.opts
    }

    /// Minimal gap over all frames, excluding statically degenerate pairs.
    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    pub fn initially_degenerate(&self) -> &[(usize, usize)] {
        &self.initially_degenerate
    }

    /// Index of the last frame with frame.t <= t.
    pub fn bracketing_index(&self, t: f64) -> usize {
        match self.frames.binary_search_by(|f| f.t.partial_cmp(&t).unwrap()) {
            Ok(k) => k,
            Err(0) => 0,
            Err(k) => k - 1,
        }
    }

    /// Decompose the superoperator at an arbitrary time and align it to the
    /// nearest stored frame (labels and gauge).
    pub fn frame_at(
        &self,
        sup: &SuperoperatorFn,
        t: f64,
    ) -> Result<SpectralFrame, SpectralError> {
        let reference = self.frame(self.bracketing_index(t));
        let raw = decompose_with(&sup.eval(t), t, &self.opts)?;
        align_to(&raw, reference, &self.opts)
    }

    /// Cumulative trapezoid of each eigenvalue along the grid up to time t
    /// (linear interpolation into the final partial interval).
    pub fn lambda_integrals(&self, t: f64) -> Vec<C64> {
        let n = self.dim();
        let mut acc = vec![C64::ZERO; n];
        for w in self.frames.windows(2) {
            let (f0, f1) = (&w[0], &w[1]);
            if t <= f0.t {
                break;
            }
            let t_hi = t.min(f1.t);
            let dt = t_hi - f0.t;
            if dt <= 0.0 {
                break;
            }
            let frac = dt / (f1.t - f0.t);
            for a in 0..n {
                let lam1 = f0.eigenvalues[a] * (1.0 - frac) + f1.eigenvalues[a] * frac;
                acc[a] += 0.5 * dt * (f0.eigenvalues[a] + lam1);
            }
            if t <= f1.t {
                break;
            }
        }
        acc
    }
}

fn track_min_gap(frame: &SpectralFrame, exempt: &[(usize, usize)]) -> f64 {
    let n = frame.dim();
    let mut min_gap = f64::INFINITY;
    for a in 0..n {
        for b in a + 1..n {
            if exempt.contains(&(a, b)) {
                continue;
            }
            min_gap = min_gap.min((frame.eigenvalues[a] - frame.eigenvalues[b]).norm());
        }
    }
    min_gap
}

/// Right-eigenvector time derivative at `t` by 4th-order central differences
/// on freshly decomposed, reference-aligned frames, with a Richardson check
/// comparing the h and 2h estimates.
pub fn frame_derivative(
    path: &SpectralPath,
    sup: &SuperoperatorFn,
    label: usize,
    t: f64,
    h: f64,
) -> Result<Vec<C64>, SpectralError> {
    if t < path.t_start() || t > path.t_end() {
        return Err(SpectralError::OutsidePath { t });
    }
    let reference = path.frame(path.bracketing_index(t));
    let column = |s: f64| -> Result<Vec<C64>, SpectralError> {
        let raw = decompose_with(&sup.eval(s), s, path.options())?;
        Ok(align_to(&raw, reference, path.options())?.right.column(label))
    };
    let stencil = |step: f64| -> Result<Vec<C64>, SpectralError> {
        let m2 = column(t - 2.0 * step)?;
        let m1 = column(t - step)?;
        let p1 = column(t + step)?;
        let p2 = column(t + 2.0 * step)?;
        Ok((0..m1.len())
            .map(|i| (m2[i] - p2[i] + 8.0 * (p1[i] - m1[i])) / (12.0 * step))
            .collect())
    };
    let d_h = stencil(h)?;
    let d_2h = stencil(2.0 * h)?;
    let norm_h = d_h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let diff = d_h
        .iter()
        .zip(&d_2h)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    // The 2h stencil error is 16x the h one; their difference estimates the
    // 2h truncation error, so scale down for the h estimate.
    let estimate = diff / 15.0 / norm_h.max(1e-30);
    let lam_scale = reference.eigenvalue_scale();
    if norm_h > 1e-9 * lam_scale && estimate > 1e-6 {
        return Err(SpectralError::StepTooLarge { estimate });
    }
    Ok(d_h)
}

/// Default derivative step: 1e-4 of the fastest eigenvalue timescale.
pub fn default_derivative_step(frame: &SpectralFrame) -> f64 {
    1e-4 / frame.eigenvalue_scale()
}

/// All pairings kappa_ba = <<E_b|dD_a/dt>> at time t via finite differences.
pub fn kappa_fd(
    path: &SpectralPath,
    sup: &SuperoperatorFn,
    t: f64,
    h: f64,
) -> Result<ComplexMatrix, SpectralError> {
    let frame = path.frame_at(sup, t)?;
    let n = frame.dim();
    let mut kappa = ComplexMatrix::zeros(n, n);
    for a in 0..n {
        let ddot = frame_derivative(path, sup, a, t, h)?;
        for b in 0..n {
            kappa[(b, a)] = frame.project_left(b, &ddot);
        }
    }
    Ok(kappa)
}

/// All pairings kappa_ba at time t from one decomposition plus the analytic
/// superoperator derivative: off-diagonals via
/// kappa_ba = <<E_b| dL/dt |D_a>> / (lambda_a - lambda_b), pairs involving
/// the constant zero block are exactly zero, and diagonals follow from the
/// gauge conditions (unit norm, real-positive overlap with the reference
/// vector).
pub fn kappa_perturbative(
    frame: &SpectralFrame,
    reference: &SpectralFrame,
    ldot: &ComplexMatrix,
    gap_tol_rel: f64,
) -> Result<ComplexMatrix, SpectralError> {
    let n = frame.dim();
    let scale = frame.eigenvalue_scale();
    let gap_tol = gap_tol_rel * scale;
    let mut kappa = ComplexMatrix::zeros(n, n);

    // L-dot sandwiched between every left/right pair.
    let mut ld = ComplexMatrix::zeros(n, n);
    for a in 0..n {
        let lda = ldot.matvec(&frame.right.column(a));
        for b in 0..n {
            ld[(b, a)] = frame.project_left(b, &lda);
        }
    }

    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            if a == 0 || b == 0 {
                // D_0 is constant and every other eigenvector keeps an exactly
                // zero first component, so these pairings vanish identically.
                continue;
            }
            let gap = frame.eigenvalues[a] - frame.eigenvalues[b];
            if gap.norm() < gap_tol {
                return Err(SpectralError::CrossingDetected {
                    t: frame.t,
                    a,
                    b,
                    gap: gap.norm(),
                    tol: gap_tol,
                });
            }
            kappa[(b, a)] = ld[(b, a)] / gap;
        }
    }

    // Diagonals: expansion dD_a/dt = sum_b kappa_ba D_b constrained by the
    // gauge. Unit norm gives Re<D_a, dD_a> = 0; the align-to-reference gauge
    // keeps <Dref_a, D_a> real, giving Im<Dref_a, dD_a> = 0.
    for a in 1..n {
        let da = frame.right.column(a);
        let ra = reference.right.column(a);
        let mut s_norm = C64::ZERO; // sum_b!=a kappa_ba <D_a, D_b>
        let mut s_ref = C64::ZERO; // sum_b!=a kappa_ba <Dref_a, D_b>
        for b in 0..n {
            if b == a {
                continue;
            }
            let db = frame.right.column(b);
            s_norm += kappa[(b, a)] * conj_dot(&da, &db);
            s_ref += kappa[(b, a)] * conj_dot(&ra, &db);
        }
        let overlap = conj_dot(&ra, &da);
        let re = -s_norm.re;
        let im = if overlap.norm() > 1e-12 { -(s_ref.im + re * overlap.im) / overlap.re } else { 0.0 };
        kappa[(a, a)] = C64::new(re, im);
    }
    Ok(kappa)
}
