//! Semi-supervised interpolation of class indicators: bandlimited
//! least squares, the minimum-bandwidth dual, and the harmonic baseline.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};
use crate::graph::SimilarityGraph;
use crate::spectral::{GraphSignal, IndicatorSignal, LabeledSet, SpectralBasis};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;
/// Eigenvalues closer than this are treated as one eigenspace.
const EIGENSPACE_TIE: f64 = 1e-12;

/// Real scores plus their thresholded labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub scores: GraphSignal,
    pub labels: IndicatorSignal,
    pub threshold: f64,
}

/// Output of [`interpolate_min_bandwidth`].
#[derive(Debug, Clone)]
pub struct MinBandwidth {
    pub signal: GraphSignal,
    /// Eigenvalue of the last basis vector used, `lambda_{K-1}`.
    pub omega_min: f64,
    /// Number of basis vectors used.
    pub k: usize,
    /// `|f(L) - labels|` of the returned signal.
    pub residual: f64,
}

/// Minimum-norm least-squares solution of `a x = b`.
///
/// Uses the SVD with singular values below `max(rows, cols) * eps * sigma_max`
/// dropped. The factorization is checked against `a`, since the bidiagonal
/// SVD occasionally returns an inaccurate decomposition; on failure the
/// pseudo-inverse is taken from the eigendecomposition of the smaller Gram
/// matrix instead.
fn min_norm_lstsq(a: DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let (rows, cols) = a.shape();
    let scale = a.amax();
    if scale == 0.0 {
        return DVector::zeros(cols);
    }
    let svd = SVD::new(a.clone(), true, true);
    let u = svd.u.as_ref().expect("left vectors requested");
    let vt = svd.v_t.as_ref().expect("right vectors requested");
    let rebuilt = u * DMatrix::from_diagonal(&svd.singular_values) * vt;
    let tol = 1e3 * rows.max(cols) as f64 * f64::EPSILON * scale;
    if (rebuilt - &a).amax() <= tol {
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let cutoff = rows.max(cols) as f64 * f64::EPSILON * smax;
        let mut x = DVector::zeros(cols);
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if s > cutoff {
                x += vt.row(k).transpose() * (u.column(k).dot(b) / s);
            }
        }
        return x;
    }
    gram_lstsq(&a, b)
}

/// `a^+ b` through `a^T (a a^T)^+` or `(a^T a)^+ a^T`, whichever Gram
/// matrix is smaller.
fn gram_lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let (rows, cols) = a.shape();
    let wide = rows <= cols;
    let gram = if wide { a * a.transpose() } else { a.transpose() * a };
    let rhs = if wide { b.clone() } else { a.transpose() * b };
    let eig = SymmetricEigen::new(gram);
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let cutoff = rows.max(cols) as f64 * f64::EPSILON * lmax;
    let mut y = DVector::zeros(rhs.len());
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l > cutoff {
            let w = eig.eigenvectors.column(k);
            y += w * (w.dot(&rhs) / l);
        }
    }
    if wide {
        a.transpose() * y
    } else {
        y
    }
}

struct BandFit {
    signal: Vec<f64>,
    residual: f64,
}

/// Fit the labels with the first `k` basis vectors.
fn band_fit(basis: &SpectralBasis, labeled: &LabeledSet, k: usize) -> BandFit {
    let u = basis.eigenvectors();
    let rows = labeled.indices();
    let a = DMatrix::from_fn(rows.len(), k, |r, c| u[(rows[r], c)]);
    let y = DVector::from_column_slice(labeled.values());
    let coef = min_norm_lstsq(a.clone(), &y);
    let residual = (&a * &coef - &y).norm();
    let signal = (u.columns(0, k) * coef).iter().copied().collect();
    BandFit { signal, residual }
}

fn check_labels(basis_len: usize, labeled: &LabeledSet) -> Result<()> {
    if labeled.is_empty() {
        return Err(Error::InvalidInput("at least one labeled node is required".into()));
    }
    if let Some(&bad) = labeled.indices().iter().find(|&&i| i >= basis_len) {
        return Err(Error::InvalidInput(format!("labeled index {bad} out of range for {basis_len} nodes")));
    }
    Ok(())
}

/// Bandlimited least squares: the signal in `PW_omega` closest to the
/// labels on the labeled nodes, with the minimum-norm completion when the
/// fit is not unique.
pub fn interpolate_ls(basis: &SpectralBasis, labeled: &LabeledSet, omega: f64) -> Result<GraphSignal> {
    check_labels(basis.len(), labeled)?;
    if !(omega > 0.0) {
        return Err(Error::InvalidInput(format!("cutoff must be positive, got {omega}")));
    }
    let k = basis.count_below(omega);
    if k == 0 {
        return Err(Error::Infeasible(format!("no graph frequency lies below the cutoff {omega}")));
    }
    Ok(GraphSignal::new_unchecked(band_fit(basis, labeled, k).signal))
}

/// Minimum-bandwidth interpolation: the smallest band `K` (grown one
/// eigenspace at a time) whose span reproduces the labels to
/// `residual_tol * |labels|`, and the minimum-norm signal in it.
pub fn interpolate_min_bandwidth(basis: &SpectralBasis, labeled: &LabeledSet, residual_tol: f64) -> Result<MinBandwidth> {
    check_labels(basis.len(), labeled)?;
    let lam = basis.eigenvalues();
    let n = lam.len();
    // Admissible band sizes end on an eigenspace boundary.
    let ends: Vec<usize> = (1..=n).filter(|&k| k == n || lam[k] - lam[k - 1] > EIGENSPACE_TIE).collect();
    let target = residual_tol * DVector::from_column_slice(labeled.values()).norm();
    let consistent = |k: usize| -> BandFit { band_fit(basis, labeled, k) };

    // Consistency is monotone in K (nested spans), so bisect over the ends.
    let top = consistent(n);
    if top.residual > target {
        return Err(Error::Infeasible(format!(
            "labels are not reproduced even by the full basis (residual {:.3e}); tolerance too tight",
            top.residual
        )));
    }
    let (mut lo, mut hi) = (0usize, ends.len() - 1);
    let mut best = (ends[hi], top);
    while lo < hi {
        let mid = (lo + hi) / 2;
        let fit = consistent(ends[mid]);
        if fit.residual <= target {
            hi = mid;
            best = (ends[mid], fit);
        } else {
            lo = mid + 1;
        }
    }
    let (k, fit) = best;
    debug_assert!(lo == 0 || consistent(ends[lo - 1]).residual > target);
    Ok(MinBandwidth { signal: GraphSignal::new_unchecked(fit.signal), omega_min: lam[k - 1], k, residual: fit.residual })
}

/// Harmonic extension: minimizes `f^T L f` subject to the labels, i.e.
/// `f_U = -L_UU^{-1} L_UL y`.
pub fn harmonic_interpolate(graph: &SimilarityGraph, labeled: &LabeledSet) -> Result<GraphSignal> {
    let n = graph.len();
    check_labels(n, labeled)?;
    let unlabeled = labeled.unlabeled(n);
    let mut f = vec![0.0; n];
    for (&i, &v) in labeled.indices().iter().zip(labeled.values()) {
        f[i] = v;
    }
    if unlabeled.is_empty() {
        return Ok(GraphSignal::new_unchecked(f));
    }
    if !every_node_reaches_a_label(graph, labeled) {
        return Err(Error::Disconnected);
    }
    let l = graph.laplacian_dense();
    let luu = DMatrix::from_fn(unlabeled.len(), unlabeled.len(), |a, b| l[(unlabeled[a], unlabeled[b])]);
    let rhs = DVector::from_fn(unlabeled.len(), |a, _| {
        -labeled.indices().iter().zip(labeled.values()).map(|(&j, &y)| l[(unlabeled[a], j)] * y).sum::<f64>()
    });
    let chol = Cholesky::new(luu).ok_or(Error::Disconnected)?;
    let fu = chol.solve(&rhs);
    for (a, &i) in unlabeled.iter().enumerate() {
        f[i] = fu[a];
    }
    Ok(GraphSignal::new_unchecked(f))
}

fn every_node_reaches_a_label(graph: &SimilarityGraph, labeled: &LabeledSet) -> bool {
    let n = graph.len();
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = labeled.indices().to_vec();
    for &i in &stack {
        seen[i] = true;
    }
    while let Some(i) = stack.pop() {
        for (j, _) in graph.neighbors(i) {
            if !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Labels are 1 exactly where `score > threshold`.
pub fn predict(scores: &GraphSignal, threshold: f64) -> Prediction {
    let bits: Vec<bool> = scores.values().iter().map(|&s| s > threshold).collect();
    Prediction { scores: scores.clone(), labels: IndicatorSignal::from_bools(&bits), threshold }
}

/// Fraction of entries where two indicators agree.
pub fn accuracy(predicted: &IndicatorSignal, truth: &IndicatorSignal) -> f64 {
    let hits = predicted.values().iter().zip(truth.values()).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len().max(1) as f64
}

/// One-vs-all multiclass prediction. `solve` turns a binary labeled set
/// (1 for the class, 0 otherwise) into scores; each node gets the class with
/// the highest score, ties going to the lowest class index.
pub fn one_vs_all<F>(n: usize, labeled: &[(usize, usize)], num_classes: usize, mut solve: F) -> Result<Vec<usize>>
where
    F: FnMut(&LabeledSet) -> Result<GraphSignal>,
{
    if num_classes == 0 {
        return Err(Error::InvalidInput("need at least one class".into()));
    }
    if let Some(&(_, c)) = labeled.iter().find(|(_, c)| *c >= num_classes) {
        return Err(Error::InvalidInput(format!("class {c} out of range")));
    }
    let indices: Vec<usize> = labeled.iter().map(|p| p.0).collect();
    let mut best = vec![(f64::NEG_INFINITY, 0usize); n];
    for class in 0..num_classes {
        let values = labeled.iter().map(|&(_, c)| if c == class { 1.0 } else { 0.0 }).collect();
        let set = LabeledSet::new(indices.clone(), values, n)?;
        let scores = solve(&set)?;
        for (slot, &s) in best.iter_mut().zip(scores.values()) {
            if s > slot.0 {
                *slot = (s, class);
            }
        }
    }
    Ok(best.into_iter().map(|(_, c)| c).collect())
}
