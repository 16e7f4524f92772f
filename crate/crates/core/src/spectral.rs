//! Graph Fourier machinery: eigenbasis of `L`, bandwidths, Paley-Wiener
//! projections and the cutoff frequency of a labeled set.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_dim, Error, Result};
use crate::graph::SimilarityGraph;

/// Largest graph accepted by the dense eigensolver unless overridden.
pub const DEFAULT_EIGEN_CAP: usize = 4000;
/// Relative Fourier-coefficient threshold separating real content from rounding dust.
pub const DEFAULT_COEFF_TOL: f64 = 1e-8;
/// Power used by the cutoff-frequency estimator.
pub const DEFAULT_CUTOFF_ORDER: usize = 8;

/// Real-valued signal on the nodes of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSignal {
    values: Vec<f64>,
}

impl GraphSignal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("graph signal has non-finite entries".into()));
        }
        Ok(Self { values })
    }

    pub(crate) fn new_unchecked(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl From<&IndicatorSignal> for GraphSignal {
    fn from(s: &IndicatorSignal) -> Self {
        GraphSignal { values: s.values.clone() }
    }
}

/// `{0, 1}`-valued signal.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSignal {
    // stored as exact 0.0 / 1.0 so it can feed linear algebra directly
    values: Vec<f64>,
}

impl IndicatorSignal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::InvalidInput("indicator entries must be exactly 0 or 1".into()));
        }
        Ok(Self { values })
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self { values: bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.values.iter().filter(|&&v| v == 1.0).count()
    }

    pub fn get(&self, i: usize) -> bool {
        self.values[i] == 1.0
    }
}

/// Known labels on a subset of nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl LabeledSet {
    /// `indices` must be distinct and below `n`.
    pub fn new(indices: Vec<usize>, values: Vec<f64>, n: usize) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::InvalidInput("labeled indices and values differ in length".into()));
        }
        let mut seen = vec![false; n];
        for &i in &indices {
            if i >= n {
                return Err(Error::InvalidInput(format!("labeled index {i} out of range for {n} nodes")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidInput(format!("labeled index {i} repeated")));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("labels must be finite".into()));
        }
        Ok(Self { indices, values })
    }

    /// Labels taken from `signal` at `indices`.
    pub fn from_signal(indices: Vec<usize>, signal: &[f64]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= signal.len()) {
            return Err(Error::InvalidInput(format!("labeled index {bad} out of range")));
        }
        let values = indices.iter().map(|&i| signal[i]).collect();
        Self::new(indices, values, signal.len())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Complement of the labeled set in `0..n`, ascending.
    pub fn unlabeled(&self, n: usize) -> Vec<usize> {
        let mut mask = vec![true; n];
        for &i in &self.indices {
            mask[i] = false;
        }
        (0..n).filter(|&i| mask[i]).collect()
    }
}

/// Eigenpairs of `L` with eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SpectralBasis {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Graph Fourier transform `U^T s`.
    pub fn coefficients(&self, s: &GraphSignal) -> Result<Vec<f64>> {
        check_dim(self.len(), s.len())?;
        let v = DVector::from_column_slice(s.values());
        Ok((self.eigenvectors.tr_mul(&v)).iter().copied().collect())
    }

    /// Number of eigenvalues strictly below `omega`.
    pub fn count_below(&self, omega: f64) -> usize {
        self.eigenvalues.partition_point(|&l| l < omega)
    }
}

/// Full symmetric eigendecomposition of `L`, capped at [`DEFAULT_EIGEN_CAP`] nodes.
pub fn fourier_basis(graph: &SimilarityGraph) -> Result<SpectralBasis> {
    fourier_basis_with_cap(graph, DEFAULT_EIGEN_CAP)
}

pub fn fourier_basis_with_cap(graph: &SimilarityGraph, cap: usize) -> Result<SpectralBasis> {
    let n = graph.len();
    if n > cap {
        return Err(Error::Resource(format!(
            "dense eigendecomposition limited to {cap} nodes (graph has {n}); use bandwidth_estimate, which only needs Laplacian products"
        )));
    }
    let eig = SymmetricEigen::new(graph.laplacian_dense());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let eigenvalues = order
        .iter()
        .map(|&k| {
            let l = eig.eigenvalues[k];
            // PSD: negative values here are rounding noise
            if l < 0.0 && l > -1e-10 * scale.max(1.0) {
                0.0
            } else {
                l
            }
        })
        .collect();
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(SpectralBasis { eigenvalues, eigenvectors })
}

/// `ln(s^T L^m s)`, or `-inf` when the form vanishes.
///
/// Iterates `x <- L x / |L x|` for `floor(m/2)` steps and accumulates the
/// log-norms, so no power of `L` is formed and nothing under- or overflows.
pub fn log_power_form(graph: &SimilarityGraph, s: &GraphSignal, m: usize) -> Result<f64> {
    check_dim(graph.len(), s.len())?;
    if m == 0 {
        return Err(Error::InvalidInput("bandwidth order must be at least 1".into()));
    }
    let norm = s.norm();
    if norm == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let mut x: Vec<f64> = s.values().iter().map(|v| v / norm).collect();
    let mut y = vec![0.0; x.len()];
    let mut log_scale = norm.ln();
    for _ in 0..m / 2 {
        graph.apply_into(&x, &mut y);
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if ny == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        log_scale += ny.ln();
        x.iter_mut().zip(&y).for_each(|(xi, yi)| *xi = yi / ny);
    }
    if m % 2 == 0 {
        return Ok(2.0 * log_scale);
    }
    graph.apply_into(&x, &mut y);
    let q: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    if q <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(2.0 * log_scale + q.ln())
}

/// m-th order bandwidth estimate `(s^T L^m s / s^T s)^{1/m}`.
pub fn bandwidth_estimate(graph: &SimilarityGraph, s: &GraphSignal, m: usize) -> Result<f64> {
    let log_form = log_power_form(graph, s, m)?;
    let log_energy = 2.0 * s.norm().ln();
    Ok(((log_form - log_energy) / m as f64).exp())
}

/// Largest eigenvalue whose Fourier coefficient exceeds `tol * |s|`.
pub fn exact_bandwidth(basis: &SpectralBasis, s: &GraphSignal, tol: f64) -> Result<f64> {
    let norm = s.norm();
    if norm == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let coeffs = basis.coefficients(s)?;
    Ok(coeffs
        .iter()
        .zip(basis.eigenvalues())
        .filter(|(c, _)| c.abs() > tol * norm)
        .map(|(_, &l)| l)
        .fold(0.0, f64::max))
}

/// How the `U x U` block of `L^k` is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerRoute {
    /// Pick by cost.
    Auto,
    /// `k` Laplacian products per unlabeled unit vector.
    Columns,
    /// Repeated squaring of the dense Laplacian.
    DensePower,
}

/// Cutoff frequency `lambda_min((L^k)_{UU})^{1/k}` of a labeled set, `+inf`
/// when every node is labeled.
pub fn cutoff_frequency(graph: &SimilarityGraph, labeled: &LabeledSet, k: usize) -> Result<f64> {
    cutoff_frequency_with(graph, labeled, k, PowerRoute::Auto)
}

pub fn cutoff_frequency_with(graph: &SimilarityGraph, labeled: &LabeledSet, k: usize, route: PowerRoute) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidInput("cutoff order must be at least 1".into()));
    }
    let n = graph.len();
    if let Some(&bad) = labeled.indices().iter().find(|&&i| i >= n) {
        return Err(Error::InvalidInput(format!("labeled index {bad} out of range for {n} nodes")));
    }
    let unlabeled = labeled.unlabeled(n);
    if unlabeled.is_empty() {
        return Ok(f64::INFINITY);
    }
    let block = power_block(graph, &unlabeled, k, route);
    let lambda_min = SymmetricEigen::new(block.matrix).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if lambda_min <= 0.0 {
        return Ok(0.0);
    }
    Ok(block.scale * lambda_min.powf(1.0 / k as f64))
}

struct PowerBlock {
    /// `((L / scale)^k)_{UU}`
    matrix: DMatrix<f64>,
    scale: f64,
}

fn power_block(graph: &SimilarityGraph, unlabeled: &[usize], k: usize, route: PowerRoute) -> PowerBlock {
    let n = graph.len();
    // Gershgorin bound on the spectrum keeps L / scale inside [0, 1].
    let scale = 2.0 * graph.degrees().iter().cloned().fold(0.0, f64::max) / n as f64;
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let u = unlabeled.len();
    let route = match route {
        PowerRoute::Auto => {
            let columns_cost = (k * u) as f64;
            let dense_cost = ((k as f64).log2().ceil() + 1.0) * n as f64;
            if columns_cost <= dense_cost {
                PowerRoute::Columns
            } else {
                PowerRoute::DensePower
            }
        }
        r => r,
    };
    let matrix = match route {
        PowerRoute::Columns => {
            let mut out = DMatrix::<f64>::zeros(u, u);
            let mut x = vec![0.0; n];
            let mut y = vec![0.0; n];
            for (col, &j) in unlabeled.iter().enumerate() {
                x.iter_mut().for_each(|v| *v = 0.0);
                x[j] = 1.0;
                for _ in 0..k {
                    graph.apply_into(&x, &mut y);
                    x.iter_mut().zip(&y).for_each(|(xi, yi)| *xi = yi / scale);
                }
                for (row, &i) in unlabeled.iter().enumerate() {
                    out[(row, col)] = x[i];
                }
            }
            // symmetrize rounding differences
            (&out + out.transpose()) * 0.5
        }
        PowerRoute::DensePower | PowerRoute::Auto => {
            let base = graph.laplacian_dense() / scale;
            let mut result: Option<DMatrix<f64>> = None;
            let mut power = base;
            let mut e = k;
            loop {
                if e & 1 == 1 {
                    result = Some(match result {
                        None => power.clone(),
                        Some(r) => &r * &power,
                    });
                }
                e >>= 1;
                if e == 0 {
                    break;
                }
                power = &power * &power;
            }
            let full = result.expect("k >= 1");
            let sub = DMatrix::from_fn(u, u, |a, b| full[(unlabeled[a], unlabeled[b])]);
            (&sub + sub.transpose()) * 0.5
        }
    };
    PowerBlock { matrix, scale }
}

/// Orthogonal projection onto `PW_omega`: eigenvectors with eigenvalue
/// strictly below `omega`.
pub fn project_bandlimited(basis: &SpectralBasis, s: &GraphSignal, omega: f64) -> Result<GraphSignal> {
    if omega.is_nan() {
        return Err(Error::InvalidInput("cutoff is NaN".into()));
    }
    let coeffs = basis.coefficients(s)?;
    let kept = basis.count_below(omega);
    let u = basis.eigenvectors();
    let mut out = vec![0.0; basis.len()];
    for (k, c) in coeffs.iter().enumerate().take(kept) {
        for (i, o) in out.iter_mut().enumerate() {
            *o += c * u[(i, k)];
        }
    }
    Ok(GraphSignal::new_unchecked(out))
}
