//! Gaussian-kernel similarity graphs and the Laplacian `L = (D - W) / n`.

use std::f64::consts::PI;
use std::io::{BufRead, BufReader, Read, Write};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::PointCloud;
use crate::error::{check_dim, Error, Result};
use crate::spectral::{GraphSignal, IndicatorSignal};

/// Below this size the Laplacian product runs on the calling thread.
const PAR_MIN_NODES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub sigma: f64,
    pub dimension: usize,
}

impl KernelParams {
    pub fn new(sigma: f64, dimension: usize) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidInput(format!("kernel width must be positive, got {sigma}")));
        }
        if dimension == 0 {
            return Err(Error::InvalidInput("kernel dimension must be positive".into()));
        }
        Ok(Self { sigma, dimension })
    }

    /// Kernel value at zero distance, `(2 pi sigma^2)^{-d/2}`.
    pub fn peak(&self) -> f64 {
        (2.0 * PI * self.sigma * self.sigma).powf(-(self.dimension as f64) / 2.0)
    }

    #[inline]
    fn eval_sq(&self, peak: f64, sq_dist: f64) -> f64 {
        peak * (-sq_dist / (2.0 * self.sigma * self.sigma)).exp()
    }
}

/// `(2 pi sigma^2)^{-d/2} exp(-|x - y|^2 / (2 sigma^2))`.
pub fn gaussian_kernel(x: &[f64], y: &[f64], params: &KernelParams) -> Result<f64> {
    check_dim(params.dimension, x.len())?;
    check_dim(params.dimension, y.len())?;
    Ok(params.eval_sq(params.peak(), sq_dist(x, y)))
}

#[inline]
fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[derive(Debug, Clone, PartialEq)]
struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
enum Weights {
    Dense(DMatrix<f64>),
    Sparse(Csr),
}

/// Weighted undirected graph without self-loops.
///
/// `W` is stored densely unless a truncation threshold was requested, in
/// which case entries below it are dropped and the rest kept in CSR form.
/// The Laplacian is never materialized for products.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    n: usize,
    weights: Weights,
    degrees: Vec<f64>,
    kernel: Option<KernelParams>,
    truncation: Option<f64>,
}

/// Both readings of the cut functional on a binary signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutValue {
    /// `sum_{i in S, j in S^c} W_ij`.
    pub raw: f64,
    /// `s^T L s` with `L = (D - W) / n`; equals `raw / n`.
    pub quadratic: f64,
    /// `sqrt(2 pi) / (n sigma) * s^T L s`, when the graph has a kernel width.
    pub scaled: Option<f64>,
}

/// Builds the kernel graph. `truncation` switches to sparse storage and
/// drops every weight strictly below the threshold.
pub fn build_graph(cloud: &PointCloud, params: &KernelParams, truncation: Option<f64>) -> Result<SimilarityGraph> {
    check_dim(params.dimension, cloud.dimension())?;
    let n = cloud.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("graph needs at least 2 nodes, got {n}")));
    }
    let peak = params.peak();
    match truncation {
        None => {
            let mut w = DMatrix::<f64>::zeros(n, n);
            // Column j holds W[i, j] for i < j; the lower triangle is mirrored after.
            w.as_mut_slice().par_chunks_mut(n).enumerate().for_each(|(j, col)| {
                let xj = cloud.point(j);
                for (i, slot) in col.iter_mut().enumerate().take(j) {
                    *slot = params.eval_sq(peak, sq_dist(cloud.point(i), xj));
                }
            });
            for j in 0..n {
                for i in 0..j {
                    w[(j, i)] = w[(i, j)];
                }
            }
            Ok(SimilarityGraph::from_dense_unchecked(w, Some(*params), None))
        }
        Some(tau) => {
            if !(tau >= 0.0) {
                return Err(Error::InvalidInput(format!("truncation threshold must be nonnegative, got {tau}")));
            }
            let rows: Vec<(Vec<usize>, Vec<f64>)> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let xi = cloud.point(i);
                    let mut cols = Vec::new();
                    let mut vals = Vec::new();
                    for j in (0..n).filter(|&j| j != i) {
                        let v = params.eval_sq(peak, sq_dist(xi, cloud.point(j)));
                        if v >= tau && v > 0.0 {
                            cols.push(j);
                            vals.push(v);
                        }
                    }
                    (cols, vals)
                })
                .collect();
            Ok(SimilarityGraph::from_csr_rows(rows, Some(*params), Some(tau)))
        }
    }
}

impl SimilarityGraph {
    /// Graph from an explicit weight matrix (symmetric, nonnegative, zero diagonal).
    pub fn from_weights(w: DMatrix<f64>, kernel: Option<KernelParams>) -> Result<Self> {
        let n = w.nrows();
        if n < 2 || w.ncols() != n {
            return Err(Error::InvalidInput("weight matrix must be square with at least 2 nodes".into()));
        }
        for j in 0..n {
            if w[(j, j)] != 0.0 {
                return Err(Error::InvalidInput("weight matrix must have a zero diagonal".into()));
            }
            for i in 0..j {
                let (a, b) = (w[(i, j)], w[(j, i)]);
                if !(a >= 0.0) || !a.is_finite() || (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                    return Err(Error::InvalidInput(format!("weights must be finite, nonnegative and symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self::from_dense_unchecked(w, kernel, None))
    }

    fn from_dense_unchecked(w: DMatrix<f64>, kernel: Option<KernelParams>, truncation: Option<f64>) -> Self {
        let n = w.nrows();
        // column sums equal row sums by symmetry; columns are contiguous
        let degrees = w.as_slice().chunks_exact(n).map(|c| c.iter().sum()).collect();
        Self { n, weights: Weights::Dense(w), degrees, kernel, truncation }
    }

    fn from_csr_rows(rows: Vec<(Vec<usize>, Vec<f64>)>, kernel: Option<KernelParams>, truncation: Option<f64>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut degrees = Vec::with_capacity(n);
        row_ptr.push(0);
        for (c, v) in rows {
            degrees.push(v.iter().sum());
            cols.extend(c);
            vals.extend(v);
            row_ptr.push(cols.len());
        }
        Self { n, weights: Weights::Sparse(Csr { row_ptr, cols, vals }), degrees, kernel, truncation }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn kernel(&self) -> Option<&KernelParams> {
        self.kernel.as_ref()
    }

    pub fn sigma(&self) -> Option<f64> {
        self.kernel.map(|k| k.sigma)
    }

    pub fn truncation(&self) -> Option<f64> {
        self.truncation
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.weights, Weights::Sparse(_))
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        match &self.weights {
            Weights::Dense(w) => w[(i, j)],
            Weights::Sparse(csr) => {
                let range = csr.row_ptr[i]..csr.row_ptr[i + 1];
                match csr.cols[range.clone()].binary_search(&j) {
                    Ok(k) => csr.vals[range.start + k],
                    Err(_) => 0.0,
                }
            }
        }
    }

    /// Nonzero entries of row `i` as `(column, weight)`.
    pub fn neighbors(&self, i: usize) -> Vec<(usize, f64)> {
        match &self.weights {
            Weights::Dense(w) => w.column(i).iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, v)| (j, *v)).collect(),
            Weights::Sparse(csr) => {
                let r = csr.row_ptr[i]..csr.row_ptr[i + 1];
                csr.cols[r.clone()].iter().copied().zip(csr.vals[r].iter().copied()).collect()
            }
        }
    }

    pub fn weights_dense(&self) -> DMatrix<f64> {
        match &self.weights {
            Weights::Dense(w) => w.clone(),
            Weights::Sparse(_) => DMatrix::from_fn(self.n, self.n, |i, j| self.weight(i, j)),
        }
    }

    /// Dense `L = (D - W) / n`.
    pub fn laplacian_dense(&self) -> DMatrix<f64> {
        let scale = 1.0 / self.n as f64;
        let mut l = self.weights_dense() * -scale;
        for i in 0..self.n {
            l[(i, i)] = self.degrees[i] * scale;
        }
        l
    }

    /// `L f` written as `(1/n) sum_j W_ij (f_i - f_j)`, which maps constants
    /// to exact zeros.
    pub(crate) fn apply_into(&self, f: &[f64], out: &mut [f64]) {
        let n = self.n;
        let scale = 1.0 / n as f64;
        match &self.weights {
            Weights::Dense(w) => {
                let body = |(j, (col, o)): (usize, (&[f64], &mut f64))| {
                    let fj = f[j];
                    let acc: f64 = col.iter().zip(f).map(|(wij, fi)| wij * (fj - fi)).sum();
                    *o = acc * scale;
                };
                if n >= PAR_MIN_NODES {
                    w.as_slice().par_chunks_exact(n).zip(out.par_iter_mut()).enumerate().for_each(body);
                } else {
                    w.as_slice().chunks_exact(n).zip(out.iter_mut()).enumerate().for_each(body);
                }
            }
            Weights::Sparse(csr) => {
                for (i, o) in out.iter_mut().enumerate() {
                    let r = csr.row_ptr[i]..csr.row_ptr[i + 1];
                    let acc: f64 = csr.cols[r.clone()].iter().zip(&csr.vals[r]).map(|(&j, w)| w * (f[i] - f[j])).sum();
                    *o = acc * scale;
                }
            }
        }
    }
}

/// `L f` without materializing `L`.
pub fn laplacian_apply(graph: &SimilarityGraph, f: &GraphSignal) -> Result<GraphSignal> {
    check_dim(graph.n, f.len())?;
    let mut out = vec![0.0; graph.n];
    graph.apply_into(f.values(), &mut out);
    Ok(GraphSignal::new_unchecked(out))
}

/// Cut across the partition encoded by `s`.
pub fn cut_value(graph: &SimilarityGraph, s: &IndicatorSignal) -> Result<CutValue> {
    check_dim(graph.n, s.len())?;
    let bits = s.values();
    let mut raw = 0.0;
    for i in (0..graph.n).filter(|&i| bits[i] == 1.0) {
        raw += graph.neighbors(i).into_iter().filter(|(j, _)| bits[*j] == 0.0).map(|(_, w)| w).sum::<f64>();
    }
    let mut ls = vec![0.0; graph.n];
    graph.apply_into(bits, &mut ls);
    let quadratic: f64 = bits.iter().zip(&ls).map(|(a, b)| a * b).sum();
    let scaled = graph
        .sigma()
        .map(|sigma| (2.0 * PI).sqrt() / (graph.n as f64 * sigma) * quadratic);
    Ok(CutValue { raw, quadratic, scaled })
}

/// Metadata written next to an edge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeListHeader {
    pub n: usize,
    pub sigma: Option<f64>,
    pub dimension: Option<usize>,
    pub truncation: Option<f64>,
}

impl SimilarityGraph {
    pub fn header(&self) -> EdgeListHeader {
        EdgeListHeader {
            n: self.n,
            sigma: self.sigma(),
            dimension: self.kernel.map(|k| k.dimension),
            truncation: self.truncation,
        }
    }

    /// Rows `i,j,w` for every nonzero `W_ij` with `i < j`; weights carry 17
    /// significant digits so reading them back is bit-exact.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        for i in 0..self.n {
            for (j, w) in self.neighbors(i) {
                if i < j {
                    writeln!(out, "{i},{j},{w:.16e}")?;
                }
            }
        }
        Ok(())
    }

    pub fn read_edge_list<R: Read>(header: &EdgeListHeader, input: R) -> Result<Self> {
        let n = header.n;
        if n < 2 {
            return Err(Error::InvalidInput("edge list header must declare at least 2 nodes".into()));
        }
        let kernel = match (header.sigma, header.dimension) {
            (Some(s), Some(d)) => Some(KernelParams::new(s, d)?),
            _ => None,
        };
        let mut rows: Vec<(Vec<usize>, Vec<f64>)> = vec![(Vec::new(), Vec::new()); n];
        for (lineno, line) in BufReader::new(input).lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let bad = |m: &str| Error::InvalidInput(format!("edge list line {}: {m}", lineno + 1));
            let mut parts = t.split(',');
            let (Some(a), Some(b), Some(c), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
                return Err(bad("expected i,j,w"));
            };
            let i: usize = a.trim().parse().map_err(|_| bad("bad row index"))?;
            let j: usize = b.trim().parse().map_err(|_| bad("bad column index"))?;
            let w: f64 = c.trim().parse().map_err(|_| bad("bad weight"))?;
            if i >= j || j >= n || !(w >= 0.0) {
                return Err(bad("edge must satisfy i < j < n with nonnegative weight"));
            }
            rows[i].0.push(j);
            rows[i].1.push(w);
            rows[j].0.push(i);
            rows[j].1.push(w);
        }
        if header.truncation.is_some() {
            for (cols, vals) in rows.iter_mut() {
                let mut pairs: Vec<(usize, f64)> = cols.iter().copied().zip(vals.iter().copied()).collect();
                pairs.sort_by_key(|p| p.0);
                *cols = pairs.iter().map(|p| p.0).collect();
                *vals = pairs.iter().map(|p| p.1).collect();
            }
            Ok(Self::from_csr_rows(rows, kernel, header.truncation))
        } else {
            let mut w = DMatrix::<f64>::zeros(n, n);
            for (i, (cols, vals)) in rows.iter().enumerate() {
                for (&j, &v) in cols.iter().zip(vals) {
                    w[(i, j)] = v;
                }
            }
            Ok(Self::from_dense_unchecked(w, kernel, None))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{sample, GmmModel};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PEAK_01: f64 = 15.915_494_309_189_533; // 1 / (2 pi 0.01)

    fn two_node(w: f64) -> SimilarityGraph {
        SimilarityGraph::from_weights(DMatrix::from_row_slice(2, 2, &[0.0, w, w, 0.0]), None).unwrap()
    }

    pub(crate) fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> SimilarityGraph {
        let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
        let cloud = PointCloud::from_rows(&rows, 0).unwrap();
        build_graph(&cloud, &KernelParams::new(0.5, 2).unwrap(), None).unwrap()
    }

    #[test]
    fn kernel_closed_forms() {
        let p = KernelParams::new(0.1, 2).unwrap();
        let k0 = gaussian_kernel(&[0.3, 0.4], &[0.3, 0.4], &p).unwrap();
        assert!((k0 - PEAK_01).abs() < 1e-12);
        let far = gaussian_kernel(&[0.0, 0.0], &[1.0, 0.0], &p).unwrap();
        assert!((far - PEAK_01 * (-50f64).exp()).abs() < 1e-30);
        assert!(far < 1e-20 * PEAK_01);
        assert!(gaussian_kernel(&[0.0], &[0.0, 1.0], &p).is_err());
        assert!(KernelParams::new(0.0, 2).is_err());
    }

    #[test]
    fn kernel_is_symmetric() {
        let p = KernelParams::new(0.3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            assert_eq!(gaussian_kernel(&x, &y, &p).unwrap(), gaussian_kernel(&y, &x, &p).unwrap());
        }
    }

    #[test]
    fn two_points_at_unit_distance() {
        let cloud = PointCloud::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]], 0).unwrap();
        let g = build_graph(&cloud, &KernelParams::new(0.1, 2).unwrap(), None).unwrap();
        let w = PEAK_01 * (-50f64).exp();
        assert!((g.weight(0, 1) - w).abs() < 1e-12 * w);
        assert_eq!(g.weight(0, 0), 0.0);
        assert_eq!(g.degrees(), &[g.weight(0, 1), g.weight(1, 0)]);
    }

    #[test]
    fn identical_points_give_peak_weights() {
        let cloud = PointCloud::from_rows(&vec![vec![1.0, -1.0]; 4], 0).unwrap();
        let g = build_graph(&cloud, &KernelParams::new(0.1, 2).unwrap(), None).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 0.0 } else { PEAK_01 };
                assert!((g.weight(i, j) - expect).abs() < 1e-12);
            }
        }
        assert!(build_graph(&PointCloud::from_rows(&[vec![0.0, 0.0]], 0).unwrap(), &KernelParams::new(0.1, 2).unwrap(), None).is_err());
    }

    #[test]
    fn sampled_graph_is_consistent_and_psd() {
        let cloud = sample(&GmmModel::reference_2d(), 500, 21).unwrap();
        let g = build_graph(&cloud, &KernelParams::new(0.1, 2).unwrap(), None).unwrap();
        let w = g.weights_dense();
        for i in 0..500 {
            assert_eq!(w[(i, i)], 0.0);
            let row: f64 = w.row(i).iter().sum();
            assert!((row - g.degrees()[i]).abs() < 1e-10);
            for j in 0..i {
                assert!((w[(i, j)] - w[(j, i)]).abs() < 1e-12);
            }
        }
        let eig = nalgebra::SymmetricEigen::new(g.laplacian_dense());
        assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-10));
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        let cloud = sample(&GmmModel::reference_2d(), 300, 2).unwrap();
        let g = build_graph(&cloud, &KernelParams::new(0.1, 2).unwrap(), None).unwrap();
        let out = laplacian_apply(&g, &GraphSignal::new(vec![1.0; 300]).unwrap()).unwrap();
        assert!(out.values().iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn laplacian_two_node_hand_calculation() {
        let w = 0.8;
        let out = laplacian_apply(&two_node(w), &GraphSignal::new(vec![1.0, 0.0]).unwrap()).unwrap();
        assert!((out.values()[0] - w / 2.0).abs() < 1e-15);
        assert!((out.values()[1] + w / 2.0).abs() < 1e-15);
        assert!(laplacian_apply(&two_node(w), &GraphSignal::new(vec![1.0]).unwrap()).is_err());
    }

    #[test]
    fn laplacian_matches_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [5usize, 40, 300] {
            let g = random_graph(&mut rng, n);
            let f: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let fast = laplacian_apply(&g, &GraphSignal::new(f.clone()).unwrap()).unwrap();
            let dense = g.laplacian_dense() * nalgebra::DVector::from_vec(f);
            for i in 0..n {
                assert!((fast.values()[i] - dense[i]).abs() < 1e-12, "n={n} i={i}");
            }
        }
    }

    #[test]
    fn cut_identities() {
        let g = two_node(0.7);
        let c = cut_value(&g, &IndicatorSignal::from_bools(&[true, false])).unwrap();
        assert!((c.raw - 0.7).abs() < 1e-15);
        assert!((c.quadratic - 0.35).abs() < 1e-15);
        assert!(c.scaled.is_none());
        let z = cut_value(&g, &IndicatorSignal::from_bools(&[false, false])).unwrap();
        assert_eq!((z.raw, z.quadratic), (0.0, 0.0));
    }

    #[test]
    fn cut_equals_quadratic_form_on_random_graphs() {
        // sum_{i in S, j in S^c} W_ij = s^T (D - W) s, brute force double loop.
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        for _ in 0..100 {
            let n = rng.random_range(2..15);
            let g = random_graph(&mut rng, n);
            let bits: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
            let mut brute = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if bits[i] && !bits[j] {
                        brute += g.weight(i, j);
                    }
                }
            }
            let c = cut_value(&g, &IndicatorSignal::from_bools(&bits)).unwrap();
            assert!((c.raw - brute).abs() < 1e-10 * brute.max(1.0));
            assert!((c.quadratic * n as f64 - brute).abs() < 1e-10 * brute.max(1.0));
            let scale = (2.0 * PI).sqrt() / (n as f64 * 0.5);
            assert!((c.scaled.unwrap() - scale * c.quadratic).abs() < 1e-12);
        }
    }

    #[test]
    fn sparse_matches_dense_when_truncation_is_tiny() {
        let cloud = sample(&GmmModel::reference_2d(), 400, 31).unwrap();
        let p = KernelParams::new(0.1, 2).unwrap();
        let dense = build_graph(&cloud, &p, None).unwrap();
        let sparse = build_graph(&cloud, &p, Some(p.peak() * 1e-12)).unwrap();
        assert!(sparse.is_sparse());
        let f: Vec<f64> = cloud.rows().map(|r| r[0].sin()).collect();
        let sig = GraphSignal::new(f).unwrap();
        let a = laplacian_apply(&dense, &sig).unwrap();
        let b = laplacian_apply(&sparse, &sig).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn edge_list_round_trip_is_bit_exact() {
        let cloud = sample(&GmmModel::reference_2d(), 120, 5).unwrap();
        let p = KernelParams::new(0.2, 2).unwrap();
        for trunc in [None, Some(1e-6)] {
            let g = build_graph(&cloud, &p, trunc).unwrap();
            let mut buf = Vec::new();
            g.write_edge_list(&mut buf).unwrap();
            let header: EdgeListHeader = serde_json::from_str(&serde_json::to_string(&g.header()).unwrap()).unwrap();
            let back = SimilarityGraph::read_edge_list(&header, buf.as_slice()).unwrap();
            assert_eq!(back, g);
        }
    }

    #[test]
    fn edge_list_rejects_malformed_rows() {
        let h = EdgeListHeader { n: 3, sigma: None, dimension: None, truncation: None };
        assert!(SimilarityGraph::read_edge_list(&h, "1,0,0.5\n".as_bytes()).is_err());
        assert!(SimilarityGraph::read_edge_list(&h, "0,1\n".as_bytes()).is_err());
        assert!(SimilarityGraph::read_edge_list(&h, "0,5,1.0\n".as_bytes()).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn laplacian_is_linear_and_psd(seed in any::<u64>(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let n = rng.random_range(2..25);
                let g = random_graph(&mut rng, n);
                let f: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let h: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let combo: Vec<f64> = f.iter().zip(&h).map(|(a, b)| alpha * a + beta * b).collect();
                let lf = laplacian_apply(&g, &GraphSignal::new(f.clone()).unwrap()).unwrap();
                let lh = laplacian_apply(&g, &GraphSignal::new(h).unwrap()).unwrap();
                let lc = laplacian_apply(&g, &GraphSignal::new(combo).unwrap()).unwrap();
                for i in 0..n {
                    let expect = alpha * lf.values()[i] + beta * lh.values()[i];
                    prop_assert!((lc.values()[i] - expect).abs() < 1e-10);
                }
                let quad: f64 = f.iter().zip(lf.values()).map(|(a, b)| a * b).sum();
                prop_assert!(quad >= -1e-10);
            }
        }
    }
}
