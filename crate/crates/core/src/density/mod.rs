//! Isotropic Gaussian mixture densities, seeded sampling and hyperplane
//! decision boundaries.
//!
//! The mixture is the statistical ground truth of every experiment: point
//! clouds are drawn from it, and the large-sample limits of graph quantities
//! are expressed through integrals and suprema of its density on a boundary.

mod boundary;
pub mod io;

pub use boundary::{boundary_power_integral, log_boundary_power_integral, sup_on_boundary};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{check_dim, Error, Result};
use crate::spectral::IndicatorSignal;

const WEIGHT_SUM_TOL: f64 = 1e-12;
const UNIT_NORMAL_TOL: f64 = 1e-12;

/// One isotropic component: covariance is `variance * I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmComponent {
    pub mean: Vec<f64>,
    pub variance: f64,
    pub weight: f64,
}

impl GmmComponent {
    pub fn new(mean: Vec<f64>, variance: f64, weight: f64) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::InvalidInput(format!("component variance must be positive, got {variance}")));
        }
        if !(weight > 0.0) || weight > 1.0 {
            return Err(Error::InvalidInput(format!("component weight must lie in (0, 1], got {weight}")));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("component mean has non-finite entries".into()));
        }
        Ok(Self { mean, variance, weight })
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Weighted component density `weight * N(x; mean, variance * I)`.
    fn weighted_density(&self, x: &[f64]) -> f64 {
        let d = self.mean.len() as f64;
        let sq: f64 = x.iter().zip(&self.mean).map(|(a, b)| (a - b) * (a - b)).sum();
        self.weight * (2.0 * PI * self.variance).powf(-d / 2.0) * (-sq / (2.0 * self.variance)).exp()
    }
}

/// A mixture of isotropic Gaussians on `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GmmDocument", into = "GmmDocument")]
pub struct GmmModel {
    dimension: usize,
    components: Vec<GmmComponent>,
}

/// On-disk layout: `{"dimension": d, "components": [{"mean", "variance", "weight"}, ...]}`.
#[derive(Serialize, Deserialize)]
struct GmmDocument {
    dimension: usize,
    components: Vec<GmmComponent>,
}

impl TryFrom<GmmDocument> for GmmModel {
    type Error = Error;

    fn try_from(doc: GmmDocument) -> Result<Self> {
        let components = doc
            .components
            .into_iter()
            .map(|c| GmmComponent::new(c.mean, c.variance, c.weight))
            .collect::<Result<Vec<_>>>()?;
        GmmModel::new(doc.dimension, components)
    }
}

impl From<GmmModel> for GmmDocument {
    fn from(m: GmmModel) -> Self {
        GmmDocument { dimension: m.dimension, components: m.components }
    }
}

impl GmmModel {
    pub fn new(dimension: usize, components: Vec<GmmComponent>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if components.is_empty() {
            return Err(Error::InvalidInput("mixture needs at least one component".into()));
        }
        for c in &components {
            check_dim(dimension, c.mean.len())?;
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidInput(format!("component weights sum to {total}, expected 1")));
        }
        Ok(Self { dimension, components })
    }

    /// The three-component planar mixture used throughout the experiments:
    /// means (-2,0), (0,0), (2,0); variances 0.64, 0.25, 0.16; weights 0.5, 0.2, 0.3.
    pub fn reference_2d() -> Self {
        let comps = vec![
            GmmComponent { mean: vec![-2.0, 0.0], variance: 0.64, weight: 0.5 },
            GmmComponent { mean: vec![0.0, 0.0], variance: 0.25, weight: 0.2 },
            GmmComponent { mean: vec![2.0, 0.0], variance: 0.16, weight: 0.3 },
        ];
        Self::new(2, comps).expect("reference mixture is valid")
    }

    /// A single standard isotropic Gaussian centred at `mean`.
    pub fn single(mean: Vec<f64>, variance: f64) -> Result<Self> {
        let d = mean.len();
        Self::new(d, vec![GmmComponent::new(mean, variance, 1.0)?])
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn components(&self) -> &[GmmComponent] {
        &self.components
    }

    pub fn min_std_dev(&self) -> f64 {
        self.components.iter().map(GmmComponent::std_dev).fold(f64::INFINITY, f64::min)
    }

    /// Density at `x`; the caller guarantees `x.len() == d`.
    pub(crate) fn density_unchecked(&self, x: &[f64]) -> f64 {
        self.components.iter().map(|c| c.weighted_density(x)).sum()
    }

    /// Reflect the model through the hyperplane `normal . x = offset`.
    pub fn mirrored(&self, plane: &Hyperplane) -> Result<Self> {
        check_dim(self.dimension, plane.dimension())?;
        let components = self
            .components
            .iter()
            .map(|c| {
                let dist = plane.signed_distance(&c.mean);
                let mean = c.mean.iter().zip(&plane.normal).map(|(m, nv)| m - 2.0 * dist * nv).collect();
                GmmComponent { mean, ..c.clone() }
            })
            .collect();
        Ok(Self { dimension: self.dimension, components })
    }
}

/// Oriented hyperplane `{x : normal . x = offset}` with `S = {normal . x < offset}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    normal: Vec<f64>,
    offset: f64,
}

impl Hyperplane {
    /// `normal` must already have unit length.
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        if normal.is_empty() {
            return Err(Error::InvalidInput("hyperplane normal is empty".into()));
        }
        let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_NORMAL_TOL {
            return Err(Error::InvalidInput(format!("hyperplane normal must be a unit vector, norm = {norm}")));
        }
        if offset.is_nan() {
            return Err(Error::InvalidInput("hyperplane offset is NaN".into()));
        }
        Ok(Self { normal, offset })
    }

    /// Normalizes `normal` (and scales `offset` accordingly).
    pub fn from_unnormalized(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidInput("hyperplane normal must be nonzero".into()));
        }
        let normal = normal.iter().map(|v| v / norm).collect::<Vec<_>>();
        let renorm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        Self::new(normal.iter().map(|v| v / renorm).collect(), offset / norm)
    }

    /// The plane `x_axis = offset` in `R^d` (axis is zero-based).
    pub fn axis_aligned(dimension: usize, axis: usize, offset: f64) -> Result<Self> {
        if axis >= dimension {
            return Err(Error::InvalidInput(format!("axis {axis} out of range for dimension {dimension}")));
        }
        let mut normal = vec![0.0; dimension];
        normal[axis] = 1.0;
        Self::new(normal, offset)
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dimension(&self) -> usize {
        self.normal.len()
    }

    /// Same plane, opposite orientation: `S` and `S^c` swap.
    pub fn flipped(&self) -> Self {
        Self { normal: self.normal.iter().map(|v| -v).collect(), offset: -self.offset }
    }

    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    pub fn contains_in_s(&self, x: &[f64]) -> bool {
        dot(&self.normal, x) < self.offset
    }
}

/// `n` points in `R^d`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    data: Vec<f64>,
    n: usize,
    d: usize,
    seed: u64,
}

impl PointCloud {
    pub fn from_rows(rows: &[Vec<f64>], seed: u64) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("point cloud must contain at least one point".into()));
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::InvalidInput("points must have positive dimension".into()));
        }
        let mut data = Vec::with_capacity(n * d);
        for row in rows {
            check_dim(d, row.len())?;
            data.extend_from_slice(row);
        }
        Self::from_flat(data, d, seed)
    }

    pub fn from_flat(data: Vec<f64>, d: usize, seed: u64) -> Result<Self> {
        if d == 0 || data.is_empty() || data.len() % d != 0 {
            return Err(Error::InvalidInput("flat point buffer does not tile into rows".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("point cloud has non-finite entries".into()));
        }
        let n = data.len() / d;
        Ok(Self { data, n, d, seed })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mixture density `p(x)`.
pub fn pdf_eval(model: &GmmModel, x: &[f64]) -> Result<f64> {
    check_dim(model.dimension, x.len())?;
    Ok(model.density_unchecked(x))
}

/// Draws `n` i.i.d. points. The stream is ChaCha8 seeded with `seed`, so equal
/// seeds give bit-identical clouds on every platform.
pub fn sample(model: &GmmModel, n: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = model.dimension;
    let mut data = Vec::with_capacity(n * d);
    let last = model.components.len() - 1;
    for _ in 0..n {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = last;
        for (k, c) in model.components.iter().enumerate() {
            acc += c.weight;
            if u < acc {
                pick = k;
                break;
            }
        }
        let comp = &model.components[pick];
        let sd = comp.std_dev();
        for j in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            data.push(comp.mean[j] + sd * z);
        }
    }
    PointCloud::from_flat(data, d, seed)
}

/// Entry `i` is 1 iff point `i` lies strictly on the `S` side of `plane`.
pub fn indicator_from_boundary(cloud: &PointCloud, plane: &Hyperplane) -> Result<IndicatorSignal> {
    check_dim(plane.dimension(), cloud.dimension())?;
    let bits = cloud.rows().map(|x| plane.contains_in_s(x)).collect::<Vec<_>>();
    Ok(IndicatorSignal::from_bools(&bits))
}

/// Standard normal CDF.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

/// Probability mass of `S = {normal . x < offset}`; exact for isotropic components.
pub fn region_mass(model: &GmmModel, plane: &Hyperplane) -> Result<f64> {
    check_dim(model.dimension, plane.dimension())?;
    Ok(model
        .components
        .iter()
        .map(|c| c.weight * std_normal_cdf((plane.offset - dot(&plane.normal, &c.mean)) / c.std_dev()))
        .sum())
}
