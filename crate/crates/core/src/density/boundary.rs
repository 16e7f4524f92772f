//! Restriction of a mixture to a hyperplane: supremum search and
//! `(d-1)`-dimensional quadrature of density powers.
//!
//! On the plane `{offset * normal + B u}`, with `B` an orthonormal basis of
//! the normal's complement, each isotropic component restricts to an
//! isotropic Gaussian in `u` centred at `B^T mean`, scaled by
//! `exp(-dist^2 / (2 var))`. Both routines work on that restricted mixture.

use std::f64::consts::PI;

use super::{dot, GmmModel, Hyperplane};
use crate::error::{check_dim, Error, Result};

/// Relative agreement between successive quadrature refinements.
const QUAD_TARGET_RTOL: f64 = 1e-6;
/// Largest acceptable relative error estimate.
const QUAD_MAX_RTOL: f64 = 5e-3;
const QUAD_MAX_NODES: usize = 20_000_000;
/// Truncation radius of the quadrature patch, in component standard deviations.
const PATCH_STD_DEVS: f64 = 6.0;
const SUP_MAX_GRID: usize = 2_000_000;

// 8-point Gauss-Legendre rule on [-1, 1].
const GL_NODES: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL_WEIGHTS: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

/// A mixture restricted to a hyperplane, in plane coordinates `u in R^{d-1}`.
struct PlaneMixture {
    centers: Vec<Vec<f64>>,
    // log of weight * (2 pi var)^{-d/2} * exp(-dist^2 / (2 var))
    log_scales: Vec<f64>,
    variances: Vec<f64>,
    dim: usize,
}

impl PlaneMixture {
    fn new(model: &GmmModel, plane: &Hyperplane) -> Result<Self> {
        check_dim(model.dimension(), plane.dimension())?;
        let d = model.dimension();
        let basis = complement_basis(plane.normal());
        let mut centers = Vec::new();
        let mut log_scales = Vec::new();
        let mut variances = Vec::new();
        for c in model.components() {
            let dist = plane.signed_distance(&c.mean);
            centers.push(basis.iter().map(|b| dot(b, &c.mean)).collect());
            log_scales.push(
                c.weight.ln() - 0.5 * d as f64 * (2.0 * PI * c.variance).ln() - dist * dist / (2.0 * c.variance),
            );
            variances.push(c.variance);
        }
        Ok(Self { centers, log_scales, variances, dim: d - 1 })
    }

    fn density(&self, u: &[f64]) -> f64 {
        self.centers
            .iter()
            .zip(&self.log_scales)
            .zip(&self.variances)
            .map(|((mu, ls), v)| {
                let sq: f64 = u.iter().zip(mu).map(|(a, b)| (a - b) * (a - b)).sum();
                (ls - sq / (2.0 * v)).exp()
            })
            .sum()
    }

    fn max_log_scale(&self) -> f64 {
        self.log_scales.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Orthonormal basis of the orthogonal complement of a unit vector, by
/// Gram-Schmidt over the standard basis (skipping the most aligned axis).
pub(crate) fn complement_basis(normal: &[f64]) -> Vec<Vec<f64>> {
    let d = normal.len();
    let skip = (0..d)
        .max_by(|&a, &b| normal[a].abs().total_cmp(&normal[b].abs()))
        .unwrap_or(0);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d.saturating_sub(1));
    for axis in (0..d).filter(|&a| a != skip) {
        let mut v = vec![0.0; d];
        v[axis] = 1.0;
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            let proj = dot(&v, normal);
            v.iter_mut().zip(normal).for_each(|(x, nv)| *x -= proj * nv);
            for b in &basis {
                let proj = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, bv)| *x -= proj * bv);
            }
        }
        let norm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    basis
}

/// `sup_{s in plane} p(s)`.
///
/// Critical points of an isotropic mixture lie in the convex hull of its
/// means, so the search is confined to the affine span of the projected
/// means: a grid with step `min std / 20` over their bounding box, followed
/// by coordinate-wise golden-section refinement of the best node.
pub fn sup_on_boundary(model: &GmmModel, plane: &Hyperplane) -> Result<f64> {
    let mix = PlaneMixture::new(model, plane)?;
    if mix.dim == 0 {
        return Ok(mix.density(&[]));
    }
    let origin = mix.centers[0].clone();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for c in &mix.centers[1..] {
        let mut v: Vec<f64> = c.iter().zip(&origin).map(|(a, b)| a - b).collect();
        for _ in 0..2 {
            for b in &dirs {
                let proj = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, bv)| *x -= proj * bv);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-9 * (1.0 + dot(c, c).sqrt()) {
            v.iter_mut().for_each(|x| *x /= norm);
            dirs.push(v);
        }
    }
    let to_plane = |t: &[f64]| -> Vec<f64> {
        let mut u = origin.clone();
        for (ti, dir) in t.iter().zip(&dirs) {
            u.iter_mut().zip(dir).for_each(|(x, dv)| *x += ti * dv);
        }
        u
    };
    let r = dirs.len();
    if r == 0 {
        return Ok(mix.density(&origin));
    }

    // Bounding box of the projected means in span coordinates.
    let coords: Vec<Vec<f64>> = mix
        .centers
        .iter()
        .map(|c| {
            let shifted: Vec<f64> = c.iter().zip(&origin).map(|(a, b)| a - b).collect();
            dirs.iter().map(|d| dot(d, &shifted)).collect()
        })
        .collect();
    let lo: Vec<f64> = (0..r).map(|k| coords.iter().map(|c| c[k]).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = (0..r).map(|k| coords.iter().map(|c| c[k]).fold(f64::NEG_INFINITY, f64::max)).collect();

    let mut step = model.min_std_dev() / 20.0;
    let count_for = |s: f64| -> Vec<usize> { (0..r).map(|k| ((hi[k] - lo[k]) / s).ceil() as usize + 1).collect() };
    let mut counts = count_for(step);
    while counts.iter().product::<usize>() > SUP_MAX_GRID {
        step *= 1.5;
        counts = count_for(step);
    }

    let total: usize = counts.iter().product();
    let mut best_t = lo.clone();
    let mut best_val = f64::NEG_INFINITY;
    let mut t = vec![0.0; r];
    for flat in 0..total {
        let mut rem = flat;
        for k in 0..r {
            let idx = rem % counts[k];
            rem /= counts[k];
            t[k] = (lo[k] + idx as f64 * step).min(hi[k]);
        }
        let val = mix.density(&to_plane(&t));
        if val > best_val {
            best_val = val;
            best_t.clone_from(&t);
        }
    }

    // Golden-section sweeps along each span coordinate.
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _sweep in 0..4 {
        for k in 0..r {
            let eval = |x: f64, base: &[f64]| {
                let mut tt = base.to_vec();
                tt[k] = x;
                mix.density(&to_plane(&tt))
            };
            let (mut a, mut b) = (best_t[k] - step, best_t[k] + step);
            let mut x1 = b - phi * (b - a);
            let mut x2 = a + phi * (b - a);
            let mut f1 = eval(x1, &best_t);
            let mut f2 = eval(x2, &best_t);
            for _ in 0..80 {
                if f1 < f2 {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + phi * (b - a);
                    f2 = eval(x2, &best_t);
                } else {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - phi * (b - a);
                    f1 = eval(x1, &best_t);
                }
            }
            let x = 0.5 * (a + b);
            let v = eval(x, &best_t);
            if v > best_val {
                best_val = v;
                best_t[k] = x;
            }
        }
    }
    Ok(best_val)
}

/// `ln \int_{plane} p(s)^q ds`, see [`boundary_power_integral`].
///
/// The integrand is evaluated as `(p / p_ref)^q` with `p_ref` the largest
/// restricted component scale, so large exponents neither underflow nor
/// overflow. Returns `-inf` when the integral vanishes in double precision.
pub fn log_boundary_power_integral(model: &GmmModel, plane: &Hyperplane, q: f64) -> Result<f64> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::InvalidInput(format!("exponent must satisfy q >= 1, got {q}")));
    }
    let mix = PlaneMixture::new(model, plane)?;
    let log_ref = mix.max_log_scale();
    if mix.dim == 0 {
        return Ok(q * mix.density(&[]).ln());
    }
    if log_ref == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let integrand = |u: &[f64]| -> f64 {
        let rel: f64 = mix
            .centers
            .iter()
            .zip(&mix.log_scales)
            .zip(&mix.variances)
            .map(|((mu, ls), v)| {
                let sq: f64 = u.iter().zip(mu).map(|(a, b)| (a - b) * (a - b)).sum();
                (ls - log_ref - sq / (2.0 * v)).exp()
            })
            .sum();
        rel.powf(q)
    };

    let lo: Vec<f64> = (0..mix.dim)
        .map(|k| {
            mix.centers
                .iter()
                .zip(&mix.variances)
                .map(|(c, v)| c[k] - PATCH_STD_DEVS * v.sqrt())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let hi: Vec<f64> = (0..mix.dim)
        .map(|k| {
            mix.centers
                .iter()
                .zip(&mix.variances)
                .map(|(c, v)| c[k] + PATCH_STD_DEVS * v.sqrt())
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();

    // Start with panels no wider than the narrowest peak of p^q.
    let min_sd = mix.variances.iter().cloned().fold(f64::INFINITY, f64::min).sqrt() / q.sqrt();
    let widest = (0..mix.dim).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
    let mut panels = ((widest / min_sd).ceil() as usize).clamp(8, 1 << 16);
    let mut previous = tensor_gauss_legendre(&integrand, &lo, &hi, panels);
    let mut last_err = f64::INFINITY;
    loop {
        let next_panels = panels * 2;
        let nodes = (next_panels * 8).checked_pow(mix.dim as u32).unwrap_or(usize::MAX);
        let current = if nodes <= QUAD_MAX_NODES {
            Some(tensor_gauss_legendre(&integrand, &lo, &hi, next_panels))
        } else {
            None
        };
        match current {
            Some(cur) => {
                let err = rel_diff(cur, previous);
                if err <= QUAD_TARGET_RTOL {
                    return Ok(log_ref * q + cur.ln());
                }
                previous = cur;
                last_err = err;
                panels = next_panels;
            }
            None => {
                // Out of budget: accept the last refinement only if its
                // estimate is already inside the tolerance.
                if last_err <= QUAD_MAX_RTOL {
                    return Ok(log_ref * q + previous.ln());
                }
                return Err(Error::NumericalAccuracy(format!(
                    "boundary quadrature did not converge: relative error estimate {last_err:.3e} with {panels} panels per axis"
                )));
            }
        }
    }
}

/// `\int_{plane} p(s)^q ds` over the `(d-1)`-dimensional hyperplane.
///
/// Composite 8-point Gauss-Legendre on a tensor grid covering every
/// projected mean +/- 6 standard deviations; the panel count doubles until
/// two successive estimates agree to 1e-6 relative. Fails with a
/// numerical-accuracy error if the budget runs out above 0.5%.
pub fn boundary_power_integral(model: &GmmModel, plane: &Hyperplane, q: f64) -> Result<f64> {
    Ok(log_boundary_power_integral(model, plane, q)?.exp())
}

fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

fn tensor_gauss_legendre(f: &dyn Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64], panels: usize) -> f64 {
    let dim = lo.len();
    // per-axis nodes and weights
    let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..dim)
        .map(|k| {
            let h = (hi[k] - lo[k]) / panels as f64;
            let mut xs = Vec::with_capacity(panels * 8);
            let mut ws = Vec::with_capacity(panels * 8);
            for p in 0..panels {
                let mid = lo[k] + (p as f64 + 0.5) * h;
                for (node, weight) in GL_NODES.iter().zip(GL_WEIGHTS) {
                    xs.push(mid - 0.5 * h * node);
                    ws.push(0.5 * h * weight);
                    xs.push(mid + 0.5 * h * node);
                    ws.push(0.5 * h * weight);
                }
            }
            (xs, ws)
        })
        .collect();
    let per_axis = panels * 8;
    let total = per_axis.pow(dim as u32);
    let mut u = vec![0.0; dim];
    let mut sum = 0.0;
    for flat in 0..total {
        let mut rem = flat;
        let mut w = 1.0;
        for k in 0..dim {
            let idx = rem % per_axis;
            rem /= per_axis;
            u[k] = axes[k].0[idx];
            w *= axes[k].1[idx];
        }
        sum += w * f(&u);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{pdf_eval, GmmComponent};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn x_plane(c: f64) -> Hyperplane {
        Hyperplane::axis_aligned(2, 0, c).unwrap()
    }

    /// Dense scan of the line `x = c` for the maximum of `p`.
    fn line_scan_max(model: &GmmModel, c: f64) -> f64 {
        (0..=200_000)
            .map(|i| -10.0 + i as f64 * 1e-4)
            .map(|y| pdf_eval(model, &[c, y]).unwrap())
            .fold(0.0, f64::max)
    }

    #[test]
    fn complement_basis_is_orthonormal() {
        let n = [0.48, -0.6, 0.64];
        let b = complement_basis(&n);
        assert_eq!(b.len(), 2);
        for (i, u) in b.iter().enumerate() {
            assert!(dot(u, &n).abs() < 1e-15);
            for (j, v) in b.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(u, v) - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sup_reference_model_on_axis_planes() {
        let m = GmmModel::reference_2d();
        let s0 = sup_on_boundary(&m, &x_plane(0.0)).unwrap();
        assert!((s0 - pdf_eval(&m, &[0.0, 0.0]).unwrap()).abs() < 1e-15);
        assert!((s0 - 0.13279).abs() < 1e-5);
        let s2 = sup_on_boundary(&m, &x_plane(2.0)).unwrap();
        assert!((s2 - line_scan_max(&m, 2.0)).abs() < 1e-12);
        assert!((s2 - 0.3 / (2.0 * PI * 0.16)).abs() < 1e-3, "{s2}");
    }

    #[test]
    fn sup_of_single_gaussian_through_mean_is_peak() {
        for d in [2usize, 3, 4] {
            let m = GmmModel::single(vec![0.5; d], 0.3).unwrap();
            let plane = Hyperplane::from_unnormalized(vec![1.0; d], 0.5 * d as f64).unwrap();
            let s = sup_on_boundary(&m, &plane).unwrap();
            let peak = (2.0 * PI * 0.3).powf(-(d as f64) / 2.0);
            assert!((s - peak).abs() < 1e-12 * peak, "d={d}");
        }
    }

    #[test]
    fn sup_dominates_random_boundary_points() {
        // Off-axis plane with projected means spread along the line.
        let m = GmmModel::reference_2d();
        let plane = Hyperplane::from_unnormalized(vec![1.0, 0.7], 0.3).unwrap();
        let sup = sup_on_boundary(&m, &plane).unwrap();
        let basis = complement_basis(plane.normal());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let t: f64 = rng.random_range(-8.0..8.0);
            let x: Vec<f64> = (0..2).map(|j| plane.offset() * plane.normal()[j] + t * basis[0][j]).collect();
            assert!(pdf_eval(&m, &x).unwrap() <= sup * (1.0 + 1e-12));
        }
    }

    #[test]
    fn sup_in_three_dimensions_matches_random_search() {
        let comps = vec![
            GmmComponent::new(vec![0.0, 0.0, 0.0], 0.5, 0.4).unwrap(),
            GmmComponent::new(vec![1.0, 1.5, -0.5], 0.2, 0.35).unwrap(),
            GmmComponent::new(vec![-1.0, 0.5, 1.0], 0.3, 0.25).unwrap(),
        ];
        let m = GmmModel::new(3, comps).unwrap();
        let plane = Hyperplane::from_unnormalized(vec![0.2, -0.3, 1.0], 0.1).unwrap();
        let sup = sup_on_boundary(&m, &plane).unwrap();
        let basis = complement_basis(plane.normal());
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut best = 0.0f64;
        for _ in 0..10_000 {
            let (a, b): (f64, f64) = (rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
            let x: Vec<f64> =
                (0..3).map(|j| plane.offset() * plane.normal()[j] + a * basis[0][j] + b * basis[1][j]).collect();
            best = best.max(pdf_eval(&m, &x).unwrap());
        }
        assert!(sup >= best * (1.0 - 1e-12));
        assert!(sup < best * 1.02, "{sup} vs random best {best}");
    }

    #[test]
    fn slice_integral_of_single_gaussian() {
        for var in [0.25, 1.0, 2.0] {
            let m = GmmModel::single(vec![0.0, 0.0], var).unwrap();
            let v = boundary_power_integral(&m, &x_plane(0.0), 1.0).unwrap();
            let closed = (2.0 * PI * var).powf(-0.5);
            assert!((v - closed).abs() < 1e-7 * closed, "var={var}: {v} vs {closed}");
        }
    }

    #[test]
    fn integral_matches_monte_carlo_line_integral() {
        let m = GmmModel::reference_2d();
        let quad = boundary_power_integral(&m, &x_plane(0.0), 2.0).unwrap();
        // Uniform Monte-Carlo over y in [-6, 6].
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let draws = 400_000;
        let mc = (0..draws)
            .map(|_| {
                let y: f64 = rng.random_range(-6.0..6.0);
                pdf_eval(&m, &[0.0, y]).unwrap().powi(2)
            })
            .sum::<f64>()
            * 12.0
            / draws as f64;
        assert!((quad - mc).abs() < 0.01 * quad, "{quad} vs {mc}");
    }

    #[test]
    fn integral_far_plane_vanishes_and_rejects_small_exponent() {
        let m = GmmModel::reference_2d();
        assert!(boundary_power_integral(&m, &x_plane(1e6), 1.0).unwrap() < 1e-300);
        assert!(boundary_power_integral(&m, &x_plane(0.0), 0.5).is_err());
    }

    #[test]
    fn log_integral_survives_large_exponents() {
        let m = GmmModel::reference_2d();
        let l = log_boundary_power_integral(&m, &x_plane(0.0), 801.0).unwrap();
        assert!(l.is_finite() && l < -1000.0);
    }

    #[test]
    fn point_boundary_in_one_dimension() {
        let m = GmmModel::single(vec![0.0], 1.0).unwrap();
        let plane = Hyperplane::axis_aligned(1, 0, 0.5).unwrap();
        let p = pdf_eval(&m, &[0.5]).unwrap();
        assert!((sup_on_boundary(&m, &plane).unwrap() - p).abs() < 1e-15);
        assert!((boundary_power_integral(&m, &plane, 3.0).unwrap() - p.powi(3)).abs() < 1e-15);
    }
}
