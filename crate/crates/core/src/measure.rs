//! Liouville measure on the unit tangent bundle in geodesic-endpoint
//! coordinates, and a seeded, sharded Monte-Carlo integrator.
//!
//! Dimension conventions: in `H^n` (boundary `R^{n-1}`) the measure is
//! `dΩ = 2^{n-1} dx dy dt / |x - y|^{2n-2}`. Written for `H^{n+1}` (boundary
//! `R^n`) the same statement reads `2^n dx dy dt / |x - y|^{2n}`. Every
//! function here takes the ambient dimension `n` of `H^n`.
//!
//! Reproducibility: samples are split into fixed blocks of [`BLOCK_SIZE`].
//! Block `b` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `b`, and
//! block results are combined in block order. The estimate therefore depends
//! only on `(seed, samples)` and not on the number of worker threads.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist_sq, norm_sq, BoundaryPoint, Geodesic, HPoint, Isometry};
use crate::quadrature::TanhSinh;
use crate::special::{gamma_fn, Dimension, SQRT_PI};

/// Samples per deterministic block.
pub const BLOCK_SIZE: u64 = 1 << 14;

/// Half-space density `2^{n-1} / |x - y|^{2n-2}` of the Liouville measure on
/// `T¹H^n` (equivalently `2^n / |x - y|^{2n}` on `T¹H^{n+1}`).
pub fn utb_density_halfspace(x: &[f64], y: &[f64], n: Dimension) -> Result<f64> {
    if x.len() != n.boundary_dim() || y.len() != n.boundary_dim() {
        return Err(Error::domain(format!("endpoints must lie in R^{}", n.boundary_dim())));
    }
    let r2 = dist_sq(x, y);
    if !(r2 > 0.0) {
        return Err(Error::domain("geodesic endpoints coincide"));
    }
    Ok(density_from_dist_sq(r2, n.get()))
}

#[inline]
pub(crate) fn density_from_dist_sq(r2: f64, n: u32) -> f64 {
    2f64.powi(n as i32 - 1) / r2.powi(n as i32 - 1)
}

/// Ball-model density `2^{n-1} / |p - q|^{2n-2}` with respect to
/// `dω(p) dω(q) dt`, for unit vectors `p, q ∈ S^{n-1}`.
pub fn utb_density_ball(p: &[f64], q: &[f64], n: Dimension) -> Result<f64> {
    let dim = n.get() as usize;
    if p.len() != dim || q.len() != dim {
        return Err(Error::domain(format!("endpoints must lie on S^{}", dim - 1)));
    }
    for v in [p, q] {
        if (norm_sq(v) - 1.0).abs() > 1e-9 {
            return Err(Error::domain("ball-model endpoints must be unit vectors"));
        }
    }
    let r2 = dist_sq(p, q);
    if !(r2 > 0.0) {
        return Err(Error::domain("geodesic endpoints coincide"));
    }
    Ok(density_from_dist_sq(r2, n.get()))
}

/// Euclidean volume of the unit sphere `S^k ⊂ R^{k+1}`, `2π^{(k+1)/2} / Γ((k+1)/2)`.
/// `S^0` (two points) has volume 2.
pub fn sphere_volume(k: u32) -> f64 {
    let a = 0.5 * (f64::from(k) + 1.0);
    let mut pi_pow = std::f64::consts::PI.powi((k as i32 + 1) / 2);
    if k % 2 == 0 {
        pi_pow *= SQRT_PI;
    }
    2.0 * pi_pow / gamma_fn(a).expect("positive argument")
}

/// Volume of a hyperbolic ball of radius `r` in `H^n`,
/// `Vol(S^{n-1}) ∫₀^r sinh^{n-1}(ρ) dρ`.
pub fn hyperbolic_ball_volume(n: Dimension, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::domain("ball radius must be positive"));
    }
    let k = n.get() as i32 - 1;
    let radial = TanhSinh::default().integrate(0.0, r, |rho| rho.sinh().powi(k))?;
    Ok(sphere_volume(n.get() - 1) * radial.value)
}

/// Stereographic projection from the north pole, `p ↦ p' / (1 - p_n)`. It is
/// the boundary map of an isometry from the ball model to the upper
/// half-space taking the ball's centre to `e_n`.
pub fn cayley_boundary_map(p: &[f64]) -> BoundaryPoint {
    let (last, rest) = p.split_last().expect("non-empty vector");
    let denom = 1.0 - last;
    if denom <= 0.0 {
        BoundaryPoint::Infinity
    } else {
        BoundaryPoint::Finite(rest.iter().map(|c| c / denom).collect())
    }
}

/// Inverse of [`cayley_boundary_map`] on finite points.
pub fn inverse_cayley_boundary_map(x: &[f64]) -> Vec<f64> {
    let s = norm_sq(x);
    let mut p: Vec<f64> = x.iter().map(|c| 2.0 * c / (1.0 + s)).collect();
    p.push((s - 1.0) / (s + 1.0));
    p
}

/// A unit tangent vector in endpoint coordinates: the oriented geodesic from
/// `x` to `y` and the arc-length position `t` along it (see
/// [`Geodesic::point_at`] for the reference point).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitTangentVector {
    pub x: BoundaryPoint,
    pub y: BoundaryPoint,
    pub t: f64,
}

impl UnitTangentVector {
    pub fn geodesic(&self) -> Result<Geodesic> {
        Geodesic::new(&self.x, &self.y)
    }

    /// Base point in `H^n`.
    pub fn base_point(&self) -> Result<HPoint> {
        Ok(self.geodesic()?.point_at(self.t))
    }
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl MeasureEstimate {
    /// Number of joint standard errors separating two estimates.
    pub fn z_score(&self, other: &MeasureEstimate) -> f64 {
        let joint = self.std_error.hypot(other.std_error);
        if joint == 0.0 {
            if self.value == other.value {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - other.value).abs() / joint
        }
    }

    /// Number of standard errors separating the estimate from an exact value.
    pub fn z_score_exact(&self, exact: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.value == exact {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - exact).abs() / self.std_error
        }
    }

    pub fn scaled(self, factor: f64) -> MeasureEstimate {
        MeasureEstimate { value: self.value * factor, std_error: self.std_error * factor.abs(), ..self }
    }
}

#[derive(Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, w: f64) {
        self.count += 1;
        let delta = w - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (w - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let frac = other.count as f64 / count as f64;
        Moments {
            count,
            mean: self.mean + delta * frac,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * frac,
        }
    }
}

/// The generator used for block `block` of a run seeded with `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Average `weight(rng)` over `samples` draws, sharded deterministically.
pub fn sharded_estimate<F>(samples: u64, seed: u64, weight: F) -> Result<MeasureEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    if samples == 0 {
        return Err(Error::domain("sample count must be positive"));
    }
    let blocks = samples.div_ceil(BLOCK_SIZE);
    let per_block: Vec<Moments> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b);
            let count = BLOCK_SIZE.min(samples - b * BLOCK_SIZE);
            let mut m = Moments::default();
            for _ in 0..count {
                m.push(weight(&mut rng));
            }
            m
        })
        .collect();
    let total = per_block.into_iter().fold(Moments::default(), Moments::merge);
    if !total.mean.is_finite() || !total.m2.is_finite() {
        return Err(Error::domain("Monte-Carlo weights were not finite"));
    }
    let variance = if samples > 1 { total.m2 / (samples - 1) as f64 } else { 0.0 };
    Ok(MeasureEstimate { value: total.mean, std_error: (variance / samples as f64).sqrt(), samples, seed })
}

/// A sampling distribution on unit tangent vectors with finite endpoints.
pub trait Proposal: Sync {
    /// Dimension of the boundary `R^{n-1}`.
    fn boundary_dim(&self) -> usize;

    /// Draw `(x, y, t)` and return it with `1 / pdf` at the draw.
    fn sample(&self, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>, f64, f64);

    /// Arc-length parameter of the draw in [`Geodesic::point_at`] convention,
    /// given the proposal's own `t`.
    fn reference_shift(&self, _geodesic: &Geodesic) -> f64 {
        0.0
    }
}

/// Uniform sampling over a box in `(x, y, t)` coordinates, with `t` measured
/// from the reference point of [`Geodesic::point_at`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateBox {
    pub x_lo: Vec<f64>,
    pub x_hi: Vec<f64>,
    pub y_lo: Vec<f64>,
    pub y_hi: Vec<f64>,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl CoordinateBox {
    pub fn volume(&self) -> f64 {
        let side = |lo: &[f64], hi: &[f64]| lo.iter().zip(hi).map(|(a, b)| (b - a).max(0.0)).product::<f64>();
        side(&self.x_lo, &self.x_hi) * side(&self.y_lo, &self.y_hi) * (self.t_hi - self.t_lo).max(0.0)
    }

    fn validate(&self) -> Result<()> {
        let k = self.x_lo.len();
        if [self.x_hi.len(), self.y_lo.len(), self.y_hi.len()].iter().any(|&l| l != k) {
            return Err(Error::domain("box corners have inconsistent dimensions"));
        }
        let v = self.volume();
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::domain("proposal box has zero or non-finite volume"));
        }
        Ok(())
    }
}

impl Proposal for CoordinateBox {
    fn boundary_dim(&self) -> usize {
        self.x_lo.len()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>, f64, f64) {
        let mut draw = |lo: &[f64], hi: &[f64]| -> Vec<f64> {
            lo.iter().zip(hi).map(|(a, b)| a + (b - a) * rng.random::<f64>()).collect()
        };
        let x = draw(&self.x_lo, &self.x_hi);
        let y = draw(&self.y_lo, &self.y_hi);
        let t = self.t_lo + (self.t_hi - self.t_lo) * rng.random::<f64>();
        (x, y, t, self.volume())
    }
}

/// Importance sampler concentrated near a point `center` of `H^n`.
///
/// Each endpoint is the image of a uniform point of `S^{n-1}` under the
/// stereographic map, moved so that the ball's centre lands on `center`.
/// Then `t` is uniform within `t_half_width` of the point of the geodesic
/// nearest to `center`. For sets of vectors based near `center` the weights
/// stay bounded.
#[derive(Debug, Clone, PartialEq)]
pub struct StereographicProposal {
    pub center: HPoint,
    pub t_half_width: f64,
}

impl StereographicProposal {
    pub fn new(center: HPoint, t_half_width: f64) -> Result<Self> {
        if !(t_half_width > 0.0) || !t_half_width.is_finite() {
            return Err(Error::domain("t half-width must be positive"));
        }
        Ok(StereographicProposal { center, t_half_width })
    }

    fn endpoint(&self, rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
        let k = self.center.x.len();
        loop {
            let g: Vec<f64> = (0..=k).map(|_| StandardNormal.sample(rng)).collect();
            let len = norm_sq(&g).sqrt();
            let p_n = g[k] / len;
            if p_n >= 1.0 || len == 0.0 {
                continue;
            }
            let scale = 1.0 / (len * (1.0 - p_n));
            let unit: Vec<f64> = g[..k].iter().map(|c| c * scale).collect();
            let s = norm_sq(&unit);
            // Inverse density of the stereographic image of the uniform law,
            // rescaled by the dilation h^{k}.
            let inv_pdf = sphere_volume(k as u32) * (0.5 * (1.0 + s)).powi(k as i32) * self.center.h.powi(k as i32);
            let x = unit.iter().zip(&self.center.x).map(|(u, c)| c + self.center.h * u).collect();
            return (x, inv_pdf);
        }
    }
}

impl Proposal for StereographicProposal {
    fn boundary_dim(&self) -> usize {
        self.center.x.len()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>, f64, f64) {
        let (x, wx) = self.endpoint(rng);
        let (y, wy) = self.endpoint(rng);
        let tau = self.t_half_width * (2.0 * rng.random::<f64>() - 1.0);
        (x, y, tau, wx * wy * 2.0 * self.t_half_width)
    }

    fn reference_shift(&self, geodesic: &Geodesic) -> f64 {
        geodesic.closest_parameter(&self.center).0
    }
}

/// Monte-Carlo estimate of `∫_R dΩ` for the set `R` of unit tangent vectors
/// accepted by `region`, which must vanish outside the proposal's support.
pub fn mc_measure<P, F>(region: F, proposal: &P, n: Dimension, samples: u64, seed: u64) -> Result<MeasureEstimate>
where
    P: Proposal + ?Sized,
    F: Fn(&UnitTangentVector) -> bool + Sync,
{
    if proposal.boundary_dim() != n.boundary_dim() {
        return Err(Error::domain("proposal dimension does not match n"));
    }
    sharded_estimate(samples, seed, |rng| {
        let (x, y, t, inv_pdf) = proposal.sample(rng);
        let r2 = dist_sq(&x, &y);
        if r2 == 0.0 {
            return 0.0;
        }
        let t = match Geodesic::between(&x, &y) {
            Ok(g) => t + proposal.reference_shift(&g),
            Err(_) => return 0.0,
        };
        let v = UnitTangentVector { x: BoundaryPoint::Finite(x), y: BoundaryPoint::Finite(y), t };
        if region(&v) {
            density_from_dist_sq(r2, n.get()) * inv_pdf
        } else {
            0.0
        }
    })
}

/// [`mc_measure`] over a [`CoordinateBox`], rejecting boxes of zero volume.
pub fn mc_measure_box<F>(region: F, proposal: &CoordinateBox, n: Dimension, samples: u64, seed: u64) -> Result<MeasureEstimate>
where
    F: Fn(&UnitTangentVector) -> bool + Sync,
{
    proposal.validate()?;
    mc_measure(region, proposal, n, samples, seed)
}

/// Indicator of "based within hyperbolic distance `r` of `center`".
pub fn based_in_ball(center: HPoint, r: f64) -> impl Fn(&UnitTangentVector) -> bool + Sync {
    let cosh_r = r.cosh();
    move |v: &UnitTangentVector| match v.geodesic() {
        Ok(g) => g.cosh_distance_at(v.t, &center) <= cosh_r,
        Err(_) => false,
    }
}

/// Outcome of [`liouville_invariance_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub n: Dimension,
    pub radius: f64,
    pub exact: f64,
    /// The untransformed region first, then one estimate per isometry.
    pub estimates: Vec<MeasureEstimate>,
    pub max_pairwise_z: f64,
    pub max_exact_z: f64,
}

/// Estimate the measure of `g(R)` for random isometries `g`, where `R` is
/// the set of vectors based within `r` of `e_n` whose forward endpoint has
/// positive first coordinate. The cut makes `R` non-isotropic, so rotations
/// are exercised too; its exact measure is half that of the ball.
///
/// Every estimate reuses `seed`, so the runs share their random numbers and
/// differ only through the geometry.
pub fn liouville_invariance_check(n: Dimension, r: f64, isometries: usize, samples: u64, seed: u64) -> Result<InvarianceReport> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain("ball radius must be positive"));
    }
    let k = n.boundary_dim();
    let mut iso_rng = block_rng(seed, 1 << 62);
    let mut maps = vec![Isometry::identity()];
    maps.extend((0..isometries).map(|_| Isometry::random(k, &mut iso_rng)));
    let base = HPoint::origin(k);
    let estimates = maps
        .iter()
        .map(|g| {
            let center = g.apply_point(&base);
            let back = g.inverse();
            let in_ball = based_in_ball(center.clone(), r);
            let proposal = StereographicProposal::new(center, r)?;
            let region = |v: &UnitTangentVector| {
                in_ball(v)
                    && matches!(back.apply_boundary(&v.y, k), BoundaryPoint::Finite(ref y) if y[0] > 0.0)
            };
            mc_measure(region, &proposal, n, samples, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    let exact = 0.5 * sphere_volume(n.get() - 1) * hyperbolic_ball_volume(n, r)?;
    let mut max_pairwise_z: f64 = 0.0;
    for (i, a) in estimates.iter().enumerate() {
        for b in &estimates[i + 1..] {
            max_pairwise_z = max_pairwise_z.max(a.z_score(b));
        }
    }
    let max_exact_z = estimates.iter().map(|e| e.z_score_exact(exact)).fold(0.0, f64::max);
    Ok(InvarianceReport { n, radius: r, exact, estimates, max_pairwise_z, max_exact_z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dim(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn densities() {
        assert_eq!(utb_density_halfspace(&[0.0, 0.0], &[1.0, 0.0], dim(3)).unwrap(), 4.0);
        assert_eq!(utb_density_halfspace(&[0.0, 0.0], &[0.0, 2.0], dim(3)).unwrap(), 0.25);
        assert_eq!(utb_density_halfspace(&[0.0], &[1.0], dim(2)).unwrap(), 2.0);
        assert!(utb_density_halfspace(&[1.0, 1.0], &[1.0, 1.0], dim(3)).is_err());
        assert_eq!(utb_density_ball(&[0.0, 0.0, 1.0], &[0.0, 0.0, -1.0], dim(3)).unwrap(), 0.25);
        let d = utb_density_ball(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], dim(3)).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
        assert!(utb_density_ball(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0], dim(3)).is_err());
        assert!(utb_density_ball(&[2.0, 0.0, 0.0], &[1.0, 0.0, 0.0], dim(3)).is_err());
    }

    #[test]
    fn sphere_volumes() {
        assert!((sphere_volume(1) - 2.0 * PI).abs() < 1e-15);
        assert!((sphere_volume(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-14);
        assert_eq!(sphere_volume(0), 2.0);
    }

    #[test]
    fn hyperbolic_ball_volume_n3() {
        let v = hyperbolic_ball_volume(dim(3), 0.5).unwrap();
        assert!((v - PI * (1f64.sinh() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn cayley_round_trip() {
        let p = [0.6, 0.0, 0.8];
        let x = cayley_boundary_map(&p);
        let back = inverse_cayley_boundary_map(x.coords().unwrap());
        assert!(dist_sq(&p, &back) < 1e-28);
        assert_eq!(cayley_boundary_map(&[0.0, 0.0, 1.0]), BoundaryPoint::Infinity);
    }

    #[test]
    fn empty_region_is_exactly_zero() {
        let b = CoordinateBox {
            x_lo: vec![-1.0, -1.0],
            x_hi: vec![0.0, 0.0],
            y_lo: vec![1.0, 1.0],
            y_hi: vec![2.0, 2.0],
            t_lo: -1.0,
            t_hi: 1.0,
        };
        let e = mc_measure_box(|_| false, &b, dim(3), 10_000, 1).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn zero_volume_box_rejected() {
        let b = CoordinateBox {
            x_lo: vec![0.0],
            x_hi: vec![0.0],
            y_lo: vec![1.0],
            y_hi: vec![2.0],
            t_lo: 0.0,
            t_hi: 1.0,
        };
        assert!(mc_measure_box(|_| true, &b, dim(2), 100, 1).is_err());
        assert!(sharded_estimate(0, 1, |_| 1.0).is_err());
    }

    #[test]
    fn product_structure_against_quadrature() {
        // n = 2: x ∈ [-2, -1], y ∈ [1, 2], t ∈ [0, 3].
        let b = CoordinateBox {
            x_lo: vec![-2.0],
            x_hi: vec![-1.0],
            y_lo: vec![1.0],
            y_hi: vec![2.0],
            t_lo: 0.0,
            t_hi: 3.0,
        };
        let est = mc_measure_box(|_| true, &b, dim(2), 400_000, 7).unwrap();
        let q = TanhSinh::default();
        let endpoint = q
            .integrate(-2.0, -1.0, |x| q.integrate(1.0, 2.0, |y| 2.0 / ((y - x) * (y - x))).unwrap().value)
            .unwrap()
            .value;
        assert!(est.z_score_exact(3.0 * endpoint) < 3.0, "{est:?} vs {}", 3.0 * endpoint);
        // Closed form of the endpoint integral: 2 log(9/8).
        assert!((endpoint - 2.0 * (9.0f64 / 8.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn ball_region_half_space() {
        let n = dim(3);
        let r = 0.5;
        let center = HPoint::origin(2);
        let prop = StereographicProposal::new(center.clone(), r).unwrap();
        let est = mc_measure(based_in_ball(center, r), &prop, n, 400_000, 3).unwrap();
        let exact = 4.0 * PI * PI * (1f64.sinh() - 1.0);
        assert!(est.z_score_exact(exact) < 3.0, "{est:?} vs {exact}");
        // The classical constant (2^{n-2} times smaller) is far outside.
        assert!(est.z_score_exact(exact / 2.0) > 20.0);
    }

    #[test]
    fn ball_model_agrees_with_half_space() {
        // Ball model: p, q uniform on S², t uniform in [-r, r] from the point
        // nearest the centre; cosh dist = cosh τ / sin(θ/2).
        let n = dim(3);
        let r = 0.5;
        let t_half = r;
        let ball = sharded_estimate(400_000, 17, |rng| {
            let mut unit = || {
                let g: Vec<f64> = (0..3).map(|_| StandardNormal.sample(rng)).collect();
                let l = norm_sq(&g).sqrt();
                g.into_iter().map(|c| c / l).collect::<Vec<f64>>()
            };
            let p = unit();
            let q = unit();
            let tau = t_half * (2.0 * rng.random::<f64>() - 1.0);
            let half_chord = 0.5 * dist_sq(&p, &q).sqrt();
            if half_chord == 0.0 {
                return 0.0;
            }
            let inside = tau.cosh() / half_chord <= r.cosh();
            let w = (4.0 * PI).powi(2) * 2.0 * t_half;
            if inside {
                utb_density_ball(&p, &q, n).unwrap() * w
            } else {
                0.0
            }
        })
        .unwrap();
        let exact = 4.0 * PI * PI * (1f64.sinh() - 1.0);
        assert!(ball.z_score_exact(exact) < 3.0, "{ball:?}");

        // Push the same ball samples through the boundary map and test
        // membership with half-space geometry instead.
        let e_n = HPoint::origin(2);
        let pushed = sharded_estimate(400_000, 17, |rng| {
            let mut unit = || {
                let g: Vec<f64> = (0..3).map(|_| StandardNormal.sample(rng)).collect();
                let l = norm_sq(&g).sqrt();
                g.into_iter().map(|c| c / l).collect::<Vec<f64>>()
            };
            let p = unit();
            let q = unit();
            let tau = t_half * (2.0 * rng.random::<f64>() - 1.0);
            let (BoundaryPoint::Finite(x), BoundaryPoint::Finite(y)) = (cayley_boundary_map(&p), cayley_boundary_map(&q))
            else {
                return 0.0;
            };
            let Ok(g) = Geodesic::between(&x, &y) else { return 0.0 };
            let s = g.closest_parameter(&e_n).0 + tau;
            let inside = g.cosh_distance_at(s, &e_n) <= r.cosh();
            let w = (4.0 * PI).powi(2) * 2.0 * t_half;
            if inside {
                utb_density_ball(&p, &q, n).unwrap() * w
            } else {
                0.0
            }
        })
        .unwrap();
        assert!((pushed.value - ball.value).abs() <= 1e-9 * ball.value, "{pushed:?} vs {ball:?}");
    }

    #[test]
    fn determinism_and_worker_independence() {
        let center = HPoint::origin(2);
        let prop = StereographicProposal::new(center.clone(), 0.5).unwrap();
        let run = || mc_measure(based_in_ball(center.clone(), 0.5), &prop, dim(3), 50_000, 99).unwrap();
        let a = run();
        let b = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
        let c = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(run);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_error.to_bits(), c.std_error.to_bits());
    }

    #[test]
    fn standard_error_halves_with_four_times_the_samples() {
        let f = |rng: &mut ChaCha8Rng| rng.random::<f64>();
        let small = sharded_estimate(100_000, 4, f).unwrap();
        let large = sharded_estimate(400_000, 4, f).unwrap();
        let ratio = small.std_error / large.std_error;
        assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
        assert!((small.std_error - (1.0f64 / 12.0 / 100_000.0).sqrt()).abs() < 1e-5);
    }

    #[test]
    fn estimate_json() {
        let e = MeasureEstimate { value: 1.5, std_error: 0.25, samples: 10, seed: 3 };
        assert_eq!(serde_json::to_string(&e).unwrap(), r#"{"value":1.5,"std_error":0.25,"samples":10,"seed":3}"#);
    }
}
