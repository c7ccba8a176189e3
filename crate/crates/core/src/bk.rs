//! The orthospectrum function `F_n`: closed form for `n = 3`, its inverse,
//! a Monte-Carlo evaluator for general `n`, and the small/large-length
//! limiting constants.
//!
//! The orthogeodesic block is realized between the concentric hemispheres of
//! radii 1 and `R = e^ℓ` centred at the origin. A vector belongs to the block
//! when its geodesic has one endpoint inside the unit ball and the other
//! outside the radius-`R` ball; its contribution is the length of the piece of
//! geodesic between the two hemispheres. Each unordered pair of endpoints is
//! met by two oriented geodesics, so the integral over `|x| < 1 < R < |y|`
//! is counted twice.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GeneralizedSphere;
use crate::measure::{sharded_estimate, sphere_volume, MeasureEstimate};
use crate::special::{gamma_ratio, gamma_fn, harmonic, Dimension};

fn check_length(ell: f64) -> Result<()> {
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(Error::domain(format!("orthogeodesic length must be positive and finite, got {ell}")));
    }
    Ok(())
}

/// `F₃(ℓ) = 2π(ℓ + 1) / (e^{2ℓ} - 1)`.
pub fn f3_closed(ell: f64) -> Result<f64> {
    check_length(ell)?;
    Ok(2.0 * std::f64::consts::PI * (ell + 1.0) / (2.0 * ell).exp_m1())
}

/// The inverse of [`f3_closed`], by bisection on a bracketing interval.
pub fn f3_inverse(target: f64) -> Result<f64> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::domain(format!("F3 takes values in (0, inf), got {target}")));
    }
    let f = |l: f64| 2.0 * std::f64::consts::PI * (l + 1.0) / (2.0 * l).exp_m1();
    let (mut lo, mut hi) = (1.0, 1.0);
    while f(lo) < target {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::domain("target too large to invert"));
        }
    }
    while f(hi) > target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::domain("target too small to invert"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `lim_{ℓ→0} ℓ^{n-2} F_n(ℓ) = π^{(n-2)/2} H(n-2) Γ((n-2)/2) / (Γ((n-1)/2) Γ((n+1)/2))`.
pub fn small_length_constant(n: Dimension) -> Result<f64> {
    n.require_identity_range()?;
    let nf = n.as_f64();
    let pi_pow = std::f64::consts::PI.powf(0.5 * (nf - 2.0));
    let g = gamma_ratio(0.5 * (nf - 2.0), 0.5 * (nf - 1.0)) / gamma_fn(0.5 * (nf + 1.0))?;
    Ok(pi_pow * harmonic(u64::from(n.get() - 2)) * g)
}

/// `lim_{ℓ→∞} e^{(n-1)ℓ} F_n(ℓ) / ℓ = 2^{n-1} π^{(n-2)/2} Γ(n/2) / Γ((n+1)/2)²`.
pub fn large_length_constant(n: Dimension) -> Result<f64> {
    n.require_identity_range()?;
    let nf = n.as_f64();
    let pi_pow = std::f64::consts::PI.powf(0.5 * (nf - 2.0));
    let g = gamma_ratio(0.5 * nf, 0.5 * (nf + 1.0)) / gamma_fn(0.5 * (nf + 1.0))?;
    Ok(2f64.powi(n.get() as i32 - 1) * pi_pow * g)
}

/// An orthogeodesic of length `ell` realized as the common perpendicular of
/// the hemispheres of radii 1 and `e^ell` about the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthoblockConfig {
    pub n: Dimension,
    pub ell: f64,
}

impl OrthoblockConfig {
    pub fn new(n: Dimension, ell: f64) -> Result<Self> {
        n.require_identity_range()?;
        check_length(ell)?;
        Ok(OrthoblockConfig { n, ell })
    }

    pub fn hyperplanes(&self) -> (GeneralizedSphere, GeneralizedSphere) {
        let origin = vec![0.0; self.n.boundary_dim()];
        (
            GeneralizedSphere::Sphere { center: origin.clone(), radius: 1.0 },
            GeneralizedSphere::Sphere { center: origin, radius: self.ell.exp() },
        )
    }
}

/// Length of the piece of the geodesic with endpoints at squared distances
/// `a < 1` and `b > R²` from the origin lying between the unit hemisphere and
/// the radius-`R` hemisphere. It depends only on `a` and `b`; it is half the
/// log of the cross-ratio of the four squared radii.
pub fn block_length(a: f64, b: f64, r2: f64) -> f64 {
    let l = 0.5 * (((r2 - a) / (1.0 - a)).ln() + ((b - 1.0) / (b - r2)).ln());
    if l < 1e-12 {
        0.0
    } else {
        l
    }
}

/// Mixture of the uniform law and a law with density `∝ 1/(s + λ)` on
/// `(0, 1)`, which resolves integrable peaks at `s = 0` of width `λ`.
#[derive(Debug, Clone, Copy)]
struct EdgeMixture {
    lambda: f64,
    log_span: f64,
}

impl EdgeMixture {
    fn new(lambda: f64) -> Self {
        EdgeMixture { lambda, log_span: ((1.0 + lambda) / lambda).ln() }
    }

    /// Draw `s` together with its density.
    fn draw(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let pick: f64 = rng.random();
        let u: f64 = rng.random();
        let s = if pick < 0.5 { u } else { self.lambda * ((u * self.log_span).exp() - 1.0) };
        let s = s.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
        (s, 0.5 + 0.5 / ((s + self.lambda) * self.log_span))
    }
}

/// Monte-Carlo estimate of `F_n(ℓ)`.
///
/// Uses rotational symmetry: `x` and `y` are described by their radii and
/// the angle `φ` between them, with the remaining sphere factors integrated
/// analytically.
pub fn fn_numeric(n: Dimension, ell: f64, samples: u64, seed: u64) -> Result<MeasureEstimate> {
    let cfg = OrthoblockConfig::new(n, ell)?;
    let k = n.get() as i32;
    let big_r = cfg.ell.exp();
    let r2 = big_r * big_r;
    let lambda = ell.clamp(1e-6, 1.0);
    let radial = EdgeMixture::new(lambda);
    let angular = EdgeMixture::new(lambda / std::f64::consts::PI);
    let constant = 2.0 * 2f64.powi(k - 1) * sphere_volume(n.get() - 2) * sphere_volume(n.get() - 3)
        / sphere_volume(n.get() - 1);
    sharded_estimate(samples, seed, |rng| {
        let (s, qs) = radial.draw(rng);
        let (sp, qsp) = radial.draw(rng);
        let (w, qw) = angular.draw(rng);
        let rho_x = 1.0 - s;
        let rho_y = big_r / (1.0 - sp);
        let phi = std::f64::consts::PI * w;
        let (a, b) = (rho_x * rho_x, rho_y * rho_y);
        let length = block_length(a, b, r2);
        if length == 0.0 {
            return 0.0;
        }
        // |x - y|² via the law of cosines, written to avoid cancellation at φ → 0.
        let half = (0.5 * phi).sin();
        let dist2 = (rho_y - rho_x).powi(2) + 4.0 * rho_x * rho_y * half * half;
        let jacobian = rho_x.powi(k - 2) * rho_y.powi(k - 2) * phi.sin().powi(k - 3) * big_r / ((1.0 - sp) * (1.0 - sp))
            * std::f64::consts::PI;
        constant * length / dist2.powi(k - 1) * jacobian / (qs * qsp * qw)
    })
}

/// Evaluate `F_n` on a grid: closed form for `n = 3`, Monte Carlo otherwise.
pub fn fn_evaluate(n: Dimension, ell: f64, samples: u64, seed: u64) -> Result<MeasureEstimate> {
    if n.get() == 3 {
        return Ok(MeasureEstimate { value: f3_closed(ell)?, std_error: 0.0, samples: 0, seed });
    }
    fn_numeric(n, ell, samples, seed)
}

/// Outcome of [`fn_monotone_decreasing_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub n: Dimension,
    pub points: Vec<(f64, MeasureEstimate)>,
    /// True when every consecutive drop exceeds three joint standard errors
    /// (or is strictly positive for closed-form values).
    pub decreasing: bool,
}

/// Check that `F_n` decreases along a strictly increasing grid of lengths.
pub fn fn_monotone_decreasing_check(n: Dimension, grid: &[f64], samples: u64, seed: u64) -> Result<MonotoneReport> {
    if grid.len() < 3 {
        return Err(Error::domain("monotonicity check needs at least 3 grid points"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("grid must be strictly increasing"));
    }
    let points = grid
        .iter()
        .enumerate()
        .map(|(i, &l)| Ok((l, fn_evaluate(n, l, samples, seed.wrapping_add(i as u64))?)))
        .collect::<Result<Vec<_>>>()?;
    let decreasing = points.windows(2).all(|w| {
        let (a, b) = (&w[0].1, &w[1].1);
        let joint = a.std_error.hypot(b.std_error);
        a.value - b.value > 3.0 * joint
    });
    Ok(MonotoneReport { n, points, decreasing })
}
