//! The cusp term of the volume identity.
//!
//! For a boundary cusp normalized so that its horoball is `{x_n > 1}` and
//! the two boundary hyperplanes are `x₁ = 0` and `x₁ = d`, the set `V_c` of
//! vectors whose geodesic escapes through the cusp has volume
//!
//! ```text
//! Vol(V_c) = 2 ∫_{y ∈ U₊} ∫_{x ∈ D} 2^{n-1} L(x, y) / |x - y|^{2n-2} dx dy
//! ```
//!
//! with `D = (-∞, 0) × D'`. Integrating out the transverse directions leaves
//! the two-dimensional integral [`CuspIntegralKind::Main`], which splits as
//! `I1 - I2 - I3`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::apollonian::OrthospectrumEntry;
use crate::bk::{f3_closed, fn_numeric};
use crate::error::{Error, Result};
use crate::geometry::{slab_length_unchecked, CuspData};
use crate::measure::{sharded_estimate, MeasureEstimate};
use crate::quadrature::{Node, QuadratureResult, TanhSinh};
use crate::special::{cusp_coefficient, gamma_ratio, harmonic, Dimension, SQRT_PI};

/// The integrals appearing in the evaluation of `Vol(V_c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CuspIntegralKind {
    /// `∫_{-∞}^0 ∫_d^∞ log(y(x-d) / (x(y-d))) / (y-x)^n dy dx`
    Main,
    /// `∫∫ log(d - x) / (y-x)^n`
    I1,
    /// `∫∫ log(-x/y) / (y-x)^n`
    I2,
    /// `∫∫ log(y - d) / (y-x)^n`
    I3,
    /// `∫₀¹ log(1/w - 1) w^m dw`
    Harmonic(u32),
    /// `∫_{-π/2}^{π/2} cos^{k-2}θ dθ`
    Cosine(u32),
}

impl CuspIntegralKind {
    /// True for the kinds that depend on `n` and `d`.
    pub fn is_slab_integral(self) -> bool {
        matches!(self, CuspIntegralKind::Main | CuspIntegralKind::I1 | CuspIntegralKind::I2 | CuspIntegralKind::I3)
    }
}

impl std::fmt::Display for CuspIntegralKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CuspIntegralKind::Main => write!(f, "main"),
            CuspIntegralKind::I1 => write!(f, "i1"),
            CuspIntegralKind::I2 => write!(f, "i2"),
            CuspIntegralKind::I3 => write!(f, "i3"),
            CuspIntegralKind::Harmonic(m) => write!(f, "harmonic({m})"),
            CuspIntegralKind::Cosine(k) => write!(f, "cosine({k})"),
        }
    }
}

fn check_slab_args(n: Dimension, d: f64) -> Result<()> {
    n.require_identity_range()?;
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::domain(format!("slab width must be positive, got {d}")));
    }
    Ok(())
}

/// Closed-form value of a cusp integral. `n` and `d` are ignored by the
/// `Harmonic` and `Cosine` kinds.
pub fn cusp_integral_closed(kind: CuspIntegralKind, n: Dimension, d: f64) -> Result<f64> {
    let nf = n.as_f64();
    let slab = |numerator: f64, extra: f64| numerator / ((nf - 1.0) * (nf - 2.0) * extra * d.powf(nf - 2.0));
    match kind {
        CuspIntegralKind::Main => {
            check_slab_args(n, d)?;
            Ok(slab(2.0 * harmonic(u64::from(n.get() - 2)), 1.0))
        }
        CuspIntegralKind::I1 => {
            check_slab_args(n, d)?;
            Ok(slab((nf - 2.0) * d.ln() + 1.0, nf - 2.0))
        }
        CuspIntegralKind::I2 => {
            check_slab_args(n, d)?;
            Ok(slab(-harmonic(u64::from(n.get() - 2)), 1.0))
        }
        CuspIntegralKind::I3 => {
            check_slab_args(n, d)?;
            Ok(slab(d.ln() - harmonic(u64::from(n.get() - 3)), 1.0))
        }
        CuspIntegralKind::Harmonic(m) => Ok(-harmonic(u64::from(m)) / (f64::from(m) + 1.0)),
        CuspIntegralKind::Cosine(k) => {
            if k < 3 {
                return Err(Error::domain(format!("cosine integral needs k >= 3, got {k}")));
            }
            let kf = f64::from(k);
            Ok(SQRT_PI * gamma_ratio(0.5 * (kf - 1.0), 0.5 * kf))
        }
    }
}

/// Independent numerical evaluation of a cusp integral by tanh-sinh
/// quadrature of the literal integrand. The slab integrals are compactified
/// onto the unit square, where only integrable logarithmic endpoint
/// singularities remain.
pub fn cusp_integral_quadrature(kind: CuspIntegralKind, n: Dimension, d: f64, tol: f64) -> Result<QuadratureResult> {
    if !(tol >= 1e-10) {
        return Err(Error::domain(format!("quadrature tolerance must be at least 1e-10, got {tol}")));
    }
    // Validates the (kind, n) combination.
    cusp_integral_closed(kind, n, d)?;
    let q = TanhSinh::new(tol);
    match kind {
        CuspIntegralKind::Harmonic(m) => {
            let m = m as i32;
            q.integrate_nodes(0.0, 1.0, |w| (w.from_right.ln() - w.from_left.ln()) * w.x.powi(m))
        }
        CuspIntegralKind::Cosine(k) => {
            let p = k as i32 - 2;
            let half_pi = std::f64::consts::FRAC_PI_2;
            // cos θ = sin(distance to the nearer endpoint), exact near ±π/2.
            q.integrate_nodes(-half_pi, half_pi, |t| t.from_left.min(t.from_right).sin().powi(p))
        }
        _ => {
            let k = n.get() as i32;
            // With a = -x, b = y - d, write a = r t, b = r (1 - t) and
            // r = ρ/(1-ρ). The measure r dr dt / (r + d)^n becomes
            // ρ (1-ρ)^{n-3} / (ρ + d(1-ρ))^n dρ dt.
            q.integrate_2d((0.0, 1.0), (0.0, 1.0), move |t: Node, rho: Node| {
                let (p, pc) = (rho.from_left, rho.from_right);
                let ln_r = p.ln() - pc.ln();
                let ln_a = ln_r + t.from_left.ln();
                let ln_b = ln_r + t.from_right.ln();
                // ln(d + r t), written so that r t ≪ d keeps full precision
                let ln_d_plus = |frac: f64| d.ln() + (p * frac / (pc * d)).ln_1p();
                let log_term = match kind {
                    CuspIntegralKind::Main => ln_d_plus(t.from_right) + ln_d_plus(t.from_left) - ln_a - ln_b,
                    CuspIntegralKind::I1 => ln_d_plus(t.from_left),
                    CuspIntegralKind::I2 => ln_a - ln_d_plus(t.from_right),
                    _ => ln_b,
                };
                log_term * p * pc.powi(k - 3) / (p + d * pc).powi(k)
            })
        }
    }
}

/// `∫_{R^{n-2}} dw / (1 + |w|²)^{n-1}`, assembled from cosine integrals by
/// integrating one transverse coordinate at a time.
pub fn transverse_factor(n: Dimension) -> Result<f64> {
    n.require_identity_range()?;
    (1..=n.get() - 2).try_fold(1.0, |acc, j| Ok(acc * cusp_integral_closed(CuspIntegralKind::Cosine(2 * n.get() - 1 - j), n, 1.0)?))
}

/// Closed-form `Vol(V_c) = 2^n π^{(n-2)/2} H(n-2) Γ(n/2) / ((n-2) Γ(n-1)) · vol / d^{n-1}`.
pub fn vol_vc_closed(c: &CuspData) -> Result<f64> {
    c.n.require_identity_range()?;
    let nf = c.n.as_f64();
    let k = c.n.get();
    let coefficient = 2f64.powi(k as i32) * std::f64::consts::PI.powf(0.5 * (nf - 2.0)) * harmonic(u64::from(k - 2))
        * gamma_ratio(0.5 * nf, nf - 1.0)
        / (nf - 2.0);
    Ok(coefficient * c.invariant_ratio())
}

/// `Vol(V_c)` from the quadrature of the Main integral times the transverse
/// factor and `Vol_E(D') = (n-1) vol / d`.
pub fn vol_vc_quadrature(c: &CuspData, tol: f64) -> Result<f64> {
    let main = cusp_integral_quadrature(CuspIntegralKind::Main, c.n, c.d, tol)?.value;
    let nf = c.n.as_f64();
    let cross_section = (nf - 1.0) * c.vol / c.d;
    // 2 orientations · 2^{n-1} · Vol_E(D') · transverse factor · ½ (from L = ½ log).
    Ok(2f64.powi(c.n.get() as i32 - 1) * cross_section * transverse_factor(c.n)? * main)
}

/// A cross-section `D' ⊂ R^{n-2}` of the cusp, as a union of disjoint
/// axis-aligned boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    pub boxes: Vec<(Vec<f64>, Vec<f64>)>,
}

impl CrossSection {
    pub fn from_boxes(boxes: Vec<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        let Some(first) = boxes.first() else {
            return Err(Error::domain("cross-section needs at least one box"));
        };
        let dim = first.0.len();
        for (lo, hi) in &boxes {
            if lo.len() != dim || hi.len() != dim || lo.iter().zip(hi).any(|(a, b)| !(a < b)) {
                return Err(Error::domain("cross-section boxes must be non-degenerate and of equal dimension"));
            }
        }
        Ok(CrossSection { boxes })
    }

    /// A cube of the given volume in `R^{dim}`.
    pub fn cube(dim: usize, volume: f64) -> Result<Self> {
        if !(volume > 0.0) {
            return Err(Error::domain("cross-section volume must be positive"));
        }
        let side = volume.powf(1.0 / dim.max(1) as f64);
        CrossSection::from_boxes(vec![(vec![0.0; dim], vec![side; dim])])
    }

    /// An L-shaped planar region of the given area: a unit-aspect square of
    /// side `2s` with its upper-right `s × s` quarter removed.
    pub fn l_shape(area: f64) -> Result<Self> {
        let s = (area / 3.0).sqrt();
        CrossSection::from_boxes(vec![(vec![0.0, 0.0], vec![2.0 * s, s]), (vec![0.0, s], vec![s, 2.0 * s])])
    }

    pub fn dim(&self) -> usize {
        self.boxes[0].0.len()
    }

    fn box_volume(b: &(Vec<f64>, Vec<f64>)) -> f64 {
        b.0.iter().zip(&b.1).map(|(l, h)| h - l).product()
    }

    pub fn volume(&self) -> f64 {
        self.boxes.iter().map(Self::box_volume).sum()
    }

    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let total = self.volume();
        let mut pick = rng.random::<f64>() * total;
        let mut chosen = &self.boxes[self.boxes.len() - 1];
        for b in &self.boxes {
            let v = Self::box_volume(b);
            if pick < v {
                chosen = b;
                break;
            }
            pick -= v;
        }
        for (o, (l, h)) in out.iter_mut().zip(chosen.0.iter().zip(&chosen.1)) {
            *o = l + (h - l) * rng.random::<f64>();
        }
    }
}

/// Monte-Carlo evaluation of `Vol(V_c)` with a cubical cross-section of
/// volume `(n-1) vol / d`.
pub fn vol_vc_montecarlo(c: &CuspData, samples: u64, seed: u64) -> Result<MeasureEstimate> {
    c.n.require_identity_range()?;
    let dim = c.n.get() as usize - 2;
    let cross = CrossSection::cube(dim, (c.n.as_f64() - 1.0) * c.vol / c.d)?;
    vol_vc_montecarlo_with(c, &cross, samples, seed)
}

/// Monte-Carlo evaluation of `Vol(V_c)` over an explicit cross-section,
/// whose volume must equal `(n-1) vol / d`.
///
/// `x₁ = -d s/(1-s)` and `y₁ = d + d v/(1-v)` with `s, v` uniform; `x'` is
/// uniform in `D'`, and each transverse offset `y_i - x_i` is Cauchy with
/// scale `y₁ - x₁`, which makes the weights bounded up to the logarithm in
/// `L`.
pub fn vol_vc_montecarlo_with(c: &CuspData, cross: &CrossSection, samples: u64, seed: u64) -> Result<MeasureEstimate> {
    c.n.require_identity_range()?;
    let k = c.n.get() as i32;
    let dim = c.n.get() as usize - 2;
    if cross.dim() != dim {
        return Err(Error::domain(format!("cross-section must live in R^{dim}")));
    }
    let expected = (c.n.as_f64() - 1.0) * c.vol / c.d;
    let area = cross.volume();
    if ((area - expected) / expected).abs() > 1e-9 {
        return Err(Error::domain(format!(
            "cross-section volume {area} does not match (n-1) vol / d = {expected}"
        )));
    }
    let d = c.d;
    let pi = std::f64::consts::PI;
    let constant = 2.0 * 2f64.powi(k - 1) * area;
    sharded_estimate(samples, seed, |rng| {
        let s: f64 = rng.random();
        let v: f64 = rng.random();
        let (sc, vc) = (1.0 - s, 1.0 - v);
        if s == 0.0 || v == 0.0 {
            return 0.0;
        }
        let x1 = -d * s / sc;
        let y1 = d + d * v / vc;
        let jac = d / (sc * sc) * d / (vc * vc);
        let span = y1 - x1;
        let mut xp = [0.0f64; 16];
        let xp = &mut xp[..dim];
        cross.sample(rng, xp);
        let mut dist2 = span * span;
        let mut inv_pdf = 1.0;
        for _ in 0..dim {
            let w = span * (pi * (rng.random::<f64>() - 0.5)).tan();
            dist2 += w * w;
            inv_pdf *= pi * (w * w + span * span) / span;
        }
        let length = slab_length_unchecked(x1, y1, d);
        constant * length / dist2.powi(k - 1) * inv_pdf * jac
    })
}

/// How `F_n` is evaluated inside [`identity_total`] for `n ≠ 3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub samples: u64,
    pub seed: u64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions { samples: 1_000_000, seed: crate::DEFAULT_SEED }
    }
}

/// `Σ_c cusp_coefficient(n) · vol_c / d_c^{n-1}`.
pub fn cusp_term(cusps: &[CuspData], n: Dimension) -> Result<f64> {
    if cusps.iter().any(|c| c.n != n) {
        return Err(Error::domain("cusp data dimension does not match n"));
    }
    if cusps.is_empty() {
        return Ok(0.0);
    }
    Ok(cusp_coefficient(n)? * cusps.iter().map(CuspData::invariant_ratio).sum::<f64>())
}

/// Right-hand side of the volume identity: `Σ F_n(ℓ) · multiplicity` plus
/// the cusp term. `F_3` is evaluated in closed form, other `F_n` by Monte
/// Carlo with `mc`.
pub fn identity_total(spectrum: &[OrthospectrumEntry], cusps: &[CuspData], n: Dimension, mc: McOptions) -> Result<f64> {
    let mut ortho = 0.0;
    for e in spectrum {
        let f = if n.get() == 3 { f3_closed(e.length)? } else { fn_numeric(n, e.length, mc.samples, mc.seed)?.value };
        ortho += f * e.multiplicity as f64;
    }
    Ok(ortho + cusp_term(cusps, n)?)
}
