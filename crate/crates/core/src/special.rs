//! Scalar special functions: gamma, digamma, harmonic numbers and the cusp
//! coefficient `H(n-2) Γ((n-2)/2) / (√π Γ((n-1)/2))` of the volume identity.
//!
//! Γ is evaluated with the `g = 7`, 9-term Lanczos approximation (the
//! coefficient set popularised by Numerical Recipes and Godfrey). Integer and
//! half-integer arguments are computed by exact recurrence from `Γ(1) = 1` and
//! `Γ(1/2) = √π`, so factorial-type values carry no approximation error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Euler–Mascheroni constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;

/// Catalan's constant `G = Σ (-1)^k / (2k+1)^2`.
pub const CATALAN: f64 = 0.915_965_594_177_219_015_054_6;

/// `√π`.
pub const SQRT_PI: f64 = 1.772_453_850_905_516_027_3;

const SQRT_2PI: f64 = 2.506_628_274_631_000_502_4;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Ambient dimension `n` of hyperbolic space `H^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("dimension must be at least 2, got {n}")));
        }
        Ok(Dimension(n))
    }

    /// Like [`Dimension::new`] but additionally requires `n >= 3`, the range
    /// in which the volume identity holds.
    pub fn at_least_three(n: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::domain(format!("dimension must be at least 3, got {n}")));
        }
        Ok(Dimension(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }

    /// Dimension of the ideal boundary `R^{n-1}`.
    pub fn boundary_dim(self) -> usize {
        self.0 as usize - 1
    }

    pub(crate) fn require_identity_range(self) -> Result<()> {
        if self.0 < 3 {
            return Err(Error::domain(format!(
                "operation requires dimension >= 3, got {}",
                self.0
            )));
        }
        Ok(())
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;

    fn try_from(n: u32) -> Result<Self> {
        Dimension::new(n)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.0
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// The `m`-th harmonic number `H(m) = 1 + 1/2 + ... + 1/m`, with `H(0) = 0`.
pub fn harmonic(m: u64) -> f64 {
    if m > 1 << 20 {
        // Summation error would dominate; the digamma route is exact to rounding.
        return EULER_GAMMA + digamma_unchecked(m as f64 + 1.0);
    }
    // Summing smallest terms first keeps the rounding error at a few ulps.
    (1..=m).rev().map(|k| 1.0 / k as f64).sum()
}

/// Harmonic numbers for real arguments, `H(x) = γ + ψ(x + 1)`.
///
/// Evaluated as `Σ_{k≤N} x / (k (k + x))` plus the digamma tail
/// `ψ(N + 1 + x) - ψ(N + 1)`, which avoids the cancellation of the naive form
/// near `x = 0`.
pub fn harmonic_real(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("harmonic_real needs a finite argument, got {x}")));
    }
    if x <= -1.0 {
        return Err(Error::Pole { function: "harmonic_real", at: x });
    }
    const N: u32 = 16;
    let head: f64 = (1..=N)
        .rev()
        .map(|k| {
            let k = f64::from(k);
            x / (k * (k + x))
        })
        .sum();
    let base = f64::from(N) + 1.0;
    let tail = digamma_asymptotic(base + x) - digamma_asymptotic(base);
    Ok(head + tail)
}

/// The digamma function `ψ = Γ'/Γ`.
pub fn digamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("digamma of NaN"));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::Pole { function: "digamma", at: x });
    }
    Ok(digamma_unchecked(x))
}

fn digamma_unchecked(x: f64) -> f64 {
    if x < 0.0 {
        // Reflection: ψ(1 - x) - ψ(x) = π cot(πx).
        return digamma_unchecked(1.0 - x) - std::f64::consts::PI / (std::f64::consts::PI * x).tan();
    }
    let mut shift = 0.0;
    let mut z = x;
    while z < 17.0 {
        shift -= 1.0 / z;
        z += 1.0;
    }
    shift + digamma_asymptotic(z)
}

/// Asymptotic expansion of ψ, accurate to ~1e-16 for `z >= 17`.
fn digamma_asymptotic(z: f64) -> f64 {
    let r = 1.0 / (z * z);
    let series = r
        * (1.0 / 12.0
            - r * (1.0 / 120.0
                - r * (1.0 / 252.0 - r * (1.0 / 240.0 - r * (1.0 / 132.0 - r * (691.0 / 32_760.0))))));
    z.ln() - 0.5 / z - series
}

/// The gamma function.
///
/// Poles at `0, -1, -2, ...` are reported as [`Error::Pole`]. Arguments above
/// ~171.6 overflow to `+inf`; use [`ln_gamma`] there.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("gamma of NaN"));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::Pole { function: "gamma", at: x });
    }
    if let Some(v) = gamma_half_integer(x) {
        return Ok(v);
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.0 {
        let pi = std::f64::consts::PI;
        return pi / ((pi * x).sin() * gamma_unchecked(1.0 - x));
    }
    if x < 0.5 {
        return gamma_unchecked(x + 1.0) / x;
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    let series = lanczos_series(z);
    // Split the power so t^(z+1/2) does not overflow before e^{-t} damps it.
    let half_pow = t.powf(0.5 * (z + 0.5));
    SQRT_2PI * half_pow * (half_pow * (-t).exp()) * series
}

fn lanczos_series(z: f64) -> f64 {
    LANCZOS_COEFFS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS_COEFFS[0], |acc, (i, c)| acc + c / (z + (i + 1) as f64))
}

/// Exact recurrences for positive integers and half-integers up to 171.
fn gamma_half_integer(x: f64) -> Option<f64> {
    if !(0.0..=171.0).contains(&x) {
        return None;
    }
    let twice = 2.0 * x;
    if twice != twice.floor() {
        return None;
    }
    let (mut acc, mut k) = if x == x.floor() { (1.0, 1.0) } else { (SQRT_PI, 0.5) };
    while k < x {
        acc *= k;
        k += 1.0;
    }
    Some(acc)
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_positive(x))
}

fn ln_gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        return ln_gamma_positive(x + 1.0) - x.ln();
    }
    if x < 15.0 {
        return gamma_unchecked(x).ln();
    }
    // Stirling series; the first omitted term is below 3e-14 at x = 15.
    let r = 1.0 / (x * x);
    let series = (1.0 / 12.0 - r * (1.0 / 360.0 - r * (1.0 / 1260.0 - r / 1680.0))) / x;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

/// `Γ(a) / Γ(b)` for positive arguments without intermediate overflow.
pub(crate) fn gamma_ratio(a: f64, b: f64) -> f64 {
    if a < 100.0 && b < 100.0 {
        gamma_unchecked_exact(a) / gamma_unchecked_exact(b)
    } else {
        (ln_gamma_positive(a) - ln_gamma_positive(b)).exp()
    }
}

fn gamma_unchecked_exact(x: f64) -> f64 {
    gamma_half_integer(x).unwrap_or_else(|| gamma_unchecked(x))
}

/// Coefficient multiplying `Σ Vol(B_c)/d_c^{n-1}` in the volume identity,
/// `H(n-2) Γ((n-2)/2) / (√π Γ((n-1)/2))`.
pub fn cusp_coefficient(n: Dimension) -> Result<f64> {
    n.require_identity_range()?;
    let nf = n.as_f64();
    let h = harmonic(u64::from(n.get() - 2));
    Ok(h * gamma_ratio((nf - 2.0) / 2.0, (nf - 1.0) / 2.0) / SQRT_PI)
}

/// The cusp coefficient continued to real dimensions `n > 2` through the
/// digamma extension of `H`. As `n -> 2+` it tends to `π/3`.
pub fn cusp_coefficient_real(n: f64) -> Result<f64> {
    if !(n > 2.0) || !n.is_finite() {
        return Err(Error::domain(format!("real cusp coefficient needs n > 2, got {n}")));
    }
    let h = harmonic_real(n - 2.0)?;
    let ratio = gamma_unchecked((n - 2.0) / 2.0) / gamma_unchecked((n - 1.0) / 2.0);
    Ok(h * ratio / SQRT_PI)
}

/// Leading large-`n` behaviour `√(2/π) (γ + ln n) / √n` of [`cusp_coefficient`].
pub fn cusp_coefficient_asymptotic(n: Dimension) -> Result<f64> {
    n.require_identity_range()?;
    let nf = n.as_f64();
    Ok((2.0 / std::f64::consts::PI).sqrt() * (EULER_GAMMA + nf.ln()) / nf.sqrt())
}

pub fn catalan_constant() -> f64 {
    CATALAN
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dim(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn harmonic_small_values() {
        assert_eq!(harmonic(0), 0.0);
        assert_eq!(harmonic(1), 1.0);
        assert!((harmonic(4) - 25.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn harmonic_real_matches_integers() {
        for m in 0..50u64 {
            let r = harmonic_real(m as f64).unwrap();
            assert!((r - harmonic(m)).abs() <= 1e-12, "m={m}: {r} vs {}", harmonic(m));
        }
    }

    #[test]
    fn harmonic_real_half() {
        // (1 - t^x)/(1 - t) integrated on [0,1] with a midpoint rule on the
        // substitution t = 1 - s^2, which removes the sqrt singularity.
        let x = 0.5;
        let m = 200_000;
        let oracle: f64 = (0..m)
            .map(|i| {
                let s = (i as f64 + 0.5) / m as f64;
                let t: f64 = 1.0 - s * s;
                (1.0 - t.powf(x)) / (s * s) * 2.0 * s
            })
            .sum::<f64>()
            / m as f64;
        let expected = 2.0 - 2.0 * 2f64.ln();
        assert!((oracle - expected).abs() < 1e-8);
        assert!((harmonic_real(0.5).unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn harmonic_real_rejects_pole_domain() {
        assert!(matches!(harmonic_real(-1.0), Err(Error::Pole { .. })));
        assert!(harmonic_real(-3.5).is_err());
        assert!(harmonic_real(-0.5).is_ok());
    }

    #[test]
    fn gamma_classical_values() {
        assert_eq!(gamma_fn(0.5).unwrap(), SQRT_PI);
        assert_eq!(gamma_fn(5.0).unwrap(), 24.0);
        assert_eq!(gamma_fn(1.0).unwrap(), 1.0);
        assert!((gamma_fn(1.5).unwrap() - SQRT_PI / 2.0).abs() < 1e-16);
        assert!((gamma_fn(-0.5).unwrap() + 2.0 * SQRT_PI).abs() < 1e-14);
    }

    #[test]
    fn gamma_poles() {
        for x in [0.0, -1.0, -7.0] {
            assert!(matches!(gamma_fn(x), Err(Error::Pole { .. })));
        }
    }

    /// Independent oracle: shift the argument past 40 with the recurrence and
    /// apply the Stirling series, whose truncation error there is below 1e-20.
    fn gamma_stirling_oracle(x: f64) -> f64 {
        let mut shifted = x;
        let mut denom = 1.0;
        while shifted < 40.0 {
            denom *= shifted;
            shifted += 1.0;
        }
        let r = 1.0 / (shifted * shifted);
        let corr = (1.0 / 12.0 - r * (1.0 / 360.0 - r * (1.0 / 1260.0 - r / 1680.0))) / shifted;
        let ln = (shifted - 0.5) * shifted.ln() - shifted + 0.5 * (2.0 * PI).ln() + corr;
        ln.exp() / denom
    }

    #[test]
    fn gamma_relative_error_envelope() {
        let mut x = 0.5;
        while x <= 30.0 {
            let ours = gamma_fn(x).unwrap();
            let oracle = gamma_stirling_oracle(x);
            assert!(((ours - oracle) / oracle).abs() <= 1e-13, "x={x}: {ours} vs {oracle}");
            x += 0.137;
        }
        // Spot values from a 30-digit reference evaluation.
        let spot = [(12.282, 79_762_654.445_813_17), (0.7, 1.298_055_332_647_557_9), (29.9, 6.304_174_488_373_721e30)];
        for (x, v) in spot {
            assert!(((gamma_fn(x).unwrap() - v) / v).abs() <= 1e-13, "x={x}");
        }
    }

    #[test]
    fn ln_gamma_consistent_with_gamma() {
        for x in [0.1, 0.7, 3.3, 14.9, 15.1, 40.0, 150.5] {
            let direct = gamma_fn(x).unwrap().ln();
            assert!((ln_gamma(x).unwrap() - direct).abs() < 1e-12 * direct.abs().max(1.0));
        }
        let big = 5.0e4;
        let theirs = statrs::function::gamma::ln_gamma(big);
        assert!(((ln_gamma(big).unwrap() - theirs) / theirs).abs() < 1e-14);
    }

    #[test]
    fn duplication_identity() {
        for n in 3..=20u32 {
            let nf = f64::from(n);
            let lhs = 2f64.powf(2.0 - nf) * SQRT_PI * gamma_fn(nf - 1.0).unwrap();
            let rhs = gamma_fn((nf - 1.0) / 2.0).unwrap() * gamma_fn(nf / 2.0).unwrap();
            let scale = gamma_fn(nf / 2.0).unwrap().powi(2);
            assert!((lhs - rhs).abs() / scale <= 1e-10, "n={n}");
        }
    }

    #[test]
    fn digamma_matches_harmonic() {
        for m in 0..30u64 {
            let v = EULER_GAMMA + digamma(m as f64 + 1.0).unwrap();
            assert!((v - harmonic(m)).abs() < 1e-13);
        }
        assert!(digamma(-2.0).is_err());
        // ψ(1/2) = -γ - 2 ln 2
        assert!((digamma(0.5).unwrap() + EULER_GAMMA + 2.0 * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn cusp_coefficient_low_dimensions() {
        assert_eq!(cusp_coefficient(dim(3)).unwrap(), 1.0);
        assert!((cusp_coefficient(dim(4)).unwrap() - 3.0 / PI).abs() < 1e-15);
        assert!(cusp_coefficient(dim(2)).is_err());
    }

    #[test]
    fn cusp_coefficient_surface_limit() {
        let v = cusp_coefficient_real(2.0 + 1e-6).unwrap();
        assert!((v - PI / 3.0).abs() < 1e-4, "{v}");
        assert!(cusp_coefficient_real(2.0).is_err());
        // Integer agreement of the real continuation.
        for n in 3..12 {
            let a = cusp_coefficient_real(f64::from(n)).unwrap();
            let b = cusp_coefficient(dim(n)).unwrap();
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn cusp_coefficient_asymptotics() {
        let ratio = |n: u32| {
            cusp_coefficient(dim(n)).unwrap() / cusp_coefficient_asymptotic(dim(n)).unwrap()
        };
        let r3 = ratio(1000);
        let r5 = ratio(100_000);
        assert!((r3 - 1.0).abs() < 2e-2, "{r3}");
        assert!((r5 - 1.0).abs() < 5e-4, "{r5}");
        assert!((r5 - 1.0).abs() < (r3 - 1.0).abs());
    }

    #[test]
    fn cusp_coefficient_decays() {
        let mut prev = f64::INFINITY;
        for n in 6..=1000u32 {
            let c = cusp_coefficient(dim(n)).unwrap();
            assert!(c > 0.0 && c < prev, "n={n}");
            prev = c;
        }
        assert!(cusp_coefficient(dim(1000)).unwrap() < cusp_coefficient(dim(100)).unwrap());
        assert!(cusp_coefficient(dim(100)).unwrap() < cusp_coefficient(dim(10)).unwrap());
    }

    #[test]
    fn catalan_against_series() {
        // Alternating series with repeated averaging of partial sums.
        let mut partial = Vec::with_capacity(200);
        let mut s = 0.0;
        for k in 0..200 {
            let t = 1.0 / ((2 * k + 1) as f64).powi(2);
            s += if k % 2 == 0 { t } else { -t };
            partial.push(s);
        }
        let mut partial = partial.split_off(180);
        while partial.len() > 1 {
            partial = partial.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        }
        assert!((partial[0] - catalan_constant()).abs() < 2e-15);
        assert!((4.0 * CATALAN - 3.66386).abs() < 5e-6);
        assert!((4.0 * CATALAN - 3.0 - 0.663_862_4).abs() < 1e-6);
    }

    #[test]
    fn dimension_rejects_small() {
        assert!(Dimension::new(1).is_err());
        assert!(Dimension::at_least_three(2).is_err());
        let d: Dimension = serde_json::from_str("4").unwrap();
        assert_eq!(d.get(), 4);
        assert!(serde_json::from_str::<Dimension>("1").is_err());
    }
}
