//! Double-exponential (tanh-sinh) quadrature on finite intervals.
//!
//! Abscissae are generated together with their distances to both endpoints,
//! computed without cancellation, so integrands with logarithmic or mild
//! algebraic endpoint singularities can be evaluated right up to the edge.

use std::cell::{Cell, RefCell};

use crate::error::{Error, Result};

const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;
/// Truncation of the transformed axis: at `t = 4` the node sits within
/// ~2e-37 of the endpoint (relative to the half-width).
const T_MAX: f64 = 4.0;

/// A point handed to the integrand: the abscissa plus its distances to the
/// left and right endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub x: f64,
    pub from_left: f64,
    pub from_right: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Difference between the last two refinement levels.
    pub error: f64,
    /// `∫|f|` as seen by the rule; the scale against which `error` is judged.
    pub magnitude: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TanhSinh {
    /// Relative tolerance, measured against `∫|f|`.
    pub tolerance: f64,
    pub max_levels: u32,
}

impl Default for TanhSinh {
    fn default() -> Self {
        TanhSinh { tolerance: 1e-12, max_levels: 12 }
    }
}

impl TanhSinh {
    pub fn new(tolerance: f64) -> Self {
        TanhSinh { tolerance, ..Default::default() }
    }

    /// Integrate `f` over `[a, b]`, where `f` receives a [`Node`].
    pub fn integrate_nodes<F>(&self, a: f64, b: f64, f: F) -> Result<QuadratureResult>
    where
        F: Fn(Node) -> f64,
    {
        let (r, converged) = self.refine(a, b, f)?;
        if converged {
            return Ok(r);
        }
        Err(Error::NotConverged {
            achieved: if r.magnitude > 0.0 { r.error / r.magnitude } else { r.error },
            requested: self.tolerance,
        })
    }

    /// The refinement loop: the last estimate and whether it met the
    /// tolerance. Fails only on bad arguments or non-finite values.
    fn refine<F>(&self, a: f64, b: f64, f: F) -> Result<(QuadratureResult, bool)>
    where
        F: Fn(Node) -> f64,
    {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::domain(format!("quadrature needs a finite interval a < b, got [{a}, {b}]")));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::domain("quadrature tolerance must be positive"));
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut evaluations = 0usize;

        // Contribution of the abscissa at transformed coordinate t >= 0 (and
        // its mirror), returned as (signed sum, absolute sum).
        let mut pair = |t: f64| -> (f64, f64) {
            let s = HALF_PI * t.sinh();
            let e = (-2.0 * s).exp();
            // 1 - tanh(s), accurate even when tanh(s) rounds to 1.
            let comp = 2.0 * e / (1.0 + e);
            let cosh_s = s.cosh();
            let w = HALF_PI * t.cosh() / (cosh_s * cosh_s) * half;
            let gap = half * comp;
            if t == 0.0 {
                evaluations += 1;
                let v = f(Node { x: mid, from_left: half, from_right: half });
                return (w * v, w * v.abs());
            }
            evaluations += 2;
            let left = f(Node { x: a + gap, from_left: gap, from_right: b - a - gap });
            let right = f(Node { x: b - gap, from_left: b - a - gap, from_right: gap });
            (w * (left + right), w * (left.abs() + right.abs()))
        };

        // Level 0: unit step.
        let mut h = 1.0;
        let (mut sum, mut abs_sum) = pair(0.0);
        let mut k = 1.0;
        while k <= T_MAX {
            let (s, a) = pair(k);
            sum += s;
            abs_sum += a;
            k += 1.0;
        }
        let mut estimate = h * sum;
        let mut error = f64::INFINITY;

        for _level in 1..=self.max_levels {
            h *= 0.5;
            let mut t = h;
            while t <= T_MAX {
                let (s, a) = pair(t);
                sum += s;
                abs_sum += a;
                t += 2.0 * h;
            }
            let next = h * sum;
            error = (next - estimate).abs();
            estimate = next;
            if !estimate.is_finite() {
                return Err(Error::NotConverged { achieved: f64::NAN, requested: self.tolerance });
            }
            if error <= self.tolerance * h * abs_sum {
                return Ok((QuadratureResult { value: estimate, error, magnitude: h * abs_sum, evaluations }, true));
            }
        }
        Ok((QuadratureResult { value: estimate, error, magnitude: h * abs_sum, evaluations }, false))
    }

    /// Integrate a plain function of `x` over `[a, b]`.
    pub fn integrate<F>(&self, a: f64, b: f64, f: F) -> Result<QuadratureResult>
    where
        F: Fn(f64) -> f64,
    {
        self.integrate_nodes(a, b, |n| f(n.x))
    }

    /// Nested integration over `[a1, b1] × [a2, b2]`.
    ///
    /// Inner integrals run at a tolerance ten times tighter than the outer
    /// one. An inner integral that stalls (typically one that is tiny next
    /// to the total) is accepted as long as its absolute error, times the
    /// outer interval length, stays within the outer tolerance.
    pub fn integrate_2d<F>(&self, (a1, b1): (f64, f64), (a2, b2): (f64, f64), f: F) -> Result<QuadratureResult>
    where
        F: Fn(Node, Node) -> f64,
    {
        let inner = TanhSinh { tolerance: self.tolerance * 0.1, max_levels: self.max_levels };
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let inner_evals = Cell::new(0usize);
        let stalled_error = Cell::new(0.0f64);
        let outer = self.integrate_nodes(a1, b1, |u| {
            if failure.borrow().is_some() {
                return 0.0;
            }
            match inner.refine(a2, b2, |v| f(u, v)) {
                Ok((r, converged)) => {
                    inner_evals.set(inner_evals.get() + r.evaluations);
                    if !converged {
                        stalled_error.set(stalled_error.get().max(r.error));
                    }
                    r.value
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    0.0
                }
            }
        });
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let mut r = outer?;
        let spill = stalled_error.get() * (b1 - a1);
        if spill > self.tolerance * r.magnitude {
            return Err(Error::NotConverged { achieved: spill / r.magnitude, requested: self.tolerance });
        }
        r.error += spill;
        r.evaluations = inner_evals.get();
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_and_trig() {
        let q = TanhSinh::default();
        let r = q.integrate(0.0, 1.0, |x| x * x).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-14);
        let r = q.integrate(0.0, PI, f64::sin).unwrap();
        assert!((r.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn endpoint_singularities() {
        let q = TanhSinh::default();
        // ∫₀¹ ln x dx = -1, evaluated through the cancellation-free distance.
        let r = q.integrate_nodes(0.0, 1.0, |n| n.from_left.ln()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-13);
        // ∫₀¹ x^{-1/2} dx = 2
        let r = q.integrate_nodes(0.0, 1.0, |n| n.from_left.powf(-0.5)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-11, "{}", r.value);
        // ∫₀¹ ln(1-x) dx = -1 via the right-hand distance.
        let r = q.integrate_nodes(0.0, 1.0, |n| n.from_right.ln()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-13);
    }

    #[test]
    fn zero_integral_converges() {
        let r = TanhSinh::default().integrate(-1.0, 1.0, |x| x.powi(3)).unwrap();
        assert!(r.value.abs() < 1e-15);
    }

    #[test]
    fn two_dimensional() {
        let q = TanhSinh::new(1e-12);
        let r = q.integrate_2d((0.0, 1.0), (0.0, 2.0), |u, v| u.x * v.x).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        // ∫∫ ln(x) ln(y) over the unit square = 1
        let r = q.integrate_2d((0.0, 1.0), (0.0, 1.0), |u, v| u.from_left.ln() * v.from_left.ln()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-11);
    }

    #[test]
    fn non_convergence_is_reported() {
        let q = TanhSinh { tolerance: 1e-14, max_levels: 2 };
        let err = q.integrate(0.0, 1.0, |x| (40.0 * x).sin().abs()).unwrap_err();
        assert!(matches!(err, Error::NotConverged { .. }));
    }

    #[test]
    fn rejects_bad_interval() {
        assert!(TanhSinh::default().integrate(1.0, 0.0, |x| x).is_err());
        assert!(TanhSinh::default().integrate(0.0, f64::INFINITY, |x| x).is_err());
    }
}
