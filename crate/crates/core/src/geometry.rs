//! Upper half-space model of `H^n`: points `(x, h)` with `x ∈ R^{n-1}` and
//! height `h > 0`, ideal boundary `R^{n-1} ∪ {∞}`.
//!
//! Totally geodesic hyperplanes are encoded by their ideal boundaries, which
//! are round spheres or affine planes in `R^{n-1}`. Isometries are stored as
//! words in four conformal generators (translation, dilation, orthogonal map
//! of the boundary, inversion in the unit sphere), which works uniformly in
//! every dimension.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::Dimension;

/// Inversive distances within this of 1 are classified as tangent.
pub const TANGENCY_TOLERANCE: f64 = 1e-10;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} has non-finite coordinates")))
    }
}

/// A point of the ideal boundary `R^{n-1} ∪ {∞}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryPoint {
    Finite(Vec<f64>),
    Infinity,
}

impl BoundaryPoint {
    pub fn finite(coords: Vec<f64>) -> Result<Self> {
        check_finite(&coords, "boundary point")?;
        Ok(BoundaryPoint::Finite(coords))
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            BoundaryPoint::Finite(c) => Some(c),
            BoundaryPoint::Infinity => None,
        }
    }
}

/// A point `(x, h)` of `H^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub x: Vec<f64>,
    pub h: f64,
}

impl HPoint {
    pub fn new(x: Vec<f64>, h: f64) -> Result<Self> {
        check_finite(&x, "point")?;
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::domain(format!("height must be positive, got {h}")));
        }
        Ok(HPoint { x, h })
    }

    /// The point `e_n = (0, ..., 0, 1)`.
    pub fn origin(boundary_dim: usize) -> Self {
        HPoint { x: vec![0.0; boundary_dim], h: 1.0 }
    }

    /// `cosh` of the hyperbolic distance, `1 + |p - q|² / (2 h_p h_q)`.
    pub fn cosh_distance(&self, other: &HPoint) -> f64 {
        let dh = self.h - other.h;
        1.0 + (dist_sq(&self.x, &other.x) + dh * dh) / (2.0 * self.h * other.h)
    }

    pub fn distance(&self, other: &HPoint) -> f64 {
        self.cosh_distance(other).max(1.0).acosh()
    }
}

/// A totally geodesic hyperplane, given by its ideal boundary.
///
/// A `Plane` is the set `{x : normal · x = offset}`; the hyperplane is the
/// vertical half-hyperplane above it. A `Sphere` bounds a hemisphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeneralizedSphere {
    Sphere { center: Vec<f64>, radius: f64 },
    Plane { normal: Vec<f64>, offset: f64 },
}

impl GeneralizedSphere {
    pub fn sphere(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_finite(&center, "sphere center")?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::domain(format!("sphere radius must be positive, got {radius}")));
        }
        Ok(GeneralizedSphere::Sphere { center, radius })
    }

    /// A plane with the given normal, which must have unit length to 1e-12.
    pub fn plane(normal: Vec<f64>, offset: f64) -> Result<Self> {
        check_finite(&normal, "plane normal")?;
        if ((norm_sq(&normal)).sqrt() - 1.0).abs() > 1e-12 || !offset.is_finite() {
            return Err(Error::domain("plane normal must be a unit vector"));
        }
        Ok(GeneralizedSphere::Plane { normal, offset })
    }

    /// Like [`GeneralizedSphere::plane`] but rescales the normal first.
    pub fn plane_normalized(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let len = norm_sq(&normal).sqrt();
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::domain("plane normal must be non-zero"));
        }
        GeneralizedSphere::plane(normal.iter().map(|c| c / len).collect(), offset / len)
    }

    /// Dimension of the ambient boundary `R^{n-1}`.
    pub fn boundary_dim(&self) -> usize {
        match self {
            GeneralizedSphere::Sphere { center, .. } => center.len(),
            GeneralizedSphere::Plane { normal, .. } => normal.len(),
        }
    }
}

/// Unsigned inversive distance between two generalized spheres.
///
/// Values above 1 mean disjoint hyperplanes, exactly 1 tangency (including
/// parallel planes, tangent at ∞) and below 1 intersection.
pub fn inversive_distance(a: &GeneralizedSphere, b: &GeneralizedSphere) -> Result<f64> {
    use GeneralizedSphere::*;
    if a.boundary_dim() != b.boundary_dim() {
        return Err(Error::domain("hyperplanes live in different dimensions"));
    }
    Ok(match (a, b) {
        (Sphere { center: c1, radius: r1 }, Sphere { center: c2, radius: r2 }) => {
            // Grouped so that swapping the arguments gives the identical float.
            (dist_sq(c1, c2) - (r1 * r1 + r2 * r2)).abs() / (2.0 * r1 * r2)
        }
        (Sphere { center, radius }, Plane { normal, offset })
        | (Plane { normal, offset }, Sphere { center, radius }) => (dot(normal, center) - offset).abs() / radius,
        (Plane { normal: u1, .. }, Plane { normal: u2, .. }) => dot(u1, u2).abs().min(1.0),
    })
}

/// Classify an inversive distance: the hyperbolic distance for disjoint
/// hyperplanes, or the tangent / intersecting error.
pub fn ortholength_from_inversive(delta: f64) -> Result<f64> {
    if (delta - 1.0).abs() <= TANGENCY_TOLERANCE {
        return Err(Error::Tangent { inversive_distance: delta });
    }
    if delta < 1.0 {
        return Err(Error::Intersecting { inversive_distance: delta });
    }
    Ok(delta.acosh())
}

/// Length of the common perpendicular of two disjoint hyperplanes.
pub fn ortholength(a: &GeneralizedSphere, b: &GeneralizedSphere) -> Result<f64> {
    ortholength_from_inversive(inversive_distance(a, b)?)
}

/// One of the four conformal generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    /// `x ↦ x + v` on the boundary coordinates.
    Translation(Vec<f64>),
    /// `(x, h) ↦ (λx, λh)`, `λ > 0`.
    Dilation(f64),
    /// `x ↦ Qx` for an orthogonal matrix `Q` (row-major).
    Orthogonal(Vec<Vec<f64>>),
    /// Inversion in the unit sphere, `p ↦ p / |p|²` on the full point.
    Inversion,
}

impl Generator {
    fn inverse(&self) -> Generator {
        match self {
            Generator::Translation(v) => Generator::Translation(v.iter().map(|c| -c).collect()),
            Generator::Dilation(l) => Generator::Dilation(1.0 / l),
            Generator::Orthogonal(q) => {
                let n = q.len();
                Generator::Orthogonal((0..n).map(|i| (0..n).map(|j| q[j][i]).collect()).collect())
            }
            Generator::Inversion => Generator::Inversion,
        }
    }

    fn apply_vec(q: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
        q.iter().map(|row| dot(row, v)).collect()
    }

    fn point(&self, p: &HPoint) -> HPoint {
        match self {
            Generator::Translation(v) => HPoint { x: p.x.iter().zip(v).map(|(a, b)| a + b).collect(), h: p.h },
            Generator::Dilation(l) => HPoint { x: p.x.iter().map(|c| c * l).collect(), h: p.h * l },
            Generator::Orthogonal(q) => HPoint { x: Self::apply_vec(q, &p.x), h: p.h },
            Generator::Inversion => {
                let r2 = norm_sq(&p.x) + p.h * p.h;
                HPoint { x: p.x.iter().map(|c| c / r2).collect(), h: p.h / r2 }
            }
        }
    }

    fn boundary(&self, p: &BoundaryPoint) -> BoundaryPoint {
        match (self, p) {
            (Generator::Inversion, BoundaryPoint::Infinity) => BoundaryPoint::Finite(vec![0.0; 0]),
            (_, BoundaryPoint::Infinity) => BoundaryPoint::Infinity,
            (Generator::Inversion, BoundaryPoint::Finite(x)) => {
                let r2 = norm_sq(x);
                if r2 == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite(x.iter().map(|c| c / r2).collect())
                }
            }
            (g, BoundaryPoint::Finite(x)) => BoundaryPoint::Finite(g.point(&HPoint { x: x.clone(), h: 1.0 }).x),
        }
    }

    fn sphere(&self, s: &GeneralizedSphere) -> GeneralizedSphere {
        use GeneralizedSphere::*;
        match (self, s) {
            (Generator::Translation(v), Sphere { center, radius }) => Sphere {
                center: center.iter().zip(v).map(|(a, b)| a + b).collect(),
                radius: *radius,
            },
            (Generator::Translation(v), Plane { normal, offset }) => {
                Plane { normal: normal.clone(), offset: offset + dot(normal, v) }
            }
            (Generator::Dilation(l), Sphere { center, radius }) => {
                Sphere { center: center.iter().map(|c| c * l).collect(), radius: radius * l }
            }
            (Generator::Dilation(l), Plane { normal, offset }) => Plane { normal: normal.clone(), offset: offset * l },
            (Generator::Orthogonal(q), Sphere { center, radius }) => {
                Sphere { center: Self::apply_vec(q, center), radius: *radius }
            }
            (Generator::Orthogonal(q), Plane { normal, offset }) => {
                Plane { normal: Self::apply_vec(q, normal), offset: *offset }
            }
            (Generator::Inversion, Sphere { center, radius }) => {
                let c2 = norm_sq(center);
                let power = c2 - radius * radius;
                if power.abs() <= 1e-14 * c2.max(radius * radius) {
                    // Through the origin: the image is the plane 2 c·x = 1.
                    let len = c2.sqrt();
                    Plane { normal: center.iter().map(|c| c / len).collect(), offset: 0.5 / len }
                } else {
                    Sphere { center: center.iter().map(|c| c / power).collect(), radius: radius / power.abs() }
                }
            }
            (Generator::Inversion, Plane { normal, offset }) => {
                if *offset == 0.0 {
                    s.clone()
                } else {
                    Sphere {
                        center: normal.iter().map(|c| c / (2.0 * offset)).collect(),
                        radius: 1.0 / (2.0 * offset.abs()),
                    }
                }
            }
        }
    }
}

/// An isometry of `H^n` written as a word in [`Generator`]s, applied left to
/// right (the first generator acts first).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Isometry {
    pub steps: Vec<Generator>,
}

impl Isometry {
    pub fn identity() -> Self {
        Isometry::default()
    }

    pub fn then(mut self, g: Generator) -> Self {
        self.steps.push(g);
        self
    }

    pub fn inverse(&self) -> Isometry {
        Isometry { steps: self.steps.iter().rev().map(Generator::inverse).collect() }
    }

    pub fn apply_point(&self, p: &HPoint) -> HPoint {
        self.steps.iter().fold(p.clone(), |acc, g| g.point(&acc))
    }

    pub fn apply_boundary(&self, p: &BoundaryPoint, boundary_dim: usize) -> BoundaryPoint {
        self.steps.iter().fold(p.clone(), |acc, g| match g.boundary(&acc) {
            BoundaryPoint::Finite(v) if v.is_empty() => BoundaryPoint::Finite(vec![0.0; boundary_dim]),
            other => other,
        })
    }

    pub fn apply_sphere(&self, s: &GeneralizedSphere) -> GeneralizedSphere {
        self.steps.iter().fold(s.clone(), |acc, g| g.sphere(&acc))
    }

    /// A random word mixing all four generator types, acting on `H^n` with
    /// `boundary_dim = n - 1`. Translations are standard normal, dilations
    /// log-normal with scale `0.5`, and an inversion is included with
    /// probability 1/2.
    pub fn random<R: Rng + ?Sized>(boundary_dim: usize, rng: &mut R) -> Isometry {
        let translation = |rng: &mut R| {
            Generator::Translation((0..boundary_dim).map(|_| StandardNormal.sample(rng)).collect())
        };
        let t1 = translation(rng);
        let t2 = translation(rng);
        let log_scale: f64 = StandardNormal.sample(rng);
        let dilation = Generator::Dilation((0.5 * log_scale).exp());
        let q = Generator::Orthogonal(random_orthogonal(boundary_dim, rng));
        let mut iso = Isometry::identity().then(t1).then(q).then(dilation);
        if rng.random_bool(0.5) {
            iso = iso.then(Generator::Inversion);
        }
        iso.then(t2)
    }
}

/// Haar-random orthogonal matrix by Gram–Schmidt on a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while rows.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        for r in &rows {
            let p = dot(&v, r);
            v.iter_mut().zip(r).for_each(|(a, b)| *a -= p * b);
        }
        let len = norm_sq(&v).sqrt();
        if len > 1e-8 {
            rows.push(v.iter().map(|c| c / len).collect());
        }
    }
    rows
}

/// An oriented geodesic from `x` (backward endpoint) to `y` (forward),
/// parametrized by arc length `s`.
///
/// The reference point `s = 0` is the top of the semicircle for finite
/// endpoints and height 1 for vertical geodesics.
#[derive(Debug, Clone, PartialEq)]
pub struct Geodesic {
    kind: GeodesicKind,
}

#[derive(Debug, Clone, PartialEq)]
enum GeodesicKind {
    /// Semicircle with center `c`, radius `r`, direction `u = (y - x)/|y - x|`.
    Arc { c: Vec<f64>, r: f64, u: Vec<f64> },
    /// Vertical line over `foot`; `up` is true when travelling towards ∞.
    Vertical { foot: Vec<f64>, up: bool },
}

impl Geodesic {
    pub fn new(x: &BoundaryPoint, y: &BoundaryPoint) -> Result<Self> {
        let kind = match (x, y) {
            (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => {
                if a.len() != b.len() {
                    return Err(Error::domain("endpoints in different dimensions"));
                }
                let len = dist_sq(a, b).sqrt();
                if !(len > 0.0) {
                    return Err(Error::domain("geodesic endpoints coincide"));
                }
                GeodesicKind::Arc {
                    c: a.iter().zip(b).map(|(p, q)| 0.5 * (p + q)).collect(),
                    r: 0.5 * len,
                    u: a.iter().zip(b).map(|(p, q)| (q - p) / len).collect(),
                }
            }
            (BoundaryPoint::Finite(a), BoundaryPoint::Infinity) => GeodesicKind::Vertical { foot: a.clone(), up: true },
            (BoundaryPoint::Infinity, BoundaryPoint::Finite(b)) => GeodesicKind::Vertical { foot: b.clone(), up: false },
            (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => {
                return Err(Error::domain("geodesic endpoints coincide"))
            }
        };
        Ok(Geodesic { kind })
    }

    /// Geodesic between two finite boundary points given as slices.
    pub fn between(x: &[f64], y: &[f64]) -> Result<Self> {
        Geodesic::new(&BoundaryPoint::Finite(x.to_vec()), &BoundaryPoint::Finite(y.to_vec()))
    }

    pub fn point_at(&self, s: f64) -> HPoint {
        match &self.kind {
            GeodesicKind::Arc { c, r, u } => {
                let th = s.tanh();
                HPoint { x: c.iter().zip(u).map(|(ci, ui)| ci + r * th * ui).collect(), h: r / s.cosh() }
            }
            GeodesicKind::Vertical { foot, up } => HPoint { x: foot.clone(), h: if *up { s.exp() } else { (-s).exp() } },
        }
    }

    /// Coefficients `(A, B)` with `cosh d(P(s), q) = A cosh s + B sinh s`.
    fn distance_coefficients(&self, q: &HPoint) -> (f64, f64) {
        match &self.kind {
            GeodesicKind::Arc { c, r, u } => {
                let w: Vec<f64> = c.iter().zip(&q.x).map(|(a, b)| a - b).collect();
                ((norm_sq(&w) + r * r + q.h * q.h) / (2.0 * r * q.h), dot(u, &w) / q.h)
            }
            GeodesicKind::Vertical { foot, up } => {
                // cosh d = (ρ² + e^{2s} + h²) / (2 e^s h) with ρ = |foot - q'|.
                let k = dist_sq(foot, &q.x) + q.h * q.h;
                let (a, b) = ((k + 1.0) / (2.0 * q.h), (1.0 - k) / (2.0 * q.h));
                (a, if *up { b } else { -b })
            }
        }
    }

    /// Parameter of the point of the geodesic closest to `q`, together with
    /// `cosh` of that minimal distance.
    pub fn closest_parameter(&self, q: &HPoint) -> (f64, f64) {
        let (a, b) = self.distance_coefficients(q);
        let s0 = (-b / a).atanh();
        (s0, (a * a - b * b).max(1.0).sqrt())
    }

    pub fn cosh_distance_at(&self, s: f64, q: &HPoint) -> f64 {
        let (a, b) = self.distance_coefficients(q);
        a * s.cosh() + b * s.sinh()
    }
}

/// Endpoints and slab width for a geodesic crossing the cusp slab
/// `0 ≤ x₁ ≤ d` between the hyperplanes `x₁ = 0` and `x₁ = d`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicSegmentSpec {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub d: f64,
}

/// Hyperbolic length of the part of the geodesic from `x` to `y` lying in
/// the slab `0 ≤ x₁ ≤ d`: `½ log(y₁(x₁ - d) / (x₁(y₁ - d)))`.
pub fn slab_segment_length(spec: &GeodesicSegmentSpec) -> Result<f64> {
    if spec.x.is_empty() || spec.x.len() != spec.y.len() {
        return Err(Error::domain("slab endpoints must be non-empty and of equal dimension"));
    }
    if !(spec.d > 0.0) {
        return Err(Error::domain(format!("slab width must be positive, got {}", spec.d)));
    }
    let (x1, y1) = (spec.x[0], spec.y[0]);
    if !(x1 < 0.0) || !(y1 > spec.d) {
        return Err(Error::domain(format!(
            "slab segment needs x1 < 0 and y1 > d, got x1 = {x1}, y1 = {y1}, d = {}",
            spec.d
        )));
    }
    Ok(slab_length_unchecked(x1, y1, spec.d))
}

/// The slab formula without validation, written as a sum of logs of
/// positive factors to keep full precision when `x₁ → 0⁻` or `y₁ → d⁺`.
pub(crate) fn slab_length_unchecked(x1: f64, y1: f64, d: f64) -> f64 {
    0.5 * ((y1 / (y1 - d)).ln() + ((d - x1) / -x1).ln())
}

/// Invariants of a boundary cusp: the Euclidean gap `d` between the two
/// boundary sheets on the horosphere, and the volume of an embedded horoball
/// neighbourhood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspData {
    pub label: String,
    pub d: f64,
    pub vol: f64,
    pub n: Dimension,
}

impl CuspData {
    pub fn new(label: impl Into<String>, d: f64, vol: f64, n: Dimension) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) || !(vol > 0.0 && vol.is_finite()) {
            return Err(Error::domain(format!("cusp data needs d > 0 and vol > 0, got d = {d}, vol = {vol}")));
        }
        Ok(CuspData { label: label.into(), d, vol, n })
    }

    /// `vol / d^{n-1}`, independent of the chosen horoball.
    pub fn invariant_ratio(&self) -> f64 {
        self.vol / self.d.powi(self.n.get() as i32 - 1)
    }
}

/// Volume of the horoball neighbourhood `[0, d] × D' × (1, ∞)` per unit
/// length in the first coordinate, `Vol_E(D') / (n - 1)`.
pub fn horoball_neighborhood_volume(cross_section_euclidean_volume: f64, n: Dimension) -> Result<f64> {
    if !(cross_section_euclidean_volume > 0.0) {
        return Err(Error::domain("cross-section volume must be positive"));
    }
    Ok(cross_section_euclidean_volume / (n.as_f64() - 1.0))
}

/// Move the horoball to height `a`: `d ↦ d/a`, `vol ↦ vol/a^{n-1}`.
pub fn rescale_cusp(c: &CuspData, a: f64) -> Result<CuspData> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("rescaling factor must be positive, got {a}")));
    }
    Ok(CuspData {
        label: c.label.clone(),
        d: c.d / a,
        vol: c.vol / a.powi(c.n.get() as i32 - 1),
        n: c.n,
    })
}
