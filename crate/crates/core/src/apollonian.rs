//! The Apollonian strip packing and the orthospectrum of the cut Whitehead
//! link complement.
//!
//! The packing lives in the strip `0 ≤ y ≤ 2` bounded by the lines `y = 0`
//! and `y = 2`, with unit circles centred at `(2k, 1)`. Every circle is
//! stored through its Descartes data: the integer curvature `b` and the
//! integer vector `b · centre`. A line has curvature 0 and stores its unit
//! normal, pointing out of the strip, in place of `b · centre`. This makes
//! the Descartes reflection `x' = 2(x₁ + x₂ + x₃) - x₄` valid on all three
//! coordinates at once. All tangency and inversive-distance computations are exact.
//!
//! Which pairs of circles correspond to distinct orthogeodesics depends on
//! the fundamental group acting on the packing. Three counting strategies
//! are offered; the identity itself decides between them, since overcounting
//! pushes the partial sums above the volume.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bk::f3_closed;
use crate::cusp::cusp_term;
use crate::error::{Error, Result};
use crate::geometry::{CuspData, GeneralizedSphere};
use crate::special::{catalan_constant, Dimension};

/// Slack allowed above the target before a partial sum counts as overcounted.
pub const BOUND_SLACK: f64 = 1e-6;

/// Largest admissible curvature bound; keeps every intermediate product well
/// inside `i128`.
pub const MAX_CURVATURE_BOUND: u64 = 1 << 30;

/// A circle or line of the strip packing in Descartes coordinates.
///
/// For circles `curvature_center = b · centre`. For the two lines the
/// curvature is 0, `curvature_center` is the unit normal pointing out of the
/// strip and `line_offset` is `c` in `normal · p = c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApollonianCircle {
    pub id: usize,
    pub curvature: i64,
    pub curvature_center: [i64; 2],
    pub line_offset: Option<i64>,
    /// Descartes data `(b, b·cx, b·cy)` of the three mutually tangent
    /// elements this circle was reflected from. `None` for the root.
    pub parents: Option<[[i64; 3]; 3]>,
}

impl ApollonianCircle {
    pub fn is_line(&self) -> bool {
        self.curvature == 0
    }

    pub fn descartes(&self) -> [i64; 3] {
        [self.curvature, self.curvature_center[0], self.curvature_center[1]]
    }

    pub fn radius(&self) -> Option<f64> {
        (!self.is_line()).then(|| 1.0 / self.curvature as f64)
    }

    pub fn center(&self) -> Option<[f64; 2]> {
        (!self.is_line()).then(|| {
            let b = self.curvature as f64;
            [self.curvature_center[0] as f64 / b, self.curvature_center[1] as f64 / b]
        })
    }

    /// The circle as a generalized sphere in `R²`.
    pub fn to_sphere(&self) -> GeneralizedSphere {
        match (self.center(), self.radius()) {
            (Some(c), Some(r)) => GeneralizedSphere::Sphere { center: c.to_vec(), radius: r },
            _ => GeneralizedSphere::Plane {
                normal: vec![self.curvature_center[0] as f64, self.curvature_center[1] as f64],
                offset: self.line_offset.unwrap_or(0) as f64,
            },
        }
    }
}

/// A translate of a stored circle: `shift` is the horizontal offset in
/// units of length. Lines always carry shift 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CircleRef {
    pub id: usize,
    pub shift: i64,
}

/// How pairs of circles are grouped into orthogeodesics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DedupStrategy {
    /// Unordered pairs of packing elements modulo `x ↦ x + period`.
    TranslationOnly,
    /// As above, also modulo the half-turn `(x, y) ↦ (-x, 2 - y)`.
    TranslationPlusHalfTurn,
    /// Perpendiculars from the line `y = 0` to the circles whose foot lies
    /// in a fundamental domain for the stabilizer of that line: the strip
    /// `-4 ≤ x < 4` outside the half-discs of radius 2 about `(±2, 0)`.
    #[default]
    BoundaryStabilizer,
}

impl std::str::FromStr for DedupStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "translation-only" => Ok(DedupStrategy::TranslationOnly),
            "translation-plus-half-turn" => Ok(DedupStrategy::TranslationPlusHalfTurn),
            "boundary-stabilizer" => Ok(DedupStrategy::BoundaryStabilizer),
            other => Err(Error::domain(format!(
                "unknown strategy {other:?}; expected translation-only, translation-plus-half-turn or boundary-stabilizer"
            ))),
        }
    }
}

impl std::fmt::Display for DedupStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DedupStrategy::TranslationOnly => "translation-only",
            DedupStrategy::TranslationPlusHalfTurn => "translation-plus-half-turn",
            DedupStrategy::BoundaryStabilizer => "boundary-stabilizer",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingConfig {
    /// Largest curvature generated, `K ≥ 1`.
    pub curvature_bound: u64,
    /// Horizontal period used to canonicalize circles; a positive even
    /// integer since the packing is 2-periodic.
    pub dedup_period: i64,
    /// Pairs whose ortholength exceeds this are dropped.
    pub length_cutoff: f64,
    pub strategy: DedupStrategy,
    /// Stop generating after this many circles and flag the result partial.
    pub max_circles: Option<usize>,
    /// Curvature bounds at which `identity_residual` reports partial sums.
    /// Defaults to the powers of ten below `curvature_bound`, then the bound.
    pub schedule: Option<Vec<u64>>,
}

impl Default for PackingConfig {
    fn default() -> Self {
        PackingConfig {
            curvature_bound: 1000,
            dedup_period: 2,
            length_cutoff: 12.0,
            strategy: DedupStrategy::default(),
            max_circles: None,
            schedule: None,
        }
    }
}

impl PackingConfig {
    pub fn with_bound(curvature_bound: u64) -> Self {
        PackingConfig { curvature_bound, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.curvature_bound < 1 || self.curvature_bound > MAX_CURVATURE_BOUND {
            return Err(Error::domain(format!(
                "curvature bound must lie in [1, {MAX_CURVATURE_BOUND}], got {}",
                self.curvature_bound
            )));
        }
        if self.dedup_period <= 0 || self.dedup_period % 2 != 0 || self.dedup_period > 1 << 20 {
            return Err(Error::domain(format!("dedup period must be a positive even integer, got {}", self.dedup_period)));
        }
        if !(self.length_cutoff > 7f64.acosh()) || !self.length_cutoff.is_finite() || self.length_cutoff > 700.0 {
            return Err(Error::domain(format!(
                "length cutoff must be finite and exceed arccosh 7, got {}",
                self.length_cutoff
            )));
        }
        if let Some(s) = &self.schedule {
            if s.is_empty() || s.iter().any(|&k| k < 1 || k > self.curvature_bound) {
                return Err(Error::domain("schedule entries must lie in [1, curvature_bound]"));
            }
        }
        Ok(())
    }

    /// The effective schedule, sorted and deduplicated.
    pub fn schedule(&self) -> Vec<u64> {
        let mut s = self.schedule.clone().unwrap_or_else(|| {
            let mut v: Vec<u64> = std::iter::successors(Some(1u64), |k| k.checked_mul(10))
                .take_while(|&k| k < self.curvature_bound)
                .collect();
            v.push(self.curvature_bound);
            v
        });
        s.sort_unstable();
        s.dedup();
        s
    }
}

/// Circles of one period of the packing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Packing {
    pub circles: Vec<ApollonianCircle>,
    /// True when generation stopped at `max_circles`.
    pub partial: bool,
    pub curvature_bound: u64,
    pub period: i64,
}

type Descartes = [i64; 3];

const LINE_BOTTOM: Descartes = [0, 0, -1];
const LINE_TOP: Descartes = [0, 0, 1];
const ROOT_LEFT: Descartes = [1, 0, 1];
const ROOT_RIGHT: Descartes = [1, 2, 1];

fn reflect(a: &Descartes, b: &Descartes, c: &Descartes, d: &Descartes) -> Descartes {
    std::array::from_fn(|i| 2 * (a[i] + b[i] + c[i]) - d[i])
}

/// Sort key: lines first, then by curvature, height and horizontal position.
fn circle_order(c: &Descartes) -> (i64, i64, i64) {
    (c[0], c[2], c[1])
}

/// Generate the strip packing up to curvature `K`, one circle per
/// translation class modulo `dedup_period`, by breadth-first Descartes
/// reflection from the root quadruple (two lines and two unit circles).
///
/// Each level of the search is expanded in parallel; the output is sorted by
/// a canonical key, so it does not depend on the worker count.
pub fn generate_strip_packing(config: &PackingConfig) -> Result<Packing> {
    config.validate()?;
    let k = config.curvature_bound as i64;
    // The two curvilinear triangles between the root circles and a line.
    let mut frontier: Vec<([Descartes; 3], Descartes)> =
        vec![([LINE_BOTTOM, ROOT_LEFT, ROOT_RIGHT], LINE_TOP), ([LINE_TOP, ROOT_LEFT, ROOT_RIGHT], LINE_BOTTOM)];
    let mut found: Vec<(Descartes, [Descartes; 3])> = Vec::new();
    let budget = config.max_circles.unwrap_or(usize::MAX);
    let per_period = (config.dedup_period / 2) as usize;
    let mut partial = false;
    while !frontier.is_empty() {
        let children: Vec<(Descartes, [Descartes; 3])> = frontier
            .par_iter()
            .filter_map(|(t, d)| {
                let c = reflect(&t[0], &t[1], &t[2], d);
                (c[0] <= k).then_some((c, *t))
            })
            .collect();
        // 3 fixed elements per period plus everything found so far.
        if (3 + found.len() + children.len()).saturating_mul(per_period) > budget {
            let room = (budget / per_period).saturating_sub(3 + found.len());
            let mut children = children;
            children.sort_by_key(|(c, _)| circle_order(c));
            children.truncate(room);
            found.extend(children);
            partial = true;
            break;
        }
        frontier = children
            .iter()
            .flat_map(|(c, [a, b, d])| [([*a, *b, *c], *d), ([*a, *c, *d], *b), ([*c, *b, *d], *a)])
            .collect();
        found.extend(children);
    }

    let mut all: Vec<(Descartes, Option<[Descartes; 3]>, Option<i64>)> =
        vec![(LINE_BOTTOM, None, Some(0)), (LINE_TOP, None, Some(2))];
    for j in 0..per_period as i64 {
        let dx = 2 * j;
        let shift = |c: &Descartes| [c[0], c[1] + c[0] * dx, c[2]];
        all.push((shift(&ROOT_LEFT), None, None));
        for (c, parents) in &found {
            all.push((shift(c), Some(parents.map(|p| shift(&p))), None));
        }
    }
    all.sort_by_key(|(c, _, _)| circle_order(c));
    let circles = all
        .into_iter()
        .enumerate()
        .map(|(id, (c, parents, line_offset))| ApollonianCircle {
            id,
            curvature: c[0],
            curvature_center: [c[1], c[2]],
            line_offset,
            parents,
        })
        .collect();
    Ok(Packing { circles, partial, curvature_bound: config.curvature_bound, period: config.dedup_period })
}

impl Packing {
    /// The sub-packing of circles with curvature at most `k`, keeping ids.
    pub fn restrict(&self, k: u64) -> Packing {
        Packing {
            circles: self.circles.iter().filter(|c| c.curvature as u64 <= k).cloned().collect(),
            partial: self.partial,
            curvature_bound: k.min(self.curvature_bound),
            period: self.period,
        }
    }

    /// Descartes data of every circle after translating by `dx` and reducing
    /// back into the period window, sorted canonically.
    pub fn translated_canonical(&self, dx: i64) -> Vec<Descartes> {
        let mut v: Vec<Descartes> = self
            .circles
            .iter()
            .map(|c| {
                let [b, wx, wy] = c.descartes();
                if b == 0 {
                    [b, wx, wy]
                } else {
                    [b, (wx + b * dx).rem_euclid(b * self.period), wy]
                }
            })
            .collect();
        v.sort_by_key(circle_order);
        v
    }

    /// Check the Descartes relation and the tangencies of every stored
    /// quadruple, and that every circle lies in the strip, exactly.
    pub fn verify_descartes(&self) -> Result<()> {
        for c in &self.circles {
            if !c.is_line() {
                let [b, wx, wy] = c.descartes();
                // wy/b - 1/b >= 0 and wy/b + 1/b <= 2
                if wy < 1 || wy + 1 > 2 * b || !(0..b * self.period).contains(&wx) {
                    return Err(Error::domain(format!("circle {} leaves the strip or period window", c.id)));
                }
            }
            let Some(parents) = c.parents else { continue };
            let q = [c.descartes(), parents[0], parents[1], parents[2]];
            let s: i128 = q.iter().map(|x| i128::from(x[0])).sum();
            let s2: i128 = q.iter().map(|x| i128::from(x[0]).pow(2)).sum();
            if s * s != 2 * s2 {
                return Err(Error::domain(format!("Descartes relation fails for circle {}", c.id)));
            }
            for i in 0..4 {
                for j in i + 1..4 {
                    if inversive_distance_exact(&q[i], &q[j]) != Some(RationalKey::Small(1, 1)) {
                        return Err(Error::domain(format!("circle {} is not tangent to its parents", c.id)));
                    }
                }
            }
        }
        Ok(())
    }
}

/// An exact rational number, reduced, with positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(pub BigRational);

impl ExactRational {
    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// `arccosh` of the value, computed from the exact excess over 1.
    pub fn arccosh(&self) -> f64 {
        let excess = (&self.0 - BigRational::one()).to_f64().unwrap_or(f64::NAN);
        (excess + (excess * (2.0 + excess)).sqrt()).ln_1p()
    }
}

impl std::fmt::Display for ExactRational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.denom().is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RationalRepr {
    num: String,
    den: String,
}

impl Serialize for ExactRational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RationalRepr { num: self.numer().to_string(), den: self.denom().to_string() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExactRational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = RationalRepr::deserialize(d)?;
        let num: BigInt = r.num.parse().map_err(D::Error::custom)?;
        let den: BigInt = r.den.parse().map_err(D::Error::custom)?;
        if den.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(ExactRational(BigRational::new(num, den)))
    }
}

/// Aggregation key: reduced `i128` fraction when it fits, big otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum RationalKey {
    Small(i128, i128),
    Big(BigRational),
}

impl RationalKey {
    fn new_small(num: i128, den: i128) -> Self {
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i128;
        let (num, den) = (num / g, den / g);
        if den < 0 {
            RationalKey::Small(-num, -den)
        } else {
            RationalKey::Small(num, den)
        }
    }

    fn from_big(r: BigRational) -> Self {
        match (r.numer().to_i128(), r.denom().to_i128()) {
            (Some(n), Some(d)) => RationalKey::Small(n, d),
            _ => RationalKey::Big(r),
        }
    }

    fn to_exact(&self) -> ExactRational {
        match self {
            RationalKey::Small(n, d) => ExactRational(BigRational::new(BigInt::from(*n), BigInt::from(*d))),
            RationalKey::Big(r) => ExactRational(r.clone()),
        }
    }

    fn to_f64(&self) -> f64 {
        match self {
            RationalKey::Small(n, d) => *n as f64 / *d as f64,
            RationalKey::Big(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    fn exceeds_one(&self) -> bool {
        match self {
            RationalKey::Small(n, d) => n > d,
            RationalKey::Big(r) => r > &BigRational::one(),
        }
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Exact inversive distance between two packing elements, unsigned.
/// `None` for the pair of lines, which meet at infinity.
fn inversive_distance_exact(p: &Descartes, q: &Descartes) -> Option<RationalKey> {
    let [b1, x1, y1] = p.map(i128::from);
    let [b2, x2, y2] = q.map(i128::from);
    match (b1 == 0, b2 == 0) {
        (true, true) => Some(RationalKey::Small(1, 1)),
        // Line {ν·p = c} with outward normal ν: δ = |ν·w - c·b|, where
        // c = 0 for the bottom line and c = 2 for the top one.
        (true, false) | (false, true) => {
            let (line, circle) = if b1 == 0 { (p, q) } else { (q, p) };
            let offset = if line[2] < 0 { 0 } else { 2 };
            let [b, wx, wy] = circle.map(i128::from);
            let v = i128::from(line[1]) * wx + i128::from(line[2]) * wy - offset * b;
            Some(RationalKey::Small(v.abs(), 1))
        }
        (false, false) => {
            let small = (|| {
                let dx = b2.checked_mul(x1)?.checked_sub(b1.checked_mul(x2)?)?;
                let dy = b2.checked_mul(y1)?.checked_sub(b1.checked_mul(y2)?)?;
                let num = dx
                    .checked_mul(dx)?
                    .checked_add(dy.checked_mul(dy)?)?
                    .checked_sub(b1 * b1)?
                    .checked_sub(b2 * b2)?;
                Some(RationalKey::new_small(num.abs(), 2 * b1 * b2))
            })();
            small.or_else(|| {
                let [b1, x1, y1] = p.map(BigInt::from);
                let [b2, x2, y2] = q.map(BigInt::from);
                let dx = &b2 * &x1 - &b1 * &x2;
                let dy = &b2 * &y1 - &b1 * &y2;
                let num = &dx * &dx + &dy * &dy - &b1 * &b1 - &b2 * &b2;
                Some(RationalKey::from_big(BigRational::new(num.abs(), BigInt::from(2) * b1 * b2)))
            })
        }
    }
}

/// One ortholength of the spectrum, with the number of orthogeodesics of
/// that length and one witnessing pair of packing elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthospectrumEntry {
    pub length: f64,
    pub multiplicity: u64,
    pub witness: [CircleRef; 2],
    pub inversive_distance: ExactRational,
}

struct Hit {
    key: RationalKey,
    witness: [CircleRef; 2],
    /// Weight in halves: 2 for an ordinary class, 1 for each class of a
    /// half-turn pair, so that half-turn orbits sum to an integer.
    halves: u64,
}

fn translate(c: &Descartes, dx: i64) -> Descartes {
    [c[0], c[1] + c[0] * dx, c[2]]
}

/// The orthospectrum visible in `packing`, grouped by exact inversive
/// distance. Tangent pairs are excluded exactly; pairs with `ℓ > L_max` are
/// dropped. Entries are sorted by increasing length.
pub fn partial_orthospectrum(packing: &Packing, config: &PackingConfig) -> Result<Vec<OrthospectrumEntry>> {
    config.validate()?;
    if packing.period != config.dedup_period {
        return Err(Error::domain("packing was generated with a different period"));
    }
    let cosh_max = config.length_cutoff.cosh();
    let hits = match config.strategy {
        DedupStrategy::BoundaryStabilizer => boundary_stabilizer_hits(packing, cosh_max),
        DedupStrategy::TranslationOnly => translation_hits(packing, cosh_max, false),
        DedupStrategy::TranslationPlusHalfTurn => translation_hits(packing, cosh_max, true),
    };
    let mut groups: HashMap<RationalKey, (u64, [CircleRef; 2])> = HashMap::new();
    for h in hits {
        let e = groups.entry(h.key).or_insert((0, h.witness));
        e.0 += h.halves;
        e.1 = e.1.min(h.witness);
    }
    let mut entries: Vec<OrthospectrumEntry> = groups
        .into_iter()
        .map(|(key, (halves, witness))| {
            debug_assert!(halves % 2 == 0);
            let exact = key.to_exact();
            OrthospectrumEntry { length: exact.arccosh(), multiplicity: halves / 2, witness, inversive_distance: exact }
        })
        .collect();
    entries.sort_by(|a, b| a.inversive_distance.cmp(&b.inversive_distance));
    Ok(entries)
}

fn within_cutoff(key: &RationalKey, cosh_max: f64) -> bool {
    key.exceeds_one() && key.to_f64() <= cosh_max
}

fn boundary_stabilizer_hits(packing: &Packing, cosh_max: f64) -> Vec<Hit> {
    let bottom = packing.circles.iter().find(|c| c.descartes() == LINE_BOTTOM).map_or(0, |c| c.id);
    let p = packing.period;
    packing
        .circles
        .par_iter()
        .filter(|c| !c.is_line())
        .flat_map_iter(|c| {
            let [b, wx, wy] = c.descartes();
            let key = RationalKey::Small(i128::from(wy), 1);
            let keep = within_cutoff(&key, cosh_max);
            // Translates by multiples of the period landing in -4 ≤ x < 4.
            let lo = (-4 * b - wx).div_euclid(b * p) - 1;
            let hi = (4 * b - wx).div_euclid(b * p) + 1;
            (lo..=hi).filter(move |_| keep).filter_map(move |k| {
                let shift = k * p;
                let x = i128::from(wx + b * shift);
                let (b, wy) = (i128::from(b), i128::from(wy));
                let inside = -4 * b <= x
                    && x < 4 * b
                    && (x - 2 * b).pow(2) + wy * wy > 4 * b * b
                    && (x + 2 * b).pow(2) + wy * wy - 1 > 4 * b * b;
                inside.then_some(Hit {
                    key: RationalKey::Small(wy, 1),
                    witness: [CircleRef { id: bottom, shift: 0 }, CircleRef { id: c.id, shift }],
                    halves: 2,
                })
            })
        })
        .collect()
}

/// Key of a translation class of pairs: smaller id first with the relative
/// shift of the second element.
fn class_key(a: CircleRef, b: CircleRef, lines: &[bool]) -> (usize, usize, i64) {
    if lines[a.id] || lines[b.id] {
        return (a.id.min(b.id), a.id.max(b.id), 0);
    }
    match a.id.cmp(&b.id) {
        std::cmp::Ordering::Less => (a.id, b.id, b.shift - a.shift),
        std::cmp::Ordering::Greater => (b.id, a.id, a.shift - b.shift),
        std::cmp::Ordering::Equal => (a.id, a.id, (b.shift - a.shift).abs()),
    }
}

fn translation_hits(packing: &Packing, cosh_max: f64, half_turn: bool) -> Vec<Hit> {
    let p = packing.period;
    // Work with positions in id order; witnesses are mapped back to ids.
    let mut circles: Vec<&ApollonianCircle> = packing.circles.iter().collect();
    circles.sort_by_key(|c| c.id);
    let lines: Vec<bool> = circles.iter().map(|c| c.is_line()).collect();
    let index: HashMap<Descartes, usize> = circles.iter().enumerate().map(|(i, c)| (c.descartes(), i)).collect();
    // The half-turn (x, y) ↦ (-x, 2 - y) on a positioned element.
    let rotate = |r: CircleRef| -> CircleRef {
        let [b, wx, wy] = translate(&circles[r.id].descartes(), r.shift);
        if b == 0 {
            return CircleRef { id: index[&[0, 0, -wy]], shift: 0 };
        }
        let (x, y) = (-wx, 2 * b - wy);
        let canon = x.rem_euclid(b * p);
        CircleRef { id: index[&[b, canon, y]], shift: (x - canon) / b }
    };
    let hit = |a: CircleRef, b: CircleRef, key: RationalKey| -> Hit {
        let halves = if half_turn {
            let k = class_key(a, b, &lines);
            if class_key(rotate(a), rotate(b), &lines) == k {
                2
            } else {
                1
            }
        } else {
            2
        };
        let (a, b) = (a.min(b), a.max(b));
        let to_id = |r: CircleRef| CircleRef { id: circles[r.id].id, shift: r.shift };
        Hit { key, witness: [to_id(a), to_id(b)], halves }
    };
    circles
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, ci)| {
            let mut out = Vec::new();
            let di = ci.descartes();
            let a = CircleRef { id: i, shift: 0 };
            for (j, cj) in circles.iter().enumerate().skip(i) {
                let dj = cj.descartes();
                match (ci.is_line(), cj.is_line()) {
                    (true, true) => continue,
                    (true, false) | (false, true) => {
                        let key = inversive_distance_exact(&di, &dj).expect("line-circle pair");
                        if within_cutoff(&key, cosh_max) {
                            out.push(hit(a, CircleRef { id: j, shift: 0 }, key));
                        }
                    }
                    (false, false) => {
                        let (ri, rj) = (1.0 / di[0] as f64, 1.0 / dj[0] as f64);
                        let reach = (2.0 * cosh_max * ri * rj + ri * ri + rj * rj).sqrt();
                        let gap = dj[1] as f64 * rj - di[1] as f64 * ri;
                        let lo = ((-reach - gap) / p as f64).floor() as i64 - 1;
                        let hi = ((reach - gap) / p as f64).ceil() as i64 + 1;
                        let lo = if i == j { lo.max(1) } else { lo };
                        for k in lo..=hi {
                            let b = CircleRef { id: j, shift: k * p };
                            let Some(key) = inversive_distance_exact(&di, &translate(&dj, k * p)) else { continue };
                            if within_cutoff(&key, cosh_max) {
                                out.push(hit(a, b, key));
                            }
                        }
                    }
                }
            }
            out
        })
        .collect()
}

/// The three boundary cusps of the cut Whitehead link complement: two red
/// cusps with `d = 2^{1/4}`, `vol = √2/2` and one blue cusp with
/// `d = 2^{-1/4}`, `vol = √2`.
pub fn whitehead_cusp_data() -> Vec<CuspData> {
    let n = Dimension::new(3).expect("3 is a valid dimension");
    let q = 2f64.powf(0.25);
    let s = std::f64::consts::SQRT_2;
    vec![
        CuspData::new("r1", q, s / 2.0, n).expect("valid cusp"),
        CuspData::new("r2", q, s / 2.0, n).expect("valid cusp"),
        CuspData::new("b'", 1.0 / q, s, n).expect("valid cusp"),
    ]
}

/// The volume of the Whitehead link complement, `4G`.
pub fn whitehead_volume() -> f64 {
    4.0 * catalan_constant()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchedulePoint {
    pub curvature_bound: u64,
    pub circles: usize,
    pub distinct_lengths: usize,
    pub orthogeodesics: u64,
    pub ortho_sum: f64,
    pub total: f64,
    pub residual: f64,
    pub min_length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    /// `Σ F₃(ℓ)` over the bin.
    pub mass: f64,
}

/// Extrapolated contributions not seen in the final partial sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    /// Lengths beyond the cutoff, from an exponential fit of the upper half
    /// of the length histogram, `N(ℓ) ≈ C e^{αℓ}`, integrated against `F₃`.
    pub cutoff_tail: Option<f64>,
    pub growth_exponent: Option<f64>,
    /// Circles beyond the curvature bound, by geometric extrapolation of
    /// the last two increments of the schedule.
    pub curvature_tail: Option<f64>,
    pub projected_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub schema: String,
    pub strategy: DedupStrategy,
    pub length_cutoff: f64,
    pub target: f64,
    pub cusp_term: f64,
    pub ortho_sum: f64,
    pub residual: f64,
    #[serde(rename = "K_schedule")]
    pub k_schedule: Vec<SchedulePoint>,
    pub monotone: bool,
    pub bound_satisfied: bool,
    pub partial: bool,
    pub histogram: Vec<HistogramBin>,
    pub tail: TailEstimate,
    pub notes: Vec<String>,
}

/// `Σ F₃(ℓ) · multiplicity`, summed from the longest length down.
pub fn ortho_sum(entries: &[OrthospectrumEntry]) -> Result<f64> {
    let mut s = 0.0;
    for e in entries.iter().rev() {
        s += f3_closed(e.length)? * e.multiplicity as f64;
    }
    Ok(s)
}

/// Run the volume identity for the cut Whitehead link complement: partial
/// sums `S(K) = Σ F₃(ℓ) + 3` over the schedule, compared with `4G`.
pub fn identity_residual(config: &PackingConfig) -> Result<IdentityReport> {
    config.validate()?;
    let n = Dimension::new(3)?;
    let cusp = cusp_term(&whitehead_cusp_data(), n)?;
    let target = whitehead_volume();
    let packing = generate_strip_packing(config)?;
    let mut points = Vec::new();
    let mut last_entries = Vec::new();
    for k in config.schedule() {
        let sub = packing.restrict(k);
        let entries = partial_orthospectrum(&sub, config)?;
        let sum = ortho_sum(&entries)?;
        points.push(SchedulePoint {
            curvature_bound: k,
            circles: sub.circles.len(),
            distinct_lengths: entries.len(),
            orthogeodesics: entries.iter().map(|e| e.multiplicity).sum(),
            ortho_sum: sum,
            total: sum + cusp,
            residual: target - sum - cusp,
            min_length: entries.first().map(|e| e.length),
        });
        last_entries = entries;
    }
    let last = points.last().expect("schedule is non-empty").clone();
    let monotone = points.windows(2).all(|w| w[1].total >= w[0].total);
    let bound_satisfied = points.iter().all(|p| p.total <= target + BOUND_SLACK);
    let histogram = length_histogram(&last_entries, config.length_cutoff)?;
    let tail = tail_estimate(&points, &histogram, config.length_cutoff, last.total);
    let notes = vec![
        format!("strategy {}: {}", config.strategy, strategy_note(config.strategy)),
        "boundary: the lines y = 0 and y = 2 and all packing circles are treated as lifts of the totally geodesic boundary".into(),
    ];
    Ok(IdentityReport {
        schema: crate::SCHEMA.into(),
        strategy: config.strategy,
        length_cutoff: config.length_cutoff,
        target,
        cusp_term: cusp,
        ortho_sum: last.ortho_sum,
        residual: last.residual,
        k_schedule: points,
        monotone,
        bound_satisfied,
        partial: packing.partial,
        histogram,
        tail,
        notes,
    })
}

fn strategy_note(s: DedupStrategy) -> &'static str {
    match s {
        DedupStrategy::TranslationOnly => "pairs of packing elements modulo the horizontal period",
        DedupStrategy::TranslationPlusHalfTurn => "pairs modulo the period and the half-turn about (0, 1)",
        DedupStrategy::BoundaryStabilizer => {
            "perpendiculars from y = 0 with foot in -4 <= x < 4 outside the radius-2 half-discs about (-2, 0) and (2, 0)"
        }
    }
}

/// Histogram of the spectrum in bins of width 1/4 up to the cutoff.
pub fn length_histogram(entries: &[OrthospectrumEntry], cutoff: f64) -> Result<Vec<HistogramBin>> {
    const WIDTH: f64 = 0.25;
    let bins = (cutoff / WIDTH).ceil() as usize;
    let mut hist: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin { lo: i as f64 * WIDTH, hi: (i + 1) as f64 * WIDTH, count: 0, mass: 0.0 })
        .collect();
    for e in entries {
        let i = ((e.length / WIDTH) as usize).min(bins - 1);
        hist[i].count += e.multiplicity;
        hist[i].mass += f3_closed(e.length)? * e.multiplicity as f64;
    }
    Ok(hist)
}

fn tail_estimate(points: &[SchedulePoint], hist: &[HistogramBin], cutoff: f64, total: f64) -> TailEstimate {
    let curvature_tail = match points {
        [.., a, b, c] => {
            let (d1, d2) = (b.total - a.total, c.total - b.total);
            let r = d2 / d1;
            (d1 > 0.0 && d2 >= 0.0 && r < 1.0).then(|| d2 * r / (1.0 - r))
        }
        _ => None,
    };
    // Least-squares fit of ln(count) against bin centre over the populated
    // upper half of the observed range.
    let populated: Vec<&HistogramBin> = hist.iter().filter(|b| b.count > 0).collect();
    let fit = populated.first().and_then(|first| {
        let mid = 0.5 * (first.lo + cutoff);
        let pts: Vec<(f64, f64)> = populated
            .iter()
            .filter(|b| b.lo >= mid)
            .map(|b| (0.5 * (b.lo + b.hi), (b.count as f64).ln()))
            .collect();
        if pts.len() < 3 {
            return None;
        }
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / m, sy / m);
        let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let alpha = sxy / sxx;
        Some((alpha, my - alpha * mx, hist[0].hi - hist[0].lo))
    });
    let (growth_exponent, cutoff_tail) = match fit {
        Some((alpha, intercept, width)) if alpha < 2.0 => {
            // Continue the fitted counts per bin past the cutoff.
            let mut s = 0.0;
            let mut lo = cutoff;
            while lo < cutoff + 40.0 {
                let c = lo + 0.5 * width;
                s += (intercept + alpha * c).exp() * f3_closed(c).unwrap_or(0.0);
                lo += width;
            }
            (Some(alpha), Some(s))
        }
        Some((alpha, _, _)) => (Some(alpha), None),
        None => (None, None),
    };
    TailEstimate {
        cutoff_tail,
        growth_exponent,
        curvature_tail,
        projected_total: total + cutoff_tail.unwrap_or(0.0) + curvature_tail.unwrap_or(0.0),
    }
}
