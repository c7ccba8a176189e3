//! Fast invariant suites, one per module, runnable from a release binary.
//! Sample sizes are kept small so that each suite finishes in seconds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::apollonian::{generate_strip_packing, identity_residual, partial_orthospectrum, whitehead_cusp_data, PackingConfig};
use crate::bk::{f3_closed, f3_inverse, fn_numeric};
use crate::cusp::{cusp_integral_closed, cusp_integral_quadrature, cusp_term, vol_vc_closed, vol_vc_montecarlo, CuspIntegralKind};
use crate::geometry::{ortholength, rescale_cusp, CuspData, GeneralizedSphere, Isometry};
use crate::measure::{liouville_invariance_check, sharded_estimate, sphere_volume};
use crate::special::{cusp_coefficient, cusp_coefficient_real, gamma_fn, harmonic, harmonic_real, Dimension};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Special,
    Geometry,
    Measure,
    Bk,
    Cusp,
    Apollonian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

struct Recorder {
    suite: Suite,
    checks: Vec<Check>,
}

impl Recorder {
    fn check(&mut self, name: &str, outcome: crate::Result<(bool, String)>) {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, e.to_string()));
        self.checks.push(Check { suite: self.suite, name: name.into(), passed, detail });
    }
}

fn dim(n: u32) -> Dimension {
    Dimension::new(n).expect("dimension is at least 2")
}

/// Run one suite and return its checks.
pub fn run(suite: Suite) -> Vec<Check> {
    let mut r = Recorder { suite, checks: Vec::new() };
    match suite {
        Suite::Special => special(&mut r),
        Suite::Geometry => geometry(&mut r),
        Suite::Measure => measure(&mut r),
        Suite::Bk => bk(&mut r),
        Suite::Cusp => cusp(&mut r),
        Suite::Apollonian => apollonian(&mut r),
    }
    r.checks
}

fn special(r: &mut Recorder) {
    r.check("cusp coefficient at n = 3", cusp_coefficient(dim(3)).map(|c| ((c - 1.0).abs() <= 1e-12, format!("{c}"))));
    r.check(
        "surface limit pi/3",
        cusp_coefficient_real(2.0 + 1e-6).map(|c| ((c - std::f64::consts::FRAC_PI_3).abs() < 1e-4, format!("{c}"))),
    );
    r.check(
        "duplication identity n = 3..20",
        (3..20u32).try_fold(0.0f64, |worst, n| {
            let nf = f64::from(n);
            let lhs = 2f64.powf(2.0 - nf) * std::f64::consts::PI.sqrt() * gamma_fn(nf - 1.0)?;
            let rhs = gamma_fn(0.5 * (nf - 1.0))? * gamma_fn(0.5 * nf)?;
            Ok(worst.max((lhs - rhs).abs() / gamma_fn(0.5 * nf)?.powi(2)))
        })
        .map(|w| (w <= 1e-10, format!("max deviation {w:e}"))),
    );
    r.check(
        "harmonic_real extends harmonic",
        (0..50u64)
            .try_fold(0.0f64, |worst, m| Ok(worst.max((harmonic_real(m as f64)? - harmonic(m)).abs())))
            .map(|w| (w <= 1e-12, format!("max deviation {w:e}"))),
    );
    r.check(
        "cusp coefficient decays",
        (|| {
            let v: Vec<f64> = [6, 10, 100, 1000].iter().map(|&n| cusp_coefficient(dim(n))).collect::<crate::Result<_>>()?;
            Ok((v.windows(2).all(|w| w[1] < w[0]) && v[3] > 0.0, format!("{v:?}")))
        })(),
    );
}

fn geometry(r: &mut Recorder) {
    let mut rng = ChaCha8Rng::seed_from_u64(crate::DEFAULT_SEED);
    r.check(
        "ortholength invariant under random isometries",
        (|| {
            let a = GeneralizedSphere::sphere(vec![0.0, 0.0], 1.0)?;
            let b = GeneralizedSphere::sphere(vec![3.0, 1.0], 0.5)?;
            let l = ortholength(&a, &b)?;
            let mut worst = 0.0f64;
            for _ in 0..50 {
                let g = Isometry::random(2, &mut rng);
                worst = worst.max((ortholength(&g.apply_sphere(&a), &g.apply_sphere(&b))? - l).abs());
            }
            Ok((worst <= 1e-9, format!("max deviation {worst:e}")))
        })(),
    );
    r.check(
        "ortholength of unit circles 4 apart is arccosh 7",
        (|| {
            let l = ortholength(
                &GeneralizedSphere::sphere(vec![0.0, 1.0], 1.0)?,
                &GeneralizedSphere::sphere(vec![4.0, 1.0], 1.0)?,
            )?;
            Ok(((l - 7f64.acosh()).abs() < 1e-12, format!("{l}")))
        })(),
    );
    r.check(
        "cusp ratio fixed by rescaling",
        (|| {
            let c = CuspData::new("c", 1.3, 0.4, dim(4))?;
            let s = rescale_cusp(&c, 2.7)?;
            let dev = (s.invariant_ratio() / c.invariant_ratio() - 1.0).abs();
            Ok((dev < 1e-12, format!("{dev:e}")))
        })(),
    );
}

fn measure(r: &mut Recorder) {
    r.check(
        "ball measure and invariance under 5 isometries",
        liouville_invariance_check(dim(3), 0.5, 5, 100_000, crate::DEFAULT_SEED).map(|rep| {
            (
                rep.max_pairwise_z < 3.0 && rep.max_exact_z < 3.0,
                format!("exact {}, max pairwise z {:.2}, max z vs exact {:.2}", rep.exact, rep.max_pairwise_z, rep.max_exact_z),
            )
        }),
    );
    r.check(
        "determinism",
        (|| {
            use rand::Rng;
            let a = sharded_estimate(50_000, 9, |g| g.random::<f64>())?;
            let b = sharded_estimate(50_000, 9, |g| g.random::<f64>())?;
            Ok((a == b, format!("{}", a.value)))
        })(),
    );
    r.check("sphere volume S^2", Ok(((sphere_volume(2) - 4.0 * std::f64::consts::PI).abs() < 1e-14, format!("{}", sphere_volume(2)))));
}

fn bk(r: &mut Recorder) {
    r.check(
        "F3 round trip",
        (|| {
            let mut worst = 0.0f64;
            for i in 1..=100 {
                let l = 0.1 * f64::from(i);
                worst = worst.max((f3_inverse(f3_closed(l)?)? - l).abs());
            }
            Ok((worst <= 1e-9, format!("max deviation {worst:e}")))
        })(),
    );
    r.check(
        "F3 Monte Carlo at length 1",
        (|| {
            let est = fn_numeric(dim(3), 1.0, 200_000, crate::DEFAULT_SEED)?;
            let exact = f3_closed(1.0)?;
            let z = est.z_score_exact(exact);
            Ok((z < 3.0, format!("{} +- {} vs {exact} (z = {z:.2})", est.value, est.std_error)))
        })(),
    );
    r.check(
        "inverse at 4G - 3",
        f3_inverse(4.0 * crate::special::CATALAN - 3.0).map(|l| ((l - 1.62629).abs() < 1e-4, format!("{l}"))),
    );
}

fn cusp(r: &mut Recorder) {
    use CuspIntegralKind::*;
    r.check(
        "closed forms against quadrature",
        (|| {
            let mut worst = 0.0f64;
            for n in [3, 4, 5] {
                for d in [0.5, 1.0, 2.0] {
                    for kind in [Main, I1, I2, I3] {
                        let closed = cusp_integral_closed(kind, dim(n), d)?;
                        let q = cusp_integral_quadrature(kind, dim(n), d, 1e-8)?;
                        worst = worst.max((closed - q.value).abs() / closed.abs().max(q.magnitude));
                    }
                }
            }
            Ok((worst <= 1e-6, format!("max relative deviation {worst:e}")))
        })(),
    );
    r.check(
        "decomposition I1 - I2 - I3 = Main",
        (|| {
            let f = |k| cusp_integral_closed(k, dim(4), 1.7);
            let dev = ((f(I1)? - f(I2)? - f(I3)?) / f(Main)? - 1.0).abs();
            Ok((dev <= 1e-12, format!("{dev:e}")))
        })(),
    );
    r.check(
        "cusp Monte Carlo, n = 3, d = 1, vol = 1",
        (|| {
            let c = CuspData::new("unit", 1.0, 1.0, dim(3))?;
            let est = vol_vc_montecarlo(&c, 200_000, crate::DEFAULT_SEED)?;
            let exact = vol_vc_closed(&c)?;
            let z = est.z_score_exact(exact);
            Ok((z < 3.0, format!("{} +- {} vs {exact} (z = {z:.2})", est.value, est.std_error)))
        })(),
    );
}

fn apollonian(r: &mut Recorder) {
    r.check(
        "cusp term of the Whitehead data",
        cusp_term(&whitehead_cusp_data(), dim(3)).map(|t| ((t - 3.0).abs() < 1e-12, format!("{t}"))),
    );
    r.check(
        "exact Descartes relations and periodicity",
        (|| {
            let p = generate_strip_packing(&PackingConfig::with_bound(200))?;
            p.verify_descartes()?;
            Ok((p.translated_canonical(0) == p.translated_canonical(2), format!("{} circles", p.circles.len())))
        })(),
    );
    r.check(
        "partial sums monotone and below 4G",
        (|| {
            let cfg = PackingConfig::with_bound(100);
            let rep = identity_residual(&cfg)?;
            let spec = partial_orthospectrum(&generate_strip_packing(&cfg)?, &cfg)?;
            let min = spec.first().map_or(f64::INFINITY, |e| e.length);
            Ok((
                rep.monotone && rep.bound_satisfied && min > 1.62629,
                format!("S(100) = {}, residual {}, shortest length {min}", rep.k_schedule.last().map_or(0.0, |p| p.total), rep.residual),
            ))
        })(),
    );
}
