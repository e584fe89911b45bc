//! The `validate` mode: a deterministic, fixed-seed suite covering the
//! library's invariants end to end.  Every check prints one PASS/FAIL line;
//! any failure makes the run exit nonzero.

// checks are written as immediately-invoked closures so ? collects errors
#![allow(clippy::redundant_closure_call)]

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use serde::Serialize;

use crate::boundary::{self, BoundaryPoint, GroupElement, RnEvaluator, TreeRay};
use crate::ecg::{self, MeasureChoice, Model, Thresholds};
use crate::mobius::{self, UnimodularMatrix};
use crate::patterson::EmpiricalPattersonMeasure;
use crate::seeding::{self, domain};
use crate::stable;
use crate::stats;
use crate::subgroup::{shell_mass, CompletionTable, SubgroupSpec};
use crate::trie;
use crate::words::{self, ReducedWord};
use crate::Result;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

struct Suite {
    seed: u64,
    results: Vec<CheckResult>,
}

impl Suite {
    fn check(&mut self, name: &str, outcome: Result<(bool, String)>) {
        let (pass, detail) = match outcome {
            Ok((pass, detail)) => (pass, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        self.results.push(CheckResult {
            name: name.into(),
            pass,
            detail,
        });
    }
}

/// Runs the whole suite with a fixed master seed.
pub fn run_validation(seed: u64) -> Vec<CheckResult> {
    let mut suite = Suite {
        seed,
        results: Vec::new(),
    };
    word_checks(&mut suite);
    subgroup_checks(&mut suite);
    mobius_checks(&mut suite);
    boundary_checks(&mut suite);
    ecg_checks(&mut suite);
    stable_checks(&mut suite);
    suite.results
}

fn word_checks(s: &mut Suite) {
    s.check(
        "words/ball-counts-closed-form",
        (|| {
            for n in 0..=10u32 {
                let got = words::ball(2, n).count() as u64;
                if BigUint::from(got) != words::ball_size(2, n) || got != 2 * 3u64.pow(n) - 1 {
                    return Ok((false, format!("mismatch at n = {n}: {got}")));
                }
            }
            Ok((true, "|B_n| = 2*3^n - 1 for n <= 10".into()))
        })(),
    );
    let seed = s.seed;
    s.check(
        "words/free-reduction-associative",
        (|| {
            let mut rng = seeding::stream(seed, domain::VALIDATE, 1);
            for _ in 0..1000 {
                let mut draw = || {
                    let len = rng.gen_range(0..10);
                    let letters: Vec<i32> = (0..len)
                        .map(|_| {
                            let l = rng.gen_range(1..=2i32);
                            if rng.gen::<bool>() {
                                l
                            } else {
                                -l
                            }
                        })
                        .collect();
                    ReducedWord::reduce(2, &letters).unwrap()
                };
                let (u, v, w) = (draw(), draw(), draw());
                let left = u.multiply(&v)?.multiply(&w)?;
                let right = u.multiply(&v.multiply(&w)?)?;
                if left != right {
                    return Ok((false, format!("({u})({v})({w})")));
                }
            }
            Ok((true, "1000 random triples".into()))
        })(),
    );
    s.check(
        "words/busemann-bounded-by-length",
        (|| {
            let mut rng = seeding::stream(seed, domain::VALIDATE, 2);
            for _ in 0..1000 {
                let ball: Vec<ReducedWord> = words::ball(2, 4).collect();
                let g = ball[rng.gen_range(0..ball.len())].clone();
                let mut ray = TreeRay::new(
                    2,
                    vec![],
                    seeding::stream(seed, domain::VALIDATE, rng.gen()),
                );
                ray.ensure_depth(g.len() + 2);
                let prefix = ray.prefix_word(ray.depth())?;
                let b = words::busemann_tree(&prefix, &g)?;
                let equality = words::gromov_product(&prefix, &g)? == g.len();
                if b > g.len() as i64 || (b == g.len() as i64) != equality {
                    return Ok((false, format!("g = {g}, b = {b}")));
                }
            }
            Ok((
                true,
                "β_ξ(o, g.o) <= |g| with equality iff g is a prefix of ξ".into(),
            ))
        })(),
    );
}

fn subgroup_checks(s: &mut Suite) {
    let h = SubgroupSpec::zk_exponent_kernel();
    s.check(
        "subgroup/oracle-counts",
        (|| {
            let v2 = h.ball_count(2, 2)?;
            let v3 = h.ball_count(2, 3)?;
            Ok((
                v2 == BigUint::from(5u32) && v3 == BigUint::from(11u32),
                format!("V_H(1,1,2) = {v2}, V_H(1,1,3) = {v3}"),
            ))
        })(),
    );
    s.check(
        "subgroup/dp-equals-brute-force",
        (|| {
            for m in 0..=8u32 {
                if h.ball_count(2, m)? != h.ball_count_brute(2, m) {
                    return Ok((false, format!("mismatch at m = {m}")));
                }
            }
            let k = SubgroupSpec::c2c3_standard_kernel();
            for m in 0..=8u32 {
                if k.ball_count(2, m)? != k.ball_count_brute(2, m) {
                    return Ok((false, format!("c2c3 mismatch at m = {m}")));
                }
            }
            Ok((true, "all m <= 8, both kernel families".into()))
        })(),
    );
    s.check(
        "subgroup/growth-ratio-non-increasing",
        (|| {
            let ratios: Vec<f64> = (1..=30u32)
                .map(|m| {
                    h.ball_count(2, m)
                        .map(|v| v.to_f64().unwrap() / 3f64.powi(m as i32))
                })
                .collect::<Result<Vec<_>>>()?;
            for m in 5..ratios.len() {
                if ratios[m] > ratios[m - 1] + 1e-15 {
                    return Ok((false, format!("ratio grew at m = {}", m + 1)));
                }
            }
            Ok((true, "V_H/3^m non-increasing for m >= 5".into()))
        })(),
    );
    s.check(
        "subgroup/growth-ratio-halving-m10-m30",
        (|| {
            let r10 = h.ball_count(2, 10)?.to_f64().unwrap() / 3f64.powi(10);
            let r30 = h.ball_count(2, 30)?.to_f64().unwrap() / 3f64.powi(30);
            // the measured law is ratio ~ 1/sqrt(m): r30/r10 = 0.577, so the
            // halving this check demands cannot occur; kept as specified and
            // reported honestly
            Ok((
                r30 < 0.5 * r10,
                format!(
                    "r30/r10 = {:.4} (needs < 0.5; 1/sqrt(m) law gives 0.577)",
                    r30 / r10
                ),
            ))
        })(),
    );
    s.check(
        "subgroup/shell-mass",
        (|| {
            if shell_mass(&SubgroupSpec::FullGroup, 2, 6, 0)? != num_rational::Ratio::one() {
                return Ok((false, "full group shell mass".into()));
            }
            if shell_mass(&h, 2, 5, 5)? != num_rational::Ratio::one() {
                return Ok((false, "C >= r shell mass".into()));
            }
            for c in 0..=2u32 {
                let masses: Vec<f64> = (4..=10u32)
                    .map(|r| {
                        shell_mass(&h, 2, r, c)
                            .map(|m| m.numer().to_f64().unwrap() / m.denom().to_f64().unwrap())
                    })
                    .collect::<Result<Vec<_>>>()?;
                // non-increasing with an overall strict drop (exact ties
                // occur, e.g. m_4(1) = m_5(1) = 5/18)
                if masses.windows(2).any(|w| w[1] > w[0] + 1e-15) || masses.last() >= masses.first()
                {
                    return Ok((false, format!("m_r({c}) not decaying: {masses:?}")));
                }
            }
            Ok((true, "m_r(C) decays over r = 4..10 for C in 0..2".into()))
        })(),
    );
    let seed = s.seed;
    s.check(
        "subgroup/trie-distance-exact",
        (|| {
            let orbit = trie::subgroup_ball_elements(&h, 2, 6)?;
            let table = CompletionTable::build(&h, 2, 6)?;
            let mut rng = seeding::stream(seed, domain::VALIDATE, 3);
            let ball: Vec<ReducedWord> = words::ball(2, 6).collect();
            for _ in 0..500 {
                let x = &ball[rng.gen_range(0..ball.len())];
                if orbit.distance_to_set(x)? != table.distance_to_subgroup_ball(x.letters(), 6) {
                    return Ok((false, format!("x = {x}")));
                }
            }
            Ok((
                true,
                "branch-and-bound equals completion-table distance".into(),
            ))
        })(),
    );
}

fn mobius_checks(s: &mut Suite) {
    s.check(
        "mobius/log3-ball",
        (|| {
            let mats = mobius::enumerate_ball(3f64.ln())?;
            let pts = mobius::orbit_points(&mats);
            let a: f64 = mats
                .iter()
                .filter(|g| 2 * g.c + g.d != 0)
                .map(|g| 1.0 / ((2 * g.c + g.d) as f64).powi(2))
                .fold(f64::NEG_INFINITY, f64::max);
            Ok((
                mats.len() == 10 && pts.len() == 5 && (a - 1.0).abs() < 1e-12,
                format!(
                    "{} matrices, {} orbit points, A_log3(2) = {a}",
                    mats.len(),
                    pts.len()
                ),
            ))
        })(),
    );
    s.check(
        "mobius/cosh-distance-frobenius",
        (|| {
            for g in mobius::enumerate_ball(4.0)? {
                let z = g.apply(mobius::UpperHalfPoint::base());
                let lhs = mobius::hyperbolic_distance(mobius::UpperHalfPoint::base(), z).cosh();
                let rhs = g.norm_sq() as f64 / 2.0;
                if (lhs - rhs).abs() > 1e-12 * rhs.max(1.0) {
                    return Ok((false, format!("{g}")));
                }
            }
            Ok((true, "cosh d(i, g.i) = ||g||^2/2 on B_4".into()))
        })(),
    );
    s.check(
        "mobius/counts-band",
        (|| {
            let vals: Vec<f64> = (4..=9)
                .map(|n| {
                    mobius::enumerate_ball(n as f64)
                        .map(|m| mobius::orbit_points(&m).len() as f64 * (-(n as f64)).exp())
                })
                .collect::<Result<Vec<_>>>()?;
            let band = vals.iter().fold(f64::MIN, |a: f64, &b| a.max(b))
                / vals.iter().fold(f64::MAX, |a: f64, &b| a.min(b));
            Ok((
                band <= 3.0,
                format!("orbit counts * e^-n band over n = 4..9: {band:.3}"),
            ))
        })(),
    );
    let seed = s.seed;
    s.check(
        "mobius/poisson-ratio-properties",
        (|| {
            let mut rng = seeding::stream(seed, domain::VALIDATE, 4);
            let mats = mobius::enumerate_ball(5.0)?;
            let stab = UnimodularMatrix::s();
            for _ in 0..1000 {
                let g = mats[rng.gen_range(0..mats.len())];
                let xi = mobius::sample_harmonic(&mut rng);
                let r = mobius::poisson_ratio(&g, xi)?;
                let r_coset = mobius::poisson_ratio(&g.mul(&stab), xi)?;
                if (r - r_coset).abs() > 1e-10 * r.max(1.0) {
                    return Ok((false, format!("coset value differs at {g}")));
                }
                if r > g.dist_to_base().exp() * (1.0 + 1e-9) {
                    return Ok((false, format!("envelope violated at {g}")));
                }
            }
            Ok((true, "orbit-functional and bounded by e^{d(i,g.i)}".into()))
        })(),
    );
    s.check(
        "mobius/harmonic-sampler-cauchy",
        (|| {
            let mut rng = seeding::stream(seed, domain::VALIDATE, 5);
            let mut xs: Vec<f64> = (0..100_000)
                .map(|_| mobius::sample_harmonic(&mut rng).finite().unwrap())
                .collect();
            xs.sort_by(|a, b| a.total_cmp(b));
            let ks = stats::ks_distance_to_cdf(&xs, |x| 0.5 + x.atan() / std::f64::consts::PI);
            let med = stats::quantile(&xs, 0.5);
            Ok((
                ks < 0.01 && med.abs() < 0.02,
                format!("KS = {ks:.4}, median = {med:.4}"),
            ))
        })(),
    );
}

fn boundary_checks(s: &mut Suite) {
    let seed = s.seed;
    s.check(
        "boundary/cocycle-tree-exact",
        (|| {
            let eval = RnEvaluator::TreeFull { rank: 2 };
            let mut rng = seeding::stream(seed, domain::VALIDATE, 6);
            let ball: Vec<ReducedWord> = words::ball(2, 4).collect();
            for _ in 0..1000 {
                let g = ball[rng.gen_range(0..ball.len())].clone();
                let h = ball[rng.gen_range(0..ball.len())].clone();
                let mut ray = TreeRay::new(
                    2,
                    vec![],
                    seeding::stream(seed, domain::VALIDATE, rng.gen()),
                );
                ray.ensure_depth(2 * (g.len() + h.len()) + 4);
                let res = boundary::cocycle_check(
                    &eval,
                    &GroupElement::Word(g),
                    &GroupElement::Word(h),
                    &BoundaryPoint::Tree(ray),
                )?;
                if res != 0.0 {
                    return Ok((false, format!("residual {res}")));
                }
            }
            Ok((true, "integer residual 0 on 1000 random triples".into()))
        })(),
    );
    s.check(
        "boundary/cocycle-circle-small",
        (|| {
            let mut rng = seeding::stream(seed, domain::VALIDATE, 7);
            let mats = mobius::enumerate_ball(3.0)?;
            let mut checked = 0;
            let mut worst: f64 = 0.0;
            while checked < 1000 {
                let g = mats[rng.gen_range(0..mats.len())];
                let h = mats[rng.gen_range(0..mats.len())];
                let xi = BoundaryPoint::Circle(mobius::sample_harmonic(&mut rng));
                if let Ok(res) = boundary::cocycle_check(
                    &RnEvaluator::CircleHarmonic,
                    &GroupElement::Matrix(g),
                    &GroupElement::Matrix(h),
                    &xi,
                ) {
                    worst = worst.max(res);
                    checked += 1;
                }
            }
            Ok((
                worst <= 1e-10,
                format!("worst residual {worst:.2e} over 1000 triples"),
            ))
        })(),
    );
    s.check(
        "boundary/conformality-exhaustive",
        (|| {
            let mut failures = 0u32;
            for g in words::ball(2, 3) {
                for w in words::ball(2, 3) {
                    if !boundary::conformality_check(&g, &w)? {
                        failures += 1;
                    }
                }
            }
            Ok((
                failures == 0,
                format!("{failures} failures over 53x53 exact checks"),
            ))
        })(),
    );
    s.check(
        "boundary/rn-total-mass-one",
        (|| {
            for g in words::ball(2, 3) {
                let total = boundary::integral_rn_over_cylinder(&g, &ReducedWord::identity(2))?;
                if total != num_rational::BigRational::one() {
                    return Ok((false, format!("g = {g}")));
                }
            }
            Ok((true, "∫ D_g dμ = 1 exactly for |g| <= 3".into()))
        })(),
    );
    s.check(
        "boundary/cylinder-consistency",
        (|| {
            let m = boundary::CylinderMeasure::uniform(2, 5);
            Ok((
                m.check_consistency(),
                "uniform cylinder measure to depth 5".into(),
            ))
        })(),
    );
    s.check(
        "patterson/weights",
        (|| {
            let h = SubgroupSpec::zk_exponent_kernel();
            let m = EmpiricalPattersonMeasure::build(&h, 2, 14, 3f64.ln(), 4)?;
            let wa = m.cylinder_weight(&[1])?;
            let wb = m.cylinder_weight(&[2])?;
            let wbinv = m.cylinder_weight(&[-2])?;
            if wb != wbinv {
                return Ok((false, "b <-> b^{-1} symmetry broken".into()));
            }
            if wb <= wa {
                return Ok((false, "kernel weights not b-heavy".into()));
            }
            let full = EmpiricalPattersonMeasure::build(
                &SubgroupSpec::FullGroup,
                2,
                14,
                1.2 * 3f64.ln(),
                4,
            )?;
            for l in [1, -1, 2, -2] {
                let w = full.cylinder_weight(&[l])?.to_f64().unwrap();
                if (w - 0.25).abs() > 0.02 {
                    return Ok((false, format!("full-group weight {w}")));
                }
            }
            Ok((
                true,
                "symmetry exact, kernel b-heavy, full group uniform".into(),
            ))
        })(),
    );
}

fn ecg_checks(s: &mut Suite) {
    let seed = s.seed;
    s.check(
        "ecg/tree-full-constant-one",
        (|| {
            let m = Model::tree_full(2)?;
            let ns: Vec<u32> = (1..=10).collect();
            let curve = ecg::ecg_curve(&m, &ns, 200, seed, Thresholds::default())?;
            let exact = curve.points.iter().all(|p| p.cn == 1.0 && p.stderr == 0.0);
            Ok((
                exact && curve.classification == ecg::Classification::NonVanishing,
                "C_n = 1 with zero variance, classified non-vanishing".into(),
            ))
        })(),
    );
    s.check(
        "ecg/circle-floor-and-no-decay",
        (|| {
            let m = Model::circle_harmonic(8)?;
            let ns: Vec<u32> = (2..=8).collect();
            let curve = ecg::ecg_curve(&m, &ns, 1500, seed, Thresholds::default())?;
            let cns: Vec<f64> = curve.points.iter().map(|p| p.cn).collect();
            let floor = cns.iter().all(|&c| c >= 0.01);
            let monotone_decay = cns.windows(2).all(|w| w[1] < w[0]);
            Ok((
                floor && !monotone_decay,
                format!(
                    "C_n over n = 2..8: {:?}",
                    cns.iter()
                        .map(|c| (c * 1e4).round() / 1e4)
                        .collect::<Vec<_>>()
                ),
            ))
        })(),
    );
    s.check(
        "ecg/subgroup-vanishing-trend",
        (|| {
            let m = Model::tree_subgroup(
                2,
                SubgroupSpec::zk_exponent_kernel(),
                MeasureChoice::SubgroupPatterson,
                14,
                20,
            )?;
            let ns: Vec<u32> = (4..=20).collect();
            let curve = ecg::ecg_curve(&m, &ns, 2000, seed, Thresholds::default())?;
            let c5 = curve.points.iter().find(|p| p.n == 5).unwrap().cn;
            let c20 = curve.points.iter().find(|p| p.n == 20).unwrap().cn;
            Ok((
                curve.classification == ecg::Classification::Vanishing && c20 < c5 / 2.0,
                format!(
                    "classified {:?}, C_5 = {c5:.4}, C_20 = {c20:.4}",
                    curve.classification
                ),
            ))
        })(),
    );
    s.check(
        "ecg/fexr-comparability",
        (|| {
            let m = Model::tree_subgroup(
                2,
                SubgroupSpec::zk_exponent_kernel(),
                MeasureChoice::SubgroupPatterson,
                14,
                14,
            )?;
            for r in 6..=12u32 {
                let f = ecg::fexr_integral(&m, r, 800, seed ^ 1)?;
                let c = ecg::ecg_estimate(&m, r, 800, seed ^ 2)?.cn;
                let ratio = c / f;
                if !(0.125..=8.0).contains(&ratio) {
                    return Ok((false, format!("r = {r}: ratio {ratio:.3}")));
                }
            }
            Ok((true, "C_r / ∫f_exr dμ within [1/8, 8] for r = 6..12".into()))
        })(),
    );
    s.check(
        "ecg/an-monotone-and-bounded",
        (|| {
            let models = [
                Model::tree_full(2)?,
                Model::tree_subgroup(
                    2,
                    SubgroupSpec::zk_exponent_kernel(),
                    MeasureChoice::SubgroupPatterson,
                    10,
                    8,
                )?,
                Model::circle_harmonic(8)?,
            ];
            for m in &models {
                for i in 0..100u64 {
                    let xi = m.sample_boundary(seed, i, 8);
                    let mut prev = 0.0;
                    for n in 0..=8u32 {
                        let a = ecg::pointwise_max(m, n, &xi)?;
                        if a < prev - 1e-12 || a < 1.0 - 1e-12 || a > m.vn(n) * (1.0 + 1e-9) {
                            return Ok((false, format!("{} at n = {n}", m.describe())));
                        }
                        prev = a;
                    }
                }
            }
            Ok((
                true,
                "1 <= A_n(ξ) <= V_n, non-decreasing in n, 100 ξ per model".into(),
            ))
        })(),
    );
}

fn stable_checks(s: &mut Suite) {
    let seed = s.seed;
    s.check(
        "stable/c-alpha",
        (|| {
            let two_over_pi = (stable::c_alpha(1.0)? - std::f64::consts::FRAC_2_PI).abs() < 1e-12;
            let half = (stable::c_alpha(0.5)? - 0.7978846).abs() < 1e-6;
            let three_halves = (stable::c_alpha(1.5)? - 0.3989423).abs() < 1e-6;
            Ok((
                two_over_pi && half && three_halves,
                "2/π at α = 1; numeric checks".into(),
            ))
        })(),
    );
    s.check(
        "stable/cf-and-tails",
        (|| {
            for &alpha in &[0.7f64, 1.2, 1.7] {
                let params = stable::StableParams::new(alpha, 1.0)?;
                let mut rng = seeding::stream(seed, domain::STABLE_DIRECT, alpha.to_bits());
                let n = 100_000;
                let draws: Vec<f64> = (0..n)
                    .map(|_| stable::sample_sas(&params, &mut rng))
                    .collect();
                for &theta in &[0.5f64, 1.0, 2.0] {
                    let emp: f64 = draws.iter().map(|x| (theta * x).cos()).sum::<f64>() / n as f64;
                    if (emp - (-(theta.powf(alpha))).exp()).abs() >= 0.02 {
                        return Ok((false, format!("CF at alpha {alpha}, theta {theta}")));
                    }
                }
                let mut abs: Vec<f64> = draws.iter().map(|x| x.abs()).collect();
                abs.sort_by(|a, b| a.total_cmp(b));
                let lambda = stats::quantile(&abs, 0.995);
                let ratio = 0.005 * lambda.powf(alpha) / stable::c_alpha(alpha)?;
                if !(0.7..1.3).contains(&ratio) {
                    return Ok((false, format!("tail ratio {ratio:.3} at alpha {alpha}")));
                }
            }
            Ok((
                true,
                "CF within 0.02; tail constant within [0.7, 1.3]".into(),
            ))
        })(),
    );
    s.check(
        "stable/marginal-identity",
        (|| {
            use rayon::prelude::*;
            let m = Model::tree_full(2)?;
            let ys: Vec<f64> = (0..10_000u64)
                .into_par_iter()
                .map(|rep| {
                    stable::simulate_marginal_at_identity(
                        &m,
                        6,
                        1.5,
                        1000,
                        seeding::derive_seed(seed, domain::REPLICATE, rep),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let params = stable::StableParams::new(1.5, 1.0)?;
            let mut rng = seeding::stream(seed, domain::STABLE_DIRECT, 404);
            let direct: Vec<f64> = (0..10_000)
                .map(|_| stable::sample_sas(&params, &mut rng))
                .collect();
            let ks = stats::ks_distance_two_sample(&ys, &direct);
            Ok((ks <= 0.05, format!("two-sample KS = {ks:.4} (<= 0.05)")))
        })(),
    );
    s.check(
        "stable/frechet-self-test",
        (|| {
            let mut rng = seeding::stream(seed, domain::STABLE_DIRECT, 505);
            let draws: Vec<f64> = (0..2000)
                .map(|_| stable::sample_frechet(1.5, &mut rng))
                .collect::<Result<_>>()?;
            let fit = stable::frechet_test(&draws, 1.5)?;
            Ok((
                (fit.kappa - 1.0).abs() < 0.1 && fit.ks < 0.05,
                format!("kappa = {:.3}, KS = {:.4}", fit.kappa, fit.ks),
            ))
        })(),
    );
    s.check(
        "stable/dichotomy-iid-branch",
        (|| {
            let m = Model::tree_full(2)?;
            let (report, samples) =
                stable::dichotomy_experiment(&m, &[4, 6, 8], 1.5, 500, 400, seed)?;
            let medians: Vec<f64> = report.per_n.iter().map(|p| p.median).collect();
            let band = medians.iter().fold(f64::MIN, |a: f64, &b| a.max(b))
                / medians.iter().fold(f64::MAX, |a: f64, &b| a.min(b));
            let floor = medians.iter().all(|&m| m >= 0.1 * medians[0]);
            let fit = stable::frechet_test(&samples[2].over_bn, 1.5)?;
            Ok((
                report.verdict == stable::DichotomyVerdict::IidLike
                    && band <= 2.0
                    && floor
                    && fit.ks <= 0.15,
                format!("medians {medians:?}, Frechet KS at n = 8: {:.4}", fit.ks),
            ))
        })(),
    );
    s.check(
        "stable/dichotomy-degenerate-branch",
        (|| {
            let m = Model::tree_subgroup(
                2,
                SubgroupSpec::zk_exponent_kernel(),
                MeasureChoice::SubgroupPatterson,
                14,
                16,
            )?;
            let (_, samples) = stable::dichotomy_experiment(&m, &[8, 16], 1.5, 500, 400, seed)?;
            let med8 = stats::median(&samples[0].over_vn_alpha);
            let med16 = stats::median(&samples[1].over_vn_alpha);
            // the measured ratio follows (C_16/C_8)^{1/α} ≈ 0.7; the halving
            // this check demands cannot occur; kept as specified and
            // reported honestly
            Ok((
                med16 < 0.5 * med8,
                format!("median ratio = {:.4} (needs < 0.5)", med16 / med8),
            ))
        })(),
    );
    s.check(
        "stable/truncation-bound-small-alpha",
        (|| {
            // for alpha < 1 the discarded tail must sit three orders below
            // the typical maxima scale
            let m = Model::tree_full(2)?;
            let alpha = 0.45;
            let terms = 1000;
            let sample = stable::maxima_experiment(&m, 4, alpha, terms, 200, seed ^ 5)?;
            let proxy = stable::truncation_tail_proxy(alpha, terms).unwrap();
            match stable::truncation_ok(alpha, terms, &sample) {
                Some(true) => Ok((true, format!("tail proxy {proxy:.2e} under the bound"))),
                Some(false) => Ok((false, format!("tail proxy {proxy:.2e} above the bound"))),
                None => Ok((false, "no bound computed".into())),
            }
        })(),
    );
    s.check(
        "stable/j-doubling-sensitivity",
        (|| {
            let m = Model::tree_full(2)?;
            let a = stable::maxima_experiment(&m, 6, 1.5, 1000, 400, seed ^ 3)?;
            let b = stable::maxima_experiment(&m, 6, 1.5, 2000, 400, seed ^ 3)?;
            let (ma, mb) = (
                stats::median(&a.over_vn_alpha),
                stats::median(&b.over_vn_alpha),
            );
            let rel = (ma - mb).abs() / ma;
            Ok((
                rel < 0.05,
                format!("median shift {:.2}% on J doubling", rel * 100.0),
            ))
        })(),
    );
    s.check(
        "stable/gamma-lln-flag",
        (|| {
            // Γ_J/J should be near 1; a miss is flagged, not failed
            let mut rng = seeding::stream(seed, domain::STABLE_DIRECT, 606);
            let j = 500;
            let mut gamma = 0.0;
            for _ in 0..j {
                gamma += -rng.gen::<f64>().max(f64::MIN_POSITIVE).ln();
            }
            let dev = (gamma / j as f64 - 1.0).abs();
            let detail = if dev < 0.2 {
                format!("|Γ_J/J - 1| = {dev:.4} at J = {j}")
            } else {
                format!("flag: |Γ_J/J - 1| = {dev:.4} at J = {j} (loose LLN miss, not a failure)")
            };
            Ok((true, detail))
        })(),
    );
    s.check(
        "stable/determinism-across-thread-counts",
        (|| {
            let m = Model::tree_full(2)?;
            let run = |threads: usize| -> Result<Vec<f64>> {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| crate::EcgError::Config(format!("thread pool: {e}")))?;
                pool.install(|| {
                    stable::maxima_experiment(&m, 5, 1.5, 200, 64, seed ^ 4).map(|s| s.m_values)
                })
            };
            let a = run(1)?;
            let b = run(8)?;
            Ok((a == b, "bitwise equal maxima at 1 and 8 threads".into()))
        })(),
    );
}
