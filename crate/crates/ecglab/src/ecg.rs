//! The central invariant: pointwise maxima `A_n(ξ)` of Radon-Nikodym
//! derivatives over balls, their expectation `Ā_n`, the normalized extremal
//! cocycle `C_n = Ā_n / V_n` with `V_n = exp(v n)`, the spherical functional
//! `f_exr`, subgroup growth ratios, and the vanishing / non-vanishing
//! classification of the resulting curve.

use num_bigint::BigInt;
use num_rational::BigRational;

use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{BoundaryPoint, RnEvaluator};
use crate::mobius::{self, UnimodularMatrix};
use crate::patterson::EmpiricalPattersonMeasure;
use crate::seeding::{self, domain};
use crate::subgroup::{CompletionTable, SubgroupSpec};
use crate::trie;
use crate::words;
use crate::{EcgError, Result};

/// Which boundary measure drives a subgroup model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MeasureChoice {
    /// The subgroup's own empirical Patterson measure (default).
    SubgroupPatterson,
    /// The ambient uniform measure on the full tree boundary.
    AmbientUniform,
}

/// One of the concrete `(G, X, Λ)` triples.
#[allow(clippy::large_enum_variant)]
pub enum Model {
    TreeFull {
        rank: u32,
    },
    TreeSubgroup {
        rank: u32,
        spec: SubgroupSpec,
        v: f64,
        measure: MeasureChoice,
        patterson: EmpiricalPattersonMeasure,
        completion: CompletionTable,
    },
    CircleHarmonic {
        /// matrix balls per integer radius, indexed by n
        balls: Vec<Vec<UnimodularMatrix>>,
    },
}

/// Default orbit-weight depth for empirical Patterson measures.
pub const DEFAULT_PS_DEPTH: u32 = 14;

/// Completion tables and matrix balls are built out to this radius.
pub const DEFAULT_MAX_RADIUS: u32 = 24;

impl Model {
    pub fn tree_full(rank: u32) -> Result<Model> {
        if rank < 2 {
            return Err(EcgError::InvalidParameter(
                "tree models need rank >= 2".into(),
            ));
        }
        Ok(Model::TreeFull { rank })
    }

    /// Builds a subgroup model.  The dimension `v_H` equals `v_G = log(2d-1)`
    /// for kernels with amenable quotient (`Z^k`), and is estimated from the
    /// subgroup's ball counts otherwise.
    pub fn tree_subgroup(
        rank: u32,
        spec: SubgroupSpec,
        measure: MeasureChoice,
        ps_depth: u32,
        max_radius: u32,
    ) -> Result<Model> {
        if rank < 2 {
            return Err(EcgError::InvalidParameter(
                "tree models need rank >= 2".into(),
            ));
        }
        spec.validate(rank)?;
        let v = match &spec {
            SubgroupSpec::FullGroup | SubgroupSpec::KernelToZk { .. } => {
                crate::boundary::tree_dimension(rank)
            }
            SubgroupSpec::KernelToC2C3 { .. } => estimate_dimension(&spec, rank, 13)?,
        };
        let patterson = EmpiricalPattersonMeasure::build(
            &spec,
            rank,
            ps_depth,
            crate::boundary::tree_dimension(rank),
            crate::patterson::DEFAULT_CYLINDER_CAP,
        )?;
        let completion = CompletionTable::build(&spec, rank, max_radius)?;
        Ok(Model::TreeSubgroup {
            rank,
            spec,
            v,
            measure,
            patterson,
            completion,
        })
    }

    pub fn circle_harmonic(max_radius: u32) -> Result<Model> {
        let max_radius = max_radius.min(mobius::BALL_RADIUS_CAP as u32);
        let balls = (0..=max_radius)
            .map(|n| mobius::enumerate_ball(n as f64))
            .collect::<Result<Vec<_>>>()?;
        Ok(Model::CircleHarmonic { balls })
    }

    /// Dimension `v` of the conformal density: `V_n = exp(v n)`.
    pub fn dimension(&self) -> f64 {
        match self {
            Model::TreeFull { rank } => crate::boundary::tree_dimension(*rank),
            Model::TreeSubgroup { v, .. } => *v,
            Model::CircleHarmonic { .. } => 1.0,
        }
    }

    pub fn vn(&self, n: u32) -> f64 {
        (self.dimension() * n as f64).exp()
    }

    pub fn evaluator(&self) -> RnEvaluator {
        match self {
            Model::TreeFull { rank } => RnEvaluator::TreeFull { rank: *rank },
            Model::TreeSubgroup { rank, spec, v, .. } => RnEvaluator::TreeSubgroup {
                rank: *rank,
                spec: spec.clone(),
                v: *v,
            },
            Model::CircleHarmonic { .. } => RnEvaluator::CircleHarmonic,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Model::TreeFull { rank } => format!("tree-full(d={rank})"),
            Model::TreeSubgroup {
                rank,
                spec,
                measure,
                ..
            } => {
                format!("tree-subgroup(d={rank}, {spec}, measure={measure:?})")
            }
            Model::CircleHarmonic { .. } => "circle-harmonic".into(),
        }
    }

    /// Draws the boundary point with sample index `i`, deterministically in
    /// `(seed, i)`, with a tree prefix deep enough for radius `depth`.
    pub fn sample_boundary(&self, seed: u64, index: u64, depth: u32) -> BoundaryPoint {
        let stream = seeding::stream(seed, domain::BOUNDARY_SAMPLE, index);
        match self {
            Model::TreeFull { rank } => {
                let mut ray = crate::boundary::TreeRay::new(*rank, vec![], stream);
                ray.ensure_depth(depth as usize);
                BoundaryPoint::Tree(ray)
            }
            Model::TreeSubgroup {
                rank,
                measure,
                patterson,
                ..
            } => {
                let mut ray = match measure {
                    MeasureChoice::SubgroupPatterson => patterson.sample_ray(stream),
                    MeasureChoice::AmbientUniform => {
                        crate::boundary::TreeRay::new(*rank, vec![], stream)
                    }
                };
                ray.ensure_depth(depth as usize);
                BoundaryPoint::Tree(ray)
            }
            Model::CircleHarmonic { .. } => {
                let mut rng = stream;
                BoundaryPoint::Circle(mobius::sample_harmonic(&mut rng))
            }
        }
    }

    pub fn matrix_ball(&self, n: u32) -> Result<&[UnimodularMatrix]> {
        match self {
            Model::CircleHarmonic { balls } => balls
                .get(n as usize)
                .map(|b| b.as_slice())
                .ok_or_else(|| EcgError::CapExceeded(format!("matrix ball radius {n}"))),
            _ => Err(EcgError::InvalidParameter("not a circle model".into())),
        }
    }
}

/// Estimates `v_H` as the tail slope of `log V_H(1,1,m)`.
pub fn estimate_dimension(spec: &SubgroupSpec, rank: u32, mmax: u32) -> Result<f64> {
    use num_traits::ToPrimitive;
    let counts: Vec<f64> = (1..=mmax)
        .map(|m| spec.ball_count(rank, m).map(|c| c.to_f64().unwrap()))
        .collect::<Result<Vec<_>>>()?;
    words::growth_exponent(&counts)
}

/// `A_n(ξ) = max_{g ∈ B_n} dμ_{g.o}/dμ(ξ)`.
///
/// The full tree attains the closed form `exp(v n)` at the length-`n` prefix
/// of ξ; the subgroup maximum runs over shared-prefix depths with minimal
/// completions; the circle maximum is a flat scan of the matrix ball.
pub fn pointwise_max(model: &Model, n: u32, xi: &BoundaryPoint) -> Result<f64> {
    match model {
        Model::TreeFull { .. } => {
            let ray = xi.tree_prefix()?;
            if ray.depth() < n as usize {
                return Err(EcgError::PrefixTooShort {
                    need: n as usize,
                    have: ray.depth(),
                });
            }
            Ok(model.vn(n))
        }
        Model::TreeSubgroup { v, completion, .. } => {
            if completion.radius() < n {
                return Err(EcgError::CapExceeded(format!(
                    "completion table radius {} < n = {n}",
                    completion.radius()
                )));
            }
            let ray = xi.tree_prefix()?;
            let b = completion.max_busemann(ray.letters(), n)?;
            Ok((v * b as f64).exp())
        }
        Model::CircleHarmonic { .. } => {
            let ball = model.matrix_ball(n)?;
            let c = xi.circle()?;
            let mut best = f64::NEG_INFINITY;
            for g in ball {
                best = best.max(mobius::poisson_ratio(g, c)?);
            }
            Ok(best)
        }
    }
}

/// One estimated point of the ECG curve.
#[derive(Debug, Clone, Serialize)]
pub struct EcgPoint {
    pub n: u32,
    /// Monte Carlo estimate of `Ā_n`
    pub abar: f64,
    /// standard error of the `Ā_n` estimate
    pub stderr: f64,
    /// `C_n = Ā_n / V_n`
    pub cn: f64,
    pub samples: usize,
}

/// Classification thresholds; finite-range classification is a heuristic
/// reading of asymptotic definitions, so these are configuration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Thresholds {
    /// tail floor θ1: non-vanishing needs min tail C_n above this
    pub floor: f64,
    /// tail log-slope tolerance θ2: non-vanishing needs slope >= -θ2
    pub slope_tol: f64,
    /// decay factor θ3: vanishing needs C to drop by at least this factor
    pub decay_factor: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            floor: 0.01,
            slope_tol: 0.02,
            decay_factor: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    NonVanishing,
    Vanishing,
    Inconclusive,
}

/// An estimated ECG curve with its classification.
#[derive(Debug, Clone, Serialize)]
pub struct EcgCurve {
    pub points: Vec<EcgPoint>,
    pub classification: Classification,
    pub thresholds: Thresholds,
}

/// Monte Carlo estimate of one `EcgPoint` from a fresh ξ-sample.
pub fn ecg_estimate(model: &Model, n: u32, samples: usize, seed: u64) -> Result<EcgPoint> {
    if samples < 2 {
        return Err(EcgError::InvalidParameter(
            "ecg estimate needs >= 2 samples".into(),
        ));
    }
    let values: Vec<f64> = (0..samples)
        .map(|i| {
            let xi = model.sample_boundary(seed, i as u64, n);
            pointwise_max(model, n, &xi).map(|a| a / model.vn(n))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean, se) = crate::stats::mean_and_stderr(&values)?;
    Ok(EcgPoint {
        n,
        abar: mean * model.vn(n),
        stderr: se * model.vn(n),
        cn: mean,
        samples,
    })
}

/// Estimates the whole curve, reusing one ξ-sample across every `n`
/// (common random numbers stabilize the trend), in parallel batches whose
/// RNG streams are keyed by the sample index.
pub fn ecg_curve(
    model: &Model,
    n_range: &[u32],
    samples: usize,
    seed: u64,
    thresholds: Thresholds,
) -> Result<EcgCurve> {
    if n_range.is_empty() {
        return Err(EcgError::InvalidParameter("empty n range".into()));
    }
    if n_range.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EcgError::InvalidParameter(
            "n range must be strictly ascending".into(),
        ));
    }
    if samples < 2 {
        return Err(EcgError::InvalidParameter(
            "ecg curve needs >= 2 samples".into(),
        ));
    }
    let max_n = *n_range.last().unwrap();
    // per-sample vector of A_n(ξ)/V_n across the range
    let rows: Vec<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let xi = model.sample_boundary(seed, i as u64, max_n);
            n_range
                .iter()
                .map(|&n| pointwise_max(model, n, &xi).map(|a| a / model.vn(n)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut points = Vec::with_capacity(n_range.len());
    for (j, &n) in n_range.iter().enumerate() {
        let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        let (mean, se) = crate::stats::mean_and_stderr(&col)?;
        points.push(EcgPoint {
            n,
            abar: mean * model.vn(n),
            stderr: se * model.vn(n),
            cn: mean,
            samples,
        });
    }
    let classification = classify(&points, thresholds);
    Ok(EcgCurve {
        points,
        classification,
        thresholds,
    })
}

/// Deterministic classification from points and thresholds.
pub fn classify(points: &[EcgPoint], t: Thresholds) -> Classification {
    if points.len() < 2 {
        return Classification::Inconclusive;
    }
    let tail_start = points.len() / 2;
    let tail = &points[tail_start..];
    if tail.len() < 2 {
        return Classification::Inconclusive;
    }
    let xs: Vec<f64> = tail.iter().map(|p| p.n as f64).collect();
    let ys: Vec<f64> = tail
        .iter()
        .map(|p| p.cn.max(f64::MIN_POSITIVE).ln())
        .collect();
    let slope = match crate::stats::ls_slope(&xs, &ys) {
        Ok(s) => s,
        Err(_) => return Classification::Inconclusive,
    };
    let tail_min = tail.iter().map(|p| p.cn).fold(f64::INFINITY, f64::min);
    if tail_min > t.floor && slope >= -t.slope_tol {
        return Classification::NonVanishing;
    }
    let first = points.first().unwrap().cn;
    let last = points.last().unwrap().cn;
    if last > 0.0 && first / last >= t.decay_factor && slope < 0.0 {
        return Classification::Vanishing;
    }
    Classification::Inconclusive
}

/// Monte Carlo integral of
/// `f_exr(ξ) = exp(-v d(π_r(ξ), (H ∩ B_r).o))` against the model measure,
/// using the orbit trie's exact nearest-point distance.  Comparable to `C_r`
/// within uniform constants.
pub fn fexr_integral(model: &Model, r: u32, samples: usize, seed: u64) -> Result<f64> {
    match model {
        Model::TreeFull { .. } => Ok(1.0),
        Model::TreeSubgroup { rank, spec, v, .. } => {
            if r == 0 {
                return Ok(1.0);
            }
            if r > 13 {
                return Err(EcgError::CapExceeded(format!(
                    "f_exr orbit trie capped at r = 13, got {r}"
                )));
            }
            let orbit = trie::subgroup_ball_elements(spec, *rank, r)?;
            let sum: f64 = (0..samples)
                .into_par_iter()
                .map(|i| {
                    let xi = model.sample_boundary(seed, i as u64, r);
                    let ray = xi.tree_prefix()?;
                    let prefix = ray.prefix_word(r as usize)?;
                    let d = orbit.distance_to_set(&prefix)?;
                    Ok((-v * d as f64).exp())
                })
                .collect::<Result<Vec<f64>>>()?
                .iter()
                .sum();
            Ok(sum / samples as f64)
        }
        Model::CircleHarmonic { .. } => Err(EcgError::InvalidParameter(
            "f_exr is a tree-model quantity".into(),
        )),
    }
}

/// Exact growth ratios `(m, V_H(1,1,m) / (2d-1)^m)`.
pub fn growth_ratio_series(
    spec: &SubgroupSpec,
    rank: u32,
    m_range: &[u32],
) -> Result<Vec<(u32, BigRational)>> {
    let q = BigInt::from(2 * rank as i64 - 1);
    m_range
        .iter()
        .map(|&m| {
            let count = spec.ball_count(rank, m)?;
            let ratio = BigRational::new(count.into(), q.pow(m));
            Ok((m, ratio))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, ToPrimitive};

    fn tree_full() -> Model {
        Model::tree_full(2).unwrap()
    }

    fn zk_model() -> Model {
        Model::tree_subgroup(
            2,
            SubgroupSpec::zk_exponent_kernel(),
            MeasureChoice::SubgroupPatterson,
            12,
            22,
        )
        .unwrap()
    }

    #[test]
    fn tree_full_pointwise_max_closed_form() {
        let m = tree_full();
        for n in [0u32, 1, 3, 7] {
            let xi = m.sample_boundary(5, 0, n);
            let a = pointwise_max(&m, n, &xi).unwrap();
            assert!((a - 3f64.powi(n as i32)).abs() < 1e-9 * a);
        }
    }

    #[test]
    fn pointwise_max_at_zero_is_one() {
        for m in [tree_full(), zk_model()] {
            let xi = m.sample_boundary(5, 1, 0);
            assert_eq!(pointwise_max(&m, 0, &xi).unwrap(), 1.0);
        }
        let c = Model::circle_harmonic(4).unwrap();
        let xi = c.sample_boundary(5, 2, 0);
        let a = pointwise_max(&c, 0, &xi).unwrap();
        assert!((a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circle_pointwise_max_at_origin() {
        // brute force over the 10 norm^2 <= 3 matrices: the identity attains 1
        let c = Model::circle_harmonic(4).unwrap();
        let xi = BoundaryPoint::Circle(crate::mobius::CirclePoint::Finite(0.0));
        let a = pointwise_max(&c, 1, &xi).unwrap();
        assert!((a - 1.0).abs() < 1e-12, "A_1(0) = {a}");
    }

    #[test]
    fn subgroup_pointwise_max_matches_trie_oracle() {
        // exact agreement with a brute-force max over the materialized orbit
        let m = zk_model();
        let (spec, v) = match &m {
            Model::TreeSubgroup { spec, v, .. } => (spec.clone(), *v),
            _ => unreachable!(),
        };
        for n in [2u32, 4, 6] {
            let elements: Vec<_> = words::ball(2, n).filter(|g| spec.contains(g)).collect();
            for i in 0..40u64 {
                let xi = m.sample_boundary(77, i, n);
                let ray = xi.tree_prefix().unwrap();
                let prefix = ray.prefix_word(n as usize).unwrap();
                let brute = elements
                    .iter()
                    .map(|h| {
                        let cp = words::gromov_product(&prefix, h).unwrap() as i64;
                        2 * cp - h.len() as i64
                    })
                    .max()
                    .unwrap();
                let expect = (v * brute as f64).exp();
                let got = pointwise_max(&m, n, &xi).unwrap();
                assert!((got - expect).abs() < 1e-9 * expect, "n = {n}, i = {i}");
            }
        }
    }

    #[test]
    fn ecg_tree_full_is_exactly_one() {
        let m = tree_full();
        let p = ecg_estimate(&m, 6, 64, 9).unwrap();
        assert_eq!(p.cn, 1.0);
        assert_eq!(p.stderr, 0.0);
    }

    #[test]
    fn ecg_curve_tree_full_nonvanishing() {
        let m = tree_full();
        let ns: Vec<u32> = (1..=10).collect();
        let curve = ecg_curve(&m, &ns, 32, 11, Thresholds::default()).unwrap();
        assert_eq!(curve.classification, Classification::NonVanishing);
        for p in &curve.points {
            assert_eq!(p.cn, 1.0);
        }
    }

    #[test]
    fn ecg_curve_rejects_bad_ranges() {
        let m = tree_full();
        assert!(ecg_curve(&m, &[], 16, 1, Thresholds::default()).is_err());
        assert!(ecg_curve(&m, &[3, 3], 16, 1, Thresholds::default()).is_err());
    }

    #[test]
    fn ecg_is_rank_generic() {
        // F_3: V_n = 5^n and C_n = 1 exactly, through both routes
        let m = Model::tree_full(3).unwrap();
        assert!((m.vn(4) - 625.0).abs() < 1e-9);
        let p = ecg_estimate(&m, 4, 32, 9).unwrap();
        assert_eq!(p.cn, 1.0);
        let generic = Model::tree_subgroup(
            3,
            SubgroupSpec::FullGroup,
            MeasureChoice::AmbientUniform,
            6,
            8,
        )
        .unwrap();
        let q = ecg_estimate(&generic, 5, 32, 9).unwrap();
        assert_eq!(q.cn, 1.0);
    }

    #[test]
    fn single_point_is_inconclusive() {
        let p = EcgPoint {
            n: 4,
            abar: 1.0,
            stderr: 0.0,
            cn: 0.5,
            samples: 10,
        };
        assert_eq!(
            classify(&[p], Thresholds::default()),
            Classification::Inconclusive
        );
    }

    #[test]
    fn subgroup_curve_vanishes() {
        let m = zk_model();
        let ns: Vec<u32> = (4..=20).collect();
        let curve = ecg_curve(&m, &ns, 400, 13, Thresholds::default()).unwrap();
        assert_eq!(curve.classification, Classification::Vanishing);
        let c5 = curve.points.iter().find(|p| p.n == 5).unwrap().cn;
        let c20 = curve.points.iter().find(|p| p.n == 20).unwrap().cn;
        assert!(c20 < c5 / 2.0, "C_20 = {c20}, C_5 = {c5}");
    }

    #[test]
    fn an_is_monotone_in_n() {
        // balls are nested, so A_n(ξ) is non-decreasing in n for fixed ξ
        let models = [tree_full(), zk_model(), Model::circle_harmonic(8).unwrap()];
        for m in &models {
            for i in 0..100u64 {
                let xi = m.sample_boundary(21, i, 8);
                let mut prev = 0.0;
                for n in 0..=8u32 {
                    let a = pointwise_max(m, n, &xi).unwrap();
                    assert!(a >= prev - 1e-12, "{} at n = {n}", m.describe());
                    prev = a;
                }
            }
        }
    }

    #[test]
    fn an_bounds() {
        // 1 <= A_n(ξ) <= V_n for conformal probability densities
        let models = [tree_full(), zk_model(), Model::circle_harmonic(8).unwrap()];
        for m in &models {
            for i in 0..100u64 {
                let xi = m.sample_boundary(22, i, 8);
                for n in [2u32, 5, 8] {
                    let a = pointwise_max(m, n, &xi).unwrap();
                    assert!(a >= 1.0 - 1e-12);
                    assert!(a <= m.vn(n) * (1.0 + 1e-9));
                }
            }
        }
    }

    #[test]
    fn fexr_tree_full_is_one() {
        let m = tree_full();
        assert_eq!(fexr_integral(&m, 5, 16, 3).unwrap(), 1.0);
        assert_eq!(fexr_integral(&zk_model(), 0, 16, 3).unwrap(), 1.0);
    }

    #[test]
    fn fexr_comparable_to_cn() {
        let m = zk_model();
        for r in [6u32, 9, 12] {
            let f = fexr_integral(&m, r, 600, 31).unwrap();
            let c = ecg_estimate(&m, r, 600, 32).unwrap().cn;
            let ratio = c / f;
            assert!(
                (0.125..=8.0).contains(&ratio),
                "r = {r}: C_r = {c}, f_exr = {f}, ratio = {ratio}"
            );
        }
    }

    #[test]
    fn growth_ratios() {
        let full = growth_ratio_series(&SubgroupSpec::FullGroup, 2, &[0, 1, 5, 10]).unwrap();
        for (m, ratio) in &full {
            let expect = BigRational::new(
                BigInt::from(2) * BigInt::from(3).pow(*m) - BigInt::one(),
                BigInt::from(3).pow(*m),
            );
            assert_eq!(*ratio, expect);
        }
        assert_eq!(full[0].1, BigRational::one());
        let h = growth_ratio_series(&SubgroupSpec::zk_exponent_kernel(), 2, &[10, 30]).unwrap();
        let r10 = h[0].1.to_f64().unwrap();
        let r30 = h[1].1.to_f64().unwrap();
        assert!(r30 < r10);
        // the observed decay factor is ~ sqrt(10/30) = 0.577 (1/sqrt(m) law)
        assert!((r30 / r10 - (10f64 / 30.0).sqrt()).abs() < 0.01);
    }

    #[test]
    fn c2c3_dimension_below_log3() {
        let v = estimate_dimension(&SubgroupSpec::c2c3_standard_kernel(), 2, 13).unwrap();
        assert!(v < 3f64.ln() - 0.05, "v = {v}");
        assert!(v > 0.5, "v = {v}");
    }

    #[test]
    fn shell_mass_link_for_vanishing_model() {
        // when m_r(C) decreases across the range for C in {0,1,2}, the curve
        // classifies vanishing
        let spec = SubgroupSpec::zk_exponent_kernel();
        for c in [0u32, 1, 2] {
            let masses: Vec<f64> = (4..=10)
                .map(|r| {
                    let m = crate::subgroup::shell_mass(&spec, 2, r, c).unwrap();
                    m.numer().to_f64().unwrap() / m.denom().to_f64().unwrap()
                })
                .collect();
            for w in masses.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "C = {c}: shell mass grew");
            }
        }
        let m = zk_model();
        let ns: Vec<u32> = (4..=16).collect();
        let curve = ecg_curve(&m, &ns, 300, 17, Thresholds::default()).unwrap();
        assert_eq!(curve.classification, Classification::Vanishing);
    }
}
