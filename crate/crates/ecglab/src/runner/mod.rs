//! Experiment orchestration: configuration, dispatch, result persistence
//! and plot emission.  Given `(config, seed)` the emitted CSV/JSON bytes are
//! a pure function, independent of worker count.

pub mod config;
pub mod output;
pub mod svg;
pub mod validate;

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::ecg::{self, Model, Thresholds};
use crate::mobius;
use crate::stable;
use crate::{EcgError, Result};
use config::{ExperimentConfig, ExperimentKind, ModelSpec};
use output::{OutputBundle, RunRecord};

/// Outcome of a dispatched run, before anything is written to disk.
pub struct RunOutcome {
    pub bundle: OutputBundle,
    /// number of failed validation checks (`validate` mode only)
    pub failures: usize,
}

/// Runs the configured experiment and returns the in-memory bundle.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    config.validate()?;
    let threads = if config.threads == 0 {
        num_threads_default()
    } else {
        config.threads
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| EcgError::Config(format!("thread pool: {e}")))?;
    pool.install(|| match config.kind {
        ExperimentKind::Ecg => run_ecg(config),
        ExperimentKind::Growth => run_growth(config),
        ExperimentKind::Maxima => run_maxima(config),
        ExperimentKind::Sl2zExample => run_sl2z(config),
        ExperimentKind::Validate => run_validate(config),
    })
}

/// Runs and persists: writes the bundle, records the run.
pub fn run_and_write(config: &ExperimentConfig) -> Result<(RunOutcome, RunRecord)> {
    let started = std::time::Instant::now();
    let outcome = run(config)?;
    let manifest = outcome.bundle.write_to(&config.out)?;
    let record = RunRecord::new(config, started.elapsed().as_millis(), manifest);
    record.append_to_index(&config.out)?;
    std::fs::write(
        config.out.join("runrecord.json"),
        serde_json::to_vec_pretty(&record)
            .map_err(|e| EcgError::Config(format!("json serialization: {e}")))?,
    )?;
    Ok((outcome, record))
}

fn num_threads_default() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn build_model(config: &ExperimentConfig) -> Result<Model> {
    match config.model {
        ModelSpec::TreeFull => Model::tree_full(config.rank),
        ModelSpec::TreeSubgroup => {
            // completion tables grow with the radius (sharply so for free
            // product images), so build no deeper than the run needs
            let radius_need = config
                .n_max
                .max(config.radii.iter().copied().max().unwrap_or(0));
            Model::tree_subgroup(
                config.rank,
                config.subgroup.clone(),
                config.measure,
                config.ps_depth,
                radius_need,
            )
        }
        ModelSpec::CircleHarmonic => {
            let radius_need = config
                .n_max
                .max(config.radii.iter().copied().max().unwrap_or(0));
            Model::circle_harmonic(radius_need)
        }
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

#[derive(Serialize)]
struct SummaryHeader {
    experiment: &'static str,
    model: String,
    seed: u64,
    csv_files: Vec<String>,
    svg_files: Vec<String>,
}

fn run_ecg(config: &ExperimentConfig) -> Result<RunOutcome> {
    let model = build_model(config)?;
    let ns: Vec<u32> = (config.n_min..=config.n_max).collect();
    let curve = ecg::ecg_curve(
        &model,
        &ns,
        config.samples,
        config.seed,
        Thresholds::default(),
    )?;
    let mut bundle = OutputBundle::default();
    let rows: Vec<String> = curve
        .points
        .iter()
        .map(|p| {
            format!(
                "{},{},{},{}",
                p.n,
                fmt_f64(p.abar),
                fmt_f64(p.stderr),
                fmt_f64(p.cn)
            )
        })
        .collect();
    bundle.push_csv("ecg_curve.csv", "n,abar,stderr,cn", &rows);
    let pts: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.n as f64, p.cn)).collect();
    bundle.push(
        "ecg_curve.svg",
        svg::line_plot("normalized extremal cocycle", "n", "C_n (log)", &pts, true)?.into_bytes(),
    );

    #[derive(Serialize)]
    struct EcgSummary {
        #[serde(flatten)]
        header: SummaryHeader,
        classification: ecg::Classification,
        thresholds: Thresholds,
        samples: usize,
        points: Vec<ecg::EcgPoint>,
    }
    bundle.push_json(
        "summary.json",
        &EcgSummary {
            header: SummaryHeader {
                experiment: "ecg",
                model: model.describe(),
                seed: config.seed,
                csv_files: vec!["ecg_curve.csv".into()],
                svg_files: vec!["ecg_curve.svg".into()],
            },
            classification: curve.classification,
            thresholds: curve.thresholds,
            samples: config.samples,
            points: curve.points.clone(),
        },
    )?;
    Ok(RunOutcome {
        bundle,
        failures: 0,
    })
}

fn run_growth(config: &ExperimentConfig) -> Result<RunOutcome> {
    let ms: Vec<u32> = (config.m_min..=config.m_max).collect();
    let series = ecg::growth_ratio_series(&config.subgroup, config.rank, &ms)?;
    let counts: Vec<f64> = ms
        .iter()
        .map(|&m| {
            config
                .subgroup
                .ball_count(config.rank, m)
                .map(|c| c.to_f64().unwrap())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut bundle = OutputBundle::default();
    let rows: Vec<String> = series
        .iter()
        .zip(&counts)
        .map(|((m, ratio), count)| {
            format!(
                "{},{},{},{},{}",
                m,
                count,
                ratio.numer(),
                ratio.denom(),
                fmt_f64(ratio.to_f64().unwrap_or(f64::NAN))
            )
        })
        .collect();
    bundle.push_csv(
        "growth_ratio.csv",
        "m,count,ratio_num,ratio_den,ratio",
        &rows,
    );
    let pts: Vec<(f64, f64)> = series
        .iter()
        .map(|(m, r)| (*m as f64, r.to_f64().unwrap_or(f64::NAN)))
        .collect();
    bundle.push(
        "growth_ratio.svg",
        svg::line_plot(
            "subgroup growth ratio",
            "m",
            "V_H/(2d-1)^m (log)",
            &pts,
            true,
        )?
        .into_bytes(),
    );
    let exponent = crate::words::growth_exponent(&counts).ok();

    #[derive(Serialize)]
    struct GrowthSummary {
        #[serde(flatten)]
        header: SummaryHeader,
        subgroup: String,
        growth_exponent_estimate: Option<f64>,
        ambient_exponent: f64,
        first_ratio: f64,
        last_ratio: f64,
    }
    bundle.push_json(
        "summary.json",
        &GrowthSummary {
            header: SummaryHeader {
                experiment: "growth",
                model: format!("tree d={}", config.rank),
                seed: config.seed,
                csv_files: vec!["growth_ratio.csv".into()],
                svg_files: vec!["growth_ratio.svg".into()],
            },
            subgroup: config.subgroup.to_string(),
            growth_exponent_estimate: exponent,
            ambient_exponent: ((2 * config.rank - 1) as f64).ln(),
            first_ratio: pts.first().map(|p| p.1).unwrap_or(f64::NAN),
            last_ratio: pts.last().map(|p| p.1).unwrap_or(f64::NAN),
        },
    )?;
    Ok(RunOutcome {
        bundle,
        failures: 0,
    })
}

fn run_maxima(config: &ExperimentConfig) -> Result<RunOutcome> {
    let model = build_model(config)?;
    let (report, samples) = stable::dichotomy_experiment(
        &model,
        &config.radii,
        config.alpha,
        config.series_terms,
        config.replicates,
        config.seed,
    )?;
    let mut bundle = OutputBundle::default();
    let mut csv_files = Vec::new();
    for sample in &samples {
        let name = format!("maxima_n{}.csv", sample.n);
        let rows: Vec<String> = (0..sample.m_values.len())
            .map(|i| {
                format!(
                    "{},{},{},{}",
                    i,
                    fmt_f64(sample.m_values[i]),
                    fmt_f64(sample.over_vn_alpha[i]),
                    fmt_f64(sample.over_bn[i])
                )
            })
            .collect();
        bundle.push_csv(&name, "replicate,m_n,m_over_vn_alpha,m_over_bn", &rows);
        csv_files.push(name);
    }
    // Fréchet fit and CDF plot at the largest radius
    let last = samples.last().unwrap();
    let fit = stable::frechet_test(&last.over_bn, config.alpha).ok();
    let mut svg_files = Vec::new();
    if let Some(fit) = fit {
        let ca = stable::c_alpha(config.alpha)?;
        let alpha = config.alpha;
        let normalized: Vec<f64> = last.over_bn.iter().map(|m| m / fit.kappa).collect();
        let plot = svg::cdf_plot(
            "partial maxima vs Frechet law",
            "m_n/(b_n kappa)",
            &normalized,
            move |x| {
                if x <= 0.0 {
                    0.0
                } else {
                    (-ca * x.powf(-alpha)).exp()
                }
            },
        )?;
        bundle.push("maxima_cdf.svg", plot.into_bytes());
        svg_files.push("maxima_cdf.svg".to_string());
    }

    #[derive(Serialize)]
    struct MaximaSummary {
        #[serde(flatten)]
        header: SummaryHeader,
        alpha: f64,
        series_terms: usize,
        replicates: usize,
        report: stable::DichotomyReport,
        frechet_fit: Option<stable::FrechetFit>,
        truncation_tail_proxy: Option<f64>,
        /// tail proxy below 1e-3 of the typical maxima scale (alpha < 1 only)
        truncation_ok: Option<bool>,
        b_n: Vec<f64>,
    }
    bundle.push_json(
        "summary.json",
        &MaximaSummary {
            header: SummaryHeader {
                experiment: "maxima",
                model: model.describe(),
                seed: config.seed,
                csv_files: csv_files.clone(),
                svg_files,
            },
            alpha: config.alpha,
            series_terms: config.series_terms,
            replicates: config.replicates,
            report,
            frechet_fit: fit,
            truncation_tail_proxy: stable::truncation_tail_proxy(config.alpha, config.series_terms),
            truncation_ok: stable::truncation_ok(config.alpha, config.series_terms, last),
            b_n: samples.iter().map(|s| s.b_n).collect(),
        },
    )?;
    Ok(RunOutcome {
        bundle,
        failures: 0,
    })
}

fn run_sl2z(config: &ExperimentConfig) -> Result<RunOutcome> {
    let radius = 3f64.ln();
    let mats = mobius::enumerate_ball(radius)?;
    let pts = mobius::orbit_points(&mats);
    let mut bundle = OutputBundle::default();
    let ball_rows: Vec<String> = mats
        .iter()
        .map(|g| {
            format!(
                "{},{},{},{},{}",
                g.a,
                g.b,
                g.c,
                g.d,
                fmt_f64(g.dist_to_base())
            )
        })
        .collect();
    bundle.push_csv("sl2z_ball.csv", "a,b,c,d,distance", &ball_rows);
    let orbit_rows: Vec<String> = pts
        .iter()
        .map(|(re, im)| {
            format!(
                "{},{},{},{}",
                re.numer(),
                re.denom(),
                im.numer(),
                im.denom()
            )
        })
        .collect();
    bundle.push_csv("sl2z_orbit.csv", "re_num,re_den,im_num,im_den", &orbit_rows);
    // Radon-Nikodym values at ξ = 2 under the Lebesgue worked-example form
    let mut rn_rows = Vec::new();
    let mut a_log3_at_2 = f64::NEG_INFINITY;
    for g in &mats {
        let den = 2 * g.c + g.d;
        let rn = if den == 0 {
            f64::INFINITY
        } else {
            1.0 / (den * den) as f64
        };
        if den != 0 {
            a_log3_at_2 = a_log3_at_2.max(rn);
        }
        rn_rows.push(format!("{},{},{},{},{}", g.a, g.b, g.c, g.d, fmt_f64(rn)));
    }
    bundle.push_csv("sl2z_rn_at_2.csv", "a,b,c,d,rn_lebesgue", &rn_rows);
    // orbit-point counts for integer radii, with the e^{-n} band
    let counts: Vec<(u32, usize)> = (0..=9u32)
        .map(|n| mobius::enumerate_ball(n as f64).map(|m| (n, mobius::orbit_points(&m).len())))
        .collect::<Result<Vec<_>>>()?;
    let count_rows: Vec<String> = counts
        .iter()
        .map(|(n, k)| format!("{},{},{}", n, k, fmt_f64(*k as f64 * (-(*n as f64)).exp())))
        .collect();
    bundle.push_csv(
        "sl2z_counts.csv",
        "n,orbit_points,scaled_by_exp_minus_n",
        &count_rows,
    );
    let band: Vec<f64> = counts
        .iter()
        .filter(|(n, _)| (4..=9).contains(n))
        .map(|(n, k)| *k as f64 * (-(*n as f64)).exp())
        .collect();
    let band_ratio = band.iter().fold(f64::MIN, |a: f64, &b| a.max(b))
        / band.iter().fold(f64::MAX, |a: f64, &b| a.min(b));

    #[derive(Serialize)]
    struct Sl2zSummary {
        #[serde(flatten)]
        header: SummaryHeader,
        matrices_mod_sign: usize,
        orbit_points: usize,
        orbit_points_expected: Vec<String>,
        a_log3_at_2: f64,
        counts_band_4_to_9: f64,
    }
    bundle.push_json(
        "summary.json",
        &Sl2zSummary {
            header: SummaryHeader {
                experiment: "sl2z-example",
                model: "circle-harmonic".into(),
                seed: config.seed,
                csv_files: vec![
                    "sl2z_ball.csv".into(),
                    "sl2z_orbit.csv".into(),
                    "sl2z_rn_at_2.csv".into(),
                    "sl2z_counts.csv".into(),
                ],
                svg_files: vec![],
            },
            matrices_mod_sign: mats.len(),
            orbit_points: pts.len(),
            orbit_points_expected: pts
                .iter()
                .map(|(re, im)| format!("{re} + {im} i"))
                .collect(),
            a_log3_at_2,
            counts_band_4_to_9: band_ratio,
        },
    )?;
    Ok(RunOutcome {
        bundle,
        failures: 0,
    })
}

fn run_validate(config: &ExperimentConfig) -> Result<RunOutcome> {
    let results = validate::run_validation(config.seed);
    let failures = results.iter().filter(|r| !r.pass).count();
    let mut bundle = OutputBundle::default();
    let rows: Vec<String> = results
        .iter()
        .map(|r| {
            format!(
                "{},{},\"{}\"",
                r.name,
                if r.pass { "PASS" } else { "FAIL" },
                r.detail.replace('"', "'")
            )
        })
        .collect();
    bundle.push_csv("validation.csv", "check,result,detail", &rows);

    #[derive(Serialize)]
    struct ValidateSummary {
        #[serde(flatten)]
        header: SummaryHeader,
        checks: usize,
        failures: usize,
        results: Vec<validate::CheckResult>,
    }
    bundle.push_json(
        "summary.json",
        &ValidateSummary {
            header: SummaryHeader {
                experiment: "validate",
                model: "all".into(),
                seed: config.seed,
                csv_files: vec!["validation.csv".into()],
                svg_files: vec![],
            },
            checks: results.len(),
            failures,
            results,
        },
    )?;
    Ok(RunOutcome { bundle, failures })
}
