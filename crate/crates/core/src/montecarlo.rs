//! Monte Carlo studies of the finite-sample distribution of the estimators:
//! repeated simulation, summary statistics, histograms, and side-by-side
//! comparison of the model-based and incidence-only estimators on shared
//! paths.
//!
//! Replications are parallelized with rayon but remain deterministic for a
//! fixed master seed regardless of thread count: each replication derives its
//! RNG stream from a hash of the design and the replication index, and
//! results are merged in replication order.

use crate::epiestim::{ar_estimate, geometric_profile, instantaneous_r, InfectivityProfile, RPrior};
use crate::error::{Error, Result};
use crate::estimators::{fit, rolling_fit, Method, RollingMode, SufficientStats};
use crate::rng::{mix64, RngStream};
use crate::sir::{default_init, simulate, CountPath, ModelParams};
use rayon::prelude::*;

/// Built-in summary-table design grids as (N2(0), T, a, c) rows: the
/// a-hat, c-hat, and R0-hat selections.
pub const TABLE_A_ROWS: [(u64, u32, f64, f64); 10] = [
    (5, 20, 0.035, 0.07),
    (5, 20, 0.140, 0.07),
    (5, 40, 0.105, 0.07),
    (5, 40, 0.140, 0.07),
    (100, 20, 0.140, 0.07),
    (100, 40, 0.070, 0.07),
    (200, 20, 0.070, 0.07),
    (200, 40, 0.070, 0.07),
    (300, 20, 0.070, 0.07),
    (300, 40, 0.035, 0.07),
];

pub const TABLE_C_ROWS: [(u64, u32, f64, f64); 10] = [
    (50, 40, 0.035, 0.07),
    (100, 40, 0.070, 0.07),
    (100, 40, 0.105, 0.07),
    (200, 20, 0.105, 0.07),
    (200, 20, 0.140, 0.07),
    (300, 20, 0.035, 0.07),
    (500, 20, 0.035, 0.07),
    (500, 20, 0.105, 0.07),
    (500, 40, 0.035, 0.07),
    (1000, 20, 0.035, 0.07),
];

pub const TABLE_R0_ROWS: [(u64, u32, f64, f64); 10] = [
    (5, 40, 0.035, 0.07),
    (50, 20, 0.035, 0.07),
    (50, 20, 0.140, 0.07),
    (100, 20, 0.070, 0.07),
    (100, 40, 0.070, 0.07),
    (200, 20, 0.105, 0.07),
    (300, 40, 0.035, 0.07),
    (500, 40, 0.035, 0.07),
    (500, 40, 0.070, 0.07),
    (1000, 20, 0.070, 0.07),
];

/// One experimental design: initial counts, horizon, true parameters, and the
/// replication budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McDesign {
    pub n: u64,
    pub i0: u64,
    pub horizon: u32,
    pub a: f64,
    pub c: f64,
    pub replications: u64,
    pub seed: u64,
}

impl McDesign {
    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.a, self.c, self.n)
    }

    /// RNG stream for one replication, keyed by the design so different
    /// designs never share random numbers even under one master seed.
    pub fn stream(&self, rep: u64) -> RngStream {
        let mut h = mix64(self.n ^ mix64(self.i0));
        h = mix64(h ^ self.horizon as u64);
        h = mix64(h ^ self.a.to_bits());
        h = mix64(h ^ self.c.to_bits());
        RngStream::new(self.seed, mix64(h ^ rep))
    }
}

/// Summary of one estimate's sampling distribution over the replications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub mean: f64,
    pub variance: f64,
    pub median: f64,
    pub count: usize,
}

impl SummaryStats {
    pub fn from_samples(samples: &mut Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyResult("no usable replications".into()));
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let variance = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        samples.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mid = samples.len() / 2;
        let median = if samples.len() % 2 == 1 {
            samples[mid]
        } else {
            0.5 * (samples[mid - 1] + samples[mid])
        };
        Ok(Self { mean, variance, median, count: samples.len() })
    }
}

/// Joint output of one design x method study.
#[derive(Debug, Clone)]
pub struct McResult {
    pub design: McDesign,
    pub method: Method,
    pub a: SummaryStats,
    pub c: SummaryStats,
    pub r0: SummaryStats,
    pub rho_ac: f64,
    /// Replications excluded because the fit was degenerate (for example
    /// an infinite R0 when no recovery occurred).
    pub flagged: u64,
}

fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Run the replication study for one estimation method.
pub fn run_design(design: &McDesign, method: Method) -> Result<McResult> {
    let params = design.params()?;
    let init = default_init(design.n, design.i0);
    let per_rep: Vec<Result<Option<(f64, f64, f64)>>> = (0..design.replications)
        .into_par_iter()
        .map(|rep| {
            let path = simulate(&params, &init, design.horizon, design.stream(rep))?;
            let stats = SufficientStats::from_path(&path)?;
            let fit = fit(&stats, method)?;
            if fit.r0_hat.is_finite() {
                Ok(Some((fit.a_hat, fit.c_hat, fit.r0_hat)))
            } else {
                Ok(None)
            }
        })
        .collect();
    let mut a = Vec::with_capacity(per_rep.len());
    let mut c = Vec::with_capacity(per_rep.len());
    let mut r0 = Vec::with_capacity(per_rep.len());
    let mut flagged = 0u64;
    for item in per_rep {
        match item? {
            Some((ah, ch, rh)) => {
                a.push(ah);
                c.push(ch);
                r0.push(rh);
            }
            None => flagged += 1,
        }
    }
    let rho_ac = correlation(&a, &c);
    Ok(McResult {
        design: *design,
        method,
        a: SummaryStats::from_samples(&mut a)?,
        c: SummaryStats::from_samples(&mut c)?,
        r0: SummaryStats::from_samples(&mut r0)?,
        rho_ac,
        flagged,
    })
}

/// Equal-width histogram with sample skewness, for inspecting the shape of a
/// sampling distribution.
#[derive(Debug, Clone)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub skewness: f64,
}

pub fn histogram(samples: &[f64], bins: usize) -> Result<Histogram> {
    if samples.is_empty() {
        return Err(Error::EmptyResult("no samples to bin".into()));
    }
    if bins == 0 {
        return Err(Error::InvalidParams("histogram needs at least one bin".into()));
    }
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = ((hi - lo) / bins as f64).max(f64::MIN_POSITIVE);
    let mut counts = vec![0u64; bins];
    for &x in samples {
        let idx = (((x - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let m2 = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = samples.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    let skewness = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };
    Ok(Histogram { lo, hi, counts, skewness })
}

/// One day of the estimator-comparison experiment.
#[derive(Debug, Clone, Copy)]
pub struct ComparisonPoint {
    pub t: usize,
    /// expanding-window maximum likelihood estimate of R0 = a_hat / c_hat
    pub ml_r0: Option<f64>,
    /// renewal posterior mean with a geometric infectivity profile
    pub renewal_geometric: Option<f64>,
    /// renewal posterior mean with a moment-matched alternative profile
    pub renewal_alt: Option<f64>,
}

/// Track the expanding ML estimator and two renewal estimators along one
/// simulated path, plus lag-sum autoregressive estimates at the end.
pub fn comparison_series(
    path: &CountPath,
    alt_profile: &InfectivityProfile,
    c_true: f64,
    window: usize,
    ar_lags: &[usize],
) -> Result<(Vec<ComparisonPoint>, Vec<(usize, Option<f64>)>)> {
    let geometric = geometric_profile(c_true, alt_profile.weights.len())?;
    let incidence: Vec<f64> = path.transitions.iter().map(|tr| tr.n12 as f64).collect();
    let prior = RPrior::default_prior();
    let geo_series = instantaneous_r(&incidence, &geometric, window, &prior)?;
    let alt_series = instantaneous_r(&incidence, alt_profile, window, &prior)?;
    let ml = rolling_fit(path, Method::BinomialMl, RollingMode::Expanding)?;
    let horizon = path.transitions.len();
    let mut points = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        // day t uses observations through day t; incidence index t-1
        let ml_r0 = ml[t - 1]
            .as_ref()
            .ok()
            .and_then(|f| f.r0_hat.is_finite().then_some(f.r0_hat));
        let pick = |series: &[crate::epiestim::InstantRPoint]| {
            let p = &series[t - 1];
            (!p.undefined).then_some(p.posterior_mean)
        };
        points.push(ComparisonPoint {
            t,
            ml_r0,
            renewal_geometric: pick(&geo_series),
            renewal_alt: pick(&alt_series),
        });
    }
    let ar: Vec<(usize, Option<f64>)> = ar_lags
        .iter()
        .map(|&h| (h, ar_estimate(&incidence, h).ok().map(|(_, sum)| sum)))
        .collect();
    Ok((points, ar))
}
