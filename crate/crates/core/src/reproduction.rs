//! Basic and effective reproduction ratios with Monte-Carlo forward
//! expectations.
//!
//! Both ratios discount the expected future susceptible counts by the
//! geometric infectious-duration survival (1-c)^x; they differ only in the
//! normalizer (population size n for the effective ratio, current
//! susceptibles N1(t) for the basic one). The conditional expectation
//! E_t[N1(t+x)] is approximated by averaging S independent forward
//! simulations continuing from the conditioning state.

use crate::error::Result;
use crate::rng::RngStream;
use crate::sir::{simulate, CountPath, EpidemicState, ModelParams};
use rayon::prelude::*;

/// Configuration of the forward Monte-Carlo evaluation.
#[derive(Debug, Clone, Copy)]
pub struct RzeroConfig {
    /// Truncation horizon H of the discounted sum (days).
    pub horizon: u32,
    /// Number of forward replications S.
    pub replications: u32,
    pub stream: RngStream,
}

impl RzeroConfig {
    /// Defaults: H = 100 days of forward discounting, S = 100 paths.
    pub fn new(stream: RngStream) -> Self {
        Self { horizon: 100, replications: 100, stream }
    }
}

/// One day of a reproduction-ratio series; the basic ratio is undefined
/// (flagged `None`) when N1(t) = 0.
#[derive(Debug, Clone, Copy)]
pub struct RzeroPoint {
    pub t: u32,
    pub effective: f64,
    pub basic: Option<f64>,
}

/// Per-day reproduction ratios along a path plus the config that produced them.
#[derive(Debug, Clone)]
pub struct RzeroSeries {
    pub points: Vec<RzeroPoint>,
    pub horizon: u32,
    pub replications: u32,
}

/// Initial reproduction ratio R(0,0) = a/c: the transmission rate times the
/// expected infectious duration.
pub fn initial_r0(params: &ModelParams) -> f64 {
    params.a / params.c
}

/// Geometric survival P[X >= x] = (1-c)^(x-1) of the infectious duration.
pub fn geometric_survival(c: f64, x: u32) -> f64 {
    assert!(x >= 1, "duration support starts at 1");
    (1.0 - c).powi(x as i32 - 1)
}

/// Average of E_t[N1(t+x)] for x = 0..H-1 over S forward paths from `state`.
fn forward_n1_means(
    state: &EpidemicState,
    params: &ModelParams,
    cfg: &RzeroConfig,
) -> Result<Vec<f64>> {
    let h = cfg.horizon as usize;
    let sums: Vec<f64> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| -> Result<Vec<f64>> {
            let path = simulate(params, state, cfg.horizon - 1, cfg.stream.substream(rep as u64))?;
            Ok(path.states.iter().map(|s| s.n1 as f64).collect())
        })
        .try_reduce(
            || vec![0.0; h],
            |mut acc, v| {
                for (a, b) in acc.iter_mut().zip(v) {
                    *a += b;
                }
                Ok(acc)
            },
        )?;
    Ok(sums.into_iter().map(|s| s / cfg.replications as f64).collect())
}

fn discounted_sum(n1_means: &[f64], c: f64) -> f64 {
    let mut acc = 0.0;
    let mut w = 1.0;
    for &m in n1_means {
        acc += m * w;
        w *= 1.0 - c;
    }
    acc
}

/// Effective reproduction ratio R*(0,t) = (a/n) Σ E_t[N1(t+x)] (1-c)^x.
pub fn effective_r0(
    state: &EpidemicState,
    params: &ModelParams,
    cfg: &RzeroConfig,
) -> Result<f64> {
    let means = forward_n1_means(state, params, cfg)?;
    Ok(params.a / params.n as f64 * discounted_sum(&means, params.c))
}

/// Basic reproduction ratio R(0,t): same discounted sum normalized by N1(t).
/// Returns an undefined-value error marker (`None`) when N1(t) = 0.
pub fn basic_r0(
    state: &EpidemicState,
    params: &ModelParams,
    cfg: &RzeroConfig,
) -> Result<Option<f64>> {
    if state.n1 == 0 {
        return Ok(None);
    }
    let means = forward_n1_means(state, params, cfg)?;
    Ok(Some(params.a / state.n1 as f64 * discounted_sum(&means, params.c)))
}

/// Both ratios at several truncation horizons, computed from the same
/// forward paths so the truncation effect is isolated from Monte-Carlo noise.
pub fn r0_truncation(
    state: &EpidemicState,
    params: &ModelParams,
    cfg: &RzeroConfig,
    horizons: &[u32],
) -> Result<Vec<RzeroPoint>> {
    let max_h = horizons.iter().copied().max().unwrap_or(cfg.horizon);
    let full = RzeroConfig { horizon: max_h, ..*cfg };
    let means = forward_n1_means(state, params, &full)?;
    Ok(horizons
        .iter()
        .map(|&h| {
            let sum = discounted_sum(&means[..h as usize], params.c);
            RzeroPoint {
                t: h,
                effective: params.a / params.n as f64 * sum,
                basic: (state.n1 > 0).then(|| params.a / state.n1 as f64 * sum),
            }
        })
        .collect())
}

/// Per-day basic and effective ratios along a path, re-simulating forward
/// from each day's state.
pub fn rzero_path(path: &CountPath, params: &ModelParams, cfg: &RzeroConfig) -> Result<RzeroSeries> {
    let points = path
        .states
        .iter()
        .enumerate()
        .map(|(i, state)| -> Result<RzeroPoint> {
            let day_cfg = RzeroConfig { stream: cfg.stream.substream(0x5a17 + i as u64), ..*cfg };
            let means = forward_n1_means(state, params, &day_cfg)?;
            let sum = discounted_sum(&means, params.c);
            Ok(RzeroPoint {
                t: state.t,
                effective: params.a / params.n as f64 * sum,
                basic: (state.n1 > 0).then(|| params.a / state.n1 as f64 * sum),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RzeroSeries { points, horizon: cfg.horizon, replications: cfg.replications })
}
