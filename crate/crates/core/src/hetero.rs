//! Two-population (SIR)^2 model: block chain-binomial simulation, the
//! matrix-valued reproduction number of the rank-1 parameterization, and the
//! time-varying contagion parameter implied by aggregating heterogeneous
//! groups into one SIR model.
//!
//! Infection probabilities mix infectious pools against the total population
//! size n = n1 + n2, so identical groups collapse exactly to the homogeneous
//! SIR model with a = beta * alpha.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sir::{sample_binomial, CountPath, EpidemicState, TransitionCounts};

/// Parameters of the two-group model: a full 2x2 contagion matrix or the
/// rank-1 form A = beta alpha'.
#[derive(Debug, Clone)]
pub struct HeteroParams {
    /// Contagion matrix entries a[j][k]: group-k infectious pressure on group j.
    pub contagion: [[f64; 2]; 2],
    /// Rank-1 factors when the matrix was built as beta alpha'.
    pub rank1: Option<([f64; 2], [f64; 2])>,
    pub recovery: [f64; 2],
    pub sizes: [u64; 2],
}

impl HeteroParams {
    pub fn full(contagion: [[f64; 2]; 2], recovery: [f64; 2], sizes: [u64; 2]) -> Result<Self> {
        if contagion.iter().flatten().any(|&a| a < 0.0 || !a.is_finite()) {
            return Err(Error::InvalidParams("contagion entries must be >= 0".into()));
        }
        if recovery.iter().any(|&c| !(c > 0.0 && c < 1.0)) {
            return Err(Error::InvalidParams("recovery probabilities must be in (0, 1)".into()));
        }
        if sizes.iter().any(|&n| n == 0) {
            return Err(Error::InvalidParams("group sizes must be >= 1".into()));
        }
        Ok(Self { contagion, rank1: None, recovery, sizes })
    }

    /// Rank-1 parameterization: vulnerability beta, infectiveness alpha.
    pub fn rank1(beta: [f64; 2], alpha: [f64; 2], recovery: [f64; 2], sizes: [u64; 2]) -> Result<Self> {
        let contagion = [
            [beta[0] * alpha[0], beta[0] * alpha[1]],
            [beta[1] * alpha[0], beta[1] * alpha[1]],
        ];
        let mut p = Self::full(contagion, recovery, sizes)?;
        p.rank1 = Some((beta, alpha));
        Ok(p)
    }

    pub fn total(&self) -> u64 {
        self.sizes[0] + self.sizes[1]
    }
}

/// Per-group cross-sectional counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeteroState {
    pub t: u32,
    pub groups: [EpidemicState; 2],
}

impl HeteroState {
    pub fn new(t: u32, groups: [EpidemicState; 2]) -> Self {
        Self { t, groups }
    }

    /// Aggregate counts over the two groups.
    pub fn aggregate(&self) -> EpidemicState {
        EpidemicState::new(
            self.t,
            self.groups[0].n1 + self.groups[1].n1,
            self.groups[0].n2 + self.groups[1].n2,
            self.groups[0].n3 + self.groups[1].n3,
        )
    }
}

/// Group-j one-day infection probability given the previous infected counts.
fn infection_prob(params: &HeteroParams, j: usize, n2: [u64; 2]) -> Result<f64> {
    let n = params.total() as f64;
    let p = (params.contagion[j][0] * n2[0] as f64 + params.contagion[j][1] * n2[1] as f64) / n;
    if p > 1.0 {
        return Err(Error::InvalidProbability {
            value: p,
            a: params.contagion[j][j],
            n2: n2[0] + n2[1],
            n: params.total(),
        });
    }
    Ok(p)
}

/// Simulate the (SIR)^2 model, returning one count path per group.
pub fn simulate_sir2(
    params: &HeteroParams,
    init: &HeteroState,
    horizon: u32,
    stream: RngStream,
) -> Result<[CountPath; 2]> {
    for (g, &size) in init.groups.iter().zip(&params.sizes) {
        if g.total() != size {
            return Err(Error::InconsistentCounts("group counts do not sum to group size".into()));
        }
    }
    let mut rng = stream.rng();
    let mut paths = [
        CountPath { states: vec![init.groups[0]], transitions: vec![] },
        CountPath { states: vec![init.groups[1]], transitions: vec![] },
    ];
    let mut current = init.groups;
    for _ in 0..horizon {
        let n2 = [current[0].n2, current[1].n2];
        for j in 0..2 {
            let p12 = infection_prob(params, j, n2)?;
            let n12 = sample_binomial(current[j].n1, p12, &mut rng);
            let n23 = sample_binomial(current[j].n2, params.recovery[j], &mut rng);
            let next = EpidemicState {
                t: current[j].t + 1,
                n1: current[j].n1 - n12,
                n2: current[j].n2 + n12 - n23,
                n3: current[j].n3 + n23,
            };
            paths[j].states.push(next);
            paths[j].transitions.push(TransitionCounts { t: next.t, n12, n23 });
            current[j] = next;
        }
    }
    Ok(paths)
}

/// Matrix-valued initial reproduction number R(0,0) = beta alpha~' with
/// alpha~_k = alpha_k / c_k. Rank 1 by construction.
pub fn matrix_r0(beta: [f64; 2], alpha: [f64; 2], c1: f64, c2: f64) -> [[f64; 2]; 2] {
    let scaled = [alpha[0] / c1, alpha[1] / c2];
    [
        [beta[0] * scaled[0], beta[0] * scaled[1]],
        [beta[1] * scaled[0], beta[1] * scaled[1]],
    ]
}

/// The contagion parameter a_t implied by fitting a homogeneous SIR model to
/// aggregated heterogeneous counts: the product of the beta-weighted
/// susceptible mix and the alpha-weighted infectious mix, rescaled so the
/// aggregate one-step infection probability is a_t N2(t-1)/n.
pub fn implied_a_t(state: &HeteroState, params: &HeteroParams) -> Result<f64> {
    let (beta, alpha) = params
        .rank1
        .ok_or_else(|| Error::InvalidParams("implied a_t requires the rank-1 form".into()))?;
    let agg = state.aggregate();
    if agg.n1 == 0 || agg.n2 == 0 {
        return Err(Error::NotEstimable("aggregate N1 and N2 must be positive".into()));
    }
    let n = params.total() as f64;
    let susceptible_mix = (beta[0] * state.groups[0].n1 as f64
        + beta[1] * state.groups[1].n1 as f64)
        / agg.n1 as f64;
    let infectious_mix =
        (alpha[0] * state.groups[0].n2 as f64 + alpha[1] * state.groups[1].n2 as f64) / n;
    Ok(susceptible_mix * infectious_mix * n / agg.n2 as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{fit_poisson_aml, SufficientStats};
    use crate::sir::{default_init, simulate, ModelParams};

    fn symmetric_params(a: f64, c: f64, half: u64) -> HeteroParams {
        HeteroParams::rank1([a.sqrt(), a.sqrt()], [a.sqrt(), a.sqrt()], [c, c], [half, half])
            .unwrap()
    }

    fn seeded_state(params: &HeteroParams, i0: [u64; 2]) -> HeteroState {
        HeteroState::new(
            0,
            [
                EpidemicState::new(0, params.sizes[0] - i0[0], i0[0], 0),
                EpidemicState::new(0, params.sizes[1] - i0[1], i0[1], 0),
            ],
        )
    }

    #[test]
    fn homogeneous_groups_match_single_sir_means() {
        // identical groups collapse to SIR with a = beta * alpha: compare
        // the aggregate mean of N12 against the homogeneous simulator
        let a = 0.2;
        let c = 0.1;
        let params = symmetric_params(a, c, 5_000);
        let init = seeded_state(&params, [100, 100]);
        let homo = ModelParams::new(a, c, 10_000).unwrap();
        let homo_init = default_init(10_000, 200);
        let reps = 10_000u64;
        let horizon = 5u32;
        let mut het_sum = vec![0.0; horizon as usize];
        let mut homo_sum = vec![0.0; horizon as usize];
        let mut homo_sq = vec![0.0; horizon as usize];
        for r in 0..reps {
            let paths = simulate_sir2(&params, &init, horizon, RngStream::new(61, 2 * r)).unwrap();
            let single = simulate(&homo, &homo_init, horizon, RngStream::new(61, 2 * r + 1)).unwrap();
            for t in 0..horizon as usize {
                het_sum[t] += (paths[0].transitions[t].n12 + paths[1].transitions[t].n12) as f64;
                let x = single.transitions[t].n12 as f64;
                homo_sum[t] += x;
                homo_sq[t] += x * x;
            }
        }
        for t in 0..horizon as usize {
            let mh = het_sum[t] / reps as f64;
            let ms = homo_sum[t] / reps as f64;
            let var = homo_sq[t] / reps as f64 - ms * ms;
            let se = (2.0 * var / reps as f64).sqrt().max(1e-9);
            assert!((mh - ms).abs() < 3.0 * se, "day {t}: {mh} vs {ms} (se {se})");
        }
    }

    #[test]
    fn decoupled_groups_match_scaled_sir() {
        // a12 = a21 = 0: group 1 evolves as a homogeneous SIR with contagion
        // rescaled by its population share
        let params = HeteroParams::full([[0.3, 0.0], [0.0, 0.2]], [0.1, 0.1], [4_000, 6_000])
            .unwrap();
        let init = seeded_state(&params, [80, 0]);
        let homo =
            ModelParams::new(0.3 * 4_000.0 / 10_000.0, 0.1, 4_000).unwrap();
        let homo_init = default_init(4_000, 80);
        let reps = 10_000u64;
        let mut het_sum = 0.0;
        let mut homo_sum = 0.0;
        let mut homo_sq = 0.0;
        for r in 0..reps {
            let paths = simulate_sir2(&params, &init, 1, RngStream::new(62, 2 * r)).unwrap();
            let single = simulate(&homo, &homo_init, 1, RngStream::new(62, 2 * r + 1)).unwrap();
            het_sum += paths[0].transitions[0].n12 as f64;
            let x = single.transitions[0].n12 as f64;
            homo_sum += x;
            homo_sq += x * x;
            // group 2 has no infected and stays frozen
            assert_eq!(paths[1].transitions[0].n12, 0);
        }
        let mh = het_sum / reps as f64;
        let ms = homo_sum / reps as f64;
        let var = homo_sq / reps as f64 - ms * ms;
        let se = (2.0 * var / reps as f64).sqrt();
        assert!((mh - ms).abs() < 3.0 * se, "{mh} vs {ms} (se {se})");
    }

    #[test]
    fn per_group_conservation_and_monotonicity() {
        let params = HeteroParams::rank1([0.5, 0.3], [0.4, 0.6], [0.1, 0.08], [3_000, 7_000])
            .unwrap();
        let init = seeded_state(&params, [30, 70]);
        let paths = simulate_sir2(&params, &init, 300, RngStream::new(63, 0)).unwrap();
        for (j, path) in paths.iter().enumerate() {
            path.validate(params.sizes[j]).unwrap();
        }
    }

    #[test]
    fn symmetric_groups_exchangeable() {
        let params = symmetric_params(0.25, 0.1, 2_000);
        let init = seeded_state(&params, [50, 50]);
        let reps = 4_000u64;
        let (mut sum0, mut sum1) = (0.0, 0.0);
        for r in 0..reps {
            let paths = simulate_sir2(&params, &init, 10, RngStream::new(64, r)).unwrap();
            sum0 += paths[0].states[10].n3 as f64;
            sum1 += paths[1].states[10].n3 as f64;
        }
        let (m0, m1) = (sum0 / reps as f64, sum1 / reps as f64);
        assert!((m0 - m1).abs() / m0.max(m1) < 0.05, "{m0} vs {m1}");
    }

    #[test]
    fn matrix_r0_values() {
        // degenerate single-group case: one nonzero entry a/c
        let a: f64 = 0.14;
        let m = matrix_r0([a.sqrt(), 0.0], [a.sqrt(), 0.0], 0.07, 0.1);
        assert!((m[0][0] - a / 0.07).abs() < 1e-12);
        assert_eq!(m[0][1], 0.0);
        assert_eq!(m[1][0], 0.0);
        assert_eq!(m[1][1], 0.0);
        // rank 1: determinant vanishes
        let r = matrix_r0([0.5, 0.3], [0.4, 0.6], 0.1, 0.08);
        let det = r[0][0] * r[1][1] - r[0][1] * r[1][0];
        assert!(det.abs() < 1e-14);
        // doubling alpha_1 doubles column 1
        let r2 = matrix_r0([0.5, 0.3], [0.8, 0.6], 0.1, 0.08);
        assert!((r2[0][0] - 2.0 * r[0][0]).abs() < 1e-14);
        assert!((r2[1][0] - 2.0 * r[1][0]).abs() < 1e-14);
        assert!((r2[0][1] - r[0][1]).abs() < 1e-14);
    }

    #[test]
    fn implied_a_t_homogeneous_is_constant() {
        let params = symmetric_params(0.2, 0.1, 5_000);
        // arbitrary interior states: identical groups always give beta*alpha
        for (s1, s2) in [((4000, 700, 300), (3500, 900, 600)), ((100, 80, 4820), (2000, 10, 2990))]
        {
            let state = HeteroState::new(
                5,
                [
                    EpidemicState::new(5, s1.0, s1.1, s1.2),
                    EpidemicState::new(5, s2.0, s2.1, s2.2),
                ],
            );
            let a_t = implied_a_t(&state, &params).unwrap();
            assert!((a_t - 0.2).abs() < 1e-12, "a_t {a_t}");
        }
    }

    #[test]
    fn implied_a_t_hand_substitution() {
        let beta = [0.6, 0.2];
        let alpha = [0.5, 0.1];
        let params = HeteroParams::rank1(beta, alpha, [0.1, 0.1], [600, 400]).unwrap();
        let state = HeteroState::new(
            1,
            [EpidemicState::new(1, 500, 60, 40), EpidemicState::new(1, 300, 40, 60)],
        );
        let n = 1000.0;
        let mix_b = (0.6 * 500.0 + 0.2 * 300.0) / 800.0;
        let mix_a = (0.5 * 60.0 + 0.1 * 40.0) / n;
        let expect = mix_b * mix_a * n / 100.0;
        let a_t = implied_a_t(&state, &params).unwrap();
        assert!((a_t - expect).abs() < 1e-14);
    }

    #[test]
    fn implied_a_t_varies_on_heterogeneous_path() {
        let params = HeteroParams::rank1([0.9, 0.1], [0.8, 0.05], [0.15, 0.05], [5_000, 5_000])
            .unwrap();
        let init = seeded_state(&params, [50, 50]);
        let paths = simulate_sir2(&params, &init, 60, RngStream::new(65, 1)).unwrap();
        let mut values = Vec::new();
        for t in 0..=60usize {
            let state = HeteroState::new(
                t as u32,
                [paths[0].states[t], paths[1].states[t]],
            );
            let agg = state.aggregate();
            if agg.n1 > 0 && agg.n2 > 0 {
                values.push(implied_a_t(&state, &params).unwrap());
            }
        }
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(0.0f64, f64::max);
        assert!(max - min > 1e-3, "a_t range {min}..{max} too narrow");
    }

    #[test]
    fn omitted_heterogeneity_destabilizes_rolling_fit() {
        // fitting a single contagion parameter on aggregated heterogeneous
        // counts makes the rolling estimate drift as the susceptible mix
        // shifts; matched homogeneous data shows no such drift
        let hetero = HeteroParams::rank1([1.4, 0.08], [1.2, 0.05], [0.35, 0.04], [5_000, 5_000])
            .unwrap();
        let init = seeded_state(&hetero, [200, 200]);
        // rolling 8-day fits restricted to windows with a live epidemic
        let window_fits = |stats_path: &CountPath| -> Vec<f64> {
            let stats = SufficientStats::from_path(stats_path).unwrap();
            (8..=stats.horizon())
                .filter(|&t| stats.days[t - 8..t].iter().all(|d| d.n2_prev >= 50.0))
                .filter_map(|t| {
                    let w = SufficientStats { n: stats.n, days: stats.days[t - 8..t].to_vec() };
                    let a = fit_poisson_aml(&w).unwrap().a_hat;
                    (a > 0.0).then_some(a)
                })
                .collect()
        };
        let drift = |fits: &[f64]| {
            let head: f64 = fits[..3].iter().sum::<f64>() / 3.0;
            let tail: f64 = fits[fits.len() - 3..].iter().sum::<f64>() / 3.0;
            head / tail
        };
        let mut het_drift = Vec::new();
        let mut homo_drift = Vec::new();
        for r in 0..20u64 {
            let paths = simulate_sir2(&hetero, &init, 60, RngStream::new(66, r)).unwrap();
            let agg_states: Vec<EpidemicState> = (0..=60usize)
                .map(|t| {
                    HeteroState::new(t as u32, [paths[0].states[t], paths[1].states[t]])
                        .aggregate()
                })
                .collect();
            let transitions = crate::sir::transitions_from_marginals(&agg_states).unwrap();
            let agg_path = CountPath { states: agg_states, transitions };
            het_drift.push(drift(&window_fits(&agg_path)));

            let homo = ModelParams::new(0.8, 0.2, 10_000).unwrap();
            let hp = simulate(&homo, &default_init(10_000, 400), 60, RngStream::new(67, r))
                .unwrap();
            homo_drift.push(drift(&window_fits(&hp)));
        }
        let median = |v: &mut Vec<f64>| {
            v.sort_by(|x, y| x.partial_cmp(y).unwrap());
            v[v.len() / 2]
        };
        let het = median(&mut het_drift);
        let homo = median(&mut homo_drift);
        assert!(
            het > 2.0 && (homo - 1.0).abs() < 0.35,
            "early/late fit ratios: heterogeneous {het}, homogeneous {homo}"
        );
    }
}
