//! Exact chain-binomial simulation of the discrete-time stochastic SIR model.
//!
//! Per day, new infections are `Binomial(N1(t-1), a*N2(t-1)/n)` and new
//! recoveries are `Binomial(N2(t-1), c)`, drawn independently given the past.
//! Cross-sectional counts and transition counts carry the same information
//! and convert losslessly in both directions.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

/// Parameters of the homogeneous SIR model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Contagion rate per day.
    pub a: f64,
    /// Recovery probability per day.
    pub c: f64,
    /// Population size.
    pub n: u64,
}

impl ModelParams {
    pub fn new(a: f64, c: f64, n: u64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParams(format!("a must be > 0, got {a}")));
        }
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::InvalidParams(format!("c must be in (0, 1), got {c}")));
        }
        if n == 0 {
            return Err(Error::InvalidParams("n must be >= 1".into()));
        }
        Ok(Self { a, c, n })
    }

    /// Per-day infection probability given the current infected count.
    pub fn infection_prob(&self, n2_prev: u64) -> Result<f64> {
        let p = self.a * n2_prev as f64 / self.n as f64;
        if p > 1.0 {
            return Err(Error::InvalidProbability { value: p, a: self.a, n2: n2_prev, n: self.n });
        }
        Ok(p)
    }
}

/// Cross-sectional counts at a given day.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpidemicState {
    pub t: u32,
    pub n1: u64,
    pub n2: u64,
    pub n3: u64,
}

impl EpidemicState {
    pub fn new(t: u32, n1: u64, n2: u64, n3: u64) -> Self {
        Self { t, n1, n2, n3 }
    }

    pub fn total(&self) -> u64 {
        self.n1 + self.n2 + self.n3
    }
}

/// Counts of new infections (N12) and new recoveries (N23) at day t.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransitionCounts {
    pub t: u32,
    pub n12: u64,
    pub n23: u64,
}

/// A simulated or observed path: states for t = 0..=T and transitions for
/// t = 1..=T, linked by N1(t) = N1(t-1) - N12(t), N2(t) = N2(t-1) + N12(t) - N23(t).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountPath {
    pub states: Vec<EpidemicState>,
    pub transitions: Vec<TransitionCounts>,
}

impl CountPath {
    /// Number of observed transition days T.
    pub fn horizon(&self) -> usize {
        self.transitions.len()
    }

    pub fn validate(&self, n: u64) -> Result<()> {
        if self.states.len() != self.transitions.len() + 1 {
            return Err(Error::InconsistentCounts(format!(
                "{} states vs {} transitions",
                self.states.len(),
                self.transitions.len()
            )));
        }
        for w in self.states.windows(2) {
            let (prev, next) = (w[0], w[1]);
            let tr = self.transitions[next.t as usize - 1];
            if prev.total() != n || next.total() != n {
                return Err(Error::InconsistentCounts("counts do not sum to n".into()));
            }
            if next.n1 != prev.n1 - tr.n12
                || next.n2 != prev.n2 + tr.n12 - tr.n23
                || tr.n12 > prev.n1
                || tr.n23 > prev.n2
            {
                return Err(Error::InconsistentCounts(format!("at day {}", next.t)));
            }
        }
        Ok(())
    }
}

/// Row-stochastic one-day transition matrix given the previous infected count.
///
/// Rows/columns are ordered S=1, I=2, R=3; structural zeros sit at (1,3),
/// (2,1), (3,1), (3,2) and state 3 is absorbing.
pub fn transition_matrix(params: &ModelParams, n2_prev: u64) -> Result<[[f64; 3]; 3]> {
    let p12 = params.infection_prob(n2_prev)?;
    Ok([
        [1.0 - p12, p12, 0.0],
        [0.0, 1.0 - params.c, params.c],
        [0.0, 0.0, 1.0],
    ])
}

/// One exact chain-binomial step.
pub fn step<R: Rng>(
    state: &EpidemicState,
    params: &ModelParams,
    rng: &mut R,
) -> Result<(EpidemicState, TransitionCounts)> {
    let p12 = params.infection_prob(state.n2)?;
    let n12 = sample_binomial(state.n1, p12, rng);
    let n23 = sample_binomial(state.n2, params.c, rng);
    let next = EpidemicState {
        t: state.t + 1,
        n1: state.n1 - n12,
        n2: state.n2 + n12 - n23,
        n3: state.n3 + n23,
    };
    Ok((next, TransitionCounts { t: state.t + 1, n12, n23 }))
}

/// Exact binomial draw. `rand_distr` dispatches between exact inversion
/// (small n*p) and the exact BTPE rejection method (large n*p); no normal
/// approximation is ever used.
pub fn sample_binomial<R: Rng>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("checked probability").sample(rng)
}

/// Simulate `horizon` days forward from `init`.
pub fn simulate(
    params: &ModelParams,
    init: &EpidemicState,
    horizon: u32,
    stream: RngStream,
) -> Result<CountPath> {
    if init.total() != params.n {
        return Err(Error::InconsistentCounts(format!(
            "initial counts sum to {} but n = {}",
            init.total(),
            params.n
        )));
    }
    let mut rng = stream.rng();
    let mut states = Vec::with_capacity(horizon as usize + 1);
    let mut transitions = Vec::with_capacity(horizon as usize);
    let mut current = *init;
    states.push(current);
    for _ in 0..horizon {
        let (next, tr) = step(&current, params, &mut rng)?;
        states.push(next);
        transitions.push(tr);
        current = next;
    }
    Ok(CountPath { states, transitions })
}

/// Default initial condition used throughout: one small cluster of infected
/// in an otherwise susceptible population of 3,000,000.
pub fn default_init(n: u64, i0: u64) -> EpidemicState {
    EpidemicState::new(0, n - i0, i0, 0)
}

/// Recover transition counts from a marginal count path.
///
/// In the SIR model the cross-sectional counts determine the transitions
/// exactly: N12(t) = -dN1(t), N23(t) = dN3(t).
pub fn transitions_from_marginals(states: &[EpidemicState]) -> Result<Vec<TransitionCounts>> {
    if states.is_empty() {
        return Err(Error::InconsistentCounts("empty marginal sequence".into()));
    }
    let n = states[0].total();
    let mut out = Vec::with_capacity(states.len().saturating_sub(1));
    for w in states.windows(2) {
        let (prev, next) = (w[0], w[1]);
        if next.total() != n {
            return Err(Error::InconsistentCounts(format!(
                "total changes from {} to {} at day {}",
                n,
                next.total(),
                next.t
            )));
        }
        if next.n1 > prev.n1 || next.n3 < prev.n3 {
            return Err(Error::InconsistentCounts(format!(
                "N1 must be non-increasing and N3 non-decreasing (day {})",
                next.t
            )));
        }
        let n12 = prev.n1 - next.n1;
        let n23 = next.n3 - prev.n3;
        if n23 > prev.n2 {
            return Err(Error::InconsistentCounts(format!(
                "more recoveries than infected at day {}",
                next.t
            )));
        }
        out.push(TransitionCounts { t: next.t, n12, n23 });
    }
    Ok(out)
}

/// Rebuild marginal counts from an initial state and transition counts.
/// Exact inverse of [`transitions_from_marginals`].
pub fn marginals_from_transitions(
    init: &EpidemicState,
    transitions: &[TransitionCounts],
) -> Result<Vec<EpidemicState>> {
    let mut states = Vec::with_capacity(transitions.len() + 1);
    let mut current = *init;
    states.push(current);
    for tr in transitions {
        if tr.n12 > current.n1 || tr.n23 > current.n2 {
            return Err(Error::InconsistentCounts(format!(
                "transition at day {} exceeds available counts",
                tr.t
            )));
        }
        current = EpidemicState {
            t: current.t + 1,
            n1: current.n1 - tr.n12,
            n2: current.n2 + tr.n12 - tr.n23,
            n3: current.n3 + tr.n23,
        };
        states.push(current);
    }
    Ok(states)
}

/// Guard for the per-individual simulator; it is a desk-scale cross-check,
/// not the production path.
pub const INDIVIDUAL_GUARD: u64 = 100_000;

/// Individual state at a given day.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Susceptible,
    Infected,
    Recovered,
}

/// Simulate at the individual level: each susceptible flips with probability
/// a*N2(t-1)/n and each infected recovers with probability c, independently.
/// Aggregating the histories reproduces the count-level law.
pub fn simulate_individuals(
    params: &ModelParams,
    init: &EpidemicState,
    horizon: u32,
    stream: RngStream,
) -> Result<Vec<Vec<Status>>> {
    if params.n > INDIVIDUAL_GUARD {
        return Err(Error::SizeGuard { n: params.n, limit: INDIVIDUAL_GUARD });
    }
    if init.total() != params.n {
        return Err(Error::InconsistentCounts("initial counts do not sum to n".into()));
    }
    let mut rng = stream.rng();
    let n = params.n as usize;
    let mut current: Vec<Status> = Vec::with_capacity(n);
    current.extend(std::iter::repeat(Status::Susceptible).take(init.n1 as usize));
    current.extend(std::iter::repeat(Status::Infected).take(init.n2 as usize));
    current.extend(std::iter::repeat(Status::Recovered).take(init.n3 as usize));
    let mut histories = vec![current.clone()];
    for _ in 0..horizon {
        let n2_prev = current.iter().filter(|s| matches!(s, Status::Infected)).count() as u64;
        let p12 = params.infection_prob(n2_prev)?;
        let next: Vec<Status> = current
            .iter()
            .map(|s| match s {
                Status::Susceptible if rng.gen::<f64>() < p12 => Status::Infected,
                Status::Infected if rng.gen::<f64>() < params.c => Status::Recovered,
                other => *other,
            })
            .collect();
        histories.push(next.clone());
        current = next;
    }
    Ok(histories)
}

/// Aggregate individual histories into a count path.
pub fn aggregate_individuals(histories: &[Vec<Status>]) -> CountPath {
    let count = |day: &[Status]| {
        let n1 = day.iter().filter(|s| matches!(s, Status::Susceptible)).count() as u64;
        let n2 = day.iter().filter(|s| matches!(s, Status::Infected)).count() as u64;
        let n3 = day.iter().filter(|s| matches!(s, Status::Recovered)).count() as u64;
        (n1, n2, n3)
    };
    let states: Vec<EpidemicState> = histories
        .iter()
        .enumerate()
        .map(|(t, day)| {
            let (n1, n2, n3) = count(day);
            EpidemicState::new(t as u32, n1, n2, n3)
        })
        .collect();
    let transitions = transitions_from_marginals(&states).expect("aggregated path is consistent");
    CountPath { states, transitions }
}
