//! Conjugate Bayesian inference for (a, c) under the Poisson approximation of
//! the daily transition counts, and the induced posterior of R0 = a/c.
//!
//! Independent gamma priors stay gamma a posteriori; a scaled version of the
//! ratio a/c then follows an F distribution, which gives exact posterior
//! quantiles without simulation.

use crate::error::{Error, Result};
use crate::estimators::SufficientStats;
use crate::rng::RngStream;
use rand_distr::Distribution;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

/// Gamma distribution in shape-rate form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParam {
    pub shape: f64,
    pub rate: f64,
}

impl GammaParam {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite() && rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParams("gamma shape and rate must be positive".into()));
        }
        Ok(Self { shape, rate })
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn variance(&self) -> f64 {
        self.shape / (self.rate * self.rate)
    }
}

/// Joint posterior of the contagion and recovery parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorPair {
    pub a: GammaParam,
    pub c: GammaParam,
}

impl PosteriorPair {
    /// Weakly informative default prior: shape 1, rate 1e-3 for both
    /// parameters (near-flat exponential with mean 1000).
    pub fn default_prior() -> Self {
        Self {
            a: GammaParam { shape: 1.0, rate: 1e-3 },
            c: GammaParam { shape: 1.0, rate: 1e-3 },
        }
    }
}

/// Conjugate update: the infection count adds Sum N12 to the shape of a and
/// the Poisson exposure Sum N1(t-1) N2(t-1) / n to its rate; the recovery
/// count adds Sum N23 and Sum N2(t-1).
pub fn posterior_update(prior: &PosteriorPair, stats: &SufficientStats) -> Result<PosteriorPair> {
    let sum_n12: f64 = stats.days.iter().map(|d| d.n12).sum();
    let sum_n23: f64 = stats.days.iter().map(|d| d.n23).sum();
    let sum_n2: f64 = stats.days.iter().map(|d| d.n2_prev).sum();
    let exposure: f64 = stats.days.iter().map(|d| d.n1_prev * d.n2_prev / stats.n).sum();
    Ok(PosteriorPair {
        a: GammaParam::new(prior.a.shape + sum_n12, prior.a.rate + exposure)?,
        c: GammaParam::new(prior.c.shape + sum_n23, prior.c.rate + sum_n2)?,
    })
}

/// Posterior distribution of R0 = a/c for independent gamma marginals:
/// (rate_a shape_c)/(rate_c shape_a) * R0 ~ F(2 shape_a, 2 shape_c).
#[derive(Debug, Clone)]
pub struct RzeroPosterior {
    pub pair: PosteriorPair,
    f: FisherSnedecor,
    scale: f64,
}

impl RzeroPosterior {
    pub fn new(pair: PosteriorPair) -> Result<Self> {
        let f = FisherSnedecor::new(2.0 * pair.a.shape, 2.0 * pair.c.shape)
            .map_err(|e| Error::InvalidParams(format!("invalid F distribution: {e}")))?;
        // R0 = scale * F with F ~ F(2 shape_a, 2 shape_c)
        let scale = (pair.a.shape * pair.c.rate) / (pair.c.shape * pair.a.rate);
        Ok(Self { pair, f, scale })
    }

    /// Posterior mean shape_a rate_c / (rate_a (shape_c - 1)); undefined when
    /// shape_c <= 1 because E[1/c] diverges.
    pub fn mean(&self) -> Option<f64> {
        if self.pair.c.shape > 1.0 {
            Some(self.pair.a.shape * self.pair.c.rate
                / (self.pair.a.rate * (self.pair.c.shape - 1.0)))
        } else {
            None
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) || p == 0.0 {
            return Err(Error::InvalidParams(format!("quantile level {p} outside (0, 1)")));
        }
        Ok(self.scale * self.f.inverse_cdf(p))
    }

    pub fn cdf(&self, r0: f64) -> f64 {
        if r0 <= 0.0 {
            0.0
        } else {
            self.f.cdf(r0 / self.scale)
        }
    }

    /// Equal-tailed credible interval.
    pub fn credible_interval(&self, level: f64) -> Result<(f64, f64)> {
        if !(0.0 < level && level < 1.0) {
            return Err(Error::InvalidParams(format!("level {level} outside (0, 1)")));
        }
        let tail = (1.0 - level) / 2.0;
        Ok((self.quantile(tail)?, self.quantile(1.0 - tail)?))
    }

    /// Draw (a, c, r0) triples from the posterior.
    pub fn sample(&self, draws: usize, stream: RngStream) -> Result<Vec<(f64, f64, f64)>> {
        let mut rng = stream.rng();
        let ga = rand_distr::Gamma::new(self.pair.a.shape, 1.0 / self.pair.a.rate)
            .map_err(|e| Error::InvalidParams(format!("invalid gamma: {e}")))?;
        let gc = rand_distr::Gamma::new(self.pair.c.shape, 1.0 / self.pair.c.rate)
            .map_err(|e| Error::InvalidParams(format!("invalid gamma: {e}")))?;
        Ok((0..draws)
            .map(|_| {
                let a = ga.sample(&mut rng);
                let c = gc.sample(&mut rng);
                (a, c, a / c)
            })
            .collect())
    }
}
