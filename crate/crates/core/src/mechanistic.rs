//! Deterministic (infinite-population) SIR recursions: the discrete analogue
//! of the continuous-time model, the final-size equation, the quadratic
//! incidence recursion, and its linearized renewal form.

use crate::error::{Error, Result};
use crate::sir::ModelParams;
use crate::solve::bisect_newton;

/// Population fractions (susceptible, infected, recovered); x + y + z = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanisticState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl MechanisticState {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if x < 0.0 || y < 0.0 || z < 0.0 || (x + y + z - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "fractions must be nonnegative and sum to 1, got ({x}, {y}, {z})"
            )));
        }
        Ok(Self { x, y, z })
    }
}

/// One step of the deterministic recursion:
/// x' = x - a x y, y' = y + a x y - c y, z' = z + c y.
pub fn deterministic_step(state: &MechanisticState, params: &ModelParams) -> Result<MechanisticState> {
    if params.a * state.y > 1.0 {
        return Err(Error::InvalidProbability {
            value: params.a * state.y,
            a: params.a,
            n2: 0,
            n: 0,
        });
    }
    let new_inf = params.a * state.x * state.y;
    let new_rec = params.c * state.y;
    Ok(MechanisticState {
        x: state.x - new_inf,
        y: state.y + new_inf - new_rec,
        z: state.z + new_rec,
    })
}

/// Iterate the deterministic recursion for `horizon` days, returning the
/// trajectory including the initial state.
pub fn deterministic_path(
    init: &MechanisticState,
    params: &ModelParams,
    horizon: usize,
) -> Result<Vec<MechanisticState>> {
    let mut out = Vec::with_capacity(horizon + 1);
    let mut state = *init;
    out.push(state);
    for _ in 0..horizon {
        state = deterministic_step(&state, params)?;
        out.push(state);
    }
    Ok(out)
}

/// Limiting susceptible fraction x(∞): the root in (0, x0) of
/// x∞ - x0 - y0 - (c/a) log(x∞/x0) = 0, by bisection to 1e-12.
///
/// The root is strictly positive: the epidemic always leaves a residual
/// susceptible pool (herd immunity).
pub fn final_size(params: &ModelParams, x0: f64, y0: f64) -> Result<f64> {
    if !(x0 > 0.0 && x0 <= 1.0) || y0 < 0.0 {
        return Err(Error::InvalidParams(format!("need 0 < x0 <= 1 and y0 >= 0, got ({x0}, {y0})")));
    }
    let ratio = params.c / params.a;
    let f = |x: f64| x - x0 - y0 - ratio * (x / x0).ln();
    bisect_newton(f, 1e-15, x0, 1e-13)
}

/// Next mechanistic incidence p*12(t) from its history (index s-1 holds
/// p*12(t-s)): a [1 - Σ p*12(t-s)] Σ (1-c)^(s-1) p*12(t-s).
pub fn mechanistic_infections(params: &ModelParams, history: &[f64]) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::InvalidParams("incidence history must be nonempty".into()));
    }
    let mut cumulative = 0.0;
    let mut weighted = 0.0;
    let mut decay = 1.0;
    for (s, &inc) in history.iter().enumerate() {
        if inc < 0.0 {
            return Err(Error::InvalidParams(format!("negative incidence at lag {}", s + 1)));
        }
        cumulative += inc;
        weighted += decay * inc;
        decay *= 1.0 - params.c;
    }
    if cumulative > 1.0 + 1e-12 {
        return Err(Error::InvalidParams(format!("cumulative incidence {cumulative} exceeds 1")));
    }
    Ok(params.a * (1.0 - cumulative) * weighted)
}

/// Linearized renewal step: R00 Σ w(s) history(t-s) with w(s) = c(1-c)^(s-1).
pub fn linearized_renewal(r00: f64, c: f64, history: &[f64]) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::InvalidParams("incidence history must be nonempty".into()));
    }
    let mut sum = 0.0;
    let mut w = c;
    for &inc in history {
        sum += w * inc;
        w *= 1.0 - c;
    }
    Ok(r00 * sum)
}

/// Per-day growth factor of the linearized renewal recursion: 1 + c (R00 - 1).
/// For incidence-only data at scale, only this rate is identifiable, not
/// (R00, c) separately.
pub fn explosion_rate(r00: f64, c: f64) -> f64 {
    1.0 + c * (r00 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, c: f64) -> ModelParams {
        ModelParams::new(a, c, 1_000_000).unwrap()
    }

    #[test]
    fn fixed_point_without_infected() {
        let s = MechanisticState::new(0.8, 0.0, 0.2).unwrap();
        let next = deterministic_step(&s, &params(0.3, 0.1)).unwrap();
        assert_eq!(next, s);
    }

    #[test]
    fn conservation_over_long_horizon() {
        let p = params(0.3, 0.1);
        let mut s = MechanisticState::new(1.0 - 1e-5, 1e-5, 0.0).unwrap();
        for _ in 0..100_000 {
            s = deterministic_step(&s, &p).unwrap();
            assert!((s.x + s.y + s.z - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn epidemic_shape_for_r0_above_one() {
        let p = params(0.2, 0.1);
        let path = deterministic_path(
            &MechanisticState::new(0.999, 0.001, 0.0).unwrap(),
            &p,
            2000,
        )
        .unwrap();
        let peak = path.iter().enumerate().max_by(|a, b| a.1.y.total_cmp(&b.1.y)).unwrap().0;
        assert!(peak > 0 && peak < 2000, "interior peak, got {peak}");
        for w in path.windows(2) {
            assert!(w[1].x <= w[0].x + 1e-15);
            assert!(w[1].z >= w[0].z - 1e-15);
        }
        for w in path[..peak].windows(2) {
            assert!(w[1].y >= w[0].y - 1e-15);
        }
        for w in path[peak..].windows(2) {
            assert!(w[1].y <= w[0].y + 1e-15);
        }
    }

    #[test]
    fn final_size_r0_1_5() {
        // R0 = 1.5, x0 -> 1, y0 -> 0: x∞ ≈ 0.417 (attack rate ≈ 0.583)
        let p = params(0.105, 0.07);
        let x_inf = final_size(&p, 1.0 - 1e-9, 1e-9).unwrap();
        assert!((x_inf - 0.417).abs() < 1e-3, "x_inf {x_inf}");
        // the root satisfies the defining equation to 1e-12
        let resid = x_inf - (1.0 - 1e-9) - 1e-9 - (0.07 / 0.105) * (x_inf / (1.0 - 1e-9)).ln();
        assert!(resid.abs() < 1e-12);
    }

    #[test]
    fn final_size_no_transmission_limit() {
        let p = params(1e-9, 0.07);
        let x_inf = final_size(&p, 0.9, 0.05).unwrap();
        assert!((x_inf - 0.9).abs() < 1e-6, "x_inf {x_inf}");
    }

    #[test]
    fn final_size_matches_long_trajectory() {
        // small daily rates so the discrete recursion tracks the
        // continuous-time conservation law the final-size equation encodes
        let p = params(0.015, 0.01);
        let x0 = 1.0 - 1e-5;
        let y0 = 1e-5;
        let path =
            deterministic_path(&MechanisticState::new(x0, y0, 0.0).unwrap(), &p, 100_000).unwrap();
        let x_inf = final_size(&p, x0, y0).unwrap();
        assert!((path.last().unwrap().x - x_inf).abs() < 1e-3,
            "trajectory {} vs root {x_inf}", path.last().unwrap().x);
    }

    #[test]
    fn mechanistic_infections_examples() {
        let p = params(0.2, 0.1);
        assert_eq!(mechanistic_infections(&p, &[0.0, 0.0]).unwrap(), 0.0);
        // one-term history ε gives a(1-ε)ε
        let eps = 1e-3;
        let v = mechanistic_infections(&p, &[eps]).unwrap();
        assert!((v - 0.2 * (1.0 - eps) * eps).abs() < 1e-18);
        assert!(mechanistic_infections(&p, &[]).is_err());
        assert!(mechanistic_infections(&p, &[0.7, 0.7]).is_err());
    }

    #[test]
    fn quadratic_recursion_matches_deterministic_incidence() {
        // feed the recursion the incidence x(t-1)-x(t) of the deterministic
        // path; the two routes agree to 1e-10
        let p = params(0.25, 0.1);
        let path = deterministic_path(
            &MechanisticState::new(1.0 - 1e-4, 1e-4, 0.0).unwrap(),
            &p,
            400,
        )
        .unwrap();
        // history convention: incidence(t-s) at index s-1; seed with the
        // initial infected mass as the day-0 "incidence"
        let mut incidence: Vec<f64> = vec![1e-4];
        for t in 1..=400usize {
            let mut hist = incidence.clone();
            hist.reverse();
            let pred = mechanistic_infections(&p, &hist).unwrap();
            let actual = path[t - 1].x - path[t].x;
            assert!(
                (pred - actual).abs() < 1e-10,
                "day {t}: predicted {pred}, trajectory {actual}"
            );
            incidence.push(actual);
        }
    }

    #[test]
    fn renewal_constant_history_partial_sum() {
        // constant history I over t lags: value is R00 * I * (1 - (1-c)^t)
        let (r00, c, i) = (1.3, 0.1, 0.02);
        for t in [1usize, 5, 50] {
            let hist = vec![i; t];
            let v = linearized_renewal(r00, c, &hist).unwrap();
            let expect = r00 * i * (1.0 - (1.0f64 - c).powi(t as i32));
            assert!((v - expect).abs() < 1e-14);
        }
        // R00 = 1 with a long constant history returns ≈ I
        let v = linearized_renewal(1.0, 0.1, &vec![0.02; 500]).unwrap();
        assert!((v - 0.02).abs() < 1e-12);
    }

    #[test]
    fn explosion_rate_values() {
        assert_eq!(explosion_rate(1.0, 0.3), 1.0);
        assert!((explosion_rate(2.0, 0.07) - 1.07).abs() < 1e-15);
    }

    #[test]
    fn renewal_growth_matches_explosion_rate() {
        // simulate the linearized renewal and regress log-incidence on time
        // for t in [200, 400]; slope matches log(1 + c(R00-1)) within 1e-3
        let (r00, c) = (2.0, 0.07);
        let mut inc: Vec<f64> = vec![1e-8];
        for _ in 1..=400usize {
            let mut hist = inc.clone();
            hist.reverse();
            inc.push(linearized_renewal(r00, c, &hist).unwrap());
        }
        let pts: Vec<(f64, f64)> =
            (200..=400).map(|t| (t as f64, inc[t].ln())).collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        let fitted_rate = slope.exp();
        assert!((fitted_rate - explosion_rate(r00, c)).abs() < 1e-3, "rate {fitted_rate}");
        // pathwise ratio convergence at t = 400
        let ratio = inc[400] / inc[399];
        assert!((ratio - 1.07).abs() < 1e-3, "ratio {ratio}");
    }
}
