//! The five (approximate) maximum-likelihood estimators of (a, c, R0).
//!
//! The exact binomial log-likelihood separates as L(a, c) = L1(a) + L2(c),
//! so a and c are always fitted independently. The Poisson, Gaussian,
//! unfeasible-Gaussian (GLS) and Poisson/Gaussian variants replace the
//! binomial terms by their respective approximations; each estimator
//! maximizes its own objective, and the test suite checks every one of them
//! against a brute-force grid argmax of that objective.

use crate::error::{Error, Result};
use crate::sir::CountPath;
use crate::solve::{bisect_newton, maximize_golden};

/// Per-day sufficient statistics feeding every likelihood.
///
/// Counts are stored as f64 so that exact-frequency (infinite-population)
/// data can reuse the same code paths in consistency checks.
#[derive(Debug, Clone)]
pub struct DayStats {
    pub t: u32,
    pub n1_prev: f64,
    pub n2_prev: f64,
    pub n12: f64,
    pub n23: f64,
    pub n11: f64,
    pub n22: f64,
}

impl DayStats {
    /// p̂2(t-1) = N2(t-1)/n
    pub fn p2_prev(&self, n: f64) -> f64 {
        self.n2_prev / n
    }

    /// p̂12(t) = N12(t)/N1(t-1); 0 when no susceptibles remain.
    pub fn p12(&self) -> f64 {
        if self.n1_prev > 0.0 { self.n12 / self.n1_prev } else { 0.0 }
    }

    /// p̂23(t) = N23(t)/N2(t-1); 0 when no infected remain.
    pub fn p23(&self) -> f64 {
        if self.n2_prev > 0.0 { self.n23 / self.n2_prev } else { 0.0 }
    }
}

#[derive(Debug, Clone)]
pub struct SufficientStats {
    pub n: f64,
    pub days: Vec<DayStats>,
}

impl SufficientStats {
    /// Aggregate a count path into sufficient statistics; Table-1 identities
    /// are validated by construction of `CountPath`.
    pub fn from_path(path: &CountPath) -> Result<Self> {
        if path.states.is_empty() || path.states.len() != path.transitions.len() + 1 {
            return Err(Error::InconsistentCounts("malformed path".into()));
        }
        let n = path.states[0].total() as f64;
        let days = path
            .states
            .windows(2)
            .zip(&path.transitions)
            .map(|(w, tr)| {
                let prev = w[0];
                DayStats {
                    t: tr.t,
                    n1_prev: prev.n1 as f64,
                    n2_prev: prev.n2 as f64,
                    n12: tr.n12 as f64,
                    n23: tr.n23 as f64,
                    n11: (prev.n1 - tr.n12) as f64,
                    n22: (prev.n2 - tr.n23) as f64,
                }
            })
            .collect();
        Ok(Self { n, days })
    }

    pub fn horizon(&self) -> usize {
        self.days.len()
    }

    pub fn sum_n12(&self) -> f64 {
        self.days.iter().map(|d| d.n12).sum()
    }

    pub fn sum_n23(&self) -> f64 {
        self.days.iter().map(|d| d.n23).sum()
    }

    pub fn sum_n2_prev(&self) -> f64 {
        self.days.iter().map(|d| d.n2_prev).sum()
    }

    /// Σ N1(t-1) p̂2(t-1) = Σ N1(t-1) N2(t-1) / n — the Poisson exposure for a.
    pub fn exposure_a(&self) -> f64 {
        self.days.iter().map(|d| d.n1_prev * d.p2_prev(self.n)).sum()
    }

    /// Upper end of the feasible bracket for a: min over days of 1/p̂2(t-1).
    fn a_bracket_hi(&self) -> f64 {
        self.days
            .iter()
            .filter(|d| d.n2_prev > 0.0)
            .map(|d| self.n / d.n2_prev)
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    BinomialMl,
    PoissonAml,
    GaussianAml,
    UnfeasibleGaussian,
    PoissonGaussian,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::BinomialMl,
        Method::PoissonAml,
        Method::GaussianAml,
        Method::UnfeasibleGaussian,
        Method::PoissonGaussian,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::BinomialMl => "binomial-ml",
            Method::PoissonAml => "poisson-aml",
            Method::GaussianAml => "gaussian-aml",
            Method::UnfeasibleGaussian => "unfeasible-gaussian",
            Method::PoissonGaussian => "poisson-gaussian",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown method '{s}'")))
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitFlags {
    /// R̂0 = â/0: no recovery observed.
    pub r0_infinite: bool,
    /// The a-likelihood was maximized at the boundary a = 0.
    pub a_boundary: bool,
    pub c_boundary: bool,
    /// Days excluded because a frequency was degenerate (0 or 1).
    pub dropped_days: usize,
}

impl FitFlags {
    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        if self.r0_infinite {
            parts.push("r0-infinite".to_string());
        }
        if self.a_boundary {
            parts.push("a-boundary".to_string());
        }
        if self.c_boundary {
            parts.push("c-boundary".to_string());
        }
        if self.dropped_days > 0 {
            parts.push(format!("dropped-days={}", self.dropped_days));
        }
        parts.join(";")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub method: Method,
    pub a_hat: f64,
    pub c_hat: f64,
    /// â/ĉ; `f64::INFINITY` with the flag set when Σ N23 = 0.
    pub r0_hat: f64,
    pub var_a: Option<f64>,
    pub var_c: Option<f64>,
    pub iterations: u32,
    pub flags: FitFlags,
}

impl FitResult {
    fn ratio(method: Method, a_hat: f64, c_hat: f64, iterations: u32, mut flags: FitFlags) -> Self {
        let r0_hat = if c_hat > 0.0 {
            a_hat / c_hat
        } else {
            flags.r0_infinite = true;
            f64::INFINITY
        };
        FitResult { method, a_hat, c_hat, r0_hat, var_a: None, var_c: None, iterations, flags }
    }
}

/// Dispatch to one of the five fitters.
pub fn fit(stats: &SufficientStats, method: Method) -> Result<FitResult> {
    match method {
        Method::BinomialMl => fit_binomial_ml(stats),
        Method::PoissonAml => fit_poisson_aml(stats),
        Method::GaussianAml => fit_gaussian_aml(stats),
        Method::UnfeasibleGaussian => fit_unfeasible_gaussian(stats),
        Method::PoissonGaussian => fit_poisson_gaussian(stats),
    }
}

/// Exact binomial log-likelihood for a, up to constants.
/// Days with p̂2(t-1) = 0 carry zero weight and are skipped.
pub fn binomial_loglik_a(stats: &SufficientStats, a: f64) -> f64 {
    stats
        .days
        .iter()
        .filter(|d| d.n2_prev > 0.0)
        .map(|d| {
            let p = a * d.p2_prev(stats.n);
            let mut ll = 0.0;
            if d.n11 > 0.0 {
                ll += d.n11 * (1.0 - p).ln();
            }
            if d.n12 > 0.0 {
                ll += d.n12 * p.ln();
            }
            ll
        })
        .sum()
}

/// Exact binomial log-likelihood for c, up to constants.
pub fn binomial_loglik_c(stats: &SufficientStats, c: f64) -> f64 {
    stats
        .days
        .iter()
        .map(|d| {
            let mut ll = 0.0;
            if d.n22 > 0.0 {
                ll += d.n22 * (1.0 - c).ln();
            }
            if d.n23 > 0.0 {
                ll += d.n23 * c.ln();
            }
            ll
        })
        .sum()
}

/// Binomial maximum likelihood. ĉ is closed form; â solves the first-order
/// condition by bracketed bisection with a Newton polish.
pub fn fit_binomial_ml(stats: &SufficientStats) -> Result<FitResult> {
    let sum_n2 = stats.sum_n2_prev();
    if sum_n2 <= 0.0 {
        return Err(Error::NotEstimable("no infected person-days observed".into()));
    }
    let c_hat = stats.sum_n23() / sum_n2;

    let sum_n12 = stats.sum_n12();
    let mut flags = FitFlags::default();
    let (a_hat, iterations) = if sum_n12 == 0.0 {
        flags.a_boundary = true;
        (0.0, 0)
    } else {
        let hi = stats.a_bracket_hi();
        let foc = |a: f64| {
            let mut s = 0.0;
            for d in stats.days.iter().filter(|d| d.n2_prev > 0.0) {
                let p2 = d.p2_prev(stats.n);
                s -= d.n11 * p2 / (1.0 - a * p2);
            }
            s + sum_n12 / a
        };
        let a = bisect_newton(&foc, 1e-300f64.max(hi * 1e-16), hi * (1.0 - 1e-12), 1e-12)?;
        // the residual check from the contract: |FOC| < 1e-10 * Σ N12
        debug_assert!(foc(a).abs() < 1e-10 * sum_n12, "FOC residual too large: {}", foc(a));
        (a, 200)
    };
    let mut out = FitResult::ratio(Method::BinomialMl, a_hat, c_hat, iterations, flags);
    let (var_a, var_c) = var_binomial_ml(stats, &out);
    out.var_a = var_a;
    out.var_c = var_c;
    Ok(out)
}

/// Plug-in variance estimates for the binomial ML fit (observed information
/// for a, exact binomial form for c). Undefined when â = 0.
pub fn var_binomial_ml(stats: &SufficientStats, fit: &FitResult) -> (Option<f64>, Option<f64>) {
    let var_c = {
        let sum_n2 = stats.sum_n2_prev();
        if sum_n2 > 0.0 {
            Some(fit.c_hat * (1.0 - fit.c_hat) / sum_n2)
        } else {
            None
        }
    };
    let var_a = if fit.a_hat > 0.0 {
        let info: f64 = stats
            .days
            .iter()
            .filter(|d| d.n2_prev > 0.0)
            .map(|d| {
                let p2 = d.p2_prev(stats.n);
                d.n11 * p2 * p2 / (1.0 - fit.a_hat * p2).powi(2)
            })
            .sum::<f64>()
            + stats.sum_n12() / (fit.a_hat * fit.a_hat);
        if info > 0.0 { Some(1.0 / info) } else { None }
    } else {
        None
    };
    (var_a, var_c)
}

/// Poisson approximate ML: closed form for both parameters.
/// â_P = n Σ N12 / Σ N1(t-1) N2(t-1); ĉ_P coincides with the binomial ĉ.
pub fn fit_poisson_aml(stats: &SufficientStats) -> Result<FitResult> {
    let exposure = stats.exposure_a();
    if exposure <= 0.0 {
        return Err(Error::NotEstimable("zero Poisson exposure Σ N1 N2".into()));
    }
    let sum_n2 = stats.sum_n2_prev();
    let a_hat = stats.sum_n12() / exposure;
    let c_hat = stats.sum_n23() / sum_n2;
    let mut out = FitResult::ratio(Method::PoissonAml, a_hat, c_hat, 0, FitFlags::default());
    let (var_a, var_c) = sandwich_poisson(stats, a_hat, c_hat);
    out.var_a = var_a;
    out.var_c = var_c;
    Ok(out)
}

/// Sandwich (Huber) variances for the Poisson AML estimators: the Poisson
/// objective is misspecified under the binomial law, so H^-1 (Σ s²) H^-1
/// replaces the inverse information.
fn sandwich_poisson(
    stats: &SufficientStats,
    a_hat: f64,
    c_hat: f64,
) -> (Option<f64>, Option<f64>) {
    let var_a = if a_hat > 0.0 {
        let h: f64 = stats.sum_n12() / (a_hat * a_hat);
        let meat: f64 = stats
            .days
            .iter()
            .map(|d| {
                let s = d.n12 / a_hat - d.n1_prev * d.p2_prev(stats.n);
                s * s
            })
            .sum();
        if h > 0.0 { Some(meat / (h * h)) } else { None }
    } else {
        None
    };
    let var_c = if c_hat > 0.0 {
        let h: f64 = stats.sum_n23() / (c_hat * c_hat);
        let meat: f64 = stats
            .days
            .iter()
            .map(|d| {
                let s = d.n23 / c_hat - d.n2_prev;
                s * s
            })
            .sum();
        if h > 0.0 { Some(meat / (h * h)) } else { None }
    } else {
        None
    };
    (var_a, var_c)
}

/// Gaussian approximate log-likelihood for a, up to constants.
pub fn gaussian_loglik_a(stats: &SufficientStats, a: f64) -> f64 {
    stats
        .days
        .iter()
        .filter(|d| d.n2_prev > 0.0)
        .map(|d| {
            let p2 = d.p2_prev(stats.n);
            let v = a * p2 * (1.0 - a * p2);
            let r = d.p12() - a * p2;
            -0.5 * v.ln() - 0.5 * d.n1_prev * r * r / v
        })
        .sum()
}

/// Gaussian approximate log-likelihood for c, up to constants.
pub fn gaussian_loglik_c(stats: &SufficientStats, c: f64) -> f64 {
    let t = stats.days.iter().filter(|d| d.n2_prev > 0.0).count() as f64;
    let v = c * (1.0 - c);
    -0.5 * t * v.ln()
        - 0.5 / v
            * stats
                .days
                .iter()
                .filter(|d| d.n2_prev > 0.0)
                .map(|d| {
                    let r = d.p23() - c;
                    d.n2_prev * r * r
                })
                .sum::<f64>()
}

/// Gaussian AML: both parameters by bracketed scalar maximization.
pub fn fit_gaussian_aml(stats: &SufficientStats) -> Result<FitResult> {
    if stats.sum_n2_prev() <= 0.0 {
        return Err(Error::NotEstimable("no infected person-days observed".into()));
    }
    let mut flags = FitFlags::default();
    let a_hat = if stats.sum_n12() == 0.0 {
        flags.a_boundary = true;
        0.0
    } else {
        let hi = stats.a_bracket_hi();
        maximize_golden(|a| gaussian_loglik_a(stats, a), hi * 1e-12, hi * (1.0 - 1e-9), 1e-10)
    };
    let c_hat = if stats.sum_n23() == 0.0 {
        flags.c_boundary = true;
        0.0
    } else {
        maximize_golden(|c| gaussian_loglik_c(stats, c), 1e-12, 1.0 - 1e-12, 1e-10)
    };
    Ok(FitResult::ratio(Method::GaussianAml, a_hat, c_hat, 0, flags))
}

/// Unfeasible Gaussian (GLS) objective for a over the usable days.
pub fn unfeasible_objective_a(stats: &SufficientStats, a: f64) -> f64 {
    -0.5
        * stats
            .days
            .iter()
            .filter(|d| usable_ug_a(d))
            .map(|d| {
                let p12 = d.p12();
                let r = p12 - a * d.p2_prev(stats.n);
                d.n1_prev * r * r / (p12 * (1.0 - p12))
            })
            .sum::<f64>()
}

fn usable_ug_a(d: &DayStats) -> bool {
    let p12 = d.p12();
    d.n1_prev > 0.0 && d.n2_prev > 0.0 && p12 > 0.0 && p12 < 1.0
}

fn usable_ug_c(d: &DayStats) -> bool {
    let p23 = d.p23();
    d.n2_prev > 0.0 && p23 > 0.0 && p23 < 1.0
}

/// Unfeasible Gaussian AML: closed-form GLS with the variance replaced by
/// its sample estimate. Days with degenerate frequencies are dropped.
pub fn fit_unfeasible_gaussian(stats: &SufficientStats) -> Result<FitResult> {
    let mut flags = FitFlags::default();
    let (mut num_a, mut den_a, mut used_a) = (0.0, 0.0, 0usize);
    for d in &stats.days {
        if usable_ug_a(d) {
            let p2 = d.p2_prev(stats.n);
            let p12 = d.p12();
            num_a += d.n1_prev * p2 / (1.0 - p12);
            den_a += d.n1_prev * p2 * p2 / (p12 * (1.0 - p12));
            used_a += 1;
        }
    }
    let (mut num_c, mut den_c, mut used_c) = (0.0, 0.0, 0usize);
    for d in &stats.days {
        if usable_ug_c(d) {
            let p23 = d.p23();
            num_c += d.n2_prev / (1.0 - p23);
            den_c += d.n2_prev / (p23 * (1.0 - p23));
            used_c += 1;
        }
    }
    if used_a == 0 || used_c == 0 {
        return Err(Error::NotEstimable(
            "all days dropped by the unfeasible-Gaussian degeneracy filter".into(),
        ));
    }
    flags.dropped_days = 2 * stats.horizon() - used_a - used_c;
    Ok(FitResult::ratio(Method::UnfeasibleGaussian, num_a / den_a, num_c / den_c, 0, flags))
}

/// Poisson/Gaussian approximate log-likelihood for a, up to constants.
pub fn poisson_gaussian_loglik_a(stats: &SufficientStats, a: f64) -> f64 {
    stats
        .days
        .iter()
        .filter(|d| d.n2_prev > 0.0)
        .map(|d| {
            let p2 = d.p2_prev(stats.n);
            let r = d.p12() - a * p2;
            -0.5 * (a * p2).ln() - 0.5 * d.n1_prev * r * r / (a * p2)
        })
        .sum()
}

/// Poisson/Gaussian approximate log-likelihood for c, up to constants.
pub fn poisson_gaussian_loglik_c(stats: &SufficientStats, c: f64) -> f64 {
    let t = stats.days.iter().filter(|d| d.n2_prev > 0.0).count() as f64;
    -0.5 * t * c.ln()
        - 0.5 / c
            * stats
                .days
                .iter()
                .filter(|d| d.n2_prev > 0.0)
                .map(|d| {
                    let r = d.p23() - c;
                    d.n2_prev * r * r
                })
                .sum::<f64>()
}

/// Poisson/Gaussian AML: the first-order conditions are quadratics in the
/// parameter; the estimator is the unique positive root.
///
/// Setting dL/da = 0 for L = -1/2 Σ log(a p̂2) - 1/2 Σ N1 (p̂12 - a p̂2)²/(a p̂2)
/// gives  (Σ N1 p̂2) a² + T a - Σ N1 p̂12²/p̂2 = 0, and analogously
/// (Σ N2) c² + T c - Σ N2 p̂23² = 0 for c.
pub fn fit_poisson_gaussian(stats: &SufficientStats) -> Result<FitResult> {
    let used: Vec<&DayStats> = stats.days.iter().filter(|d| d.n2_prev > 0.0).collect();
    if used.is_empty() {
        return Err(Error::NotEstimable("no infected person-days observed".into()));
    }
    let t = used.len() as f64;

    let qa_2: f64 = used.iter().map(|d| d.n1_prev * d.p2_prev(stats.n)).sum();
    let qa_0: f64 = used
        .iter()
        .map(|d| {
            let p12 = d.p12();
            d.n1_prev * p12 * p12 / d.p2_prev(stats.n)
        })
        .sum();
    let qc_2: f64 = used.iter().map(|d| d.n2_prev).sum();
    let qc_0: f64 = used
        .iter()
        .map(|d| {
            let p23 = d.p23();
            d.n2_prev * p23 * p23
        })
        .sum();

    let a_hat = positive_quadratic_root(qa_2, t, qa_0)?;
    let c_hat = positive_quadratic_root(qc_2, t, qc_0)?;
    Ok(FitResult::ratio(Method::PoissonGaussian, a_hat, c_hat, 0, FitFlags::default()))
}

/// Nonnegative root of q2 x² + q1 x - q0 = 0 with q2, q1, q0 >= 0.
fn positive_quadratic_root(q2: f64, q1: f64, q0: f64) -> Result<f64> {
    if !(q2.is_finite() && q1.is_finite() && q0.is_finite()) {
        return Err(Error::NotEstimable("non-finite quadratic coefficients".into()));
    }
    if q0 == 0.0 {
        return Ok(0.0);
    }
    if q2 == 0.0 {
        return Ok(q0 / q1);
    }
    let disc = q1 * q1 + 4.0 * q2 * q0;
    if disc < 0.0 {
        return Err(Error::RootNotFound("negative discriminant".into()));
    }
    Ok((-q1 + disc.sqrt()) / (2.0 * q2))
}

/// Exact conditional moments of the Poisson AML estimators at T = 1:
/// (E â_P, V â_P, E ĉ_P, V ĉ_P) given (N1(0), N2(0)).
pub fn poisson_t1_moments(a: f64, c: f64, n: u64, n1_0: u64, n2_0: u64) -> (f64, f64, f64, f64) {
    assert!(n1_0 > 0 && n2_0 > 0);
    let var_a = a * n as f64 / (n1_0 as f64 * n2_0 as f64);
    let var_c = c / n2_0 as f64;
    (a, var_a, c, var_c)
}

/// Rolling window specification for per-day fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RollingMode {
    /// Use all data from day 1 up to the current day.
    Expanding,
    /// Use at most the last `w` days.
    Window(usize),
}

/// Fit `method` at every day along the path. Days on which the estimator is
/// undefined are reported as errors in the per-day slot.
pub fn rolling_fit(
    path: &CountPath,
    method: Method,
    mode: RollingMode,
) -> Result<Vec<Result<FitResult>>> {
    let stats = SufficientStats::from_path(path)?;
    let horizon = stats.horizon();
    let mut out = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let start = match mode {
            RollingMode::Expanding => 0,
            RollingMode::Window(w) => t.saturating_sub(w.max(1)),
        };
        let window = SufficientStats { n: stats.n, days: stats.days[start..t].to_vec() };
        out.push(fit(&window, method));
    }
    Ok(out)
}
