//! CSV writers and readers for every result type the command-line tool emits.
//!
//! All files are newline-terminated with fixed headers. Floating-point values
//! use Rust's shortest round-tripping formatting, so write -> read -> write is
//! lossless; infinities appear as the literal `inf`.

use crate::bayes::RzeroPosterior;
use crate::epiestim::InstantRPoint;
use crate::error::{Error, Result};
use crate::estimators::{FitFlags, FitResult, Method};
use crate::mechanistic::MechanisticState;
use crate::montecarlo::{Histogram, McResult};
use crate::reproduction::RzeroSeries;
use crate::sir::{CountPath, EpidemicState, TransitionCounts};
use std::fmt::Write as _;

fn parse_field<T: std::str::FromStr>(field: &str, what: &str) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what}: {field:?}")))
}

fn split_line<'a>(line: &'a str, expect: usize, what: &str) -> Result<Vec<&'a str>> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != expect {
        return Err(Error::Parse(format!(
            "{what}: expected {expect} fields, got {} in {line:?}",
            fields.len()
        )));
    }
    Ok(fields)
}

fn check_header(lines: &mut std::str::Lines, expect: &str) -> Result<()> {
    match lines.next() {
        Some(h) if h.trim_end() == expect => Ok(()),
        other => Err(Error::Parse(format!("expected header {expect:?}, got {other:?}"))),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn parse_opt(field: &str, what: &str) -> Result<Option<f64>> {
    if field.trim().is_empty() {
        Ok(None)
    } else {
        parse_field(field, what).map(Some)
    }
}

pub const COUNT_PATH_HEADER: &str = "t,N1,N2,N3,N12,N23";

/// Count path as `t,N1,N2,N3,N12,N23`; the t = 0 row has empty N12 and N23.
pub fn write_count_path(path: &CountPath) -> String {
    let mut out = String::from(COUNT_PATH_HEADER);
    out.push('\n');
    for (i, s) in path.states.iter().enumerate() {
        if i == 0 {
            let _ = writeln!(out, "{},{},{},{},,", s.t, s.n1, s.n2, s.n3);
        } else {
            let tr = &path.transitions[i - 1];
            let _ = writeln!(out, "{},{},{},{},{},{}", s.t, s.n1, s.n2, s.n3, tr.n12, tr.n23);
        }
    }
    out
}

pub fn read_count_path(text: &str) -> Result<CountPath> {
    let mut lines = text.lines();
    check_header(&mut lines, COUNT_PATH_HEADER)?;
    let mut states = Vec::new();
    let mut transitions = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f = split_line(line, 6, "count path row")?;
        let state = EpidemicState::new(
            parse_field(f[0], "t")?,
            parse_field(f[1], "N1")?,
            parse_field(f[2], "N2")?,
            parse_field(f[3], "N3")?,
        );
        if states.is_empty() {
            if !(f[4].trim().is_empty() && f[5].trim().is_empty()) {
                return Err(Error::Parse("first row must have empty N12,N23".into()));
            }
        } else {
            transitions.push(TransitionCounts {
                t: state.t,
                n12: parse_field(f[4], "N12")?,
                n23: parse_field(f[5], "N23")?,
            });
        }
        states.push(state);
    }
    if states.is_empty() {
        return Err(Error::EmptyResult("count path file has no rows".into()));
    }
    Ok(CountPath { states, transitions })
}

pub const GROUP_PATH_HEADER: &str = "group,t,N1,N2,N3,N12,N23";

/// Several group paths in one file, with a leading `group` column.
pub fn write_group_paths(paths: &[CountPath]) -> String {
    let mut out = String::from(GROUP_PATH_HEADER);
    out.push('\n');
    for (g, path) in paths.iter().enumerate() {
        let body = write_count_path(path);
        for line in body.lines().skip(1) {
            let _ = writeln!(out, "{g},{line}");
        }
    }
    out
}

pub fn read_group_paths(text: &str) -> Result<Vec<CountPath>> {
    let mut lines = text.lines();
    check_header(&mut lines, GROUP_PATH_HEADER)?;
    let mut per_group: Vec<String> = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (group, rest) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("bad group row: {line:?}")))?;
        let g: usize = parse_field(group, "group")?;
        if g == per_group.len() {
            per_group.push(format!("{COUNT_PATH_HEADER}\n"));
        } else if g > per_group.len() {
            return Err(Error::Parse(format!("group {g} out of order")));
        }
        per_group[g].push_str(rest);
        per_group[g].push('\n');
    }
    per_group.iter().map(|text| read_count_path(text)).collect()
}

pub const FIT_HEADER: &str = "method,T,a_hat,c_hat,r0_hat,var_a,var_c,flags";

/// Fit results as `method,T,a_hat,c_hat,r0_hat,var_a,var_c,flags` where T is
/// the number of transition days used.
pub fn write_fit_results(rows: &[(usize, FitResult)]) -> String {
    let mut out = String::from(FIT_HEADER);
    out.push('\n');
    for (t, fit) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fit.method.as_str(),
            t,
            fit.a_hat,
            fit.c_hat,
            fit.r0_hat,
            fmt_opt(fit.var_a),
            fmt_opt(fit.var_c),
            fit.flags.render()
        );
    }
    out
}

fn parse_flags(field: &str) -> Result<FitFlags> {
    let mut flags = FitFlags::default();
    for part in field.split(';').filter(|p| !p.is_empty()) {
        if part == "r0-infinite" {
            flags.r0_infinite = true;
        } else if part == "a-boundary" {
            flags.a_boundary = true;
        } else if part == "c-boundary" {
            flags.c_boundary = true;
        } else if let Some(n) = part.strip_prefix("dropped-days=") {
            flags.dropped_days = parse_field(n, "dropped-days")?;
        } else {
            return Err(Error::Parse(format!("unknown flag {part:?}")));
        }
    }
    Ok(flags)
}

pub fn read_fit_results(text: &str) -> Result<Vec<(usize, FitResult)>> {
    let mut lines = text.lines();
    check_header(&mut lines, FIT_HEADER)?;
    let mut out = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let f = split_line(line, 8, "fit row")?;
        out.push((
            parse_field(f[1], "T")?,
            FitResult {
                method: Method::parse(f[0])?,
                a_hat: parse_field(f[2], "a_hat")?,
                c_hat: parse_field(f[3], "c_hat")?,
                r0_hat: parse_field(f[4], "r0_hat")?,
                var_a: parse_opt(f[5], "var_a")?,
                var_c: parse_opt(f[6], "var_c")?,
                iterations: 0,
                flags: parse_flags(f[7])?,
            },
        ));
    }
    Ok(out)
}

pub const RZERO_HEADER: &str = "t,R_effective,R_basic,H,S";

/// Reproduction-ratio series as `t,R_effective,R_basic,H,S`; R_basic is empty
/// on days with no susceptibles.
pub fn write_rzero_series(series: &RzeroSeries) -> String {
    let mut out = String::from(RZERO_HEADER);
    out.push('\n');
    for p in &series.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.t,
            p.effective,
            fmt_opt(p.basic),
            series.horizon,
            series.replications
        );
    }
    out
}

pub fn read_rzero_series(text: &str) -> Result<RzeroSeries> {
    let mut lines = text.lines();
    check_header(&mut lines, RZERO_HEADER)?;
    let mut points = Vec::new();
    let mut horizon = 0;
    let mut replications = 0;
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let f = split_line(line, 5, "rzero row")?;
        points.push(crate::reproduction::RzeroPoint {
            t: parse_field(f[0], "t")?,
            effective: parse_field(f[1], "R_effective")?,
            basic: parse_opt(f[2], "R_basic")?,
        });
        horizon = parse_field(f[3], "H")?;
        replications = parse_field(f[4], "S")?;
    }
    if points.is_empty() {
        return Err(Error::EmptyResult("reproduction series file has no rows".into()));
    }
    Ok(RzeroSeries { points, horizon, replications })
}

pub const TRAJECTORY_HEADER: &str = "t,x,y,z";

/// Deterministic mechanistic trajectory as `t,x,y,z`.
pub fn write_trajectory(path: &[MechanisticState]) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for (t, s) in path.iter().enumerate() {
        let _ = writeln!(out, "{t},{},{},{}", s.x, s.y, s.z);
    }
    out
}

pub fn read_trajectory(text: &str) -> Result<Vec<MechanisticState>> {
    let mut lines = text.lines();
    check_header(&mut lines, TRAJECTORY_HEADER)?;
    let mut out = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let f = split_line(line, 4, "trajectory row")?;
        out.push(MechanisticState {
            x: parse_field(f[1], "x")?,
            y: parse_field(f[2], "y")?,
            z: parse_field(f[3], "z")?,
        });
    }
    Ok(out)
}

pub const INSTANT_R_HEADER: &str = "t,raw_ratio,posterior_mean,posterior_shape,posterior_rate,flags";

/// Instantaneous-R series as
/// `t,raw_ratio,posterior_mean,posterior_shape,posterior_rate,flags`.
pub fn write_instant_r(series: &[InstantRPoint]) -> String {
    let mut out = String::from(INSTANT_R_HEADER);
    out.push('\n');
    for p in series {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            p.t,
            fmt_opt(p.raw_ratio),
            p.posterior_mean,
            p.posterior_shape,
            p.posterior_rate,
            if p.undefined { "undefined" } else { "" }
        );
    }
    out
}

pub fn read_instant_r(text: &str) -> Result<Vec<InstantRPoint>> {
    let mut lines = text.lines();
    check_header(&mut lines, INSTANT_R_HEADER)?;
    let mut out = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let f = split_line(line, 6, "instant-R row")?;
        let undefined = match f[5].trim() {
            "" => false,
            "undefined" => true,
            other => return Err(Error::Parse(format!("unknown flag {other:?}"))),
        };
        out.push(InstantRPoint {
            t: parse_field(f[0], "t")?,
            raw_ratio: parse_opt(f[1], "raw_ratio")?,
            posterior_mean: parse_field(f[2], "posterior_mean")?,
            posterior_shape: parse_field(f[3], "posterior_shape")?,
            posterior_rate: parse_field(f[4], "posterior_rate")?,
            undefined,
        });
    }
    Ok(out)
}

pub const AR_HEADER_PREFIX: &str = "H,R_ar";

/// Autoregressive estimate as `H,R_ar,gamma_1..gamma_H` (one row, with one
/// column per lag coefficient).
pub fn write_ar(lags: &[f64], r_ar: f64) -> String {
    let mut header = String::from(AR_HEADER_PREFIX);
    for i in 1..=lags.len() {
        let _ = write!(header, ",gamma_{i}");
    }
    let mut out = header;
    let _ = write!(out, "\n{},{}", lags.len(), r_ar);
    for g in lags {
        let _ = write!(out, ",{g}");
    }
    out.push('\n');
    out
}

pub fn read_ar(text: &str) -> Result<(Vec<f64>, f64)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::EmptyResult("empty AR file".into()))?;
    if !header.starts_with(AR_HEADER_PREFIX) {
        return Err(Error::Parse(format!("bad AR header {header:?}")));
    }
    let line = lines
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| Error::EmptyResult("AR file has no data row".into()))?;
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() < 2 {
        return Err(Error::Parse(format!("bad AR row {line:?}")));
    }
    let h: usize = parse_field(fields[0], "H")?;
    if fields.len() != h + 2 {
        return Err(Error::Parse(format!("expected {} gamma columns", h)));
    }
    let r_ar = parse_field(fields[1], "R_ar")?;
    let gammas = fields[2..]
        .iter()
        .map(|f| parse_field(f, "gamma"))
        .collect::<Result<Vec<f64>>>()?;
    Ok((gammas, r_ar))
}

pub const POSTERIOR_HEADER: &str =
    "nu_a,lambda_a,nu_c,lambda_c,r0_mean,r0_q05,r0_q50,r0_q95,flags";

/// Posterior summary as
/// `nu_a,lambda_a,nu_c,lambda_c,r0_mean,r0_q05,r0_q50,r0_q95,flags`; the mean
/// is empty and flagged `mean-undefined` when it does not exist.
pub fn write_posterior(post: &RzeroPosterior) -> Result<String> {
    let mut out = String::from(POSTERIOR_HEADER);
    out.push('\n');
    let mean = post.mean();
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{}",
        post.pair.a.shape,
        post.pair.a.rate,
        post.pair.c.shape,
        post.pair.c.rate,
        fmt_opt(mean),
        post.quantile(0.05)?,
        post.quantile(0.50)?,
        post.quantile(0.95)?,
        if mean.is_none() { "mean-undefined" } else { "" }
    );
    Ok(out)
}

pub const TABLE_HEADER: &str = "N2_0,T,a,c,R0,mean,var,median,rho,flagged";

/// Which sampling distribution a Monte Carlo table row summarizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableTarget {
    A,
    C,
    Rzero,
}

/// Monte Carlo summary rows as `N2_0,T,a,c,R0,mean,var,median,rho,flagged`.
pub fn write_table(rows: &[McResult], target: TableTarget) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in rows {
        let stats = match target {
            TableTarget::A => &r.a,
            TableTarget::C => &r.c,
            TableTarget::Rzero => &r.r0,
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.design.i0,
            r.design.horizon,
            r.design.a,
            r.design.c,
            r.design.a / r.design.c,
            stats.mean,
            stats.variance,
            stats.median,
            r.rho_ac,
            r.flagged
        );
    }
    out
}

pub const HISTOGRAM_HEADER: &str = "bin_left,bin_right,density";

/// Histogram as `bin_left,bin_right,density` with density normalized so the
/// bin areas sum to one.
pub fn write_histogram(h: &Histogram) -> String {
    let mut out = String::from(HISTOGRAM_HEADER);
    out.push('\n');
    let total: u64 = h.counts.iter().sum();
    let width = (h.hi - h.lo) / h.counts.len() as f64;
    for (i, &count) in h.counts.iter().enumerate() {
        let left = h.lo + i as f64 * width;
        let density = if total > 0 && width > 0.0 {
            count as f64 / (total as f64 * width)
        } else {
            0.0
        };
        let _ = writeln!(out, "{left},{},{density}", left + width);
    }
    out
}
