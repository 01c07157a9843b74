//! Total time to solution: `TTS(t) = t·log(1−δ)/log(1−p(t))`, curve minima,
//! classical-vs-quantum comparisons over a shared step grid, and log-log
//! exponent fits with bootstrap spread.
//!
//! The CSV emitted here is the toolkit's interchange format; identical inputs
//! and seeds produce byte-identical files.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::landscape::EnergyLandscape;
use crate::markov::{self, AnnealingSchedule};
use crate::qmetropolis;

#[derive(Debug, Error)]
pub enum TtsError {
    #[error("delta must lie strictly inside (0,1), got {0}")]
    InvalidDelta(f64),
    #[error("success probability must lie in [0,1], got {0}")]
    InvalidProbability(f64),
    #[error("step count must be at least 1")]
    InvalidStep,
    #[error("curve has no finite entry")]
    NoFiniteEntry,
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("point {0} is not strictly positive and finite")]
    NonPositivePoint(usize),
    #[error(transparent)]
    Markov(#[from] markov::MarkovError),
    #[error(transparent)]
    QMetropolis(#[from] qmetropolis::QMetropolisError),
}

/// Default target success threshold for TTS curves.
pub const DEFAULT_DELTA: f64 = 0.9;

/// Expected cost of a restart strategy reaching success `delta` when a single
/// run of `t` steps succeeds with probability `p`. `p = 0` maps to +∞ and
/// `p = 1` to 0 (limit convention; such rows are flagged degenerate in the
/// CSV so fits can drop them).
pub fn tts(t: u64, p: f64, delta: f64) -> Result<f64, TtsError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(TtsError::InvalidDelta(delta));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(TtsError::InvalidProbability(p));
    }
    if t < 1 {
        return Err(TtsError::InvalidStep);
    }
    if p == 0.0 {
        return Ok(f64::INFINITY);
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    // ln_1p keeps log(1−x) accurate when x is close to 1 or to 0; taking the
    // log ratio before scaling by t makes p = δ give exactly t.
    Ok(t as f64 * ((-delta).ln_1p() / (-p).ln_1p()))
}

#[derive(Debug, Clone, Copy)]
pub struct TtsEntry {
    pub t: u64,
    pub p: f64,
    pub tts: f64,
}

#[derive(Debug, Clone)]
pub struct TtsCurve {
    pub delta: f64,
    pub entries: Vec<TtsEntry>,
}

impl TtsCurve {
    /// Build from per-step success probabilities `p(1..=T)`.
    pub fn from_success(ps: &[f64], delta: f64) -> Result<Self, TtsError> {
        let entries = ps
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let t = (i + 1) as u64;
                // Marginals can drift an ulp past the unit interval.
                let p = p.clamp(0.0, 1.0);
                Ok(TtsEntry { t, p, tts: tts(t, p, delta)? })
            })
            .collect::<Result<Vec<_>, TtsError>>()?;
        Ok(Self { delta, entries })
    }

    /// Smallest TTS and its step count; ties break toward smaller `t`.
    pub fn min_entry(&self) -> Result<(u64, f64), TtsError> {
        let mut best: Option<(u64, f64)> = None;
        for e in &self.entries {
            if !e.tts.is_finite() {
                continue;
            }
            match best {
                Some((_, tts)) if e.tts >= tts => {}
                _ => best = Some((e.t, e.tts)),
            }
        }
        best.ok_or(TtsError::NoFiniteEntry)
    }
}

/// Convenience wrapper around [`TtsCurve::min_entry`].
pub fn min_tts(curve: &TtsCurve) -> Result<(u64, f64), TtsError> {
    curve.min_entry()
}

// ---------------------------------------------------------------------------
// Classical vs quantum comparison
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ComparisonResult {
    pub classical: TtsCurve,
    pub quantum: TtsCurve,
}

/// Exact classical and quantum TTS curves over the same `1..=T` grid.
pub fn run_comparison(
    landscape: &EnergyLandscape,
    schedule: &AnnealingSchedule,
    t_max: u64,
    delta: f64,
) -> Result<ComparisonResult, TtsError> {
    let classical_p = markov::classical_success_probability(landscape, schedule, t_max)?;
    let quantum_p = qmetropolis::evolve_schedule(landscape, schedule, t_max)?.success;
    Ok(ComparisonResult {
        classical: TtsCurve::from_success(&classical_p, delta)?,
        quantum: TtsCurve::from_success(&quantum_p, delta)?,
    })
}

// ---------------------------------------------------------------------------
// Exponent fit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct FitResult {
    pub exponent: f64,
    pub stderr: f64,
    pub n_points: usize,
    pub n_bootstrap: usize,
    pub seed: u64,
    pub bootstrap_samples: Vec<f64>,
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Least-squares slope of `log(quantum)` against `log(classical)` over
/// paired min-TTS points, with the spread estimated by case resampling:
/// `n_bootstrap` seeded resamples with replacement, reporting the sample
/// standard deviation of their slopes.
pub fn fit_exponent(
    points: &[(f64, f64)],
    n_bootstrap: usize,
    seed: u64,
) -> Result<FitResult, TtsError> {
    if points.len() < 3 {
        return Err(TtsError::TooFewPoints { need: 3, got: points.len() });
    }
    for (i, &(c, q)) in points.iter().enumerate() {
        if !(c > 0.0 && q > 0.0 && c.is_finite() && q.is_finite()) {
            return Err(TtsError::NonPositivePoint(i));
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let exponent = ls_slope(&xs, &ys).ok_or(TtsError::TooFewPoints { need: 2, got: 1 })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = points.len();
    let mut samples = Vec::with_capacity(n_bootstrap);
    while samples.len() < n_bootstrap {
        let mut bx = Vec::with_capacity(n);
        let mut by = Vec::with_capacity(n);
        for _ in 0..n {
            let k = rng.gen_range(0..n);
            bx.push(xs[k]);
            by.push(ys[k]);
        }
        // Degenerate resamples (a single distinct x) are redrawn.
        if let Some(s) = ls_slope(&bx, &by) {
            samples.push(s);
        }
    }
    let stderr = if n_bootstrap > 1 {
        let mean = samples.iter().sum::<f64>() / n_bootstrap as f64;
        (samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>()
            / (n_bootstrap as f64 - 1.0))
            .sqrt()
    } else {
        0.0
    };
    Ok(FitResult {
        exponent,
        stderr,
        n_points: points.len(),
        n_bootstrap,
        seed,
        bootstrap_samples: samples,
    })
}

/// The flat key = value record emitted by the fit pipeline.
pub fn format_fit_record(fit: &FitResult) -> String {
    format!(
        "exponent = {}\nstderr = {}\nn_points = {}\nn_bootstrap = {}\nseed = {}\n",
        fit.exponent, fit.stderr, fit.n_points, fit.n_bootstrap, fit.seed
    )
}

// ---------------------------------------------------------------------------
// CSV pipeline
// ---------------------------------------------------------------------------

pub const CSV_HEADER: &str =
    "instance_id,engine,schedule_kind,beta1,alpha,delta,t,p_t,tts_t,is_min_row";

/// One (landscape, schedule) benchmark task.
#[derive(Debug, Clone)]
pub struct SuitePair {
    pub instance_id: String,
    pub landscape: EnergyLandscape,
    pub schedule: AnnealingSchedule,
}

fn push_curve_rows(
    out: &mut String,
    instance_id: &str,
    engine: &str,
    schedule: &AnnealingSchedule,
    curve: &TtsCurve,
) {
    let min_t = curve.min_entry().map(|(t, _)| t).ok();
    for e in &curve.entries {
        let is_min = if Some(e.t) == min_t { 1 } else { 0 };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            instance_id,
            engine,
            schedule.kind.name(),
            schedule.beta1,
            schedule.alpha,
            curve.delta,
            e.t,
            e.p,
            e.tts,
            is_min
        ));
    }
}

/// Run every pair and assemble the CSV. Pairs are evaluated concurrently
/// (each is pure and exact), then written in input order by a single
/// assembler so output bytes are stable.
pub fn run_suite(
    pairs: &[SuitePair],
    t_max: u64,
    delta: f64,
) -> Result<String, TtsError> {
    let results: Vec<Result<ComparisonResult, TtsError>> = pairs
        .par_iter()
        .map(|pair| run_comparison(&pair.landscape, &pair.schedule, t_max, delta))
        .collect();
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (pair, result) in pairs.iter().zip(results) {
        let result = result?;
        push_curve_rows(&mut out, &pair.instance_id, "classical", &pair.schedule, &result.classical);
        push_curve_rows(&mut out, &pair.instance_id, "quantum", &pair.schedule, &result.quantum);
    }
    Ok(out)
}

/// A parsed CSV row; the reverse of the writer above.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub instance_id: String,
    pub engine: String,
    pub schedule_kind: String,
    pub beta1: f64,
    pub alpha: f64,
    pub delta: f64,
    pub t: u64,
    pub p_t: f64,
    pub tts_t: f64,
    pub is_min_row: bool,
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>, String> {
    let mut rows = Vec::new();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        Some((_, h)) => return Err(format!("unexpected header: `{h}`")),
        None => return Err("empty file".into()),
    }
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 10 {
            return Err(format!("line {}: expected 10 columns, got {}", idx + 1, cols.len()));
        }
        let f = |s: &str, what: &str| -> Result<f64, String> {
            s.parse::<f64>().map_err(|_| format!("line {}: bad {what} `{s}`", idx + 1))
        };
        rows.push(CsvRow {
            instance_id: cols[0].to_string(),
            engine: cols[1].to_string(),
            schedule_kind: cols[2].to_string(),
            beta1: f(cols[3], "beta1")?,
            alpha: f(cols[4], "alpha")?,
            delta: f(cols[5], "delta")?,
            t: cols[6].parse().map_err(|_| format!("line {}: bad t `{}`", idx + 1, cols[6]))?,
            p_t: f(cols[7], "p_t")?,
            tts_t: f(cols[8], "tts_t")?,
            is_min_row: cols[9] == "1",
        });
    }
    Ok(rows)
}

/// Pair classical/quantum min-TTS rows per (instance, schedule) at the given
/// delta. Returns the usable points, the keys that are missing one side, and
/// the number of degenerate (nonpositive or non-finite) rows dropped.
pub fn collect_fit_points(
    rows: &[CsvRow],
    delta: f64,
) -> (Vec<(f64, f64)>, Vec<String>, usize) {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<String, (Option<f64>, Option<f64>)> = BTreeMap::new();
    for r in rows {
        if !r.is_min_row || (r.delta - delta).abs() > 1e-12 {
            continue;
        }
        let key = format!("{}:{}", r.instance_id, r.schedule_kind);
        let slot = groups.entry(key).or_default();
        match r.engine.as_str() {
            "classical" => slot.0 = Some(r.tts_t),
            "quantum" => slot.1 = Some(r.tts_t),
            _ => {}
        }
    }
    let mut points = Vec::new();
    let mut missing = Vec::new();
    let mut degenerate = 0usize;
    for (key, (c, q)) in groups {
        match (c, q) {
            (Some(c), Some(q)) => {
                if c > 0.0 && q > 0.0 && c.is_finite() && q.is_finite() {
                    points.push((c, q));
                } else {
                    degenerate += 1;
                }
            }
            _ => missing.push(key),
        }
    }
    (points, missing, degenerate)
}
