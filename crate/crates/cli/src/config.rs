//! Flat key = value configuration with `[section]` headers. Parsed by hand so
//! configs stay readable from any tooling; every diagnostic carries a line
//! number.
//!
//! Sections: one `[run]`, any number of `[landscape]` and `[schedule]`
//! blocks. Input paths resolve against the config file's directory; the
//! output path resolves against the working directory.

use std::path::{Path, PathBuf};

use qwalk_core::markov::ScheduleKind;

#[derive(Debug, Clone)]
pub struct ScheduleSpec {
    pub kind: ScheduleKind,
    pub beta1: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub t_max: u64,
    pub delta: f64,
    pub seed: u64,
    pub output: PathBuf,
    pub max_states: Option<usize>,
    pub max_walk_dim: Option<usize>,
    pub landscapes: Vec<PathBuf>,
    pub schedules: Vec<ScheduleSpec>,
}

#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub msg: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.msg)
    }
}

fn err(line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError { line, msg: msg.into() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    None,
    Run,
    Landscape,
    Schedule,
}

pub fn parse_config(text: &str, config_dir: &Path) -> Result<RunConfig, ConfigError> {
    let mut t_max: Option<u64> = None;
    let mut delta: Option<f64> = None;
    let mut seed: u64 = 0;
    let mut output: Option<PathBuf> = None;
    let mut max_states = None;
    let mut max_walk_dim = None;
    let mut landscapes: Vec<PathBuf> = Vec::new();
    let mut schedules: Vec<ScheduleSpec> = Vec::new();

    let mut section = Section::None;
    // Per-block accumulation for [landscape] and [schedule].
    let mut pending_path: Option<(usize, PathBuf)> = None;
    let mut pending_kind: Option<(usize, ScheduleKind)> = None;
    let mut pending_beta1: Option<f64> = None;
    let mut pending_alpha: Option<f64> = None;

    let flush = |section: Section,
                     pending_path: &mut Option<(usize, PathBuf)>,
                     pending_kind: &mut Option<(usize, ScheduleKind)>,
                     pending_beta1: &mut Option<f64>,
                     pending_alpha: &mut Option<f64>,
                     landscapes: &mut Vec<PathBuf>,
                     schedules: &mut Vec<ScheduleSpec>,
                     at_line: usize|
     -> Result<(), ConfigError> {
        match section {
            Section::Landscape => {
                let (_, p) = pending_path
                    .take()
                    .ok_or_else(|| err(at_line, "[landscape] section needs a `path` key"))?;
                landscapes.push(p);
            }
            Section::Schedule => {
                let (line, kind) = pending_kind
                    .take()
                    .ok_or_else(|| err(at_line, "[schedule] section needs a `kind` key"))?;
                let beta1 = pending_beta1
                    .take()
                    .ok_or_else(|| err(line, "[schedule] section needs a `beta1` key"))?;
                let alpha = pending_alpha.take().unwrap_or(qwalk_core::markov::DEFAULT_ALPHA);
                schedules.push(ScheduleSpec { kind, beta1, alpha });
            }
            _ => {}
        }
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            flush(
                section,
                &mut pending_path,
                &mut pending_kind,
                &mut pending_beta1,
                &mut pending_alpha,
                &mut landscapes,
                &mut schedules,
                line_no,
            )?;
            section = match name {
                "run" => Section::Run,
                "landscape" => Section::Landscape,
                "schedule" => Section::Schedule,
                other => return Err(err(line_no, format!("unknown section `[{other}]`"))),
            };
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        let parse_f64 = |v: &str| {
            v.parse::<f64>().map_err(|_| err(line_no, format!("bad number `{v}` for `{key}`")))
        };
        let parse_u64 = |v: &str| {
            v.parse::<u64>().map_err(|_| err(line_no, format!("bad integer `{v}` for `{key}`")))
        };
        match (section, key) {
            (Section::Run, "t_max") => t_max = Some(parse_u64(value)?),
            (Section::Run, "delta") => delta = Some(parse_f64(value)?),
            (Section::Run, "seed") => seed = parse_u64(value)?,
            (Section::Run, "output") => output = Some(config_output_path(value)),
            (Section::Run, "max_states") => max_states = Some(parse_u64(value)? as usize),
            (Section::Run, "max_walk_dim") => max_walk_dim = Some(parse_u64(value)? as usize),
            (Section::Landscape, "path") => {
                pending_path = Some((line_no, config_dir.join(value)));
            }
            (Section::Schedule, "kind") => {
                let kind = ScheduleKind::parse(value)
                    .ok_or_else(|| err(line_no, format!("unknown schedule kind `{value}`")))?;
                pending_kind = Some((line_no, kind));
            }
            (Section::Schedule, "beta1") => pending_beta1 = Some(parse_f64(value)?),
            (Section::Schedule, "alpha") => pending_alpha = Some(parse_f64(value)?),
            (Section::None, _) => {
                return Err(err(line_no, "keys must appear inside a [section]"));
            }
            (_, other) => {
                return Err(err(line_no, format!("unknown key `{other}` in this section")));
            }
        }
    }
    flush(
        section,
        &mut pending_path,
        &mut pending_kind,
        &mut pending_beta1,
        &mut pending_alpha,
        &mut landscapes,
        &mut schedules,
        text.lines().count() + 1,
    )?;

    let t_max = t_max.ok_or_else(|| err(1, "missing `t_max` in [run]"))?;
    let delta = delta.ok_or_else(|| err(1, "missing `delta` in [run]"))?;
    let output = output.ok_or_else(|| err(1, "missing `output` in [run]"))?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(err(1, format!("delta must lie in (0,1), got {delta}")));
    }
    if t_max == 0 {
        return Err(err(1, "t_max must be at least 1"));
    }
    if landscapes.is_empty() {
        return Err(err(1, "at least one [landscape] section is required"));
    }
    if schedules.is_empty() {
        return Err(err(1, "at least one [schedule] section is required"));
    }
    Ok(RunConfig {
        t_max,
        delta,
        seed,
        output,
        max_states,
        max_walk_dim,
        landscapes,
        schedules,
    })
}

fn config_output_path(value: &str) -> PathBuf {
    // Outputs land where the tool is run; inputs travel with the config.
    PathBuf::from(value)
}
