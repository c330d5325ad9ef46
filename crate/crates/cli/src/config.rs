//! Flat `key = value` configuration files with `[section]` headers.
//!
//! The format is deliberately minimal: blank lines and full-line `#`
//! comments are ignored, every other line is either `[section]` or
//! `key = value`. Keys are namespaced by their section. Unknown keys are
//! rejected (with their line number) so typos cannot silently change an
//! experiment.

use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;

use mirror_pr_core::sensing::NoiseSpec;
use mirror_pr_core::solver::{SolverConfig, StepPolicy};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type CfgResult<T> = Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> CfgResult<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone)]
struct Entry {
    section: String,
    key: String,
    value: String,
    line: usize,
}

/// Parsed but untyped configuration: an ordered list of (section, key,
/// value) entries with line numbers.
#[derive(Debug, Clone)]
pub struct RawConfig {
    entries: Vec<Entry>,
}

impl RawConfig {
    pub fn parse(text: &str) -> CfgResult<RawConfig> {
        let mut entries = Vec::new();
        let mut section = String::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') || line.len() < 3 {
                    return err(format!("line {line_no}: malformed section header `{line}`"));
                }
                let name = &line[1..line.len() - 1];
                if !name
                    .chars()
                    .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-')
                {
                    return err(format!("line {line_no}: invalid section name `{name}`"));
                }
                section = name.to_string();
                continue;
            }
            let Some(eq) = line.find('=') else {
                return err(format!(
                    "line {line_no}: expected `key = value` or `[section]`, got `{line}`"
                ));
            };
            let key = line[..eq].trim();
            let value = line[eq + 1..].trim();
            if key.is_empty()
                || !key
                    .chars()
                    .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
            {
                return err(format!("line {line_no}: invalid key `{key}`"));
            }
            if section.is_empty() {
                return err(format!(
                    "line {line_no}: key `{key}` appears before any [section] header"
                ));
            }
            if let Some(prev) = entries
                .iter()
                .find(|e: &&Entry| e.section == section && e.key == key)
            {
                return err(format!(
                    "line {line_no}: duplicate key `{key}` in [{section}] (first set at line {})",
                    prev.line
                ));
            }
            entries.push(Entry {
                section: section.clone(),
                key: key.to_string(),
                value: value.to_string(),
                line: line_no,
            });
        }
        Ok(RawConfig { entries })
    }

    pub fn reader(&self) -> Reader<'_> {
        Reader {
            cfg: self,
            consumed: HashSet::new(),
        }
    }
}

/// Typed accessor over a [`RawConfig`] that tracks which keys were read;
/// [`Reader::finish`] rejects anything left over.
pub struct Reader<'a> {
    cfg: &'a RawConfig,
    consumed: HashSet<usize>,
}

impl<'a> Reader<'a> {
    fn lookup(&mut self, section: &str, key: &str) -> Option<&'a Entry> {
        for (i, e) in self.cfg.entries.iter().enumerate() {
            if e.section == section && e.key == key {
                self.consumed.insert(i);
                return Some(e);
            }
        }
        None
    }

    pub fn get_str(&mut self, section: &str, key: &str) -> Option<String> {
        self.lookup(section, key).map(|e| e.value.clone())
    }

    fn parsed<T: std::str::FromStr>(&mut self, section: &str, key: &str, ty: &str) -> CfgResult<Option<T>> {
        match self.lookup(section, key) {
            None => Ok(None),
            Some(e) => match e.value.parse::<T>() {
                Ok(v) => Ok(Some(v)),
                Err(_) => err(format!(
                    "line {}: `{}` in [{}] must be {ty}, got `{}`",
                    e.line, key, section, e.value
                )),
            },
        }
    }

    pub fn get_f64(&mut self, section: &str, key: &str) -> CfgResult<Option<f64>> {
        self.parsed(section, key, "a number")
    }

    pub fn get_usize(&mut self, section: &str, key: &str) -> CfgResult<Option<usize>> {
        self.parsed(section, key, "a nonnegative integer")
    }

    pub fn get_u64(&mut self, section: &str, key: &str) -> CfgResult<Option<u64>> {
        self.parsed(section, key, "a nonnegative integer")
    }

    pub fn get_bool(&mut self, section: &str, key: &str) -> CfgResult<Option<bool>> {
        match self.lookup(section, key) {
            None => Ok(None),
            Some(e) => match e.value.as_str() {
                "true" => Ok(Some(true)),
                "false" => Ok(Some(false)),
                other => err(format!(
                    "line {}: `{}` in [{}] must be true or false, got `{other}`",
                    e.line, key, section
                )),
            },
        }
    }

    /// Comma-separated list of nonnegative integers.
    pub fn get_usize_list(&mut self, section: &str, key: &str) -> CfgResult<Option<Vec<usize>>> {
        match self.lookup(section, key) {
            None => Ok(None),
            Some(e) => {
                let mut out = Vec::new();
                for part in e.value.split(',') {
                    match part.trim().parse::<usize>() {
                        Ok(v) => out.push(v),
                        Err(_) => {
                            return err(format!(
                                "line {}: `{}` in [{}] must be a comma-separated integer list, got `{}`",
                                e.line, key, section, e.value
                            ))
                        }
                    }
                }
                if out.is_empty() {
                    return err(format!(
                        "line {}: `{}` in [{}] must not be empty",
                        e.line, key, section
                    ));
                }
                Ok(Some(out))
            }
        }
    }

    pub fn finish(self) -> CfgResult<()> {
        let mut unknown: Vec<String> = Vec::new();
        for (i, e) in self.cfg.entries.iter().enumerate() {
            if !self.consumed.contains(&i) {
                unknown.push(format!("`{}` in [{}] (line {})", e.key, e.section, e.line));
            }
        }
        if unknown.is_empty() {
            Ok(())
        } else {
            err(format!("unknown keys: {}", unknown.join(", ")))
        }
    }
}

// ---------------------------------------------------------------------------
// Typed experiment configurations
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Reconstruct1d,
    Phasediagram,
    Cdpimage,
    LandscapeVerify,
    CheckAssumption,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Reconstruct1d => "reconstruct1d",
            ExperimentKind::Phasediagram => "phasediagram",
            ExperimentKind::Cdpimage => "cdpimage",
            ExperimentKind::LandscapeVerify => "landscape-verify",
            ExperimentKind::CheckAssumption => "check-assumption",
        }
    }

    pub fn from_name(name: &str) -> CfgResult<Self> {
        match name {
            "reconstruct1d" => Ok(ExperimentKind::Reconstruct1d),
            "phasediagram" => Ok(ExperimentKind::Phasediagram),
            "cdpimage" => Ok(ExperimentKind::Cdpimage),
            "landscape-verify" => Ok(ExperimentKind::LandscapeVerify),
            "check-assumption" => Ok(ExperimentKind::CheckAssumption),
            other => err(format!(
                "unknown experiment `{other}` (expected reconstruct1d, phasediagram, cdpimage, \
                 landscape-verify, or check-assumption)"
            )),
        }
    }
}

/// Keys shared by every experiment: `[experiment] name/seed/out`.
#[derive(Debug, Clone)]
pub struct CommonCfg {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub out: PathBuf,
}

fn read_common(
    r: &mut Reader<'_>,
    expected: ExperimentKind,
    seed_override: Option<u64>,
    out_override: Option<PathBuf>,
) -> CfgResult<CommonCfg> {
    let name = r
        .get_str("experiment", "name")
        .ok_or_else(|| ConfigError("missing `name` in [experiment]".into()))?;
    let kind = ExperimentKind::from_name(&name)?;
    if kind != expected {
        return err(format!(
            "config is for experiment `{}` but `{}` was requested",
            kind.as_str(),
            expected.as_str()
        ));
    }
    // always consume the config-level keys so overrides don't turn them
    // into "unknown key" errors
    let cfg_seed = r.get_u64("experiment", "seed")?;
    let cfg_out = r.get_str("experiment", "out").map(PathBuf::from);
    let seed = seed_override.or(cfg_seed).unwrap_or(1);
    let out = out_override
        .or(cfg_out)
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(CommonCfg { kind, seed, out })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseModelKind {
    None,
    UniformNonneg,
    UniformSymmetric,
}

#[derive(Debug, Clone, Copy)]
pub struct NoiseCfg {
    pub model: NoiseModelKind,
    pub mean: f64,
}

impl NoiseCfg {
    /// Materialize a seeded noise spec for one instance.
    pub fn to_spec(&self, seed: u64) -> NoiseSpec {
        match self.model {
            NoiseModelKind::None => NoiseSpec::none(),
            NoiseModelKind::UniformNonneg => NoiseSpec::uniform_nonneg(self.mean, seed),
            NoiseModelKind::UniformSymmetric => NoiseSpec::uniform_symmetric(self.mean, seed),
        }
    }
}

fn read_noise(r: &mut Reader<'_>, section: &str) -> CfgResult<NoiseCfg> {
    let model = match r.get_str(section, "noise_model").as_deref() {
        None | Some("none") => NoiseModelKind::None,
        Some("uniform_nonneg") => NoiseModelKind::UniformNonneg,
        Some("uniform_symmetric") => NoiseModelKind::UniformSymmetric,
        Some(other) => {
            return err(format!(
                "`noise_model` in [{section}] must be none, uniform_nonneg, or uniform_symmetric, \
                 got `{other}`"
            ))
        }
    };
    let mean = r.get_f64(section, "noise_mean")?.unwrap_or(0.0);
    match model {
        NoiseModelKind::None => {
            if mean != 0.0 {
                return err(format!(
                    "`noise_mean` in [{section}] must be 0 when noise_model = none"
                ));
            }
        }
        NoiseModelKind::UniformNonneg => {
            if !(mean > 0.0) {
                return err(format!(
                    "`noise_mean` in [{section}] must be > 0 for uniform_nonneg noise"
                ));
            }
        }
        NoiseModelKind::UniformSymmetric => {
            if !(mean >= 0.0) {
                return err(format!(
                    "`noise_mean` in [{section}] must be >= 0 for uniform_symmetric noise"
                ));
            }
        }
    }
    Ok(NoiseCfg { model, mean })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Random,
    Spectral,
}

#[derive(Debug, Clone, Copy)]
pub enum StepCfg {
    /// Fixed step; `None` means "pick the ensemble default"
    /// (0.99/(3+ε̃) Gaussian, 0.99/(2+ε̃) CDP).
    Constant { gamma: Option<f64> },
    Backtracking { l0: f64, kappa: f64, xi: f64 },
}

impl StepCfg {
    /// Resolve into a solver policy given the default fixed step.
    pub fn to_policy(&self, default_gamma: f64) -> StepPolicy {
        match *self {
            StepCfg::Constant { gamma } => StepPolicy::Constant {
                gamma: gamma.unwrap_or(default_gamma),
            },
            StepCfg::Backtracking { l0, kappa, xi } => StepPolicy::Backtracking { l0, kappa, xi },
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverCfg {
    pub step: StepCfg,
    pub max_iters: usize,
    pub record_every: usize,
}

impl SolverCfg {
    pub fn to_config(&self, default_gamma: f64) -> SolverConfig {
        SolverConfig {
            step_policy: self.step.to_policy(default_gamma),
            max_iters: self.max_iters,
            grad_tol: 0.0,
            record_every: self.record_every,
        }
    }
}

fn read_solver(r: &mut Reader<'_>, default_max_iters: usize) -> CfgResult<SolverCfg> {
    let step = match r.get_str("solver", "step").as_deref() {
        None | Some("constant") => StepCfg::Constant {
            gamma: r.get_f64("solver", "gamma")?,
        },
        Some("backtracking") => StepCfg::Backtracking {
            l0: r.get_f64("solver", "l0")?.unwrap_or(1.0),
            kappa: r.get_f64("solver", "kappa")?.unwrap_or(0.01),
            xi: r.get_f64("solver", "xi")?.unwrap_or(0.9),
        },
        Some(other) => {
            return err(format!(
                "`step` in [solver] must be constant or backtracking, got `{other}`"
            ))
        }
    };
    Ok(SolverCfg {
        step,
        max_iters: r.get_usize("solver", "max_iters")?.unwrap_or(default_max_iters),
        record_every: r.get_usize("solver", "record_every")?.unwrap_or(1),
    })
}

fn read_init(r: &mut Reader<'_>) -> CfgResult<(InitKind, usize)> {
    let kind = match r.get_str("init", "kind").as_deref() {
        None | Some("random") => InitKind::Random,
        Some("spectral") => InitKind::Spectral,
        Some(other) => {
            return err(format!(
                "`kind` in [init] must be random or spectral, got `{other}`"
            ))
        }
    };
    let power_iters = r.get_usize("init", "power_iters")?.unwrap_or(200);
    if power_iters == 0 {
        return err("`power_iters` in [init] must be >= 1");
    }
    Ok((kind, power_iters))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmKind {
    MirrorDescent,
    WirtingerFlow,
}

#[derive(Debug, Clone)]
pub struct Reconstruct1dCfg {
    pub common: CommonCfg,
    pub trials: usize,
    pub n: usize,
    /// Explicit m; when absent the per-init default applies
    /// (⌈n·ln²n⌉ random, ⌈5·n·ln n⌉ spectral).
    pub m: Option<usize>,
    pub noise: NoiseCfg,
    pub init: InitKind,
    pub power_iters: usize,
    pub algorithm: AlgorithmKind,
    pub solver: SolverCfg,
}

impl Reconstruct1dCfg {
    pub fn effective_m(&self) -> usize {
        self.m.unwrap_or_else(|| {
            let n = self.n as f64;
            match self.init {
                InitKind::Random => (n * n.ln() * n.ln()).ceil() as usize,
                InitKind::Spectral => (5.0 * n * n.ln()).ceil() as usize,
            }
        })
    }

    pub fn parse(
        raw: &RawConfig,
        seed_override: Option<u64>,
        out_override: Option<PathBuf>,
    ) -> CfgResult<Self> {
        let mut r = raw.reader();
        let common = read_common(&mut r, ExperimentKind::Reconstruct1d, seed_override, out_override)?;
        let trials = r.get_usize("experiment", "trials")?.unwrap_or(1);
        if trials == 0 {
            return err("`trials` in [experiment] must be >= 1");
        }
        let n = r.get_usize("problem", "n")?.unwrap_or(128);
        if n == 0 {
            return err("`n` in [problem] must be >= 1");
        }
        let m = r.get_usize("problem", "m")?;
        if let Some(m) = m {
            if m == 0 {
                return err("`m` in [problem] must be >= 1");
            }
        }
        let noise = read_noise(&mut r, "problem")?;
        let (init, power_iters) = read_init(&mut r)?;
        let algorithm = match r.get_str("solver", "algorithm").as_deref() {
            None | Some("md") => AlgorithmKind::MirrorDescent,
            Some("wf") => AlgorithmKind::WirtingerFlow,
            Some(other) => {
                return err(format!(
                    "`algorithm` in [solver] must be md or wf, got `{other}`"
                ))
            }
        };
        let solver = read_solver(&mut r, 5000)?;
        r.finish()?;
        Ok(Reconstruct1dCfg {
            common,
            trials,
            n,
            m,
            noise,
            init,
            power_iters,
            algorithm,
            solver,
        })
    }
}

/// How the m-axis of the phase diagram is specified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MAxis {
    /// `m = k·n` for each listed ratio k (the desk default, k = 2..=10).
    Ratios(Vec<usize>),
    /// Absolute measurement counts, shared across all n.
    Absolute(Vec<usize>),
}

impl MAxis {
    pub fn ms_for(&self, n: usize) -> Vec<usize> {
        match self {
            MAxis::Ratios(ks) => ks.iter().map(|&k| k * n).collect(),
            MAxis::Absolute(ms) => ms.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PhasediagramCfg {
    pub common: CommonCfg,
    pub trials: usize,
    pub n_grid: Vec<usize>,
    pub m_axis: MAxis,
    pub noise: NoiseCfg,
    pub power_iters: usize,
    pub max_iters: usize,
}

impl PhasediagramCfg {
    pub fn parse(
        raw: &RawConfig,
        seed_override: Option<u64>,
        out_override: Option<PathBuf>,
    ) -> CfgResult<Self> {
        let mut r = raw.reader();
        let common = read_common(&mut r, ExperimentKind::Phasediagram, seed_override, out_override)?;
        let trials = r.get_usize("experiment", "trials")?.unwrap_or(20);
        if trials == 0 {
            return err("`trials` in [experiment] must be >= 1");
        }
        let n_grid = r
            .get_usize_list("grid", "n_grid")?
            .unwrap_or_else(|| vec![16, 24, 32, 48, 64]);
        let m_over_n = r.get_usize_list("grid", "m_over_n")?;
        let m_grid = r.get_usize_list("grid", "m_grid")?;
        let m_axis = match (m_over_n, m_grid) {
            (Some(_), Some(_)) => {
                return err("`m_over_n` and `m_grid` in [grid] are mutually exclusive")
            }
            (Some(ks), None) => MAxis::Ratios(ks),
            (None, Some(ms)) => MAxis::Absolute(ms),
            (None, None) => MAxis::Ratios((2..=10).collect()),
        };
        let grid_values: Vec<usize> = match &m_axis {
            MAxis::Ratios(v) | MAxis::Absolute(v) => v.clone(),
        };
        if n_grid.contains(&0) || grid_values.contains(&0) {
            return err("grid entries must be >= 1");
        }
        let noise = read_noise(&mut r, "problem")?;
        let power_iters = r.get_usize("init", "power_iters")?.unwrap_or(200);
        let max_iters = r.get_usize("solver", "max_iters")?.unwrap_or(1500);
        r.finish()?;
        Ok(PhasediagramCfg {
            common,
            trials,
            n_grid,
            m_axis,
            noise,
            power_iters,
            max_iters,
        })
    }
}

#[derive(Debug, Clone)]
pub struct CdpimageCfg {
    pub common: CommonCfg,
    /// Path to a PGM input; `None` uses the built-in synthetic 64×64 image.
    pub image: Option<PathBuf>,
    pub p: usize,
    pub noise: NoiseCfg,
    pub power_iters: usize,
    pub solver: SolverCfg,
}

impl CdpimageCfg {
    pub fn parse(
        raw: &RawConfig,
        seed_override: Option<u64>,
        out_override: Option<PathBuf>,
    ) -> CfgResult<Self> {
        let mut r = raw.reader();
        let common = read_common(&mut r, ExperimentKind::Cdpimage, seed_override, out_override)?;
        let image = r.get_str("problem", "image").map(PathBuf::from);
        let p = r.get_usize("problem", "p")?.unwrap_or(30);
        if p == 0 {
            return err("`p` in [problem] must be >= 1");
        }
        let noise = read_noise(&mut r, "problem")?;
        let power_iters = r.get_usize("init", "power_iters")?.unwrap_or(200);
        if power_iters == 0 {
            return err("`power_iters` in [init] must be >= 1");
        }
        let solver = read_solver(&mut r, 1000)?;
        r.finish()?;
        Ok(CdpimageCfg {
            common,
            image,
            p,
            noise,
            power_iters,
            solver,
        })
    }
}

#[derive(Debug, Clone)]
pub struct LandscapeVerifyCfg {
    pub common: CommonCfg,
    pub n: usize,
    pub samples: usize,
    pub eps_mean: f64,
    pub lambda: f64,
    pub saddle_samples: usize,
    /// Hessian-concentration sweep (set `concentration_trials = 0` to skip).
    pub concentration_n: usize,
    pub concentration_trials: usize,
    pub concentration_low: usize,
    pub concentration_high: usize,
}

impl LandscapeVerifyCfg {
    pub fn parse(
        raw: &RawConfig,
        seed_override: Option<u64>,
        out_override: Option<PathBuf>,
    ) -> CfgResult<Self> {
        let mut r = raw.reader();
        let common = read_common(&mut r, ExperimentKind::LandscapeVerify, seed_override, out_override)?;
        let n = r.get_usize("landscape", "n")?.unwrap_or(2);
        let samples = r.get_usize("landscape", "samples")?.unwrap_or(100_000);
        let eps_mean = r.get_f64("landscape", "eps_mean")?.unwrap_or(0.0);
        let lambda = r.get_f64("landscape", "lambda")?.unwrap_or(1.0 / 3.0);
        let saddle_samples = r.get_usize("landscape", "saddle_samples")?.unwrap_or(50);
        let concentration_n = r.get_usize("concentration", "n")?.unwrap_or(32);
        let concentration_trials = r.get_usize("concentration", "trials")?.unwrap_or(20);
        let concentration_low = r.get_usize("concentration", "m_over_n_low")?.unwrap_or(10);
        let concentration_high = r.get_usize("concentration", "m_over_n_high")?.unwrap_or(100);
        if n == 0 {
            return err("`n` in [landscape] must be >= 1");
        }
        r.finish()?;
        Ok(LandscapeVerifyCfg {
            common,
            n,
            samples,
            eps_mean,
            lambda,
            saddle_samples,
            concentration_n,
            concentration_trials,
            concentration_low,
            concentration_high,
        })
    }
}

#[derive(Debug, Clone)]
pub struct CheckAssumptionCfg {
    pub common: CommonCfg,
    pub n: usize,
    pub m: usize,
    pub truth_norm: f64,
    pub lambda: f64,
    pub varrho: f64,
    pub kappa: f64,
    pub noise: NoiseCfg,
}

impl CheckAssumptionCfg {
    pub fn parse(
        raw: &RawConfig,
        seed_override: Option<u64>,
        out_override: Option<PathBuf>,
    ) -> CfgResult<Self> {
        let mut r = raw.reader();
        let common = read_common(&mut r, ExperimentKind::CheckAssumption, seed_override, out_override)?;
        let n = r.get_usize("assumption", "n")?.unwrap_or(16);
        let m = r.get_usize("assumption", "m")?.unwrap_or(640);
        let truth_norm = r.get_f64("assumption", "truth_norm")?.unwrap_or(1.0);
        let lambda = r.get_f64("assumption", "lambda")?.unwrap_or(1.0 / 3.0);
        let varrho = r.get_f64("assumption", "varrho")?.unwrap_or(0.01);
        let kappa = r.get_f64("assumption", "kappa")?.unwrap_or(0.01);
        let noise = read_noise(&mut r, "assumption")?;
        if n == 0 || m == 0 {
            return err("`n` and `m` in [assumption] must be >= 1");
        }
        if !(truth_norm > 0.0) {
            return err("`truth_norm` in [assumption] must be > 0");
        }
        r.finish()?;
        Ok(CheckAssumptionCfg {
            common,
            n,
            m,
            truth_norm,
            lambda,
            varrho,
            kappa,
            noise,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[experiment]
name = reconstruct1d
seed = 7
trials = 2

[problem]
n = 16
noise_model = uniform_nonneg
noise_mean = 1e-5
";

    #[test]
    fn parses_minimal_reconstruct_config() {
        let raw = RawConfig::parse(MINIMAL).unwrap();
        let cfg = Reconstruct1dCfg::parse(&raw, None, None).unwrap();
        assert_eq!(cfg.common.seed, 7);
        assert_eq!(cfg.trials, 2);
        assert_eq!(cfg.n, 16);
        assert_eq!(cfg.noise.model, NoiseModelKind::UniformNonneg);
        assert_eq!(cfg.init, InitKind::Random);
        // default m for random init: ceil(n ln² n)
        let expect = (16.0_f64 * 16.0_f64.ln().powi(2)).ceil() as usize;
        assert_eq!(cfg.effective_m(), expect);
        assert_eq!(cfg.solver.max_iters, 5000);
    }

    #[test]
    fn cli_overrides_win() {
        let raw = RawConfig::parse(MINIMAL).unwrap();
        let cfg =
            Reconstruct1dCfg::parse(&raw, Some(99), Some(PathBuf::from("elsewhere"))).unwrap();
        assert_eq!(cfg.common.seed, 99);
        assert_eq!(cfg.common.out, PathBuf::from("elsewhere"));
    }

    #[test]
    fn rejects_unknown_keys_with_line_numbers() {
        let text = format!("{MINIMAL}\ntypo_key = 3\n");
        let raw = RawConfig::parse(&text).unwrap();
        let e = Reconstruct1dCfg::parse(&raw, None, None).unwrap_err();
        assert!(e.0.contains("typo_key"), "{e}");
        assert!(e.0.contains("line 11"), "{e}");
    }

    #[test]
    fn rejects_duplicate_and_malformed_lines() {
        let dup = "[a]\nx = 1\nx = 2\n";
        let e = RawConfig::parse(dup).unwrap_err();
        assert!(e.0.contains("duplicate key `x`"), "{e}");
        assert!(e.0.contains("line 3"), "{e}");

        let bad = "[a]\njust a line\n";
        let e = RawConfig::parse(bad).unwrap_err();
        assert!(e.0.contains("line 2"), "{e}");

        let orphan = "x = 1\n";
        let e = RawConfig::parse(orphan).unwrap_err();
        assert!(e.0.contains("before any [section]"), "{e}");
    }

    #[test]
    fn rejects_wrong_experiment_name() {
        let raw = RawConfig::parse(MINIMAL).unwrap();
        let e = PhasediagramCfg::parse(&raw, None, None).unwrap_err();
        assert!(e.0.contains("reconstruct1d"), "{e}");
    }

    #[test]
    fn rejects_bad_values_with_context() {
        let text = "\
[experiment]
name = reconstruct1d

[problem]
n = not_a_number
";
        let raw = RawConfig::parse(text).unwrap();
        let e = Reconstruct1dCfg::parse(&raw, None, None).unwrap_err();
        assert!(e.0.contains("line 5"), "{e}");
        assert!(e.0.contains("`n`"), "{e}");
    }

    #[test]
    fn noise_validation() {
        let text = "\
[experiment]
name = reconstruct1d

[problem]
noise_model = uniform_nonneg
noise_mean = 0
";
        let raw = RawConfig::parse(text).unwrap();
        assert!(Reconstruct1dCfg::parse(&raw, None, None).is_err());

        let text = "\
[experiment]
name = reconstruct1d

[problem]
noise_model = none
noise_mean = 0.5
";
        let raw = RawConfig::parse(text).unwrap();
        assert!(Reconstruct1dCfg::parse(&raw, None, None).is_err());
    }

    #[test]
    fn phasediagram_defaults() {
        let text = "\
[experiment]
name = phasediagram
";
        let raw = RawConfig::parse(text).unwrap();
        let cfg = PhasediagramCfg::parse(&raw, None, None).unwrap();
        assert_eq!(cfg.trials, 20);
        assert_eq!(cfg.n_grid, vec![16, 24, 32, 48, 64]);
        assert_eq!(cfg.m_axis, MAxis::Ratios((2..=10).collect()));
        assert_eq!(cfg.m_axis.ms_for(16), vec![32, 48, 64, 80, 96, 112, 128, 144, 160]);
        assert_eq!(cfg.noise.model, NoiseModelKind::None);
    }

    #[test]
    fn list_parsing() {
        let text = "\
[experiment]
name = phasediagram

[grid]
n_grid = 8, 16
m_over_n = 2,4,6
";
        let raw = RawConfig::parse(text).unwrap();
        let cfg = PhasediagramCfg::parse(&raw, None, None).unwrap();
        assert_eq!(cfg.n_grid, vec![8, 16]);
        assert_eq!(cfg.m_axis, MAxis::Ratios(vec![2, 4, 6]));
    }

    #[test]
    fn absolute_m_grid_and_exclusivity() {
        let text = "\
[experiment]
name = phasediagram

[grid]
n_grid = 32
m_grid = 16, 64
";
        let raw = RawConfig::parse(text).unwrap();
        let cfg = PhasediagramCfg::parse(&raw, None, None).unwrap();
        assert_eq!(cfg.m_axis.ms_for(32), vec![16, 64]);

        let both = "\
[experiment]
name = phasediagram

[grid]
m_grid = 16
m_over_n = 2
";
        let raw = RawConfig::parse(both).unwrap();
        let e = PhasediagramCfg::parse(&raw, None, None).unwrap_err();
        assert!(e.0.contains("mutually exclusive"));
    }
}
