//! Flat `key = value` run configuration.
//!
//! One pair per line, `#` starts a comment. List values are comma separated. Coupling and
//! damping keys give the base values `g₀`, `κ₀` that the index `f` rescales.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Evolve,
    Steady,
    Nmm,
    Sweep,
    Eq8check,
    Convergence,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Evolve,
        Experiment::Steady,
        Experiment::Nmm,
        Experiment::Sweep,
        Experiment::Eq8check,
        Experiment::Convergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Evolve => "evolve",
            Experiment::Steady => "steady",
            Experiment::Nmm => "nmm",
            Experiment::Sweep => "sweep",
            Experiment::Eq8check => "eq8check",
            Experiment::Convergence => "convergence",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

/// Which Hamiltonian is built for each `f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// Two local modes, `[2, n, n]`.
    Full,
    /// Single relative mode (symmetric parameters only), `[2, n]`.
    Symmetric,
    /// Single mode shared by both sites, `[2, n]`.
    Global,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Full => "full",
            ModelKind::Symmetric => "symmetric",
            ModelKind::Global => "global",
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(ModelKind::Full),
            "symmetric" => Ok(ModelKind::Symmetric),
            "global" => Ok(ModelKind::Global),
            _ => Err(Error::Config(format!("unknown model '{s}' (full, symmetric, global)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FGrid {
    List(Vec<f64>),
    Range {
        f_min: f64,
        f_max: f64,
        n_points: usize,
        log_spaced: bool,
    },
}

impl FGrid {
    /// Grid values in ascending order.
    pub fn values(&self) -> Vec<f64> {
        let mut v = match self {
            FGrid::List(v) => v.clone(),
            FGrid::Range {
                f_min,
                f_max,
                n_points,
                log_spaced,
            } => {
                let n = *n_points;
                if n == 1 {
                    vec![*f_min]
                } else if *log_spaced {
                    let (a, b) = (f_min.ln(), f_max.ln());
                    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
                } else {
                    (0..n).map(|k| f_min + (f_max - f_min) * k as f64 / (n - 1) as f64).collect()
                }
            }
        };
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Observables written by the `evolve` experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Series {
    Inversion,
    LogNegativity,
    SingletOverlap,
    ModeExcitation,
}

impl Series {
    pub fn name(self) -> &'static str {
        match self {
            Series::Inversion => "inversion",
            Series::LogNegativity => "logneg",
            Series::SingletOverlap => "singlet_overlap",
            Series::ModeExcitation => "mode_excitation",
        }
    }

    /// Key of the matching trajectory observable.
    pub fn observable(self) -> &'static str {
        match self {
            Series::Inversion => crate::dynamics::INVERSION,
            Series::LogNegativity => crate::dynamics::LOG_NEGATIVITY,
            Series::SingletOverlap => crate::dynamics::SINGLET_OVERLAP,
            Series::ModeExcitation => crate::dynamics::MODE_EXCITATION,
        }
    }
}

impl FromStr for Series {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inversion" => Ok(Series::Inversion),
            "logneg" => Ok(Series::LogNegativity),
            "singlet_overlap" => Ok(Series::SingletOverlap),
            "mode_excitation" => Ok(Series::ModeExcitation),
            _ => Err(Error::Config(format!(
                "unknown series '{s}' (inversion, logneg, singlet_overlap, mode_excitation)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub model: ModelKind,
    /// Base parameters; `coupling` and `damping` hold `g₀` and `κ₀`.
    pub base: ModelParams,
    pub f_grid: FGrid,
    pub t_end: f64,
    /// Integration step; `None` selects the `f`-dependent default.
    pub dt: Option<f64>,
    pub store_every: usize,
    /// NM finite-difference step; `None` selects [`default_epsilon`](crate::nonmarkov::default_epsilon).
    pub epsilon: Option<f64>,
    /// NM integration horizon; `None` selects `20/γ_eff`.
    pub horizon: Option<f64>,
    pub series: Vec<Series>,
    pub fock_levels: Vec<usize>,
    pub dt_levels: Vec<f64>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(experiment: Experiment) -> Self {
        RunConfig {
            experiment,
            model: ModelKind::Full,
            base: ModelParams::default(),
            f_grid: FGrid::List(vec![0.01]),
            t_end: 50.0,
            dt: None,
            store_every: 10,
            epsilon: None,
            horizon: None,
            series: vec![Series::Inversion, Series::LogNegativity],
            fock_levels: vec![3, 4],
            dt_levels: vec![0.002, 0.001],
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match &self.f_grid {
            FGrid::List(v) => {
                if v.is_empty() {
                    return bad("f_list is empty".into());
                }
                if let Some(f) = v.iter().find(|f| !(**f > 0.0) || !f.is_finite()) {
                    return bad(format!("f values must be positive, got {f}"));
                }
            }
            FGrid::Range {
                f_min,
                f_max,
                n_points,
                ..
            } => {
                if *n_points < 1 {
                    return bad("n_points must be at least 1".into());
                }
                if !(*f_min > 0.0) || !(f_max >= f_min) || !f_max.is_finite() {
                    return bad(format!("need 0 < f_min <= f_max, got {f_min}, {f_max}"));
                }
            }
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        if self.store_every == 0 {
            return bad("store_every must be at least 1".into());
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0) {
                return bad(format!("epsilon must be positive, got {eps}"));
            }
        }
        if let Some(h) = self.horizon {
            if !(h > 0.0) || h < self.epsilon.unwrap_or(0.0) {
                return bad(format!("horizon must be positive and at least epsilon, got {h}"));
            }
        }
        if self.series.is_empty() {
            return bad("series is empty".into());
        }
        if self.fock_levels.is_empty() || self.fock_levels.iter().any(|&n| n < 2) {
            return bad("fock_levels needs values >= 2".into());
        }
        if self.dt_levels.is_empty() || self.dt_levels.iter().any(|&d| !(d > 0.0)) {
            return bad("dt_levels needs positive values".into());
        }
        self.base.validate().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs: Vec<(usize, String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let k = k.trim().to_string();
            if pairs.iter().any(|(_, seen, _)| *seen == k) {
                return Err(Error::Config(format!("line {}: duplicate key '{k}'", lineno + 1)));
            }
            pairs.push((lineno + 1, k, v.trim().to_string()));
        }
        let experiment = pairs
            .iter()
            .find(|(_, k, _)| k == "experiment")
            .map(|(_, _, v)| v.parse::<Experiment>())
            .transpose()?
            .ok_or_else(|| Error::Config("missing key 'experiment'".into()))?;
        let mut cfg = RunConfig::new(experiment);
        let mut range = (None, None, None, None);
        let mut list = None;
        for (lineno, k, v) in &pairs {
            cfg.set(k, v, &mut range, &mut list)
                .map_err(|e| Error::Config(format!("line {lineno}: {e}")))?;
        }
        cfg.f_grid = resolve_grid(list, range)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Override a single key, as the command line does.
    pub fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        let mut range = (None, None, None, None);
        let mut list = None;
        self.set(key, value, &mut range, &mut list)?;
        if list.is_some() || range != (None, None, None, None) {
            self.f_grid = match (&self.f_grid, list, range) {
                (_, Some(l), _) => FGrid::List(l),
                (
                    FGrid::Range {
                        f_min,
                        f_max,
                        n_points,
                        log_spaced,
                    },
                    None,
                    r,
                ) => FGrid::Range {
                    f_min: r.0.unwrap_or(*f_min),
                    f_max: r.1.unwrap_or(*f_max),
                    n_points: r.2.unwrap_or(*n_points),
                    log_spaced: r.3.unwrap_or(*log_spaced),
                },
                (FGrid::List(_), None, r) => resolve_grid(None, r)?,
            };
        }
        self.validate()
    }

    #[allow(clippy::type_complexity)]
    fn set(
        &mut self,
        key: &str,
        value: &str,
        range: &mut (Option<f64>, Option<f64>, Option<usize>, Option<bool>),
        list: &mut Option<Vec<f64>>,
    ) -> Result<()> {
        let b = &mut self.base;
        match key {
            "experiment" => self.experiment = value.parse()?,
            "model" => self.model = value.parse()?,
            "site_freq1" => b.site_freq[0] = num(key, value)?,
            "site_freq2" => b.site_freq[1] = num(key, value)?,
            "exchange" => b.exchange = num(key, value)?,
            "mode_freq1" => b.mode_freq[0] = num(key, value)?,
            "mode_freq2" => b.mode_freq[1] = num(key, value)?,
            "g1" => b.coupling[0] = num(key, value)?,
            "g2" => b.coupling[1] = num(key, value)?,
            "kappa1" => b.damping[0] = num(key, value)?,
            "kappa2" => b.damping[1] = num(key, value)?,
            "n_fock" => b.n_fock = num(key, value)?,
            "n_th" => b.n_th = num(key, value)?,
            "f_list" => *list = Some(num_list(key, value)?),
            "f_min" => range.0 = Some(num(key, value)?),
            "f_max" => range.1 = Some(num(key, value)?),
            "n_points" => range.2 = Some(num(key, value)?),
            "log_spaced" => range.3 = Some(num(key, value)?),
            "t_end" => self.t_end = num(key, value)?,
            "dt" => self.dt = optional(key, value)?,
            "store_every" => self.store_every = num(key, value)?,
            "epsilon" => self.epsilon = optional(key, value)?,
            "horizon" => self.horizon = optional(key, value)?,
            "series" => {
                self.series = split_list(value).map(str::parse).collect::<Result<Vec<_>>>()?;
            }
            "fock_levels" => self.fock_levels = num_list(key, value)?,
            "dt_levels" => self.dt_levels = num_list(key, value)?,
            "output" => {
                self.output = match value {
                    "" | "-" => None,
                    p => Some(PathBuf::from(p)),
                }
            }
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Inverse of [`RunConfig::parse`]; every key is written.
    pub fn serialize(&self) -> String {
        let b = &self.base;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("experiment", self.experiment.name().into());
        kv("model", self.model.name().into());
        kv("site_freq1", b.site_freq[0].to_string());
        kv("site_freq2", b.site_freq[1].to_string());
        kv("exchange", b.exchange.to_string());
        kv("mode_freq1", b.mode_freq[0].to_string());
        kv("mode_freq2", b.mode_freq[1].to_string());
        kv("g1", b.coupling[0].to_string());
        kv("g2", b.coupling[1].to_string());
        kv("kappa1", b.damping[0].to_string());
        kv("kappa2", b.damping[1].to_string());
        kv("n_fock", b.n_fock.to_string());
        kv("n_th", b.n_th.to_string());
        match &self.f_grid {
            FGrid::List(v) => kv("f_list", join(v)),
            FGrid::Range {
                f_min,
                f_max,
                n_points,
                log_spaced,
            } => {
                kv("f_min", f_min.to_string());
                kv("f_max", f_max.to_string());
                kv("n_points", n_points.to_string());
                kv("log_spaced", log_spaced.to_string());
            }
        }
        kv("t_end", self.t_end.to_string());
        kv("dt", self.dt.map_or("auto".into(), |x| x.to_string()));
        kv("store_every", self.store_every.to_string());
        kv("epsilon", self.epsilon.map_or("auto".into(), |x| x.to_string()));
        kv("horizon", self.horizon.map_or("auto".into(), |x| x.to_string()));
        kv(
            "series",
            self.series.iter().map(|s| s.name()).collect::<Vec<_>>().join(", "),
        );
        kv("fock_levels", join(&self.fock_levels));
        kv("dt_levels", join(&self.dt_levels));
        kv(
            "output",
            self.output.as_ref().map_or("-".into(), |p| p.display().to_string()),
        );
        s
    }
}

fn resolve_grid(
    list: Option<Vec<f64>>,
    range: (Option<f64>, Option<f64>, Option<usize>, Option<bool>),
) -> Result<FGrid> {
    let has_range = range != (None, None, None, None);
    match (list, has_range) {
        (Some(_), true) => Err(Error::Config("give either f_list or an f range, not both".into())),
        (Some(l), false) => Ok(FGrid::List(l)),
        (None, false) => Ok(FGrid::List(vec![0.01])),
        (None, true) => match range {
            (Some(f_min), Some(f_max), n, log) => Ok(FGrid::Range {
                f_min,
                f_max,
                n_points: n.unwrap_or(15),
                log_spaced: log.unwrap_or(true),
            }),
            _ => Err(Error::Config("an f range needs both f_min and f_max".into())),
        },
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse '{value}' for key '{key}'")))
}

fn optional(key: &str, value: &str) -> Result<Option<f64>> {
    if value == "auto" {
        Ok(None)
    } else {
        num(key, value).map(Some)
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn num_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    split_list(value).map(|v| num(key, v)).collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}
