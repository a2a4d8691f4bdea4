//! Study configuration: a TOML `[study]` table with command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Table1,
    Gamma,
    AdvectionQoi,
    CflProbe,
    EllipticPollution,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Table1 => "table1",
            StudyKind::Gamma => "gamma",
            StudyKind::AdvectionQoi => "advection_qoi",
            StudyKind::CflProbe => "cfl_probe",
            StudyKind::EllipticPollution => "elliptic_pollution",
        }
    }

    pub fn default_levels(self) -> u32 {
        match self {
            StudyKind::Table1 | StudyKind::EllipticPollution => 6,
            StudyKind::AdvectionQoi => 5,
            StudyKind::Gamma => 7,
            StudyKind::CflProbe => 3,
        }
    }

    pub fn default_dt0(self) -> f64 {
        match self {
            StudyKind::AdvectionQoi => 0.02,
            _ => 0.1,
        }
    }

    fn min_levels(self) -> u32 {
        match self {
            StudyKind::CflProbe => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Correction parameter: searched or given.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GammaChoice {
    #[default]
    Auto,
    Value(f64),
}

impl FromStr for GammaChoice {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(GammaChoice::Auto);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| HarnessError::Config(format!("gamma must be `auto` or a number, got `{s}`")))?;
        GammaChoice::Value(v).validated()
    }
}

impl GammaChoice {
    fn validated(self) -> Result<Self> {
        match self {
            GammaChoice::Value(v) if !(0.0..0.5).contains(&v) => {
                Err(HarnessError::Config(format!("gamma {v} not in [0, 0.5)")))
            }
            other => Ok(other),
        }
    }
}

impl fmt::Display for GammaChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaChoice::Auto => f.write_str("auto"),
            GammaChoice::Value(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for GammaChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            GammaChoice::Auto => s.serialize_str("auto"),
            GammaChoice::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for GammaChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Number(v) => GammaChoice::Value(v).validated().map_err(serde::de::Error::custom),
        }
    }
}

/// A fully resolved study configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    pub study: StudyKind,
    pub levels: u32,
    pub dt0: f64,
    pub t_end: f64,
    /// Weight exponent of the weighted L2 norm.
    pub alpha: f64,
    pub gamma: GammaChoice,
    /// Output directory.
    pub out: PathBuf,
    pub seed: u64,
    /// Also write the per-step error series of the finest corrected run.
    pub series: bool,
}

impl StudyConfig {
    /// Defaults for `study`; `alpha` is `1 - pi/Theta` for the L-shape.
    pub fn new(study: StudyKind) -> Self {
        StudyConfig {
            study,
            levels: study.default_levels(),
            dt0: study.default_dt0(),
            t_end: 1.0,
            alpha: 1.0 / 3.0,
            gamma: GammaChoice::Auto,
            out: PathBuf::from("out"),
            seed: 0,
            series: false,
        }
    }

    pub fn with_levels(mut self, levels: u32) -> Self {
        self.levels = levels;
        self
    }

    pub fn with_gamma(mut self, gamma: GammaChoice) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_out(mut self, out: impl Into<PathBuf>) -> Self {
        self.out = out.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let min = self.study.min_levels();
        if self.levels < min {
            return Err(HarnessError::Config(format!(
                "{} needs at least {min} levels, got {}",
                self.study, self.levels
            )));
        }
        if self.levels > 12 {
            return Err(HarnessError::Config(format!("{} levels is beyond any laptop budget", self.levels)));
        }
        for (name, v) in [("dt0", self.dt0), ("t_end", self.t_end)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(HarnessError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(HarnessError::Config(format!("alpha {} not in [0, 1)", self.alpha)));
        }
        self.gamma.validated().map(|_| ())
    }

    /// Applies the keys present in `file`.
    pub fn merge(mut self, file: &FileConfig) -> Self {
        let s = &file.study;
        if let Some(v) = s.levels {
            self.levels = v;
        }
        if let Some(v) = s.dt0 {
            self.dt0 = v;
        }
        if let Some(v) = s.t_end {
            self.t_end = v;
        }
        if let Some(v) = s.alpha {
            self.alpha = v;
        }
        if let Some(v) = s.gamma {
            self.gamma = v;
        }
        if let Some(v) = &s.out {
            self.out = v.clone();
        }
        if let Some(v) = s.seed {
            self.seed = v;
        }
        if let Some(v) = s.series {
            self.series = v;
        }
        self
    }
}

/// Every key is optional; missing keys keep the study defaults.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyTable {
    pub study: Option<StudyKind>,
    pub levels: Option<u32>,
    pub dt0: Option<f64>,
    pub t_end: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma: Option<GammaChoice>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub series: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub study: StudyTable,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}
