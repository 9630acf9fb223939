use std::path::Path;

use serde::{Deserialize, Serialize};

use super::drift::DriftConfig;
use super::QkdError;

pub const PAPER_CAL: &str = include_str!("../../data/params/paper-cal.toml");

/// Fiber, source and detector description of one point-to-point link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkParams {
    pub length_km: f64,
    pub attenuation_db_per_km: f64,
    #[serde(default = "default_pulse_rate")]
    pub pulse_rate_hz: f64,
    pub mu: f64,
    pub nu: f64,
    #[serde(default)]
    pub vacuum: f64,
    pub detector_efficiency: f64,
    /// Background yield per gate (dark counts plus stray light), both detectors.
    pub dark_count: f64,
    pub misalignment: f64,
    #[serde(default = "default_sift")]
    pub sift_factor: f64,
    #[serde(default = "default_f")]
    pub ec_efficiency: f64,
    #[serde(default = "default_block")]
    pub block_size: f64,
    #[serde(default = "default_eps")]
    pub finite_key_epsilon: f64,
}

fn default_pulse_rate() -> f64 {
    625e6
}
fn default_sift() -> f64 {
    0.5
}
fn default_f() -> f64 {
    1.16
}
fn default_block() -> f64 {
    1e6
}
fn default_eps() -> f64 {
    1e-10
}

/// Contents of a parameter file: a `[link]` table and an optional `[drift]` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub link: LinkParams,
    #[serde(default)]
    pub drift: DriftConfig,
}

impl ParamsFile {
    pub fn parse(text: &str) -> Result<Self, QkdError> {
        let f: ParamsFile = toml::from_str(text).map_err(|e| QkdError::Config(e.to_string()))?;
        f.link.validate()?;
        f.drift.validate()?;
        Ok(f)
    }

    /// A bundled name (`paper-cal`) or a path to a TOML file.
    pub fn load(name_or_path: &str) -> Result<Self, QkdError> {
        if let Some(text) = builtin(name_or_path) {
            return Self::parse(text);
        }
        let text = std::fs::read_to_string(Path::new(name_or_path))
            .map_err(|e| QkdError::Config(format!("{name_or_path}: {e}")))?;
        Self::parse(&text)
    }

    pub fn paper_cal() -> Self {
        Self::parse(PAPER_CAL).expect("bundled calibration parses")
    }
}

pub fn builtin(name: &str) -> Option<&'static str> {
    match name {
        "paper-cal" | "paper-cal.toml" => Some(PAPER_CAL),
        _ => None,
    }
}

impl LinkParams {
    pub fn paper_cal() -> Self {
        ParamsFile::paper_cal().link
    }

    pub fn with_length(mut self, km: f64) -> Self {
        self.length_km = km;
        self
    }

    pub fn loss_db(&self) -> f64 {
        self.attenuation_db_per_km * self.length_km
    }

    pub fn validate(&self) -> Result<(), QkdError> {
        let bad = |m: String| Err(QkdError::InvalidParams(m));
        let finite = [
            self.length_km,
            self.attenuation_db_per_km,
            self.pulse_rate_hz,
            self.mu,
            self.nu,
            self.vacuum,
            self.detector_efficiency,
            self.dark_count,
            self.misalignment,
            self.sift_factor,
            self.ec_efficiency,
            self.block_size,
            self.finite_key_epsilon,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("all link parameters must be finite".into());
        }
        if !(self.mu > self.nu && self.nu > self.vacuum && self.vacuum >= 0.0) {
            return bad(format!("need mu > nu > vacuum >= 0 (got {}, {}, {})", self.mu, self.nu, self.vacuum));
        }
        if self.length_km < 0.0 || self.attenuation_db_per_km < 0.0 {
            return bad("length and attenuation must be non-negative".into());
        }
        if self.pulse_rate_hz <= 0.0 {
            return bad("pulse rate must be positive".into());
        }
        for (name, v) in [
            ("detector_efficiency", self.detector_efficiency),
            ("dark_count", self.dark_count),
            ("misalignment", self.misalignment),
            ("sift_factor", self.sift_factor),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} = {v} is not a probability"));
            }
        }
        if self.ec_efficiency <= 0.0 || self.block_size <= 0.0 {
            return bad("error-correction efficiency and block size must be positive".into());
        }
        if !(self.finite_key_epsilon > 0.0 && self.finite_key_epsilon < 1.0) {
            return bad("finite-key epsilon must lie in (0, 1)".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_file_parses() {
        let f = ParamsFile::paper_cal();
        assert_eq!(f.link.pulse_rate_hz, 625e6);
        assert_eq!(f.link.length_km, 40.0);
        assert!(f.drift.day_sigma > f.drift.night_sigma);
    }

    #[test]
    fn rejects_bad_values() {
        let mut p = LinkParams::paper_cal();
        p.nu = p.mu;
        assert!(p.validate().is_err());
        let mut p = LinkParams::paper_cal();
        p.dark_count = 1.5;
        assert!(p.validate().is_err());
        let mut p = LinkParams::paper_cal();
        p.length_km = -1.0;
        assert!(p.validate().is_err());
        assert!(ParamsFile::parse("[link]\nmu = 1").is_err());
        assert!(ParamsFile::parse(&PAPER_CAL.replace("mu = 0.6", "mu = 0.6\nbogus = 1")).is_err());
    }

    #[test]
    fn defaults_fill_in() {
        let text = "[link]\nlength_km = 10\nattenuation_db_per_km = 0.2\nmu = 0.5\nnu = 0.1\n\
                    detector_efficiency = 0.1\ndark_count = 1e-6\nmisalignment = 0.01\n";
        let f = ParamsFile::parse(text).unwrap();
        assert_eq!(f.link.pulse_rate_hz, 625e6);
        assert_eq!(f.link.block_size, 1e6);
        assert_eq!(f.drift, DriftConfig::default());
    }
}
