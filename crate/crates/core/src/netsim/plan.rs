use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::NetsimError;
use crate::auth::AuthMode;
use crate::crypto::ParamsId;

const RING: &str = include_str!("../../data/plans/ring.plan");
const CROSS: &str = include_str!("../../data/plans/cross.plan");
const METRO_RELAY: &str = include_str!("../../data/plans/metro-relay.plan");
const METRO_ALLPASS: &str = include_str!("../../data/plans/metro-allpass.plan");
const METRO_JOIN: &str = include_str!("../../data/plans/metro-join.plan");
const RELAY_STAR: &str = include_str!("../../data/plans/relay-star.plan");

pub const BUILTIN_PLANS: [&str; 6] = ["ring", "cross", "metro-relay", "metro-allpass", "metro-join", "relay-star"];

pub fn builtin(name: &str) -> Option<&'static str> {
    match name.trim_end_matches(".plan") {
        "ring" => Some(RING),
        "cross" => Some(CROSS),
        "metro-relay" => Some(METRO_RELAY),
        "metro-allpass" => Some(METRO_ALLPASS),
        "metro-join" => Some(METRO_JOIN),
        "relay-star" => Some(RELAY_STAR),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanPair {
    pub a: String,
    pub b: String,
    /// Per-hop loss; overrides the segment attenuation.
    #[serde(default)]
    pub loss_db: Vec<f64>,
    /// Per-hop misalignment; overrides the link parameter file.
    #[serde(default)]
    pub misalignment: Vec<f64>,
    pub duration_s: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    name: String,
    topology: String,
    #[serde(default = "default_mode")]
    mode: String,
    seed: Option<u64>,
    #[serde(default = "default_duration")]
    duration_s: f64,
    #[serde(default = "default_params")]
    params: String,
    #[serde(default = "default_auth_every")]
    auth_every: u64,
    #[serde(default = "default_sig")]
    signature: String,
    #[serde(rename = "pair", default)]
    pairs: Vec<PlanPair>,
}

fn default_mode() -> String {
    "pqc".into()
}
fn default_duration() -> f64 {
    300.0
}
fn default_params() -> String {
    "paper-cal".into()
}
fn default_auth_every() -> u64 {
    10
}
fn default_sig() -> String {
    "reference".into()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionPlan {
    pub name: String,
    /// Builtin name or path, resolved against the plan's directory.
    pub topology: String,
    pub mode: AuthMode,
    pub seed: Option<u64>,
    pub duration_s: f64,
    pub params: String,
    /// Run the full two-way authentication every this many cycles.
    pub auth_every: u64,
    pub signature: ParamsId,
    pub pairs: Vec<PlanPair>,
}

impl SessionPlan {
    pub fn parse(text: &str) -> Result<Self, NetsimError> {
        Self::parse_in(text, None)
    }

    fn parse_in(text: &str, dir: Option<&Path>) -> Result<Self, NetsimError> {
        let f: PlanFile = toml::from_str(text).map_err(|e| NetsimError::Config(e.to_string()))?;
        let mode = f.mode.parse().map_err(NetsimError::Config)?;
        let signature = f.signature.parse().map_err(|_| NetsimError::Config(format!("unknown signature set `{}`", f.signature)))?;
        let resolve = |s: String| match dir {
            Some(d) if super::topology::builtin(&s).is_none() && crate::qkd::params::builtin(&s).is_none() => {
                d.join(&s).to_string_lossy().into_owned()
            }
            _ => s,
        };
        let plan = SessionPlan {
            name: f.name,
            topology: resolve(f.topology),
            mode,
            seed: f.seed,
            duration_s: f.duration_s,
            params: resolve(f.params),
            auth_every: f.auth_every,
            signature,
            pairs: f.pairs,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(name_or_path: &str) -> Result<Self, NetsimError> {
        if let Some(t) = builtin(name_or_path) {
            return Self::parse(t);
        }
        let path = PathBuf::from(name_or_path);
        let text = std::fs::read_to_string(&path).map_err(|e| NetsimError::Config(format!("{name_or_path}: {e}")))?;
        Self::parse_in(&text, path.parent())
    }

    pub fn validate(&self) -> Result<(), NetsimError> {
        let bad = |m: String| Err(NetsimError::Config(m));
        if !(1.0..).contains(&self.duration_s) {
            return bad(format!("duration {} s is shorter than one cycle", self.duration_s));
        }
        if self.auth_every == 0 {
            return bad("auth_every must be at least 1".into());
        }
        for p in &self.pairs {
            if p.a == p.b {
                return Err(NetsimError::SameEndpoint(p.a.clone()));
            }
            if p.duration_s.is_some_and(|d| !(1.0..).contains(&d)) {
                return bad(format!("{}-{}: duration shorter than one cycle", p.a, p.b));
            }
            if p.loss_db.iter().chain(&p.misalignment).any(|v| !(0.0..).contains(v)) {
                return bad(format!("{}-{}: negative or NaN override", p.a, p.b));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_plans_parse() {
        for name in BUILTIN_PLANS {
            let p = SessionPlan::load(name).unwrap();
            assert_eq!(p.name, name);
            assert!(!p.pairs.is_empty());
        }
        assert_eq!(SessionPlan::load("ring").unwrap().pairs.len(), 4);
    }

    #[test]
    fn rejects() {
        assert!(SessionPlan::parse("name = \"x\"\ntopology = \"allpass4\"\nmode = \"rsa\"\n").is_err());
        assert!(SessionPlan::parse("name = \"x\"\ntopology = \"allpass4\"\nduration_s = 0\n").is_err());
        let same = "name = \"x\"\ntopology = \"allpass4\"\n[[pair]]\na = \"U1\"\nb = \"U1\"\n";
        assert!(matches!(SessionPlan::parse(same), Err(NetsimError::SameEndpoint(_))));
    }
}
