//! Scenario files.
//!
//! A scenario is a TOML document with four top-level entries, all optional:
//!
//! ```toml
//! seed = 0                 # RNG seed for both IMUs and the classifier
//! out = "run"              # output directory
//!
//! [scene.building]         # omit [scene] entirely for the default 4-decal scene
//! length = 20.0            # along x (m)
//! width = 10.0             # along y (m)
//! height = 9.0
//! center_xy = [0.0, 0.0]
//!
//! [[scene.decals]]
//! id = 1
//! face = "north"           # north | south | east | west
//! center_uv = [0.0, 1.5]   # offset from the facade midpoint, height above ground (m)
//! extent_uv = [0.3, 0.3]   # half-widths (m)
//!
//! [[scene.obstacles]]
//! id = 1
//! center_xy = [3.0, -17.0]
//! radius = 0.5
//! height = 4.0
//!
//! [mission]                # every key has a default; see scenarios/default.toml
//! dt = 0.01
//! [mission.pid]
//! kp = 1.0
//! ```
//!
//! Unknown keys are rejected. `--set a.b.c=value` edits the fully populated
//! document before it is checked, so any field can be overridden, including
//! array entries by index (`scene.decals.0.face=west`).

use std::path::{Path, PathBuf};

use facade_inspect::mission::MissionParams;
use facade_inspect::scenes::default_scene;
use facade_inspect::world::Scene;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub scene: Scene,
    pub mission: MissionParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self { seed: 0, out: PathBuf::from("run"), scene: default_scene(), mission: MissionParams::default() }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(one_line(&e.to_string())))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(one_line(&e.to_string())))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Apply `key=value` assignments in order.
    pub fn with_overrides(self, assignments: &[String]) -> Result<Self, CliError> {
        if assignments.is_empty() {
            return Ok(self);
        }
        let mut doc = toml::Value::try_from(&self).map_err(|e| CliError::Config(one_line(&e.to_string())))?;
        for a in assignments {
            apply_override(&mut doc, a)?;
        }
        doc.try_into()
            .map_err(|e: toml::de::Error| CliError::Config(format!("after --set: {}", one_line(&e.to_string()))))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.seed > i64::MAX as u64 {
            return Err(CliError::Config(format!("seed {} exceeds {}", self.seed, i64::MAX)));
        }
        if self.scene.building.is_none() {
            return Err(CliError::Config("scene has no [scene.building]".into()));
        }
        self.scene.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.mission.validate().map_err(|e| CliError::Config(e.to_string()))
    }
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Set one dotted path in a TOML document. Every segment but the last must
/// already exist; the last may be new only inside a table.
pub fn apply_override(doc: &mut toml::Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{assignment}`")))?;
    let key = key.trim();
    let segments: Vec<&str> = key.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(CliError::Config(format!("--set: malformed key `{key}`")));
    }
    let unknown = || CliError::Config(format!("--set: unknown key `{key}`"));
    let (last, parents) = segments.split_last().expect("split yields one segment");
    let mut node = doc;
    for seg in parents {
        node = match node {
            toml::Value::Table(t) => t.get_mut(*seg).ok_or_else(unknown)?,
            toml::Value::Array(a) => seg.parse::<usize>().ok().and_then(|i| a.get_mut(i)).ok_or_else(unknown)?,
            _ => return Err(unknown()),
        };
    }
    let value = parse_value(raw.trim());
    match node {
        toml::Value::Table(t) => {
            t.insert(last.to_string(), value);
        }
        toml::Value::Array(a) => {
            let slot = last.parse::<usize>().ok().and_then(|i| a.get_mut(i)).ok_or_else(unknown)?;
            *slot = value;
        }
        _ => return Err(unknown()),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default() {
        assert_eq!(ScenarioConfig::from_toml("").unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn default_round_trips() {
        let cfg = ScenarioConfig::default();
        let text = cfg.to_toml().unwrap();
        assert_eq!(ScenarioConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn overrides() {
        let cfg = ScenarioConfig::default()
            .with_overrides(&[
                "mission.pid.kp=1.5".into(),
                "mission.dt=0.02".into(),
                "seed=9".into(),
                "scene.decals.0.face=\"west\"".into(),
                "scene.decals.1.face=east".into(),
                "mission.kalman.r=[0.01, 0.02]".into(),
            ])
            .unwrap();
        assert_eq!(cfg.mission.pid.kp, 1.5);
        assert_eq!(cfg.mission.dt, 0.02);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.scene.decals[0].face, facade_inspect::world::Face::West);
        assert_eq!(cfg.scene.decals[1].face, facade_inspect::world::Face::East);
        assert_eq!(cfg.mission.kalman.r, Some([0.01, 0.02]));
    }

    #[test]
    fn integer_literal_sets_a_float() {
        let cfg = ScenarioConfig::default().with_overrides(&["mission.pid.kp=2".into()]).unwrap();
        assert_eq!(cfg.mission.pid.kp, 2.0);
    }

    #[test]
    fn bad_overrides() {
        for bad in [
            "mission.pid",
            "mission.nope.kp=1",
            "mission.pid.kpp=1",
            "mission..kp=1",
            "scene.decals.9.id=1",
            "mission.dt=fast",
        ] {
            let r = ScenarioConfig::default().with_overrides(&[bad.into()]);
            assert!(matches!(r, Err(CliError::Config(_))), "{bad}");
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ScenarioConfig::from_toml("sead = 3").is_err());
        assert!(ScenarioConfig::from_toml("[mission]\ndtt = 0.1").is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = ScenarioConfig::default();
        cfg.validate().unwrap();
        cfg.scene.building.as_mut().unwrap().length = -1.0;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        let none = ScenarioConfig::from_toml("[scene]\ndecals = []").unwrap();
        assert!(none.validate().is_err());
    }
}
