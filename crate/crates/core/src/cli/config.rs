//! JSON run configuration layered over a size preset.

use crate::channel::ChannelConfig;
use crate::policies::PolicyKind;
use crate::sim::SimOptions;
use crate::traffic::TrafficConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// 5 RBs, 8 subscribers, 1,000 packets, 10 replications.
    #[default]
    Desk,
    /// 15 RBs, 24 subscribers, 5,000 packets, 50 replications.
    Full,
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Desk => "desk",
            Scale::Full => "full",
        })
    }
}

impl FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            _ => Err(format!("unknown scale {s:?} (expected desk or full)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scale: Scale,
    pub channel: ChannelConfig,
    pub traffic: TrafficConfig,
    pub policies: Vec<PolicyKind>,
    pub replications: u64,
    pub lambda_sweep: Vec<f64>,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub sim: SimOptions,
    /// Fill the wall_ms column. Off by default so reruns are byte-identical.
    #[serde(default)]
    pub record_wall_time: bool,
    /// Write one JSON-lines event file per run under `<output_dir>/events`.
    #[serde(default)]
    pub event_log: bool,
}

pub const ALL_POLICIES: [PolicyKind; 6] = [
    PolicyKind::MrrLp2,
    PolicyKind::MrrIlp(4),
    PolicyKind::Edf,
    PolicyKind::MxRate,
    PolicyKind::Mud,
    PolicyKind::Mlwdf,
];

impl RunConfig {
    pub fn preset(scale: Scale) -> RunConfig {
        let (rbs, subscribers, packets, replications, sweep, load) = match scale {
            Scale::Desk => (5, 8, 1000, 10, vec![600.0, 750.0, 900.0, 1050.0, 1200.0], 900.0),
            Scale::Full => (15, 24, 5000, 50, vec![4000.0, 5000.0, 6000.0, 7000.0, 8000.0], 6000.0),
        };
        RunConfig {
            scale,
            channel: ChannelConfig {
                rbs,
                subscribers,
                ..ChannelConfig::default()
            },
            traffic: TrafficConfig {
                arrival_rate: load,
                total_packets: packets,
                ..TrafficConfig::default()
            },
            policies: ALL_POLICIES.to_vec(),
            replications,
            lambda_sweep: sweep,
            base_seed: 1,
            output_dir: PathBuf::from("results"),
            sim: SimOptions::default(),
            record_wall_time: false,
            event_log: false,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.replications < 1 {
            return bad("replications must be at least 1".into());
        }
        if self.policies.is_empty() {
            return bad("policies must not be empty".into());
        }
        if self.lambda_sweep.is_empty() {
            return bad("lambda_sweep must not be empty".into());
        }
        if let Some(l) = self.lambda_sweep.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return bad(format!("lambda_sweep entry {l} is not a positive rate"));
        }
        if self.sim.subframes_per_frame == 0 {
            return bad("sim.subframes_per_frame must be positive".into());
        }
        self.channel.validate().map_err(ConfigError::Invalid)?;
        self.traffic.validate().map_err(ConfigError::Invalid)
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.replications).map(|i| self.base_seed + i)
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub scale: Option<Scale>,
    pub out: Option<PathBuf>,
}

/// Reads `path` and layers it over the preset named by its `scale` field (or
/// by `--scale`), then applies the remaining overrides.
pub fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let parse_err = |source| ConfigError::Parse {
        path: path.to_path_buf(),
        source,
    };
    let user: Value = serde_json::from_str(&text).map_err(parse_err)?;
    if !user.is_object() {
        return Err(ConfigError::Invalid("top level must be a JSON object".into()));
    }
    let scale = match overrides.scale {
        Some(s) => s,
        None => match user.get("scale") {
            Some(v) => serde_json::from_value(v.clone()).map_err(parse_err)?,
            None => Scale::default(),
        },
    };
    let mut merged = serde_json::to_value(RunConfig::preset(scale)).expect("preset serializes");
    merge(&mut merged, user);
    merged["scale"] = serde_json::to_value(scale).expect("scale serializes");
    let mut cfg: RunConfig = serde_json::from_value(merged).map_err(parse_err)?;
    if let Some(seed) = overrides.seed {
        cfg.base_seed = seed;
    }
    if let Some(out) = &overrides.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Recursive object merge; arrays and scalars in `over` replace `base`.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn empty_object_is_the_desk_preset() {
        let f = write("{}");
        let cfg = load_config(f.path(), &Overrides::default()).unwrap();
        assert_eq!(cfg, RunConfig::preset(Scale::Desk));
        assert_eq!((cfg.channel.rbs, cfg.channel.subscribers), (5, 8));
        assert_eq!((cfg.traffic.total_packets, cfg.replications), (1000, 10));
    }

    #[test]
    fn file_fields_merge_into_nested_sections() {
        let f = write(r#"{"scale": "full", "channel": {"rbs": 7}, "policies": ["edf", "mrr-ilp:3"], "base_seed": 40}"#);
        let cfg = load_config(f.path(), &Overrides::default()).unwrap();
        assert_eq!(cfg.channel.rbs, 7);
        assert_eq!(cfg.channel.subscribers, 24);
        assert_eq!(cfg.traffic.total_packets, 5000);
        assert_eq!(cfg.policies, vec![PolicyKind::Edf, PolicyKind::MrrIlp(3)]);
        assert_eq!(cfg.seeds().take(2).collect::<Vec<_>>(), vec![40, 41]);
    }

    #[test]
    fn flags_override_the_file() {
        let f = write(r#"{"scale": "full", "base_seed": 40, "output_dir": "a"}"#);
        let o = Overrides {
            seed: Some(7),
            scale: Some(Scale::Desk),
            out: Some("b".into()),
        };
        let cfg = load_config(f.path(), &o).unwrap();
        assert_eq!((cfg.scale, cfg.base_seed, cfg.channel.rbs), (Scale::Desk, 7, 5));
        assert_eq!(cfg.output_dir, PathBuf::from("b"));
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "{",
            "[]",
            r#"{"policies": []}"#,
            r#"{"replications": 0}"#,
            r#"{"policies": ["fifo"]}"#,
            r#"{"lambda_sweep": [-1]}"#,
            r#"{"unknown": 1}"#,
            r#"{"channel": {"rbz": 3}}"#,
        ] {
            let f = write(text);
            assert!(load_config(f.path(), &Overrides::default()).is_err(), "{text}");
        }
        let missing = load_config(Path::new("/nonexistent/cfg.json"), &Overrides::default());
        assert!(matches!(missing, Err(ConfigError::Read { .. })));
    }
}
