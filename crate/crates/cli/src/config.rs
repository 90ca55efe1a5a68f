//! Run configuration: layered key/value settings (preset, file, flags) resolved
//! into validated physical inputs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use jcstark::{
    effective_model, DeltaGrid, EffectiveModel, NearbyLevelSet, PhotonStatistics, SystemParams,
    WeightMode, DEFAULT_TAIL_TOL, DEFAULT_XI_LIMIT,
};
use serde_json::Value;

use crate::presets;

pub const DEFAULT_OMEGA: f64 = 10.0;
pub const DEFAULT_OUT: &str = "spectrum";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {message}")]
    BadValue { key: String, message: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("`chi` and `nearby` are mutually exclusive")]
    ChiAndNearby,
    #[error("cannot read config file {path}: {message}")]
    File { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl ConfigError {
    pub fn kind(&self) -> &'static str {
        match self {
            ConfigError::UnknownKey(_) => "unknown_key",
            ConfigError::BadValue { .. } => "bad_value",
            ConfigError::UnknownPreset(_) => "unknown_preset",
            ConfigError::ChiAndNearby => "conflicting_keys",
            ConfigError::File { .. } => "config_file",
            ConfigError::Invalid(_) => "invalid_config",
        }
    }
}

fn bad(key: &str, message: impl fmt::Display) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldChoice {
    Vacuum,
    Coherent,
    Thermal,
    Custom,
}

impl FieldChoice {
    pub fn name(self) -> &'static str {
        match self {
            FieldChoice::Vacuum => "vacuum",
            FieldChoice::Coherent => "coherent",
            FieldChoice::Thermal => "thermal",
            FieldChoice::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    Off,
    Verify,
    Full,
}

impl OracleMode {
    pub fn name(self) -> &'static str {
        match self {
            OracleMode::Off => "off",
            OracleMode::Verify => "verify",
            OracleMode::Full => "full",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StarkSpec {
    Chi(f64),
    /// `(ω_k, η_k)` pairs; χ follows from the small-rotation reduction.
    Nearby(Vec<(f64, f64)>),
}

pub const KEYS: [&str; 14] = [
    "preset",
    "field",
    "nbar",
    "probs",
    "delta",
    "chi",
    "nearby",
    "omega",
    "lambda",
    "gamma",
    "grid",
    "weight_mode",
    "oracle",
    "out",
];
const TAIL_TOL_KEY: &str = "tail_tol";

/// One source of settings. Values are kept as parsed-on-insert typed options so
/// that every source (preset, file, flags) goes through the same parsers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigLayer {
    pub preset: Option<String>,
    pub field: Option<FieldChoice>,
    pub nbar: Option<f64>,
    pub probs: Option<Vec<f64>>,
    pub delta: Option<f64>,
    pub stark: Option<StarkSpec>,
    pub omega: Option<f64>,
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    pub grid: Option<DeltaGrid>,
    pub weight_mode: Option<WeightMode>,
    pub oracle: Option<OracleMode>,
    pub out: Option<PathBuf>,
    pub tail_tol: Option<f64>,
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = value.trim().parse().map_err(|_| bad(key, format!("`{value}` is not a number")))?;
    if !v.is_finite() {
        return Err(bad(key, "must be finite"));
    }
    Ok(v)
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_f64(key, s))
        .collect()
}

pub fn parse_nearby(value: &str) -> Result<Vec<(f64, f64)>, ConfigError> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (w, e) = item
            .split_once(':')
            .ok_or_else(|| bad("nearby", format!("`{item}` is not omega:eta")))?;
        out.push((parse_f64("nearby", w)?, parse_f64("nearby", e)?));
    }
    Ok(out)
}

pub fn parse_grid(value: &str) -> Result<DeltaGrid, ConfigError> {
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() != 3 {
        return Err(bad("grid", "expected min:max:points"));
    }
    let points: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| bad("grid", format!("`{}` is not a point count", parts[2])))?;
    DeltaGrid::new(parse_f64("grid", parts[0])?, parse_f64("grid", parts[1])?, points)
        .map_err(|e| bad("grid", e))
}

fn normalize_key(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl ConfigLayer {
    /// Sets `key` from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = normalize_key(key);
        let value = value.trim();
        match key.as_str() {
            "preset" => self.preset = Some(value.to_string()),
            "field" => {
                self.field = Some(match value.to_ascii_lowercase().as_str() {
                    "vacuum" => FieldChoice::Vacuum,
                    "coherent" => FieldChoice::Coherent,
                    "thermal" => FieldChoice::Thermal,
                    "custom" => FieldChoice::Custom,
                    _ => return Err(bad("field", format!("`{value}` is not vacuum|coherent|thermal|custom"))),
                })
            }
            "nbar" => self.nbar = Some(parse_f64("nbar", value)?),
            "probs" => self.probs = Some(parse_list("probs", value)?),
            "delta" => self.delta = Some(parse_f64("delta", value)?),
            "chi" => self.set_stark(StarkSpec::Chi(parse_f64("chi", value)?))?,
            "nearby" => self.set_stark(StarkSpec::Nearby(parse_nearby(value)?))?,
            "omega" => self.omega = Some(parse_f64("omega", value)?),
            "lambda" => self.lambda = Some(parse_f64("lambda", value)?),
            "gamma" => self.gamma = Some(parse_f64("gamma", value)?),
            "grid" => self.grid = Some(parse_grid(value)?),
            "weight_mode" => {
                self.weight_mode = Some(match value.to_ascii_lowercase().replace('-', "_").as_str() {
                    "probability" => WeightMode::Probability,
                    "squared_literal" => WeightMode::SquaredLiteral,
                    _ => return Err(bad("weight_mode", format!("`{value}` is not probability|squared_literal"))),
                })
            }
            "oracle" => {
                self.oracle = Some(match value.to_ascii_lowercase().as_str() {
                    "off" => OracleMode::Off,
                    "verify" => OracleMode::Verify,
                    "full" => OracleMode::Full,
                    _ => return Err(bad("oracle", format!("`{value}` is not off|verify|full"))),
                })
            }
            "out" => {
                if value.is_empty() {
                    return Err(bad("out", "empty output prefix"));
                }
                self.out = Some(PathBuf::from(value))
            }
            TAIL_TOL_KEY => self.tail_tol = Some(parse_f64(TAIL_TOL_KEY, value)?),
            _ => return Err(ConfigError::UnknownKey(key)),
        }
        Ok(())
    }

    fn set_stark(&mut self, spec: StarkSpec) -> Result<(), ConfigError> {
        if let Some(existing) = &self.stark {
            if core::mem::discriminant(existing) != core::mem::discriminant(&spec) {
                return Err(ConfigError::ChiAndNearby);
            }
        }
        self.stark = Some(spec);
        Ok(())
    }

    /// `key = value` lines; `#` starts a comment.
    pub fn from_key_values(text: &str) -> Result<Self, ConfigError> {
        let mut layer = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                ConfigError::Invalid(format!("line {}: expected key = value", lineno + 1))
            })?;
            layer.set(k, v)?;
        }
        Ok(layer)
    }

    /// A JSON object with the same keys. Lists may be given as arrays:
    /// `probs: [..]`, `grid: [min, max, points]`, `nearby: [[omega, eta], ..]`.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Invalid(format!("JSON: {e}")))?;
        let Value::Object(map) = value else {
            return Err(ConfigError::Invalid("JSON config must be an object".into()));
        };
        let mut layer = Self::default();
        for (k, v) in &map {
            let key = normalize_key(k);
            let text = match (key.as_str(), v) {
                (_, Value::String(s)) => s.clone(),
                (_, Value::Number(n)) => n.to_string(),
                ("nearby", Value::Array(items)) => items
                    .iter()
                    .map(|p| match p.as_array().map(Vec::as_slice) {
                        Some([w, e]) => Ok(format!("{}:{}", json_number(&key, w)?, json_number(&key, e)?)),
                        _ => Err(bad(&key, "expected [omega, eta] pairs")),
                    })
                    .collect::<Result<Vec<_>, _>>()?
                    .join(","),
                ("probs" | "grid", Value::Array(items)) => {
                    let sep = if key == "grid" { ":" } else { "," };
                    items
                        .iter()
                        .map(|x| json_number(&key, x))
                        .collect::<Result<Vec<_>, _>>()?
                        .join(sep)
                }
                _ => return Err(bad(&key, format!("unsupported JSON value {v}"))),
            };
            layer.set(&key, &text)?;
        }
        Ok(layer)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::File {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        if text.trim_start().starts_with('{') {
            Self::from_json(&text)
        } else {
            Self::from_key_values(&text)
        }
    }

    /// `other` wins wherever it is set.
    pub fn merged(mut self, other: &ConfigLayer) -> Self {
        macro_rules! take {
            ($($f:ident),*) => {$(if other.$f.is_some() { self.$f = other.$f.clone(); })*};
        }
        take!(preset, field, nbar, probs, delta, stark, omega, lambda, gamma, grid, weight_mode, oracle, out, tail_tol);
        self
    }

    /// Preset (named here or in an earlier layer) overlaid by the given layers in order.
    pub fn resolve_layers(layers: &[&ConfigLayer]) -> Result<RunConfig, ConfigError> {
        let preset = layers.iter().rev().find_map(|l| l.preset.clone());
        let mut merged = match &preset {
            Some(name) => presets::layer(name).ok_or_else(|| ConfigError::UnknownPreset(name.clone()))?,
            None => ConfigLayer::default(),
        };
        for layer in layers {
            merged = merged.merged(layer);
        }
        merged.preset = preset;
        merged.resolve_merged()
    }

    /// Resolves this layer alone, on top of its preset if it names one.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        Self::resolve_layers(&[self])
    }

    fn resolve_merged(&self) -> Result<RunConfig, ConfigError> {
        let field = self.field.unwrap_or(FieldChoice::Coherent);
        let tail_tol = self.tail_tol.unwrap_or(DEFAULT_TAIL_TOL);
        let invalid = |e: jcstark::Error| ConfigError::Invalid(e.to_string());
        if self.probs.is_some() && field != FieldChoice::Custom {
            return Err(ConfigError::Invalid("`probs` requires field = custom".into()));
        }
        let dist = match field {
            FieldChoice::Vacuum => {
                if self.nbar.is_some_and(|n| n != 0.0) {
                    return Err(ConfigError::Invalid("vacuum field has nbar = 0".into()));
                }
                PhotonStatistics::vacuum()
            }
            FieldChoice::Coherent => PhotonStatistics::coherent(self.nbar.unwrap_or(1.0), tail_tol).map_err(invalid)?,
            FieldChoice::Thermal => PhotonStatistics::thermal(self.nbar.unwrap_or(1.0), tail_tol).map_err(invalid)?,
            FieldChoice::Custom => {
                let probs = self
                    .probs
                    .as_ref()
                    .ok_or_else(|| ConfigError::Invalid("field = custom needs `probs`".into()))?;
                if self.nbar.is_some() {
                    return Err(ConfigError::Invalid("custom field derives nbar from `probs`".into()));
                }
                PhotonStatistics::custom(probs, false).map_err(invalid)?
            }
        };
        let params = SystemParams::with_detuning(
            self.omega.unwrap_or(DEFAULT_OMEGA),
            self.delta.unwrap_or(0.0),
            self.lambda.unwrap_or(1.0),
            self.gamma.unwrap_or(0.1),
        )
        .map_err(invalid)?;
        let stark = self.stark.clone().unwrap_or(StarkSpec::Chi(0.0));
        let (chi, effective) = match &stark {
            StarkSpec::Chi(chi) => (*chi, None),
            StarkSpec::Nearby(pairs) => {
                let nearby = NearbyLevelSet::from_pairs(pairs).map_err(invalid)?;
                nearby.check_against(&params).map_err(invalid)?;
                let model = effective_model(&nearby, &params, DEFAULT_XI_LIMIT).map_err(invalid)?;
                (model.chi, Some((nearby, model)))
            }
        };
        Ok(RunConfig {
            preset: self.preset.clone(),
            field,
            dist,
            params,
            stark,
            chi,
            effective,
            grid: self.grid.unwrap_or_default(),
            weight_mode: self.weight_mode.unwrap_or_default(),
            oracle: self.oracle.unwrap_or(OracleMode::Off),
            out: self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            tail_tol,
        })
    }
}

fn json_number(key: &str, v: &Value) -> Result<String, ConfigError> {
    match v {
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(bad(key, format!("`{v}` is not a number"))),
    }
}

/// A fully validated run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub field: FieldChoice,
    pub dist: PhotonStatistics,
    pub params: SystemParams,
    pub stark: StarkSpec,
    /// Effective Stark parameter, given directly or derived from `nearby`.
    pub chi: f64,
    pub effective: Option<(NearbyLevelSet, EffectiveModel)>,
    pub grid: DeltaGrid,
    pub weight_mode: WeightMode,
    pub oracle: OracleMode,
    pub out: PathBuf,
    pub tail_tol: f64,
}

impl RunConfig {
    /// Ordered `(key, value)` pairs echoed into every output header.
    pub fn echo(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        m.insert("preset", self.preset.clone().unwrap_or_else(|| "none".into()));
        m.insert("field", self.field.name().into());
        m.insert("nbar", fmt_f64(self.dist.nbar()));
        m.insert("tail_tol", fmt_f64(self.tail_tol));
        m.insert("m_max", self.dist.m_max().to_string());
        m.insert("omega", fmt_f64(self.params.omega));
        m.insert("omega0", fmt_f64(self.params.omega0));
        m.insert("delta", fmt_f64(self.params.delta));
        m.insert("lambda", fmt_f64(self.params.lambda_c));
        m.insert("gamma", fmt_f64(self.params.gamma));
        m.insert("chi", fmt_f64(self.chi));
        m.insert(
            "nearby",
            match &self.stark {
                StarkSpec::Chi(_) => "none".into(),
                StarkSpec::Nearby(pairs) => pairs
                    .iter()
                    .map(|(w, e)| format!("{}:{}", fmt_f64(*w), fmt_f64(*e)))
                    .collect::<Vec<_>>()
                    .join(","),
            },
        );
        if let Some((_, model)) = &self.effective {
            m.insert("xi", model.xi.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(","));
            m.insert("xi_valid", model.is_valid().to_string());
        }
        m.insert(
            "grid",
            format!("{}:{}:{}", fmt_f64(self.grid.min), fmt_f64(self.grid.max), self.grid.points),
        );
        m.insert("weight_mode", self.weight_mode.name().into());
        m.insert("oracle", self.oracle.name().into());
        m
    }
}

/// Shortest round-tripping decimal form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_value_file() {
        let layer = ConfigLayer::from_key_values(
            "# comment\nfield = thermal\nnbar = 2.5 # inline\nweight-mode = squared_literal\ngrid = -5:5:11\n",
        )
        .unwrap();
        assert_eq!(layer.field, Some(FieldChoice::Thermal));
        assert_eq!(layer.nbar, Some(2.5));
        assert_eq!(layer.weight_mode, Some(WeightMode::SquaredLiteral));
        assert_eq!(layer.grid.unwrap().points, 11);
        assert!(ConfigLayer::from_key_values("bogus = 1").is_err());
        assert!(ConfigLayer::from_key_values("nbar 1").is_err());
    }

    #[test]
    fn json_matches_key_values() {
        let json = ConfigLayer::from_json(
            r#"{"field": "coherent", "nbar": 10, "nearby": [[30, 0.5], [40, 0.7]], "grid": [-5, 5, 11], "oracle": "verify"}"#,
        )
        .unwrap();
        let kv = ConfigLayer::from_key_values(
            "field = coherent\nnbar = 10\nnearby = 30:0.5,40:0.7\ngrid = -5:5:11\noracle = verify",
        )
        .unwrap();
        assert_eq!(json, kv);
        assert!(ConfigLayer::from_json("[1]").is_err());
        assert!(ConfigLayer::from_json(r#"{"nbar": true}"#).is_err());
    }

    #[test]
    fn chi_and_nearby_conflict() {
        assert!(matches!(
            ConfigLayer::from_key_values("chi = 0.9\nnearby = 30:0.5"),
            Err(ConfigError::ChiAndNearby)
        ));
        // across layers the later one wins
        let base = ConfigLayer::from_key_values("nearby = 30:0.5").unwrap();
        let flags = ConfigLayer::from_key_values("chi = 0.2").unwrap();
        let cfg = ConfigLayer::resolve_layers(&[&base, &flags]).unwrap();
        assert_eq!(cfg.chi, 0.2);
        assert!(cfg.effective.is_none());
    }

    #[test]
    fn nearby_levels_derive_chi() {
        let cfg = ConfigLayer::from_key_values("nearby = 30:0.5").unwrap().resolve().unwrap();
        // Δ = 0, Δ_1 = 20: ξ = 0.05, χ = 0.025
        assert!((cfg.chi - 0.025).abs() < 1e-15);
        assert!(ConfigLayer::from_key_values("nearby = 5:0.5").unwrap().resolve().is_err());
    }

    #[test]
    fn preset_then_overrides() {
        let flags = ConfigLayer::from_key_values("preset = fig2b\ngamma = 0.2").unwrap();
        let cfg = ConfigLayer::resolve_layers(&[&flags]).unwrap();
        assert_eq!(cfg.chi, 0.9);
        assert_eq!(cfg.params.gamma, 0.2);
        assert_eq!(cfg.dist.nbar(), 1.0);
        let unknown = ConfigLayer::from_key_values("preset = fig9z").unwrap();
        assert!(matches!(ConfigLayer::resolve_layers(&[&unknown]), Err(ConfigError::UnknownPreset(_))));
    }

    #[test]
    fn field_validation() {
        let resolve = |s: &str| ConfigLayer::from_key_values(s).unwrap().resolve();
        assert!(resolve("field = vacuum\nnbar = 2").is_err());
        assert!(resolve("field = custom").is_err());
        assert!(resolve("probs = 0.5,0.5").is_err());
        assert_eq!(resolve("field = custom\nprobs = 0.5,0.5").unwrap().dist.nbar(), 0.5);
        assert!(resolve("field = coherent\nnbar = -1").is_err());
        assert!(resolve("gamma = 0").is_err());
        assert!(resolve("lambda = -1").is_err());
        assert!(ConfigLayer::from_key_values("grid = 1:2:1").is_err());
        assert!(ConfigLayer::from_key_values("field = squeezed").is_err());
    }

    #[test]
    fn echo_is_complete() {
        let cfg = ConfigLayer::from_key_values("nearby = 30:0.5").unwrap().resolve().unwrap();
        let echo = cfg.echo();
        for key in ["field", "nbar", "delta", "chi", "nearby", "lambda", "gamma", "grid", "weight_mode", "oracle", "xi"] {
            assert!(echo.contains_key(key), "{key}");
        }
        assert_eq!(echo["nearby"], "30.0:0.5");
    }
}
