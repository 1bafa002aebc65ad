//! Experiment configuration: one JSON document merged over per-experiment
//! defaults, with leaf overrides addressed by dotted paths.

use crate::error::{HarnessError, Result};
use crate::registry;
use parabolic_core::analysis::WeightSpec;
use parabolic_core::{CoefficientField, FieldSpec, GridSpec};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    /// Closed time window.
    pub t: [f64; 2],
    /// Time nodes.
    pub nt: usize,
    /// Spatial window `[x0, x1)` per axis.
    pub x: [f64; 2],
    /// Cells per spatial axis.
    pub nx: usize,
    /// Convolution padding in cells; derived from the field when absent.
    #[serde(default)]
    pub padding: Option<usize>,
}

impl GridConfig {
    pub fn build(&self, field: &CoefficientField) -> Result<GridSpec> {
        if self.t[1] <= self.t[0] || self.x[1] <= self.x[0] || self.nt < 2 || self.nx < 4 {
            return Err(HarnessError::Config(format!("degenerate grid {self:?}")));
        }
        let mut grid = GridSpec::uniform(self.dim, (self.t[0], self.t[1]), self.nt, (self.x[0], self.x[1]), self.nx, 0)?;
        grid.padding = match self.padding {
            Some(p) => p,
            None => grid.recommended_padding(field.lambda(), self.t[1] - self.t[0]),
        };
        Ok(grid)
    }

    pub fn h_x(&self) -> f64 {
        (self.x[1] - self.x[0]) / self.nx as f64
    }
}

/// Seeded random families of compactly supported bumps
/// `Σ a·ψ((t−c)/w_t)·ψ(|x−z|/w_x)` with `ψ(r) = (1−r²)⁶` on `r < 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyConfig {
    pub size: usize,
    pub max_bumps: usize,
    pub time_center: [f64; 2],
    pub time_width: [f64; 2],
    pub space_center: [f64; 2],
    pub space_width: [f64; 2],
    pub amplitude: [f64; 2],
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self {
            size: 32,
            max_bumps: 2,
            time_center: [-1.0, 0.5],
            time_width: [0.5, 0.9],
            space_center: [-1.0, 1.0],
            space_width: [1.5, 2.0],
            amplitude: [0.5, 1.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub fields: Vec<FieldSpec>,
    pub grid: GridConfig,
    /// Secondary grids by role.
    #[serde(default)]
    pub grids: BTreeMap<String, GridConfig>,
    /// Refinement ladder in cells per unit length.
    #[serde(default)]
    pub resolutions: Vec<usize>,
    /// Truncation radii as multiples of the spatial step.
    #[serde(default)]
    pub epsilon_multiples: Vec<f64>,
    #[serde(default)]
    pub family: FamilyConfig,
    /// Exponents such as `p`, `q`, `alpha`.
    #[serde(default)]
    pub norms: BTreeMap<String, f64>,
    #[serde(default)]
    pub weights: BTreeMap<String, WeightSpec>,
    /// Ball radii of maximal functions.
    #[serde(default)]
    pub radii: Vec<f64>,
    /// Sample counts such as `points` or `pairs`.
    #[serde(default)]
    pub samples: BTreeMap<String, usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

impl ExperimentConfig {
    /// Defaults of `id` merged with nothing.
    pub fn defaults(id: &str) -> Result<Self> {
        Self::from_value(registry::default_value(id)?)
    }

    /// Merges `user` over the defaults of its `experiment`, then applies
    /// `key=value` overrides.
    pub fn resolve(user: Value, overrides: &[String]) -> Result<Self> {
        let id = user
            .get("experiment")
            .and_then(Value::as_str)
            .ok_or_else(|| HarnessError::Config("missing string field `experiment`".into()))?
            .to_string();
        let mut merged = registry::default_value(&id)?;
        merge(&mut merged, user);
        for o in overrides {
            apply_override(&mut merged, o)?;
        }
        Self::from_value(merged)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let user: Value = serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::resolve(user, overrides)
    }

    fn from_value(v: Value) -> Result<Self> {
        let cfg: Self = serde_json::from_value(v).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if registry::find(&self.experiment).is_none() {
            return Err(HarnessError::Config(format!("unknown experiment `{}`", self.experiment)));
        }
        if self.fields.is_empty() {
            return Err(HarnessError::Config("at least one coefficient field is required".into()));
        }
        for f in &self.fields {
            if f.dim() != self.grid.dim && self.grids.values().all(|g| g.dim != f.dim()) {
                return Err(HarnessError::Config(format!("no grid has the field dimension {}", f.dim())));
            }
            f.build()?;
        }
        for (name, w) in &self.weights {
            w.validate().map_err(|e| HarnessError::Config(format!("weight `{name}`: {e}")))?;
        }
        if self.radii.iter().any(|r| !(*r > 0.0)) {
            return Err(HarnessError::Config("radii must be positive".into()));
        }
        if self.epsilon_multiples.iter().any(|m| !(*m > 0.0)) {
            return Err(HarnessError::Config("epsilon multiples must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(HarnessError::Config("thread count must be positive".into()));
        }
        Ok(())
    }

    pub fn built_fields(&self) -> Result<Vec<CoefficientField>> {
        Ok(self.fields.iter().map(FieldSpec::build).collect::<parabolic_core::Result<_>>()?)
    }

    pub fn norm(&self, key: &str) -> Result<f64> {
        self.norms.get(key).copied().ok_or_else(|| HarnessError::Config(format!("missing norm exponent `{key}`")))
    }

    pub fn weight(&self, key: &str) -> Result<&WeightSpec> {
        self.weights.get(key).ok_or_else(|| HarnessError::Config(format!("missing weight `{key}`")))
    }

    pub fn secondary_grid(&self, key: &str) -> Result<&GridConfig> {
        self.grids.get(key).ok_or_else(|| HarnessError::Config(format!("missing grid `{key}`")))
    }

    pub fn tolerance(&self, key: &str) -> Result<f64> {
        self.tolerances.get(key).copied().ok_or_else(|| HarnessError::Config(format!("missing tolerance `{key}`")))
    }

    pub fn sample(&self, key: &str) -> Result<usize> {
        self.samples.get(key).copied().ok_or_else(|| HarnessError::Config(format!("missing sample count `{key}`")))
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Recursive object merge; non-object values replace.
pub fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
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

/// Sets the leaf at dotted `key` to `value`, parsed as JSON when possible.
/// Numeric segments index arrays.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| HarnessError::Config(format!("override `{spec}` is not of the form key=value")))?;
    if key.is_empty() {
        return Err(HarnessError::Config(format!("override `{spec}` has an empty key")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (depth, part) in parts.iter().enumerate() {
        let last = depth + 1 == parts.len();
        node = match node {
            Value::Array(items) => {
                let i: usize = part.parse().map_err(|_| HarnessError::Config(format!("`{part}` in `{key}` is not an array index")))?;
                let len = items.len();
                items.get_mut(i).ok_or_else(|| HarnessError::Config(format!("index {i} out of range ({len}) in `{key}`")))?
            }
            Value::Object(map) => map.entry(part.to_string()).or_insert_with(|| if last { Value::Null } else { Value::Object(Map::new()) }),
            Value::Null => {
                *node = Value::Object(Map::new());
                node.as_object_mut().expect("object").entry(part.to_string()).or_insert(Value::Null)
            }
            _ => return Err(HarnessError::Config(format!("`{key}` descends into a scalar"))),
        };
    }
    *node = value;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn overrides_set_leaves() {
        let mut doc = json!({"grid": {"nx": 64}, "fields": [{"kind": "identity", "dim": 1}]});
        apply_override(&mut doc, "grid.nx=128").unwrap();
        apply_override(&mut doc, "fields.0.dim=2").unwrap();
        apply_override(&mut doc, "out=runs/a").unwrap();
        apply_override(&mut doc, "norms.p=3").unwrap();
        assert_eq!(doc["grid"]["nx"], json!(128));
        assert_eq!(doc["fields"][0]["dim"], json!(2));
        assert_eq!(doc["out"], json!("runs/a"));
        assert_eq!(doc["norms"]["p"], json!(3));
        assert!(apply_override(&mut doc, "grid.nx.deep=1").is_err());
        assert!(apply_override(&mut doc, "fields.5.dim=1").is_err());
        assert!(apply_override(&mut doc, "novalue").is_err());
    }

    #[test]
    fn merge_keeps_unmentioned_keys() {
        let mut base = json!({"a": {"b": 1, "c": 2}, "d": [1, 2]});
        merge(&mut base, json!({"a": {"b": 5}, "d": [3]}));
        assert_eq!(base, json!({"a": {"b": 5, "c": 2}, "d": [3]}));
    }

    #[test]
    fn unknown_experiment_is_a_config_error() {
        let r = ExperimentConfig::resolve(json!({"experiment": "nope"}), &[]);
        assert!(matches!(r, Err(HarnessError::Config(_))));
        let r = ExperimentConfig::resolve(json!({"seed": 3}), &[]);
        assert!(matches!(r, Err(HarnessError::Config(_))));
    }

    #[test]
    fn every_registered_default_validates() {
        for entry in registry::REGISTRY {
            let cfg = ExperimentConfig::defaults(entry.id).unwrap();
            assert_eq!(cfg.experiment, entry.id);
            let again: ExperimentConfig = serde_json::from_value(cfg.to_value()).unwrap();
            assert_eq!(again, cfg);
        }
    }
}
