//! Versioned JSON experiment configs.
//!
//! Any numeric parameter may be written as `{"range": [v1, v2, …]}`; an
//! experiment with one ranged parameter expands into a sweep with one run per
//! value. Two or more ranged parameters in one experiment are rejected.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::convex::ConvexSpec;
use crate::filtration::TreeSpec;
use crate::integrator::IntegrandSpec;
use crate::prm::MeasureSpec;
use crate::{Error, Norm, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_PATHS: usize = 100_000;

fn euclid() -> Norm {
    Norm::EUCLIDEAN
}

fn two() -> f64 {
    2.0
}

fn unit_horizon() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// Output dimension; defaults to the integrand's.
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default = "euclid")]
    pub s: Norm,
    #[serde(default = "two")]
    pub p: f64,
    #[serde(default)]
    pub c_p: Option<f64>,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self { d: None, s: Norm::EUCLIDEAN, p: 2.0, c_p: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Inequality {
    I,
    Ii,
    Iii,
    Corollary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorollaryRhs {
    Jumps,
    Conditional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuousExperiment {
    pub id: String,
    pub inequality: Inequality,
    #[serde(default)]
    pub model: ModelSpec,
    pub measure: MeasureSpec,
    pub integrand: IntegrandSpec,
    /// Exponent for (i).
    #[serde(default)]
    pub q: Option<f64>,
    /// Exponent for (ii) and the jump form of the corollary.
    #[serde(default)]
    pub r: Option<f64>,
    /// `q = p^n` for (iii) and the conditional form of the corollary.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub form: Option<CorollaryRhs>,
    #[serde(rename = "T", default = "unit_horizon")]
    pub horizon: f64,
    #[serde(rename = "N", default)]
    pub paths: Option<usize>,
    /// Random stream label; defaults to the experiment id. Experiments sharing
    /// a label (and a measure) see the same jump paths.
    #[serde(default)]
    pub stream: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscreteCheckKind {
    Doob,
    Garsia,
    Davis,
    GoodLambda,
    ConditionalSum,
    Bdg,
    Previsible,
    TypeIdentity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteExperiment {
    pub id: String,
    pub check: DiscreteCheckKind,
    pub tree: TreeSpec,
    #[serde(default)]
    pub phi: ConvexSpec,
    /// Exponent of `S_{N,p}`.
    #[serde(default = "two")]
    pub p: f64,
    /// Martingale-type constant of the state space.
    #[serde(default)]
    pub type_constant: Option<f64>,
    /// Overrides the default constant of the check.
    #[serde(default)]
    pub constant: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    /// Good-λ `ε`; defaults to the smallest admissible value per instance.
    #[serde(default)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub direction: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CfExperiment {
    pub id: String,
    pub measure: MeasureSpec,
    #[serde(default)]
    pub drift: Option<Vec<f64>>,
    #[serde(default = "unit_horizon")]
    pub t: f64,
    pub thetas: ThetaGrid,
    #[serde(rename = "N", default)]
    pub paths: Option<usize>,
    #[serde(default)]
    pub stream: Option<String>,
}

fn default_lambdas() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 2.0, 4.0, 8.0]
}

fn default_ps() -> Vec<f64> {
    vec![1.0, 1.25, 1.5, 1.75, 2.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonLemmaExperiment {
    pub id: String,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_ps")]
    pub ps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsExperiment {
    pub id: String,
    #[serde(default)]
    pub model: ModelSpec,
    pub r: f64,
    #[serde(default = "one_level")]
    pub n: usize,
}

fn one_level() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
#[allow(clippy::large_enum_variant)]
pub enum Experiment {
    VerifyContinuous(ContinuousExperiment),
    VerifyDiscrete(DiscreteExperiment),
    Constants(ConstantsExperiment),
    CfCheck(CfExperiment),
    PoissonLemma(PoissonLemmaExperiment),
}

impl Experiment {
    pub fn id(&self) -> &str {
        match self {
            Experiment::VerifyContinuous(e) => &e.id,
            Experiment::VerifyDiscrete(e) => &e.id,
            Experiment::Constants(e) => &e.id,
            Experiment::CfCheck(e) => &e.id,
            Experiment::PoissonLemma(e) => &e.id,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::VerifyContinuous(_) => "verify-continuous",
            Experiment::VerifyDiscrete(_) => "verify-discrete",
            Experiment::Constants(_) => "constants",
            Experiment::CfCheck(_) => "cf-check",
            Experiment::PoissonLemma(_) => "poisson-lemma",
        }
    }
}

/// One concrete run: an experiment with all ranges resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    /// The experiment id as written in the config.
    pub base_id: String,
    /// `id` for plain runs, `id[path=value]` for sweep points.
    pub id: String,
    /// The swept parameter and its value at this point.
    pub sweep: Option<(String, f64)>,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub seed: u64,
    pub paths: usize,
    pub instances: Vec<Instance>,
    /// SHA-256 of the canonical (key-sorted, compact) config JSON.
    pub hash: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema: u32,
    seed: u64,
    #[serde(rename = "N", default)]
    paths: Option<usize>,
    #[serde(default)]
    #[allow(dead_code)]
    description: Option<String>,
    experiments: Vec<Value>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::config("$", e.to_string()))?;
        Self::from_value(value)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Self::parse(&text)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let hash = hex(&Sha256::digest(value.to_string().as_bytes()));
        let raw: RawConfig = serde_json::from_value(value).map_err(|e| Error::config("$", e.to_string()))?;
        if raw.schema != SCHEMA_VERSION {
            return Err(Error::config(
                "$.schema",
                format!("unsupported schema {}; expected {SCHEMA_VERSION}", raw.schema),
            ));
        }
        let mut instances = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for (k, exp) in raw.experiments.into_iter().enumerate() {
            let at = format!("$.experiments[{k}]");
            let mut ranges = Vec::new();
            find_ranges(&exp, String::new(), &mut ranges)?;
            if ranges.len() > 1 {
                let names: Vec<&str> = ranges.iter().map(|(p, _)| p.as_str()).collect();
                return Err(Error::config(at, format!("more than one ranged parameter: {}", names.join(", "))));
            }
            let parse = |v: Value| -> Result<Experiment> {
                serde_json::from_value(v).map_err(|e| Error::config(at.clone(), e.to_string()))
            };
            match ranges.pop() {
                None => {
                    let e = parse(exp)?;
                    instances.push(Instance { base_id: e.id().into(), id: e.id().into(), sweep: None, experiment: e });
                }
                Some((path, values)) => {
                    for v in values {
                        let mut concrete = exp.clone();
                        set_path(&mut concrete, &path, Value::from(v));
                        let e = parse(concrete)?;
                        let id = format!("{}[{path}={v}]", e.id());
                        instances.push(Instance {
                            base_id: e.id().into(),
                            id,
                            sweep: Some((path.clone(), v)),
                            experiment: e,
                        });
                    }
                }
            }
            let base = instances.last().map(|i| i.base_id.clone()).unwrap_or_default();
            if !seen.insert(base.clone()) {
                return Err(Error::config(format!("$.experiments[{k}].id"), format!("duplicate id `{base}`")));
            }
        }
        let paths = raw.paths.unwrap_or(DEFAULT_PATHS);
        Ok(Self { schema: raw.schema, seed: raw.seed, paths, instances, hash })
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects `(dotted.path, values)` for every `{"range": [...]}` object.
fn find_ranges(v: &Value, path: String, out: &mut Vec<(String, Vec<f64>)>) -> Result<()> {
    match v {
        Value::Object(map) => {
            if let Some(r) = map.get("range") {
                if map.len() != 1 {
                    return Err(Error::config(path, "a ranged parameter must be exactly {\"range\": [...]}"));
                }
                let values = r
                    .as_array()
                    .filter(|a| !a.is_empty())
                    .and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<f64>>>())
                    .ok_or_else(|| Error::config(path.clone(), "range must be a nonempty array of numbers"))?;
                out.push((path, values));
                return Ok(());
            }
            for (k, child) in map {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                find_ranges(child, p, out)?;
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                find_ranges(child, format!("{path}.{i}"), out)?;
            }
        }
        _ => {}
    }
    Ok(())
}

fn set_path(v: &mut Value, path: &str, new: Value) {
    let mut cur = v;
    for part in path.split('.') {
        cur = match cur {
            Value::Object(map) => map.get_mut(part).expect("path from find_ranges"),
            Value::Array(items) => &mut items[part.parse::<usize>().expect("array index")],
            _ => unreachable!("path from find_ranges"),
        };
    }
    // Integral grid values (N, counts) stay integers.
    *cur = match new.as_f64() {
        Some(x) if x.fract() == 0.0 && x.abs() < 9e15 && x >= 0.0 => Value::from(x as u64),
        _ => new,
    };
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"schema":1,"seed":7,"N":1000,"experiments":[
        {"id":"c","kind":"constants","r":4,"n":2},
        {"id":"pl","kind":"poisson-lemma"}
    ]}"#;

    #[test]
    fn parses_and_hashes() {
        let c = ExperimentConfig::parse(BASE).unwrap();
        assert_eq!(c.instances.len(), 2);
        assert_eq!(c.paths, 1000);
        assert_eq!(c.hash.len(), 64);
        let reformatted = BASE.replace('\n', " ").replace("  ", " ");
        assert_eq!(ExperimentConfig::parse(&reformatted).unwrap().hash, c.hash);
    }

    #[test]
    fn unknown_keys_and_schema_rejected() {
        for bad in [
            r#"{"schema":1,"seed":1,"experiments":[],"extra":1}"#,
            r#"{"schema":2,"seed":1,"experiments":[]}"#,
            r#"{"schema":1,"seed":1,"experiments":[{"id":"c","kind":"constants","r":4,"oops":1}]}"#,
            r#"{"schema":1,"seed":1,"experiments":[{"id":"c","kind":"nope"}]}"#,
            r#"{"schema":1,"seed":1,"experiments":[{"id":"c","kind":"constants","r":4},{"id":"c","kind":"constants","r":4}]}"#,
        ] {
            let err = ExperimentConfig::parse(bad).unwrap_err();
            assert!(matches!(err, Error::Config { .. }), "{bad}: {err}");
        }
    }

    #[test]
    fn ranges_expand() {
        let text = r#"{"schema":1,"seed":1,"experiments":[
            {"id":"s","kind":"verify-continuous","inequality":"ii","r":4,
             "measure":{"geometric":{"first":1.5,"ratio":0.5,"count":6},"eps":{"range":[1,0.5]}},
             "integrand":{"kind":"linear_in_mark"},"N":{"range":[100]}}]}"#;
        let err = ExperimentConfig::parse(text).unwrap_err();
        assert!(err.to_string().contains("more than one ranged"), "{err}");

        let text = text.replace(r#""N":{"range":[100]}"#, r#""N":100"#);
        let c = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(c.instances.len(), 2);
        assert_eq!(c.instances[1].sweep, Some(("measure.eps".into(), 0.5)));
        assert_eq!(c.instances[1].id, "s[measure.eps=0.5]");
        match &c.instances[1].experiment {
            Experiment::VerifyContinuous(e) => assert_eq!(e.measure.eps, 0.5),
            other => panic!("{other:?}"),
        }
    }
}
