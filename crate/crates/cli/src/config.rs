//! Experiment configuration: a JSON document merged with dotted-path flag
//! overrides, checked against the known key set before anything runs.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub grid: GridSection,
    pub pseudofn: PseudofnSection,
    pub product: ProductSection,
    pub probe: ProbeSection,
    pub bounds: BoundsSection,
    pub solver: SolverSection,
    pub data: DataSection,
    pub stationary: StationarySection,
    pub boost: BoostSection,
    pub diagnostic: DiagnosticSection,
    pub radial: RadialSection,
    pub output: OutputSection,
}

/// `null` fields fall back to a per-command default.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub cutoff: Option<f64>,
    pub bins: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PseudofnSection {
    pub lambda: f64,
}

impl Default for PseudofnSection {
    fn default() -> Self {
        Self { lambda: -2.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ProductSection {
    pub lambda: f64,
    /// Second factor; `null` means a power of the first.
    pub mu: Option<f64>,
    pub p: u32,
}

impl Default for ProductSection {
    fn default() -> Self {
        Self { lambda: -1.0, mu: None, p: 2 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    pub lambda: f64,
    pub s1: f64,
    pub s2: f64,
    pub sigma: f64,
    pub refinements: usize,
}

impl Default for ProbeSection {
    fn default() -> Self {
        Self { lambda: -1.0, s1: -0.6, s2: -0.6, sigma: -1.8, refinements: 4 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsSection {
    pub p: u32,
    pub n: u32,
    /// Indices of a product bound query; both or neither.
    pub s1: Option<f64>,
    pub s2: Option<f64>,
    /// Index of a power bound query.
    pub s: Option<f64>,
}

impl Default for BoundsSection {
    fn default() -> Self {
        Self { p: 3, n: 1, s1: None, s2: None, s: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub p: u32,
    pub kappa: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub nt: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub norm_s: f64,
    pub convention: String,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            p: 2,
            kappa: 1.0,
            t_end: 0.1,
            nt: 32,
            tol: 1e-8,
            max_iter: 50,
            norm_s: 0.0,
            convention: "angular".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    /// `exp`, `stationary`, `zero` or `indicator`.
    pub kind: String,
    /// Exponent of the stationary preset.
    pub lambda: f64,
    /// Frequency band of the indicator preset.
    pub band: [f64; 2],
}

impl Default for DataSection {
    fn default() -> Self {
        Self { kind: "exp".into(), lambda: -2.0, band: [0.0, 1.0] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct StationarySection {
    pub p: u32,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub nt: usize,
    pub sigma: f64,
}

impl Default for StationarySection {
    fn default() -> Self {
        Self { p: 2, t_end: 0.5, nt: 64, sigma: -2.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct BoostSection {
    pub c: f64,
    /// `inside` or `outside`; `null` infers it from `|c|`.
    pub regime: Option<String>,
    /// `plus` or `minus`; `null` infers it from the sign of `c`.
    pub sign: Option<String>,
    pub lambda: f64,
    pub dim: usize,
    /// Evaluation time for `boost` and `singsupp`.
    pub t: f64,
}

impl Default for BoostSection {
    fn default() -> Self {
        Self { c: 0.5, regime: None, sign: None, lambda: -2.0, dim: 1, t: 0.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticSection {
    pub window: f64,
    /// `null` means `window/4`.
    pub stride: Option<f64>,
    pub threshold: f64,
    /// `null` means `window/100`.
    pub eps: Option<f64>,
    pub range: [f64; 2],
    pub times: Vec<f64>,
}

impl Default for DiagnosticSection {
    fn default() -> Self {
        Self {
            window: 0.05,
            stride: None,
            threshold: 0.0,
            eps: None,
            range: [-2.0, 2.0],
            times: vec![-0.5, 0.0, 0.5],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RadialSection {
    pub p: u32,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub r_min: f64,
    pub r_max: f64,
    pub h: f64,
}

impl Default for RadialSection {
    fn default() -> Self {
        Self { p: 4, n: 3, samples: 100, seed: 20240607, r_min: 0.1, r_max: 10.0, h: 1e-3 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: String,
    /// Any of `csv` and `svg`.
    pub formats: Vec<String>,
    /// Also write the full space-time field of `solve`.
    pub field: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: "out".into(), formats: vec!["csv".into()], field: false }
    }
}

impl Config {
    pub fn wants_svg(&self) -> bool {
        self.output.formats.iter().any(|f| f == "svg")
    }

    pub fn wants_csv(&self) -> bool {
        self.output.formats.iter().any(|f| f == "csv")
    }

    /// SHA-256 of the canonical JSON form (object keys sorted).
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let text = serde_json::to_string(&value).expect("value serializes");
        hex(&Sha256::digest(text.as_bytes()))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Builds the effective configuration: defaults, then the file, then the
/// overrides, in increasing precedence. Every unknown key is reported at
/// once.
pub fn load(file: Option<&str>, overrides: &[(String, String)]) -> Result<Config, CliError> {
    let defaults = serde_json::to_value(Config::default()).expect("default config serializes");
    let mut merged = defaults.clone();
    let mut unknown = Vec::new();
    if let Some(text) = file {
        let doc: Value = serde_json::from_str(text)
            .map_err(|e| CliError::Validation(format!("config file is not valid JSON: {e}")))?;
        if !doc.is_object() {
            return Err(CliError::Validation("config file must be a JSON object".into()));
        }
        collect_unknown(&doc, &defaults, "", &mut unknown);
        merge(&mut merged, doc);
    }
    for (key, raw) in overrides {
        if lookup(&defaults, key).is_none() {
            unknown.push(key.clone());
            continue;
        }
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.clone()));
        set_path(&mut merged, key, value);
    }
    if !unknown.is_empty() {
        return Err(CliError::Validation(format!("unknown config keys: {}", unknown.join(", "))));
    }
    serde_path_to_error::deserialize(merged)
        .map_err(|e| CliError::Validation(format!("{}: {}", e.path(), e.inner())))
}

fn collect_unknown(doc: &Value, known: &Value, prefix: &str, out: &mut Vec<String>) {
    let (Value::Object(doc), Value::Object(known)) = (doc, known) else { return };
    for (k, v) in doc {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match known.get(k) {
            None => out.push(path),
            Some(kv) => collect_unknown(v, kv, &path, out),
        }
    }
}

fn merge(into: &mut Value, from: Value) {
    match (into, from) {
        (Value::Object(a), Value::Object(b)) => {
            for (k, v) in b {
                match a.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        a.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn lookup<'a>(v: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(v, |cur, k| cur.as_object()?.get(k))
}

fn set_path(root: &mut Value, path: &str, value: Value) {
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for k in &parts[..parts.len() - 1] {
        if !cur.is_object() {
            *cur = Value::Object(Map::new());
        }
        cur = cur.as_object_mut().unwrap().entry(k.to_string()).or_insert(Value::Object(Map::new()));
    }
    if let Value::Object(m) = cur {
        m.insert(parts[parts.len() - 1].to_string(), value);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn flags_win_over_the_file() {
        let file = r#"{"solver": {"tol": 1e-6, "p": 3}}"#;
        let cfg = load(Some(file), &ov(&[("solver.tol", "1e-9")])).unwrap();
        assert_eq!(cfg.solver.tol, 1e-9);
        assert_eq!(cfg.solver.p, 3);
        assert_eq!(cfg.solver.kappa, 1.0);
    }

    #[test]
    fn strings_need_no_quotes() {
        let cfg = load(None, &ov(&[("data.kind", "stationary"), ("output.directory", "runs/a")])).unwrap();
        assert_eq!(cfg.data.kind, "stationary");
        assert_eq!(cfg.output.directory, "runs/a");
    }

    #[test]
    fn every_unknown_key_is_listed() {
        let file = r#"{"solver": {"tolerance": 1}, "plotting": {}}"#;
        let err = load(Some(file), &ov(&[("grid.size", "3")])).unwrap_err().to_string();
        for key in ["solver.tolerance", "plotting", "grid.size"] {
            assert!(err.contains(key), "{err}");
        }
    }

    #[test]
    fn type_errors_name_the_key() {
        let err = load(None, &ov(&[("solver.nt", "\"many\"")])).unwrap_err().to_string();
        assert!(err.contains("solver.nt"), "{err}");
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = Config::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.solver.tol = 1e-7;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
