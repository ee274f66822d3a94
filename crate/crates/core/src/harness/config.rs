//! Experiment configuration: a single JSON document with a validating loader.

use crate::error::{Error, Result};
use crate::operators::shift::{ShiftSpec, SignatureMap};
use serde::{Deserialize, Serialize};

/// Weight construction in config form.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum WeightSpecJson {
    Constant { value: f64 },
    Power { alpha: f64, center: Vec<f64> },
    Samples { values: Vec<f64> },
}

impl WeightSpecJson {
    pub fn to_spec(&self) -> crate::weights::WeightSpec {
        match self {
            WeightSpecJson::Constant { value } => crate::weights::WeightSpec::Constant(*value),
            WeightSpecJson::Power { alpha, center } => {
                crate::weights::WeightSpec::Power { alpha: *alpha, center: center.clone() }
            }
            WeightSpecJson::Samples { values } => crate::weights::WeightSpec::Samples(values.clone()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightPairSpec {
    pub id: String,
    pub mu: WeightSpecJson,
    pub lambda: WeightSpecJson,
}

/// Symbol family selection.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SymbolFamilySpec {
    /// 4 Haar atoms at mixed levels, 2 random Haar polynomials with
    /// coefficient decay 2^{-k}, 1 smooth bump, 1 mollified indicator.
    Default,
    /// Random Haar polynomials only, coefficients `2^{-k}·U[-1,1]` over
    /// levels `0..=max_level`.
    HaarPolynomial { count: usize, max_level: usize },
    /// The smooth periodic bump only.
    Bump,
    /// The mollified box indicator only.
    MollifiedIndicator { eps: f64 },
    /// Explicit cell samples per symbol (resolution-specific).
    Custom { items: Vec<CustomSymbol> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CustomSymbol {
    pub id: String,
    pub samples: Vec<f64>,
}

fn default_enlargement() -> f64 {
    3.0
}

fn default_riesz_j() -> usize {
    1
}

fn default_workers() -> usize {
    1
}

fn default_svd_cap() -> usize {
    4
}

fn default_critical_level() -> usize {
    5
}

fn default_q_list() -> Vec<QValue> {
    vec![QValue(f64::INFINITY)]
}

/// A Lorentz second exponent; `"inf"` in JSON for `∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QValue(pub f64);

impl Serialize for QValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for QValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match &v {
            serde_json::Value::Number(x) => Ok(QValue(x.as_f64().unwrap_or(f64::NAN))),
            serde_json::Value::String(s) if s == "inf" => Ok(QValue(f64::INFINITY)),
            _ => Err(serde::de::Error::custom("q must be a number or \"inf\"")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    /// Dyadic depths for the equivalence/weak/wnu cells.
    pub levels: Vec<usize>,
    pub weights: Vec<WeightPairSpec>,
    pub symbols: SymbolFamilySpec,
    pub p_list: Vec<f64>,
    #[serde(default = "default_q_list")]
    pub q_list: Vec<QValue>,
    #[serde(default = "default_enlargement")]
    pub enlargement: f64,
    #[serde(default = "default_riesz_j")]
    pub riesz_j: usize,
    #[serde(default)]
    pub shift: Option<ShiftSpec>,
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Largest depth at which dense spectra are computed.
    #[serde(default = "default_svd_cap")]
    pub svd_level_cap: usize,
    /// Depth of the critical-index run (norm-only, so it may exceed the cap).
    #[serde(default = "default_critical_level")]
    pub critical_level: usize,
    /// Mollification scale applied to the critical-run symbol, if any.
    #[serde(default)]
    pub critical_mollify_eps: Option<f64>,
    #[serde(default)]
    pub out_dir: Option<String>,
}

impl ExperimentConfig {
    /// Defaults used by the CLI when no config file is given: the three
    /// default weight pairs, the 8-symbol family, p = 4 at n = 2.
    pub fn default_for(n: usize, seed: u64) -> ExperimentConfig {
        let center: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 0.25 } else { 1.0 / 3.0 }).collect();
        // power exponents must stay inside (-n, n)
        let alpha3 = if n >= 2 { 1.0 } else { 0.5 };
        ExperimentConfig {
            n,
            levels: vec![2, 3, 4],
            weights: vec![
                WeightPairSpec {
                    id: "unit".into(),
                    mu: WeightSpecJson::Constant { value: 1.0 },
                    lambda: WeightSpecJson::Constant { value: 1.0 },
                },
                WeightPairSpec {
                    id: "bloom-half".into(),
                    mu: WeightSpecJson::Power { alpha: 0.5, center: center.clone() },
                    lambda: WeightSpecJson::Power { alpha: -0.5, center: center.clone() },
                },
                WeightPairSpec {
                    id: "mu-linear".into(),
                    mu: WeightSpecJson::Power { alpha: alpha3, center },
                    lambda: WeightSpecJson::Constant { value: 1.0 },
                },
            ],
            symbols: SymbolFamilySpec::Default,
            p_list: vec![4.0],
            q_list: default_q_list(),
            enlargement: default_enlargement(),
            riesz_j: default_riesz_j(),
            shift: None,
            seed,
            workers: default_workers(),
            svd_level_cap: default_svd_cap(),
            critical_level: default_critical_level(),
            critical_mollify_eps: None,
            out_dir: None,
        }
    }

    pub fn shift_spec(&self) -> ShiftSpec {
        self.shift.clone().unwrap_or_else(|| ShiftSpec {
            child_offset: vec![0; self.n],
            signature_map: SignatureMap::Identity,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be >= 1".into()));
        }
        if self.n == 1 {
            // the one-dimensional configuration only supports the Hilbert
            // smoke suite; Riesz experiments require n >= 2
        }
        if self.levels.is_empty() {
            return Err(Error::Config("levels list must be nonempty".into()));
        }
        if self.levels.iter().any(|&l| l == 0 || l > 16) {
            return Err(Error::Config("levels must lie in 1..=16".into()));
        }
        if self.p_list.is_empty() || self.p_list.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::Config("p_list must contain positive exponents".into()));
        }
        if self.weights.is_empty() {
            return Err(Error::Config("at least one weight pair is required".into()));
        }
        if !(self.enlargement >= 1.0) {
            return Err(Error::Config("enlargement factor must be >= 1".into()));
        }
        if self.riesz_j == 0 || self.riesz_j > self.n {
            return Err(Error::Config(format!(
                "riesz_j = {} out of range for n = {}",
                self.riesz_j, self.n
            )));
        }
        if let Some(s) = &self.shift {
            if s.child_offset.len() != self.n {
                return Err(Error::Config("shift child_offset length must equal n".into()));
            }
        }
        let mut ids: Vec<&str> = self.weights.iter().map(|w| w.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.weights.len() {
            return Err(Error::Config("weight pair ids must be unique".into()));
        }
        Ok(())
    }

    /// Exponents valid for the equivalence experiment (`p > n`).
    pub fn equivalence_exponents(&self) -> Result<Vec<f64>> {
        let ps: Vec<f64> =
            self.p_list.iter().copied().filter(|&p| p > self.n as f64).collect();
        if ps.is_empty() {
            return Err(Error::Config(format!(
                "equivalence requires p > n = {}; got {:?} (p = n is the critical run)",
                self.n, self.p_list
            )));
        }
        Ok(ps)
    }
}
