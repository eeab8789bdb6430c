//! JSON descriptors for operators, problems, and resolvent families.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::Path;

use fracdiff_core::resolvent::ResolventFamily;
use fracdiff_core::{LinOperator, Matrix, VecSeq, WeightKind};

/// Operator descriptor: `{"type": "dense" | "diagonal" | "laplacian1d", ...}`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OperatorConfig {
    Dense { entries: Vec<Vec<f64>> },
    Diagonal { multipliers: Vec<f64>, #[serde(default)] grid: Option<Vec<f64>> },
    Laplacian1d { a: f64, b: f64, d: usize },
}

impl OperatorConfig {
    pub fn build(&self) -> Result<LinOperator> {
        Ok(match self {
            OperatorConfig::Dense { entries } => {
                let d = entries.len();
                let mut flat = Vec::with_capacity(d * d);
                for row in entries {
                    anyhow::ensure!(row.len() == d, "dense operator must be square");
                    flat.extend_from_slice(row);
                }
                LinOperator::Dense(Matrix::from_rows(d, flat)?)
            }
            OperatorConfig::Diagonal { multipliers, grid } => {
                if let Some(g) = grid {
                    anyhow::ensure!(g.len() == multipliers.len(), "grid length must match multipliers");
                }
                LinOperator::Diagonal { multipliers: multipliers.clone(), grid: grid.clone() }
            }
            OperatorConfig::Laplacian1d { a, b, d } => LinOperator::laplacian(*a, *b, *d)?,
        })
    }
}

/// Forcing descriptor. `heat` is the built-in saturating nonlinearity
/// `f(n, v) = sin(n)/(1+n³) · v/(1+‖v‖)` with declared Lipschitz constant 2,
/// optionally plus a state-independent source of the given amplitude.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ForcingConfig {
    None,
    Sequence { values: Vec<Vec<f64>> },
    Heat {
        #[serde(default)]
        source_amplitude: f64,
    },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightConfig {
    NFactorial,
    Factorial,
    Geometric { ratio: f64 },
    Custom { values: Vec<f64> },
}

impl WeightConfig {
    pub fn kind(&self) -> WeightKind {
        match self {
            WeightConfig::NFactorial => WeightKind::NFactorial,
            WeightConfig::Factorial => WeightKind::Factorial,
            WeightConfig::Geometric { ratio } => WeightKind::Geometric(*ratio),
            WeightConfig::Custom { values } => WeightKind::Custom(values.clone()),
        }
    }
}

fn default_weight() -> WeightConfig {
    WeightConfig::NFactorial
}

fn default_method() -> String {
    "auto".into()
}

/// A full problem file.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct ProblemConfig {
    pub alpha: f64,
    pub operator: OperatorConfig,
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
    pub forcing: ForcingConfig,
    pub horizon: usize,
    #[serde(default = "default_weight")]
    pub weight: WeightConfig,
    #[serde(default = "default_method")]
    pub method: String,
}

impl ProblemConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let cfg: ProblemConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        if !(cfg.alpha > 1.0 && cfg.alpha <= 2.0) {
            bail!("alpha must satisfy 1 < alpha <= 2, got {}", cfg.alpha);
        }
        if cfg.horizon < 4 {
            bail!("horizon must be at least 4, got {}", cfg.horizon);
        }
        Ok(cfg)
    }

    pub fn forcing_sequence(&self, dim: usize) -> Result<Option<VecSeq>> {
        match &self.forcing {
            ForcingConfig::Sequence { values } => {
                anyhow::ensure!(
                    values.len() == self.horizon - 1,
                    "forcing sequence must cover indices 0..={} (got {} states)",
                    self.horizon - 2,
                    values.len()
                );
                let mut flat = Vec::with_capacity(dim * values.len());
                for (i, state) in values.iter().enumerate() {
                    anyhow::ensure!(state.len() == dim, "forcing state {i} has wrong dimension");
                    flat.extend_from_slice(state);
                }
                Ok(Some(VecSeq::from_flat(dim, flat)?))
            }
            _ => Ok(None),
        }
    }
}

/// Serializes a resolvent family to its interchange form:
/// `{alpha, method, n, d, matrices, sup_norm}` with row-major matrices.
pub fn family_to_json(fam: &ResolventFamily) -> serde_json::Value {
    let matrices: Vec<Vec<f64>> =
        (0..=fam.horizon()).map(|n| fam.matrix(n).data().to_vec()).collect();
    json!({
        "alpha": fam.order().alpha(),
        "method": fam.method().name(),
        "n": fam.horizon(),
        "d": fam.dim(),
        "matrices": matrices,
        "sup_norm": fam.sup_norm(),
        "cancellation_from": fam.cancellation_from(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operator_descriptors_parse() {
        let dense: OperatorConfig =
            serde_json::from_str(r#"{"type":"dense","entries":[[0.1,0.2],[0.0,0.4]]}"#).unwrap();
        assert_eq!(dense.build().unwrap().dim(), 2);
        let diag: OperatorConfig =
            serde_json::from_str(r#"{"type":"diagonal","multipliers":[0.5,0.25,0.1]}"#).unwrap();
        assert_eq!(diag.build().unwrap().dim(), 3);
        let lap: OperatorConfig =
            serde_json::from_str(r#"{"type":"laplacian1d","a":0.0,"b":3.14159,"d":12}"#).unwrap();
        assert_eq!(lap.build().unwrap().dim(), 12);
    }

    #[test]
    fn problem_roundtrip() {
        let cfg = ProblemConfig {
            alpha: 1.5,
            operator: OperatorConfig::Diagonal { multipliers: vec![0.3, 0.2], grid: None },
            u0: vec![1.0, 0.0],
            u1: vec![0.0, 1.0],
            forcing: ForcingConfig::None,
            horizon: 12,
            weight: WeightConfig::NFactorial,
            method: "auto".into(),
        };
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ProblemConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.alpha, cfg.alpha);
        assert_eq!(back.horizon, cfg.horizon);
    }
}
