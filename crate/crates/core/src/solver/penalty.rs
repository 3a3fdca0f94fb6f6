use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Estimator family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Enet,
    Lasso,
    Alasso,
    Ridge,
    Ols,
}

impl Method {
    pub const COMPARED: [Method; 4] = [Method::Lasso, Method::Alasso, Method::Ridge, Method::Enet];

    pub fn name(self) -> &'static str {
        match self {
            Method::Enet => "enet",
            Method::Lasso => "lasso",
            Method::Alasso => "alasso",
            Method::Ridge => "ridge",
            Method::Ols => "ols",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "enet" => Ok(Method::Enet),
            "lasso" => Ok(Method::Lasso),
            "alasso" => Ok(Method::Alasso),
            "ridge" => Ok(Method::Ridge),
            "ols" => Ok(Method::Ols),
            other => Err(Error::Penalty(format!("unknown method `{other}`"))),
        }
    }
}

/// Estimator tag plus penalty levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub method: Method,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Per-coordinate ℓ₁ weights; adaptive lasso only.
    pub adaptive_weights: Option<Vec<f64>>,
    pub adaptive_gamma: f64,
}

impl PenaltySpec {
    fn base(method: Method, lambda1: f64, lambda2: f64) -> Self {
        PenaltySpec {
            method,
            lambda1,
            lambda2,
            adaptive_weights: None,
            adaptive_gamma: 1.0,
        }
    }

    pub fn enet(lambda1: f64, lambda2: f64) -> Self {
        Self::base(Method::Enet, lambda1, lambda2)
    }

    pub fn lasso(lambda1: f64) -> Self {
        Self::base(Method::Lasso, lambda1, 0.0)
    }

    pub fn ridge(lambda2: f64) -> Self {
        Self::base(Method::Ridge, 0.0, lambda2)
    }

    pub fn ols() -> Self {
        Self::base(Method::Ols, 0.0, 0.0)
    }

    pub fn alasso(lambda1: f64, weights: Vec<f64>, gamma: f64) -> Self {
        PenaltySpec {
            adaptive_weights: Some(weights),
            adaptive_gamma: gamma,
            ..Self::base(Method::Alasso, lambda1, 0.0)
        }
    }

    /// Checks the method/penalty invariants against a design with `p` columns.
    pub fn validate(&self, p: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Penalty(msg));
        if !(self.lambda1 >= 0.0 && self.lambda1.is_finite()) {
            return bad(format!("lambda1 must be finite and ≥ 0, got {}", self.lambda1));
        }
        if !(self.lambda2 >= 0.0 && self.lambda2.is_finite()) {
            return bad(format!("lambda2 must be finite and ≥ 0, got {}", self.lambda2));
        }
        match self.method {
            Method::Lasso if self.lambda2 != 0.0 => {
                return bad(format!("lasso requires lambda2 = 0, got {}", self.lambda2))
            }
            Method::Ridge if self.lambda1 != 0.0 => {
                return bad(format!("ridge requires lambda1 = 0, got {}", self.lambda1))
            }
            Method::Ols if self.lambda1 != 0.0 || self.lambda2 != 0.0 => {
                return bad("ols takes no penalty".into())
            }
            Method::Alasso => {
                if self.lambda2 != 0.0 {
                    return bad(format!("alasso requires lambda2 = 0, got {}", self.lambda2));
                }
                if !(self.adaptive_gamma > 0.0 && self.adaptive_gamma.is_finite()) {
                    return bad(format!("adaptive gamma must be positive, got {}", self.adaptive_gamma));
                }
                match &self.adaptive_weights {
                    None => return bad("alasso requires adaptive weights".into()),
                    Some(w) if w.len() != p => {
                        return Err(Error::Dimension(format!(
                            "{} adaptive weights for {p} columns",
                            w.len()
                        )))
                    }
                    Some(w) if w.iter().any(|v| !(v.is_finite() && *v > 0.0)) => {
                        return bad("adaptive weights must be finite and positive".into())
                    }
                    _ => {}
                }
            }
            _ => {}
        }
        if self.method != Method::Alasso && self.adaptive_weights.is_some() {
            return bad(format!("{} does not take adaptive weights", self.method));
        }
        Ok(())
    }

    /// ℓ₁ weight of coordinate `k` (1 except for the adaptive lasso).
    #[inline]
    pub fn weight(&self, k: usize) -> f64 {
        self.adaptive_weights.as_ref().map_or(1.0, |w| w[k])
    }

    /// Per-coordinate ℓ₁ levels `λ₁ · w_k`.
    pub fn l1_levels(&self, p: usize) -> Vec<f64> {
        (0..p).map(|k| self.lambda1 * self.weight(k)).collect()
    }

    /// Penalty value `λ₂‖β‖² + λ₁ Σ w_k |β_k|`.
    pub fn penalty(&self, beta: &[f64]) -> f64 {
        let ridge: f64 = beta.iter().map(|b| b * b).sum();
        let l1: f64 = beta
            .iter()
            .enumerate()
            .map(|(k, b)| self.weight(k) * b.abs())
            .sum();
        self.lambda2 * ridge + self.lambda1 * l1
    }

    /// The penalty level a path over this method varies: `λ₂` for ridge,
    /// `λ₁` otherwise.
    pub fn tuned_value(&self) -> f64 {
        if self.method == Method::Ridge {
            self.lambda2
        } else {
            self.lambda1
        }
    }

    pub fn with_tuned_value(&self, value: f64) -> Self {
        let mut s = self.clone();
        if s.method == Method::Ridge {
            s.lambda2 = value;
        } else {
            s.lambda1 = value;
        }
        s
    }
}
