//! Design parameters: which property a matrix targets and how it is drawn.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::design;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Disjunct,
    Separable,
    SemiDisjunct,
}

impl Property {
    pub fn as_str(self) -> &'static str {
        match self {
            Property::Disjunct => "disjunct",
            Property::Separable => "separable",
            Property::SemiDisjunct => "semi-disjunct",
        }
    }

    /// Smallest defect bound the property's formulas admit.
    pub fn min_d(self) -> usize {
        match self {
            Property::Disjunct => 1,
            Property::Separable | Property::SemiDisjunct => 2,
        }
    }

    pub(crate) fn check_d(self, d: usize) -> Result<()> {
        if d < self.min_d() {
            return Err(Error::domain(format!(
                "d must be ≥ {} for {}",
                self.min_d(),
                self.as_str()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "disjunct" => Ok(Property::Disjunct),
            "separable" => Ok(Property::Separable),
            "semi" | "semidisjunct" | "semi-disjunct" => Ok(Property::SemiDisjunct),
            other => Err(Error::domain(format!("unknown property `{other}`"))),
        }
    }
}

/// Random matrix model. RID cells are zero with probability `zero_prob`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    Rid { zero_prob: f64 },
    RrSd { row_weight: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Rid,
    RrSd,
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rid" => Ok(ModelKind::Rid),
            "rrsd" => Ok(ModelKind::RrSd),
            other => Err(Error::domain(format!("unknown model `{other}`"))),
        }
    }
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Rid { .. } => ModelKind::Rid,
            Model::RrSd { .. } => ModelKind::RrSd,
        }
    }
}

/// A complete design: problem size, target property, model and test count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub n: usize,
    pub d: usize,
    pub delta: f64,
    pub property: Property,
    pub model: Model,
    pub m: usize,
}

impl DesignSpec {
    /// The design the closed forms prescribe: `m` from the property's test
    /// count and the optimal zero probability. For RrSD the row weight is
    /// `round(n * (1 - p))`, i.e. `n / d` for the separable properties.
    pub fn new(
        n: usize,
        d: usize,
        delta: f64,
        property: Property,
        kind: ModelKind,
    ) -> Result<Self> {
        let m = match property {
            Property::Disjunct => design::disjunct_test_count(n, d, delta)?,
            Property::Separable => design::separable_test_count(n, d, delta)?,
            Property::SemiDisjunct => design::semidisjunct_test_count(n, d, delta)?,
        };
        let zero_prob = design::optimal_zero_prob(property, d)?;
        let model = match kind {
            ModelKind::Rid => Model::Rid { zero_prob },
            ModelKind::RrSd => Model::RrSd {
                row_weight: ((n as f64 * (1.0 - zero_prob)).round() as usize).clamp(1, n),
            },
        };
        Ok(DesignSpec {
            n,
            d,
            delta,
            property,
            model,
            m,
        })
    }

    /// A design with caller-chosen model parameters and test count.
    pub fn custom(
        n: usize,
        d: usize,
        delta: f64,
        property: Property,
        model: Model,
        m: usize,
    ) -> Result<Self> {
        let spec = DesignSpec {
            n,
            d,
            delta,
            property,
            model,
            m,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::domain("n and m must be positive"));
        }
        self.property.check_d(self.d)?;
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::domain("delta must lie in (0, 1)"));
        }
        match self.model {
            Model::Rid { zero_prob } if !(zero_prob > 0.0 && zero_prob < 1.0) => {
                Err(Error::domain("zero probability must lie in (0, 1)"))
            }
            Model::RrSd { row_weight } if row_weight == 0 || row_weight > self.n => Err(
                Error::domain(format!("row weight must lie in 1..={}", self.n)),
            ),
            _ => Ok(()),
        }
    }

    /// Coefficient of `ln n` in this property's test count.
    pub fn ln_n_coefficient(&self) -> Result<f64> {
        design::ln_n_coefficient(self.property, self.d)
    }
}
