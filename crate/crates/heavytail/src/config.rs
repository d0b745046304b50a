//! Model and configuration files.
//!
//! A model file is JSON: either a factor model
//! `{"factors": [{"kind": "pareto", "alpha": 1.5, "scale": 1.0}, ...]}` or a
//! Gaussian index model
//! `{"gaussian_index": {"loadings": [...], "idio_sigmas": [...]}}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::{FactorDistribution, FactorModel};
use crate::error::{Error, Result};
use crate::estimators::GaussianFactorModel;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianIndexSpec {
    pub loadings: Vec<f64>,
    #[serde(default)]
    pub idio_sigmas: Vec<f64>,
}

/// On-disk model description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factors: Vec<FactorDistribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaussian_index: Option<GaussianIndexSpec>,
}

/// A parsed model, ready for estimation.
#[derive(Debug, Clone)]
pub enum Model {
    Factors(FactorModel),
    GaussianIndex(GaussianFactorModel),
}

impl ModelFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))
    }

    pub fn into_model(self) -> Result<Model> {
        match (self.factors.is_empty(), self.gaussian_index) {
            (false, None) => Ok(Model::Factors(FactorModel::new(self.factors)?)),
            (true, Some(g)) => Ok(Model::GaussianIndex(GaussianFactorModel::new(
                g.loadings,
                g.idio_sigmas,
            )?)),
            (true, None) => Err(Error::Malformed(
                "model file must contain either \"factors\" or \"gaussian_index\"".into(),
            )),
            (false, Some(_)) => Err(Error::Malformed(
                "model file cannot contain both \"factors\" and \"gaussian_index\"".into(),
            )),
        }
    }
}

pub fn load_factor_model(path: &Path) -> Result<FactorModel> {
    match ModelFile::load(path)?.into_model()? {
        Model::Factors(m) => Ok(m),
        Model::GaussianIndex(_) => Err(Error::Malformed(
            "expected a factor model, found a Gaussian index model".into(),
        )),
    }
}
