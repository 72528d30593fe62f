//! Self-describing JSON document for any fitted model.

use serde::{Deserialize, Serialize};

use crate::baselines::{LinearModel, SvrModel};
use crate::cox::CoxModel;
use crate::eval::ModelKind;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelDocument {
    Cox(CoxModel),
    Ols(LinearModel),
    Svr(SvrModel),
}

impl ModelDocument {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelDocument::Cox(_) => ModelKind::Cox,
            ModelDocument::Ols(_) => ModelKind::Ols,
            ModelDocument::Svr(_) => ModelKind::Svr,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
