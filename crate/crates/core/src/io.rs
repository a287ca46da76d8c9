//! File formats.
//!
//! Iet: `{"lengths": ["1/3", "2/3"], "permutation": [2, 1]}`.
//!
//! Flow: `{"base": <iet>, "roof": ["1/1", "2/1"], "singular_points": ["1/2"],
//! "singularities": 1}` with one roof value per listed base interval;
//! `singular_points` and `singularities` may be omitted.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::closing::SuspensionFlow;
use crate::error::{Error, Result};
use crate::iet::{Iet, IetRepr};
use crate::rational::{serde_rational_vec, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowFile {
    pub base: IetRepr,
    #[serde(with = "serde_rational_vec")]
    pub roof: Vec<Rational>,
    #[serde(default, with = "serde_rational_vec")]
    pub singular_points: Vec<Rational>,
    #[serde(default)]
    pub singularities: u32,
}

impl FlowFile {
    pub fn into_flow(self) -> Result<SuspensionFlow> {
        SuspensionFlow::new(self.base.lengths, self.base.permutation, self.roof, self.singular_points, self.singularities)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

pub fn parse_iet(text: &str) -> Result<Iet> {
    let repr: IetRepr = serde_json::from_str(text).map_err(|e| Error::Parse(format!("iet JSON: {e}")))?;
    Iet::try_from(repr)
}

pub fn parse_flow(text: &str) -> Result<SuspensionFlow> {
    let file: FlowFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("flow JSON: {e}")))?;
    file.into_flow()
}

pub fn load_iet(path: &Path) -> Result<Iet> {
    parse_iet(&read(path)?)
}

pub fn load_flow(path: &Path) -> Result<SuspensionFlow> {
    parse_flow(&read(path)?)
}
