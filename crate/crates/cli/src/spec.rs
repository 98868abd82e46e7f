//! Graphon specifications given inline as JSON or as a path to a JSON file.

use std::fs;
use std::path::Path;

use graphon_lab::graphon::family_generate;
use graphon_lab::{FamilySpec, SbmParams, StepGraphon};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// One of
///
/// * `{"sbm": {"k1": .5, "p1": .6, "p2": .4, "q": .2}}`
/// * `{"family": {"base": {"k1": .5, ...}, "tau": .05}}`
/// * `{"step": {"weights": [...], "densities": [[...], ...]}}`
/// * `{"constant": 1.0}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphonSpec {
    Sbm(SbmParams),
    Family(FamilySpec),
    Step(StepGraphon),
    Constant(f64),
}

impl GraphonSpec {
    pub fn to_graphon(&self) -> Result<StepGraphon> {
        let ctx = "invalid graphon";
        match self {
            GraphonSpec::Sbm(p) => p.to_graphon().map_err(CliError::model(ctx)),
            GraphonSpec::Family(f) => family_generate(f)
                .and_then(|p| p.to_graphon())
                .map_err(CliError::model(ctx)),
            GraphonSpec::Step(w) => Ok(w.clone()),
            GraphonSpec::Constant(c) => StepGraphon::constant(*c).map_err(CliError::model(ctx)),
        }
    }
}

/// Parses `arg` as JSON when it starts with `{`, otherwise reads it as a
/// file path. Relative paths resolve against `base`.
pub fn parse_spec(arg: &str, base: Option<&Path>) -> Result<GraphonSpec> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') {
        return serde_json::from_str(trimmed).map_err(|e| CliError::config(format!("inline graphon spec: {e}")));
    }
    let path = match base {
        Some(dir) => dir.join(arg),
        None => Path::new(arg).to_path_buf(),
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// Either an inline spec object or a string naming a file, as used inside
/// experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpecRef {
    Inline(GraphonSpec),
    File(String),
}

impl SpecRef {
    pub fn resolve(&self, base: Option<&Path>) -> Result<GraphonSpec> {
        match self {
            SpecRef::Inline(s) => Ok(s.clone()),
            SpecRef::File(p) => parse_spec(p, base),
        }
    }
}
