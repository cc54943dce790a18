//! TOML model files.
//!
//! ```toml
//! schema_version = 1
//! name = "classical_bit"
//!
//! [[substrate]]
//! name = "bit"
//! states = ["0", "1"]
//!
//! [[substrate]]
//! name = "bit2"
//! components = ["bit", "bit"]      # Cartesian; states are "0,0", "0,1", …
//!
//! [[dynamics]]
//! substrate = "bit"
//! generator = "all_functions"      # or "identity", "clifford1", "clifford2"
//!
//! [[dynamics]]
//! substrate = "bit"
//! maps = [["1", "0"]]              # image of each state, in declaration order
//!
//! [[attribute]]
//! name = "zero"
//! substrate = "bit"
//! states = ["0"]
//!
//! [[variable]]
//! name = "B"
//! attributes = ["zero", "one"]
//! blank = "zero"
//! expect = { information_variable = true }
//! ```
//!
//! Built-in substrates: `builtin = "stabilizer_qubit"` (states `z0 z1 x+ x-
//! y+ y-`) and `builtin = "stabilizer_pair"` with two stabilizer-qubit
//! components (the 60 two-qubit stabilizer states).

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::constructor::stabilizer::{add_clifford_dynamics, add_stabilizer_pair, add_stabilizer_qubit};
use crate::constructor::{Dynamics, FiniteTheoryModel, ModelError, SubstrateId};

pub const SCHEMA_VERSION: u32 = 1;

/// Models shipped with the crate, by name.
pub const BUNDLED: [(&str, &str); 3] = [
    ("classical_bit", include_str!("../models/classical_bit.toml")),
    ("classical_trit", include_str!("../models/classical_trit.toml")),
    ("stabilizer_qubit", include_str!("../models/stabilizer_qubit.toml")),
];

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("parse error: unsupported schema_version {0} (this build reads version {SCHEMA_VERSION})")]
    Schema(u32),
    #[error("semantic error: {0}")]
    Semantic(#[from] ModelError),
    #[error("semantic error: {0}")]
    Invalid(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    schema_version: u32,
    name: String,
    #[serde(default)]
    description: Option<String>,
    #[serde(default)]
    substrate: Vec<RawSubstrate>,
    #[serde(default)]
    dynamics: Vec<RawDynamics>,
    #[serde(default)]
    attribute: Vec<RawAttribute>,
    #[serde(default)]
    variable: Vec<RawVariable>,
    #[serde(default)]
    superinformation: Vec<SuperinformationDecl>,
    #[serde(default)]
    expect: ModelExpectations,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubstrate {
    name: String,
    states: Option<Vec<String>>,
    components: Option<Vec<String>>,
    builtin: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDynamics {
    substrate: String,
    generator: Option<String>,
    maps: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAttribute {
    name: String,
    substrate: String,
    states: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVariable {
    name: String,
    attributes: Vec<String>,
    blank: Option<String>,
    #[serde(default)]
    expect: VariableExpectations,
}

/// Verdicts a model file claims for a variable; unset fields are only
/// reported.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableExpectations {
    pub information_variable: Option<bool>,
    pub distinguishable: Option<bool>,
    pub observable: Option<bool>,
    pub measurement: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelExpectations {
    pub information_medium: Option<bool>,
    pub superinformation: Option<bool>,
}

/// A pair of variables to test as a superinformation medium.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperinformationDecl {
    pub x: String,
    pub z: String,
    pub expect: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct ModelFile {
    pub model: FiniteTheoryModel,
    pub description: Option<String>,
    /// Per declared variable, in declaration order.
    pub variable_expectations: Vec<(String, VariableExpectations)>,
    pub superinformation: Vec<SuperinformationDecl>,
    pub expect: ModelExpectations,
}

pub fn parse_model(text: &str) -> Result<ModelFile, ModelFileError> {
    let raw: RawModel =
        toml::from_str(text).map_err(|e| ModelFileError::Parse(e.to_string().trim_end().to_string()))?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(ModelFileError::Schema(raw.schema_version));
    }
    let mut model = FiniteTheoryModel::new(raw.name);

    for s in &raw.substrate {
        add_substrate(&mut model, s)?;
    }
    for d in &raw.dynamics {
        let sub = model.substrate_id(&d.substrate)?;
        match (&d.generator, &d.maps) {
            (Some(g), None) => add_generator(&mut model, sub, g)?,
            (None, Some(maps)) => {
                let maps = maps
                    .iter()
                    .map(|m| {
                        m.iter().map(|s| model.state_index(sub, s).map(|i| i as u16)).collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                model.add_dynamics(sub, Dynamics::Maps(maps))?;
            }
            _ => {
                return Err(ModelFileError::Invalid(format!(
                    "dynamics on {:?} needs exactly one of `generator` or `maps`",
                    d.substrate
                )))
            }
        }
    }
    for a in &raw.attribute {
        let sub = model.substrate_id(&a.substrate)?;
        let states: Vec<&str> = a.states.iter().map(String::as_str).collect();
        model.add_basis_attribute(sub, &a.name, &states)?;
    }
    let mut variable_expectations = Vec::new();
    for v in &raw.variable {
        let attrs: Vec<&str> = v.attributes.iter().map(String::as_str).collect();
        model.add_variable(&v.name, &attrs, v.blank.as_deref())?;
        variable_expectations.push((v.name.clone(), v.expect.clone()));
    }
    for pair in &raw.superinformation {
        for name in [&pair.x, &pair.z] {
            if model.variable(name).is_none() {
                return Err(ModelFileError::Invalid(format!(
                    "superinformation pair names undeclared variable {name:?}"
                )));
            }
        }
    }
    Ok(ModelFile {
        model,
        description: raw.description,
        variable_expectations,
        superinformation: raw.superinformation,
        expect: raw.expect,
    })
}

fn add_substrate(model: &mut FiniteTheoryModel, s: &RawSubstrate) -> Result<SubstrateId, ModelFileError> {
    let components = |model: &FiniteTheoryModel| -> Result<Vec<SubstrateId>, ModelFileError> {
        let names = s
            .components
            .as_ref()
            .ok_or_else(|| ModelFileError::Invalid(format!("substrate {:?} needs `components`", s.name)))?;
        Ok(names.iter().map(|c| model.substrate_id(c)).collect::<Result<_, _>>()?)
    };
    match (s.builtin.as_deref(), &s.states, &s.components) {
        (None, Some(states), None) => {
            let states: Vec<&str> = states.iter().map(String::as_str).collect();
            Ok(model.add_substrate(&s.name, &states)?)
        }
        (None, None, Some(_)) => {
            let comps = components(model)?;
            Ok(model.add_cartesian(&s.name, &comps)?)
        }
        (Some("stabilizer_qubit"), None, None) => Ok(add_stabilizer_qubit(model, &s.name)?),
        (Some("stabilizer_pair"), None, Some(_)) => match components(model)?.as_slice() {
            [a, b] => Ok(add_stabilizer_pair(model, &s.name, *a, *b)?),
            _ => Err(ModelFileError::Invalid(format!("stabilizer_pair {:?} needs two components", s.name))),
        },
        (Some(other), _, _) if !matches!(other, "stabilizer_qubit" | "stabilizer_pair") => {
            Err(ModelFileError::Invalid(format!("unknown builtin {other:?} for substrate {:?}", s.name)))
        }
        _ => Err(ModelFileError::Invalid(format!(
            "substrate {:?} needs exactly one of `states`, `components`, or `builtin` (stabilizer_pair also takes `components`)",
            s.name
        ))),
    }
}

fn add_generator(model: &mut FiniteTheoryModel, sub: SubstrateId, generator: &str) -> Result<(), ModelFileError> {
    match generator {
        "all_functions" => model.add_dynamics(sub, Dynamics::AllFunctions)?,
        "identity" => {
            let n = model.substrate(sub).num_states() as u16;
            model.add_dynamics(sub, Dynamics::Maps(vec![(0..n).collect()]))?
        }
        "clifford1" => add_clifford_dynamics(model, sub, 1)?,
        "clifford2" => add_clifford_dynamics(model, sub, 2)?,
        other => {
            return Err(ModelFileError::Invalid(format!(
                "unknown generator {other:?} (expected all_functions, identity, clifford1 or clifford2)"
            )))
        }
    }
    Ok(())
}

/// Reads a model file, or a bundled model if `source` names one and no such
/// file exists.
pub fn load_model(source: &str) -> Result<ModelFile, ModelFileError> {
    let path = Path::new(source);
    if !path.exists() {
        if let Some((_, text)) = BUNDLED.iter().find(|(name, _)| *name == source) {
            return parse_model(text);
        }
    }
    let text = std::fs::read_to_string(path)
        .map_err(|source_err| ModelFileError::Io { path: source.to_string(), source: source_err })?;
    parse_model(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_models_parse() {
        for (name, text) in BUNDLED {
            let m = parse_model(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(m.model.name, name);
        }
    }

    #[test]
    fn unknown_keys_rejected_with_location() {
        let text =
            "schema_version = 1\nname = \"m\"\n\n[[substrate]]\nname = \"s\"\nstates = [\"0\"]\ncolour = \"red\"\n";
        let err = parse_model(text).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, ModelFileError::Parse(_)));
        assert!(msg.contains("line 7") && msg.contains("colour"), "{msg}");
    }

    #[test]
    fn undeclared_state_is_a_semantic_error() {
        let text = r#"
schema_version = 1
name = "m"
[[substrate]]
name = "s"
states = ["0", "1"]
[[attribute]]
name = "a"
substrate = "s"
states = ["2"]
"#;
        let err = parse_model(text).unwrap_err();
        assert!(matches!(err, ModelFileError::Semantic(ModelError::UnknownState { .. })), "{err}");
        assert!(err.to_string().starts_with("semantic error"));
    }

    #[test]
    fn overlapping_attributes_cite_disjointness() {
        let text = r#"
schema_version = 1
name = "m"
[[substrate]]
name = "s"
states = ["0", "1"]
[[attribute]]
name = "a"
substrate = "s"
states = ["0", "1"]
[[attribute]]
name = "b"
substrate = "s"
states = ["1"]
[[variable]]
name = "v"
attributes = ["a", "b"]
"#;
        let err = parse_model(text).unwrap_err().to_string();
        assert!(err.contains("overlap") && err.contains("disjoint"), "{err}");
    }

    #[test]
    fn schema_version_checked() {
        assert!(matches!(parse_model("schema_version = 2\nname = \"m\"\n"), Err(ModelFileError::Schema(2))));
    }

    #[test]
    fn explicit_maps_and_cartesian_labels() {
        let text = r#"
schema_version = 1
name = "m"
[[substrate]]
name = "s"
states = ["0", "1"]
[[substrate]]
name = "s2"
components = ["s", "s"]
[[dynamics]]
substrate = "s"
maps = [["1", "0"]]
[[dynamics]]
substrate = "s2"
maps = [["0,0", "0,1", "1,1", "1,0"]]
"#;
        let m = parse_model(text).unwrap().model;
        let s2 = m.substrate_id("s2").unwrap();
        assert_eq!(m.dynamics(s2), &[Dynamics::Maps(vec![vec![0, 1, 3, 2]])]);
    }

    #[test]
    fn generator_must_fit_substrate() {
        let text = r#"
schema_version = 1
name = "m"
[[substrate]]
name = "s"
states = ["0", "1"]
[[dynamics]]
substrate = "s"
generator = "clifford1"
"#;
        assert!(matches!(parse_model(text), Err(ModelFileError::Semantic(ModelError::BadGenerator { .. }))));
    }

    #[test]
    fn bundled_names_resolve() {
        assert!(load_model("stabilizer_qubit").is_ok());
        assert!(matches!(load_model("no/such/file.toml"), Err(ModelFileError::Io { .. })));
    }
}
