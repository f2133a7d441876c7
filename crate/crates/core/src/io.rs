//! JSON file formats. Every loader validates against the schema shipped
//! in `schemas/` before building the structure.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use jsonschema::JSONSchema;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::Value;

use crate::category::{CategoryFile, FinCategory};
use crate::kripke::KripkeModel;
use crate::lattice::{FiniteLattice, LatticeFile};
use crate::modal::Bimodule;
use crate::order::Poset;
use crate::presheaf::{Presheaf, PresheafFile};
use crate::profunctor::{Profunctor, ProfunctorFile, TwoDimModel};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Poset,
    Lattice,
    Model,
    Category,
    Presheaf,
    Model2d,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Poset => "poset",
            Format::Lattice => "lattice",
            Format::Model => "model",
            Format::Category => "category",
            Format::Presheaf => "presheaf",
            Format::Model2d => "model2d",
        }
    }

    pub fn schema_text(self) -> &'static str {
        match self {
            Format::Poset => include_str!("../schemas/poset.schema.json"),
            Format::Lattice => include_str!("../schemas/lattice.schema.json"),
            Format::Model => include_str!("../schemas/model.schema.json"),
            Format::Category => include_str!("../schemas/category.schema.json"),
            Format::Presheaf => include_str!("../schemas/presheaf.schema.json"),
            Format::Model2d => include_str!("../schemas/model2d.schema.json"),
        }
    }

    pub fn validate(self, instance: &Value) -> Result<()> {
        let schema: Value = serde_json::from_str(self.schema_text()).expect("bundled schema is valid JSON");
        let compiled = JSONSchema::compile(&schema).expect("bundled schema compiles");
        let result = compiled.validate(instance);
        if let Err(mut errors) = result {
            let first = errors.next().expect("at least one error");
            let pointer = first.instance_path.to_string();
            return Err(Error::Schema {
                format: self.name().into(),
                pointer: if pointer.is_empty() { "/".into() } else { pointer },
                msg: first.to_string(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetFile {
    pub elements: Vec<String>,
    #[serde(default)]
    pub covers: Vec<(String, String)>,
}

impl PosetFile {
    pub fn build(&self) -> Result<Poset> {
        Poset::new(&self.elements, &self.covers)
    }

    pub fn of(p: &Poset) -> Self {
        PosetFile {
            elements: p.names().to_vec(),
            covers: p
                .covers()
                .into_iter()
                .map(|(a, b)| (p.name(a).to_string(), p.name(b).to_string()))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub frame: PosetFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel: Option<Vec<(String, String)>>,
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<String>>,
}

impl ModelFile {
    /// With `close`, the relation is replaced by the least bimodule containing it.
    pub fn build(&self, close: bool) -> Result<KripkeModel> {
        let frame = Arc::new(self.frame.build()?);
        let rel = match &self.rel {
            None => None,
            Some(pairs) => {
                let pairs: Vec<(&str, &str)> = pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
                Some(Bimodule::from_names(frame.clone(), frame.clone(), &pairs, close)?)
            }
        };
        let mut valuation = BTreeMap::new();
        for (var, worlds) in &self.valuation {
            let mut mask = 0;
            for w in worlds {
                mask |= 1 << frame.index(w).map_err(|_| Error::UnknownWorld(w.clone()))?;
            }
            valuation.insert(var.clone(), mask);
        }
        KripkeModel::new(frame, rel, valuation)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresheafDoc {
    pub base: CategoryFile,
    pub at: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub act: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model2dFile {
    pub base: CategoryFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel: Option<ProfunctorFile>,
    #[serde(default)]
    pub valuation: BTreeMap<String, PresheafFile>,
}

impl Model2dFile {
    pub fn build(&self) -> Result<TwoDimModel> {
        let base = Arc::new(FinCategory::from_file(&self.base)?);
        let rel = self
            .rel
            .as_ref()
            .map(|r| Profunctor::from_file(base.clone(), r))
            .transpose()?;
        let valuation = self
            .valuation
            .iter()
            .map(|(k, f)| Ok((k.clone(), Presheaf::from_file(base.clone(), f)?)))
            .collect::<Result<_>>()?;
        TwoDimModel::new(base, rel, valuation)
    }
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    parse_json(&text)
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Json {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })
}

/// Schema validation, then typed decoding.
pub fn decode<T: DeserializeOwned>(format: Format, value: Value) -> Result<T> {
    format.validate(&value)?;
    if let Some(base) = value.get("base") {
        if matches!(format, Format::Presheaf | Format::Model2d) {
            Format::Category.validate(base)?;
        }
    }
    serde_json::from_value(value).map_err(|e| Error::Schema {
        format: format.name().into(),
        pointer: "/".into(),
        msg: e.to_string(),
    })
}

pub fn load_poset(path: &Path) -> Result<Poset> {
    decode::<PosetFile>(Format::Poset, read_json(path)?)?.build()
}

pub fn load_lattice(path: &Path) -> Result<FiniteLattice> {
    FiniteLattice::from_file(&decode::<LatticeFile>(Format::Lattice, read_json(path)?)?)
}

pub fn load_model(path: &Path, close: bool) -> Result<KripkeModel> {
    decode::<ModelFile>(Format::Model, read_json(path)?)?.build(close)
}

pub fn load_category(path: &Path) -> Result<FinCategory> {
    FinCategory::from_file(&decode::<CategoryFile>(Format::Category, read_json(path)?)?)
}

pub fn load_presheaf(path: &Path) -> Result<Presheaf> {
    let doc: PresheafDoc = decode(Format::Presheaf, read_json(path)?)?;
    let base = Arc::new(FinCategory::from_file(&doc.base)?);
    Presheaf::from_file(
        base,
        &PresheafFile {
            at: doc.at,
            act: doc.act,
        },
    )
}

pub fn load_model2d(path: &Path) -> Result<TwoDimModel> {
    decode::<Model2dFile>(Format::Model2d, read_json(path)?)?.build()
}

/// Guesses the format of a document from its top-level keys.
pub fn sniff(value: &Value) -> Option<Format> {
    let has = |k: &str| value.get(k).is_some();
    if has("frame") {
        Some(Format::Model)
    } else if has("base") && has("valuation") {
        Some(Format::Model2d)
    } else if has("base") {
        Some(Format::Presheaf)
    } else if has("objects") {
        Some(Format::Category)
    } else if has("leq") {
        Some(Format::Lattice)
    } else if has("elements") {
        Some(Format::Poset)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn all_schemas_compile() {
        for f in [
            Format::Poset,
            Format::Lattice,
            Format::Model,
            Format::Category,
            Format::Presheaf,
            Format::Model2d,
        ] {
            let v: Value = serde_json::from_str(f.schema_text()).unwrap();
            assert!(JSONSchema::compile(&v).is_ok(), "{}", f.name());
        }
    }

    #[test]
    fn schema_errors_carry_a_pointer() {
        let bad = json!({"frame": {"elements": ["a", 3]}, "valuation": {}});
        match decode::<ModelFile>(Format::Model, bad) {
            Err(Error::Schema { pointer, .. }) => assert_eq!(pointer, "/frame/elements/1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn json_errors_carry_a_position() {
        match parse_json("{\n  \"a\": ,\n}") {
            Err(Error::Json { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn model_roundtrip_and_close() {
        let doc = json!({
            "frame": {"elements": ["a", "b"], "covers": [["a", "b"]]},
            "rel": [["b", "a"]],
            "valuation": {"p": ["b"]}
        });
        assert!(decode::<ModelFile>(Format::Model, doc.clone()).unwrap().build(false).is_err());
        let m = decode::<ModelFile>(Format::Model, doc).unwrap().build(true).unwrap();
        assert_eq!(m.rel().unwrap().pairs().len(), 4);
        assert_eq!(m.valuation()["p"], 0b10);
    }

    #[test]
    fn poset_file_roundtrip() {
        let p = Poset::chain(3);
        let q = PosetFile::of(&p).build().unwrap();
        assert!(p.isomorphism_to(&q).is_some());
    }

    #[test]
    fn sniffing() {
        assert_eq!(sniff(&json!({"frame": {}})), Some(Format::Model));
        assert_eq!(sniff(&json!({"objects": []})), Some(Format::Category));
        assert_eq!(sniff(&json!({"elements": [], "leq": []})), Some(Format::Lattice));
        assert_eq!(sniff(&json!(1)), None);
    }
}
