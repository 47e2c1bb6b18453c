use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{parse_model, ModelDef, ParseError};

/// String map that serializes in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OrderedMap(pub Vec<(String, String)>);

impl OrderedMap {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

impl Serialize for OrderedMap {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for OrderedMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = OrderedMap;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map of strings")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut a: A) -> Result<OrderedMap, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = a.next_entry::<String, String>()? {
                    out.push((k, v));
                }
                Ok(OrderedMap(out))
            }
        }
        d.deserialize_map(V)
    }
}

/// Serializable form of a model; expressions are `.psm` infix strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub name: String,
    pub states: Vec<String>,
    pub params: Vec<String>,
    #[serde(default)]
    pub inputs: Vec<String>,
    pub dynamics: OrderedMap,
    pub outputs: OrderedMap,
}

pub fn export_model(m: &ModelDef) -> ModelDocument {
    let names = |ids: &[crate::sym::SymbolId]| ids.iter().map(|&s| String::from(m.table.name(s))).collect();
    ModelDocument {
        name: m.name.clone(),
        states: names(&m.states),
        params: names(&m.params),
        inputs: names(&m.inputs),
        dynamics: OrderedMap(
            m.states.iter().zip(&m.dynamics).map(|(&s, f)| (String::from(m.table.name(s)), m.expr_text(f))).collect(),
        ),
        outputs: OrderedMap(m.outputs.iter().map(|(n, h)| (n.clone(), m.expr_text(h))).collect()),
    }
}

impl ModelDocument {
    /// Renders the document in the `.psm` grammar.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&alloc::format!("model {}\n", self.name));
        out.push_str(&alloc::format!("states {}\n", self.states.join(", ")));
        if !self.params.is_empty() {
            out.push_str(&alloc::format!("params {}\n", self.params.join(", ")));
        }
        if !self.inputs.is_empty() {
            out.push_str(&alloc::format!("inputs {}\n", self.inputs.join(", ")));
        }
        for (s, e) in &self.dynamics.0 {
            out.push_str(&alloc::format!("d{s}/dt = {e}\n"));
        }
        for (n, e) in &self.outputs.0 {
            out.push_str(&alloc::format!("output {n} = {e}\n"));
        }
        out
    }
}

pub fn import_model(doc: &ModelDocument) -> Result<ModelDef, ParseError> {
    parse_model(&doc.to_text())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FixtureId;

    #[test]
    fn decay_document() {
        let doc = export_model(&FixtureId::Decay.model());
        assert_eq!(doc.states, ["u", "v"]);
        assert_eq!(doc.params, ["kappa1", "kappa2", "lambda"]);
        assert_eq!(doc.dynamics.get("u"), Some("-u*lambda + kappa1"));
        assert_eq!(doc.outputs.get("y"), Some("u + v"));
    }

    #[test]
    fn document_round_trip() {
        for f in FixtureId::ALL {
            let m = f.model();
            assert_eq!(import_model(&export_model(&m)).unwrap(), m);
        }
    }
}
