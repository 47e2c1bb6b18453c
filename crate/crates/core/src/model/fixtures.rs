use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{parse_model, ModelDef};

/// Directory holding the bundled `.psm` files.
pub const FIXTURE_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixtureId {
    Decay,
    Linear,
    Glucose,
    Sei,
}

impl FixtureId {
    pub const ALL: [FixtureId; 4] = [FixtureId::Decay, FixtureId::Linear, FixtureId::Glucose, FixtureId::Sei];

    pub fn name(self) -> &'static str {
        match self {
            FixtureId::Decay => "decay",
            FixtureId::Linear => "linear",
            FixtureId::Glucose => "glucose",
            FixtureId::Sei => "sei",
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            FixtureId::Decay => "decay.psm",
            FixtureId::Linear => "linear.psm",
            FixtureId::Glucose => "glucose.psm",
            FixtureId::Sei => "sei.psm",
        }
    }

    pub fn source(self) -> &'static str {
        match self {
            FixtureId::Decay => include_str!("../../fixtures/decay.psm"),
            FixtureId::Linear => include_str!("../../fixtures/linear.psm"),
            FixtureId::Glucose => include_str!("../../fixtures/glucose.psm"),
            FixtureId::Sei => include_str!("../../fixtures/sei.psm"),
        }
    }

    pub fn model(self) -> ModelDef {
        parse_model(self.source()).expect("bundled fixture parses")
    }
}

impl fmt::Display for FixtureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FixtureId {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        FixtureId::ALL.into_iter().find(|f| f.name() == s).ok_or(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_fixtures_parse() {
        for f in FixtureId::ALL {
            let m = f.model();
            assert_eq!(m.name, f.name());
            assert_eq!(parse_model(&m.to_text()).unwrap(), m);
        }
        let sei = FixtureId::Sei.model();
        assert_eq!((sei.states.len(), sei.params.len(), sei.outputs.len()), (3, 9, 2));
        let glu = FixtureId::Glucose.model();
        assert_eq!(glu.inputs.len(), 1);
        assert_eq!(glu.expr_text(&glu.outputs[0].1), "x1/V_p");
    }
}
