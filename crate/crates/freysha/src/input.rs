use std::fs;
use std::path::Path;

use freysha_core::arith::{parse_factored, FactoredInteger, IterationBudget, Precision};
use freysha_core::curves::{build_class_with, IsogenyClass};
use freysha_core::triples::{make_triple_with, parse_triple_list, AbcTriple, LineError};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A triple and a twist in factored notation; enough to rebuild the class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub a: String,
    pub c: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    pub q: i64,
}

fn factored(field: &str, text: &str) -> Result<FactoredInteger> {
    parse_factored(text).map_err(|e| Error::Validation(format!("{field} = {text:?}: {e}")))
}

impl ClassSpec {
    pub fn new(a: &str, c: &str, b: Option<&str>, q: i64) -> Self {
        ClassSpec {
            a: a.into(),
            c: c.into(),
            b: b.map(Into::into),
            q,
        }
    }

    pub fn from_triple(triple: &AbcTriple, q: i64) -> Self {
        ClassSpec {
            a: triple.a().render(),
            c: triple.c().render(),
            b: Some(triple.b().render()),
            q,
        }
    }

    pub fn triple(&self, precision: Precision) -> Result<AbcTriple> {
        let a = factored("a", &self.a)?;
        let c = factored("c", &self.c)?;
        let b = self.b.as_deref().map(|b| factored("b", b)).transpose()?;
        Ok(make_triple_with(
            a,
            c,
            b,
            &mut IterationBudget::default(),
            precision,
        )?)
    }

    pub fn class(&self, precision: Precision) -> Result<IsogenyClass> {
        let triple = self.triple(precision)?;
        Ok(build_class_with(
            &triple,
            &FactoredInteger::from_i64(self.q),
            precision,
        )?)
    }
}

/// Loads a triple list; malformed lines come back separately.
pub fn load_triples(path: &Path, precision: Precision) -> Result<(Vec<AbcTriple>, Vec<LineError>)> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    Ok(parse_triple_list(&text, precision))
}
