use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A group-spec document. Serialized as a JSON object tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupSpec {
    Trivial,
    Cyclic {
        order: u64,
        /// Generator name, `x` when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generator: Option<String>,
    },
    FreeAbelian {
        rank: usize,
        /// Generator names; `x` for rank one, `x1 .. xn` otherwise.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<String>>,
    },
    FiniteTable {
        elements: Vec<String>,
        table: Vec<Vec<usize>>,
        /// Generating subset used for word length; all non-identity elements when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<String>>,
    },
    Fp {
        generators: Vec<String>,
        relators: Vec<String>,
        #[serde(default)]
        quotients: Vec<QuotientSpec>,
        max_word_length: usize,
        /// Node budget of the rewriting search used to prove equalities.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        search_budget: Option<usize>,
    },
}

/// A homomorphism onto a group with exact equality, given by generator images.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientSpec {
    pub target: GroupSpec,
    pub images: Vec<String>,
}

impl GroupSpec {
    /// Parses a UTF-8 JSON group-spec document. Load-time invariants are
    /// checked when the spec is turned into a [`crate::GroupContext`].
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Syntax {
            pos: offset_of(text, e.line(), e.column()),
            msg: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("group spec serializes")
    }
}

fn offset_of(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    start + column.saturating_sub(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_cyclic() {
        let spec = GroupSpec::from_json(r#"{"kind":"cyclic","order":5}"#).unwrap();
        assert_eq!(spec, GroupSpec::Cyclic { order: 5, generator: None });
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = GroupSpec::from_json("{\"kind\":\"cyclic\",\n \"order\": }").unwrap_err();
        match err {
            Error::Syntax { pos, .. } => assert!(pos > 16, "pos {pos}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn round_trips_through_json() {
        let text = r#"{"kind":"fp","generators":["a","b","c"],"relators":["a^2 b^2 c^2 b^-2"],
            "quotients":[{"target":{"kind":"cyclic","order":2,"generator":"a"},"images":["a","e","e"]}],
            "max_word_length":14}"#;
        let spec = GroupSpec::from_json(text).unwrap();
        assert_eq!(GroupSpec::from_json(&spec.to_json()).unwrap(), spec);
    }
}
