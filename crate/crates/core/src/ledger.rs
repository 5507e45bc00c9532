//! Named exact inequalities recorded while a computation runs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "==")]
    Eq,
}

impl Relation {
    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Ge => lhs >= rhs,
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Ge => ">=",
            Relation::Le => "<=",
            Relation::Eq => "==",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerEntry {
    pub name: String,
    pub relation: Relation,
    pub lhs: Rational,
    pub rhs: Rational,
    pub holds: bool,
}

impl LedgerEntry {
    pub fn new(
        name: impl Into<String>,
        lhs: impl Into<Rational>,
        relation: Relation,
        rhs: impl Into<Rational>,
    ) -> LedgerEntry {
        let (lhs, rhs) = (lhs.into(), rhs.into());
        LedgerEntry {
            name: name.into(),
            holds: relation.holds(&lhs, &rhs),
            relation,
            lhs,
            rhs,
        }
    }

    /// An entry whose `holds` flag agrees with its own numbers.
    pub fn is_consistent(&self) -> bool {
        self.holds == self.relation.holds(&self.lhs, &self.rhs)
    }

    pub fn prefixed(mut self, prefix: &str) -> LedgerEntry {
        self.name = format!("{prefix}.{}", self.name);
        self
    }
}

impl fmt::Display for LedgerEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} {} {} [{}]",
            self.name,
            self.lhs,
            self.relation,
            self.rhs,
            if self.holds { "ok" } else { "FAILED" }
        )
    }
}

/// First failing entry, if any.
pub fn first_failure(entries: &[LedgerEntry]) -> Option<&LedgerEntry> {
    entries.iter().find(|e| !e.holds)
}
