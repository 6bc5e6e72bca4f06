//! Integer combinations of topological orbit types and their text form.
//!
//! ```text
//! burnside := term ( '+' term )*
//! term     := coeff '(' name ')' "'"*
//! coeff    := 'eps' | integer
//! ```
//!
//! `eps` stands for a coefficient of one on a type whose fixed space is the origin.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::strata::{StrataTable, TopoRef};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BurnsideType {
    pub counts: BTreeMap<TopoRef, usize>,
}

impl BurnsideType {
    pub fn total_bodies(&self, table: &StrataTable) -> usize {
        self.counts
            .iter()
            .map(|(r, &n)| n * table.stratum(r.class_id).orbit_type.orbit_size)
            .sum()
    }

    pub fn orbit_count(&self) -> usize {
        self.counts.values().sum()
    }

    /// Render as `1(D_3) + 2(Z2)' + 1(1)`, in class then component order.
    pub fn format(&self, table: &StrataTable) -> String {
        let terms: Vec<String> = self
            .counts
            .iter()
            .filter(|(_, &n)| n > 0)
            .map(|(r, n)| {
                let t = table.topo(*r);
                format!("{n}({}){}", table.stratum(r.class_id).orbit_type.name, t.label)
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }

    pub fn parse(text: &str, table: &StrataTable) -> Result<Self> {
        let mut out = BurnsideType::default();
        for raw in split_terms(text) {
            let term = raw.trim();
            if term.is_empty() {
                return Err(Error::Parse(format!("empty term in `{text}`")));
            }
            let open = term.find('(').ok_or_else(|| Error::Parse(format!("missing `(` in `{term}`")))?;
            let close = term.rfind(')').ok_or_else(|| Error::Parse(format!("missing `)` in `{term}`")))?;
            if close < open {
                return Err(Error::Parse(format!("malformed term `{term}`")));
            }
            let coeff = term[..open].trim();
            let n: usize = match coeff {
                "eps" | "ε" | "" => 1,
                c => c.parse().map_err(|_| Error::Parse(format!("bad coefficient `{c}`")))?,
            };
            let name = &term[open + 1..close];
            let primes = term[close + 1..].trim();
            if primes.chars().any(|c| c != '\'' && c != '′') {
                return Err(Error::Parse(format!("trailing text in `{term}`")));
            }
            let r = table.parse_topo(&format!("{name}{primes}"))?;
            *out.counts.entry(r).or_insert(0) += n;
        }
        out.counts.retain(|_, n| *n > 0);
        for (r, &n) in &out.counts {
            if table.stratum(r.class_id).orbit_type.fixed_dim == 0 && n > 1 {
                return Err(Error::Parse(format!(
                    "at most one orbit of type ({}) is possible",
                    table.stratum(r.class_id).orbit_type.name
                )));
            }
        }
        Ok(out)
    }
}

/// Split on `+` outside parentheses (names never contain `+`, but stay safe).
fn split_terms(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' if depth == 0 => {
                out.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}
