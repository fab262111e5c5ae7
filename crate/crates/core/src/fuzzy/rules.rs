use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::variable::{Degrees, LinguisticVariable};
use super::SET_COUNT;
use crate::error::ConfigError;

/// 5x5 rule matrix by label. Rows follow the HESM-current sets, columns the
/// bus-voltage sets; each cell names an output set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleBase {
    pub matrix: Vec<Vec<String>>,
}

/// Rule matrix resolved to output-set indices.
pub type RuleTable = [[usize; SET_COUNT]; SET_COUNT];

impl RuleBase {
    pub fn from_labels(rows: [[&str; SET_COUNT]; SET_COUNT]) -> Self {
        Self {
            matrix: rows
                .iter()
                .map(|r| r.iter().map(|c| String::from(*c)).collect())
                .collect(),
        }
    }

    pub fn resolve(&self, output: &LinguisticVariable, path: &str) -> Result<RuleTable, ConfigError> {
        if self.matrix.len() != SET_COUNT {
            return Err(ConfigError::schema(path, format!("expected {SET_COUNT} rows")));
        }
        let mut table = [[0; SET_COUNT]; SET_COUNT];
        for (r, row) in self.matrix.iter().enumerate() {
            if row.len() != SET_COUNT {
                return Err(ConfigError::schema(
                    format!("{path}[{r}]"),
                    format!("expected {SET_COUNT} columns"),
                ));
            }
            for (c, label) in row.iter().enumerate() {
                table[r][c] = output.index_of(label).ok_or_else(|| {
                    ConfigError::invariant(
                        format!("{path}[{r}][{c}]"),
                        format!("`{label}` is not an output set"),
                    )
                })?;
            }
        }
        Ok(table)
    }
}

/// Min-AND firing of every rule, max-aggregated per output set.
///
/// `dv` are the bus-voltage degrees (columns), `di` the HESM-current degrees
/// (rows).
pub fn evaluate_rules(table: &RuleTable, dv: &Degrees, di: &Degrees) -> Degrees {
    let mut act = [0.0; SET_COUNT];
    for (row, &wi) in table.iter().zip(di) {
        if wi <= 0.0 {
            continue;
        }
        for (&out, &wv) in row.iter().zip(dv) {
            let strength = wi.min(wv);
            if strength > act[out] {
                act[out] = strength;
            }
        }
    }
    act
}
