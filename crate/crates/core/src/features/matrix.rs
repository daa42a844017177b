use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::FeatureError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Sbfl,
    Mbfl,
    Tbfl,
}

impl Family {
    /// Sequence order used by the recurrent model.
    pub const ALL: [Family; 3] = [Family::Sbfl, Family::Mbfl, Family::Tbfl];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Sbfl => "sbfl",
            Family::Mbfl => "mbfl",
            Family::Tbfl => "tbfl",
        })
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sbfl" => Ok(Family::Sbfl),
            "mbfl" => Ok(Family::Mbfl),
            "tbfl" => Ok(Family::Tbfl),
            _ => Err(format!("unknown feature family {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub family: Family,
}

impl Column {
    pub fn new(name: impl Into<String>, family: Family) -> Self {
        Column {
            name: name.into(),
            family,
        }
    }

    /// `family:name`, as used in CSV headers.
    pub fn qualified(&self) -> String {
        format!("{}:{}", self.family, self.name)
    }
}

/// Statements x feature columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn new(columns: Vec<Column>, rows: Vec<Vec<f64>>) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == columns.len()));
        FeatureMatrix { columns, rows }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn column_index(&self, family: &str, name: &str) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| c.family.to_string() == family && c.name == name)
    }

    pub fn families(&self) -> Vec<Family> {
        self.columns.iter().map(|c| c.family).collect()
    }

    /// Appends the columns of `other` (same row count).
    pub fn hstack(mut self, other: &FeatureMatrix) -> FeatureMatrix {
        assert_eq!(self.n_rows(), other.n_rows(), "row count mismatch");
        self.columns.extend(other.columns.iter().cloned());
        for (r, o) in self.rows.iter_mut().zip(&other.rows) {
            r.extend_from_slice(o);
        }
        self
    }

    /// Appends the rows of `other` (same columns).
    pub fn vstack(mut self, other: &FeatureMatrix) -> FeatureMatrix {
        assert_eq!(self.columns, other.columns, "column mismatch");
        self.rows.extend(other.rows.iter().cloned());
        self
    }

    /// Min-max scales every column to [0, 1]; constant columns become 0.
    pub fn normalize_columns(&mut self) {
        for j in 0..self.n_cols() {
            let (lo, hi) = self
                .rows
                .iter()
                .map(|r| r[j])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                });
            let span = hi - lo;
            for r in &mut self.rows {
                r[j] = if span > 0.0 { (r[j] - lo) / span } else { 0.0 };
            }
        }
    }

    /// Writes `statement_id,family:name,...` with one row per statement.
    pub fn write_csv<W: Write>(&self, keys: &[String], w: W) -> Result<(), FeatureError> {
        assert_eq!(keys.len(), self.n_rows());
        let mut wtr = csv::Writer::from_writer(w);
        let err = |e: csv::Error| FeatureError::Format(e.to_string());
        let mut header = vec!["statement_id".to_string()];
        header.extend(self.columns.iter().map(Column::qualified));
        wtr.write_record(&header).map_err(err)?;
        for (k, row) in keys.iter().zip(&self.rows) {
            let mut rec = vec![k.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            wtr.write_record(&rec).map_err(err)?;
        }
        wtr.flush().map_err(|e| FeatureError::Format(e.to_string()))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<(Vec<String>, FeatureMatrix), FeatureError> {
        let mut rdr = csv::Reader::from_reader(r);
        let err = |e: csv::Error| FeatureError::Format(e.to_string());
        let header = rdr.headers().map_err(err)?.clone();
        let columns = header
            .iter()
            .skip(1)
            .map(|h| {
                let (fam, name) = h
                    .split_once(':')
                    .ok_or_else(|| FeatureError::Format(format!("bad column header {h:?}")))?;
                Ok(Column::new(name, fam.parse().map_err(FeatureError::Format)?))
            })
            .collect::<Result<Vec<_>, FeatureError>>()?;
        let mut keys = Vec::new();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(err)?;
            keys.push(rec[0].to_string());
            let row = rec
                .iter()
                .skip(1)
                .map(|c| {
                    c.parse::<f64>()
                        .map_err(|_| FeatureError::Format(format!("bad value {c:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != columns.len() {
                return Err(FeatureError::Format(format!("row {} has wrong width", keys.len())));
            }
            rows.push(row);
        }
        Ok((keys, FeatureMatrix::new(columns, rows)))
    }
}
