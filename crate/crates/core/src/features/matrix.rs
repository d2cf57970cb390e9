use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::label::Label;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub id: String,
    pub label: Option<Label>,
    pub values: Vec<f64>,
}

/// A named feature table, serialized as CSV with columns `id,label,<names...>`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

impl FeatureMatrix {
    pub fn new(names: Vec<String>) -> Self {
        FeatureMatrix {
            names,
            rows: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn push(&mut self, id: impl Into<String>, label: Option<Label>, values: Vec<f64>) -> Result<()> {
        if values.len() != self.names.len() {
            return Err(Error::Dimension {
                expected: self.names.len(),
                found: values.len(),
            });
        }
        self.rows.push(FeatureRow {
            id: id.into(),
            label,
            values,
        });
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["id".to_string(), "label".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut record = Vec::with_capacity(row.values.len() + 2);
            record.push(row.id.clone());
            record.push(row.label.map(|l| l.to_string()).unwrap_or_default());
            record.extend(row.values.iter().map(|v| format_value(*v)));
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        if header.get(0) != Some("id") || header.get(1) != Some("label") {
            return Err(Error::InvalidData(
                "feature CSV must start with `id,label` columns".into(),
            ));
        }
        let names: Vec<String> = header.iter().skip(2).map(str::to_owned).collect();
        let mut matrix = FeatureMatrix::new(names);
        for (line, record) in r.records().enumerate() {
            let record = record?;
            let id = record.get(0).unwrap_or_default().to_owned();
            let label = match record.get(1).unwrap_or_default() {
                "" => None,
                s => Some(s.parse::<Label>().map_err(Error::InvalidData)?),
            };
            let values = record
                .iter()
                .skip(2)
                .enumerate()
                .map(|(j, v)| {
                    v.parse::<f64>().map_err(|_| {
                        Error::InvalidData(format!(
                            "row {}: column `{}` is not a number: `{v}`",
                            line + 1,
                            matrix.names.get(j).map(String::as_str).unwrap_or("?")
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            matrix.push(id, label, values)?;
        }
        Ok(matrix)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    /// Column-concatenates `self` and `other` row by row, matched on id.
    /// Row order follows `self`; labels must agree where both are present.
    pub fn join(&self, other: &FeatureMatrix) -> Result<FeatureMatrix> {
        let index: HashMap<&str, &FeatureRow> = other.rows.iter().map(|r| (r.id.as_str(), r)).collect();
        let mut names = self.names.clone();
        names.extend(other.names.iter().cloned());
        let mut joined = FeatureMatrix::new(names);
        let mut missing = Vec::new();
        for row in &self.rows {
            let Some(o) = index.get(row.id.as_str()) else {
                missing.push(row.id.clone());
                continue;
            };
            let label = match (row.label, o.label) {
                (Some(a), Some(b)) if a != b => {
                    return Err(Error::InvalidData(format!("label conflict for `{}`", row.id)))
                }
                (a, b) => a.or(b),
            };
            let mut values = row.values.clone();
            values.extend_from_slice(&o.values);
            joined.push(row.id.clone(), label, values)?;
        }
        if !missing.is_empty() || joined.rows.len() != other.rows.len() {
            let ours: std::collections::HashSet<&str> = self.rows.iter().map(|r| r.id.as_str()).collect();
            missing.extend(other.rows.iter().filter(|r| !ours.contains(r.id.as_str())).map(|r| r.id.clone()));
            return Err(Error::InvalidData(format!(
                "feature tables cover different ids; unmatched: {}",
                missing.join(", ")
            )));
        }
        Ok(joined)
    }

    /// Rows that carry a label, as (features, labels).
    pub fn labeled(&self) -> (Vec<Vec<f64>>, Vec<Label>) {
        self.rows
            .iter()
            .filter_map(|r| r.label.map(|l| (r.values.clone(), l)))
            .unzip()
    }

    /// Keeps only the listed columns, in the given order.
    pub fn project(&self, columns: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            names: columns.iter().map(|&j| self.names[j].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| FeatureRow {
                    id: r.id.clone(),
                    label: r.label,
                    values: columns.iter().map(|&j| r.values[j]).collect(),
                })
                .collect(),
        }
    }
}

/// Shortest representation that parses back to the same `f64`.
fn format_value(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FeatureMatrix {
        let mut m = FeatureMatrix::new(vec!["a".into(), "b".into()]);
        m.push("t1", Some(Label::Genuine), vec![1.5, 0.1 + 0.2]).unwrap();
        m.push("t2", None, vec![-3.0, 1e-300]).unwrap();
        m
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let m = sample();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("id,label,a,b\n"));
        assert_eq!(FeatureMatrix::read_csv(&buf[..]).unwrap(), m);
    }

    #[test]
    fn join_matches_ids() {
        let m = sample();
        let mut other = FeatureMatrix::new(vec!["v0".into()]);
        other.push("t2", None, vec![9.0]).unwrap();
        other.push("t1", Some(Label::Genuine), vec![8.0]).unwrap();
        let j = m.join(&other).unwrap();
        assert_eq!(j.names, vec!["a", "b", "v0"]);
        assert_eq!(j.rows[0].values, vec![1.5, 0.1 + 0.2, 8.0]);

        let mut short = FeatureMatrix::new(vec!["v0".into()]);
        short.push("t1", None, vec![1.0]).unwrap();
        let err = m.join(&short).unwrap_err().to_string();
        assert!(err.contains("t2"), "{err}");
    }

    #[test]
    fn rejects_wrong_width() {
        let mut m = FeatureMatrix::new(vec!["a".into()]);
        assert!(m.push("x", None, vec![1.0, 2.0]).is_err());
    }
}
