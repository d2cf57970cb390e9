use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::label::Label;

/// One row of a predictions CSV (`id,label,probability`).
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub id: String,
    pub label: Label,
    /// Probability of genuine.
    pub probability: f64,
}

pub fn write_predictions<W: Write>(predictions: &[Prediction], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["id", "label", "probability"])?;
    for p in predictions {
        w.write_record([p.id.as_str(), p.label.as_str(), &format!("{:.6}", p.probability)])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_predictions<R: Read>(reader: R) -> Result<Vec<Prediction>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["id", "label", "probability"] {
        return Err(Error::InvalidData("predictions CSV must have columns `id,label,probability`".into()));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let bad = |what: &str| Error::InvalidData(format!("predictions row {}: {what}", line + 1));
        let id = record.get(0).unwrap_or_default().to_owned();
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId(id));
        }
        let label = record.get(1).unwrap_or_default().parse::<Label>().map_err(|e| bad(&e))?;
        let probability = record
            .get(2)
            .unwrap_or_default()
            .parse::<f64>()
            .map_err(|_| bad("probability is not a number"))?;
        out.push(Prediction { id, label, probability });
    }
    Ok(out)
}

pub fn save_predictions(predictions: &[Prediction], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_predictions(predictions, std::io::BufWriter::new(file))
}

pub fn load_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_predictions(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let preds = vec![
            Prediction { id: "a".into(), label: Label::Genuine, probability: 0.75 },
            Prediction { id: "b".into(), label: Label::Layout, probability: 0.125 },
        ];
        let mut buf = Vec::new();
        write_predictions(&preds, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "id,label,probability\na,genuine,0.750000\nb,layout,0.125000\n");
        assert_eq!(read_predictions(buf.as_slice()).unwrap(), preds);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = "id,label,probability\na,genuine,1\na,layout,0\n";
        assert!(matches!(read_predictions(text.as_bytes()), Err(Error::DuplicateId(_))));
    }
}
