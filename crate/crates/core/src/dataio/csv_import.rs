//! CSV import: one trial per row, `label, ch0_t0, ch0_t1, ..., ch1_t0, ...`.
//! Fields are comma separated with optional surrounding spaces; lines starting
//! with `#` are skipped. Row and column numbers in errors are 1-based.

use std::io::Read;

use csv::{ReaderBuilder, Trim};

use crate::error::{Error, Result};
use crate::model::{Montage, TrialSet};

pub fn import_csv<R: Read>(source: R, fs_hz: f64, channel_names: Vec<String>) -> Result<TrialSet> {
    let montage = Montage::new(channel_names, fs_hz)?;
    let c = montage.n_channels();
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(Trim::All)
        .flexible(true)
        .from_reader(source);

    let mut width = None;
    let mut labels = Vec::new();
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::CsvShape(e.to_string()))?;
        let row = record.position().map_or(labels.len() + 1, |p| p.line() as usize);
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRows {
                row,
                expected,
                found: record.len(),
            });
        }
        let label_text = &record[0];
        let label = match label_text.parse::<u32>() {
            Ok(l) if l >= 1 => l,
            _ => {
                return Err(Error::BadLabel {
                    row,
                    label: label_text.to_string(),
                })
            }
        };
        labels.push(label);
        for (col, field) in record.iter().enumerate().skip(1) {
            match field.parse::<f32>() {
                Ok(v) if v.is_finite() => samples.push(v),
                _ => {
                    return Err(Error::BadNumber {
                        row,
                        col: col + 1,
                        text: field.to_string(),
                    })
                }
            }
        }
    }

    let width = width.ok_or_else(|| Error::CsvShape("no data rows".into()))?;
    let values = width - 1;
    if values == 0 || values % c != 0 {
        return Err(Error::CsvShape(format!(
            "{values} values per row do not split into {c} channels"
        )));
    }
    TrialSet::new(montage, values / c, labels, samples)
}
