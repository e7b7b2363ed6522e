use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelSubset, Montage};

/// Channels over a scalp region, by 10-20 row prefix or by explicit name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub row_prefixes: Vec<String>,
    /// Overrides `row_prefixes` when present.
    pub explicit_names: Option<Vec<String>>,
}

impl Default for RegionSpec {
    /// The central rows over the motor cortex.
    fn default() -> Self {
        RegionSpec {
            row_prefixes: ["FC", "C", "CP"].map(String::from).to_vec(),
            explicit_names: None,
        }
    }
}

/// Row part of a 10-20 label: the leading letters, minus a trailing midline
/// `z` ("FCz" → "FC", "C3" → "C", "Cz" → "C").
pub fn row_prefix(label: &str) -> &str {
    let end = label.find(|ch: char| !ch.is_ascii_alphabetic()).unwrap_or(label.len());
    let letters = &label[..end];
    match letters.strip_suffix('z') {
        Some(row) if !row.is_empty() => row,
        _ => letters,
    }
}

pub fn task_based_subset(montage: &Montage, region: &RegionSpec) -> Result<ChannelSubset> {
    let c = montage.n_channels();
    let indices: Vec<usize> = match &region.explicit_names {
        Some(names) => {
            if names.is_empty() {
                return Err(Error::InvalidSelector("explicit channel list is empty".into()));
            }
            names
                .iter()
                .map(|n| montage.index_of(n).ok_or_else(|| Error::UnknownName(n.clone())))
                .collect::<Result<_>>()?
        }
        None => {
            if region.row_prefixes.is_empty() {
                return Err(Error::InvalidSelector("region has no row prefixes".into()));
            }
            montage
                .channel_names()
                .iter()
                .enumerate()
                .filter(|(_, name)| {
                    let row = row_prefix(name);
                    region.row_prefixes.iter().any(|p| p.eq_ignore_ascii_case(row))
                })
                .map(|(i, _)| i)
                .collect()
        }
    };
    if indices.is_empty() {
        return Err(Error::EmptyRegion);
    }
    ChannelSubset::canonicalize(&indices, c)
}
