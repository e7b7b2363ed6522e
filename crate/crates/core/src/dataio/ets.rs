//! ETS trial-set container.
//!
//! ```text
//! "ETS1" | u32 LE header length | UTF-8 JSON header | N*C*T f32 LE samples
//! ```
//!
//! Samples are nested trial, then channel, then time. The header is a JSON
//! object with a fixed key order, so equal trial sets always serialize to equal
//! bytes.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{Montage, TrialSet};

pub const MAGIC: &[u8; 4] = b"ETS1";
pub const DTYPE: &str = "f32le";
pub const LAYOUT: &str = "trial-channel-time";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtsHeader {
    pub n_trials: usize,
    pub n_channels: usize,
    pub n_samples: usize,
    pub fs_hz: f64,
    pub channel_names: Vec<String>,
    pub labels: Vec<u32>,
    pub dtype: String,
    pub layout: String,
}

impl EtsHeader {
    pub fn of(trials: &TrialSet) -> Self {
        EtsHeader {
            n_trials: trials.n_trials(),
            n_channels: trials.n_channels(),
            n_samples: trials.n_samples(),
            fs_hz: trials.montage().fs_hz(),
            channel_names: trials.montage().channel_names().to_vec(),
            labels: trials.labels().to_vec(),
            dtype: DTYPE.into(),
            layout: LAYOUT.into(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dtype != DTYPE {
            return Err(Error::HeaderParse(format!("unsupported dtype {:?}", self.dtype)));
        }
        if self.layout != LAYOUT {
            return Err(Error::HeaderParse(format!("unsupported layout {:?}", self.layout)));
        }
        if self.channel_names.len() != self.n_channels {
            return Err(Error::HeaderParse(format!(
                "{} channel names for {} channels",
                self.channel_names.len(),
                self.n_channels
            )));
        }
        if self.labels.len() != self.n_trials {
            return Err(Error::HeaderParse(format!(
                "{} labels for {} trials",
                self.labels.len(),
                self.n_trials
            )));
        }
        Ok(())
    }

    fn payload_len(&self) -> Result<usize> {
        self.n_trials
            .checked_mul(self.n_channels)
            .and_then(|v| v.checked_mul(self.n_samples))
            .and_then(|v| v.checked_mul(4))
            .ok_or_else(|| Error::HeaderParse("declared dimensions overflow".into()))
    }
}

/// Serializes `trials`, returning the number of bytes written.
pub fn write_ets<W: Write>(trials: &TrialSet, mut sink: W) -> Result<u64> {
    let header = serde_json::to_vec(&EtsHeader::of(trials))
        .map_err(|e| Error::HeaderParse(e.to_string()))?;
    let header_len = u32::try_from(header.len())
        .map_err(|_| Error::HeaderParse("header exceeds 4 GiB".into()))?;
    sink.write_all(MAGIC)?;
    sink.write_all(&header_len.to_le_bytes())?;
    sink.write_all(&header)?;
    let mut buf = Vec::with_capacity(4096);
    for chunk in trials.samples().chunks(1024) {
        buf.clear();
        for v in chunk {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        sink.write_all(&buf)?;
    }
    sink.flush()?;
    Ok((8 + header.len() + trials.samples().len() * 4) as u64)
}

pub fn read_ets<R: Read>(mut source: R) -> Result<TrialSet> {
    let mut magic = [0u8; 4];
    if read_full(&mut source, &mut magic)? < 4 || &magic != MAGIC {
        return Err(Error::BadMagic);
    }
    let mut len = [0u8; 4];
    if read_full(&mut source, &mut len)? < 4 {
        return Err(Error::HeaderParse("truncated header length".into()));
    }
    let header_len = u32::from_le_bytes(len) as usize;
    let mut header_bytes = Vec::new();
    source
        .by_ref()
        .take(header_len as u64)
        .read_to_end(&mut header_bytes)?;
    if header_bytes.len() != header_len {
        return Err(Error::HeaderParse("truncated header".into()));
    }
    let header: EtsHeader =
        serde_json::from_slice(&header_bytes).map_err(|e| Error::HeaderParse(e.to_string()))?;
    header.validate()?;

    let expected = header.payload_len()?;
    let mut payload = Vec::with_capacity(expected);
    source.read_to_end(&mut payload)?;
    if payload.len() != expected {
        return Err(Error::PayloadLengthMismatch {
            expected,
            found: payload.len(),
        });
    }
    let samples: Vec<f32> = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteSample(i));
    }
    let montage = Montage::new(header.channel_names, header.fs_hz)
        .map_err(|e| Error::HeaderParse(e.to_string()))?;
    TrialSet::new(montage, header.n_samples, header.labels, samples)
}

fn read_full<R: Read>(source: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match source.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(filled)
}

pub fn read_ets_file(path: impl AsRef<Path>) -> Result<TrialSet> {
    read_ets(BufReader::new(File::open(path)?))
}

pub fn write_ets_file(trials: &TrialSet, path: impl AsRef<Path>) -> Result<u64> {
    let mut w = BufWriter::new(File::create(path)?);
    let n = write_ets(trials, &mut w)?;
    w.flush()?;
    Ok(n)
}

pub fn to_bytes(trials: &TrialSet) -> Vec<u8> {
    let mut out = Vec::new();
    write_ets(trials, &mut out).expect("writing to a Vec cannot fail");
    out
}

/// Lower-case hex SHA-256 of the canonical ETS serialization.
pub fn fingerprint(trials: &TrialSet) -> String {
    hex::encode(Sha256::digest(to_bytes(trials)))
}
