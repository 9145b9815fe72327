//! Signal persistence.
//!
//! Two formats, both exact round-trips of the in-memory samples:
//!
//! * CSV: a `# rate=<Hz>` comment line, a header row of channel labels,
//!   then one row per time sample and one column per channel.
//! * Raw binary, little-endian: the 8-byte magic `AADSIG01`, channel count
//!   (`u64`), samples per channel (`u64`), rate (`f64`), then the samples as
//!   `f64`, channel-major.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Envelope, MultiChannelRecording, SampledSignal};
use crate::error::{Error, Result};

pub const BINARY_MAGIC: &[u8; 8] = b"AADSIG01";
const HEADER_LEN: usize = 8 + 8 + 8 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalFormat {
    Csv,
    Binary,
}

impl SignalFormat {
    /// `.csv` selects CSV; anything else is raw binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => SignalFormat::Csv,
            _ => SignalFormat::Binary,
        }
    }
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

pub fn write_csv<W: Write>(rec: &MultiChannelRecording, out: W) -> Result<()> {
    let mut out = out;
    writeln!(out, "# rate={:?}", rec.rate())?;
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = match rec.labels() {
        Some(labels) => labels.to_vec(),
        None => (0..rec.channels()).map(|c| format!("ch{c}")).collect(),
    };
    w.write_record(&header).map_err(csv_err)?;
    let mut row = Vec::with_capacity(rec.channels());
    for t in 0..rec.len() {
        row.clear();
        row.extend(rec.channel_iter().map(|ch| format!("{:?}", ch[t])));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

/// Reads a CSV recording. Header labels other than the default `chN`
/// names are kept as channel labels.
pub fn read_csv<R: BufRead>(mut input: R, path: &Path) -> Result<MultiChannelRecording> {
    let mut first = String::new();
    input.read_line(&mut first)?;
    let rate: f64 = first
        .trim()
        .strip_prefix('#')
        .map(str::trim)
        .and_then(|s| s.strip_prefix("rate="))
        .ok_or_else(|| format_err(path, "first line must be `# rate=<Hz>`"))?
        .trim()
        .parse()
        .map_err(|_| format_err(path, "unparseable rate"))?;

    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let labels: Vec<String> = reader
        .headers()
        .map_err(|e| format_err(path, e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let channels = labels.len();
    if channels == 0 {
        return Err(format_err(path, "no channels in header"));
    }
    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); channels];
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format_err(path, e.to_string()))?;
        if record.len() != channels {
            return Err(format_err(
                path,
                format!("row {} has {} fields, expected {channels}", line + 1, record.len()),
            ));
        }
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| format_err(path, format!("bad number `{field}` in row {}", line + 1)))?;
            rows[c].push(v);
        }
    }
    let rec = MultiChannelRecording::from_channels(rows, rate)?;
    let default_labels = labels.iter().enumerate().all(|(c, l)| *l == format!("ch{c}"));
    if default_labels {
        Ok(rec)
    } else {
        rec.with_labels(labels)
    }
}

pub fn write_binary<W: Write>(rec: &MultiChannelRecording, mut out: W) -> Result<()> {
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&(rec.channels() as u64).to_le_bytes())?;
    out.write_all(&(rec.len() as u64).to_le_bytes())?;
    out.write_all(&rec.rate().to_le_bytes())?;
    for v in rec.as_flat() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R, path: &Path) -> Result<MultiChannelRecording> {
    let mut header = [0u8; HEADER_LEN];
    input
        .read_exact(&mut header)
        .map_err(|_| format_err(path, "truncated header"))?;
    if &header[..8] != BINARY_MAGIC {
        return Err(format_err(path, "bad magic"));
    }
    let word = |i: usize| <[u8; 8]>::try_from(&header[i..i + 8]).expect("8-byte slice");
    let channels = u64::from_le_bytes(word(8)) as usize;
    let len = u64::from_le_bytes(word(16)) as usize;
    let rate = f64::from_le_bytes(word(24));
    let total = channels
        .checked_mul(len)
        .ok_or_else(|| format_err(path, "header sizes overflow"))?;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != total * 8 {
        return Err(format_err(
            path,
            format!("expected {} data bytes, found {}", total * 8, bytes.len()),
        ));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
        .collect();
    MultiChannelRecording::from_flat(data, channels, rate)
}

pub fn save_recording(path: &Path, rec: &MultiChannelRecording) -> Result<()> {
    let out = BufWriter::new(File::create(path)?);
    match SignalFormat::from_path(path) {
        SignalFormat::Csv => write_csv(rec, out),
        SignalFormat::Binary => write_binary(rec, out),
    }
}

pub fn load_recording(path: &Path) -> Result<MultiChannelRecording> {
    let input = BufReader::new(File::open(path)?);
    match SignalFormat::from_path(path) {
        SignalFormat::Csv => read_csv(input, path),
        SignalFormat::Binary => read_binary(input, path),
    }
}

pub fn save_signal(path: &Path, signal: &SampledSignal) -> Result<()> {
    let rec = MultiChannelRecording::from_flat(signal.samples().to_vec(), 1, signal.rate())?;
    save_recording(path, &rec)
}

pub fn load_signal(path: &Path) -> Result<SampledSignal> {
    let rec = load_recording(path)?;
    if rec.channels() != 1 {
        return Err(format_err(
            path,
            format!("expected a single channel, found {}", rec.channels()),
        ));
    }
    Ok(rec.channel_signal(0))
}

pub fn save_envelope(path: &Path, env: &Envelope) -> Result<()> {
    save_signal(path, &env.signal)
}

pub fn load_envelope(path: &Path) -> Result<Envelope> {
    Ok(Envelope::from_signal(load_signal(path)?))
}
