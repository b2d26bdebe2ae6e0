//! On-disk encodings of a [`Tensor`].
//!
//! Binary (little endian):
//!
//! ```text
//! "OSCV"  u16 version = 1
//! u8 cutoff mode (0 per-axis, 1 shells)   u32 cutoff value
//! f64 scale   u8 backend (0 float, 1 exact)   u64 count
//! count × { 12 × u8 indices, f64 value }
//! 32-byte SHA-256 of everything above
//! ```
//!
//! JSON and CSV carry the same header fields and the same digest, so a file
//! converted between formats keeps its digest. Values are written with 17
//! significant digits and read back bit-exactly.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{BasisCutoff, Tensor};
use crate::closed_form::{Backend, OscillatorScale};
use crate::error::{Error, Result};
use crate::index::ElementKey;

const MAGIC: &[u8; 4] = b"OSCV";
const VERSION: u16 = 1;
pub(super) const HEADER_LEN: usize = 4 + 2 + 1 + 4 + 8 + 1 + 8;
const RECORD_LEN: usize = 12 + 8;
const DIGEST_LEN: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Binary,
    Json,
    Csv,
}

impl ExportFormat {
    /// Format implied by a file extension (`.bin`/`.oscv`, `.json`, `.csv`).
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "bin" | "oscv" => Some(ExportFormat::Binary),
            "json" => Some(ExportFormat::Json),
            "csv" => Some(ExportFormat::Csv),
            _ => None,
        }
    }
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" | "bin" => Ok(ExportFormat::Binary),
            "json" => Ok(ExportFormat::Json),
            "csv" => Ok(ExportFormat::Csv),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

fn backend_code(b: Backend) -> u8 {
    match b {
        Backend::Float => 0,
        Backend::Exact => 1,
    }
}

fn cutoff_code(c: BasisCutoff) -> u8 {
    match c {
        BasisCutoff::PerAxis(_) => 0,
        BasisCutoff::Shells(_) => 1,
    }
}

fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_value(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("bad value {s:?}")))
}

impl Tensor {
    fn binary_body(&self) -> Result<Vec<u8>> {
        if self.cutoff.value() > u8::MAX as u32 {
            return Err(Error::InvalidArgument(format!(
                "binary format stores indices as bytes; cutoff {} is too large",
                self.cutoff
            )));
        }
        let mut out = Vec::with_capacity(HEADER_LEN + RECORD_LEN * self.len() + DIGEST_LEN);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(cutoff_code(self.cutoff));
        out.extend_from_slice(&self.cutoff.value().to_le_bytes());
        out.extend_from_slice(&self.scale.a().to_le_bytes());
        out.push(backend_code(self.backend));
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());
        for (key, value) in &self.elements {
            out.extend(key.indices().iter().map(|&n| n as u8));
            out.extend_from_slice(&value.to_le_bytes());
        }
        Ok(out)
    }

    /// Hex SHA-256 of the binary encoding without its trailer.
    pub fn digest(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.binary_body()?)))
    }

    pub fn to_binary(&self) -> Result<Vec<u8>> {
        let mut out = self.binary_body()?;
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        Ok(out)
    }

    pub fn from_binary(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 || &bytes[..4] != MAGIC {
            return Err(Error::BadMagic);
        }
        if bytes.len() < HEADER_LEN {
            return Err(Error::Truncated(format!("{} header bytes of {HEADER_LEN}", bytes.len())));
        }
        let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());

        let version = u16_at(4);
        if version != VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let cutoff = match bytes[6] {
            0 => BasisCutoff::PerAxis(u32_at(7)),
            1 => BasisCutoff::Shells(u32_at(7)),
            m => return Err(Error::Format(format!("unknown cutoff mode {m}"))),
        };
        let scale = OscillatorScale::new(f64::from_bits(u64_at(11)))?;
        let backend = match bytes[19] {
            0 => Backend::Float,
            1 => Backend::Exact,
            b => return Err(Error::Format(format!("unknown backend code {b}"))),
        };
        let count = u64_at(20);
        let available = (bytes.len() - HEADER_LEN) / RECORD_LEN;
        let expected_len = (count as u128) * RECORD_LEN as u128 + (HEADER_LEN + DIGEST_LEN) as u128;
        if (bytes.len() as u128) < expected_len {
            return Err(Error::Truncated(format!(
                "header announces {count} records, room for at most {available}"
            )));
        }
        if (bytes.len() as u128) > expected_len {
            return Err(Error::Format(format!(
                "{} trailing bytes after the digest",
                bytes.len() as u128 - expected_len
            )));
        }
        let body_len = bytes.len() - DIGEST_LEN;
        let computed = hex::encode(Sha256::digest(&bytes[..body_len]));
        let expected = hex::encode(&bytes[body_len..]);
        if computed != expected {
            return Err(Error::DigestMismatch { expected, computed });
        }

        let mut records = Vec::with_capacity(count as usize);
        let mut prev: Option<ElementKey> = None;
        for rec in bytes[HEADER_LEN..body_len].chunks_exact(RECORD_LEN) {
            let mut n = [0u32; 12];
            for (slot, &b) in n.iter_mut().zip(&rec[..12]) {
                *slot = b as u32;
            }
            let key = ElementKey::from_indices(n);
            if prev.is_some_and(|p| p >= key) {
                return Err(Error::Format(format!("records not in ascending key order at {key}")));
            }
            prev = Some(key);
            records.push((key, f64::from_le_bytes(rec[12..].try_into().unwrap())));
        }
        Tensor::from_elements(cutoff, scale, backend, records)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let doc = JsonDoc {
            header: JsonHeader {
                format: "oscv".into(),
                version: VERSION,
                cutoff: self.cutoff,
                scale: self.scale.a(),
                backend: self.backend,
                count: self.len() as u64,
                digest: self.digest()?,
            },
            elements: self
                .elements
                .iter()
                .map(|(k, v)| JsonElement {
                    key: k.indices(),
                    value: format_value(*v),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: JsonDoc = serde_json::from_str(s)?;
        let h = doc.header;
        if h.format != "oscv" {
            return Err(Error::BadMagic);
        }
        if h.version != VERSION {
            return Err(Error::UnsupportedVersion(h.version));
        }
        if h.count != doc.elements.len() as u64 {
            return Err(Error::Format(format!(
                "header announces {} elements, found {}",
                h.count,
                doc.elements.len()
            )));
        }
        let records = doc
            .elements
            .into_iter()
            .map(|e| Ok((ElementKey::from_indices(e.key), parse_value(&e.value)?)))
            .collect::<Result<Vec<_>>>()?;
        let t = Tensor::from_elements(h.cutoff, OscillatorScale::new(h.scale)?, h.backend, records)?;
        t.check_digest(&h.digest)?;
        Ok(t)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut out = String::new();
        writeln!(out, "# format oscv {VERSION}").unwrap();
        writeln!(out, "# cutoff {}", self.cutoff).unwrap();
        writeln!(out, "# scale {}", self.scale.a()).unwrap();
        writeln!(out, "# backend {}", self.backend).unwrap();
        writeln!(out, "# count {}", self.len()).unwrap();
        writeln!(out, "# digest {}", self.digest()?).unwrap();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS)?;
        for (k, v) in &self.elements {
            let mut row: Vec<String> = k.indices().iter().map(u32::to_string).collect();
            row.push(format_value(*v));
            w.write_record(&row)?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        out.push_str(std::str::from_utf8(&body).expect("csv output is utf-8"));
        Ok(out)
    }

    pub fn from_csv_str(s: &str) -> Result<Self> {
        let mut meta = CsvMeta::default();
        let mut body_start = 0;
        for line in s.split_inclusive('\n') {
            let Some(rest) = line.strip_prefix('#') else { break };
            body_start += line.len();
            meta.read_line(rest.trim())?;
        }
        let format_ok = meta.format.ok_or(Error::BadMagic)?;
        if format_ok != VERSION {
            return Err(Error::UnsupportedVersion(format_ok));
        }
        let missing = |f: &str| Error::Format(format!("missing `# {f}` line"));
        let cutoff = meta.cutoff.ok_or_else(|| missing("cutoff"))?;
        let scale = OscillatorScale::new(meta.scale.ok_or_else(|| missing("scale"))?)?;
        let backend = meta.backend.ok_or_else(|| missing("backend"))?;
        let count = meta.count.ok_or_else(|| missing("count"))?;
        let digest = meta.digest.ok_or_else(|| missing("digest"))?;

        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(&s.as_bytes()[body_start..]);
        if r.headers()?.iter().ne(CSV_COLUMNS.iter().copied()) {
            return Err(Error::Format("unexpected CSV column header".into()));
        }
        let mut records = Vec::new();
        for row in r.records() {
            let row = row?;
            if row.len() != 13 {
                return Err(Error::Format(format!("row with {} fields", row.len())));
            }
            let mut n = [0u32; 12];
            for (slot, field) in n.iter_mut().zip(row.iter()) {
                *slot = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Format(format!("bad index {field:?}")))?;
            }
            records.push((ElementKey::from_indices(n), parse_value(&row[12])?));
        }
        if records.len() as u64 != count {
            return Err(Error::Format(format!(
                "header announces {count} elements, found {}",
                records.len()
            )));
        }
        let t = Tensor::from_elements(cutoff, scale, backend, records)?;
        t.check_digest(&digest)?;
        Ok(t)
    }

    fn check_digest(&self, expected: &str) -> Result<()> {
        let computed = self.digest()?;
        if computed != expected {
            return Err(Error::DigestMismatch {
                expected: expected.to_string(),
                computed,
            });
        }
        Ok(())
    }

    pub fn encode(&self, format: ExportFormat) -> Result<Vec<u8>> {
        match format {
            ExportFormat::Binary => self.to_binary(),
            ExportFormat::Json => self.to_json_string().map(String::into_bytes),
            ExportFormat::Csv => self.to_csv_string().map(String::into_bytes),
        }
    }

    pub fn decode(bytes: &[u8], format: ExportFormat) -> Result<Self> {
        let text = || std::str::from_utf8(bytes).map_err(|e| Error::Format(format!("not utf-8: {e}")));
        match format {
            ExportFormat::Binary => Tensor::from_binary(bytes),
            ExportFormat::Json => Tensor::from_json_str(text()?),
            ExportFormat::Csv => Tensor::from_csv_str(text()?),
        }
    }

    pub fn write_file(&self, path: &Path, format: ExportFormat) -> Result<()> {
        Ok(std::fs::write(path, self.encode(format)?)?)
    }

    pub fn read_file(path: &Path, format: ExportFormat) -> Result<Self> {
        Tensor::decode(&std::fs::read(path)?, format)
    }
}

const CSV_COLUMNS: [&str; 13] = [
    "nx1", "ny1", "nz1", "nx2", "ny2", "nz2", "nx3", "ny3", "nz3", "nx4", "ny4", "nz4", "value",
];

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonDoc {
    header: JsonHeader,
    elements: Vec<JsonElement>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonHeader {
    format: String,
    version: u16,
    cutoff: BasisCutoff,
    scale: f64,
    backend: Backend,
    count: u64,
    digest: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonElement {
    key: [u32; 12],
    value: String,
}

#[derive(Default)]
struct CsvMeta {
    format: Option<u16>,
    cutoff: Option<BasisCutoff>,
    scale: Option<f64>,
    backend: Option<Backend>,
    count: Option<u64>,
    digest: Option<String>,
}

impl CsvMeta {
    fn read_line(&mut self, line: &str) -> Result<()> {
        let bad = || Error::Format(format!("bad metadata line {line:?}"));
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            ["format", "oscv", v] => self.format = Some(v.parse().map_err(|_| bad())?),
            ["format", ..] => return Err(Error::BadMagic),
            ["cutoff", mode, v] => {
                let v: u32 = v.parse().map_err(|_| bad())?;
                self.cutoff = Some(match *mode {
                    "per_axis" => BasisCutoff::PerAxis(v),
                    "shells" => BasisCutoff::Shells(v),
                    _ => return Err(bad()),
                });
            }
            ["scale", v] => self.scale = Some(v.parse().map_err(|_| bad())?),
            ["backend", v] => self.backend = Some(v.parse()?),
            ["count", v] => self.count = Some(v.parse().map_err(|_| bad())?),
            ["digest", v] => self.digest = Some(v.to_string()),
            _ => return Err(bad()),
        }
        Ok(())
    }
}
