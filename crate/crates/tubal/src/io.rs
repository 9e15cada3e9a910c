//! File formats: binary tensors, text masks, PPM/PGM images, CSV tables,
//! and JSON run manifests.
//!
//! Tensor file (`.t3d`): the magic `T3D1`, three little-endian `u64` dims,
//! then `n1 * n2 * n3` little-endian IEEE-754 doubles in the `Tensor3`
//! layout order (frontal slices in order, row-major within each slice).
//! Write-then-read is bit-exact.
//!
//! Mask file: a plain text header of `dims`, `model`, `rate`, `seed` lines
//! followed by one 1-based `i j k` triple per line.
//!
//! Every writer goes through a write-to-temp-then-rename step so a failed
//! run never leaves a partial output behind.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiments::{PhaseGrid, TableRow};
use crate::sampling::{ObservationMask, SamplingModel};
use crate::tensor::Tensor3;

pub const TENSOR_MAGIC: [u8; 4] = *b"T3D1";

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Writes `bytes` to a temporary sibling of `path` and renames it into
/// place, so readers never observe a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Parse(format!("not a file path: {}", path.display())))?;
    let nonce = TEMP_COUNTER.fetch_add(1, Ordering::Relaxed);
    let tmp: PathBuf = dir.join(format!(
        ".{}.tmp-{}-{nonce}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let write_and_rename = (|| -> std::io::Result<()> {
        std::fs::write(&tmp, bytes)?;
        std::fs::rename(&tmp, path)
    })();
    if write_and_rename.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    Ok(write_and_rename?)
}

pub fn write_tensor(path: &Path, t: &Tensor3) -> Result<()> {
    let (n1, n2, n3) = t.dims();
    let mut bytes = Vec::with_capacity(28 + 8 * t.len());
    bytes.extend_from_slice(&TENSOR_MAGIC);
    for dim in [n1, n2, n3] {
        bytes.extend_from_slice(&(dim as u64).to_le_bytes());
    }
    for &v in t.as_slice() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    atomic_write(path, &bytes)
}

pub fn read_tensor(path: &Path) -> Result<Tensor3> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 28 {
        return Err(Error::TruncatedPayload { expected: 0, found: bytes.len() as u64 });
    }
    let found: [u8; 4] = bytes[0..4].try_into().unwrap();
    if found != TENSOR_MAGIC {
        return Err(Error::BadMagic { expected: TENSOR_MAGIC, found });
    }
    let mut dims = [0u64; 3];
    for (d, chunk) in dims.iter_mut().zip(bytes[4..28].chunks_exact(8)) {
        *d = u64::from_le_bytes(chunk.try_into().unwrap());
    }
    let [n1, n2, n3] = dims;
    let total = n1
        .checked_mul(n2)
        .and_then(|p| p.checked_mul(n3))
        .filter(|&p| p > 0 && p <= (isize::MAX as u64) / 8)
        .ok_or(Error::DimOverflow(n1, n2, n3))?;
    let payload = &bytes[28..];
    if payload.len() as u64 != 8 * total {
        return Err(Error::TruncatedPayload {
            expected: total,
            found: payload.len() as u64 / 8,
        });
    }
    let mut data = Vec::with_capacity(total as usize);
    for (idx, chunk) in payload.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::NonFiniteData(idx));
        }
        data.push(v);
    }
    Tensor3::from_vec((n1 as usize, n2 as usize, n3 as usize), data)
}

pub fn write_mask(path: &Path, mask: &ObservationMask) -> Result<()> {
    let (n1, n2, n3) = mask.dims();
    let mut text = String::new();
    let _ = writeln!(text, "dims {n1} {n2} {n3}");
    let _ = writeln!(text, "model {}", mask.model().name());
    let _ = writeln!(text, "rate {}", mask.rate());
    let _ = writeln!(text, "seed {}", mask.seed());
    for (i, j, k) in mask.triples() {
        let _ = writeln!(text, "{} {} {}", i + 1, j + 1, k + 1);
    }
    atomic_write(path, text.as_bytes())
}

pub fn read_mask(path: &Path) -> Result<ObservationMask> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = |line: Option<&str>, key: &str| -> Result<String> {
        let line = line.ok_or_else(|| Error::Parse(format!("missing `{key}` line")))?;
        line.strip_prefix(key)
            .map(|rest| rest.trim().to_string())
            .ok_or_else(|| Error::Parse(format!("expected `{key} ...`, found {line:?}")))
    };
    let dims_line = header(lines.next(), "dims")?;
    let mut dims_iter = dims_line.split_whitespace().map(|tok| {
        tok.parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad dim {tok:?}")))
    });
    let mut next_dim = || dims_iter.next().unwrap_or_else(|| Err(Error::Parse("missing dim".into())));
    let dims = (next_dim()?, next_dim()?, next_dim()?);
    let model = SamplingModel::parse(&header(lines.next(), "model")?)?;
    let rate: f64 = header(lines.next(), "rate")?
        .parse()
        .map_err(|_| Error::Parse("bad rate".into()))?;
    let seed: u64 = header(lines.next(), "seed")?
        .parse()
        .map_err(|_| Error::Parse("bad seed".into()))?;

    let mut flats = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace().map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad index {tok:?}")))
        });
        let mut next = || parts.next().unwrap_or_else(|| Err(Error::Parse(format!("short line {line:?}"))));
        let (i, j, k) = (next()?, next()?, next()?);
        if i == 0 || j == 0 || k == 0 {
            return Err(Error::Parse(format!("indices are 1-based, found {line:?}")));
        }
        flats.push(((k - 1) * dims.0 + (i - 1)) * dims.1 + (j - 1));
    }
    ObservationMask::from_flat_indices(dims, flats, model, rate, seed)
}

/// Token reader for the PPM/PGM headers: skips whitespace and `#` comments.
struct NetpbmHeader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> NetpbmHeader<'a> {
    fn token(&mut self) -> Result<&'a str> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse("truncated netpbm header".into()));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| Error::Parse("non-ascii netpbm header".into()))
    }

    /// Consumes the single whitespace byte that separates header and payload.
    fn payload(mut self) -> Result<&'a [u8]> {
        if self.pos >= self.bytes.len() || !self.bytes[self.pos].is_ascii_whitespace() {
            return Err(Error::Parse("missing separator before netpbm payload".into()));
        }
        self.pos += 1;
        Ok(&self.bytes[self.pos..])
    }
}

/// Reads a binary 8-bit P6 pixmap as an `h x w x 3` tensor with channels on
/// the frontal slices, scaled to [0, 1].
pub fn read_ppm(path: &Path) -> Result<Tensor3> {
    let bytes = std::fs::read(path)?;
    let mut header = NetpbmHeader { bytes: &bytes, pos: 0 };
    let magic = header.token()?;
    if magic != "P6" {
        return Err(Error::UnsupportedFormat(format!("expected binary P6 pixmap, found {magic:?}")));
    }
    let parse = |tok: &str| -> Result<usize> {
        tok.parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad netpbm number {tok:?}")))
    };
    let width = parse(header.token()?)?;
    let height = parse(header.token()?)?;
    let maxval = parse(header.token()?)?;
    if maxval != 255 {
        return Err(Error::UnsupportedFormat(format!("only 8-bit pixmaps supported, maxval = {maxval}")));
    }
    if width == 0 || height == 0 {
        return Err(Error::DimOverflow(height as u64, width as u64, 3));
    }
    let payload = header.payload()?;
    let expected = 3 * width * height;
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            expected: expected as u64,
            found: payload.len() as u64,
        });
    }
    Ok(Tensor3::from_fn((height, width, 3), |i, j, c| {
        payload[3 * (i * width + j) + c] as f64 / 255.0
    }))
}

/// Writes an `h x w x 3` tensor as a binary 8-bit P6 pixmap, clamping to
/// [0, 1] and quantizing by rounding.
pub fn write_ppm(path: &Path, t: &Tensor3) -> Result<()> {
    let (h, w, c) = t.dims();
    if c != 3 {
        return Err(Error::dims(t.dims(), (h, w, 3usize), "write_ppm needs 3 channel slices"));
    }
    let mut bytes = format!("P6\n{w} {h}\n255\n").into_bytes();
    for i in 0..h {
        for j in 0..w {
            for ch in 0..3 {
                let v = t.get(i, j, ch).clamp(0.0, 1.0);
                bytes.push((v * 255.0).round() as u8);
            }
        }
    }
    atomic_write(path, &bytes)
}

/// Rounds half up to the nearest of 256 gray levels.
fn gray_level(fraction: f64) -> u8 {
    (255.0 * fraction.clamp(0.0, 1.0) + 0.5).floor() as u8
}

/// Writes a phase grid as a binary P5 graymap, one pixel per cell (black =
/// no recoveries, white = all recoveries), gamma on rows and rank on
/// columns, plus a sidecar CSV carrying the axes next to it.
pub fn emit_heatmap(grid: &PhaseGrid, path: &Path) -> Result<()> {
    let (w, h) = (grid.r_values.len(), grid.gamma_values.len());
    let mut bytes = format!("P5\n{w} {h}\n255\n").into_bytes();
    for gi in 0..h {
        for ri in 0..w {
            bytes.push(gray_level(grid.fractions[ri][gi]));
        }
    }
    atomic_write(path, &bytes)?;

    let mut csv = String::from("gamma");
    for r in &grid.r_values {
        let _ = write!(csv, ",r={r}");
    }
    csv.push('\n');
    for (gi, gamma) in grid.gamma_values.iter().enumerate() {
        let _ = write!(csv, "{gamma}");
        for ri in 0..w {
            let _ = write!(csv, ",{}", grid.fractions[ri][gi]);
        }
        csv.push('\n');
    }
    atomic_write(&path.with_extension("csv"), csv.as_bytes())
}

/// Writes recovery-table rows with the columns `n,r,rank,rel_error`.
pub fn write_table_csv(path: &Path, rows: &[TableRow]) -> Result<()> {
    let mut csv = String::from("n,r,rank,rel_error\n");
    for row in rows {
        let _ = writeln!(csv, "{},{},{},{:e}", row.n, row.r, row.recovered_rank, row.rel_error);
    }
    atomic_write(path, csv.as_bytes())
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reproduce a run: the subcommand, its parameters,
/// the seed, the software version, wall time, and a digest of each output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub version: String,
    pub wall_time_secs: f64,
    pub outputs: Vec<OutputDigest>,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            parameters: BTreeMap::new(),
            seed: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_secs: 0.0,
            outputs: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    /// Hashes an already-written output file into the manifest.
    pub fn record_output(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)?;
        let digest = Sha256::digest(&bytes);
        let mut hex = String::with_capacity(64);
        for byte in digest {
            let _ = write!(hex, "{byte:02x}");
        }
        self.outputs.push(OutputDigest { path: path.display().to_string(), sha256: hex });
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Parse(format!("manifest serialization: {e}")))?;
        atomic_write(path, json.as_bytes())
    }
}
