//! Dataset ingestion, preprocessing, synthetic data and affinity persistence.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use log::warn;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, ParseError, Result};

const AFFINITY_MAGIC: &[u8; 8] = b"TLRRAFF1";
const AFFINITY_HEADER_LEN: usize = 24;

/// Feature-by-sample data matrix, one column per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix(DMatrix<f64>);

impl DataMatrix {
    pub fn new(x: DMatrix<f64>) -> Result<Self> {
        if x.ncols() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 samples, got {}",
                x.ncols()
            )));
        }
        if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite entry at ({}, {})",
                pos % x.nrows(),
                pos / x.nrows()
            )));
        }
        Ok(DataMatrix(x))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn feature_dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn sample_count(&self) -> usize {
        self.0.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DataMatrix,
    /// Contiguous 0-based class ids.
    pub labels: Vec<usize>,
    pub name: String,
}

impl Dataset {
    pub fn new(x: DataMatrix, labels: Vec<usize>, name: impl Into<String>) -> Result<Self> {
        if labels.len() != x.sample_count() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} samples",
                labels.len(),
                x.sample_count()
            )));
        }
        Ok(Dataset {
            x,
            labels: remap_labels(&labels),
            name: name.into(),
        })
    }

    pub fn num_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m + 1)
    }
}

/// How rows of a CSV file map onto samples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    SamplesAsRows,
    SamplesAsColumns,
}

pub fn load_csv(path: &Path, orientation: Orientation) -> Result<DataMatrix> {
    let parse_err = |kind| Error::Parse {
        path: path.to_path_buf(),
        kind,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;

    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(rows as u64 + 1, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(parse_err(ParseError::Ragged {
                line,
                expected,
                found: record.len(),
            }));
        }
        for (field, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                parse_err(ParseError::NonNumeric {
                    line,
                    field: field + 1,
                    cell: cell.to_string(),
                })
            })?;
            if !v.is_finite() {
                return Err(parse_err(ParseError::NonFinite {
                    line,
                    field: field + 1,
                }));
            }
            values.push(v);
        }
        rows += 1;
    }
    let Some(cols) = width else {
        return Err(parse_err(ParseError::Empty));
    };

    let table = DMatrix::from_row_slice(rows, cols, &values);
    let x = match orientation {
        Orientation::SamplesAsRows => table.transpose(),
        Orientation::SamplesAsColumns => table,
    };
    DataMatrix::new(x)
}

pub fn save_csv(x: &DataMatrix, path: &Path, orientation: Orientation) -> Result<()> {
    let table = match orientation {
        Orientation::SamplesAsRows => x.matrix().transpose(),
        Orientation::SamplesAsColumns => x.matrix().clone(),
    };
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    for r in 0..table.nrows() {
        // f64 Display is shortest round-trip, so reading back is exact.
        writer.write_record(table.row(r).iter().map(|v| v.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

/// Remaps arbitrary integer ids to `0..k` in order of first occurrence.
pub fn remap_labels<T: Copy + Eq + std::hash::Hash>(raw: &[T]) -> Vec<usize> {
    let mut ids = HashMap::new();
    raw.iter()
        .map(|&l| {
            let next = ids.len();
            *ids.entry(l).or_insert(next)
        })
        .collect()
}

/// One integer label per line; blank lines are skipped.
pub fn load_labels(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)?;
    let mut raw = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: i64 = line.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            kind: ParseError::NotInteger {
                line: idx as u64 + 1,
                text: line.to_string(),
            },
        })?;
        raw.push(v);
    }
    if raw.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            kind: ParseError::Empty,
        });
    }
    Ok(remap_labels(&raw))
}

pub fn save_labels(labels: &[usize], path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for l in labels {
        writeln!(out, "{l}")?;
    }
    out.flush()?;
    Ok(())
}

/// Scales every column to unit Euclidean norm. Zero columns stay zero.
pub fn normalize_columns(x: &DataMatrix) -> DataMatrix {
    let mut m = x.matrix().clone();
    let mut zero_cols = 0usize;
    for mut col in m.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        } else {
            zero_cols += 1;
        }
    }
    if zero_cols > 0 {
        warn!("{zero_cols} all-zero sample column(s) left unnormalized");
    }
    DataMatrix(m)
}

/// Parameters of the union-of-subspaces generator.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthParams {
    pub num_subspaces: usize,
    pub sub_dim: usize,
    pub ambient_dim: usize,
    pub points_per: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            num_subspaces: 3,
            sub_dim: 3,
            ambient_dim: 30,
            points_per: 50,
            noise_sigma: 0.01,
            seed: 0,
        }
    }
}

/// Samples drawn from a union of random linear subspaces.
///
/// Each subspace gets a random orthonormal basis; coefficients are standard
/// normal and isotropic Gaussian noise of scale `noise_sigma` is added. Samples
/// are ordered by subspace and labeled with the subspace index.
pub fn synth_subspaces(p: &SynthParams) -> Result<Dataset> {
    if p.num_subspaces == 0 || p.sub_dim == 0 || p.sub_dim >= p.ambient_dim {
        return Err(Error::InvalidArgument(format!(
            "need 0 < sub_dim < ambient_dim and at least one subspace, got {p:?}"
        )));
    }
    if p.points_per < p.sub_dim || p.num_subspaces * p.points_per < 2 {
        return Err(Error::InvalidArgument(format!(
            "points_per must be >= sub_dim, got {}",
            p.points_per
        )));
    }
    if !(p.noise_sigma >= 0.0 && p.noise_sigma.is_finite()) {
        return Err(Error::InvalidArgument("noise_sigma must be >= 0".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let n = p.num_subspaces * p.points_per;
    let mut x = DMatrix::zeros(p.ambient_dim, n);
    let mut labels = Vec::with_capacity(n);
    for s in 0..p.num_subspaces {
        let gaussian = DMatrix::from_fn(p.ambient_dim, p.sub_dim, |_, _| normal());
        let basis = gaussian.qr().q();
        let coeffs = DMatrix::from_fn(p.sub_dim, p.points_per, |_, _| normal());
        let mut block = basis * coeffs;
        if p.noise_sigma > 0.0 {
            block += DMatrix::from_fn(p.ambient_dim, p.points_per, |_, _| p.noise_sigma * normal());
        }
        x.columns_mut(s * p.points_per, p.points_per)
            .copy_from(&block);
        labels.extend(std::iter::repeat_n(s, p.points_per));
    }
    Dataset::new(
        DataMatrix::new(x)?,
        labels,
        format!(
            "synth-{}x{}d-in-{}-{}pts",
            p.num_subspaces, p.sub_dim, p.ambient_dim, p.points_per
        ),
    )
}

/// Binary layout: `TLRRAFF1`, rows and cols as little-endian `u64`, then
/// row-major little-endian `f64` entries.
pub fn dump_affinity(w: &DMatrix<f64>, path: &Path) -> Result<()> {
    let mut buf = Vec::with_capacity(AFFINITY_HEADER_LEN + 8 * w.len());
    buf.extend_from_slice(AFFINITY_MAGIC);
    buf.extend_from_slice(&(w.nrows() as u64).to_le_bytes());
    buf.extend_from_slice(&(w.ncols() as u64).to_le_bytes());
    for r in 0..w.nrows() {
        for c in 0..w.ncols() {
            buf.extend_from_slice(&w[(r, c)].to_le_bytes());
        }
    }
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_affinity(path: &Path) -> Result<DMatrix<f64>> {
    decode_affinity(&fs::read(path)?)
}

pub fn decode_affinity(bytes: &[u8]) -> Result<DMatrix<f64>> {
    if bytes.len() < AFFINITY_HEADER_LEN {
        return Err(Error::AffinityFormat(format!(
            "truncated header: {} bytes",
            bytes.len()
        )));
    }
    if &bytes[..8] != AFFINITY_MAGIC {
        return Err(Error::AffinityFormat("bad magic".into()));
    }
    let read_u64 = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let rows =
        usize::try_from(read_u64(8)).map_err(|_| Error::AffinityFormat("rows overflow".into()))?;
    let cols =
        usize::try_from(read_u64(16)).map_err(|_| Error::AffinityFormat("cols overflow".into()))?;
    let expected = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| Error::AffinityFormat("dimensions overflow".into()))?;
    let payload = &bytes[AFFINITY_HEADER_LEN..];
    if payload.len() != expected {
        return Err(Error::AffinityFormat(format!(
            "expected {expected} payload bytes for {rows}x{cols}, found {}",
            payload.len()
        )));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}
