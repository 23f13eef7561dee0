//! Supervisory labels and the pairwise constraints inferred from them.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, ParseError, Result};

/// Must-link and cannot-link pairs over `n` samples.
///
/// Pairs are stored unordered as `(min, max)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    pub n: usize,
    pub must: BTreeSet<(usize, usize)>,
    pub cannot: BTreeSet<(usize, usize)>,
}

fn ordered(i: usize, j: usize) -> (usize, usize) {
    if i <= j {
        (i, j)
    } else {
        (j, i)
    }
}

impl ConstraintSet {
    pub fn new(n: usize) -> Self {
        ConstraintSet {
            n,
            ..Default::default()
        }
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<(usize, usize)> {
        if i == j || i >= self.n || j >= self.n {
            return Err(Error::InvalidPair { i, j, n: self.n });
        }
        Ok(ordered(i, j))
    }

    pub fn add_must(&mut self, i: usize, j: usize) -> Result<()> {
        let pair = self.check_pair(i, j)?;
        if self.cannot.contains(&pair) {
            return Err(Error::ConflictingConstraint {
                i: pair.0,
                j: pair.1,
            });
        }
        self.must.insert(pair);
        Ok(())
    }

    pub fn add_cannot(&mut self, i: usize, j: usize) -> Result<()> {
        let pair = self.check_pair(i, j)?;
        if self.must.contains(&pair) {
            return Err(Error::ConflictingConstraint {
                i: pair.0,
                j: pair.1,
            });
        }
        self.cannot.insert(pair);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.must.len() + self.cannot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.must.is_empty() && self.cannot.is_empty()
    }

    /// Sign of the constraint on `(i, j)`: `+1` must-link, `-1` cannot-link.
    pub fn sign(&self, i: usize, j: usize) -> Option<f64> {
        let pair = ordered(i, j);
        if self.must.contains(&pair) {
            Some(1.0)
        } else if self.cannot.contains(&pair) {
            Some(-1.0)
        } else {
            None
        }
    }

    /// Checks the set invariants. Needed because the pair sets are public.
    pub fn validate(&self) -> Result<()> {
        for &(i, j) in self.must.iter().chain(self.cannot.iter()) {
            if i == j || i >= self.n || j >= self.n {
                return Err(Error::InvalidPair { i, j, n: self.n });
            }
        }
        let norm = |s: &BTreeSet<(usize, usize)>| -> BTreeSet<(usize, usize)> {
            s.iter().map(|&(i, j)| ordered(i, j)).collect()
        };
        let must = norm(&self.must);
        if let Some(&(i, j)) = norm(&self.cannot).intersection(&must).next() {
            return Err(Error::ConflictingConstraint { i, j });
        }
        Ok(())
    }

    /// Reads `i,j,+1` / `i,j,-1` lines with zero-based indices.
    pub fn read(path: &Path, n: usize) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let parse_err = |kind| Error::Parse {
            path: path.to_path_buf(),
            kind,
        };
        let mut cs = ConstraintSet::new(n);
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || {
                parse_err(ParseError::BadConstraint {
                    line: idx as u64 + 1,
                    text: line.to_string(),
                })
            };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(bad());
            }
            let i: usize = fields[0].parse().map_err(|_| bad())?;
            let j: usize = fields[1].parse().map_err(|_| bad())?;
            match fields[2] {
                "+1" | "1" => cs.add_must(i, j)?,
                "-1" => cs.add_cannot(i, j)?,
                _ => return Err(bad()),
            }
        }
        Ok(cs)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(fs::File::create(path)?);
        for &(i, j) in &self.must {
            writeln!(out, "{i},{j},+1")?;
        }
        for &(i, j) in &self.cannot {
            writeln!(out, "{i},{j},-1")?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Signed, scaled constraint matrix: `+s` on must-links, `-s` on cannot-links.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix {
    pub b: DMatrix<f64>,
    pub scale: f64,
}

/// Draws `ceil(pct * n)` distinct sample indices uniformly without replacement.
///
/// The result is sorted and depends only on `(n, pct, seed)`.
pub fn sample_labeled(n: usize, pct: f64, seed: u64) -> Result<Vec<usize>> {
    if !(pct > 0.0 && pct <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "label fraction must lie in (0, 1], got {pct}"
        )));
    }
    // Guard against 0.3 * 10 = 3.0000000000000004 rounding up to 4.
    let count = ((pct * n as f64) - 1e-9).ceil().clamp(0.0, n as f64) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, n, count).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Every pair of labeled samples becomes a must-link (same label) or a
/// cannot-link (different labels). No transitive closure is applied.
pub fn constraints_from_labels(labeled: &[usize], labels: &[usize]) -> Result<ConstraintSet> {
    let mut cs = ConstraintSet::new(labels.len());
    for (a, &i) in labeled.iter().enumerate() {
        for &j in &labeled[a + 1..] {
            if i == j {
                continue;
            }
            if i >= labels.len() || j >= labels.len() {
                return Err(Error::InvalidPair {
                    i,
                    j,
                    n: labels.len(),
                });
            }
            if labels[i] == labels[j] {
                cs.add_must(i, j)?;
            } else {
                cs.add_cannot(i, j)?;
            }
        }
    }
    Ok(cs)
}

pub fn encode(cs: &ConstraintSet, s: f64) -> Result<PairwiseMatrix> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "scale must be > 0, got {s}"
        )));
    }
    cs.validate()?;
    let mut b = DMatrix::zeros(cs.n, cs.n);
    for &(i, j) in &cs.must {
        b[(i, j)] = s;
        b[(j, i)] = s;
    }
    for &(i, j) in &cs.cannot {
        b[(i, j)] = -s;
        b[(j, i)] = -s;
    }
    Ok(PairwiseMatrix { b, scale: s })
}
