//! Clustering accuracy under the optimal label matching, and NMI.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::remap_labels;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub accuracy: f64,
    pub nmi: f64,
}

pub fn evaluate(pred: &[usize], truth: &[usize]) -> Result<MetricReport> {
    Ok(MetricReport {
        accuracy: clustering_accuracy(pred, truth)?,
        nmi: nmi(pred, truth)?,
    })
}

fn check_lengths(pred: &[usize], truth: &[usize]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "label length mismatch: predicted={}, truth={}",
            pred.len(),
            truth.len()
        )));
    }
    Ok(())
}

/// Contingency counts over remapped labels: `table[p][t]`.
fn contingency(pred: &[usize], truth: &[usize]) -> Vec<Vec<usize>> {
    let p = remap_labels(pred);
    let t = remap_labels(truth);
    let kp = p.iter().max().map_or(0, |m| m + 1);
    let kt = t.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0usize; kt]; kp];
    for (&a, &b) in p.iter().zip(&t) {
        table[a][b] += 1;
    }
    table
}

/// Fraction of samples that agree under the best one-to-one mapping of
/// predicted clusters to classes.
pub fn clustering_accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(pred, truth)?;
    if pred.is_empty() {
        return Ok(1.0);
    }
    let table = contingency(pred, truth);
    let size = table.len().max(table[0].len());
    let max_count = table.iter().flatten().copied().max().unwrap_or(0) as i64;
    // Square cost matrix; padded cells have count 0.
    let cost: Vec<Vec<i64>> = (0..size)
        .map(|r| {
            (0..size)
                .map(|c| {
                    let count = table
                        .get(r)
                        .and_then(|row| row.get(c))
                        .copied()
                        .unwrap_or(0);
                    max_count - count as i64
                })
                .collect()
        })
        .collect();
    let matching = hungarian(&cost);
    let matched: usize = matching
        .iter()
        .enumerate()
        .map(|(r, &c)| {
            table
                .get(r)
                .and_then(|row| row.get(c))
                .copied()
                .unwrap_or(0)
        })
        .sum();
    Ok(matched as f64 / pred.len() as f64)
}

/// Minimum-cost perfect matching on a square matrix (Kuhn-Munkres with
/// potentials, O(n^3)). Returns the column assigned to each row.
fn hungarian(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    const INF: i64 = i64::MAX / 4;
    // 1-based arrays; index 0 is the virtual root.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if row_of[j] > 0 {
            assignment[row_of[j] - 1] = j - 1;
        }
    }
    assignment
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// `I(pred; truth) / sqrt(H(pred) H(truth))` with natural logs.
///
/// When either entropy is zero the score is 1 if both labelings are a single
/// cluster and 0 otherwise.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(pred, truth)?;
    if pred.is_empty() {
        return Ok(1.0);
    }
    let n = pred.len() as f64;
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut pc: BTreeMap<usize, usize> = BTreeMap::new();
    let mut tc: BTreeMap<usize, usize> = BTreeMap::new();
    for (&a, &b) in pred.iter().zip(truth) {
        *joint.entry((a, b)).or_default() += 1;
        *pc.entry(a).or_default() += 1;
        *tc.entry(b).or_default() += 1;
    }
    let hp = entropy(pc.values().copied(), n);
    let ht = entropy(tc.values().copied(), n);
    if hp == 0.0 || ht == 0.0 {
        return Ok(if pc.len() == 1 && tc.len() == 1 {
            1.0
        } else {
            0.0
        });
    }
    // ordered maps keep the summation order, and so the last bits, reproducible
    let mi: f64 = joint
        .into_iter()
        .map(|((a, b), c)| {
            let pab = c as f64 / n;
            let pa = pc[&a] as f64 / n;
            let pb = tc[&b] as f64 / n;
            pab * (pab / (pa * pb)).ln()
        })
        .sum();
    Ok((mi / (hp * ht).sqrt()).clamp(0.0, 1.0))
}
