//! ADMM solvers.
//!
//! [`solve`] handles the joint model
//!
//! ```text
//! min  tnn(C) + lambda * ||E||_{2,1} + beta * tr(B L B^T)
//! s.t. X = X Z + E,  C(:,:,1) = Z,  C(:,:,2) = B,  D = B,
//!      D_ij = +s on must-links,  D_ij = -s on cannot-links
//! ```
//!
//! by cycling through the C, Z, B, D and E subproblems followed by a dual
//! ascent step and geometric growth of the penalty `mu`. [`solve_lrr`] is the
//! plain low-rank representation solver used to calibrate `s`.

use std::io::Write;
use std::path::Path;

use log::{debug, warn};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintSet;
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::graph::Laplacian;
use crate::tensor::{self, Tensor2};

/// Scale `s` of the clamped constraint entries.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Scale {
    /// Largest absolute entry of the plain LRR affinity for the same data.
    #[default]
    Auto,
    Fixed(f64),
}

impl Serialize for Scale {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scale::Auto => ser.serialize_str("auto"),
            Scale::Fixed(v) => ser.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Scale {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(v) if v > 0.0 && v.is_finite() => Ok(Scale::Fixed(v)),
            Raw::Num(v) => Err(serde::de::Error::custom(format!("s must be > 0, got {v}"))),
            Raw::Text(t) if t == "auto" => Ok(Scale::Auto),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "s must be a positive number or \"auto\", got {t:?}"
            ))),
        }
    }
}

/// Step applied to the `B = D` multiplier.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxStep {
    /// `Y3 += mu (B - D)`, like the other multipliers.
    #[default]
    Penalty,
    /// `Y3 += B - D`. On unconstrained entries this maps `Y3` to
    /// `(1 - 1/mu) Y3`, which blows up while `mu < 1/2`.
    Unit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Hyperparams {
    /// Weight of the column-sparse error term.
    pub lambda: f64,
    /// Weight of the graph Laplacian term on `B`.
    pub beta: f64,
    /// Penalty growth factor.
    pub rho: f64,
    pub mu0: f64,
    pub mu_max: f64,
    pub max_iter: usize,
    /// Stop once every feasibility residual (max-abs entry) is below this.
    pub tol: f64,
    pub k_nn: usize,
    pub s: Scale,
    pub aux_step: AuxStep,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            lambda: 0.01,
            beta: 10.0,
            rho: 1.1,
            mu0: 1e-3,
            mu_max: 1e10,
            max_iter: 500,
            tol: 1e-7,
            k_nn: 5,
            s: Scale::Auto,
            aux_step: AuxStep::Penalty,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be > 0, got {}", self.lambda));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be >= 0, got {}", self.beta));
        }
        if !(self.rho > 1.0 && self.rho.is_finite()) {
            return bad(format!("rho must be > 1, got {}", self.rho));
        }
        if !(self.mu0 > 0.0 && self.mu0 <= self.mu_max && self.mu_max.is_finite()) {
            return bad(format!(
                "need 0 < mu0 <= mu_max, got mu0={} mu_max={}",
                self.mu0, self.mu_max
            ));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive".into());
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("tol must be > 0, got {}", self.tol));
        }
        if self.k_nn == 0 {
            return bad("k_nn must be positive".into());
        }
        if let Scale::Fixed(s) = self.s {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("s must be > 0, got {s}"));
            }
        }
        Ok(())
    }
}

/// All ADMM iterates of the joint model.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub z: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: Tensor2,
    pub d: DMatrix<f64>,
    pub e: DMatrix<f64>,
    pub y1: DMatrix<f64>,
    pub y2: Tensor2,
    pub y3: DMatrix<f64>,
    pub mu: f64,
    pub iter: usize,
}

impl SolverState {
    /// All-zero iterates for `feature_dim x n` data.
    pub fn zeros(feature_dim: usize, n: usize, mu: f64) -> Self {
        SolverState {
            z: DMatrix::zeros(n, n),
            b: DMatrix::zeros(n, n),
            c: Tensor2::zeros(n, n),
            d: DMatrix::zeros(n, n),
            e: DMatrix::zeros(feature_dim, n),
            y1: DMatrix::zeros(feature_dim, n),
            y2: Tensor2::zeros(n, n),
            y3: DMatrix::zeros(n, n),
            mu,
            iter: 0,
        }
    }
}

/// Max-abs feasibility residuals of the four equality constraints.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `X - XZ - E`
    pub reconstruction: f64,
    /// `Z - C(:,:,1)`
    pub affinity_slice: f64,
    /// `B - C(:,:,2)`
    pub constraint_slice: f64,
    /// `B - D`
    pub auxiliary: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.reconstruction
            .max(self.affinity_slice)
            .max(self.constraint_slice)
            .max(self.auxiliary)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub objective: f64,
    pub residuals: Residuals,
    pub mu: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub z: DMatrix<f64>,
    /// Augmented constraint matrix, already divided by `s`.
    pub b: DMatrix<f64>,
    pub s: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residuals: Residuals,
    pub trace: Vec<IterationRecord>,
}

impl SolveResult {
    pub fn objective_trace(&self) -> Vec<f64> {
        self.trace.iter().map(|r| r.objective).collect()
    }
}

/// `(I + X^T X)^{-1}`, computed once per dataset.
pub fn gram_inverse(x: &DataMatrix) -> Result<DMatrix<f64>> {
    let xm = x.matrix();
    let n = xm.ncols();
    let gram = DMatrix::<f64>::identity(n, n) + xm.tr_mul(xm);
    let sigma_max = tensor::singular_values(xm)?.into_iter().fold(0.0, f64::max);
    let condition = 1.0 + sigma_max * sigma_max;
    if condition > 1e12 {
        warn!("I + X^T X is ill-conditioned (condition number {condition:.3e})");
    }
    let report = Error::numerical("cholesky", &gram);
    gram.cholesky().map(|c| c.inverse()).ok_or(report)
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

fn l21_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.norm()).sum()
}

fn ensure_finite(m: &DMatrix<f64>, subproblem: &'static str, iteration: usize) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence {
            subproblem,
            iteration,
        })
    }
}

/// Column-wise shrinkage, the proximal operator of `tau * ||.||_{2,1}`.
fn shrink_columns(q: DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let mut e = q;
    for mut col in e.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 && norm >= tau {
            col *= (norm - tau) / norm;
        } else {
            col.fill(0.0);
        }
    }
    e
}

/// C-subproblem: t-SVT of `(Z, B) + Y2 / mu` at threshold `1 / mu`.
pub fn update_c(state: &SolverState) -> Result<Tensor2> {
    update_c_with_norm(state).map(|(c, _)| c)
}

fn update_c_with_norm(state: &SolverState) -> Result<(Tensor2, f64)> {
    let inv_mu = 1.0 / state.mu;
    let target = Tensor2::new(
        &state.z + &state.y2.slice1 * inv_mu,
        &state.b + &state.y2.slice2 * inv_mu,
    )?;
    tensor::tsvt_with_norm(&target, inv_mu)
}

/// Z-subproblem, a least-squares problem with a precomputed Gram inverse.
pub fn update_z(state: &SolverState, x: &DataMatrix, gram_inv: &DMatrix<f64>) -> DMatrix<f64> {
    let xm = x.matrix();
    let inv_mu = 1.0 / state.mu;
    let rhs = xm.tr_mul(&(xm - &state.e + &state.y1 * inv_mu)) + &state.c.slice1
        - &state.y2.slice1 * inv_mu;
    gram_inv * rhs
}

/// B-subproblem: solves `B (beta (L + L^T) + 2 mu I) = mu (C2 + D) - (Y2_2 + Y3)`.
pub fn update_b(state: &SolverState, l: &Laplacian, beta: f64) -> Result<DMatrix<f64>> {
    let n = state.b.nrows();
    let rhs = (&state.c.slice2 + &state.d) * state.mu - (&state.y2.slice2 + &state.y3);
    if beta == 0.0 {
        return Ok(rhs / (2.0 * state.mu));
    }
    let lm = l.matrix();
    if lm.nrows() != n {
        return Err(Error::Shape {
            context: "update_b",
            left: lm.shape(),
            right: (n, n),
        });
    }
    let system = (lm + lm.transpose()) * beta + DMatrix::<f64>::identity(n, n) * (2.0 * state.mu);
    let report = Error::numerical("cholesky", &system);
    let chol = system.cholesky().ok_or(report)?;
    // system is symmetric, so B = rhs * system^{-1} is the transpose of a left solve.
    Ok(chol.solve(&rhs.transpose()).transpose())
}

/// D-subproblem: clamp constrained entries to `+-s`, pass the rest through.
pub fn update_d(state: &SolverState, cs: &ConstraintSet, s: f64) -> DMatrix<f64> {
    let mut d = &state.b + &state.y3 / state.mu;
    for &(i, j) in &cs.must {
        d[(i, j)] = s;
        d[(j, i)] = s;
    }
    for &(i, j) in &cs.cannot {
        d[(i, j)] = -s;
        d[(j, i)] = -s;
    }
    d
}

/// E-subproblem: column shrinkage of `X - XZ + Y1 / mu` by `lambda / mu`.
pub fn update_e(state: &SolverState, x: &DataMatrix, lambda: f64) -> DMatrix<f64> {
    let xm = x.matrix();
    let q = xm - xm * &state.z + &state.y1 / state.mu;
    shrink_columns(q, lambda / state.mu)
}

/// Dual ascent on all multipliers, then `mu <- min(rho mu, mu_max)`.
///
/// The `Y3` step follows `p.aux_step`.
pub fn update_multipliers(state: &mut SolverState, x: &DataMatrix, p: &Hyperparams) {
    let xm = x.matrix();
    let mu = state.mu;
    state.y1 += (xm - xm * &state.z - &state.e) * mu;
    state.y2.slice1 += (&state.z - &state.c.slice1) * mu;
    state.y2.slice2 += (&state.b - &state.c.slice2) * mu;
    match p.aux_step {
        AuxStep::Penalty => state.y3 += (&state.b - &state.d) * mu,
        AuxStep::Unit => state.y3 += &state.b - &state.d,
    }
    state.mu = (p.rho * mu).min(p.mu_max);
}

pub fn residuals(state: &SolverState, x: &DataMatrix) -> Residuals {
    let xm = x.matrix();
    Residuals {
        reconstruction: max_abs(&(xm - xm * &state.z - &state.e)),
        affinity_slice: max_abs(&(&state.z - &state.c.slice1)),
        constraint_slice: max_abs(&(&state.b - &state.c.slice2)),
        auxiliary: max_abs(&(&state.b - &state.d)),
    }
}

fn check_inputs(x: &DataMatrix, cs: &ConstraintSet, l: &Laplacian) -> Result<()> {
    let n = x.sample_count();
    if cs.n != n {
        return Err(Error::InvalidArgument(format!(
            "constraint set is over {} samples, data has {n}",
            cs.n
        )));
    }
    if l.size() != n {
        return Err(Error::Shape {
            context: "laplacian",
            left: l.matrix().shape(),
            right: (n, n),
        });
    }
    cs.validate()
}

/// Runs the joint ADMM from all-zero iterates.
///
/// Stops when every residual is below `p.tol` or after `p.max_iter` rounds.
/// With `Scale::Auto` this first runs [`solve_lrr`] to pick `s`.
pub fn solve(
    x: &DataMatrix,
    cs: &ConstraintSet,
    p: &Hyperparams,
    l: &Laplacian,
) -> Result<SolveResult> {
    solve_observed(x, cs, p, l, |_| {})
}

/// [`solve`] that hands the full state to `observe` after every iteration.
pub fn solve_observed(
    x: &DataMatrix,
    cs: &ConstraintSet,
    p: &Hyperparams,
    l: &Laplacian,
    mut observe: impl FnMut(&SolverState),
) -> Result<SolveResult> {
    p.validate()?;
    check_inputs(x, cs, l)?;
    let s = match p.s {
        Scale::Fixed(s) => s,
        Scale::Auto => compute_s(&solve_lrr(x, p.lambda, p)?.z),
    };
    let gram_inv = gram_inverse(x)?;
    let mut state = SolverState::zeros(x.feature_dim(), x.sample_count(), p.mu0);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut last = Residuals::default();

    for iter in 1..=p.max_iter {
        state.iter = iter;
        let (c, tnn_c) = update_c_with_norm(&state)?;
        if !c.is_finite() {
            return Err(Error::Divergence {
                subproblem: "C",
                iteration: iter,
            });
        }
        state.c = c;
        state.z = update_z(&state, x, &gram_inv);
        ensure_finite(&state.z, "Z", iter)?;
        state.b = update_b(&state, l, p.beta)?;
        ensure_finite(&state.b, "B", iter)?;
        state.d = update_d(&state, cs, s);
        ensure_finite(&state.d, "D", iter)?;
        state.e = update_e(&state, x, p.lambda);
        ensure_finite(&state.e, "E", iter)?;
        update_multipliers(&mut state, x, p);
        ensure_finite(&state.y1, "multiplier", iter)?;
        ensure_finite(&state.y3, "multiplier", iter)?;
        if !state.y2.is_finite() {
            return Err(Error::Divergence {
                subproblem: "multiplier",
                iteration: iter,
            });
        }

        last = residuals(&state, x);
        let graph_term = if p.beta == 0.0 {
            0.0
        } else {
            (&state.b * l.matrix()).component_mul(&state.b).sum()
        };
        let objective = tnn_c + p.lambda * l21_norm(&state.e) + p.beta * graph_term;
        trace.push(IterationRecord {
            iter,
            objective,
            residuals: last,
            mu: state.mu,
        });
        observe(&state);
        if last.max() < p.tol {
            converged = true;
            break;
        }
    }
    debug!(
        "joint solve: {} iterations, converged={converged}, max residual {:.3e}",
        state.iter,
        last.max()
    );

    Ok(SolveResult {
        z: state.z,
        b: state.b / s,
        s,
        iterations: state.iter,
        converged,
        residuals: last,
        trace,
    })
}

#[derive(Debug, Clone)]
pub struct LrrResult {
    pub z: DMatrix<f64>,
    pub e: DMatrix<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Low-rank representation `min ||Z||_* + lambda ||E||_{2,1} s.t. X = XZ + E`,
/// solved with the same penalty schedule as [`solve`] (rho, mu0, mu_max,
/// max_iter, tol are taken from `p`).
pub fn solve_lrr(x: &DataMatrix, lambda: f64, p: &Hyperparams) -> Result<LrrResult> {
    let p = Hyperparams {
        lambda,
        ..p.clone()
    };
    p.validate()?;
    let xm = x.matrix();
    let n = x.sample_count();
    let gram_inv = gram_inverse(x)?;

    let mut z = DMatrix::<f64>::zeros(n, n);
    let mut e = DMatrix::<f64>::zeros(x.feature_dim(), n);
    let mut y1 = DMatrix::<f64>::zeros(x.feature_dim(), n);
    let mut y2 = DMatrix::<f64>::zeros(n, n);
    let mut mu = p.mu0;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=p.max_iter {
        iterations = iter;
        let inv_mu = 1.0 / mu;
        let j = tensor::svt(&(&z + &y2 * inv_mu), inv_mu)?;
        ensure_finite(&j, "J", iter)?;
        z = &gram_inv * (xm.tr_mul(&(xm - &e + &y1 * inv_mu)) + &j - &y2 * inv_mu);
        ensure_finite(&z, "Z", iter)?;
        let xz = xm * &z;
        e = shrink_columns(xm - &xz + &y1 * inv_mu, lambda * inv_mu);
        ensure_finite(&e, "E", iter)?;

        let r1 = xm - &xz - &e;
        let r2 = &z - &j;
        y1 += &r1 * mu;
        y2 += &r2 * mu;
        mu = (p.rho * mu).min(p.mu_max);
        if max_abs(&r1).max(max_abs(&r2)) < p.tol {
            converged = true;
            break;
        }
    }
    debug!("lrr solve: {iterations} iterations, converged={converged}");
    Ok(LrrResult {
        z,
        e,
        iterations,
        converged,
    })
}

/// `1 / ||X^T X_hat||_2`, where `X_hat` has the nonzero columns of `X` scaled to
/// unit norm. For any `lambda` at or below this value the LRR minimizer is
/// exactly `Z = 0`.
pub fn lrr_zero_threshold(x: &DataMatrix) -> f64 {
    let xm = x.matrix();
    let mut xh = xm.clone();
    for mut col in xh.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    let g = xm.tr_mul(&xh);
    let top = g.singular_values().max();
    if top > 0.0 {
        1.0 / top
    } else {
        f64::INFINITY
    }
}

/// Largest absolute entry of an LRR affinity; falls back to 1 for a zero matrix.
pub fn compute_s(z_lrr: &DMatrix<f64>) -> f64 {
    let s = z_lrr.amax();
    if s > 0.0 && s.is_finite() {
        s
    } else {
        warn!("LRR affinity is all zero; using s = 1");
        1.0
    }
}

pub fn write_trace_csv(trace: &[IterationRecord], path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        out,
        "iter,objective,reconstruction,affinity_slice,constraint_slice,auxiliary,mu"
    )?;
    for r in trace {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.iter,
            r.objective,
            r.residuals.reconstruction,
            r.residuals.affinity_slice,
            r.residuals.constraint_slice,
            r.residuals.auxiliary,
            r.mu
        )?;
    }
    out.flush()?;
    Ok(())
}
