//! Invariant checks shared by the property suite and the acceptance run.
//! Each returns `Err(description)` on the first violation.
#![allow(dead_code)]
// Checks are written as negated comparisons so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tlrr::constraints::{constraints_from_labels, encode, ConstraintSet};
use tlrr::data::{self, DataMatrix, SynthParams};
use tlrr::graph::{knn_graph, laplacian, Laplacian};
use tlrr::metrics::{clustering_accuracy, nmi};
use tlrr::postprocess::{repair, symmetrize};
use tlrr::solver::{self, Hyperparams, Scale, SolverState};
use tlrr::spectral::{spectral_clustering, KMeans};
use tlrr::tensor::{self, Tensor2};

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_mat(rng: &mut impl Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn rand_tensor(rng: &mut impl Rng, r: usize, c: usize) -> Tensor2 {
    Tensor2::new(rand_mat(rng, r, c), rand_mat(rng, r, c)).unwrap()
}

pub fn random_state(rng: &mut impl Rng, d: usize, n: usize) -> SolverState {
    SolverState {
        z: rand_mat(rng, n, n),
        b: rand_mat(rng, n, n),
        c: rand_tensor(rng, n, n),
        d: rand_mat(rng, n, n),
        e: rand_mat(rng, d, n),
        y1: rand_mat(rng, d, n),
        y2: rand_tensor(rng, n, n),
        y3: rand_mat(rng, n, n),
        mu: rng.gen_range(0.1..10.0),
        iter: 1,
    }
}

pub fn random_laplacian(rng: &mut impl Rng, n: usize) -> Laplacian {
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(0.3) {
                w[(i, j)] = 1.0;
                w[(j, i)] = 1.0;
            }
        }
    }
    laplacian(&tlrr::graph::NeighborGraph::from_weights(w).unwrap())
}

fn fro(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

// ---- tensor ----

pub fn dft_round_trip(t: &Tensor2) -> Check {
    let back = tensor::dft2_inverse(&tensor::dft2_forward(t).unwrap()).unwrap();
    let err = back.sub(t).unwrap().norm();
    ensure!(err <= 1e-12 * (1.0 + t.norm()), "round trip error {err:e}");
    Ok(())
}

pub fn parseval(t: &Tensor2) -> Check {
    let f = tensor::dft2_forward(t).unwrap();
    let lhs = t.norm_squared();
    let rhs = (f.f1.norm_squared() + f.f2.norm_squared()) / 2.0;
    ensure!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs), "{lhs} vs {rhs}");
    Ok(())
}

pub fn tsvt_nonexpansive(a: &Tensor2, b: &Tensor2, tau: f64) -> Check {
    let pa = tensor::tsvt(a, tau).unwrap();
    let pb = tensor::tsvt(b, tau).unwrap();
    let out = pa.sub(&pb).unwrap().norm();
    let inp = a.sub(b).unwrap().norm();
    ensure!(
        out <= inp + 1e-10,
        "||P(a)-P(b)|| = {out} > ||a-b|| = {inp}"
    );
    Ok(())
}

pub fn tsvt_shrinks(t: &Tensor2, tau: f64) -> Check {
    let before = tensor::tnn(t).unwrap();
    let after = tensor::tnn(&tensor::tsvt(t, tau).unwrap()).unwrap();
    if tau == 0.0 {
        ensure!(
            (after - before).abs() <= 1e-10 * (1.0 + before),
            "tau=0 changed tnn"
        );
    } else {
        ensure!(
            after < before || before == 0.0,
            "tnn {before} -> {after} at tau={tau}"
        );
    }
    Ok(())
}

pub fn svt_singular_bound(m: &DMatrix<f64>, tau: f64) -> Check {
    let top = tensor::singular_values(m).unwrap()[0];
    let out = tensor::singular_values(&tensor::svt(m, tau).unwrap()).unwrap();
    let bound = (top - tau).max(0.0) + 1e-10;
    ensure!(
        out.iter().all(|&s| s <= bound),
        "singular value above {bound}: {out:?}"
    );
    Ok(())
}

/// Prox objective `tau * g(p) + ||p - v||^2 / 2` at the prox output beats 100
/// perturbations of decreasing size.
pub fn tsvt_beats_perturbations(rng: &mut impl Rng, n: usize) -> Check {
    let v = rand_tensor(rng, n, n);
    let tau = rng.gen_range(0.05..1.5);
    let obj = |p: &Tensor2| tau * tensor::tnn(p).unwrap() + 0.5 * p.sub(&v).unwrap().norm_squared();
    let best_p = tensor::tsvt(&v, tau).unwrap();
    let best = obj(&best_p);
    for k in 0..100 {
        let scale = 10f64.powi(-(k % 5));
        let d = rand_tensor(rng, n, n);
        let q = Tensor2::new(
            &best_p.slice1 + &d.slice1 * scale,
            &best_p.slice2 + &d.slice2 * scale,
        )
        .unwrap();
        ensure!(
            obj(&q) - best >= -1e-9,
            "perturbation improved tsvt objective by {}",
            best - obj(&q)
        );
    }
    Ok(())
}

pub fn svt_beats_perturbations(rng: &mut impl Rng, n: usize) -> Check {
    let v = rand_mat(rng, n, n);
    let tau = rng.gen_range(0.05..1.5);
    let obj =
        |p: &DMatrix<f64>| tau * tensor::nuclear_norm(p).unwrap() + 0.5 * (p - &v).norm_squared();
    let best_p = tensor::svt(&v, tau).unwrap();
    let best = obj(&best_p);
    for k in 0..100 {
        let scale = 10f64.powi(-(k % 5));
        let q = &best_p + rand_mat(rng, n, n) * scale;
        ensure!(
            obj(&q) - best >= -1e-9,
            "perturbation improved svt objective by {}",
            best - obj(&q)
        );
    }
    Ok(())
}

// ---- constraints ----

pub fn encode_is_symmetric_signed(labels: &[usize], labeled: &[usize], s: f64) -> Check {
    let cs = constraints_from_labels(labeled, labels).map_err(|e| e.to_string())?;
    let b = encode(&cs, s).map_err(|e| e.to_string())?.b;
    ensure!(b == b.transpose(), "encoded matrix not symmetric");
    ensure!(b.diagonal().iter().all(|&v| v == 0.0), "nonzero diagonal");
    ensure!(
        b.iter().all(|&v| v == 0.0 || v == s || v == -s),
        "entry outside {{-s, 0, s}}"
    );
    Ok(())
}

pub fn constraints_relabel_invariant(labels: &[usize], labeled: &[usize], perm: &[usize]) -> Check {
    let relabeled: Vec<usize> = labels.iter().map(|&l| perm[l]).collect();
    let a = constraints_from_labels(labeled, labels).map_err(|e| e.to_string())?;
    let b = constraints_from_labels(labeled, &relabeled).map_err(|e| e.to_string())?;
    ensure!(a == b, "relabeling changed the constraint set");
    Ok(())
}

// ---- graph ----

pub fn laplacian_rows_and_spectrum(x: &DataMatrix, k: usize) -> Check {
    let l = laplacian(&knn_graph(x, k).map_err(|e| e.to_string())?);
    let m = l.matrix();
    for (i, row) in m.row_iter().enumerate() {
        ensure!(row.sum().abs() <= 1e-12, "row {i} sums to {}", row.sum());
    }
    let min = m.clone().symmetric_eigenvalues().min();
    ensure!(min >= -1e-10, "smallest eigenvalue {min}");
    Ok(())
}

pub fn knn_permutation_equivariant(x: &DataMatrix, k: usize, perm: &[usize]) -> Check {
    let xm = x.matrix();
    let xp = DataMatrix::new(DMatrix::from_fn(xm.nrows(), xm.ncols(), |r, c| {
        xm[(r, perm[c])]
    }))
    .unwrap();
    let w = knn_graph(x, k)
        .map_err(|e| e.to_string())?
        .weights()
        .clone();
    let wp = knn_graph(&xp, k)
        .map_err(|e| e.to_string())?
        .weights()
        .clone();
    for i in 0..perm.len() {
        for j in 0..perm.len() {
            ensure!(
                wp[(i, j)] == w[(perm[i], perm[j])],
                "w mismatch at ({i}, {j})"
            );
        }
    }
    Ok(())
}

// ---- solver ----

/// Gradient (or subgradient) residuals of the Z, B and E subproblems at the
/// returned minimizers.
pub fn subproblems_stationary(rng: &mut impl Rng, d: usize, n: usize) -> Check {
    let st = random_state(rng, d, n);
    let x = DataMatrix::new(rand_mat(rng, d, n)).unwrap();
    let xm = x.matrix();
    let mu = st.mu;
    let beta: f64 = rng.gen_range(0.0..20.0);
    let lambda: f64 = rng.gen_range(0.01..2.0);
    let l = random_laplacian(rng, n);

    let gram_inv = solver::gram_inverse(&x).unwrap();
    let z = solver::update_z(&st, &x, &gram_inv);
    let r = xm - xm * &z - &st.e;
    let grad_z = -xm.tr_mul(&st.y1) - xm.tr_mul(&r) * mu + &st.y2.slice1 + (&z - &st.c.slice1) * mu;
    ensure!(fro(&grad_z) < 1e-8, "Z gradient norm {:e}", fro(&grad_z));

    let b = solver::update_b(&st, &l, beta).unwrap();
    let lm = l.matrix();
    let grad_b = &b * (lm + lm.transpose()) * beta
        + &st.y2.slice2
        + (&b - &st.c.slice2) * mu
        + &st.y3
        + (&b - &st.d) * mu;
    ensure!(fro(&grad_b) < 1e-8, "B gradient norm {:e}", fro(&grad_b));

    let e = solver::update_e(&st, &x, lambda);
    let q = xm - xm * &st.z + &st.y1 / mu;
    for j in 0..n {
        let ej = e.column(j);
        let qj = q.column(j);
        let norm = ej.norm();
        if norm > 0.0 {
            let g = (ej / norm) * lambda + (ej - qj) * mu;
            ensure!(g.norm() < 1e-8, "E column {j} gradient {:e}", g.norm());
        } else {
            ensure!(
                qj.norm() * mu <= lambda + 1e-10,
                "E column {j} zeroed wrongly"
            );
        }
    }
    Ok(())
}

pub struct SolveTrace {
    pub mus: Vec<f64>,
    pub clamp_violations: usize,
    pub result: solver::SolveResult,
}

/// Runs the joint solver and records the penalty schedule and, from the second
/// iteration on, any constrained `D` entry that is not exactly `+-s`.
pub fn observed_solve(
    x: &DataMatrix,
    cs: &ConstraintSet,
    p: &Hyperparams,
    l: &Laplacian,
) -> SolveTrace {
    let s = match p.s {
        Scale::Fixed(s) => s,
        Scale::Auto => panic!("observed_solve needs a fixed scale"),
    };
    let mut mus = Vec::new();
    let mut clamp_violations = 0;
    let result = solver::solve_observed(x, cs, p, l, |st| {
        mus.push(st.mu);
        if st.iter >= 2 {
            clamp_violations += cs
                .must
                .iter()
                .filter(|&&(i, j)| st.d[(i, j)] != s || st.d[(j, i)] != s)
                .count();
            clamp_violations += cs
                .cannot
                .iter()
                .filter(|&&(i, j)| st.d[(i, j)] != -s || st.d[(j, i)] != -s)
                .count();
        }
    })
    .unwrap();
    SolveTrace {
        mus,
        clamp_violations,
        result,
    }
}

pub fn solver_run_invariants(seed: u64) -> Check {
    let ds = data::synth_subspaces(&SynthParams {
        num_subspaces: 3,
        points_per: 15,
        ambient_dim: 20,
        seed,
        ..Default::default()
    })
    .unwrap();
    let labeled = tlrr::constraints::sample_labeled(45, 0.3, seed).unwrap();
    let cs = constraints_from_labels(&labeled, &ds.labels).unwrap();
    let l = laplacian(&knn_graph(&ds.x, 5).unwrap());
    let p = Hyperparams {
        s: Scale::Fixed(0.05),
        ..Default::default()
    };
    let t = observed_solve(&ds.x, &cs, &p, &l);
    ensure!(t.mus.windows(2).all(|w| w[0] <= w[1]), "mu decreased");
    ensure!(t.mus.iter().all(|&m| m <= p.mu_max), "mu above cap");
    ensure!(
        t.clamp_violations == 0,
        "{} constrained D entries off +-s",
        t.clamp_violations
    );
    ensure!(
        t.result.converged,
        "no convergence in {} iterations",
        t.result.iterations
    );
    ensure!(
        t.result.residuals.max() < p.tol,
        "residual {:e}",
        t.result.residuals.max()
    );
    let again = solver::solve(&ds.x, &cs, &p, &l).unwrap();
    let same = |a: &DMatrix<f64>, b: &DMatrix<f64>| {
        a.iter()
            .zip(b.iter())
            .all(|(u, v)| u.to_bits() == v.to_bits())
    };
    ensure!(
        same(&again.z, &t.result.z) && same(&again.b, &t.result.b),
        "solve not bitwise deterministic"
    );
    Ok(())
}

/// `solve_lrr` at large lambda on noiseless independent subspaces against the
/// shape interaction matrix `V V^T`. Returns the Frobenius gap.
pub fn lrr_shape_interaction_gap(lambda: f64, seed: u64) -> f64 {
    let ds = data::synth_subspaces(&SynthParams {
        num_subspaces: 3,
        sub_dim: 3,
        ambient_dim: 30,
        points_per: 20,
        noise_sigma: 0.0,
        seed,
    })
    .unwrap();
    let x = ds.x.matrix();
    let svd = x.clone().svd(false, true);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-9 * svd.singular_values.max())
        .count();
    let v_t = svd.v_t.unwrap();
    let v = v_t.rows(0, rank).transpose();
    let oracle = &v * v.transpose();
    let z = solver::solve_lrr(&ds.x, lambda, &Hyperparams::default())
        .unwrap()
        .z;
    (z - oracle).norm()
}

// ---- postprocess ----

pub fn repair_properties(z: &DMatrix<f64>, b: &DMatrix<f64>, b_hi: &DMatrix<f64>) -> Check {
    let zero = DMatrix::zeros(z.nrows(), z.ncols());
    ensure!(repair(z, &zero) == *z, "repair(z, 0) != z");
    let lo = repair(z, b);
    let hi = repair(z, b_hi);
    ensure!(
        lo.iter().all(|&v| (0.0..=1.0).contains(&v)),
        "repair left [0, 1]"
    );
    ensure!(
        lo.iter().zip(hi.iter()).all(|(a, c)| a <= c),
        "repair not monotone in b"
    );
    Ok(())
}

pub fn symmetrize_exact(z: &DMatrix<f64>) -> Check {
    let w = symmetrize(z);
    ensure!(w == w.transpose(), "symmetrize output not symmetric");
    Ok(())
}

// ---- spectral ----

/// Random graph with `k` disconnected blocks; returns it with its block labels.
pub fn block_graph(rng: &mut impl Rng, sizes: &[usize]) -> (DMatrix<f64>, Vec<usize>) {
    let n: usize = sizes.iter().sum();
    let labels: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(c, &m)| std::iter::repeat_n(c, m))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let shuffled: Vec<usize> = order.iter().map(|&i| labels[i]).collect();
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if shuffled[i] == shuffled[j] {
                let v = rng.gen_range(0.2..1.0);
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
    }
    (w, shuffled)
}

pub fn spectral_recovers_components(
    w: &DMatrix<f64>,
    truth: &[usize],
    k: usize,
    seed: u64,
) -> Check {
    let a = spectral_clustering(w, k, seed).map_err(|e| e.to_string())?;
    let b = spectral_clustering(w, k, seed).map_err(|e| e.to_string())?;
    ensure!(a == b, "spectral clustering not deterministic");
    let acc = clustering_accuracy(&a.assign, truth).unwrap();
    ensure!(acc == 1.0, "components not recovered (accuracy {acc})");
    Ok(())
}

pub fn kmeans_keeps_best_restart(points: &DMatrix<f64>, k: usize, seed: u64) -> Check {
    let fit = KMeans::default()
        .fit(points, k, seed)
        .map_err(|e| e.to_string())?;
    ensure!(fit.restart_wcss.len() == 20, "expected 20 restarts");
    ensure!(
        fit.restart_wcss.iter().all(|&w| fit.wcss <= w),
        "returned WCSS above a restart"
    );
    Ok(())
}

// ---- metrics ----

pub fn brute_force_accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let p = data::remap_labels(pred);
    let t = data::remap_labels(truth);
    let size = (p.iter().max().unwrap() + 1).max(t.iter().max().unwrap() + 1);
    let mut map: Vec<usize> = (0..size).collect();
    let mut best = 0;
    fn rec(map: &mut Vec<usize>, k: usize, p: &[usize], t: &[usize], best: &mut usize) {
        if k == map.len() {
            *best = (*best).max(p.iter().zip(t).filter(|(&a, &b)| map[a] == b).count());
            return;
        }
        for i in k..map.len() {
            map.swap(k, i);
            rec(map, k + 1, p, t, best);
            map.swap(k, i);
        }
    }
    rec(&mut map, 0, &p, &t, &mut best);
    best as f64 / pred.len() as f64
}

/// NMI straight from the contingency table, `sum n_ij ln(n n_ij / (a_i b_j))`.
pub fn contingency_nmi(pred: &[usize], truth: &[usize]) -> f64 {
    let p = data::remap_labels(pred);
    let t = data::remap_labels(truth);
    let (kp, kt) = (p.iter().max().unwrap() + 1, t.iter().max().unwrap() + 1);
    let n = p.len() as f64;
    let mut table = DMatrix::<f64>::zeros(kp, kt);
    for (&a, &b) in p.iter().zip(&t) {
        table[(a, b)] += 1.0;
    }
    let rows: Vec<f64> = table.row_iter().map(|r| r.sum()).collect();
    let cols: Vec<f64> = table.column_iter().map(|c| c.sum()).collect();
    let h = |v: &[f64]| -v.iter().map(|&c| c / n * (c / n).ln()).sum::<f64>();
    let (hp, ht) = (h(&rows), h(&cols));
    if hp == 0.0 || ht == 0.0 {
        return if kp == 1 && kt == 1 { 1.0 } else { 0.0 };
    }
    let mut mi = 0.0;
    for i in 0..kp {
        for j in 0..kt {
            let c = table[(i, j)];
            if c > 0.0 {
                mi += c / n * (n * c / (rows[i] * cols[j])).ln();
            }
        }
    }
    mi / (hp * ht).sqrt()
}

pub fn metric_properties(
    pred: &[usize],
    truth: &[usize],
    perm_p: &[usize],
    perm_t: &[usize],
) -> Check {
    let acc = clustering_accuracy(pred, truth).unwrap();
    let mi = nmi(pred, truth).unwrap();
    let rp: Vec<usize> = pred.iter().map(|&l| perm_p[l]).collect();
    let rt: Vec<usize> = truth.iter().map(|&l| perm_t[l]).collect();
    ensure!(
        clustering_accuracy(&rp, &rt).unwrap() == acc,
        "accuracy changed under relabeling"
    );
    ensure!(
        (nmi(&rp, &rt).unwrap() - mi).abs() <= 1e-12,
        "nmi changed under relabeling"
    );
    ensure!(
        (nmi(truth, pred).unwrap() - mi).abs() <= 1e-12,
        "nmi not symmetric"
    );
    ensure!(
        clustering_accuracy(pred, pred).unwrap() == 1.0,
        "accuracy(p, p) != 1"
    );
    let distinct = pred.iter().collect::<std::collections::BTreeSet<_>>().len();
    if distinct > 1 {
        ensure!(
            (nmi(pred, pred).unwrap() - 1.0).abs() <= 1e-12,
            "nmi(p, p) != 1"
        );
    }
    ensure!(
        acc == brute_force_accuracy(pred, truth),
        "accuracy differs from brute force"
    );
    ensure!(
        (mi - contingency_nmi(pred, truth)).abs() <= 1e-12,
        "nmi differs from contingency oracle"
    );
    Ok(())
}

// ---- data ----

pub fn loaders_reject_malformed(dir: &std::path::Path) -> Check {
    use tlrr::data::Orientation;
    let cases: &[(&str, &str)] = &[
        ("empty.csv", ""),
        ("ragged.csv", "1,2,3\n4,5\n"),
        ("text.csv", "1,2\n3,x\n"),
        ("nan.csv", "1,2\nNaN,4\n"),
    ];
    for (name, body) in cases {
        let path = dir.join(name);
        std::fs::write(&path, body).unwrap();
        ensure!(
            data::load_csv(&path, Orientation::SamplesAsRows).is_err(),
            "{name} accepted"
        );
    }
    for (name, body) in [
        ("labels_empty.txt", "\n\n"),
        ("labels_float.txt", "1\n2.5\n"),
        ("labels_word.txt", "1\nb\n"),
    ] {
        let path = dir.join(name);
        std::fs::write(&path, body).unwrap();
        ensure!(data::load_labels(&path).is_err(), "{name} accepted");
    }
    for (name, body) in [
        ("c_sign.txt", "0,1,+2\n"),
        ("c_short.txt", "0,1\n"),
        ("c_range.txt", "0,9,-1\n"),
    ] {
        let path = dir.join(name);
        std::fs::write(&path, body).unwrap();
        ensure!(ConstraintSet::read(&path, 4).is_err(), "{name} accepted");
    }
    let path = dir.join("trunc.bin");
    let mut bytes = b"TLRRAFF1".to_vec();
    bytes.extend(2u64.to_le_bytes());
    bytes.extend(2u64.to_le_bytes());
    bytes.extend(1.0f64.to_le_bytes());
    std::fs::write(&path, &bytes).unwrap();
    ensure!(
        data::load_affinity(&path).is_err(),
        "truncated affinity accepted"
    );
    Ok(())
}

pub fn synth_balanced(p: &SynthParams) -> Check {
    let ds = data::synth_subspaces(p).map_err(|e| e.to_string())?;
    for c in 0..p.num_subspaces {
        let count = ds.labels.iter().filter(|&&l| l == c).count();
        ensure!(count == p.points_per, "class {c} has {count} samples");
    }
    ensure!(
        ds.x.sample_count() == p.num_subspaces * p.points_per,
        "wrong sample count"
    );
    Ok(())
}

// ---- experiment ----

pub fn report_properties(report: &tlrr::experiment::ExperimentReport) -> Check {
    use tlrr::experiment::aggregate;
    let cfg = &report.config;
    ensure!(
        report.trials.len() == cfg.trials * cfg.percentages.len(),
        "wrong trial count"
    );
    let seeds: std::collections::BTreeSet<(u64, u64)> = report
        .trials
        .iter()
        .map(|t| (t.seed, tlrr::experiment::label_seed(t.seed, t.percentage)))
        .collect();
    ensure!(seeds.len() == report.trials.len(), "trial seeds collide");
    ensure!(
        aggregate(&report.trials, &cfg.percentages) == report.aggregates,
        "aggregates differ from recomputation"
    );
    let sorted = report
        .trials
        .windows(2)
        .all(|w| (w[0].percentage, w[0].trial) < (w[1].percentage, w[1].trial));
    ensure!(sorted, "trials not sorted by (percentage, trial)");
    Ok(())
}

/// Report JSON with the timing fields blanked.
pub fn report_without_timings(report: &tlrr::experiment::ExperimentReport) -> String {
    let mut r = report.clone();
    for t in &mut r.trials {
        t.solve_seconds = 0.0;
    }
    serde_json::to_string_pretty(&r).unwrap()
}
