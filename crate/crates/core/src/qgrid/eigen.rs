use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::linalg::{dense_hermitian_eigen, prefers_band, BandHermitian, BandLu};
use super::operator::GridOperator;
use super::wave::WaveFunction;
use crate::error::GridError;

/// Required bound on `‖Aψ - λψ‖` for a normalized eigenvector.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub state: WaveFunction,
    pub residual: f64,
}

/// The `k` lowest eigenpairs of a Hermitian grid operator, ascending.
pub fn eigensolve(op: &GridOperator, k: usize) -> Result<Vec<Eigenpair>, GridError> {
    solve(op, Selection::Lowest(k))
}

/// The `k` eigenpairs closest to `target`, ascending in value.
pub fn eigensolve_near(op: &GridOperator, target: f64, k: usize) -> Result<Vec<Eigenpair>, GridError> {
    solve(op, Selection::Near(target, k))
}

#[derive(Clone, Copy)]
enum Selection {
    Lowest(usize),
    Near(f64, usize),
}

fn solve(op: &GridOperator, sel: Selection) -> Result<Vec<Eigenpair>, GridError> {
    if !op.is_hermitian() {
        return Err(GridError::NotHermitian);
    }
    let n = op.size();
    let k = match sel {
        Selection::Lowest(k) | Selection::Near(_, k) => k,
    };
    if k == 0 || k > n {
        return Err(GridError::DimensionMismatch { expected: n, got: k });
    }
    let b = op.symmetrized();
    let (values, vectors) = if prefers_band(&b) { banded(&b, sel)? } else { dense(&b, sel) };
    let w = op.grid().weights();
    let mut out = Vec::with_capacity(values.len());
    for (value, x) in values.into_iter().zip(vectors) {
        let residual = residual(&b, value, &x);
        if !(residual <= RESIDUAL_TOL) {
            return Err(GridError::NoConvergence { residual });
        }
        let psi: Vec<Complex64> = x.iter().zip(w).map(|(v, w)| v / w.sqrt()).collect();
        out.push(Eigenpair { value, state: WaveFunction::new(op.grid(), psi)?, residual });
    }
    Ok(out)
}

fn residual(b: &GridOperator, value: f64, x: &[Complex64]) -> f64 {
    b.apply(x).iter().zip(x).map(|(ax, x)| (ax - x * value).norm_sqr()).sum::<f64>().sqrt()
}

fn pick(values: &[f64], sel: Selection, offset: usize) -> Vec<usize> {
    match sel {
        Selection::Lowest(k) => (0..k).collect(),
        Selection::Near(target, k) => {
            let mut idx: Vec<usize> = (0..values.len()).collect();
            idx.sort_by(|&a, &b| (values[a] - target).abs().total_cmp(&(values[b] - target).abs()));
            idx.truncate(k);
            idx.sort_unstable();
            idx.into_iter().map(|i| i + offset).collect()
        }
    }
}

fn dense(b: &GridOperator, sel: Selection) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let (values, vectors) = dense_hermitian_eigen(b);
    let chosen = pick(&values, sel, 0);
    let vals = chosen.iter().map(|&i| values[i]).collect();
    let vecs = chosen.iter().map(|&i| vectors.column(i).iter().copied().collect()).collect();
    (vals, vecs)
}

fn banded(b: &GridOperator, sel: Selection) -> Result<(Vec<f64>, Vec<Vec<Complex64>>), GridError> {
    let band = BandHermitian::new(b);
    let n = band.size();
    let bounds = band.bounds();
    let indices: Vec<usize> = match sel {
        Selection::Lowest(k) => (0..k).collect(),
        Selection::Near(target, k) => {
            let c = band.count_below(target);
            let lo = c.saturating_sub(k);
            let hi = (c + k).min(n);
            let window: Vec<usize> = (lo..hi).collect();
            let vals: Vec<f64> = window.par_iter().map(|&i| band.eigenvalue(i, bounds)).collect();
            pick(&vals, sel, lo)
        }
    };
    let values: Vec<f64> = indices.par_iter().map(|&i| band.eigenvalue(i, bounds)).collect();
    let scale = band.norm().max(1.0);
    let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(values.len());
    for (j, &lambda) in values.iter().enumerate() {
        let cluster: Vec<usize> = (0..j).filter(|&i| (values[i] - lambda).abs() <= 1e-7 * scale).collect();
        let x = inverse_iteration(b, lambda, scale, indices[j] as u64, &cluster.iter().map(|&i| &vectors[i]).collect::<Vec<_>>())?;
        vectors.push(x);
    }
    // Rayleigh quotients sharpen the bisection values.
    let values = values
        .iter()
        .zip(&vectors)
        .map(|(_, x)| b.apply(x).iter().zip(x).map(|(ax, x)| x.conj() * ax).sum::<Complex64>().re)
        .collect();
    Ok((values, vectors))
}

fn inverse_iteration(
    b: &GridOperator,
    lambda: f64,
    scale: f64,
    seed: u64,
    against: &[&Vec<Complex64>],
) -> Result<Vec<Complex64>, GridError> {
    let n = b.size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let mut delta = 4.0 * f64::EPSILON * scale;
    let lu = loop {
        match BandLu::factor(b, Complex64::new(-(lambda + delta), 0.0)) {
            Ok(lu) => break lu,
            Err(_) if delta < 1e-6 * scale => delta *= 16.0,
            Err(e) => return Err(e),
        }
    };
    let mut best = (f64::INFINITY, x.clone());
    for _ in 0..6 {
        orthogonalize(&mut x, against);
        normalize(&mut x);
        lu.solve_in_place(&mut x);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(GridError::NoConvergence { residual: f64::INFINITY });
        }
        orthogonalize(&mut x, against);
        normalize(&mut x);
        let rq: f64 = b.apply(&x).iter().zip(&x).map(|(ax, x)| (x.conj() * ax).re).sum();
        let r = residual(b, rq, &x);
        if r < best.0 {
            best = (r, x.clone());
        }
        if r <= 0.01 * RESIDUAL_TOL {
            break;
        }
    }
    Ok(best.1)
}

fn orthogonalize(x: &mut [Complex64], against: &[&Vec<Complex64>]) {
    for v in against {
        let c: Complex64 = v.iter().zip(x.iter()).map(|(a, b)| a.conj() * b).sum();
        for (xi, vi) in x.iter_mut().zip(v.iter()) {
            *xi -= c * vi;
        }
    }
}

fn normalize(x: &mut [Complex64]) {
    let n = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    for v in x {
        *v /= n;
    }
}
