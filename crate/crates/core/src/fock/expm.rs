//! Matrix-free action of `exp(tA)` on a state vector.
//!
//! The exponential is evaluated by a scaled Taylor series: `exp(tA) = exp(tA/s)^s`
//! with `||tA/s|| <= MAX_STEP_NORM`, truncating each step after `J` terms where
//! `J` is the smallest order whose Lagrange-type remainder bound
//!
//! ```text
//! theta^(J+1) / (J+1)! * 1 / (1 - theta/(J+2))
//! ```
//!
//! meets the per-step budget. The budget accounts for error amplification by
//! the remaining steps (`e^{||tA||}` in general, `1` when `A` is flagged
//! anti-hermitian). Only the subspace reachable from the support of `v` under
//! `A` is iterated on, which keeps pair-conserving generators cheap on large
//! spaces.

use std::collections::HashSet;

use num_complex::Complex64 as C64;

use super::operator::Operator;
use super::state::{check_same, StateVector};
use crate::error::{Error, Result};

const MAX_STEP_NORM: f64 = 2.0;
pub(crate) const DEFAULT_MAX_TERMS: usize = 200;

/// Bookkeeping for effects of the finite cutoff and of series truncation.
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct TruncationReport {
    /// Norm lost (or gained) relative to the ideal, untruncated result.
    pub leaked_norm: f64,
    /// Smallest distance, in rungs, between a mode's highest populated level
    /// and its cutoff.
    pub safe_subspace_margin: usize,
    /// Rigorous bound on the discarded Taylor remainder.
    pub series_remainder: f64,
}

impl TruncationReport {
    /// Measure the headroom of `v`: levels with marginal population at or below
    /// `threshold` count as empty.
    pub fn measure(v: &StateVector, leaked_norm: f64, threshold: f64) -> Self {
        Self { leaked_norm, safe_subspace_margin: headroom(v, threshold), series_remainder: 0.0 }
    }
}

/// Minimum over modes of `cutoff - (highest level with population > threshold)`.
pub fn headroom(v: &StateVector, threshold: f64) -> usize {
    let space = v.space();
    let mut margin = usize::MAX;
    for (pos, &cut) in space.cutoffs().iter().enumerate() {
        let mut pop = vec![0.0; cut + 1];
        for (i, a) in v.amplitudes().iter().enumerate() {
            pop[space.occupation(i, pos)] += a.norm_sqr();
        }
        let top = pop.iter().rposition(|&p| p > threshold).unwrap_or(0);
        margin = margin.min(cut - top);
    }
    margin
}

/// Restriction of an operator to a set of basis indices closed under its action.
struct LocalBlock {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl LocalBlock {
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    fn norm_bound(&self) -> f64 {
        let n = self.row_ptr.len() - 1;
        let mut col_sums = vec![0.0; n];
        let mut max_row: f64 = 0.0;
        for r in 0..n {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[k].norm();
                col_sums[self.cols[k]] += self.vals[k].norm();
            }
            max_row = max_row.max(s);
        }
        (max_row * col_sums.into_iter().fold(0.0, f64::max)).sqrt()
    }
}

/// Basis indices reachable from `seeds` by repeated application of `a`, sorted.
fn reachable(a: &Operator, seeds: impl Iterator<Item = usize>) -> Vec<usize> {
    let (col_ptr, rows) = a.column_pattern();
    let mut mark = HashSet::new();
    let mut stack: Vec<usize> = seeds.filter(|&s| mark.insert(s)).collect();
    let mut out = stack.clone();
    while let Some(j) = stack.pop() {
        for &r in &rows[col_ptr[j]..col_ptr[j + 1]] {
            if mark.insert(r) {
                stack.push(r);
                out.push(r);
            }
        }
    }
    out.sort_unstable();
    out
}

fn restrict(a: &Operator, set: &[usize]) -> LocalBlock {
    let mut row_ptr = Vec::with_capacity(set.len() + 1);
    row_ptr.push(0);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    for &g in set {
        for (c, v) in a.row(g) {
            // columns outside the closed set never carry amplitude
            if let Ok(k) = set.binary_search(&c) {
                cols.push(k);
                vals.push(v);
            }
        }
        row_ptr.push(cols.len());
    }
    LocalBlock { row_ptr, cols, vals }
}

/// `ln( theta^(j+1)/(j+1)! / (1 - theta/(j+2)) )`, or `+inf` when the
/// geometric tail estimate does not apply.
fn log_remainder(theta: f64, j: usize) -> f64 {
    if theta == 0.0 {
        return f64::NEG_INFINITY;
    }
    let ratio = theta / (j as f64 + 2.0);
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    let log_fact: f64 = (2..=j + 1).map(|k| (k as f64).ln()).sum();
    (j as f64 + 1.0) * theta.ln() - log_fact - (1.0 - ratio).ln()
}

/// `exp(A) v` to absolute accuracy `tol`.
pub fn exp_apply(a: &Operator, v: &StateVector, tol: f64) -> Result<(StateVector, TruncationReport)> {
    exp_apply_scaled(a, 1.0, v, tol)
}

/// `exp(t A) v` to absolute accuracy `tol`.
pub fn exp_apply_scaled(a: &Operator, t: f64, v: &StateVector, tol: f64) -> Result<(StateVector, TruncationReport)> {
    exp_apply_with_budget(a, t, v, tol, DEFAULT_MAX_TERMS)
}

/// As [`exp_apply_scaled`] with an explicit cap on Taylor terms per step.
pub fn exp_apply_with_budget(
    a: &Operator,
    t: f64,
    v: &StateVector,
    tol: f64,
    max_terms: usize,
) -> Result<(StateVector, TruncationReport)> {
    check_same(a.space(), v.space(), "exp_apply")?;
    let entries: Vec<(usize, C64)> =
        v.amplitudes().iter().enumerate().filter(|(_, x)| **x != C64::new(0.0, 0.0)).map(|(i, x)| (i, *x)).collect();
    let (set, x, series_remainder) = exp_apply_entries(a, t, &entries, tol, max_terms)?;
    let mut out = StateVector::zeros(v.space());
    {
        let amps = out.amplitudes_mut();
        for (&g, xi) in set.iter().zip(&x) {
            amps[g] = *xi;
        }
    }
    let unitary = a.flags().anti_hermitian.is_some();
    let leaked_norm = if unitary { (out.norm() - v.norm()).abs() } else { 0.0 };
    let mut report = TruncationReport::measure(&out, leaked_norm, tol * tol);
    report.series_remainder = series_remainder;
    Ok((out, report))
}

/// Sparse core of the exponential: `exp(tA)` applied to the vector with the
/// given `(index, amplitude)` entries. Returns the sorted support it iterated
/// on, the amplitudes there, and the series remainder bound.
pub(crate) fn exp_apply_entries(
    a: &Operator,
    t: f64,
    entries: &[(usize, C64)],
    tol: f64,
    max_terms: usize,
) -> Result<(Vec<usize>, Vec<C64>, f64)> {
    if !(tol > 0.0) || !t.is_finite() {
        return Err(Error::validation("exp_apply needs tol > 0 and a finite scale"));
    }
    let v_norm = entries.iter().map(|(_, x)| x.norm_sqr()).sum::<f64>().sqrt();
    if v_norm == 0.0 || t == 0.0 || a.nnz() == 0 {
        let mut e = entries.to_vec();
        e.sort_unstable_by_key(|&(i, _)| i);
        return Ok((e.iter().map(|&(i, _)| i).collect(), e.iter().map(|&(_, x)| x).collect(), 0.0));
    }

    let set = reachable(a, entries.iter().map(|&(i, _)| i));
    let block = restrict(a, &set);
    let theta_total = t.abs() * block.norm_bound();
    let steps = ((theta_total / MAX_STEP_NORM).ceil() as usize).max(1);
    let theta = theta_total / steps as f64;

    let unitary = a.flags().anti_hermitian.is_some();
    // error made at one step is amplified by at most exp(theta_total) later on
    let amplification = if unitary { 0.0 } else { theta_total };
    let target = tol.ln() - (steps as f64).ln() - amplification - v_norm.ln();
    let order = (1..=max_terms).find(|&j| log_remainder(theta, j) <= target).ok_or_else(|| {
        Error::numeric(
            format!("Taylor series did not reach tolerance {tol:e} within {max_terms} terms"),
            log_remainder(theta, max_terms).exp() * v_norm,
        )
    })?;
    let step_bound = log_remainder(theta, order).exp();
    let series_remainder = step_bound * steps as f64 * amplification.exp() * v_norm;

    let n = set.len();
    let mut x = vec![C64::new(0.0, 0.0); n];
    for &(i, amp) in entries {
        x[set.binary_search(&i).expect("seed is in its own reachable set")] += amp;
    }
    let mut term = vec![C64::new(0.0, 0.0); n];
    let mut next = vec![C64::new(0.0, 0.0); n];
    let h = t / steps as f64;
    for _ in 0..steps {
        term.copy_from_slice(&x);
        for j in 1..=order {
            block.apply(&term, &mut next);
            let f = h / j as f64;
            for (tm, nx) in term.iter_mut().zip(&next) {
                *tm = nx * f;
            }
            for (xi, tm) in x.iter_mut().zip(&term) {
                *xi += tm;
            }
        }
    }
    Ok((set, x, series_remainder))
}
