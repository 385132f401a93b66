//! The ε-vacuum `|0(ε)> = G(ε)|0_M>`, its condensate expansion over dressed
//! pairs, and vacuum overlaps as a finite-size proxy for inequivalence.
//!
//! Squeezed states are computed pair by pair on working spaces padded far
//! enough that the truncated exponential is exact to the requested tolerance,
//! then projected back. The projection discards only the true tail of the
//! state, `tanh^{2(N+1)} ε` per pair.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::bogoliubov::{dressed_ops_closed, generator, padded_space, PairSpec, SqueezeSet};
use crate::error::{Error, Result};
use crate::fock::{
    exp_apply, exp_apply_scaled, expectation, headroom, inner, FockSpace, Operator, StateVector, TruncationReport,
};

/// `|0_M>`: every mode empty.
pub fn minkowski_vacuum(space: &Arc<FockSpace>) -> StateVector {
    StateVector::vacuum(space)
}

/// Smallest cutoff `N` with `tanh^{2(N+1)} ε < tol`.
pub fn required_cutoff(epsilon: f64, tol: f64) -> usize {
    let t2 = epsilon.tanh().powi(2);
    if t2 == 0.0 {
        return 1;
    }
    let mut n = 1usize;
    while t2.powi(n as i32 + 1) >= tol {
        n += 1;
    }
    n
}

/// Check the cutoff planning rule for every pair mode of `space`.
pub fn check_cutoffs(space: &FockSpace, squeeze: &SqueezeSet, tol: f64) -> Result<()> {
    squeeze.check_space(space)?;
    for pair in squeeze.pairs() {
        let need = required_cutoff(pair.epsilon, tol);
        for m in pair.modes() {
            let have = space.cutoffs()[space.require(&m)?];
            if have < need {
                return Err(Error::validation(format!(
                    "cutoff {have} of mode {m} too small for epsilon = {}: tanh^(2(N+1)) < {tol:e} needs N >= {need}",
                    pair.epsilon
                )));
            }
        }
    }
    Ok(())
}

/// `exp(sign * g)|0_M>` projected onto `space`. The report's `leaked_norm` is
/// the norm-squared lost by projection.
///
/// Pair generators act on disjoint modes and commute, so the state is the
/// tensor product of one two-mode factor per pair; each factor is computed
/// with a matrix-free exponential on its own padded working space.
pub fn squeezed_vacuum(
    space: &Arc<FockSpace>,
    squeeze: &SqueezeSet,
    sign: f64,
    tol: f64,
) -> Result<(StateVector, TruncationReport)> {
    squeeze.check_space(space)?;
    let mut out = minkowski_vacuum(space);
    if squeeze.max_abs_epsilon() == 0.0 {
        return Ok((out.clone(), TruncationReport::measure(&out, 0.0, tol * tol)));
    }
    let factor_tol = tol / squeeze.len() as f64;
    let mut kept = 1.0;
    let mut remainder = 0.0;
    let mut factors = Vec::with_capacity(squeeze.len());
    for pair in squeeze.pairs() {
        let (factor, lost, rem) = pair_factor(space, pair, sign, factor_tol)?;
        kept *= 1.0 - lost;
        remainder += rem;
        factors.push(factor);
    }

    let positions: Vec<[usize; 2]> = squeeze
        .pairs()
        .iter()
        .map(|p| Ok([space.require(&p.d_mode())?, space.require(&p.dbar_mode())?]))
        .collect::<Result<_>>()?;
    let others: Vec<usize> = (0..space.n_modes()).filter(|m| !positions.iter().any(|pp| pp.contains(m))).collect();
    for (i, amp) in out.amplitudes_mut().iter_mut().enumerate() {
        if others.iter().any(|&m| space.occupation(i, m) != 0) {
            *amp = C64::new(0.0, 0.0);
            continue;
        }
        let mut a = C64::new(1.0, 0.0);
        for (f, [d, b]) in factors.iter().zip(&positions) {
            let (n, m) = (space.occupation(i, *d), space.occupation(i, *b));
            a *= if n == m { f[n] } else { C64::new(0.0, 0.0) };
            if a == C64::new(0.0, 0.0) {
                break;
            }
        }
        *amp = a;
    }
    Ok((
        out.clone(),
        TruncationReport {
            leaked_norm: (1.0 - kept).max(0.0),
            safe_subspace_margin: headroom(&out, tol * tol),
            series_remainder: remainder,
        },
    ))
}

/// Diagonal amplitudes `<n,n|exp(sign * g_pair)|0,0>` for `n` up to the pair's
/// cutoff in `space`, with the norm-squared beyond it and the series bound.
fn pair_factor(space: &Arc<FockSpace>, pair: &PairSpec, sign: f64, tol: f64) -> Result<(Vec<C64>, f64, f64)> {
    let cut_d = space.cutoffs()[space.require(&pair.d_mode())?];
    let cut_b = space.cutoffs()[space.require(&pair.dbar_mode())?];
    let top = cut_d.min(cut_b);
    let set = SqueezeSet::new(vec![*pair])?;
    let own = FockSpace::new(pair.modes().to_vec(), vec![cut_d, cut_b])?;
    if pair.epsilon == 0.0 {
        let mut f = vec![C64::new(0.0, 0.0); top + 1];
        f[0] = C64::new(1.0, 0.0);
        return Ok((f, 0.0, 0.0));
    }
    // truncation distorts amplitudes by about tanh^{N_work}
    let t = pair.epsilon.abs().tanh();
    let n_work = ((tol * 1e-2).ln() / t.ln()).ceil() as usize;
    let padding = n_work.saturating_sub(cut_d.max(cut_b)).max(2);
    let work = padded_space(&own, &set, padding)?;
    let g = generator(&work, &set)?;
    let (full, report) = exp_apply_scaled(&g, sign, &minkowski_vacuum(&work), tol * 1e-2)?;
    let amps: Vec<C64> = (0..=top).map(|n| full.amplitude(&[n, n])).collect::<Result<_>>()?;
    let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let lost = (full.norm_sqr() - kept).max(0.0);
    Ok((amps, lost, report.series_remainder))
}

/// Amplitudes `<n(ε)|0_M> = <n|G^{-1}|0_M>`: the Minkowski vacuum written in
/// dressed occupation labels.
pub fn minkowski_in_dressed_basis(
    space: &Arc<FockSpace>,
    squeeze: &SqueezeSet,
    tol: f64,
) -> Result<(StateVector, TruncationReport)> {
    squeezed_vacuum(space, squeeze, -1.0, tol)
}

/// `|0_M>` together with `|0(ε)>` for a given squeeze set.
#[derive(Clone, Debug)]
pub struct VacuumPair {
    pub minkowski: StateVector,
    pub dressed: StateVector,
    pub squeeze: SqueezeSet,
    pub truncation: TruncationReport,
    pub tol: f64,
}

impl VacuumPair {
    pub fn space(&self) -> &Arc<FockSpace> {
        self.minkowski.space()
    }

    /// `max ||d(ε)|0(ε)>||, ||d̄(ε)|0(ε)>||` for each pair.
    pub fn annihilation_residuals(&self) -> Result<Vec<f64>> {
        dressed_ops_closed(self.space(), &self.squeeze)?
            .iter()
            .map(|ops| {
                let rd = ops.d.apply(&self.dressed)?.norm();
                let rb = ops.dbar().apply(&self.dressed)?.norm();
                Ok(rd.max(rb))
            })
            .collect()
    }

    /// Allowed truncation loss: `tol` per pair, matching the cutoff planning rule.
    pub fn leak_budget(&self) -> f64 {
        self.tol * self.squeeze.len().max(1) as f64
    }

    pub fn max_annihilation_residual(&self) -> Result<f64> {
        Ok(self.annihilation_residuals()?.into_iter().fold(0.0, f64::max))
    }
}

/// Build `|0(ε)> = G(ε)|0_M>`.
pub fn epsilon_vacuum(space: &Arc<FockSpace>, squeeze: &SqueezeSet, tol: f64) -> Result<VacuumPair> {
    if !(tol > 0.0) {
        return Err(Error::validation("tol must be positive"));
    }
    check_cutoffs(space, squeeze, tol)?;
    let (dressed, truncation) = squeezed_vacuum(space, squeeze, 1.0, tol)?;
    Ok(VacuumPair { minkowski: minkowski_vacuum(space), dressed, squeeze: squeeze.clone(), truncation, tol })
}

/// `Z = Π_pairs cosh ε`; with both sector pairs present for each momentum this
/// is `Π_p cosh² ε(p)`.
pub fn normalization_z(squeeze: &SqueezeSet) -> f64 {
    squeeze.pairs().iter().map(|p| p.epsilon.cosh()).product()
}

/// Reconstruction of `|0_M>` from the condensate expansion.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub state: StateVector,
    /// `|<0_M|rec>| / ||rec||`.
    pub fidelity: f64,
    pub z: f64,
    pub report: TruncationReport,
}

/// `(1/Z) exp[Σ tanh ε d†(ε) d̄†(ε)] |0(ε)>` with closed-form dressed operators.
pub fn reconstruct_minkowski(vp: &VacuumPair) -> Result<Reconstruction> {
    if vp.truncation.leaked_norm > vp.leak_budget() {
        return Err(Error::numeric(
            "truncation leak of the dressed vacuum exceeds its budget",
            vp.truncation.leaked_norm,
        ));
    }
    let space = vp.space();
    let dressed_ops = dressed_ops_closed(space, &vp.squeeze)?;
    let mut pair_creator = Operator::zero(space);
    for (pair, ops) in vp.squeeze.pairs().iter().zip(&dressed_ops) {
        let term = ops.d_dag().mul(&ops.dbar_dag)?;
        pair_creator = pair_creator.lin_comb(C64::new(1.0, 0.0), &term, C64::new(pair.epsilon.tanh(), 0.0))?;
    }
    let z = normalization_z(&vp.squeeze);
    let (raw, report) = exp_apply(&pair_creator, &vp.dressed, vp.tol * 1e-2)?;
    let state = raw.scaled(C64::new(1.0 / z, 0.0));
    let norm = state.norm();
    if norm == 0.0 {
        return Err(Error::numeric("reconstructed state vanished", 0.0));
    }
    let fidelity = inner(&vp.minkowski, &state)?.norm() / norm;
    Ok(Reconstruction { state, fidelity, z, report })
}

/// `<ψ| d†(ε) d(ε) |ψ>` and `<ψ| d̄†(ε) d̄(ε) |ψ>` for one pair.
pub fn dressed_number_on(state: &StateVector, pair: &PairSpec) -> Result<(f64, f64)> {
    let set = SqueezeSet::new(vec![*pair])?;
    let ops = &dressed_ops_closed(state.space(), &set)?[0];
    let n_d = ops.d_dag().mul(&ops.d)?;
    let n_dbar = ops.dbar_dag.mul(&ops.dbar())?;
    Ok((expectation(&n_d, state)?.re, expectation(&n_dbar, state)?.re))
}

/// Dressed occupation numbers of pair `index` in the Minkowski vacuum; both
/// equal `sinh² ε`.
pub fn dressed_number_expectation(vp: &VacuumPair, index: usize) -> Result<(f64, f64)> {
    let pair = vp.squeeze.pairs().get(index).ok_or_else(|| Error::validation(format!("no pair with index {index}")))?;
    dressed_number_on(&vp.minkowski, pair)
}

/// `|<0(ε)|0(ε')>|` for `1..=n_pairs` independent pairs.
///
/// The single-pair overlap is computed by brute force from two constructed
/// vacua; the multi-pair values use the exact factorization over pairs.
pub fn overlap_vacua(epsilon: f64, epsilon_prime: f64, n_pairs: usize, cutoff: usize, tol: f64) -> Result<Vec<f64>> {
    if n_pairs < 1 {
        return Err(Error::validation("n_pairs must be at least 1"));
    }
    let per_pair = single_pair_overlap(epsilon, epsilon_prime, cutoff, tol)?;
    Ok((1..=n_pairs as i32).map(|k| per_pair.powi(k)).collect())
}

/// `|<0(ε)|0(ε')>|` for one pair on a space with the given cutoff.
pub fn single_pair_overlap(epsilon: f64, epsilon_prime: f64, cutoff: usize, tol: f64) -> Result<f64> {
    let a = SqueezeSet::single(0, epsilon);
    let b = SqueezeSet::single(0, epsilon_prime);
    let space = a.space(cutoff)?;
    let va = epsilon_vacuum(&space, &a, tol)?;
    let vb = epsilon_vacuum(&space, &b, tol)?;
    Ok(inner(&va.dressed, &vb.dressed)?.norm())
}
