//! Entanglement structure of `|0_M>` written in dressed occupation labels:
//! pair-occupation weights `W_n`, the `n`-pair expansion terms, the Bell-type
//! shape of the one-pair term, and the entropy of the `σ = +` half.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::bogoliubov::SqueezeSet;
use crate::error::{Error, Result};
use crate::fock::{inner, partial_trace, von_neumann_entropy, Sector, StateVector, TruncationReport};
use crate::thermo::mode_entropy;
use crate::vacuum::{minkowski_in_dressed_basis, VacuumPair};

/// Pair-occupation weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WnTable {
    /// Weight of each configuration `(n_p)` over the pairs of the squeeze set.
    pub configurations: BTreeMap<Vec<usize>, f64>,
    /// Weights summed over configurations of equal total `n = Σ n_p`.
    pub aggregated: Vec<f64>,
    /// Weight not represented in the table (beyond the largest `n`, or lost to
    /// the cutoff).
    pub tail_bound: f64,
    /// Weight on basis states where some pair has unequal particle and
    /// antiparticle numbers; zero for an exact pair condensate.
    pub unpaired: f64,
}

impl WnTable {
    pub fn total(&self) -> f64 {
        self.aggregated.iter().sum()
    }

    fn aggregate(configurations: &BTreeMap<Vec<usize>, f64>) -> Vec<f64> {
        let top = configurations.keys().map(|k| k.iter().sum::<usize>()).max().unwrap_or(0);
        let mut agg = vec![0.0; top + 1];
        for (k, w) in configurations {
            agg[k.iter().sum::<usize>()] += w;
        }
        agg
    }
}

/// Every multi-index of length `k` with entries summing to at most `max_total`.
fn multi_indices(k: usize, max_total: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..=max_total {
        for mut rest in multi_indices(k - 1, max_total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `W_n = Π_p sinh^{2 n_p} ε / cosh^{2(n_p + 1)} ε` for every configuration
/// with total `n <= max_total_n`.
pub fn wn_analytic(squeeze: &SqueezeSet, max_total_n: usize) -> WnTable {
    let mut configurations = BTreeMap::new();
    for idx in multi_indices(squeeze.len(), max_total_n) {
        let w: f64 = squeeze
            .pairs()
            .iter()
            .zip(&idx)
            .map(|(p, &n)| {
                let (s2, c2) = (p.epsilon.sinh().powi(2), p.epsilon.cosh().powi(2));
                s2.powi(n as i32) / c2.powi(n as i32 + 1)
            })
            .product();
        configurations.insert(idx, w);
    }
    let aggregated = WnTable::aggregate(&configurations);
    let tail_bound = match squeeze.pairs() {
        [p] => p.epsilon.tanh().powi(2 * (max_total_n as i32 + 1)),
        _ => (1.0 - aggregated.iter().sum::<f64>()).max(0.0),
    };
    WnTable { configurations, aggregated, tail_bound, unpaired: 0.0 }
}

/// `|0_M>` in dressed labels with its truncation report, checked against the
/// vacuum pair's leak budget.
fn condensate(vp: &VacuumPair) -> Result<(StateVector, TruncationReport)> {
    let (psi, report) = minkowski_in_dressed_basis(vp.space(), &vp.squeeze, vp.tol)?;
    if report.leaked_norm > vp.leak_budget() {
        return Err(Error::numeric("truncation budget exceeded for the condensate amplitudes", report.leaked_norm));
    }
    Ok((psi, report))
}

/// Per-pair `(particle, antiparticle)` positions of the squeeze set in `space`.
fn pair_positions(vp: &VacuumPair) -> Result<Vec<(usize, usize)>> {
    vp.squeeze
        .pairs()
        .iter()
        .map(|p| Ok((vp.space().require(&p.d_mode())?, vp.space().require(&p.dbar_mode())?)))
        .collect()
}

/// Weights read off the amplitudes `<n(ε)|0_M>` of the constructed state.
pub fn wn_from_state(vp: &VacuumPair) -> Result<WnTable> {
    let (psi, report) = condensate(vp)?;
    let space = psi.space();
    let positions = pair_positions(vp)?;
    let others: Vec<usize> =
        (0..space.n_modes()).filter(|m| !positions.iter().any(|&(a, b)| a == *m || b == *m)).collect();
    let mut configurations: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut unpaired = 0.0;
    for (i, a) in psi.amplitudes().iter().enumerate() {
        let w = a.norm_sqr();
        if w == 0.0 {
            continue;
        }
        let occ: Vec<(usize, usize)> =
            positions.iter().map(|&(d, b)| (space.occupation(i, d), space.occupation(i, b))).collect();
        let paired = occ.iter().all(|(n, m)| n == m) && others.iter().all(|&m| space.occupation(i, m) == 0);
        if paired {
            *configurations.entry(occ.iter().map(|&(n, _)| n).collect()).or_insert(0.0) += w;
        } else {
            unpaired += w;
        }
    }
    let aggregated = WnTable::aggregate(&configurations);
    Ok(WnTable { configurations, aggregated, tail_bound: report.leaked_norm, unpaired })
}

/// The `n`-pair term of the condensate expansion.
#[derive(Clone, Debug)]
pub struct ExpansionTerm {
    /// Normalized projection (zero vector if the projection vanishes).
    pub state: StateVector,
    /// Norm of the projection before normalization.
    pub weight: f64,
    /// Nonzero amplitudes as `(occupations, amplitude)`, in basis order.
    pub profile: Vec<(Vec<usize>, C64)>,
}

/// Projection of `|0_M>` (dressed labels) onto `total_n` dressed particles and
/// `total_n` dressed antiparticles.
pub fn expansion_term(vp: &VacuumPair, total_n: usize) -> Result<ExpansionTerm> {
    let positions = pair_positions(vp)?;
    let budget: usize = positions.iter().map(|&(d, _)| vp.space().cutoffs()[d]).sum();
    if total_n > budget {
        return Err(Error::validation(format!("total_n = {total_n} exceeds what the cutoffs can hold ({budget})")));
    }
    let (psi, _) = condensate(vp)?;
    let space = psi.space();
    let mut proj = StateVector::zeros(space);
    let mut profile = Vec::new();
    for (i, a) in psi.amplitudes().iter().enumerate() {
        let particles: usize = positions.iter().map(|&(d, _)| space.occupation(i, d)).sum();
        let antiparticles: usize = positions.iter().map(|&(_, b)| space.occupation(i, b)).sum();
        if particles == total_n && antiparticles == total_n {
            proj.amplitudes_mut()[i] = *a;
            if a.norm() != 0.0 {
                profile.push((space.occupations(i), *a));
            }
        }
    }
    let weight = proj.norm();
    Ok(ExpansionTerm { state: proj.normalized(), weight, profile })
}

/// Fidelity `|<B|ψ_1>|²` between the normalized one-pair term and the
/// equal-weight superposition `B` of its two cross-sector configurations.
///
/// Requires the two sector pairs of a single momentum.
pub fn bell_structure_check(vp: &VacuumPair) -> Result<f64> {
    let pairs = vp.squeeze.pairs();
    let single_momentum = matches!(pairs, [a, b]
        if a.momentum == b.momentum && a.partner == b.partner && a.sector != b.sector);
    if !single_momentum {
        return Err(Error::validation("Bell structure check needs exactly the two sector pairs of one momentum"));
    }
    let term = expansion_term(vp, 1)?;
    if term.weight == 0.0 {
        return Err(Error::validation("the one-pair term vanishes (epsilon = 0)"));
    }
    let space = vp.space();
    let mut ideal = StateVector::zeros(space);
    for p in pairs {
        let mut occ = vec![0; space.n_modes()];
        occ[space.require(&p.d_mode())?] = 1;
        occ[space.require(&p.dbar_mode())?] = 1;
        ideal.amplitudes_mut()[space.index_of(&occ)?] = C64::new(1.0, 0.0);
    }
    Ok(inner(&ideal.normalized(), &term.state)?.norm_sqr())
}

/// Closed form of the `+`-sector entropy: one `mode_entropy(ε)` per pair.
pub fn sector_entropy_closed(squeeze: &SqueezeSet) -> f64 {
    squeeze.pairs().iter().map(|p| mode_entropy(p.epsilon)).sum()
}

/// von Neumann entropy of the `σ = +` modes in `|0_M>` (dressed labels).
pub fn sector_entanglement_entropy(vp: &VacuumPair) -> Result<f64> {
    let (psi, _) = condensate(vp)?;
    let keep: Vec<_> = vp.space().modes().iter().copied().filter(|m| m.sector == Sector::Plus).collect();
    let rho = partial_trace(&psi.normalized(), &keep)?;
    von_neumann_entropy(&rho)
}
