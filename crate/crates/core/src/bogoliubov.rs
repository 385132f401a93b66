//! Bogoliubov pairing, the squeezing generator `g(ε)` and dressed operators.
//!
//! A pair couples the particle mode `(p, σ)` with the antiparticle mode
//! `(p̃, -σ)`. The generator
//!
//! ```text
//! g = Σ ε (d d̄ - d† d̄†)
//! ```
//!
//! satisfies `[g, d] = ε d̄†`, so `e^{g} d e^{-g} = d cosh ε + d̄† sinh ε`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{
    exp_apply_entries, FockSpace, ModeId, OpExpr, Operator, Sector, TruncationReport, DEFAULT_MAX_TERMS,
};
use crate::hopf::{DoubledSpace, Ladder, QParam, SectorIsolation};

/// Tolerance for accepting a smearing matrix as unitary.
pub const UNITARITY_TOL: f64 = 1e-12;

/// One Bogoliubov pair: `(p, σ, particle) <-> (p̃, -σ, antiparticle)`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PairSpec {
    pub momentum: i64,
    pub partner: i64,
    pub sector: Sector,
    pub epsilon: f64,
}

impl PairSpec {
    pub fn new(momentum: i64, partner: i64, sector: Sector, epsilon: f64) -> Self {
        Self { momentum, partner, sector, epsilon }
    }

    /// The particle mode `d_p^(σ)`.
    pub fn d_mode(&self) -> ModeId {
        ModeId::particle(self.momentum, self.sector)
    }

    /// The antiparticle mode `d̄_{p̃}^(-σ)`.
    pub fn dbar_mode(&self) -> ModeId {
        ModeId::antiparticle(self.partner, self.sector.flip())
    }

    pub fn modes(&self) -> [ModeId; 2] {
        [self.d_mode(), self.dbar_mode()]
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..*self }
    }

    /// `d_particle - d_antiparticle` number difference, conserved by `g`.
    pub fn charge_expr(&self) -> OpExpr {
        OpExpr::n(self.d_mode()) - OpExpr::n(self.dbar_mode())
    }

    /// `ε (d d̄ - d† d̄†)`.
    pub fn generator_expr(&self) -> OpExpr {
        let (d, db) = (self.d_mode(), self.dbar_mode());
        (OpExpr::a(d) * OpExpr::a(db) - OpExpr::a_dag(d) * OpExpr::a_dag(db)).scale(self.epsilon)
    }

    pub fn dressed(&self) -> DressedExprs {
        DressedExprs::new(self)
    }
}

/// Closed-form dressed operators of one pair as ladder polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct DressedExprs {
    /// `d(ε) = d cosh ε + d̄† sinh ε`
    pub d: OpExpr,
    /// `d̄(ε)† = d sinh ε + d̄† cosh ε`
    pub dbar_dag: OpExpr,
}

impl DressedExprs {
    fn new(pair: &PairSpec) -> Self {
        let (c, s) = (pair.epsilon.cosh(), pair.epsilon.sinh());
        let (d, db) = (pair.d_mode(), pair.dbar_mode());
        Self {
            d: OpExpr::a(d).scale(c) + OpExpr::a_dag(db).scale(s),
            dbar_dag: OpExpr::a(d).scale(s) + OpExpr::a_dag(db).scale(c),
        }
    }

    pub fn d_dag(&self) -> OpExpr {
        self.d.adjoint()
    }

    pub fn dbar(&self) -> OpExpr {
        self.dbar_dag.adjoint()
    }

    /// `d(ε)† d(ε)`.
    pub fn d_number(&self) -> OpExpr {
        self.d_dag() * self.d.clone()
    }

    /// `d̄(ε)† d̄(ε)`.
    pub fn dbar_number(&self) -> OpExpr {
        self.dbar_dag.clone() * self.dbar()
    }
}

/// A set of non-overlapping Bogoliubov pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct SqueezeSet {
    pairs: Vec<PairSpec>,
}

impl SqueezeSet {
    pub fn new(pairs: Vec<PairSpec>) -> Result<Self> {
        for (i, p) in pairs.iter().enumerate() {
            if !p.epsilon.is_finite() {
                return Err(Error::validation(format!("pair {i} has a non-finite epsilon")));
            }
            for q in &pairs[..i] {
                if p.modes().iter().any(|m| q.modes().contains(m)) {
                    return Err(Error::validation(format!(
                        "mode shared between pairs at momenta {} and {}",
                        q.momentum, p.momentum
                    )));
                }
                let same_momentum_class = (p.momentum == q.momentum && p.partner == q.partner)
                    || (p.momentum == q.partner && p.partner == q.momentum);
                if same_momentum_class && p.epsilon != q.epsilon {
                    return Err(Error::validation(format!(
                        "epsilon must agree for p = {} and its partner {}",
                        p.momentum, p.partner
                    )));
                }
            }
        }
        Ok(Self { pairs })
    }

    /// A single pair `(p, +) <-> (p̃ = p, -)`.
    pub fn single(momentum: i64, epsilon: f64) -> Self {
        Self { pairs: vec![PairSpec::new(momentum, momentum, Sector::Plus, epsilon)] }
    }

    /// Both sector pairs of one momentum, with `p̃ = p` as label.
    pub fn momentum(momentum: i64, epsilon: f64) -> Self {
        Self {
            pairs: vec![
                PairSpec::new(momentum, momentum, Sector::Plus, epsilon),
                PairSpec::new(momentum, momentum, Sector::Minus, epsilon),
            ],
        }
    }

    pub fn pairs(&self) -> &[PairSpec] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pair modes in pair order: `d_0, d̄_0, d_1, d̄_1, ...`.
    pub fn modes(&self) -> Vec<ModeId> {
        self.pairs.iter().flat_map(|p| p.modes()).collect()
    }

    pub fn max_abs_epsilon(&self) -> f64 {
        self.pairs.iter().map(|p| p.epsilon.abs()).fold(0.0, f64::max)
    }

    pub fn with_epsilons(&self, f: impl Fn(&PairSpec) -> f64) -> Result<Self> {
        Self::new(self.pairs.iter().map(|p| p.with_epsilon(f(p))).collect())
    }

    /// Fock space of exactly the pair modes with a uniform cutoff.
    pub fn space(&self, cutoff: usize) -> Result<Arc<FockSpace>> {
        FockSpace::uniform(self.modes(), cutoff)
    }

    pub fn check_space(&self, space: &FockSpace) -> Result<()> {
        for m in self.modes() {
            space.require(&m)?;
        }
        Ok(())
    }

    pub fn generator_expr(&self) -> OpExpr {
        OpExpr::Sum(self.pairs.iter().map(PairSpec::generator_expr).collect())
    }
}

/// `d_p = Σ_k F(k, p) a_k` for a unitary mixing matrix `F`.
pub fn smear(f: &DMatrix<C64>, ops: &[Operator]) -> Result<Vec<Operator>> {
    if f.nrows() != ops.len() || f.ncols() != ops.len() {
        return Err(Error::validation(format!(
            "smearing matrix is {}x{} but {} operators were given",
            f.nrows(),
            f.ncols(),
            ops.len()
        )));
    }
    let defect =
        (f * f.adjoint() - DMatrix::<C64>::identity(ops.len(), ops.len())).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if defect > UNITARITY_TOL {
        return Err(Error::validation(format!("smearing matrix is not unitary: max |F F^dagger - I| = {defect:e}")));
    }
    let Some(first) = ops.first() else {
        return Ok(Vec::new());
    };
    (0..ops.len())
        .map(|p| {
            let mut acc = Operator::zero(first.space());
            for (k, a) in ops.iter().enumerate() {
                acc = acc.lin_comb(C64::new(1.0, 0.0), a, f[(k, p)])?;
            }
            Ok(acc)
        })
        .collect()
}

/// The anti-hermitian squeezing generator `g(ε)` on `space`.
pub fn generator(space: &Arc<FockSpace>, squeeze: &SqueezeSet) -> Result<Operator> {
    squeeze.check_space(space)?;
    squeeze.generator_expr().build(space)?.verified_anti_hermitian(1e-12)
}

/// Closed-form dressing of an arbitrary (possibly smeared) pair `(d, d̄)`:
/// returns `(d cosh ε + d̄† sinh ε, d sinh ε + d̄† cosh ε)`.
pub fn dress_closed(d: &Operator, dbar: &Operator, epsilon: f64) -> Result<(Operator, Operator)> {
    let (c, s) = (C64::new(epsilon.cosh(), 0.0), C64::new(epsilon.sinh(), 0.0));
    let dbar_dag = dbar.adjoint();
    Ok((d.lin_comb(c, &dbar_dag, s)?, d.lin_comb(s, &dbar_dag, c)?))
}

/// `d(ε)` and `d̄(ε)†` for one pair, as matrices.
#[derive(Clone, Debug)]
pub struct DressedOps {
    pub d: Operator,
    pub dbar_dag: Operator,
}

impl DressedOps {
    pub fn d_dag(&self) -> Operator {
        self.d.adjoint()
    }

    pub fn dbar(&self) -> Operator {
        self.dbar_dag.adjoint()
    }
}

/// Closed-form dressed operators for every pair, in pair order.
pub fn dressed_ops_closed(space: &Arc<FockSpace>, squeeze: &SqueezeSet) -> Result<Vec<DressedOps>> {
    squeeze.check_space(space)?;
    squeeze
        .pairs()
        .iter()
        .map(|p| {
            let dx = p.dressed();
            Ok(DressedOps { d: dx.d.build(space)?, dbar_dag: dx.dbar_dag.build(space)? })
        })
        .collect()
}

/// Smallest number of extra rungs `k` such that `C(n+k, k) tanh^k ε` drops
/// below `target`. This bounds how far squeezing spreads a state with
/// occupation `n` beyond it.
pub fn spread_padding(n: usize, epsilon: f64, target: f64) -> usize {
    let t = epsilon.abs().tanh();
    if t == 0.0 {
        return 0;
    }
    let log_t = t.ln();
    let goal = target.ln();
    let mut log_binom = 0.0;
    for k in 1..100_000usize {
        log_binom += ((n + k) as f64).ln() - (k as f64).ln();
        if log_binom + k as f64 * log_t <= goal {
            return k;
        }
    }
    100_000
}

/// Copy of `space` with every pair mode's cutoff raised by `padding`.
pub fn padded_space(space: &Arc<FockSpace>, squeeze: &SqueezeSet, padding: usize) -> Result<Arc<FockSpace>> {
    let pair_modes = squeeze.modes();
    let cutoffs = space
        .modes()
        .iter()
        .zip(space.cutoffs())
        .map(|(m, &c)| if pair_modes.contains(m) { c + padding } else { c })
        .collect();
    space.with_cutoffs(cutoffs)
}

/// `G(ε) op G(ε)^{-1}` restricted to `space`, evaluated column by column with
/// matrix-free exponentials on a padded working space.
///
/// Only columns selected by `mask` are computed; the rest are left empty. The
/// padding is chosen so that squeezing of the highest selected state stays
/// inside the working space to `tol`; the returned report carries the largest
/// amplitude found on the working space's top rung.
pub fn dressed_ops_conjugated(
    space: &Arc<FockSpace>,
    squeeze: &SqueezeSet,
    op: &OpExpr,
    mask: &[bool],
    tol: f64,
) -> Result<(Operator, TruncationReport)> {
    squeeze.check_space(space)?;
    if mask.len() != space.dim() {
        return Err(Error::validation("column mask length differs from the space dimension"));
    }
    if !(tol > 0.0) {
        return Err(Error::validation("tol must be positive"));
    }
    let top =
        squeeze.modes().iter().map(|m| space.cutoffs()[space.position(m).expect("checked above")]).max().unwrap_or(0);
    let padding = spread_padding(top, squeeze.max_abs_epsilon(), tol * 1e-2).max(2);
    let work = padded_space(space, squeeze, padding)?;
    let g = generator(&work, squeeze)?;
    let op_work = op.build(&work)?;
    // row j of the transpose is column j of the operator
    let op_t = Operator::from_triplets(&work, op_work.entries().map(|(r, c, v)| (c, r, v)).collect())?;
    let pair_pos: Vec<usize> = squeeze.modes().iter().map(|m| work.require(m)).collect::<Result<_>>()?;
    let on_edge = |i: usize| pair_pos.iter().any(|&p| work.occupation(i, p) == work.cutoffs()[p]);
    let norm = |v: &[C64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();

    let mut triplets = Vec::new();
    let mut edge: f64 = 0.0;
    let mut remainder: f64 = 0.0;
    let mut leaked: f64 = 0.0;
    let inner_tol = tol * 1e-2;
    for j in (0..space.dim()).filter(|&j| mask[j]) {
        let seed = [(space.reindex_into(j, &work), C64::new(1.0, 0.0))];
        let (u_idx, u_val, r1) = exp_apply_entries(&g, -1.0, &seed, inner_tol, DEFAULT_MAX_TERMS)?;
        let edge_sq: f64 = u_idx.iter().zip(&u_val).filter(|(i, _)| on_edge(**i)).map(|(_, a)| a.norm_sqr()).sum();
        edge = edge.max(edge_sq.sqrt());
        leaked = leaked.max((norm(&u_val) - 1.0).abs());

        let mut w: BTreeMap<usize, C64> = BTreeMap::new();
        for (&c, &x) in u_idx.iter().zip(&u_val) {
            for (r, v) in op_t.row(c) {
                *w.entry(r).or_insert(C64::new(0.0, 0.0)) += v * x;
            }
        }
        let w: Vec<(usize, C64)> = w.into_iter().collect();
        let w_norm = w.iter().map(|(_, x)| x.norm_sqr()).sum::<f64>().sqrt();
        let (y_idx, y_val, r2) = exp_apply_entries(&g, 1.0, &w, inner_tol, DEFAULT_MAX_TERMS)?;
        remainder = remainder.max(r1 + r2);
        leaked = leaked.max((norm(&y_val) - w_norm).abs());
        for (&i, val) in y_idx.iter().zip(&y_val) {
            if val.norm() == 0.0 {
                continue;
            }
            let occ = work.occupations(i);
            if occ.iter().zip(space.cutoffs()).all(|(n, c)| n <= c) {
                triplets.push((space.index_of(&occ)?, j, *val));
            }
        }
    }
    let report =
        TruncationReport { leaked_norm: edge.max(leaked), safe_subspace_margin: padding, series_remainder: remainder };
    Ok((Operator::from_triplets(space, triplets)?, report))
}

/// Rebuild the closed-form dressed operators of `pair` from deformed
/// coproducts: isolate the sector components with `M^{-1}`, then combine.
///
/// `doubled` must be the double of a base space containing the particle mode
/// at `pair.momentum` and the antiparticle mode at `pair.partner` (their base
/// sector labels are irrelevant).
pub fn dressed_from_coproducts(doubled: &DoubledSpace, pair: &PairSpec) -> Result<DressedOps> {
    let q = QParam::from_epsilon(pair.epsilon)?;
    let iso = SectorIsolation::new(q)?;
    let find = |want: ModeId| -> Result<ModeId> {
        doubled
            .base()
            .modes()
            .iter()
            .copied()
            .find(|m| m.momentum == want.momentum && m.species == want.species)
            .ok_or_else(|| Error::validation(format!("base space lacks a mode like {want}")))
    };
    let particle = find(pair.d_mode())?;
    let anti = find(pair.dbar_mode())?;

    let isolate = |mode: &ModeId| -> Result<(Operator, Operator)> {
        let fwd = doubled.coproduct_deformed(q, mode, Ladder::Annihilation)?;
        let back = doubled.coproduct_deformed(q.inverse(), mode, Ladder::Annihilation)?;
        iso.isolate(&fwd, &back)
    };
    let pick = |(plus, minus): (Operator, Operator), sector: Sector| match sector {
        Sector::Plus => plus,
        Sector::Minus => minus,
    };
    let d = pick(isolate(&particle)?, pair.sector);
    let dbar = pick(isolate(&anti)?, pair.sector.flip());
    let (d_eps, dbar_dag_eps) = dress_closed(&d, &dbar, pair.epsilon)?;
    Ok(DressedOps { d: d_eps, dbar_dag: dbar_dag_eps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::commutator;

    fn ccr_defect(d: &Operator, mask: &[bool]) -> f64 {
        let id = Operator::identity(d.space());
        commutator(d, &d.adjoint()).unwrap().max_abs_diff_on(&id, mask).unwrap()
    }

    #[test]
    fn squeeze_set_validation() {
        let p = PairSpec::new(0, 0, Sector::Plus, 0.3);
        assert!(SqueezeSet::new(vec![p, p]).is_err());
        let partner = PairSpec::new(1, 2, Sector::Plus, 0.3);
        let mismatched = PairSpec::new(2, 1, Sector::Plus, 0.4);
        assert!(SqueezeSet::new(vec![partner, mismatched]).is_err());
        assert!(SqueezeSet::new(vec![partner, mismatched.with_epsilon(0.3)]).is_ok());
        assert!(SqueezeSet::new(vec![p.with_epsilon(f64::INFINITY)]).is_err());
        assert_eq!(SqueezeSet::momentum(0, 0.3).modes().len(), 4);
    }

    #[test]
    fn smearing() {
        let s =
            FockSpace::uniform(vec![ModeId::particle(0, Sector::Plus), ModeId::particle(1, Sector::Plus)], 6).unwrap();
        let ops: Vec<Operator> = s.modes().iter().map(|m| Operator::annihilation(&s, m).unwrap()).collect();
        let id = DMatrix::<C64>::identity(2, 2);
        assert_eq!(smear(&id, &ops).unwrap(), ops);

        let r = std::f64::consts::FRAC_1_SQRT_2;
        let rot = DMatrix::from_row_slice(2, 2, &[r, -r, r, r]).map(|x| C64::new(x, 0.0));
        let mixed = smear(&rot, &ops).unwrap();
        let mask = s.safe_mask(1, None).unwrap();
        assert!(ccr_defect(&mixed[0], &mask) < 1e-12);
        assert!(commutator(&mixed[0], &mixed[1].adjoint()).unwrap().max_abs_on(&mask) < 1e-12);

        let mut bad = rot.clone();
        bad.row_mut(0).scale_mut(1.1);
        let err = smear(&bad, &ops).unwrap_err();
        assert!(err.to_string().contains("not unitary"));
    }

    #[test]
    fn generator_properties() {
        let set = SqueezeSet::momentum(0, 0.4);
        let s = set.space(6).unwrap();
        let g = generator(&s, &set).unwrap();
        assert!(g.flags().anti_hermitian.is_some());
        assert_eq!(g.adjoint(), g.scale_real(-1.0));
        let mask = s.safe_mask(1, None).unwrap();
        for p in set.pairs() {
            let q = p.charge_expr().build(&s).unwrap();
            assert!(commutator(&g, &q).unwrap().max_abs_on(&mask) < 1e-12);
        }
        assert_eq!(generator(&s, &set.with_epsilons(|_| 0.0).unwrap()).unwrap().nnz(), 0);
    }

    #[test]
    fn closed_form_dressing() {
        let set = SqueezeSet::single(0, 0.7);
        let s = set.space(12).unwrap();
        let mask = s.safe_mask(2, None).unwrap();
        let ops = &dressed_ops_closed(&s, &set).unwrap()[0];
        assert!(ccr_defect(&ops.d, &mask) < 1e-10);
        assert!(ccr_defect(&ops.dbar(), &mask) < 1e-10);
        assert!(commutator(&ops.d, &ops.dbar()).unwrap().max_abs_on(&mask) < 1e-10);

        let zero = &dressed_ops_closed(&s, &set.with_epsilons(|_| 0.0).unwrap()).unwrap()[0];
        let p = set.pairs()[0];
        assert_eq!(zero.d, Operator::annihilation(&s, &p.d_mode()).unwrap());
    }

    #[test]
    fn dressing_composes_additively() {
        let set = SqueezeSet::single(0, 0.0);
        let s = set.space(8).unwrap();
        let p = set.pairs()[0];
        let d = Operator::annihilation(&s, &p.d_mode()).unwrap();
        let db = Operator::annihilation(&s, &p.dbar_mode()).unwrap();
        let (d1, dbd1) = dress_closed(&d, &db, 0.2).unwrap();
        let (d2, _) = dress_closed(&d1, &dbd1.adjoint(), 0.5).unwrap();
        let (d12, _) = dress_closed(&d, &db, 0.7).unwrap();
        assert!(d2.max_abs_diff(&d12).unwrap() < 1e-10);
    }

    #[test]
    fn bch_second_order() {
        let eps = 0.3;
        let set = SqueezeSet::single(0, eps);
        let s = set.space(10).unwrap();
        let mask = s.safe_mask(2, None).unwrap();
        let g = generator(&s, &set).unwrap();
        let d = Operator::annihilation(&s, &set.pairs()[0].d_mode()).unwrap();
        let gg = commutator(&g, &commutator(&g, &d).unwrap()).unwrap().scale_real(0.5);
        assert!(gg.max_abs_diff_on(&d.scale_real(eps * eps / 2.0), &mask).unwrap() < 1e-12);
    }

    #[test]
    fn conjugation_matches_closed_form() {
        let set = SqueezeSet::single(0, 0.3);
        let s = set.space(10).unwrap();
        let mask = s.safe_mask(4, None).unwrap();
        let p = set.pairs()[0];
        let (conj, _) = dressed_ops_conjugated(&s, &set, &OpExpr::a(p.d_mode()), &mask, 1e-10).unwrap();
        let closed = p.dressed().d.build(&s).unwrap();
        assert!(conj.max_abs_diff_on(&closed, &mask).unwrap() < 1e-8);

        let charge = p.charge_expr();
        let (q_conj, _) = dressed_ops_conjugated(&s, &set, &charge, &mask, 1e-10).unwrap();
        assert!(q_conj.max_abs_diff_on(&charge.build(&s).unwrap(), &mask).unwrap() < 1e-8);

        let still = set.with_epsilons(|_| 0.0).unwrap();
        let (same, _) = dressed_ops_conjugated(&s, &still, &OpExpr::a(p.d_mode()), &mask, 1e-10).unwrap();
        let a = Operator::annihilation(&s, &p.d_mode()).unwrap();
        assert!(same.max_abs_diff_on(&a, &mask).unwrap() < 1e-14);
    }

    #[test]
    fn coproduct_bridge() {
        let base =
            FockSpace::uniform(vec![ModeId::particle(0, Sector::Plus), ModeId::antiparticle(0, Sector::Plus)], 3)
                .unwrap();
        let doubled = DoubledSpace::new(&base).unwrap();
        for eps in [0.1, 0.5] {
            for sector in [Sector::Plus, Sector::Minus] {
                let pair = PairSpec::new(0, 0, sector, eps);
                let bridged = dressed_from_coproducts(&doubled, &pair).unwrap();
                let set = SqueezeSet::new(vec![pair]).unwrap();
                let closed = &dressed_ops_closed(doubled.space(), &set).unwrap()[0];
                assert!(bridged.d.max_abs_diff(&closed.d).unwrap() < 1e-10);
                assert!(bridged.dbar_dag.max_abs_diff(&closed.dbar_dag).unwrap() < 1e-10);
            }
        }
        let flat = PairSpec::new(0, 0, Sector::Plus, 0.0);
        assert!(matches!(dressed_from_coproducts(&doubled, &flat), Err(Error::Validation(_))));
    }

    #[test]
    fn padding_plan() {
        assert_eq!(spread_padding(5, 0.0, 1e-12), 0);
        let k = spread_padding(4, 0.3, 1e-12);
        assert!(k > 20);
        assert!(spread_padding(8, 0.3, 1e-12) > k);
    }
}
