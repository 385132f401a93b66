//! q-deformed boson Hopf algebra in the fundamental representation.
//!
//! With the central element fixed to `H = 1/2` the deformed and undeformed
//! algebras coincide on a single mode; the deformation only shows up in the
//! coproduct, which spreads an operator over two sectors with weights
//! `q^{±1/2} = e^{±ε}`.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{FockSpace, ModeId, Operator, Sector};

/// Value of the central generator in the fundamental representation.
pub const H_FUNDAMENTAL: f64 = 0.5;

/// Below this distance from 1 the q-number is replaced by its `q -> 1` limit.
pub const Q_LIMIT_WINDOW: f64 = 1e-8;

/// Real, positive deformation parameter with `q = e^{2ε}`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct QParam {
    epsilon: f64,
    q: f64,
}

impl QParam {
    pub fn from_epsilon(epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() {
            return Err(Error::validation("epsilon must be finite"));
        }
        let q = (2.0 * epsilon).exp();
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::validation(format!("q = e^(2*{epsilon}) is not representable")));
        }
        Ok(Self { epsilon, q })
    }

    /// Only real `q > 0` is supported; `q = -1` and other non-positive values
    /// are rejected.
    pub fn from_q(q: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::validation(format!("q must be real, positive and finite, got {q}")));
        }
        Ok(Self { epsilon: 0.5 * q.ln(), q })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn inverse(&self) -> Self {
        Self { epsilon: -self.epsilon, q: 1.0 / self.q }
    }

    /// `q^{1/2} = e^{ε}`.
    pub fn sqrt_q(&self) -> f64 {
        self.epsilon.exp()
    }
}

/// `[x]_q = (q^x - q^{-x}) / (q - q^{-1})`, with the removable singularity at
/// `q = 1` filled in by its limit `x`.
pub fn q_number(x: f64, q: QParam) -> f64 {
    let gap = q.q - 1.0;
    if gap.abs() < Q_LIMIT_WINDOW {
        return x;
    }
    // sinh form avoids cancellation in q^x - q^-x near q = 1
    let log_q = gap.ln_1p();
    (x * log_q).sinh() / log_q.sinh()
}

fn single_mode(space: &Arc<FockSpace>) -> Result<ModeId> {
    match space.modes() {
        [m] => Ok(*m),
        _ => Err(Error::validation("Casimir operators are built per mode on a single-mode space")),
    }
}

/// `C = 2NH - a^dagger a` at `H = 1/2`.
pub fn casimir(space: &Arc<FockSpace>) -> Result<Operator> {
    let m = single_mode(space)?;
    let n = Operator::number(space, &m)?;
    let ada = Operator::creation(space, &m)?.mul(&Operator::annihilation(space, &m)?)?;
    n.scale_real(2.0 * H_FUNDAMENTAL).sub(&ada)
}

/// `C_q = N [2H]_q - a_q^dagger a_q` at `H = 1/2`, where `a_q = a`.
pub fn casimir_q(space: &Arc<FockSpace>, q: QParam) -> Result<Operator> {
    let m = single_mode(space)?;
    let n = Operator::number(space, &m)?;
    let ada = Operator::creation(space, &m)?.mul(&Operator::annihilation(space, &m)?)?;
    n.scale_real(q_number(2.0 * H_FUNDAMENTAL, q)).sub(&ada)
}

/// Ladder direction for deformed coproducts.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Ladder {
    Annihilation,
    Creation,
}

/// A base space together with its two-sector double `A ⊗ A`.
///
/// The doubled space lists the plus-sector copies of the base modes first,
/// then the minus-sector copies, so `O ⊗ 1` and `1 ⊗ O` are plain Kronecker
/// products.
#[derive(Clone, Debug)]
pub struct DoubledSpace {
    base: Arc<FockSpace>,
    doubled: Arc<FockSpace>,
}

impl DoubledSpace {
    /// The sector labels of the base modes are ignored and replaced by `+`/`-`.
    pub fn new(base: &Arc<FockSpace>) -> Result<Self> {
        let mut modes: Vec<ModeId> = base.modes().iter().map(|m| m.with_sector(Sector::Plus)).collect();
        modes.extend(base.modes().iter().map(|m| m.with_sector(Sector::Minus)));
        let mut cutoffs = base.cutoffs().to_vec();
        cutoffs.extend_from_slice(base.cutoffs());
        let doubled = FockSpace::new(modes, cutoffs).map_err(|e| match e {
            Error::Validation(msg) => {
                Error::validation(format!("base modes must stay distinct after relabelling sectors: {msg}"))
            }
            other => other,
        })?;
        Ok(Self { base: Arc::clone(base), doubled })
    }

    pub fn base(&self) -> &Arc<FockSpace> {
        &self.base
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.doubled
    }

    /// The copy of a base mode living in `sector`.
    pub fn mode(&self, base_mode: &ModeId, sector: Sector) -> Result<ModeId> {
        self.base.require(base_mode)?;
        Ok(base_mode.with_sector(sector))
    }

    /// `O^(+) = O ⊗ 1` or `O^(-) = 1 ⊗ O`.
    pub fn lift(&self, op: &Operator, sector: Sector) -> Result<Operator> {
        if op.space().as_ref() != self.base.as_ref() {
            return Err(Error::SpaceMismatch("operator does not act on the base space".into()));
        }
        let id = Operator::identity(&self.base);
        match sector {
            Sector::Plus => Operator::kron(op, &id, &self.doubled),
            Sector::Minus => Operator::kron(&id, op, &self.doubled),
        }
    }

    /// `ΔO = O ⊗ 1 + 1 ⊗ O`.
    pub fn coproduct_plain(&self, op: &Operator) -> Result<Operator> {
        self.lift(op, Sector::Plus)?.add(&self.lift(op, Sector::Minus)?)
    }

    /// Coproduct of a central element represented by the scalar `c`: `2c · 1`.
    pub fn coproduct_scalar(&self, c: f64) -> Operator {
        Operator::scalar(&self.doubled, C64::new(2.0 * c, 0.0))
    }

    /// `Δa_q = e^{ε} a^(+) + e^{-ε} a^(-)` (or its adjoint for [`Ladder::Creation`]).
    pub fn coproduct_deformed(&self, q: QParam, base_mode: &ModeId, ladder: Ladder) -> Result<Operator> {
        let op = match ladder {
            Ladder::Annihilation => Operator::annihilation(&self.base, base_mode)?,
            Ladder::Creation => Operator::creation(&self.base, base_mode)?,
        };
        let plus = self.lift(&op, Sector::Plus)?;
        let minus = self.lift(&op, Sector::Minus)?;
        plus.lin_comb(C64::new(q.sqrt_q(), 0.0), &minus, C64::new(1.0 / q.sqrt_q(), 0.0))
    }
}

/// The 2x2 map `(Δa_q, Δa_{1/q})ᵀ = M (a^(+), a^(-))ᵀ` and its inverse.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SectorIsolation {
    pub matrix: [[f64; 2]; 2],
    pub inverse: [[f64; 2]; 2],
    pub determinant: f64,
}

impl SectorIsolation {
    pub fn new(q: QParam) -> Result<Self> {
        let (e, ei) = (q.epsilon.exp(), (-q.epsilon).exp());
        // det = e^{2ε} - e^{-2ε}; sinh form keeps it exact in sign near ε = 0
        let det = 2.0 * (2.0 * q.epsilon).sinh();
        if det == 0.0 {
            return Err(Error::validation("sector isolation matrix is singular at epsilon = 0 (q = 1)"));
        }
        Ok(Self { matrix: [[e, ei], [ei, e]], inverse: [[e / det, -ei / det], [-ei / det, e / det]], determinant: det })
    }

    /// Recover `(a^(+), a^(-))` from the pair of deformed coproducts.
    pub fn isolate(&self, deformed_q: &Operator, deformed_q_inv: &Operator) -> Result<(Operator, Operator)> {
        let [[p0, p1], [m0, m1]] = self.inverse;
        let c = |x: f64| C64::new(x, 0.0);
        Ok((deformed_q.lin_comb(c(p0), deformed_q_inv, c(p1))?, deformed_q.lin_comb(c(m0), deformed_q_inv, c(m1))?))
    }
}

/// Convenience wrapper returning [`SectorIsolation`] for `q`.
pub fn sector_isolation_matrix(q: QParam) -> Result<SectorIsolation> {
    SectorIsolation::new(q)
}
