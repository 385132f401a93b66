//! Entropy operator, the dressed-frame Hamiltonian, and the free-energy
//! variational principle that fixes `sinh² ε` to the Bose–Einstein occupation.

use std::sync::Arc;

use crate::bogoliubov::{PairSpec, SqueezeSet};
use crate::error::{Error, Result};
use crate::fock::{expectation, FockSpace, OpExpr, Operator, Sector, Species, StateVector};

/// Smallest `|ε|` for which the entropy operator is built; below it the
/// logarithm of `sinh² ε` is singular and the closed form (0 at ε = 0) is used.
pub const EPSILON_MIN: f64 = 1e-6;

/// Agreement required between the operator and closed-form free energies.
pub const FREE_ENERGY_PATH_TOL: f64 = 1e-8;

/// Inverse temperature and mode frequency.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ThermoParams {
    beta: f64,
    omega: f64,
}

impl ThermoParams {
    pub fn new(beta: f64, omega: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::validation(format!("beta must be positive and finite, got {beta}")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::validation(format!("omega must be positive and finite, got {omega}")));
        }
        Ok(Self { beta, omega })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

/// `1 / (e^{βΩ} - 1)`.
pub fn bose_einstein(tp: ThermoParams) -> Result<f64> {
    bose_einstein_at(tp.beta * tp.omega)
}

pub fn bose_einstein_at(beta_omega: f64) -> Result<f64> {
    if !(beta_omega > 0.0) {
        return Err(Error::validation(format!("beta * omega must be positive, got {beta_omega}")));
    }
    Ok(1.0 / beta_omega.exp_m1())
}

/// `cosh² ε ln cosh² ε - sinh² ε ln sinh² ε`, the entropy carried by one
/// dressed mode in the Minkowski vacuum.
pub fn mode_entropy(epsilon: f64) -> f64 {
    let s2 = epsilon.sinh().powi(2);
    if s2 == 0.0 {
        return 0.0;
    }
    let c2 = 1.0 + s2;
    c2 * c2.ln() - s2 * s2.ln()
}

fn check_entropy_epsilon(pair: &PairSpec) -> Result<()> {
    if pair.epsilon.abs() < EPSILON_MIN {
        return Err(Error::validation(format!(
            "entropy operator needs |epsilon| >= {EPSILON_MIN:e} (got {}); use the closed-form entropy, which is 0 at epsilon = 0",
            pair.epsilon
        )));
    }
    Ok(())
}

/// `-(X†X ln sinh² ε - X X† ln cosh² ε)` for the dressed operator `X` of one
/// mode of `pair`: `X = d(ε)` for the particle, `X = d̄(ε)` for the antiparticle.
pub fn entropy_term_expr(pair: &PairSpec, species: Species) -> Result<OpExpr> {
    check_entropy_epsilon(pair)?;
    let dx = pair.dressed();
    let (x, x_dag) = match species {
        Species::Particle => (dx.d.clone(), dx.d_dag()),
        Species::Antiparticle => (dx.dbar(), dx.dbar_dag.clone()),
    };
    let s2 = pair.epsilon.sinh().powi(2);
    let c2 = pair.epsilon.cosh().powi(2);
    Ok((x_dag.clone() * x.clone()).scale(-s2.ln()) + (x * x_dag).scale(c2.ln()))
}

/// Pair modes living in `sector`, with their species.
fn sector_modes(squeeze: &SqueezeSet, sector: Sector) -> impl Iterator<Item = (&PairSpec, Species)> {
    squeeze.pairs().iter().filter_map(move |p| {
        if p.sector == sector {
            Some((p, Species::Particle))
        } else if p.sector.flip() == sector {
            Some((p, Species::Antiparticle))
        } else {
            None
        }
    })
}

/// `S^(σ)(ε) = 𝒮^(σ) + 𝒮̄^(σ)`: entropy terms of every dressed mode in `sector`.
pub fn entropy_expr(squeeze: &SqueezeSet, sector: Sector) -> Result<OpExpr> {
    Ok(OpExpr::Sum(sector_modes(squeeze, sector).map(|(p, sp)| entropy_term_expr(p, sp)).collect::<Result<_>>()?))
}

/// `S_ε = S^(+) - S^(-)`.
pub fn total_entropy_expr(squeeze: &SqueezeSet) -> Result<OpExpr> {
    Ok(entropy_expr(squeeze, Sector::Plus)? - entropy_expr(squeeze, Sector::Minus)?)
}

pub fn entropy_operator(space: &Arc<FockSpace>, squeeze: &SqueezeSet, sector: Sector) -> Result<Operator> {
    squeeze.check_space(space)?;
    entropy_expr(squeeze, sector)?.build(space)?.verified_hermitian(1e-10)
}

/// `H^(σ)(ε) = Σ Ω [d†(ε) d(ε) + d̄(ε) d̄†(ε)]` over the dressed modes in `sector`.
pub fn hamiltonian_sector_expr(squeeze: &SqueezeSet, sector: Sector, omega: impl Fn(i64) -> f64) -> OpExpr {
    OpExpr::Sum(
        sector_modes(squeeze, sector)
            .map(|(p, sp)| {
                let dx = p.dressed();
                let w = omega(p.momentum);
                match sp {
                    Species::Particle => dx.d_number().scale(w),
                    Species::Antiparticle => (dx.dbar() * dx.dbar_dag.clone()).scale(w),
                }
            })
            .collect(),
    )
}

/// `H_ε = Σ_σ Σ_p σΩ [d†(ε) d(ε) + d̄(ε) d̄†(ε)]`, summed pair by pair with the
/// sector sign of each mode.
pub fn hamiltonian_eps_expr(squeeze: &SqueezeSet, omega: impl Fn(i64) -> f64) -> OpExpr {
    OpExpr::Sum(
        squeeze
            .pairs()
            .iter()
            .map(|p| {
                let dx = p.dressed();
                let w = omega(p.momentum);
                let sign = p.sector.sign();
                dx.d_number().scale(sign * w) + (dx.dbar() * dx.dbar_dag.clone()).scale(-sign * w)
            })
            .collect(),
    )
}

pub fn hamiltonian_eps(space: &Arc<FockSpace>, squeeze: &SqueezeSet, omega: impl Fn(i64) -> f64) -> Result<Operator> {
    squeeze.check_space(space)?;
    hamiltonian_eps_expr(squeeze, omega).build(space)?.verified_hermitian(1e-10)
}

pub fn hamiltonian_sector(
    space: &Arc<FockSpace>,
    squeeze: &SqueezeSet,
    sector: Sector,
    omega: impl Fn(i64) -> f64,
) -> Result<Operator> {
    squeeze.check_space(space)?;
    hamiltonian_sector_expr(squeeze, sector, omega).build(space)?.verified_hermitian(1e-10)
}

/// Closed form of `F^(+)` for one momentum:
/// `Ω (2 sinh² ε + 1) - (2/β) [cosh² ε ln cosh² ε - sinh² ε ln sinh² ε]`.
pub fn free_energy_closed(epsilon: f64, tp: ThermoParams) -> f64 {
    let s2 = epsilon.sinh().powi(2);
    tp.omega * (2.0 * s2 + 1.0) - 2.0 / tp.beta * mode_entropy(epsilon)
}

/// `dF/dε = sinh 2ε [2Ω - (2/β) ln coth² ε]`.
pub fn free_energy_derivative(epsilon: f64, tp: ThermoParams) -> f64 {
    if epsilon == 0.0 {
        return 0.0;
    }
    (2.0 * epsilon).sinh() * stationarity_factor(epsilon.abs(), tp) * epsilon.signum()
}

/// `2Ω - (2/β) ln coth² ε`, increasing in `ε > 0` and zero at the stationary point.
fn stationarity_factor(epsilon: f64, tp: ThermoParams) -> f64 {
    let s2 = epsilon.sinh().powi(2);
    // ln coth² ε = ln(1 + 1/sinh² ε)
    2.0 * tp.omega - 2.0 / tp.beta * (1.0 / s2).ln_1p()
}

/// `F^(+)(ε) = <0_M| H^(+)(ε) - S^(+)(ε)/β |0_M>` for one momentum carrying
/// both sector pairs, evaluated with operators and checked against the closed
/// form.
pub fn free_energy(epsilon: f64, tp: ThermoParams) -> Result<f64> {
    let closed = free_energy_closed(epsilon, tp);
    let operator = free_energy_operator(epsilon, tp)?;
    let gap = (operator - closed).abs();
    if gap > FREE_ENERGY_PATH_TOL * closed.abs().max(1.0) {
        return Err(Error::numeric("operator and closed-form free energies disagree", gap));
    }
    Ok(operator)
}

/// Operator path of [`free_energy`]. Below [`EPSILON_MIN`] the entropy term
/// falls back to the closed form.
pub fn free_energy_operator(epsilon: f64, tp: ThermoParams) -> Result<f64> {
    let squeeze = SqueezeSet::momentum(0, epsilon);
    // one rung above the vacuum is all <0_M| . |0_M> of quadratic terms sees
    let space = squeeze.space(2)?;
    let vac = StateVector::vacuum(&space);
    let h_plus = hamiltonian_sector(&space, &squeeze, Sector::Plus, |_| tp.omega)?;
    let energy = expectation(&h_plus, &vac)?.re;
    let entropy = if epsilon.abs() < EPSILON_MIN {
        2.0 * mode_entropy(epsilon)
    } else {
        expectation(&entropy_operator(&space, &squeeze, Sector::Plus)?, &vac)?.re
    };
    Ok(energy - entropy / tp.beta)
}

/// Minimizer of [`free_energy`] over `ε >= 0`.
///
/// Golden-section search on the free energy brackets the minimum; because
/// function values only resolve the argument to about `sqrt(machine epsilon)`,
/// the bracket is then refined by bisection on the sign of `dF/dε`.
pub fn stationary_epsilon(tp: ThermoParams) -> Result<f64> {
    let n_be = bose_einstein(tp)?;
    let hi = (10.0 * n_be).sqrt().asinh();
    let (mut a, mut b) = (0.0, hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = free_energy(x1, tp)?;
    let mut f2 = free_energy(x2, tp)?;
    while b - a > 1e-4 * hi {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = free_energy(x1, tp)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = free_energy(x2, tp)?;
        }
    }

    // widen the bracket; if function values were too flat to localize the
    // minimum, fall back to the full monotone interval
    let width = b - a;
    let mut lo = (a - width).max(0.0);
    let mut up = (b + width).min(hi);
    let positive_lo = lo > 0.0 && stationarity_factor(lo, tp) > 0.0;
    if positive_lo || stationarity_factor(up, tp) < 0.0 {
        lo = 0.0;
        up = hi;
        if stationarity_factor(up, tp) < 0.0 {
            return Err(Error::numeric("free-energy minimum not bracketed", stationarity_factor(up, tp)));
        }
    }
    // bisect down to floating-point resolution
    for _ in 0..200 {
        let mid = 0.5 * (lo + up);
        if mid <= lo || mid >= up {
            break;
        }
        if mid == 0.0 || stationarity_factor(mid, tp) < 0.0 {
            lo = mid;
        } else {
            up = mid;
        }
    }
    Ok(0.5 * (lo + up))
}
