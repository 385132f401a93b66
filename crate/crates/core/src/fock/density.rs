use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::space::ModeId;
use super::state::StateVector;
use crate::error::{Error, Result};

/// Largest reduced dimension handed to the dense eigensolver.
pub const MAX_DENSE_DIMENSION: usize = 4096;

/// Default tolerance for density-matrix validity checks.
pub const DENSITY_TOL: f64 = 1e-10;

/// Reduced state of a subset of modes.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    kept_modes: Vec<ModeId>,
    entries: DMatrix<C64>,
    tol: f64,
}

impl DensityMatrix {
    /// Validate hermiticity, unit trace and positivity at `tol`.
    pub fn new(kept_modes: Vec<ModeId>, entries: DMatrix<C64>, tol: f64) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::validation("density matrix must be square"));
        }
        let herm = (&entries - entries.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > tol {
            return Err(Error::numeric("density matrix is not hermitian", herm));
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > tol || trace.im.abs() > tol {
            return Err(Error::numeric("density matrix trace differs from 1", (trace - 1.0).norm()));
        }
        let rho = Self { kept_modes, entries, tol };
        let lowest = rho.eigenvalues()?.into_iter().fold(f64::INFINITY, f64::min);
        if lowest < -tol {
            return Err(Error::numeric("density matrix has a negative eigenvalue", lowest));
        }
        Ok(rho)
    }

    pub fn kept_modes(&self) -> &[ModeId] {
        &self.kept_modes
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> f64 {
        // Tr(rho rho) = sum |rho_ij|^2 for hermitian rho
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if self.dim() > MAX_DENSE_DIMENSION {
            return Err(Error::Resource(format!(
                "dense eigendecomposition limited to dimension {MAX_DENSE_DIMENSION}, got {}",
                self.dim()
            )));
        }
        // symmetrize away rounding noise before the hermitian solver
        let h = (&self.entries + self.entries.adjoint()) * C64::new(0.5, 0.0);
        Ok(h.symmetric_eigenvalues().iter().copied().collect())
    }
}

/// Reduced density matrix of `keep` for the normalized pure state `v`.
///
/// `Tr rho = ||v||^2`, so `v` must be normalized to within the density
/// tolerance for the result to validate.
pub fn partial_trace(v: &StateVector, keep: &[ModeId]) -> Result<DensityMatrix> {
    partial_trace_with_tol(v, keep, DENSITY_TOL)
}

pub fn partial_trace_with_tol(v: &StateVector, keep: &[ModeId], tol: f64) -> Result<DensityMatrix> {
    let space = v.space();
    if keep.is_empty() {
        return Err(Error::validation("partial trace needs at least one kept mode"));
    }
    let mut kept_pos = Vec::with_capacity(keep.len());
    for m in keep {
        let p = space.require(m)?;
        if kept_pos.contains(&p) {
            return Err(Error::validation(format!("mode {m} listed twice in the kept set")));
        }
        kept_pos.push(p);
    }
    if kept_pos.len() == space.n_modes() {
        return Err(Error::validation("kept set must be a proper subset of the modes"));
    }
    // kept modes are ordered as in the space, so the reduced basis is lexicographic too
    kept_pos.sort_unstable();
    let traced_pos: Vec<usize> = (0..space.n_modes()).filter(|p| !kept_pos.contains(p)).collect();

    let radix = |positions: &[usize]| -> Vec<usize> {
        let mut strides = vec![1usize; positions.len()];
        for k in (0..positions.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * (space.cutoffs()[positions[k + 1]] + 1);
        }
        strides
    };
    let kept_strides = radix(&kept_pos);
    let traced_strides = radix(&traced_pos);
    let kept_dim: usize = kept_pos.iter().map(|&p| space.cutoffs()[p] + 1).product();
    let traced_dim: usize = traced_pos.iter().map(|&p| space.cutoffs()[p] + 1).product();
    if kept_dim > MAX_DENSE_DIMENSION {
        return Err(Error::Resource(format!(
            "reduced dimension {kept_dim} exceeds the dense limit {MAX_DENSE_DIMENSION}"
        )));
    }

    let mut psi = DMatrix::<C64>::zeros(kept_dim, traced_dim);
    for (i, a) in v.amplitudes().iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let k: usize = kept_pos.iter().zip(&kept_strides).map(|(&p, s)| space.occupation(i, p) * s).sum();
        let t: usize = traced_pos.iter().zip(&traced_strides).map(|(&p, s)| space.occupation(i, p) * s).sum();
        psi[(k, t)] = *a;
    }
    let rho = &psi * psi.adjoint();
    let kept_modes = kept_pos.iter().map(|&p| space.modes()[p]).collect();
    DensityMatrix::new(kept_modes, rho, tol)
}

/// `-sum lambda ln lambda`; eigenvalues at or below the tolerance contribute 0.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let mut s = 0.0;
    for lambda in rho.eigenvalues()? {
        if lambda < -rho.tol {
            return Err(Error::numeric("negative eigenvalue in entropy", lambda));
        }
        if lambda > rho.tol {
            s -= lambda * lambda.ln();
        }
    }
    Ok(s)
}
