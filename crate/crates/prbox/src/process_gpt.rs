//! Measurement layer of the probabilistic theory whose states are channels:
//! process effects paired with Choi operators reproduce prepare-apply-measure
//! statistics.
//!
//! The state induction map R_rho is pinned down by the defining identity
//! (I (x) R_rho)[omega_+] = rho. Its dual enters the process effect
//! F = (I (x) R*_rho)[E]; any normalization constant is absorbed by the
//! defining contract evaluate(F, Choi(ch)) = tr[E * ch(rho)].

use num_complex::Complex64;

use crate::channels::{ChoiOperator, DensityOperator, MaxEntangledReference};
use crate::error::{PrBoxError, Result};
use crate::linalg::{is_positive_semidefinite, tensor, ComplexMatrix, HERMITICITY_TOL, PSD_TOL};

/// Measurement outcome operator with 0 <= E <= I.
#[derive(Debug, Clone)]
pub struct Effect {
    matrix: ComplexMatrix,
}

impl Effect {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_hermitian(HERMITICITY_TOL) {
            return Err(PrBoxError::InvalidEffect(format!(
                "not Hermitian (defect {:.3e})",
                matrix.hermiticity_defect()
            )));
        }
        if !is_positive_semidefinite(&matrix, PSD_TOL)? {
            return Err(PrBoxError::InvalidEffect("not positive semidefinite".into()));
        }
        let complement = ComplexMatrix::identity(matrix.dim()).sub(&matrix);
        if !is_positive_semidefinite(&complement, PSD_TOL)? {
            return Err(PrBoxError::InvalidEffect("exceeds the identity".into()));
        }
        Ok(Self { matrix })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim),
        }
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    /// Computational basis projector |index><index|.
    pub fn basis_projector(dim: usize, index: usize) -> Self {
        Self {
            matrix: ComplexMatrix::basis_projector(dim, index),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// The linear map R_rho fixed by (I (x) R_rho)[omega_+] = rho, stored by
/// its action on the matrix units |j><k| of the second factor.
#[derive(Debug, Clone)]
pub struct StateInductionMap {
    /// unit_action[j*d + k] = R_rho[|j><k|]
    unit_action: Vec<Complex64>,
    d: usize,
}

impl StateInductionMap {
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Apply to an arbitrary d x d matrix by linearity.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<Complex64> {
        if x.dim() != self.d {
            return Err(PrBoxError::DimensionMismatch {
                expected: self.d,
                got: x.dim(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..self.d {
            for k in 0..self.d {
                acc += x.get(j, k) * self.unit_action[j * self.d + k];
            }
        }
        Ok(acc)
    }

    /// Hilbert-Schmidt adjoint R*_rho evaluated at the unit scalar, as a
    /// d x d matrix: the unique A with R_rho[X] = <A, X> for all X.
    pub fn dual_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.d, |j, k| self.unit_action[j * self.d + k].conj())
    }
}

/// Build R_rho from the defining identity and verify the identity
/// numerically before returning.
pub fn make_state_induction(rho: &DensityOperator) -> Result<StateInductionMap> {
    let d = rho.dim();
    // (I (x) R)[omega_+] = sum_jk |j><k| R[|j><k|]; matching against rho
    // forces R[|j><k|] = <j|rho|k>
    let unit_action: Vec<Complex64> = (0..d * d)
        .map(|idx| rho.matrix().get(idx / d, idx % d))
        .collect();
    let map = StateInductionMap { unit_action, d };

    let omega = MaxEntangledReference::new(d);
    let mut induced = ComplexMatrix::zeros(d);
    for j in 0..d {
        for k in 0..d {
            // R applied to the (j,k) block of omega_+ in the second factor
            let block = ComplexMatrix::from_fn(d, |a, b| omega.matrix().get(j * d + a, k * d + b));
            let val = map.apply(&block)?;
            induced.set(j, k, induced.get(j, k) + val);
        }
    }
    let defect = induced.frobenius_distance(rho.matrix());
    if defect > 1e-10 {
        return Err(PrBoxError::InvalidDensity(format!(
            "state induction identity violated by {defect:.3e}"
        )));
    }
    Ok(map)
}

/// Positive operator whose pairing with a Choi operator yields the
/// probability of the prepare-apply-measure experiment (rho, E).
#[derive(Debug, Clone)]
pub struct ProcessEffect {
    matrix: ComplexMatrix,
    rho_used: DensityOperator,
    e_used: Effect,
}

impl ProcessEffect {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn rho_used(&self) -> &DensityOperator {
        &self.rho_used
    }

    pub fn e_used(&self) -> &Effect {
        &self.e_used
    }
}

/// F = (I (x) R*_rho)[E], scaled so that the pairing with the normalized
/// Choi operator reproduces tr[E * ch(rho)].
pub fn make_process_effect(rho: &DensityOperator, e: &Effect) -> Result<ProcessEffect> {
    if e.dim() != rho.dim() {
        return Err(PrBoxError::DimensionMismatch {
            expected: rho.dim(),
            got: e.dim(),
        });
    }
    let induction = make_state_induction(rho)?;
    let dual = induction.dual_matrix();
    // normalized Choi carries a 1/din; the contract restores it here
    let matrix = tensor(e.matrix(), &dual).scale_re(rho.dim() as f64);
    if !matrix.is_hermitian(HERMITICITY_TOL) {
        return Err(PrBoxError::InvalidEffect(
            "process effect is not Hermitian".into(),
        ));
    }
    Ok(ProcessEffect {
        matrix,
        rho_used: rho.clone(),
        e_used: e.clone(),
    })
}

/// tr[choi * F]: the probability of observing the effect in the experiment
/// encoded by the process effect.
pub fn evaluate(f: &ProcessEffect, choi: &ChoiOperator) -> Result<f64> {
    if f.matrix.dim() != choi.matrix().dim() {
        return Err(PrBoxError::DimensionMismatch {
            expected: choi.matrix().dim(),
            got: f.matrix.dim(),
        });
    }
    Ok(choi.matrix().mul(&f.matrix).trace().re)
}
