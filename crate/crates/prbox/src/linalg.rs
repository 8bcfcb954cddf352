//! Dense complex linear algebra for small Hilbert spaces (dim <= 16).
//!
//! Everything here is a pure function over immutable values: products,
//! tensor (Kronecker) products, partial traces, Hermitian eigendecomposition
//! and positivity checks. Storage is dense row-major; at these dimensions
//! exactness matters more than speed.

use num_complex::Complex64;
use std::fmt;

use crate::error::{PrBoxError, Result};

/// Default tolerance for Hermiticity checks.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Default tolerance for positive-semidefiniteness checks.
pub const PSD_TOL: f64 = 1e-10;

/// Dense square matrix of complex numbers, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

/// Ordered subsystem dimensions annotating a matrix; their product must
/// equal the matrix dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemShape {
    dims: Vec<usize>,
}

impl SubsystemShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(PrBoxError::InvalidShape(
                "subsystem dims must be nonempty and positive".into(),
            ));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }
}

impl ComplexMatrix {
    /// Zero matrix of the given dimension.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    /// Identity matrix.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Build from a row-major closure.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Build from rows of complex entries; fails if not square or not finite.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(PrBoxError::InvalidShape("empty matrix".into()));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(PrBoxError::InvalidShape(format!(
                    "expected {dim} columns, got {}",
                    row.len()
                )));
            }
            for &z in row {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(PrBoxError::NonFiniteEntry);
                }
                entries.push(z);
            }
        }
        Ok(Self { dim, entries })
    }

    /// Rank-1 projector |i><i| in the computational basis.
    pub fn basis_projector(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut m = Self::zeros(dim);
        m.set(index, index, Complex64::new(1.0, 0.0));
        m
    }

    /// Outer product |v><w| of two same-length vectors.
    pub fn outer(v: &[Complex64], w: &[Complex64]) -> Self {
        assert_eq!(v.len(), w.len());
        let dim = v.len();
        Self::from_fn(dim, |i, j| v[i] * w[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Self {
            dim: self.dim,
            entries,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Self {
            dim: self.dim,
            entries,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * c).collect(),
        }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Matrix product self * other.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in mul");
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..d {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    /// Plain transpose.
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius distance to another matrix.
    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        self.sub(other).frobenius_norm()
    }

    /// Matrix-vector product.
    pub fn apply_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Largest absolute deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            for j in 0..self.dim {
                let z = self.get(i, j);
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Kronecker product a ⊗ b.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let da = a.dim();
    let db = b.dim();
    ComplexMatrix::from_fn(da * db, |r, c| {
        a.get(r / db, c / db) * b.get(r % db, c % db)
    })
}

/// Kronecker product of a list of matrices, left to right.
pub fn tensor_all(ms: &[&ComplexMatrix]) -> ComplexMatrix {
    assert!(!ms.is_empty());
    let mut acc = ms[0].clone();
    for m in &ms[1..] {
        acc = tensor(&acc, m);
    }
    acc
}

/// Partial trace keeping the subsystems listed in `keep` (0-based, in
/// ascending order of original position). Tracing over everything yields a
/// 1x1 matrix holding tr(m).
pub fn partial_trace(
    m: &ComplexMatrix,
    shape: &SubsystemShape,
    keep: &[usize],
) -> Result<ComplexMatrix> {
    let dims = shape.dims();
    if shape.total_dim() != m.dim() {
        return Err(PrBoxError::DimensionMismatch {
            expected: shape.total_dim(),
            got: m.dim(),
        });
    }
    let n = dims.len();
    if keep.iter().any(|&k| k >= n) {
        return Err(PrBoxError::InvalidShape("keep index out of range".into()));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();

    let traced: Vec<usize> = (0..n).filter(|i| !keep_sorted.contains(i)).collect();
    let kept_dim: usize = keep_sorted.iter().map(|&i| dims[i]).product::<usize>().max(1);
    let traced_dim: usize = traced.iter().map(|&i| dims[i]).product::<usize>().max(1);

    // strides of each subsystem index within the full row index
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }

    let full_index = |kept_multi: usize, traced_multi: usize| -> usize {
        let mut idx = 0;
        let mut km = kept_multi;
        for &s in keep_sorted.iter().rev() {
            idx += (km % dims[s]) * strides[s];
            km /= dims[s];
        }
        let mut tm = traced_multi;
        for &s in traced.iter().rev() {
            idx += (tm % dims[s]) * strides[s];
            tm /= dims[s];
        }
        idx
    };

    let mut out = ComplexMatrix::zeros(kept_dim);
    for ki in 0..kept_dim {
        for kj in 0..kept_dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..traced_dim {
                acc += m.get(full_index(ki, t), full_index(kj, t));
            }
            out.set(ki, kj, acc);
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Unitary whose columns are the matching eigenvectors.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Eigenvector for the i-th eigenvalue (ascending order).
    pub fn vector(&self, i: usize) -> Vec<Complex64> {
        (0..self.vectors.dim()).map(|r| self.vectors.get(r, i)).collect()
    }

    /// Reassemble sum_i lambda_i |v_i><v_i|.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.vectors.dim();
        let mut out = ComplexMatrix::zeros(d);
        for (i, &lam) in self.values.iter().enumerate() {
            let v = self.vector(i);
            out = out.add(&ComplexMatrix::outer(&v, &v).scale_re(lam));
        }
        out
    }
}

/// Full Hermitian eigendecomposition by cyclic complex Jacobi rotations.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    hermitian_eigen_tol(m, HERMITICITY_TOL)
}

/// Same as [`hermitian_eigen`] with an explicit Hermiticity tolerance.
pub fn hermitian_eigen_tol(m: &ComplexMatrix, herm_tol: f64) -> Result<HermitianEigen> {
    if !m.is_hermitian(herm_tol) {
        return Err(PrBoxError::NotHermitian {
            defect: m.hermiticity_defect(),
        });
    }
    let d = m.dim();
    // symmetrize to kill the sub-tolerance defect before iterating
    let mut a = ComplexMatrix::from_fn(d, |i, j| (m.get(i, j) + m.get(j, i).conj()) * 0.5);
    let mut v = ComplexMatrix::identity(d);

    let off = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for p in 0..d {
            for q in (p + 1)..d {
                s += a.get(p, q).norm_sqr();
            }
        }
        s
    };

    const MAX_SWEEPS: usize = 100;
    for _ in 0..MAX_SWEEPS {
        if off(&a) < 1e-28 * (d as f64) {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a.get(p, q);
                let abs = apq.norm();
                if abs < 1e-300 {
                    continue;
                }
                let phase = apq / abs;
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let tau = (aqq - app) / (2.0 * abs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // block unitary U = diag(1, conj(phase)) * [[c, s], [-s, c]];
                // the diagonal factor makes the (p,q) block real symmetric
                let upp = Complex64::new(c, 0.0);
                let upq = Complex64::new(s, 0.0);
                let uqp = -phase.conj() * s;
                let uqq = phase.conj() * c;

                // A <- U^dag A U, applied as column then row updates
                for r in 0..d {
                    let arp = a.get(r, p);
                    let arq = a.get(r, q);
                    a.set(r, p, arp * upp + arq * uqp);
                    a.set(r, q, arp * upq + arq * uqq);
                }
                for cidx in 0..d {
                    let apc = a.get(p, cidx);
                    let aqc = a.get(q, cidx);
                    a.set(p, cidx, upp.conj() * apc + uqp.conj() * aqc);
                    a.set(q, cidx, upq.conj() * apc + uqq.conj() * aqc);
                }
                for r in 0..d {
                    let vrp = v.get(r, p);
                    let vrq = v.get(r, q);
                    v.set(r, p, vrp * upp + vrq * uqp);
                    v.set(r, q, vrp * upq + vrq * uqq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    let vals: Vec<f64> = (0..d).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap());

    let values: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let vectors = ComplexMatrix::from_fn(d, |r, c| v.get(r, order[c]));
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m)?.values)
}

/// True iff the Hermitian matrix has minimum eigenvalue >= -tol.
pub fn is_positive_semidefinite(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    let vals = hermitian_eigenvalues(m)?;
    Ok(vals.first().map_or(true, |&v| v >= -tol))
}
