//! Quantum channels as Kraus families, Choi-Jamiolkowski conversion, and
//! the two-qubit measure-and-prepare channel that realizes the PR box.
//!
//! Choi convention used throughout: normalized (trace 1), tensor ordering
//! output (x) input, trace preservation expressed as
//! `tr_output(choi) = I_din / din`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PrBoxError, Result};
use crate::linalg::{
    hermitian_eigen, is_positive_semidefinite, partial_trace, ComplexMatrix, SubsystemShape,
    HERMITICITY_TOL, PSD_TOL,
};

/// Positive unit-trace operator with declared subsystem dimensions.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    shape: SubsystemShape,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix, shape: SubsystemShape) -> Result<Self> {
        if shape.total_dim() != matrix.dim() {
            return Err(PrBoxError::DimensionMismatch {
                expected: shape.total_dim(),
                got: matrix.dim(),
            });
        }
        if !matrix.is_hermitian(HERMITICITY_TOL) {
            return Err(PrBoxError::InvalidDensity(format!(
                "not Hermitian (defect {:.3e})",
                matrix.hermiticity_defect()
            )));
        }
        if !is_positive_semidefinite(&matrix, PSD_TOL)? {
            return Err(PrBoxError::InvalidDensity("not positive semidefinite".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(PrBoxError::InvalidDensity(format!("trace {tr} != 1")));
        }
        Ok(Self { matrix, shape })
    }

    /// Pure state |psi><psi| from a (normalized) amplitude vector.
    pub fn pure(amplitudes: &[Complex64], shape: SubsystemShape) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(PrBoxError::InvalidDensity(format!("norm {norm} != 1")));
        }
        Self::new(ComplexMatrix::outer(amplitudes, amplitudes), shape)
    }

    /// Computational basis state |index><index|.
    pub fn basis_state(dim: usize, index: usize, shape: SubsystemShape) -> Result<Self> {
        Self::new(ComplexMatrix::basis_projector(dim, index), shape)
    }

    /// Maximally mixed state I/d.
    pub fn maximally_mixed(shape: SubsystemShape) -> Self {
        let d = shape.total_dim();
        Self {
            matrix: ComplexMatrix::identity(d).scale_re(1.0 / d as f64),
            shape,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn shape(&self) -> &SubsystemShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Diagonal element <index|rho|index>.
    pub fn diagonal(&self, index: usize) -> f64 {
        self.matrix.get(index, index).re
    }
}

/// Completely positive trace-preserving map held as a Kraus family.
///
/// All channels in this crate have equal input and output dimension.
#[derive(Debug, Clone)]
pub struct Channel {
    kraus: Vec<ComplexMatrix>,
    din: usize,
    dout: usize,
}

impl Channel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| PrBoxError::InvalidChannel("empty Kraus family".into()))?;
        let d = first.dim();
        if kraus.iter().any(|k| k.dim() != d) {
            return Err(PrBoxError::InvalidChannel(
                "Kraus operators of mixed dimension".into(),
            ));
        }
        // trace preservation: sum K^dag K = I
        let mut acc = ComplexMatrix::zeros(d);
        for k in &kraus {
            acc = acc.add(&k.adjoint().mul(k));
        }
        let defect = acc.frobenius_distance(&ComplexMatrix::identity(d));
        if defect > 1e-10 {
            return Err(PrBoxError::InvalidChannel(format!(
                "sum K^dag K deviates from I by {defect:.3e}"
            )));
        }
        Ok(Self {
            kraus,
            din: d,
            dout: d,
        })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            kraus: vec![ComplexMatrix::identity(d)],
            din: d,
            dout: d,
        }
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn din(&self) -> usize {
        self.din
    }

    pub fn dout(&self) -> usize {
        self.dout
    }
}

/// Normalized Choi operator: trace 1, PSD, tr_output = I/din.
#[derive(Debug, Clone)]
pub struct ChoiOperator {
    matrix: ComplexMatrix,
    din: usize,
    dout: usize,
}

impl ChoiOperator {
    pub fn new(matrix: ComplexMatrix, din: usize, dout: usize) -> Result<Self> {
        if matrix.dim() != din * dout {
            return Err(PrBoxError::DimensionMismatch {
                expected: din * dout,
                got: matrix.dim(),
            });
        }
        if !is_positive_semidefinite(&matrix, PSD_TOL)? {
            return Err(PrBoxError::InvalidChoi("not positive semidefinite".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(PrBoxError::InvalidChoi(format!("trace {tr} != 1")));
        }
        let shape = SubsystemShape::new(vec![dout, din])?;
        let marginal = partial_trace(&matrix, &shape, &[1])?;
        let target = ComplexMatrix::identity(din).scale_re(1.0 / din as f64);
        let defect = marginal.frobenius_distance(&target);
        if defect > 1e-10 {
            return Err(PrBoxError::InvalidChoi(format!(
                "tr_output deviates from I/din by {defect:.3e}"
            )));
        }
        Ok(Self { matrix, din, dout })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn din(&self) -> usize {
        self.din
    }

    pub fn dout(&self) -> usize {
        self.dout
    }
}

/// Unnormalized maximally entangled reference omega_+ = sum_jk |jj><kk|.
pub struct MaxEntangledReference {
    matrix: ComplexMatrix,
    d: usize,
}

impl MaxEntangledReference {
    pub fn new(d: usize) -> Self {
        let mut m = ComplexMatrix::zeros(d * d);
        for j in 0..d {
            for k in 0..d {
                m.set(j * d + j, k * d + k, Complex64::new(1.0, 0.0));
            }
        }
        Self { matrix: m, d }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn local_dim(&self) -> usize {
        self.d
    }
}

/// Apply the channel: rho -> sum_i K_i rho K_i^dag.
pub fn apply(ch: &Channel, rho: &DensityOperator) -> Result<DensityOperator> {
    if rho.dim() != ch.din {
        return Err(PrBoxError::DimensionMismatch {
            expected: ch.din,
            got: rho.dim(),
        });
    }
    let mut out = ComplexMatrix::zeros(ch.dout);
    for k in &ch.kraus {
        out = out.add(&k.mul(rho.matrix()).mul(&k.adjoint()));
    }
    DensityOperator::new(out, rho.shape().clone())
}

/// Normalized Choi operator of a channel, ordered output (x) input.
pub fn to_choi(ch: &Channel) -> Result<ChoiOperator> {
    let din = ch.din;
    let dout = ch.dout;
    let dim = din * dout;
    let mut m = ComplexMatrix::zeros(dim);
    // choi = (1/din) sum_i vec(K_i) vec(K_i)^dag with vec(K)[m*din+n] = K[m,n]
    for k in &ch.kraus {
        let v: Vec<Complex64> = (0..dim).map(|idx| k.get(idx / din, idx % din)).collect();
        m = m.add(&ComplexMatrix::outer(&v, &v));
    }
    ChoiOperator::new(m.scale_re(1.0 / din as f64), din, dout)
}

/// Extract a Kraus family from a Choi operator via eigendecomposition.
pub fn from_choi(c: &ChoiOperator) -> Result<Channel> {
    let din = c.din;
    let eig = hermitian_eigen(c.matrix())?;
    let mut kraus = Vec::new();
    for (i, &lam) in eig.values.iter().enumerate() {
        if lam < 1e-12 {
            continue;
        }
        let v = eig.vector(i);
        let w = (lam * din as f64).sqrt();
        let k = ComplexMatrix::from_fn(c.dout, |m, n| v[m * din + n] * w);
        kraus.push(k);
    }
    Channel::new(kraus)
}

/// Two-qubit shape [2, 2].
pub fn two_qubit_shape() -> SubsystemShape {
    SubsystemShape::new(vec![2, 2]).expect("static shape")
}

/// Single-qubit shape [2].
pub fn qubit_shape() -> SubsystemShape {
    SubsystemShape::new(vec![2]).expect("static shape")
}

/// The correlated and anticorrelated two-qubit mixtures
/// (|00><00| + |11><11|)/2 and (|01><01| + |10><10|)/2.
pub fn make_prepared_states() -> (DensityOperator, DensityOperator) {
    let mut cor = ComplexMatrix::zeros(4);
    cor.set(0, 0, Complex64::new(0.5, 0.0));
    cor.set(3, 3, Complex64::new(0.5, 0.0));
    let mut acor = ComplexMatrix::zeros(4);
    acor.set(1, 1, Complex64::new(0.5, 0.0));
    acor.set(2, 2, Complex64::new(0.5, 0.0));
    let shape = two_qubit_shape();
    (
        DensityOperator::new(cor, shape.clone()).expect("xi_cor is a valid state"),
        DensityOperator::new(acor, shape).expect("xi_acor is a valid state"),
    )
}

/// The two-qubit measure-and-prepare channel: measure both qubits in the
/// computational basis; on outcome (j,k) prepare xi_cor if jk = 0 and
/// xi_acor if jk = 1. Sixteen Kraus operators sqrt(1/2) |m><jk| with m
/// running over the support of the prepared state.
pub fn make_pr_channel() -> Channel {
    let w = Complex64::new(0.5f64.sqrt(), 0.0);
    let mut kraus = Vec::with_capacity(16);
    // outcome pairs (j,k) in lexicographic order 00,01,10,11
    for j in 0..2usize {
        for k in 0..2usize {
            let input = j * 2 + k;
            let support: [usize; 2] = if j * k == 0 { [0, 3] } else { [1, 2] };
            for m in support {
                let mut op = ComplexMatrix::zeros(4);
                op.set(m, input, w);
                kraus.push(op);
            }
        }
    }
    Channel::new(kraus).expect("PR channel Kraus family is trace preserving")
}

// ---------------------------------------------------------------------------
// JSON wire formats
// ---------------------------------------------------------------------------

type JsonMatrix = Vec<Vec<[f64; 2]>>;

fn matrix_to_json(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| [m.get(i, j).re, m.get(i, j).im]).collect())
        .collect()
}

fn matrix_from_json(rows: &JsonMatrix) -> Result<ComplexMatrix> {
    let converted: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(&converted)
}

#[derive(Serialize, Deserialize)]
struct ChannelJson {
    din: usize,
    dout: usize,
    kraus: Vec<JsonMatrix>,
}

#[derive(Serialize, Deserialize)]
struct ChoiJson {
    din: usize,
    dout: usize,
    choi: JsonMatrix,
}

pub fn channel_to_json(ch: &Channel) -> String {
    let json = ChannelJson {
        din: ch.din,
        dout: ch.dout,
        kraus: ch.kraus.iter().map(matrix_to_json).collect(),
    };
    serde_json::to_string_pretty(&json).expect("channel serialization cannot fail")
}

pub fn channel_from_json(s: &str) -> Result<Channel> {
    let json: ChannelJson = serde_json::from_str(s)?;
    let kraus = json
        .kraus
        .iter()
        .map(matrix_from_json)
        .collect::<Result<Vec<_>>>()?;
    let ch = Channel::new(kraus)?;
    if ch.din != json.din || ch.dout != json.dout {
        return Err(PrBoxError::InvalidChannel(
            "declared dimensions disagree with Kraus operators".into(),
        ));
    }
    Ok(ch)
}

pub fn choi_to_json(c: &ChoiOperator) -> String {
    let json = ChoiJson {
        din: c.din,
        dout: c.dout,
        choi: matrix_to_json(c.matrix()),
    };
    serde_json::to_string_pretty(&json).expect("choi serialization cannot fail")
}

pub fn choi_from_json(s: &str) -> Result<ChoiOperator> {
    let json: ChoiJson = serde_json::from_str(s)?;
    ChoiOperator::new(matrix_from_json(&json.choi)?, json.din, json.dout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_channel, random_density, SeededRng};

    #[test]
    fn identity_channel_preserves_states() {
        let mut rng = SeededRng::new(7);
        let rho = random_density(&mut rng, two_qubit_shape());
        let out = apply(&Channel::identity(4), &rho).unwrap();
        assert!(out.matrix().frobenius_distance(rho.matrix()) < 1e-14);
    }

    #[test]
    fn pr_channel_on_basis_states() {
        let (cor, acor) = make_prepared_states();
        let ch = make_pr_channel();
        let shape = two_qubit_shape();

        let rho00 = DensityOperator::basis_state(4, 0, shape.clone()).unwrap();
        let out = apply(&ch, &rho00).unwrap();
        assert!(out.matrix().frobenius_distance(cor.matrix()) < 1e-14);

        let rho11 = DensityOperator::basis_state(4, 3, shape).unwrap();
        let out = apply(&ch, &rho11).unwrap();
        assert!(out.matrix().frobenius_distance(acor.matrix()) < 1e-14);
    }

    #[test]
    fn pr_channel_on_maximally_mixed() {
        // kappa = 1/4 read off the diagonal
        let (cor, acor) = make_prepared_states();
        let ch = make_pr_channel();
        let rho = DensityOperator::maximally_mixed(two_qubit_shape());
        let out = apply(&ch, &rho).unwrap();
        let expect = cor.matrix().scale_re(0.75).add(&acor.matrix().scale_re(0.25));
        assert!(out.matrix().frobenius_distance(&expect) < 1e-14);
    }

    #[test]
    fn pr_channel_equation_on_random_states() {
        let (cor, acor) = make_prepared_states();
        let ch = make_pr_channel();
        let mut rng = SeededRng::new(42);
        for _ in 0..50 {
            let rho = random_density(&mut rng, two_qubit_shape());
            let kappa = rho.diagonal(3);
            let out = apply(&ch, &rho).unwrap();
            let expect = cor
                .matrix()
                .scale_re(1.0 - kappa)
                .add(&acor.matrix().scale_re(kappa));
            assert!(out.matrix().frobenius_distance(&expect) < 1e-10);
        }
    }

    #[test]
    fn prepared_states_tile_the_basis() {
        let (cor, acor) = make_prepared_states();
        assert!((cor.diagonal(0) - 0.5).abs() < 1e-15);
        assert!(cor.diagonal(1).abs() < 1e-15);
        let sum = cor.matrix().add(acor.matrix());
        let half_i = ComplexMatrix::identity(4).scale_re(0.5);
        assert!(sum.frobenius_distance(&half_i) < 1e-15);
    }

    #[test]
    fn choi_of_identity_channel() {
        let choi = to_choi(&Channel::identity(2)).unwrap();
        let omega = MaxEntangledReference::new(2);
        let expect = omega.matrix().scale_re(0.5);
        assert!(choi.matrix().frobenius_distance(&expect) < 1e-14);
    }

    #[test]
    fn choi_of_depolarizing_channel() {
        // output always I/2; Choi computed by hand is I_4/4
        let half = Complex64::new(0.5f64.sqrt(), 0.0);
        let mut kraus = Vec::new();
        for m in 0..2usize {
            for n in 0..2usize {
                let mut op = ComplexMatrix::zeros(2);
                op.set(m, n, half);
                kraus.push(op);
            }
        }
        let ch = Channel::new(kraus).unwrap();
        let choi = to_choi(&ch).unwrap();
        let expect = ComplexMatrix::identity(4).scale_re(0.25);
        assert!(choi.matrix().frobenius_distance(&expect) < 1e-14);
    }

    #[test]
    fn from_choi_of_maximally_mixed_output() {
        let choi =
            ChoiOperator::new(ComplexMatrix::identity(4).scale_re(0.25), 2, 2).unwrap();
        let ch = from_choi(&choi).unwrap();
        let mut rng = SeededRng::new(11);
        let half_i = ComplexMatrix::identity(2).scale_re(0.5);
        for _ in 0..5 {
            let rho = random_density(&mut rng, qubit_shape());
            let out = apply(&ch, &rho).unwrap();
            assert!(out.matrix().frobenius_distance(&half_i) < 1e-12);
        }
    }

    #[test]
    fn from_choi_round_trips_identity() {
        let choi = to_choi(&Channel::identity(2)).unwrap();
        let ch = from_choi(&choi).unwrap();
        let back = to_choi(&ch).unwrap();
        assert!(back.matrix().frobenius_distance(choi.matrix()) < 1e-9);
    }

    #[test]
    fn choi_round_trip_on_random_channels() {
        let mut rng = SeededRng::new(9);
        for _ in 0..10 {
            let ch = random_channel(&mut rng, 4, 3);
            let choi = to_choi(&ch).unwrap();
            let back = to_choi(&from_choi(&choi).unwrap()).unwrap();
            assert!(back.matrix().frobenius_distance(choi.matrix()) < 1e-9);
        }
    }

    #[test]
    fn pr_choi_satisfies_invariants() {
        // ChoiOperator::new checks PSD, trace 1 and the partial-trace identity
        let choi = to_choi(&make_pr_channel()).unwrap();
        assert_eq!(choi.matrix().dim(), 16);
    }

    #[test]
    fn channel_json_round_trip() {
        let ch = make_pr_channel();
        let s = channel_to_json(&ch);
        let back = channel_from_json(&s).unwrap();
        let a = to_choi(&ch).unwrap();
        let b = to_choi(&back).unwrap();
        assert!(a.matrix().frobenius_distance(b.matrix()) < 1e-12);
    }

    #[test]
    fn choi_json_round_trip() {
        let choi = to_choi(&make_pr_channel()).unwrap();
        let s = choi_to_json(&choi);
        let back = choi_from_json(&s).unwrap();
        assert!(back.matrix().frobenius_distance(choi.matrix()) < 1e-12);
    }

    #[test]
    fn bad_channel_rejected() {
        let half = ComplexMatrix::identity(2).scale_re(0.5);
        assert!(Channel::new(vec![half]).is_err());
    }
}
