//! Correlation boxes P(x,y|X,Y) for binary settings and outcomes: CHSH
//! evaluation, no-signaling verification, membership in the local polytope,
//! and construction from channels probed with Z_psi process measurements.
//!
//! Global label map: outcome +1 <-> bit 0, outcome -1 <-> bit 1; setting
//! Z_0 <-> undashed <-> index 0.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channels::{apply, qubit_shape, two_qubit_shape, Channel, DensityOperator};
use crate::error::{PrBoxError, Result};
use crate::linalg::{tensor, ComplexMatrix};

/// Default tolerance for no-signaling and local-membership checks.
pub const BOX_TOL: f64 = 1e-9;

/// The 16 conditional probabilities of a two-party binary box.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationBox {
    // indexed by ((X*2 + Y)*2 + x)*2 + y
    p: [f64; 16],
}

#[inline]
fn idx(x: u8, y: u8, sx: u8, sy: u8) -> usize {
    (((sx as usize * 2 + sy as usize) * 2 + x as usize) * 2) + y as usize
}

impl CorrelationBox {
    pub fn new(p: [f64; 16]) -> Result<Self> {
        for &v in &p {
            if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                return Err(PrBoxError::InvalidBox(format!("probability {v} out of range")));
            }
        }
        for sx in 0..2u8 {
            for sy in 0..2u8 {
                let total: f64 = (0..2u8)
                    .flat_map(|x| (0..2u8).map(move |y| (x, y)))
                    .map(|(x, y)| p[idx(x, y, sx, sy)])
                    .sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(PrBoxError::InvalidBox(format!(
                        "setting ({sx},{sy}) sums to {total}"
                    )));
                }
            }
        }
        Ok(Self { p })
    }

    /// P(x,y|X,Y) with bit labels.
    pub fn prob(&self, x: u8, y: u8, sx: u8, sy: u8) -> f64 {
        self.p[idx(x, y, sx, sy)]
    }

    /// Alice's marginal P(x|X) computed at Bob's setting Y.
    pub fn alice_marginal(&self, x: u8, sx: u8, sy: u8) -> f64 {
        self.prob(x, 0, sx, sy) + self.prob(x, 1, sx, sy)
    }

    /// Bob's marginal P(y|Y) computed at Alice's setting X.
    pub fn bob_marginal(&self, y: u8, sy: u8, sx: u8) -> f64 {
        self.prob(0, y, sx, sy) + self.prob(1, y, sx, sy)
    }

    pub fn entries(&self) -> &[f64; 16] {
        &self.p
    }

    /// Largest absolute entrywise difference.
    pub fn linf_distance(&self, other: &Self) -> f64 {
        self.p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A Z_psi experiment: feed the (pure) single-qubit test state through the
/// process, measure the output in the computational basis with outcomes
/// +1 (bit 0) and -1 (bit 1).
#[derive(Debug, Clone)]
pub struct ProcessMeasurementSetting {
    test_state: DensityOperator,
}

impl ProcessMeasurementSetting {
    pub fn new(test_state: DensityOperator) -> Result<Self> {
        if test_state.dim() != 2 {
            return Err(PrBoxError::DimensionMismatch {
                expected: 2,
                got: test_state.dim(),
            });
        }
        let m = test_state.matrix();
        let purity = m.mul(m).trace().re;
        if (purity - 1.0).abs() > 1e-10 {
            return Err(PrBoxError::InvalidDensity(format!(
                "test state not pure (purity {purity})"
            )));
        }
        Ok(Self { test_state })
    }

    /// The Z_j setting with computational-basis test state |j>.
    pub fn z_basis(j: u8) -> Self {
        let test_state = DensityOperator::basis_state(2, j as usize, qubit_shape())
            .expect("basis state is valid");
        Self { test_state }
    }

    pub fn test_state(&self) -> &DensityOperator {
        &self.test_state
    }
}

/// Probe a two-qubit channel with local test states and computational-basis
/// readout: p[x,y|X,Y] = tr[(E_x (x) E_y) ch(rho_X (x) rho_Y)].
pub fn box_from_channel(
    ch: &Channel,
    alice: &[ProcessMeasurementSetting; 2],
    bob: &[ProcessMeasurementSetting; 2],
) -> Result<CorrelationBox> {
    if ch.din() != 4 || ch.dout() != 4 {
        return Err(PrBoxError::DimensionMismatch {
            expected: 4,
            got: ch.din(),
        });
    }
    let mut p = [0.0f64; 16];
    for sx in 0..2u8 {
        for sy in 0..2u8 {
            let joint = tensor(
                alice[sx as usize].test_state().matrix(),
                bob[sy as usize].test_state().matrix(),
            );
            let input = DensityOperator::new(joint, two_qubit_shape())?;
            let out = apply(ch, &input)?;
            for x in 0..2u8 {
                for y in 0..2u8 {
                    let proj = ComplexMatrix::basis_projector(4, (x * 2 + y) as usize);
                    p[idx(x, y, sx, sy)] = proj.mul(out.matrix()).trace().re;
                }
            }
        }
    }
    CorrelationBox::new(p)
}

/// The ideal PR box: P(x,y|X,Y) = 1/2 if x xor y = XY, else 0.
pub fn make_pr_box() -> CorrelationBox {
    let mut p = [0.0f64; 16];
    for sx in 0..2u8 {
        for sy in 0..2u8 {
            for x in 0..2u8 {
                for y in 0..2u8 {
                    if x ^ y == sx & sy {
                        p[idx(x, y, sx, sy)] = 0.5;
                    }
                }
            }
        }
    }
    CorrelationBox::new(p).expect("PR table is a valid box")
}

/// Expectation <X (x) Y> with outcome values +1 for bit 0 and -1 for bit 1.
pub fn correlator(box_: &CorrelationBox, sx: u8, sy: u8) -> f64 {
    let mut acc = 0.0;
    for x in 0..2u8 {
        for y in 0..2u8 {
            let sign = if x == y { 1.0 } else { -1.0 };
            acc += sign * box_.prob(x, y, sx, sy);
        }
    }
    acc
}

/// |<00> + <01> + <10> - <11>| over setting indices (X,Y).
pub fn chsh(box_: &CorrelationBox) -> f64 {
    (correlator(box_, 0, 0) + correlator(box_, 0, 1) + correlator(box_, 1, 0)
        - correlator(box_, 1, 1))
        .abs()
}

/// Check all eight marginal-equality conditions; returns whether the box is
/// no-signaling at the given tolerance along with the worst deviation.
pub fn is_no_signaling(box_: &CorrelationBox, tol: f64) -> (bool, f64) {
    let mut worst = 0.0f64;
    for x in 0..2u8 {
        for sx in 0..2u8 {
            let d = (box_.alice_marginal(x, sx, 0) - box_.alice_marginal(x, sx, 1)).abs();
            worst = worst.max(d);
        }
    }
    for y in 0..2u8 {
        for sy in 0..2u8 {
            let d = (box_.bob_marginal(y, sy, 0) - box_.bob_marginal(y, sy, 1)).abs();
            worst = worst.max(d);
        }
    }
    (worst <= tol, worst)
}

/// A deterministic local strategy: responses (a(X=0), a(X=1), b(Y=0), b(Y=1)).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Strategy {
    pub a0: u8,
    pub a1: u8,
    pub b0: u8,
    pub b1: u8,
}

impl Strategy {
    /// The i-th strategy (i in 0..16), bits in the order (a0, a1, b0, b1).
    pub fn nth(i: usize) -> Self {
        Self {
            a0: ((i >> 3) & 1) as u8,
            a1: ((i >> 2) & 1) as u8,
            b0: ((i >> 1) & 1) as u8,
            b1: (i & 1) as u8,
        }
    }

    pub fn alice_response(&self, sx: u8) -> u8 {
        if sx == 0 {
            self.a0
        } else {
            self.a1
        }
    }

    pub fn bob_response(&self, sy: u8) -> u8 {
        if sy == 0 {
            self.b0
        } else {
            self.b1
        }
    }

    /// The deterministic box of this strategy.
    pub fn to_box(&self) -> CorrelationBox {
        let mut p = [0.0f64; 16];
        for sx in 0..2u8 {
            for sy in 0..2u8 {
                p[idx(self.alice_response(sx), self.bob_response(sy), sx, sy)] = 1.0;
            }
        }
        CorrelationBox::new(p).expect("deterministic box is valid")
    }
}

/// Convex weights over the 16 deterministic strategies witnessing locality.
#[derive(Debug, Clone)]
pub struct LocalModel {
    pub weights: [f64; 16],
}

impl LocalModel {
    /// Mix the strategy boxes with the model's weights.
    pub fn reconstruct(&self) -> CorrelationBox {
        let mut p = [0.0f64; 16];
        for (i, &w) in self.weights.iter().enumerate() {
            let b = Strategy::nth(i).to_box();
            for (acc, &v) in p.iter_mut().zip(b.entries()) {
                *acc += w * v;
            }
        }
        CorrelationBox::new(p).expect("convex mixture of boxes is valid")
    }
}

/// Decide membership in the local polytope by phase-1 simplex over the 16
/// deterministic vertices; returns a witnessing model when the box is local
/// within `tol` (L-infinity on the reconstructed box).
pub fn local_membership(box_: &CorrelationBox, tol: f64) -> Option<LocalModel> {
    // equality system: 16 box entries plus the normalization row
    const ROWS: usize = 17;
    const VARS: usize = 16;

    let mut a = [[0.0f64; VARS]; ROWS];
    let mut b = [0.0f64; ROWS];
    for (col, row) in (0..VARS).map(|i| (i, Strategy::nth(i).to_box())) {
        for r in 0..16 {
            a[r][col] = row.entries()[r];
        }
        a[16][col] = 1.0;
    }
    b[..16].copy_from_slice(box_.entries());
    b[16] = 1.0;

    let weights = phase_one_simplex(&a, &b, tol)?;
    let model = LocalModel { weights };
    if model.reconstruct().linf_distance(box_) <= tol {
        Some(model)
    } else {
        None
    }
}

/// Phase-1 simplex (Bland's rule) for A w = b, w >= 0 with b >= 0.
/// Returns a feasible w when the artificial objective reaches ~0.
fn phase_one_simplex(
    a: &[[f64; 16]; 17],
    b: &[f64; 17],
    tol: f64,
) -> Option<[f64; 16]> {
    const ROWS: usize = 17;
    const VARS: usize = 16;
    const TOTAL: usize = VARS + ROWS; // structural + artificial

    // tableau rows: ROWS constraint rows + 1 objective row; columns TOTAL + rhs
    let mut t = vec![vec![0.0f64; TOTAL + 1]; ROWS + 1];
    let mut basis = [0usize; ROWS];
    for r in 0..ROWS {
        for c in 0..VARS {
            t[r][c] = a[r][c];
        }
        t[r][VARS + r] = 1.0;
        t[r][TOTAL] = b[r];
        basis[r] = VARS + r;
    }
    // objective: minimize sum of artificials; expressed in terms of nonbasic vars
    for c in 0..=TOTAL {
        let s: f64 = (0..ROWS).map(|r| t[r][c]).sum();
        t[ROWS][c] = -s;
    }
    for r in 0..ROWS {
        t[ROWS][VARS + r] = 0.0;
    }

    let eps = 1e-12;
    for _ in 0..10_000 {
        // Bland: entering variable = lowest index with negative reduced cost
        let Some(enter) = (0..TOTAL).find(|&c| t[ROWS][c] < -eps) else {
            break;
        };
        // ratio test, ties broken by lowest basis index (Bland)
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for r in 0..ROWS {
            if t[r][enter] > eps {
                let ratio = t[r][TOTAL] / t[r][enter];
                let better = ratio < best - eps
                    || (ratio < best + eps
                        && leave.map_or(true, |l| basis[r] < basis[l]));
                if better {
                    best = ratio;
                    leave = Some(r);
                }
            }
        }
        let leave = leave?; // unbounded cannot happen here
        let piv = t[leave][enter];
        for c in 0..=TOTAL {
            t[leave][c] /= piv;
        }
        for r in 0..=ROWS {
            if r != leave {
                let factor = t[r][enter];
                if factor.abs() > 0.0 {
                    for c in 0..=TOTAL {
                        t[r][c] -= factor * t[leave][c];
                    }
                }
            }
        }
        basis[leave] = enter;
    }

    let objective = -t[ROWS][TOTAL];
    if objective.abs() > tol {
        return None;
    }
    let mut w = [0.0f64; 16];
    for r in 0..ROWS {
        if basis[r] < VARS {
            w[basis[r]] = t[r][TOTAL].max(0.0);
        }
    }
    Some(w)
}

// ---------------------------------------------------------------------------
// JSON / CSV wire formats
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct BoxJson {
    p: BTreeMap<String, f64>,
}

pub fn box_to_json(box_: &CorrelationBox) -> String {
    let mut p = BTreeMap::new();
    for sx in 0..2u8 {
        for sy in 0..2u8 {
            for x in 0..2u8 {
                for y in 0..2u8 {
                    p.insert(format!("{x},{y}|{sx},{sy}"), box_.prob(x, y, sx, sy));
                }
            }
        }
    }
    serde_json::to_string_pretty(&BoxJson { p }).expect("box serialization cannot fail")
}

pub fn box_from_json(s: &str) -> Result<CorrelationBox> {
    let json: BoxJson = serde_json::from_str(s)?;
    let mut p = [0.0f64; 16];
    for sx in 0..2u8 {
        for sy in 0..2u8 {
            for x in 0..2u8 {
                for y in 0..2u8 {
                    let key = format!("{x},{y}|{sx},{sy}");
                    let v = json
                        .p
                        .get(&key)
                        .ok_or_else(|| PrBoxError::InvalidBox(format!("missing key {key}")))?;
                    p[idx(x, y, sx, sy)] = *v;
                }
            }
        }
    }
    CorrelationBox::new(p)
}

/// 4x4 CSV table: rows = setting pairs, columns = outcome pairs,
/// both lexicographic.
pub fn box_to_csv(box_: &CorrelationBox) -> String {
    let mut out = String::from("XY,00,01,10,11\n");
    for sx in 0..2u8 {
        for sy in 0..2u8 {
            out.push_str(&format!("{sx}{sy}"));
            for x in 0..2u8 {
                for y in 0..2u8 {
                    out.push_str(&format!(",{:.12}", box_.prob(x, y, sx, sy)));
                }
            }
            out.push('\n');
        }
    }
    out
}

/// The four Z-basis settings used to probe the PR channel: (Z_0, Z_1) on
/// each side.
pub fn z_settings() -> ([ProcessMeasurementSetting; 2], [ProcessMeasurementSetting; 2]) {
    (
        [ProcessMeasurementSetting::z_basis(0), ProcessMeasurementSetting::z_basis(1)],
        [ProcessMeasurementSetting::z_basis(0), ProcessMeasurementSetting::z_basis(1)],
    )
}

/// Uniform box: every probability 1/4.
pub fn uniform_box() -> CorrelationBox {
    CorrelationBox::new([0.25; 16]).expect("uniform box is valid")
}
