//! State-based CHSH ceiling: maximize the CHSH expression over two-qubit
//! states and local +-1-valued projective measurements by alternating
//! closed-form block updates (seesaw), reproducing the 2*sqrt(2) bound.

use num_complex::Complex64;
use serde::Serialize;

use crate::boxes::CorrelationBox;
use crate::channels::{two_qubit_shape, DensityOperator};
use crate::error::{PrBoxError, Result};
use crate::linalg::{hermitian_eigen, tensor, ComplexMatrix};
use crate::random::SeededRng;

/// The quantum CHSH maximum 2*sqrt(2).
pub const TSIRELSON_BOUND: f64 = 2.0 * std::f64::consts::SQRT_2;

/// A +-1-valued qubit observable n . sigma given by its unit Bloch vector.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QubitObservable {
    pub bloch: [f64; 3],
}

impl QubitObservable {
    pub fn new(bloch: [f64; 3]) -> Result<Self> {
        let norm = (bloch[0] * bloch[0] + bloch[1] * bloch[1] + bloch[2] * bloch[2]).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(PrBoxError::InvalidShape(format!(
                "Bloch vector has norm {norm}, expected 1"
            )));
        }
        Ok(Self { bloch })
    }

    pub fn sigma_z() -> Self {
        Self { bloch: [0.0, 0.0, 1.0] }
    }

    pub fn sigma_x() -> Self {
        Self { bloch: [1.0, 0.0, 0.0] }
    }

    /// The observable matrix n_x sigma_x + n_y sigma_y + n_z sigma_z.
    pub fn matrix(&self) -> ComplexMatrix {
        let [nx, ny, nz] = self.bloch;
        let mut m = ComplexMatrix::zeros(2);
        m.set(0, 0, Complex64::new(nz, 0.0));
        m.set(1, 1, Complex64::new(-nz, 0.0));
        m.set(0, 1, Complex64::new(nx, -ny));
        m.set(1, 0, Complex64::new(nx, ny));
        m
    }

    /// Projector onto the outcome with value +1 (bit 0) or -1 (bit 1).
    pub fn outcome_projector(&self, bit: u8) -> ComplexMatrix {
        let sign = if bit == 0 { 1.0 } else { -1.0 };
        ComplexMatrix::identity(2)
            .add(&self.matrix().scale_re(sign))
            .scale_re(0.5)
    }
}

/// A full CHSH configuration: shared two-qubit state plus two observables
/// per party.
#[derive(Debug, Clone)]
pub struct ChshInstance {
    pub state: DensityOperator,
    pub alice: [QubitObservable; 2],
    pub bob: [QubitObservable; 2],
}

/// The Bell operator A(x)B + A(x)B' + A'(x)B - A'(x)B'.
pub fn bell_operator(alice: &[QubitObservable; 2], bob: &[QubitObservable; 2]) -> ComplexMatrix {
    let a = alice[0].matrix();
    let ap = alice[1].matrix();
    let b = bob[0].matrix();
    let bp = bob[1].matrix();
    tensor(&a, &b.add(&bp)).add(&tensor(&ap, &b.sub(&bp)))
}

/// Signed CHSH value tr[rho * Bell]; take the absolute value when reporting.
pub fn chsh_value(inst: &ChshInstance) -> f64 {
    let bell = bell_operator(&inst.alice, &inst.bob);
    inst.state.matrix().mul(&bell).trace().re
}

/// The Born-rule correlation box of an instance:
/// p(x,y|X,Y) = tr[rho (A_x (x) B_y)].
pub fn born_box(inst: &ChshInstance) -> Result<CorrelationBox> {
    let mut p = [0.0f64; 16];
    for sx in 0..2u8 {
        for sy in 0..2u8 {
            for x in 0..2u8 {
                for y in 0..2u8 {
                    let op = tensor(
                        &inst.alice[sx as usize].outcome_projector(x),
                        &inst.bob[sy as usize].outcome_projector(y),
                    );
                    let i = (((sx as usize * 2 + sy as usize) * 2 + x as usize) * 2) + y as usize;
                    p[i] = inst.state.matrix().mul(&op).trace().re;
                }
            }
        }
    }
    CorrelationBox::new(p)
}

/// Seesaw parameters.
#[derive(Debug, Clone, Copy)]
pub struct SeesawConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iters: 500,
            tol: 1e-10,
            seed: 1,
        }
    }
}

/// Per-restart iteration log of CHSH values.
#[derive(Debug, Clone, Serialize)]
pub struct RestartTrace {
    pub restart: usize,
    pub values: Vec<f64>,
}

/// Result of the seesaw search.
#[derive(Debug, Clone)]
pub struct SeesawResult {
    pub best: ChshInstance,
    pub value: f64,
    pub trace: Vec<RestartTrace>,
}

fn top_eigenvector_state(bell: &ComplexMatrix) -> DensityOperator {
    let eig = hermitian_eigen(bell).expect("Bell operator is Hermitian");
    let v = eig.vector(bell.dim() - 1);
    DensityOperator::new(ComplexMatrix::outer(&v, &v), two_qubit_shape())
        .expect("eigenvector projector is a valid state")
}

/// Pauli matrices in the order (x, y, z).
fn paulis() -> [ComplexMatrix; 3] {
    [
        QubitObservable::sigma_x().matrix(),
        {
            let mut m = ComplexMatrix::zeros(2);
            m.set(0, 1, Complex64::new(0.0, -1.0));
            m.set(1, 0, Complex64::new(0.0, 1.0));
            m
        },
        QubitObservable::sigma_z().matrix(),
    ]
}

/// Optimal Bloch direction for one party's observable: the normalized
/// conditional-correlation vector m_i = tr[rho (sigma_i (x) partner)]
/// (or the mirrored order for Bob).
fn best_direction(
    rho: &DensityOperator,
    partner_combo: &ComplexMatrix,
    party_is_alice: bool,
    fallback: QubitObservable,
) -> QubitObservable {
    let mut m = [0.0f64; 3];
    for (i, sigma) in paulis().iter().enumerate() {
        let op = if party_is_alice {
            tensor(sigma, partner_combo)
        } else {
            tensor(partner_combo, sigma)
        };
        m[i] = rho.matrix().mul(&op).trace().re;
    }
    let norm = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
    if norm < 1e-14 {
        return fallback;
    }
    QubitObservable {
        bloch: [m[0] / norm, m[1] / norm, m[2] / norm],
    }
}

/// Run one seesaw ascent from the given starting measurements.
fn seesaw_run(
    mut alice: [QubitObservable; 2],
    mut bob: [QubitObservable; 2],
    cfg: &SeesawConfig,
) -> (ChshInstance, Vec<f64>) {
    let mut state = top_eigenvector_state(&bell_operator(&alice, &bob));
    let mut values = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for _ in 0..cfg.max_iters {
        // Alice's block: optimal directions given state and Bob
        let b_plus = bob[0].matrix().add(&bob[1].matrix());
        let b_minus = bob[0].matrix().sub(&bob[1].matrix());
        alice = [
            best_direction(&state, &b_plus, true, alice[0]),
            best_direction(&state, &b_minus, true, alice[1]),
        ];
        // Bob's block
        let a_plus = alice[0].matrix().add(&alice[1].matrix());
        let a_minus = alice[0].matrix().sub(&alice[1].matrix());
        bob = [
            best_direction(&state, &a_plus, false, bob[0]),
            best_direction(&state, &a_minus, false, bob[1]),
        ];
        // state block: top eigenvector of the Bell operator
        state = top_eigenvector_state(&bell_operator(&alice, &bob));

        let value = chsh_value(&ChshInstance {
            state: state.clone(),
            alice,
            bob,
        });
        values.push(value);
        if value - last < cfg.tol {
            break;
        }
        last = value;
    }
    (ChshInstance { state, alice, bob }, values)
}

fn random_observable(rng: &mut SeededRng) -> QubitObservable {
    QubitObservable {
        bloch: rng.unit_vector3(),
    }
}

/// Maximize CHSH by seesaw with random restarts; returns the best instance,
/// its value and the per-restart iteration logs. Deterministic given the seed.
pub fn seesaw_maximize(cfg: &SeesawConfig) -> SeesawResult {
    let mut best: Option<(ChshInstance, f64)> = None;
    let mut trace = Vec::with_capacity(cfg.restarts);
    for restart in 0..cfg.restarts {
        let mut rng = SeededRng::new(
            cfg.seed.wrapping_add((restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        );
        let alice = [random_observable(&mut rng), random_observable(&mut rng)];
        let bob = [random_observable(&mut rng), random_observable(&mut rng)];
        let (inst, values) = seesaw_run(alice, bob, cfg);
        let value = values.last().copied().unwrap_or(f64::NEG_INFINITY);
        trace.push(RestartTrace { restart, values });
        if best.as_ref().map_or(true, |(_, v)| value > *v) {
            best = Some((inst, value));
        }
    }
    let (best, value) = best.expect("at least one restart");
    SeesawResult { best, value, trace }
}

/// Seesaw started from the canonical Tsirelson-achieving angles,
/// single run.
pub fn seesaw_from_canonical(cfg: &SeesawConfig) -> SeesawResult {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let alice = [QubitObservable::sigma_z(), QubitObservable::sigma_x()];
    let bob = [
        QubitObservable { bloch: [s, 0.0, s] },
        QubitObservable { bloch: [-s, 0.0, s] },
    ];
    let (inst, values) = seesaw_run(alice, bob, cfg);
    let value = values.last().copied().unwrap_or(f64::NEG_INFINITY);
    SeesawResult {
        best: inst,
        value,
        trace: vec![RestartTrace { restart: 0, values }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes;
    use crate::random::random_density;

    fn canonical_instance() -> ChshInstance {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // |phi+> = (|00> + |11>)/sqrt(2)
        let amp = [
            Complex64::new(s, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(s, 0.0),
        ];
        ChshInstance {
            state: DensityOperator::pure(&amp, two_qubit_shape()).unwrap(),
            alice: [QubitObservable::sigma_z(), QubitObservable::sigma_x()],
            bob: [
                QubitObservable { bloch: [s, 0.0, s] },
                QubitObservable { bloch: [-s, 0.0, s] },
            ],
        }
    }

    #[test]
    fn canonical_angles_reach_tsirelson() {
        // oracle: each correlator is +-1/sqrt(2) in closed form
        let v = chsh_value(&canonical_instance());
        assert!((v - TSIRELSON_BOUND).abs() < 1e-12);
    }

    #[test]
    fn product_state_value() {
        // correlators (1, 0, 0, 0) for |00> with (sz, sx) on both sides
        let inst = ChshInstance {
            state: DensityOperator::basis_state(4, 0, two_qubit_shape()).unwrap(),
            alice: [QubitObservable::sigma_z(), QubitObservable::sigma_x()],
            bob: [QubitObservable::sigma_z(), QubitObservable::sigma_x()],
        };
        assert!((chsh_value(&inst) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_state_value_is_zero() {
        let inst = ChshInstance {
            state: DensityOperator::maximally_mixed(two_qubit_shape()),
            alice: [QubitObservable::sigma_z(), QubitObservable::sigma_x()],
            bob: [QubitObservable::sigma_z(), QubitObservable::sigma_x()],
        };
        assert!(chsh_value(&inst).abs() < 1e-12);
    }

    #[test]
    fn seesaw_defaults_reach_tsirelson() {
        let res = seesaw_maximize(&SeesawConfig::default());
        assert!((res.value - TSIRELSON_BOUND).abs() < 1e-6);
        assert!(res.value <= TSIRELSON_BOUND + 1e-6);
    }

    #[test]
    fn seesaw_from_canonical_is_a_fixed_point() {
        let cfg = SeesawConfig {
            restarts: 1,
            ..Default::default()
        };
        let res = seesaw_from_canonical(&cfg);
        assert!((res.value - TSIRELSON_BOUND).abs() < 1e-9);
    }

    #[test]
    fn iteration_logs_are_monotone() {
        let res = seesaw_maximize(&SeesawConfig {
            restarts: 5,
            ..Default::default()
        });
        for t in &res.trace {
            for w in t.values.windows(2) {
                assert!(w[1] >= w[0] - 1e-12);
            }
        }
    }

    #[test]
    fn chsh_value_matches_born_box() {
        let mut rng = SeededRng::new(8);
        for _ in 0..10 {
            let inst = ChshInstance {
                state: random_density(&mut rng, two_qubit_shape()),
                alice: [random_observable(&mut rng), random_observable(&mut rng)],
                bob: [random_observable(&mut rng), random_observable(&mut rng)],
            };
            let via_box = boxes::chsh(&born_box(&inst).unwrap());
            assert!((chsh_value(&inst).abs() - via_box).abs() < 1e-12);
        }
    }

    #[test]
    fn non_unit_bloch_rejected() {
        assert!(QubitObservable::new([1.0, 1.0, 0.0]).is_err());
    }
}
