//! Classical two-party simulation of the PR channel: Alice and Bob share a
//! uniform key bit, measure their qubits in the computational basis, Alice
//! sends her outcome (one bit), and the pair outputs |k> and |k xor ab>.
//!
//! Alice's send strictly precedes Bob's output; the message channel records
//! the count and an optional injected latency rather than sleeping.

use num_complex::Complex64;
use serde::Serialize;

use crate::boxes::{chsh, make_pr_box, CorrelationBox};
use crate::channels::{two_qubit_shape, DensityOperator};
use crate::error::{PrBoxError, Result};
use crate::linalg::ComplexMatrix;
use crate::random::SeededRng;

/// One-bit pre-shared key, drawn uniformly per run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SharedKey {
    pub k: u8,
}

/// Which side of the protocol a state machine plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Alice,
    Bob,
}

/// Event-driven party state machine.
#[derive(Debug, Clone)]
pub struct PartyState {
    pub role: Role,
    pub key: SharedKey,
    pub measured: Option<u8>,
    pub received: Option<u8>,
    pub output: Option<u8>,
}

impl PartyState {
    pub fn new(role: Role, key: SharedKey) -> Self {
        Self {
            role,
            key,
            measured: None,
            received: None,
            output: None,
        }
    }

    /// Record the local sigma_z outcome. Alice outputs |k> immediately;
    /// Bob must wait for Alice's message.
    pub fn on_measurement(&mut self, outcome: u8) {
        self.measured = Some(outcome);
        if self.role == Role::Alice {
            self.output = Some(self.key.k);
        } else {
            self.try_finish();
        }
    }

    /// Deliver the one-bit message (Bob only).
    pub fn on_message(&mut self, bit: u8) {
        debug_assert_eq!(self.role, Role::Bob);
        self.received = Some(bit);
        self.try_finish();
    }

    fn try_finish(&mut self) {
        if let (Role::Bob, Some(b), Some(a)) = (self.role, self.measured, self.received) {
            self.output = Some(self.key.k ^ (a & b));
        }
    }
}

/// In-process one-way message channel; latency is recorded, never slept on.
#[derive(Debug, Default)]
pub struct MessageChannel {
    pub messages_sent: u32,
    pub latency: Option<f64>,
}

impl MessageChannel {
    pub fn send(&mut self, bit: u8, receiver: &mut PartyState) {
        self.messages_sent += 1;
        receiver.on_message(bit);
    }
}

/// Record of one protocol run.
#[derive(Debug, Clone, Serialize)]
pub struct ProtocolTranscript {
    pub seed: u64,
    pub key: u8,
    pub a: u8,
    pub b: u8,
    pub msg: u8,
    pub alice_out: u8,
    pub bob_out: u8,
    #[serde(skip)]
    pub messages_sent: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub latency: Option<f64>,
}

impl ProtocolTranscript {
    /// The protocol's defining invariants.
    pub fn check(&self) -> Result<()> {
        if self.alice_out != self.key {
            return Err(PrBoxError::InvalidBox("alice_out != k".into()));
        }
        if self.bob_out != self.key ^ (self.a & self.b) {
            return Err(PrBoxError::InvalidBox("bob_out != k xor ab".into()));
        }
        if self.messages_sent != 1 {
            return Err(PrBoxError::InvalidBox("messages_sent != 1".into()));
        }
        Ok(())
    }
}

/// Two-qubit input whose computational-basis diagonal drives the statistics.
#[derive(Debug, Clone)]
pub struct ClassicalInput {
    pub rho: DensityOperator,
}

impl ClassicalInput {
    pub fn new(rho: DensityOperator) -> Result<Self> {
        if rho.dim() != 4 {
            return Err(PrBoxError::DimensionMismatch {
                expected: 4,
                got: rho.dim(),
            });
        }
        Ok(Self { rho })
    }

    /// The basis input |j> (x) |k>.
    pub fn basis(j: u8, k: u8) -> Self {
        let rho = DensityOperator::basis_state(4, (j * 2 + k) as usize, two_qubit_shape())
            .expect("basis state is valid");
        Self { rho }
    }

    /// Sample (a,b) jointly from the diagonal; inputs may be classically
    /// correlated, so the marginals are not sampled independently.
    fn sample_outcomes(&self, rng: &mut SeededRng) -> (u8, u8) {
        let u = rng.uniform();
        let mut acc = 0.0;
        for i in 0..4usize {
            acc += self.rho.diagonal(i).max(0.0);
            if u < acc {
                return ((i / 2) as u8, (i % 2) as u8);
            }
        }
        (1, 1)
    }
}

fn run_with_rng(input: &ClassicalInput, rng: &mut SeededRng, seed: u64) -> ProtocolTranscript {
    let (a, b) = input.sample_outcomes(rng);
    let key = SharedKey { k: rng.bit() };

    let mut alice = PartyState::new(Role::Alice, key);
    let mut bob = PartyState::new(Role::Bob, key);
    let mut channel = MessageChannel::default();

    alice.on_measurement(a);
    bob.on_measurement(b);
    // Alice's send must precede Bob's output
    debug_assert!(bob.output.is_none());
    channel.send(a, &mut bob);

    ProtocolTranscript {
        seed,
        key: key.k,
        a,
        b,
        msg: a,
        alice_out: alice.output.expect("alice outputs after measuring"),
        bob_out: bob.output.expect("bob outputs after receiving"),
        messages_sent: channel.messages_sent,
        latency: channel.latency,
    }
}

/// One protocol run, reproducible from the seed.
pub fn run_once(input: &ClassicalInput, seed: u64) -> ProtocolTranscript {
    let mut rng = SeededRng::new(seed);
    run_with_rng(input, &mut rng, seed)
}

/// Exact expectation of the protocol output over outcomes and keys:
/// sum_{a,b} <ab|rho|ab> sum_k (1/2) |k><k| (x) |k xor ab><k xor ab|.
/// Equals the PR channel applied to the input.
pub fn averaged_channel(input: &ClassicalInput) -> DensityOperator {
    let mut out = ComplexMatrix::zeros(4);
    for a in 0..2usize {
        for b in 0..2usize {
            let w = input.rho.diagonal(a * 2 + b);
            for k in 0..2usize {
                let out_idx = k * 2 + (k ^ (a & b));
                let cur = out.get(out_idx, out_idx);
                out.set(out_idx, out_idx, cur + Complex64::new(0.5 * w, 0.0));
            }
        }
    }
    DensityOperator::new(out, two_qubit_shape()).expect("averaged output is a valid state")
}

/// Empirical statistics of one box cell.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CellStats {
    pub p_hat: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// Tallied Monte-Carlo CHSH experiment; cells with zero trials in their
/// setting are absent rather than zero.
#[derive(Debug, Clone)]
pub struct MonteCarloBox {
    // cell index ((X*2+Y)*2+x)*2+y, None when the setting was never drawn
    cells: [Option<CellStats>; 16],
    setting_trials: [u64; 4],
}

impl MonteCarloBox {
    pub fn cell(&self, x: u8, y: u8, sx: u8, sy: u8) -> Option<CellStats> {
        self.cells[(((sx as usize * 2 + sy as usize) * 2 + x as usize) * 2) + y as usize]
    }

    pub fn setting_trials(&self, sx: u8, sy: u8) -> u64 {
        self.setting_trials[sx as usize * 2 + sy as usize]
    }

    /// The empirical box; fails when some setting was never sampled.
    pub fn to_box(&self) -> Result<CorrelationBox> {
        let mut p = [0.0f64; 16];
        for (i, c) in self.cells.iter().enumerate() {
            p[i] = c
                .ok_or_else(|| PrBoxError::InvalidBox("unobserved setting cell".into()))?
                .p_hat;
        }
        CorrelationBox::new(p)
    }

    /// Empirical CHSH when every setting has been observed.
    pub fn empirical_chsh(&self) -> Result<f64> {
        Ok(chsh(&self.to_box()?))
    }

    /// Worst |p_hat - p_PR| over observed cells, in units of the cell's
    /// standard error (cells with zero stderr must match exactly).
    pub fn max_stderr_distance_to_pr(&self) -> f64 {
        let pr = make_pr_box();
        let mut worst = 0.0f64;
        for sx in 0..2u8 {
            for sy in 0..2u8 {
                for x in 0..2u8 {
                    for y in 0..2u8 {
                        if let Some(c) = self.cell(x, y, sx, sy) {
                            let diff = (c.p_hat - pr.prob(x, y, sx, sy)).abs();
                            if c.stderr > 0.0 {
                                worst = worst.max(diff / c.stderr);
                            } else if diff > 0.0 {
                                worst = f64::INFINITY;
                            }
                        }
                    }
                }
            }
        }
        worst
    }
}

/// Simulate the full CHSH experiment: per trial draw settings (X,Y)
/// uniformly, run the protocol on the basis input |X> (x) |Y>, read the
/// output bits, and tally empirical probabilities with binomial standard
/// errors. Returns the tally and all transcripts.
pub fn monte_carlo_box(n_runs: u64, seed: u64) -> (MonteCarloBox, Vec<ProtocolTranscript>) {
    assert!(n_runs >= 1);
    let mut rng = SeededRng::new(seed);
    let mut counts = [[0u64; 4]; 4]; // [setting][outcome]
    let mut transcripts = Vec::with_capacity(n_runs.min(1_000_000) as usize);
    for _ in 0..n_runs {
        let sx = rng.bit();
        let sy = rng.bit();
        let input = ClassicalInput::basis(sx, sy);
        let t = run_with_rng(&input, &mut rng, seed);
        counts[(sx * 2 + sy) as usize][(t.alice_out * 2 + t.bob_out) as usize] += 1;
        transcripts.push(t);
    }

    let mut cells = [None; 16];
    let mut setting_trials = [0u64; 4];
    for s in 0..4usize {
        let n: u64 = counts[s].iter().sum();
        setting_trials[s] = n;
        if n == 0 {
            continue;
        }
        for o in 0..4usize {
            let p_hat = counts[s][o] as f64 / n as f64;
            let stderr = (p_hat * (1.0 - p_hat) / n as f64).sqrt();
            cells[s * 4 + o] = Some(CellStats {
                p_hat,
                stderr,
                trials: n,
            });
        }
    }
    (
        MonteCarloBox {
            cells,
            setting_trials,
        },
        transcripts,
    )
}

/// Transcripts as JSON-lines, one object per run.
pub fn transcripts_to_jsonl(transcripts: &[ProtocolTranscript]) -> String {
    transcripts
        .iter()
        .map(|t| serde_json::to_string(t).expect("transcript serialization cannot fail"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{apply, make_pr_channel};
    use crate::random::random_density;

    #[test]
    fn anticorrelated_on_input_11() {
        let input = ClassicalInput::basis(1, 1);
        for seed in 0..20 {
            let t = run_once(&input, seed);
            t.check().unwrap();
            assert_eq!(t.a, 1);
            assert_eq!(t.b, 1);
            assert_eq!(t.alice_out, t.key);
            assert_eq!(t.bob_out, t.key ^ 1);
        }
    }

    #[test]
    fn correlated_on_input_00() {
        let input = ClassicalInput::basis(0, 0);
        for seed in 0..20 {
            let t = run_once(&input, seed);
            t.check().unwrap();
            assert_eq!(t.alice_out, t.bob_out);
        }
    }

    #[test]
    fn exactly_one_message_per_run() {
        let mut rng = SeededRng::new(55);
        let rho = random_density(&mut rng, two_qubit_shape());
        let input = ClassicalInput::new(rho).unwrap();
        for seed in 0..10 {
            assert_eq!(run_once(&input, seed).messages_sent, 1);
        }
    }

    #[test]
    fn runs_are_reproducible() {
        let input = ClassicalInput::basis(0, 1);
        let a = run_once(&input, 777);
        let b = run_once(&input, 777);
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn averaged_channel_matches_pr_channel() {
        let ch = make_pr_channel();
        let mut rng = SeededRng::new(12);
        for _ in 0..50 {
            let rho = random_density(&mut rng, two_qubit_shape());
            let input = ClassicalInput::new(rho.clone()).unwrap();
            let avg = averaged_channel(&input);
            let direct = apply(&ch, &rho).unwrap();
            assert!(avg.matrix().frobenius_distance(direct.matrix()) < 1e-12);
        }
    }

    #[test]
    fn averaged_channel_named_cases() {
        let (cor, acor) = crate::channels::make_prepared_states();

        let avg = averaged_channel(&ClassicalInput::basis(1, 1));
        assert!(avg.matrix().frobenius_distance(acor.matrix()) < 1e-15);

        let avg = averaged_channel(&ClassicalInput::basis(0, 1));
        assert!(avg.matrix().frobenius_distance(cor.matrix()) < 1e-15);

        let mixed = ClassicalInput::new(DensityOperator::maximally_mixed(two_qubit_shape()))
            .unwrap();
        let avg = averaged_channel(&mixed);
        let expect = cor.matrix().scale_re(0.75).add(&acor.matrix().scale_re(0.25));
        assert!(avg.matrix().frobenius_distance(&expect) < 1e-15);
    }

    #[test]
    fn monte_carlo_converges_to_pr_box() {
        let (mc, transcripts) = monte_carlo_box(100_000, 3);
        for t in &transcripts {
            t.check().unwrap();
        }
        // deterministic per trial: outputs perfectly (anti)correlated
        assert!((mc.empirical_chsh().unwrap() - 4.0).abs() < 1e-15);
        assert!(mc.max_stderr_distance_to_pr() < 5.0);
    }

    #[test]
    fn single_run_leaves_unobserved_cells_absent() {
        let (mc, _) = monte_carlo_box(1, 9);
        let observed: usize = (0..4)
            .filter(|&s| mc.setting_trials((s / 2) as u8, (s % 2) as u8) > 0)
            .count();
        assert_eq!(observed, 1);
        assert!(mc.to_box().is_err());
    }

    #[test]
    fn bob_waits_for_the_message() {
        let key = SharedKey { k: 0 };
        let mut bob = PartyState::new(Role::Bob, key);
        bob.on_measurement(1);
        assert!(bob.output.is_none());
        bob.on_message(1);
        assert_eq!(bob.output, Some(1));
    }
}
