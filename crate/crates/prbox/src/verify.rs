//! Invariant battery behind `prbox verify-all`: each check returns a named
//! outcome so failures point at the broken identity.

use serde::Serialize;

use crate::boxes::{box_from_channel, chsh, is_no_signaling, local_membership, make_pr_box,
    uniform_box, z_settings, Strategy};
use crate::channels::{
    apply, from_choi, make_pr_channel, make_prepared_states, to_choi, two_qubit_shape, Channel,
};
use crate::linalg::{hermitian_eigenvalues, partial_trace, ComplexMatrix, SubsystemShape};
use crate::process_gpt::{evaluate, make_process_effect};
use crate::protocol::{averaged_channel, monte_carlo_box, ClassicalInput};
use crate::quantum_bounds::{seesaw_maximize, SeesawConfig, TSIRELSON_BOUND};
use crate::random::{random_channel, random_density, random_effect, SeededRng};

/// Result of one named check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, passed: bool, value: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            value,
            detail,
        }
    }
}

/// Box identity for an alleged PR channel: its Z-test box must match the
/// ideal PR table entrywise.
pub fn check_box_identity(ch: &Channel, tol: f64) -> CheckOutcome {
    let (alice, bob) = z_settings();
    match box_from_channel(ch, &alice, &bob) {
        Ok(b) => {
            let d = b.linf_distance(&make_pr_box());
            CheckOutcome::new(
                "box-identity",
                d <= tol,
                d,
                format!("L-inf distance to PR table = {d:.3e}"),
            )
        }
        Err(e) => CheckOutcome::new("box-identity", false, f64::NAN, e.to_string()),
    }
}

/// CHSH of the channel's Z-test box must be 4.
pub fn check_chsh_maximum(ch: &Channel, tol: f64) -> CheckOutcome {
    let (alice, bob) = z_settings();
    match box_from_channel(ch, &alice, &bob) {
        Ok(b) => {
            let v = chsh(&b);
            CheckOutcome::new(
                "chsh-maximum",
                (v - 4.0).abs() <= tol,
                v,
                format!("CHSH = {v:.12}"),
            )
        }
        Err(e) => CheckOutcome::new("chsh-maximum", false, f64::NAN, e.to_string()),
    }
}

/// The Z-test box must be no-signaling.
pub fn check_no_signaling(ch: &Channel, tol: f64) -> CheckOutcome {
    let (alice, bob) = z_settings();
    match box_from_channel(ch, &alice, &bob) {
        Ok(b) => {
            let (ok, dev) = is_no_signaling(&b, tol);
            CheckOutcome::new(
                "no-signaling",
                ok,
                dev,
                format!("worst marginal deviation = {dev:.3e}"),
            )
        }
        Err(e) => CheckOutcome::new("no-signaling", false, f64::NAN, e.to_string()),
    }
}

/// Local polytope: deterministic maximum 2; PR box outside, uniform inside.
pub fn check_local_bound(tol: f64) -> CheckOutcome {
    let max_det = (0..16)
        .map(|i| chsh(&Strategy::nth(i).to_box()))
        .fold(0.0f64, f64::max);
    let pr_outside = local_membership(&make_pr_box(), tol).is_none();
    let uniform_inside = local_membership(&uniform_box(), tol).is_some();
    let passed = (max_det - 2.0).abs() < 1e-15 && pr_outside && uniform_inside;
    CheckOutcome::new(
        "local-bound",
        passed,
        max_det,
        format!(
            "max deterministic CHSH = {max_det}, PR outside polytope = {pr_outside}, \
             uniform inside = {uniform_inside}"
        ),
    )
}

/// Channel equation Phi[rho] = (1-kappa) xi_cor + kappa xi_acor on seeded
/// random states.
pub fn check_channel_equation(ch: &Channel, seed: u64, tol: f64) -> CheckOutcome {
    let (cor, acor) = make_prepared_states();
    let mut rng = SeededRng::new(seed);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let rho = random_density(&mut rng, two_qubit_shape());
        let kappa = rho.diagonal(3);
        match apply(ch, &rho) {
            Ok(out) => {
                let expect = cor
                    .matrix()
                    .scale_re(1.0 - kappa)
                    .add(&acor.matrix().scale_re(kappa));
                worst = worst.max(out.matrix().frobenius_distance(&expect));
            }
            Err(e) => {
                return CheckOutcome::new("channel-equation", false, f64::NAN, e.to_string())
            }
        }
    }
    CheckOutcome::new(
        "channel-equation",
        worst <= tol,
        worst,
        format!("worst Frobenius error over 50 states = {worst:.3e}"),
    )
}

/// Exact simulation identity: averaged protocol output equals the PR channel.
pub fn check_simulation_identity(seed: u64, tol: f64) -> CheckOutcome {
    let ch = make_pr_channel();
    let mut rng = SeededRng::new(seed);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let rho = random_density(&mut rng, two_qubit_shape());
        let input = ClassicalInput::new(rho.clone()).expect("valid input");
        let avg = averaged_channel(&input);
        let direct = apply(&ch, &rho).expect("PR channel applies to any state");
        worst = worst.max(avg.matrix().frobenius_distance(direct.matrix()));
    }
    CheckOutcome::new(
        "simulation-identity",
        worst <= tol,
        worst,
        format!("worst Frobenius error over 50 states = {worst:.3e}"),
    )
}

/// Monte-Carlo protocol statistics must sit within 5 standard errors of the
/// PR table and reproduce CHSH = 4 exactly.
pub fn check_monte_carlo(n_runs: u64, seed: u64) -> CheckOutcome {
    let (mc, transcripts) = monte_carlo_box(n_runs, seed);
    if let Some(bad) = transcripts.iter().find(|t| t.check().is_err()) {
        return CheckOutcome::new(
            "monte-carlo",
            false,
            f64::NAN,
            format!("transcript invariant violated: {bad:?}"),
        );
    }
    match mc.empirical_chsh() {
        Ok(v) => {
            let sigmas = mc.max_stderr_distance_to_pr();
            let passed = (v - 4.0).abs() < 1e-12 && sigmas < 5.0;
            CheckOutcome::new(
                "monte-carlo",
                passed,
                v,
                format!("empirical CHSH = {v}, worst cell at {sigmas:.2} standard errors"),
            )
        }
        Err(e) => CheckOutcome::new("monte-carlo", false, f64::NAN, e.to_string()),
    }
}

/// Process-effect contract against the direct experiment.
pub fn check_process_effects(seed: u64, tol: f64) -> CheckOutcome {
    let mut rng = SeededRng::new(seed);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let rho = random_density(&mut rng, two_qubit_shape());
        let e = random_effect(&mut rng, 4);
        let ch = random_channel(&mut rng, 4, 3);
        let direct = e
            .matrix()
            .mul(apply(&ch, &rho).expect("dims match").matrix())
            .trace()
            .re;
        let f = make_process_effect(&rho, &e).expect("valid process effect");
        let choi = to_choi(&ch).expect("valid Choi");
        let via_choi = evaluate(&f, &choi).expect("dims match");
        worst = worst.max((direct - via_choi).abs());
    }
    CheckOutcome::new(
        "process-effects",
        worst <= tol,
        worst,
        format!("worst contract error over 100 triples = {worst:.3e}"),
    )
}

/// CPTP invariants of the PR channel's Choi operator plus Choi<->Kraus
/// round-trips on random channels.
pub fn check_cptp(seed: u64) -> CheckOutcome {
    let choi = match to_choi(&make_pr_channel()) {
        Ok(c) => c,
        Err(e) => return CheckOutcome::new("cptp", false, f64::NAN, e.to_string()),
    };
    let min_eig = hermitian_eigenvalues(choi.matrix())
        .expect("Choi is Hermitian")
        .first()
        .copied()
        .unwrap_or(f64::NAN);
    let trace_err = (choi.matrix().trace().re - 1.0).abs();
    let shape = SubsystemShape::new(vec![4, 4]).expect("static shape");
    let marginal = partial_trace(choi.matrix(), &shape, &[1]).expect("shape matches");
    let marginal_err =
        marginal.frobenius_distance(&ComplexMatrix::identity(4).scale_re(0.25));

    let mut rng = SeededRng::new(seed);
    let mut round_trip = 0.0f64;
    for _ in 0..20 {
        let ch = random_channel(&mut rng, 4, 3);
        let c = to_choi(&ch).expect("valid Choi");
        let back = to_choi(&from_choi(&c).expect("valid channel")).expect("valid Choi");
        round_trip = round_trip.max(back.matrix().frobenius_distance(c.matrix()));
    }

    let passed =
        min_eig > -1e-10 && trace_err < 1e-10 && marginal_err < 1e-10 && round_trip < 1e-9;
    CheckOutcome::new(
        "cptp",
        passed,
        round_trip,
        format!(
            "min eigenvalue = {min_eig:.3e}, trace error = {trace_err:.3e}, \
             marginal error = {marginal_err:.3e}, round-trip error = {round_trip:.3e}"
        ),
    )
}

/// Seesaw must land on the Tsirelson bound without overshooting.
pub fn check_tsirelson(cfg: &SeesawConfig) -> CheckOutcome {
    let res = seesaw_maximize(cfg);
    let passed =
        (res.value - TSIRELSON_BOUND).abs() <= 1e-6 && res.value <= TSIRELSON_BOUND + 1e-6;
    CheckOutcome::new(
        "tsirelson",
        passed,
        res.value,
        format!("seesaw maximum = {:.12} (target {TSIRELSON_BOUND:.12})", res.value),
    )
}

/// The whole battery for the canonical PR channel.
pub fn verify_all(seed: u64, tol: f64) -> Vec<CheckOutcome> {
    let ch = make_pr_channel();
    vec![
        check_cptp(seed),
        check_box_identity(&ch, 1e-12),
        check_chsh_maximum(&ch, 1e-12),
        check_no_signaling(&ch, 1e-12),
        check_local_bound(tol),
        check_channel_equation(&ch, seed, 1e-10),
        check_simulation_identity(seed, 1e-12),
        check_monte_carlo(100_000, seed),
        check_process_effects(seed, 1e-9),
        check_tsirelson(&SeesawConfig {
            seed,
            ..Default::default()
        }),
    ]
}
