//! Acceptance suite: one test per headline claim, each printing a pass/fail
//! line with the measured value. Run with `cargo test --test acceptance`
//! (add `-- --nocapture` to see the lines for passing criteria too).

use std::time::Instant;

use prbox::boxes::{
    box_from_channel, chsh, is_no_signaling, local_membership, make_pr_box, uniform_box,
    z_settings, Strategy,
};
use prbox::channels::{
    apply, from_choi, make_pr_channel, make_prepared_states, to_choi, two_qubit_shape,
};
use prbox::linalg::{hermitian_eigenvalues, partial_trace, ComplexMatrix, SubsystemShape};
use prbox::process_gpt::{evaluate, make_process_effect};
use prbox::protocol::{averaged_channel, monte_carlo_box, ClassicalInput};
use prbox::quantum_bounds::{seesaw_maximize, SeesawConfig, TSIRELSON_BOUND};
use prbox::random::{random_channel, random_density, random_effect, SeededRng};

fn report(criterion: &str, passed: bool, detail: String) {
    println!(
        "[{}] {criterion}: {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "{criterion}: {detail}");
}

#[test]
fn criterion_01_box_identity() {
    let start = Instant::now();
    let (alice, bob) = z_settings();
    let b = box_from_channel(&make_pr_channel(), &alice, &bob).unwrap();
    let dist = b.linf_distance(&make_pr_box());
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "criterion 1 (box identity)",
        dist <= 1e-12 && elapsed < 1.0,
        format!("L-inf distance to PR table = {dist:.3e}, runtime = {elapsed:.3}s"),
    );
}

#[test]
fn criterion_02_chsh_maximum() {
    let (alice, bob) = z_settings();
    let b = box_from_channel(&make_pr_channel(), &alice, &bob).unwrap();
    let v = chsh(&b);
    report(
        "criterion 2 (CHSH maximum)",
        (v - 4.0).abs() <= 1e-12,
        format!("CHSH = {v:.15}"),
    );
}

#[test]
fn criterion_03_no_signaling() {
    let (alice, bob) = z_settings();
    let b = box_from_channel(&make_pr_channel(), &alice, &bob).unwrap();
    let (_, dev) = is_no_signaling(&b, 1e-12);
    report(
        "criterion 3 (no-signaling)",
        dev <= 1e-12,
        format!("worst marginal deviation = {dev:.3e}"),
    );
}

#[test]
fn criterion_04_local_bound() {
    let start = Instant::now();
    let max_det = (0..16)
        .map(|i| chsh(&Strategy::nth(i).to_box()))
        .fold(0.0f64, f64::max);
    let pr_outside = local_membership(&make_pr_box(), 1e-9).is_none();
    let uniform_inside = local_membership(&uniform_box(), 1e-9).is_some();
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "criterion 4 (local bound)",
        max_det == 2.0 && pr_outside && uniform_inside && elapsed < 1.0,
        format!(
            "max deterministic CHSH = {max_det}, PR local = {}, uniform local = \
             {uniform_inside}, runtime = {elapsed:.3}s",
            !pr_outside
        ),
    );
}

#[test]
fn criterion_05_tsirelson_reproduction() {
    let start = Instant::now();
    let res = seesaw_maximize(&SeesawConfig {
        restarts: 20,
        seed: 1,
        ..Default::default()
    });
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "criterion 5 (Tsirelson reproduction)",
        (res.value - TSIRELSON_BOUND).abs() <= 1e-6
            && res.value <= TSIRELSON_BOUND + 1e-6
            && elapsed < 10.0,
        format!(
            "seesaw value = {:.12} (target {TSIRELSON_BOUND:.12}), runtime = {elapsed:.3}s",
            res.value
        ),
    );
}

#[test]
fn criterion_06_channel_equation() {
    let (cor, acor) = make_prepared_states();
    let ch = make_pr_channel();
    let mut rng = SeededRng::new(1);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let rho = random_density(&mut rng, two_qubit_shape());
        let kappa = rho.diagonal(3);
        let out = apply(&ch, &rho).unwrap();
        let expect = cor
            .matrix()
            .scale_re(1.0 - kappa)
            .add(&acor.matrix().scale_re(kappa));
        worst = worst.max(out.matrix().frobenius_distance(&expect));
    }
    report(
        "criterion 6 (channel equation)",
        worst < 1e-10,
        format!("worst Frobenius error over 50 seeded states = {worst:.3e}"),
    );
}

#[test]
fn criterion_07_simulation_identity() {
    let ch = make_pr_channel();
    let mut rng = SeededRng::new(1);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let rho = random_density(&mut rng, two_qubit_shape());
        let avg = averaged_channel(&ClassicalInput::new(rho.clone()).unwrap());
        let direct = apply(&ch, &rho).unwrap();
        worst = worst.max(avg.matrix().frobenius_distance(direct.matrix()));
    }
    // transcript invariants on sampled runs
    let (_, transcripts) = monte_carlo_box(1000, 1);
    let transcripts_ok = transcripts.iter().all(|t| t.check().is_ok());
    report(
        "criterion 7 (simulation identity)",
        worst < 1e-12 && transcripts_ok,
        format!(
            "worst Frobenius error over 50 seeded states = {worst:.3e}, \
             transcript invariants hold = {transcripts_ok}"
        ),
    );
}

#[test]
fn criterion_08_monte_carlo_convergence() {
    let (mc, transcripts) = monte_carlo_box(100_000, 1);
    let transcripts_ok = transcripts.iter().all(|t| t.check().is_ok());
    let chsh_emp = mc.empirical_chsh().unwrap();
    let sigmas = mc.max_stderr_distance_to_pr();
    report(
        "criterion 8 (Monte-Carlo convergence)",
        transcripts_ok && (chsh_emp - 4.0).abs() < 1e-12 && sigmas < 5.0,
        format!(
            "empirical CHSH = {chsh_emp}, worst cell at {sigmas:.2} standard errors \
             over 100000 runs"
        ),
    );
}

#[test]
fn criterion_09_process_effect_contract() {
    let mut rng = SeededRng::new(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let rho = random_density(&mut rng, two_qubit_shape());
        let e = random_effect(&mut rng, 4);
        let ch = random_channel(&mut rng, 4, 3);
        let direct = e.matrix().mul(apply(&ch, &rho).unwrap().matrix()).trace().re;
        let f = make_process_effect(&rho, &e).unwrap();
        let via_choi = evaluate(&f, &to_choi(&ch).unwrap()).unwrap();
        worst = worst.max((direct - via_choi).abs());
    }
    report(
        "criterion 9 (process-effect contract)",
        worst < 1e-9,
        format!("worst contract error over 100 seeded triples = {worst:.3e}"),
    );
}

#[test]
fn criterion_10_cptp_invariants() {
    let choi = to_choi(&make_pr_channel()).unwrap();
    let min_eig = hermitian_eigenvalues(choi.matrix()).unwrap()[0];
    let trace_err = (choi.matrix().trace().re - 1.0).abs();
    let shape = SubsystemShape::new(vec![4, 4]).unwrap();
    let marginal = partial_trace(choi.matrix(), &shape, &[1]).unwrap();
    let marginal_err = marginal.frobenius_distance(&ComplexMatrix::identity(4).scale_re(0.25));

    let mut rng = SeededRng::new(1);
    let mut round_trip = 0.0f64;
    for _ in 0..20 {
        let c = to_choi(&random_channel(&mut rng, 4, 3)).unwrap();
        let back = to_choi(&from_choi(&c).unwrap()).unwrap();
        round_trip = round_trip.max(back.matrix().frobenius_distance(c.matrix()));
    }
    report(
        "criterion 10 (CPTP invariants)",
        min_eig > -1e-10 && trace_err < 1e-10 && marginal_err < 1e-10 && round_trip < 1e-9,
        format!(
            "min eigenvalue = {min_eig:.3e}, trace error = {trace_err:.3e}, marginal \
             error = {marginal_err:.3e}, round-trip error over 20 channels = {round_trip:.3e}"
        ),
    );
}
