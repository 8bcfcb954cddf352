//! Property tests for the linear-algebra layer and the channel
//! representations.

use num_complex::Complex64;
use proptest::prelude::*;

use prbox::channels::{apply, from_choi, to_choi, two_qubit_shape};
use prbox::linalg::{
    hermitian_eigen, partial_trace, tensor, ComplexMatrix, SubsystemShape,
};
use prbox::random::{random_channel, random_density, SeededRng};

fn finite_f64() -> impl Strategy<Value = f64> {
    -10.0..10.0f64
}

fn complex_matrix(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    proptest::collection::vec((finite_f64(), finite_f64()), dim * dim).prop_map(move |v| {
        ComplexMatrix::from_fn(dim, |i, j| {
            let (re, im) = v[i * dim + j];
            Complex64::new(re, im)
        })
    })
}

fn hermitian_matrix(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    complex_matrix(dim).prop_map(|m| m.add(&m.adjoint()).scale_re(0.5))
}

proptest! {
    #[test]
    fn tensor_is_associative(
        a in complex_matrix(2),
        b in complex_matrix(2),
        c in complex_matrix(3),
    ) {
        let lhs = tensor(&tensor(&a, &b), &c);
        let rhs = tensor(&a, &tensor(&b, &c));
        prop_assert!(lhs.frobenius_distance(&rhs) < 1e-12 * (1.0 + lhs.frobenius_norm()));
    }

    #[test]
    fn tensor_is_bilinear(
        a in complex_matrix(2),
        b in complex_matrix(2),
        c in complex_matrix(2),
        lam in finite_f64(),
    ) {
        let lhs = tensor(&a.add(&b.scale_re(lam)), &c);
        let rhs = tensor(&a, &c).add(&tensor(&b, &c).scale_re(lam));
        prop_assert!(lhs.frobenius_distance(&rhs) < 1e-12 * (1.0 + lhs.frobenius_norm()));
    }

    #[test]
    fn tensor_trace_factorizes(a in complex_matrix(3), b in complex_matrix(2)) {
        let lhs = tensor(&a, &b).trace();
        let rhs = a.trace() * b.trace();
        prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn partial_trace_of_tensor_is_scaled_factor(
        a in complex_matrix(2),
        b in complex_matrix(3),
    ) {
        let shape = SubsystemShape::new(vec![2, 3]).unwrap();
        let reduced = partial_trace(&tensor(&a, &b), &shape, &[0]).unwrap();
        let expect = a.scale(b.trace());
        prop_assert!(
            reduced.frobenius_distance(&expect) < 1e-12 * (1.0 + expect.frobenius_norm())
        );
    }

    #[test]
    fn partial_trace_preserves_trace(m in complex_matrix(6)) {
        let shape = SubsystemShape::new(vec![2, 3]).unwrap();
        let reduced = partial_trace(&m, &shape, &[1]).unwrap();
        prop_assert!((reduced.trace() - m.trace()).norm() < 1e-12 * (1.0 + m.trace().norm()));
    }

    #[test]
    fn hermitian_eigendecomposition_reconstructs(m in hermitian_matrix(5)) {
        let eig = hermitian_eigen(&m).unwrap();
        let back = eig.reconstruct();
        prop_assert!(back.frobenius_distance(&m) < 1e-10 * (1.0 + m.frobenius_norm()));
        // eigenvalue sum equals the trace
        let sum: f64 = eig.values.iter().sum();
        prop_assert!((sum - m.trace().re).abs() < 1e-10 * (1.0 + m.trace().re.abs()));
    }

    #[test]
    fn choi_round_trip_preserves_channel_action(seed in 0u64..1000) {
        let mut rng = SeededRng::new(seed);
        let ch = random_channel(&mut rng, 4, 2);
        let rebuilt = from_choi(&to_choi(&ch).unwrap()).unwrap();
        for _ in 0..5 {
            let rho = random_density(&mut rng, two_qubit_shape());
            let a = apply(&ch, &rho).unwrap();
            let b = apply(&rebuilt, &rho).unwrap();
            prop_assert!(a.matrix().frobenius_distance(b.matrix()) < 1e-9);
        }
    }
}
