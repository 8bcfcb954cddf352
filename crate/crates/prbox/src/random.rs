//! Seeded sampling of random states, effects and channels for property
//! tests and the verification battery.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channels::{Channel, DensityOperator};
use crate::linalg::{hermitian_eigen, ComplexMatrix, SubsystemShape};
use crate::process_gpt::Effect;

/// Portable seeded generator; the same seed always yields the same stream.
pub struct SeededRng(ChaCha8Rng);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn inner(&mut self) -> &mut ChaCha8Rng {
        &mut self.0
    }

    fn gaussian(&mut self) -> f64 {
        // Box-Muller
        let u1: f64 = self.0.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = self.0.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    fn gaussian_complex(&mut self) -> Complex64 {
        Complex64::new(self.gaussian(), self.gaussian())
    }

    pub fn ginibre(&mut self, dim: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(dim, |_, _| self.gaussian_complex())
    }

    pub fn uniform(&mut self) -> f64 {
        self.0.gen()
    }

    pub fn bit(&mut self) -> u8 {
        u8::from(self.0.gen::<bool>())
    }

    /// Uniform point on the unit sphere via normalized Gaussian triple.
    pub fn unit_vector3(&mut self) -> [f64; 3] {
        loop {
            let v = [self.gaussian(), self.gaussian(), self.gaussian()];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 1e-12 {
                return [v[0] / n, v[1] / n, v[2] / n];
            }
        }
    }
}

/// Full-rank random density operator: G G^dag / tr(G G^dag) with Ginibre G.
pub fn random_density(rng: &mut SeededRng, shape: SubsystemShape) -> DensityOperator {
    let d = shape.total_dim();
    let g = rng.ginibre(d);
    let gg = g.mul(&g.adjoint());
    let rho = gg.scale_re(1.0 / gg.trace().re);
    DensityOperator::new(rho, shape).expect("GG^dag construction is always a valid state")
}

/// Random effect 0 <= E <= I: a Ginibre square pushed into the unit interval.
pub fn random_effect(rng: &mut SeededRng, dim: usize) -> Effect {
    let g = rng.ginibre(dim);
    let h = g.mul(&g.adjoint());
    let eig = hermitian_eigen(&h).expect("GG^dag is Hermitian");
    let top = eig.values.last().copied().unwrap_or(1.0).max(1e-12);
    let scale = rng.uniform() / top;
    Effect::new(h.scale_re(scale)).expect("scaled GG^dag lies in [0, I]")
}

/// Random CPTP channel with `n_kraus` operators: random Kraus family
/// renormalized by S^{-1/2} where S = sum K^dag K.
pub fn random_channel(rng: &mut SeededRng, dim: usize, n_kraus: usize) -> Channel {
    let raw: Vec<ComplexMatrix> = (0..n_kraus).map(|_| rng.ginibre(dim)).collect();
    let mut s = ComplexMatrix::zeros(dim);
    for k in &raw {
        s = s.add(&k.adjoint().mul(k));
    }
    let eig = hermitian_eigen(&s).expect("sum K^dag K is Hermitian");
    // S^{-1/2}; S is full rank almost surely for Ginibre Kraus operators
    let mut inv_sqrt = ComplexMatrix::zeros(dim);
    for (i, &lam) in eig.values.iter().enumerate() {
        let v = eig.vector(i);
        inv_sqrt = inv_sqrt.add(&ComplexMatrix::outer(&v, &v).scale_re(1.0 / lam.sqrt()));
    }
    let kraus: Vec<ComplexMatrix> = raw.iter().map(|k| k.mul(&inv_sqrt)).collect();
    Channel::new(kraus).expect("renormalized family is trace preserving")
}
