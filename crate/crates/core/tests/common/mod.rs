//! Shared helpers for the integration suites.

use gevrey_waves::{Lattice, SpectralField};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic random real (Hermitian) band-limited field with
/// coefficients uniform in `[-scale, scale]`.
#[allow(dead_code)]
pub fn random_real_field(n: usize, seed: u64, scale: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zero(Lattice::line(n));
    for j in 0..=n as i64 {
        let re = scale * (rng.random::<f64>() * 2.0 - 1.0);
        let im = if j == 0 {
            0.0
        } else {
            scale * (rng.random::<f64>() * 2.0 - 1.0)
        };
        f.set(&[j], Complex64::new(re, im));
        f.set(&[-j], Complex64::new(re, -im));
    }
    f
}

/// Deterministic random real field on an arbitrary lattice: draw complex
/// coefficients, then symmetrize `c(j) <- (c(j) + conj(c(-j)))/2`.
#[allow(dead_code)]
pub fn random_real_field_on(lattice: &Lattice, seed: u64, scale: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zero(lattice.clone());
    for c in f.coeffs_mut() {
        *c = Complex64::new(
            scale * (rng.random::<f64>() * 2.0 - 1.0),
            scale * (rng.random::<f64>() * 2.0 - 1.0),
        );
    }
    let mut j = vec![0i64; lattice.dim()];
    let mut neg = vec![0i64; lattice.dim()];
    let src = f.clone();
    for flat in 0..lattice.num_modes() {
        lattice.mode_of(flat, &mut j);
        for (a, b) in neg.iter_mut().zip(&j) {
            *a = -b;
        }
        let mirror = lattice.flat_index(&neg).unwrap();
        f.coeffs_mut()[flat] = 0.5 * (src.coeffs()[flat] + src.coeffs()[mirror].conj());
    }
    f
}
