//! Complete elliptic integrals and the Jacobi elliptic sine, both via the
//! arithmetic-geometric mean.
//!
//! The modulus convention is `sn(z, k)` with `sn(z, 0) = sin z` and
//! `sn(z, 1) = tanh z`; the complete integral `K(k)` uses the same modulus
//! (not its square).

use crate::error::{Error, Result};

const AGM_MAX_ITER: usize = 48;

/// Elliptic modulus, validated into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    pub fn new(modulus: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&modulus) {
            return Err(Error::InvalidParameter(format!(
                "elliptic modulus must lie in [0, 1], got {modulus}"
            )));
        }
        Ok(Self(modulus))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// Complementary modulus `k' = sqrt(1 - k^2)`, formed stably.
    pub fn complement(&self) -> f64 {
        ((1.0 - self.0) * (1.0 + self.0)).sqrt()
    }
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..AGM_MAX_ITER {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        if (an - bn).abs() <= f64::EPSILON * an {
            return an;
        }
        a = an;
        b = bn;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind `K(k) = pi / (2 AGM(1, k'))`,
/// accurate to ~1e-15 relative. `k = 1` overflows (logarithmic divergence).
pub fn elliptic_k(modulus: EllipticModulus) -> Result<f64> {
    let kp = modulus.complement();
    if kp == 0.0 {
        return Err(Error::EllipticOverflow(
            "K(1) diverges logarithmically".into(),
        ));
    }
    Ok(std::f64::consts::FRAC_PI_2 / agm(1.0, kp))
}

/// Complementary integral `K'(k) = K(sqrt(1 - k^2))`; diverges at `k = 0`.
pub fn elliptic_k_prime(modulus: EllipticModulus) -> Result<f64> {
    if modulus.value() == 0.0 {
        return Err(Error::EllipticOverflow(
            "K'(0) diverges logarithmically".into(),
        ));
    }
    elliptic_k(EllipticModulus::new(modulus.complement())?)
}

/// Jacobi functions `(sn, cn, dn)` at `z` by the descending Landen/AGM
/// transformation with backward angle recurrence.
pub fn jacobi_sncndn(z: f64, modulus: EllipticModulus) -> (f64, f64, f64) {
    let k = modulus.value();
    if k == 0.0 {
        return (z.sin(), z.cos(), 1.0);
    }
    if k == 1.0 {
        let sech = 1.0 / z.cosh();
        return (z.tanh(), sech, sech);
    }

    let mut a = vec![1.0f64];
    let mut c = vec![k];
    let mut b = modulus.complement();
    let mut level = 0usize;
    while c[level].abs() > f64::EPSILON * a[level] && level < AGM_MAX_ITER {
        let an = 0.5 * (a[level] + b);
        let cn = 0.5 * (a[level] - b);
        let bn = (a[level] * b).sqrt();
        a.push(an);
        c.push(cn);
        b = bn;
        level += 1;
    }

    let mut phi = (1u64 << level) as f64 * a[level] * z;
    for i in (1..=level).rev() {
        let s = (c[i] / a[i] * phi.sin()).clamp(-1.0, 1.0);
        phi = 0.5 * (phi + s.asin());
    }
    // dn from the identity dn^2 = 1 - k^2 sn^2 (stable for k < 1)
    let sn = phi.sin();
    let cn = phi.cos();
    let dn = (1.0 - (k * sn) * (k * sn)).max(0.0).sqrt();
    (sn, cn, dn)
}

/// Jacobi elliptic sine `sn(z, k)`.
pub fn jacobi_sn(z: f64, modulus: EllipticModulus) -> f64 {
    jacobi_sncndn(z, modulus).0
}
