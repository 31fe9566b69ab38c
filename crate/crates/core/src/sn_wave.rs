//! Exact elliptic traveling wave of `u_tt - nu u_xx + lambda u - u^3 = 0`:
//!
//! `u(x, t) = A sn(kappa (x - c t), m)` with
//! `A = sqrt(2 m^2 lambda / (1+m^2))`, `kappa = sqrt(lambda / ((1+m^2)(c^2 - nu)))`,
//! valid for `c^2 > nu > 0`. Fitting the torus forces `4 K(m) L = 2 pi kappa`
//! for an integer winding `L`, which pins `lambda`; the nearest pole of `sn`
//! fixes the analyticity radius `rho = K'(m) / kappa`.

use num_complex::Complex64;

use crate::elliptic::{elliptic_k, elliptic_k_prime, jacobi_sn, EllipticModulus};
use crate::error::{Error, Result};
use crate::field::{GridField, SpectralField};
use crate::lattice::Lattice;
use crate::nonlinearity::{NonlinearitySpec, Sign};
use crate::solver::{Dispersion, WaveState};
use crate::transform::{from_grid, good_fft_size};

/// Relative slack allowed between a requested `lambda` and the admissible
/// torus-periodic value.
const LAMBDA_FIT_TOL: f64 = 1e-9;

/// The admissible mass coefficient for which the wave closes up on the
/// torus with winding `L`: `lambda = kappa^2 (1+m^2)(c^2 - nu)` with
/// `kappa = 2 K(m) L / pi`.
pub fn admissible_lambda(
    modulus: EllipticModulus,
    c: f64,
    nu: f64,
    winding: u32,
) -> Result<f64> {
    check_speed(c, nu)?;
    if winding < 1 {
        return Err(Error::InvalidParameter("winding must be >= 1".into()));
    }
    let k = elliptic_k(modulus)?;
    let kappa = 2.0 * k * winding as f64 / std::f64::consts::PI;
    let m = modulus.value();
    Ok(kappa * kappa * (1.0 + m * m) * (c * c - nu))
}

fn check_speed(c: f64, nu: f64) -> Result<()> {
    if !(nu > 0.0) || !(c * c > nu) {
        return Err(Error::InvalidParameter(format!(
            "traveling wave needs c^2 > nu > 0, got c = {c}, nu = {nu}"
        )));
    }
    Ok(())
}

/// The exact traveling wave with its derived parameters.
#[derive(Debug, Clone)]
pub struct SnWave {
    pub modulus: EllipticModulus,
    pub c: f64,
    pub nu: f64,
    pub lambda: f64,
    pub winding: u32,
    /// Profile wavenumber `kappa`.
    pub kappa: f64,
    /// Amplitude `A = sqrt(2 m^2 lambda / (1+m^2))`.
    pub amplitude: f64,
    /// Pole distance `K'(m)/kappa`; infinite at modulus zero.
    pub rho_exact: f64,
}

/// Builds the traveling wave, verifying that the requested `lambda` fits the
/// torus; on mismatch the error carries the nearest admissible value.
pub fn exact_sn_wave(
    modulus: EllipticModulus,
    c: f64,
    nu: f64,
    lambda: f64,
    winding: u32,
) -> Result<SnWave> {
    let admissible = admissible_lambda(modulus, c, nu, winding)?;
    if (lambda - admissible).abs() > LAMBDA_FIT_TOL * admissible.max(1.0) {
        return Err(Error::PeriodicityFit {
            requested: lambda,
            admissible,
        });
    }
    let m = modulus.value();
    let k = elliptic_k(modulus)?;
    let kappa = 2.0 * k * winding as f64 / std::f64::consts::PI;
    let amplitude = (2.0 * m * m * admissible / (1.0 + m * m)).sqrt();
    let rho_exact = if m == 0.0 {
        f64::INFINITY
    } else {
        elliptic_k_prime(modulus)? / kappa
    };
    Ok(SnWave {
        modulus,
        c,
        nu,
        lambda: admissible,
        winding,
        kappa,
        amplitude,
        rho_exact,
    })
}

impl SnWave {
    /// Pointwise value `A sn(kappa (x - c t), m)`.
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.amplitude * jacobi_sn(self.kappa * (x - self.c * t), self.modulus)
    }

    /// One temporal period: the profile translates by one spatial period
    /// `2 pi / L` at speed `c`.
    pub fn temporal_period(&self) -> f64 {
        std::f64::consts::TAU / (self.winding as f64 * self.c)
    }

    /// Samples the exact solution at time `t` on a uniform grid.
    pub fn grid_at(&self, lattice: &Lattice, min_points: usize, t: f64) -> Result<GridField> {
        if lattice.dim() != 1 {
            return Err(Error::InvalidParameter(
                "the traveling wave lives on the one-dimensional torus".into(),
            ));
        }
        let m = good_fft_size(min_points.max(lattice.modes_per_axis()));
        let values = (0..m)
            .map(|l| self.eval(std::f64::consts::TAU * l as f64 / m as f64, t))
            .collect();
        GridField::new(lattice.clone(), m, values)
    }

    /// Spectral snapshot of the exact solution at time `t`.
    pub fn spectral_at(&self, lattice: &Lattice, t: f64) -> Result<SpectralField> {
        let grid = self.grid_at(lattice, 2 * lattice.modes_per_axis(), t)?;
        from_grid(&grid, lattice)
    }

    /// Traveling-wave initial data `(u, u_t = -c u_x)`; the time derivative
    /// is formed spectrally from the sampled profile.
    pub fn initial_state(&self, lattice: &Lattice) -> Result<WaveState> {
        let u = self.spectral_at(lattice, 0.0)?;
        let mut v = u.derivative(0);
        for c in v.coeffs_mut() {
            *c *= Complex64::new(-self.c, 0.0);
        }
        WaveState::new(u, v, 0.0)
    }

    /// The equation this wave solves, as solver configuration pieces.
    pub fn dispersion(&self) -> Dispersion {
        Dispersion::KleinGordon {
            nu: self.nu,
            lambda: self.lambda,
        }
    }

    pub fn nonlinearity(&self) -> NonlinearitySpec {
        NonlinearitySpec::Monomial {
            sign: Sign::Minus,
            k: 3,
        }
    }

    /// Max residual of the profile equation
    /// `(c^2 - nu) U'' + lambda U - U^3` with spectral differentiation on a
    /// grid resolving `lattice`; zero for the exact solution up to spectral
    /// and round-off error.
    pub fn profile_residual(&self, lattice: &Lattice) -> Result<f64> {
        let u = self.spectral_at(lattice, 0.0)?;
        let uxx = u.derivative(0).derivative(0);
        let grid_u = crate::transform::to_grid(&u, 2.0)?;
        let grid_uxx = crate::transform::to_grid(&uxx, 2.0)?;
        let mut max_res = 0.0f64;
        for (&a, &b) in grid_u.values().iter().zip(grid_uxx.values()) {
            let res = (self.c * self.c - self.nu) * b + self.lambda * a - a * a * a;
            max_res = max_res.max(res.abs());
        }
        Ok(max_res)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modulus(v: f64) -> EllipticModulus {
        EllipticModulus::new(v).unwrap()
    }

    #[test]
    fn lambda_fit_round_trip() {
        let lam = admissible_lambda(modulus(0.9), 1.0, 0.5, 1).unwrap();
        let wave = exact_sn_wave(modulus(0.9), 1.0, 0.5, lam, 1).unwrap();
        assert!((wave.lambda - lam).abs() < 1e-14 * lam);
        // requesting an incompatible lambda names the admissible one
        let err = exact_sn_wave(modulus(0.9), 1.0, 0.5, lam * 1.5, 1).unwrap_err();
        match err {
            Error::PeriodicityFit { admissible, .. } => {
                assert!((admissible - lam).abs() < 1e-14 * lam)
            }
            other => panic!("expected periodicity error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_speed_rejected() {
        assert!(admissible_lambda(modulus(0.5), 0.5, 0.5, 1).is_err());
        assert!(admissible_lambda(modulus(0.5), 1.0, 0.0, 1).is_err());
    }

    #[test]
    fn degenerate_modulus_is_entire() {
        let lam = admissible_lambda(modulus(0.0), 1.0, 0.5, 1).unwrap();
        let wave = exact_sn_wave(modulus(0.0), 1.0, 0.5, lam, 1).unwrap();
        assert_eq!(wave.amplitude, 0.0);
        assert!(wave.rho_exact.is_infinite());
    }

    #[test]
    fn profile_is_periodic_on_torus() {
        let lam = admissible_lambda(modulus(0.9), 1.0, 0.5, 1).unwrap();
        let wave = exact_sn_wave(modulus(0.9), 1.0, 0.5, lam, 1).unwrap();
        for x in [0.0, 0.4, 2.2] {
            let a = wave.eval(x, 0.0);
            let b = wave.eval(x + std::f64::consts::TAU, 0.0);
            assert!((a - b).abs() < 1e-11 * wave.amplitude.max(1.0));
        }
    }

    #[test]
    fn evaluator_matches_jacobi_sn_pointwise() {
        let lam = admissible_lambda(modulus(0.9), 1.0, 0.5, 1).unwrap();
        let wave = exact_sn_wave(modulus(0.9), 1.0, 0.5, lam, 1).unwrap();
        let lat = Lattice::line(64);
        let grid = wave.grid_at(&lat, 256, 0.0).unwrap();
        let m = grid.points_per_axis();
        for (l, &v) in grid.values().iter().enumerate() {
            let x = std::f64::consts::TAU * l as f64 / m as f64;
            let direct = wave.amplitude * jacobi_sn(wave.kappa * x, modulus(0.9));
            assert!((v - direct).abs() <= 1e-12 * wave.amplitude);
        }
    }

    #[test]
    fn residual_vanishes_spectrally() {
        let lam = admissible_lambda(modulus(0.9), 1.0, 0.5, 1).unwrap();
        let wave = exact_sn_wave(modulus(0.9), 1.0, 0.5, lam, 1).unwrap();
        let res = wave.profile_residual(&Lattice::line(256)).unwrap();
        assert!(res <= 1e-8, "profile residual {res}");
    }

    #[test]
    fn initial_state_is_real_and_traveling() {
        let lam = admissible_lambda(modulus(0.8), 1.0, 0.4, 1).unwrap();
        let wave = exact_sn_wave(modulus(0.8), 1.0, 0.4, lam, 1).unwrap();
        let lat = Lattice::line(128);
        let state = wave.initial_state(&lat).unwrap();
        assert!(state.u.is_real());
        assert!(state.v.is_real());
        // u_t = -c u_x: check against a centered difference of the evaluator
        let grid_v = crate::transform::to_grid(&state.v, 1.0).unwrap();
        let m = grid_v.points_per_axis();
        let dt = 1e-6;
        for l in (0..m).step_by(m / 16) {
            let x = std::f64::consts::TAU * l as f64 / m as f64;
            let fd = (wave.eval(x, dt) - wave.eval(x, -dt)) / (2.0 * dt);
            assert!(
                (grid_v.values()[l] - fd).abs() < 1e-5 * wave.amplitude.max(1.0),
                "x = {x}"
            );
        }
    }
}
