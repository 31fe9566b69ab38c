//! Spectral and collocation-grid representations of fields on the torus.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::norms::GevreyParams;

/// Relative tolerance of the Hermitian-symmetry check.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Largest exponent we allow before declaring a weight overflow. f64 holds
/// exponents up to ~709.78; keep a small safety margin.
pub(crate) const MAX_EXP: f64 = 706.0;

/// Complex Fourier coefficients of a field over a retained mode cube.
///
/// The represented function is `u(x) = sum_j coeff(j) e^{i j.x}`.
#[derive(Debug, Clone)]
pub struct SpectralField {
    lattice: Lattice,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zero(lattice: Lattice) -> Self {
        let n = lattice.num_modes();
        Self {
            lattice,
            coeffs: vec![Complex64::ZERO; n],
        }
    }

    pub fn from_coeffs(lattice: Lattice, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != lattice.num_modes() {
            return Err(Error::InvalidParameter(format!(
                "coefficient vector has length {}, lattice holds {} modes",
                coeffs.len(),
                lattice.num_modes()
            )));
        }
        let field = Self { lattice, coeffs };
        if !field.is_finite() {
            return Err(Error::InvalidParameter(
                "coefficients contain NaN or Inf".into(),
            ));
        }
        Ok(field)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn get(&self, j: &[i64]) -> Complex64 {
        self.lattice
            .flat_index(j)
            .map(|i| self.coeffs[i])
            .unwrap_or(Complex64::ZERO)
    }

    pub fn set(&mut self, j: &[i64], value: Complex64) {
        if let Some(i) = self.lattice.flat_index(j) {
            self.coeffs[i] = value;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_modulus(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest deviation from `coeff(-j) = conj(coeff(j))`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut j = vec![0i64; self.lattice.dim()];
        let mut neg = vec![0i64; self.lattice.dim()];
        let mut max_dev: f64 = 0.0;
        for flat in 0..self.lattice.num_modes() {
            self.lattice.mode_of(flat, &mut j);
            for (a, b) in neg.iter_mut().zip(&j) {
                *a = -b;
            }
            let mirror = self.lattice.flat_index(&neg).expect("cube is symmetric");
            let dev = (self.coeffs[mirror] - self.coeffs[flat].conj()).norm();
            max_dev = max_dev.max(dev);
        }
        max_dev
    }

    /// Whether the field represents a real function: Hermitian symmetry to
    /// within `HERMITIAN_TOL` relative to the largest coefficient, all
    /// coefficients finite.
    pub fn is_real(&self) -> bool {
        if !self.is_finite() {
            return false;
        }
        let scale = self.max_modulus();
        if scale == 0.0 {
            return true;
        }
        self.hermitian_deviation() <= HERMITIAN_TOL * scale
    }

    pub(crate) fn require_real(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::InvalidParameter(
                "coefficients contain NaN or Inf".into(),
            ));
        }
        let scale = self.max_modulus();
        if scale == 0.0 {
            return Ok(());
        }
        let dev = self.hermitian_deviation();
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::SymmetryViolation {
                max_dev: dev,
                tol: HERMITIAN_TOL * scale,
            });
        }
        Ok(())
    }

    /// Applies `A^p = (I - Laplacian)^{p/2}` as the Fourier multiplier
    /// `(1 + |j|^2)^{p/2}`. Negative `p` inverts.
    pub fn apply_a_power(&self, p: f64) -> Self {
        let (one_plus_abs2, _) = self.lattice.geometry();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&one_plus_abs2)
            .map(|(c, &w)| c * w.powf(p / 2.0))
            .collect();
        Self {
            lattice: self.lattice.clone(),
            coeffs,
        }
    }

    /// Applies the Gevrey weight `e^{tau |j'|}` (anisotropic, s = 1) or
    /// `e^{tau (1+|j|^2)^{1/(2s)}}` (isotropic). The exponent is formed in
    /// log space per mode; overflow yields a typed error naming the mode.
    pub fn apply_script_a_weight(&self, params: &GevreyParams) -> Result<Self> {
        let (one_plus_abs2, split_norm) = self.lattice.geometry();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (flat, c) in self.coeffs.iter().enumerate() {
            let w = params.weight_exponent(one_plus_abs2[flat], split_norm[flat]);
            if c.norm_sqr() == 0.0 {
                coeffs.push(Complex64::ZERO);
                continue;
            }
            let log_term = c.norm().ln() + w;
            if log_term > MAX_EXP {
                let mut j = vec![0i64; self.lattice.dim()];
                self.lattice.mode_of(flat, &mut j);
                return Err(Error::WeightOverflow { mode: j, log_term });
            }
            coeffs.push(c * w.exp());
        }
        Ok(Self {
            lattice: self.lattice.clone(),
            coeffs,
        })
    }

    /// Spectral first derivative along `axis`: multiplier `i j_axis`.
    pub fn derivative(&self, axis: usize) -> Self {
        assert!(axis < self.lattice.dim());
        let mut out = self.clone();
        let mut j = vec![0i64; self.lattice.dim()];
        for flat in 0..self.lattice.num_modes() {
            self.lattice.mode_of(flat, &mut j);
            out.coeffs[flat] = self.coeffs[flat] * Complex64::new(0.0, j[axis] as f64);
        }
        out
    }

    /// L2 distance between two fields on the same lattice.
    pub fn l2_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.lattice, other.lattice);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Real samples on the uniform collocation grid, `points_per_axis` points in
/// each dimension; `values` is row-major with the last axis contiguous.
#[derive(Debug, Clone)]
pub struct GridField {
    lattice: Lattice,
    points_per_axis: usize,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(lattice: Lattice, points_per_axis: usize, values: Vec<f64>) -> Result<Self> {
        let expected = points_per_axis.pow(lattice.dim() as u32);
        if values.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "grid holds {} values, expected {}^{} = {}",
                values.len(),
                points_per_axis,
                lattice.dim(),
                expected
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("grid values contain NaN or Inf".into()));
        }
        Ok(Self {
            lattice,
            points_per_axis,
            values,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Grid coordinates of a flat sample index, each in `[0, 2pi)`.
    pub fn coords_of(&self, flat: usize, out: &mut [f64]) {
        let m = self.points_per_axis;
        let step = std::f64::consts::TAU / m as f64;
        let mut rest = flat;
        for axis in (0..self.lattice.dim()).rev() {
            out[axis] = (rest % m) as f64 * step;
            rest /= m;
        }
    }

    /// Mean of the samples, i.e. the trapezoid-exact average over the torus.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_field(n: usize) -> SpectralField {
        SpectralField::zero(Lattice::line(n))
    }

    #[test]
    fn a_power_identity_at_zero() {
        let mut f = line_field(4);
        f.set(&[1], Complex64::new(0.5, 0.25));
        let g = f.apply_a_power(0.0);
        assert_eq!(g.get(&[1]), Complex64::new(0.5, 0.25));
    }

    #[test]
    fn a_power_doubles_first_mode_at_p2() {
        // (1 + 1)^{2/2} = 2
        let mut f = line_field(4);
        f.set(&[1], Complex64::new(1.0, 0.0));
        let g = f.apply_a_power(2.0);
        assert!((g.get(&[1]).re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn a_power_2d_mode() {
        // (1 + 1 + 4)^{1/2} = sqrt(6)
        let lat = Lattice::new(2, 1, 4).unwrap();
        let mut f = SpectralField::zero(lat);
        f.set(&[1, 2], Complex64::new(1.0, 0.0));
        let g = f.apply_a_power(1.0);
        assert!((g.get(&[1, 2]).re - 6.0f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn a_power_additivity() {
        let mut f = line_field(8);
        for j in -8i64..=8 {
            f.set(&[j], Complex64::new(1.0 / (1.0 + j.abs() as f64), 0.1 * j as f64));
        }
        let a = f.apply_a_power(0.7).apply_a_power(1.3);
        let b = f.apply_a_power(2.0);
        for j in -8i64..=8 {
            assert!((a.get(&[j]) - b.get(&[j])).norm() <= 1e-13 * b.get(&[j]).norm());
        }
    }

    #[test]
    fn script_a_weight_examples() {
        // tau = 0 is the identity.
        let mut f = line_field(4);
        f.set(&[3], Complex64::new(2.0, -1.0));
        let id = f
            .apply_script_a_weight(&GevreyParams::anisotropic(0.0, 0.0, 1).unwrap())
            .unwrap();
        assert_eq!(id.get(&[3]), Complex64::new(2.0, -1.0));

        // n=2, m=1, j=(3,5), tau=0.1: weight e^{0.3}.
        let lat = Lattice::new(2, 1, 8).unwrap();
        let mut g = SpectralField::zero(lat);
        g.set(&[3, 5], Complex64::new(1.0, 0.0));
        let w = g
            .apply_script_a_weight(&GevreyParams::anisotropic(0.0, 0.1, 1).unwrap())
            .unwrap();
        assert!((w.get(&[3, 5]).re - 0.3f64.exp()).abs() < 1e-14);

        // j=1, tau=ln 2: amplitude doubles.
        let mut h = line_field(2);
        h.set(&[1], Complex64::new(1.0, 0.0));
        let w = h
            .apply_script_a_weight(&GevreyParams::anisotropic(0.0, 2.0f64.ln(), 1).unwrap())
            .unwrap();
        assert!((w.get(&[1]).re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn script_a_weight_overflow_names_mode() {
        let mut f = line_field(32);
        f.set(&[32], Complex64::new(1.0, 0.0));
        let err = f
            .apply_script_a_weight(&GevreyParams::anisotropic(0.0, 50.0, 1).unwrap())
            .unwrap_err();
        match err {
            Error::WeightOverflow { mode, .. } => assert_eq!(mode, vec![32]),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn hermitian_check() {
        let mut f = line_field(3);
        f.set(&[1], Complex64::new(0.5, 0.5));
        f.set(&[-1], Complex64::new(0.5, -0.5));
        assert!(f.is_real());
        f.set(&[-1], Complex64::new(0.5, 0.5));
        assert!(!f.is_real());
    }
}
