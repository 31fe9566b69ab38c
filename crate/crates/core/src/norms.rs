//! Weighted spectral norms: Sobolev `H^p`, the L2-based Gevrey norms, the
//! Wiener-algebra (l1) Gevrey norms, the per-mode energy amplitudes, and the
//! composite energy quantities fed to the bound ODEs.

use crate::error::{Error, Result};
use crate::field::{SpectralField, MAX_EXP};

/// Which exponential weight the Gevrey norm carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// `e^{tau |j'|}` on the first `m` wavenumber components; s = 1 only.
    Anisotropic,
    /// `e^{tau (1+|j|^2)^{1/(2s)}}` on the full wavenumber.
    Isotropic,
}

/// Parameters of a Gevrey-Sobolev norm: Sobolev order `p`, analyticity
/// parameter `tau`, Gevrey order `s`, split index `m`, and the weight mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GevreyParams {
    pub p: f64,
    pub tau: f64,
    pub s: f64,
    pub split: usize,
    pub mode: WeightMode,
}

impl GevreyParams {
    pub fn new(p: f64, tau: f64, s: f64, split: usize, mode: WeightMode) -> Result<Self> {
        if !(tau >= 0.0) {
            return Err(Error::InvalidParameter(format!("tau must be >= 0, got {tau}")));
        }
        if !(s >= 1.0) {
            return Err(Error::InvalidParameter(format!("Gevrey order s must be >= 1, got {s}")));
        }
        if mode == WeightMode::Anisotropic && s != 1.0 {
            return Err(Error::InvalidParameter(
                "anisotropic weight requires s = 1".into(),
            ));
        }
        if split < 1 {
            return Err(Error::InvalidParameter("split index must be >= 1".into()));
        }
        if !p.is_finite() {
            return Err(Error::InvalidParameter("p must be finite".into()));
        }
        Ok(Self { p, tau, s, split, mode })
    }

    /// The analytic-class parameters used throughout the experiments.
    pub fn anisotropic(p: f64, tau: f64, split: usize) -> Result<Self> {
        Self::new(p, tau, 1.0, split, WeightMode::Anisotropic)
    }

    pub fn isotropic(p: f64, tau: f64, s: f64) -> Result<Self> {
        Self::new(p, tau, s, 1, WeightMode::Isotropic)
    }

    /// Exponent of the Gevrey weight at a mode with the given geometry.
    pub(crate) fn weight_exponent(&self, one_plus_abs2: f64, split_norm: f64) -> f64 {
        match self.mode {
            WeightMode::Anisotropic => self.tau * split_norm,
            WeightMode::Isotropic => self.tau * one_plus_abs2.powf(1.0 / (2.0 * self.s)),
        }
    }
}

fn overflow_error(field: &SpectralField, flat: usize, log_term: f64) -> Error {
    let mut j = vec![0i64; field.lattice().dim()];
    field.lattice().mode_of(flat, &mut j);
    Error::WeightOverflow { mode: j, log_term }
}

/// Sobolev norm `( sum_j |u_j|^2 (1+|j|^2)^p )^{1/2}`.
pub fn norm_hp(field: &SpectralField, p: f64) -> f64 {
    let (one_plus_abs2, _) = field.lattice().geometry();
    field
        .coeffs()
        .iter()
        .zip(&one_plus_abs2)
        .map(|(c, &w)| c.norm_sqr() * w.powf(p))
        .sum::<f64>()
        .sqrt()
}

/// L2-based Gevrey norm `( sum_j |u_j|^2 (1+|j|^2)^p e^{2 w_j} )^{1/2}` with
/// the weight exponent `w_j` selected by `params`. Per-mode terms are formed
/// in log space; overflow names the offending mode.
pub fn norm_gevrey_l2(field: &SpectralField, params: &GevreyParams) -> Result<f64> {
    let (one_plus_abs2, split_norm) = field.lattice().geometry();
    let mut sum_sq = 0.0f64;
    for (flat, c) in field.coeffs().iter().enumerate() {
        let a = c.norm_sqr();
        if a == 0.0 {
            continue;
        }
        let w = params.weight_exponent(one_plus_abs2[flat], split_norm[flat]);
        let log_term = a.ln() + params.p * one_plus_abs2[flat].ln() + 2.0 * w;
        if log_term > MAX_EXP {
            return Err(overflow_error(field, flat, log_term));
        }
        sum_sq += log_term.exp();
    }
    if !sum_sq.is_finite() {
        return Err(Error::InvalidParameter(
            "Gevrey norm sum overflowed f64".into(),
        ));
    }
    Ok(sum_sq.sqrt())
}

/// Wiener-algebra norm `sum_j |u_j|`.
pub fn norm_l1(field: &SpectralField) -> f64 {
    field.coeffs().iter().map(|c| c.norm()).sum()
}

/// Wiener-algebra Gevrey norm `sum_j e^{tau |j'|} |u_j|`.
pub fn norm_gevrey_l1(field: &SpectralField, tau: f64, split: usize) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter(format!("tau must be >= 0, got {tau}")));
    }
    if split < 1 || split > field.lattice().dim() {
        return Err(Error::InvalidParameter("split index out of range".into()));
    }
    let lat = field.lattice();
    let mut sum = 0.0f64;
    let mut j = vec![0i64; lat.dim()];
    for (flat, c) in field.coeffs().iter().enumerate() {
        let a = c.norm();
        if a == 0.0 {
            continue;
        }
        lat.mode_of(flat, &mut j);
        let jp = j[..split]
            .iter()
            .map(|&v| (v * v) as f64)
            .sum::<f64>()
            .sqrt();
        let log_term = a.ln() + tau * jp;
        if log_term > MAX_EXP {
            return Err(overflow_error(field, flat, log_term));
        }
        sum += log_term.exp();
    }
    Ok(sum)
}

/// Per-mode energy amplitudes `phi_j = (|v_j|^2 + (1+|j|^2) |u_j|^2)^{1/2}`
/// in flat-index order.
pub fn phi_modes(u: &SpectralField, u_t: &SpectralField) -> Vec<f64> {
    assert_eq!(u.lattice(), u_t.lattice(), "phi needs a shared lattice");
    let (one_plus_abs2, _) = u.lattice().geometry();
    u.coeffs()
        .iter()
        .zip(u_t.coeffs())
        .zip(&one_plus_abs2)
        .map(|((cu, cv), &w)| (cv.norm_sqr() + w * cu.norm_sqr()).sqrt())
        .collect()
}

/// Weighted mode-energy sum `y = sum_j e^{tau |j'|} phi_j`.
pub fn y_l1(u: &SpectralField, u_t: &SpectralField, tau: f64, split: usize) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter(format!("tau must be >= 0, got {tau}")));
    }
    let lat = u.lattice();
    let phis = phi_modes(u, u_t);
    let mut j = vec![0i64; lat.dim()];
    let mut sum = 0.0f64;
    for (flat, &phi) in phis.iter().enumerate() {
        if phi == 0.0 {
            continue;
        }
        lat.mode_of(flat, &mut j);
        let jp = j[..split]
            .iter()
            .map(|&v| (v * v) as f64)
            .sum::<f64>()
            .sqrt();
        let log_term = phi.ln() + tau * jp;
        if log_term > MAX_EXP {
            return Err(overflow_error(u, flat, log_term));
        }
        sum += log_term.exp();
    }
    Ok(sum)
}

/// Gevrey energy `Y = ( |A^p e^{tau script-A} u_t|^2 + |A^{p+1} e^{tau script-A} u|^2 )^{1/2}`
/// with the anisotropic weight.
pub fn energy_y(
    u: &SpectralField,
    u_t: &SpectralField,
    p: f64,
    tau: f64,
    split: usize,
) -> Result<f64> {
    let params_t = GevreyParams::anisotropic(p, tau, split)?;
    let params_u = GevreyParams::anisotropic(p + 1.0, tau, split)?;
    let a = norm_gevrey_l2(u_t, &params_t)?;
    let b = norm_gevrey_l2(u, &params_u)?;
    Ok((a * a + b * b).sqrt())
}

/// Checks the Wiener/Sobolev embedding: returns
/// `(|u-hat|_l1, (C0/2) |u|_{H^p}, lhs <= rhs)`.
pub fn embedding_check(field: &SpectralField, p: f64, c0: f64) -> (f64, f64, bool) {
    let lhs = norm_l1(field);
    let rhs = 0.5 * c0 * norm_hp(field, p);
    // Tiny absolute slack: both sides are O(1) sums of squares/roots and the
    // inequality itself is strict mathematics.
    (lhs, rhs, lhs <= rhs + 1e-12 * (1.0 + rhs))
}

/// Label for recorded norm time series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum NormKind {
    /// `|u(t)|_{H^p}`
    Hp,
    /// `|u(t)|_{H^{p+1}}`
    HpPlus1,
    /// `|u_t(t)|_{H^p}`
    UtHp,
    /// `|u-hat(t)|_{l1}`
    L1,
    /// L2-based Gevrey norm of `u`
    GevreyL2,
    /// Wiener Gevrey norm of `u`
    GevreyL1,
    /// Gevrey energy `Y(t)`
    EnergyY,
    /// Weighted mode sum `y(t)`
    SmallY,
    /// Conserved Klein-Gordon energy diagnostic
    Energy,
}

impl NormKind {
    pub fn label(&self) -> &'static str {
        match self {
            NormKind::Hp => "Hp",
            NormKind::HpPlus1 => "Hp1",
            NormKind::UtHp => "ut_Hp",
            NormKind::L1 => "l1",
            NormKind::GevreyL2 => "gevrey_L2",
            NormKind::GevreyL1 => "gevrey_l1",
            NormKind::EnergyY => "Y",
            NormKind::SmallY => "y",
            NormKind::Energy => "energy",
        }
    }
}

/// One observed value at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSample {
    pub t: f64,
    pub value: f64,
}

/// A labeled, time-ordered series of norm samples.
#[derive(Debug, Clone)]
pub struct NormSeries {
    pub kind: NormKind,
    pub samples: Vec<NormSample>,
}

impl NormSeries {
    pub fn new(kind: NormKind) -> Self {
        Self {
            kind,
            samples: Vec::new(),
        }
    }

    /// Appends a sample; times must be strictly increasing and values finite.
    pub fn push(&mut self, t: f64, value: f64) -> Result<()> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "norm sample must be finite and nonnegative, got {value} at t = {t}"
            )));
        }
        if let Some(last) = self.samples.last() {
            if t <= last.t {
                return Err(Error::InvalidParameter(format!(
                    "norm samples must have strictly increasing t ({t} after {})",
                    last.t
                )));
            }
        }
        self.samples.push(NormSample { t, value });
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.value).collect()
    }
}
