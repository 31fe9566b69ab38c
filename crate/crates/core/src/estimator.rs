//! Measures the radius of analyticity of a computed field from the
//! exponential decay of its Fourier coefficients.
//!
//! The shell profile takes the maximum modulus over `round(|j'|) = k`; the
//! decay rate is recovered by least squares on
//! `ln profile(k) = c + q ln(1+k) - rho k`, i.e. a line with a log-polynomial
//! prefactor term. The prefactor term is what lets profiles like
//! `(1+k)^3 e^{-rho k}` fit without the O(q/k) slope bias a plain line would
//! pick up on finite bands; for pure exponentials the fit returns `q ~ 0`
//! and reduces to the line.

use crate::bounds::{BoundLabel, TauCurve};
use crate::field::SpectralField;

/// Options of the decay fit.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Shells below `noise_floor_rel * max profile` are excluded.
    pub noise_floor_rel: f64,
    /// Minimum number of usable shells for a determinate fit.
    pub min_band: usize,
    /// Shells `k < skip_low` are excluded (low-k transient).
    pub skip_low: usize,
    /// Optional upper shell cutoff.
    pub max_shell: Option<usize>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            noise_floor_rel: 1e-13,
            min_band: 8,
            skip_low: 2,
            max_shell: None,
        }
    }
}

/// A successful decay fit.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    /// Fitted radius `rho = -slope`.
    pub rho: f64,
    /// Fitted log-amplitude at `k = 0`.
    pub intercept: f64,
    /// Fitted exponent of the `(1+k)^q` prefactor.
    pub prefactor_exp: f64,
    /// Standard error of `rho` from the least-squares covariance.
    pub rho_stderr: f64,
    /// First and last shell used.
    pub k_lo: usize,
    pub k_hi: usize,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
    /// Whether the noise floor truncated the band before the lattice edge.
    pub floor_hit: bool,
}

/// Outcome of a radius fit.
#[derive(Debug, Clone, Copy)]
pub enum RadiusFit {
    Analytic(DecayFit),
    /// The profile does not decay (nonpositive fitted rate).
    NotAnalytic { slope: f64 },
    /// Too few usable shells to fit.
    Indeterminate { usable_shells: usize },
}

impl RadiusFit {
    pub fn analytic(&self) -> Option<&DecayFit> {
        match self {
            RadiusFit::Analytic(fit) => Some(fit),
            _ => None,
        }
    }
}

/// Shell profile: for each integer shell `k`, the maximum modulus over
/// retained modes with `round(|j'|) = k`.
pub fn shell_profile(field: &SpectralField, split: usize) -> Vec<f64> {
    let lat = field.lattice();
    assert!(split >= 1 && split <= lat.dim(), "split index out of range");
    let max_shell = ((split as f64).sqrt() * lat.max_mode() as f64).round() as usize;
    let mut profile = vec![0.0f64; max_shell + 1];
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
        let k = jp.round() as usize;
        if profile[k] < a {
            profile[k] = a;
        }
    }
    profile
}

/// Least-squares decay fit on a shell profile (shell index = array index).
pub fn fit_profile(profile: &[f64], opts: &FitOptions) -> RadiusFit {
    let pmax = profile.iter().cloned().fold(0.0, f64::max);
    if pmax <= 0.0 {
        return RadiusFit::Indeterminate { usable_shells: 0 };
    }
    let floor = opts.noise_floor_rel * pmax;
    let last_avail = profile.len() - 1;
    let hard_hi = opts.max_shell.unwrap_or(last_avail).min(last_avail);
    let mut k_hi = None;
    for k in (0..=hard_hi).rev() {
        if profile[k] > floor {
            k_hi = Some(k);
            break;
        }
    }
    let Some(k_hi) = k_hi else {
        return RadiusFit::Indeterminate { usable_shells: 0 };
    };
    let usable: Vec<usize> = (opts.skip_low..=k_hi)
        .filter(|&k| profile[k] > floor)
        .collect();
    if usable.len() < opts.min_band {
        return RadiusFit::Indeterminate {
            usable_shells: usable.len(),
        };
    }
    let floor_hit = k_hi < hard_hi || usable.len() < k_hi + 1 - opts.skip_low;

    // model: y = c + q x1 + b x2 with x1 = ln(1+k), x2 = k, y = ln profile
    let n = usable.len() as f64;
    let (mut m1, mut m2, mut my) = (0.0f64, 0.0f64, 0.0f64);
    for &k in &usable {
        m1 += (1.0 + k as f64).ln();
        m2 += k as f64;
        my += profile[k].ln();
    }
    m1 /= n;
    m2 /= n;
    my /= n;
    let (mut s11, mut s12, mut s22, mut s1y, mut s2y) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &k in &usable {
        let x1 = (1.0 + k as f64).ln() - m1;
        let x2 = k as f64 - m2;
        let y = profile[k].ln() - my;
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        s1y += x1 * y;
        s2y += x2 * y;
    }
    let det = s11 * s22 - s12 * s12;
    let (q, b) = if det.abs() > 1e-12 * s11 * s22 {
        (
            (s1y * s22 - s2y * s12) / det,
            (s2y * s11 - s1y * s12) / det,
        )
    } else {
        // nearly collinear regressors: fall back to the plain line
        (0.0, s2y / s22)
    };
    let intercept = my - q * m1 - b * m2;
    let mut ss = 0.0f64;
    for &k in &usable {
        let fit = intercept + q * (1.0 + k as f64).ln() + b * k as f64;
        ss += (profile[k].ln() - fit).powi(2);
    }
    let residual = (ss / n).sqrt();
    // LS covariance: Var(b) = sigma^2 S11 / det with sigma^2 = SS/(n - 3)
    let dof = (usable.len().saturating_sub(3)).max(1) as f64;
    let rho_stderr = if det.abs() > 1e-12 * s11 * s22 {
        (ss / dof * s11 / det).max(0.0).sqrt()
    } else {
        (ss / dof / s22).max(0.0).sqrt()
    };
    let rho = -b;
    if rho <= 0.0 {
        return RadiusFit::NotAnalytic { slope: b };
    }
    RadiusFit::Analytic(DecayFit {
        rho,
        intercept,
        prefactor_exp: q,
        rho_stderr,
        k_lo: usable[0],
        k_hi,
        residual,
        floor_hit,
    })
}

/// Fits the radius of analyticity of a field from its shell profile.
pub fn fit_radius(field: &SpectralField, split: usize, opts: &FitOptions) -> RadiusFit {
    fit_profile(&shell_profile(field, split), opts)
}

/// Fits every snapshot; indeterminate or non-decaying samples are omitted
/// and counted.
pub fn measured_tau_series(
    snapshots: &[(f64, SpectralField)],
    split: usize,
    opts: &FitOptions,
) -> (TauCurve, usize) {
    let mut t = Vec::new();
    let mut tau = Vec::new();
    let mut omitted = 0usize;
    for (time, field) in snapshots {
        match fit_radius(field, split, opts) {
            RadiusFit::Analytic(fit) => {
                t.push(*time);
                tau.push(fit.rho);
            }
            _ => omitted += 1,
        }
    }
    (
        TauCurve {
            label: BoundLabel::Measured,
            t,
            tau,
        },
        omitted,
    )
}
