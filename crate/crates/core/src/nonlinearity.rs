//! Analytic nonlinearities `f(t, x, u)` and their majorising series.
//!
//! A majorising series dominates the nonlinearity termwise with nonnegative
//! coefficients `b_k(t)`; the bound ODEs only ever see the nonlinearity
//! through evaluations `g(t, s) = sum_k b_k(t) s^k`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::GridField;

/// Sign of the monomial nonlinearity in `box u + u +- u^k = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(&self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Time profile of a series coefficient: constant, sinusoidal, or tabulated
/// samples with linear interpolation (clamped outside the table).
#[derive(Debug, Clone, PartialEq)]
pub enum CoefProfile {
    Constant(f64),
    Sinusoid {
        offset: f64,
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
    Tabulated {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

impl CoefProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            CoefProfile::Constant(v) => *v,
            CoefProfile::Sinusoid {
                offset,
                amplitude,
                omega,
                phase,
            } => offset + amplitude * (omega * t + phase).sin(),
            CoefProfile::Tabulated { times, values } => {
                if times.is_empty() {
                    return 0.0;
                }
                if t <= times[0] {
                    return values[0];
                }
                if t >= *times.last().unwrap() {
                    return *values.last().unwrap();
                }
                let i = times.partition_point(|&ti| ti <= t) - 1;
                let (t0, t1) = (times[i], times[i + 1]);
                let w = (t - t0) / (t1 - t0);
                values[i] * (1.0 - w) + values[i + 1] * w
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CoefProfile::Constant(v) => {
                if !v.is_finite() {
                    return Err(Error::InvalidParameter("coefficient must be finite".into()));
                }
            }
            CoefProfile::Sinusoid {
                offset,
                amplitude,
                omega,
                phase,
            } => {
                for v in [offset, amplitude, omega, phase] {
                    if !v.is_finite() {
                        return Err(Error::InvalidParameter(
                            "sinusoid parameters must be finite".into(),
                        ));
                    }
                }
            }
            CoefProfile::Tabulated { times, values } => {
                if times.len() != values.len() || times.is_empty() {
                    return Err(Error::InvalidParameter(
                        "tabulated profile needs equal-length, nonempty tables".into(),
                    ));
                }
                if !times.windows(2).all(|w| w[0] < w[1]) {
                    return Err(Error::InvalidParameter(
                        "tabulated times must be strictly increasing".into(),
                    ));
                }
                if !values.iter().all(|v| v.is_finite()) {
                    return Err(Error::InvalidParameter("tabulated values must be finite".into()));
                }
            }
        }
        Ok(())
    }
}

/// One spatial Fourier mode of an x-dependent nonlinearity:
/// `c_j(t, u) = sum_k a_{jk}(t) u^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialMode {
    pub j: Vec<i64>,
    pub coefficients: Vec<CoefProfile>,
}

/// The nonlinearity `f(t, x, u)` of the wave equation.
#[derive(Debug, Clone, PartialEq)]
pub enum NonlinearitySpec {
    /// `f = 0`: the linear equation.
    Zero,
    /// `f = +- u^k`, `k >= 2`.
    Monomial { sign: Sign, k: u32 },
    /// `f = sum_k a_k(t) u^k`, a finite power series in `u`.
    PowerSeries { coefficients: Vec<CoefProfile> },
    /// `f = u e^{u^2}`, the entire exponential nonlinearity.
    ExpCubic,
    /// `f = sum_j (sum_k a_{jk}(t) u^k) e^{i j.x}` over finitely many modes;
    /// `lambda` is the analyticity parameter attached to the x-dependence.
    SpatialSeries { modes: Vec<SpatialMode>, lambda: f64 },
}

impl NonlinearitySpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            NonlinearitySpec::Zero | NonlinearitySpec::ExpCubic => Ok(()),
            NonlinearitySpec::Monomial { k, .. } => {
                if *k < 2 {
                    return Err(Error::InvalidParameter(
                        "monomial nonlinearity needs k >= 2".into(),
                    ));
                }
                Ok(())
            }
            NonlinearitySpec::PowerSeries { coefficients } => {
                for c in coefficients {
                    c.validate()?;
                }
                Ok(())
            }
            NonlinearitySpec::SpatialSeries { modes, lambda } => {
                if !(*lambda > 0.0) {
                    return Err(Error::InvalidParameter(
                        "spatial series needs lambda > 0".into(),
                    ));
                }
                if modes.is_empty() {
                    return Err(Error::InvalidParameter(
                        "spatial series needs at least one mode".into(),
                    ));
                }
                let dim = modes[0].j.len();
                for m in modes {
                    if m.j.len() != dim {
                        return Err(Error::InvalidParameter(
                            "spatial modes have inconsistent dimensions".into(),
                        ));
                    }
                    for c in &m.coefficients {
                        c.validate()?;
                    }
                }
                // realness: each listed mode needs its mirror with identical
                // coefficients
                for m in modes {
                    let neg: Vec<i64> = m.j.iter().map(|&c| -c).collect();
                    let found = modes
                        .iter()
                        .any(|o| o.j == neg && o.coefficients == m.coefficients);
                    if !found {
                        return Err(Error::InvalidParameter(format!(
                            "spatial mode {:?} lacks a matching mirror mode; f would not be real",
                            m.j
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// The analyticity parameter of the spatial dependence; infinite for
    /// x-independent forms.
    pub fn lambda(&self) -> f64 {
        match self {
            NonlinearitySpec::SpatialSeries { lambda, .. } => *lambda,
            _ => f64::INFINITY,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, NonlinearitySpec::Zero)
    }

    /// Whether the pointwise power evaluation is exactly dealiased by the
    /// monomial rule; entire nonlinearities are only approximately so.
    pub fn is_polynomial(&self) -> bool {
        matches!(
            self,
            NonlinearitySpec::Zero
                | NonlinearitySpec::Monomial { .. }
                | NonlinearitySpec::PowerSeries { .. }
        )
    }

    /// Largest `u`-power appearing (for grid-size selection); entire
    /// nonlinearities report a working degree for the x2 oversampling rule.
    pub fn degree(&self) -> u32 {
        match self {
            NonlinearitySpec::Zero => 1,
            NonlinearitySpec::Monomial { k, .. } => *k,
            NonlinearitySpec::PowerSeries { coefficients } => {
                (coefficients.len().max(2) - 1) as u32
            }
            NonlinearitySpec::ExpCubic => 3,
            NonlinearitySpec::SpatialSeries { modes, .. } => modes
                .iter()
                .map(|m| (m.coefficients.len().max(2) - 1) as u32)
                .max()
                .unwrap_or(1),
        }
    }
}

/// Pointwise evaluation `f(t, x, u(x))` on the collocation grid.
pub fn eval_f(spec: &NonlinearitySpec, u: &GridField, t: f64) -> Result<GridField> {
    let mut out = vec![0.0f64; u.values().len()];
    match spec {
        NonlinearitySpec::Zero => {}
        NonlinearitySpec::Monomial { sign, k } => {
            let s = sign.factor();
            for (o, &v) in out.iter_mut().zip(u.values()) {
                *o = s * v.powi(*k as i32);
            }
        }
        NonlinearitySpec::PowerSeries { coefficients } => {
            let a: Vec<f64> = coefficients.iter().map(|c| c.eval(t)).collect();
            for (o, &v) in out.iter_mut().zip(u.values()) {
                // Horner from the top coefficient
                let mut acc = 0.0;
                for &ak in a.iter().rev() {
                    acc = acc * v + ak;
                }
                *o = acc;
            }
        }
        NonlinearitySpec::ExpCubic => {
            for (i, (o, &v)) in out.iter_mut().zip(u.values()).enumerate() {
                let w = v * (v * v).exp();
                if !w.is_finite() {
                    return Err(Error::EvalOverflow { index: i, value: v });
                }
                *o = w;
            }
        }
        NonlinearitySpec::SpatialSeries { modes, .. } => {
            let dim = u.lattice().dim();
            let mut x = vec![0.0f64; dim];
            for (i, (o, &v)) in out.iter_mut().zip(u.values()).enumerate() {
                u.coords_of(i, &mut x);
                let mut acc = Complex64::ZERO;
                for m in modes {
                    let phase: f64 = m.j.iter().zip(&x).map(|(&a, &b)| a as f64 * b).sum();
                    let mut c = 0.0;
                    for prof in m.coefficients.iter().rev() {
                        c = c * v + prof.eval(t);
                    }
                    acc += Complex64::new(0.0, phase).exp() * c;
                }
                if !acc.re.is_finite() {
                    return Err(Error::EvalOverflow { index: i, value: v });
                }
                *o = acc.re;
            }
        }
    }
    for (i, (&o, &v)) in out.iter().zip(u.values()).enumerate() {
        if !o.is_finite() {
            return Err(Error::EvalOverflow { index: i, value: v });
        }
    }
    GridField::new(u.lattice().clone(), u.points_per_axis(), out)
}

/// One term `weight * |profile(t)| * s^power` of a majorising series.
#[derive(Debug, Clone)]
struct MajorTerm {
    power: u32,
    weight: f64,
    profile: CoefProfile,
}

/// How the explicit terms continue beyond the stored truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Extension {
    /// The stored terms are the whole series.
    None,
    /// `b_{2i+1} = 1/i!` for `i >= from_index` (the series of `s e^{s^2}`).
    OddExp { from_index: u32 },
}

/// Evaluation result: the partial sum and a remainder estimate for the
/// truncated tail.
#[derive(Debug, Clone, Copy)]
pub struct GEval {
    pub value: f64,
    pub remainder: f64,
}

/// Majorising function `g(t, s) = sum_k b_k(t) s^k` with `b_k >= 0`.
#[derive(Debug, Clone)]
pub struct MajorisingSeries {
    terms: Vec<MajorTerm>,
    extension: Extension,
}

impl MajorisingSeries {
    /// The zero series.
    pub fn zero() -> Self {
        Self {
            terms: Vec::new(),
            extension: Extension::None,
        }
    }

    /// A single constant-in-time term `weight * s^power`.
    pub fn single_term(power: u32, weight: f64) -> Self {
        Self {
            terms: vec![MajorTerm {
                power,
                weight: weight.abs(),
                profile: CoefProfile::Constant(1.0),
            }],
            extension: Extension::None,
        }
    }

    /// Coefficient `b_k(t)` of the series, including extension terms.
    pub fn coefficient(&self, k: u32, t: f64) -> f64 {
        let mut b = 0.0;
        for term in &self.terms {
            if term.power == k {
                b += term.weight * term.profile.eval(t).abs();
            }
        }
        if let Extension::OddExp { from_index } = self.extension {
            if k % 2 == 1 {
                let i = (k - 1) / 2;
                if i >= from_index {
                    b += 1.0 / factorial(i);
                }
            }
        }
        b
    }

    /// Evaluates `g(t, s)`; monotone nondecreasing in `s >= 0`. The returned
    /// remainder estimates the truncated tail (zero for finite series).
    pub fn eval(&self, t: f64, s: f64) -> Result<GEval> {
        if !(s >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "majorising series argument must be >= 0, got {s}"
            )));
        }
        let mut value = 0.0f64;
        for term in &self.terms {
            value += term.weight * term.profile.eval(t).abs() * s.powi(term.power as i32);
        }
        let mut remainder = 0.0f64;
        if let Extension::OddExp { from_index } = self.extension {
            // sum s^{2i+1}/i! from i = from_index until negligible
            let mut i = from_index;
            let mut term = s.powi((2 * from_index + 1) as i32) / factorial(from_index);
            let mut guard = 0usize;
            if s > 0.0 {
                loop {
                    value += term;
                    if !value.is_finite() {
                        return Err(Error::EvalOverflow {
                            index: i as usize,
                            value: s,
                        });
                    }
                    let ratio = s * s / (i + 1) as f64;
                    if term <= 1e-16 * value.max(f64::MIN_POSITIVE) && ratio < 1.0 {
                        remainder = term * ratio / (1.0 - ratio);
                        break;
                    }
                    term *= ratio;
                    i += 1;
                    guard += 1;
                    if guard > 100_000 {
                        return Err(Error::SeriesDivergence {
                            s,
                            ratio,
                            k: i as usize,
                        });
                    }
                }
            }
        }
        if !value.is_finite() {
            return Err(Error::EvalOverflow { index: 0, value: s });
        }
        Ok(GEval { value, remainder })
    }

    /// Shorthand for the value of [`MajorisingSeries::eval`].
    pub fn value(&self, t: f64, s: f64) -> Result<f64> {
        Ok(self.eval(t, s)?.value)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty() && self.extension == Extension::None
    }
}

fn factorial(i: u32) -> f64 {
    (1..=i).fold(1.0f64, |acc, v| acc * v as f64)
}

/// Builds the majorising series of a nonlinearity for Sobolev order `p` and
/// split index `m`: `b_k(t) = sum_j |a_{jk}(t)| (1+|j|^2)^{p/2} e^{lambda |j'|}`.
/// x-independent forms contribute only the `j = 0` term with unit weight.
pub fn majorising_g(spec: &NonlinearitySpec, p: f64, split: usize) -> Result<MajorisingSeries> {
    spec.validate()?;
    match spec {
        NonlinearitySpec::Zero => Ok(MajorisingSeries::zero()),
        NonlinearitySpec::Monomial { k, .. } => Ok(MajorisingSeries::single_term(*k, 1.0)),
        NonlinearitySpec::PowerSeries { coefficients } => {
            let terms = coefficients
                .iter()
                .enumerate()
                .map(|(k, profile)| MajorTerm {
                    power: k as u32,
                    weight: 1.0,
                    profile: profile.clone(),
                })
                .collect();
            Ok(MajorisingSeries {
                terms,
                extension: Extension::None,
            })
        }
        NonlinearitySpec::ExpCubic => Ok(MajorisingSeries {
            terms: Vec::new(),
            extension: Extension::OddExp { from_index: 0 },
        }),
        NonlinearitySpec::SpatialSeries { modes, lambda } => {
            let mut terms = Vec::new();
            for mode in modes {
                if split > mode.j.len() {
                    return Err(Error::InvalidParameter(
                        "split index exceeds spatial mode dimension".into(),
                    ));
                }
                let abs2: f64 = mode.j.iter().map(|&c| (c * c) as f64).sum();
                let jp: f64 = mode.j[..split]
                    .iter()
                    .map(|&c| (c * c) as f64)
                    .sum::<f64>()
                    .sqrt();
                let weight = (1.0 + abs2).powf(p / 2.0) * (lambda * jp).exp();
                if !weight.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "majorising weight overflow at mode {:?}",
                        mode.j
                    )));
                }
                for (k, profile) in mode.coefficients.iter().enumerate() {
                    terms.push(MajorTerm {
                        power: k as u32,
                        weight,
                        profile: profile.clone(),
                    });
                }
            }
            Ok(MajorisingSeries {
                terms,
                extension: Extension::None,
            })
        }
    }
}

/// One term of a multivariate majorising series over `(s_0, ..., s_{n+1})`.
#[derive(Debug, Clone)]
pub struct MultiTerm {
    pub beta: Vec<u32>,
    pub weight: f64,
    pub profile: CoefProfile,
}

/// Multivariate majorising function
/// `g(t, s_0, ..., s_{n+1}) = sum_beta b_beta(t) prod s_i^{beta_i}`,
/// supporting the kappa/psi evaluations of the general-nonlinearity bound.
#[derive(Debug, Clone)]
pub struct MultiMajorisingSeries {
    num_args: usize,
    terms: Vec<MultiTerm>,
    /// Truncations of entire series are faithful only up to this argument.
    s_valid: Option<f64>,
}

impl MultiMajorisingSeries {
    pub fn new(num_args: usize, terms: Vec<MultiTerm>) -> Result<Self> {
        for t in &terms {
            if t.beta.len() != num_args {
                return Err(Error::InvalidParameter(
                    "multi-index length must equal the number of arguments".into(),
                ));
            }
            if !t.weight.is_finite() || t.weight < 0.0 {
                return Err(Error::InvalidParameter(
                    "multivariate weights must be finite and >= 0".into(),
                ));
            }
            t.profile.validate()?;
        }
        Ok(Self {
            num_args,
            terms,
            s_valid: None,
        })
    }

    /// Lifts a `u`-only nonlinearity into `n + 2` arguments (all powers land
    /// on `s_0`). Entire series are materialized adaptively so the truncation
    /// error at `s_max` stays below 1e-12 of the partial sum.
    pub fn from_u_nonlinearity(
        spec: &NonlinearitySpec,
        p: f64,
        split: usize,
        num_args: usize,
        s_max: f64,
    ) -> Result<Self> {
        let g = majorising_g(spec, p, split)?;
        let mut terms = Vec::new();
        for term in &g.terms {
            let mut beta = vec![0u32; num_args];
            beta[0] = term.power;
            terms.push(MultiTerm {
                beta,
                weight: term.weight,
                profile: term.profile.clone(),
            });
        }
        let mut truncated_entire = false;
        if let Extension::OddExp { from_index } = g.extension {
            // materialize until the remainder at s_max is negligible; work in
            // log space so huge powers and tiny factorials do not overflow
            truncated_entire = true;
            let ln_s = s_max.max(1e-12).ln();
            let mut ln_fact = 0.0f64;
            for i in 1..=from_index {
                ln_fact += (i as f64).ln();
            }
            let mut i = from_index;
            loop {
                let k = 2 * i + 1;
                let w = (-ln_fact).exp();
                let mut beta = vec![0u32; num_args];
                beta[0] = k;
                terms.push(MultiTerm {
                    beta,
                    weight: w,
                    profile: CoefProfile::Constant(1.0),
                });
                let ln_term = k as f64 * ln_s - ln_fact;
                let ratio = s_max * s_max / (i + 1) as f64;
                if ln_term <= (1e-12f64).ln() && ratio < 1.0 {
                    break;
                }
                i += 1;
                ln_fact += (i as f64).ln();
                if i > 5_000 {
                    return Err(Error::SeriesDivergence {
                        s: s_max,
                        ratio,
                        k: k as usize,
                    });
                }
            }
        }
        let mut series = Self::new(num_args, terms)?;
        if truncated_entire {
            series.s_valid = Some(s_max);
        }
        Ok(series)
    }

    pub fn num_args(&self) -> usize {
        self.num_args
    }

    /// Evaluates `g(t, s)`; every `s_i` must be nonnegative.
    pub fn eval(&self, t: f64, s: &[f64]) -> Result<f64> {
        if s.len() != self.num_args {
            return Err(Error::InvalidParameter(format!(
                "expected {} arguments, got {}",
                self.num_args,
                s.len()
            )));
        }
        if s.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::InvalidParameter(
                "multivariate arguments must be >= 0".into(),
            ));
        }
        if let Some(limit) = self.s_valid {
            if s.iter().any(|&v| v > limit) {
                return Err(Error::SeriesDivergence {
                    s: s.iter().cloned().fold(0.0, f64::max),
                    ratio: f64::INFINITY,
                    k: 0,
                });
            }
        }
        let mut value = 0.0f64;
        for term in &self.terms {
            let mut prod = term.weight * term.profile.eval(t).abs();
            if prod == 0.0 {
                continue;
            }
            for (&si, &bi) in s.iter().zip(&term.beta) {
                if bi > 0 {
                    prod *= si.powi(bi as i32);
                }
            }
            value += prod;
        }
        if !value.is_finite() {
            return Err(Error::EvalOverflow {
                index: 0,
                value: s.iter().cloned().fold(0.0, f64::max),
            });
        }
        Ok(value)
    }

    /// Evaluates with all arguments set to the same value.
    pub fn eval_uniform(&self, t: f64, s: f64) -> Result<f64> {
        self.eval(t, &vec![s; self.num_args])
    }
}
