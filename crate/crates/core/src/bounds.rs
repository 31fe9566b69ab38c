//! The analyticity-radius lower-bound family.
//!
//! Each bound integrates a separable ODE `tau' = -tau^q h(t)` whose
//! right-hand side is assembled from recorded norm series and the
//! majorising function of the nonlinearity:
//!
//! - `q = 3` with `h = C1 g(t, C0(sqrt2 xi + 1)) xi` (Gevrey-Sobolev energy
//!   bound for `f(t, x, u)`);
//! - `q = 1` with the `eta` built from `kappa`/`psi` (general nonlinearity);
//! - `q = 2` with `h-tilde` (Wiener-algebra bound);
//! - `q = k + 1` with `h1`/`h2` (monomial Klein-Gordon comparisons).
//!
//! Every curve is produced by the closed form of the separable ODE and
//! cross-validated against an RK4 integration of the same ODE.

use crate::error::{Error, Result};
use crate::nonlinearity::{MajorisingSeries, MultiMajorisingSeries};
use crate::norms::NormSeries;

const E: f64 = std::f64::consts::E;

/// Relative disagreement allowed between the closed form and RK4.
pub const CROSS_CHECK_TOL: f64 = 1e-8;

/// Default RK4 substep for the cross-check integrations.
pub const RK4_DT: f64 = 1e-3;

/// A sampled function of time on a strictly increasing grid.
#[derive(Debug, Clone)]
pub struct Sampled {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
}

impl Sampled {
    pub fn new(t: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if t.len() != v.len() || t.is_empty() {
            return Err(Error::InvalidParameter(
                "sampled series needs equal-length, nonempty grids".into(),
            ));
        }
        if !t.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "sample times must be strictly increasing".into(),
            ));
        }
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter("sample values must be finite".into()));
        }
        Ok(Self { t, v })
    }

    pub fn constant(t: Vec<f64>, value: f64) -> Result<Self> {
        let v = vec![value; t.len()];
        Self::new(t, v)
    }

    pub fn from_norm_series(series: &NormSeries) -> Result<Self> {
        Self::new(series.times(), series.values())
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Cumulative composite-trapezoid integral on the sample grid.
    pub fn cumulative_trapezoid(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        let mut acc = 0.0f64;
        out.push(0.0);
        for i in 1..self.len() {
            acc += 0.5 * (self.v[i - 1] + self.v[i]) * (self.t[i] - self.t[i - 1]);
            out.push(acc);
        }
        out
    }

    /// Piecewise-linear interpolation, clamped at the ends.
    pub fn interp(&self, t: f64) -> f64 {
        if t <= self.t[0] {
            return self.v[0];
        }
        if t >= *self.t.last().unwrap() {
            return *self.v.last().unwrap();
        }
        let i = self.t.partition_point(|&ti| ti <= t) - 1;
        let w = (t - self.t[i]) / (self.t[i + 1] - self.t[i]);
        self.v[i] * (1.0 - w) + self.v[i + 1] * w
    }

    fn same_grid(&self, other: &Sampled) -> bool {
        self.t.len() == other.t.len()
            && self
                .t
                .iter()
                .zip(&other.t)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0))
    }
}

/// Resolved constants entering the bounds.
#[derive(Debug, Clone, Copy)]
pub struct BoundConstants {
    /// Algebra constant of the Gevrey product inequality.
    pub c0: f64,
    /// Composition constant, `1 + 1/C0`.
    pub c1: f64,
    /// Multivariate composition constant (same choice as `c1`).
    pub c_tilde: f64,
    /// Initial radius parameter `tau0 = min(sigma, lambda)`.
    pub tau0: f64,
    /// `y(0)`, the weighted mode-energy sum of the datum.
    pub y0_small: f64,
    /// `Y0`, the Gevrey energy of the datum.
    pub y0_big: f64,
}

impl BoundConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("C0", self.c0),
            ("C1", self.c1),
            ("C_tilde", self.c_tilde),
            ("tau0", self.tau0),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "bound constant {name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(self.y0_small >= 0.0) || !(self.y0_big >= 0.0) {
            return Err(Error::InvalidParameter(
                "initial Gevrey quantities must be nonnegative and finite".into(),
            ));
        }
        Ok(())
    }
}

/// Time-aligned norm series plus constants: everything a bound needs.
#[derive(Debug, Clone)]
pub struct BoundInputs {
    /// `|u(t)|_{H^p}`
    pub hp: Sampled,
    /// `|u(t)|_{H^{p+1}}`
    pub hp1: Sampled,
    /// `|u_t(t)|_{H^p}`
    pub ut_hp: Sampled,
    /// `|u-hat(t)|_{l1}`
    pub l1: Sampled,
    pub consts: BoundConstants,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        self.consts.validate()?;
        for s in [&self.hp1, &self.ut_hp, &self.l1] {
            if !self.hp.same_grid(s) {
                return Err(Error::InvalidParameter(
                    "bound input series are not time-aligned".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Which bound produced a tau curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BoundLabel {
    Thm1,
    Thm2,
    Thm3,
    Prop2,
    Prop3,
    Measured,
}

impl BoundLabel {
    pub fn label(&self) -> &'static str {
        match self {
            BoundLabel::Thm1 => "thm1",
            BoundLabel::Thm2 => "thm2",
            BoundLabel::Thm3 => "thm3",
            BoundLabel::Prop2 => "prop2",
            BoundLabel::Prop3 => "prop3",
            BoundLabel::Measured => "measured",
        }
    }
}

/// A sampled radius-of-analyticity curve.
#[derive(Debug, Clone)]
pub struct TauCurve {
    pub label: BoundLabel,
    pub t: Vec<f64>,
    pub tau: Vec<f64>,
}

impl TauCurve {
    /// Bound curves must stay positive and never increase.
    pub fn check_positive_nonincreasing(&self) -> Result<()> {
        for (i, &v) in self.tau.iter().enumerate() {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "tau curve {} has a nonpositive sample at t = {}",
                    self.label.label(),
                    self.t[i]
                )));
            }
            if i > 0 && v > self.tau[i - 1] * (1.0 + 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "tau curve {} increases at t = {}",
                    self.label.label(),
                    self.t[i]
                )));
            }
        }
        Ok(())
    }
}

/// Closed form of `tau' = -tau^q h(t)`, `tau(0) = tau0`, on the sample grid
/// of `h`: exponential for `q = 1`, otherwise
/// `((q-1) int h + tau0^{-(q-1)})^{-1/(q-1)}`. Exponent underflow floors at
/// the smallest positive f64 so curves stay positive.
pub fn tau_closed_form(q: u32, h: &Sampled, tau0: f64) -> Vec<f64> {
    let cum = h.cumulative_trapezoid();
    if q == 1 {
        cum.iter()
            .map(|&i| (tau0 * (-i).exp()).max(f64::MIN_POSITIVE))
            .collect()
    } else {
        let qm1 = (q - 1) as f64;
        cum.iter()
            .map(|&i| {
                (qm1 * i + tau0.powf(-qm1))
                    .powf(-1.0 / qm1)
                    .max(f64::MIN_POSITIVE)
            })
            .collect()
    }
}

/// RK4 integration of `tau' = -tau^q h(t)` through the piecewise-linear
/// interpolant of `h`. Substeps are bounded by `dt_max` and by the local
/// relaxation rate `q tau^{q-1} h` (run-scale `h` values make the initial
/// transient stiff; the rate cap keeps the explicit integration accurate).
/// For `q = 1` the integration runs on `ln tau`, where the ODE is linear.
pub fn tau_rk4(q: u32, h: &Sampled, tau0: f64, dt_max: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(h.len());
    // state: tau for q >= 2, ln tau for q = 1
    let log_space = q == 1;
    let mut y = if log_space { tau0.ln() } else { tau0 };
    out.push(tau0);
    let rhs = |t: f64, y: f64| -> f64 {
        let hv = h.interp(t);
        if log_space {
            -hv
        } else {
            -y.abs().powi(q as i32 - 1) * y * hv
        }
    };
    let mut budget: usize = 50_000_000;
    for i in 1..h.len() {
        let (t0, t1) = (h.t[i - 1], h.t[i]);
        let mut t = t0;
        while t < t1 && budget > 0 {
            budget -= 1;
            let dt = if log_space {
                dt_max.min(t1 - t)
            } else {
                // keep (local rate) * dt small enough for 1e-8 accuracy;
                // probe h one candidate step ahead since it can grow fast
                let tau_pow = q as f64 * y.abs().powi(q as i32 - 1);
                let dt1 = dt_max
                    .min(t1 - t)
                    .min(0.01 / (tau_pow * h.interp(t)).max(1e-300));
                let h_loc = h.interp(t).max(h.interp((t + dt1).min(t1)));
                dt_max.min(t1 - t).min(0.01 / (tau_pow * h_loc).max(1e-300))
            };
            let k1 = rhs(t, y);
            let k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1);
            let k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2);
            let k4 = rhs(t + dt, y + dt * k3);
            y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += dt;
        }
        out.push(if log_space {
            y.exp().max(f64::MIN_POSITIVE)
        } else {
            y.max(f64::MIN_POSITIVE)
        });
    }
    out
}

/// Builds a tau curve from `h` via the closed form and verifies the RK4
/// route agrees to `CROSS_CHECK_TOL` relative. For `q = 1` the comparison is
/// restricted to samples where `tau` is meaningfully representable
/// (cumulative exponent below ~30); beyond that both routes underflow.
fn tau_with_cross_check(
    label: BoundLabel,
    q: u32,
    h: &Sampled,
    tau0: f64,
) -> Result<TauCurve> {
    let closed = tau_closed_form(q, h, tau0);
    let rk4 = tau_rk4(q, h, tau0, RK4_DT);
    let mut worst = 0.0f64;
    let cum = h.cumulative_trapezoid();
    for i in 0..closed.len() {
        if q == 1 && cum[i] > 30.0 {
            continue;
        }
        let rel = (closed[i] - rk4[i]).abs() / closed[i].max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
    }
    if worst > CROSS_CHECK_TOL {
        return Err(Error::CrossCheckFailed {
            delta: worst,
            limit: CROSS_CHECK_TOL,
        });
    }
    let curve = TauCurve {
        label,
        t: h.t.clone(),
        tau: closed,
    };
    curve.check_positive_nonincreasing()?;
    Ok(curve)
}

/// `xi(t) = Y0 + C1 int_0^t g(s, C0 (sqrt2 e |u(s)|_{H^p} + 2)) ds`.
pub fn xi_series(inputs: &BoundInputs, g: &MajorisingSeries) -> Result<Sampled> {
    inputs.validate()?;
    let c = &inputs.consts;
    let mut integrand = Vec::with_capacity(inputs.hp.len());
    for (&t, &hp) in inputs.hp.t.iter().zip(&inputs.hp.v) {
        integrand.push(g.value(t, c.c0 * (2.0f64.sqrt() * E * hp + 2.0))?);
    }
    let tmp = Sampled::new(inputs.hp.t.clone(), integrand)?;
    let cum = tmp.cumulative_trapezoid();
    let xi = cum.iter().map(|&i| c.y0_big + c.c1 * i).collect();
    Sampled::new(inputs.hp.t.clone(), xi)
}

/// `h(t) = C1 g(t, C0 (sqrt2 xi(t) + 1)) xi(t)` from a precomputed `xi`.
pub fn h_series_from_xi(
    xi: &Sampled,
    g: &MajorisingSeries,
    c0: f64,
    c1: f64,
) -> Result<Sampled> {
    let mut h = Vec::with_capacity(xi.len());
    for (&t, &x) in xi.t.iter().zip(&xi.v) {
        h.push(c1 * g.value(t, c0 * (2.0f64.sqrt() * x + 1.0))? * x);
    }
    Sampled::new(xi.t.clone(), h)
}

/// `h(t)` of the Gevrey-Sobolev energy bound.
pub fn h_series(inputs: &BoundInputs, g: &MajorisingSeries) -> Result<Sampled> {
    let xi = xi_series(inputs, g)?;
    h_series_from_xi(&xi, g, inputs.consts.c0, inputs.consts.c1)
}

/// The `tau' = -tau^3 h` bound with closed form
/// `tau(t) = (2 int h + tau0^{-2})^{-1/2}`.
pub fn tau_theorem1(inputs: &BoundInputs, g: &MajorisingSeries) -> Result<TauCurve> {
    let h = h_series(inputs, g)?;
    tau_with_cross_check(BoundLabel::Thm1, 3, &h, inputs.consts.tau0)
}

/// `kappa(t) = C~ g(t, 2C0, ..., 2C0)
///           + (C~/2^{n+2}) g(t, 2eC0 |u|_{H^{p+1}}, ..., 2eC0 |u_t|_{H^p})`.
pub fn kappa_series(inputs: &BoundInputs, g: &MultiMajorisingSeries) -> Result<Sampled> {
    inputs.validate()?;
    let c = &inputs.consts;
    let n_args = g.num_args();
    let mut kappa = Vec::with_capacity(inputs.hp.len());
    for i in 0..inputs.hp.len() {
        let t = inputs.hp.t[i];
        let base = g.eval_uniform(t, 2.0 * c.c0)?;
        let mut args = vec![2.0 * E * c.c0 * inputs.hp1.v[i]; n_args];
        args[n_args - 1] = 2.0 * E * c.c0 * inputs.ut_hp.v[i];
        let norms = g.eval(t, &args)?;
        kappa.push(c.c_tilde * base + c.c_tilde / 2.0f64.powi(n_args as i32) * norms);
    }
    Sampled::new(inputs.hp.t.clone(), kappa)
}

/// `psi(t, |u|_{H^{p+1}}, |u_t|_{H^p}, gev_u, gev_ut) = 2 C~ g(t, args)` with
/// the first `n+1` arguments `2eC0 [1 + |u|_{H^{p+1}} + gev_u]^{n+2}` and the
/// last `2eC0 [1 + |u_t|_{H^p} + gev_ut]^{n+2}`.
pub fn psi_value(
    consts: &BoundConstants,
    g: &MultiMajorisingSeries,
    t: f64,
    norm_u: f64,
    norm_ut: f64,
    gev_u: f64,
    gev_ut: f64,
) -> Result<f64> {
    let n_args = g.num_args();
    let power = n_args as i32;
    let mut args = vec![2.0 * E * consts.c0 * (1.0 + norm_u + gev_u).powi(power); n_args];
    args[n_args - 1] = 2.0 * E * consts.c0 * (1.0 + norm_ut + gev_ut).powi(power);
    Ok(2.0 * consts.c_tilde * g.eval(t, &args)?)
}

/// `eta(t) = psi(t, |u|_{H^{p+1}}, |u_t|_{H^p}, Z(t), Z(t)) Z(t)` with
/// `Z(t) = Y0 + int_0^t kappa`.
pub fn eta_series(inputs: &BoundInputs, g: &MultiMajorisingSeries) -> Result<Sampled> {
    let kappa = kappa_series(inputs, g)?;
    let cum = kappa.cumulative_trapezoid();
    let c = &inputs.consts;
    let mut eta = Vec::with_capacity(kappa.len());
    for (i, &cum_i) in cum.iter().enumerate() {
        let z = c.y0_big + cum_i;
        let psi = psi_value(
            c,
            g,
            kappa.t[i],
            inputs.hp1.v[i],
            inputs.ut_hp.v[i],
            z,
            z,
        )?;
        let v = psi * z;
        if !v.is_finite() {
            return Err(Error::EvalOverflow { index: i, value: z });
        }
        eta.push(v);
    }
    Sampled::new(kappa.t.clone(), eta)
}

/// The exponential bound `tau(t) = tau0 e^{-int eta}` for general
/// nonlinearities.
pub fn tau_theorem2(inputs: &BoundInputs, g: &MultiMajorisingSeries) -> Result<TauCurve> {
    let eta = eta_series(inputs, g)?;
    tau_with_cross_check(BoundLabel::Thm2, 1, &eta, inputs.consts.tau0)
}

/// `h~(t) = g(t, 2 y(0) + 2 int_0^t g(s, 2e |u-hat(s)|_{l1}) ds + 1)`.
pub fn h_tilde_series(inputs: &BoundInputs, g: &MajorisingSeries) -> Result<Sampled> {
    inputs.validate()?;
    let c = &inputs.consts;
    let mut inner = Vec::with_capacity(inputs.l1.len());
    for (&t, &l1) in inputs.l1.t.iter().zip(&inputs.l1.v) {
        inner.push(g.value(t, 2.0 * E * l1)?);
    }
    let inner = Sampled::new(inputs.l1.t.clone(), inner)?;
    let cum = inner.cumulative_trapezoid();
    let mut h = Vec::with_capacity(inner.len());
    for (i, &t) in inner.t.iter().enumerate() {
        h.push(g.value(t, 2.0 * c.y0_small + 2.0 * cum[i] + 1.0)?);
    }
    Sampled::new(inner.t.clone(), h)
}

/// The Wiener-algebra bound `tau' = -tau^2 h~`, closed form
/// `tau(t) = (int h~ + tau0^{-1})^{-1}`.
pub fn tau_theorem3(inputs: &BoundInputs, g: &MajorisingSeries) -> Result<TauCurve> {
    let h = h_tilde_series(inputs, g)?;
    tau_with_cross_check(BoundLabel::Thm3, 2, &h, inputs.consts.tau0)
}

/// `h1(t) = (2 y(0) + 2^k e^k int_0^t |u-hat(s)|_{l1}^k ds)^{k-1}`.
pub fn h1_series(k: u32, y0_small: f64, l1: &Sampled) -> Result<Sampled> {
    if k < 2 {
        return Err(Error::InvalidParameter("monomial bound needs k >= 2".into()));
    }
    let integrand: Vec<f64> = l1.v.iter().map(|&v| v.powi(k as i32)).collect();
    let cum = Sampled::new(l1.t.clone(), integrand)?.cumulative_trapezoid();
    let factor = 2.0f64.powi(k as i32) * E.powi(k as i32);
    let h = cum
        .iter()
        .map(|&i| (2.0 * y0_small + factor * i).powi(k as i32 - 1))
        .collect();
    Sampled::new(l1.t.clone(), h)
}

/// `h2(t) = (C0 Y0 + (1/2) C0^k (e sqrt2)^k int_0^t |u(s)|_{H^p}^k ds)^{k-1}`.
pub fn h2_series(k: u32, y0_big: f64, c0: f64, hp: &Sampled) -> Result<Sampled> {
    if k < 2 {
        return Err(Error::InvalidParameter("monomial bound needs k >= 2".into()));
    }
    let integrand: Vec<f64> = hp.v.iter().map(|&v| v.powi(k as i32)).collect();
    let cum = Sampled::new(hp.t.clone(), integrand)?.cumulative_trapezoid();
    let factor = 0.5 * c0.powi(k as i32) * (E * 2.0f64.sqrt()).powi(k as i32);
    let h = cum
        .iter()
        .map(|&i| (c0 * y0_big + factor * i).powi(k as i32 - 1))
        .collect();
    Sampled::new(hp.t.clone(), h)
}

/// The monomial-family bound `tau' = -tau^{k+1} h`, closed form
/// `tau(t) = (k int h + tau0^{-k})^{-1/k}`.
pub fn tau_proposition(label: BoundLabel, k: u32, h: &Sampled, tau0: f64) -> Result<TauCurve> {
    tau_with_cross_check(label, k + 1, h, tau0)
}

/// The Wiener-algebra monomial bound from run inputs.
pub fn tau_prop2(inputs: &BoundInputs, k: u32) -> Result<TauCurve> {
    let h = h1_series(k, inputs.consts.y0_small, &inputs.l1)?;
    tau_proposition(BoundLabel::Prop2, k, &h, inputs.consts.tau0)
}

/// The L2-Gevrey monomial bound from run inputs.
pub fn tau_prop3(inputs: &BoundInputs, k: u32) -> Result<TauCurve> {
    let h = h2_series(k, inputs.consts.y0_big, inputs.consts.c0, &inputs.hp)?;
    tau_proposition(BoundLabel::Prop3, k, &h, inputs.consts.tau0)
}

/// Pointwise comparison of the two monomial bounds.
#[derive(Debug, Clone)]
pub struct CompareReport {
    pub t: Vec<f64>,
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    /// `h2 - h1`, nonnegative when the comparison theorem holds.
    pub margin: Vec<f64>,
    pub first_violation: Option<usize>,
}

impl CompareReport {
    pub fn ok(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Computes `h1`, `h2` from one run and checks `h1 <= h2` at every sample.
/// Precondition (consistency of the inputs): `y(0) <= (C0/2) Y0`.
pub fn compare_h1_h2(inputs: &BoundInputs, k: u32) -> Result<CompareReport> {
    inputs.validate()?;
    let c = &inputs.consts;
    let gate = 0.5 * c.c0 * c.y0_big;
    if c.y0_small > gate * (1.0 + 1e-9) + 1e-300 {
        return Err(Error::PreconditionViolated(format!(
            "y(0) = {} exceeds (C0/2) Y0 = {gate}; inputs are inconsistent",
            c.y0_small
        )));
    }
    let h1 = h1_series(k, c.y0_small, &inputs.l1)?;
    let h2 = h2_series(k, c.y0_big, c.c0, &inputs.hp)?;
    let mut margin = Vec::with_capacity(h1.len());
    let mut first_violation = None;
    for i in 0..h1.len() {
        let m = h2.v[i] - h1.v[i];
        if m < -1e-9 * h2.v[i].abs().max(1.0) && first_violation.is_none() {
            first_violation = Some(i);
        }
        margin.push(m);
    }
    Ok(CompareReport {
        t: h1.t,
        h1: h1.v,
        h2: h2.v,
        margin,
        first_violation,
    })
}

/// Local existence horizon
/// `T* = min( 1 / (C1 max_s g(s, C0 (|U0|_H + 1))), T )`; a vanishing `g`
/// makes the constraint vacuous and returns `T`.
pub fn compute_tstar(
    g: &MajorisingSeries,
    c0: f64,
    c1: f64,
    u0_norm: f64,
    t_grid: &[f64],
    t_final: f64,
) -> Result<f64> {
    let mut max_g = 0.0f64;
    for &t in t_grid {
        max_g = max_g.max(g.value(t, c0 * (u0_norm + 1.0))?);
    }
    if max_g == 0.0 {
        return Ok(t_final);
    }
    Ok((1.0 / (c1 * max_g)).min(t_final))
}
