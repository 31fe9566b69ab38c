//! Time integration of the Galerkin mode system
//! `u_j'' = -omega_j^2 u_j - (P_N f)_j` with a leapfrog (Stormer-Verlet)
//! default and an RK4 cross-check integrator, plus the conserved-energy
//! diagnostic for the Klein-Gordon family.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::lattice::Lattice;
use crate::nonlinearity::{eval_f, NonlinearitySpec};
use crate::norms::{norm_hp, norm_l1, NormKind, NormSeries};
use crate::transform::{from_grid, mean_power, to_grid_with_min_points};

/// Dispersion relation of the linear part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dispersion {
    /// `box u + u + f = 0`: `omega_j^2 = 1 + |j|^2`.
    Standard,
    /// `u_tt - nu u_xx + lambda u + f = 0`: `omega_j^2 = nu |j|^2 + lambda`.
    KleinGordon { nu: f64, lambda: f64 },
}

impl Dispersion {
    pub fn omega_sq(&self, abs2: f64) -> f64 {
        match self {
            Dispersion::Standard => 1.0 + abs2,
            Dispersion::KleinGordon { nu, lambda } => nu * abs2 + lambda,
        }
    }

    /// Largest mode frequency on the cube `|j_i| <= N`.
    pub fn max_omega(&self, lattice: &Lattice) -> f64 {
        let n = lattice.max_mode() as f64;
        let abs2_max = lattice.dim() as f64 * n * n;
        self.omega_sq(abs2_max).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if let Dispersion::KleinGordon { nu, lambda } = self {
            if !(*nu >= 0.0) || !nu.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "wave-speed coefficient nu must be >= 0, got {nu}"
                )));
            }
            if !(*lambda > 0.0) || !lambda.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "mass coefficient lambda must be > 0, got {lambda}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Leapfrog,
    Rk4,
}

/// Leapfrog is stable for `dt * omega_max < 2`; keep a documented margin.
pub const CFL_CONSTANT: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_final: f64,
    pub integrator: Integrator,
    pub dispersion: Dispersion,
    /// Abort when any coefficient modulus exceeds this.
    pub blowup_coeff_limit: f64,
    /// Abort when the energy exceeds this factor times its initial value.
    pub blowup_energy_factor: f64,
}

impl SolverConfig {
    pub fn new(dt: f64, t_final: f64, integrator: Integrator, dispersion: Dispersion) -> Self {
        Self {
            dt,
            t_final,
            integrator,
            dispersion,
            blowup_coeff_limit: 1e12,
            blowup_energy_factor: 1e12,
        }
    }

    /// Largest stable time step `c_cfl / omega_max` on this lattice.
    pub fn stability_limit(&self, lattice: &Lattice) -> f64 {
        CFL_CONSTANT / self.dispersion.max_omega(lattice)
    }

    pub fn validate(&self, lattice: &Lattice) -> Result<()> {
        self.dispersion.validate()?;
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter("dt must be positive".into()));
        }
        if !(self.t_final >= 0.0) {
            return Err(Error::InvalidParameter("t_final must be >= 0".into()));
        }
        let limit = self.stability_limit(lattice);
        if self.dt > limit {
            return Err(Error::InvalidParameter(format!(
                "dt = {} exceeds the leapfrog stability bound {limit:.6e} on this lattice",
                self.dt
            )));
        }
        Ok(())
    }
}

/// The `(u, u_t, t)` state evolved by the solver.
#[derive(Debug, Clone)]
pub struct WaveState {
    pub u: SpectralField,
    pub v: SpectralField,
    pub t: f64,
}

impl WaveState {
    pub fn new(u: SpectralField, v: SpectralField, t: f64) -> Result<Self> {
        if u.lattice() != v.lattice() {
            return Err(Error::InvalidParameter(
                "u and u_t must share one lattice".into(),
            ));
        }
        u.require_real()?;
        v.require_real()?;
        Ok(Self { u, v, t })
    }

    pub fn rest(u: SpectralField) -> Result<Self> {
        let v = SpectralField::zero(u.lattice().clone());
        Self::new(u, v, 0.0)
    }

    pub fn lattice(&self) -> &Lattice {
        self.u.lattice()
    }
}

/// Precomputed right-hand side `a(u, t) = -omega^2 u - P_N f(t, x, u)`.
struct Rhs<'a> {
    spec: &'a NonlinearitySpec,
    omega_sq: Vec<f64>,
    grid_points: usize,
    lattice: Lattice,
}

impl<'a> Rhs<'a> {
    fn new(spec: &'a NonlinearitySpec, dispersion: &Dispersion, lattice: &Lattice) -> Self {
        let (one_plus_abs2, _) = lattice.geometry();
        let omega_sq = one_plus_abs2
            .iter()
            .map(|w| dispersion.omega_sq(w - 1.0))
            .collect();
        // Monomial degree k dealiases exactly with (k+1)/2 oversampling;
        // entire nonlinearities use the same rule at their working degree
        // (a documented approximation measured by `alias_residual`).
        let k = spec.degree().max(1) as usize;
        let grid_points = k * lattice.max_mode() + lattice.max_mode() + 1;
        Self {
            spec,
            omega_sq,
            grid_points,
            lattice: lattice.clone(),
        }
    }

    fn accel(&self, u: &SpectralField, t: f64) -> Result<SpectralField> {
        let mut acc = SpectralField::zero(self.lattice.clone());
        if !self.spec.is_zero() {
            let grid = to_grid_with_min_points(u, self.grid_points)?;
            let f_grid = eval_f(self.spec, &grid, t)?;
            let f_spec = from_grid(&f_grid, &self.lattice)?;
            for (a, f) in acc.coeffs_mut().iter_mut().zip(f_spec.coeffs()) {
                *a = -f;
            }
        }
        for ((a, &w), c) in acc
            .coeffs_mut()
            .iter_mut()
            .zip(&self.omega_sq)
            .zip(u.coeffs())
        {
            *a -= c * w;
        }
        Ok(acc)
    }
}

fn axpy(y: &mut SpectralField, alpha: f64, x: &SpectralField) {
    for (a, b) in y.coeffs_mut().iter_mut().zip(x.coeffs()) {
        *a += alpha * b;
    }
}

fn check_finite(state: &WaveState, limit: f64) -> Result<()> {
    let max = state.u.max_modulus().max(state.v.max_modulus());
    if !max.is_finite() || max > limit {
        return Err(Error::Divergence {
            t: state.t,
            detail: format!("coefficient modulus reached {max:.3e}"),
        });
    }
    Ok(())
}

/// One explicit integrator step. The leapfrog form is velocity Verlet; it
/// evaluates the force twice here, while [`run`] reuses the cached force
/// between steps.
pub fn step(state: &WaveState, spec: &NonlinearitySpec, cfg: &SolverConfig) -> Result<WaveState> {
    cfg.validate(state.lattice())?;
    spec.validate()?;
    let rhs = Rhs::new(spec, &cfg.dispersion, state.lattice());
    let acc = rhs.accel(&state.u, state.t)?;
    let next = step_with_accel(state, &rhs, &acc, cfg.dt)?.0;
    check_finite(&next, cfg.blowup_coeff_limit)?;
    Ok(next)
}

/// Velocity-Verlet step given the force at the current state; returns the
/// new state and the force at the new state (reusable next step).
fn step_with_accel(
    state: &WaveState,
    rhs: &Rhs,
    acc: &SpectralField,
    dt: f64,
) -> Result<(WaveState, SpectralField)> {
    let mut v_half = state.v.clone();
    axpy(&mut v_half, 0.5 * dt, acc);
    let mut u_new = state.u.clone();
    axpy(&mut u_new, dt, &v_half);
    let t_new = state.t + dt;
    let acc_new = rhs.accel(&u_new, t_new)?;
    let mut v_new = v_half;
    axpy(&mut v_new, 0.5 * dt, &acc_new);
    Ok((
        WaveState {
            u: u_new,
            v: v_new,
            t: t_new,
        },
        acc_new,
    ))
}

fn rk4_step(state: &WaveState, rhs: &Rhs, dt: f64) -> Result<WaveState> {
    let (u0, v0, t0) = (&state.u, &state.v, state.t);
    // k1
    let ka1 = rhs.accel(u0, t0)?;
    // k2: u + dt/2 v, v + dt/2 ka1
    let mut u2 = u0.clone();
    axpy(&mut u2, 0.5 * dt, v0);
    let ka2 = rhs.accel(&u2, t0 + 0.5 * dt)?;
    let mut v2 = v0.clone();
    axpy(&mut v2, 0.5 * dt, &ka1);
    // k3: u + dt/2 v2, v + dt/2 ka2
    let mut u3 = u0.clone();
    axpy(&mut u3, 0.5 * dt, &v2);
    let ka3 = rhs.accel(&u3, t0 + 0.5 * dt)?;
    let mut v3 = v0.clone();
    axpy(&mut v3, 0.5 * dt, &ka2);
    // k4: u + dt v3, v + dt ka3
    let mut u4 = u0.clone();
    axpy(&mut u4, dt, &v3);
    let ka4 = rhs.accel(&u4, t0 + dt)?;
    let mut v4 = v0.clone();
    axpy(&mut v4, dt, &ka3);

    // combine: u' = v, v' = a
    let mut u_new = u0.clone();
    axpy(&mut u_new, dt / 6.0, v0);
    axpy(&mut u_new, dt / 3.0, &v2);
    axpy(&mut u_new, dt / 3.0, &v3);
    axpy(&mut u_new, dt / 6.0, &v4);
    let mut v_new = v0.clone();
    axpy(&mut v_new, dt / 6.0, &ka1);
    axpy(&mut v_new, dt / 3.0, &ka2);
    axpy(&mut v_new, dt / 3.0, &ka3);
    axpy(&mut v_new, dt / 6.0, &ka4);
    Ok(WaveState {
        u: u_new,
        v: v_new,
        t: t0 + dt,
    })
}

/// Whether the conserved-energy diagnostic applies to this nonlinearity.
pub fn supports_energy(spec: &NonlinearitySpec) -> bool {
    matches!(
        spec,
        NonlinearitySpec::Zero | NonlinearitySpec::Monomial { .. }
    )
}

/// Energy diagnostic
/// `E = 1/2 sum_j (|v_j|^2 + omega_j^2 |u_j|^2) + sign/(k+1) (2pi)^{-n} int u^{k+1} dx`,
/// conserved by the continuum Galerkin flow for the monomial family.
pub fn energy_kg(
    state: &WaveState,
    spec: &NonlinearitySpec,
    dispersion: &Dispersion,
) -> Result<f64> {
    let (one_plus_abs2, _) = state.lattice().geometry();
    let mut quad = 0.0f64;
    for ((cu, cv), w) in state
        .u
        .coeffs()
        .iter()
        .zip(state.v.coeffs())
        .zip(&one_plus_abs2)
    {
        quad += cv.norm_sqr() + dispersion.omega_sq(w - 1.0) * cu.norm_sqr();
    }
    let potential = match spec {
        NonlinearitySpec::Zero => 0.0,
        NonlinearitySpec::Monomial { sign, k } => {
            sign.factor() / (*k as f64 + 1.0) * mean_power(&state.u, k + 1)?
        }
        _ => {
            return Err(Error::InvalidParameter(
                "energy diagnostic is defined for the monomial family only".into(),
            ))
        }
    };
    Ok(0.5 * quad + potential)
}

/// What [`run`] records along the trajectory.
#[derive(Debug, Clone)]
pub struct Observables {
    /// Sobolev order of the recorded norms.
    pub p: f64,
    /// Record every `stride` steps (plus the initial and final states).
    pub stride: usize,
    /// Keep spectral snapshots of `u` for radius fitting.
    pub keep_snapshots: bool,
}

impl Default for Observables {
    fn default() -> Self {
        Self {
            p: 1.0,
            stride: 10,
            keep_snapshots: true,
        }
    }
}

/// Everything recorded by a run: sample times, norm series, optional energy
/// series, spectral snapshots, and the final state. A diverged run still
/// returns its partial record with `diverged` set, so the series can be
/// flushed before the caller aborts.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub hp: NormSeries,
    pub hp1: NormSeries,
    pub ut_hp: NormSeries,
    pub l1: NormSeries,
    pub energy: Option<NormSeries>,
    pub snapshots: Vec<(f64, SpectralField)>,
    pub final_state: WaveState,
    pub steps_taken: usize,
    pub diverged: Option<(f64, String)>,
}

impl RunRecord {
    pub fn sample_times(&self) -> Vec<f64> {
        self.hp.times()
    }
}

/// Advances the state to `t_final`, recording observables at the sampling
/// stride. Partial series are flushed into the error on divergence.
pub fn run(
    initial: WaveState,
    spec: &NonlinearitySpec,
    cfg: &SolverConfig,
    obs: &Observables,
) -> Result<RunRecord> {
    cfg.validate(initial.lattice())?;
    spec.validate()?;
    let rhs = Rhs::new(spec, &cfg.dispersion, initial.lattice());
    let with_energy = supports_energy(spec);

    let mut record = RunRecord {
        hp: NormSeries::new(NormKind::Hp),
        hp1: NormSeries::new(NormKind::HpPlus1),
        ut_hp: NormSeries::new(NormKind::UtHp),
        l1: NormSeries::new(NormKind::L1),
        energy: with_energy.then(|| NormSeries::new(NormKind::Energy)),
        snapshots: Vec::new(),
        final_state: initial.clone(),
        steps_taken: 0,
        diverged: None,
    };

    let e0 = if with_energy {
        Some(energy_kg(&initial, spec, &cfg.dispersion)?)
    } else {
        None
    };

    let sample = |record: &mut RunRecord, state: &WaveState| -> Result<()> {
        record.hp.push(state.t, norm_hp(&state.u, obs.p))?;
        record.hp1.push(state.t, norm_hp(&state.u, obs.p + 1.0))?;
        record.ut_hp.push(state.t, norm_hp(&state.v, obs.p))?;
        record.l1.push(state.t, norm_l1(&state.u))?;
        if let Some(series) = record.energy.as_mut() {
            let e = energy_kg(state, spec, &cfg.dispersion)?;
            // energies can be negative for the focusing sign; store shifted
            // magnitude? No: keep the raw value but NormSeries requires
            // nonnegative values, so record |E| drift-compatible magnitude.
            series.push(state.t, e.abs())?;
            if let Some(e0) = e0 {
                let limit = cfg.blowup_energy_factor * e0.abs().max(1e-300);
                if e.abs() > limit {
                    return Err(Error::Divergence {
                        t: state.t,
                        detail: format!("energy reached {e:.3e}"),
                    });
                }
            }
        }
        if obs.keep_snapshots {
            record.snapshots.push((state.t, state.u.clone()));
        }
        Ok(())
    };

    sample(&mut record, &initial)?;

    if cfg.t_final == 0.0 {
        return Ok(record);
    }

    let steps = (cfg.t_final / cfg.dt - 1e-9).ceil().max(1.0) as usize;
    let mut state = initial;
    let mut acc = match cfg.integrator {
        Integrator::Leapfrog => Some(rhs.accel(&state.u, state.t)?),
        Integrator::Rk4 => None,
    };
    for step_idx in 1..=steps {
        // land exactly on t_final at the last step
        let dt = if step_idx == steps {
            cfg.t_final - state.t
        } else {
            cfg.dt
        };
        match cfg.integrator {
            Integrator::Leapfrog => {
                let (next, acc_new) =
                    step_with_accel(&state, &rhs, acc.as_ref().expect("leapfrog cache"), dt)?;
                state = next;
                acc = Some(acc_new);
            }
            Integrator::Rk4 => {
                state = rk4_step(&state, &rhs, dt)?;
            }
        }
        record.steps_taken = step_idx;
        if let Err(Error::Divergence { t, detail }) = check_finite(&state, cfg.blowup_coeff_limit)
        {
            record.diverged = Some((t, detail));
            record.final_state = state;
            return Ok(record);
        }
        if step_idx.is_multiple_of(obs.stride) || step_idx == steps {
            match sample(&mut record, &state) {
                Ok(()) => {}
                Err(Error::Divergence { t, detail }) => {
                    record.diverged = Some((t, detail));
                    record.final_state = state;
                    return Ok(record);
                }
                Err(e) => return Err(e),
            }
        }
    }
    record.final_state = state;
    Ok(record)
}

/// Initial data helper: `amplitude * cos(mode * x_1)` at rest.
pub fn cosine_datum(lattice: &Lattice, mode: i64, amplitude: f64) -> SpectralField {
    let mut u = SpectralField::zero(lattice.clone());
    let mut j = vec![0i64; lattice.dim()];
    j[0] = mode;
    u.set(&j, Complex64::new(amplitude / 2.0, 0.0));
    j[0] = -mode;
    u.set(&j, Complex64::new(amplitude / 2.0, 0.0));
    u
}
