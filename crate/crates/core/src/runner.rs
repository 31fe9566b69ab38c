//! Run orchestration: resolve constants, build initial data, drive the
//! solver, compute the requested bound curves and the measured radius,
//! check the run-level invariants, and emit CSV reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;

use crate::bounds::{
    compare_h1_h2, tau_prop2, tau_prop3, tau_theorem1, tau_theorem2, tau_theorem3, BoundConstants,
    BoundInputs, BoundLabel, CompareReport, Sampled, TauCurve,
};
use crate::config::{
    BoundName, EquationCfg, InitialCfg, PhaseCfg, RunConfig, TauZeroCfg,
};
use crate::constants::{constant_c0, constant_c1, lattice_sum_with_tail};
use crate::elliptic::EllipticModulus;
use crate::error::{Error, Result};
use crate::estimator::{fit_radius, DecayFit, FitOptions, RadiusFit};
use crate::field::SpectralField;
use crate::io;
use crate::lattice::Lattice;
use crate::nonlinearity::{
    majorising_g, MultiMajorisingSeries, NonlinearitySpec, Sign,
};
use crate::norms::{energy_y, y_l1, NormSeries};
use crate::sn_wave::{admissible_lambda, exact_sn_wave, SnWave};
use crate::solver::{
    run as solver_run, Dispersion, Observables, RunRecord, SolverConfig, WaveState,
};
use crate::transform::{from_grid, to_grid_with_min_points};

/// Constants resolved once per run and echoed into every report.
#[derive(Debug, Clone)]
pub struct ResolvedConstants {
    pub c0: f64,
    pub c1: f64,
    pub c_tilde: f64,
    pub tau0: f64,
    pub y0_small: f64,
    pub y0_big: f64,
    pub lattice_sum: f64,
    pub lattice_tail: f64,
    /// Torus-fitted mass coefficient when the sn datum pinned it.
    pub lambda_fit: Option<f64>,
    /// Measured alias residual for non-polynomial nonlinearities.
    pub alias_residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Everything a run produces.
#[derive(Debug)]
pub struct RunReport {
    pub constants: ResolvedConstants,
    pub series: Vec<NormSeries>,
    pub curves: Vec<TauCurve>,
    pub skipped_bounds: Vec<(BoundName, String)>,
    pub fits: Vec<(f64, DecayFit)>,
    pub omitted_fits: usize,
    pub verdicts: Vec<Verdict>,
    /// Informational key/value lines for the summary (e.g. solver-vs-exact
    /// errors on sn-wave runs).
    pub info: Vec<(String, String)>,
    /// Set when the solver aborted; partial series are still written.
    pub diverged: Option<(f64, String)>,
    /// Sampled snapshots kept for optional dumping.
    pub snapshots: Vec<(f64, SpectralField)>,
    pub final_state: WaveState,
    pub steps: usize,
    pub elapsed_seconds: f64,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.diverged.is_none() && self.verdicts.iter().all(|v| v.pass)
    }

    pub fn curve(&self, label: BoundLabel) -> Option<&TauCurve> {
        self.curves.iter().find(|c| c.label == label)
    }
}

/// Resolved equation pieces shared by the commands.
struct Prepared {
    lattice: Lattice,
    spec: NonlinearitySpec,
    dispersion: Dispersion,
    state: WaveState,
    sn_wave: Option<SnWave>,
    lambda_fit: Option<f64>,
    fit_opts: FitOptions,
}

fn traveling_velocity(u: &SpectralField, dispersion: &Dispersion) -> SpectralField {
    let lat = u.lattice().clone();
    let mut v = SpectralField::zero(lat.clone());
    let mut j = vec![0i64; lat.dim()];
    for flat in 0..lat.num_modes() {
        lat.mode_of(flat, &mut j);
        let sign = match j.iter().find(|&&c| c != 0) {
            Some(&c) if c > 0 => 1.0,
            Some(_) => -1.0,
            None => 0.0,
        };
        let omega = dispersion.omega_sq(Lattice::abs2(&j)).sqrt();
        v.coeffs_mut()[flat] = u.coeffs()[flat] * Complex64::new(0.0, sign * omega);
    }
    v
}

fn build_state(
    cfg: &RunConfig,
    lattice: &Lattice,
    dispersion: &Dispersion,
    sn: &Option<SnWave>,
) -> Result<WaveState> {
    let dim = lattice.dim();
    let make = |u: SpectralField, phase: PhaseCfg| -> Result<WaveState> {
        let v = match phase {
            PhaseCfg::Rest => SpectralField::zero(u.lattice().clone()),
            PhaseCfg::Traveling => traveling_velocity(&u, dispersion),
        };
        WaveState::new(u, v, 0.0)
    };
    match &cfg.initial {
        InitialCfg::Cosine {
            amplitude,
            mode,
            phase,
        } => {
            let u = crate::solver::cosine_datum(lattice, *mode, *amplitude);
            make(u, *phase)
        }
        InitialCfg::GaussianBump {
            amplitude,
            width,
            phase,
        } => {
            let mut u = SpectralField::zero(lattice.clone());
            let mut j = vec![0i64; dim];
            for flat in 0..lattice.num_modes() {
                lattice.mode_of(flat, &mut j);
                let abs2 = Lattice::abs2(&j);
                let parity: i64 = j.iter().sum();
                let sign = if parity.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                u.coeffs_mut()[flat] =
                    Complex64::new(amplitude * sign * (-0.5 * width * width * abs2).exp(), 0.0);
            }
            make(u, *phase)
        }
        InitialCfg::Exponential {
            amplitude,
            rho,
            phase,
        } => {
            let mut u = SpectralField::zero(lattice.clone());
            let mut j = vec![0i64; dim];
            for flat in 0..lattice.num_modes() {
                lattice.mode_of(flat, &mut j);
                let r = Lattice::abs2(&j).sqrt();
                u.coeffs_mut()[flat] = Complex64::new(amplitude * (-rho * r).exp(), 0.0);
            }
            make(u, *phase)
        }
        InitialCfg::SnWave { .. } => {
            let wave = sn.as_ref().expect("sn wave resolved during preparation");
            wave.initial_state(lattice)
        }
        InitialCfg::File { path, ut_path } => {
            let u = io::read_spectral_csv(Path::new(path), lattice.split())?;
            if u.lattice().dim() != dim || u.lattice().max_mode() > lattice.max_mode() {
                return Err(Error::Config(format!(
                    "snapshot {} does not fit the configured lattice",
                    path
                )));
            }
            // re-embed on the configured lattice
            let mut u_full = SpectralField::zero(lattice.clone());
            let src = u.lattice().clone();
            let mut j = vec![0i64; dim];
            for flat in 0..src.num_modes() {
                src.mode_of(flat, &mut j);
                u_full.set(&j, u.coeffs()[flat]);
            }
            let v_full = match ut_path {
                Some(p) => {
                    let v = io::read_spectral_csv(Path::new(p), lattice.split())?;
                    let mut v_full = SpectralField::zero(lattice.clone());
                    let src = v.lattice().clone();
                    let mut j = vec![0i64; dim];
                    for flat in 0..src.num_modes() {
                        src.mode_of(flat, &mut j);
                        v_full.set(&j, v.coeffs()[flat]);
                    }
                    v_full
                }
                None => SpectralField::zero(lattice.clone()),
            };
            WaveState::new(u_full, v_full, 0.0)
        }
    }
}

fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    cfg.validate()?;
    let lattice = cfg.lattice()?;
    let spec = cfg.nonlinearity_spec()?;
    let fit_opts: FitOptions = cfg.fit.into();

    let (dispersion, sn, lambda_fit) = match (&cfg.equation, &cfg.initial) {
        (EquationCfg::KleinGordon { nu, lambda }, InitialCfg::SnWave { modulus, c, winding }) => {
            let m = EllipticModulus::new(*modulus)?;
            let admissible = admissible_lambda(m, *c, *nu, *winding)?;
            let lam = lambda.unwrap_or(admissible);
            let wave = exact_sn_wave(m, *c, *nu, lam, *winding)?;
            // the exact wave solves the focusing cubic equation only
            let expected = NonlinearitySpec::Monomial {
                sign: Sign::Minus,
                k: 3,
            };
            if spec != expected {
                return Err(Error::Config(
                    "sn wave initial data requires nonlinearity monomial(minus, 3)".into(),
                ));
            }
            (
                Dispersion::KleinGordon {
                    nu: *nu,
                    lambda: wave.lambda,
                },
                Some(wave),
                Some(lam),
            )
        }
        (EquationCfg::KleinGordon { nu, lambda }, _) => {
            let lam = lambda.ok_or_else(|| {
                Error::Config("equation.lambda is required unless the datum is sn_wave".into())
            })?;
            (
                Dispersion::KleinGordon {
                    nu: *nu,
                    lambda: lam,
                },
                None,
                None,
            )
        }
        (EquationCfg::Standard, _) => (Dispersion::Standard, None, None),
    };

    let state = build_state(cfg, &lattice, &dispersion, &sn)?;
    Ok(Prepared {
        lattice,
        spec,
        dispersion,
        state,
        sn_wave: sn,
        lambda_fit,
        fit_opts,
    })
}

/// Largest decay rate distinguishable from round-off at this resolution.
fn rho_cap(fit_opts: &FitOptions, lattice: &Lattice) -> f64 {
    (1.0 / fit_opts.noise_floor_rel).ln() / lattice.max_mode() as f64
}

/// The fitted radius carries a few percent of estimator uncertainty; the
/// asserted initial radius keeps this margin below it.
const FITTED_TAU0_MARGIN: f64 = 0.95;

fn resolve_tau0(
    cfg: &RunConfig,
    prep: &Prepared,
) -> Result<f64> {
    let sigma = match cfg.gevrey.tau0 {
        TauZeroCfg::Fixed { value } => value,
        TauZeroCfg::Fitted => {
            let cap = rho_cap(&prep.fit_opts, &prep.lattice);
            let raw = match fit_radius(&prep.state.u, prep.lattice.split(), &prep.fit_opts) {
                RadiusFit::Analytic(fit) => fit.rho.min(cap),
                _ => cap,
            };
            FITTED_TAU0_MARGIN * raw
        }
    };
    let tau0 = sigma.min(prep.spec.lambda());
    if !(tau0 > 0.0) || !tau0.is_finite() {
        return Err(Error::Config(format!("resolved tau0 = {tau0} is not positive")));
    }
    Ok(tau0)
}

/// Relative change of `P_N f` between a x2- and x3-oversampled evaluation;
/// an alias-error estimate for non-polynomial nonlinearities.
fn alias_residual(spec: &NonlinearitySpec, u: &SpectralField) -> Result<f64> {
    let lat = u.lattice();
    let eval_at = |factor: usize| -> Result<SpectralField> {
        let grid = to_grid_with_min_points(u, factor * lat.modes_per_axis())?;
        let f_grid = crate::nonlinearity::eval_f(spec, &grid, 0.0)?;
        from_grid(&f_grid, lat)
    };
    let coarse = eval_at(2)?;
    let fine = eval_at(3)?;
    let scale = fine
        .coeffs()
        .iter()
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        .sqrt()
        .max(1e-300);
    Ok(coarse.l2_distance(&fine) / scale)
}

fn resolve_constants(cfg: &RunConfig, prep: &Prepared) -> Result<ResolvedConstants> {
    let n = prep.lattice.dim();
    let p = cfg.gevrey.p;
    let (s, tail) = lattice_sum_with_tail(n, p)?;
    let mut c0 = 2.0f64.powf(p) * (2.0 * s).sqrt();
    if let Some(debug) = &cfg.debug {
        if let Some(factor) = debug.tamper_c0 {
            c0 *= factor;
        }
    }
    let c1 = constant_c1(c0);
    let tau0 = resolve_tau0(cfg, prep)?;
    let split = prep.lattice.split();
    let y0_small = y_l1(&prep.state.u, &prep.state.v, tau0, split)?;
    let y0_big = energy_y(&prep.state.u, &prep.state.v, p, tau0, split)?;
    let alias = if prep.spec.is_polynomial() {
        None
    } else {
        Some(alias_residual(&prep.spec, &prep.state.u)?)
    };
    Ok(ResolvedConstants {
        c0,
        c1,
        c_tilde: c1,
        tau0,
        y0_small,
        y0_big,
        lattice_sum: s,
        lattice_tail: tail,
        lambda_fit: prep.lambda_fit,
        alias_residual: alias,
    })
}

fn bound_inputs(record: &RunRecord, consts: &ResolvedConstants) -> Result<BoundInputs> {
    Ok(BoundInputs {
        hp: Sampled::from_norm_series(&record.hp)?,
        hp1: Sampled::from_norm_series(&record.hp1)?,
        ut_hp: Sampled::from_norm_series(&record.ut_hp)?,
        l1: Sampled::from_norm_series(&record.l1)?,
        consts: BoundConstants {
            c0: consts.c0,
            c1: consts.c1,
            c_tilde: consts.c_tilde,
            tau0: consts.tau0,
            y0_small: consts.y0_small,
            y0_big: consts.y0_big,
        },
    })
}

fn monomial_k(spec: &NonlinearitySpec) -> Option<u32> {
    match spec {
        NonlinearitySpec::Monomial { k, .. } => Some(*k),
        _ => None,
    }
}

/// Every-second-sample view of the bound inputs (final sample kept), used
/// by the stride-sensitivity check; `None` when too few samples remain.
fn downsample_inputs(inputs: &BoundInputs) -> Option<BoundInputs> {
    let n = inputs.hp.len();
    if n < 9 {
        return None;
    }
    let mut idx: Vec<usize> = (0..n).step_by(2).collect();
    if *idx.last().unwrap() != n - 1 {
        idx.push(n - 1);
    }
    let pick = |s: &Sampled| -> Sampled {
        Sampled::new(
            idx.iter().map(|&i| s.t[i]).collect(),
            idx.iter().map(|&i| s.v[i]).collect(),
        )
        .expect("subsequence of a valid series is valid")
    };
    Some(BoundInputs {
        hp: pick(&inputs.hp),
        hp1: pick(&inputs.hp1),
        ut_hp: pick(&inputs.ut_hp),
        l1: pick(&inputs.l1),
        consts: inputs.consts,
    })
}

/// Executes a configured run end to end.
pub fn execute_run(cfg: &RunConfig) -> Result<RunReport> {
    let start = Instant::now();
    let prep = prepare(cfg)?;
    let solver_cfg = SolverConfig::new(
        cfg.solver.dt,
        cfg.solver.t_final,
        cfg.solver.integrator.into(),
        prep.dispersion,
    );
    solver_cfg.validate(&prep.lattice)?;
    let consts = resolve_constants(cfg, &prep)?;

    let record = solver_run(
        prep.state.clone(),
        &prep.spec,
        &solver_cfg,
        &Observables {
            p: cfg.gevrey.p,
            stride: cfg.solver.sample_stride,
            keep_snapshots: true,
        },
    )?;

    let mut series = vec![
        record.hp.clone(),
        record.hp1.clone(),
        record.ut_hp.clone(),
        record.l1.clone(),
    ];
    if let Some(e) = &record.energy {
        series.push(e.clone());
    }

    if let Some((t, detail)) = &record.diverged {
        // flush the partial series into a report; the caller maps this to
        // the divergence exit code
        return Ok(RunReport {
            constants: consts,
            series,
            curves: Vec::new(),
            skipped_bounds: Vec::new(),
            fits: Vec::new(),
            omitted_fits: 0,
            verdicts: Vec::new(),
            info: Vec::new(),
            diverged: Some((*t, detail.clone())),
            snapshots: record.snapshots,
            final_state: record.final_state,
            steps: record.steps_taken,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        });
    }

    let inputs = bound_inputs(&record, &consts)?;
    let split = prep.lattice.split();
    let p = cfg.gevrey.p;

    // A bound whose h-evaluation leaves the f64 range has collapsed below
    // the smallest representable radius; mark it skipped rather than fake a
    // curve (entire majorising series like s e^{s^2} do this immediately).
    let skip_reason = |e: Error| -> Result<std::result::Result<TauCurve, String>> {
        match e {
            Error::EvalOverflow { value, .. } => Ok(Err(format!(
                "bound magnitude exceeds the f64 range (majorising argument {value:.3e}); \
                 the curve lies below the smallest representable positive number"
            ))),
            Error::SeriesDivergence { s, .. } => Ok(Err(format!(
                "majorising series truncation exceeded at s = {s:.3e}"
            ))),
            other => Err(other),
        }
    };
    let compute_bound = |name: BoundName,
                         inputs: &BoundInputs|
     -> Result<std::result::Result<TauCurve, String>> {
        match name {
            BoundName::Thm1 => {
                let g = majorising_g(&prep.spec, p, split)?;
                match tau_theorem1(inputs, &g) {
                    Ok(curve) => Ok(Ok(curve)),
                    Err(e) => skip_reason(e),
                }
            }
            BoundName::Thm2 => {
                let n_args = prep.lattice.dim() + 2;
                let g = MultiMajorisingSeries::from_u_nonlinearity(
                    &prep.spec, p, split, n_args, 30.0,
                )?;
                match tau_theorem2(inputs, &g) {
                    Ok(curve) => Ok(Ok(curve)),
                    Err(e) => skip_reason(e),
                }
            }
            BoundName::Thm3 => {
                let g = majorising_g(&prep.spec, p, split)?;
                match tau_theorem3(inputs, &g) {
                    Ok(curve) => Ok(Ok(curve)),
                    Err(e) => skip_reason(e),
                }
            }
            BoundName::Prop2 => match monomial_k(&prep.spec) {
                Some(k) => Ok(Ok(tau_prop2(inputs, k)?)),
                None => Ok(Err("requires a monomial nonlinearity".into())),
            },
            BoundName::Prop3 => match monomial_k(&prep.spec) {
                Some(k) => Ok(Ok(tau_prop3(inputs, k)?)),
                None => Ok(Err("requires a monomial nonlinearity".into())),
            },
        }
    };

    let coarse_inputs = downsample_inputs(&inputs);
    let mut curves = Vec::new();
    let mut skipped = Vec::new();
    let mut stride_checks = Vec::new();
    let mut names = cfg.bounds.clone();
    names.sort();
    names.dedup();
    for name in &names {
        match compute_bound(*name, &inputs)? {
            Ok(curve) => {
                // stride-sensitivity check: the quadrature behind each bound
                // must be converged on the sampling grid. Recomputing on
                // 2x-coarsened inputs overestimates the stride-halving delta
                // by ~4x (trapezoid is O(h^2)), so 4e-4 here enforces the
                // 1e-4 refinement target.
                if let Some(coarse) = &coarse_inputs {
                    if let Ok(coarse_curve) = compute_bound(*name, coarse)? {
                        let fine_end = *curve.tau.last().unwrap();
                        let coarse_end = *coarse_curve.tau.last().unwrap();
                        if fine_end > 1e-300 {
                            let delta = (fine_end - coarse_end).abs() / fine_end;
                            stride_checks.push(Verdict {
                                name: format!("quadrature_stride_{}", curve.label.label()),
                                pass: delta <= 4e-4,
                                detail: format!("coarsening delta {delta:.3e}"),
                            });
                        }
                    }
                }
                curves.push(curve);
            }
            Err(reason) => skipped.push((*name, reason)),
        }
    }

    // measured radius series from the snapshots
    let mut fits: Vec<(f64, DecayFit)> = Vec::new();
    let mut omitted = 0usize;
    for (t, snap) in &record.snapshots {
        match fit_radius(snap, split, &prep.fit_opts) {
            RadiusFit::Analytic(fit) => fits.push((*t, fit)),
            _ => omitted += 1,
        }
    }
    let measured = TauCurve {
        label: BoundLabel::Measured,
        t: fits.iter().map(|(t, _)| *t).collect(),
        tau: fits.iter().map(|(_, f)| f.rho).collect(),
    };

    // run-level invariant checks
    let mut verdicts = stride_checks;
    for curve in &curves {
        let name = format!("bound_{}_positive_nonincreasing", curve.label.label());
        match curve.check_positive_nonincreasing() {
            Ok(()) => verdicts.push(Verdict {
                name,
                pass: true,
                detail: String::new(),
            }),
            Err(e) => verdicts.push(Verdict {
                name,
                pass: false,
                detail: e.to_string(),
            }),
        }
    }
    if !measured.t.is_empty() {
        for curve in &curves {
            let bound_sampled = Sampled::new(curve.t.clone(), curve.tau.clone())?;
            let mut worst: f64 = f64::INFINITY;
            let mut violation = None;
            for ((t, fit), rho) in fits.iter().zip(&measured.tau) {
                let bound = bound_sampled.interp(*t);
                let tol = 3.0 * fit.rho_stderr + 1e-9;
                let margin = rho + tol - bound;
                if margin < 0.0 && violation.is_none() {
                    violation = Some(*t);
                }
                worst = worst.min(margin);
            }
            verdicts.push(Verdict {
                name: format!("measured_above_{}", curve.label.label()),
                pass: violation.is_none(),
                detail: match violation {
                    Some(t) => format!("violated at t = {t}"),
                    None => format!("min margin {worst:.6e}"),
                },
            });
        }
    }
    if let (Some(p2), Some(p3)) = (
        curves.iter().find(|c| c.label == BoundLabel::Prop2),
        curves.iter().find(|c| c.label == BoundLabel::Prop3),
    ) {
        let bad = p2
            .tau
            .iter()
            .zip(&p3.tau)
            .position(|(a, b)| *a < *b * (1.0 - 1e-12));
        verdicts.push(Verdict {
            name: "prop2_ge_prop3".into(),
            pass: bad.is_none(),
            detail: match bad {
                Some(i) => format!("violated at t = {}", p2.t[i]),
                None => String::new(),
            },
        });
    }

    curves.push(measured);

    let mut info = Vec::new();

    // local existence horizon T* = min(1/(C1 max g(s, C0(|U0|_H + 1))), T)
    {
        let g = majorising_g(&prep.spec, p, split)?;
        let u0_norm = {
            let a = crate::norms::norm_hp(&prep.state.u, p + 1.0);
            let b = crate::norms::norm_hp(&prep.state.v, p);
            (a * a + b * b).sqrt()
        };
        let tstar = crate::bounds::compute_tstar(
            &g,
            consts.c0,
            consts.c1,
            u0_norm,
            &inputs.hp.t,
            cfg.solver.t_final,
        )?;
        info.push(("t_star".into(), format!("{tstar}")));
    }

    // solver-vs-exact diagnostics when the exact traveling wave is known
    if let Some(wave) = &prep.sn_wave {
        let numeric = crate::transform::to_grid(&record.final_state.u, 1.0)?;
        let exact = wave.grid_at(
            &prep.lattice,
            numeric.points_per_axis(),
            record.final_state.t,
        )?;
        let mut linf = 0.0f64;
        for (a, b) in numeric.values().iter().zip(exact.values()) {
            linf = linf.max((a - b).abs());
        }
        info.push(("sn_linf_error".into(), format!("{linf:e}")));
        info.push(("sn_rho_exact".into(), format!("{}", wave.rho_exact)));
        if let Some((_, fit)) = fits.last() {
            info.push((
                "sn_rho_measured_final".into(),
                format!("{} ({:+.3}% vs pole formula)", fit.rho,
                    100.0 * (fit.rho - wave.rho_exact) / wave.rho_exact),
            ));
        }
    }

    Ok(RunReport {
        constants: consts,
        series,
        curves,
        skipped_bounds: skipped,
        fits,
        omitted_fits: omitted,
        verdicts,
        info,
        diverged: None,
        snapshots: record.snapshots,
        final_state: record.final_state,
        steps: record.steps_taken,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

fn summary_text(cfg_echo: &str, report: &RunReport) -> String {
    let mut out = String::new();
    let c = &report.constants;
    let status = if let Some((t, detail)) = &report.diverged {
        format!("DIVERGED at t = {t} ({detail})")
    } else if report.all_pass() {
        "PASS".into()
    } else {
        "FAIL".into()
    };
    let _ = writeln!(out, "status: {status}");
    let _ = writeln!(out, "steps: {}", report.steps);
    let _ = writeln!(out, "elapsed_seconds: {:.3}", report.elapsed_seconds);
    let _ = writeln!(out, "C0 = {}", c.c0);
    let _ = writeln!(out, "C1 = {}", c.c1);
    let _ = writeln!(out, "C_tilde = {}", c.c_tilde);
    let _ = writeln!(out, "tau0 = {}", c.tau0);
    let _ = writeln!(out, "Y0 = {}", c.y0_big);
    let _ = writeln!(out, "y0 = {}", c.y0_small);
    let _ = writeln!(out, "lattice_sum = {}", c.lattice_sum);
    let _ = writeln!(out, "lattice_sum_tail = {:e}", c.lattice_tail);
    if let Some(lam) = c.lambda_fit {
        let _ = writeln!(out, "lambda_fit = {lam}");
    }
    if let Some(res) = c.alias_residual {
        let _ = writeln!(out, "alias_residual = {res:e}");
    }
    let _ = writeln!(out, "omitted_fits = {}", report.omitted_fits);
    for (key, value) in &report.info {
        let _ = writeln!(out, "{key} = {value}");
    }
    for (name, reason) in &report.skipped_bounds {
        let _ = writeln!(out, "skipped_bound: {name:?}: {reason}");
    }
    for v in &report.verdicts {
        let _ = writeln!(
            out,
            "check {}: {}{}",
            v.name,
            if v.pass { "PASS" } else { "FAIL" },
            if v.detail.is_empty() {
                String::new()
            } else {
                format!(" ({})", v.detail)
            }
        );
    }
    let _ = writeln!(out, "--- config echo ---");
    out.push_str(cfg_echo);
    out
}

/// Writes norms.csv, tau.csv, fits.csv, final_snapshot.csv, run.log and
/// summary.txt (plus plot/ data when enabled) into the output directory.
pub fn write_run_report(
    cfg: &RunConfig,
    cfg_echo: &str,
    report: &RunReport,
    out_override: Option<&Path>,
) -> Result<PathBuf> {
    let dir = out_override
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    std::fs::create_dir_all(&dir)?;

    let series_refs: Vec<&NormSeries> = report.series.iter().collect();
    io::write_text(&dir.join("norms.csv"), &io::norm_series_csv(&series_refs))?;
    let curve_refs: Vec<&TauCurve> = report.curves.iter().collect();
    io::write_text(&dir.join("tau.csv"), &io::tau_curves_csv(&curve_refs))?;
    io::write_text(&dir.join("fits.csv"), &io::fit_report_csv(&report.fits))?;
    io::write_text(
        &dir.join("final_snapshot.csv"),
        &io::spectral_csv(&report.final_state.u),
    )?;

    // run log: `t=<..> E=<..> Hp=<..>` at the sampling stride
    let mut log = String::new();
    let energy = report
        .series
        .iter()
        .find(|s| s.kind == crate::norms::NormKind::Energy);
    let hp = report
        .series
        .iter()
        .find(|s| s.kind == crate::norms::NormKind::Hp)
        .expect("Hp series always recorded");
    for (i, sample) in hp.samples.iter().enumerate() {
        let e_str = energy
            .and_then(|s| s.samples.get(i))
            .map(|s| format!("{}", s.value))
            .unwrap_or_else(|| "na".into());
        let _ = writeln!(log, "t={} E={} Hp={}", sample.t, e_str, sample.value);
    }
    io::write_text(&dir.join("run.log"), &log)?;
    io::write_text(&dir.join("summary.txt"), &summary_text(cfg_echo, report))?;

    if cfg.output.dump_snapshots {
        let snap_dir = dir.join("snapshots");
        for (i, (t, field)) in report.snapshots.iter().enumerate() {
            io::write_text(
                &snap_dir.join(format!("snapshot_{i:05}_t{t}.csv")),
                &io::spectral_csv(field),
            )?;
        }
    }

    if cfg.output.plot_data {
        let plot_dir = dir.join("plot");
        for curve in &report.curves {
            io::write_text(
                &plot_dir.join(format!("tau_{}.dat", curve.label.label())),
                &io::plot_columns("t tau", &curve.t, &curve.tau),
            )?;
        }
        for s in &report.series {
            let ts: Vec<f64> = s.samples.iter().map(|x| x.t).collect();
            let vs: Vec<f64> = s.samples.iter().map(|x| x.value).collect();
            io::write_text(
                &plot_dir.join(format!("norm_{}.dat", s.kind.label())),
                &io::plot_columns("t value", &ts, &vs),
            )?;
        }
    }
    Ok(dir)
}

/// Outcome of the h1/h2 comparison command.
#[derive(Debug)]
pub struct CompareOutcome {
    pub report: CompareReport,
    pub prop2: TauCurve,
    pub prop3: TauCurve,
    pub verdicts: Vec<Verdict>,
    pub constants: ResolvedConstants,
}

impl CompareOutcome {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// Runs the monomial equation and compares the Wiener and L2 bound inputs.
pub fn execute_compare(cfg: &RunConfig) -> Result<CompareOutcome> {
    let prep = prepare(cfg)?;
    let k = monomial_k(&prep.spec).ok_or_else(|| {
        Error::Config("compare requires a monomial nonlinearity".into())
    })?;
    let solver_cfg = SolverConfig::new(
        cfg.solver.dt,
        cfg.solver.t_final,
        cfg.solver.integrator.into(),
        prep.dispersion,
    );
    solver_cfg.validate(&prep.lattice)?;
    let consts = resolve_constants(cfg, &prep)?;
    let record = solver_run(
        prep.state.clone(),
        &prep.spec,
        &solver_cfg,
        &Observables {
            p: cfg.gevrey.p,
            stride: cfg.solver.sample_stride,
            keep_snapshots: false,
        },
    )?;
    let inputs = bound_inputs(&record, &consts)?;
    let report = compare_h1_h2(&inputs, k)?;
    let prop2 = tau_prop2(&inputs, k)?;
    let prop3 = tau_prop3(&inputs, k)?;

    let mut verdicts = Vec::new();
    verdicts.push(Verdict {
        name: "h1_le_h2".into(),
        pass: report.ok(),
        detail: match report.first_violation {
            Some(i) => format!("first violation at t = {}", report.t[i]),
            None => String::new(),
        },
    });
    let bad = prop2
        .tau
        .iter()
        .zip(&prop3.tau)
        .position(|(a, b)| *a < *b * (1.0 - 1e-12));
    verdicts.push(Verdict {
        name: "prop2_ge_prop3".into(),
        pass: bad.is_none(),
        detail: match bad {
            Some(i) => format!("violated at t = {}", prop2.t[i]),
            None => String::new(),
        },
    });
    Ok(CompareOutcome {
        report,
        prop2,
        prop3,
        verdicts,
        constants: consts,
    })
}

pub fn write_compare_outcome(
    cfg: &RunConfig,
    outcome: &CompareOutcome,
    out_override: Option<&Path>,
) -> Result<PathBuf> {
    let dir = out_override
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    std::fs::create_dir_all(&dir)?;
    io::write_text(&dir.join("compare.csv"), &io::compare_csv(&outcome.report))?;
    io::write_text(
        &dir.join("tau.csv"),
        &io::tau_curves_csv(&[&outcome.prop2, &outcome.prop3]),
    )?;
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "verdict: {}",
        if outcome.all_pass() { "PASS" } else { "FAIL" }
    );
    for v in &outcome.verdicts {
        let _ = writeln!(
            summary,
            "check {}: {}{}",
            v.name,
            if v.pass { "PASS" } else { "FAIL" },
            if v.detail.is_empty() {
                String::new()
            } else {
                format!(" ({})", v.detail)
            }
        );
    }
    let _ = writeln!(summary, "C0 = {}", outcome.constants.c0);
    let _ = writeln!(summary, "tau0 = {}", outcome.constants.tau0);
    io::write_text(&dir.join("compare_summary.txt"), &summary)?;
    Ok(dir)
}

/// The printed constants table of `constants --n <n> --p <p>`.
pub fn constants_table(n: usize, p: f64) -> Result<String> {
    let (s, tail) = lattice_sum_with_tail(n, p)?;
    let c0 = constant_c0(n, p)?;
    let c1 = constant_c1(c0);
    let mut out = String::new();
    let _ = writeln!(out, "n = {n}, p = {p}");
    let _ = writeln!(out, "lattice sum S = sum (1+|j|^2)^-p = {s}");
    let _ = writeln!(out, "  (integral tail correction {tail:e})");
    let _ = writeln!(out, "C0 = 2^p sqrt(2 S) = {c0}");
    let _ = writeln!(out, "C1 = 1 + 1/C0 = {c1}");
    let _ = writeln!(out, "embedding constant C0/2 = {}", 0.5 * c0);
    Ok(out)
}

/// One row of the nu sweep.
#[derive(Debug, Clone)]
pub struct ScalingRow {
    pub nu: f64,
    pub lambda_fit: f64,
    pub rho_exact: f64,
    pub rho_measured: f64,
    /// Pole formula with lambda frozen at the first sweep point.
    pub rho_fixed_lambda: f64,
    /// `d ln rho_fixed / d ln nu = -nu / (2 (c^2 - nu))`.
    pub exponent_analytic: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Log-log fitted exponents over the sweep (None when degenerate).
    pub fitted_exponent_exact: Option<f64>,
    pub fitted_exponent_measured: Option<f64>,
    pub fitted_exponent_fixed: Option<f64>,
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x > 0.0 && y > 0.0 && y.is_finite())
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Sweeps `nu` over the configured grid for the sn family, reporting the
/// pole-formula radius, the measured radius, and scaling exponents.
pub fn execute_scaling(cfg: &RunConfig) -> Result<ScalingReport> {
    let scaling = cfg
        .scaling
        .as_ref()
        .ok_or_else(|| Error::Config("scaling command needs a [scaling] section".into()))?;
    let (modulus, c, winding) = match &cfg.initial {
        InitialCfg::SnWave { modulus, c, winding } => (*modulus, *c, *winding),
        _ => {
            return Err(Error::Config(
                "scaling sweeps the sn_wave family; set initial.preset = \"sn_wave\"".into(),
            ))
        }
    };
    let m = EllipticModulus::new(modulus)?;
    let lattice = cfg.lattice()?;
    let fit_opts: FitOptions = cfg.fit.into();

    let mut rows = Vec::new();
    let mut lambda_ref: Option<f64> = None;
    for &nu in &scaling.nu_values {
        if !(c * c > nu && nu > 0.0) {
            return Err(Error::Config(format!(
                "scaling grid value nu = {nu} violates c^2 > nu > 0"
            )));
        }
        let lam = admissible_lambda(m, c, nu, winding)?;
        let wave = exact_sn_wave(m, c, nu, lam, winding)?;
        let lam_ref = *lambda_ref.get_or_insert(lam);
        let degenerate = modulus == 0.0;
        let (rho_exact, rho_measured, rho_fixed) = if degenerate {
            (f64::INFINITY, f64::NAN, f64::INFINITY)
        } else {
            let snapshot = wave.spectral_at(&lattice, 0.0)?;
            let measured = match fit_radius(&snapshot, lattice.split(), &fit_opts) {
                RadiusFit::Analytic(fit) => fit.rho,
                _ => f64::NAN,
            };
            let kprime = crate::elliptic::elliptic_k_prime(m)?;
            let rho_fixed =
                kprime * ((1.0 + modulus * modulus) * (c * c - nu) / lam_ref).sqrt();
            (wave.rho_exact, measured, rho_fixed)
        };
        rows.push(ScalingRow {
            nu,
            lambda_fit: lam,
            rho_exact,
            rho_measured,
            rho_fixed_lambda: rho_fixed,
            exponent_analytic: -nu / (2.0 * (c * c - nu)),
            degenerate,
        });
    }
    let nus: Vec<f64> = rows.iter().map(|r| r.nu).collect();
    let report = ScalingReport {
        fitted_exponent_exact: loglog_slope(
            &nus,
            &rows.iter().map(|r| r.rho_exact).collect::<Vec<_>>(),
        ),
        fitted_exponent_measured: loglog_slope(
            &nus,
            &rows.iter().map(|r| r.rho_measured).collect::<Vec<_>>(),
        ),
        fitted_exponent_fixed: loglog_slope(
            &nus,
            &rows.iter().map(|r| r.rho_fixed_lambda).collect::<Vec<_>>(),
        ),
        rows,
    };
    Ok(report)
}

pub fn scaling_csv(report: &ScalingReport) -> String {
    let mut out = String::from(
        "nu,lambda_fit,rho_exact,rho_measured,rho_fixed_lambda,exponent_analytic,degenerate\n",
    );
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{:e},{:e},{:e},{:e},{}",
            r.nu, r.lambda_fit, r.rho_exact, r.rho_measured, r.rho_fixed_lambda,
            r.exponent_analytic, r.degenerate
        );
    }
    out
}

pub fn write_scaling_report(
    cfg: &RunConfig,
    report: &ScalingReport,
    out_override: Option<&Path>,
) -> Result<PathBuf> {
    let dir = out_override
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    std::fs::create_dir_all(&dir)?;
    io::write_text(&dir.join("scaling.csv"), &scaling_csv(report))?;
    let mut summary = String::new();
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_else(|| "na".into());
    let _ = writeln!(
        summary,
        "fitted exponent (torus-fitted lambda, pole formula): {}",
        fmt(report.fitted_exponent_exact)
    );
    let _ = writeln!(
        summary,
        "fitted exponent (measured radius): {}",
        fmt(report.fitted_exponent_measured)
    );
    let _ = writeln!(
        summary,
        "fitted exponent (fixed lambda reference): {}",
        fmt(report.fitted_exponent_fixed)
    );
    io::write_text(&dir.join("scaling_summary.txt"), &summary)?;
    Ok(dir)
}
