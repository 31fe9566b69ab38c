//! Acceptance suite: one test per gate criterion, each printing a
//! `ACCEPTANCE <k> (<name>): PASS` line on success. Run with
//! `cargo test -p gevrey-waves --test acceptance`.

mod common;

use std::time::Instant;

use common::random_real_field;
use gevrey_waves::bounds::{
    h2_series, tau_closed_form, tau_proposition, tau_rk4, BoundLabel, Sampled,
};
use gevrey_waves::config::RunConfig;
use gevrey_waves::constants::constant_c0;
use gevrey_waves::elliptic::EllipticModulus;
use gevrey_waves::estimator::{fit_profile, fit_radius, FitOptions};
use gevrey_waves::nonlinearity::{NonlinearitySpec, Sign};
use gevrey_waves::norms::{embedding_check, norm_gevrey_l2, norm_hp, GevreyParams};
use gevrey_waves::runner::{execute_compare, execute_run};
use gevrey_waves::sn_wave::{admissible_lambda, exact_sn_wave};
use gevrey_waves::solver::{
    energy_kg, run, Dispersion, Integrator, Observables, SolverConfig, WaveState,
};
use gevrey_waves::transform::{dealiased_product, to_grid};
use gevrey_waves::{Lattice, SpectralField};
use num_complex::Complex64;

/// Criterion 1: the Gevrey product inequality
/// |A^p e^{tau A'}(uv)| <= C0 |u| |v| + 1e-9 over 200 random pairs,
/// n = 1, N <= 16, p in {1, 2}, tau in {0, 0.2}; zero violations, < 10 s.
#[test]
fn acceptance_1_banach_algebra() {
    let started = Instant::now();
    let c0_p1 = constant_c0(1, 1.0).unwrap();
    let c0_p2 = constant_c0(1, 2.0).unwrap();
    let mut trials = 0usize;
    let mut seed = 0u64;
    while trials < 200 {
        for &(p, c0) in &[(1.0, c0_p1), (2.0, c0_p2)] {
            for &tau in &[0.0, 0.2] {
                let n = [8usize, 12, 16][trials % 3];
                let u = random_real_field(n, seed, 1.0);
                let v = random_real_field(n, seed + 7_777, 1.0);
                seed += 2;
                let w = dealiased_product(&u, &v).unwrap();
                let params = GevreyParams::anisotropic(p, tau, 1).unwrap();
                let lhs = norm_gevrey_l2(&w, &params).unwrap();
                let nu = norm_gevrey_l2(&u, &params).unwrap();
                let nv = norm_gevrey_l2(&v, &params).unwrap();
                assert!(
                    lhs <= c0 * nu * nv + 1e-9,
                    "violation at trial {trials}: p = {p}, tau = {tau}, \
                     lhs = {lhs}, rhs = {}",
                    c0 * nu * nv
                );
                trials += 1;
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "algebra check took {elapsed:.2} s");
    println!("ACCEPTANCE 1 (banach algebra, {trials} trials in {elapsed:.2} s): PASS");
}

/// Criterion 2: the pure-mode norm identity
/// |A^p e^{tau A'} e^{ijx}| = (1+|j|^2)^{p/2} e^{tau |j'|} to 1e-12 for
/// every retained mode at N = 32.
#[test]
fn acceptance_2_pure_mode_identity() {
    let lat = Lattice::line(32);
    for &(p, tau) in &[(1.0, 0.3), (2.5, 0.1), (1.5, 0.0)] {
        let params = GevreyParams::anisotropic(p, tau, 1).unwrap();
        for j in -32i64..=32 {
            let mut f = SpectralField::zero(lat.clone());
            f.set(&[j], Complex64::new(1.0, 0.0));
            let got = norm_gevrey_l2(&f, &params).unwrap();
            let expected = (1.0 + (j * j) as f64).powf(p / 2.0) * (tau * j.abs() as f64).exp();
            assert!(
                (got - expected).abs() <= 1e-12 * expected,
                "j = {j}, p = {p}, tau = {tau}: {got} vs {expected}"
            );
        }
    }
    println!("ACCEPTANCE 2 (pure-mode identity): PASS");
}

/// Criterion 3: each tau law with constant h, RK4 at dt = 1e-3 vs the
/// closed form, 1e-8 relative over t in [0, 10].
#[test]
fn acceptance_3_closed_form_vs_rk4() {
    let t: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
    // (q, h, tau0): q = 3 energy law, q = 1 exponential law, q = 2
    // reciprocal law, q = k+1 power laws for k = 2, 3
    for &(q, h_val, tau0) in &[
        (3u32, 1.5, 1.0),
        (1, 0.8, 2.0),
        (2, 1.0, 1.0),
        (3, 1.0, 1.0),
        (4, 0.5, 1.5),
    ] {
        let h = Sampled::constant(t.clone(), h_val).unwrap();
        let closed = tau_closed_form(q, &h, tau0);
        let rk4 = tau_rk4(q, &h, tau0, 1e-3);
        for i in 0..t.len() {
            let rel = (closed[i] - rk4[i]).abs() / closed[i];
            assert!(
                rel <= 1e-8,
                "q = {q}, t = {}: closed {} vs rk4 {} (rel {rel:.3e})",
                t[i],
                closed[i],
                rk4[i]
            );
        }
    }
    println!("ACCEPTANCE 3 (closed form vs RK4, all four laws): PASS");
}

/// Criterion 4: sn traveling wave (modulus 0.9, N = 256, dt = 1e-4) over one
/// temporal period: L-inf error <= 1e-6, profile residual <= 1e-8, < 60 s.
#[test]
fn acceptance_4_sn_wave_solver_validation() {
    let started = Instant::now();
    let modulus = EllipticModulus::new(0.9).unwrap();
    let (c, nu, winding) = (1.0, 0.5, 1u32);
    let lambda = admissible_lambda(modulus, c, nu, winding).unwrap();
    let wave = exact_sn_wave(modulus, c, nu, lambda, winding).unwrap();
    let lattice = Lattice::line(256);

    let residual = wave.profile_residual(&lattice).unwrap();
    assert!(residual <= 1e-8, "profile residual {residual:.3e}");

    let state = wave.initial_state(&lattice).unwrap();
    let period = wave.temporal_period();
    let cfg = SolverConfig::new(1e-4, period, Integrator::Leapfrog, wave.dispersion());
    let record = run(
        state,
        &wave.nonlinearity(),
        &cfg,
        &Observables {
            p: 1.0,
            stride: 10_000,
            keep_snapshots: false,
        },
    )
    .unwrap();

    let numeric = to_grid(&record.final_state.u, 1.0).unwrap();
    let exact = wave
        .grid_at(&lattice, numeric.points_per_axis(), period)
        .unwrap();
    let mut linf = 0.0f64;
    for (a, b) in numeric.values().iter().zip(exact.values()) {
        linf = linf.max((a - b).abs());
    }
    assert!(linf <= 1e-6, "L-inf error over one period: {linf:.3e}");
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "sn validation took {elapsed:.1} s");
    println!(
        "ACCEPTANCE 4 (sn wave: L-inf {linf:.2e}, residual {residual:.2e}, {elapsed:.1} s): PASS"
    );
}

/// Criterion 5: fitted radius of the sn snapshot within 2% of K'(m)/kappa;
/// the synthetic profile (1+k)^3 e^{-0.3k} recovered within 3%.
#[test]
fn acceptance_5_measured_radius_accuracy() {
    let modulus = EllipticModulus::new(0.9).unwrap();
    let lambda = admissible_lambda(modulus, 1.0, 0.5, 1).unwrap();
    let wave = exact_sn_wave(modulus, 1.0, 0.5, lambda, 1).unwrap();
    let snapshot = wave.spectral_at(&Lattice::line(256), 0.0).unwrap();
    let fit = fit_radius(&snapshot, 1, &FitOptions::default())
        .analytic()
        .copied()
        .expect("sn snapshot must yield a determinate fit");
    let rel = (fit.rho - wave.rho_exact).abs() / wave.rho_exact;
    assert!(
        rel <= 0.02,
        "sn radius: fitted {} vs pole formula {} ({:.2}%)",
        fit.rho,
        wave.rho_exact,
        100.0 * rel
    );

    let profile: Vec<f64> = (0..=64)
        .map(|k| (1.0 + k as f64).powi(3) * (-0.3 * k as f64).exp())
        .collect();
    let opts = FitOptions {
        skip_low: 10,
        max_shell: Some(60),
        ..FitOptions::default()
    };
    let synth = fit_profile(&profile, &opts).analytic().copied().unwrap();
    let rel_synth = (synth.rho - 0.3).abs() / 0.3;
    assert!(
        rel_synth <= 0.03,
        "synthetic profile: fitted {} vs 0.3 ({:.2}%)",
        synth.rho,
        100.0 * rel_synth
    );
    println!(
        "ACCEPTANCE 5 (radius: sn {:.2}% / synthetic {:.2}%): PASS",
        100.0 * rel,
        100.0 * rel_synth
    );
}

const CUBIC_KG_TOML: &str = r#"
bounds = ["thm1", "thm3", "prop2", "prop3"]

[lattice]
dim = 1
split = 1
max_mode = 256

[equation]
form = "standard"

[nonlinearity]
form = "monomial"
sign = "plus"
k = 3

[initial]
preset = "cosine"
amplitude = 0.5

[solver]
dt = 5e-3
t_final = 20.0
sample_stride = 20

[gevrey]
p = 1.0
tau0 = { policy = "fitted" }

[fit]
min_band = 6

[output]
dir = "target/acceptance/cubic-kg"
"#;

/// Criterion 6: cubic Klein-Gordon from 0.5 cos x, p = 1, tau0 from the
/// datum's own fitted radius, T = 20, N = 256: the measured radius stays
/// above every bound curve at every determinate sample.
#[test]
fn acceptance_6_lower_bound_property() {
    let cfg = RunConfig::from_toml_str(CUBIC_KG_TOML).unwrap();
    let report = execute_run(&cfg).unwrap();
    let measured = report.curve(BoundLabel::Measured).unwrap();
    assert!(
        measured.t.len() >= 10,
        "need a usable measured series, got {} samples ({} omitted)",
        measured.t.len(),
        report.omitted_fits
    );
    for label in ["thm1", "thm3", "prop2", "prop3"] {
        let verdict = report
            .verdicts
            .iter()
            .find(|v| v.name == format!("measured_above_{label}"))
            .unwrap_or_else(|| panic!("missing verdict for {label}"));
        assert!(verdict.pass, "{}: {}", verdict.name, verdict.detail);
    }
    assert!(report.all_pass(), "verdicts: {:?}", report.verdicts);
    println!(
        "ACCEPTANCE 6 (lower-bound property, {} measured samples vs 4 bounds): PASS",
        measured.t.len()
    );
}

/// Criterion 7: h1 <= h2 pointwise on the cubic run (and for k = 2), hence
/// tau_prop2 >= tau_prop3; the margin series is emitted.
#[test]
fn acceptance_7_h1_below_h2() {
    let cfg = RunConfig::from_toml_str(CUBIC_KG_TOML).unwrap();
    let outcome = execute_compare(&cfg).unwrap();
    assert!(outcome.report.ok(), "h1 > h2 at {:?}", outcome.report.first_violation);
    assert!(outcome.all_pass(), "verdicts: {:?}", outcome.verdicts);
    assert!(outcome.report.margin.iter().all(|&m| m >= 0.0));
    std::fs::create_dir_all("target/acceptance").unwrap();
    std::fs::write(
        "target/acceptance/compare_margin.csv",
        gevrey_waves::io::compare_csv(&outcome.report),
    )
    .unwrap();

    // quadratic monomial, small data
    let quad = CUBIC_KG_TOML
        .replace("k = 3", "k = 2")
        .replace("amplitude = 0.5", "amplitude = 0.2")
        .replace("t_final = 20.0", "t_final = 5.0")
        .replace("max_mode = 256", "max_mode = 64");
    let cfg2 = RunConfig::from_toml_str(&quad).unwrap();
    let outcome2 = execute_compare(&cfg2).unwrap();
    assert!(outcome2.all_pass(), "k = 2 verdicts: {:?}", outcome2.verdicts);
    println!("ACCEPTANCE 7 (h1 <= h2 and prop2 >= prop3, k = 3 and k = 2): PASS");
}

/// Criterion 8: the 1/t law of the L2 monomial bound: with the H^p norm
/// bounded, |tau(2t)/tau(t) - 1/2| <= 0.05 for t in [50, 100], on a
/// synthetic bounded-norm series and on the real run (whose H^p norm must
/// stay within twice its initial value).
#[test]
fn acceptance_8_inverse_time_asymptotics() {
    // synthetic bounded-norm series
    let t: Vec<f64> = (0..=4000).map(|i| i as f64 * 0.05).collect();
    let hp = Sampled::constant(t, 0.5).unwrap();
    let c0 = constant_c0(1, 1.0).unwrap();
    let h2 = h2_series(3, 1.6, c0, &hp).unwrap();
    let curve = tau_proposition(BoundLabel::Prop3, 3, &h2, 0.1).unwrap();
    let sampled = Sampled::new(curve.t.clone(), curve.tau.clone()).unwrap();
    for i in 0..=50 {
        let probe = 50.0 + i as f64;
        let ratio = sampled.interp(2.0 * probe) / sampled.interp(probe);
        assert!(
            (ratio - 0.5).abs() <= 0.05,
            "synthetic: t = {probe}, ratio = {ratio}"
        );
    }

    // real run: same datum, N = 64, T = 200
    let lat = Lattice::line(64);
    let u0 = gevrey_waves::solver::cosine_datum(&lat, 1, 0.5);
    let cfg = SolverConfig::new(1e-2, 200.0, Integrator::Leapfrog, Dispersion::Standard);
    let spec = NonlinearitySpec::Monomial {
        sign: Sign::Plus,
        k: 3,
    };
    let record = run(
        WaveState::rest(u0).unwrap(),
        &spec,
        &cfg,
        &Observables {
            p: 1.0,
            stride: 50,
            keep_snapshots: false,
        },
    )
    .unwrap();
    let hp_real = Sampled::from_norm_series(&record.hp).unwrap();
    let h0 = hp_real.v[0];
    let max_hp = hp_real.v.iter().cloned().fold(0.0, f64::max);
    assert!(
        max_hp <= 2.0 * h0,
        "H^p norm left the bounded regime: max {max_hp} vs initial {h0}"
    );
    let h2_real = h2_series(3, 1.6, c0, &hp_real).unwrap();
    let curve_real = tau_proposition(BoundLabel::Prop3, 3, &h2_real, 0.1).unwrap();
    let sampled_real = Sampled::new(curve_real.t.clone(), curve_real.tau.clone()).unwrap();
    for i in 0..=50 {
        let probe = 50.0 + i as f64;
        let ratio = sampled_real.interp(2.0 * probe) / sampled_real.interp(probe);
        assert!(
            (ratio - 0.5).abs() <= 0.05,
            "real run: t = {probe}, ratio = {ratio}"
        );
    }
    println!("ACCEPTANCE 8 (tau ~ 1/t: synthetic and real run): PASS");
}

/// Criterion 9: leapfrog energy drift <= 1e-6 over T = 10 at dt = 1e-3,
/// N = 128; halving dt reduces the drift by ~4x (+-30%).
#[test]
fn acceptance_9_energy_near_conservation() {
    let lat = Lattice::line(128);
    let spec = NonlinearitySpec::Monomial {
        sign: Sign::Plus,
        k: 3,
    };
    let drift_at = |dt: f64| -> f64 {
        let u0 = gevrey_waves::solver::cosine_datum(&lat, 1, 0.5);
        let state = WaveState::rest(u0).unwrap();
        let e0 = energy_kg(&state, &spec, &Dispersion::Standard).unwrap();
        let cfg = SolverConfig::new(dt, 10.0, Integrator::Leapfrog, Dispersion::Standard);
        let record = run(
            state,
            &spec,
            &cfg,
            &Observables {
                p: 1.0,
                stride: 10,
                keep_snapshots: false,
            },
        )
        .unwrap();
        let energy = record.energy.expect("monomial runs record energy");
        energy
            .samples
            .iter()
            .map(|s| (s.value - e0.abs()).abs() / e0.abs())
            .fold(0.0, f64::max)
    };
    let coarse = drift_at(1e-3);
    assert!(coarse <= 1e-6, "drift at dt = 1e-3: {coarse:.3e}");
    // the drift scales as C dt^2 with a moderate constant
    let c_measured = coarse / 1e-6;
    assert!(c_measured <= 10.0, "drift constant C = {c_measured:.2}");
    let fine = drift_at(5e-4);
    let ratio = coarse / fine;
    assert!(
        (2.8..=5.2).contains(&ratio),
        "dt-halving drift ratio {ratio:.2} (coarse {coarse:.3e}, fine {fine:.3e})"
    );
    println!(
        "ACCEPTANCE 9 (energy drift {coarse:.2e}, halving ratio {ratio:.2}): PASS"
    );
}

/// Criterion 10: the Wiener/Sobolev embedding |u-hat|_l1 <= (C0/2) |u|_{H^1}
/// on 200 random fields, zero violations; the e^{imx} gap-widening table is
/// emitted.
#[test]
fn acceptance_10_embedding_inequality() {
    let c0 = constant_c0(1, 1.0).unwrap();
    for trial in 0..200 {
        let n = [8usize, 16, 32][trial % 3];
        let u = random_real_field(n, 10_000 + trial as u64, 2.0);
        let (lhs, rhs, ok) = embedding_check(&u, 1.0, c0);
        assert!(ok, "trial {trial}: l1 = {lhs} > (C0/2) Hp = {rhs}");
    }

    // gap-widening demonstration on pure modes
    let mut table = String::from("m,l1,embedding_bound,gap\n");
    let mut prev_gap = 0.0;
    for m in 1i64..=32 {
        let mut f = SpectralField::zero(Lattice::line(32));
        f.set(&[m], Complex64::new(1.0, 0.0));
        let lhs = gevrey_waves::norms::norm_l1(&f);
        let rhs = 0.5 * c0 * norm_hp(&f, 1.0);
        let gap = rhs - lhs;
        assert!((lhs - 1.0).abs() < 1e-14, "l1 of a pure mode is 1");
        assert!(gap > prev_gap, "gap must widen with m");
        prev_gap = gap;
        table.push_str(&format!("{m},{lhs},{rhs},{gap}\n"));
    }
    std::fs::create_dir_all("target/acceptance").unwrap();
    std::fs::write("target/acceptance/embedding_gap.csv", &table).unwrap();
    println!("ACCEPTANCE 10 (embedding, 200 fields + gap table): PASS");
}
