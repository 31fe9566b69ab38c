//! Run configuration: a single TOML file, schema-validated fail-closed
//! (unknown keys are errors). See the repository README for the documented
//! schema and the shipped presets under `configs/`.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::estimator::FitOptions;
use crate::lattice::Lattice;
use crate::nonlinearity::{CoefProfile, NonlinearitySpec, Sign, SpatialMode};
use crate::solver::Integrator;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeCfg,
    pub equation: EquationCfg,
    pub nonlinearity: NonlinearityCfg,
    pub initial: InitialCfg,
    pub solver: SolverCfg,
    pub gevrey: GevreyCfg,
    /// Bound curves to compute: subset of thm1, thm2, thm3, prop2, prop3.
    #[serde(default)]
    pub bounds: Vec<BoundName>,
    #[serde(default)]
    pub fit: FitCfg,
    pub output: OutputCfg,
    #[serde(default)]
    pub scaling: Option<ScalingCfg>,
    #[serde(default)]
    pub debug: Option<DebugCfg>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeCfg {
    pub dim: usize,
    pub split: usize,
    pub max_mode: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum EquationCfg {
    /// `box u + u + f = 0`
    Standard,
    /// `u_tt - nu u_xx + lambda u + f = 0`; `lambda` may be omitted when the
    /// initial datum is `sn_wave`, in which case the torus-fitted value is
    /// used.
    KleinGordon { nu: f64, lambda: Option<f64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearityCfg {
    Zero,
    Monomial { sign: SignCfg, k: u32 },
    PowerSeries { coefficients: Vec<CoefCfg> },
    ExpCubic,
    SpatialSeries { lambda: f64, modes: Vec<SpatialModeCfg> },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignCfg {
    Plus,
    Minus,
}

/// A series coefficient: a plain number, a sinusoid in `t`, or a table of
/// (time, value) samples interpolated linearly.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CoefCfg {
    Constant(f64),
    Sinusoid {
        offset: f64,
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl From<&CoefCfg> for CoefProfile {
    fn from(v: &CoefCfg) -> Self {
        match v {
            CoefCfg::Constant(c) => CoefProfile::Constant(*c),
            CoefCfg::Sinusoid {
                offset,
                amplitude,
                omega,
                phase,
            } => CoefProfile::Sinusoid {
                offset: *offset,
                amplitude: *amplitude,
                omega: *omega,
                phase: *phase,
            },
            CoefCfg::Tabulated { times, values } => CoefProfile::Tabulated {
                times: times.clone(),
                values: values.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialModeCfg {
    pub j: Vec<i64>,
    pub coefficients: Vec<CoefCfg>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCfg {
    /// `amplitude * cos(mode x_1)`
    Cosine {
        amplitude: f64,
        #[serde(default = "default_mode")]
        mode: i64,
        #[serde(default)]
        phase: PhaseCfg,
    },
    /// Periodized bump with Gaussian spectrum `amplitude e^{-(w|j|)^2/2}`.
    GaussianBump {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        phase: PhaseCfg,
    },
    /// Synthetic analytic datum with exact radius: `amplitude e^{-rho |j|}`.
    Exponential {
        amplitude: f64,
        rho: f64,
        #[serde(default)]
        phase: PhaseCfg,
    },
    /// Exact elliptic traveling wave (requires the Klein-Gordon equation).
    SnWave { modulus: f64, c: f64, winding: u32 },
    /// Spectral CSV snapshots for `u` (and optionally `u_t`).
    File {
        path: String,
        #[serde(default)]
        ut_path: Option<String>,
    },
}

fn default_mode() -> i64 {
    1
}

/// Whether the velocity datum is zero (`rest`) or the per-mode traveling
/// phase `v_j = i omega_j u_j` that freezes every mode envelope.
#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum PhaseCfg {
    #[default]
    Rest,
    Traveling,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverCfg {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default)]
    pub integrator: IntegratorCfg,
    pub sample_stride: usize,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorCfg {
    #[default]
    Leapfrog,
    Rk4,
}

impl From<IntegratorCfg> for Integrator {
    fn from(v: IntegratorCfg) -> Self {
        match v {
            IntegratorCfg::Leapfrog => Integrator::Leapfrog,
            IntegratorCfg::Rk4 => Integrator::Rk4,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GevreyCfg {
    pub p: f64,
    #[serde(default = "default_s")]
    pub s: f64,
    pub tau0: TauZeroCfg,
}

fn default_s() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum TauZeroCfg {
    /// `sigma` asserted by the user; `tau0 = min(sigma, lambda_nonlinearity)`.
    Fixed { value: f64 },
    /// Fit the datum's own decay rate, capped at `ln(1/noise_floor)/N` (the
    /// largest rate distinguishable from round-off at this resolution).
    Fitted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundName {
    Thm1,
    Thm2,
    Thm3,
    Prop2,
    Prop3,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitCfg {
    #[serde(default = "default_noise_floor")]
    pub noise_floor_rel: f64,
    #[serde(default = "default_min_band")]
    pub min_band: usize,
    #[serde(default = "default_skip_low")]
    pub skip_low: usize,
}

fn default_noise_floor() -> f64 {
    1e-13
}
fn default_min_band() -> usize {
    8
}
fn default_skip_low() -> usize {
    2
}

impl Default for FitCfg {
    fn default() -> Self {
        Self {
            noise_floor_rel: default_noise_floor(),
            min_band: default_min_band(),
            skip_low: default_skip_low(),
        }
    }
}

impl From<FitCfg> for FitOptions {
    fn from(v: FitCfg) -> Self {
        FitOptions {
            noise_floor_rel: v.noise_floor_rel,
            min_band: v.min_band,
            skip_low: v.skip_low,
            max_shell: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputCfg {
    pub dir: String,
    #[serde(default)]
    pub plot_data: bool,
    /// Also dump every sampled spectral snapshot under `snapshots/`.
    #[serde(default)]
    pub dump_snapshots: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingCfg {
    /// The nu sweep grid (each value needs `c^2 > nu > 0`).
    pub nu_values: Vec<f64>,
}

/// Test hooks; documented for the negative-control tests only.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DebugCfg {
    /// Multiplies the computed C0 (tampering the comparison constants).
    pub tamper_c0: Option<f64>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::new(self.lattice.dim, self.lattice.split, self.lattice.max_mode)
    }

    pub fn nonlinearity_spec(&self) -> Result<NonlinearitySpec> {
        let spec = match &self.nonlinearity {
            NonlinearityCfg::Zero => NonlinearitySpec::Zero,
            NonlinearityCfg::Monomial { sign, k } => NonlinearitySpec::Monomial {
                sign: match sign {
                    SignCfg::Plus => Sign::Plus,
                    SignCfg::Minus => Sign::Minus,
                },
                k: *k,
            },
            NonlinearityCfg::PowerSeries { coefficients } => NonlinearitySpec::PowerSeries {
                coefficients: coefficients.iter().map(CoefProfile::from).collect(),
            },
            NonlinearityCfg::ExpCubic => NonlinearitySpec::ExpCubic,
            NonlinearityCfg::SpatialSeries { lambda, modes } => NonlinearitySpec::SpatialSeries {
                lambda: *lambda,
                modes: modes
                    .iter()
                    .map(|m| SpatialMode {
                        j: m.j.clone(),
                        coefficients: m.coefficients.iter().map(CoefProfile::from).collect(),
                    })
                    .collect(),
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let lattice = self.lattice()?;
        self.nonlinearity_spec()?;

        // analytic-embedding requirement
        if !(self.gevrey.p > lattice.dim() as f64 / 2.0) {
            return Err(Error::Config(format!(
                "gevrey.p must exceed n/2 = {}, got {}",
                lattice.dim() as f64 / 2.0,
                self.gevrey.p
            )));
        }
        if !(self.gevrey.s >= 1.0) {
            return Err(Error::Config("gevrey.s must be >= 1".into()));
        }
        // the norm library supports s > 1, but runs track the anisotropic
        // analytic class only
        if self.gevrey.s != 1.0 {
            return Err(Error::Config(
                "runs operate in the analytic class s = 1; higher Gevrey orders are \
                 available through the library norms only"
                    .into(),
            ));
        }
        if let TauZeroCfg::Fixed { value } = self.gevrey.tau0 {
            if !(value > 0.0) {
                return Err(Error::Config("tau0 value must be positive".into()));
            }
        }
        if !(self.solver.dt > 0.0) || !(self.solver.t_final >= 0.0) {
            return Err(Error::Config("solver.dt must be > 0 and t_final >= 0".into()));
        }
        if self.solver.sample_stride == 0 {
            return Err(Error::Config("solver.sample_stride must be >= 1".into()));
        }
        if let EquationCfg::KleinGordon { nu, lambda } = &self.equation {
            if !(*nu >= 0.0) {
                return Err(Error::Config("equation.nu must be >= 0".into()));
            }
            if let Some(l) = lambda {
                if !(*l > 0.0) {
                    return Err(Error::Config("equation.lambda must be > 0".into()));
                }
            }
        }
        match &self.initial {
            InitialCfg::SnWave { modulus, c, winding } => {
                if !(0.0..=1.0).contains(modulus) {
                    return Err(Error::Config("sn modulus must lie in [0, 1]".into()));
                }
                if *winding < 1 {
                    return Err(Error::Config("sn winding must be >= 1".into()));
                }
                match &self.equation {
                    EquationCfg::KleinGordon { nu, .. } => {
                        if !(c * c > *nu && *nu > 0.0) {
                            return Err(Error::Config(
                                "sn wave needs c^2 > nu > 0 in the Klein-Gordon equation".into(),
                            ));
                        }
                    }
                    EquationCfg::Standard => {
                        return Err(Error::Config(
                            "sn wave initial data requires the klein_gordon equation".into(),
                        ))
                    }
                }
                if lattice.dim() != 1 {
                    return Err(Error::Config("sn wave initial data is one-dimensional".into()));
                }
            }
            InitialCfg::GaussianBump { width, .. } if !(*width > 0.0) => {
                return Err(Error::Config("gaussian width must be positive".into()));
            }
            InitialCfg::Exponential { rho, .. } if !(*rho > 0.0) => {
                return Err(Error::Config("exponential rho must be positive".into()));
            }
            _ => {}
        }
        for b in &self.bounds {
            if matches!(b, BoundName::Prop2 | BoundName::Prop3)
                && !matches!(self.nonlinearity, NonlinearityCfg::Monomial { .. })
            {
                return Err(Error::Config(format!(
                    "bound {b:?} applies to the monomial nonlinearity only"
                )));
            }
        }
        if !(self.fit.noise_floor_rel > 0.0 && self.fit.noise_floor_rel < 1.0) {
            return Err(Error::Config("fit.noise_floor_rel must lie in (0, 1)".into()));
        }
        if let Some(s) = &self.scaling {
            if s.nu_values.is_empty() {
                return Err(Error::Config("scaling.nu_values must be nonempty".into()));
            }
            if !s.nu_values.iter().all(|&v| v.is_finite() && v >= 0.0) {
                return Err(Error::Config("scaling.nu_values must be finite and >= 0".into()));
            }
        }
        Ok(())
    }
}
