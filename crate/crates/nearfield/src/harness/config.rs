//! Experiment configuration: a single TOML file with nested sections, every
//! field defaulted to the reference construction (N = 256 at 100 GHz, N_RF =
//! 4, Q = 32, L = 4, P = 10). `ExperimentConfig::desk()` is the fast profile
//! used by the validation suites (N = 128, Q = 16, P = 7).

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::SteeringModel;
use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;
use crate::subspace::DcrSubspace;

pub const SPEED_OF_LIGHT: f64 = 2.99792458e8;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct GeometryConfig {
    pub n_antennas: usize,
    pub carrier_ghz: f64,
    /// Spacing in wavelengths, d/λc.
    pub spacing_ratio: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { n_antennas: 256, carrier_ghz: 100.0, spacing_ratio: 0.5 }
    }
}

impl GeometryConfig {
    pub fn to_geometry(&self) -> Result<ArrayGeometry> {
        let wavelength = SPEED_OF_LIGHT / (self.carrier_ghz * 1e9);
        ArrayGeometry::new(self.n_antennas, self.spacing_ratio * wavelength, wavelength)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct SceneConfig {
    /// Number of propagation paths L (one LOS + L−1 NLOS).
    pub n_paths: usize,
    /// Angles are drawn with sinθ uniform on [−sin_theta_max, sin_theta_max].
    pub sin_theta_max: f64,
    /// Minimum pairwise frequency separation, in units of 1/N.
    pub min_omega_sep_rel: f64,
    /// Range band as fractions of the Rayleigh distance.
    pub range_band_rel: [f64; 2],
    /// NLOS gains are CN(0, this); the LOS gain has unit magnitude.
    pub nlos_gain_var: f64,
    /// Ground-truth steering law (also used by the refinement stage).
    pub model: SteeringModel,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            n_paths: 4,
            sin_theta_max: std::f64::consts::FRAC_1_SQRT_2,
            min_omega_sep_rel: 3.0,
            range_band_rel: [0.05, 0.10],
            nlos_gain_var: 0.1,
            model: SteeringModel::Exact,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct MeasurementConfig {
    pub n_rf: usize,
    /// Pilot length Q.
    pub n_slots: usize,
}

impl Default for MeasurementConfig {
    fn default() -> Self {
        Self { n_rf: 4, n_slots: 32 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(default)]
pub struct SubspaceConfig {
    /// Retained dimension; defaults to round(10·√(N/256)).
    pub p: Option<usize>,
    /// Dense dictionary size; defaults to max(4P, 64).
    pub p_dense: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct SolverSection {
    pub penalty: f64,
    pub max_iters: usize,
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub over_relaxation: f64,
    pub adapt_penalty: bool,
    /// Multiplicative fudge on the τ rule for sensitivity studies.
    pub tau_scale: f64,
    /// Floor τ ≥ tau_floor_rel·‖y‖₂ keeps noiseless runs well-posed.
    pub tau_floor_rel: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            penalty: 1.0,
            max_iters: 20_000,
            // Monte-Carlo tolerance; single solves can afford 1e-6
            tol_primal: 1e-4,
            tol_dual: 1e-4,
            over_relaxation: 1.0,
            adapt_penalty: true,
            tau_scale: 1.0,
            tau_floor_rel: 1e-3,
        }
    }
}

impl SolverSection {
    pub fn to_solver_config(&self, tau: f64) -> crate::solver::SolverConfig {
        crate::solver::SolverConfig {
            tau,
            penalty: self.penalty,
            max_iters: self.max_iters,
            tol_primal: self.tol_primal,
            tol_dual: self.tol_dual,
            over_relaxation: self.over_relaxation,
            adapt_penalty: self.adapt_penalty,
            capture_trace: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct RefineSection {
    pub max_iters: usize,
    pub cost_tol: f64,
    pub grad_tol_rel: f64,
    pub armijo_c1: f64,
    pub backtrack: f64,
    pub step_min: f64,
    pub range_margin: f64,
}

impl Default for RefineSection {
    fn default() -> Self {
        let d = crate::refine::RefineOptions::default();
        Self {
            max_iters: d.max_iters,
            cost_tol: d.cost_tol,
            grad_tol_rel: d.grad_tol_rel,
            armijo_c1: d.armijo_c1,
            backtrack: d.backtrack,
            step_min: d.step_min,
            range_margin: d.range_margin,
        }
    }
}

impl RefineSection {
    pub fn to_options(&self, model: SteeringModel) -> crate::refine::RefineOptions {
        crate::refine::RefineOptions {
            max_iters: self.max_iters,
            cost_tol: self.cost_tol,
            grad_tol_rel: self.grad_tol_rel,
            armijo_c1: self.armijo_c1,
            backtrack: self.backtrack,
            step_min: self.step_min,
            range_margin: self.range_margin,
            model,
            capture_trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    SnrDb,
    P,
    Distance,
    Q,
    L,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct SweepSection {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// SNR in dB used when the axis is not `snr_db`.
    pub snr_db: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { axis: SweepAxis::SnrDb, values: vec![10.0, 15.0, 20.0, 25.0, 30.0], snr_db: 30.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(default)]
pub struct ExperimentConfig {
    pub geometry: GeometryConfig,
    pub scene: SceneConfig,
    pub measurement: MeasurementConfig,
    pub subspace: SubspaceConfig,
    pub solver: SolverSection,
    pub refine: RefineSection,
    pub sweep: SweepSection,
    pub n_trials: usize,
    pub base_seed: u64,
}

impl ExperimentConfig {
    /// Fast profile: N = 128, Q = 16, P = 7, 100 trials per point.
    pub fn desk() -> Self {
        Self {
            geometry: GeometryConfig { n_antennas: 128, ..Default::default() },
            measurement: MeasurementConfig { n_rf: 4, n_slots: 16 },
            n_trials: 100,
            ..Default::default()
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let mut cfg: ExperimentConfig =
            toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.n_trials == 0 {
            cfg.n_trials = 100;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scene.n_paths == 0 {
            return Err(Error::Config("scene.n_paths must be positive".into()));
        }
        if !(self.scene.sin_theta_max > 0.0 && self.scene.sin_theta_max < 1.0) {
            return Err(Error::Config("scene.sin_theta_max must lie in (0, 1)".into()));
        }
        let [lo, hi] = self.scene.range_band_rel;
        if !(lo > 0.0 && hi >= lo && hi < 1.0) {
            return Err(Error::Config("scene.range_band_rel must satisfy 0 < lo ≤ hi < 1".into()));
        }
        if self.sweep.values.is_empty() {
            return Err(Error::Config("sweep.values must be nonempty".into()));
        }
        if self.measurement.n_rf == 0 || self.measurement.n_slots == 0 {
            return Err(Error::Config("measurement sizes must be positive".into()));
        }
        self.geometry.to_geometry()?;
        Ok(())
    }

    pub fn subspace_dim(&self, geom: &ArrayGeometry) -> usize {
        self.subspace.p.unwrap_or_else(|| DcrSubspace::default_dim(geom))
    }

    pub fn dense_dim(&self, p: usize) -> usize {
        self.subspace.p_dense.unwrap_or_else(|| DcrSubspace::default_dense(p))
    }

    /// Specialize this config to one sweep point.
    pub fn at_point(&self, value: f64) -> Self {
        let mut cfg = self.clone();
        match self.sweep.axis {
            SweepAxis::SnrDb => cfg.sweep.snr_db = value,
            SweepAxis::P => cfg.subspace.p = Some(value.round() as usize),
            SweepAxis::Distance => {
                // absolute distance in meters; the band collapses onto it
                let geom = self.geometry.to_geometry().expect("validated");
                let rel = value / geom.rayleigh_distance_m();
                cfg.scene.range_band_rel = [rel, rel];
            }
            SweepAxis::Q => cfg.measurement.n_slots = value.round() as usize,
            SweepAxis::L => cfg.scene.n_paths = value.round() as usize,
        }
        cfg
    }

    /// Full SHA-256 of the canonical TOML serialization.
    pub fn hash(&self) -> String {
        let ser = toml::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(ser.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
