use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::density::{CovarianceModel, DensityConfig};
use crate::development::Integrator;
use crate::error::{Error, Result};
use crate::geometry::ManifoldSpec;
use crate::jacobi::JacobiMethod;

/// Bounded test functions of the endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    /// `cos` of the geodesic distance from the origin.
    EndpointCosDist,
    /// First embedded coordinate divided by the radius (raw coordinate when flat).
    EndpointCoordinate,
    ConstantOne,
}

impl TestFunction {
    pub fn eval(&self, m: &ManifoldSpec<f64>, endpoint: &nalgebra::DVector<f64>) -> f64 {
        match self {
            TestFunction::ConstantOne => 1.0,
            TestFunction::EndpointCosDist => m.distance(&m.origin().point, endpoint).cos(),
            TestFunction::EndpointCoordinate => match m.kind {
                crate::geometry::ManifoldKind::Sphere { radius } => endpoint[0] / radius,
                crate::geometry::ManifoldKind::Euclidean => endpoint[0].cos(),
            },
        }
    }
}

/// Flat key-value file layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawConfig {
    #[serde(rename = "manifold.kind")]
    pub manifold_kind: String,
    #[serde(rename = "manifold.dim")]
    pub manifold_dim: usize,
    #[serde(rename = "manifold.radius")]
    pub manifold_radius: f64,
    #[serde(rename = "sampling.seed")]
    pub seed: u64,
    #[serde(rename = "sampling.n_fine")]
    pub n_fine: usize,
    #[serde(rename = "sampling.samples")]
    pub samples: usize,
    #[serde(rename = "develop.integrator")]
    pub integrator: String,
    /// Defaults to 1 for the exact integrator and 16 for `rk4`.
    #[serde(rename = "develop.substeps")]
    pub substeps: Option<usize>,
    #[serde(rename = "jacobi.method")]
    pub jacobi_method: String,
    #[serde(rename = "jacobi.quad_nodes")]
    pub quad_nodes: usize,
    #[serde(rename = "jacobi.substeps")]
    pub jacobi_substeps: usize,
    #[serde(rename = "experiment.n_list")]
    pub n_list: Vec<usize>,
    #[serde(rename = "experiment.test_function")]
    pub test_function: TestFunction,
    #[serde(rename = "experiment.p")]
    pub p: f64,
    #[serde(rename = "wiener.nodes")]
    pub wiener_nodes: usize,
    #[serde(rename = "wiener.kmax")]
    pub kmax: usize,
}

impl Default for RawConfig {
    fn default() -> Self {
        RawConfig {
            manifold_kind: "sphere".into(),
            manifold_dim: 2,
            manifold_radius: 6.0,
            seed: 7,
            n_fine: 256,
            samples: 20_000,
            integrator: "exact".into(),
            substeps: None,
            jacobi_method: "spectral".into(),
            quad_nodes: 8,
            jacobi_substeps: 16,
            n_list: vec![4, 8, 16, 32],
            test_function: TestFunction::EndpointCosDist,
            p: 1.05,
            wiener_nodes: 64,
            kmax: 30,
        }
    }
}

/// Validated experiment settings.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub manifold: ManifoldSpec<f64>,
    pub n_list: Vec<usize>,
    pub n_fine: usize,
    pub samples: usize,
    pub seed: u64,
    pub test_function: TestFunction,
    pub p: f64,
    pub integrator: Integrator,
    pub substeps: usize,
    pub density: DensityConfig,
    pub wiener_nodes: usize,
    pub kmax: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::from_raw(RawConfig::default()).expect("default config is valid")
    }
}

impl ExperimentConfig {
    pub fn from_raw(raw: RawConfig) -> Result<Self> {
        let manifold = match raw.manifold_kind.as_str() {
            "euclidean" => ManifoldSpec::euclidean(raw.manifold_dim)?,
            "sphere" => ManifoldSpec::sphere(raw.manifold_dim, raw.manifold_radius)?,
            other => return Err(Error::Config(format!("unknown manifold.kind `{other}`"))),
        };
        let integrator = match raw.integrator.as_str() {
            "exact" => Integrator::Exact,
            "rk4" => Integrator::Rk4,
            other => return Err(Error::Config(format!("unknown develop.integrator `{other}`"))),
        };
        let substeps = raw.substeps.unwrap_or(match integrator {
            Integrator::Exact => 1,
            Integrator::Rk4 => 16,
        });
        let method = match raw.jacobi_method.as_str() {
            "spectral" => JacobiMethod::Spectral,
            "rk4" => JacobiMethod::Rk4 { substeps: raw.jacobi_substeps },
            other => return Err(Error::Config(format!("unknown jacobi.method `{other}`"))),
        };
        if raw.n_fine == 0 || raw.samples == 0 || substeps == 0 || raw.quad_nodes == 0 {
            return Err(Error::Config("n_fine, samples, substeps and quad_nodes must be positive".into()));
        }
        if raw.n_list.is_empty() {
            return Err(Error::Config("experiment.n_list is empty".into()));
        }
        if let Some(n) = raw.n_list.iter().find(|&&n| n == 0 || raw.n_fine % n != 0) {
            return Err(Error::Config(format!("n = {n} does not divide n_fine = {}", raw.n_fine)));
        }
        Ok(ExperimentConfig {
            manifold,
            n_list: raw.n_list,
            n_fine: raw.n_fine,
            samples: raw.samples,
            seed: raw.seed,
            test_function: raw.test_function,
            p: raw.p,
            integrator,
            substeps,
            density: DensityConfig { quad_nodes: raw.quad_nodes, method, model: CovarianceModel::default() },
            wiener_nodes: raw.wiener_nodes,
            kmax: raw.kmax,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_raw(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Curvature ceiling `3/(17d)` required by convergence runs.
    pub fn convergence_threshold(&self) -> f64 {
        3.0 / (17.0 * self.manifold.dim as f64)
    }

    /// Curvature ceiling `1/(2d)` for the integrability bound.
    pub fn integrability_threshold(&self) -> f64 {
        1.0 / (2.0 * self.manifold.dim as f64)
    }

    /// Hard requirement for convergence runs: `0 ≤ κ < 3/(17d)`.
    pub fn check_convergence_hypothesis(&self) -> Result<()> {
        let k = self.manifold.curvature_bound();
        if !(k >= 0.0 && k < self.convergence_threshold()) {
            return Err(Error::Config(format!(
                "curvature {k:.5} outside [0, 3/(17d)) = [0, {:.5})",
                self.convergence_threshold()
            )));
        }
        Ok(())
    }
}
