//! Experiment configuration files and their resolution into runnable
//! scenarios.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::track::{build_track, TrackSpec};
use super::BenchmarkError;
use crate::config::{from_toml_file, from_toml_str, SolverConfig};
use crate::controllers::{ControllerKind, FilterSettings};
use crate::costs::{PendulumCost, Track, VehicleCostWeights};
use crate::dynamics::{BicycleModel, BicycleParams, PendulumModel, PendulumParams};
use crate::learning::{
    collect_dataset, train, CollectConfig, FeatureMap, LearnedModel, TrainConfig, TrainOutcome, TransitionDataset,
};
use crate::parallel::ExecMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Pendulum,
    Vehicle,
}

impl TaskKind {
    pub fn features(self) -> FeatureMap {
        match self {
            TaskKind::Pendulum => FeatureMap::Pendulum,
            TaskKind::Vehicle => FeatureMap::Vehicle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub task: TaskKind,
    pub controller: ControllerKind,
    /// Episode duration (s). Vehicle episodes stop early once all laps are done.
    pub episode_length: f64,
    #[serde(default = "default_substeps")]
    pub plant_substeps: usize,
    #[serde(default)]
    pub initial_state: Option<Vec<f64>>,
    #[serde(default)]
    pub reference_speed_kmh: Option<f64>,
    #[serde(default)]
    pub laps: Option<usize>,
}

fn default_substeps() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PlantConfig {
    Pendulum(PendulumParams),
    Vehicle(BicycleParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Analytic,
    Checkpoint,
}

/// The controller's internal model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub path: Option<PathBuf>,
    /// RK4 substeps of the analytic model per control period.
    pub substeps: usize,
    /// Friction assumed by the analytic vehicle model.
    pub friction: Option<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { kind: ModelKind::Analytic, path: None, substeps: 1, friction: None }
    }
}

/// Everything one experiment file can specify.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default)]
    pub track_file: Option<PathBuf>,
    pub scenario: ScenarioSection,
    /// Solver for the MPPI variants (noise on actions).
    pub solver: SolverConfig,
    /// Solver for the smooth variant (noise on action derivatives).
    #[serde(default)]
    pub smppi: Option<SolverConfig>,
    #[serde(default)]
    pub filters: FilterSettings,
    #[serde(default)]
    pub plant: Option<PlantConfig>,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub pendulum_cost: Option<PendulumCost>,
    #[serde(default)]
    pub vehicle_cost: Option<VehicleCostWeights>,
    #[serde(default)]
    pub track: Option<TrackSpec>,
    #[serde(default)]
    pub collect: Option<CollectConfig>,
    #[serde(default)]
    pub train: Option<TrainConfig>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, BenchmarkError> {
        let cfg: Self = from_toml_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, BenchmarkError> {
        let path = path.as_ref();
        let mut cfg: Self = from_toml_file(path)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn reference_speed(&self) -> Option<f64> {
        self.scenario.reference_speed_kmh.map(|k| k / 3.6)
    }

    pub fn validate(&self) -> Result<(), BenchmarkError> {
        let bad = |m: String| Err(BenchmarkError::Config(m));
        self.solver.validate()?;
        if let Some(s) = &self.smppi {
            s.validate()?;
            if (s.dt - self.solver.dt).abs() > 1e-12 {
                return bad("[smppi] and [solver] must share dt".into());
            }
        }
        if self.scenario.controller == ControllerKind::Smppi && self.smppi.is_none() {
            return bad("controller smppi requires an [smppi] section".into());
        }
        let sc = &self.scenario;
        if !(sc.episode_length > 0.0) {
            return bad("episode_length must be positive".into());
        }
        if sc.episode_length <= self.solver.horizon as f64 * self.solver.dt {
            return bad("episode_length must exceed the planning horizon".into());
        }
        if sc.plant_substeps == 0 || self.model.substeps == 0 {
            return bad("substeps must be at least 1".into());
        }
        let (n, m) = match sc.task {
            TaskKind::Pendulum => (2, 1),
            TaskKind::Vehicle => (6, 2),
        };
        if self.solver.action_dim() != m {
            return bad(format!("solver action dimension {} does not match task", self.solver.action_dim()));
        }
        if let Some(x0) = &sc.initial_state {
            if x0.len() != n || x0.iter().any(|v| !v.is_finite()) {
                return bad("initial_state has the wrong dimension".into());
            }
        }
        match (&self.plant, sc.task) {
            (Some(PlantConfig::Pendulum(p)), TaskKind::Pendulum) => p.validate()?,
            (Some(PlantConfig::Vehicle(p)), TaskKind::Vehicle) => p.validate()?,
            (None, _) => {}
            _ => return bad("[plant] kind does not match scenario task".into()),
        }
        if sc.task == TaskKind::Vehicle {
            match sc.reference_speed_kmh {
                Some(v) if v > 0.0 => {}
                _ => return bad("vehicle scenarios need a positive reference_speed_kmh".into()),
            }
            if sc.laps == Some(0) {
                return bad("laps must be at least 1".into());
            }
        }
        Ok(())
    }

    /// Checks that every file the scenario reads exists.
    pub fn check_files(&self) -> Result<(), BenchmarkError> {
        let missing = |p: PathBuf| Err(BenchmarkError::Config(format!("{} does not exist", p.display())));
        if self.model.kind == ModelKind::Checkpoint {
            match &self.model.path {
                None => return Err(BenchmarkError::Config("[model] kind = checkpoint needs a path".into())),
                Some(p) if !self.resolve(p).exists() => return missing(self.resolve(p)),
                _ => {}
            }
        }
        if let Some(f) = &self.track_file {
            if !self.resolve(f).exists() {
                return missing(self.resolve(f));
            }
        }
        Ok(())
    }

    pub fn pendulum_params(&self) -> PendulumParams {
        match &self.plant {
            Some(PlantConfig::Pendulum(p)) => p.clone(),
            _ => PendulumParams::default(),
        }
    }

    pub fn bicycle_params(&self) -> BicycleParams {
        match &self.plant {
            Some(PlantConfig::Vehicle(p)) => p.clone(),
            _ => BicycleParams::default(),
        }
    }

    pub fn load_track(&self) -> Result<Track, BenchmarkError> {
        match &self.track_file {
            Some(f) => Ok(Track::load(self.resolve(f))?),
            None => build_track(&self.track.clone().unwrap_or_default()),
        }
    }

    /// Runs the `[collect]` section against the `[plant]` section.
    pub fn collect(&self) -> Result<TransitionDataset, BenchmarkError> {
        let cc = self.collect.as_ref().ok_or_else(|| BenchmarkError::Config("missing [collect] section".into()))?;
        let plant = self.plant.as_ref().ok_or_else(|| BenchmarkError::Config("missing [plant] section".into()))?;
        let dt = self.solver.dt;
        let sub = self.scenario.plant_substeps;
        let bounds = self.solver.action_bounds();
        Ok(match plant {
            PlantConfig::Pendulum(p) => collect_dataset(&PendulumModel::new(p.clone(), dt, sub)?, &bounds, cc)?,
            PlantConfig::Vehicle(p) => collect_dataset(&BicycleModel::new(p.clone(), dt, sub)?, &bounds, cc)?,
        })
    }

    /// Fits a model for this task with the `[train]` section (defaults if
    /// absent).
    pub fn train(&self, dataset: &TransitionDataset) -> Result<TrainOutcome, BenchmarkError> {
        let tc = self.train.clone().unwrap_or_default();
        Ok(train(dataset, self.scenario.task.features(), self.solver.dt, &tc)?)
    }

    /// Resolves the file into a runnable scenario.
    pub fn scenario(&self) -> Result<Scenario, BenchmarkError> {
        self.validate()?;
        self.check_files()?;
        let sc = &self.scenario;
        let model = match self.model.kind {
            ModelKind::Analytic => ControllerModel::Analytic { substeps: self.model.substeps },
            ModelKind::Checkpoint => {
                let path = self.resolve(self.model.path.as_ref().expect("validated"));
                let m = LearnedModel::load(&path)?;
                if (m.dt - self.solver.dt).abs() > 1e-12 || m.features != sc.task.features() {
                    return Err(BenchmarkError::Config(format!(
                        "checkpoint {} (dt {}, {:?}) does not fit this task",
                        path.display(),
                        m.dt,
                        m.features
                    )));
                }
                ControllerModel::Learned(Arc::new(m))
            }
        };
        let task = match sc.task {
            TaskKind::Pendulum => TaskSetup::Pendulum {
                params: self.pendulum_params(),
                cost: self.pendulum_cost.clone().unwrap_or_default(),
                initial: sc.initial_state.clone().unwrap_or_else(|| vec![0.0, 0.0]),
            },
            TaskKind::Vehicle => {
                let params = self.bicycle_params();
                let track = Arc::new(self.load_track()?);
                let reference_speed = self.reference_speed().expect("validated");
                let initial = match &sc.initial_state {
                    Some(x) => x.clone(),
                    None => {
                        let (x, y, yaw) = track.pose_at(0.0);
                        vec![x, y, yaw, reference_speed, 0.0, 0.0]
                    }
                };
                TaskSetup::Vehicle {
                    model_friction: self.model.friction.unwrap_or(params.friction),
                    params,
                    weights: self.vehicle_cost.clone().unwrap_or_default(),
                    track,
                    reference_speed,
                    laps: sc.laps.unwrap_or(1),
                    initial,
                }
            }
        };
        Ok(Scenario {
            task,
            controller: sc.controller,
            mppi: self.solver.clone(),
            smppi: self.smppi.clone().unwrap_or_else(|| self.solver.clone()),
            filters: self.filters.clone(),
            episode_length: sc.episode_length,
            plant_substeps: sc.plant_substeps,
            model,
            seeds: self.seeds.clone(),
            exec: ExecMode::default(),
        })
    }
}

#[derive(Debug, Clone)]
pub enum ControllerModel {
    Analytic { substeps: usize },
    Learned(Arc<LearnedModel>),
}

#[derive(Debug, Clone)]
pub enum TaskSetup {
    Pendulum {
        params: PendulumParams,
        cost: PendulumCost,
        initial: Vec<f64>,
    },
    Vehicle {
        params: BicycleParams,
        weights: VehicleCostWeights,
        track: Arc<Track>,
        reference_speed: f64,
        laps: usize,
        initial: Vec<f64>,
        model_friction: f64,
    },
}

impl TaskSetup {
    pub fn kind(&self) -> TaskKind {
        match self {
            TaskSetup::Pendulum { .. } => TaskKind::Pendulum,
            TaskSetup::Vehicle { .. } => TaskKind::Vehicle,
        }
    }
}

/// A fully resolved closed-loop experiment.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub task: TaskSetup,
    pub controller: ControllerKind,
    pub mppi: SolverConfig,
    pub smppi: SolverConfig,
    pub filters: FilterSettings,
    pub episode_length: f64,
    pub plant_substeps: usize,
    pub model: ControllerModel,
    pub seeds: Vec<u64>,
    /// Rollout parallelism inside each controller step.
    pub exec: ExecMode,
}

impl Scenario {
    pub fn dt(&self) -> f64 {
        self.mppi.dt
    }

    pub fn with_controller(&self, controller: ControllerKind) -> Self {
        Self { controller, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), BenchmarkError> {
        if !(self.episode_length > self.mppi.horizon as f64 * self.dt()) {
            return Err(BenchmarkError::Config("episode_length must exceed the planning horizon".into()));
        }
        if self.plant_substeps == 0 {
            return Err(BenchmarkError::Config("plant_substeps must be at least 1".into()));
        }
        Ok(())
    }
}
