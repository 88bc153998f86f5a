//! Scenario files: one JSON document describing robots, obstacles, the
//! shared task-space box used when sampling random instances, and parameter
//! defaults. All units are SI, all angles radians.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use mmplan_core::apf::ApfParams;
use mmplan_core::collision::{is_config_free, Obstacle};
use mmplan_core::highlevel::{Problem, SearchMode, SearchParams};
use mmplan_core::kinematics::{Config, SerialChain};
use mmplan_core::lowlevel::PlannerParams;
use mmplan_core::math::Vec3;

pub const SCHEMA_VERSION: u32 = 1;

/// A planar arm: revolute joints about z, links along x, collision spheres
/// spaced evenly along each link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    pub base: [f64; 3],
    pub link_lengths: Vec<f64>,
    /// One (lo, hi) applied to every joint.
    pub joint_limits: (f64, f64),
    pub spheres_per_link: usize,
    pub sphere_radius: f64,
    pub start: Vec<f64>,
    pub goal: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ObstacleSpec {
    Sphere { center: [f64; 3], radius: f64 },
    Aabb { min: [f64; 3], max: [f64; 3] },
}

impl ObstacleSpec {
    fn to_obstacle(&self) -> Obstacle {
        match *self {
            ObstacleSpec::Sphere { center, radius } => {
                Obstacle::Sphere { center: Vec3::from_array(center), radius }
            }
            ObstacleSpec::Aabb { min, max } => {
                Obstacle::Aabb { min: Vec3::from_array(min), max: Vec3::from_array(max) }
            }
        }
    }
}

/// Axis-aligned box every sampled end-effector position must fall in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceBox {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl WorkspaceBox {
    pub fn contains(&self, p: Vec3) -> bool {
        let p = p.as_array();
        (0..3).all(|i| self.min[i] <= p[i] && p[i] <= self.max[i])
    }
}

/// Flat bag of every tunable, mirroring the engine parameter structs; any
/// subset may appear in a file, the rest fall back to engine defaults (plus
/// a 60 s time limit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamSpec {
    pub mode: String,
    pub w: f64,
    pub dt: f64,
    pub time_limit: Option<f64>,
    pub node_limit: Option<usize>,
    pub v_max: f64,
    pub eps_margin: f64,
    pub rho: f64,
    pub rescale_after_modify: bool,
    pub alpha: f64,
    pub k_rep: f64,
    pub d0: f64,
    pub max_iter: usize,
    pub max_samples: usize,
    pub goal_bias: f64,
    pub eta: f64,
    pub shortcut_iterations: usize,
    pub max_hold_steps: usize,
    pub seed: u64,
}

impl Default for ParamSpec {
    fn default() -> ParamSpec {
        let s = SearchParams::default();
        ParamSpec {
            mode: s.mode.as_str().to_owned(),
            w: s.w,
            dt: s.dt,
            time_limit: Some(60.0),
            node_limit: None,
            v_max: s.v_max,
            eps_margin: s.eps_margin,
            rho: s.rho,
            rescale_after_modify: s.rescale_after_modify,
            alpha: s.apf.alpha,
            k_rep: s.apf.k_rep,
            d0: s.apf.d0,
            max_iter: s.apf.max_iter,
            max_samples: s.planner.max_samples,
            goal_bias: s.planner.goal_bias,
            eta: s.planner.eta,
            shortcut_iterations: s.planner.shortcut_iterations,
            max_hold_steps: s.planner.max_hold_steps,
            seed: s.planner.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub schema: u32,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub robots: Vec<RobotSpec>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleSpec>,
    pub workspace: WorkspaceBox,
    #[serde(default)]
    pub params: ParamSpec,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario> {
        let scenario: Scenario = serde_json::from_str(text).context("malformed scenario JSON")?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Scenario::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("scenario serializes");
        text.push('\n');
        text
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).with_context(|| format!("writing {}", path.display()))
    }

    pub fn chains(&self) -> Result<Vec<SerialChain>> {
        self.robots
            .iter()
            .enumerate()
            .map(|(i, r)| {
                SerialChain::planar(
                    Vec3::from_array(r.base),
                    &r.link_lengths,
                    r.joint_limits,
                    r.spheres_per_link,
                    r.sphere_radius,
                )
                .map_err(|e| anyhow::anyhow!("robot {i}: {e}"))
            })
            .collect()
    }

    pub fn problem(&self) -> Result<Problem> {
        Ok(Problem {
            chains: self.chains()?,
            starts: self.robots.iter().map(|r| Config(r.start.clone())).collect(),
            goals: self.robots.iter().map(|r| Config(r.goal.clone())).collect(),
            obstacles: self.obstacles.iter().map(ObstacleSpec::to_obstacle).collect(),
        })
    }

    pub fn search_params(&self) -> Result<SearchParams> {
        let p = &self.params;
        let mode: SearchMode =
            p.mode.parse().map_err(|e| anyhow::anyhow!("param mode \"{}\": {e}", p.mode))?;
        Ok(SearchParams {
            mode,
            w: p.w,
            dt: p.dt,
            time_limit: p.time_limit,
            node_limit: p.node_limit,
            v_max: p.v_max,
            eps_margin: p.eps_margin,
            rho: p.rho,
            rescale_after_modify: p.rescale_after_modify,
            planner: PlannerParams {
                max_samples: p.max_samples,
                goal_bias: p.goal_bias,
                eta: p.eta,
                shortcut_iterations: p.shortcut_iterations,
                max_hold_steps: p.max_hold_steps,
                seed: p.seed,
                ..PlannerParams::default()
            },
            apf: ApfParams { k_rep: p.k_rep, d0: p.d0, alpha: p.alpha, max_iter: p.max_iter },
        })
    }

    fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            bail!("unsupported schema version {} (this build reads {})", self.schema, SCHEMA_VERSION);
        }
        if self.robots.is_empty() {
            bail!("scenario has no robots");
        }
        if !(self.params.dt > 0.0) {
            bail!("dt must be positive");
        }
        if !(self.params.v_max > 0.0) {
            bail!("v_max must be positive");
        }
        if self.params.w < 1.0 {
            bail!("w must be at least 1");
        }
        for i in 0..3 {
            if self.workspace.min[i] > self.workspace.max[i] {
                bail!("workspace box has min above max on axis {i}");
            }
        }
        self.search_params()?;
        let problem = self.problem()?;
        for (i, (chain, r)) in problem.chains.iter().zip(&self.robots).enumerate() {
            if r.start.len() != chain.dof() || r.goal.len() != chain.dof() {
                bail!("robot {i}: start/goal length does not match {} joints", chain.dof());
            }
            if !is_config_free(chain, &problem.starts[i], &problem.obstacles)? {
                bail!("robot {i}: start configuration is not collision-free");
            }
            if !is_config_free(chain, &problem.goals[i], &problem.obstacles)? {
                bail!("robot {i}: goal configuration is not collision-free");
            }
        }
        Ok(())
    }
}
