//! Single-robot joint-space planner.
//!
//! A goal-biased RRT grows in configuration space against static obstacles
//! only; space-time constraints are enforced afterwards, when a candidate
//! path has been shortcut, timed at the velocity limit, and resampled onto
//! the planning grid. If a timed candidate lands inside a constraint ball the
//! planner first retries with a wait-in-place prefix (holding the start for
//! whole grid steps), then falls back to growing a fresh tree, all within one
//! sample budget. Candidates whose movement cost exceeds `w` times the
//! straight-line lower bound are discarded the same way. Everything is driven
//! by one seeded RNG, so plans are reproducible bit for bit.

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::collision::{is_config_free, Obstacle};
use crate::kinematics::{Config, SerialChain};
#[cfg(not(feature = "std"))]
use crate::math::FloatExt;
use crate::trajectory::{SyncedTrajectorySet, Trajectory, Waypoint};
use crate::ModelError;

/// Keep-out ball in configuration-time: the robot must stay more than `rho`
/// away (L-inf over joints) from `q` at grid index `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub robot: usize,
    pub q: Config,
    pub k: usize,
    pub rho: f64,
}

impl Constraint {
    pub fn violated_by(&self, config_at_k: &Config) -> bool {
        config_at_k.linf_dist(&self.q) <= self.rho
    }
}

#[derive(Debug, Clone)]
pub struct PlannerParams {
    /// Total RRT sample budget for one plan call, across retries.
    pub max_samples: usize,
    /// Probability of steering straight at the goal instead of a random draw.
    pub goal_bias: f64,
    /// Steering step length, radians (L2 over joints).
    pub eta: f64,
    pub shortcut_iterations: usize,
    /// Spacing of collision checks along tree edges, radians.
    pub edge_resolution: f64,
    /// Longest wait-in-place prefix tried before resampling, in grid steps.
    pub max_hold_steps: usize,
    /// Cost ceiling as a multiple of the start-to-goal L1 distance; shortcut
    /// candidates above it are discarded and the tree regrown. Infinity
    /// disables the ceiling.
    pub w: f64,
    pub seed: u64,
}

impl Default for PlannerParams {
    fn default() -> PlannerParams {
        PlannerParams {
            max_samples: 3000,
            goal_bias: 0.1,
            eta: 0.35,
            shortcut_iterations: 80,
            edge_resolution: 0.05,
            max_hold_steps: 10,
            w: f64::INFINITY,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanFailure {
    StartInCollision,
    GoalInCollision,
    /// Sample budget ran out without a constraint-satisfying timed path.
    Exhausted,
    Model(ModelError),
}

impl fmt::Display for PlanFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanFailure::StartInCollision => write!(f, "start configuration is not collision-free"),
            PlanFailure::GoalInCollision => write!(f, "goal configuration is not collision-free"),
            PlanFailure::Exhausted => write!(f, "sample budget exhausted"),
            PlanFailure::Model(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PlanFailure {}

impl From<ModelError> for PlanFailure {
    fn from(e: ModelError) -> PlanFailure {
        PlanFailure::Model(e)
    }
}

/// Plans a timed grid trajectory for one robot from `start` to `goal`.
///
/// The result starts at (start, 0), ends exactly at the goal configuration,
/// keeps every per-joint speed at or below `v_max`, has every grid sample
/// statically collision-free, violates none of the constraints addressed to
/// `robot_id` (at indices past its arrival the robot rests at the goal), and
/// moves at most `w` times the start-to-goal L1 distance. The last guarantee
/// is what keeps a focal frontier nonempty upstream: every per-robot cost is
/// within `w` of its lower bound, so their sums are too.
#[allow(clippy::too_many_arguments)]
pub fn plan(
    robot_id: usize,
    chain: &SerialChain,
    start: &Config,
    goal: &Config,
    obstacles: &[Obstacle],
    constraints: &[Constraint],
    params: &PlannerParams,
    dt: f64,
    v_max: f64,
) -> Result<Trajectory, PlanFailure> {
    if !(dt > 0.0) {
        return Err(ModelError::NonPositiveTimeStep.into());
    }
    if !is_config_free(chain, start, obstacles)? {
        return Err(PlanFailure::StartInCollision);
    }
    if !is_config_free(chain, goal, obstacles)? {
        return Err(PlanFailure::GoalInCollision);
    }
    let mine: Vec<&Constraint> = constraints.iter().filter(|c| c.robot == robot_id).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut samples_left = params.max_samples;
    let cost_ceiling = params.w * start.l1_dist(goal) + 1e-12;

    if start.linf_dist(goal) == 0.0 {
        let traj = assemble(robot_id, alloc::vec![start.clone()], 0, start, dt);
        return match validate_constraints(&traj_grid(&traj), 0, &mine, goal) {
            true => Ok(traj),
            false => Err(PlanFailure::Exhausted),
        };
    }

    loop {
        let path = grow_tree(chain, start, goal, obstacles, params, &mut rng, &mut samples_left)?;
        let path = match path {
            Some(p) => p,
            None => return Err(PlanFailure::Exhausted),
        };
        let path = shortcut(chain, obstacles, path, params, &mut rng);
        let grid = grid_configs(&path, dt, v_max, goal);
        let cost: f64 = grid.windows(2).map(|p| p[0].l1_dist(&p[1])).sum();
        if cost > cost_ceiling {
            // Holds add no movement, so the assembled cost would stand; regrow.
            continue;
        }
        if grid.iter().skip(1).any(|q| !is_config_free(chain, q, obstacles).unwrap_or(false)) {
            // A grid sample slipped between edge checks; grow a new tree.
            continue;
        }
        for hold in 0..=params.max_hold_steps {
            if validate_constraints(&grid, hold, &mine, goal) {
                let mut configs = alloc::vec![start.clone(); hold];
                configs.extend(grid.iter().cloned());
                return Ok(assemble(robot_id, configs, hold + grid.len() - 1, start, dt));
            }
        }
        if samples_left == 0 {
            return Err(PlanFailure::Exhausted);
        }
    }
}

/// Goal-biased RRT. Returns a start-to-goal path, or None once the budget is
/// spent.
fn grow_tree(
    chain: &SerialChain,
    start: &Config,
    goal: &Config,
    obstacles: &[Obstacle],
    params: &PlannerParams,
    rng: &mut ChaCha8Rng,
    samples_left: &mut usize,
) -> Result<Option<Vec<Config>>, PlanFailure> {
    let limits = chain.limits();
    let mut nodes: Vec<Config> = alloc::vec![start.clone()];
    let mut parents: Vec<usize> = alloc::vec![0];

    while *samples_left > 0 {
        *samples_left -= 1;
        let target = if rng.gen::<f64>() < params.goal_bias {
            goal.clone()
        } else {
            Config(limits.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect())
        };
        let (nearest, dist) = nearest_node(&nodes, &target);
        if dist == 0.0 {
            continue;
        }
        let new = if dist <= params.eta {
            target
        } else {
            nodes[nearest].lerp(&target, params.eta / dist)
        };
        if !edge_free(chain, obstacles, &nodes[nearest], &new, params.edge_resolution)? {
            continue;
        }
        let new_index = nodes.len();
        nodes.push(new);
        parents.push(nearest);
        let to_goal = nodes[new_index].l2_dist(goal);
        let reached = if to_goal == 0.0 {
            true
        } else if to_goal <= params.eta
            && edge_free(chain, obstacles, &nodes[new_index], goal, params.edge_resolution)?
        {
            nodes.push(goal.clone());
            parents.push(new_index);
            true
        } else {
            false
        };
        if reached {
            let mut path = Vec::new();
            let mut at = nodes.len() - 1;
            loop {
                path.push(nodes[at].clone());
                if at == 0 {
                    break;
                }
                at = parents[at];
            }
            path.reverse();
            dedupe(&mut path);
            return Ok(Some(path));
        }
    }
    Ok(None)
}

fn nearest_node(nodes: &[Config], target: &Config) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, n) in nodes.iter().enumerate() {
        let d = n.l2_dist(target);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn edge_free(
    chain: &SerialChain,
    obstacles: &[Obstacle],
    a: &Config,
    b: &Config,
    resolution: f64,
) -> Result<bool, PlanFailure> {
    let dist = a.l2_dist(b);
    let steps = (dist / resolution).ceil() as usize;
    for s in 1..=steps {
        let q = if s == steps { b.clone() } else { a.lerp(b, s as f64 / steps as f64) };
        if !is_config_free(chain, &q, obstacles)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Straightens the path: first tries the direct segment, then random splices.
fn shortcut(
    chain: &SerialChain,
    obstacles: &[Obstacle],
    mut path: Vec<Config>,
    params: &PlannerParams,
    rng: &mut ChaCha8Rng,
) -> Vec<Config> {
    let res = params.edge_resolution;
    if path.len() > 2
        && edge_free(chain, obstacles, &path[0], &path[path.len() - 1], res).unwrap_or(false)
    {
        return alloc::vec![path[0].clone(), path[path.len() - 1].clone()];
    }
    for _ in 0..params.shortcut_iterations {
        if path.len() < 4 {
            break;
        }
        let i = rng.gen_range(0..path.len() - 2);
        let j = rng.gen_range(i + 2..path.len());
        if edge_free(chain, obstacles, &path[i], &path[j], res).unwrap_or(false) {
            path.drain(i + 1..j);
        }
    }
    path
}

fn dedupe(path: &mut Vec<Config>) {
    path.dedup_by(|a, b| a.linf_dist(b) == 0.0);
}

/// Times the path at the velocity limit (each segment's duration is its L-inf
/// displacement over v_max) and resamples it onto the dt grid. The last entry
/// is the exact goal configuration.
fn grid_configs(path: &[Config], dt: f64, v_max: f64, goal: &Config) -> Vec<Config> {
    if path.len() < 2 {
        return alloc::vec![goal.clone()];
    }
    let mut waypoints = Vec::with_capacity(path.len());
    let mut t = 0.0;
    waypoints.push(Waypoint { config: path[0].clone(), time: 0.0 });
    for pair in path.windows(2) {
        t += pair[0].linf_dist(&pair[1]) / v_max;
        waypoints.push(Waypoint { config: pair[1].clone(), time: t });
    }
    let raw = Trajectory::new(0, waypoints).expect("deduped path has increasing times");
    let set = SyncedTrajectorySet::synchronize(core::slice::from_ref(&raw), dt)
        .expect("dt validated by plan");
    set.robot(0).configs().to_vec()
}

/// Rest-at-goal view of the gridded path shifted by `hold` steps.
fn config_at<'a>(grid: &'a [Config], hold: usize, start_goal: (&'a Config, &'a Config), k: usize) -> &'a Config {
    if k < hold {
        start_goal.0
    } else if k - hold < grid.len() {
        &grid[k - hold]
    } else {
        start_goal.1
    }
}

fn validate_constraints(grid: &[Config], hold: usize, mine: &[&Constraint], goal: &Config) -> bool {
    let start = &grid[0];
    mine.iter()
        .all(|c| !c.violated_by(config_at(grid, hold, (start, goal), c.k)))
}

fn traj_grid(traj: &Trajectory) -> Vec<Config> {
    traj.waypoints.iter().map(|w| w.config.clone()).collect()
}

fn assemble(robot_id: usize, configs: Vec<Config>, goal_index: usize, start: &Config, dt: f64) -> Trajectory {
    debug_assert_eq!(goal_index + 1, configs.len());
    debug_assert_eq!(&configs[0], start);
    let waypoints = configs
        .into_iter()
        .enumerate()
        .map(|(k, config)| Waypoint { config, time: k as f64 * dt })
        .collect();
    Trajectory::new(robot_id, waypoints).expect("grid times strictly increase")
}
