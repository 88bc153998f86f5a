//! Conflict-tree search over synchronized multi-robot trajectories.
//!
//! Each tree node carries a full set of trajectories plus the constraints
//! that produced them. The root plans every robot independently; while the
//! best node still has robot-robot conflicts, the search branches on the
//! earliest one, constraining each involved robot away from its conflicting
//! configuration in one child and replanning it. Node selection is either
//! best-first on cost or a bounded-suboptimal focal rule that prefers fewer
//! conflicts among nodes within a cost factor of the lower bound. Two
//! gradient-based shortcuts can be switched in: deforming a freshly
//! replanned trajectory away from the other robots, and a one-shot repair
//! that deforms the single robot involved in all of a node's conflicts
//! before any branching happens.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::apf::{modify_motion, ApfParams};
use crate::collision::{get_conflicts, timed_violations, Conflict, Obstacle};
use crate::kinematics::{Config, SerialChain};
use crate::lowlevel::{plan, Constraint, PlanFailure, PlannerParams};
use crate::trajectory::{SyncedTrajectorySet, Trajectory};
use crate::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Best-first on cost over the whole frontier; no deformation.
    Cbs,
    /// Focal rule (fewest conflicts within the w bound); no deformation.
    Ecbs,
    /// Focal rule plus trajectory deformation and the one-shot repair.
    ApfEcbs,
    /// Deformation on branching only; the one-shot repair stays off.
    ApfEcbsNf,
}

impl SearchMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchMode::Cbs => "cbs",
            SearchMode::Ecbs => "ecbs",
            SearchMode::ApfEcbs => "apf-ecbs",
            SearchMode::ApfEcbsNf => "apf-ecbs-nf",
        }
    }

    /// Deform replanned trajectories along the repulsive gradient.
    pub fn uses_apf(self) -> bool {
        matches!(self, SearchMode::ApfEcbs | SearchMode::ApfEcbsNf)
    }

    /// Try the one-shot critical-robot repair before branching.
    pub fn uses_fast_track(self) -> bool {
        matches!(self, SearchMode::ApfEcbs)
    }

    /// Select through the focal subset rather than plain cost order.
    pub fn uses_focal(self) -> bool {
        !matches!(self, SearchMode::Cbs)
    }

    pub const ALL: [SearchMode; 4] =
        [SearchMode::Cbs, SearchMode::Ecbs, SearchMode::ApfEcbs, SearchMode::ApfEcbsNf];
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseModeError;

impl fmt::Display for ParseModeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("unknown search mode (expected cbs, ecbs, apf-ecbs, or apf-ecbs-nf)")
    }
}

impl FromStr for SearchMode {
    type Err = ParseModeError;

    fn from_str(s: &str) -> Result<SearchMode, ParseModeError> {
        match s {
            "cbs" => Ok(SearchMode::Cbs),
            "ecbs" => Ok(SearchMode::Ecbs),
            "apf-ecbs" => Ok(SearchMode::ApfEcbs),
            "apf-ecbs-nf" => Ok(SearchMode::ApfEcbsNf),
            _ => Err(ParseModeError),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchParams {
    pub mode: SearchMode,
    /// Suboptimality factor of the focal rule; >= 1.
    pub w: f64,
    /// Grid step of the shared time discretization, seconds.
    pub dt: f64,
    /// Wall-clock budget in seconds; None runs unbounded.
    pub time_limit: Option<f64>,
    /// Cap on expanded nodes; None runs unbounded.
    pub node_limit: Option<usize>,
    /// Per-joint speed cap, rad/s.
    pub v_max: f64,
    /// Sphere inflation used by conflict checks, meters.
    pub eps_margin: f64,
    /// Radius of the configuration ball a constraint forbids, radians.
    pub rho: f64,
    /// Re-stretch segment times right after each deformation instead of only
    /// at solution extraction. Either way the final solution is speed-safe;
    /// this only changes how intermediate nodes report time.
    pub rescale_after_modify: bool,
    pub planner: PlannerParams,
    pub apf: ApfParams,
}

impl Default for SearchParams {
    fn default() -> SearchParams {
        SearchParams {
            mode: SearchMode::ApfEcbs,
            w: 1.5,
            dt: 0.1,
            time_limit: None,
            node_limit: None,
            v_max: 0.8,
            eps_margin: 0.0,
            rho: 0.05,
            rescale_after_modify: true,
            planner: PlannerParams::default(),
            apf: ApfParams::default(),
        }
    }
}

/// A planning instance: one chain, start, and goal per robot, plus the
/// static obstacles all robots share.
#[derive(Debug, Clone)]
pub struct Problem {
    pub chains: Vec<SerialChain>,
    pub starts: Vec<Config>,
    pub goals: Vec<Config>,
    pub obstacles: Vec<Obstacle>,
}

impl Problem {
    pub fn num_robots(&self) -> usize {
        self.chains.len()
    }
}

/// One node of the constraint tree.
#[derive(Debug, Clone)]
pub struct CtNode {
    pub id: u64,
    pub set: SyncedTrajectorySet,
    pub constraints: Vec<Constraint>,
    pub conflicts: Vec<Conflict>,
    pub cost: f64,
    pub lb_sum: f64,
    /// Whether the one-shot repair has been tried on this node.
    pub fast_track_attempted: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchMetrics {
    /// Nodes popped that still had conflicts and therefore triggered work.
    pub expanded: u64,
    /// Nodes inserted into the frontier, root included.
    pub generated: u64,
    pub low_level_calls: u64,
    pub modify_motion_calls: u64,
    pub fast_track_attempts: u64,
    /// Nodes whose repair flag flipped from untried to tried.
    pub fast_track_attempted_nodes: u64,
    pub fast_track_successes: u64,
    /// Pops that had to fall back outside the focal bound.
    pub focal_violations: u64,
    /// Conflict-free grid nodes bounced back because the fine-resolution
    /// sweep still found an overlap between grid points.
    pub dense_rejections: u64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchFailure {
    Timeout,
    NodeLimit,
    /// The frontier emptied without a conflict-free node.
    Exhausted,
    RootPlanFailed { robot: usize, cause: PlanFailure },
    Model(ModelError),
}

impl fmt::Display for SearchFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchFailure::Timeout => f.write_str("time limit reached"),
            SearchFailure::NodeLimit => f.write_str("node limit reached"),
            SearchFailure::Exhausted => f.write_str("search frontier exhausted"),
            SearchFailure::RootPlanFailed { robot, cause } => {
                write!(f, "initial plan for robot {robot} failed: {cause}")
            }
            SearchFailure::Model(e) => write!(f, "model error: {e}"),
        }
    }
}

impl From<ModelError> for SearchFailure {
    fn from(e: ModelError) -> SearchFailure {
        SearchFailure::Model(e)
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    /// Per-robot trajectories, truncated at each robot's arrival.
    pub trajectories: Vec<Trajectory>,
    /// The full synchronized set the trajectories came from, time-scaled.
    pub set: SyncedTrajectorySet,
    pub cost: f64,
    pub makespan: f64,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub result: Result<Solution, SearchFailure>,
    pub metrics: SearchMetrics,
}

/// Indices (in frontier order) of the nodes whose cost is within `w` times
/// the smallest lower bound present in the frontier.
pub fn build_focal(open: &[CtNode], w: f64) -> Vec<usize> {
    let min_lb = open.iter().map(|n| n.lb_sum).fold(f64::INFINITY, f64::min);
    let bound = w * min_lb + 1e-9;
    (0..open.len()).filter(|&i| open[i].cost <= bound).collect()
}

/// The robot involved in every one of the conflicts, lowest index on ties;
/// None when no single robot covers them all or there are no conflicts.
pub fn find_critical_robot(conflicts: &[Conflict]) -> Option<usize> {
    let first = conflicts.first()?;
    let mut candidates = alloc::vec![first.i, first.j];
    for c in conflicts {
        candidates.retain(|&r| r == c.i || r == c.j);
    }
    candidates.into_iter().min()
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Every (node, robot) replan gets its own deterministic stream.
fn derive_seed(base: u64, node_id: u64, robot: usize) -> u64 {
    splitmix64(base ^ splitmix64(node_id) ^ splitmix64(!(robot as u64)))
}

fn cbs_order(a: &CtNode, b: &CtNode) -> core::cmp::Ordering {
    a.cost.partial_cmp(&b.cost).unwrap().then(a.id.cmp(&b.id))
}

fn focal_order(a: &CtNode, b: &CtNode) -> core::cmp::Ordering {
    a.conflicts
        .len()
        .cmp(&b.conflicts.len())
        .then(a.cost.partial_cmp(&b.cost).unwrap())
        .then(a.id.cmp(&b.id))
}

/// Picks the next node to pop. The bool reports a focal fallback: the focal
/// subset was empty and the pop had to ignore the bound.
fn select(open: &[CtNode], mode: SearchMode, w: f64) -> (usize, bool) {
    if mode.uses_focal() {
        let focal = build_focal(open, w);
        if let Some(best) = focal.into_iter().min_by(|&a, &b| focal_order(&open[a], &open[b])) {
            return (best, false);
        }
        let best = (0..open.len()).min_by(|&a, &b| cbs_order(&open[a], &open[b])).unwrap();
        (best, true)
    } else {
        let best = (0..open.len()).min_by(|&a, &b| cbs_order(&open[a], &open[b])).unwrap();
        (best, false)
    }
}

fn make_node(
    id: u64,
    set: SyncedTrajectorySet,
    constraints: Vec<Constraint>,
    problem: &Problem,
    params: &SearchParams,
) -> Result<CtNode, ModelError> {
    let conflicts = get_conflicts(&set, &problem.chains, params.eps_margin)?;
    Ok(CtNode {
        id,
        cost: set.cost(),
        lb_sum: set.lb_sum(),
        set,
        constraints,
        conflicts,
        fast_track_attempted: false,
    })
}

/// Plans all robots jointly and returns the outcome together with search
/// metrics. `elapsed` supplies wall-clock seconds since the call started;
/// it is injected so the search itself stays clock-free.
///
/// A returned solution is conflict-free on the grid and under a ten-fold
/// finer sweep between grid points, respects every robot's static freedom,
/// and is time-scaled so no joint exceeds `v_max`.
pub fn plan_all<F: FnMut() -> f64>(
    problem: &Problem,
    params: &SearchParams,
    elapsed: &mut F,
) -> SearchOutcome {
    let mut metrics = SearchMetrics::default();
    let result = run_search(problem, params, elapsed, &mut metrics);
    metrics.elapsed_seconds = elapsed();
    SearchOutcome { result, metrics }
}

/// [`plan_all`] with the process clock injected.
#[cfg(feature = "std")]
pub fn plan_all_timed(problem: &Problem, params: &SearchParams) -> SearchOutcome {
    let start = std::time::Instant::now();
    plan_all(problem, params, &mut || start.elapsed().as_secs_f64())
}

fn run_search<F: FnMut() -> f64>(
    problem: &Problem,
    params: &SearchParams,
    elapsed: &mut F,
    metrics: &mut SearchMetrics,
) -> Result<Solution, SearchFailure> {
    let n = problem.chains.len();
    if n == 0 {
        return Err(SearchFailure::Model(ModelError::EmptyTrajectorySet));
    }
    if problem.starts.len() != n || problem.goals.len() != n {
        return Err(SearchFailure::Model(ModelError::DimensionMismatch {
            expected: n,
            got: problem.starts.len().min(problem.goals.len()),
        }));
    }
    debug_assert!(params.w >= 1.0);

    let mut trajs = Vec::with_capacity(n);
    for r in 0..n {
        let mut pp = params.planner.clone();
        if params.mode.uses_focal() {
            // Focal selection stays sound only while every per-robot cost is
            // within w of its bound; hand the ceiling down.
            pp.w = pp.w.min(params.w);
        }
        pp.seed = derive_seed(params.planner.seed, 0, r);
        metrics.low_level_calls += 1;
        match plan(
            r,
            &problem.chains[r],
            &problem.starts[r],
            &problem.goals[r],
            &problem.obstacles,
            &[],
            &pp,
            params.dt,
            params.v_max,
        ) {
            Ok(t) => trajs.push(t),
            Err(cause) => return Err(SearchFailure::RootPlanFailed { robot: r, cause }),
        }
    }
    let root_set = SyncedTrajectorySet::synchronize(&trajs, params.dt)?;
    let mut open = alloc::vec![make_node(0, root_set, Vec::new(), problem, params)?];
    metrics.generated = 1;
    let mut next_id: u64 = 1;

    loop {
        if open.is_empty() {
            return Err(SearchFailure::Exhausted);
        }
        if let Some(tl) = params.time_limit {
            if elapsed() > tl {
                return Err(SearchFailure::Timeout);
            }
        }
        if let Some(nl) = params.node_limit {
            if metrics.expanded >= nl as u64 {
                return Err(SearchFailure::NodeLimit);
            }
        }

        let (idx, fallback) = select(&open, params.mode, params.w);
        if fallback {
            metrics.focal_violations += 1;
        }
        let mut node = open.swap_remove(idx);

        if node.conflicts.is_empty() {
            // Check the schedule that would actually be returned: the scaled
            // one, swept at a tenth of the grid step in wall time, so every
            // stretched segment is sampled as finely as a replay would see it.
            let final_set = node.set.scale_time(params.v_max);
            let dense =
                timed_violations(&final_set, &problem.chains, params.dt / 10.0, params.eps_margin)?;
            if dense.is_empty() {
                return Ok(Solution {
                    trajectories: final_set.to_trajectories(),
                    cost: final_set.cost(),
                    makespan: final_set.makespan(),
                    set: final_set,
                });
            }
            // The grid missed an overlap between samples. Surface it as
            // ordinary conflicts at the nearest grid index and put the node
            // back, so the regular machinery resolves it.
            let mut injected: Vec<Conflict> = dense
                .iter()
                .map(|v| Conflict {
                    i: v.i,
                    j: v.j,
                    k: v.nearest_index,
                    t: node.set.times()[v.nearest_index],
                    q_i: node.set.config_at(v.i, v.nearest_index).clone(),
                    q_j: node.set.config_at(v.j, v.nearest_index).clone(),
                })
                .collect();
            injected.sort_by(|a, b| (a.k, a.i, a.j).cmp(&(b.k, b.i, b.j)));
            injected.dedup_by(|a, b| (a.k, a.i, a.j) == (b.k, b.i, b.j));
            node.conflicts = injected;
            metrics.dense_rejections += 1;
            open.push(node);
            continue;
        }

        metrics.expanded += 1;

        if params.mode.uses_fast_track() && !node.fast_track_attempted {
            if let Some(rc) = find_critical_robot(&node.conflicts) {
                node.fast_track_attempted = true;
                metrics.fast_track_attempts += 1;
                metrics.fast_track_attempted_nodes += 1;
                metrics.modify_motion_calls += 1;
                let out = modify_motion(
                    &node.set,
                    rc,
                    &node.constraints,
                    &problem.obstacles,
                    &problem.chains,
                    &params.apf,
                )?;
                // A repair that overspends the robot's movement budget would
                // let node costs drift past w times their bounds and starve
                // the focal subset; skip it and branch instead.
                let moved: f64 = out.configs.windows(2).map(|p| p[0].l1_dist(&p[1])).sum();
                let budget = params.w * problem.starts[rc].l1_dist(&problem.goals[rc]) + 1e-12;
                if out.satisfies_constraints && moved <= budget {
                    let mut candidate = node.set.clone();
                    candidate.set_robot_configs(rc, out.configs)?;
                    if params.rescale_after_modify {
                        candidate = candidate.scale_time(params.v_max);
                    }
                    let conflicts = get_conflicts(&candidate, &problem.chains, params.eps_margin)?;
                    if conflicts.is_empty() {
                        // Full repair: swap the trajectories in and leave the
                        // node in the frontier to compete again.
                        node.cost = candidate.cost();
                        node.set = candidate;
                        node.conflicts = conflicts;
                        metrics.fast_track_successes += 1;
                        open.push(node);
                        continue;
                    }
                }
                // Partial repairs are discarded; branch as usual.
            }
        }

        let c = node.conflicts[0].clone();
        for (robot, q_c) in [(c.i, &c.q_i), (c.j, &c.q_j)] {
            let child_id = next_id;
            next_id += 1;
            let mut constraints = node.constraints.clone();
            constraints.push(Constraint { robot, q: q_c.clone(), k: c.k, rho: params.rho });
            let mut pp = params.planner.clone();
            if params.mode.uses_focal() {
                pp.w = pp.w.min(params.w);
            }
            pp.seed = derive_seed(params.planner.seed, child_id, robot);
            metrics.low_level_calls += 1;
            let traj = match plan(
                robot,
                &problem.chains[robot],
                &problem.starts[robot],
                &problem.goals[robot],
                &problem.obstacles,
                &constraints,
                &pp,
                params.dt,
                params.v_max,
            ) {
                Ok(t) => t,
                // A child that cannot be replanned is dropped; its sibling
                // and the rest of the frontier carry the search.
                Err(_) => continue,
            };
            let mut set = node.set.clone();
            set.replace_robot(robot, &traj)?;
            if params.mode.uses_apf() {
                metrics.modify_motion_calls += 1;
                let out = modify_motion(
                    &set,
                    robot,
                    &constraints,
                    &problem.obstacles,
                    &problem.chains,
                    &params.apf,
                )?;
                let moved: f64 = out.configs.windows(2).map(|p| p[0].l1_dist(&p[1])).sum();
                let budget =
                    params.w * problem.starts[robot].l1_dist(&problem.goals[robot]) + 1e-12;
                if out.satisfies_constraints && moved <= budget {
                    set.set_robot_configs(robot, out.configs)?;
                    if params.rescale_after_modify {
                        set = set.scale_time(params.v_max);
                    }
                }
            }
            let child = make_node(child_id, set, constraints, problem, params)?;
            metrics.generated += 1;
            open.push(child);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec3;
    use crate::trajectory::{Trajectory, Waypoint};
    use core::f64::consts::PI;

    fn virtual_clock() -> impl FnMut() -> f64 {
        let mut ticks = 0u64;
        move || {
            ticks += 1;
            ticks as f64 * 1e-6
        }
    }

    fn one_dof_chain(base_x: f64) -> SerialChain {
        SerialChain::planar(Vec3::new(base_x, 0.0, 0.0), &[0.5], (-2.0 * PI, 2.0 * PI), 2, 0.05)
            .unwrap()
    }

    /// Two facing arms whose sweeps cross the shared corridor at the same
    /// time; unsolvable without coordination, solvable by waiting.
    fn crossing_problem() -> Problem {
        Problem {
            chains: vec![one_dof_chain(0.0), one_dof_chain(0.82)],
            starts: vec![Config(vec![0.5]), Config(vec![PI - 0.5])],
            goals: vec![Config(vec![-0.5]), Config(vec![PI + 0.5])],
            obstacles: vec![],
        }
    }

    fn test_params(mode: SearchMode) -> SearchParams {
        SearchParams {
            mode,
            node_limit: Some(5000),
            apf: ApfParams { alpha: 1e-3, d0: 0.2, ..ApfParams::default() },
            ..SearchParams::default()
        }
    }

    fn check_solution(problem: &Problem, params: &SearchParams, sol: &Solution) {
        assert!(get_conflicts(&sol.set, &problem.chains, params.eps_margin).unwrap().is_empty());
        assert!(timed_violations(&sol.set, &problem.chains, params.dt / 10.0, params.eps_margin)
            .unwrap()
            .is_empty());
        assert!(sol.set.max_joint_speed() <= params.v_max + 1e-9);
        for (r, t) in sol.trajectories.iter().enumerate() {
            assert_eq!(t.start(), &problem.starts[r]);
            assert_eq!(t.goal(), &problem.goals[r]);
        }
    }

    #[test]
    fn mode_strings_round_trip() {
        for mode in SearchMode::ALL {
            assert_eq!(mode.as_str().parse::<SearchMode>().unwrap(), mode);
        }
        assert!("best-first".parse::<SearchMode>().is_err());
    }

    #[test]
    fn focal_contains_exactly_the_nodes_within_the_bound() {
        let set = SyncedTrajectorySet::synchronize(
            &[Trajectory::new(
                0,
                vec![
                    Waypoint { config: Config(vec![0.0]), time: 0.0 },
                    Waypoint { config: Config(vec![1.0]), time: 1.0 },
                ],
            )
            .unwrap()],
            0.5,
        )
        .unwrap();
        let stub = |id: u64, cost: f64, lb: f64, n_conflicts: usize| CtNode {
            id,
            set: set.clone(),
            constraints: vec![],
            conflicts: vec![
                Conflict {
                    i: 0,
                    j: 1,
                    k: 0,
                    t: 0.0,
                    q_i: Config(vec![0.0]),
                    q_j: Config(vec![0.0]),
                };
                n_conflicts
            ],
            cost,
            lb_sum: lb,
            fast_track_attempted: false,
        };
        let open = vec![stub(0, 10.0, 10.0, 3), stub(1, 14.0, 12.0, 1), stub(2, 16.0, 11.0, 0)];
        assert_eq!(build_focal(&open, 1.5), vec![0, 1]);
        // Selection prefers the fewest conflicts inside the focal subset,
        // even though node 0 is cheaper.
        assert_eq!(select(&open, SearchMode::Ecbs, 1.5), (1, false));
        assert_eq!(select(&open, SearchMode::Cbs, 1.5), (0, false));
        // w=1 keeps only nodes whose cost equals the smallest lower bound.
        assert_eq!(build_focal(&open, 1.0), vec![0]);
    }

    #[test]
    fn critical_robot_worked_examples() {
        let conflict = |i: usize, j: usize| Conflict {
            i,
            j,
            k: 0,
            t: 0.0,
            q_i: Config(vec![0.0]),
            q_j: Config(vec![0.0]),
        };
        assert_eq!(find_critical_robot(&[conflict(1, 2), conflict(1, 3)]), Some(1));
        assert_eq!(find_critical_robot(&[conflict(1, 2), conflict(3, 4)]), None);
        assert_eq!(find_critical_robot(&[conflict(1, 2)]), Some(1));
        assert_eq!(find_critical_robot(&[]), None);
    }

    #[test]
    fn single_robot_solves_at_the_root() {
        let problem = Problem {
            chains: vec![one_dof_chain(0.0)],
            starts: vec![Config(vec![0.0])],
            goals: vec![Config(vec![1.0])],
            obstacles: vec![],
        };
        let out = plan_all(&problem, &test_params(SearchMode::ApfEcbs), &mut virtual_clock());
        let sol = out.result.expect("should solve");
        check_solution(&problem, &test_params(SearchMode::ApfEcbs), &sol);
        assert_eq!(out.metrics.expanded, 0);
        assert_eq!(out.metrics.generated, 1);
        assert!((sol.cost - 1.0).abs() < 1e-6);
    }

    #[test]
    fn far_apart_robots_solve_at_the_root() {
        let problem = Problem {
            chains: vec![one_dof_chain(0.0), one_dof_chain(10.0)],
            starts: vec![Config(vec![0.0]), Config(vec![0.0])],
            goals: vec![Config(vec![1.0]), Config(vec![-1.0])],
            obstacles: vec![],
        };
        let out = plan_all(&problem, &test_params(SearchMode::ApfEcbs), &mut virtual_clock());
        assert!(out.result.is_ok());
        assert_eq!(out.metrics.expanded, 0);
        assert_eq!(out.metrics.generated, 1);
    }

    #[test]
    fn crossing_arms_get_a_conflict_free_solution() {
        let problem = crossing_problem();
        for mode in SearchMode::ALL {
            let params = test_params(mode);
            let out = plan_all(&problem, &params, &mut virtual_clock());
            let sol = out.result.unwrap_or_else(|e| panic!("{mode}: {e}"));
            check_solution(&problem, &params, &sol);
            assert!(out.metrics.expanded >= 1, "{mode}: the root must have conflicts");
        }
    }

    #[test]
    fn baseline_modes_never_deform() {
        let problem = crossing_problem();
        for mode in [SearchMode::Cbs, SearchMode::Ecbs] {
            let out = plan_all(&problem, &test_params(mode), &mut virtual_clock());
            assert!(out.result.is_ok());
            assert_eq!(out.metrics.modify_motion_calls, 0, "{mode}");
            assert_eq!(out.metrics.fast_track_attempts, 0, "{mode}");
        }
    }

    #[test]
    fn nf_mode_deforms_but_never_fast_tracks() {
        let problem = crossing_problem();
        let out = plan_all(&problem, &test_params(SearchMode::ApfEcbsNf), &mut virtual_clock());
        assert!(out.result.is_ok());
        assert_eq!(out.metrics.fast_track_attempts, 0);
        assert!(out.metrics.modify_motion_calls >= 1);
    }

    #[test]
    fn fast_track_runs_at_most_once_per_node() {
        let problem = crossing_problem();
        let out = plan_all(&problem, &test_params(SearchMode::ApfEcbs), &mut virtual_clock());
        assert!(out.result.is_ok());
        assert_eq!(out.metrics.fast_track_attempts, out.metrics.fast_track_attempted_nodes);
        assert!(out.metrics.fast_track_attempts >= 1);
    }

    #[test]
    fn identical_runs_are_identical() {
        let problem = crossing_problem();
        let params = test_params(SearchMode::ApfEcbs);
        let a = plan_all(&problem, &params, &mut virtual_clock());
        let b = plan_all(&problem, &params, &mut virtual_clock());
        let sa = a.result.unwrap();
        let sb = b.result.unwrap();
        assert_eq!(sa.set, sb.set);
        assert_eq!(sa.cost.to_bits(), sb.cost.to_bits());
        assert_eq!(a.metrics.expanded, b.metrics.expanded);
        assert_eq!(a.metrics.generated, b.metrics.generated);
    }

    #[test]
    fn infeasible_start_is_reported_as_a_root_failure() {
        let mut problem = crossing_problem();
        problem.obstacles = vec![crate::collision::Obstacle::Sphere {
            center: Vec3::new(0.44, 0.21, 0.0),
            radius: 0.1,
        }];
        // That sphere swallows robot 0's start pose (tip near (0.44, 0.24)).
        let out = plan_all(&problem, &test_params(SearchMode::ApfEcbs), &mut virtual_clock());
        match out.result {
            Err(SearchFailure::RootPlanFailed { robot: 0, cause: PlanFailure::StartInCollision }) => {}
            other => panic!("unexpected outcome: {other:?}"),
        }
    }

    #[test]
    fn limits_stop_the_search_cleanly() {
        let problem = crossing_problem();
        let mut params = test_params(SearchMode::Cbs);
        params.node_limit = Some(1);
        let out = plan_all(&problem, &params, &mut virtual_clock());
        assert_eq!(out.result.unwrap_err(), SearchFailure::NodeLimit);
        assert_eq!(out.metrics.expanded, 1);

        let mut params = test_params(SearchMode::Cbs);
        params.time_limit = Some(1e-9);
        let out = plan_all(&problem, &params, &mut || 1.0);
        assert_eq!(out.result.unwrap_err(), SearchFailure::Timeout);
    }
}
