//! Timed joint-space trajectories and their shared-grid form.
//!
//! Raw trajectories are piecewise-linear in time with arbitrary waypoint
//! spacing. The conflict search works on a `SyncedTrajectorySet`, where every
//! robot is resampled at one common, strictly increasing time grid and rests
//! at its goal configuration past its own arrival index.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use crate::math::FloatExt;
use crate::kinematics::Config;
use crate::ModelError;

#[derive(Debug, Clone, PartialEq)]
pub struct Waypoint {
    pub config: Config,
    pub time: f64,
}

/// One robot's timed path. `lb` is the movement-sum lower bound
/// sum_j |q_goal[j] - q_start[j]|, which no path between the same endpoints
/// can undercut.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub robot_id: usize,
    pub waypoints: Vec<Waypoint>,
    pub lb: f64,
}

impl Trajectory {
    pub fn new(robot_id: usize, waypoints: Vec<Waypoint>) -> Result<Trajectory, ModelError> {
        if waypoints.is_empty() {
            return Err(ModelError::EmptyTrajectory);
        }
        let d = waypoints[0].config.len();
        for w in &waypoints {
            if w.config.len() != d {
                return Err(ModelError::DimensionMismatch { expected: d, got: w.config.len() });
            }
        }
        for pair in waypoints.windows(2) {
            if !(pair[1].time > pair[0].time) {
                return Err(ModelError::NonIncreasingTimes);
            }
        }
        let lb = waypoints[0].config.l1_dist(&waypoints[waypoints.len() - 1].config);
        Ok(Trajectory { robot_id, waypoints, lb })
    }

    pub fn start(&self) -> &Config {
        &self.waypoints[0].config
    }

    pub fn goal(&self) -> &Config {
        &self.waypoints[self.waypoints.len() - 1].config
    }

    pub fn t_goal(&self) -> f64 {
        self.waypoints[self.waypoints.len() - 1].time
    }

    /// Piecewise-linear sample, clamped to the endpoints outside the time
    /// span. Exact waypoint times return the stored configuration unchanged.
    pub fn sample(&self, t: f64) -> Config {
        let wps = &self.waypoints;
        if t <= wps[0].time {
            return wps[0].config.clone();
        }
        if t >= self.t_goal() {
            return self.goal().clone();
        }
        let mut hi = 1;
        while wps[hi].time < t {
            hi += 1;
        }
        if wps[hi].time == t {
            return wps[hi].config.clone();
        }
        let lo = hi - 1;
        let s = (t - wps[lo].time) / (wps[hi].time - wps[lo].time);
        wps[lo].config.lerp(&wps[hi].config, s)
    }

    /// Movement-sum cost: summed per-joint absolute motion over all segments.
    pub fn cost(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|pair| pair[0].config.l1_dist(&pair[1].config))
            .sum()
    }

    /// Largest per-joint speed over any segment; 0 for a single waypoint.
    pub fn max_joint_speed(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|pair| pair[0].config.linf_dist(&pair[1].config) / (pair[1].time - pair[0].time))
            .fold(0.0, f64::max)
    }
}

/// Latest goal-arrival time over the set.
pub fn makespan(trajs: &[Trajectory]) -> f64 {
    trajs.iter().map(Trajectory::t_goal).fold(0.0, f64::max)
}

pub fn total_cost(trajs: &[Trajectory]) -> f64 {
    trajs.iter().map(Trajectory::cost).sum()
}

/// One robot's samples on the shared grid. Configurations at or past
/// `goal_index` are exactly the goal configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncedTrajectory {
    pub robot_id: usize,
    pub lb: f64,
    configs: Vec<Config>,
    goal_index: usize,
}

impl SyncedTrajectory {
    pub fn configs(&self) -> &[Config] {
        &self.configs
    }

    pub fn goal_index(&self) -> usize {
        self.goal_index
    }

    pub fn start(&self) -> &Config {
        &self.configs[0]
    }

    pub fn goal(&self) -> &Config {
        &self.configs[self.goal_index]
    }

    fn from_trajectory(traj: &Trajectory, times: &[f64]) -> SyncedTrajectory {
        let mut configs: Vec<Config> = times.iter().map(|&t| traj.sample(t)).collect();
        let t_goal = traj.t_goal();
        // Tolerant arrival test: a grid point an ulp short of t_goal still
        // counts as arrived, and everything from there on is pinned to the
        // exact goal configuration.
        let goal_index = times
            .iter()
            .position(|&t| t >= t_goal - 1e-9)
            .unwrap_or(times.len() - 1);
        for c in configs.iter_mut().skip(goal_index) {
            *c = traj.goal().clone();
        }
        SyncedTrajectory { robot_id: traj.robot_id, lb: traj.lb, configs, goal_index }
    }
}

/// All robots resampled on one strictly increasing shared time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncedTrajectorySet {
    dt: f64,
    times: Vec<f64>,
    robots: Vec<SyncedTrajectory>,
}

impl SyncedTrajectorySet {
    /// Resamples every trajectory at the grid 0, dt, 2*dt, ... extended far
    /// enough that the slowest robot has arrived; later robots rest at their
    /// goals. Endpoint configurations are carried over exactly.
    pub fn synchronize(trajs: &[Trajectory], dt: f64) -> Result<SyncedTrajectorySet, ModelError> {
        if trajs.is_empty() {
            return Err(ModelError::EmptyTrajectorySet);
        }
        if !(dt > 0.0) {
            return Err(ModelError::NonPositiveTimeStep);
        }
        let horizon = makespan(trajs);
        let mut steps = if horizon <= 0.0 { 0 } else { (horizon / dt - 1e-9).ceil() as usize };
        while (steps as f64) * dt < horizon - 1e-12 {
            steps += 1;
        }
        let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
        let robots = trajs
            .iter()
            .map(|t| SyncedTrajectory::from_trajectory(t, &times))
            .collect();
        Ok(SyncedTrajectorySet { dt, times, robots })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn num_robots(&self) -> usize {
        self.robots.len()
    }

    pub fn robots(&self) -> &[SyncedTrajectory] {
        &self.robots
    }

    pub fn robot(&self, i: usize) -> &SyncedTrajectory {
        &self.robots[i]
    }

    pub fn config_at(&self, robot: usize, k: usize) -> &Config {
        &self.robots[robot].configs[k]
    }

    pub fn cost(&self) -> f64 {
        (0..self.robots.len()).map(|i| self.robot_cost(i)).sum()
    }

    pub fn robot_cost(&self, i: usize) -> f64 {
        self.robots[i]
            .configs
            .windows(2)
            .map(|pair| pair[0].l1_dist(&pair[1]))
            .sum()
    }

    pub fn lb_sum(&self) -> f64 {
        self.robots.iter().map(|r| r.lb).sum()
    }

    /// Time of the latest goal arrival on the grid.
    pub fn makespan(&self) -> f64 {
        self.robots
            .iter()
            .map(|r| self.times[r.goal_index])
            .fold(0.0, f64::max)
    }

    /// Replaces robot `i` with a fresh trajectory, mapping the new path onto
    /// the grid by index: sample k of the new trajectory is taken at k times
    /// the nominal dt, regardless of what the scheduled times say. Time
    /// scaling only ever stretches the schedule, so a trajectory planned on
    /// the nominal grid stays velocity-feasible on it, and index-addressed
    /// constraints keep meaning the same sample before and after scaling.
    /// Grows the horizon if the new path arrives later and trims trailing
    /// all-at-goal padding if it arrives earlier.
    pub fn replace_robot(&mut self, i: usize, traj: &Trajectory) -> Result<(), ModelError> {
        if i >= self.robots.len() {
            return Err(ModelError::BadIndex);
        }
        let t_goal = traj.t_goal();
        while (self.times.len() - 1) as f64 * self.dt < t_goal - 1e-12 {
            let next = self.times.last().unwrap() + self.dt;
            self.times.push(next);
            for r in &mut self.robots {
                let goal = r.configs[r.configs.len() - 1].clone();
                r.configs.push(goal);
            }
        }
        let nominal: Vec<f64> = (0..self.times.len()).map(|k| k as f64 * self.dt).collect();
        self.robots[i] = SyncedTrajectory::from_trajectory(traj, &nominal);
        let last_needed = self.robots.iter().map(|r| r.goal_index).max().unwrap();
        self.times.truncate(last_needed + 1);
        for r in &mut self.robots {
            r.configs.truncate(last_needed + 1);
        }
        Ok(())
    }

    /// Overwrites robot `i`'s grid samples in place (same grid, same arrival
    /// index). The caller keeps the endpoint configurations fixed.
    pub fn set_robot_configs(&mut self, i: usize, configs: Vec<Config>) -> Result<(), ModelError> {
        if i >= self.robots.len() {
            return Err(ModelError::BadIndex);
        }
        if configs.len() != self.times.len() {
            return Err(ModelError::DimensionMismatch { expected: self.times.len(), got: configs.len() });
        }
        debug_assert_eq!(configs[0], self.robots[i].configs[0]);
        debug_assert_eq!(
            configs[self.robots[i].goal_index],
            self.robots[i].configs[self.robots[i].goal_index]
        );
        self.robots[i].configs = configs;
        Ok(())
    }

    /// Stretches every segment on which some joint moves faster than `v_max`
    /// to the duration that brings it exactly to `v_max`; compliant segments
    /// keep their duration. Configurations are untouched and the grid stays
    /// shared, so later samples of every robot shift identically.
    pub fn scale_time(&self, v_max: f64) -> SyncedTrajectorySet {
        let mut durations: Vec<f64> = self.times.windows(2).map(|w| w[1] - w[0]).collect();
        let mut changed = false;
        for (k, dur) in durations.iter_mut().enumerate() {
            let mut max_disp: f64 = 0.0;
            for r in &self.robots {
                max_disp = max_disp.max(r.configs[k].linf_dist(&r.configs[k + 1]));
            }
            if max_disp > v_max * *dur {
                *dur = max_disp / v_max;
                changed = true;
            }
        }
        if !changed {
            return self.clone();
        }
        let mut times = Vec::with_capacity(self.times.len());
        times.push(self.times[0]);
        for d in durations {
            times.push(times.last().unwrap() + d);
        }
        SyncedTrajectorySet { dt: self.dt, times, robots: self.robots.clone() }
    }

    /// Largest per-joint speed over any segment and robot.
    pub fn max_joint_speed(&self) -> f64 {
        let mut v: f64 = 0.0;
        for k in 0..self.times.len().saturating_sub(1) {
            let dur = self.times[k + 1] - self.times[k];
            for r in &self.robots {
                v = v.max(r.configs[k].linf_dist(&r.configs[k + 1]) / dur);
            }
        }
        v
    }

    /// Converts back to per-robot trajectories, each truncated at its own
    /// arrival index.
    pub fn to_trajectories(&self) -> Vec<Trajectory> {
        self.robots
            .iter()
            .map(|r| {
                let waypoints = (0..=r.goal_index)
                    .map(|k| Waypoint { config: r.configs[k].clone(), time: self.times[k] })
                    .collect();
                Trajectory::new(r.robot_id, waypoints).expect("grid rows are valid waypoints")
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(robot_id: usize, pts: &[(f64, &[f64])]) -> Trajectory {
        Trajectory::new(
            robot_id,
            pts.iter()
                .map(|&(t, q)| Waypoint { config: Config(q.to_vec()), time: t })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn rejects_empty_and_unordered_waypoints() {
        assert_eq!(Trajectory::new(0, alloc::vec![]).unwrap_err(), ModelError::EmptyTrajectory);
        let out = Trajectory::new(
            0,
            alloc::vec![
                Waypoint { config: Config(alloc::vec![0.0]), time: 0.0 },
                Waypoint { config: Config(alloc::vec![1.0]), time: 0.0 },
            ],
        );
        assert_eq!(out.unwrap_err(), ModelError::NonIncreasingTimes);
    }

    #[test]
    fn lower_bound_is_endpoint_l1_distance() {
        let t = traj(0, &[(0.0, &[0.0, 0.0]), (1.0, &[2.0, -1.0]), (2.0, &[1.0, -2.0])]);
        assert_eq!(t.lb, 3.0);
        assert!(t.cost() >= t.lb);
    }

    #[test]
    fn midpoint_sample_of_a_single_segment() {
        let t = traj(0, &[(0.0, &[0.0, 2.0]), (1.0, &[1.0, 0.0])]);
        let set = SyncedTrajectorySet::synchronize(&[t], 0.5).unwrap();
        assert_eq!(set.config_at(0, 1).0, alloc::vec![0.5, 1.0]);
        assert_eq!(set.len(), 3);
    }

    #[test]
    fn makespan_is_latest_arrival() {
        let a = traj(0, &[(0.0, &[0.0]), (1.0, &[1.0])]);
        let b = traj(1, &[(0.0, &[0.0]), (2.5, &[1.0])]);
        assert_eq!(makespan(&[a, b]), 2.5);
    }

    #[test]
    fn early_robots_rest_at_goal_until_the_horizon() {
        let a = traj(0, &[(0.0, &[0.0]), (0.2, &[0.4])]);
        let b = traj(1, &[(0.0, &[0.0]), (0.6, &[0.6])]);
        let set = SyncedTrajectorySet::synchronize(&[a, b], 0.2).unwrap();
        assert_eq!(set.len(), 4);
        assert_eq!(set.robot(0).goal_index(), 1);
        for k in 1..4 {
            assert_eq!(set.config_at(0, k).0, alloc::vec![0.4]);
        }
        assert_eq!(set.config_at(1, 3).0, alloc::vec![0.6]);
    }

    #[test]
    fn resynchronizing_grid_aligned_output_is_identity() {
        let a = traj(0, &[(0.0, &[0.0, 0.0]), (0.37, &[0.8, -0.4]), (1.0, &[1.0, 0.3])]);
        let b = traj(1, &[(0.0, &[1.0, 1.0]), (0.64, &[0.0, 0.2])]);
        let first = SyncedTrajectorySet::synchronize(&[a, b], 0.1).unwrap();
        let again = SyncedTrajectorySet::synchronize(&first.to_trajectories(), 0.1).unwrap();
        assert_eq!(first, again);
    }

    #[test]
    fn single_configuration_trajectory_has_zero_extent() {
        let t = traj(0, &[(0.0, &[0.3, 0.4])]);
        assert_eq!(t.cost(), 0.0);
        let set = SyncedTrajectorySet::synchronize(core::slice::from_ref(&t), 0.1).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.makespan(), 0.0);
        assert_eq!(set.cost(), 0.0);
    }

    #[test]
    fn scaling_stretches_only_violating_segments() {
        let a = traj(0, &[(0.0, &[0.0]), (0.1, &[0.16]), (0.2, &[0.2])]);
        let set = SyncedTrajectorySet::synchronize(&[a], 0.1).unwrap();
        let scaled = set.scale_time(0.8);
        // 0.16 rad in 0.1 s exceeds 0.8 rad/s and stretches to 0.2 s; the
        // second segment (0.04 rad) is compliant and keeps 0.1 s.
        assert!((scaled.times()[1] - 0.2).abs() < 1e-12);
        assert!((scaled.times()[2] - 0.3).abs() < 1e-9);
        assert!(scaled.max_joint_speed() <= 0.8 + 1e-9);
        assert_eq!(scaled.cost(), set.cost());
        assert_eq!(scaled.config_at(0, 1), set.config_at(0, 1));
    }

    #[test]
    fn scaling_with_unbounded_speed_is_identity() {
        let a = traj(0, &[(0.0, &[0.0]), (0.1, &[5.0])]);
        let set = SyncedTrajectorySet::synchronize(&[a], 0.1).unwrap();
        assert_eq!(set.scale_time(f64::INFINITY), set);
    }

    #[test]
    fn replace_robot_grows_and_trims_the_horizon() {
        let a = traj(0, &[(0.0, &[0.0]), (0.4, &[0.4])]);
        let b = traj(1, &[(0.0, &[1.0]), (0.2, &[0.8])]);
        let mut set = SyncedTrajectorySet::synchronize(&[a, b], 0.1).unwrap();
        assert_eq!(set.len(), 5);

        let longer = traj(1, &[(0.0, &[1.0]), (0.8, &[0.2])]);
        set.replace_robot(1, &longer).unwrap();
        assert_eq!(set.len(), 9);
        assert_eq!(set.config_at(0, 8).0, alloc::vec![0.4]);

        let shorter = traj(1, &[(0.0, &[1.0]), (0.2, &[0.9])]);
        set.replace_robot(1, &shorter).unwrap();
        assert_eq!(set.len(), 5);
        assert_eq!(set.robot(0).goal_index(), 4);
        assert_eq!(set.config_at(1, 4).0, alloc::vec![0.9]);
    }

    #[test]
    fn synchronize_rejects_bad_dt() {
        let a = traj(0, &[(0.0, &[0.0]), (1.0, &[1.0])]);
        let err = SyncedTrajectorySet::synchronize(&[a], 0.0).unwrap_err();
        assert_eq!(err, ModelError::NonPositiveTimeStep);
    }
}
