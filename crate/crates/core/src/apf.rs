//! Repulsive potential fields between robot bodies and the trajectory
//! deformation built on them.
//!
//! Forces act between sphere centroids of different robots. A short-range
//! potential grows without bound as two centroids approach and vanishes
//! outside the influence distance d0; its negative gradient, mapped through
//! the point Jacobian at each sphere, yields a joint-space force. Applied
//! sample by sample along a trajectory (endpoints pinned), small steps along
//! that force bend a robot's motion away from its neighbors while grid
//! timing, start, and goal stay fixed.

use alloc::vec::Vec;

use crate::collision::{is_config_free, Obstacle};
use crate::kinematics::{BodySphere, Config, SerialChain};
use crate::lowlevel::Constraint;
use crate::math::Vec3;
use crate::trajectory::SyncedTrajectorySet;
use crate::ModelError;

#[derive(Debug, Clone)]
pub struct ApfParams {
    /// Repulsive gain.
    pub k_rep: f64,
    /// Influence distance in meters; pairs farther apart contribute nothing.
    pub d0: f64,
    /// Step size of one deformation update.
    pub alpha: f64,
    /// Deformation updates attempted per call.
    pub max_iter: usize,
}

impl Default for ApfParams {
    fn default() -> ApfParams {
        ApfParams { k_rep: 0.05, d0: 0.2, alpha: 1e-7, max_iter: 100 }
    }
}

/// Potential between two points: 0.5 * k * (1/d - 1/d0)^2 inside the
/// influence distance, exactly zero outside it.
pub fn repulsive_potential(p: Vec3, o: Vec3, params: &ApfParams) -> Result<f64, ModelError> {
    let d = (p - o).norm();
    if d == 0.0 {
        return Err(ModelError::CoincidentCenters);
    }
    if d > params.d0 {
        return Ok(0.0);
    }
    let inv = 1.0 / d - 1.0 / params.d0;
    Ok(0.5 * params.k_rep * inv * inv)
}

/// Negative gradient of [`repulsive_potential`] with respect to `p`:
/// k * (1/d - 1/d0) / d^2 along the unit vector from `o` toward `p`, exactly
/// zero outside the influence distance.
pub fn repulsive_force(p: Vec3, o: Vec3, params: &ApfParams) -> Result<Vec3, ModelError> {
    let diff = p - o;
    let d = diff.norm();
    if d == 0.0 {
        return Err(ModelError::CoincidentCenters);
    }
    if d > params.d0 {
        return Ok(Vec3::ZERO);
    }
    let magnitude = params.k_rep * (1.0 / d - 1.0 / params.d0) / (d * d);
    Ok(diff.scale(magnitude / d))
}

/// Joint-space force on `chain` at `q` from the sphere centroids in `others`:
/// the sum over sphere pairs of J^T F, with J the point Jacobian at the own
/// sphere's center.
pub fn joint_force(
    chain: &SerialChain,
    q: &Config,
    others: &[BodySphere],
    params: &ApfParams,
) -> Result<Vec<f64>, ModelError> {
    let own = chain.forward_kinematics(q)?;
    let mut tau = alloc::vec![0.0; chain.dof()];
    for s in &own {
        // The Jacobian is shared by every pair involving this sphere; compute
        // it only once a neighbor is actually inside the influence distance.
        let mut jac: Option<Vec<Vec3>> = None;
        for o in others {
            let f = repulsive_force(s.center, o.center, params)?;
            if f == Vec3::ZERO {
                continue;
            }
            let j = match &jac {
                Some(j) => j,
                None => {
                    jac = Some(chain.point_jacobian(q, s.link, s.center)?);
                    jac.as_ref().unwrap()
                }
            };
            for (col, jc) in j.iter().enumerate() {
                tau[col] += jc.dot(f);
            }
        }
    }
    Ok(tau)
}

/// World-frame spheres of every robot except `robot`, per grid index.
fn other_spheres(
    set: &SyncedTrajectorySet,
    robot: usize,
    chains: &[SerialChain],
) -> Result<Vec<Vec<BodySphere>>, ModelError> {
    let mut per_index = Vec::with_capacity(set.len());
    for k in 0..set.len() {
        let mut spheres = Vec::new();
        for (r, chain) in chains.iter().enumerate() {
            if r == robot {
                continue;
            }
            spheres.extend(chain.forward_kinematics(set.config_at(r, k))?);
        }
        per_index.push(spheres);
    }
    Ok(per_index)
}

fn profile_for(
    chain: &SerialChain,
    configs: &[Config],
    goal_index: usize,
    others_per_index: &[Vec<BodySphere>],
    params: &ApfParams,
) -> Result<Vec<Vec<f64>>, ModelError> {
    let d = chain.dof();
    let mut profile = alloc::vec![alloc::vec![0.0; d]; configs.len()];
    for k in 1..goal_index {
        profile[k] = joint_force(chain, &configs[k], &others_per_index[k], params)?;
    }
    Ok(profile)
}

/// Joint-force profile for `robot` against all other robots in the set, one
/// entry per grid index. The first entry, and every entry from the robot's
/// arrival index on, is zero so the start and goal stay fixed.
pub fn compute_repulsive_force(
    set: &SyncedTrajectorySet,
    robot: usize,
    chains: &[SerialChain],
    params: &ApfParams,
) -> Result<Vec<Vec<f64>>, ModelError> {
    if chains.len() != set.num_robots() {
        return Err(ModelError::DimensionMismatch { expected: set.num_robots(), got: chains.len() });
    }
    if robot >= set.num_robots() {
        return Err(ModelError::BadIndex);
    }
    let others = other_spheres(set, robot, chains)?;
    profile_for(
        &chains[robot],
        set.robot(robot).configs(),
        set.robot(robot).goal_index(),
        &others,
        params,
    )
}

#[derive(Debug, Clone)]
pub struct ModifyOutcome {
    /// Deformed grid samples for the robot, same grid as the input set.
    pub configs: Vec<Config>,
    /// False when even the input violates its constraints, in which case
    /// `configs` is the input unchanged.
    pub satisfies_constraints: bool,
    /// Gradient steps actually applied.
    pub iterations: usize,
}

/// Deforms `robot`'s samples along the repulsive force profile against the
/// other robots in the set.
///
/// Each iteration takes one step of `alpha` times the current profile,
/// endpoints excluded. Iteration stops early when a step would leave the
/// statically free space (including joint limits), when two centroids
/// coincide, or when the force vanishes entirely; the returned samples are
/// the last iterate that satisfied every constraint addressed to this robot,
/// so start, goal, grid, and timing are preserved exactly.
pub fn modify_motion(
    set: &SyncedTrajectorySet,
    robot: usize,
    constraints: &[Constraint],
    obstacles: &[Obstacle],
    chains: &[SerialChain],
    params: &ApfParams,
) -> Result<ModifyOutcome, ModelError> {
    if chains.len() != set.num_robots() {
        return Err(ModelError::DimensionMismatch { expected: set.num_robots(), got: chains.len() });
    }
    if robot >= set.num_robots() {
        return Err(ModelError::BadIndex);
    }
    let chain = &chains[robot];
    let synced = set.robot(robot);
    let goal_index = synced.goal_index();
    let mine: Vec<&Constraint> =
        constraints.iter().filter(|c| c.robot == synced.robot_id).collect();
    let others = other_spheres(set, robot, chains)?;

    let constraints_ok = |configs: &[Config]| -> bool {
        mine.iter().all(|c| {
            let q = configs.get(c.k).unwrap_or(&configs[configs.len() - 1]);
            !c.violated_by(q)
        })
    };

    let mut current: Vec<Config> = synced.configs().to_vec();
    let mut safe = current.clone();
    let mut safe_valid = constraints_ok(&safe);
    let mut iterations = 0;

    'outer: for _ in 0..params.max_iter {
        let profile = match profile_for(chain, &current, goal_index, &others, params) {
            Ok(p) => p,
            // A coincident centroid pair has no defined push direction; stop
            // at the last safe iterate.
            Err(ModelError::CoincidentCenters) => break,
            Err(e) => return Err(e),
        };
        if profile
            .iter()
            .all(|row| row.iter().all(|&f| f == 0.0))
        {
            break;
        }
        let mut next = current.clone();
        for k in 1..goal_index {
            for (j, q) in next[k].iter_mut().enumerate() {
                *q += params.alpha * profile[k][j];
            }
            if !is_config_free(chain, &next[k], obstacles)? {
                break 'outer;
            }
        }
        current = next;
        iterations += 1;
        if constraints_ok(&current) {
            safe = current.clone();
            safe_valid = true;
        }
    }

    Ok(ModifyOutcome { configs: safe, satisfies_constraints: safe_valid, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::get_conflicts;
    use crate::trajectory::{Trajectory, Waypoint};
    use core::f64::consts::PI;

    fn params(k_rep: f64, d0: f64) -> ApfParams {
        ApfParams { k_rep, d0, ..ApfParams::default() }
    }

    #[test]
    fn potential_matches_hand_computed_values() {
        let p = Vec3::new(0.5, 0.0, 0.0);
        let o = Vec3::ZERO;
        let u = repulsive_potential(p, o, &params(0.05, 1.0)).unwrap();
        assert!((u - 0.025).abs() < 1e-15);
        let far = repulsive_potential(Vec3::new(1.5, 0.0, 0.0), o, &params(0.05, 1.0)).unwrap();
        assert_eq!(far, 0.0);
    }

    #[test]
    fn force_magnitudes_and_direction() {
        let o = Vec3::ZERO;
        let f = repulsive_force(Vec3::new(0.5, 0.0, 0.0), o, &params(1.0, 1.0)).unwrap();
        assert!((f.x - 4.0).abs() < 1e-12);
        assert_eq!((f.y, f.z), (0.0, 0.0));
        let close = repulsive_force(Vec3::new(0.1, 0.0, 0.0), o, &params(1.0, 1.0)).unwrap();
        assert!((close.norm() - 900.0).abs() < 1e-9);
        let outside = repulsive_force(Vec3::new(1.0 + 1e-12, 0.0, 0.0), o, &params(1.0, 1.0)).unwrap();
        assert_eq!(outside, Vec3::ZERO);
    }

    #[test]
    fn coincident_centers_are_an_error() {
        let p = Vec3::new(0.3, 0.3, 0.3);
        assert_eq!(
            repulsive_force(p, p, &params(1.0, 1.0)).unwrap_err(),
            ModelError::CoincidentCenters
        );
        assert_eq!(
            repulsive_potential(p, p, &params(1.0, 1.0)).unwrap_err(),
            ModelError::CoincidentCenters
        );
    }

    #[test]
    fn single_link_torque_matches_hand_computation() {
        // One sphere at (0.5, 0); a neighbor 0.1 m below it. F = 25 N along
        // +y, Jacobian column (0, 0.5, 0), so the joint torque is 12.5.
        let chain = SerialChain::planar(Vec3::ZERO, &[1.0], (-PI, PI), 1, 0.05).unwrap();
        let other = BodySphere { center: Vec3::new(0.5, -0.1, 0.0), radius: 0.05, link: 0 };
        let tau = joint_force(&chain, &Config(vec![0.0]), &[other], &params(0.05, 0.2)).unwrap();
        assert_eq!(tau.len(), 1);
        assert!((tau[0] - 12.5).abs() < 1e-9, "tau {}", tau[0]);
    }

    fn straight(robot_id: usize, from: &[f64], to: &[f64], dur: f64) -> Trajectory {
        Trajectory::new(
            robot_id,
            vec![
                Waypoint { config: Config(from.to_vec()), time: 0.0 },
                Waypoint { config: Config(to.to_vec()), time: dur },
            ],
        )
        .unwrap()
    }

    fn two_arm_scene() -> (Vec<SerialChain>, SyncedTrajectorySet) {
        let chains = vec![
            SerialChain::planar(Vec3::ZERO, &[0.5], (-PI, PI), 2, 0.05).unwrap(),
            SerialChain::planar(Vec3::new(0.8, 0.0, 0.0), &[0.5], (-PI, PI), 2, 0.05).unwrap(),
        ];
        // Both tips sweep through the corridor between the bases at the same
        // time and pass well inside the influence distance.
        let a = straight(0, &[0.5], &[-0.5], 1.0);
        let b = straight(1, &[PI - 0.5], &[PI + 0.5], 1.0);
        let set = SyncedTrajectorySet::synchronize(&[a, b], 0.1).unwrap();
        (chains, set)
    }

    #[test]
    fn profile_is_zero_at_endpoints_and_rest_padding() {
        let (chains, set) = two_arm_scene();
        let p = compute_repulsive_force(&set, 0, &chains, &params(0.05, 0.3)).unwrap();
        assert_eq!(p.len(), set.len());
        assert!(p[0].iter().all(|&f| f == 0.0));
        let gi = set.robot(0).goal_index();
        for row in &p[gi..] {
            assert!(row.iter().all(|&f| f == 0.0));
        }
        assert!(p[1..gi].iter().any(|row| row.iter().any(|&f| f != 0.0)));
    }

    #[test]
    fn far_apart_robots_feel_no_force() {
        let chains = vec![
            SerialChain::planar(Vec3::ZERO, &[0.5], (-PI, PI), 2, 0.05).unwrap(),
            SerialChain::planar(Vec3::new(10.0, 0.0, 0.0), &[0.5], (-PI, PI), 2, 0.05).unwrap(),
        ];
        let set = SyncedTrajectorySet::synchronize(
            &[straight(0, &[0.0], &[1.0], 1.0), straight(1, &[0.0], &[1.0], 1.0)],
            0.1,
        )
        .unwrap();
        let p = compute_repulsive_force(&set, 0, &chains, &params(0.05, 0.2)).unwrap();
        assert!(p.iter().all(|row| row.iter().all(|&f| f == 0.0)));
    }

    #[test]
    fn deformation_preserves_endpoints_and_reduces_conflicts() {
        let (chains, set) = two_arm_scene();
        let before = get_conflicts(&set, &chains, 0.0).unwrap().len();
        assert!(before > 0);
        let p = ApfParams { k_rep: 0.05, d0: 0.3, alpha: 1e-3, max_iter: 100 };
        let out = modify_motion(&set, 0, &[], &[], &chains, &p).unwrap();
        assert!(out.satisfies_constraints);
        assert!(out.iterations > 0);
        assert_eq!(out.configs[0], set.robot(0).configs()[0]);
        let gi = set.robot(0).goal_index();
        assert_eq!(out.configs[gi], set.robot(0).configs()[gi]);

        let mut modified = set.clone();
        modified.set_robot_configs(0, out.configs).unwrap();
        let after = get_conflicts(&modified, &chains, 0.0).unwrap().len();
        assert!(after < before, "conflicts {before} -> {after}");
    }

    #[test]
    fn out_of_range_input_comes_back_unchanged() {
        let chains = vec![
            SerialChain::planar(Vec3::ZERO, &[0.5], (-PI, PI), 2, 0.05).unwrap(),
            SerialChain::planar(Vec3::new(5.0, 0.0, 0.0), &[0.5], (-PI, PI), 2, 0.05).unwrap(),
        ];
        let set = SyncedTrajectorySet::synchronize(
            &[straight(0, &[-0.4], &[0.4], 1.0), straight(1, &[-0.4], &[0.4], 1.0)],
            0.1,
        )
        .unwrap();
        let p = ApfParams { alpha: 1e-3, ..ApfParams::default() };
        let out = modify_motion(&set, 0, &[], &[], &chains, &p).unwrap();
        assert_eq!(out.configs, set.robot(0).configs());
        assert_eq!(out.iterations, 0);
        assert!(out.satisfies_constraints);
    }

    #[test]
    fn first_step_into_a_wall_returns_the_input() {
        // Robot 1 sweeps in parallel 0.25 m above robot 0, pushing it toward
        // a slab that sits flush under robot 0's sweep. The very first
        // deformation step crosses into the slab, so the input comes back.
        let chains = vec![
            SerialChain::planar(Vec3::ZERO, &[0.5], (-PI, PI), 2, 0.05).unwrap(),
            SerialChain::planar(Vec3::new(0.0, 0.25, 0.0), &[0.5], (-PI, PI), 2, 0.05).unwrap(),
        ];
        let a = straight(0, &[0.3], &[-0.3], 1.0);
        let b = straight(1, &[0.3], &[-0.3], 1.0);
        let set = SyncedTrajectorySet::synchronize(&[a, b], 0.1).unwrap();
        let slab = Obstacle::Aabb {
            min: Vec3::new(-2.0, -2.0, -1.0),
            max: Vec3::new(2.0, -0.140, 1.0),
        };
        let p = ApfParams { k_rep: 0.05, d0: 0.4, alpha: 1e-2, max_iter: 50 };
        let out = modify_motion(&set, 0, &[], &[slab], &chains, &p).unwrap();
        assert_eq!(out.configs, set.robot(0).configs());
        assert_eq!(out.iterations, 0);
        assert!(out.satisfies_constraints);
    }

    #[test]
    fn constraint_violating_iterates_are_not_kept() {
        let (chains, set) = two_arm_scene();
        let p = ApfParams { k_rep: 0.05, d0: 0.3, alpha: 1e-3, max_iter: 100 };
        let unconstrained = modify_motion(&set, 0, &[], &[], &chains, &p).unwrap();
        // Forbid the region the unconstrained deformation settles in at an
        // interior index that actually moves.
        let k = 3;
        assert_ne!(unconstrained.configs[k], set.robot(0).configs()[k]);
        let c = Constraint { robot: 0, q: unconstrained.configs[k].clone(), k, rho: 1e-4 };
        let constrained =
            modify_motion(&set, 0, core::slice::from_ref(&c), &[], &chains, &p).unwrap();
        assert!(constrained.satisfies_constraints);
        assert!(!c.violated_by(&constrained.configs[k]));
        assert_ne!(constrained.configs[k], unconstrained.configs[k]);
    }
}
