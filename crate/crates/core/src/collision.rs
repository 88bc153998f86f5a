//! Static obstacle clearance and robot-robot conflict detection.
//!
//! All checks reduce to sphere arithmetic on the chains' body models.
//! Touching counts as colliding: a pair of robot spheres at distance <= 0 is
//! a conflict, and a sphere exactly grazing an obstacle surface is not free.

use alloc::vec::Vec;

use crate::kinematics::{Config, SerialChain};
use crate::math::Vec3;
use crate::trajectory::SyncedTrajectorySet;
use crate::ModelError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Obstacle {
    Sphere { center: Vec3, radius: f64 },
    /// Axis-aligned box.
    Aabb { min: Vec3, max: Vec3 },
}

impl Obstacle {
    /// Surface clearance to a sphere; negative means overlap.
    pub fn clearance(&self, center: Vec3, radius: f64) -> f64 {
        match *self {
            Obstacle::Sphere { center: oc, radius: or } => (center - oc).norm() - or - radius,
            Obstacle::Aabb { min, max } => {
                let dx = (min.x - center.x).max(0.0).max(center.x - max.x);
                let dy = (min.y - center.y).max(0.0).max(center.y - max.y);
                let dz = (min.z - center.z).max(0.0).max(center.z - max.z);
                Vec3::new(dx, dy, dz).norm() - radius
            }
        }
    }
}

/// True when `q` respects the joint limits (inclusive) and every body sphere
/// has strictly positive clearance from every obstacle.
pub fn is_config_free(
    chain: &SerialChain,
    q: &Config,
    obstacles: &[Obstacle],
) -> Result<bool, ModelError> {
    if !chain.within_limits(q) {
        if q.len() != chain.dof() {
            return Err(ModelError::DimensionMismatch { expected: chain.dof(), got: q.len() });
        }
        return Ok(false);
    }
    if obstacles.is_empty() {
        return Ok(true);
    }
    let spheres = chain.forward_kinematics(q)?;
    for s in &spheres {
        for o in obstacles {
            if o.clearance(s.center, s.radius) <= 0.0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Smallest surface distance between any sphere of robot a and any sphere of
/// robot b; <= 0 means the bodies touch or overlap.
pub fn min_robot_distance(
    a: &SerialChain,
    qa: &Config,
    b: &SerialChain,
    qb: &Config,
) -> Result<f64, ModelError> {
    let sa = a.forward_kinematics(qa)?;
    let sb = b.forward_kinematics(qb)?;
    let mut min = f64::INFINITY;
    for x in &sa {
        for y in &sb {
            let d = (x.center - y.center).norm() - x.radius - y.radius;
            if d < min {
                min = d;
            }
        }
    }
    Ok(min)
}

/// Robots i and j (i < j) overlap at shared grid index `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conflict {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub t: f64,
    pub q_i: Config,
    pub q_j: Config,
}

impl Conflict {
    /// The two robots involved, as an ordered pair.
    pub fn pair(&self) -> (usize, usize) {
        (self.i, self.j)
    }
}

/// All pairwise conflicts on the grid, one record per (pair, time index),
/// ordered by time index then pair. `margin` inflates every sphere radius, so
/// a pair counts as conflicting at surface distance <= 2 * margin.
pub fn get_conflicts(
    set: &SyncedTrajectorySet,
    chains: &[SerialChain],
    margin: f64,
) -> Result<Vec<Conflict>, ModelError> {
    if chains.len() != set.num_robots() {
        return Err(ModelError::DimensionMismatch { expected: set.num_robots(), got: chains.len() });
    }
    let n = set.num_robots();
    let mut out = Vec::new();
    for k in 0..set.len() {
        // One forward-kinematics pass per robot per index, shared by all pairs.
        let mut spheres = Vec::with_capacity(n);
        for (r, chain) in chains.iter().enumerate() {
            spheres.push(chain.forward_kinematics(set.config_at(r, k))?);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let mut hit = false;
                'pairs: for x in &spheres[i] {
                    for y in &spheres[j] {
                        if (x.center - y.center).norm() - x.radius - y.radius <= 2.0 * margin {
                            hit = true;
                            break 'pairs;
                        }
                    }
                }
                if hit {
                    out.push(Conflict {
                        i,
                        j,
                        k,
                        t: set.times()[k],
                        q_i: set.config_at(i, k).clone(),
                        q_j: set.config_at(j, k).clone(),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// A robot-robot overlap found between grid points by the dense sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseViolation {
    pub i: usize,
    pub j: usize,
    /// Grid segment the violation falls in.
    pub segment: usize,
    /// Position within the segment, in [0, 1].
    pub fraction: f64,
    /// Grid index nearest to the violation.
    pub nearest_index: usize,
    pub distance: f64,
}

/// Sweeps every grid segment at `subdivisions` evenly spaced interior points
/// plus both ends, interpolating configurations linearly. Returns the first
/// violation found per (pair, segment); empty means the motion stays clear at
/// this resolution. `margin` has the same meaning as in [`get_conflicts`].
pub fn dense_violations(
    set: &SyncedTrajectorySet,
    chains: &[SerialChain],
    subdivisions: usize,
    margin: f64,
) -> Result<Vec<DenseViolation>, ModelError> {
    if chains.len() != set.num_robots() {
        return Err(ModelError::DimensionMismatch { expected: set.num_robots(), got: chains.len() });
    }
    let n = set.num_robots();
    let mut out = Vec::new();
    let segments = set.len().saturating_sub(1);
    if segments == 0 {
        // Single-point set: the sweep degenerates to the grid check.
        for c in get_conflicts(set, chains, margin)? {
            out.push(DenseViolation {
                i: c.i,
                j: c.j,
                segment: 0,
                fraction: 0.0,
                nearest_index: 0,
                distance: f64::NEG_INFINITY,
            });
        }
        return Ok(out);
    }
    for seg in 0..segments {
        for step in 0..=subdivisions {
            let f = step as f64 / subdivisions as f64;
            let mut spheres = Vec::with_capacity(n);
            for (r, chain) in chains.iter().enumerate() {
                let q = set.config_at(r, seg).lerp(set.config_at(r, seg + 1), f);
                spheres.push(chain.forward_kinematics(&q)?);
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    if out.iter().any(|v: &DenseViolation| v.i == i && v.j == j && v.segment == seg) {
                        continue;
                    }
                    let mut min = f64::INFINITY;
                    for x in &spheres[i] {
                        for y in &spheres[j] {
                            min = min.min((x.center - y.center).norm() - x.radius - y.radius);
                        }
                    }
                    if min <= 2.0 * margin {
                        out.push(DenseViolation {
                            i,
                            j,
                            segment: seg,
                            fraction: f,
                            nearest_index: if f <= 0.5 { seg } else { seg + 1 },
                            distance: min,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Sweeps the whole schedule at a fixed wall-clock interval, interpolating
/// each robot on the set's own segment times. On a stretched schedule this
/// lands proportionally more samples in long segments than the per-segment
/// sweep of [`dense_violations`], and it visits exactly the instants an
/// external `t += step` replay of the trajectories would. Same report shape
/// and `margin` meaning as [`dense_violations`].
pub fn timed_violations(
    set: &SyncedTrajectorySet,
    chains: &[SerialChain],
    step: f64,
    margin: f64,
) -> Result<Vec<DenseViolation>, ModelError> {
    if chains.len() != set.num_robots() {
        return Err(ModelError::DimensionMismatch { expected: set.num_robots(), got: chains.len() });
    }
    if !(step > 0.0) {
        return Err(ModelError::NonPositiveTimeStep);
    }
    if set.len() < 2 {
        return dense_violations(set, chains, 1, margin);
    }
    let n = set.num_robots();
    let times = set.times();
    let last = set.len() - 1;
    let makespan = times[last];
    let mut out = Vec::new();
    let mut t = 0.0;
    while t <= makespan + 1e-9 {
        // Clamped piecewise-linear lookup, matching a trajectory sample: an
        // exact grid hit returns the stored configuration, ends clamp.
        let (seg, f) = if t >= makespan {
            (last - 1, 1.0)
        } else {
            let hi = times.partition_point(|&x| x <= t);
            let lo = hi - 1;
            if times[lo] == t {
                (lo, 0.0)
            } else {
                (lo, (t - times[lo]) / (times[hi] - times[lo]))
            }
        };
        let mut spheres = Vec::with_capacity(n);
        for (r, chain) in chains.iter().enumerate() {
            let q = if f == 0.0 {
                set.config_at(r, seg).clone()
            } else if f == 1.0 {
                set.config_at(r, seg + 1).clone()
            } else {
                set.config_at(r, seg).lerp(set.config_at(r, seg + 1), f)
            };
            spheres.push(chain.forward_kinematics(&q)?);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if out.iter().any(|v: &DenseViolation| v.i == i && v.j == j && v.segment == seg) {
                    continue;
                }
                let mut min = f64::INFINITY;
                for x in &spheres[i] {
                    for y in &spheres[j] {
                        min = min.min((x.center - y.center).norm() - x.radius - y.radius);
                    }
                }
                if min <= 2.0 * margin {
                    out.push(DenseViolation {
                        i,
                        j,
                        segment: seg,
                        fraction: f,
                        nearest_index: if f <= 0.5 { seg } else { seg + 1 },
                        distance: min,
                    });
                }
            }
        }
        t += step;
    }
    Ok(out)
}
