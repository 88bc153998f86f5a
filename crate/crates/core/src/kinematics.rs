//! Serial-chain forward kinematics with a sphere-set body model.
//!
//! Every link carries a row of spheres placed parametrically between its two
//! joint origins (or the tip, for the last link). Collision checking and the
//! repulsive-force computation both work on those sphere centers, so this
//! module is the single source of world-frame geometry.

use alloc::vec::Vec;
use core::ops::{Deref, DerefMut};

#[cfg(not(feature = "std"))]
use crate::math::FloatExt;
use crate::math::{Mat3, Pose, Vec3};
use crate::ModelError;

const AXIS_NORM_TOL: f64 = 1e-9;

/// Joint-space configuration, one angle per revolute joint, radians.
#[derive(Debug, Clone, PartialEq)]
pub struct Config(pub Vec<f64>);

impl Config {
    pub fn zeros(d: usize) -> Config {
        Config(alloc::vec![0.0; d])
    }

    pub fn lerp(&self, other: &Config, s: f64) -> Config {
        Config(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + s * (b - a))
                .collect(),
        )
    }

    /// Largest per-joint absolute difference.
    pub fn linf_dist(&self, other: &Config) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Sum of per-joint absolute differences.
    pub fn l1_dist(&self, other: &Config) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn l2_dist(&self, other: &Config) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl Deref for Config {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Config {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Config {
    fn from(v: Vec<f64>) -> Config {
        Config(v)
    }
}

/// Revolute joint: a fixed transform from the parent frame, then a rotation
/// about `axis` (unit, expressed in the joint's own frame).
#[derive(Debug, Clone)]
pub struct Joint {
    pub axis: Vec3,
    pub offset: Pose,
}

/// Sphere riding on a link at parametric position `along` in [0, 1]
/// (0 = proximal joint origin, 1 = distal joint origin or tip).
#[derive(Debug, Clone, Copy)]
pub struct LinkSphere {
    pub along: f64,
    pub radius: f64,
}

/// A sphere center in the world frame, tagged with the link it rides on.
#[derive(Debug, Clone, Copy)]
pub struct BodySphere {
    pub center: Vec3,
    pub radius: f64,
    pub link: usize,
}

#[derive(Debug, Clone)]
pub struct SerialChain {
    base_pose: Pose,
    joints: Vec<Joint>,
    limits: Vec<(f64, f64)>,
    spheres: Vec<Vec<LinkSphere>>,
    tip: Vec3,
}

impl SerialChain {
    /// Validates and builds a chain. `spheres` is indexed by link, `tip` is the
    /// endpoint of the last link in the last joint's frame.
    pub fn new(
        base_pose: Pose,
        joints: Vec<Joint>,
        limits: Vec<(f64, f64)>,
        spheres: Vec<Vec<LinkSphere>>,
        tip: Vec3,
    ) -> Result<SerialChain, ModelError> {
        if joints.is_empty() {
            return Err(ModelError::EmptyChain);
        }
        if limits.len() != joints.len() || spheres.len() != joints.len() {
            return Err(ModelError::DimensionMismatch { expected: joints.len(), got: limits.len().min(spheres.len()) });
        }
        for (i, j) in joints.iter().enumerate() {
            if (j.axis.norm() - 1.0).abs() > AXIS_NORM_TOL {
                return Err(ModelError::NonUnitAxis { joint: i });
            }
        }
        for (i, &(lo, hi)) in limits.iter().enumerate() {
            if !(lo < hi) {
                return Err(ModelError::InvalidLimits { joint: i });
            }
        }
        for row in &spheres {
            for s in row {
                if !(s.radius > 0.0) {
                    return Err(ModelError::NonPositiveRadius);
                }
            }
        }
        Ok(SerialChain { base_pose, joints, limits, spheres, tip })
    }

    /// Planar arm in the z = 0 plane: all joints rotate about z, link i extends
    /// along its local x axis by `lengths[i]`. Spheres are placed at the
    /// centers of `spheres_per_link` equal subdivisions of each link.
    pub fn planar(
        base: Vec3,
        lengths: &[f64],
        limit: (f64, f64),
        spheres_per_link: usize,
        radius: f64,
    ) -> Result<SerialChain, ModelError> {
        let z = Vec3::new(0.0, 0.0, 1.0);
        let mut joints = Vec::new();
        for i in 0..lengths.len() {
            let offset = if i == 0 {
                Pose::IDENTITY
            } else {
                Pose::from_translation(Vec3::new(lengths[i - 1], 0.0, 0.0))
            };
            joints.push(Joint { axis: z, offset });
        }
        let layout: Vec<Vec<LinkSphere>> = (0..lengths.len())
            .map(|_| {
                (0..spheres_per_link)
                    .map(|k| LinkSphere {
                        along: (2 * k + 1) as f64 / (2 * spheres_per_link) as f64,
                        radius,
                    })
                    .collect()
            })
            .collect();
        let d = lengths.len();
        SerialChain::new(
            Pose::from_translation(base),
            joints,
            alloc::vec![limit; d],
            layout,
            Vec3::new(lengths[d - 1], 0.0, 0.0),
        )
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn limits(&self) -> &[(f64, f64)] {
        &self.limits
    }

    pub fn base_pose(&self) -> Pose {
        self.base_pose
    }

    pub fn sphere_count(&self) -> usize {
        self.spheres.iter().map(Vec::len).sum()
    }

    pub fn within_limits(&self, q: &Config) -> bool {
        q.len() == self.dof()
            && q.iter()
                .zip(&self.limits)
                .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    fn check_dim(&self, q: &Config) -> Result<(), ModelError> {
        if q.len() != self.dof() {
            return Err(ModelError::DimensionMismatch { expected: self.dof(), got: q.len() });
        }
        Ok(())
    }

    /// World pose of every joint frame after its rotation is applied.
    pub fn frames(&self, q: &Config) -> Result<Vec<Pose>, ModelError> {
        self.check_dim(q)?;
        let mut out = Vec::with_capacity(self.dof());
        let mut cur = self.base_pose;
        for (joint, &angle) in self.joints.iter().zip(q.iter()) {
            cur = cur * joint.offset * Pose::new(Mat3::axis_angle(joint.axis, angle), Vec3::ZERO);
            out.push(cur);
        }
        Ok(out)
    }

    /// Endpoint of link `link` expressed in that link's frame.
    fn link_end(&self, link: usize) -> Vec3 {
        if link + 1 < self.joints.len() {
            self.joints[link + 1].offset.trans
        } else {
            self.tip
        }
    }

    /// World position of a link-local point.
    pub fn point_position(&self, q: &Config, link: usize, local: Vec3) -> Result<Vec3, ModelError> {
        if link >= self.dof() {
            return Err(ModelError::BadIndex);
        }
        let frames = self.frames(q)?;
        Ok(frames[link].transform_point(local))
    }

    /// World-frame centers of all body spheres, ordered by link then layout.
    pub fn forward_kinematics(&self, q: &Config) -> Result<Vec<BodySphere>, ModelError> {
        let frames = self.frames(q)?;
        let mut out = Vec::with_capacity(self.sphere_count());
        for (link, row) in self.spheres.iter().enumerate() {
            let end = self.link_end(link);
            for s in row {
                out.push(BodySphere {
                    center: frames[link].transform_point(end.scale(s.along)),
                    radius: s.radius,
                    link,
                });
            }
        }
        Ok(out)
    }

    /// World position of the last link's tip.
    pub fn tip_position(&self, q: &Config) -> Result<Vec3, ModelError> {
        self.point_position(q, self.dof() - 1, self.tip)
    }

    /// Linear-velocity Jacobian of a world point attached to `link`: column j
    /// is axis_j x (p - origin_j) for j <= link and exactly zero past it.
    pub fn point_jacobian(&self, q: &Config, link: usize, world_point: Vec3) -> Result<Vec<Vec3>, ModelError> {
        self.check_dim(q)?;
        if link >= self.dof() {
            return Err(ModelError::BadIndex);
        }
        let mut cols = Vec::with_capacity(self.dof());
        let mut cur = self.base_pose;
        for (j, joint) in self.joints.iter().enumerate() {
            let pre = cur * joint.offset;
            if j <= link {
                let axis_w = pre.rotate(joint.axis);
                let origin_w = pre.trans;
                cols.push(axis_w.cross(world_point - origin_w));
            } else {
                cols.push(Vec3::ZERO);
            }
            cur = pre * Pose::new(Mat3::axis_angle(joint.axis, q[j]), Vec3::ZERO);
        }
        Ok(cols)
    }
}
