use core::fmt;

/// Construction or query rejected because the model data is malformed.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// A configuration or force vector has the wrong number of joints.
    DimensionMismatch { expected: usize, got: usize },
    /// Joint axis norm differs from 1 by more than the validation tolerance.
    NonUnitAxis { joint: usize },
    /// Joint limit interval is empty (min >= max).
    InvalidLimits { joint: usize },
    NonPositiveRadius,
    EmptyChain,
    EmptyTrajectory,
    NonIncreasingTimes,
    NonPositiveTimeStep,
    /// Two sphere centers coincide; the repulsive direction is undefined there.
    CoincidentCenters,
    /// Trajectory sets must hold at least one robot.
    EmptyTrajectorySet,
    /// Index referred to a robot or link that does not exist.
    BadIndex,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::DimensionMismatch { expected, got } => {
                write!(f, "expected {expected} joint values, got {got}")
            }
            ModelError::NonUnitAxis { joint } => write!(f, "joint {joint} axis is not unit length"),
            ModelError::InvalidLimits { joint } => write!(f, "joint {joint} has an empty limit interval"),
            ModelError::NonPositiveRadius => write!(f, "sphere radius must be positive"),
            ModelError::EmptyChain => write!(f, "chain has no joints"),
            ModelError::EmptyTrajectory => write!(f, "trajectory has no waypoints"),
            ModelError::NonIncreasingTimes => write!(f, "waypoint times must strictly increase"),
            ModelError::NonPositiveTimeStep => write!(f, "time step must be positive"),
            ModelError::CoincidentCenters => write!(f, "sphere centers coincide"),
            ModelError::EmptyTrajectorySet => write!(f, "trajectory set has no robots"),
            ModelError::BadIndex => write!(f, "robot or link index out of range"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ModelError {}
