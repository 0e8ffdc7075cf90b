//! Kinematic AUV model.
//!
//! Each action maps to a commanded body velocity. The realized velocity relaxes
//! toward commanded velocity plus current with a first-order lag:
//!
//! ```text
//! v' = alpha * v + (1 - alpha) * (u_body(action, heading') + current)
//! x' = x + v' * dt
//! ```
//!
//! Turns rotate the heading by `yaw_rate * dt` before the body command is
//! evaluated and keep half thrust forward, like the fin-and-thruster actions
//! they stand in for.

use std::f64::consts::PI;

use super::ReefAction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsParams {
    /// Commanded speed in m/s.
    pub v_cmd: f64,
    /// Yaw rate in rad/s.
    pub yaw_rate: f64,
    /// Per-step velocity retention in [0, 1).
    pub alpha: f64,
}

/// Planar pose and velocity of the vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub position: [f64; 2],
    /// Heading angle in (-pi, pi], measured counter-clockwise from +x (east).
    pub heading: f64,
    pub velocity: [f64; 2],
}

impl Kinematics {
    pub fn at_rest(position: [f64; 2], heading: f64) -> Self {
        Kinematics {
            position,
            heading,
            velocity: [0.0; 2],
        }
    }

    /// Unit heading vector `(cos, sin)`.
    pub fn rotation(&self) -> [f64; 2] {
        [self.heading.cos(), self.heading.sin()]
    }
}

pub(crate) fn wrap_angle(angle: f64) -> f64 {
    // maps to (-pi, pi]
    let wrapped = (angle + PI).rem_euclid(2.0 * PI) - PI;
    if wrapped == -PI {
        PI
    } else {
        wrapped
    }
}

/// Advances the vehicle by one control interval.
pub fn apply_dynamics(
    state: &Kinematics,
    action: ReefAction,
    current: [f64; 2],
    params: &DynamicsParams,
    dt: f64,
) -> Kinematics {
    debug_assert!(dt > 0.0);
    let heading = match action {
        ReefAction::TurnLeft => wrap_angle(state.heading + params.yaw_rate * dt),
        ReefAction::TurnRight => wrap_angle(state.heading - params.yaw_rate * dt),
        _ => state.heading,
    };
    let speed = match action {
        ReefAction::Forward | ReefAction::TurnLeft | ReefAction::TurnRight => params.v_cmd,
        ReefAction::Backward => -params.v_cmd,
        ReefAction::NoOp => 0.0,
    };
    let (sin, cos) = heading.sin_cos();
    let command = [speed * cos + current[0], speed * sin + current[1]];
    let a = params.alpha;
    let velocity = [
        a * state.velocity[0] + (1.0 - a) * command[0],
        a * state.velocity[1] + (1.0 - a) * command[1],
    ];
    Kinematics {
        position: [state.position[0] + velocity[0] * dt, state.position[1] + velocity[1] * dt],
        heading,
        velocity,
    }
}
