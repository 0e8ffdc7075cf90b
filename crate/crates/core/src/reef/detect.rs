//! Perfect organism detector.
//!
//! Counts organisms strictly closer than `d_max`, bucketed by body-frame
//! quadrant and type. Index layout is quadrant-major: `quadrant * 4 + type`
//! with quadrants `[front-right, front-left, back-right, back-left]` and types
//! `[red, blue, green, black]`.

use serde::{Deserialize, Serialize};

use crate::task::{OrganismType, REEF_TYPES};

pub const QUADRANTS: usize = 4;
pub const DETECTION_DIM: usize = QUADRANTS * REEF_TYPES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quadrant {
    FrontRight = 0,
    FrontLeft = 1,
    BackRight = 2,
    BackLeft = 3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Organism {
    pub position: [f64; 2],
    pub kind: OrganismType,
    pub discovered: bool,
}

/// Output of one detector pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Detection {
    pub local_total: [u32; DETECTION_DIM],
    pub local_new: [u32; DETECTION_DIM],
    /// Indices into the organism slice of first-time detections.
    pub newly_discovered: Vec<usize>,
}

impl Detection {
    /// Per-type sum of new detections over quadrants.
    pub fn new_per_type(&self) -> [u32; REEF_TYPES] {
        per_type(&self.local_new)
    }
}

pub fn per_type(counts: &[u32; DETECTION_DIM]) -> [u32; REEF_TYPES] {
    let mut out = [0; REEF_TYPES];
    for (i, &c) in counts.iter().enumerate() {
        out[i % REEF_TYPES] += c;
    }
    out
}

pub fn detection_index(quadrant: Quadrant, kind: OrganismType) -> usize {
    quadrant as usize * REEF_TYPES + kind.index()
}

/// Quadrant of `offset` (organism minus vehicle) in the body frame spanned by
/// the forward axis `rotation` and its +90 degree left axis. Points exactly on
/// the lateral axis count as front; points exactly ahead count as right.
pub fn quadrant(offset: [f64; 2], rotation: [f64; 2]) -> Quadrant {
    let forward = offset[0] * rotation[0] + offset[1] * rotation[1];
    let left = -offset[0] * rotation[1] + offset[1] * rotation[0];
    match (forward >= 0.0, left > 0.0) {
        (true, false) => Quadrant::FrontRight,
        (true, true) => Quadrant::FrontLeft,
        (false, false) => Quadrant::BackRight,
        (false, true) => Quadrant::BackLeft,
    }
}

fn pass(position: [f64; 2], rotation: [f64; 2], organisms: &[Organism], d_max: f64) -> Detection {
    let mut detection = Detection {
        local_total: [0; DETECTION_DIM],
        local_new: [0; DETECTION_DIM],
        newly_discovered: Vec::new(),
    };
    let range2 = d_max * d_max;
    for (i, org) in organisms.iter().enumerate() {
        let offset = [org.position[0] - position[0], org.position[1] - position[1]];
        if offset[0] * offset[0] + offset[1] * offset[1] >= range2 {
            continue;
        }
        let slot = detection_index(quadrant(offset, rotation), org.kind);
        detection.local_total[slot] += 1;
        if !org.discovered {
            detection.local_new[slot] += 1;
            detection.newly_discovered.push(i);
        }
    }
    detection
}

/// Runs the detector and latches every newly counted organism as discovered.
pub fn detect(position: [f64; 2], rotation: [f64; 2], organisms: &mut [Organism], d_max: f64) -> Detection {
    debug_assert!(d_max > 0.0);
    let detection = pass(position, rotation, organisms, d_max);
    for &i in &detection.newly_discovered {
        organisms[i].discovered = true;
    }
    detection
}

/// Same counts as [`detect`] without marking anything discovered.
pub fn scan(position: [f64; 2], rotation: [f64; 2], organisms: &[Organism], d_max: f64) -> Detection {
    pass(position, rotation, organisms, d_max)
}
