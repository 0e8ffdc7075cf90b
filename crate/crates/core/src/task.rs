//! Tasks, context vectors and the train/test catalogs of both environment
//! families.
//!
//! A task is one member of a contextual MDP family. For the reef family it is a
//! constant water current plus a set of organism types of interest; for the grid
//! family it is the single organism color to collect. The [`ContextVector`] is
//! the encoding a contextual policy receives next to its state.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of organism types in the reef family.
pub const REEF_TYPES: usize = 4;
/// Number of colors in the grid family.
pub const GRID_COLORS: usize = 6;
/// Context width of the reef family: 3 current components then 4 flags.
pub const REEF_CONTEXT_DIM: usize = 3 + REEF_TYPES;
/// Context width of the grid family: color one-hot.
pub const GRID_CONTEXT_DIM: usize = GRID_COLORS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Reef,
    Grid,
}

impl Family {
    pub fn context_dim(self) -> usize {
        match self {
            Family::Reef => REEF_CONTEXT_DIM,
            Family::Grid => GRID_CONTEXT_DIM,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Reef => "reef",
            Family::Grid => "grid",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reef" => Ok(Family::Reef),
            "grid" => Ok(Family::Grid),
            other => Err(Error::InvalidTask(format!("unknown task family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::Config(format!("unknown split `{other}` (expected train or test)"))),
        }
    }
}

/// Organism types of the reef family, in context-flag order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrganismType {
    Red,
    Blue,
    Green,
    Black,
}

impl OrganismType {
    pub const ALL: [OrganismType; REEF_TYPES] = [
        OrganismType::Red,
        OrganismType::Blue,
        OrganismType::Green,
        OrganismType::Black,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            OrganismType::Red => "red",
            OrganismType::Blue => "blue",
            OrganismType::Green => "green",
            OrganismType::Black => "black",
        }
    }
}

/// Organism colors of the grid family, in one-hot order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridColor {
    Red,
    Blue,
    Green,
    Yellow,
    Purple,
    Grey,
}

impl GridColor {
    pub const ALL: [GridColor; GRID_COLORS] = [
        GridColor::Red,
        GridColor::Blue,
        GridColor::Green,
        GridColor::Yellow,
        GridColor::Purple,
        GridColor::Grey,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            GridColor::Red => "red",
            GridColor::Blue => "blue",
            GridColor::Green => "green",
            GridColor::Yellow => "yellow",
            GridColor::Purple => "purple",
            GridColor::Grey => "grey",
        }
    }
}

/// One task of a CMDP family.
///
/// Currents are in m/s in the world frame (+x east, +y north, z up). The grid
/// family has no currents, so `current` is all-zero there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: String,
    pub family: Family,
    pub current: [f64; 3],
    pub interest_flags: Vec<bool>,
    pub split: Split,
}

impl TaskSpec {
    pub fn reef(id: impl Into<String>, current: [f64; 3], flags: [bool; REEF_TYPES], split: Split) -> Result<Self> {
        let task = TaskSpec {
            id: id.into(),
            family: Family::Reef,
            current,
            interest_flags: flags.to_vec(),
            split,
        };
        task.validate()?;
        Ok(task)
    }

    pub fn grid(color: GridColor, split: Split) -> Self {
        let mut flags = vec![false; GRID_COLORS];
        flags[color.index()] = true;
        TaskSpec {
            id: color.name().to_string(),
            family: Family::Grid,
            current: [0.0; 3],
            interest_flags: flags,
            split,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.current.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidTask(format!("{}: non-finite current", self.id)));
        }
        match self.family {
            Family::Reef => {
                if self.interest_flags.len() != REEF_TYPES {
                    return Err(Error::InvalidTask(format!(
                        "{}: reef tasks need {REEF_TYPES} interest flags, got {}",
                        self.id,
                        self.interest_flags.len()
                    )));
                }
                if !self.interest_flags.iter().any(|&f| f) {
                    return Err(Error::InvalidTask(format!("{}: no organism type flagged as interesting", self.id)));
                }
            }
            Family::Grid => {
                if self.interest_flags.len() != GRID_COLORS {
                    return Err(Error::InvalidTask(format!(
                        "{}: grid tasks need {GRID_COLORS} flags, got {}",
                        self.id,
                        self.interest_flags.len()
                    )));
                }
                if self.interest_flags.iter().filter(|&&f| f).count() != 1 {
                    return Err(Error::InvalidTask(format!("{}: grid flags must be one-hot", self.id)));
                }
                if self.current != [0.0; 3] {
                    return Err(Error::InvalidTask(format!("{}: grid tasks have no current", self.id)));
                }
            }
        }
        Ok(())
    }

    /// Target color of a grid task.
    pub fn grid_color(&self) -> Result<GridColor> {
        if self.family != Family::Grid {
            return Err(Error::InvalidTask(format!("{} is not a grid task", self.id)));
        }
        self.validate()?;
        let index = self.interest_flags.iter().position(|&f| f).expect("validated one-hot");
        Ok(GridColor::ALL[index])
    }

    /// Interest flags of a reef task as 0/1 weights.
    pub fn interest_weights(&self) -> [f64; REEF_TYPES] {
        let mut w = [0.0; REEF_TYPES];
        for (slot, &flag) in w.iter_mut().zip(&self.interest_flags) {
            *slot = if flag { 1.0 } else { 0.0 };
        }
        w
    }
}

/// Encoded task descriptor fed to contextual policies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextVector(pub Vec<f64>);

impl ContextVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn distance_squared(&self, other: &ContextVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum()
    }
}

/// Encodes a task as its context vector.
///
/// Reef: `(c_x, c_y, c_z, red, blue, green, black)`. Grid: color one-hot.
pub fn context_vector(task: &TaskSpec) -> Result<ContextVector> {
    task.validate()?;
    let flags = task.interest_flags.iter().map(|&f| if f { 1.0 } else { 0.0 });
    let values = match task.family {
        Family::Reef => task.current.iter().copied().chain(flags).collect(),
        Family::Grid => flags.collect(),
    };
    Ok(ContextVector(values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskCatalog {
    pub family: Family,
    pub train: Vec<TaskSpec>,
    pub test: Vec<TaskSpec>,
}

impl TaskCatalog {
    pub fn split(&self, split: Split) -> &[TaskSpec] {
        match split {
            Split::Train => &self.train,
            Split::Test => &self.test,
        }
    }
}

/// Inputs to [`build_catalog`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogConfig {
    /// Current speed in m/s for every non-zero current.
    pub current_magnitude: f64,
}

impl Default for CatalogConfig {
    fn default() -> Self {
        CatalogConfig { current_magnitude: 0.2 }
    }
}

const TRAIN_CURRENTS: [(&str, [f64; 2]); 5] = [
    ("N", [0.0, 1.0]),
    ("E", [1.0, 0.0]),
    ("S", [0.0, -1.0]),
    ("W", [-1.0, 0.0]),
    ("none", [0.0, 0.0]),
];

const TEST_CURRENTS: [(&str, [f64; 2]); 4] = [
    ("NE", [1.0, 1.0]),
    ("SE", [1.0, -1.0]),
    ("NW", [-1.0, 1.0]),
    ("SW", [-1.0, -1.0]),
];

fn scaled_current(direction: [f64; 2], magnitude: f64) -> [f64; 3] {
    let norm = direction[0].hypot(direction[1]);
    if norm == 0.0 {
        return [0.0; 3];
    }
    [direction[0] / norm * magnitude, direction[1] / norm * magnitude, 0.0]
}

fn single_type_flags(kind: OrganismType) -> [bool; REEF_TYPES] {
    let mut flags = [false; REEF_TYPES];
    flags[kind.index()] = true;
    flags
}

/// Builds the train/test catalog for a family.
///
/// Reef: train = {N, E, S, W, none} x single-type flags (20 tasks, current-major
/// order); test = {NE, SE, NW, SW} x single-type flags plus the all-types task
/// without current (17 tasks). Grid: train = red, green, yellow, grey; test =
/// blue, purple.
pub fn build_catalog(family: Family, config: &CatalogConfig) -> Result<TaskCatalog> {
    match family {
        Family::Reef => {
            let m = config.current_magnitude;
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::Config(format!("current magnitude must be positive, got {m}")));
            }
            let mut train = Vec::with_capacity(20);
            for (label, direction) in TRAIN_CURRENTS {
                for kind in OrganismType::ALL {
                    train.push(TaskSpec::reef(
                        format!("{label}-{}", kind.name()),
                        scaled_current(direction, m),
                        single_type_flags(kind),
                        Split::Train,
                    )?);
                }
            }
            let mut test = Vec::with_capacity(17);
            for (label, direction) in TEST_CURRENTS {
                for kind in OrganismType::ALL {
                    test.push(TaskSpec::reef(
                        format!("{label}-{}", kind.name()),
                        scaled_current(direction, m),
                        single_type_flags(kind),
                        Split::Test,
                    )?);
                }
            }
            test.push(TaskSpec::reef("none-all", [0.0; 3], [true; REEF_TYPES], Split::Test)?);
            Ok(TaskCatalog { family, train, test })
        }
        Family::Grid => {
            use GridColor::*;
            Ok(TaskCatalog {
                family,
                train: [Red, Green, Yellow, Grey].map(|c| TaskSpec::grid(c, Split::Train)).to_vec(),
                test: [Blue, Purple].map(|c| TaskSpec::grid(c, Split::Test)).to_vec(),
            })
        }
    }
}
