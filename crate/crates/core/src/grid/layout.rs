use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Cell, GridConfig, ORGANISMS_PER_COLOR};
use crate::error::{Error, Result};
use crate::task::{GridColor, GRID_COLORS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutMode {
    Fixed,
    Random,
}

/// Inclusive rectangle of cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Area {
    pub cols: (usize, usize),
    pub rows: (usize, usize),
}

impl Area {
    pub fn contains(&self, (col, row): Cell) -> bool {
        (self.cols.0..=self.cols.1).contains(&col) && (self.rows.0..=self.rows.1).contains(&row)
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for row in self.rows.0..=self.rows.1 {
            for col in self.cols.0..=self.cols.1 {
                out.push((col, row));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridLayout {
    pub width: usize,
    pub height: usize,
    pub mode: LayoutMode,
    pub organisms: Vec<(Cell, GridColor)>,
}

// Built-in 12x12 layout. Red, green, yellow and blue form dice-five patterns,
// purple lines the east column and grey the south row.
const FIXED_MAP: [&str; 12] = [
    "############",
    "#..........#",
    "#.R.R.G.G.P#",
    "#..R...G...#",
    "#.R.R.G.G.P#",
    "#..........#",
    "#.Y.Y.B.B.P#",
    "#..Y...B...#",
    "#.Y.Y.B.B.P#",
    "#..........#",
    "#E.E.E.E.EP#",
    "############",
];

/// Per-color placement areas of the random layout, indexed by color. Each
/// area covers the same region its color occupies in the fixed layout.
pub fn default_areas() -> Vec<Area> {
    let area = |cols, rows| Area { cols, rows };
    vec![
        area((2, 4), (2, 4)),  // red
        area((6, 8), (6, 8)),  // blue
        area((6, 8), (2, 4)),  // green
        area((2, 4), (6, 8)),  // yellow
        area((10, 10), (2, 10)), // purple
        area((1, 9), (10, 10)),  // grey
    ]
}

pub fn fixed_layout() -> GridLayout {
    let mut organisms = Vec::with_capacity(GRID_COLORS * ORGANISMS_PER_COLOR);
    for (row, line) in FIXED_MAP.iter().enumerate() {
        for (col, ch) in line.chars().enumerate() {
            let color = match ch {
                'R' => GridColor::Red,
                'B' => GridColor::Blue,
                'G' => GridColor::Green,
                'Y' => GridColor::Yellow,
                'P' => GridColor::Purple,
                'E' => GridColor::Grey,
                _ => continue,
            };
            organisms.push(((col, row), color));
        }
    }
    GridLayout {
        width: FIXED_MAP[0].len(),
        height: FIXED_MAP.len(),
        mode: LayoutMode::Fixed,
        organisms,
    }
}

/// Produces the organism layout for an episode.
///
/// Fixed mode ignores `seed`. Random mode draws five distinct cells per color
/// uniformly from that color's area, skipping the start cell.
pub fn sample_layout(mode: LayoutMode, seed: u64, config: &GridConfig) -> Result<GridLayout> {
    match mode {
        LayoutMode::Fixed => {
            let layout = fixed_layout();
            if (layout.width, layout.height) != (config.width, config.height) {
                return Err(Error::Config(format!(
                    "the fixed layout is {}x{}, config asks for {}x{}",
                    layout.width, layout.height, config.width, config.height
                )));
            }
            if layout.organisms.iter().any(|&(cell, _)| cell == config.start) {
                return Err(Error::Config("grid.start overlaps an organism of the fixed layout".into()));
            }
            Ok(layout)
        }
        LayoutMode::Random => {
            if config.areas.len() != GRID_COLORS {
                return Err(Error::Config(format!("grid.areas needs {GRID_COLORS} entries")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut taken: Vec<Cell> = Vec::with_capacity(GRID_COLORS * ORGANISMS_PER_COLOR);
            let mut organisms = Vec::with_capacity(GRID_COLORS * ORGANISMS_PER_COLOR);
            for color in GridColor::ALL {
                let area = config.areas[color.index()];
                let cells: Vec<Cell> = area
                    .cells()
                    .into_iter()
                    .filter(|&c| config.is_interior(c) && c != config.start && !taken.contains(&c))
                    .collect();
                if cells.len() < ORGANISMS_PER_COLOR {
                    return Err(Error::Config(format!(
                        "area of {} has {} free interior cells, needs {ORGANISMS_PER_COLOR}",
                        color.name(),
                        cells.len()
                    )));
                }
                for i in sample(&mut rng, cells.len(), ORGANISMS_PER_COLOR) {
                    taken.push(cells[i]);
                    organisms.push((cells[i], color));
                }
            }
            Ok(GridLayout {
                width: config.width,
                height: config.height,
                mode,
                organisms,
            })
        }
    }
}
