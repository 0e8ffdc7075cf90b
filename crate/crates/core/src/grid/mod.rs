//! Discrete gridworld counterpart of the reef task.
//!
//! The agent walks a walled grid and must collect the five organisms of its
//! task color by moving next to them, while never stepping into a wall or an
//! organism of another color. Organisms are placed either in one built-in
//! layout or uniformly at random inside per-color areas.

mod layout;

pub use layout::{fixed_layout, sample_layout, Area, GridLayout, LayoutMode};

use serde::{Deserialize, Serialize};

use crate::env::{EnvStep, Environment};
use crate::error::{Error, Result};
use crate::task::{Family, GridColor, TaskSpec, GRID_COLORS};

pub const GRID_ACTIONS: usize = 3;
pub const ORGANISMS_PER_COLOR: usize = 5;
/// Cell channels of the observation window: empty, wall, then one per color.
pub const CELL_CHANNELS: usize = 2 + GRID_COLORS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridAction {
    Forward = 0,
    TurnRight = 1,
    TurnLeft = 2,
}

impl GridAction {
    pub const ALL: [GridAction; GRID_ACTIONS] = [GridAction::Forward, GridAction::TurnRight, GridAction::TurnLeft];

    pub fn from_index(index: usize) -> Result<Self> {
        Self::ALL.get(index).copied().ok_or(Error::ActionOutOfRange {
            index,
            len: GRID_ACTIONS,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Heading {
    North = 0,
    East = 1,
    South = 2,
    West = 3,
}

impl Heading {
    const ALL: [Heading; 4] = [Heading::North, Heading::East, Heading::South, Heading::West];

    /// Unit step as (d_col, d_row); rows grow southwards.
    pub fn delta(self) -> (i64, i64) {
        match self {
            Heading::North => (0, -1),
            Heading::East => (1, 0),
            Heading::South => (0, 1),
            Heading::West => (-1, 0),
        }
    }

    pub fn right(self) -> Heading {
        Self::ALL[(self as usize + 1) % 4]
    }

    pub fn left(self) -> Heading {
        Self::ALL[(self as usize + 3) % 4]
    }

    fn glyph(self) -> char {
        match self {
            Heading::North => '^',
            Heading::East => '>',
            Heading::South => 'v',
            Heading::West => '<',
        }
    }
}

pub type Cell = (usize, usize);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub width: usize,
    pub height: usize,
    /// Side of the square egocentric observation window (odd).
    pub window: usize,
    pub start: Cell,
    pub start_heading: Heading,
    pub r_found: f64,
    pub r_complete: f64,
    pub r_collide: f64,
    pub step_penalty: f64,
    pub horizon: u32,
    /// Placement areas for the random layout, indexed by color.
    pub areas: Vec<Area>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            width: 12,
            height: 12,
            window: 5,
            start: (1, 1),
            start_heading: Heading::East,
            r_found: 1.0,
            r_complete: 100.0,
            r_collide: -100.0,
            step_penalty: 0.01,
            horizon: 400,
            areas: layout::default_areas(),
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width < 3 || self.height < 3 {
            return Err(Error::Config("grid must be at least 3x3".into()));
        }
        if self.window == 0 || self.window.is_multiple_of(2) {
            return Err(Error::Config(format!("grid.window must be odd, got {}", self.window)));
        }
        if !self.is_interior(self.start) {
            return Err(Error::Config(format!("grid.start {:?} is not an interior cell", self.start)));
        }
        if self.horizon == 0 {
            return Err(Error::Config("grid.horizon must be positive".into()));
        }
        if self.r_collide >= 0.0 || self.r_complete <= 0.0 || self.step_penalty < 0.0 {
            return Err(Error::Config("grid rewards need r_collide < 0 < r_complete and step_penalty >= 0".into()));
        }
        if self.areas.len() != GRID_COLORS {
            return Err(Error::Config(format!("grid.areas needs {GRID_COLORS} entries, got {}", self.areas.len())));
        }
        Ok(())
    }

    pub fn is_interior(&self, (col, row): Cell) -> bool {
        col >= 1 && row >= 1 && col + 1 < self.width && row + 1 < self.height
    }

    pub fn observation_dim(&self) -> usize {
        self.window * self.window * CELL_CHANNELS + 4 + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub cell: Cell,
    pub heading: Heading,
    pub collected: [u8; GRID_COLORS],
    pub observation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridStepInfo {
    pub success: bool,
    pub failure: bool,
    pub collected_this_step: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridStepOutcome {
    pub next_state: GridState,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub info: GridStepInfo,
}

#[derive(Debug, Clone)]
pub struct GridEnv {
    config: GridConfig,
    mode: LayoutMode,
    target: GridColor,
    layout: GridLayout,
    /// Uncollected organism per cell, row-major.
    occupancy: Vec<Option<GridColor>>,
    state: GridState,
    steps: u32,
    done: bool,
}

impl GridEnv {
    pub fn new(config: GridConfig, mode: LayoutMode) -> Result<Self> {
        config.validate()?;
        let layout = sample_layout(mode, 0, &config)?;
        let occupancy = vec![None; config.width * config.height];
        let state = GridState {
            cell: config.start,
            heading: config.start_heading,
            collected: [0; GRID_COLORS],
            observation: Vec::new(),
        };
        Ok(GridEnv {
            config,
            mode,
            target: GridColor::Red,
            layout,
            occupancy,
            state,
            steps: 0,
            done: true,
        })
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    pub fn layout(&self) -> &GridLayout {
        &self.layout
    }

    pub fn state(&self) -> &GridState {
        &self.state
    }

    pub fn reset_task(&mut self, task: &TaskSpec, seed: u64) -> Result<&GridState> {
        self.target = task.grid_color()?;
        self.layout = sample_layout(self.mode, seed, &self.config)?;
        self.occupancy.iter_mut().for_each(|c| *c = None);
        for &(cell, color) in &self.layout.organisms {
            let i = self.index(cell);
            self.occupancy[i] = Some(color);
        }
        self.state = GridState {
            cell: self.config.start,
            heading: self.config.start_heading,
            collected: [0; GRID_COLORS],
            observation: Vec::new(),
        };
        self.state.observation = self.observe();
        self.steps = 0;
        self.done = false;
        Ok(&self.state)
    }

    fn index(&self, (col, row): Cell) -> usize {
        row * self.config.width + col
    }

    fn offset(&self, (col, row): Cell, d_col: i64, d_row: i64) -> Option<Cell> {
        let c = col as i64 + d_col;
        let r = row as i64 + d_row;
        if c < 0 || r < 0 || c >= self.config.width as i64 || r >= self.config.height as i64 {
            None
        } else {
            Some((c as usize, r as usize))
        }
    }

    fn is_wall(&self, cell: Option<Cell>) -> bool {
        cell.is_none_or(|c| !self.config.is_interior(c))
    }

    fn cell_channel(&self, cell: Option<Cell>) -> usize {
        if self.is_wall(cell) {
            return 1;
        }
        match self.occupancy[self.index(cell.expect("non-wall cell"))] {
            None => 0,
            Some(color) => 2 + color.index(),
        }
    }

    /// Egocentric window (farthest row first, left to right) one-hot per cell,
    /// then heading one-hot, then the uncollected fraction of the target color.
    fn observe(&self) -> Vec<f64> {
        let w = self.config.window;
        let half = (w / 2) as i64;
        let (f_col, f_row) = self.state.heading.delta();
        let (r_col, r_row) = self.state.heading.right().delta();
        let mut obs = vec![0.0; self.config.observation_dim()];
        for i in 0..w {
            let ahead = (w - 1 - i) as i64;
            for j in 0..w {
                let side = j as i64 - half;
                let cell = self.offset(self.state.cell, ahead * f_col + side * r_col, ahead * f_row + side * r_row);
                obs[(i * w + j) * CELL_CHANNELS + self.cell_channel(cell)] = 1.0;
            }
        }
        let base = w * w * CELL_CHANNELS;
        obs[base + self.state.heading as usize] = 1.0;
        let collected = self.state.collected[self.target.index()] as f64;
        obs[base + 4] = 1.0 - collected / ORGANISMS_PER_COLOR as f64;
        obs
    }

    pub fn step_action(&mut self, action: GridAction) -> Result<GridStepOutcome> {
        if self.done {
            return Err(Error::EpisodeFinished);
        }
        self.steps += 1;
        let cfg = &self.config;
        let mut reward = -cfg.step_penalty;
        let mut success = false;
        let mut failure = false;
        let mut collected_now = 0u8;
        match action {
            GridAction::TurnRight => self.state.heading = self.state.heading.right(),
            GridAction::TurnLeft => self.state.heading = self.state.heading.left(),
            GridAction::Forward => {
                let (dc, dr) = self.state.heading.delta();
                let ahead = self.offset(self.state.cell, dc, dr);
                let occupant = if self.is_wall(ahead) {
                    None
                } else {
                    self.occupancy[self.index(ahead.expect("interior"))]
                };
                if self.is_wall(ahead) || occupant.is_some_and(|c| c != self.target) {
                    reward = self.config.r_collide;
                    failure = true;
                } else if occupant.is_none() {
                    let next = ahead.expect("interior");
                    self.state.cell = next;
                    for (dc, dr) in [(0, -1), (1, 0), (0, 1), (-1, 0)] {
                        if let Some(n) = self.offset(next, dc, dr) {
                            let i = self.index(n);
                            if self.occupancy[i] == Some(self.target) {
                                self.occupancy[i] = None;
                                collected_now += 1;
                            }
                        }
                    }
                    let slot = &mut self.state.collected[self.target.index()];
                    *slot += collected_now;
                    reward += collected_now as f64 * self.config.r_found;
                    if *slot as usize >= ORGANISMS_PER_COLOR {
                        reward += self.config.r_complete;
                        success = true;
                    }
                }
                // a correct-color organism ahead blocks the move without penalty
            }
        }
        let terminated = success || failure;
        let truncated = !terminated && self.steps >= self.config.horizon;
        self.done = terminated || truncated;
        self.state.observation = self.observe();
        Ok(GridStepOutcome {
            next_state: self.state.clone(),
            reward,
            terminated,
            truncated,
            info: GridStepInfo {
                success,
                failure,
                collected_this_step: collected_now,
            },
        })
    }

    /// One character per cell: `#` wall, `.` empty, organism initials
    /// (`R B G Y P E` for red, blue, green, yellow, purple, grey) and the
    /// agent as `^ > v <`.
    pub fn render(&self) -> String {
        let mut out = String::with_capacity((self.config.width + 1) * self.config.height);
        for row in 0..self.config.height {
            for col in 0..self.config.width {
                let cell = (col, row);
                let ch = if cell == self.state.cell {
                    self.state.heading.glyph()
                } else if !self.config.is_interior(cell) {
                    '#'
                } else {
                    match self.occupancy[self.index(cell)] {
                        None => '.',
                        Some(color) => color_glyph(color),
                    }
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn color_glyph(color: GridColor) -> char {
    match color {
        GridColor::Red => 'R',
        GridColor::Blue => 'B',
        GridColor::Green => 'G',
        GridColor::Yellow => 'Y',
        GridColor::Purple => 'P',
        GridColor::Grey => 'E',
    }
}

impl Environment for GridEnv {
    fn family(&self) -> Family {
        Family::Grid
    }

    fn num_actions(&self) -> usize {
        GRID_ACTIONS
    }

    fn observation_dim(&self) -> usize {
        self.config.observation_dim()
    }

    fn reset(&mut self, task: &TaskSpec, seed: u64) -> Result<Vec<f64>> {
        Ok(self.reset_task(task, seed)?.observation.clone())
    }

    fn step(&mut self, action: usize) -> Result<EnvStep> {
        let outcome = self.step_action(GridAction::from_index(action)?)?;
        Ok(EnvStep {
            observation: outcome.next_state.observation,
            reward: outcome.reward,
            terminated: outcome.terminated,
            truncated: outcome.truncated,
            success: outcome.info.success,
        })
    }
}

/// One row of a grid trajectory dump; `(col, row)` stands in for the pose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridTrajectoryRow {
    pub t: u32,
    pub col: usize,
    pub row: usize,
    pub heading: usize,
    pub action: usize,
    pub reward: f64,
    pub remaining: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::Split;

    fn env(mode: LayoutMode) -> GridEnv {
        GridEnv::new(GridConfig::default(), mode).unwrap()
    }

    fn task(color: GridColor) -> TaskSpec {
        TaskSpec::grid(color, Split::Train)
    }

    #[test]
    fn reset_zeroes_collection_and_sizes_observation() {
        let mut e = env(LayoutMode::Fixed);
        let s = e.reset_task(&task(GridColor::Red), 1).unwrap().clone();
        assert_eq!(s.collected, [0; 6]);
        assert_eq!(s.observation.len(), 5 * 5 * 8 + 5);
        assert_eq!(s.observation.len(), e.observation_dim());
        // every window cell is exactly one-hot
        for cell in s.observation[..200].chunks(CELL_CHANNELS) {
            assert_eq!(cell.iter().sum::<f64>(), 1.0);
        }
        assert_eq!(*s.observation.last().unwrap(), 1.0);
    }

    #[test]
    fn forward_into_wall_collides() {
        let mut e = env(LayoutMode::Fixed);
        e.reset_task(&task(GridColor::Red), 0).unwrap();
        // start (1,1) facing east; turn left to face north, wall ahead
        e.step_action(GridAction::TurnLeft).unwrap();
        let o = e.step_action(GridAction::Forward).unwrap();
        assert_eq!(o.reward, -100.0);
        assert!(o.terminated && o.info.failure);
        assert!(matches!(e.step_action(GridAction::Forward), Err(Error::EpisodeFinished)));
    }

    #[test]
    fn turning_keeps_cell() {
        let mut e = env(LayoutMode::Fixed);
        e.reset_task(&task(GridColor::Red), 0).unwrap();
        for a in [GridAction::TurnLeft, GridAction::TurnRight, GridAction::TurnRight] {
            let o = e.step_action(a).unwrap();
            assert_eq!(o.next_state.cell, (1, 1));
            assert!((o.reward + 0.01).abs() < 1e-15);
        }
        assert_eq!(e.state().heading, Heading::South);
    }

    #[test]
    fn moving_next_to_target_collects() {
        let mut e = env(LayoutMode::Fixed);
        e.reset_task(&task(GridColor::Red), 0).unwrap();
        // (2,1) is adjacent to the red organism at (2,2)
        let o = e.step_action(GridAction::Forward).unwrap();
        assert_eq!(o.next_state.cell, (2, 1));
        assert_eq!(o.info.collected_this_step, 1);
        assert!((o.reward - (1.0 - 0.01)).abs() < 1e-12);
        assert!(!o.terminated);
        assert!((o.next_state.observation.last().unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn blocked_by_correct_organism_without_penalty() {
        // arrivals collect every adjacent target, so only a start cell next to
        // one can face an uncollected target
        let cfg = GridConfig {
            start: (1, 2),
            ..GridConfig::default()
        };
        let mut e = GridEnv::new(cfg, LayoutMode::Fixed).unwrap();
        e.reset_task(&task(GridColor::Red), 0).unwrap();
        let o = e.step_action(GridAction::Forward).unwrap(); // red at (2,2)
        assert_eq!(o.next_state.cell, (1, 2));
        assert!((o.reward + 0.01).abs() < 1e-12);
        assert!(!o.terminated);
        assert_eq!(o.info.collected_this_step, 0);
    }

    #[test]
    fn fifth_organism_completes() {
        let mut e = env(LayoutMode::Fixed);
        e.reset_task(&task(GridColor::Grey), 0).unwrap();
        // down column 1 to row 9, then east along row 9 collecting row 10
        e.step_action(GridAction::TurnRight).unwrap();
        for _ in 0..7 {
            assert!(!e.step_action(GridAction::Forward).unwrap().terminated);
        }
        let o = e.step_action(GridAction::Forward).unwrap(); // (1,9) next to (1,10)
        assert_eq!(o.info.collected_this_step, 1);
        e.step_action(GridAction::TurnLeft).unwrap();
        let mut last = None;
        for _ in 0..8 {
            let o = e.step_action(GridAction::Forward).unwrap();
            let done = o.terminated;
            last = Some(o);
            if done {
                break;
            }
        }
        let last = last.unwrap();
        assert_eq!(last.next_state.cell, (9, 9));
        assert!(last.terminated && last.info.success);
        assert!((last.reward - (1.0 + 100.0 - 0.01)).abs() < 1e-12);
    }

    #[test]
    fn wrong_color_is_a_collision() {
        let mut e = env(LayoutMode::Fixed);
        e.reset_task(&task(GridColor::Green), 0).unwrap();
        e.step_action(GridAction::TurnRight).unwrap(); // south
        e.step_action(GridAction::Forward).unwrap(); // (1,2)
        e.step_action(GridAction::TurnLeft).unwrap(); // east, red at (2,2)
        let o = e.step_action(GridAction::Forward).unwrap();
        assert_eq!(o.reward, -100.0);
        assert!(o.info.failure);
    }

    #[test]
    fn render_marks_agent_and_walls() {
        let mut e = env(LayoutMode::Fixed);
        e.reset_task(&task(GridColor::Red), 0).unwrap();
        let text = e.render();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 12);
        assert_eq!(lines[0], "############");
        assert_eq!(lines[1], "#>.........#");
        assert_eq!(lines[2], "#.R.R.G.G.P#");
    }
}
