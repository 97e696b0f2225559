use serde::{Deserialize, Serialize};

use crate::error::{CqedError, Result};

/// Uniform scan grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self> {
        let grid = Self { start, stop, points };
        grid.validate()?;
        Ok(grid)
    }

    /// Symmetric grid `[-half_span, half_span]`; with an odd point count the
    /// middle node is exactly zero.
    pub fn symmetric(half_span: f64, points: usize) -> Result<Self> {
        Self::new(-half_span, half_span, points)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(CqedError::Grid(format!(
                "a scan needs at least 2 points, got {}",
                self.points
            )));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.stop <= self.start {
            return Err(CqedError::Grid(format!(
                "scan range [{}, {}] must be finite and increasing",
                self.start, self.stop
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.points - 1) as f64
    }

    pub fn value(&self, k: usize) -> f64 {
        if k + 1 == self.points {
            return self.stop;
        }
        let t = k as f64 / (self.points - 1) as f64;
        self.start * (1.0 - t) + self.stop * t
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.value(k)).collect()
    }
}
