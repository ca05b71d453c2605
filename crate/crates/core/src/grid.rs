use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a grid was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Uniform {
        intervals: usize,
    },
    /// Uniform grid with `2^level` intervals.
    Dyadic {
        level: u32,
    },
}

/// Partition `0 = t₀ < t₁ < ⋯ < t_n = 1` of the unit interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    points: Vec<f64>,
    kind: GridKind,
}

impl Grid {
    /// Uniform grid with `intervals` subintervals (`intervals + 1` points).
    pub fn uniform(intervals: usize) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::input("grid needs at least one interval"));
        }
        let points = (0..=intervals)
            .map(|i| i as f64 / intervals as f64)
            .collect();
        Ok(Grid {
            points,
            kind: GridKind::Uniform { intervals },
        })
    }

    pub fn dyadic(level: u32) -> Result<Self> {
        if level > 30 {
            return Err(Error::input(format!("dyadic level {level} too large")));
        }
        let mut g = Grid::uniform(1usize << level)?;
        g.kind = GridKind::Dyadic { level };
        Ok(g)
    }

    /// Dyadic grid with `n = 2^m + 1` points.
    pub fn with_points(n: usize) -> Result<Self> {
        if n < 2 || !(n - 1).is_power_of_two() {
            return Err(Error::input(format!(
                "grid_n must be 2^m + 1 with m >= 0, got {n}"
            )));
        }
        Grid::dyadic((n - 1).trailing_zeros())
    }

    /// Arbitrary strictly increasing partition of `[0, 1]`.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::input("grid needs at least two points"));
        }
        if points[0] != 0.0 || *points.last().unwrap() != 1.0 {
            return Err(Error::input("grid must start at 0 and end at 1"));
        }
        if points
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::input("grid points must be strictly increasing"));
        }
        let intervals = points.len() - 1;
        Ok(Grid {
            points,
            kind: GridKind::Uniform { intervals },
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn intervals(&self) -> usize {
        self.points.len() - 1
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    /// Largest spacing between consecutive points.
    pub fn max_step(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Grid with every interval halved; contains all points of `self`.
    pub fn refine(&self) -> Grid {
        let mut points = Vec::with_capacity(2 * self.points.len() - 1);
        for w in self.points.windows(2) {
            points.push(w[0]);
            points.push(0.5 * (w[0] + w[1]));
        }
        points.push(1.0);
        let kind = match self.kind {
            GridKind::Dyadic { level } => GridKind::Dyadic { level: level + 1 },
            GridKind::Uniform { intervals } => GridKind::Uniform {
                intervals: 2 * intervals,
            },
        };
        Grid { points, kind }
    }

    /// Index of `t` if it is (bitwise) a grid point.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.points.iter().position(|&p| p == t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_grid_has_exact_points() {
        let g = Grid::with_points(129).unwrap();
        assert_eq!(g.len(), 129);
        assert_eq!(g.points()[64], 0.5);
        assert_eq!(g.kind(), GridKind::Dyadic { level: 7 });
    }

    #[test]
    fn refinement_contains_original_points() {
        let g = Grid::with_points(17).unwrap();
        let r = g.refine();
        assert_eq!(r, Grid::with_points(33).unwrap());
        for p in g.points() {
            assert!(r.index_of(*p).is_some());
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::with_points(100).is_err());
        assert!(Grid::from_points(vec![0.0, 0.6, 0.5, 1.0]).is_err());
        assert!(Grid::from_points(vec![0.1, 1.0]).is_err());
        assert!(Grid::uniform(0).is_err());
    }
}
