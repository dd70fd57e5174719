//! Uniform sweep axes and row-major 2-D result grids, evaluated in parallel.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Uniformly spaced closed interval with `n` sample points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(start: f64, stop: f64, n: usize) -> Result<Self> {
        if !start.is_finite() || !stop.is_finite() {
            return Err(Error::Domain("axis range must be finite".into()));
        }
        if stop <= start {
            return Err(Error::Usage(format!("empty axis range [{start}, {stop}]")));
        }
        if n < 2 {
            return Err(Error::Usage(format!(
                "axis needs at least 2 points, got {n}"
            )));
        }
        Ok(Self { start, stop, n })
    }

    /// i-th sample; endpoints are exact.
    pub fn value(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        if i == 0 {
            self.start
        } else if i == self.n - 1 {
            self.stop
        } else {
            self.start + (self.stop - self.start) * (i as f64 / (self.n - 1) as f64)
        }
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.n - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.value(i)).collect()
    }
}

/// Per-cell results over an x-y grid, row-major: `cells[iy * x.n + ix]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResult<T> {
    pub x: Axis,
    pub y: Axis,
    pub cells: Vec<T>,
}

impl<T> GridResult<T> {
    pub fn get(&self, ix: usize, iy: usize) -> &T {
        &self.cells[iy * self.x.n + ix]
    }

    /// Iterates cells in storage order as (ix, iy, &cell).
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        let nx = self.x.n;
        self.cells
            .iter()
            .enumerate()
            .map(move |(i, c)| (i % nx, i / nx, c))
    }
}

impl<T: Send> GridResult<T> {
    /// Evaluates `f(x, y)` on every grid node in parallel. Cell order is
    /// independent of the thread count.
    pub fn evaluate<F>(x: Axis, y: Axis, f: F) -> Self
    where
        F: Fn(f64, f64) -> T + Sync,
    {
        let nx = x.n;
        let cells: Vec<T> = (0..x.n * y.n)
            .into_par_iter()
            .map(|i| f(x.value(i % nx), y.value(i / nx)))
            .collect();
        Self { x, y, cells }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn axis_samples_and_endpoints() {
        let a = Axis::new(-2.0, 2.0, 5).unwrap();
        assert_eq!(a.values(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(a.step(), 1.0);
        // Endpoints are bitwise exact even when the step is inexact.
        let a = Axis::new(0.1, 0.3, 7).unwrap();
        assert_eq!(a.value(0), 0.1);
        assert_eq!(a.value(6), 0.3);
        for i in 1..6 {
            assert!(a.value(i) > a.value(i - 1));
        }
    }

    #[test]
    fn axis_rejects_degenerate_ranges() {
        assert!(matches!(Axis::new(1.0, 1.0, 5), Err(Error::Usage(_))));
        assert!(matches!(Axis::new(2.0, 1.0, 5), Err(Error::Usage(_))));
        assert!(matches!(Axis::new(0.0, 1.0, 1), Err(Error::Usage(_))));
        assert!(matches!(Axis::new(f64::NAN, 1.0, 5), Err(Error::Domain(_))));
    }

    #[test]
    fn grid_layout_is_row_major() {
        let x = Axis::new(0.0, 3.0, 4).unwrap();
        let y = Axis::new(0.0, 2.0, 3).unwrap();
        let g = GridResult::evaluate(x, y, |xv, yv| (xv, yv));
        assert_eq!(g.cells.len(), 12);
        assert_eq!(*g.get(2, 1), (2.0, 1.0));
        assert_eq!(g.cells[6], (2.0, 1.0)); // iy = 1, ix = 2, row-major
        let collected: Vec<_> = g.iter().map(|(ix, iy, _)| (ix, iy)).collect();
        assert_eq!(collected[0], (0, 0));
        assert_eq!(collected[5], (1, 1));
    }

    #[test]
    fn parallel_evaluation_matches_serial() {
        let x = Axis::new(-1.0, 1.0, 37).unwrap();
        let y = Axis::new(0.0, 5.0, 23).unwrap();
        let g = GridResult::evaluate(x, y, |xv, yv| (xv * yv).sin() + xv);
        for (ix, iy, &c) in g.iter() {
            let expect = (x.value(ix) * y.value(iy)).sin() + x.value(ix);
            assert_relative_eq!(c, expect);
        }
    }
}
