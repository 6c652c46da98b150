use std::fmt;

use crate::error::{LppError, Result};

/// A site of the planar integer lattice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }

    /// Coordinate-wise order: `self <= other` in both coordinates.
    pub fn le(self, other: Point) -> bool {
        self.x <= other.x && self.y <= other.y
    }

    pub fn step_x(self) -> Point {
        Point::new(self.x + 1, self.y)
    }

    pub fn step_y(self) -> Point {
        Point::new(self.x, self.y + 1)
    }

    /// Swap the two coordinates.
    pub fn transpose(self) -> Point {
        Point::new(self.y, self.x)
    }

    /// `x + y`, the antidiagonal index of the site.
    pub fn level(self) -> i64 {
        self.x + self.y
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Inclusive lattice rectangle `[min.x, max.x] x [min.y, max.y]`.
///
/// Cells are stored row-major: the index of `p` is
/// `(p.y - min.y) * width + (p.x - min.x)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    pub min: Point,
    pub max: Point,
}

impl Window {
    pub fn new(min: Point, max: Point) -> Result<Self> {
        if !min.le(max) {
            return Err(LppError::param(format!("empty window {min}..{max}")));
        }
        Ok(Window { min, max })
    }

    /// Window with lower-left corner at the origin and upper-right corner `max`.
    pub fn from_origin(max: Point) -> Result<Self> {
        Window::new(Point::ORIGIN, max)
    }

    pub fn width(&self) -> usize {
        (self.max.x - self.min.x + 1) as usize
    }

    pub fn height(&self) -> usize {
        (self.max.y - self.min.y + 1) as usize
    }

    pub fn cells(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    pub fn contains(&self, p: Point) -> bool {
        self.min.le(p) && p.le(self.max)
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        self.contains(other.min) && self.contains(other.max)
    }

    /// Row-major index of `p`; `p` must lie in the window.
    #[inline]
    pub fn index(&self, p: Point) -> usize {
        debug_assert!(self.contains(p));
        (p.y - self.min.y) as usize * self.width() + (p.x - self.min.x) as usize
    }

    pub fn point(&self, index: usize) -> Point {
        let w = self.width();
        Point::new(self.min.x + (index % w) as i64, self.min.y + (index / w) as i64)
    }

    /// All sites in row-major order.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (self.min.y..=self.max.y).flat_map(move |y| (self.min.x..=self.max.x).map(move |x| Point::new(x, y)))
    }

    pub(crate) fn require(&self, p: Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(LppError::OutOfWindow { point: p, window: self.to_string() })
        }
    }

    pub(crate) fn check_budget(&self, budget: u64) -> Result<()> {
        let cells = self.cells();
        if cells > budget {
            return Err(LppError::CellBudget { cells, budget });
        }
        Ok(())
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]x[{}, {}]", self.min.x, self.max.x, self.min.y, self.max.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trips() {
        let w = Window::new(Point::new(-2, -3), Point::new(4, 1)).unwrap();
        assert_eq!(w.cells(), 35);
        for (i, p) in w.points().enumerate() {
            assert_eq!(w.index(p), i);
            assert_eq!(w.point(i), p);
        }
    }

    #[test]
    fn inverted_window_is_rejected() {
        assert!(Window::new(Point::new(1, 0), Point::new(0, 5)).is_err());
    }
}
