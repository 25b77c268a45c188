//! Minimum-cost monotone bead paths over an `n x m` sentence grid.
//!
//! Shared by the baseline aligners and the segment stage of the hybrid
//! aligner. A path starts at `(0, 0)`, ends at `(n, m)`, and each step
//! consumes `shape.src` complex and `shape.tgt` simple sentences.
//!
//! Ties are resolved deterministically: among paths whose costs agree within
//! [`cost_eq`], the one with more 1-1 beads wins, then the one whose sequence
//! of visited grid points is lexicographically smallest.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Shape {
    pub src: usize,
    pub tgt: usize,
}

impl Shape {
    pub const fn new(src: usize, tgt: usize) -> Self {
        Self { src, tgt }
    }

    pub fn is_one_to_one(self) -> bool {
        self.src == 1 && self.tgt == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub i: usize,
    pub j: usize,
    pub shape: Shape,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub steps: Vec<Step>,
    pub cost: f64,
}

impl Path {
    pub fn one_to_one_count(&self) -> usize {
        self.steps.iter().filter(|s| s.shape.is_one_to_one()).count()
    }
}

/// Cost equality used for tie detection.
pub fn cost_eq(a: f64, b: f64) -> bool {
    let scale = 1.0f64.max(libm::fabs(a)).max(libm::fabs(b));
    libm::fabs(a - b) <= 1e-12 * scale
}

#[derive(Clone, Copy)]
struct Cell {
    cost: f64,
    one_to_one: usize,
    choice: Option<(Shape, f64)>,
}

impl Cell {
    const UNREACHABLE: Cell = Cell { cost: f64::INFINITY, one_to_one: 0, choice: None };

    fn beats(&self, cost: f64, one_to_one: usize) -> bool {
        if !cost.is_finite() {
            return false;
        }
        if !self.cost.is_finite() {
            return true;
        }
        if cost_eq(cost, self.cost) {
            one_to_one > self.one_to_one
        } else {
            cost < self.cost
        }
    }
}

/// Finds the minimum-cost path. `cost(i, j, shape)` prices a bead starting at
/// complex index `i` and simple index `j`; `None` marks it inadmissible.
pub fn min_cost_path(
    n: usize,
    m: usize,
    shapes: &[Shape],
    mut cost: impl FnMut(usize, usize, Shape) -> Option<f64>,
) -> Result<Path> {
    let mut order: Vec<Shape> = shapes.iter().copied().filter(|s| s.src + s.tgt > 0).collect();
    // Smallest next grid point first, so the first tied move found is the
    // lexicographically earliest.
    order.sort_unstable();
    order.dedup();

    let width = m + 1;
    let mut table = vec![Cell::UNREACHABLE; (n + 1) * width];
    table[n * width + m] = Cell { cost: 0.0, one_to_one: 0, choice: None };
    for i in (0..=n).rev() {
        for j in (0..=m).rev() {
            if i == n && j == m {
                continue;
            }
            let mut best = Cell::UNREACHABLE;
            for &shape in &order {
                let (ni, nj) = (i + shape.src, j + shape.tgt);
                if ni > n || nj > m {
                    continue;
                }
                let rest = table[ni * width + nj];
                if !rest.cost.is_finite() {
                    continue;
                }
                let Some(c) = cost(i, j, shape) else { continue };
                let total = c + rest.cost;
                let one_to_one = rest.one_to_one + usize::from(shape.is_one_to_one());
                if best.beats(total, one_to_one) {
                    best = Cell { cost: total, one_to_one, choice: Some((shape, c)) };
                }
            }
            table[i * width + j] = best;
        }
    }

    let start = table[0];
    if !start.cost.is_finite() {
        return Err(Error::InvalidParameter("no admissible bead path covers the grid".into()));
    }
    let mut steps = Vec::new();
    let (mut i, mut j) = (0, 0);
    while (i, j) != (n, m) {
        let (shape, c) = table[i * width + j].choice.expect("reachable cell has a choice");
        steps.push(Step { i, j, shape, cost: c });
        i += shape.src;
        j += shape.tgt;
    }
    Ok(Path { steps, cost: start.cost })
}
