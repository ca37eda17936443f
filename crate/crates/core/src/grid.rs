//! Multi-scale grid of half-overlapping dyadic hyper-cubes over input space.
//!
//! Inputs are rescaled coordinate-wise by their sample maxima so the box is
//! `[0, 1]^d`. At scale `k` the cubes have side `2^-k` and lower corners on
//! the half-step lattice `(p / 2) 2^-k`, `p = 0, 1, ...`; only cubes lying in
//! the box whose interior misses the lower trimming box `[0, x0]` are kept.

use crate::model::{Series, TrimBox};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
    pub scale: usize,
}

impl<T: Scalar> GridCell<T> {
    /// Closed-cube membership.
    #[inline]
    pub fn contains(&self, x: &[T]) -> bool {
        x.iter()
            .zip(&self.lo)
            .zip(&self.hi)
            .all(|((v, lo), hi)| lo <= v && v <= hi)
    }

    pub fn side(&self) -> T {
        self.hi[0] - self.lo[0]
    }

    /// True if `self` lies inside `other`.
    pub fn within(&self, other: &GridCell<T>) -> bool {
        self.lo.iter().zip(&other.lo).all(|(a, b)| a >= b)
            && self.hi.iter().zip(&other.hi).all(|(a, b)| a <= b)
    }

    pub fn to_original(&self, factors: &[T]) -> GridCell<T> {
        GridCell {
            lo: self.lo.iter().zip(factors).map(|(v, f)| *v * *f).collect(),
            hi: self.hi.iter().zip(factors).map(|(v, f)| *v * *f).collect(),
            scale: self.scale,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiScaleGrid<T> {
    /// Cells in rescaled units, ordered by scale then lexicographic anchor.
    pub cells: Vec<GridCell<T>>,
    pub a_n: f64,
    /// Per-coordinate rescaling factors (original = rescaled * factor).
    pub x_bar: Vec<T>,
    /// Trimming box in rescaled units.
    pub x0: Vec<T>,
    pub max_scale: usize,
}

impl<T: Scalar> MultiScaleGrid<T> {
    pub fn rescale(&self, x: &[T]) -> Vec<T> {
        x.iter().zip(&self.x_bar).map(|(v, f)| *v / *f).collect()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// `2^(d+2) * A_n` (the box has unit measure after rescaling).
    pub fn cardinality_bound(&self) -> f64 {
        2f64.powi(self.x_bar.len() as i32 + 2) * self.a_n
    }
}

/// `A_n` such that `side_cap = A_n^(1/d)` on the rescaled unit box.
pub fn a_n_from_side(side_cap: f64, d: usize) -> f64 {
    side_cap.powi(d as i32)
}

/// Deepest scale `ceil(log2(A_n^(1/d)))`, never negative.
pub fn max_scale(a_n: f64, d: usize) -> usize {
    let v = a_n.powf(1.0 / d as f64).log2();
    (v - 1e-9).ceil().max(0.0) as usize
}

pub fn build_grid<T: Scalar>(series: &Series<T>, x0: &TrimBox<T>, a_n: f64) -> MultiScaleGrid<T> {
    let d = series.d();
    let x_bar: Vec<T> = series
        .input_bounds()
        .into_iter()
        .map(|(_, hi)| if hi > T::zero() { hi } else { T::one() })
        .collect();
    let x0r: Vec<T> = x0.x0.iter().zip(&x_bar).map(|(v, f)| *v / *f).collect();
    let top = max_scale(a_n.max(1.0), d);
    let mut cells = Vec::new();
    for k in 0..=top {
        let half = T::lit(0.5f64.powi(k as i32 + 1));
        let side = half + half;
        // lower corners p * half for p = 0..=2^(k+1) - 2
        let per_axis = (1usize << (k + 1)) - 1;
        let mut idx = vec![0usize; d];
        'outer: loop {
            let lo: Vec<T> = idx.iter().map(|&p| T::of_usize(p) * half).collect();
            if lo.iter().zip(&x0r).any(|(l, z)| l >= z) {
                let hi = lo.iter().map(|&l| l + side).collect();
                cells.push(GridCell { lo, hi, scale: k });
            }
            for j in (0..d).rev() {
                idx[j] += 1;
                if idx[j] < per_axis {
                    continue 'outer;
                }
                idx[j] = 0;
            }
            break;
        }
    }
    MultiScaleGrid {
        cells,
        a_n,
        x_bar,
        x0: x0r,
        max_scale: top,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_series(d: usize) -> Series<f64> {
        // maxima of 1 in every coordinate: no rescaling
        Series::from_rows(vec![(vec![1.0; d], 1.0), (vec![0.5; d], 0.5)]).unwrap()
    }

    fn bounds(g: &MultiScaleGrid<f64>, k: usize) -> Vec<(f64, f64)> {
        g.cells
            .iter()
            .filter(|c| c.scale == k)
            .map(|c| (c.lo[0], c.hi[0]))
            .collect()
    }

    #[test]
    fn three_scales_in_one_dimension() {
        let s = unit_series(1);
        let g = build_grid(&s, &TrimBox::zeros(1), 4.0);
        assert_eq!(g.max_scale, 2);
        assert_eq!(bounds(&g, 0), vec![(0.0, 1.0)]);
        assert_eq!(bounds(&g, 1), vec![(0.0, 0.5), (0.25, 0.75), (0.5, 1.0)]);
        assert_eq!(bounds(&g, 2).len(), 7);
        assert_eq!(g.len(), 11);
    }

    #[test]
    fn trimming_drops_cells_touching_the_lower_box() {
        let s = unit_series(1);
        let g = build_grid(&s, &TrimBox::new(vec![0.3]).unwrap(), 4.0);
        assert!(bounds(&g, 0).is_empty());
        assert_eq!(bounds(&g, 1), vec![(0.5, 1.0)]);
        assert_eq!(
            bounds(&g, 2),
            vec![(0.375, 0.625), (0.5, 0.75), (0.625, 0.875), (0.75, 1.0)]
        );
    }

    #[test]
    fn unit_cap_gives_one_scale() {
        let g = build_grid(&unit_series(2), &TrimBox::zeros(2), 1.0);
        assert_eq!(g.max_scale, 0);
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn rescaling_and_original_units() {
        let s = Series::from_rows(vec![(vec![2.0, 4.0], 1.0), (vec![1.0, 1.0], 1.0)]).unwrap();
        let g = build_grid(&s, &TrimBox::zeros(2), 1.0);
        assert_eq!(g.x_bar, vec![2.0, 4.0]);
        let c = g.cells[0].to_original(&g.x_bar);
        assert_eq!((c.lo, c.hi), (vec![0.0, 0.0], vec![2.0, 4.0]));
        assert_eq!(g.rescale(&[1.0, 1.0]), vec![0.5, 0.25]);
    }

    #[test]
    fn cardinality_bound_holds() {
        for d in 1..=3 {
            for side in [1.0, 2.0, 3.0, 4.0, 8.0] {
                let a_n = a_n_from_side(side, d);
                let g = build_grid(&unit_series(d), &TrimBox::zeros(d), a_n);
                assert!(
                    (g.len() as f64) <= g.cardinality_bound(),
                    "d={d} side={side}"
                );
            }
        }
    }

    #[test]
    fn finer_cells_nest_in_coarser_ones() {
        for d in 1..=2 {
            let g = build_grid(&unit_series(d), &TrimBox::zeros(d), a_n_from_side(8.0, d));
            for c in g.cells.iter().filter(|c| c.scale > 0) {
                assert!(g
                    .cells
                    .iter()
                    .any(|p| p.scale + 1 == c.scale && c.within(p)));
            }
        }
    }
}
