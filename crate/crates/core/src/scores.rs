//! Trimmed pseudo-efficiency scores `R_t = Y_t / f(X_t)`.

use crate::error::{FcpError, Result};
use crate::fdh::Frontier;
use crate::model::{Observation, Series, TrimBox};
use crate::scalar::Scalar;

/// Scores for observations `1..=len`, stored 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreSeries<T> {
    pub r_hat: Vec<T>,
    pub active: Vec<bool>,
    pub x0: TrimBox<T>,
    /// Active observations whose frontier value was 0 (score forced to 0).
    pub zero_frontier: usize,
}

impl<T: Scalar> ScoreSeries<T> {
    pub fn len(&self) -> usize {
        self.r_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_hat.is_empty()
    }

    /// Score at 1-based time `t`.
    pub fn at(&self, t: usize) -> T {
        self.r_hat[t - 1]
    }

    pub fn is_active(&self, t: usize) -> bool {
        self.active[t - 1]
    }

    /// `N(t1, t2, x0)`: active observations in `[t1, t2]`.
    pub fn n_active(&self, t1: usize, t2: usize) -> usize {
        self.active[t1 - 1..t2].iter().filter(|a| **a).count()
    }
}

/// Scores every observation of `series` against `frontier`.
pub fn compute_scores<T: Scalar>(
    series: &Series<T>,
    frontier: &Frontier<T>,
    x0: &TrimBox<T>,
) -> Result<ScoreSeries<T>> {
    if frontier.d() != series.d() || x0.d() != series.d() {
        return Err(FcpError::DimensionMismatch {
            expected: series.d(),
            found: frontier.d().min(x0.d()),
        });
    }
    Ok(score_slice(series.obs(), frontier, x0))
}

pub(crate) fn score_slice<T: Scalar>(
    obs: &[Observation<T>],
    frontier: &Frontier<T>,
    x0: &TrimBox<T>,
) -> ScoreSeries<T> {
    let mut r_hat = Vec::with_capacity(obs.len());
    let mut active = Vec::with_capacity(obs.len());
    let mut zero_frontier = 0;
    for o in obs {
        let on = x0.admits(&o.x);
        let r = if on {
            let f = frontier.value_at(&o.x);
            if f > T::zero() {
                o.y / f
            } else {
                zero_frontier += 1;
                T::zero()
            }
        } else {
            T::zero()
        };
        r_hat.push(r);
        active.push(on);
    }
    ScoreSeries {
        r_hat,
        active,
        x0: x0.clone(),
        zero_frontier,
    }
}

/// Scores with the frontier fit on `[1, eta]` for `t <= eta` and on
/// `[eta + 1, n]` afterwards.
pub fn segment_scores<T: Scalar>(
    series: &Series<T>,
    left: &Frontier<T>,
    right: &Frontier<T>,
    eta: usize,
    x0: &TrimBox<T>,
) -> Result<ScoreSeries<T>> {
    series.check_range(eta, eta)?;
    let mut a = score_slice(&series.obs()[..eta], left, x0);
    let b = score_slice(&series.obs()[eta..], right, x0);
    a.r_hat.extend(b.r_hat);
    a.active.extend(b.active);
    a.zero_frontier += b.zero_frontier;
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdh::FrontierEstimate;

    fn series(rows: &[(f64, f64)]) -> Series<f64> {
        Series::from_rows(rows.iter().map(|&(x, y)| (vec![x], y)).collect()).unwrap()
    }

    #[test]
    fn efficient_unit_trimmed_unit_and_ratio() {
        let s = series(&[(1.0, 0.6), (2.0, 1.0), (1.5, 0.3), (0.5, 0.2)]);
        let f: Frontier<f64> = FrontierEstimate::fit(s.obs()).unwrap().into();
        let sc = compute_scores(&s, &f, &TrimBox::new(vec![0.75]).unwrap()).unwrap();
        assert_eq!(sc.at(2), 1.0);
        assert_eq!(sc.at(3), 0.5);
        assert_eq!(sc.at(4), 0.0);
        assert!(!sc.is_active(4));
        assert_eq!(sc.n_active(1, 4), 3);
        assert_eq!(sc.zero_frontier, 0);
    }

    #[test]
    fn boundary_is_trimmed() {
        let s = series(&[(1.0, 0.6), (2.0, 1.0)]);
        let f: Frontier<f64> = FrontierEstimate::fit(s.obs()).unwrap().into();
        let sc = compute_scores(&s, &f, &TrimBox::new(vec![1.0]).unwrap()).unwrap();
        assert_eq!(sc.active, vec![false, true]);
        assert_eq!(sc.at(1), 0.0);
    }

    #[test]
    fn foreign_frontier_with_zero_value_counts() {
        let s = series(&[(1.0, 0.6), (2.0, 1.0)]);
        let other = series(&[(1.5, 1.0), (3.0, 2.0)]);
        let f: Frontier<f64> = FrontierEstimate::fit(other.obs()).unwrap().into();
        let sc = compute_scores(&s, &f, &TrimBox::zeros(1)).unwrap();
        assert_eq!(sc.at(1), 0.0);
        assert_eq!(sc.zero_frontier, 1);
        assert_eq!(sc.at(2), 1.0);
    }

    #[test]
    fn scores_are_scale_invariant() {
        let s = series(&[(1.0, 0.6), (2.0, 1.0), (1.5, 0.3), (1.2, 0.7)]);
        let x0 = TrimBox::new(vec![0.5]).unwrap();
        let f: Frontier<f64> = FrontierEstimate::fit(s.obs()).unwrap().into();
        let a = compute_scores(&s, &f, &x0).unwrap();
        let scaled = s.scale_outputs(4.0);
        let g: Frontier<f64> = FrontierEstimate::fit(scaled.obs()).unwrap().into();
        let b = compute_scores(&scaled, &g, &x0).unwrap();
        assert_eq!(a, b);
    }
}
