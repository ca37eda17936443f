//! Free disposal hull frontier and its order-`q` quantile variant.

use crate::error::{FcpError, Result};
use crate::model::{FrontierKind, Observation};
use crate::scalar::{ceil_index, Scalar};
use std::cmp::Ordering;

/// Staircase frontier `f(x) = max { y : (x', y) stored, x' <= x }`.
///
/// Only the free-disposal antichain is stored: a point is discarded when
/// another point uses no more of every input and produces at least as much.
/// Queries with no dominating sample point return 0.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontierEstimate<T> {
    d: usize,
    /// Sorted by `y` descending (ties by input sum ascending); for `d = 1`
    /// sorted by `x` ascending instead, with `y` strictly increasing.
    points: Vec<(Vec<T>, T)>,
}

#[inline]
fn leq<T: PartialOrd>(a: &[T], b: &[T]) -> bool {
    a.iter().zip(b).all(|(u, v)| u <= v)
}

impl<T: Scalar> FrontierEstimate<T> {
    pub fn fit(obs: &[Observation<T>]) -> Result<Self> {
        let first = obs.first().ok_or(FcpError::EmptyInput)?;
        let d = first.x.len();
        if let Some(o) = obs.iter().find(|o| o.x.len() != d) {
            return Err(FcpError::DimensionMismatch {
                expected: d,
                found: o.x.len(),
            });
        }

        let mut cand: Vec<(T, &Observation<T>)> = obs
            .iter()
            .map(|o| (o.x.iter().fold(T::zero(), |s, &v| s + v), o))
            .collect();
        cand.sort_by(|(sa, a), (sb, b)| {
            b.y.partial_cmp(&a.y)
                .unwrap_or(Ordering::Equal)
                .then(sa.partial_cmp(sb).unwrap_or(Ordering::Equal))
        });
        // Any dominator of a point precedes it in this order, so one pass
        // against the kept set is enough.
        let mut points: Vec<(Vec<T>, T)> = Vec::new();
        for (_, o) in cand {
            if !points.iter().any(|(px, _)| leq(px, &o.x)) {
                points.push((o.x.clone(), o.y));
            }
        }
        if d == 1 {
            points.sort_by(|a, b| a.0[0].partial_cmp(&b.0[0]).unwrap_or(Ordering::Equal));
        }
        Ok(Self { d, points })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn points(&self) -> &[(Vec<T>, T)] {
        &self.points
    }

    pub fn evaluate(&self, x: &[T]) -> Result<T> {
        if x.len() != self.d {
            return Err(FcpError::DimensionMismatch {
                expected: self.d,
                found: x.len(),
            });
        }
        Ok(self.value_at(x))
    }

    /// `evaluate` without the dimension check.
    #[inline]
    pub fn value_at(&self, x: &[T]) -> T {
        debug_assert_eq!(x.len(), self.d);
        if self.d == 1 {
            let q = x[0];
            let idx = self.points.partition_point(|(px, _)| px[0] <= q);
            if idx == 0 {
                T::zero()
            } else {
                self.points[idx - 1].1
            }
        } else {
            self.points
                .iter()
                .find(|(px, _)| leq(px, x))
                .map_or(T::zero(), |(_, y)| *y)
        }
    }
}

/// Lower (type-1) empirical `q`-quantile of `{Y_t : X_t <= x}`, or 0 when no
/// observation is dominated by `x`. `q = 1` reproduces the FDH value.
pub fn evaluate_quantile<T: Scalar>(obs: &[Observation<T>], x: &[T], q: f64) -> Result<T> {
    if obs.is_empty() {
        return Err(FcpError::EmptyInput);
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(FcpError::InvalidParameter(format!(
            "quantile level must lie in (0, 1], got {q}"
        )));
    }
    if let Some(o) = obs.iter().find(|o| o.x.len() != x.len()) {
        return Err(FcpError::DimensionMismatch {
            expected: o.x.len(),
            found: x.len(),
        });
    }
    Ok(quantile_value(obs, x, q))
}

fn quantile_value<T: Scalar>(obs: &[Observation<T>], x: &[T], q: f64) -> T {
    let mut ys: Vec<T> = obs.iter().filter(|o| leq(&o.x, x)).map(|o| o.y).collect();
    if ys.is_empty() {
        return T::zero();
    }
    let k = ceil_index(q, ys.len()).clamp(1, ys.len());
    let (_, v, _) =
        ys.select_nth_unstable_by(k - 1, |a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    *v
}

/// Quantile hull kept as the raw sample; each query is `O(n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantileFrontier<T> {
    obs: Vec<Observation<T>>,
    q: f64,
}

/// A fitted frontier of either kind.
#[derive(Clone, Debug, PartialEq)]
pub enum Frontier<T> {
    Fdh(FrontierEstimate<T>),
    Quantile(QuantileFrontier<T>),
}

impl<T: Scalar> Frontier<T> {
    pub fn fit(kind: FrontierKind, obs: &[Observation<T>]) -> Result<Self> {
        match kind {
            FrontierKind::Fdh => FrontierEstimate::fit(obs).map(Frontier::Fdh),
            FrontierKind::Quantile(q) if q >= 1.0 => FrontierEstimate::fit(obs).map(Frontier::Fdh),
            FrontierKind::Quantile(q) => {
                if !(q > 0.0) {
                    return Err(FcpError::InvalidParameter(format!(
                        "quantile level must lie in (0, 1], got {q}"
                    )));
                }
                // validates dimensions
                FrontierEstimate::fit(obs)?;
                Ok(Frontier::Quantile(QuantileFrontier {
                    obs: obs.to_vec(),
                    q,
                }))
            }
        }
    }

    pub fn d(&self) -> usize {
        match self {
            Frontier::Fdh(f) => f.d(),
            Frontier::Quantile(f) => f.obs[0].x.len(),
        }
    }

    #[inline]
    pub fn value_at(&self, x: &[T]) -> T {
        match self {
            Frontier::Fdh(f) => f.value_at(x),
            Frontier::Quantile(f) => quantile_value(&f.obs, x, f.q),
        }
    }
}

impl<T> From<FrontierEstimate<T>> for Frontier<T> {
    fn from(f: FrontierEstimate<T>) -> Self {
        Frontier::Fdh(f)
    }
}
