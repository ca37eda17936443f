//! The quasi-likelihood-ratio statistic `L = -2 N ln M` and its scans.
//!
//! `N` counts the member observations of a window and `M` is the largest
//! member score. With no members the statistic is 0 (`0 * inf = 0`). With
//! members whose scores are all exactly 0 the statistic would be infinite; it
//! is replaced by the finite sentinel `2 N floor(ln MAX)` and flagged.

use crate::error::{FcpError, Result};
use crate::scalar::Scalar;
use crate::scores::ScoreSeries;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentStat<T> {
    pub t1: usize,
    pub tau: usize,
    pub t2: usize,
    pub n_active: usize,
    /// `None` when the window has no member.
    pub max_score: Option<T>,
    pub value: T,
    pub degenerate: bool,
}

/// `-2 N ln M` with the empty-window and all-zero conventions.
#[inline]
pub fn lr_value<T: Scalar>(n: usize, max_score: Option<T>) -> (T, bool) {
    match max_score {
        None => (T::zero(), false),
        Some(_) if n == 0 => (T::zero(), false),
        Some(m) if m <= T::zero() => (T::lit(2.0) * T::of_usize(n) * T::log_max(), true),
        Some(m) => (-T::lit(2.0) * T::of_usize(n) * m.ln(), false),
    }
}

/// Dense scan of `L_{t1, tau, t2}` for `tau = t1..=t2` over active scores.
pub fn quasi_lr_scan<T: Scalar>(
    scores: &ScoreSeries<T>,
    t1: usize,
    t2: usize,
) -> Result<Vec<SegmentStat<T>>> {
    let n = scores.len();
    if t1 < 1 || t1 > t2 || t2 > n {
        return Err(FcpError::IndexOutOfRange { t1, t2, n });
    }
    Ok(scan_with(t1, t2, |t| {
        scores.active[t - 1].then(|| scores.r_hat[t - 1])
    }))
}

/// Dense scan where `member(t)` returns the score of `t` if it belongs to
/// the region being scanned.
pub(crate) fn scan_with<T: Scalar>(
    t1: usize,
    t2: usize,
    mut member: impl FnMut(usize) -> Option<T>,
) -> Vec<SegmentStat<T>> {
    let mut n_active = 0usize;
    let mut max_score: Option<T> = None;
    (t1..=t2)
        .map(|tau| {
            if let Some(r) = member(tau) {
                n_active += 1;
                max_score = Some(max_score.map_or(r, |m| m.max(r)));
            }
            let (value, degenerate) = lr_value(n_active, max_score);
            SegmentStat {
                t1,
                tau,
                t2,
                n_active,
                max_score,
                value,
                degenerate,
            }
        })
        .collect()
}

/// Maximum of a window scan and the largest `tau` attaining it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowMax<T> {
    pub tau: usize,
    pub value: T,
    pub degenerate: bool,
}

/// Sparse scanner over the members `(t, score)` of one region, sorted by `t`.
///
/// Between consecutive members the statistic is constant, so the window
/// maximum is found by visiting members only. Ties go to the largest `tau`,
/// so a flat stretch of nonmembers after the maximising member is included.
#[derive(Clone, Debug)]
pub struct MemberScan<T> {
    members: Vec<(usize, T)>,
}

impl<T: Scalar> MemberScan<T> {
    pub fn new(members: Vec<(usize, T)>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0].0 < w[1].0));
        Self { members }
    }

    /// Active observations of `scores` with `t <= upto`.
    pub fn active(scores: &ScoreSeries<T>, upto: usize) -> Self {
        let members = (1..=upto.min(scores.len()))
            .filter(|&t| scores.active[t - 1])
            .map(|t| (t, scores.r_hat[t - 1]))
            .collect();
        Self { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `max_{s <= tau <= e} L_{s, tau, e}`.
    pub fn window_max(&self, s: usize, e: usize) -> WindowMax<T> {
        let start = self.members.partition_point(|(t, _)| *t < s);
        let run = &self.members[start..];
        let len = run.partition_point(|(t, _)| *t <= e);
        let mut best: Option<WindowMax<T>> = None;
        if len == 0 || run[0].0 > s {
            let tau = if len == 0 { e } else { run[0].0 - 1 };
            best = Some(WindowMax {
                tau,
                value: T::zero(),
                degenerate: false,
            });
        }
        let mut n = 0usize;
        let mut m: Option<T> = None;
        for (i, &(_, r)) in run[..len].iter().enumerate() {
            n += 1;
            m = Some(m.map_or(r, |v| v.max(r)));
            let (value, degenerate) = lr_value(n, m);
            if best.is_none_or(|b| value >= b.value) {
                let last = if i + 1 < len { run[i + 1].0 - 1 } else { e };
                best = Some(WindowMax {
                    tau: last,
                    value,
                    degenerate,
                });
            }
        }
        best.expect("window is nonempty")
    }

    /// Dense `L_{s, tau, e}` values for `tau = s..=e`.
    pub fn dense(&self, s: usize, e: usize) -> Vec<SegmentStat<T>> {
        let start = self.members.partition_point(|(t, _)| *t < s);
        let mut it = self.members[start..].iter().peekable();
        scan_with(s, e, |tau| match it.peek() {
            Some(&&(t, r)) if t == tau => {
                it.next();
                Some(r)
            }
            _ => None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TrimBox;
    use approx::assert_abs_diff_eq;

    fn scores(r: &[f64], active: &[bool]) -> ScoreSeries<f64> {
        ScoreSeries {
            r_hat: r.to_vec(),
            active: active.to_vec(),
            x0: TrimBox::zeros(1),
            zero_frontier: 0,
        }
    }

    #[test]
    fn all_ones_give_zero() {
        let s = scores(&[1.0, 1.0, 1.0], &[true; 3]);
        assert!(quasi_lr_scan(&s, 1, 3)
            .unwrap()
            .iter()
            .all(|st| st.value == 0.0));
    }

    #[test]
    fn no_active_gives_zero() {
        let s = scores(&[0.0, 0.0], &[false, false]);
        let scan = quasi_lr_scan(&s, 1, 2).unwrap();
        assert!(scan
            .iter()
            .all(|st| st.value == 0.0 && st.max_score.is_none()));
    }

    #[test]
    fn hand_evaluated_pair() {
        let s = scores(&[0.5, 0.25], &[true, true]);
        let scan = quasi_lr_scan(&s, 1, 2).unwrap();
        assert_eq!(scan[1].n_active, 2);
        assert_eq!(scan[1].max_score, Some(0.5));
        assert_abs_diff_eq!(scan[1].value, 2.772588722239781, epsilon = 1e-12);
        assert_abs_diff_eq!(scan[0].value, -2.0 * 0.5f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn degenerate_sentinel() {
        let s = scores(&[0.0, 0.0], &[true, true]);
        let scan = quasi_lr_scan(&s, 1, 2).unwrap();
        assert!(scan[1].degenerate);
        assert_eq!(scan[1].value, 2.0 * 2.0 * 709.0);
    }

    #[test]
    fn range_checked() {
        let s = scores(&[0.5], &[true]);
        assert!(matches!(
            quasi_lr_scan(&s, 1, 2),
            Err(FcpError::IndexOutOfRange { .. })
        ));
        assert!(quasi_lr_scan(&s, 0, 1).is_err());
    }

    #[test]
    fn window_max_ties_prefer_latest() {
        // every tau has L = 0
        let s = scores(&[0.3, 1.0, 1.0], &[false, true, true]);
        let best = MemberScan::active(&s, 3).window_max(1, 3);
        assert_eq!((best.tau, best.value), (3, 0.0));
        // L(1) = 1.386, L(2) = 0.421, L(3) = 0.632
        let s = scores(&[0.5, 0.9, 0.5], &[true, true, true]);
        assert_eq!(MemberScan::active(&s, 3).window_max(1, 3).tau, 1);
        // inactive t = 2, 3 extend the plateau of t = 1
        let s = scores(&[0.5, 0.2, 0.1, 0.9], &[true, false, false, true]);
        let best = MemberScan::active(&s, 4).window_max(1, 4);
        assert_eq!(best.tau, 3);
        assert_eq!(MemberScan::active(&s, 4).window_max(1, 2).tau, 2);
    }
}
