//! Detection of frontier shifts that act on the whole input space.
//!
//! * [`detect_single`]: at most one change, argmax of `L_{1, tau, n}`.
//! * [`detect_multi`]: left-expanding interval search with restarts and a
//!   local refitting pass.
//! * [`detect_multi_robust`]: full-prefix scans restarted `floor(C ln n)`
//!   steps before the last exceedance, which tolerates short universal
//!   efficiency dips.

use crate::error::Result;
use crate::fdh::Frontier;
use crate::model::{trim_quantile, DetectionResult, DetectorConfig, Series, TrimBox};
use crate::scalar::Scalar;
use crate::scores::{score_slice, ScoreSeries};
use crate::stat::{quasi_lr_scan, MemberScan};
use serde::{Deserialize, Serialize};

/// Family of input-space regions whose statistics are maximised jointly.
pub(crate) trait Regions<T> {
    /// One scanner per region over observations `1..=upto`.
    fn scanners(
        &self,
        series: &Series<T>,
        scores: &ScoreSeries<T>,
        upto: usize,
    ) -> Vec<MemberScan<T>>;
}

/// The trimmed input space as a single region.
pub(crate) struct WholeBox;

impl<T: Scalar> Regions<T> for WholeBox {
    fn scanners(
        &self,
        _series: &Series<T>,
        scores: &ScoreSeries<T>,
        upto: usize,
    ) -> Vec<MemberScan<T>> {
        vec![MemberScan::active(scores, upto)]
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Best<T> {
    pub value: T,
    pub tau: usize,
    pub region: usize,
    pub degenerate: bool,
}

/// Window maximum over all regions; ties go to the lowest region index, then
/// the largest `tau`.
pub(crate) fn best_over<T: Scalar>(scans: &[MemberScan<T>], s: usize, e: usize) -> Best<T> {
    let mut best: Option<Best<T>> = None;
    for (region, scan) in scans.iter().enumerate() {
        let w = scan.window_max(s, e);
        if best.is_none_or(|b| w.value > b.value) {
            best = Some(Best {
                value: w.value,
                tau: w.tau,
                region,
                degenerate: w.degenerate,
            });
        }
    }
    best.unwrap_or(Best {
        value: T::zero(),
        tau: s,
        region: 0,
        degenerate: false,
    })
}

/// One change found by the left-expanding search.
pub(crate) struct Pilot<T> {
    pub eta: usize,
    /// `m` after the restart: left end of the detecting interval.
    pub restart: usize,
    /// Prefix `1..=upto` the frontier was fit on.
    pub upto: usize,
    pub scores: ScoreSeries<T>,
    pub best: Best<T>,
}

pub(crate) struct Refitted<T> {
    pub pilots: Vec<Pilot<T>>,
    pub changes: Vec<(usize, Best<T>, (usize, usize))>,
}

/// Left-expanding search followed by the refit pass. Pilots and refits are
/// returned in ascending time order.
pub(crate) fn left_expanding<T: Scalar, R: Regions<T>>(
    series: &Series<T>,
    config: &DetectorConfig<T>,
    x0: &TrimBox<T>,
    regions: &R,
) -> Result<Refitted<T>> {
    let obs = series.obs();
    let mut m = series.n();
    let mut pilots: Vec<Pilot<T>> = Vec::new();
    while m >= config.min_seg {
        let frontier = Frontier::fit(config.frontier, &obs[..m])?;
        let scores = score_slice(&obs[..m], &frontier, x0);
        let scans = regions.scanners(series, &scores, m);
        let hit = (1..m).find_map(|j| {
            let s = m - j;
            let b = best_over(&scans, s, m);
            (b.value > config.lambda).then_some((s, b))
        });
        let Some((s, best)) = hit else { break };
        pilots.push(Pilot {
            eta: best.tau,
            restart: s,
            upto: m,
            scores,
            best,
        });
        m = s;
    }
    pilots.reverse();

    let mut changes = Vec::with_capacity(pilots.len());
    for (k, p) in pilots.iter().enumerate() {
        let prev = if k == 0 { 1 } else { pilots[k - 1].eta };
        let s = (prev + p.restart) / 2;
        let e = p.upto;
        if config.refit {
            let scans = regions.scanners(series, &p.scores, e);
            let b = best_over(&scans, s, e);
            changes.push((b.tau, b, (s, e)));
        } else {
            changes.push((p.eta, p.best, (s, e)));
        }
    }
    Ok(Refitted { pilots, changes })
}

/// Packs the search output, capping locations at `n - 1` and dropping any
/// location that does not exceed its predecessor.
pub(crate) fn assemble<T: Scalar>(
    series: &Series<T>,
    config: &DetectorConfig<T>,
    x0: &TrimBox<T>,
    refitted: &Refitted<T>,
) -> (DetectionResult<T>, Vec<usize>) {
    let n = series.n();
    let mut out = DetectionResult::empty(config.lambda, x0);
    let mut regions = Vec::new();
    for (p, (eta, best, window)) in refitted.pilots.iter().zip(&refitted.changes) {
        let eta = (*eta).min(n - 1);
        if out.changepoints.last().is_some_and(|&last| eta <= last) {
            continue;
        }
        out.changepoints.push(eta);
        out.stats.push(best.value);
        out.degenerate.push(best.degenerate);
        out.restarts.push(p.restart);
        out.refit_windows.push(*window);
        out.pilot.push(p.eta);
        regions.push(best.region);
    }
    out.k_hat = out.changepoints.len();
    (out, regions)
}

/// Multiple change-point detection by left-expanding intervals.
pub fn detect_multi<T: Scalar>(
    series: &Series<T>,
    config: &DetectorConfig<T>,
) -> Result<DetectionResult<T>> {
    config.validate()?;
    let x0 = trim_quantile(series, config.alpha_trim)?;
    let refitted = left_expanding(series, config, &x0, &WholeBox)?;
    Ok(assemble(series, config, &x0, &refitted).0)
}

/// Outcome of the at-most-one-change test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleChange<T> {
    pub detected: bool,
    pub eta_hat: usize,
    pub stat: T,
    pub degenerate: bool,
}

/// Fits the frontier on all observations and takes the argmax of
/// `L_{1, tau, n}` (largest `tau` on ties); a change is declared when the
/// maximum exceeds `lambda`.
pub fn detect_single<T: Scalar>(
    series: &Series<T>,
    config: &DetectorConfig<T>,
) -> Result<SingleChange<T>> {
    config.validate()?;
    let x0 = trim_quantile(series, config.alpha_trim)?;
    detect_single_with(series, config, &x0)
}

pub fn detect_single_with<T: Scalar>(
    series: &Series<T>,
    config: &DetectorConfig<T>,
    x0: &TrimBox<T>,
) -> Result<SingleChange<T>> {
    let n = series.n();
    let frontier = Frontier::fit(config.frontier, series.obs())?;
    let scores = score_slice(series.obs(), &frontier, x0);
    let w = MemberScan::active(&scores, n).window_max(1, n);
    Ok(SingleChange {
        detected: w.value > config.lambda,
        eta_hat: w.tau,
        stat: w.value,
        degenerate: w.degenerate,
    })
}

/// Robust variant: scan `L_{1, tau, m}` over the whole prefix, take the last
/// exceedance as the change, restart at `eta - max(1, floor(C ln n))`.
pub fn detect_multi_robust<T: Scalar>(
    series: &Series<T>,
    config: &DetectorConfig<T>,
) -> Result<DetectionResult<T>> {
    config.validate()?;
    let x0 = trim_quantile(series, config.alpha_trim)?;
    let n = series.n();
    let obs = series.obs();
    let back_off = ((config.robust_c * (n as f64).ln()).floor() as usize).max(1);
    let mut found = Vec::new();
    let mut m = n;
    while m >= config.min_seg {
        let frontier = Frontier::fit(config.frontier, &obs[..m])?;
        let scores = score_slice(&obs[..m], &frontier, &x0);
        let scan = quasi_lr_scan(&scores, 1, m)?;
        let Some(last) = scan.iter().rev().find(|st| st.value > config.lambda) else {
            break;
        };
        let eta = last.tau;
        let restart = eta.saturating_sub(back_off);
        found.push((eta, last.value, last.degenerate, restart, m));
        m = restart;
    }
    found.reverse();
    let mut out = DetectionResult::empty(config.lambda, &x0);
    for (eta, value, degenerate, restart, upto) in found {
        let eta = eta.min(n - 1);
        if out.changepoints.last().is_some_and(|&last| eta <= last) {
            continue;
        }
        out.changepoints.push(eta);
        out.pilot.push(eta);
        out.stats.push(value);
        out.degenerate.push(degenerate);
        out.restarts.push(restart);
        out.refit_windows.push((1, upto));
    }
    out.k_hat = out.changepoints.len();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Constant frontier 1 with scores `mu^(segments after t)` (all
    /// observations efficient w.r.t. their own segment).
    fn staircase(n: usize, changes: &[usize], mu: f64) -> Series<f64> {
        let rows = (1..=n)
            .map(|t| {
                let seg = changes.iter().filter(|&&c| c < t).count() as i32;
                // t = 1 sits on the trimming threshold and is inactive
                let x = if t == 1 { 1.0 } else { 2.0 };
                (vec![x], mu.powi(changes.len() as i32 - seg))
            })
            .collect();
        Series::from_rows(rows).unwrap()
    }

    fn config(lambda: f64) -> DetectorConfig<f64> {
        DetectorConfig {
            lambda,
            alpha_trim: 0.0,
            ..DetectorConfig::defaults_for(10)
        }
    }

    #[test]
    fn flat_scores_detect_nothing() {
        let s = staircase(40, &[], 0.5);
        let single = detect_single(&s, &config(5.0)).unwrap();
        assert!(!single.detected);
        assert_eq!(single.stat, 0.0);
        assert_eq!(detect_multi(&s, &config(5.0)).unwrap().k_hat, 0);
    }

    #[test]
    fn single_step_is_located_exactly() {
        let s = staircase(30, &[15], 0.5);
        let single = detect_single(&s, &config(5.0)).unwrap();
        assert!(single.detected);
        assert_eq!(single.eta_hat, 15);
    }

    #[test]
    fn two_steps_toy_trace() {
        // lambda = 5 with mu = 0.5: four pre-change points give 8 ln 2 = 5.55.
        let s = staircase(30, &[10, 20], 0.5);
        let r = detect_multi(&s, &config(5.0)).unwrap();
        assert_eq!(r.changepoints, vec![10, 20]);
        assert_eq!(r.k_hat, 2);
        assert!(r
            .changepoints
            .iter()
            .zip(&r.refit_windows)
            .all(|(c, (s, e))| s <= c && c <= e));
        // first pass: [17, 30] is the first window to exceed; second: [7, 17]
        assert_eq!(r.restarts, vec![7, 17]);
        assert_eq!(r.refit_windows, vec![(4, 17), (13, 30)]);
    }

    #[test]
    fn robust_variant_on_toy() {
        let s = staircase(30, &[10, 20], 0.5);
        let r = detect_multi_robust(&s, &config(5.0)).unwrap();
        assert_eq!(r.changepoints, vec![10, 20]);
    }

    #[test]
    fn refit_disabled_reports_pilots() {
        let s = staircase(30, &[10, 20], 0.5);
        let mut c = config(5.0);
        c.refit = false;
        let r = detect_multi(&s, &c).unwrap();
        assert_eq!(r.changepoints, r.pilot);
    }

    #[test]
    fn invalid_config_rejected() {
        let s = staircase(10, &[], 0.5);
        let mut c = config(5.0);
        c.lambda = 0.0;
        assert!(detect_multi(&s, &c).is_err());
    }
}
