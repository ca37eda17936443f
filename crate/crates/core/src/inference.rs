//! Confidence intervals for change locations from the geometric bound on the
//! overshoot `eta_hat - eta`.
//!
//! The overshoot is asymptotically dominated by `Z - 1` with
//! `Z ~ Geometric(theta)`, and undershooting has vanishing probability, so
//! `[eta_hat - k*, eta_hat]` with `P(Z - 1 <= k*) >= level` is a one-sided,
//! asymptotically conservative interval.

use crate::error::{FcpError, Result};
use crate::fdh::{Frontier, FrontierEstimate};
use crate::model::{Series, TrimBox};
use crate::scalar::Scalar;
use crate::scores::{segment_scores, ScoreSeries};
use serde::{Deserialize, Serialize};

/// Jump sizes are clamped into `[MU_EPS, 1 - MU_EPS]`.
pub const MU_EPS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuEstimate<T> {
    pub mu: T,
    pub clamped: bool,
}

/// `sup_{x > x0} f1(x) / f2(x)` over the observed active inputs where `f2 > 0`,
/// with `f1` fit on `[1, eta_hat]` and `f2` on `[eta_hat + 1, n]`.
pub fn estimate_mu<T: Scalar>(
    series: &Series<T>,
    eta_hat: usize,
    x0: &TrimBox<T>,
    min_seg: usize,
) -> Result<MuEstimate<T>> {
    let n = series.n();
    let min_seg = min_seg.max(2);
    if eta_hat < min_seg || eta_hat + min_seg > n {
        return Err(FcpError::SegmentTooShort {
            start: 1,
            end: eta_hat.min(n),
            min: min_seg,
        });
    }
    let (left, right) = series.obs().split_at(eta_hat);
    if !left.iter().any(|o| x0.admits(&o.x)) || !right.iter().any(|o| x0.admits(&o.x)) {
        return Err(FcpError::NoActiveEvaluationPoints);
    }
    let f1 = FrontierEstimate::fit(left)?;
    let f2 = FrontierEstimate::fit(right)?;
    let mut sup: Option<T> = None;
    for o in series.obs().iter().filter(|o| x0.admits(&o.x)) {
        let den = f2.value_at(&o.x);
        if den > T::zero() {
            let r = f1.value_at(&o.x) / den;
            sup = Some(sup.map_or(r, |s| s.max(r)));
        }
    }
    let raw = sup.ok_or(FcpError::NoActiveEvaluationPoints)?;
    let (lo, hi) = (T::lit(MU_EPS), T::lit(1.0 - MU_EPS));
    let mu = raw.max(lo).min(hi);
    Ok(MuEstimate {
        mu,
        clamped: mu != raw,
    })
}

/// Scores against the frontiers fit on either side of `eta_hat`.
pub fn split_scores<T: Scalar>(
    series: &Series<T>,
    eta_hat: usize,
    x0: &TrimBox<T>,
) -> Result<ScoreSeries<T>> {
    series.check_range(eta_hat, eta_hat)?;
    if eta_hat >= series.n() {
        return Err(FcpError::SegmentTooShort {
            start: eta_hat + 1,
            end: series.n(),
            min: 1,
        });
    }
    let (left, right) = series.obs().split_at(eta_hat);
    let f1: Frontier<T> = FrontierEstimate::fit(left)?.into();
    let f2: Frontier<T> = FrontierEstimate::fit(right)?.into();
    segment_scores(series, &f1, &f2, eta_hat, x0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaEstimate<T> {
    pub theta: T,
    pub flags: Vec<String>,
}

/// `(1/n) #{t : R_t >= mu, X_t > x0}`, floored at `1/n`.
pub fn estimate_theta_iid<T: Scalar>(scores: &ScoreSeries<T>, mu_hat: T) -> ThetaEstimate<T> {
    let n = scores.len().max(1);
    let hits = scores
        .r_hat
        .iter()
        .zip(&scores.active)
        .filter(|(r, a)| **a && **r >= mu_hat)
        .count();
    if hits == 0 {
        return ThetaEstimate {
            theta: T::one() / T::of_usize(n),
            flags: vec!["theta_floored".into()],
        };
    }
    ThetaEstimate {
        theta: T::of_usize(hits) / T::of_usize(n),
        flags: Vec::new(),
    }
}

/// Histogram settings for the non-identically distributed estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bandwidths {
    /// Bin width for scores on `(0, 1]`.
    pub h_score: f64,
    /// Bin width per input coordinate.
    pub h_input: Vec<f64>,
    /// Sliding window length.
    pub window: usize,
}

impl Bandwidths {
    /// `h = 1/ceil(n^(1/3))`, `h_j = range_j / ceil(n^(1/(d+2)))`,
    /// `H = ceil(n / ln n)`.
    pub fn defaults<T: Scalar>(series: &Series<T>) -> Self {
        let n = series.n();
        let nf = n as f64;
        let score_bins = nf.cbrt().ceil().max(1.0);
        let input_bins = nf.powf(1.0 / (series.d() as f64 + 2.0)).ceil().max(1.0);
        let h_input = series
            .input_bounds()
            .iter()
            .map(|(lo, hi)| (*hi - *lo).as_f64() / input_bins)
            .collect();
        let window = ((nf / nf.ln()).ceil() as usize).clamp(1, n);
        Self {
            h_score: 1.0 / score_bins,
            h_input,
            window,
        }
    }
}

fn bin_count(width: f64, h: f64) -> usize {
    let raw = width / h;
    if (raw - raw.round()).abs() < 1e-9 {
        (raw.round() as usize).max(1)
    } else {
        (raw.ceil() as usize).max(1)
    }
}

/// Minimum over bins and windows of length `window` of the histogram
/// density of active scores.
pub fn score_density_floor<T: Scalar>(
    scores: &ScoreSeries<T>,
    h: f64,
    window: usize,
) -> Result<f64> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(FcpError::InvalidParameter(format!(
            "score bandwidth must lie in (0, 1], got {h}"
        )));
    }
    let bins = bin_count(1.0, h);
    let labels = scores.r_hat.iter().zip(&scores.active).map(|(r, a)| {
        let r = r.as_f64();
        // bin j covers ((j - 1) h, j h]
        (*a && r > 0.0 && r <= 1.0).then(|| (((r / h).ceil() as usize).clamp(1, bins)) - 1)
    });
    sliding_min(labels.collect(), bins, window).map(|c| c as f64 / (window as f64 * h))
}

/// Minimum over cells of the `h_input` partition of the observed input box
/// and over windows of the histogram density of inputs.
pub fn input_density_floor<T: Scalar>(
    series: &Series<T>,
    h_input: &[f64],
    window: usize,
) -> Result<f64> {
    if h_input.len() != series.d() {
        return Err(FcpError::DimensionMismatch {
            expected: series.d(),
            found: h_input.len(),
        });
    }
    let bounds = series.input_bounds();
    let mut sizes = Vec::with_capacity(series.d());
    for ((lo, hi), h) in bounds.iter().zip(h_input) {
        let width = (*hi - *lo).as_f64();
        if !(width > 0.0) {
            return Err(FcpError::InsufficientData(
                "input coordinate with zero range".into(),
            ));
        }
        if !(*h > 0.0) {
            return Err(FcpError::InvalidParameter(format!(
                "input bandwidth must be > 0, got {h}"
            )));
        }
        sizes.push(bin_count(width, *h));
    }
    let cells: usize = sizes.iter().product();
    let labels = series
        .obs()
        .iter()
        .map(|o| {
            let mut idx = 0;
            for j in 0..series.d() {
                let off = (o.x[j] - bounds[j].0).as_f64() / h_input[j];
                idx = idx * sizes[j] + (off.floor() as usize).min(sizes[j] - 1);
            }
            Some(idx)
        })
        .collect();
    let vol: f64 = h_input.iter().product();
    sliding_min(labels, cells, window).map(|c| c as f64 / (window as f64 * vol))
}

/// `min_i min_b #{t in [i, i + window) : label_t = b}`.
fn sliding_min(labels: Vec<Option<usize>>, bins: usize, window: usize) -> Result<usize> {
    let n = labels.len();
    if window == 0 || window > n {
        return Err(FcpError::InvalidParameter(format!(
            "window must lie in 1..={n}, got {window}"
        )));
    }
    let mut counts = vec![0usize; bins];
    for b in labels[..window].iter().flatten() {
        counts[*b] += 1;
    }
    let mut best = counts.iter().copied().min().unwrap_or(0);
    for i in window..n {
        if let Some(b) = labels[i] {
            counts[b] += 1;
        }
        if let Some(b) = labels[i - window] {
            counts[b] -= 1;
        }
        best = best.min(counts.iter().copied().min().unwrap_or(0));
        if best == 0 {
            break;
        }
    }
    Ok(best)
}

/// `mes` of the observed input box minus the lower box `[lo, x0]`.
pub fn trimmed_measure<T: Scalar>(series: &Series<T>, x0: &TrimBox<T>) -> f64 {
    let bounds = series.input_bounds();
    let full: f64 = bounds.iter().map(|(lo, hi)| (*hi - *lo).as_f64()).product();
    let cut: f64 = bounds
        .iter()
        .zip(&x0.x0)
        .map(|((lo, hi), z)| (z.min(*hi) - *lo).as_f64().max(0.0))
        .product();
    full - cut
}

/// Plug-in `C1R (1 - mu) C1X mes(box \ [0, x0])`, clamped to `(0, 1]`.
pub fn estimate_theta_general<T: Scalar>(
    series: &Series<T>,
    scores: &ScoreSeries<T>,
    mu_hat: T,
    x0: &TrimBox<T>,
    bandwidths: &Bandwidths,
) -> Result<ThetaEstimate<T>> {
    let n = series.n();
    if n < 20 {
        return Err(FcpError::InsufficientData(format!(
            "need at least 20 observations, got {n}"
        )));
    }
    if scores.len() != n {
        return Err(FcpError::DimensionMismatch {
            expected: n,
            found: scores.len(),
        });
    }
    let c_r = score_density_floor(scores, bandwidths.h_score, bandwidths.window)?;
    let c_x = input_density_floor(series, &bandwidths.h_input, bandwidths.window)?;
    let mes = trimmed_measure(series, x0);
    let raw = c_r * (1.0 - mu_hat.as_f64()) * c_x * mes;
    let mut flags = vec!["slow_variation_assumed".to_string()];
    let theta = if !(raw > 0.0) {
        flags.push("theta_floored".into());
        1.0 / n as f64
    } else if raw > 1.0 {
        flags.push("theta_capped".into());
        1.0
    } else {
        raw
    };
    Ok(ThetaEstimate {
        theta: T::lit(theta),
        flags,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CiMode {
    Iid,
    General,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricCI<T> {
    pub eta_hat: usize,
    pub theta_hat: T,
    pub level: f64,
    pub lo: usize,
    pub hi: usize,
    pub mode: CiMode,
    pub flags: Vec<String>,
}

/// Smallest `k >= 0` with `1 - (1 - theta)^(k+1) >= level`.
pub fn geometric_quantile(theta: f64, level: f64) -> usize {
    if theta >= 1.0 {
        return 0;
    }
    let covered = |k: usize| 1.0 - (1.0 - theta).powf(k as f64 + 1.0) >= level;
    let approx = ((1.0 - level).ln() / (-theta).ln_1p()).ceil() - 1.0;
    let mut k = if approx.is_finite() && approx > 0.0 {
        approx as usize
    } else {
        0
    };
    while !covered(k) {
        k += 1;
    }
    while k > 0 && covered(k - 1) {
        k -= 1;
    }
    k
}

/// `[max(1, eta_hat - k*), eta_hat]`.
pub fn confidence_interval<T: Scalar>(
    eta_hat: usize,
    theta_hat: T,
    level: f64,
    mode: CiMode,
) -> Result<GeometricCI<T>> {
    if !(level > 0.0 && level < 1.0) {
        return Err(FcpError::InvalidParameter(format!(
            "level must lie in (0, 1), got {level}"
        )));
    }
    let th = theta_hat.as_f64();
    if !(th > 0.0 && th <= 1.0) {
        return Err(FcpError::InvalidParameter(format!(
            "theta must lie in (0, 1], got {th}"
        )));
    }
    if eta_hat < 1 {
        return Err(FcpError::InvalidParameter("eta_hat must be >= 1".into()));
    }
    let k = geometric_quantile(th, level);
    Ok(GeometricCI {
        eta_hat,
        theta_hat,
        level,
        lo: eta_hat.saturating_sub(k).max(1),
        hi: eta_hat,
        mode,
        flags: Vec::new(),
    })
}

/// Settings for [`change_interval`].
#[derive(Clone, Debug, PartialEq)]
pub struct CiSettings {
    pub level: f64,
    pub mode: CiMode,
    pub min_seg: usize,
    /// `None` uses [`Bandwidths::defaults`] on the window.
    pub bandwidths: Option<Bandwidths>,
}

/// Interval for a change at `eta` (global index) estimated on the window
/// `[s, e]`. If the jump size or `theta` cannot be estimated on the window
/// the interval uses `theta = 1 / (e - s + 1)` and says so in `flags`.
pub fn change_interval<T: Scalar>(
    series: &Series<T>,
    eta: usize,
    window: (usize, usize),
    x0: &TrimBox<T>,
    settings: &CiSettings,
) -> Result<GeometricCI<T>> {
    let (s, e) = window;
    if !(s <= eta && eta <= e) {
        return Err(FcpError::InvalidParameter(format!(
            "change {eta} outside window [{s}, {e}]"
        )));
    }
    let sub = series.window(s, e)?;
    let local = eta - s + 1;
    let mut flags = Vec::new();
    let theta = match theta_on(&sub, local, x0, settings, &mut flags) {
        Ok(th) => th,
        Err(err) => {
            flags.push(format!("fallback: {err}"));
            T::one() / T::of_usize(sub.n())
        }
    };
    let mut ci = confidence_interval(eta, theta, settings.level, settings.mode)?;
    ci.flags = flags;
    Ok(ci)
}

fn theta_on<T: Scalar>(
    sub: &Series<T>,
    eta: usize,
    x0: &TrimBox<T>,
    settings: &CiSettings,
    flags: &mut Vec<String>,
) -> Result<T> {
    let mu = estimate_mu(sub, eta, x0, settings.min_seg)?;
    if mu.clamped {
        flags.push("mu_clamped".into());
    }
    let scores = split_scores(sub, eta, x0)?;
    let est = match settings.mode {
        CiMode::Iid => estimate_theta_iid(&scores, mu.mu),
        CiMode::General => {
            let bw = settings
                .bandwidths
                .clone()
                .unwrap_or_else(|| Bandwidths::defaults(sub));
            estimate_theta_general(sub, &scores, mu.mu, x0, &bw)?
        }
    };
    flags.extend(est.flags);
    Ok(est.theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(r: &[f64], active: &[bool]) -> ScoreSeries<f64> {
        ScoreSeries {
            r_hat: r.to_vec(),
            active: active.to_vec(),
            x0: TrimBox::zeros(1),
            zero_frontier: 0,
        }
    }

    #[test]
    fn geometric_quantiles() {
        assert_eq!(geometric_quantile(0.5, 0.9), 3);
        assert_eq!(geometric_quantile(0.1, 0.95), 28);
        assert_eq!(geometric_quantile(1.0, 0.99), 0);
        assert_eq!(geometric_quantile(0.5, 0.5), 0);
        assert_eq!(geometric_quantile(0.5, 0.75), 1);
    }

    #[test]
    fn interval_bounds() {
        let ci = confidence_interval(100, 0.5, 0.9, CiMode::Iid).unwrap();
        assert_eq!((ci.lo, ci.hi), (97, 100));
        let ci = confidence_interval(100, 1.0, 0.9, CiMode::Iid).unwrap();
        assert_eq!((ci.lo, ci.hi), (100, 100));
        let ci = confidence_interval(2, 0.1, 0.95, CiMode::Iid).unwrap();
        assert_eq!(ci.lo, 1);
        assert!(confidence_interval(2, 0.0, 0.9, CiMode::Iid).is_err());
        assert!(confidence_interval(2, 0.5, 1.0, CiMode::Iid).is_err());
    }

    #[test]
    fn ci_json_keys() {
        let ci = confidence_interval(10, 0.5f64, 0.9, CiMode::General).unwrap();
        let v = serde_json::to_value(&ci).unwrap();
        assert_eq!(v["mode"], "general");
        for key in ["eta_hat", "theta_hat", "level", "lo", "hi", "flags"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn theta_iid_counts() {
        assert_eq!(
            estimate_theta_iid(&scores(&[1.0; 4], &[true; 4]), 0.5).theta,
            1.0
        );
        assert_eq!(
            estimate_theta_iid(&scores(&[0.2, 0.6, 0.9, 0.4], &[true; 4]), 0.5).theta,
            0.5
        );
        let floored = estimate_theta_iid(&scores(&[0.0; 4], &[false; 4]), 0.5);
        assert_eq!(floored.theta, 0.25);
        assert_eq!(floored.flags, vec!["theta_floored".to_string()]);
    }

    fn halves(c: f64) -> Series<f64> {
        // left frontier c, right frontier 1, all points efficient
        let rows = (1..=20)
            .map(|t| {
                let x = 1.0 + (t % 5) as f64 / 5.0;
                (vec![x], if t <= 10 { c } else { 1.0 })
            })
            .collect();
        Series::from_rows(rows).unwrap()
    }

    #[test]
    fn mu_recovers_exact_ratio() {
        let s = halves(0.5);
        let mu = estimate_mu(&s, 10, &TrimBox::zeros(1), 2).unwrap();
        assert_eq!(mu.mu, 0.5);
        assert!(!mu.clamped);
        let mu = estimate_mu(&halves(1.0), 10, &TrimBox::zeros(1), 2).unwrap();
        assert!(mu.clamped);
        assert_eq!(mu.mu, 1.0 - MU_EPS);
    }

    #[test]
    fn mu_preconditions() {
        let s = halves(0.5);
        assert!(matches!(
            estimate_mu(&s, 1, &TrimBox::zeros(1), 2),
            Err(FcpError::SegmentTooShort { .. })
        ));
        assert!(matches!(
            estimate_mu(&s, 19, &TrimBox::zeros(1), 2),
            Err(FcpError::SegmentTooShort { .. })
        ));
        // x in [1, 1.8]; x0 = 1.8 trims everything
        assert!(matches!(
            estimate_mu(&s, 10, &TrimBox::new(vec![1.8]).unwrap(), 2),
            Err(FcpError::NoActiveEvaluationPoints)
        ));
    }

    #[test]
    fn lattice_scores_have_unit_density() {
        let n = 1000;
        let r: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
        let c = score_density_floor(&scores(&r, &vec![true; n]), 0.1, n).unwrap();
        assert!((c - 1.0).abs() < 0.1, "{c}");
    }

    #[test]
    fn empty_bin_gives_zero_density() {
        let r = vec![0.95; 40];
        let c = score_density_floor(&scores(&r, &[true; 40]), 0.25, 10).unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn input_density_on_lattice() {
        let rows = (0..100)
            .map(|i| (vec![1.0 + i as f64 / 99.0], 1.0))
            .collect();
        let s = Series::from_rows(rows).unwrap();
        let c = input_density_floor(&s, &[0.25], 100).unwrap();
        assert!((c - 1.0).abs() < 0.05, "{c}");
    }

    #[test]
    fn measure_of_trimmed_box() {
        let s = Series::from_rows(vec![(vec![1.0, 1.0], 1.0), (vec![2.0, 3.0], 1.0)]).unwrap();
        let m = trimmed_measure(&s, &TrimBox::new(vec![1.5, 2.0]).unwrap());
        assert!((m - (2.0 - 0.5)).abs() < 1e-12);
        assert_eq!(trimmed_measure(&s, &TrimBox::zeros(2)), 2.0);
    }

    #[test]
    fn general_theta_floors_on_empty_bins() {
        let s = halves(0.5);
        let sc = split_scores(&s, 10, &TrimBox::zeros(1)).unwrap();
        let bw = Bandwidths::defaults(&s);
        let th = estimate_theta_general(&s, &sc, 0.5, &TrimBox::zeros(1), &bw).unwrap();
        assert_eq!(th.theta, 1.0 / 20.0);
        assert!(th.flags.contains(&"theta_floored".to_string()));
        assert!(th.flags.contains(&"slow_variation_assumed".to_string()));
    }

    #[test]
    fn change_interval_falls_back_on_short_windows() {
        let s = halves(0.5);
        let settings = CiSettings {
            level: 0.9,
            mode: CiMode::Iid,
            min_seg: 2,
            bandwidths: None,
        };
        let ci = change_interval(&s, 2, (2, 4), &TrimBox::zeros(1), &settings).unwrap();
        assert!(ci.flags.iter().any(|f| f.starts_with("fallback")));
        let ci = change_interval(&s, 10, (1, 20), &TrimBox::zeros(1), &settings).unwrap();
        // every score is 1 >= mu
        assert_eq!(ci.theta_hat, 1.0);
        assert_eq!((ci.lo, ci.hi), (10, 10));
    }
}
