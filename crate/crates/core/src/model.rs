//! Domain types: observations, series, trimming box, detector configuration
//! and detection results.

use crate::error::{FcpError, Result};
use crate::grid::GridCell;
use crate::scalar::{ceil_index, Scalar};
use serde::{Deserialize, Serialize};

/// One time-ordered input/output record. `t` is 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation<T> {
    pub t: usize,
    pub x: Vec<T>,
    pub y: T,
}

/// A validated, time-ordered panel of observations with indices `1..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series<T> {
    d: usize,
    obs: Vec<Observation<T>>,
    labels: Option<Vec<String>>,
}

impl<T: Scalar> Series<T> {
    /// Validates raw `(x, y)` rows given in time order.
    pub fn from_rows(rows: Vec<(Vec<T>, T)>) -> Result<Self> {
        let d = match rows.first() {
            None => return Err(FcpError::EmptyInput),
            Some((x, _)) => x.len(),
        };
        if d == 0 {
            return Err(FcpError::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        let mut obs = Vec::with_capacity(rows.len());
        for (i, (x, y)) in rows.into_iter().enumerate() {
            let row = i + 1;
            if x.len() != d {
                return Err(FcpError::DimensionMismatch {
                    expected: d,
                    found: x.len(),
                });
            }
            for (j, v) in x.iter().chain(std::iter::once(&y)).enumerate() {
                if !v.is_finite() {
                    return Err(FcpError::NonFinite { row, column: j + 1 });
                }
                if *v < T::zero() {
                    return Err(FcpError::NegativeValue { row, column: j + 1 });
                }
            }
            obs.push(Observation { t: row, x, y });
        }
        if obs.len() < 2 {
            return Err(FcpError::TooFewObservations {
                min: 2,
                got: obs.len(),
            });
        }
        Ok(Self {
            d,
            obs,
            labels: None,
        })
    }

    /// Attaches original time labels (one per observation).
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.obs.len() {
            return Err(FcpError::InvalidParameter(format!(
                "{} labels for {} observations",
                labels.len(),
                self.obs.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.obs.len()
    }

    pub fn obs(&self) -> &[Observation<T>] {
        &self.obs
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Observation at 1-based time `t`.
    pub fn at(&self, t: usize) -> &Observation<T> {
        &self.obs[t - 1]
    }

    /// Observations with time index in `[t1, t2]`.
    pub fn range(&self, t1: usize, t2: usize) -> Result<&[Observation<T>]> {
        self.check_range(t1, t2)?;
        Ok(&self.obs[t1 - 1..t2])
    }

    /// Copy of `[t1, t2]` re-indexed to `1..=t2-t1+1`.
    pub fn window(&self, t1: usize, t2: usize) -> Result<Self> {
        let slice = self.range(t1, t2)?;
        if slice.len() < 2 {
            return Err(FcpError::TooFewObservations {
                min: 2,
                got: slice.len(),
            });
        }
        let obs = slice
            .iter()
            .enumerate()
            .map(|(i, o)| Observation {
                t: i + 1,
                x: o.x.clone(),
                y: o.y,
            })
            .collect();
        let labels = self.labels.as_ref().map(|l| l[t1 - 1..t2].to_vec());
        Ok(Self {
            d: self.d,
            obs,
            labels,
        })
    }

    pub(crate) fn check_range(&self, t1: usize, t2: usize) -> Result<()> {
        if t1 < 1 || t1 > t2 || t2 > self.n() {
            return Err(FcpError::IndexOutOfRange {
                t1,
                t2,
                n: self.n(),
            });
        }
        Ok(())
    }

    /// Per-coordinate `(min, max)` of the inputs.
    pub fn input_bounds(&self) -> Vec<(T, T)> {
        (0..self.d)
            .map(|j| {
                self.obs
                    .iter()
                    .fold((T::infinity(), T::neg_infinity()), |(lo, hi), o| {
                        (lo.min(o.x[j]), hi.max(o.x[j]))
                    })
            })
            .collect()
    }

    /// Same inputs with every output multiplied by `c`.
    pub fn scale_outputs(&self, c: T) -> Self {
        let obs = self
            .obs
            .iter()
            .map(|o| Observation {
                t: o.t,
                x: o.x.clone(),
                y: o.y * c,
            })
            .collect();
        Self {
            d: self.d,
            obs,
            labels: self.labels.clone(),
        }
    }
}

/// Entry-wise trimming threshold. An observation is active iff
/// `X_t > x0` in every coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrimBox<T> {
    pub x0: Vec<T>,
}

impl<T: Scalar> TrimBox<T> {
    pub fn new(x0: Vec<T>) -> Result<Self> {
        if x0.is_empty() {
            return Err(FcpError::EmptyInput);
        }
        if x0.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(FcpError::InvalidParameter(
                "trim box must be finite and >= 0".into(),
            ));
        }
        Ok(Self { x0 })
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            x0: vec![T::zero(); d],
        }
    }

    pub fn d(&self) -> usize {
        self.x0.len()
    }

    /// Strict entry-wise `x > x0`.
    #[inline]
    pub fn admits(&self, x: &[T]) -> bool {
        x.iter().zip(&self.x0).all(|(a, b)| a > b)
    }
}

/// Per-coordinate lower (type-1) empirical `alpha`-quantile of the inputs.
///
/// The order statistic taken is `max(1, ceil(alpha * n))`.
pub fn trim_quantile<T: Scalar>(series: &Series<T>, alpha: f64) -> Result<TrimBox<T>> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(FcpError::InvalidParameter(format!(
            "alpha must lie in [0, 1), got {alpha}"
        )));
    }
    let n = series.n();
    let k = ceil_index(alpha, n).clamp(1, n);
    let x0 = (0..series.d())
        .map(|j| {
            let mut col: Vec<T> = series.obs().iter().map(|o| o.x[j]).collect();
            col.sort_by(|a, b| a.partial_cmp(b).expect("validated finite"));
            col[k - 1]
        })
        .collect();
    Ok(TrimBox { x0 })
}

/// Which frontier estimator the detectors fit on each segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum FrontierKind {
    /// Free disposal hull.
    Fdh,
    /// Order-`q` quantile hull, `0 < q <= 1`; `q = 1` equals `Fdh`.
    Quantile(f64),
}

/// Tuning for the detectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig<T> {
    /// Detection threshold on the quasi-likelihood-ratio statistic.
    pub lambda: T,
    /// Quantile level used to derive the trimming box.
    pub alpha_trim: f64,
    /// Run the local refitting pass after the left-expanding search.
    pub refit: bool,
    /// Back-off constant `C` for the robust restart `eta - floor(C ln n)`.
    pub robust_c: f64,
    /// Smallest prefix the search is allowed to fit a frontier on.
    pub min_seg: usize,
    pub frontier: FrontierKind,
}

impl<T: Scalar> DetectorConfig<T> {
    /// `lambda = ln(n)^2`, `alpha = 0.1`, refit on.
    pub fn defaults_for(n: usize) -> Self {
        Self {
            lambda: default_lambda(n),
            alpha_trim: 0.1,
            refit: true,
            robust_c: 1.0,
            min_seg: 2,
            frontier: FrontierKind::Fdh,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > T::zero()) || !self.lambda.is_finite() {
            return Err(FcpError::InvalidParameter(format!(
                "lambda must be > 0, got {}",
                self.lambda
            )));
        }
        if !(0.0..1.0).contains(&self.alpha_trim) {
            return Err(FcpError::InvalidParameter(format!(
                "alpha_trim must lie in [0, 1), got {}",
                self.alpha_trim
            )));
        }
        if !(self.robust_c > 0.0) {
            return Err(FcpError::InvalidParameter(format!(
                "robust_c must be > 0, got {}",
                self.robust_c
            )));
        }
        if self.min_seg < 2 {
            return Err(FcpError::InvalidParameter(format!(
                "min_seg must be >= 2, got {}",
                self.min_seg
            )));
        }
        if let FrontierKind::Quantile(q) = self.frontier {
            if !(q > 0.0 && q <= 1.0) {
                return Err(FcpError::InvalidParameter(format!(
                    "quantile level must lie in (0, 1], got {q}"
                )));
            }
        }
        Ok(())
    }
}

/// `ln(n)^2`.
pub fn default_lambda<T: Scalar>(n: usize) -> T {
    let l = (n as f64).ln();
    T::lit(l * l)
}

/// Output of the multiple change-point detectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult<T> {
    pub k_hat: usize,
    /// Estimated change locations, strictly increasing, each in `[1, n-1]`.
    pub changepoints: Vec<usize>,
    /// Maximal statistic value attained when each change was located.
    pub stats: Vec<T>,
    /// Restart indices `m_k` (the left end of the interval on which change
    /// `k` was first detected).
    pub restarts: Vec<usize>,
    pub refit_windows: Vec<(usize, usize)>,
    pub lambda: T,
    pub x0: Vec<T>,
    /// Cell attaining the maximum, in original input units (local mode only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<GridCell<T>>>,
    /// Pre-refit locations.
    #[serde(skip)]
    pub pilot: Vec<usize>,
    /// Whether the statistic for a change hit the all-zero-scores sentinel.
    #[serde(skip)]
    pub degenerate: Vec<bool>,
}

impl<T: Scalar> DetectionResult<T> {
    pub(crate) fn empty(lambda: T, x0: &TrimBox<T>) -> Self {
        Self {
            k_hat: 0,
            changepoints: Vec::new(),
            stats: Vec::new(),
            restarts: Vec::new(),
            refit_windows: Vec::new(),
            lambda,
            x0: x0.x0.clone(),
            cells: None,
            pilot: Vec::new(),
            degenerate: Vec::new(),
        }
    }
}
