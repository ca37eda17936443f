//! Seeded synthetic data: piecewise frontiers with multiplicative shifts and
//! efficiency scores drawn from uniform, drifting truncated-normal or mixture
//! laws. Inputs are independent `U[1, 2]^d`.

use crate::error::{FcpError, Result};
use crate::model::Series;
use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use std::fmt;
use std::str::FromStr;

/// Default technology multiplier between consecutive segments.
pub const CHANGE_MULTIPLIER: f64 = 1.75;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontierFamily {
    Constant,
    Additive,
    CobbDouglas,
    Logistic,
    PiecewiseLinear,
}

impl FrontierFamily {
    pub fn name(self) -> &'static str {
        match self {
            FrontierFamily::Constant => "Constant",
            FrontierFamily::Additive => "Additive",
            FrontierFamily::CobbDouglas => "CobbDouglas",
            FrontierFamily::Logistic => "Logistic",
            FrontierFamily::PiecewiseLinear => "PiecewiseLinear",
        }
    }
}

impl fmt::Display for FrontierFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FrontierFamily {
    type Err = FcpError;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "constant" | "m1" => Ok(FrontierFamily::Constant),
            "additive" | "m2" => Ok(FrontierFamily::Additive),
            "cobbdouglas" | "m3" => Ok(FrontierFamily::CobbDouglas),
            "logistic" | "m4" => Ok(FrontierFamily::Logistic),
            "piecewiselinear" | "m5" | "local" => Ok(FrontierFamily::PiecewiseLinear),
            _ => Err(FcpError::Parse(format!("unknown frontier model '{s}'"))),
        }
    }
}

/// A baseline frontier with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontierSpec {
    pub family: FrontierFamily,
    pub a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alpha: Vec<f64>,
}

impl FrontierSpec {
    /// Reference parameters for `d` in `{1, 2}`.
    pub fn table1(family: FrontierFamily, d: usize) -> Result<Self> {
        if !(1..=2).contains(&d) {
            return Err(FcpError::InvalidParameter(format!(
                "reference parameters exist for d = 1, 2; got {d}"
            )));
        }
        let spec = match family {
            FrontierFamily::Constant => Self {
                family,
                a: 1.0,
                b: None,
                omega: None,
                alpha: Vec::new(),
            },
            FrontierFamily::Additive => Self {
                family,
                a: 3.0,
                b: None,
                omega: None,
                alpha: vec![3.0; d],
            },
            FrontierFamily::CobbDouglas => Self {
                family,
                a: 1.0,
                b: None,
                omega: None,
                alpha: vec![0.3; d],
            },
            FrontierFamily::Logistic => Self {
                family,
                a: 4.0,
                b: Some(0.5),
                omega: None,
                alpha: vec![1.0; d],
            },
            FrontierFamily::PiecewiseLinear if d == 1 => Self {
                family,
                a: 1.0,
                b: Some(-0.875),
                omega: Some(1.25),
                alpha: vec![1.5],
            },
            FrontierFamily::PiecewiseLinear => Self {
                family,
                a: 1.0,
                b: Some(-2.75),
                omega: Some(2.5),
                alpha: vec![1.5, 1.5],
            },
        };
        Ok(spec)
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let needs_alpha = self.family != FrontierFamily::Constant;
        if needs_alpha && self.alpha.len() != d {
            return Err(FcpError::InvalidParameter(format!(
                "{} needs {d} exponents/slopes, got {}",
                self.family,
                self.alpha.len()
            )));
        }
        let needs_b = matches!(
            self.family,
            FrontierFamily::Logistic | FrontierFamily::PiecewiseLinear
        );
        if needs_b && self.b.is_none() {
            return Err(FcpError::InvalidParameter(format!(
                "{} needs B",
                self.family
            )));
        }
        if self.family == FrontierFamily::PiecewiseLinear && self.omega.is_none() {
            return Err(FcpError::InvalidParameter(
                "PiecewiseLinear needs omega".into(),
            ));
        }
        Ok(())
    }

    /// Baseline value `f(x)`.
    pub fn value(&self, x: &[f64]) -> f64 {
        let lin = || self.alpha.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
        match self.family {
            FrontierFamily::Constant => self.a,
            FrontierFamily::Additive => self.a + lin(),
            FrontierFamily::CobbDouglas => {
                self.a
                    * self
                        .alpha
                        .iter()
                        .zip(x)
                        .map(|(a, v)| v.powf(*a))
                        .product::<f64>()
            }
            FrontierFamily::Logistic => {
                let z = self.a * (lin() - self.b.unwrap_or(0.0));
                1.0 / (1.0 + (-z).exp())
            }
            FrontierFamily::PiecewiseLinear => {
                if x.iter().sum::<f64>() < self.omega.unwrap_or(0.0) {
                    self.a
                } else {
                    self.b.unwrap_or(0.0) + lin()
                }
            }
        }
    }
}

/// `f_(k)(x) = 1.75^(k-1) f_(1)(x)`.
pub fn frontier_value(spec: &FrontierSpec, x: &[f64], segment_k: usize) -> f64 {
    spec.value(x) * CHANGE_MULTIPLIER.powi(segment_k.saturating_sub(1) as i32)
}

/// How the frontier evolves across segments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TechnologyPath {
    /// `f_(k) = m^(k-1) f`.
    Global(FrontierSpec),
    /// `first` on segment 1, then `m^(k-2) second` on segment `k >= 2`.
    Local {
        first: FrontierSpec,
        second: FrontierSpec,
    },
}

impl TechnologyPath {
    /// Constant frontier followed by the piecewise-linear shift.
    pub fn local_table1(d: usize) -> Result<Self> {
        Ok(TechnologyPath::Local {
            first: FrontierSpec::table1(FrontierFamily::Constant, d)?,
            second: FrontierSpec::table1(FrontierFamily::PiecewiseLinear, d)?,
        })
    }

    pub fn value(&self, x: &[f64], segment: usize, multiplier: f64) -> f64 {
        match self {
            TechnologyPath::Global(f) => f.value(x) * multiplier.powi(segment as i32 - 1),
            TechnologyPath::Local { first, .. } if segment <= 1 => first.value(x),
            TechnologyPath::Local { second, .. } => {
                second.value(x) * multiplier.powi(segment as i32 - 2)
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            TechnologyPath::Global(f) => f.family.name(),
            TechnologyPath::Local { .. } => "Local",
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        match self {
            TechnologyPath::Global(f) => f.validate(d),
            TechnologyPath::Local { first, second } => {
                first.validate(d)?;
                second.validate(d)
            }
        }
    }
}

/// Efficiency score laws on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScoreDist {
    /// `U[0, 1]`.
    R1,
    /// `N(0.5 + t/n, 0.1)` truncated to `[0, 1]`.
    R2,
    /// `N(1.5 - t/n, 0.1)` truncated to `[0, 1]`.
    R3,
    /// `U[0, 1]` up to `floor(n/2)`, then an equal mixture of `U[0, 1]` and
    /// `U[0.8, 1]`.
    R4,
}

/// Variance of the truncated-normal laws.
pub const SCORE_VARIANCE: f64 = 0.1;

impl fmt::Display for ScoreDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for ScoreDist {
    type Err = FcpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "r1" => Ok(ScoreDist::R1),
            "r2" => Ok(ScoreDist::R2),
            "r3" => Ok(ScoreDist::R3),
            "r4" => Ok(ScoreDist::R4),
            _ => Err(FcpError::Parse(format!("unknown score law '{s}'"))),
        }
    }
}

impl ScoreDist {
    /// Location of the untruncated normal at time `t`, if any.
    pub fn drift(self, t: usize, n: usize) -> Option<f64> {
        let s = t as f64 / n as f64;
        match self {
            ScoreDist::R2 => Some(0.5 + s),
            ScoreDist::R3 => Some(1.5 - s),
            _ => None,
        }
    }

    fn sample<R: Rng>(self, rng: &mut R, t: usize, n: usize, std_normal: &Normal) -> f64 {
        match self {
            ScoreDist::R1 => rng.random::<f64>(),
            ScoreDist::R4 => {
                let u: f64 = rng.random();
                if t <= n / 2 || rng.random::<bool>() {
                    u
                } else {
                    0.8 + 0.2 * u
                }
            }
            ScoreDist::R2 | ScoreDist::R3 => {
                let mu = self.drift(t, n).expect("normal law");
                truncated_normal(rng.random(), mu, SCORE_VARIANCE.sqrt(), std_normal)
            }
        }
    }
}

/// Inverse-CDF draw from `N(mu, sigma^2)` restricted to `[0, 1]`.
pub fn truncated_normal(u: f64, mu: f64, sigma: f64, std_normal: &Normal) -> f64 {
    let lo = std_normal.cdf((0.0 - mu) / sigma);
    let hi = std_normal.cdf((1.0 - mu) / sigma);
    let p = (lo + u * (hi - lo)).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
    (mu + sigma * std_normal.inverse_cdf(p)).clamp(0.0, 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub d: usize,
    /// Number of change points.
    pub k: usize,
    pub change_multiplier: f64,
    pub path: TechnologyPath,
    pub scores: ScoreDist,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(
        n: usize,
        d: usize,
        k: usize,
        path: TechnologyPath,
        scores: ScoreDist,
        seed: u64,
    ) -> Self {
        Self {
            n,
            d,
            k,
            change_multiplier: CHANGE_MULTIPLIER,
            path,
            scores,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(FcpError::InvalidParameter("d must be >= 1".into()));
        }
        if self.n < 2 || self.n < 2 * (self.k + 1) {
            return Err(FcpError::InvalidParameter(format!(
                "n = {} too small for {} change points",
                self.n, self.k
            )));
        }
        if !(self.change_multiplier > 0.0) || !self.change_multiplier.is_finite() {
            return Err(FcpError::InvalidParameter(
                "change multiplier must be > 0".into(),
            ));
        }
        self.path.validate(self.d)
    }

    /// `eta_k = floor(k n / (K + 1))`.
    pub fn changepoints(&self) -> Vec<usize> {
        (1..=self.k).map(|j| j * self.n / (self.k + 1)).collect()
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

/// Ground truth of a simulated series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub changepoints: Vec<usize>,
    /// Segment index (1-based) of every observation.
    pub segments: Vec<usize>,
    /// Efficiency scores actually drawn.
    pub scores: Vec<f64>,
}

/// Draws a series. For each `t` the inputs are drawn first, then the score.
pub fn generate<T: Scalar>(config: &SimConfig) -> Result<(Series<T>, Truth)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let std_normal = Normal::standard();
    let changepoints = config.changepoints();
    let mut rows = Vec::with_capacity(config.n);
    let mut segments = Vec::with_capacity(config.n);
    let mut scores = Vec::with_capacity(config.n);
    for t in 1..=config.n {
        let x: Vec<f64> = (0..config.d).map(|_| 1.0 + rng.random::<f64>()).collect();
        let r = config.scores.sample(&mut rng, t, config.n, &std_normal);
        let seg = 1 + changepoints.iter().filter(|&&c| c < t).count();
        let y = config.path.value(&x, seg, config.change_multiplier) * r;
        rows.push((x.into_iter().map(T::lit).collect(), T::lit(y)));
        segments.push(seg);
        scores.push(r);
    }
    Ok((
        Series::from_rows(rows)?,
        Truth {
            changepoints,
            segments,
            scores,
        },
    ))
}

/// Seed of replication `rep`: a splitmix64 mix of the master seed and the
/// replication index.
pub fn derive_seed(master: u64, rep: u64) -> u64 {
    splitmix64(master ^ splitmix64(rep.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
