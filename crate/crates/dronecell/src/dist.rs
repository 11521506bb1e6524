//! Scalar distributions and Poisson point sampling.
//!
//! The scalar laws cover everything the mobility and channel models draw
//! from:
//!
//! | Variant         | Use                                   | Support        |
//! |-----------------|---------------------------------------|----------------|
//! | `Rayleigh`      | flight distances                      | `[0, inf)`     |
//! | `Exponential`   | hover times, flight distances         | `[0, inf)`     |
//! | `Erlang`        | partial sums of exponential hovers    | `[0, inf)`     |
//! | `Deterministic` | fixed speeds, degenerate test cases   | point mass     |
//! | `Uniform`       | headings, synthetic checks            | `[lo, hi]`     |
//!
//! All sampling is by inversion (Erlang by summing exponential stages), so a
//! fixed `(seed, stream)` pins the exact sample sequence.

use crate::rng::Rng;
use crate::special::{gamma_p, ln_gamma};
use rand::Rng as _;
use rand_distr::{Distribution as _, Poisson};
use std::fmt;

/// Rejected construction parameters, with the offending values in the
/// message.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterError(pub String);

impl fmt::Display for ParameterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid parameter: {}", self.0)
    }
}

impl std::error::Error for ParameterError {}

macro_rules! ensure_param {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(ParameterError(format!($($msg)*)));
        }
    };
}

pub(crate) use ensure_param;

/// A scalar probability law with pdf/cdf evaluators and inversion sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarDistribution {
    /// Rayleigh with scale `sigma`; mean is `sigma * sqrt(pi/2)`.
    Rayleigh { sigma: f64 },
    /// Exponential with the given mean.
    Exponential { mean: f64 },
    /// Sum of `shape` i.i.d. exponential stages, each with mean
    /// `mean_per_stage`.
    Erlang { shape: u32, mean_per_stage: f64 },
    /// Point mass at `value`.
    Deterministic { value: f64 },
    /// Uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
}

impl ScalarDistribution {
    pub fn rayleigh(sigma: f64) -> Result<Self, ParameterError> {
        ensure_param!(sigma.is_finite() && sigma > 0.0, "Rayleigh sigma must be positive, got {sigma}");
        Ok(Self::Rayleigh { sigma })
    }

    /// Rayleigh specified by its mean, the form experiment configs quote.
    pub fn rayleigh_from_mean(mean: f64) -> Result<Self, ParameterError> {
        ensure_param!(mean.is_finite() && mean > 0.0, "Rayleigh mean must be positive, got {mean}");
        Ok(Self::Rayleigh { sigma: mean / (std::f64::consts::PI / 2.0).sqrt() })
    }

    pub fn exponential(mean: f64) -> Result<Self, ParameterError> {
        ensure_param!(mean.is_finite() && mean > 0.0, "Exponential mean must be positive, got {mean}");
        Ok(Self::Exponential { mean })
    }

    pub fn erlang(shape: u32, mean_per_stage: f64) -> Result<Self, ParameterError> {
        ensure_param!(shape >= 1, "Erlang shape must be at least 1, got {shape}");
        ensure_param!(
            mean_per_stage.is_finite() && mean_per_stage > 0.0,
            "Erlang stage mean must be positive, got {mean_per_stage}"
        );
        Ok(Self::Erlang { shape, mean_per_stage })
    }

    pub fn deterministic(value: f64) -> Result<Self, ParameterError> {
        ensure_param!(value.is_finite(), "Deterministic value must be finite, got {value}");
        Ok(Self::Deterministic { value })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self, ParameterError> {
        ensure_param!(lo.is_finite() && hi.is_finite() && lo < hi, "Uniform bounds must satisfy lo < hi, got [{lo}, {hi}]");
        Ok(Self::Uniform { lo, hi })
    }

    /// Probability density at `x`. The `Deterministic` variant carries its
    /// whole mass in an atom and has no density; its pdf is identically zero
    /// and callers that need the atom must special-case it via [`Self::atom`].
    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Rayleigh { sigma } => {
                if x < 0.0 {
                    0.0
                } else {
                    let s2 = sigma * sigma;
                    x / s2 * (-x * x / (2.0 * s2)).exp()
                }
            }
            Self::Exponential { mean } => {
                if x < 0.0 {
                    0.0
                } else {
                    (-x / mean).exp() / mean
                }
            }
            Self::Erlang { shape, mean_per_stage } => {
                if x <= 0.0 {
                    if x == 0.0 && shape == 1 {
                        1.0 / mean_per_stage
                    } else {
                        0.0
                    }
                } else {
                    let k = shape as f64;
                    let rate = 1.0 / mean_per_stage;
                    ((k - 1.0) * (rate * x).ln() - rate * x - ln_gamma(k)).exp() * rate
                }
            }
            Self::Deterministic { .. } => 0.0,
            Self::Uniform { lo, hi } => {
                if x < lo || x > hi {
                    0.0
                } else {
                    1.0 / (hi - lo)
                }
            }
        }
    }

    /// Cumulative distribution function `P[X <= x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Rayleigh { sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x * x / (2.0 * sigma * sigma)).exp_m1()
                }
            }
            Self::Exponential { mean } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x / mean).exp_m1()
                }
            }
            Self::Erlang { shape, mean_per_stage } => {
                if x <= 0.0 {
                    0.0
                } else {
                    gamma_p(shape as f64, x / mean_per_stage)
                }
            }
            Self::Deterministic { value } => {
                if x >= value {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    /// The point mass `(location, 1.0)` when the law is degenerate.
    pub fn atom(&self) -> Option<(f64, f64)> {
        match *self {
            Self::Deterministic { value } => Some((value, 1.0)),
            _ => None,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Rayleigh { sigma } => sigma * (std::f64::consts::PI / 2.0).sqrt(),
            Self::Exponential { mean } => mean,
            Self::Erlang { shape, mean_per_stage } => shape as f64 * mean_per_stage,
            Self::Deterministic { value } => value,
            Self::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Self::Rayleigh { sigma } => (2.0 - std::f64::consts::PI / 2.0) * sigma * sigma,
            Self::Exponential { mean } => mean * mean,
            Self::Erlang { shape, mean_per_stage } => shape as f64 * mean_per_stage * mean_per_stage,
            Self::Deterministic { .. } => 0.0,
            Self::Uniform { lo, hi } => (hi - lo) * (hi - lo) / 12.0,
        }
    }

    /// Support of the law, upper end `inf` for the unbounded variants.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::Rayleigh { .. } | Self::Exponential { .. } | Self::Erlang { .. } => (0.0, f64::INFINITY),
            Self::Deterministic { value } => (value, value),
            Self::Uniform { lo, hi } => (lo, hi),
        }
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        match *self {
            Self::Rayleigh { sigma } => {
                let u: f64 = rng.gen();
                sigma * (-2.0 * (1.0 - u).ln()).sqrt()
            }
            Self::Exponential { mean } => sample_exponential(mean, rng),
            Self::Erlang { shape, mean_per_stage } => {
                (0..shape).map(|_| sample_exponential(mean_per_stage, rng)).sum()
            }
            Self::Deterministic { value } => value,
            Self::Uniform { lo, hi } => {
                let u: f64 = rng.gen();
                lo + (hi - lo) * u
            }
        }
    }
}

fn sample_exponential(mean: f64, rng: &mut Rng) -> f64 {
    let u: f64 = rng.gen();
    -mean * (1.0 - u).ln()
}

/// Unit-mean gamma fading gain with integer shape `m` (Nakagami-m power),
/// sampled exactly as the mean of `m` unit exponentials.
pub fn sample_gamma_fading(m: u32, rng: &mut Rng) -> Result<f64, ParameterError> {
    ensure_param!(m >= 1, "fading shape m must be at least 1, got {m}");
    let sum: f64 = (0..m).map(|_| sample_exponential(1.0, rng)).sum();
    Ok(sum / m as f64)
}

/// A disc-shaped observation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Disc {
    pub fn new(center: [f64; 2], radius: f64) -> Result<Self, ParameterError> {
        ensure_param!(
            radius.is_finite() && radius >= 0.0 && center.iter().all(|c| c.is_finite()),
            "disc must have finite center and nonnegative radius, got center {center:?}, radius {radius}"
        );
        Ok(Self { center, radius })
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        dx * dx + dy * dy <= self.radius * self.radius * (1.0 + 1e-12)
    }
}

/// A homogeneous Poisson sample on a disc window.
#[derive(Debug, Clone)]
pub struct PlanarPointSet {
    pub points: Vec<[f64; 2]>,
    pub window: Disc,
    pub density: f64,
}

/// Samples a homogeneous Poisson point process of density `lambda0` on
/// `window`: a Poisson count, then i.i.d. uniform positions.
pub fn sample_ppp(lambda0: f64, window: Disc, rng: &mut Rng) -> Result<PlanarPointSet, ParameterError> {
    ensure_param!(lambda0.is_finite() && lambda0 > 0.0, "PPP density must be positive, got {lambda0}");
    let mean_count = lambda0 * window.area();
    let count = if mean_count == 0.0 {
        0
    } else {
        Poisson::new(mean_count)
            .map_err(|e| ParameterError(format!("Poisson mean {mean_count} rejected: {e}")))?
            .sample(rng) as usize
    };
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        points.push(sample_uniform_in_disc(window, rng));
    }
    Ok(PlanarPointSet { points, window, density: lambda0 })
}

/// One point uniform on the disc, by the radius inversion `r = R sqrt(U)`.
pub fn sample_uniform_in_disc(window: Disc, rng: &mut Rng) -> [f64; 2] {
    let u: f64 = rng.gen();
    let r = window.radius * u.sqrt();
    let theta = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    [window.center[0] + r * theta.cos(), window.center[1] + r * theta.sin()]
}
