//! SIR-based throughput metrics for the typical user.
//!
//! The received rate at time `t` is `E[ln(1 + SIR(t))]` in nats per channel
//! use. Conditioned on the serving distance, the complementary cdf of the
//! SIR under integer Nakagami fading is a short sum of scaled derivatives of
//! the interference Laplace transform, and that transform is an exponential
//! of one radial integral against the interferer intensity profile. The
//! average rate is then a double integral: over the serving distance drawn
//! from the nearest-drone law `2 pi lambda0 u0 exp(-pi lambda0 u0^2)`, and
//! over the SIR threshold.
//!
//! Numerically the threshold axis is stretched by `gamma = e^y - 1`, which
//! turns the `1/(1+gamma)` weight into `dy` exactly, and the serving axis by
//! `q = pi lambda0 u0^2`, which turns the serving law into `e^{-q} dq`. The
//! intensity profile is tabulated once per serving-distance node; the part
//! of every radial integral beyond the profile's saturation radius, where
//! the intensity is exactly `lambda0`, is folded onto a finite interval by
//! `w = (u^2 + h^2)^{(2-alpha)/2}` so no truncation error enters from the
//! far field.

use crate::density::{
    rs_density, sl_density, udm_density_general, uim_density, InterfererDensity, ServiceModel,
};
use crate::displacement::{rw_displacement, rwp_displacement, NetDisplacementDistribution};
use crate::dist::{ensure_param, ParameterError};
use crate::mobility::MobilityModelSpec;
use crate::quad::integrate;
use crate::rng::Rng;
use crate::table::Tabulated1D;
use crate::walk::{FlightWalkLaw, WaitLaw};
use std::cell::{Cell, RefCell};
use std::f64::consts::PI;
use std::fmt;

/// Serving-distance integral cutoff: `exp(-23)` of the nearest-drone law's
/// mass lies beyond `pi lambda0 u0^2 = 23`.
const Q_MAX: f64 = 23.0;
/// The threshold integral stops where the conditional SIR ccdf drops below
/// this.
const CCDF_FLOOR: f64 = 1e-8;
/// Relative tolerance of the outer rate integrals.
const RATE_REL: f64 = 1e-4;
/// Relative tolerance of the session-rate average over time.
const SESSION_REL: f64 = 1e-3;
/// Nodes of the cached intensity profile between 0 and saturation.
const PROFILE_CELLS: usize = 700;

/// Propagation and fading parameters shared by every link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Drone altitude above the user plane, meters.
    pub h: f64,
    /// Path-loss exponent; the interference integral diverges at 2.
    pub alpha: f64,
    /// Nakagami shape of the serving link.
    pub m0: u32,
    /// Nakagami shape of every interfering link.
    pub m_x: u32,
    /// Common transmit power, watts. The SIR is a ratio of same-power
    /// terms, so this never reaches the metric values.
    pub p: f64,
}

impl ChannelParams {
    pub fn new(h: f64, alpha: f64, m0: u32, m_x: u32, p: f64) -> Result<Self, ParameterError> {
        let ch = Self { h, alpha, m0, m_x, p };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<(), ParameterError> {
        ensure_param!(
            self.h.is_finite() && self.h > 0.0,
            "altitude must be positive, got {}",
            self.h
        );
        ensure_param!(
            self.alpha.is_finite() && self.alpha > 2.0,
            "path-loss exponent must exceed 2, got {}",
            self.alpha
        );
        ensure_param!(self.m0 >= 1, "serving fading shape must be at least 1");
        ensure_param!(self.m_x >= 1, "interferer fading shape must be at least 1");
        ensure_param!(
            self.m0 <= 32 && self.m_x <= 32,
            "fading shapes beyond 32 are not supported"
        );
        ensure_param!(self.p.is_finite() && self.p > 0.0, "power must be positive, got {}", self.p);
        Ok(())
    }
}

/// One rate evaluation request.
#[derive(Debug, Clone)]
pub struct RateQuery {
    pub service: ServiceModel,
    pub model: MobilityModelSpec,
    pub lambda0: f64,
    pub channel: ChannelParams,
    /// Seconds since association.
    pub t: f64,
}

/// What the integrals actually covered.
#[derive(Debug, Clone, Copy)]
pub struct TruncationInfo {
    /// Serving distances beyond this were dropped (tail mass < 1e-10).
    pub u0_max: f64,
    /// Largest SIR threshold at which the ccdf was still integrated.
    pub gamma_max: f64,
}

/// A rate value with its numerical pedigree.
#[derive(Debug, Clone, Copy)]
pub struct RateResult {
    /// Nats per channel use.
    pub value: f64,
    /// Error estimate of the outermost quadrature.
    pub abs_error: f64,
    pub truncation: TruncationInfo,
}

/// Failures distinct enough to matter at the process boundary: bad inputs
/// versus quadratures that ran out of subdivisions.
#[derive(Debug)]
pub enum RateError {
    Invalid(ParameterError),
    NonConvergence { what: &'static str, residual: f64 },
}

impl fmt::Display for RateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Invalid(e) => write!(f, "{e}"),
            Self::NonConvergence { what, residual } => {
                write!(f, "{what} did not converge, residual {residual:.3e}")
            }
        }
    }
}

impl std::error::Error for RateError {}

impl From<ParameterError> for RateError {
    fn from(e: ParameterError) -> Self {
        Self::Invalid(e)
    }
}

/// The radial interference exponent `g` and enough structure to evaluate
/// its `s`-derivatives: `L(s) = exp(-g(s))`.
struct InterferenceExponent<'a> {
    /// Intensity on `[0, sat]`; `None` when it is zero there (a bare
    /// exclusion step), which makes the bulk term vanish.
    profile: Option<&'a Tabulated1D>,
    lambda0: f64,
    h_sq: f64,
    alpha: f64,
    /// Interferer fading shape, as a float for the pow calls.
    m: f64,
    /// Tail substitution endpoint `(sat^2 + h^2)^{-(alpha-2)/2}`.
    w_sat: f64,
    /// Tail exponent `alpha / (alpha - 2)`: the path gain is `w^{q_exp}`.
    q_exp: f64,
}

/// `1 - (1 + x)^{-m}` without cancellation for small `x`.
fn one_minus_pow(x: f64, m: f64) -> f64 {
    -(-m * x.ln_1p()).exp_m1()
}

impl<'a> InterferenceExponent<'a> {
    fn new(
        profile: Option<&'a Tabulated1D>,
        sat: f64,
        lambda0: f64,
        ch: &ChannelParams,
    ) -> Self {
        let h_sq = ch.h * ch.h;
        Self {
            profile,
            lambda0,
            h_sq,
            alpha: ch.alpha,
            m: ch.m_x as f64,
            w_sat: (sat * sat + h_sq).powf(-(ch.alpha - 2.0) / 2.0),
            q_exp: ch.alpha / (ch.alpha - 2.0),
        }
    }

    fn path_gain(&self, u: f64) -> f64 {
        (u * u + self.h_sq).powf(-self.alpha / 2.0)
    }

    /// Integral of `u * lambda(u) * weight(path_gain(u))` over the profile,
    /// one Simpson step per tabulation cell. The profile is linear inside a
    /// cell, so the midpoint intensity is the node average and the error is
    /// set by the weight's curvature alone.
    fn bulk<W: Fn(f64) -> f64>(&self, weight: &W) -> f64 {
        let Some(tab) = self.profile else { return 0.0 };
        let xs = tab.xs();
        let ys = tab.ys();
        let f = |u: f64, lam: f64| u * lam * weight(self.path_gain(u));
        let mut total = 0.0;
        let mut fa = f(xs[0], ys[0]);
        for i in 1..xs.len() {
            let (a, b) = (xs[i - 1], xs[i]);
            let fb = f(xs[i], ys[i]);
            let fm = f(0.5 * (a + b), 0.5 * (ys[i - 1] + ys[i]));
            total += (b - a) / 6.0 * (fa + 4.0 * fm + fb);
            fa = fb;
        }
        total
    }

    /// Far-field integral of `weight(path_gain)` times the ambient
    /// intensity, mapped onto `[0, w_sat]` where the gain is `w^{q_exp}`.
    fn tail<W: Fn(f64) -> f64>(&self, weight: &W) -> Result<f64, RateError> {
        let r = integrate(
            |w| weight(w.powf(self.q_exp)),
            0.0,
            self.w_sat,
            1e-12,
            1e-8,
        );
        if !r.converged {
            return Err(RateError::NonConvergence {
                what: "far-field interference integral",
                residual: r.abs_error,
            });
        }
        Ok(self.lambda0 * r.value / (self.alpha - 2.0))
    }

    /// `g(s)`, the exponent of the Laplace transform.
    fn value(&self, s: f64) -> Result<f64, RateError> {
        if s == 0.0 {
            return Ok(0.0);
        }
        let bulk = self.bulk(&|c| one_minus_pow(s * c / self.m, self.m));
        // The far tail sees `1 - (1+x)^{-m} ~ m x`, so divide the gain out
        // before it underflows: the integrand tends to `s` at w = 0.
        let tail = self.tail(&|c| {
            let x = s * c / self.m;
            if x < 1e-12 {
                s
            } else {
                one_minus_pow(x, self.m) / c
            }
        })?;
        Ok(2.0 * PI * (bulk + tail))
    }

    /// `j`-th derivative of `g` for `j >= 1`; closed-form integrand, no
    /// nested differencing.
    fn derivative(&self, s: f64, j: u32) -> Result<f64, RateError> {
        debug_assert!(j >= 1);
        let mj = self.m + j as f64;
        let w = |c: f64| (j as f64 * c.ln() - mj * (s * c / self.m).ln_1p()).exp();
        let bulk = self.bulk(&w);
        // One power of the gain is spent on the tail measure itself.
        let tail = self.tail(&|c| {
            ((j as f64 - 1.0) * c.ln() - mj * (s * c / self.m).ln_1p()).exp()
        })?;
        let mut rising = 1.0;
        for i in 0..j {
            rising *= (self.m + i as f64) / self.m;
        }
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        Ok(sign * 2.0 * PI * rising * (bulk + tail))
    }

    /// `L(s)` and derivatives up to `k_max`, by the product-rule recursion
    /// on `L' = -g' L`.
    fn laplace_derivs(&self, s: f64, k_max: u32) -> Result<Vec<f64>, RateError> {
        let mut neg_g = vec![0.0; k_max as usize + 1];
        for (j, slot) in neg_g.iter_mut().enumerate().skip(1) {
            *slot = -self.derivative(s, j as u32)?;
        }
        let mut dl = vec![0.0; k_max as usize + 1];
        dl[0] = (-self.value(s)?).exp();
        for k in 1..=k_max as usize {
            let mut acc = 0.0;
            let mut binom = 1.0;
            for j in 0..k {
                acc += binom * dl[j] * neg_g[k - j];
                binom *= (k - 1 - j) as f64 / (j + 1) as f64;
            }
            dl[k] = acc;
        }
        Ok(dl)
    }

    /// `P[SIR > gamma]` given serving link length `r0`.
    fn sir_ccdf(&self, gamma: f64, r0: f64, m0: u32) -> Result<f64, RateError> {
        let s = m0 as f64 * gamma * r0.powf(self.alpha);
        let dl = self.laplace_derivs(s, m0 - 1)?;
        let mut sum = 0.0;
        let mut coeff = 1.0;
        for (k, l) in dl.iter().enumerate() {
            sum += coeff * l;
            coeff *= -s / (k + 1) as f64;
        }
        Ok(sum.clamp(0.0, 1.0))
    }
}

/// Tabulates a density on `[0, saturation]`, with the analytic-character
/// radii pinned to nodes. A bare step profile needs no table at all.
fn build_profile(density: &InterfererDensity) -> Option<Tabulated1D> {
    if density.service() == ServiceModel::Uim {
        return None;
    }
    let sat = density.saturation_radius();
    if sat <= 0.0 {
        return None;
    }
    let mut xs = crate::table::linspace(0.0, sat, PROFILE_CELLS);
    let u0 = density.u0();
    if u0 > 0.0 && u0 < sat {
        xs.push(u0);
    }
    if let Some(disp) = density.displacement() {
        let vt = disp.max_distance();
        let inner = (u0 - vt).abs();
        if inner > 0.0 && inner < sat {
            xs.push(inner);
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * sat);
    let ys: Vec<f64> = xs.iter().map(|&u| density.eval(u)).collect();
    Some(Tabulated1D::new(xs, ys))
}

/// Builds interferer densities for one mobility model at any queried time,
/// constructing the expensive walk laws exactly once.
struct DensityFactory<'a> {
    model: &'a MobilityModelSpec,
    lambda0: f64,
    walk: Option<FlightWalkLaw>,
    waits: Option<WaitLaw>,
}

impl<'a> DensityFactory<'a> {
    fn new(
        model: &'a MobilityModelSpec,
        lambda0: f64,
        vt_max: f64,
        rng: &mut Rng,
    ) -> Result<Self, RateError> {
        let (walk, waits) = match model {
            MobilityModelSpec::StraightLine { .. } | MobilityModelSpec::RandomStop { .. } => {
                (None, None)
            }
            MobilityModelSpec::RandomWalk { flight, .. } => {
                (Some(FlightWalkLaw::for_horizon(flight.clone(), vt_max.max(1.0), rng)?), None)
            }
            MobilityModelSpec::RandomWaypoint { flight, hover, .. } => {
                let walk = FlightWalkLaw::for_horizon(flight.clone(), vt_max.max(1.0), rng)?;
                let waits = WaitLaw::new(hover.clone(), walk.n_max())?;
                (Some(walk), Some(waits))
            }
        };
        Ok(Self { model, lambda0, walk, waits })
    }

    /// The net-displacement law at `t` when the density needs a tabulated
    /// one; `None` for the closed-form models and for degenerate times.
    fn displacement_at(&self, t: f64) -> Result<Option<NetDisplacementDistribution>, RateError> {
        if t <= 0.0 {
            return Ok(None);
        }
        let v = self.model.speed();
        Ok(match self.model {
            MobilityModelSpec::StraightLine { .. } | MobilityModelSpec::RandomStop { .. } => None,
            MobilityModelSpec::RandomWalk { .. } => {
                Some(rw_displacement(self.walk.as_ref().unwrap(), v, t)?)
            }
            MobilityModelSpec::RandomWaypoint { .. } => Some(rwp_displacement(
                self.walk.as_ref().unwrap(),
                self.waits.as_ref().unwrap(),
                v,
                t,
            )?),
        })
    }

    fn density_at(
        &self,
        u0: f64,
        t: f64,
        disp: Option<&NetDisplacementDistribution>,
    ) -> Result<InterfererDensity, ParameterError> {
        if t <= 0.0 {
            // Nothing has moved yet; the exclusion disc is pristine.
            return uim_density(self.lambda0, u0);
        }
        let v = self.model.speed();
        match self.model {
            MobilityModelSpec::StraightLine { .. } => sl_density(self.lambda0, u0, v, t),
            MobilityModelSpec::RandomStop { flight, .. } => {
                rs_density(self.lambda0, u0, v, t, flight.clone())
            }
            _ => udm_density_general(
                self.lambda0,
                u0,
                t,
                disp.expect("walk models carry a displacement law").clone(),
            ),
        }
    }
}

fn check_transform_arg(s: f64) -> Result<(), ParameterError> {
    ensure_param!(s.is_finite() && s >= 0.0, "transform argument must be nonnegative, got {s}");
    Ok(())
}

fn validate_query(q: &RateQuery) -> Result<(), ParameterError> {
    ensure_param!(
        q.lambda0.is_finite() && q.lambda0 > 0.0,
        "ambient density must be positive, got {}",
        q.lambda0
    );
    ensure_param!(q.t.is_finite() && q.t >= 0.0, "time must be nonnegative, got {}", q.t);
    q.channel.validate()
}

/// The conditional SIR ccdf integrated over thresholds for one serving
/// distance: `int_0^inf P[SIR > gamma] / (1 + gamma) dgamma` after the
/// `gamma = e^y - 1` stretch. Returns the value and the last `y` covered.
fn threshold_integral(
    exp: &InterferenceExponent<'_>,
    r0: f64,
    m0: u32,
) -> Result<(f64, f64), RateError> {
    let mut y_max: f64 = 8.0;
    while exp.sir_ccdf(y_max.exp_m1(), r0, m0)? >= CCDF_FLOOR {
        y_max *= 2.0;
        if y_max > 512.0 {
            return Err(RateError::NonConvergence {
                what: "SIR ccdf tail",
                residual: y_max,
            });
        }
    }
    let failure = RefCell::new(None);
    let r = integrate(
        |y| match exp.sir_ccdf(y.exp_m1(), r0, m0) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        y_max,
        1e-10,
        RATE_REL,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if !r.converged {
        return Err(RateError::NonConvergence {
            what: "SIR threshold integral",
            residual: r.abs_error,
        });
    }
    Ok((r.value, y_max))
}

/// `R(t)` for a prepared factory; the service model decides both the
/// serving distance law's time shift and the interferer profile.
fn rate_at(
    factory: &DensityFactory<'_>,
    service: ServiceModel,
    ch: &ChannelParams,
    t: f64,
) -> Result<RateResult, RateError> {
    let lambda0 = factory.lambda0;
    let disp = match service {
        ServiceModel::Uim => None,
        ServiceModel::Udm => factory.displacement_at(t)?,
    };
    let v = factory.model.speed();
    let failure = RefCell::new(None);
    let gamma_max = Cell::new(0.0f64);
    // Serving-distance integral in q = pi lambda0 u0^2, weight e^{-q}.
    let outer = integrate(
        |q| {
            let inner = || -> Result<f64, RateError> {
                let u0 = (q / (PI * lambda0)).sqrt();
                let density = match service {
                    ServiceModel::Uim => uim_density(lambda0, u0)?,
                    ServiceModel::Udm => factory.density_at(u0, t, disp.as_ref())?,
                };
                let profile = build_profile(&density);
                let exp = InterferenceExponent::new(
                    profile.as_ref(),
                    density.saturation_radius(),
                    lambda0,
                    ch,
                );
                let serving_ground = match service {
                    ServiceModel::Uim => u0,
                    ServiceModel::Udm => (u0 - v * t).max(0.0),
                };
                let r0 = (serving_ground * serving_ground + ch.h * ch.h).sqrt();
                let (val, y_max) = threshold_integral(&exp, r0, ch.m0)?;
                gamma_max.set(gamma_max.get().max(y_max.exp_m1()));
                Ok(val)
            };
            match inner() {
                Ok(v) => (-q).exp() * v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        Q_MAX,
        1e-10,
        RATE_REL,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if !outer.converged {
        return Err(RateError::NonConvergence {
            what: "serving-distance integral",
            residual: outer.abs_error,
        });
    }
    Ok(RateResult {
        value: outer.value,
        abs_error: outer.abs_error,
        truncation: TruncationInfo {
            u0_max: (Q_MAX / (PI * lambda0)).sqrt(),
            gamma_max: gamma_max.get(),
        },
    })
}

/// Laplace transform of the interference and its first `k_max` derivatives
/// at `s`, conditioned on the given interferer profile.
pub fn conditional_laplace(
    s: f64,
    density: &InterfererDensity,
    ch: &ChannelParams,
    k_max: u32,
) -> Result<Vec<f64>, RateError> {
    check_transform_arg(s)?;
    ch.validate()?;
    let profile = build_profile(density);
    let exp = InterferenceExponent::new(
        profile.as_ref(),
        density.saturation_radius(),
        density.lambda0(),
        ch,
    );
    exp.laplace_derivs(s, k_max)
}

/// The transform's exponent `g` (so `L = e^{-g}`) and its derivatives up to
/// `j_max`, for differencing checks against the closed integrands.
pub fn interference_exponent(
    s: f64,
    density: &InterfererDensity,
    ch: &ChannelParams,
    j_max: u32,
) -> Result<Vec<f64>, RateError> {
    check_transform_arg(s)?;
    ch.validate()?;
    let profile = build_profile(density);
    let exp = InterferenceExponent::new(
        profile.as_ref(),
        density.saturation_radius(),
        density.lambda0(),
        ch,
    );
    let mut out = vec![exp.value(s)?];
    for j in 1..=j_max {
        out.push(exp.derivative(s, j)?);
    }
    Ok(out)
}

/// Average received rate at the query's time instant.
///
/// The generator seeds the walk-law fits for the turning models; straight
/// and stop-once interferers never touch it.
pub fn average_rate(q: &RateQuery, rng: &mut Rng) -> Result<RateResult, RateError> {
    validate_query(q)?;
    let factory = DensityFactory::new(&q.model, q.lambda0, q.model.speed() * q.t, rng)?;
    rate_at(&factory, q.service, &q.channel, q.t)
}

/// Session rate: the running average `(1/T) int_0^T R(t) dt`. The query's
/// own `t` field is ignored; `total_time` is the session length.
pub fn session_rate(
    q: &RateQuery,
    total_time: f64,
    rng: &mut Rng,
) -> Result<RateResult, RateError> {
    validate_query(q)?;
    fn check_length(total_time: f64) -> Result<(), ParameterError> {
        ensure_param!(
            total_time.is_finite() && total_time > 0.0,
            "session length must be positive, got {total_time}"
        );
        Ok(())
    }
    check_length(total_time)?;
    let factory =
        DensityFactory::new(&q.model, q.lambda0, q.model.speed() * total_time, rng)?;
    let failure = RefCell::new(None);
    let u0_max = Cell::new(0.0f64);
    let gamma_max = Cell::new(0.0f64);
    let r = integrate(
        |t| match rate_at(&factory, q.service, &q.channel, t) {
            Ok(r) => {
                u0_max.set(u0_max.get().max(r.truncation.u0_max));
                gamma_max.set(gamma_max.get().max(r.truncation.gamma_max));
                r.value
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        total_time,
        1e-10,
        SESSION_REL,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if !r.converged {
        return Err(RateError::NonConvergence {
            what: "session time average",
            residual: r.abs_error,
        });
    }
    Ok(RateResult {
        value: r.value / total_time,
        abs_error: r.abs_error / total_time,
        truncation: TruncationInfo { u0_max: u0_max.get(), gamma_max: gamma_max.get() },
    })
}
