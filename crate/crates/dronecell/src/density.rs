//! Intensity profiles of the interferer point process around the user.
//!
//! At the moment of association no interferer is closer to the user's zenith
//! point than the serving drone, so the interferers form a homogeneous PPP
//! with a disc of radius `u0` carved out. As each interferer then flies
//! independently of everything else, the displacement theorem keeps the
//! process Poisson; only its intensity changes, ramping from the emptied
//! disc back toward the ambient `lambda0` as drones wander in.
//!
//! The ramp shape follows from a disc-coverage argument. A drone sitting at
//! radius `u_x` at time `t` arrived there by a net hop of length `L`, drawn
//! from the mobility model's net-displacement law and pointing in a uniform
//! direction. The hop started inside the forbidden disc either because the
//! entire circle of origins lies inside it (`L <= u0 - u_x`) or with
//! probability equal to the arc fraction of origins that do. Subtracting
//! both from 1 gives the thinning factor `beta`, and `lambda = lambda0 *
//! beta` on the reachable band, `lambda0` beyond it.
//!
//! Two service behaviors use these profiles. Under [`ServiceModel::Uim`]
//! the user is always served by the currently nearest drone, so the
//! exclusion disc tracks the serving distance and the profile stays a sharp
//! step. Under [`ServiceModel::Udm`] the serving drone is pinned at
//! association time and the initial hole erodes as the other drones move.

use crate::dist::{ensure_param, ParameterError, ScalarDistribution};
use crate::displacement::NetDisplacementDistribution;
use crate::mobility::{sample_displacement_vector, MobilityModelSpec};
use crate::quad::integrate;
use crate::rng::{pack_stream, stream_rng};
use crate::table::linspace;
use rand::Rng as _;
use rand_distr::{Distribution as _, Poisson};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Absolute tolerance of the arc-weight quadrature in the flight-law path.
const BETA_QUAD_ABS: f64 = 1e-8;
/// Relative tolerance of expected-count integrals.
const MEASURE_REL: f64 = 1e-6;
/// Evaluation radii are nudged at least this far off the apex; a single
/// point carries no intensity mass, so the nudge is unobservable.
const MIN_RADIUS: f64 = 1e-9;

/// How the serving drone is chosen, which decides what the exclusion disc
/// does after association.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ServiceModel {
    /// Serve from the nearest drone at every instant.
    Uim,
    /// Keep the drone picked at association; it flies to the user's zenith
    /// point and hovers there.
    Udm,
}

/// Radially symmetric intensity of the interferer process at one instant.
pub struct InterfererDensity {
    service: ServiceModel,
    lambda0: f64,
    u0: f64,
    t: f64,
    kind: Kind,
}

enum Kind {
    /// Hard exclusion out to `threshold`, ambient beyond.
    Step { threshold: f64 },
    /// Every interferer has moved exactly `vt`.
    ClosedSl { vt: f64 },
    /// Every interferer has moved `min(R, vt)` for one draw of the flight
    /// law; the integral against `f_R` stays one-dimensional.
    ClosedRs { vt: f64, flight: ScalarDistribution },
    /// Arbitrary tabulated net-displacement law.
    General { disp: NetDisplacementDistribution },
}

impl InterfererDensity {
    pub fn service(&self) -> ServiceModel {
        self.service
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// The tabulated displacement law, when evaluation goes through one.
    pub fn displacement(&self) -> Option<&NetDisplacementDistribution> {
        match &self.kind {
            Kind::General { disp } => Some(disp),
            _ => None,
        }
    }

    /// Radius beyond which the profile equals `lambda0` identically.
    pub fn saturation_radius(&self) -> f64 {
        match &self.kind {
            Kind::Step { threshold } => *threshold,
            Kind::ClosedSl { vt } | Kind::ClosedRs { vt, .. } => self.u0 + vt,
            Kind::General { disp } => self.u0 + disp.max_distance(),
        }
    }

    /// Intensity at radius `u_x` from the user's zenith point.
    pub fn eval(&self, u_x: f64) -> f64 {
        let ux = u_x.max(0.0);
        let beta = match &self.kind {
            Kind::Step { threshold } => {
                if ux > *threshold {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::ClosedSl { vt } => sl_beta(self.u0, *vt, ux),
            Kind::ClosedRs { vt, flight } => rs_beta(flight, self.u0, *vt, ux),
            Kind::General { disp } => general_beta(disp, self.u0, ux),
        };
        self.lambda0 * beta
    }

    /// Expected interferer count in the annulus `a <= |x| <= b`.
    pub fn expected_count_between(&self, a: f64, b: f64) -> Result<f64, ParameterError> {
        ensure_param!(
            a.is_finite() && b.is_finite() && 0.0 <= a && a <= b,
            "annulus bounds must satisfy 0 <= a <= b, got [{a}, {b}]"
        );
        if a == b {
            return Ok(0.0);
        }
        let mut cuts: Vec<f64> = self
            .kink_radii()
            .into_iter()
            .filter(|k| *k > a && *k < b)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.insert(0, a);
        cuts.push(b);
        let eps_abs = 1e-9 * self.lambda0 * b * b;
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total += integrate(|u| u * self.eval(u), w[0], w[1], eps_abs, MEASURE_REL).value;
        }
        Ok(2.0 * PI * total)
    }

    /// Mean intensity over the annulus `a <= |x| <= b`, for bin-averaged
    /// comparisons against empirical histograms.
    pub fn annulus_mean(&self, a: f64, b: f64) -> Result<f64, ParameterError> {
        ensure_param!(b > a, "annulus needs positive width, got [{a}, {b}]");
        Ok(self.expected_count_between(a, b)? / (PI * (b * b - a * a)))
    }

    /// Radii where the profile changes analytic character: region edges,
    /// the never-moved step at `u0`, and atom tangency radii.
    fn kink_radii(&self) -> Vec<f64> {
        match &self.kind {
            Kind::Step { threshold } => vec![*threshold],
            Kind::ClosedSl { vt } | Kind::ClosedRs { vt, .. } => {
                vec![(self.u0 - vt).abs(), self.u0, self.u0 + vt]
            }
            Kind::General { disp } => {
                let vt = disp.max_distance();
                let mut ks = vec![(self.u0 - vt).abs(), self.u0, self.u0 + vt];
                for &(loc, _) in disp.atoms() {
                    for k in [self.u0 - loc, self.u0 + loc, loc - self.u0] {
                        if k > 0.0 {
                            ks.push(k);
                        }
                    }
                }
                ks
            }
        }
    }
}

/// Fraction of hop directions that land a hop of length `l`, launched from
/// radius `ux`, inside the disc of radius `u0` around the origin. Hits 1
/// when the whole circle of landings is swallowed and 0 once it clears.
fn arc_inside(l: f64, ux: f64, u0: f64) -> f64 {
    let l = l.max(MIN_RADIUS);
    let c = ((l * l + ux * ux - u0 * u0) / (2.0 * l * ux)).clamp(-1.0, 1.0);
    c.acos() / PI
}

fn sl_beta(u0: f64, vt: f64, ux: f64) -> f64 {
    if ux >= u0 + vt {
        return 1.0;
    }
    if ux <= (u0 - vt).abs() {
        // Inside the displaced band nothing survives until the serving
        // drone's own travel time has elapsed; after that the hole has
        // swept past and every heading keeps the interferer clear.
        return if vt > u0 { 1.0 } else { 0.0 };
    }
    1.0 - arc_inside(vt, ux.max(MIN_RADIUS), u0)
}

fn rs_beta(flight: &ScalarDistribution, u0: f64, vt: f64, ux: f64) -> f64 {
    if ux >= u0 + vt {
        return 1.0;
    }
    if ux <= (u0 - vt).abs() && vt <= u0 {
        return 0.0;
    }
    let ux = ux.max(MIN_RADIUS);
    let r = vt.min(ux + u0);
    let lo = (ux - u0).abs();
    // Flights decided by time `t`: stopped drones moved exactly their
    // flight length; the rest have moved `vt` so far, one closed arc term.
    let mut outside =
        flight.cdf(ux - u0) + (1.0 - flight.cdf(r)) * (1.0 - arc_inside(r, ux, u0));
    if r > lo {
        outside += integrate(
            |l| flight.pdf(l) * (1.0 - arc_inside(l, ux, u0)),
            lo,
            r,
            BETA_QUAD_ABS,
            1e-12,
        )
        .value;
    }
    outside.clamp(0.0, 1.0)
}

fn general_beta(disp: &NetDisplacementDistribution, u0: f64, ux: f64) -> f64 {
    let vt = disp.max_distance();
    if ux >= u0 + vt {
        return 1.0;
    }
    if ux <= (u0 - vt).abs() && vt <= u0 {
        return 0.0;
    }
    let ux = ux.max(MIN_RADIUS);
    let lo = (ux - u0).abs();
    let hi = vt.min(ux + u0);
    // Hops too short for any heading to escape the disc. This counts an
    // atom sitting exactly at the tangency length `u0 - ux`, whose arc
    // weight would be 1 anyway, so the strict bound below cannot re-add it.
    let mut inside = disp.cdf(u0 - ux);
    if hi > lo {
        for &(loc, mass) in disp.atoms() {
            if loc > lo && loc <= hi {
                inside += mass * arc_inside(loc, ux, u0);
            }
        }
        inside += disp.integrate_weighted(lo, hi, |l| arc_inside(l, ux, u0));
    }
    (1.0 - inside).clamp(0.0, 1.0)
}

/// Profile when the user is re-served by the nearest drone at every
/// instant: ambient beyond the serving distance `u0_t`, empty inside.
pub fn uim_density(lambda0: f64, u0_t: f64) -> Result<InterfererDensity, ParameterError> {
    ensure_param!(
        lambda0.is_finite() && lambda0 > 0.0,
        "ambient density must be positive, got {lambda0}"
    );
    ensure_param!(
        u0_t.is_finite() && u0_t >= 0.0,
        "serving distance must be nonnegative, got {u0_t}"
    );
    Ok(InterfererDensity {
        service: ServiceModel::Uim,
        lambda0,
        u0: u0_t,
        t: 0.0,
        kind: Kind::Step { threshold: u0_t },
    })
}

fn check_udm_inputs(lambda0: f64, u0: f64, t: f64) -> Result<(), ParameterError> {
    ensure_param!(
        lambda0.is_finite() && lambda0 > 0.0,
        "ambient density must be positive, got {lambda0}"
    );
    ensure_param!(
        u0.is_finite() && u0 >= 0.0,
        "initial serving distance must be nonnegative, got {u0}"
    );
    ensure_param!(t.is_finite() && t >= 0.0, "time must be nonnegative, got {t}");
    Ok(())
}

/// Profile under the pinned-serving model for an arbitrary tabulated
/// net-displacement law.
pub fn udm_density_general(
    lambda0: f64,
    u0: f64,
    t: f64,
    disp: NetDisplacementDistribution,
) -> Result<InterfererDensity, ParameterError> {
    check_udm_inputs(lambda0, u0, t)?;
    ensure_param!(
        (disp.t() - t).abs() <= 1e-9 * t.max(1.0),
        "displacement law is for t = {}, not t = {t}",
        disp.t()
    );
    let vt = disp.max_distance();
    for &(loc, mass) in disp.atoms() {
        ensure_param!(
            loc <= vt * (1.0 + 1e-12),
            "displacement law puts mass {mass} at {loc}, beyond the reachable {vt}"
        );
    }
    Ok(InterfererDensity {
        service: ServiceModel::Udm,
        lambda0,
        u0,
        t,
        kind: Kind::General { disp },
    })
}

/// Closed-form profile when every interferer flies straight.
pub fn sl_density(
    lambda0: f64,
    u0: f64,
    v: f64,
    t: f64,
) -> Result<InterfererDensity, ParameterError> {
    check_udm_inputs(lambda0, u0, t)?;
    ensure_param!(v.is_finite() && v > 0.0, "speed must be positive, got {v}");
    Ok(InterfererDensity {
        service: ServiceModel::Udm,
        lambda0,
        u0,
        t,
        kind: Kind::ClosedSl { vt: v * t },
    })
}

/// Profile when every interferer flies one random-length leg and stops.
pub fn rs_density(
    lambda0: f64,
    u0: f64,
    v: f64,
    t: f64,
    flight: ScalarDistribution,
) -> Result<InterfererDensity, ParameterError> {
    check_udm_inputs(lambda0, u0, t)?;
    ensure_param!(v.is_finite() && v > 0.0, "speed must be positive, got {v}");
    let (lo, _) = flight.support();
    ensure_param!(
        lo >= 0.0,
        "flight law must have nonnegative support, got {flight:?}"
    );
    Ok(InterfererDensity {
        service: ServiceModel::Udm,
        lambda0,
        u0,
        t,
        kind: Kind::ClosedRs { vt: v * t, flight },
    })
}

/// Expected interferer count in the disc of radius `radius` around the
/// user's zenith point.
pub fn intensity_measure(
    density: &InterfererDensity,
    radius: f64,
) -> Result<f64, ParameterError> {
    ensure_param!(
        radius.is_finite() && radius > 0.0,
        "disc radius must be positive, got {radius}"
    );
    density.expected_count_between(0.0, radius)
}

/// Per-annulus intensity estimates from repeated simulation.
#[derive(Debug, Clone)]
pub struct RadialHistogram {
    edges: Vec<f64>,
    density: Vec<f64>,
}

impl RadialHistogram {
    pub(crate) fn from_parts(edges: Vec<f64>, density: Vec<f64>) -> Self {
        debug_assert_eq!(edges.len(), density.len() + 1);
        Self { edges, density }
    }

    /// Annulus boundaries, `bins + 1` ascending radii starting at 0.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Estimated intensity per annulus, in drones per square meter.
    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn bins(&self) -> usize {
        self.density.len()
    }

    /// Largest deviation between the estimates and an annulus-averaged
    /// reference profile.
    pub fn sup_deviation(
        &self,
        reference: &InterfererDensity,
    ) -> Result<f64, ParameterError> {
        let mut worst: f64 = 0.0;
        for (i, est) in self.density.iter().enumerate() {
            let want = reference.annulus_mean(self.edges[i], self.edges[i + 1])?;
            worst = worst.max((est - want).abs());
        }
        Ok(worst)
    }
}

/// Estimates the displaced-process intensity by brute force: drop a PPP
/// outside the exclusion disc, fly every drone independently for `t`
/// seconds, and histogram the landing radii over `[0, r_max]`.
///
/// Realizations run on parallel RNG streams keyed by `seed`; counts are
/// integers, so the estimate is identical for any thread schedule.
#[allow(clippy::too_many_arguments)]
pub fn empirical_density_oracle(
    model: &MobilityModelSpec,
    lambda0: f64,
    u0: f64,
    t: f64,
    r_max: f64,
    bins: usize,
    realizations: usize,
    seed: u64,
) -> Result<RadialHistogram, ParameterError> {
    ensure_param!(
        lambda0.is_finite() && lambda0 > 0.0,
        "ambient density must be positive, got {lambda0}"
    );
    ensure_param!(u0.is_finite() && u0 >= 0.0, "exclusion radius must be nonnegative, got {u0}");
    ensure_param!(t.is_finite() && t >= 0.0, "time must be nonnegative, got {t}");
    ensure_param!(r_max.is_finite() && r_max > 0.0, "histogram range must be positive, got {r_max}");
    ensure_param!(bins >= 1, "need at least one bin");
    ensure_param!(realizations >= 1, "need at least one realization");

    // Drones beyond r_max + vt cannot reach the histogram range.
    let window = r_max + model.speed() * t;
    let edges = linspace(0.0, r_max, bins);
    let mut density = vec![0.0; bins];
    if window <= u0 {
        return Ok(RadialHistogram { edges, density });
    }
    let mean_count = lambda0 * PI * (window * window - u0 * u0);
    let poisson = Poisson::new(mean_count)
        .map_err(|e| ParameterError(format!("degenerate point count law: {e}")))?;
    let inv_width = bins as f64 / r_max;
    let u0_sq = u0 * u0;
    let span_sq = window * window - u0_sq;
    let r_max_sq = r_max * r_max;

    let counts: Vec<u64> = (0..realizations)
        .into_par_iter()
        .map(|ri| {
            let mut rng = stream_rng(seed, pack_stream(ri as u64, 0));
            let mut local = vec![0u64; bins];
            let n = poisson.sample(&mut rng) as u64;
            for _ in 0..n {
                // Radius of a uniform point on the annulus; its angle is
                // irrelevant because the displacement is isotropic.
                let r = (u0_sq + rng.gen::<f64>() * span_sq).sqrt();
                let [dx, dy] = sample_displacement_vector(model, t, &mut rng);
                let x = r + dx;
                let l_sq = x * x + dy * dy;
                if l_sq < r_max_sq {
                    let idx = ((l_sq.sqrt() * inv_width) as usize).min(bins - 1);
                    local[idx] += 1;
                }
            }
            local
        })
        .reduce(
            || vec![0u64; bins],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                a
            },
        );

    for (i, d) in density.iter_mut().enumerate() {
        let area = PI * (edges[i + 1] * edges[i + 1] - edges[i] * edges[i]);
        *d = counts[i] as f64 / (realizations as f64 * area);
    }
    Ok(RadialHistogram { edges, density })
}

/// Per-realization interferer counts inside the disc of radius `radius`
/// after displacement, for dispersion checks on the displaced process.
pub fn empirical_disc_counts(
    model: &MobilityModelSpec,
    lambda0: f64,
    u0: f64,
    t: f64,
    radius: f64,
    realizations: usize,
    seed: u64,
) -> Result<Vec<u64>, ParameterError> {
    ensure_param!(
        lambda0.is_finite() && lambda0 > 0.0,
        "ambient density must be positive, got {lambda0}"
    );
    ensure_param!(u0.is_finite() && u0 >= 0.0, "exclusion radius must be nonnegative, got {u0}");
    ensure_param!(t.is_finite() && t >= 0.0, "time must be nonnegative, got {t}");
    ensure_param!(radius.is_finite() && radius > 0.0, "disc radius must be positive, got {radius}");
    ensure_param!(realizations >= 1, "need at least one realization");

    let window = radius + model.speed() * t;
    if window <= u0 {
        return Ok(vec![0; realizations]);
    }
    let mean_count = lambda0 * PI * (window * window - u0 * u0);
    let poisson = Poisson::new(mean_count)
        .map_err(|e| ParameterError(format!("degenerate point count law: {e}")))?;
    let u0_sq = u0 * u0;
    let span_sq = window * window - u0_sq;
    let radius_sq = radius * radius;

    Ok((0..realizations)
        .into_par_iter()
        .map(|ri| {
            let mut rng = stream_rng(seed, pack_stream(ri as u64, 0));
            let mut inside = 0u64;
            let n = poisson.sample(&mut rng) as u64;
            for _ in 0..n {
                let r = (u0_sq + rng.gen::<f64>() * span_sq).sqrt();
                let [dx, dy] = sample_displacement_vector(model, t, &mut rng);
                let x = r + dx;
                if x * x + dy * dy < radius_sq {
                    inside += 1;
                }
            }
            inside
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::displacement::{
        circular_arc_displacement, rs_displacement, rw_displacement, rwp_displacement,
        sl_displacement,
    };
    use crate::rng::stream_rng;
    use crate::walk::{FlightWalkLaw, WaitLaw};

    const LAMBDA0: f64 = 1e-6;

    fn rayleigh_500() -> ScalarDistribution {
        ScalarDistribution::rayleigh_from_mean(500.0).unwrap()
    }

    #[test]
    fn uim_profile_is_a_step_with_annulus_count() {
        let d = uim_density(LAMBDA0, 500.0).unwrap();
        assert_eq!(d.eval(600.0), LAMBDA0);
        assert_eq!(d.eval(400.0), 0.0);
        assert_eq!(d.eval(500.0), 0.0);
        let count = intensity_measure(&d, 1000.0).unwrap();
        let want = LAMBDA0 * PI * (1000.0f64.powi(2) - 500.0f64.powi(2));
        assert!((count - want).abs() <= 1e-6 * want, "count {count} vs {want}");
        assert!((want - 2.356_194_490_192_345).abs() < 1e-9);

        let open = uim_density(LAMBDA0, 0.0).unwrap();
        assert_eq!(open.eval(0.001), LAMBDA0);
        let full = intensity_measure(&open, 750.0).unwrap();
        let disc = LAMBDA0 * PI * 750.0f64.powi(2);
        assert!((full - disc).abs() <= 1e-9 * disc);
    }

    #[test]
    fn sl_closed_form_hits_known_values() {
        // vt = 500 at u0 = 500: the displaced circle through u_x = 500
        // subtends acos(-1/2), leaving two thirds of the headings clear.
        let d = sl_density(LAMBDA0, 500.0, 12.5, 40.0).unwrap();
        assert!((d.eval(500.0) - LAMBDA0 * 2.0 / 3.0).abs() < 1e-12 * LAMBDA0);
        assert_eq!(d.eval(1000.0), LAMBDA0);
        assert_eq!(d.eval(1200.0), LAMBDA0);

        // Short flight, t < u0 / v: the band has not reached u_x = 200 yet.
        let early = sl_density(LAMBDA0, 500.0, 12.5, 20.0).unwrap();
        assert_eq!(early.eval(200.0), 0.0);
        assert_eq!(early.eval(250.0), 0.0);

        // Long flight, t > u0 / v: the hole has swept past the center.
        let late = sl_density(LAMBDA0, 500.0, 12.5, 200.0).unwrap();
        assert_eq!(late.eval(100.0), LAMBDA0);
    }

    #[test]
    fn sl_profile_is_continuous_at_region_edges() {
        for t in [20.0, 40.0, 50.0, 200.0] {
            let d = sl_density(LAMBDA0, 500.0, 12.5, t).unwrap();
            let vt = 12.5 * t;
            for edge in [(500.0 - vt).abs(), 500.0 + vt] {
                if edge == 0.0 {
                    continue;
                }
                let below = d.eval(edge * (1.0 - 1e-13));
                let above = d.eval(edge * (1.0 + 1e-13));
                assert!(
                    (below - above).abs() <= 1e-6 * LAMBDA0,
                    "jump {} at edge {edge}, t = {t}",
                    (below - above).abs()
                );
            }
        }
    }

    #[test]
    fn rs_with_endless_flights_reduces_to_sl() {
        let never_stop = ScalarDistribution::rayleigh(1e12).unwrap();
        let rs = rs_density(LAMBDA0, 500.0, 12.5, 40.0, never_stop).unwrap();
        let sl = sl_density(LAMBDA0, 500.0, 12.5, 40.0).unwrap();
        for i in 0..=200 {
            let ux = 1100.0 * i as f64 / 200.0;
            assert!(
                (rs.eval(ux) - sl.eval(ux)).abs() <= 1e-9 * LAMBDA0,
                "diverged at u_x = {ux}"
            );
        }
    }

    #[test]
    fn rs_profile_stops_evolving_once_flights_are_spent() {
        // With vt at 10x the mean flight length nearly every drone has
        // stopped, so doubling t must not move the profile.
        let a = rs_density(LAMBDA0, 500.0, 12.5, 400.0, rayleigh_500()).unwrap();
        let b = rs_density(LAMBDA0, 500.0, 12.5, 800.0, rayleigh_500()).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..=150 {
            let ux = 2000.0 * i as f64 / 150.0;
            worst = worst.max((a.eval(ux) - b.eval(ux)).abs());
        }
        assert!(worst <= 1e-3 * LAMBDA0, "profile moved by {worst}");
    }

    #[test]
    fn general_path_reproduces_the_closed_forms() {
        // Straight-line law is a pure atom, so the general evaluator's atom
        // arc must coincide with the closed form to rounding.
        let sl_disp = sl_displacement(12.5, 40.0).unwrap();
        let gen_sl = udm_density_general(LAMBDA0, 500.0, 40.0, sl_disp).unwrap();
        let sl = sl_density(LAMBDA0, 500.0, 12.5, 40.0).unwrap();
        for i in 0..=220 {
            let ux = 1100.0 * i as f64 / 220.0;
            assert!(
                (gen_sl.eval(ux) - sl.eval(ux)).abs() <= 1e-12 * LAMBDA0,
                "atom path diverged at u_x = {ux}"
            );
        }

        // The stop-law puts its continuous part on the tabulated grid; the
        // comparison bounds the tabulation error of the general path.
        let rs_disp = rs_displacement(&rayleigh_500(), 12.5, 40.0).unwrap();
        let gen_rs = udm_density_general(LAMBDA0, 500.0, 40.0, rs_disp).unwrap();
        let rs = rs_density(LAMBDA0, 500.0, 12.5, 40.0, rayleigh_500()).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..=220 {
            let ux = 1100.0 * i as f64 / 220.0;
            worst = worst.max((gen_rs.eval(ux) - rs.eval(ux)).abs());
        }
        assert!(worst <= 5e-4 * LAMBDA0, "tabulated path off by {worst}");
    }

    #[test]
    fn udm_at_vanishing_time_matches_uim() {
        let disp = sl_displacement(12.5, 1e-6).unwrap();
        let udm = udm_density_general(LAMBDA0, 500.0, 1e-6, disp).unwrap();
        let uim = uim_density(LAMBDA0, 500.0).unwrap();
        for i in 0..=200 {
            let ux = 1000.0 * i as f64 / 200.0;
            if (ux - 500.0).abs() < 1e-3 {
                continue;
            }
            assert!(
                (udm.eval(ux) - uim.eval(ux)).abs() <= 1e-4 * LAMBDA0,
                "mismatch at u_x = {ux}"
            );
        }
    }

    #[test]
    fn tiny_exclusion_disc_means_homogeneous_interferers() {
        let disp = rs_displacement(&rayleigh_500(), 12.5, 40.0).unwrap();
        let d = udm_density_general(LAMBDA0, 1e-3, 40.0, disp).unwrap();
        for i in 1..=100 {
            let ux = 1000.0 * i as f64 / 100.0;
            assert!(
                (d.eval(ux) / LAMBDA0 - 1.0).abs() <= 1e-3,
                "beta strayed from 1 at u_x = {ux}"
            );
        }
    }

    #[test]
    fn walk_profiles_stay_bounded_and_continuous() {
        let law = FlightWalkLaw::for_horizon(rayleigh_500(), 625.0, &mut stream_rng(11, 0))
            .unwrap();
        let waits =
            WaitLaw::new(ScalarDistribution::exponential(5.0).unwrap(), law.n_max()).unwrap();
        let rw = udm_density_general(
            LAMBDA0,
            500.0,
            50.0,
            rw_displacement(&law, 12.5, 50.0).unwrap(),
        )
        .unwrap();
        let rwp = udm_density_general(
            LAMBDA0,
            500.0,
            50.0,
            rwp_displacement(&law, &waits, 12.5, 50.0).unwrap(),
        )
        .unwrap();
        for d in [&rw, &rwp] {
            for i in 0..=300 {
                let ux = 1200.0 * i as f64 / 300.0;
                let lam = d.eval(ux);
                assert!(
                    (0.0..=LAMBDA0 * (1.0 + 1e-12)).contains(&lam),
                    "intensity {lam} out of range at u_x = {ux}"
                );
            }
            assert_eq!(d.eval(1125.0), LAMBDA0);
            for edge in [125.0f64, 1125.0] {
                let below = d.eval(edge * (1.0 - 1e-13));
                let above = d.eval(edge * (1.0 + 1e-13));
                assert!(
                    (below - above).abs() <= 1e-6 * LAMBDA0,
                    "jump at edge {edge}"
                );
            }
        }
    }

    #[test]
    fn straight_flight_empties_the_largest_disc() {
        // Expected counts in b(o', u0 + vt): straight flight keeps the most
        // drones out; every law that can stop or turn back-fills the disc.
        let u0 = 500.0;
        let t = 40.0;
        let rho = u0 + 12.5 * t;
        let law = FlightWalkLaw::for_horizon(rayleigh_500(), 500.0, &mut stream_rng(12, 0))
            .unwrap();
        let waits =
            WaitLaw::new(ScalarDistribution::exponential(5.0).unwrap(), law.n_max()).unwrap();
        let sl = intensity_measure(&sl_density(LAMBDA0, u0, 12.5, t).unwrap(), rho).unwrap();
        let others = [
            rs_density(LAMBDA0, u0, 12.5, t, rayleigh_500()).unwrap(),
            udm_density_general(LAMBDA0, u0, t, rw_displacement(&law, 12.5, t).unwrap())
                .unwrap(),
            udm_density_general(
                LAMBDA0,
                u0,
                t,
                rwp_displacement(&law, &waits, 12.5, t).unwrap(),
            )
            .unwrap(),
            udm_density_general(
                LAMBDA0,
                u0,
                t,
                circular_arc_displacement(800.0, 12.5, t).unwrap(),
            )
            .unwrap(),
        ];
        for d in &others {
            let m = intensity_measure(d, rho).unwrap();
            assert!(
                sl <= m * (1.0 + 1e-3),
                "straight-line count {sl} not minimal against {m}"
            );
        }
    }

    #[test]
    fn oracle_matches_sl_closed_form_at_spec_scale() {
        let model = MobilityModelSpec::straight_line(12.5).unwrap();
        let hist =
            empirical_density_oracle(&model, 1e-3, 500.0, 40.0, 1000.0, 50, 20_000, 101)
                .unwrap();
        let reference = sl_density(1e-3, 500.0, 12.5, 40.0).unwrap();
        let worst = hist.sup_deviation(&reference).unwrap();
        assert!(worst <= 0.03 * 1e-3, "sup deviation {worst}");
    }

    #[test]
    fn oracle_at_time_zero_shows_the_bare_hole() {
        let model = MobilityModelSpec::straight_line(12.5).unwrap();
        let hist = empirical_density_oracle(&model, 1e-3, 500.0, 0.0, 1000.0, 50, 2000, 7).unwrap();
        for (i, d) in hist.density().iter().enumerate() {
            let hi = hist.edges()[i + 1];
            if hi <= 500.0 {
                assert_eq!(*d, 0.0, "count inside the untouched hole, bin {i}");
            } else if hist.edges()[i] >= 500.0 {
                assert!((d - 1e-3).abs() <= 0.02 * 1e-3, "ambient bin {i} off: {d}");
            }
        }
    }

    #[test]
    fn oracle_is_deterministic_per_seed() {
        let model = MobilityModelSpec::random_walk(12.5, rayleigh_500()).unwrap();
        let a = empirical_density_oracle(&model, 1e-4, 300.0, 20.0, 600.0, 20, 200, 42).unwrap();
        let b = empirical_density_oracle(&model, 1e-4, 300.0, 20.0, 600.0, 20, 200, 42).unwrap();
        assert_eq!(a.density(), b.density());
        let c = empirical_density_oracle(&model, 1e-4, 300.0, 20.0, 600.0, 20, 200, 43).unwrap();
        assert_ne!(a.density(), c.density());
    }

    #[test]
    fn displaced_counts_stay_poisson_dispersed() {
        let model = MobilityModelSpec::random_stop(12.5, rayleigh_500()).unwrap();
        let counts =
            empirical_disc_counts(&model, 1e-4, 500.0, 40.0, 1500.0, 4000, 77).unwrap();
        let (_, _, ratio) = crate::stats::dispersion(&counts);
        assert!((0.9..=1.1).contains(&ratio), "dispersion {ratio}");
    }

    #[test]
    fn constructors_reject_inconsistent_inputs() {
        assert!(uim_density(0.0, 500.0).is_err());
        assert!(uim_density(LAMBDA0, -1.0).is_err());
        assert!(sl_density(LAMBDA0, 500.0, 0.0, 40.0).is_err());
        assert!(sl_density(LAMBDA0, 500.0, 12.5, -1.0).is_err());
        let disp = rs_displacement(&rayleigh_500(), 12.5, 40.0).unwrap();
        assert!(udm_density_general(LAMBDA0, 500.0, 41.0, disp).is_err());
        let d = sl_density(LAMBDA0, 500.0, 12.5, 40.0).unwrap();
        assert!(intensity_measure(&d, 0.0).is_err());
        assert!(d.expected_count_between(300.0, 200.0).is_err());
    }
}
