//! Per-drone trajectories for the four mobility models.
//!
//! Every interferer starts somewhere, picks a uniform random heading, and
//! flies at constant speed `v`. The models differ only in what happens after
//! the first flight:
//!
//! * **SL** (straight line): never turns.
//! * **RS** (random stop): one flight of random length, then hovers forever.
//! * **RW** (random walk): a fresh heading and flight length after each
//!   flight, with no pauses.
//! * **RWP** (random waypoint): like RW, but hovers for a random time before
//!   every flight, including an initial hover before the first.
//!
//! A [`Trajectory`] materializes the segment list for one drone over a time
//! horizon and answers position queries in `O(log #segments)`. The
//! `sample_*` functions draw the displacement of a fresh drone at a single
//! time without building the segment list, which is what the Monte Carlo
//! oracles loop over millions of times. Both paths consume random draws in
//! the same order (per segment: hover if any, then heading, then length), so
//! they can be cross-checked draw for draw.

use crate::dist::{ensure_param, ParameterError, ScalarDistribution};
use crate::rng::Rng;
use rand::Rng as _;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// One of the four mobility models, with its kinematic parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MobilityModelSpec {
    StraightLine { v: f64 },
    RandomStop { v: f64, flight: ScalarDistribution },
    RandomWalk { v: f64, flight: ScalarDistribution },
    RandomWaypoint { v: f64, flight: ScalarDistribution, hover: ScalarDistribution },
}

fn check_speed(v: f64) -> Result<(), ParameterError> {
    ensure_param!(v.is_finite() && v > 0.0, "speed must be positive, got {v}");
    Ok(())
}

fn check_flight(flight: &ScalarDistribution) -> Result<(), ParameterError> {
    let (lo, _) = flight.support();
    ensure_param!(
        lo >= 0.0 && flight.mean() > 0.0,
        "flight law must have nonnegative support and positive mean, got {flight:?}"
    );
    Ok(())
}

fn check_hover(hover: &ScalarDistribution) -> Result<(), ParameterError> {
    let (lo, _) = hover.support();
    ensure_param!(
        lo >= 0.0,
        "hover law must have nonnegative support, got {hover:?}"
    );
    Ok(())
}

impl MobilityModelSpec {
    pub fn straight_line(v: f64) -> Result<Self, ParameterError> {
        check_speed(v)?;
        Ok(Self::StraightLine { v })
    }

    pub fn random_stop(v: f64, flight: ScalarDistribution) -> Result<Self, ParameterError> {
        check_speed(v)?;
        check_flight(&flight)?;
        Ok(Self::RandomStop { v, flight })
    }

    pub fn random_walk(v: f64, flight: ScalarDistribution) -> Result<Self, ParameterError> {
        check_speed(v)?;
        check_flight(&flight)?;
        Ok(Self::RandomWalk { v, flight })
    }

    pub fn random_waypoint(
        v: f64,
        flight: ScalarDistribution,
        hover: ScalarDistribution,
    ) -> Result<Self, ParameterError> {
        check_speed(v)?;
        check_flight(&flight)?;
        check_hover(&hover)?;
        Ok(Self::RandomWaypoint { v, flight, hover })
    }

    pub fn speed(&self) -> f64 {
        match *self {
            Self::StraightLine { v }
            | Self::RandomStop { v, .. }
            | Self::RandomWalk { v, .. }
            | Self::RandomWaypoint { v, .. } => v,
        }
    }
}

/// One leg of a trajectory: hover in place for `pre_hover` seconds, then fly
/// `length` meters along heading `theta`.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub theta: f64,
    pub length: f64,
    pub pre_hover: f64,
}

/// A drone's full path over `[0, horizon]`, queryable at any time in range.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub origin: [f64; 2],
    pub segments: Vec<Segment>,
    pub v: f64,
    pub horizon: f64,
    // Per segment: time movement starts (hover already spent), position
    // there, and time movement ends. Movement start times are nondecreasing,
    // which is what the binary search in position_at relies on.
    move_starts: Vec<f64>,
    start_positions: Vec<[f64; 2]>,
}

impl Trajectory {
    /// Assembles a trajectory from explicit segments. The segments must
    /// cover `horizon` unless the path legitimately stops early (RS's
    /// permanent hover); queries past the last segment return its endpoint.
    pub fn from_segments(
        origin: [f64; 2],
        segments: Vec<Segment>,
        v: f64,
        horizon: f64,
    ) -> Result<Self, ParameterError> {
        check_speed(v)?;
        ensure_param!(horizon > 0.0 && horizon.is_finite(), "horizon must be positive, got {horizon}");
        ensure_param!(!segments.is_empty(), "a trajectory needs at least one segment");
        let mut move_starts = Vec::with_capacity(segments.len());
        let mut start_positions = Vec::with_capacity(segments.len());
        let mut t = 0.0;
        let mut pos = origin;
        for seg in &segments {
            ensure_param!(
                seg.pre_hover >= 0.0 && seg.length >= 0.0,
                "segment hover and length must be nonnegative, got {seg:?}"
            );
            t += seg.pre_hover;
            move_starts.push(t);
            start_positions.push(pos);
            t += seg.length / v;
            pos = [pos[0] + seg.length * seg.theta.cos(), pos[1] + seg.length * seg.theta.sin()];
        }
        Ok(Self { origin, segments, v, horizon, move_starts, start_positions })
    }

    /// Position at time `t` in `[0, horizon]`.
    pub fn position_at(&self, t: f64) -> Result<[f64; 2], ParameterError> {
        ensure_param!(
            (0.0..=self.horizon).contains(&t),
            "time {t} outside the trajectory horizon [0, {}]",
            self.horizon
        );
        // Last segment whose movement phase starts at or before t. If t
        // falls inside an earlier pre-hover this picks the previous segment
        // and the clamp below parks the position at its endpoint.
        let idx = match self.move_starts.partition_point(|&s| s <= t) {
            0 => return Ok(self.origin),
            k => k - 1,
        };
        let seg = &self.segments[idx];
        let travelled = (self.v * (t - self.move_starts[idx])).min(seg.length);
        let p = self.start_positions[idx];
        Ok([p[0] + travelled * seg.theta.cos(), p[1] + travelled * seg.theta.sin()])
    }

    /// Euclidean distance from the origin at time `t`; never exceeds `v t`.
    pub fn net_displacement(&self, t: f64) -> Result<f64, ParameterError> {
        let p = self.position_at(t)?;
        let dx = p[0] - self.origin[0];
        let dy = p[1] - self.origin[1];
        Ok((dx * dx + dy * dy).sqrt())
    }
}

/// Generates the trajectory of one drone under `model`, covering at least
/// `horizon` seconds of wall time (RS stops early by design and hovers at
/// its endpoint thereafter).
pub fn build_trajectory(
    model: &MobilityModelSpec,
    origin: [f64; 2],
    horizon: f64,
    rng: &mut Rng,
) -> Result<Trajectory, ParameterError> {
    ensure_param!(horizon > 0.0 && horizon.is_finite(), "horizon must be positive, got {horizon}");
    let v = model.speed();
    let mut segments = Vec::new();
    match model {
        MobilityModelSpec::StraightLine { .. } => {
            segments.push(Segment { theta: draw_heading(rng), length: f64::INFINITY, pre_hover: 0.0 });
        }
        MobilityModelSpec::RandomStop { flight, .. } => {
            let theta = draw_heading(rng);
            segments.push(Segment { theta, length: flight.sample(rng), pre_hover: 0.0 });
        }
        MobilityModelSpec::RandomWalk { flight, .. } => {
            let mut t = 0.0;
            while t < horizon {
                let theta = draw_heading(rng);
                let length = flight.sample(rng);
                segments.push(Segment { theta, length, pre_hover: 0.0 });
                t += length / v;
            }
        }
        MobilityModelSpec::RandomWaypoint { flight, hover, .. } => {
            let mut t = 0.0;
            while t < horizon {
                let pre_hover = hover.sample(rng);
                let theta = draw_heading(rng);
                let length = flight.sample(rng);
                segments.push(Segment { theta, length, pre_hover });
                t += pre_hover + length / v;
            }
        }
    }
    Trajectory::from_segments(origin, segments, v, horizon)
}

fn draw_heading(rng: &mut Rng) -> f64 {
    TWO_PI * rng.gen::<f64>()
}

/// Displacement vector of a fresh drone after time `t`, drawn without
/// materializing a [`Trajectory`]. Draw order matches [`build_trajectory`].
pub fn sample_displacement_vector(model: &MobilityModelSpec, t: f64, rng: &mut Rng) -> [f64; 2] {
    debug_assert!(t >= 0.0);
    let v = model.speed();
    match model {
        MobilityModelSpec::StraightLine { .. } => {
            let theta = draw_heading(rng);
            [v * t * theta.cos(), v * t * theta.sin()]
        }
        MobilityModelSpec::RandomStop { flight, .. } => {
            let theta = draw_heading(rng);
            let d = flight.sample(rng).min(v * t);
            [d * theta.cos(), d * theta.sin()]
        }
        MobilityModelSpec::RandomWalk { flight, .. } => {
            let mut pos = [0.0, 0.0];
            let mut remaining = v * t;
            while remaining > 0.0 {
                let theta = draw_heading(rng);
                let step = flight.sample(rng).min(remaining);
                pos[0] += step * theta.cos();
                pos[1] += step * theta.sin();
                remaining -= step;
            }
            pos
        }
        MobilityModelSpec::RandomWaypoint { flight, hover, .. } => {
            let mut pos = [0.0, 0.0];
            let mut budget = t;
            loop {
                budget -= hover.sample(rng);
                if budget <= 0.0 {
                    break;
                }
                let theta = draw_heading(rng);
                let step = flight.sample(rng).min(v * budget);
                pos[0] += step * theta.cos();
                pos[1] += step * theta.sin();
                budget -= step / v;
                if budget <= 0.0 {
                    break;
                }
            }
            pos
        }
    }
}

/// Net displacement magnitude of a fresh drone after time `t`.
pub fn sample_net_displacement(model: &MobilityModelSpec, t: f64, rng: &mut Rng) -> f64 {
    let [dx, dy] = sample_displacement_vector(model, t, rng);
    (dx * dx + dy * dy).sqrt()
}

/// Endpoint of a planar walk after exactly `n` flights with i.i.d. uniform
/// headings and i.i.d. lengths from `flight`. Time plays no role here; this
/// is the raw walk skeleton behind the per-flight-count laws.
pub fn sample_n_flight_walk(flight: &ScalarDistribution, n: usize, rng: &mut Rng) -> [f64; 2] {
    let mut pos = [0.0, 0.0];
    for _ in 0..n {
        let theta = draw_heading(rng);
        let r = flight.sample(rng);
        pos[0] += r * theta.cos();
        pos[1] += r * theta.sin();
    }
    pos
}

/// The serving drone's ground distance to the user under the
/// user-dedicated model: it flies straight at the user's zenith point and
/// hovers on arrival.
#[derive(Debug, Clone, Copy)]
pub struct ServingPathUdm {
    pub u0: f64,
    pub v: f64,
}

impl ServingPathUdm {
    pub fn new(u0: f64, v: f64) -> Result<Self, ParameterError> {
        check_speed(v)?;
        ensure_param!(u0.is_finite() && u0 >= 0.0, "initial distance must be nonnegative, got {u0}");
        Ok(Self { u0, v })
    }

    /// Ground distance at time `t`: `max(u0 - v t, 0)`.
    pub fn distance_at(&self, t: f64) -> f64 {
        (self.u0 - self.v * t).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::stats::chi_square_uniformity;

    fn rayleigh_500() -> ScalarDistribution {
        ScalarDistribution::rayleigh_from_mean(500.0).unwrap()
    }

    #[test]
    fn straight_line_kinematics() {
        let model = MobilityModelSpec::straight_line(12.5).unwrap();
        let mut rng = stream_rng(1, 0);
        let traj = build_trajectory(&model, [3.0, -4.0], 100.0, &mut rng).unwrap();
        let theta = traj.segments[0].theta;
        for t in [0.0, 7.5, 100.0] {
            let p = traj.position_at(t).unwrap();
            assert!((p[0] - (3.0 + 12.5 * t * theta.cos())).abs() < 1e-9);
            assert!((p[1] - (-4.0 + 12.5 * t * theta.sin())).abs() < 1e-9);
            assert!((traj.net_displacement(t).unwrap() - 12.5 * t).abs() < 1e-9);
        }
    }

    #[test]
    fn random_stop_caps_at_flight_length() {
        let model = MobilityModelSpec::random_stop(12.5, rayleigh_500()).unwrap();
        let mut rng = stream_rng(2, 0);
        for _ in 0..50 {
            let traj = build_trajectory(&model, [0.0, 0.0], 400.0, &mut rng).unwrap();
            let r = traj.segments[0].length;
            for t in [1.0f64, 40.0, 400.0] {
                let want = (12.5 * t).min(r);
                assert!((traj.net_displacement(t).unwrap() - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn random_walk_explicit_two_segments() {
        // 8 s east at 12.5 m/s covers the first 100 m leg, then 4 s north.
        let segs = vec![
            Segment { theta: 0.0, length: 100.0, pre_hover: 0.0 },
            Segment { theta: std::f64::consts::FRAC_PI_2, length: 100.0, pre_hover: 0.0 },
        ];
        let traj = Trajectory::from_segments([0.0, 0.0], segs, 12.5, 16.0).unwrap();
        let p = traj.position_at(12.0).unwrap();
        assert!((p[0] - 100.0).abs() < 1e-9 && (p[1] - 50.0).abs() < 1e-9);
        let want = (100.0f64 * 100.0 + 50.0 * 50.0).sqrt();
        assert!((traj.net_displacement(12.0).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn deterministic_random_walk_hits_waypoints_every_8_seconds() {
        let flight = ScalarDistribution::deterministic(100.0).unwrap();
        let model = MobilityModelSpec::random_walk(12.5, flight).unwrap();
        let traj = build_trajectory(&model, [0.0, 0.0], 50.0, &mut stream_rng(3, 0)).unwrap();
        for (i, seg) in traj.segments.iter().enumerate() {
            assert_eq!(seg.length, 100.0);
            let p = traj.position_at(8.0 * i as f64).unwrap();
            assert!((p[0] - traj.start_positions[i][0]).abs() < 1e-9);
            assert!((p[1] - traj.start_positions[i][1]).abs() < 1e-9);
        }
    }

    #[test]
    fn waypoint_hover_freezes_position() {
        let hover = ScalarDistribution::deterministic(10.0).unwrap();
        let model = MobilityModelSpec::random_waypoint(12.5, rayleigh_500(), hover).unwrap();
        let traj = build_trajectory(&model, [5.0, 5.0], 60.0, &mut stream_rng(4, 0)).unwrap();
        // The initial hover lasts 10 s, so nothing moves before then.
        for t in [0.0, 5.0, 9.99] {
            assert_eq!(traj.position_at(t).unwrap(), [5.0, 5.0]);
        }
        assert!(traj.net_displacement(10.5).unwrap() > 0.0);
    }

    #[test]
    fn net_displacement_never_exceeds_vt() {
        let mut rng = stream_rng(5, 0);
        let flight = rayleigh_500();
        let hover = ScalarDistribution::exponential(5.0).unwrap();
        let models = [
            MobilityModelSpec::straight_line(12.5).unwrap(),
            MobilityModelSpec::random_stop(12.5, flight).unwrap(),
            MobilityModelSpec::random_walk(12.5, flight).unwrap(),
            MobilityModelSpec::random_waypoint(12.5, flight, hover).unwrap(),
        ];
        for model in &models {
            for _ in 0..20 {
                let traj = build_trajectory(model, [0.0, 0.0], 200.0, &mut rng).unwrap();
                for t in [0.0, 13.7, 99.0, 200.0] {
                    let d = traj.net_displacement(t).unwrap();
                    assert!(d <= 12.5 * t + 1e-9, "{model:?}: d={d} > vt={}", 12.5 * t);
                }
            }
        }
    }

    #[test]
    fn position_is_continuous() {
        let hover = ScalarDistribution::exponential(5.0).unwrap();
        let model = MobilityModelSpec::random_waypoint(12.5, rayleigh_500(), hover).unwrap();
        let traj = build_trajectory(&model, [0.0, 0.0], 300.0, &mut stream_rng(6, 0)).unwrap();
        let dt = 0.01;
        let mut t = 0.0;
        while t + dt <= 300.0 {
            let a = traj.position_at(t).unwrap();
            let b = traj.position_at(t + dt).unwrap();
            let step = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            assert!(step <= 12.5 * dt + 1e-9, "jump of {step} at t={t}");
            t += dt;
        }
    }

    #[test]
    fn out_of_range_queries_error() {
        let model = MobilityModelSpec::straight_line(10.0).unwrap();
        let traj = build_trajectory(&model, [0.0, 0.0], 10.0, &mut stream_rng(7, 0)).unwrap();
        assert!(traj.position_at(-0.1).is_err());
        assert!(traj.position_at(10.1).is_err());
        assert!(traj.position_at(10.0).is_ok());
    }

    #[test]
    fn sampler_agrees_with_trajectory() {
        let flight = rayleigh_500();
        let hover = ScalarDistribution::exponential(5.0).unwrap();
        let models = [
            MobilityModelSpec::straight_line(12.5).unwrap(),
            MobilityModelSpec::random_stop(12.5, flight).unwrap(),
            MobilityModelSpec::random_walk(12.5, flight).unwrap(),
            MobilityModelSpec::random_waypoint(12.5, flight, hover).unwrap(),
        ];
        let t = 120.0;
        for model in &models {
            for i in 0..200u64 {
                let fast = sample_displacement_vector(model, t, &mut stream_rng(8, i));
                let traj = build_trajectory(model, [0.0, 0.0], t, &mut stream_rng(8, i)).unwrap();
                let p = traj.position_at(t).unwrap();
                let err = ((fast[0] - p[0]).powi(2) + (fast[1] - p[1]).powi(2)).sqrt();
                assert!(err < 1e-6, "{model:?} sampler drift {err} at stream {i}");
            }
        }
    }

    #[test]
    fn walk_bearings_are_uniform() {
        // The endpoint bearing after n flights stays uniform whatever the
        // flight law, exponential included.
        let flight = ScalarDistribution::exponential(500.0).unwrap();
        let mut rng = stream_rng(9, 0);
        let bearings: Vec<f64> = (0..20_000)
            .map(|_| {
                let p = sample_n_flight_walk(&flight, 5, &mut rng);
                p[1].atan2(p[0])
            })
            .collect();
        let p = chi_square_uniformity(&bearings, 36).unwrap();
        assert!(p > 0.01, "bearing chi-square p = {p}");
    }

    #[test]
    fn udm_serving_path_closes_and_holds() {
        let path = ServingPathUdm::new(500.0, 12.5).unwrap();
        assert_eq!(path.distance_at(0.0), 500.0);
        assert_eq!(path.distance_at(20.0), 250.0);
        assert_eq!(path.distance_at(40.0), 0.0);
        assert_eq!(path.distance_at(1000.0), 0.0);
    }

    #[test]
    fn model_constructors_validate() {
        let flight = rayleigh_500();
        assert!(MobilityModelSpec::straight_line(0.0).is_err());
        assert!(MobilityModelSpec::random_walk(12.5, ScalarDistribution::uniform(-1.0, 1.0).unwrap()).is_err());
        assert!(MobilityModelSpec::random_walk(12.5, ScalarDistribution::deterministic(0.0).unwrap()).is_err());
        assert!(MobilityModelSpec::random_waypoint(12.5, flight, ScalarDistribution::uniform(-2.0, -1.0).unwrap()).is_err());
        assert!(ServingPathUdm::new(-1.0, 12.5).is_err());
    }
}
