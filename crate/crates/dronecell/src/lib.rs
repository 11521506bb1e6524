//! Analysis of a cellular downlink served by a moving aerial base station.
//!
//! The station flies above a field of ground interferers whose initial
//! positions form a homogeneous Poisson process. As the tagged station moves,
//! every interferer moves too, independently, following one of four mobility
//! models (straight line, random stop, random walk, random waypoint). The
//! crate computes, analytically and by simulation:
//!
//! * the distribution of an interferer's net displacement after time `t`
//!   ([`displacement`]),
//! * the resulting time-varying density of interferers around the serving
//!   link, with the serving exclusion zone carved out ([`density`]),
//! * the downlink rate under Nakagami fading obtained by integrating the
//!   interference Laplace transform over that density ([`rate`]),
//! * Monte Carlo counterparts of all of the above ([`sim`]), and the
//!   statistical machinery to compare the two ([`stats`], [`validate`]).
//!
//! Everything is deterministic given a seed: the RNG layer ([`rng`]) hands
//! out independent counter-based streams so parallel runs reproduce exactly.

pub mod density;
pub mod displacement;
pub mod dist;
pub mod mobility;
pub mod quad;
pub mod rate;
pub mod rng;
pub mod sim;
pub mod special;
pub mod stats;
pub mod table;
pub mod validate;
pub mod walk;
