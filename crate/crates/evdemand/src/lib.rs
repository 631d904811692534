//! Stochastic modeling of plug-in electric vehicle charging demand.
//!
//! A fleet of vehicles plugs in at random times `t0` and draws a constant
//! power `a` for a random duration `T`. The crate computes the expected
//! daily demand profile of one such session (and of fleets of them) two
//! independent ways:
//!
//! * analytically, through the arrival-time CDF convolved with the
//!   charge-time density ([`analytic`]), with a closed form for the
//!   Gaussian-arrival + uniform-duration case, and
//! * by Monte Carlo over reproducible per-session RNG streams
//!   ([`montecarlo`]).
//!
//! Charge-time laws live in [`dist`]: uniform, exponential, Gaussian,
//! positive-support (truncated) Gaussian, and Rician, each with density,
//! CDF, analytic moments, quantiles, samplers, and moment matching so
//! different laws can be compared at equal mean and variance.
//! [`scenario`] maps outlet hardware and commuting distances onto those
//! laws, and the `evdemand` binary exposes the whole pipeline as a CLI.

pub mod analytic;
pub mod cli;
pub mod config;
pub mod dist;
pub mod montecarlo;
pub mod profile;
pub mod quad;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod specfun;
pub mod svg;
