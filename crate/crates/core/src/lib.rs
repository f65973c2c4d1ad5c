//! Discrete time-optimal synthesis functions, tracking differentiators with
//! lag compensation, and an active disturbance rejection control loop, plus the
//! plants, noise sources and scenario harness used to exercise them.

// `!(x > 0.0)` is used on purpose so NaN fails validation; 6.28 rad/s is the
// examples' literal frequency, not an approximation of 2 pi.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::approx_constant)]

pub mod adrc;
pub mod combin;
pub mod extract;
pub mod geometry;
pub mod harness;
pub mod plant;
pub mod timeopt;
