//! Bistable reaction with a nonlocal diffusion operator on the exterior of a
//! compact obstacle in the plane.
//!
//! The pieces are an integrable or singular radial kernel ([`kernel`]), the
//! obstacle and its grid mask ([`geometry`], [`grid`]), the exterior operator
//! with an FFT fast path ([`operator`]), the reaction term ([`reaction`]), an
//! explicit time stepper ([`evolution`]), a one-dimensional travelling front
//! solver ([`wave`]) and a numerical check that steady states reached from a
//! planar front are identically one ([`liouville`]).

// `!(x > 0.0)` is how parameter checks reject NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolution;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod liouville;
pub mod operator;
pub mod quadrature;
pub mod reaction;
pub mod selftest;
pub mod wave;

pub use error::{Error, Result};
