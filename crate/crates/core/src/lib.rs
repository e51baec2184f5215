//! Convergence of the drunkard's walk on the unit sphere, measured in the
//! spherical-cap discrepancy metric.
//!
//! The walk starts at the north pole and at each step moves a geodesic
//! distance `theta` in a uniformly random direction. Because the generating
//! measure is bi-invariant under rotations fixing the pole, the law after `k`
//! steps has a zonal Fourier expansion whose coefficients are powers of
//! Legendre polynomials. This crate evaluates that expansion with certified
//! truncation, searches it for the discrepancy `D(k)`, simulates the four
//! equivalent walk formulations, and computes the classical upper and lower
//! bounds on `D(k)`.

pub mod discrepancy;
pub mod error;
pub mod legendre;
pub mod output;
pub mod quadrature;
pub mod spectral;
pub mod sphere;
pub mod stats;
#[cfg(feature = "verify")]
pub mod verify;
pub mod walk;

pub use error::{Error, Result};

/// Run `f` over `items` in parallel when the `parallel` feature is enabled.
/// Output order always matches input order.
#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    items.iter().map(f).collect()
}

/// Run `f` on a dedicated pool of `threads` workers. Results never depend
/// on the worker count.
#[cfg(feature = "parallel")]
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(f)
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<T: Send>(_threads: usize, f: impl FnOnce() -> T + Send) -> T {
    f()
}
