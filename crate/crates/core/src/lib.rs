//! Generic identifiability of Segre-Veronese varieties.
//!
//! A Segre-Veronese variety is the image of a product of projective spaces
//! under a multi-degree monomial embedding; its points are the rank-one
//! partially symmetric tensors. This crate decides, format by format,
//! whether the generic tensor of that shape can have a unique rank
//! decomposition, and verifies the surrounding geometry numerically:
//!
//! * [`classifier`] — exact integer/rational numerology of a format
//!   `(n, d)` and the sufficient criterion for non-identifiability
//!   (`d_i > n_i + 1` for all factors together with a generic rank larger
//!   than twice the variety dimension).
//! * [`embedding`] — the monomial parametrization, its chart Jacobian and
//!   the Hessians of pulled-back linear forms, generic over the scalar
//!   field.
//! * [`terracini`] — secant dimensions and defects measured by stacking
//!   tangent frames at random points, and the tangential linear system as
//!   the kernel of the stacked frame.
//! * [`contact`] — tangential weak defectiveness via common Hessian
//!   kernels of the tangential system.
//! * [`projection`] — tangential projections and the generic-finiteness
//!   necessary condition for identifiability.
//! * [`falsifier`] — empirical witnesses of non-identifiability from
//!   multi-start nonlinear least squares over the complex numbers.
//!
//! Rank decisions run in exact integer arithmetic by default; a floating
//! cross-check mode is available behind [`Mode::Float`]. Data-parallel
//! loops (scan grids, multi-start searches, defectivity scans) run on
//! rayon when the `parallel` feature (default) is enabled and fall back to
//! sequential execution without it.

pub mod classifier;
pub mod contact;
pub mod embedding;
mod error;
pub mod falsifier;
pub mod linalg;
pub mod projection;
mod scalar;
pub mod seed;
pub mod terracini;

pub use error::{Error, FitFailure};
pub use scalar::Scalar;

pub type Result<T> = std::result::Result<T, Error>;

/// Arithmetic backing the rank and kernel decisions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Fraction-free integer/rational elimination; ranks are certificates.
    Exact,
    /// SVD with a relative singular-value cutoff; cross-check only.
    Float,
}

/// Execution strategy for the data-parallel loops.
pub mod exec {
    /// How to run an indexed batch of independent jobs.
    ///
    /// `Rayon` degrades to sequential execution when the crate is built
    /// without the `parallel` feature. Results are collected in index
    /// order either way, so outputs never depend on scheduling.
    #[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
    pub enum Parallelism {
        #[default]
        Rayon,
        Sequential,
    }

    /// Maps `f` over `0..n`, preserving index order in the output.
    pub fn map_indexed<T, F>(par: Parallelism, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match par {
            Parallelism::Sequential => (0..n).map(f).collect(),
            Parallelism::Rayon => {
                #[cfg(feature = "parallel")]
                {
                    use rayon::prelude::*;
                    (0..n).into_par_iter().map(f).collect()
                }
                #[cfg(not(feature = "parallel"))]
                {
                    (0..n).map(f).collect()
                }
            }
        }
    }

    /// Sizes the global worker pool. `0` keeps the library default. Calling
    /// this more than once, or after the pool is in use, has no effect.
    pub fn configure_threads(threads: usize) {
        #[cfg(feature = "parallel")]
        if threads > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
        }
        #[cfg(not(feature = "parallel"))]
        let _ = threads;
    }
}
