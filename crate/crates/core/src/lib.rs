//! # dppss
//!
//! Determinantal point processes (DPPs) for subsampling: wavelet and
//! orthogonal-polynomial projection kernels on `[0,1]^d`, exact continuous
//! samplers, a continuous-to-discrete conversion that turns a projection
//! kernel into a low-rank discrete projection DPP on a dataset, and the
//! quadrature, coreset and minibatch estimators built on top.
//!
//! ## Layout
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`wavelets`] | Haar and Daubechies-2 scaling functions, dilated tensor wavelets |
//! | [`kernels`] | Rank-n projection kernels (wavelet index sets, Legendre OPE) |
//! | [`continuous_sampler`] | Stratified Haar sampler and the generic sequential projection sampler |
//! | [`density`] | Product-kernel KDE with Scott's bandwidth |
//! | [`discretize`] | Feature matrix, discrete projection DPP, exact discrete sampler, error functionals |
//! | [`estimators`] | Linear statistics, quadrature and coreset estimators, exact variances |
//! | [`oracle`] | Brute-force subset enumeration and total-variation checks |
//! | [`data`] | Datasets: trimodal GMM, MNIST IDX, CSV, PCA |
//! | [`experiments`] | Quadrature, k-means coreset and Pegasos drivers, CSV output |
//! | [`validation`] | Self-check suites behind `dppss validate` |
//!
//! ## Quick start
//!
//! ```rust
//! use dppss::kernels::{IndexMode, ProjectionKernel};
//! use dppss::wavelets::ScalingFunction;
//! use dppss::continuous_sampler;
//! use rand::SeedableRng;
//!
//! let kernel = ProjectionKernel::wavelet(ScalingFunction::haar(), 2, 1, IndexMode::Interior).unwrap();
//! assert_eq!(kernel.rank(), 4);
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let sample = continuous_sampler::sample(&kernel, &mut rng).unwrap();
//! assert_eq!(sample.len(), 4);
//! ```

pub mod continuous_sampler;
pub mod data;
pub mod density;
pub mod discretize;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod integrate;
pub mod kernels;
pub mod oracle;
pub mod rng;
pub mod stats;
pub mod validation;
pub mod wavelets;

pub use error::{Error, Result};
