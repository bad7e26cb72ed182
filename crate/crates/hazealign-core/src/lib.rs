//! Core kernels for channel-wise color alignment of paired image datasets.
//!
//! Everything in this crate is pure computation over in-memory buffers:
//!
//! - [`image`]: the 8-bit RGB [`image::ImageBuffer`] all transforms and
//!   metrics operate on.
//! - [`stats`]: exact integer per-channel histograms and the derived
//!   mean/variance statistics. Aggregation is a commutative merge of
//!   integer bin counts, so parallel and sequential reductions agree
//!   bit for bit.
//! - [`gamma`]: the per-channel power-law transform
//!   `O = 255·(I/255)^(1/γ)`, its 256-entry lookup table, and a bisection
//!   solver that picks γ so a histogram's transformed mean hits a target.
//! - [`metrics`]: PSNR, windowed SSIM, multi-scale SSIM, smooth-L1, and
//!   the fixed-weight total-loss combiner.
//! - [`augment`]: seed-reproducible crop/rotate/flip plans that never
//!   touch pixel values, only positions.
//!
//! The crate is `no_std`-compatible (`alloc` required): build with
//! `--no-default-features --features libm` to route float math through
//! `libm` instead of std intrinsics. File formats, PNG I/O, and the CLI
//! live in the companion `hazealign` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("hazealign-core needs either the `std` or the `libm` feature");

pub mod augment;
pub mod gamma;
pub mod image;
pub mod metrics;
pub mod stats;

mod fmath;

pub use augment::{AugmentError, AugmentOp, AugmentPlan};
pub use gamma::{GammaError, GammaTriple};
pub use image::{Channel, ImageBuffer, ImageError};
pub use metrics::{MetricError, SsimParams};
pub use stats::{ChannelHistogram, ChannelStats, RgbHistogram, RgbStats, StatsError};
