//! Per-channel gamma correction and the mean-matching solver.
//!
//! The transform is `O = 255·(I/255)^(1/γ)` per channel: γ = 1 is the
//! identity, γ > 1 brightens, γ < 1 darkens, and 0 and 255 are fixed
//! points for every γ. Because the map is monotone in γ for any
//! histogram with mass strictly inside (0, 255), matching a source
//! channel's mean to a target mean is a scalar root-finding problem,
//! solved here by bisection on the histogram (no pixel data needed).

use alloc::vec::Vec;

use crate::fmath;
use crate::image::{Channel, ImageBuffer};
use crate::stats::ChannelHistogram;

/// Bracket cap for the bisection solver: γ is searched in
/// [2⁻²⁰, 2²⁰].
const GAMMA_CAP: f64 = (1u64 << 20) as f64;
/// Iteration cap for the bisection loop.
const MAX_ITERATIONS: usize = 200;
/// Default mean-residual tolerance, in intensity units.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GammaError {
    #[error("gamma must be a finite positive number, got {0}")]
    InvalidGamma(f64),
    #[error("target mean must be a finite number, got {0}")]
    InvalidTarget(f64),
    #[error("tolerance must be a finite positive number, got {0}")]
    InvalidTolerance(f64),
    #[error("histogram is empty")]
    EmptyHistogram,
    #[error(
        "target mean {target} is outside the achievable open interval ({lo}, {hi})"
    )]
    TargetUnachievable { target: f64, lo: f64, hi: f64 },
    #[error(
        "histogram has all mass at 0 and 255; its mean {mean} is fixed for every gamma"
    )]
    DegenerateHistogram { mean: f64 },
}

/// The solved per-channel gamma factors `(γ_R, γ_G, γ_B)`.
///
/// Each factor is finite and strictly positive; `(1, 1, 1)` is the
/// identity transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaTriple {
    r: f64,
    g: f64,
    b: f64,
}

impl GammaTriple {
    pub fn new(r: f64, g: f64, b: f64) -> Result<Self, GammaError> {
        for v in [r, g, b] {
            if !v.is_finite() || v <= 0.0 {
                return Err(GammaError::InvalidGamma(v));
            }
        }
        Ok(Self { r, g, b })
    }

    /// The identity transform `(1, 1, 1)`.
    pub fn identity() -> Self {
        Self {
            r: 1.0,
            g: 1.0,
            b: 1.0,
        }
    }

    /// The channel-wise reciprocal `(1/γ_R, 1/γ_G, 1/γ_B)`, which undoes
    /// this transform up to quantization.
    pub fn inverted(&self) -> Self {
        Self {
            r: 1.0 / self.r,
            g: 1.0 / self.g,
            b: 1.0 / self.b,
        }
    }

    #[inline]
    pub fn r(&self) -> f64 {
        self.r
    }

    #[inline]
    pub fn g(&self) -> f64 {
        self.g
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn channel(&self, channel: Channel) -> f64 {
        match channel {
            Channel::R => self.r,
            Channel::G => self.g,
            Channel::B => self.b,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }
}

/// The continuous (unquantized) transformed value `255·(i/255)^(1/γ)`.
#[inline]
fn transform_continuous(intensity: usize, gamma: f64) -> f64 {
    255.0 * fmath::powf(intensity as f64 / 255.0, 1.0 / gamma)
}

/// Round to nearest, ties away from zero, clamped to [0, 255].
#[inline]
fn quantize(value: f64) -> u8 {
    fmath::round(value).clamp(0.0, 255.0) as u8
}

fn check_gamma(gamma: f64) -> Result<(), GammaError> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(GammaError::InvalidGamma(gamma));
    }
    Ok(())
}

/// The 256-entry lookup table realizing the transform for one γ.
///
/// Entry `i` is `quantize(255·(i/255)^(1/γ))`; entries are monotone
/// non-decreasing with `lut[0] = 0` and `lut[255] = 255`.
pub fn gamma_lut(gamma: f64) -> Result<[u8; 256], GammaError> {
    check_gamma(gamma)?;
    let mut lut = [0u8; 256];
    for (i, entry) in lut.iter_mut().enumerate() {
        *entry = quantize(transform_continuous(i, gamma));
    }
    Ok(lut)
}

/// Applies one LUT per channel to every pixel; dimensions are unchanged.
pub fn gamma_apply(img: &ImageBuffer, gammas: &GammaTriple) -> ImageBuffer {
    // GammaTriple is validated at construction, so the LUTs always exist.
    let luts = [
        gamma_lut(gammas.r).unwrap(),
        gamma_lut(gammas.g).unwrap(),
        gamma_lut(gammas.b).unwrap(),
    ];
    let mut data = Vec::with_capacity(img.as_raw().len());
    for px in img.as_raw().chunks_exact(3) {
        data.push(luts[0][px[0] as usize]);
        data.push(luts[1][px[1] as usize]);
        data.push(luts[2][px[2] as usize]);
    }
    ImageBuffer::from_raw(img.width(), img.height(), data).unwrap()
}

/// Mean intensity after transforming with γ, in continuous arithmetic.
///
/// Computes `Σ bins[i]·255·(i/255)^(1/γ) / total` without touching pixel
/// data or quantizing. Strictly increasing in γ whenever the histogram
/// has mass strictly inside (0, 255).
pub fn mean_after_gamma(hist: &ChannelHistogram, gamma: f64) -> Result<f64, GammaError> {
    check_gamma(gamma)?;
    let total = hist.total();
    if total == 0 {
        return Err(GammaError::EmptyHistogram);
    }
    let mut sum = 0.0;
    for (i, &count) in hist.bins().iter().enumerate() {
        if count > 0 && i > 0 {
            sum += count as f64 * transform_continuous(i, gamma);
        }
    }
    Ok(sum / total as f64)
}

/// The open interval of means reachable by varying γ over (0, ∞):
/// `(255·frac(bin 255), 255·frac(bins > 0))`.
pub fn achievable_interval(hist: &ChannelHistogram) -> Result<(f64, f64), GammaError> {
    let total = hist.total();
    if total == 0 {
        return Err(GammaError::EmptyHistogram);
    }
    let at_255 = hist.bins()[255];
    let above_0 = total - hist.bins()[0];
    Ok((
        255.0 * at_255 as f64 / total as f64,
        255.0 * above_0 as f64 / total as f64,
    ))
}

/// Solves for γ such that the transformed mean matches `target_mean`.
///
/// Uses bisection on the monotone map γ ↦ [`mean_after_gamma`], with the
/// bracket grown geometrically from γ = 1 by factors of 2 and capped at
/// [2⁻²⁰, 2²⁰]. Terminates when the mean residual is within `tol` or
/// after 200 iterations. Targets so close to the interval endpoints that
/// they would need γ beyond the cap are reported as unachievable, with
/// the interval reachable inside the cap.
pub fn solve_gamma(
    hist: &ChannelHistogram,
    target_mean: f64,
    tol: f64,
) -> Result<f64, GammaError> {
    if !target_mean.is_finite() {
        return Err(GammaError::InvalidTarget(target_mean));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(GammaError::InvalidTolerance(tol));
    }
    let (lo_limit, hi_limit) = achievable_interval(hist)?;
    if hi_limit == lo_limit {
        // All mass at 0 and/or 255: every γ fixes the mean.
        if fmath::abs(target_mean - lo_limit) <= tol {
            return Ok(1.0);
        }
        return Err(GammaError::DegenerateHistogram { mean: lo_limit });
    }
    if target_mean <= lo_limit || target_mean >= hi_limit {
        return Err(GammaError::TargetUnachievable {
            target: target_mean,
            lo: lo_limit,
            hi: hi_limit,
        });
    }

    let residual = |gamma: f64| -> f64 {
        // Only valid gammas are probed below.
        mean_after_gamma(hist, gamma).unwrap() - target_mean
    };

    if fmath::abs(residual(1.0)) <= tol {
        return Ok(1.0);
    }

    // Grow the bracket geometrically from 1 until the target is enclosed.
    let (mut lo, mut hi) = if residual(1.0) < 0.0 {
        let mut hi = 1.0;
        while residual(hi) < 0.0 {
            if hi >= GAMMA_CAP {
                return Err(GammaError::TargetUnachievable {
                    target: target_mean,
                    lo: mean_after_gamma(hist, 1.0 / GAMMA_CAP).unwrap(),
                    hi: mean_after_gamma(hist, GAMMA_CAP).unwrap(),
                });
            }
            hi = (hi * 2.0).min(GAMMA_CAP);
        }
        (hi / 2.0, hi)
    } else {
        let mut lo = 1.0;
        while residual(lo) > 0.0 {
            if lo <= 1.0 / GAMMA_CAP {
                return Err(GammaError::TargetUnachievable {
                    target: target_mean,
                    lo: mean_after_gamma(hist, 1.0 / GAMMA_CAP).unwrap(),
                    hi: mean_after_gamma(hist, GAMMA_CAP).unwrap(),
                });
            }
            lo = (lo / 2.0).max(1.0 / GAMMA_CAP);
        }
        (lo, lo * 2.0)
    };

    let mut mid = 0.5 * (lo + hi);
    for _ in 0..MAX_ITERATIONS {
        let r = residual(mid);
        if fmath::abs(r) <= tol {
            return Ok(mid);
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        mid = 0.5 * (lo + hi);
    }
    Ok(mid)
}
