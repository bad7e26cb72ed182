//! Image quality metric and loss kernels: PSNR, windowed SSIM,
//! multi-scale SSIM, smooth L1, and the fixed-weight total-loss
//! combiner.
//!
//! Conventions (stated here once, applied everywhere):
//!
//! - All metrics treat intensities at their raw 8-bit scale with dynamic
//!   range 255.
//! - SSIM and MS-SSIM are computed per RGB channel with a Gaussian
//!   window over the "valid" region only (no padding), averaged over
//!   valid window positions, then averaged over channels.
//! - MS-SSIM downsamples by 2×2 mean pooling (odd trailing rows/columns
//!   are dropped) and composes the per-scale contrast-structure means
//!   with the luminance mean of the coarsest scale, each raised to its
//!   normalized weight.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::fmath;
use crate::image::{Channel, ImageBuffer};

/// Reference five-scale MS-SSIM exponents. They sum to 1.0001 as
/// published and are renormalized to sum exactly 1 before use.
pub const MS_SSIM_WEIGHTS: [f64; 5] = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];

/// Total-loss combination weights for (smooth-L1, MS-SSIM, perceptual,
/// adversarial) components.
pub const TOTAL_LOSS_WEIGHTS: [f64; 4] = [1.0, 0.5, 0.01, 0.0005];

const PSNR_DYNAMIC_RANGE: f64 = 255.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("dimension mismatch: pred is {pred_width}x{pred_height}, gt is {gt_width}x{gt_height}")]
    DimensionMismatch {
        pred_width: u32,
        pred_height: u32,
        gt_width: u32,
        gt_height: u32,
    },
    #[error("image {width}x{height} is smaller than the {window}x{window} window")]
    ImageTooSmall {
        width: u32,
        height: u32,
        window: usize,
    },
    #[error("length mismatch: pred has {pred} values, gt has {gt}")]
    LengthMismatch { pred: usize, gt: usize },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
}

/// SSIM windowing and stabilizer parameters.
///
/// Defaults are the field-standard 11×11 Gaussian window with σ = 1.5
/// and stabilizers `c1 = (0.01·L)²`, `c2 = (0.03·L)²` at dynamic range
/// L = 255.
#[derive(Debug, Clone, PartialEq)]
pub struct SsimParams {
    window_size: usize,
    sigma: f64,
    c1: f64,
    c2: f64,
    dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        let l = 255.0;
        Self {
            window_size: 11,
            sigma: 1.5,
            c1: (0.01 * l) * (0.01 * l),
            c2: (0.03 * l) * (0.03 * l),
            dynamic_range: l,
        }
    }
}

impl SsimParams {
    pub fn new(
        window_size: usize,
        sigma: f64,
        c1: f64,
        c2: f64,
        dynamic_range: f64,
    ) -> Result<Self, MetricError> {
        if window_size == 0 || window_size % 2 == 0 {
            return Err(MetricError::InvalidParams(format!(
                "window size must be odd and positive, got {window_size}"
            )));
        }
        for (name, v) in [
            ("sigma", sigma),
            ("c1", c1),
            ("c2", c2),
            ("dynamic_range", dynamic_range),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(MetricError::InvalidParams(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(Self {
            window_size,
            sigma,
            c1,
            c2,
            dynamic_range,
        })
    }

    pub fn window_size(&self) -> usize {
        self.window_size
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn dynamic_range(&self) -> f64 {
        self.dynamic_range
    }

    /// The normalized 1-D Gaussian kernel (the 2-D window is its outer
    /// product, so the 2-D weights also sum to 1).
    pub fn kernel(&self) -> Vec<f64> {
        let half = (self.window_size / 2) as f64;
        let mut k: Vec<f64> = (0..self.window_size)
            .map(|i| {
                let d = i as f64 - half;
                fmath::exp(-(d * d) / (2.0 * self.sigma * self.sigma))
            })
            .collect();
        let sum: f64 = k.iter().sum();
        for v in &mut k {
            *v /= sum;
        }
        k
    }
}

fn check_dims(pred: &ImageBuffer, gt: &ImageBuffer) -> Result<(), MetricError> {
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(MetricError::DimensionMismatch {
            pred_width: pred.width(),
            pred_height: pred.height(),
            gt_width: gt.width(),
            gt_height: gt.height(),
        });
    }
    Ok(())
}

/// Peak signal-to-noise ratio in dB, with MSE pooled over all pixels and
/// channels. Identical inputs return `f64::INFINITY`.
pub fn psnr(pred: &ImageBuffer, gt: &ImageBuffer) -> Result<f64, MetricError> {
    check_dims(pred, gt)?;
    // Exact integer sum of squared errors; one division at the end.
    let mut sse: u64 = 0;
    for (&a, &b) in pred.as_raw().iter().zip(gt.as_raw().iter()) {
        let d = a as i64 - b as i64;
        sse += (d * d) as u64;
    }
    if sse == 0 {
        return Ok(f64::INFINITY);
    }
    let mse = sse as f64 / pred.as_raw().len() as f64;
    Ok(10.0 * fmath::log10(PSNR_DYNAMIC_RANGE * PSNR_DYNAMIC_RANGE / mse))
}

/// One channel of an image as a continuous-valued plane.
struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    fn from_channel(img: &ImageBuffer, channel: Channel) -> Self {
        Self {
            width: img.width() as usize,
            height: img.height() as usize,
            data: img.channel_values(channel).map(f64::from).collect(),
        }
    }

    /// 2×2 mean pooling; an odd trailing row/column is dropped.
    fn downsample2(&self) -> Self {
        let w = self.width / 2;
        let h = self.height / 2;
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h {
            let top = 2 * y * self.width;
            let bottom = top + self.width;
            for x in 0..w {
                let i = 2 * x;
                let sum = self.data[top + i]
                    + self.data[top + i + 1]
                    + self.data[bottom + i]
                    + self.data[bottom + i + 1];
                data.push(sum * 0.25);
            }
        }
        Self {
            width: w,
            height: h,
            data,
        }
    }
}

/// Means over all valid window positions of the SSIM map and of its
/// luminance and contrast-structure factors.
struct WindowAverages {
    ssim: f64,
    luminance: f64,
    contrast_structure: f64,
}

/// Gaussian-windowed local moments over the valid region, folded into
/// the three per-plane averages. The window is separable, so each row of
/// window positions reuses one vertical pass over the five signal
/// products.
fn windowed_averages(a: &Plane, b: &Plane, kernel: &[f64], c1: f64, c2: f64) -> WindowAverages {
    let win = kernel.len();
    let w = a.width;
    let out_w = w - win + 1;
    let out_h = a.height - win + 1;

    let mut va = vec![0.0f64; w];
    let mut vb = vec![0.0f64; w];
    let mut vaa = vec![0.0f64; w];
    let mut vbb = vec![0.0f64; w];
    let mut vab = vec![0.0f64; w];

    let mut ssim_sum = 0.0;
    let mut l_sum = 0.0;
    let mut cs_sum = 0.0;

    for yo in 0..out_h {
        va.iter_mut().for_each(|v| *v = 0.0);
        vb.iter_mut().for_each(|v| *v = 0.0);
        vaa.iter_mut().for_each(|v| *v = 0.0);
        vbb.iter_mut().for_each(|v| *v = 0.0);
        vab.iter_mut().for_each(|v| *v = 0.0);
        for (k, &kw) in kernel.iter().enumerate() {
            let row = (yo + k) * w;
            for x in 0..w {
                let pa = a.data[row + x];
                let pb = b.data[row + x];
                va[x] += kw * pa;
                vb[x] += kw * pb;
                vaa[x] += kw * (pa * pa);
                vbb[x] += kw * (pb * pb);
                // Grouping the product first keeps the computation
                // bitwise symmetric in the two inputs.
                vab[x] += kw * (pa * pb);
            }
        }
        for xo in 0..out_w {
            let mut mu_a = 0.0;
            let mut mu_b = 0.0;
            let mut e_aa = 0.0;
            let mut e_bb = 0.0;
            let mut e_ab = 0.0;
            for (j, &kw) in kernel.iter().enumerate() {
                mu_a += kw * va[xo + j];
                mu_b += kw * vb[xo + j];
                e_aa += kw * vaa[xo + j];
                e_bb += kw * vbb[xo + j];
                e_ab += kw * vab[xo + j];
            }
            let var_a = e_aa - mu_a * mu_a;
            let var_b = e_bb - mu_b * mu_b;
            let cov = e_ab - mu_a * mu_b;
            let l = (2.0 * (mu_a * mu_b) + c1) / (mu_a * mu_a + mu_b * mu_b + c1);
            let cs = (2.0 * cov + c2) / (var_a + var_b + c2);
            ssim_sum += l * cs;
            l_sum += l;
            cs_sum += cs;
        }
    }

    let n = (out_w * out_h) as f64;
    WindowAverages {
        ssim: ssim_sum / n,
        luminance: l_sum / n,
        contrast_structure: cs_sum / n,
    }
}

fn check_window_fits(img: &ImageBuffer, window: usize) -> Result<(), MetricError> {
    if (img.width() as usize) < window || (img.height() as usize) < window {
        return Err(MetricError::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            window,
        });
    }
    Ok(())
}

/// Structural similarity index: the mean of the per-pixel SSIM map over
/// valid window positions, per channel, averaged over channels. The
/// result lies in [−1, 1]; identical inputs give exactly 1.
pub fn ssim(pred: &ImageBuffer, gt: &ImageBuffer, params: &SsimParams) -> Result<f64, MetricError> {
    check_dims(pred, gt)?;
    check_window_fits(pred, params.window_size)?;
    let kernel = params.kernel();
    let mut sum = 0.0;
    for channel in Channel::ALL {
        let a = Plane::from_channel(pred, channel);
        let b = Plane::from_channel(gt, channel);
        sum += windowed_averages(&a, &b, &kernel, params.c1, params.c2).ssim;
    }
    Ok((sum / 3.0).clamp(-1.0, 1.0))
}

/// A multi-scale SSIM evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct MsSsimScore {
    pub value: f64,
    /// Scales actually composed; fewer than requested when the image is
    /// too small for the window at deeper scales.
    pub scales_used: usize,
    /// The renormalized weights applied, one per used scale.
    pub weights: Vec<f64>,
}

/// Multi-scale SSIM with the reference five-scale weights.
pub fn ms_ssim(
    pred: &ImageBuffer,
    gt: &ImageBuffer,
    params: &SsimParams,
) -> Result<MsSsimScore, MetricError> {
    ms_ssim_with_weights(pred, gt, params, &MS_SSIM_WEIGHTS)
}

/// Multi-scale SSIM with caller-supplied scale weights.
///
/// Weights are renormalized to sum to exactly 1. If the image cannot
/// support all requested scales (each scale halves the dimensions and
/// the window must still fit), the largest feasible prefix of scales is
/// used and its weights renormalized; the score reports the count.
/// A negative contrast-structure mean (anti-correlated inputs) is
/// clamped to zero before exponentiation.
pub fn ms_ssim_with_weights(
    pred: &ImageBuffer,
    gt: &ImageBuffer,
    params: &SsimParams,
    weights: &[f64],
) -> Result<MsSsimScore, MetricError> {
    check_dims(pred, gt)?;
    check_window_fits(pred, params.window_size)?;
    if weights.is_empty() {
        return Err(MetricError::InvalidParams(String::from(
            "at least one scale weight is required",
        )));
    }
    for &w in weights {
        if !w.is_finite() || w <= 0.0 {
            return Err(MetricError::InvalidParams(format!(
                "scale weights must be finite and positive, got {w}"
            )));
        }
    }

    let win = params.window_size;
    let mut feasible = 0usize;
    let (mut w, mut h) = (pred.width() as usize, pred.height() as usize);
    while feasible < weights.len() && w >= win && h >= win {
        feasible += 1;
        w /= 2;
        h /= 2;
    }
    let scales = feasible;
    let weight_sum: f64 = weights[..scales].iter().sum();
    let weights_used: Vec<f64> = weights[..scales].iter().map(|w| w / weight_sum).collect();

    let kernel = params.kernel();
    let mut channel_sum = 0.0;
    for channel in Channel::ALL {
        let mut a = Plane::from_channel(pred, channel);
        let mut b = Plane::from_channel(gt, channel);
        let mut value = 1.0;
        for (s, &weight) in weights_used.iter().enumerate() {
            let avg = windowed_averages(&a, &b, &kernel, params.c1, params.c2);
            value *= fmath::powf(avg.contrast_structure.max(0.0), weight);
            if s + 1 == scales {
                value *= fmath::powf(avg.luminance.max(0.0), weight);
            } else {
                a = a.downsample2();
                b = b.downsample2();
            }
        }
        channel_sum += value;
    }

    Ok(MsSsimScore {
        value: channel_sum / 3.0,
        scales_used: scales,
        weights: weights_used,
    })
}

/// The per-component smooth-L1 (Huber) kernel: `0.5z²` for `|z| < 1`,
/// `|z| − 0.5` otherwise. Continuous at `|z| = 1`.
#[inline]
pub fn smooth_l1_kernel(z: f64) -> f64 {
    let a = fmath::abs(z);
    if a < 1.0 {
        0.5 * z * z
    } else {
        a - 0.5
    }
}

/// Value scale for [`smooth_l1`] on 8-bit images.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothL1Scale {
    /// Differences divided by 255, placing the `|z| = 1` knee at the
    /// full intensity range. The default convention.
    Normalized,
    /// Raw intensity differences.
    Raw,
}

impl SmoothL1Scale {
    /// Stable label for embedding the convention in reports.
    pub fn label(self) -> &'static str {
        match self {
            SmoothL1Scale::Normalized => "normalized",
            SmoothL1Scale::Raw => "raw",
        }
    }
}

/// Mean smooth-L1 over all components of the image difference.
pub fn smooth_l1(
    pred: &ImageBuffer,
    gt: &ImageBuffer,
    scale: SmoothL1Scale,
) -> Result<f64, MetricError> {
    check_dims(pred, gt)?;
    let divisor = match scale {
        SmoothL1Scale::Normalized => 255.0,
        SmoothL1Scale::Raw => 1.0,
    };
    let mut sum = 0.0;
    for (&a, &b) in pred.as_raw().iter().zip(gt.as_raw().iter()) {
        let z = (a as f64 - b as f64) / divisor;
        sum += smooth_l1_kernel(z);
    }
    Ok(sum / pred.as_raw().len() as f64)
}

/// Mean smooth-L1 over two equally shaped value arrays.
pub fn smooth_l1_values(pred: &[f64], gt: &[f64]) -> Result<f64, MetricError> {
    if pred.len() != gt.len() {
        return Err(MetricError::LengthMismatch {
            pred: pred.len(),
            gt: gt.len(),
        });
    }
    if pred.is_empty() {
        return Err(MetricError::LengthMismatch { pred: 0, gt: 0 });
    }
    let sum: f64 = pred
        .iter()
        .zip(gt.iter())
        .map(|(&a, &b)| smooth_l1_kernel(a - b))
        .sum();
    Ok(sum / pred.len() as f64)
}

/// The weighted total loss
/// `1·l1 + 0.5·ms_ssim_loss + 0.01·perceptual + 0.0005·adversarial`.
///
/// The perceptual and adversarial terms are externally supplied scalars.
pub fn total_loss(
    l1: f64,
    ms_ssim_loss: f64,
    perceptual: f64,
    adversarial: f64,
) -> Result<f64, MetricError> {
    for (name, v) in [
        ("l1", l1),
        ("ms_ssim_loss", ms_ssim_loss),
        ("perceptual", perceptual),
        ("adversarial", adversarial),
    ] {
        if !v.is_finite() {
            return Err(MetricError::NonFinite { name, value: v });
        }
    }
    let [w1, w2, w3, w4] = TOTAL_LOSS_WEIGHTS;
    Ok(w1 * l1 + w2 * ms_ssim_loss + w3 * perceptual + w4 * adversarial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(seed: u64, width: u32, height: u32) -> ImageBuffer {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<u8> = (0..(width as usize * height as usize * 3))
            .map(|_| rng.random())
            .collect();
        ImageBuffer::from_raw(width, height, data).unwrap()
    }

    /// Independent SSIM oracle: explicit 2-D Gaussian weights and direct
    /// two-pass windowed moments, no separable filtering, no
    /// moment-identity shortcuts.
    fn naive_ssim(a: &ImageBuffer, b: &ImageBuffer, p: &SsimParams) -> f64 {
        let win = p.window_size();
        let half = (win / 2) as f64;
        let mut weights = vec![vec![0.0f64; win]; win];
        let mut wsum = 0.0;
        for (dy, row) in weights.iter_mut().enumerate() {
            for (dx, w) in row.iter_mut().enumerate() {
                let fx = dx as f64 - half;
                let fy = dy as f64 - half;
                *w = (-(fx * fx + fy * fy) / (2.0 * p.sigma() * p.sigma())).exp();
                wsum += *w;
            }
        }
        for row in &mut weights {
            for w in row.iter_mut() {
                *w /= wsum;
            }
        }

        let w = a.width() as usize;
        let h = a.height() as usize;
        let mut channel_sum = 0.0;
        for channel in Channel::ALL {
            let pa: Vec<f64> = a.channel_values(channel).map(f64::from).collect();
            let pb: Vec<f64> = b.channel_values(channel).map(f64::from).collect();
            let mut sum = 0.0;
            let mut n = 0usize;
            for yo in 0..=(h - win) {
                for xo in 0..=(w - win) {
                    let mut mu_a = 0.0;
                    let mut mu_b = 0.0;
                    for dy in 0..win {
                        for dx in 0..win {
                            let i = (yo + dy) * w + xo + dx;
                            mu_a += weights[dy][dx] * pa[i];
                            mu_b += weights[dy][dx] * pb[i];
                        }
                    }
                    let mut var_a = 0.0;
                    let mut var_b = 0.0;
                    let mut cov = 0.0;
                    for dy in 0..win {
                        for dx in 0..win {
                            let i = (yo + dy) * w + xo + dx;
                            var_a += weights[dy][dx] * (pa[i] - mu_a) * (pa[i] - mu_a);
                            var_b += weights[dy][dx] * (pb[i] - mu_b) * (pb[i] - mu_b);
                            cov += weights[dy][dx] * (pa[i] - mu_a) * (pb[i] - mu_b);
                        }
                    }
                    let l = (2.0 * mu_a * mu_b + p.c1()) / (mu_a * mu_a + mu_b * mu_b + p.c1());
                    let cs = (2.0 * cov + p.c2()) / (var_a + var_b + p.c2());
                    sum += l * cs;
                    n += 1;
                }
            }
            channel_sum += sum / n as f64;
        }
        channel_sum / 3.0
    }

    #[test]
    fn psnr_identical_is_infinite() {
        let img = random_image(1, 8, 8);
        assert_eq!(psnr(&img, &img).unwrap(), f64::INFINITY);
    }

    #[test]
    fn psnr_full_scale_error_is_zero_db() {
        let black = ImageBuffer::filled(4, 4, [0, 0, 0]).unwrap();
        let white = ImageBuffer::filled(4, 4, [255, 255, 255]).unwrap();
        assert_eq!(psnr(&white, &black).unwrap(), 0.0);
    }

    #[test]
    fn psnr_uniform_offset_one() {
        // MSE = 1 exactly, so PSNR = 20·log10(255).
        let gt = ImageBuffer::from_raw(16, 1, (0..48).collect()).unwrap();
        let pred_data: Vec<u8> = gt.as_raw().iter().map(|&v| v + 1).collect();
        let pred = ImageBuffer::from_raw(16, 1, pred_data).unwrap();
        let expected = 20.0 * 255.0f64.log10();
        assert!((psnr(&pred, &gt).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 48.1308).abs() < 1e-4);
    }

    #[test]
    fn psnr_rejects_dimension_mismatch() {
        let a = ImageBuffer::filled(2, 2, [0, 0, 0]).unwrap();
        let b = ImageBuffer::filled(2, 3, [0, 0, 0]).unwrap();
        assert!(matches!(
            psnr(&a, &b).unwrap_err(),
            MetricError::DimensionMismatch { .. }
        ));
    }

    #[test]
    fn psnr_decreases_with_noise_amplitude() {
        let gt = random_image(7, 32, 32);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut noisy = |amp: i16| {
            let data: Vec<u8> = gt
                .as_raw()
                .iter()
                .map(|&v| {
                    let n = rng.random_range(-amp..=amp);
                    (v as i16 + n).clamp(0, 255) as u8
                })
                .collect();
            ImageBuffer::from_raw(32, 32, data).unwrap()
        };
        let p5 = psnr(&noisy(5), &gt).unwrap();
        let p20 = psnr(&noisy(20), &gt).unwrap();
        let p60 = psnr(&noisy(60), &gt).unwrap();
        assert!(p5 > p20 && p20 > p60, "psnr {p5} {p20} {p60}");
    }

    #[test]
    fn ssim_self_is_one() {
        let img = random_image(2, 16, 16);
        let s = ssim(&img, &img, &SsimParams::default()).unwrap();
        assert!((s - 1.0).abs() <= 1e-9, "ssim(a,a) = {s}");
    }

    #[test]
    fn ssim_is_symmetric() {
        let a = random_image(3, 16, 16);
        let b = random_image(4, 16, 16);
        let p = SsimParams::default();
        assert_eq!(ssim(&a, &b, &p).unwrap(), ssim(&b, &a, &p).unwrap());
    }

    #[test]
    fn ssim_constant_images_match_closed_form() {
        let a = ImageBuffer::filled(16, 16, [0, 0, 0]).unwrap();
        let b = ImageBuffer::filled(16, 16, [255, 255, 255]).unwrap();
        let p = SsimParams::default();
        // All variance terms vanish, so the second factor is exactly 1
        // and the score is c1 / (255² + c1).
        let expected = p.c1() / (255.0 * 255.0 + p.c1());
        let s = ssim(&a, &b, &p).unwrap();
        assert!((s - expected).abs() <= 1e-8, "ssim {s}, expected {expected}");
    }

    #[test]
    fn ssim_matches_naive_oracle() {
        let p = SsimParams::default();
        for seed in 0..8 {
            let a = random_image(100 + seed, 16, 16);
            let b = random_image(200 + seed, 16, 16);
            let fast = ssim(&a, &b, &p).unwrap();
            let slow = naive_ssim(&a, &b, &p);
            assert!(
                (fast - slow).abs() <= 1e-6,
                "seed {seed}: windowed {fast} vs naive {slow}"
            );
        }
    }

    #[test]
    fn ssim_rejects_small_images() {
        let img = ImageBuffer::filled(8, 8, [1, 2, 3]).unwrap();
        assert!(matches!(
            ssim(&img, &img, &SsimParams::default()).unwrap_err(),
            MetricError::ImageTooSmall { window: 11, .. }
        ));
    }

    #[test]
    fn ssim_params_validation() {
        assert!(SsimParams::new(10, 1.5, 1.0, 1.0, 255.0).is_err());
        assert!(SsimParams::new(11, 0.0, 1.0, 1.0, 255.0).is_err());
        assert!(SsimParams::new(11, 1.5, 1.0, 1.0, 255.0).is_ok());
    }

    #[test]
    fn kernel_sums_to_one() {
        let k = SsimParams::default().kernel();
        assert_eq!(k.len(), 11);
        let sum: f64 = k.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ms_ssim_self_is_one() {
        let img = random_image(5, 64, 64);
        let score = ms_ssim(&img, &img, &SsimParams::default()).unwrap();
        assert!((score.value - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn ms_ssim_reports_fallback_scales() {
        let a = random_image(6, 64, 64);
        let b = random_image(7, 64, 64);
        // 64 → 32 → 16 fits an 11-wide window; 8 does not.
        let score = ms_ssim(&a, &b, &SsimParams::default()).unwrap();
        assert_eq!(score.scales_used, 3);
        let sum: f64 = score.weights.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ms_ssim_weights_are_renormalized() {
        let a = random_image(8, 192, 192);
        let b = random_image(9, 192, 192);
        let score = ms_ssim(&a, &b, &SsimParams::default()).unwrap();
        assert_eq!(score.scales_used, 5);
        let sum: f64 = score.weights.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        // The published weights sum to 1.0001, so renormalization must
        // have changed them.
        assert!(score.weights[0] < MS_SSIM_WEIGHTS[0]);
    }

    #[test]
    fn ms_ssim_matches_stepwise_composition() {
        // Independent composition: naive per-scale l/cs means on naively
        // downsampled planes, combined with the renormalized weights.
        // The pair is correlated (gt plus bounded noise) the way real
        // evaluation pairs are.
        let p = SsimParams::default();
        let a = random_image(10, 64, 64);
        let b = {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let data: Vec<u8> = a
                .as_raw()
                .iter()
                .map(|&v| (v as i16 + rng.random_range(-25..=25)).clamp(0, 255) as u8)
                .collect();
            ImageBuffer::from_raw(64, 64, data).unwrap()
        };
        let score = ms_ssim(&a, &b, &p).unwrap();
        assert_eq!(score.scales_used, 3);

        let win = p.window_size();
        let naive_downsample = |plane: &[f64], w: usize, h: usize| -> (Vec<f64>, usize, usize) {
            let (nw, nh) = (w / 2, h / 2);
            let mut out = Vec::with_capacity(nw * nh);
            for y in 0..nh {
                for x in 0..nw {
                    let s = plane[2 * y * w + 2 * x]
                        + plane[2 * y * w + 2 * x + 1]
                        + plane[(2 * y + 1) * w + 2 * x]
                        + plane[(2 * y + 1) * w + 2 * x + 1];
                    out.push(s / 4.0);
                }
            }
            (out, nw, nh)
        };
        // Direct double-loop means of the two SSIM factors.
        let naive_l_cs = |pa: &[f64], pb: &[f64], w: usize, h: usize| -> (f64, f64) {
            let kernel = p.kernel();
            let mut l_sum = 0.0;
            let mut cs_sum = 0.0;
            let mut n = 0usize;
            for yo in 0..=(h - win) {
                for xo in 0..=(w - win) {
                    let mut mu_a = 0.0;
                    let mut mu_b = 0.0;
                    for dy in 0..win {
                        for dx in 0..win {
                            let kw = kernel[dy] * kernel[dx];
                            mu_a += kw * pa[(yo + dy) * w + xo + dx];
                            mu_b += kw * pb[(yo + dy) * w + xo + dx];
                        }
                    }
                    let mut var_a = 0.0;
                    let mut var_b = 0.0;
                    let mut cov = 0.0;
                    for dy in 0..win {
                        for dx in 0..win {
                            let kw = kernel[dy] * kernel[dx];
                            let da = pa[(yo + dy) * w + xo + dx] - mu_a;
                            let db = pb[(yo + dy) * w + xo + dx] - mu_b;
                            var_a += kw * da * da;
                            var_b += kw * db * db;
                            cov += kw * da * db;
                        }
                    }
                    l_sum += (2.0 * mu_a * mu_b + p.c1())
                        / (mu_a * mu_a + mu_b * mu_b + p.c1());
                    cs_sum += (2.0 * cov + p.c2()) / (var_a + var_b + p.c2());
                    n += 1;
                }
            }
            (l_sum / n as f64, cs_sum / n as f64)
        };

        let wsum: f64 = MS_SSIM_WEIGHTS[..3].iter().sum();
        let mut expected = 0.0;
        for channel in Channel::ALL {
            let mut pa: Vec<f64> = a.channel_values(channel).map(f64::from).collect();
            let mut pb: Vec<f64> = b.channel_values(channel).map(f64::from).collect();
            let (mut w, mut h) = (64usize, 64usize);
            let mut value = 1.0;
            for s in 0..3 {
                let (l, cs) = naive_l_cs(&pa, &pb, w, h);
                value *= cs.max(0.0).powf(MS_SSIM_WEIGHTS[s] / wsum);
                if s == 2 {
                    value *= l.max(0.0).powf(MS_SSIM_WEIGHTS[s] / wsum);
                } else {
                    let (na, nw, nh) = naive_downsample(&pa, w, h);
                    let (nb, _, _) = naive_downsample(&pb, w, h);
                    pa = na;
                    pb = nb;
                    w = nw;
                    h = nh;
                }
            }
            expected += value;
        }
        expected /= 3.0;
        assert!(
            (score.value - expected).abs() <= 1e-6,
            "ms-ssim {} vs composed {}",
            score.value,
            expected
        );
    }

    #[test]
    fn smooth_l1_knots() {
        assert_eq!(smooth_l1_kernel(0.0), 0.0);
        assert_eq!(smooth_l1_kernel(0.5), 0.125);
        assert_eq!(smooth_l1_kernel(2.0), 1.5);
        assert_eq!(smooth_l1_kernel(1.0), 0.5);
        assert_eq!(smooth_l1_kernel(-1.0), 0.5);
        // Continuity at the knee.
        let just_below = smooth_l1_kernel(1.0 - 1e-9);
        assert!((just_below - 0.5).abs() < 1e-8);
    }

    #[test]
    fn smooth_l1_values_mean() {
        assert_eq!(smooth_l1_values(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(smooth_l1_values(&[0.5], &[0.0]).unwrap(), 0.125);
        assert_eq!(smooth_l1_values(&[2.0], &[0.0]).unwrap(), 1.5);
        assert!(matches!(
            smooth_l1_values(&[1.0], &[1.0, 2.0]).unwrap_err(),
            MetricError::LengthMismatch { .. }
        ));
    }

    #[test]
    fn smooth_l1_image_scales() {
        let a = ImageBuffer::filled(2, 2, [255, 255, 255]).unwrap();
        let b = ImageBuffer::filled(2, 2, [0, 0, 0]).unwrap();
        // Normalized: |z| = 1 → 0.5. Raw: |z| = 255 → 254.5.
        assert_eq!(smooth_l1(&a, &b, SmoothL1Scale::Normalized).unwrap(), 0.5);
        assert_eq!(smooth_l1(&a, &b, SmoothL1Scale::Raw).unwrap(), 254.5);
        assert_eq!(smooth_l1(&a, &a, SmoothL1Scale::Normalized).unwrap(), 0.0);
    }

    #[test]
    fn total_loss_weights() {
        assert_eq!(total_loss(0.0, 0.0, 0.0, 0.0).unwrap(), 0.0);
        let all_ones = total_loss(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((all_ones - 1.5105).abs() < 1e-12);
        // Unit probes recover each weight exactly.
        assert_eq!(total_loss(1.0, 0.0, 0.0, 0.0).unwrap(), 1.0);
        assert_eq!(total_loss(0.0, 1.0, 0.0, 0.0).unwrap(), 0.5);
        assert_eq!(total_loss(0.0, 0.0, 1.0, 0.0).unwrap(), 0.01);
        assert_eq!(total_loss(0.0, 0.0, 0.0, 1.0).unwrap(), 0.0005);
    }

    #[test]
    fn total_loss_rejects_non_finite() {
        assert!(matches!(
            total_loss(f64::NAN, 0.0, 0.0, 0.0).unwrap_err(),
            MetricError::NonFinite { name: "l1", .. }
        ));
        assert!(total_loss(0.0, f64::INFINITY, 0.0, 0.0).is_err());
    }
}
