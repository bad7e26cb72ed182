//! Seed-reproducible geometric augmentation for hazy/clean image pairs.
//!
//! Every operation moves pixels without touching their RGB values: crops
//! select a window, rotations and flips permute positions. There is
//! deliberately no brightness, contrast or color op here, so augmenting
//! never disturbs channel distributions.
//!
//! Plans are sampled from an explicitly specified generator (ChaCha8
//! keyed by the 64-bit seed, stream 0) with a fixed draw order — crop x,
//! crop y, rotation choice, horizontal flip, vertical flip — so the same
//! seed and image dimensions always reproduce the same plan, on any
//! platform. Parallel callers derive independent seeds with
//! [`derive_seed`], which reads the first output of the base generator
//! on stream `index`.

use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::ImageBuffer;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AugmentError {
    #[error("crop size {size} exceeds image dimensions {width}x{height}")]
    CropTooLarge { size: u32, width: u32, height: u32 },
    #[error("crop size must be positive")]
    EmptyCrop,
    #[error(
        "crop window at ({x}, {y}) of size {size} leaves the {width}x{height} image bounds"
    )]
    CropOutOfBounds {
        x: u32,
        y: u32,
        size: u32,
        width: u32,
        height: u32,
    },
    #[error("pair dimension mismatch: hazy is {hazy_width}x{hazy_height}, gt is {gt_width}x{gt_height}")]
    PairDimensionMismatch {
        hazy_width: u32,
        hazy_height: u32,
        gt_width: u32,
        gt_height: u32,
    },
}

/// A single geometric operation.
///
/// Rotations are clockwise. Every non-crop op is a bijection on pixel
/// positions, so it preserves the multiset of pixel values exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugmentOp {
    Crop { x: u32, y: u32, size: u32 },
    Rotate90,
    Rotate180,
    Rotate270,
    HFlip,
    VFlip,
    Identity,
}

/// A reproducible augmentation recipe: the seed it was drawn from, the
/// crop size, and the concrete sampled ops in application order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentPlan {
    pub seed: u64,
    pub crop_size: u32,
    pub ops: Vec<AugmentOp>,
}

impl AugmentPlan {
    /// Samples a plan for an image of the given dimensions.
    ///
    /// The crop offset is uniform over all in-bounds positions; each of
    /// the three rotations and "no rotation" has probability 1/4; each
    /// flip is applied independently with probability 1/2.
    pub fn sample(seed: u64, width: u32, height: u32, crop_size: u32) -> Result<Self, AugmentError> {
        if crop_size == 0 {
            return Err(AugmentError::EmptyCrop);
        }
        if crop_size > width || crop_size > height {
            return Err(AugmentError::CropTooLarge {
                size: crop_size,
                width,
                height,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = rng.random_range(0..=width - crop_size);
        let y = rng.random_range(0..=height - crop_size);
        let rotation = rng.random_range(0u8..4);
        let hflip = rng.random_bool(0.5);
        let vflip = rng.random_bool(0.5);

        let mut ops = Vec::with_capacity(4);
        ops.push(AugmentOp::Crop {
            x,
            y,
            size: crop_size,
        });
        match rotation {
            1 => ops.push(AugmentOp::Rotate90),
            2 => ops.push(AugmentOp::Rotate180),
            3 => ops.push(AugmentOp::Rotate270),
            _ => {}
        }
        if hflip {
            ops.push(AugmentOp::HFlip);
        }
        if vflip {
            ops.push(AugmentOp::VFlip);
        }
        Ok(Self {
            seed,
            crop_size,
            ops,
        })
    }
}

/// Derives the seed for the `index`-th parallel worker from a base seed:
/// the first 64-bit output of ChaCha8 keyed with `base` on stream
/// `index`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(index);
    rng.next_u64()
}

/// Applies one geometric op, producing a new buffer.
pub fn apply_op(img: &ImageBuffer, op: &AugmentOp) -> Result<ImageBuffer, AugmentError> {
    let (w, h) = (img.width(), img.height());
    let remap = |out_w: u32, out_h: u32, src: &dyn Fn(u32, u32) -> (u32, u32)| {
        let mut data = Vec::with_capacity(out_w as usize * out_h as usize * 3);
        for y in 0..out_h {
            for x in 0..out_w {
                let (sx, sy) = src(x, y);
                data.extend_from_slice(&img.pixel(sx, sy));
            }
        }
        ImageBuffer::from_raw(out_w, out_h, data).unwrap()
    };
    let out = match *op {
        AugmentOp::Identity => img.clone(),
        AugmentOp::Crop { x, y, size } => {
            if size == 0 {
                return Err(AugmentError::EmptyCrop);
            }
            if x.checked_add(size).is_none_or(|e| e > w) || y.checked_add(size).is_none_or(|e| e > h)
            {
                return Err(AugmentError::CropOutOfBounds {
                    x,
                    y,
                    size,
                    width: w,
                    height: h,
                });
            }
            remap(size, size, &|ox, oy| (x + ox, y + oy))
        }
        AugmentOp::Rotate90 => remap(h, w, &|ox, oy| (oy, h - 1 - ox)),
        AugmentOp::Rotate180 => remap(w, h, &|ox, oy| (w - 1 - ox, h - 1 - oy)),
        AugmentOp::Rotate270 => remap(h, w, &|ox, oy| (w - 1 - oy, ox)),
        AugmentOp::HFlip => remap(w, h, &|ox, oy| (w - 1 - ox, oy)),
        AugmentOp::VFlip => remap(w, h, &|ox, oy| (ox, h - 1 - oy)),
    };
    Ok(out)
}

/// Applies a plan's ops in order.
pub fn apply_plan(img: &ImageBuffer, plan: &AugmentPlan) -> Result<ImageBuffer, AugmentError> {
    let mut out = img.clone();
    for op in &plan.ops {
        out = apply_op(&out, op)?;
    }
    Ok(out)
}

/// Applies the same plan to both members of a pair, guaranteeing an
/// identical position mapping for hazy and ground-truth images.
pub fn sample_pair_augment(
    hazy: &ImageBuffer,
    gt: &ImageBuffer,
    plan: &AugmentPlan,
) -> Result<(ImageBuffer, ImageBuffer), AugmentError> {
    if hazy.width() != gt.width() || hazy.height() != gt.height() {
        return Err(AugmentError::PairDimensionMismatch {
            hazy_width: hazy.width(),
            hazy_height: hazy.height(),
            gt_width: gt.width(),
            gt_height: gt.height(),
        });
    }
    Ok((apply_plan(hazy, plan)?, apply_plan(gt, plan)?))
}
