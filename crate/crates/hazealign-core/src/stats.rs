//! Exact per-channel histograms and the statistics derived from them.
//!
//! Bin counts are integers, so aggregating a dataset is a sum of
//! histograms: commutative, associative, and independent of traversal or
//! thread order. Mean and variance are computed from the integer moments
//! `Σ i·bins[i]` and `Σ i²·bins[i]` with a single floating division at
//! the end, which makes repeated and parallel runs bit-identical.

use alloc::vec::Vec;

use crate::image::{Channel, ImageBuffer};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("cannot compute statistics over an empty image sequence")]
    EmptyInput,
    #[error("channel mismatch: cannot merge {left} histogram into {right}")]
    ChannelMismatch { left: Channel, right: Channel },
}

/// 256-bin intensity histogram for a single channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelHistogram {
    channel: Channel,
    bins: [u64; 256],
}

impl ChannelHistogram {
    pub fn new(channel: Channel) -> Self {
        Self {
            channel,
            bins: [0; 256],
        }
    }

    /// Builds the histogram of one channel of one image.
    pub fn from_image(img: &ImageBuffer, channel: Channel) -> Self {
        let mut h = Self::new(channel);
        h.add_image(img);
        h
    }

    /// Builds a histogram directly from bin counts.
    pub fn from_bins(channel: Channel, bins: [u64; 256]) -> Self {
        Self { channel, bins }
    }

    /// Accumulates one image's channel values into the bins.
    pub fn add_image(&mut self, img: &ImageBuffer) {
        let offset = self.channel.index();
        for px in img.as_raw().chunks_exact(3) {
            self.bins[px[offset] as usize] += 1;
        }
    }

    #[inline]
    pub fn channel(&self) -> Channel {
        self.channel
    }

    #[inline]
    pub fn bins(&self) -> &[u64; 256] {
        &self.bins
    }

    /// Total pixel count aggregated into the histogram.
    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }

    /// Bin-wise sum of two histograms of the same channel.
    pub fn merge(&self, other: &Self) -> Result<Self, StatsError> {
        if self.channel != other.channel {
            return Err(StatsError::ChannelMismatch {
                left: other.channel,
                right: self.channel,
            });
        }
        let mut bins = self.bins;
        for (b, o) in bins.iter_mut().zip(other.bins.iter()) {
            *b += o;
        }
        Ok(Self {
            channel: self.channel,
            bins,
        })
    }

    /// Integer first and second moments: `(Σ i·bins[i], Σ i²·bins[i])`.
    pub fn moments(&self) -> (u128, u128) {
        let mut m1: u128 = 0;
        let mut m2: u128 = 0;
        for (i, &c) in self.bins.iter().enumerate() {
            let i = i as u128;
            let c = c as u128;
            m1 += i * c;
            m2 += i * i * c;
        }
        (m1, m2)
    }

    /// Mean intensity; `None` for an empty histogram.
    pub fn mean(&self) -> Option<f64> {
        let total = self.total();
        if total == 0 {
            return None;
        }
        let (m1, _) = self.moments();
        Some(m1 as f64 / total as f64)
    }

    /// Derives exact mean/variance statistics for this histogram.
    pub fn stats(&self) -> Result<ChannelStats, StatsError> {
        let count = self.total();
        if count == 0 {
            return Err(StatsError::EmptyInput);
        }
        let (m1, m2) = self.moments();
        let n = count as u128;
        // count·Σi²bins − (Σi·bins)² is the exact integer variance numerator.
        let numerator = n * m2 - m1 * m1;
        let mean = m1 as f64 / count as f64;
        let variance = numerator as f64 / (count as f64 * count as f64);
        Ok(ChannelStats {
            channel: self.channel,
            pixel_count: count,
            mean,
            variance,
            histogram: self.clone(),
        })
    }
}

/// Per-channel statistics of an aggregated pixel population.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats {
    pub channel: Channel,
    pub pixel_count: u64,
    /// Mean intensity in `[0, 255]`.
    pub mean: f64,
    /// Population variance in intensity² units.
    pub variance: f64,
    pub histogram: ChannelHistogram,
}

/// Histograms of all three channels over the same pixel population.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbHistogram {
    pub r: ChannelHistogram,
    pub g: ChannelHistogram,
    pub b: ChannelHistogram,
}

impl RgbHistogram {
    pub fn new() -> Self {
        Self {
            r: ChannelHistogram::new(Channel::R),
            g: ChannelHistogram::new(Channel::G),
            b: ChannelHistogram::new(Channel::B),
        }
    }

    pub fn from_image(img: &ImageBuffer) -> Self {
        let mut h = Self::new();
        h.add_image(img);
        h
    }

    pub fn add_image(&mut self, img: &ImageBuffer) {
        for px in img.as_raw().chunks_exact(3) {
            self.r.bins[px[0] as usize] += 1;
            self.g.bins[px[1] as usize] += 1;
            self.b.bins[px[2] as usize] += 1;
        }
    }

    pub fn merge(&self, other: &Self) -> Self {
        Self {
            // Same-channel merges cannot fail.
            r: self.r.merge(&other.r).unwrap(),
            g: self.g.merge(&other.g).unwrap(),
            b: self.b.merge(&other.b).unwrap(),
        }
    }

    pub fn channel(&self, channel: Channel) -> &ChannelHistogram {
        match channel {
            Channel::R => &self.r,
            Channel::G => &self.g,
            Channel::B => &self.b,
        }
    }

    /// Pixel count aggregated per channel (identical across channels).
    pub fn total(&self) -> u64 {
        self.r.total()
    }

    pub fn stats(&self) -> Result<RgbStats, StatsError> {
        Ok(RgbStats {
            r: self.r.stats()?,
            g: self.g.stats()?,
            b: self.b.stats()?,
        })
    }
}

impl Default for RgbHistogram {
    fn default() -> Self {
        Self::new()
    }
}

/// Statistics of all three channels over the same pixel population.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbStats {
    pub r: ChannelStats,
    pub g: ChannelStats,
    pub b: ChannelStats,
}

impl RgbStats {
    pub fn channel(&self, channel: Channel) -> &ChannelStats {
        match channel {
            Channel::R => &self.r,
            Channel::G => &self.g,
            Channel::B => &self.b,
        }
    }

    /// The three channel means in R, G, B order.
    pub fn means(&self) -> [f64; 3] {
        [self.r.mean, self.g.mean, self.b.mean]
    }
}

/// Pooled per-channel statistics over a sequence of images.
///
/// Images may differ in size; every pixel contributes equally (pooled
/// mean, no per-image normalization). Order of the input sequence does
/// not affect the result.
pub fn channel_stats<'a, I>(images: I) -> Result<RgbStats, StatsError>
where
    I: IntoIterator<Item = &'a ImageBuffer>,
{
    let mut hist = RgbHistogram::new();
    let mut any = false;
    for img in images {
        hist.add_image(img);
        any = true;
    }
    if !any {
        return Err(StatsError::EmptyInput);
    }
    hist.stats()
}

/// Collects per-image histograms (the "map" half of a map/reduce whose
/// "reduce" is [`RgbHistogram::merge`]).
pub fn per_image_histograms<'a, I>(images: I) -> Vec<RgbHistogram>
where
    I: IntoIterator<Item = &'a ImageBuffer>,
{
    images.into_iter().map(RgbHistogram::from_image).collect()
}
