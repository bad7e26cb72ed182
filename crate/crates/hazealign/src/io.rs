//! Lossless 8-bit RGB PNG input and output.
//!
//! Only 8-bit RGB rasters are accepted; anything else (16-bit data,
//! grayscale, alpha) is rejected rather than converted, since a silent
//! conversion would change the channel statistics the rest of the
//! pipeline is built to preserve.

use std::path::{Path, PathBuf};

use image::{ColorType, DynamicImage, ImageFormat, ImageReader, RgbImage};

use hazealign_core::ImageBuffer;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot decode {path}: {source}")]
    Decode {
        path: PathBuf,
        source: image::ImageError,
    },
    #[error("unsupported bit depth in {path}: {color:?} (expected 8-bit RGB)")]
    UnsupportedBitDepth { path: PathBuf, color: ColorType },
    #[error("unsupported color model in {path}: {color:?} (expected 8-bit RGB)")]
    UnsupportedColorModel { path: PathBuf, color: ColorType },
    #[error("invalid raster in {path}: {source}")]
    Malformed {
        path: PathBuf,
        source: hazealign_core::ImageError,
    },
    #[error("cannot create directory {path}: {source}")]
    CreateDir {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Encode {
        path: PathBuf,
        source: image::ImageError,
    },
}

/// Decodes an 8-bit RGB raster from `path`.
pub fn load_image(path: &Path) -> Result<ImageBuffer, IoError> {
    let reader = ImageReader::open(path).map_err(|source| IoError::Open {
        path: path.to_path_buf(),
        source,
    })?;
    let decoded = reader.decode().map_err(|source| IoError::Decode {
        path: path.to_path_buf(),
        source,
    })?;
    match decoded {
        DynamicImage::ImageRgb8(rgb) => {
            let (w, h) = rgb.dimensions();
            ImageBuffer::from_raw(w, h, rgb.into_raw()).map_err(|source| IoError::Malformed {
                path: path.to_path_buf(),
                source,
            })
        }
        other => {
            let color = other.color();
            let err = match color {
                ColorType::L16
                | ColorType::La16
                | ColorType::Rgb16
                | ColorType::Rgba16
                | ColorType::Rgb32F
                | ColorType::Rgba32F => IoError::UnsupportedBitDepth {
                    path: path.to_path_buf(),
                    color,
                },
                _ => IoError::UnsupportedColorModel {
                    path: path.to_path_buf(),
                    color,
                },
            };
            Err(err)
        }
    }
}

/// Writes an 8-bit RGB PNG to `path`, creating parent directories as
/// needed. `load_image` inverts it bit-exactly.
pub fn save_image(img: &ImageBuffer, path: &Path) -> Result<(), IoError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|source| IoError::CreateDir {
                path: parent.to_path_buf(),
                source,
            })?;
        }
    }
    let raster = RgbImage::from_raw(img.width(), img.height(), img.as_raw().to_vec())
        .expect("ImageBuffer invariants guarantee a well-formed raster");
    raster
        .save_with_format(path, ImageFormat::Png)
        .map_err(|source| IoError::Encode {
            path: path.to_path_buf(),
            source,
        })
}
