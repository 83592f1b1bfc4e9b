use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CHANNELS: usize = 3;

/// 8-bit RGB image, row-major, channels interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument("image dimensions must be positive".into()));
        }
        if data.len() != width * height * CHANNELS {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                found: (data.len() / CHANNELS, 1),
            });
        }
        Ok(RasterImage { width, height, data })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        let data = rgb.iter().copied().cycle().take(width * height * CHANNELS).collect();
        RasterImage::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

/// Square region, identical coordinates in donor and recipient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapRegion {
    pub top: usize,
    pub left: usize,
    pub size: usize,
}

impl SwapRegion {
    pub fn check(&self, width: usize, height: usize) -> Result<()> {
        let fits = self.size > 0
            && self.top.checked_add(self.size).is_some_and(|b| b <= height)
            && self.left.checked_add(self.size).is_some_and(|r| r <= width);
        if fits {
            Ok(())
        } else {
            Err(Error::RegionOutOfBounds {
                top: self.top,
                left: self.left,
                size: self.size,
                width,
                height,
            })
        }
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        (self.left..self.left + self.size).contains(&x) && (self.top..self.top + self.size).contains(&y)
    }
}

/// `dst` with the pixels of `region` taken from `src`.
pub fn swap_patch(dst: &RasterImage, src: &RasterImage, region: SwapRegion) -> Result<RasterImage> {
    if dst.dims() != src.dims() {
        return Err(Error::DimensionMismatch {
            expected: dst.dims(),
            found: src.dims(),
        });
    }
    region.check(dst.width, dst.height)?;
    let mut out = dst.clone();
    let row_bytes = region.size * CHANNELS;
    for y in region.top..region.top + region.size {
        let start = (y * dst.width + region.left) * CHANNELS;
        out.data[start..start + row_bytes].copy_from_slice(&src.data[start..start + row_bytes]);
    }
    Ok(out)
}
