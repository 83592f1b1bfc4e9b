use crate::error::{Error, Result};

/// Equal-interval frame selection: `floor(i * frame_count / n)` for
/// `i in 0..n`, de-duplicated when the video is shorter than `n` frames.
pub fn frame_indices(frame_count: usize, n: usize) -> Result<Vec<usize>> {
    if frame_count == 0 || n == 0 {
        return Err(Error::InvalidArgument("frame_count and n must be positive".into()));
    }
    let mut out: Vec<usize> = (0..n as u128)
        .map(|i| (i * frame_count as u128 / n as u128) as usize)
        .collect();
    out.dedup();
    Ok(out)
}
