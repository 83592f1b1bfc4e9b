use crate::error::{Error, Result};

use super::raster::SwapRegion;

pub const BONA_FIDE_VALUE: f64 = 1.0;
pub const ATTACK_VALUE: f64 = 0.0;

/// Square per-cell supervision map with values in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct PixelMap {
    resolution: usize,
    values: Vec<f64>,
}

impl PixelMap {
    pub fn new(resolution: usize, values: Vec<f64>) -> Result<Self> {
        if resolution == 0 || values.len() != resolution * resolution {
            return Err(Error::Geometry(format!(
                "{} values for a {resolution}x{resolution} map",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Geometry(format!("map value {v} outside [0, 1]")));
        }
        Ok(PixelMap { resolution, values })
    }

    pub fn constant(resolution: usize, value: f64) -> Result<Self> {
        PixelMap::new(resolution, vec![value; resolution * resolution])
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.resolution + col]
    }
}

/// How image pixels fall into map cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapGeometry {
    pub image_width: usize,
    pub image_height: usize,
    pub resolution: usize,
}

impl MapGeometry {
    /// Cell width and height in pixels. The image sides must be multiples
    /// of the resolution.
    pub fn cell_size(&self) -> Result<(usize, usize)> {
        let m = self.resolution;
        if m == 0 || self.image_width % m != 0 || self.image_height % m != 0 {
            return Err(Error::Geometry(format!(
                "{}x{} image does not tile into {m}x{m} cells",
                self.image_width, self.image_height
            )));
        }
        Ok((self.image_width / m, self.image_height / m))
    }
}

/// Cells covered by at least half their area take the donor's value.
pub fn update_pixel_map(
    map: &PixelMap,
    region: SwapRegion,
    donor: &PixelMap,
    geometry: MapGeometry,
) -> Result<PixelMap> {
    if map.resolution != geometry.resolution || donor.resolution != geometry.resolution {
        return Err(Error::Geometry(format!(
            "map resolutions {} and {} do not match geometry {}",
            map.resolution, donor.resolution, geometry.resolution
        )));
    }
    let (cell_w, cell_h) = geometry.cell_size()?;
    region.check(geometry.image_width, geometry.image_height)?;
    let overlap_1d = |cell_start: usize, cell_len: usize, start: usize| {
        let lo = cell_start.max(start);
        let hi = (cell_start + cell_len).min(start + region.size);
        hi.saturating_sub(lo)
    };
    let mut out = map.clone();
    let m = geometry.resolution;
    for row in 0..m {
        let dy = overlap_1d(row * cell_h, cell_h, region.top);
        if dy == 0 {
            continue;
        }
        for col in 0..m {
            let dx = overlap_1d(col * cell_w, cell_w, region.left);
            if 2 * dx * dy >= cell_w * cell_h {
                out.values[row * m + col] = donor.get(row, col);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GEOMETRY: MapGeometry = MapGeometry {
        image_width: 224,
        image_height: 224,
        resolution: 14,
    };

    fn changed_cells(before: &PixelMap, after: &PixelMap) -> Vec<(usize, usize)> {
        let m = before.resolution();
        (0..m)
            .flat_map(|r| (0..m).map(move |c| (r, c)))
            .filter(|&(r, c)| before.get(r, c) != after.get(r, c))
            .collect()
    }

    #[test]
    fn aligned_region_replaces_sixteen_cells() {
        let map = PixelMap::constant(14, ATTACK_VALUE).unwrap();
        let donor = PixelMap::constant(14, BONA_FIDE_VALUE).unwrap();
        let out = update_pixel_map(
            &map,
            SwapRegion {
                top: 32,
                left: 32,
                size: 64,
            },
            &donor,
            GEOMETRY,
        )
        .unwrap();
        let expected: Vec<(usize, usize)> = (2..6).flat_map(|r| (2..6).map(move |c| (r, c))).collect();
        assert_eq!(changed_cells(&map, &out), expected);
    }

    #[test]
    fn single_pixel_changes_nothing() {
        let map = PixelMap::constant(14, ATTACK_VALUE).unwrap();
        let donor = PixelMap::constant(14, BONA_FIDE_VALUE).unwrap();
        let out = update_pixel_map(
            &map,
            SwapRegion {
                top: 100,
                left: 7,
                size: 1,
            },
            &donor,
            GEOMETRY,
        )
        .unwrap();
        assert_eq!(out, map);
    }

    #[test]
    fn full_region_replaces_all() {
        let map = PixelMap::constant(14, ATTACK_VALUE).unwrap();
        let donor = PixelMap::constant(14, BONA_FIDE_VALUE).unwrap();
        let out = update_pixel_map(
            &map,
            SwapRegion {
                top: 0,
                left: 0,
                size: 224,
            },
            &donor,
            GEOMETRY,
        )
        .unwrap();
        assert_eq!(out, donor);
    }

    #[test]
    fn half_covered_cell_flips() {
        // 8 of 16 rows of cell (0, 0), all of its columns.
        let map = PixelMap::constant(14, ATTACK_VALUE).unwrap();
        let donor = PixelMap::constant(14, BONA_FIDE_VALUE).unwrap();
        let out = update_pixel_map(
            &map,
            SwapRegion {
                top: 8,
                left: 0,
                size: 16,
            },
            &donor,
            GEOMETRY,
        )
        .unwrap();
        assert_eq!(out.get(0, 0), BONA_FIDE_VALUE);
        assert_eq!(out.get(1, 0), BONA_FIDE_VALUE);
        let out = update_pixel_map(
            &map,
            SwapRegion {
                top: 9,
                left: 0,
                size: 16,
            },
            &donor,
            GEOMETRY,
        )
        .unwrap();
        assert_eq!(out.get(0, 0), ATTACK_VALUE);
        assert_eq!(out.get(1, 0), BONA_FIDE_VALUE);
    }

    #[test]
    fn inconsistent_geometry_rejected() {
        let map = PixelMap::constant(14, 0.0).unwrap();
        let bad = MapGeometry {
            image_width: 225,
            ..GEOMETRY
        };
        assert!(matches!(
            update_pixel_map(
                &map,
                SwapRegion {
                    top: 0,
                    left: 0,
                    size: 1
                },
                &map,
                bad
            ),
            Err(Error::Geometry(_))
        ));
        let other = PixelMap::constant(7, 0.0).unwrap();
        assert!(update_pixel_map(
            &map,
            SwapRegion {
                top: 0,
                left: 0,
                size: 1
            },
            &other,
            GEOMETRY
        )
        .is_err());
    }

    #[test]
    fn values_validated() {
        assert!(PixelMap::new(2, vec![0.0, 0.5, 1.0, 1.5]).is_err());
        assert!(PixelMap::new(2, vec![0.0; 3]).is_err());
    }
}
