//! Cross-attribute patch swapping for PAD training data.
//!
//! A bona fide image, with probability `p1`, receives a square patch from
//! another bona fide image and stays bona fide. An attack image, with
//! probability `p2`, receives a patch from an attack donor (probability
//! `p3`) or a bona fide donor; for bona fide donors `p4` picks the default
//! patch size over the larger alternative. Attack images stay labelled
//! attack, and their pixel-wise maps take the donor's values over the
//! swapped cells. Donors come from a different attribute group whenever
//! the pool has one.

mod pixel_map;
mod raster;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::PadLabel;
use crate::error::{Error, Result};

pub use pixel_map::{update_pixel_map, MapGeometry, PixelMap, ATTACK_VALUE, BONA_FIDE_VALUE};
pub use raster::{swap_patch, RasterImage, SwapRegion, CHANNELS};

pub const DEFAULT_IMAGE_SIDE: usize = 224;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairSwapParams {
    /// Swap probability for bona fide inputs.
    pub p1: f64,
    /// Swap probability for attack inputs.
    pub p2: f64,
    /// Probability that an attack input's donor is an attack.
    pub p3: f64,
    /// Probability of `patch_size` (rather than `alt_patch_size`) for a
    /// bona fide donor into an attack input.
    pub p4: f64,
    pub patch_size: usize,
    pub alt_patch_size: usize,
    pub map_resolution: usize,
    pub cross_group: bool,
    pub seed: u64,
}

impl Default for FairSwapParams {
    fn default() -> Self {
        FairSwapParams {
            p1: 0.3,
            p2: 0.3,
            p3: 0.5,
            p4: 0.5,
            patch_size: 64,
            alt_patch_size: 112,
            map_resolution: 14,
            cross_group: true,
            seed: 0,
        }
    }
}

impl FairSwapParams {
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("p3", self.p3), ("p4", self.p4)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("{name} = {p} outside [0, 1]")));
            }
        }
        for size in [self.patch_size, self.alt_patch_size] {
            if size == 0 || size > width || size > height {
                return Err(Error::PatchTooLarge { size, width, height });
            }
        }
        if self.map_resolution == 0 {
            return Err(Error::Geometry("map resolution must be positive".into()));
        }
        Ok(())
    }
}

/// One sample as seen by the augmenter; also the shape of pool entries.
#[derive(Debug, Clone, Copy)]
pub struct SwapSample<'a> {
    pub id: &'a str,
    pub image: &'a RasterImage,
    pub label: PadLabel,
    pub map: Option<&'a PixelMap>,
    pub group: &'a str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSample {
    pub image: RasterImage,
    pub binary_label: PadLabel,
    pub pixel_map: Option<PixelMap>,
    pub applied: bool,
    pub region: Option<SwapRegion>,
    pub donor_id: Option<String>,
    pub donor_label: Option<PadLabel>,
}

/// Binary label after a swap. Bona fide inputs only ever receive bona fide
/// donors, so no swap changes the label.
pub fn update_binary_label(original: PadLabel, _donor: PadLabel, _applied: bool) -> PadLabel {
    original
}

/// Generator for one sample, derived from `(seed, sample_id)` so samples can
/// be augmented in any order or in parallel.
pub fn sample_rng(seed: u64, sample_id: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(sample_id.as_bytes());
    ChaCha8Rng::from_seed(hasher.finalize().into())
}

fn donors_of<'p, 'a>(
    pool: &'p [SwapSample<'a>],
    sample: &SwapSample<'_>,
    label: PadLabel,
    cross_group: bool,
) -> Vec<&'p SwapSample<'a>> {
    let same_label: Vec<&SwapSample<'a>> = pool.iter().filter(|c| c.label == label && c.id != sample.id).collect();
    if cross_group {
        let other_group: Vec<&SwapSample<'a>> =
            same_label.iter().copied().filter(|c| c.group != sample.group).collect();
        if !other_group.is_empty() {
            return other_group;
        }
    }
    same_label
}

fn unchanged(sample: &SwapSample<'_>) -> AugmentedSample {
    AugmentedSample {
        image: sample.image.clone(),
        binary_label: sample.label,
        pixel_map: sample.map.cloned(),
        applied: false,
        region: None,
        donor_id: None,
        donor_label: None,
    }
}

/// Applies the probabilistic swap to `sample` with donors from `pool`.
///
/// Random draws happen in a fixed order (apply, donor class, donor, patch
/// size, row, column), so the result is a pure function of the inputs and
/// the generator state.
pub fn fairswap_augment<R: Rng + ?Sized>(
    sample: &SwapSample<'_>,
    pool: &[SwapSample<'_>],
    params: &FairSwapParams,
    rng: &mut R,
) -> Result<AugmentedSample> {
    let (width, height) = sample.image.dims();
    params.validate(width, height)?;
    if let Some(c) = pool.iter().find(|c| c.image.dims() != (width, height)) {
        return Err(Error::DimensionMismatch {
            expected: (width, height),
            found: c.image.dims(),
        });
    }
    let bonafide = donors_of(pool, sample, PadLabel::BonaFide, params.cross_group);
    let attack = donors_of(pool, sample, PadLabel::Attack, params.cross_group);
    match sample.label {
        PadLabel::BonaFide if params.p1 > 0.0 && bonafide.is_empty() => {
            return Err(Error::EmptyDonorPool(PadLabel::BonaFide))
        }
        PadLabel::Attack if params.p2 > 0.0 && params.p3 < 1.0 && bonafide.is_empty() => {
            return Err(Error::EmptyDonorPool(PadLabel::BonaFide))
        }
        PadLabel::Attack if params.p2 > 0.0 && params.p3 > 0.0 && attack.is_empty() => {
            return Err(Error::EmptyDonorPool(PadLabel::Attack))
        }
        _ => {}
    }

    let (donors, size) = match sample.label {
        PadLabel::BonaFide => {
            if !rng.random_bool(params.p1) {
                return Ok(unchanged(sample));
            }
            (&bonafide, Some(params.patch_size))
        }
        PadLabel::Attack => {
            if !rng.random_bool(params.p2) {
                return Ok(unchanged(sample));
            }
            if rng.random_bool(params.p3) {
                (&attack, Some(params.patch_size))
            } else {
                (&bonafide, None)
            }
        }
    };
    let donor = donors[rng.random_range(0..donors.len())];
    let size = size.unwrap_or_else(|| {
        if rng.random_bool(params.p4) {
            params.patch_size
        } else {
            params.alt_patch_size
        }
    });
    let region = SwapRegion {
        top: rng.random_range(0..=height - size),
        left: rng.random_range(0..=width - size),
        size,
    };

    let image = swap_patch(sample.image, donor.image, region)?;
    let pixel_map = match sample.map {
        Some(map) => {
            let synthesized;
            let donor_map = match donor.map {
                Some(m) => m,
                None => {
                    let value = match donor.label {
                        PadLabel::BonaFide => BONA_FIDE_VALUE,
                        PadLabel::Attack => ATTACK_VALUE,
                    };
                    synthesized = PixelMap::constant(map.resolution(), value)?;
                    &synthesized
                }
            };
            let geometry = MapGeometry {
                image_width: width,
                image_height: height,
                resolution: map.resolution(),
            };
            Some(update_pixel_map(map, region, donor_map, geometry)?)
        }
        None => None,
    };
    Ok(AugmentedSample {
        image,
        binary_label: update_binary_label(sample.label, donor.label, true),
        pixel_map,
        applied: true,
        region: Some(region),
        donor_id: Some(donor.id.to_string()),
        donor_label: Some(donor.label),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Corpus {
        images: Vec<RasterImage>,
        maps: Vec<PixelMap>,
        labels: Vec<PadLabel>,
        ids: Vec<String>,
        groups: Vec<&'static str>,
    }

    impl Corpus {
        fn new(n: usize) -> Corpus {
            let labels: Vec<PadLabel> = (0..n)
                .map(|i| {
                    if i % 2 == 0 {
                        PadLabel::BonaFide
                    } else {
                        PadLabel::Attack
                    }
                })
                .collect();
            Corpus {
                images: (0..n)
                    .map(|i| RasterImage::filled(224, 224, [i as u8, 255 - i as u8, 7]).unwrap())
                    .collect(),
                maps: labels
                    .iter()
                    .map(|l| PixelMap::constant(14, if *l == PadLabel::BonaFide { 1.0 } else { 0.0 }).unwrap())
                    .collect(),
                labels,
                ids: (0..n).map(|i| format!("s{i}")).collect(),
                groups: (0..n).map(|i| if i % 4 < 2 { "male" } else { "female" }).collect(),
            }
        }

        fn sample(&self, i: usize) -> SwapSample<'_> {
            SwapSample {
                id: &self.ids[i],
                image: &self.images[i],
                label: self.labels[i],
                map: Some(&self.maps[i]),
                group: self.groups[i],
            }
        }

        fn pool_without(&self, i: usize) -> Vec<SwapSample<'_>> {
            (0..self.ids.len())
                .filter(|&j| j != i)
                .map(|j| self.sample(j))
                .collect()
        }
    }

    #[test]
    fn disabled_is_identity() {
        let c = Corpus::new(8);
        let params = FairSwapParams {
            p1: 0.0,
            p2: 0.0,
            ..Default::default()
        };
        for i in 0..8 {
            let out =
                fairswap_augment(&c.sample(i), &c.pool_without(i), &params, &mut sample_rng(1, &c.ids[i])).unwrap();
            assert!(!out.applied);
            assert_eq!(out.image, c.images[i]);
            assert_eq!(out.pixel_map.as_ref(), Some(&c.maps[i]));
            assert_eq!(out.binary_label, c.labels[i]);
        }
    }

    #[test]
    fn bona_fide_swap_takes_bona_fide_pixels() {
        let c = Corpus::new(8);
        let params = FairSwapParams {
            p1: 1.0,
            ..Default::default()
        };
        let out = fairswap_augment(&c.sample(0), &c.pool_without(0), &params, &mut sample_rng(3, "s0")).unwrap();
        assert!(out.applied);
        assert_eq!(out.binary_label, PadLabel::BonaFide);
        assert_eq!(out.donor_label, Some(PadLabel::BonaFide));
        let donor: usize = out.donor_id.as_ref().unwrap()[1..].parse().unwrap();
        // sample 0 is male; donors must be female bona fides
        assert_eq!(c.groups[donor], "female");
        let region = out.region.unwrap();
        assert_eq!(region.size, 64);
        for y in 0..224 {
            for x in 0..224 {
                let expected = if region.contains(x, y) {
                    c.images[donor].pixel(x, y)
                } else {
                    c.images[0].pixel(x, y)
                };
                assert_eq!(out.image.pixel(x, y), expected);
            }
        }
        assert_eq!(out.pixel_map.as_ref(), Some(&c.maps[0]));
    }

    #[test]
    fn attack_with_bona_fide_donor_updates_map_not_label() {
        let c = Corpus::new(8);
        let params = FairSwapParams {
            p2: 1.0,
            p3: 0.0,
            p4: 1.0,
            ..Default::default()
        };
        let out = fairswap_augment(&c.sample(1), &c.pool_without(1), &params, &mut sample_rng(5, "s1")).unwrap();
        assert_eq!(out.binary_label, PadLabel::Attack);
        let region = out.region.unwrap();
        assert_eq!(region.size, 64);
        let map = out.pixel_map.unwrap();
        let geometry = MapGeometry {
            image_width: 224,
            image_height: 224,
            resolution: 14,
        };
        let expected = update_pixel_map(&c.maps[1], region, &c.maps[0], geometry).unwrap();
        assert_eq!(map, expected);
        assert!(map.values().contains(&BONA_FIDE_VALUE));
    }

    #[test]
    fn alternative_patch_size() {
        let c = Corpus::new(8);
        let params = FairSwapParams {
            p2: 1.0,
            p3: 0.0,
            p4: 0.0,
            ..Default::default()
        };
        let out = fairswap_augment(&c.sample(1), &c.pool_without(1), &params, &mut sample_rng(5, "s1")).unwrap();
        assert_eq!(out.region.unwrap().size, 112);
    }

    #[test]
    fn deterministic_per_seed() {
        let c = Corpus::new(16);
        let params = FairSwapParams {
            p1: 0.7,
            p2: 0.7,
            ..Default::default()
        };
        for i in 0..16 {
            let run = |seed| {
                fairswap_augment(
                    &c.sample(i),
                    &c.pool_without(i),
                    &params,
                    &mut sample_rng(seed, &c.ids[i]),
                )
                .unwrap()
            };
            assert_eq!(run(11), run(11));
        }
    }

    #[test]
    fn cross_group_falls_back_to_same_group() {
        let c = Corpus::new(8);
        // s0 and s4 are both male: the only bona fide donor shares the group
        let pool: Vec<SwapSample<'_>> = [1, 4].iter().map(|&j| c.sample(j)).collect();
        let params = FairSwapParams {
            p1: 1.0,
            ..Default::default()
        };
        let sample = c.sample(0);
        let out = fairswap_augment(&sample, &pool, &params, &mut sample_rng(0, "s0")).unwrap();
        assert_eq!(out.donor_id.as_deref(), Some("s4"));
    }

    #[test]
    fn errors() {
        let c = Corpus::new(4);
        let attacks_only: Vec<SwapSample<'_>> = vec![c.sample(1), c.sample(3)];
        let params = FairSwapParams {
            p1: 1.0,
            ..Default::default()
        };
        assert!(matches!(
            fairswap_augment(&c.sample(0), &attacks_only, &params, &mut sample_rng(0, "")),
            Err(Error::EmptyDonorPool(PadLabel::BonaFide))
        ));
        let small = RasterImage::filled(32, 32, [0, 0, 0]).unwrap();
        let small_sample = SwapSample {
            image: &small,
            ..c.sample(0)
        };
        assert!(matches!(
            fairswap_augment(&small_sample, &[], &params, &mut sample_rng(0, "")),
            Err(Error::PatchTooLarge { .. })
        ));
        let odd = RasterImage::filled(224, 200, [0, 0, 0]).unwrap();
        let odd_donor = SwapSample {
            image: &odd,
            ..c.sample(2)
        };
        assert!(matches!(
            fairswap_augment(&c.sample(0), &[odd_donor], &params, &mut sample_rng(0, "")),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn label_rule() {
        use PadLabel::*;
        assert_eq!(update_binary_label(BonaFide, BonaFide, true), BonaFide);
        assert_eq!(update_binary_label(Attack, BonaFide, true), Attack);
        assert_eq!(update_binary_label(Attack, Attack, false), Attack);
    }
}
