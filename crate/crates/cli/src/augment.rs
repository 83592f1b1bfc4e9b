use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use padfair_core::fairswap::{
    fairswap_augment, sample_rng, PixelMap, RasterImage, SwapRegion, SwapSample, ATTACK_VALUE, BONA_FIDE_VALUE,
};
use padfair_core::{FairSwapParams, PadLabel, SampleRecord, Split};
use serde::{Deserialize, Serialize};

use crate::args::{AugmentArgs, MapFormat};
use crate::error::CliError;
use crate::io::{load_manifest, to_json, write_atomic, write_bytes};

/// One line of the output manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentRecord {
    pub sample_id: String,
    pub subject_id: String,
    pub pad_label: PadLabel,
    pub binary_label: PadLabel,
    pub group: String,
    pub source_media_path: PathBuf,
    pub media_path: PathBuf,
    pub map_path: PathBuf,
    pub applied: bool,
    pub region: Option<SwapRegion>,
    pub donor_id: Option<String>,
}

fn image_err(path: &Path) -> impl FnOnce(png::DecodingError) -> CliError + '_ {
    move |e| match e {
        png::DecodingError::IoError(source) => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => CliError::Image {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    }
}

/// Decodes any 8- or 16-bit PNG into 8-bit RGB.
pub fn read_png(path: &Path) -> Result<RasterImage, CliError> {
    let file = File::open(path).map_err(CliError::io(path))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(image_err(path))?;
    let size = reader.output_buffer_size().ok_or_else(|| CliError::Image {
        path: path.to_path_buf(),
        message: "image too large".into(),
    })?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(image_err(path))?;
    buf.truncate(info.buffer_size());
    let rgb: Vec<u8> = match info.color_type {
        png::ColorType::Rgb => buf,
        png::ColorType::Rgba => buf.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect(),
        png::ColorType::Grayscale => buf.iter().flat_map(|&g| [g, g, g]).collect(),
        png::ColorType::GrayscaleAlpha => buf.chunks_exact(2).flat_map(|p| [p[0], p[0], p[0]]).collect(),
        png::ColorType::Indexed => {
            return Err(CliError::Image {
                path: path.to_path_buf(),
                message: "palette not expanded".into(),
            })
        }
    };
    RasterImage::new(info.width as usize, info.height as usize, rgb).map_err(CliError::input(path))
}

fn encode_png(width: usize, height: usize, color: png::ColorType, data: &[u8]) -> Vec<u8> {
    let mut bytes = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut bytes, width as u32, height as u32);
        encoder.set_color(color);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().expect("in-memory PNG header");
        writer.write_image_data(data).expect("in-memory PNG data");
        writer.finish().expect("in-memory PNG end");
    }
    bytes
}

pub fn png_bytes(image: &RasterImage) -> Vec<u8> {
    encode_png(image.width(), image.height(), png::ColorType::Rgb, image.data())
}

/// Grayscale, 0 for attack-valued cells and 255 for bona fide ones.
pub fn map_png_bytes(map: &PixelMap) -> Vec<u8> {
    let gray: Vec<u8> = map
        .values()
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    encode_png(map.resolution(), map.resolution(), png::ColorType::Grayscale, &gray)
}

/// `M` rows of `M` comma-separated values.
pub fn write_map_csv(map: &PixelMap, out: &mut dyn Write) -> io::Result<()> {
    for row in map.values().chunks(map.resolution()) {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// File stem for a sample id: anything outside `[A-Za-z0-9._-]` becomes `_`.
fn file_stem(sample_id: &str) -> String {
    sample_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "._-".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

struct Loaded {
    record: SampleRecord,
    source: PathBuf,
    image: RasterImage,
    map: PixelMap,
    group: String,
}

pub fn run(args: &AugmentArgs, seed: u64) -> Result<(), CliError> {
    let manifest = load_manifest(&args.manifest)?;
    let params: FairSwapParams = args.params(seed);
    let root = match &args.image_root {
        Some(r) => r.clone(),
        None => args.manifest.parent().map(Path::to_path_buf).unwrap_or_default(),
    };

    let mut stems = HashSet::new();
    let mut loaded = Vec::new();
    for record in manifest.split(Split::Train) {
        let media = record.media_path.as_ref().ok_or_else(|| CliError::Image {
            path: args.manifest.clone(),
            message: format!("sample {:?} has no media_path", record.sample_id),
        })?;
        if !stems.insert(file_stem(&record.sample_id)) {
            return Err(CliError::Usage(format!(
                "sample id {:?} collides with another after filename sanitising",
                record.sample_id
            )));
        }
        let source = root.join(media);
        let image = read_png(&source)?;
        let value = match record.pad_label {
            PadLabel::BonaFide => BONA_FIDE_VALUE,
            PadLabel::Attack => ATTACK_VALUE,
        };
        let map = PixelMap::constant(params.map_resolution, value).map_err(CliError::usage)?;
        let group = args
            .partition
            .group_of(&record.attributes)
            .unwrap_or_else(|| "unknown".to_string());
        loaded.push(Loaded {
            record: record.clone(),
            source: media.into(),
            image,
            map,
            group,
        });
    }
    if loaded.is_empty() {
        return Err(padfair_core::Error::EmptyTrainSelection.into());
    }

    let pool: Vec<SwapSample> = loaded
        .iter()
        .map(|l| SwapSample {
            id: &l.record.sample_id,
            image: &l.image,
            label: l.record.pad_label,
            map: Some(&l.map),
            group: &l.group,
        })
        .collect();

    let map_ext = match args.map_format {
        MapFormat::Csv => "csv",
        MapFormat::Png => "png",
    };
    let mut lines = Vec::with_capacity(pool.len());
    let mut applied = 0usize;
    for (sample, l) in pool.iter().zip(&loaded) {
        let mut rng = sample_rng(seed, sample.id);
        let out = fairswap_augment(sample, &pool, &params, &mut rng)?;
        let stem = file_stem(sample.id);
        let media_path = PathBuf::from("images").join(format!("{stem}.png"));
        let map_path = PathBuf::from("maps").join(format!("{stem}.{map_ext}"));
        write_bytes(&args.out.join(&media_path), &png_bytes(&out.image))?;
        let map = out.pixel_map.as_ref().expect("inputs always carry maps");
        match args.map_format {
            MapFormat::Csv => write_atomic(&args.out.join(&map_path), |w| write_map_csv(map, w))?,
            MapFormat::Png => write_bytes(&args.out.join(&map_path), &map_png_bytes(map))?,
        }
        applied += out.applied as usize;
        lines.push(AugmentRecord {
            sample_id: l.record.sample_id.clone(),
            subject_id: l.record.subject_id.clone(),
            pad_label: l.record.pad_label,
            binary_label: out.binary_label,
            group: l.group.clone(),
            source_media_path: l.source.clone(),
            media_path,
            map_path,
            applied: out.applied,
            region: out.region,
            donor_id: out.donor_id,
        });
    }
    write_atomic(&args.out.join("manifest.jsonl"), |w| {
        for line in &lines {
            serde_json::to_writer(&mut *w, line)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })?;
    write_bytes(&args.out.join("params.json"), &to_json(&params))?;
    println!("augmented {} training samples, {applied} swapped", lines.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let data: Vec<u8> = (0..4 * 3 * 3).map(|i| i as u8 * 7).collect();
        let image = RasterImage::new(4, 3, data).unwrap();
        let path = dir.path().join("x.png");
        write_bytes(&path, &png_bytes(&image)).unwrap();
        assert_eq!(read_png(&path).unwrap(), image);
    }

    #[test]
    fn grayscale_expands_to_rgb() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.png");
        write_bytes(&path, &encode_png(2, 1, png::ColorType::Grayscale, &[10, 200])).unwrap();
        assert_eq!(read_png(&path).unwrap().data(), &[10, 10, 10, 200, 200, 200]);
    }

    #[test]
    fn map_csv_layout() {
        let map = PixelMap::new(2, vec![1.0, 0.0, 0.5, 1.0]).unwrap();
        let mut out = Vec::new();
        write_map_csv(&map, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "1,0\n0.5,1\n");
    }

    #[test]
    fn stems_are_filesystem_safe() {
        assert_eq!(file_stem("a/b c:d.e-f_g"), "a_b_c_d.e-f_g");
    }

    #[test]
    fn corrupt_png_is_an_image_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.png");
        std::fs::write(&path, b"not a png").unwrap();
        let err = read_png(&path).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert_eq!(err.path(), Some(path.as_path()));
    }
}
