//! Deterministic synthetic image sets for tests, demos and the CLI
//! `synth` command. Everything is generated from a seed, nothing is
//! downloaded.

use std::path::Path;

use image::{ImageFormat, Rgb};
use rand::Rng;

use crate::canonical;
use crate::dataset::{dir_name, ClassCatalog};
use crate::error::{Error, Result};
use crate::raster::RgbImage;
use crate::rng::derive_rng;

pub const TEXTURE_CLASSES: [&str; 3] = ["Striped", "Speckled", "Blotched"];

/// Minimum side of generated textures; some are wider or taller.
pub const TEXTURE_SIDE: u32 = 256;

pub const CATALOG_FILE: &str = "catalog.json";

fn jitter<R: Rng>(rng: &mut R, base: u8, spread: i32) -> u8 {
    (base as i32 + rng.gen_range(-spread..=spread)).clamp(0, 255) as u8
}

/// One texture of class `class` (0 striped red, 1 speckled green,
/// 2 blue blotches on gray).
pub fn texture_image(class: usize, seed: u64, index: u64) -> RgbImage {
    let mut rng = derive_rng("fixture", seed, ((class as u64) << 32) | index);
    let w = TEXTURE_SIDE + rng.gen_range(0..=64);
    let h = TEXTURE_SIDE + rng.gen_range(0..=64);
    match class % 3 {
        0 => {
            let period = rng.gen_range(8..=24u32);
            let duty = rng.gen_range(period / 3..=period * 2 / 3).max(1);
            let orient = rng.gen_range(0..3u32);
            let phase = rng.gen_range(0..period);
            let fg = [rng.gen_range(170..=230u8), rng.gen_range(20..=60), rng.gen_range(20..=60)];
            let bg = [rng.gen_range(30..=70u8), rng.gen_range(10..=30), rng.gen_range(10..=30)];
            let mut img = RgbImage::new(w, h);
            for (x, y, p) in img.enumerate_pixels_mut() {
                let t = match orient {
                    0 => y,
                    1 => x,
                    _ => x + y,
                };
                let c = if (t + phase) % period < duty { fg } else { bg };
                *p = Rgb([jitter(&mut rng, c[0], 12), jitter(&mut rng, c[1], 12), jitter(&mut rng, c[2], 12)]);
            }
            img
        }
        1 => {
            let mut img = RgbImage::new(w, h);
            for p in img.pixels_mut() {
                *p = Rgb([rng.gen_range(0..=80), rng.gen_range(110..=230), rng.gen_range(0..=80)]);
            }
            img
        }
        _ => {
            let gray = rng.gen_range(110..=150u8);
            let mut img = RgbImage::from_pixel(w, h, Rgb([gray, gray, gray.saturating_add(10)]));
            let blobs = rng.gen_range(4..=9);
            for _ in 0..blobs {
                let cx = rng.gen_range(0..w) as i64;
                let cy = rng.gen_range(0..h) as i64;
                let r = rng.gen_range(15..=45i64);
                let color = [rng.gen_range(40..=80u8), rng.gen_range(60..=100), rng.gen_range(170..=230)];
                for y in (cy - r).max(0)..(cy + r).min(h as i64) {
                    for x in (cx - r).max(0)..(cx + r).min(w as i64) {
                        if (x - cx).pow(2) + (y - cy).pow(2) <= r * r {
                            img.put_pixel(x as u32, y as u32, Rgb(color));
                        }
                    }
                }
            }
            for p in img.pixels_mut() {
                let n = rng.gen_range(-6..=6i32);
                for c in p.0.iter_mut() {
                    *c = (*c as i32 + n).clamp(0, 255) as u8;
                }
            }
            img
        }
    }
}

pub fn write_png(path: &Path, img: &RgbImage) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    img.save_with_format(path, ImageFormat::Png).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

fn save_catalog(root: &Path, catalog: &ClassCatalog) -> Result<()> {
    canonical::write_canonical_json(&root.join(CATALOG_FILE), catalog)
}

/// Writes `per_class` textures for each of the three classes under
/// `root/<class-dir>/NNNN.png` plus `root/catalog.json`.
pub fn write_texture_dataset(root: &Path, per_class: usize, seed: u64, with_outlier: bool) -> Result<ClassCatalog> {
    let catalog = ClassCatalog::from_names(&TEXTURE_CLASSES, with_outlier)?;
    use rayon::prelude::*;
    let jobs: Vec<(usize, usize)> = (0..TEXTURE_CLASSES.len())
        .flat_map(|c| (0..per_class).map(move |i| (c, i)))
        .collect();
    jobs.par_iter().try_for_each(|&(c, i)| {
        let path = root.join(dir_name(TEXTURE_CLASSES[c])).join(format!("{i:04}.png"));
        write_png(&path, &texture_image(c, seed, i as u64))
    })?;
    save_catalog(root, &catalog)?;
    Ok(catalog)
}

/// Off-domain images (hue checkerboards) for the outlier class.
pub fn write_outlier_images(dir: &Path, n: usize, seed: u64) -> Result<()> {
    for i in 0..n {
        let mut rng = derive_rng("fixture-outlier", seed, i as u64);
        let cell = rng.gen_range(16..=48u32);
        let a = [rng.gen(), rng.gen(), rng.gen()];
        let b = [rng.gen(), rng.gen(), rng.gen()];
        let img = RgbImage::from_fn(TEXTURE_SIDE, TEXTURE_SIDE, |x, y| {
            Rgb(if (x / cell + y / cell) % 2 == 0 { a } else { b })
        });
        write_png(&dir.join(format!("outlier-{i:04}.png")), &img)?;
    }
    Ok(())
}

/// A stand-in with the requested per-class counts: small flat-colored
/// images of side `side`, each made unique by its first pixels.
pub fn write_replica_dataset(root: &Path, counts: &[(&str, usize)], side: u32) -> Result<ClassCatalog> {
    let names: Vec<&str> = counts.iter().map(|(n, _)| *n).collect();
    let catalog = ClassCatalog::from_names(&names, false)?;
    use rayon::prelude::*;
    let jobs: Vec<(usize, usize)> = counts
        .iter()
        .enumerate()
        .flat_map(|(c, &(_, n))| (0..n).map(move |i| (c, i)))
        .collect();
    jobs.par_iter().try_for_each(|&(c, i)| {
        let shade = (c * 23 % 256) as u8;
        let mut img = RgbImage::from_pixel(side, side, Rgb([shade, 255 - shade, 128]));
        img.put_pixel(0, 0, Rgb([(i & 0xff) as u8, (i >> 8) as u8, c as u8]));
        let path = root.join(dir_name(counts[c].0)).join(format!("img-{i:04}.png"));
        write_png(&path, &img)
    })?;
    save_catalog(root, &catalog)?;
    Ok(catalog)
}
