#![allow(dead_code)]

use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rdhei::{DataHidingKey, EncryptionKey, RasterImage};

pub fn testdata(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("testdata")
        .join(name)
}

pub fn ke(seed: u8) -> EncryptionKey {
    EncryptionKey::from_bytes([seed; 32])
}

pub fn kd(seed: u8) -> DataHidingKey {
    DataHidingKey::from_bytes([seed.wrapping_add(0x80); 32])
}

/// A photograph-like test image: a few low-frequency waves over a gradient,
/// a couple of hard-edged shapes and mild sensor noise.
pub fn smooth_image(width: usize, height: usize, seed: u64) -> RasterImage {
    let mut rng = StdRng::seed_from_u64(seed);
    let waves: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.random_range(10.0..40.0),
                rng.random_range(0.002..0.03),
                rng.random_range(0.002..0.03),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let base = rng.random_range(60.0..190.0);
    let (gx, gy) = (rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1));
    let shapes: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(0.0..width as f64),
                rng.random_range(0.0..height as f64),
                rng.random_range(4.0..width as f64 / 4.0),
                rng.random_range(-50.0..50.0),
            )
        })
        .collect();
    let noise = rng.random_range(0.0..3.0);
    let mut samples = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let (xf, yf) = (x as f64, y as f64);
            let mut v = base + gx * xf + gy * yf;
            for &(amp, fx, fy, phase) in &waves {
                v += amp * (fx * xf + fy * yf + phase).sin();
            }
            for &(cx, cy, r, delta) in &shapes {
                if (xf - cx).hypot(yf - cy) < r {
                    v += delta;
                }
            }
            v += rng.random_range(-noise..=noise);
            samples.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    RasterImage::new(width, height, samples).unwrap()
}

pub fn random_bytes(len: usize, seed: u64) -> Vec<u8> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..len).map(|_| rng.random()).collect()
}
