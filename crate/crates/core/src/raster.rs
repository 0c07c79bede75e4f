//! 8-bit grayscale rasters and binary PGM (P5) I/O.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Side length of the square blocks every plane is partitioned into.
pub const BLOCK: usize = 4;

/// A row-major 8-bit grayscale image whose sides are multiples of [`BLOCK`].
#[derive(Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    samples: Vec<u8>,
}

impl std::fmt::Debug for RasterImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RasterImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

/// Checks the block-grid constraint shared by images, planes and layouts.
pub fn check_dimensions(width: usize, height: usize) -> Result<()> {
    if width < 8 || height < 8 || !width.is_multiple_of(BLOCK) || !height.is_multiple_of(BLOCK) {
        return Err(Error::DimensionError { width, height });
    }
    Ok(())
}

impl RasterImage {
    pub fn new(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        check_dimensions(width, height)?;
        if samples.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for a {}x{} image",
                samples.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.samples[row * self.width + col]
    }

    /// Decodes a binary PGM held in memory.
    pub fn from_pgm_bytes(data: &[u8]) -> Result<Self> {
        let mut header = HeaderReader { data, pos: 0 };
        if data.len() < 2 || &data[..2] != b"P5" {
            return Err(Error::MalformedFormat("missing P5 magic".into()));
        }
        header.pos = 2;
        let width = header.next_number("width")?;
        let height = header.next_number("height")?;
        let maxval = header.next_number("maxval")?;
        // exactly one whitespace byte separates the header from the raster
        match data.get(header.pos) {
            Some(b) if b.is_ascii_whitespace() => header.pos += 1,
            _ => return Err(Error::MalformedFormat("header not terminated".into())),
        }
        if maxval == 0 || maxval > 65535 {
            return Err(Error::MalformedFormat(format!(
                "maxval {maxval} out of range"
            )));
        }
        if maxval != 255 {
            return Err(Error::UnsupportedDepth(maxval));
        }
        let (width, height) = (width as usize, height as usize);
        check_dimensions(width, height)?;
        let raster = &data[header.pos..];
        let need = width * height;
        if raster.len() < need {
            return Err(Error::MalformedFormat(format!(
                "raster truncated: {} of {} bytes",
                raster.len(),
                need
            )));
        }
        Self::new(width, height, raster[..need].to_vec())
    }

    pub fn to_pgm_bytes(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.samples);
        out
    }
}

struct HeaderReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_separators(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn next_number(&mut self, what: &str) -> Result<u32> {
        self.skip_separators();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedFormat(format!("bad {what} field")))
    }
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<RasterImage> {
    RasterImage::from_pgm_bytes(&fs::read(path)?)
}

pub fn store_pgm(image: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, image.to_pgm_bytes())?;
    Ok(())
}

/// Lists the `.pgm` files of a directory in lexicographic order.
pub fn list_corpus(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .is_some_and(|ext| ext.eq_ignore_ascii_case("pgm"))
        })
        .collect();
    paths.sort();
    Ok(paths)
}
