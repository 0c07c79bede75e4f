//! MED prediction, prediction errors (PEs), and the PE <-> bit-plane mapping.
//!
//! Pixels in the first row and first column are reference pixels and keep
//! their value. Every other pixel is predicted from its causal neighbours
//! and replaced by its prediction error. Errors outside `-64..=64` are
//! overflow pixels: they keep their raw value and are flagged in the
//! overflow map (L1).
//!
//! Each pixel of the PE image is then written as one byte whose bits feed
//! the eight planes (plane 0 = bit 7):
//!
//! | pixel kind      | bits 7..1        | bit 0         |
//! |-----------------|------------------|---------------|
//! | reference       | bits 7..1 of x   | bit 0 of x    |
//! | overflow        | bits 7..1 of x   | bit 0 of x    |
//! | in range        | bits 6..0 of \|e\| | 1 iff e < 0 |

use crate::error::{Error, Result};
use crate::plane::PlaneSet;
use crate::raster::RasterImage;

/// Largest prediction-error magnitude stored as sign + magnitude.
pub const MAX_ABS_PE: i32 = 64;

/// Median edge detector. `diag` is the upper-left neighbour, `up` the upper
/// and `left` the left neighbour. The gradient branch may leave `0..=255`.
#[inline]
pub fn med_predict(diag: u8, up: u8, left: u8) -> i32 {
    let (diag, up, left) = (diag as i32, up as i32, left as i32);
    let (lo, hi) = if up < left { (up, left) } else { (left, up) };
    if diag <= lo {
        hi
    } else if diag >= hi {
        lo
    } else {
        up + left - diag
    }
}

/// Prediction-error image together with its overflow map.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PeImage {
    width: usize,
    height: usize,
    pe: Vec<i16>,
    overflow: Vec<u8>,
}

impl PeImage {
    /// Builds a PE image, checking the per-pixel range rules.
    pub fn new(width: usize, height: usize, pe: Vec<i16>, overflow: Vec<u8>) -> Result<Self> {
        crate::raster::check_dimensions(width, height)?;
        if pe.len() != width * height || overflow.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "PE image {}x{} with {} errors and {} labels",
                width,
                height,
                pe.len(),
                overflow.len()
            )));
        }
        for (index, (&e, &o)) in pe.iter().zip(&overflow).enumerate() {
            let reference = is_reference(index, width);
            let e = e as i32;
            let ok = match (reference, o) {
                (true, 0) => (0..=255).contains(&e),
                (true, _) => false,
                (false, 0) => (-MAX_ABS_PE..=MAX_ABS_PE).contains(&e),
                (false, 1) => (0..=255).contains(&e),
                _ => false,
            };
            if !ok {
                return Err(Error::InconsistentLabels { index });
            }
        }
        Ok(Self {
            width,
            height,
            pe,
            overflow,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn errors(&self) -> &[i16] {
        &self.pe
    }

    /// Overflow map L1: 1 marks an overflow pixel.
    pub fn overflow(&self) -> &[u8] {
        &self.overflow
    }

    pub fn overflow_count(&self) -> usize {
        self.overflow.iter().filter(|&&o| o == 1).count()
    }
}

#[inline]
fn is_reference(index: usize, width: usize) -> bool {
    index < width || index.is_multiple_of(width)
}

pub fn compute_pe(image: &RasterImage) -> PeImage {
    let (width, height) = (image.width(), image.height());
    let x = image.samples();
    let mut pe = vec![0i16; x.len()];
    let mut overflow = vec![0u8; x.len()];
    for i in 0..height {
        for j in 0..width {
            let idx = i * width + j;
            if i == 0 || j == 0 {
                pe[idx] = x[idx] as i16;
                continue;
            }
            let px = med_predict(x[idx - width - 1], x[idx - width], x[idx - 1]);
            let e = x[idx] as i32 - px;
            if e.abs() > MAX_ABS_PE {
                pe[idx] = x[idx] as i16;
                overflow[idx] = 1;
            } else {
                pe[idx] = e as i16;
            }
        }
    }
    PeImage {
        width,
        height,
        pe,
        overflow,
    }
}

/// Fraction of pixels flagged as overflow.
pub fn overflow_fraction(image: &RasterImage) -> f64 {
    compute_pe(image).overflow_count() as f64 / image.len() as f64
}

pub fn pe_to_planes(pe: &PeImage) -> PlaneSet {
    let codes: Vec<u8> = pe
        .pe
        .iter()
        .zip(&pe.overflow)
        .enumerate()
        .map(|(index, (&e, &o))| {
            if o == 1 || is_reference(index, pe.width) {
                e as u8
            } else {
                ((e.unsigned_abs() as u8) << 1) | (e < 0) as u8
            }
        })
        .collect();
    PlaneSet::from_bytes(pe.width, pe.height, &codes).expect("PE image has grid dimensions")
}

/// Inverse of [`pe_to_planes`]. Reference pixels are the first row and
/// column; `overflow` is the L1 map.
pub fn planes_to_pe(planes: &PlaneSet, overflow: &[u8]) -> Result<PeImage> {
    let (width, height) = (planes.width(), planes.height());
    if overflow.len() != width * height {
        return Err(Error::DimensionMismatch(format!(
            "overflow map has {} labels for {} pixels",
            overflow.len(),
            width * height
        )));
    }
    let codes = planes.to_bytes();
    let mut pe = Vec::with_capacity(codes.len());
    for (index, (&code, &o)) in codes.iter().zip(overflow).enumerate() {
        let reference = is_reference(index, width);
        if reference && o != 0 {
            return Err(Error::InconsistentLabels { index });
        }
        if reference || o == 1 {
            pe.push(code as i16);
            continue;
        }
        let magnitude = (code >> 1) as i16;
        let negative = code & 1 == 1;
        // "-0" has no encoder preimage
        if magnitude as i32 > MAX_ABS_PE || (negative && magnitude == 0) {
            return Err(Error::InconsistentLabels { index });
        }
        pe.push(if negative { -magnitude } else { magnitude });
    }
    Ok(PeImage {
        width,
        height,
        pe,
        overflow: overflow.to_vec(),
    })
}

/// Inverts [`compute_pe`] by re-running the predictor in raster order over
/// the pixels already rebuilt.
pub fn reconstruct_image(pe: &PeImage) -> Result<RasterImage> {
    let (width, height) = (pe.width, pe.height);
    let mut x = vec![0u8; width * height];
    for i in 0..height {
        for j in 0..width {
            let idx = i * width + j;
            let e = pe.pe[idx] as i32;
            let value = if i == 0 || j == 0 || pe.overflow[idx] == 1 {
                e
            } else {
                med_predict(x[idx - width - 1], x[idx - width], x[idx - 1]) + e
            };
            if !(0..=255).contains(&value) {
                return Err(Error::RangeError { index: idx, value });
            }
            x[idx] = value as u8;
        }
    }
    RasterImage::new(width, height, x)
}
