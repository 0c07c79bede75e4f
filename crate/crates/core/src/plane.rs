//! Binary planes, the eight-plane stack, and the 4x4 block grid addressing
//! shared by every stage.

use crate::error::{Error, Result};
use crate::raster::{check_dimensions, RasterImage, BLOCK};

/// Number of bit planes per 8-bit image.
pub const PLANES: usize = 8;

/// Cells per block.
pub const BLOCK_CELLS: usize = BLOCK * BLOCK;

/// Block-local index of the cell a uniform block keeps as its predictor.
pub const PREDICTOR_CELL: usize = BLOCK_CELLS - 1;

/// A binary M x N grid; every cell is 0 or 1.
#[derive(Clone, PartialEq, Eq)]
pub struct BitPlane {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl std::fmt::Debug for BitPlane {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "BitPlane({}x{}, ones={})",
            self.width,
            self.height,
            self.count_ones()
        )
    }
}

impl BitPlane {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![0; width * height],
        }
    }

    /// Builds a plane from 0/1 cells. Any nonzero cell is treated as 1.
    pub fn from_bits(width: usize, height: usize, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} cells for a {}x{} plane",
                bits.len(),
                width,
                height
            )));
        }
        let bits = bits.into_iter().map(|b| (b != 0) as u8).collect();
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, index: usize) -> u8 {
        self.bits[index]
    }

    #[inline]
    pub fn set(&mut self, index: usize, bit: u8) {
        self.bits[index] = bit & 1;
    }

    #[inline]
    pub fn flip(&mut self, index: usize, mask: u8) {
        self.bits[index] ^= mask & 1;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    pub fn grid(&self) -> BlockGrid {
        BlockGrid::new(self.width, self.height)
    }

    /// The 16 cells of block `slot` in block-local raster order.
    pub fn block(&self, slot: usize) -> [u8; BLOCK_CELLS] {
        let grid = self.grid();
        std::array::from_fn(|cell| self.bits[grid.cell_index(slot, cell)])
    }

    pub fn set_block(&mut self, slot: usize, cells: &[u8; BLOCK_CELLS]) {
        let grid = self.grid();
        for (cell, &bit) in cells.iter().enumerate() {
            self.bits[grid.cell_index(slot, cell)] = bit & 1;
        }
    }
}

/// Addressing of the non-overlapping 4x4 blocks of an M x N plane.
///
/// Blocks are numbered in row-major scan order ("slots"); cells within a
/// block are numbered 0..16 in block-local raster order, so cell 15 is the
/// bottom-right cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockGrid {
    pub width: usize,
    pub height: usize,
}

impl BlockGrid {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height }
    }

    pub fn cols(&self) -> usize {
        self.width / BLOCK
    }

    pub fn rows(&self) -> usize {
        self.height / BLOCK
    }

    pub fn count(&self) -> usize {
        self.cols() * self.rows()
    }

    /// Slot of plane 1's reserved header block: the bottom-right block.
    pub fn reserved_slot(&self) -> usize {
        self.count() - 1
    }

    /// Blocks of plane `plane` (0 = MSB) that take part in classification
    /// and rearrangement. The reserved block is always the last slot, so the
    /// classifiable slots are `0..classifiable(plane)`.
    pub fn classifiable(&self, plane: usize) -> usize {
        if plane == 0 {
            self.count() - 1
        } else {
            self.count()
        }
    }

    /// Plane-linear (row-major pixel) index of `cell` inside block `slot`.
    #[inline]
    pub fn cell_index(&self, slot: usize, cell: usize) -> usize {
        let cols = self.cols();
        let row = (slot / cols) * BLOCK + cell / BLOCK;
        let col = (slot % cols) * BLOCK + cell % BLOCK;
        row * self.width + col
    }
}

/// Eight binary planes of one image; index 0 is the most significant plane.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PlaneSet {
    width: usize,
    height: usize,
    planes: Vec<BitPlane>,
}

impl PlaneSet {
    pub fn new(planes: Vec<BitPlane>) -> Result<Self> {
        if planes.len() != PLANES {
            return Err(Error::DimensionMismatch(format!(
                "expected {PLANES} planes, got {}",
                planes.len()
            )));
        }
        let (width, height) = (planes[0].width, planes[0].height);
        if planes
            .iter()
            .any(|p| p.width != width || p.height != height)
        {
            return Err(Error::DimensionMismatch("planes differ in size".into()));
        }
        check_dimensions(width, height)?;
        Ok(Self {
            width,
            height,
            planes,
        })
    }

    /// Splits byte values into planes: plane `k` holds bit `7 - k`.
    pub fn from_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        check_dimensions(width, height)?;
        if bytes.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {}x{} plane set",
                bytes.len(),
                width,
                height
            )));
        }
        let planes = (0..PLANES)
            .map(|k| BitPlane {
                width,
                height,
                bits: bytes.iter().map(|&v| (v >> (7 - k)) & 1).collect(),
            })
            .collect();
        Ok(Self {
            width,
            height,
            planes,
        })
    }

    pub fn from_image(image: &RasterImage) -> Self {
        Self::from_bytes(image.width(), image.height(), image.samples())
            .expect("raster images always satisfy the grid constraint")
    }

    /// Packs the planes back into one byte per pixel.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.width * self.height];
        for (k, plane) in self.planes.iter().enumerate() {
            let shift = 7 - k;
            for (byte, &bit) in out.iter_mut().zip(&plane.bits) {
                *byte |= bit << shift;
            }
        }
        out
    }

    pub fn to_image(&self) -> RasterImage {
        RasterImage::new(self.width, self.height, self.to_bytes())
            .expect("plane sets always satisfy the grid constraint")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn grid(&self) -> BlockGrid {
        BlockGrid::new(self.width, self.height)
    }

    pub fn plane(&self, k: usize) -> &BitPlane {
        &self.planes[k]
    }

    pub fn plane_mut(&mut self, k: usize) -> &mut BitPlane {
        &mut self.planes[k]
    }

    pub fn planes(&self) -> &[BitPlane] {
        &self.planes
    }

    pub fn iter(&self) -> impl Iterator<Item = &BitPlane> {
        self.planes.iter()
    }
}
