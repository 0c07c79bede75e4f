//! Uniform / non-uniform block classification, NUB embeddability, and the
//! NUBs-first rearrangement of a plane.
//!
//! A block is uniform (UB) when its 16 cells are equal and non-uniform (NUB)
//! otherwise. The label map L2 holds one entry per classifiable block in
//! scan order, 1 for a NUB and 0 for a UB. Rearrangement moves all NUBs to
//! the leading slots and all UBs to the trailing slots, each group keeping
//! its scan order. On plane 0 the bottom-right block is reserved for the
//! container header and never moves.

use crate::error::{Error, Result};
use crate::plane::{BitPlane, BLOCK_CELLS, PREDICTOR_CELL};

/// One 2x2 quadrant of a block: the embeddable cell `p` and its three
/// in-quadrant neighbours, as block-local cell indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Part {
    pub p: usize,
    pub l: usize,
    pub b: usize,
    pub r: usize,
}

/// Quadrants in embedding order: top-left, top-right, bottom-left,
/// bottom-right. `p` is the quadrant cell touching the block centre; `l` is
/// its horizontal neighbour, `b` its vertical neighbour and `r` the outer
/// corner.
pub const PARTS: [Part; 4] = [
    Part {
        p: 5,
        l: 4,
        b: 1,
        r: 0,
    },
    Part {
        p: 6,
        l: 7,
        b: 2,
        r: 3,
    },
    Part {
        p: 9,
        l: 8,
        b: 13,
        r: 12,
    },
    Part {
        p: 10,
        l: 11,
        b: 14,
        r: 15,
    },
];

#[inline]
pub fn majority(a: u8, b: u8, c: u8) -> u8 {
    ((a + b + c) >= 2) as u8
}

/// Verdict for one NUB: whether each quadrant's `p` equals the majority
/// of its neighbours, and whether all four do.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NubVerdict {
    pub parts: [bool; 4],
}

impl NubVerdict {
    pub fn embeddable(&self) -> bool {
        self.parts.iter().all(|&ok| ok)
    }

    /// Serialized flag: 0 for an embeddable block, 1 otherwise.
    pub fn flag(&self) -> u8 {
        (!self.embeddable()) as u8
    }
}

pub fn nub_embeddable(block: &[u8; BLOCK_CELLS]) -> NubVerdict {
    NubVerdict {
        parts: PARTS
            .map(|part| block[part.p] == majority(block[part.l], block[part.b], block[part.r])),
    }
}

/// Overwrites each quadrant's `p` with the majority of its neighbours.
pub fn restore_nub(block: &mut [u8; BLOCK_CELLS]) {
    for part in PARTS {
        block[part.p] = majority(block[part.l], block[part.b], block[part.r]);
    }
}

/// Broadcasts a uniform block's predictor cell over the whole block.
pub fn restore_ub(block: &mut [u8; BLOCK_CELLS]) {
    *block = [block[PREDICTOR_CELL]; BLOCK_CELLS];
}

#[inline]
pub fn is_uniform(block: &[u8; BLOCK_CELLS]) -> bool {
    block.iter().all(|&b| b == block[0])
}

/// Block classification of one plane.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockModel {
    /// L2 over the classifiable blocks, 1 = NUB.
    pub l2: Vec<u8>,
    /// One flag per NUB in scan order, 0 = embeddable.
    pub nub_flags: Vec<u8>,
    /// `permutation[slot]` is the source block shown at `slot` after
    /// rearrangement.
    pub permutation: Vec<usize>,
}

impl BlockModel {
    pub fn nub_count(&self) -> usize {
        self.nub_flags.len()
    }

    pub fn ub_count(&self) -> usize {
        self.l2.len() - self.nub_flags.len()
    }

    pub fn embeddable_nubs(&self) -> usize {
        self.nub_flags.iter().filter(|&&f| f == 0).count()
    }
}

/// NUBs-first stable ordering of the classifiable blocks.
pub fn permutation_from_labels(l2: &[u8]) -> Vec<usize> {
    let nubs = l2
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == 1)
        .map(|(i, _)| i);
    let ubs = l2
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == 0)
        .map(|(i, _)| i);
    nubs.chain(ubs).collect()
}

/// Classifies the first `classifiable` blocks of `plane` (all blocks, or all
/// but the reserved last block on plane 0).
pub fn classify_blocks(plane: &BitPlane, classifiable: usize) -> BlockModel {
    let mut l2 = Vec::with_capacity(classifiable);
    let mut nub_flags = Vec::new();
    for slot in 0..classifiable {
        let block = plane.block(slot);
        if is_uniform(&block) {
            l2.push(0);
        } else {
            l2.push(1);
            nub_flags.push(nub_embeddable(&block).flag());
        }
    }
    let permutation = permutation_from_labels(&l2);
    BlockModel {
        l2,
        nub_flags,
        permutation,
    }
}

pub fn rearrange(plane: &BitPlane, model: &BlockModel) -> BitPlane {
    let mut out = plane.clone();
    for (slot, &source) in model.permutation.iter().enumerate() {
        out.set_block(slot, &plane.block(source));
    }
    out
}

/// Undoes [`rearrange`] given only the label map.
pub fn inverse_rearrange(plane: &BitPlane, l2: &[u8]) -> Result<BitPlane> {
    let available = plane.grid().count();
    if l2.len() > available || l2.len() + 1 < available {
        return Err(Error::LabelLengthMismatch {
            expected: available,
            got: l2.len(),
        });
    }
    let mut out = plane.clone();
    for (slot, source) in permutation_from_labels(l2).into_iter().enumerate() {
        out.set_block(source, &plane.block(slot));
    }
    Ok(out)
}
