//! Data-hider and receiver operations on an encrypted plane set.
//!
//! The hidden stream is a 32-bit big-endian bit count followed by the
//! payload bytes, XORed with the `Kd` keystream. Its bits fill, plane by
//! plane in ascending order, the layout's payload cells: the `p` cells of
//! embeddable NUBs (blocks in slot order, quadrants in order), then the UB
//! data cells left free by the aux stream.

use crate::blocks::{restore_nub, restore_ub};
use crate::crypto::{cipher_payload, encrypt_planes, DataHidingKey, EncryptionKey};
use crate::error::{Error, Result};
use crate::plane::{PlaneSet, PLANES};
use crate::prediction::{planes_to_pe, reconstruct_image};
use crate::raster::RasterImage;
use crate::wire::{parse_aux, AuxBundle, AuxLayout};

/// Bits spent on the payload length prefix.
pub const PREFIX_BITS: usize = 32;

/// Every payload cell as `(plane, index)`, in embedding order.
pub fn embedding_positions(layout: &AuxLayout) -> Vec<(usize, usize)> {
    layout
        .planes
        .iter()
        .enumerate()
        .flat_map(|(p, pl)| pl.payload_positions.iter().map(move |&i| (p, i)))
        .collect()
}

/// Largest payload, in bytes, a layout can carry.
pub fn max_payload_bytes(layout: &AuxLayout) -> usize {
    layout.capacity().saturating_sub(PREFIX_BITS) / 8
}

fn bytes_to_bits(bytes: &[u8]) -> impl Iterator<Item = u8> + '_ {
    bytes
        .iter()
        .flat_map(|&byte| (0..8).rev().map(move |i| (byte >> i) & 1))
}

fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| chunk.iter().fold(0u8, |acc, &b| (acc << 1) | b))
        .collect()
}

pub fn embed(marked: &PlaneSet, payload: &[u8], kd: &DataHidingKey) -> Result<PlaneSet> {
    let (_, layout) = parse_aux(marked)?;
    embed_with_layout(marked, &layout, payload, kd)
}

pub(crate) fn embed_with_layout(
    marked: &PlaneSet,
    layout: &AuxLayout,
    payload: &[u8],
    kd: &DataHidingKey,
) -> Result<PlaneSet> {
    let capacity = layout.capacity();
    let needed = PREFIX_BITS + 8 * payload.len();
    if needed > capacity || 8 * payload.len() > u32::MAX as usize {
        return Err(Error::CapacityExceeded {
            needed,
            available: capacity,
        });
    }
    let mut plain = Vec::with_capacity(4 + payload.len());
    plain.extend_from_slice(&((8 * payload.len()) as u32).to_be_bytes());
    plain.extend_from_slice(payload);
    let cipher = cipher_payload(&plain, kd);

    let mut out = marked.clone();
    for ((p, index), bit) in embedding_positions(layout)
        .into_iter()
        .zip(bytes_to_bits(&cipher))
    {
        out.plane_mut(p).set(index, bit);
    }
    Ok(out)
}

/// Reads the hidden payload back. Needs only `Kd`.
pub fn extract(marked: &PlaneSet, kd: &DataHidingKey) -> Result<Vec<u8>> {
    let (_, layout) = parse_aux(marked)?;
    let positions = embedding_positions(&layout);
    let capacity = positions.len();
    if capacity < PREFIX_BITS {
        return Err(Error::PrefixOutOfRange { bits: 0, capacity });
    }
    let read = |range: std::ops::Range<usize>| -> Vec<u8> {
        positions[range]
            .iter()
            .map(|&(p, i)| marked.plane(p).get(i))
            .collect()
    };
    let prefix = cipher_payload(&bits_to_bytes(&read(0..PREFIX_BITS)), kd);
    let bits = u32::from_be_bytes([prefix[0], prefix[1], prefix[2], prefix[3]]) as u64;
    if !bits.is_multiple_of(8) || bits as usize > capacity - PREFIX_BITS {
        return Err(Error::PrefixOutOfRange {
            bits,
            capacity: capacity - PREFIX_BITS,
        });
    }
    let cipher = bits_to_bytes(&read(0..PREFIX_BITS + bits as usize));
    Ok(cipher_payload(&cipher, kd).split_off(4))
}

/// Restores the plaintext PE planes of a decrypted plane set in place:
/// embeddable NUBs and UBs are repaired, rearrangement is undone and the
/// header block gets its original cells back.
pub(crate) fn restore_planes(mut planes: PlaneSet, bundle: &AuxBundle) -> Result<PlaneSet> {
    let grid = planes.grid();
    for p in 0..PLANES {
        let Some(record) = &bundle.planes[p] else {
            continue;
        };
        let plane = planes.plane_mut(p);
        for (slot, &flag) in record.nub_flags.iter().enumerate() {
            if flag == 0 {
                let mut block = plane.block(slot);
                restore_nub(&mut block);
                plane.set_block(slot, &block);
            }
        }
        for slot in record.nub_count()..grid.classifiable(p) {
            let mut block = plane.block(slot);
            restore_ub(&mut block);
            plane.set_block(slot, &block);
        }
        *plane = crate::blocks::inverse_rearrange(plane, &record.l2)?;
    }
    let slot = grid.reserved_slot();
    let header = bundle.global.header_block_bits;
    let cells: [u8; 16] = std::array::from_fn(|i| ((header >> (15 - i)) & 1) as u8);
    planes.plane_mut(0).set_block(slot, &cells);
    Ok(planes)
}

/// Rebuilds the original image. Needs only `Ke`.
pub fn recover(marked: &PlaneSet, ke: &EncryptionKey) -> Result<RasterImage> {
    let (bundle, layout) = parse_aux(marked)?;
    let decrypted = encrypt_planes(marked, ke, &layout)?;
    let planes = restore_planes(decrypted, &bundle)?;
    let pe = planes_to_pe(&planes, &bundle.global.l1)?;
    reconstruct_image(&pe)
}
