//! Bit-exact container for the auxiliary data (format version 1).
//!
//! # Reserved header block
//!
//! The bottom-right 4x4 block of plane 0 (the MSB plane) is never
//! classified, rearranged or encrypted. Its 16 cells, in block-local raster
//! order, hold:
//!
//! * cells 0..8: the plane flags, one per plane, plane 0 first. A 1 means
//!   the plane was rearranged and carries an aux record.
//! * cells 8..16: the container version, most significant bit first.
//!
//! The 16 original cells displaced by the header travel in the global
//! record.
//!
//! # Aux stream
//!
//! Each flagged plane stores its aux bits in uniform-block data cells,
//! walking from the last classifiable block backwards and, inside each
//! block, from cell 14 down to cell 0. Cell 15 (the block predictor) is
//! never used. The address sequence depends only on the image size, so a
//! receiver locates the stream without any key. Because rearrangement puts
//! all UBs at the tail, the stream only lands in UBs as long as it is no
//! longer than `15 * UB count`.
//!
//! Stream layout, integers big-endian:
//!
//! ```text
//! plane record:  mode(1) l2_len(16) l2[l2_len] nub_flags[#NUB]
//! global record: header_block(16) l1_mode(1) l1_len(32) l1[l1_len]
//! ```
//!
//! `mode` is 0 for an arithmetic-coded map and 1 for a raw map. The number
//! of NUB flags is the popcount of the decoded L2. The global record follows
//! the plane record of the first flagged plane.

use crate::blocks::{BlockModel, PARTS};
use crate::entropy::StoredMap;
use crate::error::{Error, Result};
use crate::plane::{BlockGrid, PlaneSet, BLOCK_CELLS, PLANES, PREDICTOR_CELL};

pub const CONTAINER_VERSION: u8 = 1;

const L2_LEN_BITS: usize = 16;
const L1_LEN_BITS: usize = 32;
const HEADER_BITS: usize = 16;
/// UB cells usable for data: all but the predictor cell.
pub const UB_DATA_CELLS: usize = BLOCK_CELLS - 1;

/// Aux record of one rearranged plane.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaneRecord {
    /// Decoded L2.
    pub l2: Vec<u8>,
    pub stored_l2: StoredMap,
    pub nub_flags: Vec<u8>,
}

impl PlaneRecord {
    pub fn bit_len(&self) -> usize {
        1 + L2_LEN_BITS + self.stored_l2.bits.len() + self.nub_flags.len()
    }

    pub fn nub_count(&self) -> usize {
        self.nub_flags.len()
    }

    pub fn ub_count(&self) -> usize {
        self.l2.len() - self.nub_flags.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalRecord {
    /// Original contents of the reserved header block, cell 0 in the MSB.
    pub header_block_bits: u16,
    /// Decoded L1.
    pub l1: Vec<u8>,
    pub stored_l1: StoredMap,
}

impl GlobalRecord {
    pub fn new(header_block_bits: u16, l1: Vec<u8>) -> Self {
        let stored_l1 = StoredMap::pack(&l1);
        Self {
            header_block_bits,
            l1,
            stored_l1,
        }
    }

    pub fn bit_len(&self) -> usize {
        HEADER_BITS + 1 + L1_LEN_BITS + self.stored_l1.bits.len()
    }
}

/// Everything a receiver needs besides the keys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxBundle {
    /// Plane flags, plane 0 in the most significant bit.
    pub plane_flags: u8,
    pub planes: Vec<Option<PlaneRecord>>,
    pub global: GlobalRecord,
}

impl AuxBundle {
    pub fn is_flagged(&self, plane: usize) -> bool {
        self.plane_flags & (0x80 >> plane) != 0
    }

    pub fn first_flagged(&self) -> Option<usize> {
        (0..PLANES).find(|&p| self.is_flagged(p))
    }

    /// Serialized aux stream of `plane` (empty for unflagged planes).
    pub fn stream(&self, plane: usize) -> Vec<u8> {
        let mut out = BitWriter::default();
        let Some(record) = self.planes[plane].as_ref() else {
            return out.bits;
        };
        out.push(record.stored_l2.mode.bit());
        out.push_uint(record.stored_l2.bits.len() as u64, L2_LEN_BITS);
        out.extend(&record.stored_l2.bits);
        out.extend(&record.nub_flags);
        if self.first_flagged() == Some(plane) {
            let global = &self.global;
            out.push_uint(global.header_block_bits as u64, HEADER_BITS);
            out.push(global.stored_l1.mode.bit());
            out.push_uint(global.stored_l1.bits.len() as u64, L1_LEN_BITS);
            out.extend(&global.stored_l1.bits);
        }
        out.bits
    }

    pub fn aux_len(&self, plane: usize) -> usize {
        match &self.planes[plane] {
            None => 0,
            Some(record) if self.first_flagged() == Some(plane) => {
                record.bit_len() + self.global.bit_len()
            }
            Some(record) => record.bit_len(),
        }
    }
}

#[derive(Default)]
struct BitWriter {
    bits: Vec<u8>,
}

impl BitWriter {
    fn push(&mut self, bit: u8) {
        self.bits.push(bit & 1);
    }

    fn push_uint(&mut self, value: u64, width: usize) {
        for i in (0..width).rev() {
            self.bits.push(((value >> i) & 1) as u8);
        }
    }

    fn extend(&mut self, bits: &[u8]) {
        self.bits.extend(bits.iter().map(|b| b & 1));
    }
}

/// Plane-linear indices of the aux stream of `plane`, in stream order.
pub fn aux_addresses(grid: BlockGrid, plane: usize) -> impl Iterator<Item = usize> {
    (0..grid.classifiable(plane)).rev().flat_map(move |slot| {
        (0..UB_DATA_CELLS)
            .rev()
            .map(move |cell| grid.cell_index(slot, cell))
    })
}

/// Where aux and payload bits live in one plane.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PlaneLayout {
    pub flagged: bool,
    pub nub_count: usize,
    pub ub_count: usize,
    pub embeddable_nubs: usize,
    /// Aux stream cells, in stream order.
    pub aux_positions: Vec<usize>,
    /// Payload cells in embedding order: embeddable-NUB `p` cells, then the
    /// UB data cells not taken by aux.
    pub payload_positions: Vec<usize>,
}

impl PlaneLayout {
    fn build(
        grid: BlockGrid,
        plane: usize,
        l2: &[u8],
        nub_flags: &[u8],
        aux_len: usize,
    ) -> Option<Self> {
        let classifiable = grid.classifiable(plane);
        let nub_count = nub_flags.len();
        let ub_count = classifiable.checked_sub(nub_count)?;
        if l2.len() != classifiable || aux_len > UB_DATA_CELLS * ub_count {
            return None;
        }
        let aux_positions: Vec<usize> = aux_addresses(grid, plane).take(aux_len).collect();
        let mut payload_positions = Vec::new();
        // NUBs occupy the leading slots after rearrangement
        for (slot, _) in nub_flags.iter().enumerate().filter(|(_, &f)| f == 0) {
            payload_positions.extend(PARTS.iter().map(|part| grid.cell_index(slot, part.p)));
        }
        let free_ub_cells = UB_DATA_CELLS * ub_count - aux_len;
        payload_positions.extend(
            (nub_count..classifiable)
                .flat_map(|slot| (0..UB_DATA_CELLS).map(move |cell| grid.cell_index(slot, cell)))
                .take(free_ub_cells),
        );
        Some(Self {
            flagged: true,
            nub_count,
            ub_count,
            embeddable_nubs: nub_flags.iter().filter(|&&f| f == 0).count(),
            aux_positions,
            payload_positions,
        })
    }

    pub fn capacity(&self) -> usize {
        self.payload_positions.len()
    }
}

/// Position sets of all eight planes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxLayout {
    pub grid: BlockGrid,
    pub planes: Vec<PlaneLayout>,
}

impl AuxLayout {
    pub fn from_bundle(grid: BlockGrid, bundle: &AuxBundle) -> Result<Self> {
        let mut planes = Vec::with_capacity(PLANES);
        for p in 0..PLANES {
            match &bundle.planes[p] {
                None => planes.push(PlaneLayout::default()),
                Some(record) => {
                    let layout = PlaneLayout::build(
                        grid,
                        p,
                        &record.l2,
                        &record.nub_flags,
                        bundle.aux_len(p),
                    )
                    .ok_or_else(|| {
                        Error::MalformedAux(format!(
                            "plane {p}: record does not fit its uniform blocks"
                        ))
                    })?;
                    planes.push(layout);
                }
            }
        }
        Ok(Self { grid, planes })
    }

    /// Total payload cells over all planes.
    pub fn capacity(&self) -> usize {
        self.planes.iter().map(PlaneLayout::capacity).sum()
    }

    /// Cells that are never encrypted: aux cells, plus the header block on
    /// plane 0.
    pub fn excluded(&self, plane: usize) -> Vec<usize> {
        let mut cells = self.planes[plane].aux_positions.clone();
        if plane == 0 {
            let slot = self.grid.reserved_slot();
            cells.extend((0..BLOCK_CELLS).map(|cell| self.grid.cell_index(slot, cell)));
        }
        cells
    }
}

/// Decides which planes carry aux data and builds the bundle and layout.
///
/// Planes are visited in order; plane `p` is flagged when its UB data cells
/// can hold its record (plus the global record, if no earlier plane has
/// been flagged).
pub fn plan_layout(
    grid: BlockGrid,
    models: &[BlockModel],
    l1: &[u8],
    header_block_bits: u16,
) -> Result<(AuxBundle, AuxLayout)> {
    if models.len() != PLANES {
        return Err(Error::LayoutMismatch(format!(
            "{} block models",
            models.len()
        )));
    }
    let global = GlobalRecord::new(header_block_bits, l1.to_vec());
    let mut plane_flags = 0u8;
    let mut planes = Vec::with_capacity(PLANES);
    for (p, model) in models.iter().enumerate() {
        if model.l2.len() != grid.classifiable(p) {
            return Err(Error::LayoutMismatch(format!(
                "plane {p}: model has {} labels, grid has {} blocks",
                model.l2.len(),
                grid.classifiable(p)
            )));
        }
        let stored_l2 = StoredMap::pack(&model.l2);
        if stored_l2.bits.len() > u16::MAX as usize {
            planes.push(None);
            continue;
        }
        let record = PlaneRecord {
            l2: model.l2.clone(),
            stored_l2,
            nub_flags: model.nub_flags.clone(),
        };
        let mut needed = record.bit_len();
        if plane_flags == 0 {
            needed += global.bit_len();
        }
        if needed <= UB_DATA_CELLS * model.ub_count() {
            plane_flags |= 0x80 >> p;
            planes.push(Some(record));
        } else {
            planes.push(None);
        }
    }
    if plane_flags == 0 {
        return Err(Error::CapacityError);
    }
    let bundle = AuxBundle {
        plane_flags,
        planes,
        global,
    };
    let layout = AuxLayout::from_bundle(grid, &bundle)?;
    Ok((bundle, layout))
}

/// Reads the 16 cells of the reserved block as an integer, cell 0 first.
pub fn read_header_block(planes: &PlaneSet) -> u16 {
    let slot = planes.grid().reserved_slot();
    planes
        .plane(0)
        .block(slot)
        .iter()
        .fold(0u16, |acc, &b| (acc << 1) | b as u16)
}

fn write_header_block(planes: &mut PlaneSet, value: u16) {
    let slot = planes.grid().reserved_slot();
    let cells: [u8; BLOCK_CELLS] = std::array::from_fn(|i| ((value >> (15 - i)) & 1) as u8);
    planes.plane_mut(0).set_block(slot, &cells);
}

/// Writes the header block and every flagged plane's aux stream.
pub fn write_aux(mut planes: PlaneSet, bundle: &AuxBundle, layout: &AuxLayout) -> Result<PlaneSet> {
    if layout.grid != planes.grid()
        || layout.planes.len() != PLANES
        || bundle.planes.len() != PLANES
    {
        return Err(Error::LayoutMismatch(
            "layout built for a different image".into(),
        ));
    }
    for p in 0..PLANES {
        let stream = bundle.stream(p);
        let positions = &layout.planes[p].aux_positions;
        if stream.len() != positions.len() || layout.planes[p].flagged != bundle.is_flagged(p) {
            return Err(Error::LayoutMismatch(format!(
                "plane {p}: {} aux bits for {} positions",
                stream.len(),
                positions.len()
            )));
        }
        let plane = planes.plane_mut(p);
        for (&index, &bit) in positions.iter().zip(&stream) {
            plane.set(index, bit);
        }
    }
    write_header_block(
        &mut planes,
        ((bundle.plane_flags as u16) << 8) | CONTAINER_VERSION as u16,
    );
    Ok(planes)
}

struct StreamReader<'a> {
    plane: &'a crate::plane::BitPlane,
    addresses: Vec<usize>,
    pos: usize,
    index: usize,
}

impl StreamReader<'_> {
    fn remaining(&self) -> usize {
        self.addresses.len() - self.pos
    }

    fn take(&mut self, n: usize, what: &str) -> Result<Vec<u8>> {
        if n > self.remaining() {
            return Err(Error::MalformedAux(format!(
                "plane {}: {what} needs {n} bits, {} left",
                self.index,
                self.remaining()
            )));
        }
        let bits = self.addresses[self.pos..self.pos + n]
            .iter()
            .map(|&i| self.plane.get(i))
            .collect();
        self.pos += n;
        Ok(bits)
    }

    fn uint(&mut self, width: usize, what: &str) -> Result<u64> {
        Ok(self
            .take(width, what)?
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | b as u64))
    }
}

/// Recovers the bundle and layout from a plane set produced by
/// [`write_aux`], with or without encryption and embedding applied.
pub fn parse_aux(planes: &PlaneSet) -> Result<(AuxBundle, AuxLayout)> {
    let grid = planes.grid();
    let header = read_header_block(planes);
    let version = (header & 0xFF) as u8;
    if version != CONTAINER_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: CONTAINER_VERSION,
        });
    }
    let plane_flags = (header >> 8) as u8;
    if plane_flags == 0 {
        return Err(Error::MalformedAux("no plane is flagged".into()));
    }
    let first = plane_flags.leading_zeros() as usize;
    let mut records = Vec::with_capacity(PLANES);
    let mut global = None;
    for p in 0..PLANES {
        if plane_flags & (0x80 >> p) == 0 {
            records.push(None);
            continue;
        }
        let mut reader = StreamReader {
            plane: planes.plane(p),
            addresses: aux_addresses(grid, p).collect(),
            pos: 0,
            index: p,
        };
        let mode = crate::entropy::MapMode::from_bit(reader.take(1, "L2 mode")?[0]);
        let l2_len = reader.uint(L2_LEN_BITS, "L2 length")? as usize;
        let stored_l2 = StoredMap {
            mode,
            bits: reader.take(l2_len, "L2")?,
        };
        let l2 = stored_l2
            .unpack(grid.classifiable(p))
            .map_err(|e| Error::MalformedAux(format!("plane {p}: L2 does not decode: {e}")))?;
        let nubs = l2.iter().filter(|&&b| b == 1).count();
        let nub_flags = reader.take(nubs, "NUB flags")?;
        if p == first {
            let header_block_bits = reader.uint(HEADER_BITS, "header block")? as u16;
            let l1_mode = crate::entropy::MapMode::from_bit(reader.take(1, "L1 mode")?[0]);
            let l1_len = reader.uint(L1_LEN_BITS, "L1 length")?;
            let l1_len = usize::try_from(l1_len)
                .map_err(|_| Error::MalformedAux("L1 length overflows".into()))?;
            let stored_l1 = StoredMap {
                mode: l1_mode,
                bits: reader.take(l1_len, "L1")?,
            };
            let l1 = stored_l1
                .unpack(grid.width * grid.height)
                .map_err(|e| Error::MalformedAux(format!("L1 does not decode: {e}")))?;
            global = Some(GlobalRecord {
                header_block_bits,
                l1,
                stored_l1,
            });
        }
        records.push(Some(PlaneRecord {
            l2,
            stored_l2,
            nub_flags,
        }));
    }
    let bundle = AuxBundle {
        plane_flags,
        planes: records,
        global: global.expect("first flagged plane always yields the global record"),
    };
    let layout = AuxLayout::from_bundle(grid, &bundle)?;
    Ok((bundle, layout))
}

/// Cells of `plane` that a uniform block keeps as its predictor; exposed
/// for position audits.
pub fn predictor_cells(grid: BlockGrid, plane: usize) -> impl Iterator<Item = usize> {
    (0..grid.classifiable(plane)).map(move |slot| grid.cell_index(slot, PREDICTOR_CELL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::classify_blocks;

    fn models_for(planes: &PlaneSet) -> Vec<BlockModel> {
        let grid = planes.grid();
        (0..PLANES)
            .map(|p| classify_blocks(planes.plane(p), grid.classifiable(p)))
            .collect()
    }

    #[test]
    fn all_uniform_plane_capacity() {
        let planes = PlaneSet::from_bytes(512, 512, &vec![0u8; 512 * 512]).unwrap();
        let grid = planes.grid();
        let models = models_for(&planes);
        let (bundle, layout) = plan_layout(grid, &models, &vec![0u8; 512 * 512], 0).unwrap();
        assert_eq!(bundle.plane_flags, 0xFF);
        for p in 0..PLANES {
            let ub = grid.classifiable(p);
            assert_eq!(layout.planes[p].capacity(), 15 * ub - bundle.aux_len(p));
        }
        // an all-zero L2 of 16384 blocks codes to a few dozen bits
        let rec = bundle.planes[1].as_ref().unwrap();
        assert!(rec.stored_l2.bits.len() < 40);
    }

    #[test]
    fn all_nub_plane_is_not_flagged() {
        // checkerboard on every plane: no uniform blocks anywhere
        let bytes: Vec<u8> = (0..64 * 64)
            .map(|i| if (i / 64 + i % 64) % 2 == 0 { 0xFF } else { 0 })
            .collect();
        let planes = PlaneSet::from_bytes(64, 64, &bytes).unwrap();
        let models = models_for(&planes);
        assert!(matches!(
            plan_layout(planes.grid(), &models, &[0; 64 * 64], 0),
            Err(Error::CapacityError)
        ));
    }

    #[test]
    fn single_plane_flags() {
        // only plane 0 is uniform; the others are checkerboards
        let bytes: Vec<u8> = (0..32 * 32)
            .map(|i| if (i / 32 + i % 32) % 2 == 0 { 0x7F } else { 0 })
            .collect();
        let planes = PlaneSet::from_bytes(32, 32, &bytes).unwrap();
        let grid = planes.grid();
        let models = models_for(&planes);
        let header = read_header_block(&planes);
        let (bundle, layout) = plan_layout(grid, &models, &[0; 32 * 32], header).unwrap();
        assert_eq!(bundle.plane_flags, 0b1000_0000);
        let written = write_aux(planes.clone(), &bundle, &layout).unwrap();
        let (parsed, parsed_layout) = parse_aux(&written).unwrap();
        assert_eq!(parsed, bundle);
        assert_eq!(parsed_layout, layout);
    }

    #[test]
    fn aux_skips_predictor_of_last_block() {
        // the last block of plane 1 is a ones-UB; its predictor must survive
        let mut bytes = vec![0u8; 16 * 16];
        let grid = BlockGrid::new(16, 16);
        for cell in 0..16 {
            bytes[grid.cell_index(15, cell)] = 0x40;
        }
        let planes = PlaneSet::from_bytes(16, 16, &bytes).unwrap();
        let models = models_for(&planes);
        let (bundle, layout) = plan_layout(grid, &models, &[0; 256], 0).unwrap();
        assert!(bundle.is_flagged(1));
        let written = write_aux(planes, &bundle, &layout).unwrap();
        assert_eq!(written.plane(1).get(grid.cell_index(15, PREDICTOR_CELL)), 1);
    }

    #[test]
    fn version_is_checked() {
        let planes = PlaneSet::from_bytes(16, 16, &vec![0u8; 256]).unwrap();
        let grid = planes.grid();
        let (bundle, layout) = plan_layout(grid, &models_for(&planes), &[0; 256], 0).unwrap();
        let mut written = write_aux(planes, &bundle, &layout).unwrap();
        let last = grid.cell_index(grid.reserved_slot(), 15);
        written.plane_mut(0).flip(last, 1);
        assert!(matches!(
            parse_aux(&written),
            Err(Error::VersionMismatch {
                found: 0,
                expected: 1
            })
        ));
    }

    #[test]
    fn unflagged_header_is_malformed() {
        let planes = PlaneSet::from_bytes(16, 16, &vec![0u8; 256]).unwrap();
        let mut planes = planes;
        let grid = planes.grid();
        planes
            .plane_mut(0)
            .set(grid.cell_index(grid.reserved_slot(), 15), 1);
        assert!(matches!(parse_aux(&planes), Err(Error::MalformedAux(_))));
    }

    #[test]
    fn addresses_depend_only_on_size() {
        let grid = BlockGrid::new(8, 8);
        let plane0: Vec<usize> = aux_addresses(grid, 0).collect();
        // three classifiable blocks, 15 cells each, starting at block 2 cell 14
        assert_eq!(plane0.len(), 45);
        assert_eq!(plane0[0], grid.cell_index(2, 14));
        assert_eq!(plane0[15], grid.cell_index(1, 14));
        let plane3: Vec<usize> = aux_addresses(grid, 3).collect();
        assert_eq!(plane3[0], grid.cell_index(3, 14));
    }
}
