//! Adaptive binary arithmetic coder used for the sparse label maps.
//!
//! Coder parameters (part of the container format, version 1):
//!
//! * 32-bit `low` / `range` registers; the encoder keeps one extra carry bit
//!   in `low` and propagates carries into the bits already emitted.
//! * Renormalization shifts one bit at a time while `range < 2^31`.
//! * One adaptive context with counts `(c0, c1)` starting at `(1, 1)`; both
//!   counts are halved (rounding up) once their sum reaches `2^16`.
//! * The interval is split as `split = range * c0 / (c0 + c1)`; a 0 keeps
//!   `[low, low + split)`, a 1 keeps `[low + split, low + range)`.
//! * Termination emits the shortest prefix that identifies a value inside
//!   the final interval when followed by zeros; the decoder reads zeros past
//!   the end of the code.
//!
//! Bits are `u8` values 0 or 1, first bit first.

use crate::error::{Error, Result};

const TOP: u64 = 1 << 32;
const HALF: u32 = 1 << 31;
const COUNT_LIMIT: u32 = 1 << 16;

#[derive(Clone, Copy, Debug)]
struct Model {
    c0: u32,
    c1: u32,
}

impl Model {
    fn new() -> Self {
        Self { c0: 1, c1: 1 }
    }

    #[inline]
    fn split(&self, range: u32) -> u32 {
        (range as u64 * self.c0 as u64 / (self.c0 + self.c1) as u64) as u32
    }

    #[inline]
    fn update(&mut self, bit: u8) {
        if bit == 0 {
            self.c0 += 1;
        } else {
            self.c1 += 1;
        }
        if self.c0 + self.c1 >= COUNT_LIMIT {
            self.c0 = self.c0.div_ceil(2);
            self.c1 = self.c1.div_ceil(2);
        }
    }
}

struct Encoder {
    low: u64,
    range: u32,
    out: Vec<u8>,
}

impl Encoder {
    fn new() -> Self {
        Self {
            low: 0,
            range: u32::MAX,
            out: Vec::new(),
        }
    }

    fn propagate_carry(&mut self) {
        for bit in self.out.iter_mut().rev() {
            if *bit == 1 {
                *bit = 0;
            } else {
                *bit = 1;
                return;
            }
        }
        unreachable!("carry out of the first code bit");
    }

    fn encode(&mut self, model: &Model, bit: u8) {
        let split = model.split(self.range);
        if bit == 0 {
            self.range = split;
        } else {
            self.low += split as u64;
            self.range -= split;
        }
        if self.low >= TOP {
            self.propagate_carry();
            self.low -= TOP;
        }
        while self.range < HALF {
            self.out.push((self.low >> 31) as u8);
            self.low = (self.low << 1) & (TOP - 1);
            self.range <<= 1;
        }
    }

    fn finish(mut self) -> Vec<u8> {
        let end = self.low + self.range as u64;
        for k in 0..=32u32 {
            let step = 1u64 << (32 - k);
            let value = self.low.div_ceil(step) * step;
            if value < end {
                if value >= TOP {
                    self.propagate_carry();
                }
                let value = value & (TOP - 1);
                for i in 0..k {
                    self.out.push(((value >> (31 - i)) & 1) as u8);
                }
                return self.out;
            }
        }
        unreachable!("a 32-bit prefix always lands inside a non-empty interval")
    }
}

/// Compresses a bit sequence. The length is not stored; callers keep it.
pub fn ac_encode(bits: &[u8]) -> Vec<u8> {
    if bits.is_empty() {
        return Vec::new();
    }
    let mut model = Model::new();
    let mut enc = Encoder::new();
    for &bit in bits {
        let bit = bit & 1;
        enc.encode(&model, bit);
        model.update(bit);
    }
    enc.finish()
}

/// Decodes `n` symbols from `code`.
///
/// Reading more than 32 bits past the end of `code` means the code cannot
/// have come from [`ac_encode`] and yields [`Error::DecodeOverrun`].
pub fn ac_decode(code: &[u8], n: usize) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return Ok(out);
    }
    let limit = code.len() + 32;
    let mut pos = 0usize;
    let next = |pos: &mut usize| -> Option<u32> {
        let bit = code.get(*pos).map_or(0, |&b| (b & 1) as u32);
        *pos += 1;
        (*pos <= limit).then_some(bit)
    };
    let mut offset: u32 = 0;
    for _ in 0..32 {
        offset = (offset << 1) | next(&mut pos).expect("first 32 reads are within the limit");
    }
    let mut range = u32::MAX;
    let mut model = Model::new();
    for decoded in 0..n {
        let split = model.split(range);
        let bit = if offset < split {
            range = split;
            0
        } else {
            offset -= split;
            range -= split;
            1
        };
        if offset >= range {
            return Err(Error::DecodeOverrun {
                decoded,
                expected: n,
            });
        }
        model.update(bit);
        out.push(bit);
        while range < HALF {
            let Some(b) = next(&mut pos) else {
                return Err(Error::DecodeOverrun {
                    decoded: decoded + 1,
                    expected: n,
                });
            };
            offset = (offset << 1) | b;
            range <<= 1;
        }
    }
    Ok(out)
}

/// How a label map is stored in the container.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapMode {
    Coded = 0,
    Raw = 1,
}

impl MapMode {
    pub fn bit(self) -> u8 {
        self as u8
    }

    pub fn from_bit(bit: u8) -> Self {
        if bit & 1 == 0 {
            MapMode::Coded
        } else {
            MapMode::Raw
        }
    }
}

/// A label map in its stored form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoredMap {
    pub mode: MapMode,
    pub bits: Vec<u8>,
}

impl StoredMap {
    /// Arithmetic-codes `map`, falling back to the raw bits when coding
    /// does not make it shorter.
    pub fn pack(map: &[u8]) -> Self {
        let coded = ac_encode(map);
        if coded.len() >= map.len() {
            StoredMap {
                mode: MapMode::Raw,
                bits: map.iter().map(|b| b & 1).collect(),
            }
        } else {
            StoredMap {
                mode: MapMode::Coded,
                bits: coded,
            }
        }
    }

    pub fn unpack(&self, n: usize) -> Result<Vec<u8>> {
        match self.mode {
            MapMode::Coded => ac_decode(&self.bits, n),
            MapMode::Raw if self.bits.len() == n => Ok(self.bits.clone()),
            MapMode::Raw => Err(Error::MalformedAux(format!(
                "raw map holds {} bits, expected {}",
                self.bits.len(),
                n
            ))),
        }
    }
}
