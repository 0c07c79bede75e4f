//! Keys, keystreams and XOR encryption.
//!
//! Both keys are 256-bit values. A keystream is ChaCha20 (64-bit block
//! counter, stream 0, counter starting at 0) keyed with
//! `SHA-256(label || key)`, where the label is `"RDHEI-H"` for the image
//! matrix and `"RDHEI-P"` for the payload. The image matrix `H` takes one
//! keystream byte per pixel in row-major order and plane `k` of `H` is bit
//! `7 - k` of that byte.

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::plane::{PlaneSet, PLANES};
use crate::wire::AuxLayout;

const IMAGE_LABEL: &[u8] = b"RDHEI-H";
const PAYLOAD_LABEL: &[u8] = b"RDHEI-P";

fn parse_key(text: &str) -> Result<[u8; 32]> {
    let text = text.trim();
    if text.len() != 64 {
        return Err(Error::InvalidKey(format!(
            "expected 64 hex characters, got {}",
            text.len()
        )));
    }
    let mut key = [0u8; 32];
    hex::decode_to_slice(text, &mut key).map_err(|e| Error::InvalidKey(e.to_string()))?;
    Ok(key)
}

fn keystream(label: &[u8], key: &[u8; 32]) -> ChaCha20Rng {
    let mut hasher = Sha256::new();
    hasher.update(label);
    hasher.update(key);
    let seed: [u8; 32] = hasher.finalize().into();
    ChaCha20Rng::from_seed(seed)
}

macro_rules! key_type {
    ($name:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone, PartialEq, Eq)]
        pub struct $name([u8; 32]);

        impl $name {
            pub fn from_bytes(bytes: [u8; 32]) -> Self {
                Self(bytes)
            }

            pub fn as_bytes(&self) -> &[u8; 32] {
                &self.0
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                parse_key(s).map(Self)
            }
        }

        // keep key material out of logs
        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(concat!(stringify!($name), "(..)"))
            }
        }
    };
}

key_type!(
    EncryptionKey,
    "Content-owner key `Ke`: encrypts the image planes."
);
key_type!(
    DataHidingKey,
    "Data-hider key `Kd`: encrypts the payload stream."
);

/// The pseudo-random matrix `H` as raw bytes, one per pixel.
pub fn keystream_bytes(key: &EncryptionKey, len: usize) -> Vec<u8> {
    let mut out = vec![0u8; len];
    keystream(IMAGE_LABEL, &key.0).fill_bytes(&mut out);
    out
}

pub fn keystream_planes(key: &EncryptionKey, width: usize, height: usize) -> Result<PlaneSet> {
    PlaneSet::from_bytes(width, height, &keystream_bytes(key, width * height))
}

/// XORs every cell with the keystream except the layout's excluded cells
/// (aux stream and header block). Applying it twice is the identity.
pub fn encrypt_planes(
    planes: &PlaneSet,
    key: &EncryptionKey,
    layout: &AuxLayout,
) -> Result<PlaneSet> {
    if layout.grid != planes.grid() {
        return Err(Error::LayoutMismatch(
            "layout built for a different image".into(),
        ));
    }
    let h = keystream_bytes(key, planes.width() * planes.height());
    let mut out = planes.clone();
    for k in 0..PLANES {
        let shift = 7 - k;
        let plane = out.plane_mut(k);
        for (index, &byte) in h.iter().enumerate() {
            plane.flip(index, byte >> shift);
        }
        for index in layout.excluded(k) {
            plane.set(index, planes.plane(k).get(index));
        }
    }
    Ok(out)
}

/// XORs `data` with the payload keystream of `key`.
pub fn cipher_payload(data: &[u8], key: &DataHidingKey) -> Vec<u8> {
    let mut stream = vec![0u8; data.len()];
    keystream(PAYLOAD_LABEL, &key.0).fill_bytes(&mut stream);
    data.iter().zip(stream).map(|(d, s)| d ^ s).collect()
}
