//! Reversible data hiding in encrypted 8-bit grayscale images.
//!
//! The content owner predicts each pixel, splits the prediction errors
//! into bit planes, moves the non-uniform blocks of each plane to the front
//! and stores the side information in the freed space before encrypting
//! with `Ke`. A data hider holding `Kd` fills the remaining free cells with
//! an encrypted payload. A receiver extracts the payload with `Kd` and/or
//! recovers the original image exactly with `Ke`.
//!
//! ```no_run
//! use rdhei::{embed, extract, recover, reserve_and_encrypt, load_pgm};
//! # fn main() -> rdhei::Result<()> {
//! let image = load_pgm("lena.pgm")?;
//! let ke = "11".repeat(32).parse()?;
//! let kd = "22".repeat(32).parse()?;
//! let encrypted = reserve_and_encrypt(&image, &ke)?.encrypted;
//! let marked = embed(&encrypted, b"hello", &kd)?;
//! assert_eq!(extract(&marked, &kd)?, b"hello");
//! assert_eq!(recover(&marked, &ke)?, image);
//! # Ok(())
//! # }
//! ```

pub mod analysis;
pub mod blocks;
pub mod cli;
pub mod crypto;
pub mod embedding;
pub mod entropy;
pub mod error;
pub mod pipeline;
pub mod plane;
pub mod prediction;
pub mod raster;
pub mod wire;

pub use analysis::{measure_er, CapacityReport};
pub use crypto::{DataHidingKey, EncryptionKey};
pub use embedding::{embed, extract, max_payload_bytes, recover};
pub use error::{Error, Result};
pub use pipeline::{full_cycle_check, reserve, reserve_and_encrypt, CycleReport};
pub use plane::{BitPlane, PlaneSet};
pub use raster::{load_pgm, store_pgm, RasterImage};
