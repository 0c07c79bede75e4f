//! End-to-end flows for the three parties: the content owner reserves room
//! and encrypts, the data hider embeds, the receiver extracts and/or
//! recovers. Each party works from the marked plane set alone.

use std::time::{Duration, Instant};

use crate::analysis::{mse, CapacityReport};
use crate::blocks::{classify_blocks, rearrange, BlockModel};
use crate::crypto::{encrypt_planes, DataHidingKey, EncryptionKey};
use crate::embedding::{embed, extract, recover};
use crate::error::{Error, Result};
use crate::plane::{PlaneSet, PLANES};
use crate::prediction::{compute_pe, pe_to_planes};
use crate::raster::RasterImage;
use crate::wire::{plan_layout, read_header_block, write_aux, AuxBundle, AuxLayout};

/// Plaintext planes with aux written, before encryption.
#[derive(Clone, Debug)]
pub struct Reservation {
    pub planes: PlaneSet,
    pub bundle: AuxBundle,
    pub layout: AuxLayout,
    pub models: Vec<BlockModel>,
    pub overflow_pixels: usize,
}

#[derive(Clone, Debug)]
pub struct ReservationResult {
    pub encrypted: PlaneSet,
    pub bundle: AuxBundle,
    pub layout: AuxLayout,
    pub report: CapacityReport,
}

impl ReservationResult {
    pub fn encrypted_image(&self) -> RasterImage {
        self.encrypted.to_image()
    }
}

/// Prediction, plane decomposition, block rearrangement and aux placement.
pub fn reserve(image: &RasterImage) -> Result<Reservation> {
    let pe = compute_pe(image);
    let pe_planes = pe_to_planes(&pe);
    let grid = pe_planes.grid();
    let models: Vec<BlockModel> = (0..PLANES)
        .map(|p| classify_blocks(pe_planes.plane(p), grid.classifiable(p)))
        .collect();
    let header = read_header_block(&pe_planes);
    let (bundle, layout) = plan_layout(grid, &models, pe.overflow(), header)?;

    let mut planes = pe_planes;
    for (p, model) in models.iter().enumerate() {
        if bundle.is_flagged(p) {
            let moved = rearrange(planes.plane(p), model);
            *planes.plane_mut(p) = moved;
        }
    }
    let planes = write_aux(planes, &bundle, &layout)?;
    Ok(Reservation {
        planes,
        bundle,
        layout,
        models,
        overflow_pixels: pe.overflow_count(),
    })
}

pub fn reserve_and_encrypt(image: &RasterImage, ke: &EncryptionKey) -> Result<ReservationResult> {
    let reservation = reserve(image)?;
    let report = CapacityReport::from_reservation(image.width(), image.height(), &reservation);
    let encrypted = encrypt_planes(&reservation.planes, ke, &reservation.layout)?;
    Ok(ReservationResult {
        encrypted,
        bundle: reservation.bundle,
        layout: reservation.layout,
        report,
    })
}

/// Outcome of a full owner -> hider -> receiver round trip.
#[derive(Clone, Debug)]
pub struct CycleReport {
    pub payload_bits: usize,
    pub capacity_bits: usize,
    /// Payload bits per pixel.
    pub er: f64,
    pub mse: f64,
    pub reserve_time: Duration,
    pub embed_time: Duration,
    pub extract_time: Duration,
    pub recover_time: Duration,
}

impl CycleReport {
    pub fn total_time(&self) -> Duration {
        self.reserve_time + self.embed_time + self.extract_time + self.recover_time
    }
}

/// Runs every stage and checks that the payload and the image both come
/// back exactly. The marked image goes through its 8-bit raster form, as
/// it would when written to disk.
pub fn full_cycle_check(
    image: &RasterImage,
    ke: &EncryptionKey,
    kd: &DataHidingKey,
    payload: &[u8],
) -> Result<CycleReport> {
    let t = Instant::now();
    let reserved = reserve_and_encrypt(image, ke)?;
    let encrypted = PlaneSet::from_image(&reserved.encrypted_image());
    let reserve_time = t.elapsed();

    let t = Instant::now();
    let marked = PlaneSet::from_image(&embed(&encrypted, payload, kd)?.to_image());
    let embed_time = t.elapsed();

    let t = Instant::now();
    let extracted = extract(&marked, kd)?;
    let extract_time = t.elapsed();
    if extracted != payload {
        return Err(Error::CycleMismatch(format!(
            "extracted {} bytes, embedded {}",
            extracted.len(),
            payload.len()
        )));
    }

    let t = Instant::now();
    let recovered = recover(&marked, ke)?;
    let recover_time = t.elapsed();
    let mse = mse(image, &recovered)?;
    if recovered != *image {
        return Err(Error::CycleMismatch(format!(
            "recovered image differs, MSE {mse}"
        )));
    }

    Ok(CycleReport {
        payload_bits: 8 * payload.len(),
        capacity_bits: reserved.layout.capacity(),
        er: (8 * payload.len()) as f64 / image.len() as f64,
        mse,
        reserve_time,
        embed_time,
        extract_time,
        recover_time,
    })
}
