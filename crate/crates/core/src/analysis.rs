//! Capacity accounting, distortion and statistics used by the experiments.

use std::io::Write;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::blocks::{classify_blocks, BlockModel};
use crate::crypto::{keystream_bytes, EncryptionKey};
use crate::embedding::PREFIX_BITS;
use crate::error::{Error, Result};
use crate::pipeline::Reservation;
use crate::plane::{BitPlane, PLANES};
use crate::prediction::{compute_pe, pe_to_planes, PeImage};
use crate::raster::RasterImage;
use crate::wire::{plan_layout, read_header_block, AuxBundle, AuxLayout};

#[derive(Clone, Debug, PartialEq)]
pub struct PlaneCapacity {
    pub flagged: bool,
    pub ub_count: usize,
    pub nub_count: usize,
    pub embeddable_nubs: usize,
    pub aux_bits: usize,
    /// Payload cells left after aux.
    pub net_bits: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CapacityReport {
    pub width: usize,
    pub height: usize,
    pub overflow_pixels: usize,
    pub planes: Vec<PlaneCapacity>,
    /// Sum of the per-plane net bits.
    pub net_bits: usize,
    /// Largest byte-aligned payload after the length prefix.
    pub max_payload_bits: usize,
    /// `max_payload_bits / (width * height)`.
    pub er: f64,
    /// Set when no plane could carry the aux data.
    pub diagnostic: Option<String>,
}

impl CapacityReport {
    fn build(
        width: usize,
        height: usize,
        overflow_pixels: usize,
        models: &[BlockModel],
        planned: Option<(&AuxBundle, &AuxLayout)>,
    ) -> Self {
        let planes: Vec<PlaneCapacity> = models
            .iter()
            .enumerate()
            .map(|(p, model)| {
                let (flagged, aux_bits, net_bits) = match planned {
                    Some((bundle, layout)) if bundle.is_flagged(p) => {
                        (true, bundle.aux_len(p), layout.planes[p].capacity())
                    }
                    _ => (false, 0, 0),
                };
                PlaneCapacity {
                    flagged,
                    ub_count: model.ub_count(),
                    nub_count: model.nub_count(),
                    embeddable_nubs: model.embeddable_nubs(),
                    aux_bits,
                    net_bits,
                }
            })
            .collect();
        let net_bits: usize = planes.iter().map(|p| p.net_bits).sum();
        let max_payload_bits = net_bits.saturating_sub(PREFIX_BITS) / 8 * 8;
        Self {
            width,
            height,
            overflow_pixels,
            planes,
            net_bits,
            max_payload_bits,
            er: max_payload_bits as f64 / (width * height) as f64,
            diagnostic: planned.is_none().then(|| Error::CapacityError.to_string()),
        }
    }

    pub fn from_reservation(width: usize, height: usize, reservation: &Reservation) -> Self {
        Self::build(
            width,
            height,
            reservation.overflow_pixels,
            &reservation.models,
            Some((&reservation.bundle, &reservation.layout)),
        )
    }

    pub fn overflow_fraction(&self) -> f64 {
        self.overflow_pixels as f64 / (self.width * self.height) as f64
    }

    pub fn max_payload_bytes(&self) -> usize {
        self.max_payload_bits / 8
    }
}

/// Plans the reservation for `image` and reports its capacity. An image no
/// plane can serve yields ER 0 and a diagnostic rather than an error.
pub fn measure_er(image: &RasterImage) -> CapacityReport {
    let pe = compute_pe(image);
    let planes = pe_to_planes(&pe);
    let grid = planes.grid();
    let models: Vec<BlockModel> = (0..PLANES)
        .map(|p| classify_blocks(planes.plane(p), grid.classifiable(p)))
        .collect();
    let planned = plan_layout(grid, &models, pe.overflow(), read_header_block(&planes)).ok();
    CapacityReport::build(
        image.width(),
        image.height(),
        pe.overflow_count(),
        &models,
        planned.as_ref().map(|(b, l)| (b, l)),
    )
}

pub fn mse(a: &RasterImage, b: &RasterImage) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let sum: u64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    Ok(sum as f64 / a.len() as f64)
}

/// Count of 4x4 blocks by number of ones (index 0..=16).
pub fn ones_per_block_histogram(plane: &BitPlane) -> [u64; 17] {
    let mut hist = [0u64; 17];
    for slot in 0..plane.grid().count() {
        let ones: usize = plane.block(slot).iter().map(|&b| b as usize).sum();
        hist[ones] += 1;
    }
    hist
}

/// Shannon entropy, in bits, of an empirical distribution.
pub fn entropy_of_counts(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .sum()
}

pub fn histogram_and_entropy(image: &RasterImage) -> ([u64; 256], f64) {
    let mut hist = [0u64; 256];
    for &s in image.samples() {
        hist[s as usize] += 1;
    }
    let h = entropy_of_counts(&hist);
    (hist, h)
}

/// Entropy of the prediction errors of the non-reference pixels.
pub fn pe_entropy(pe: &PeImage) -> f64 {
    // in-range errors take bins 0..=128, overflow pixel values the rest
    let mut counts = vec![0u64; 129 + 256];
    let width = pe.width();
    for (index, (&e, &o)) in pe.errors().iter().zip(pe.overflow()).enumerate() {
        if index < width || index % width == 0 {
            continue;
        }
        let bin = if o == 1 {
            129 + e as usize
        } else {
            (e + 64) as usize
        };
        counts[bin] += 1;
    }
    entropy_of_counts(&counts)
}

/// Encrypts the original pixels directly with the `Ke` matrix, without any
/// room reservation: the baseline for the security comparisons.
pub fn standard_encrypt(image: &RasterImage, ke: &EncryptionKey) -> RasterImage {
    let h = keystream_bytes(ke, image.len());
    let samples = image.samples().iter().zip(h).map(|(&x, k)| x ^ k).collect();
    RasterImage::new(image.width(), image.height(), samples).expect("same dimensions")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquareOutcome {
    pub fn passes(&self, significance: f64) -> bool {
        self.p_value > significance
    }
}

fn chi_square_p(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    1.0 - dist.cdf(statistic)
}

/// Two-sample chi-square homogeneity test. Adjacent bins are pooled until
/// every pooled expected count is at least 5.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> ChiSquareOutcome {
    assert_eq!(a.len(), b.len(), "histograms must share their bins");
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let n = na + nb;
    let min_share = na.min(nb) / n;
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        acc.0 += x as f64;
        acc.1 += y as f64;
        if (acc.0 + acc.1) * min_share >= 5.0 {
            groups.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 + acc.1 > 0.0 {
        match groups.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => groups.push(acc),
        }
    }
    let statistic = groups
        .iter()
        .map(|&(x, y)| {
            let col = x + y;
            let (ea, eb) = (col * na / n, col * nb / n);
            (x - ea).powi(2) / ea + (y - eb).powi(2) / eb
        })
        .sum();
    let dof = groups.len().saturating_sub(1);
    ChiSquareOutcome {
        statistic,
        dof,
        p_value: chi_square_p(statistic, dof),
    }
}

/// Chi-square goodness of fit against bin probabilities, pooling adjacent
/// bins until each expected count is at least 5.
pub fn chi_square_goodness_of_fit(observed: &[u64], probabilities: &[f64]) -> ChiSquareOutcome {
    assert_eq!(observed.len(), probabilities.len());
    let n = observed.iter().sum::<u64>() as f64;
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probabilities) {
        acc.0 += o as f64;
        acc.1 += p * n;
        if acc.1 >= 5.0 {
            groups.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if let Some(last) = groups.last_mut() {
        last.0 += acc.0;
        last.1 += acc.1;
    }
    let statistic = groups.iter().map(|&(o, e)| (o - e).powi(2) / e).sum();
    let dof = groups.len().saturating_sub(1);
    ChiSquareOutcome {
        statistic,
        dof,
        p_value: chi_square_p(statistic, dof),
    }
}

/// Binomial(16, 1/2) probabilities: the ones-per-block law of a random plane.
pub fn random_block_probabilities() -> [f64; 17] {
    let mut probs = [0.0; 17];
    let mut binom = 1.0f64;
    for (k, p) in probs.iter_mut().enumerate() {
        *p = binom / 65536.0;
        binom = binom * (16 - k) as f64 / (k + 1) as f64;
    }
    probs
}

/// One row of the benchmark CSV.
#[derive(Clone, Debug)]
pub struct CsvRow {
    pub name: String,
    pub report: CapacityReport,
    pub mse: Option<f64>,
}

pub const CSV_HEADER: [&str; 15] = [
    "name",
    "height",
    "width",
    "overflow_percent",
    "net_bits_p1",
    "net_bits_p2",
    "net_bits_p3",
    "net_bits_p4",
    "net_bits_p5",
    "net_bits_p6",
    "net_bits_p7",
    "net_bits_p8",
    "payload_bits",
    "er_bpp",
    "mse",
];

/// Writes the header and one row per image. `mse` is empty when the
/// round trip was not run.
pub fn write_csv<W: Write>(out: W, rows: &[CsvRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let to_io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    writer.write_record(CSV_HEADER).map_err(to_io)?;
    for row in rows {
        let r = &row.report;
        let mut record = vec![
            row.name.clone(),
            r.height.to_string(),
            r.width.to_string(),
            format!("{:.4}", 100.0 * r.overflow_fraction()),
        ];
        record.extend(r.planes.iter().map(|p| p.net_bits.to_string()));
        record.push(r.max_payload_bits.to_string());
        record.push(format!("{:.4}", r.er));
        record.push(row.mse.map(|m| format!("{m}")).unwrap_or_default());
        writer.write_record(&record).map_err(to_io)?;
    }
    writer.flush()?;
    Ok(())
}
