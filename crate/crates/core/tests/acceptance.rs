//! Acceptance suite. Prints one status line per criterion:
//!
//! - `PASS`: every check ran and held.
//! - `FAIL`: a check ran and did not hold. The test fails.
//! - `BLOCKED`: every check that could run held, but some inputs are not
//!   available here. The test fails only with `RDHEI_STRICT_ACCEPTANCE=1`.
//! - `REPORT`: measured and printed, no threshold.
//!
//! The five standard images are looked up as `<name>.pgm` in
//! `RDHEI_TEST_IMAGES` (if set) and then in `testdata/`. Corpus samples for
//! criterion 3 are read from `RDHEI_BOSSBASE_DIR`, `RDHEI_BOWS2_DIR` and
//! `RDHEI_UCID_DIR` when set.

mod common;

use std::collections::HashSet;
use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rdhei::analysis::{
    chi_square_homogeneity, histogram_and_entropy, ones_per_block_histogram, standard_encrypt,
};
use rdhei::blocks::{
    classify_blocks, inverse_rearrange, nub_embeddable, rearrange, restore_nub, PARTS,
};
use rdhei::crypto::encrypt_planes;
use rdhei::embedding::embedding_positions;
use rdhei::entropy::{ac_decode, ac_encode};
use rdhei::plane::{BitPlane, PLANES};
use rdhei::prediction::{overflow_fraction, pe_to_planes, planes_to_pe, PeImage};
use rdhei::raster::list_corpus;
use rdhei::wire::parse_aux;
use rdhei::{embed, full_cycle_check, load_pgm, measure_er, reserve, PlaneSet, RasterImage};

use common::{kd, ke, random_bytes, smooth_image, testdata};

/// Name, expected ER in bpp, expected overflow percentage.
const STANDARD: [(&str, f64, f64); 5] = [
    ("lena", 2.87, 0.04),
    ("baboon", 1.321, 1.42),
    ("jetplane", 3.232, 0.16),
    ("man", 2.49, 0.09),
    ("tiffany", 2.943, 0.02),
];
const ER_TOLERANCE: f64 = 0.25;
const OVERFLOW_TOLERANCE_PP: f64 = 0.05;
const CORPUS_TOLERANCE: f64 = 0.3;
const CYCLE_BUDGET: Duration = Duration::from_secs(2);
const SYNTHETIC_COUNT: u64 = 100;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Status {
    Pass,
    Fail,
    Blocked,
    Report,
}

struct Outcome {
    id: &'static str,
    title: &'static str,
    status: Status,
    detail: String,
}

impl Outcome {
    fn new(
        id: &'static str,
        title: &'static str,
        ok: bool,
        missing: &[&str],
        detail: String,
    ) -> Self {
        let status = match (ok, missing.is_empty()) {
            (false, _) => Status::Fail,
            (true, true) => Status::Pass,
            (true, false) => Status::Blocked,
        };
        let detail = if missing.is_empty() {
            detail
        } else {
            format!("{detail}; missing: {}", missing.join(", "))
        };
        Outcome {
            id,
            title,
            status,
            detail,
        }
    }

    fn line(&self) -> String {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Blocked => "BLOCKED",
            Status::Report => "REPORT",
        };
        format!("[{tag:<7}] {:<3} {}: {}", self.id, self.title, self.detail)
    }
}

fn standard_image(name: &str) -> Option<RasterImage> {
    let file = format!("{name}.pgm");
    let mut candidates = Vec::new();
    if let Ok(dir) = std::env::var("RDHEI_TEST_IMAGES") {
        candidates.push(PathBuf::from(dir).join(&file));
    }
    candidates.push(testdata(&file));
    candidates
        .into_iter()
        .find(|p| p.exists())
        .map(|p| load_pgm(p).expect("standard image must parse"))
}

fn synthetic_sample() -> Vec<RasterImage> {
    (0..SYNTHETIC_COUNT)
        .map(|seed| smooth_image(512, 512, 1000 + seed))
        .collect()
}

fn criterion_1(synthetic: &[RasterImage]) -> Outcome {
    let mut missing = Vec::new();
    let mut images: Vec<(String, RasterImage)> = Vec::new();
    for (name, _, _) in STANDARD {
        match standard_image(name) {
            Some(img) => images.push((name.to_string(), img)),
            None => missing.push(name),
        }
    }
    images.extend(
        synthetic
            .iter()
            .enumerate()
            .map(|(i, img)| (format!("synthetic{i}"), img.clone())),
    );

    let mut failures = Vec::new();
    let mut slowest = Duration::ZERO;
    for (i, (name, img)) in images.iter().enumerate() {
        let report = measure_er(img);
        let payload = random_bytes(report.max_payload_bytes(), i as u64);
        let start = Instant::now();
        let result = full_cycle_check(img, &ke(11), &kd(12), &payload);
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        match result {
            Ok(cycle) if cycle.mse == 0.0 && elapsed < CYCLE_BUDGET => {}
            Ok(cycle) => failures.push(format!("{name}: mse {} in {elapsed:?}", cycle.mse)),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    let detail = format!(
        "{} images at full capacity, {} failures{}, slowest cycle {:.0} ms",
        images.len(),
        failures.len(),
        if failures.is_empty() {
            String::new()
        } else {
            format!(" ({})", failures.join("; "))
        },
        slowest.as_secs_f64() * 1e3
    );
    Outcome::new(
        "1",
        "lossless reversibility",
        failures.is_empty(),
        &missing,
        detail,
    )
}

fn criterion_2() -> Outcome {
    let mut missing = Vec::new();
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, expected, _) in STANDARD {
        let Some(img) = standard_image(name) else {
            missing.push(name);
            continue;
        };
        let er = measure_er(&img).er;
        let within = (er - expected).abs() <= ER_TOLERANCE;
        ok &= within;
        parts.push(format!(
            "{name} {er:.3} vs {expected} {}",
            if within { "ok" } else { "OUT" }
        ));
    }
    Outcome::new(
        "2",
        "embedding rates (±0.25 bpp)",
        ok,
        &missing,
        parts.join(", "),
    )
}

fn criterion_3(synthetic: &[RasterImage]) -> Vec<Outcome> {
    let mean_er = |images: &mut dyn Iterator<Item = RasterImage>| -> (usize, f64) {
        let ers: Vec<f64> = images.map(|img| measure_er(&img).er).collect();
        (ers.len(), ers.iter().sum::<f64>() / ers.len().max(1) as f64)
    };
    let mut out = Vec::new();
    let mut any_corpus = false;
    for (var, label, expected) in [
        ("RDHEI_BOSSBASE_DIR", "BOSSbase", 3.498),
        ("RDHEI_BOWS2_DIR", "BOWS-2", 3.393),
        ("RDHEI_UCID_DIR", "UCID", 2.797),
    ] {
        let Ok(dir) = std::env::var(var) else {
            continue;
        };
        any_corpus = true;
        let paths = list_corpus(&dir).expect("corpus directory must be readable");
        let (n, mean) = mean_er(
            &mut paths
                .iter()
                .map(|p| load_pgm(p).expect("corpus image must parse")),
        );
        let ok = n >= 100 && (mean - expected).abs() <= CORPUS_TOLERANCE;
        out.push(Outcome::new(
            "3",
            "corpus mean ER (±0.3 bpp)",
            ok,
            &[],
            format!("{label}: {n} images, mean {mean:.3} vs {expected}"),
        ));
    }
    let (n, mean) = mean_er(&mut synthetic.iter().cloned());
    out.push(Outcome {
        id: "3",
        title: "corpus mean ER",
        status: Status::Report,
        detail: format!(
            "{}{n} synthetic photo-like 512x512 images, mean ER {mean:.3} bpp",
            if any_corpus {
                ""
            } else {
                "no corpus directories set; "
            }
        ),
    });
    out
}

fn criterion_4() -> Outcome {
    let mut missing = Vec::new();
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, _, expected) in STANDARD {
        let Some(img) = standard_image(name) else {
            missing.push(name);
            continue;
        };
        let pct = 100.0 * overflow_fraction(&img);
        let within = (pct - expected).abs() <= OVERFLOW_TOLERANCE_PP;
        ok &= within;
        parts.push(format!(
            "{name} {pct:.3}% vs {expected}% {}",
            if within { "ok" } else { "OUT" }
        ));
    }
    Outcome::new(
        "4",
        "overflow fractions (±0.05 pp)",
        ok,
        &missing,
        parts.join(", "),
    )
}

fn criterion_5() -> Outcome {
    let Some(lena) = standard_image("lena") else {
        return Outcome::new("5", "security measurements", true, &["lena"], String::new());
    };
    let key = ke(21);
    let encrypted = rdhei::reserve_and_encrypt(&lena, &key).unwrap().encrypted;
    let (_, entropy) = histogram_and_entropy(&encrypted.to_image());
    let standard = PlaneSet::from_image(&standard_encrypt(&lena, &key));
    let chi = chi_square_homogeneity(
        &ones_per_block_histogram(encrypted.plane(0)),
        &ones_per_block_histogram(standard.plane(0)),
    );
    let ok = entropy >= 7.99 && chi.passes(0.01);
    let detail = format!(
        "entropy {entropy:.5} (>= 7.99); MSB ones-per-block chi2 {:.2} on {} dof, p = {:.4} (>= 0.01)",
        chi.statistic, chi.dof, chi.p_value
    );
    Outcome::new("5", "security measurements", ok, &[], detail)
}

fn criterion_6a() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x6a);
    let mut failures = 0;
    let cases = 10_000;
    for _ in 0..cases {
        let len = rng.random_range(0..2000);
        let p1: f64 = rng.random_range(0.0..=1.0);
        let bits: Vec<u8> = (0..len).map(|_| u8::from(rng.random_bool(p1))).collect();
        if ac_decode(&ac_encode(&bits), len).ok() != Some(bits) {
            failures += 1;
        }
    }
    Outcome::new(
        "6a",
        "arithmetic coder round trip",
        failures == 0,
        &[],
        format!("{cases} random sequences, {failures} failures"),
    )
}

fn random_plane(rng: &mut StdRng) -> BitPlane {
    let (w, h) = (4 * rng.random_range(2..=32), 4 * rng.random_range(2..=32));
    let defects: f64 = rng.random_range(0.0..=1.0);
    let mut plane = BitPlane::zeros(w, h);
    for slot in 0..plane.grid().count() {
        let fill: u16 = if rng.random_bool(defects) {
            rng.random()
        } else if rng.random_bool(0.5) {
            0xFFFF
        } else {
            0
        };
        plane.set_block(slot, &std::array::from_fn(|i| ((fill >> i) & 1) as u8));
    }
    plane
}

fn criterion_6b() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x6b);
    let cases = 1000;
    let mut failures = 0;
    for i in 0..cases {
        let plane = random_plane(&mut rng);
        // alternate between planes with and without the reserved block
        let count = plane.grid().count() - (i % 2);
        let model = classify_blocks(&plane, count);
        let moved = rearrange(&plane, &model);
        if inverse_rearrange(&moved, &model.l2).ok() != Some(plane) {
            failures += 1;
        }
    }
    Outcome::new(
        "6b",
        "rearrange / inverse identity",
        failures == 0,
        &[],
        format!("{cases} random planes, {failures} failures"),
    )
}

fn criterion_6c() -> Outcome {
    let mut embeddable = 0;
    let mut failures = 0;
    for pattern in 0u32..1 << 16 {
        let block: [u8; 16] = std::array::from_fn(|i| ((pattern >> i) & 1) as u8);
        if nub_embeddable(&block).embeddable() {
            embeddable += 1;
            for overwrite in 0u8..16 {
                let mut marked = block;
                for (q, part) in PARTS.iter().enumerate() {
                    marked[part.p] = (overwrite >> q) & 1;
                }
                restore_nub(&mut marked);
                if marked != block {
                    failures += 1;
                }
            }
        } else {
            // a rejected block must be one the restoration would damage
            let mut restored = block;
            restore_nub(&mut restored);
            if restored == block {
                failures += 1;
            }
        }
    }
    Outcome::new(
        "6c",
        "majority restoration, all 2^16 blocks",
        failures == 0,
        &[],
        format!("{embeddable} embeddable blocks x 16 overwrites, {failures} failures"),
    )
}

fn random_pe_image(rng: &mut StdRng) -> PeImage {
    let (w, h) = (4 * rng.random_range(2..=10), 4 * rng.random_range(2..=10));
    let overflow_rate: f64 = rng.random_range(0.0..0.5);
    let mut pe = Vec::with_capacity(w * h);
    let mut ov = Vec::with_capacity(w * h);
    for i in 0..w * h {
        if i < w || i % w == 0 {
            pe.push(rng.random_range(0..=255));
            ov.push(0);
        } else if rng.random_bool(overflow_rate) {
            pe.push(rng.random_range(0..=255));
            ov.push(1);
        } else {
            pe.push(rng.random_range(-64..=64));
            ov.push(0);
        }
    }
    PeImage::new(w, h, pe, ov).unwrap()
}

fn criterion_6d() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x6d);
    let cases = 10_000;
    let mut failures = 0;
    for _ in 0..cases {
        let pe = random_pe_image(&mut rng);
        let planes = pe_to_planes(&pe);
        if planes_to_pe(&planes, pe.overflow()).ok() != Some(pe) {
            failures += 1;
        }
    }
    Outcome::new(
        "6d",
        "PE <-> planes bijectivity",
        failures == 0,
        &[],
        format!("{cases} random PE images, {failures} failures"),
    )
}

fn criterion_6e(synthetic: &[RasterImage]) -> Outcome {
    let mut images: Vec<RasterImage> = (0..200).map(|s| smooth_image(64, 64, 5000 + s)).collect();
    images.extend(synthetic.iter().take(10).cloned());
    if let Some(lena) = standard_image("lena") {
        images.push(lena);
    }
    let mut failures = Vec::new();
    let mut audited = 0;
    for (i, img) in images.iter().enumerate() {
        let Ok(reservation) = reserve(img) else {
            continue;
        };
        audited += 1;
        let key = ke(i as u8);
        let layout = &reservation.layout;
        let encrypted = encrypt_planes(&reservation.planes, &key, layout).unwrap();
        if encrypt_planes(&encrypted, &key, layout).unwrap() != reservation.planes {
            failures.push(format!("image {i}: encryption is not an involution"));
        }
        let payload = random_bytes(rdhei::max_payload_bytes(layout), i as u64);
        let marked = embed(&encrypted, &payload, &kd(i as u8)).unwrap();
        let allowed: HashSet<(usize, usize)> = embedding_positions(layout).into_iter().collect();
        for p in 0..PLANES {
            for index in layout.excluded(p) {
                let plain = reservation.planes.plane(p).get(index);
                if encrypted.plane(p).get(index) != plain || marked.plane(p).get(index) != plain {
                    failures.push(format!("image {i}: aux cell ({p}, {index}) modified"));
                }
                if allowed.contains(&(p, index)) {
                    failures.push(format!(
                        "image {i}: aux cell ({p}, {index}) used for payload"
                    ));
                }
            }
        }
        match parse_aux(&marked) {
            Ok((bundle, parsed)) if bundle == reservation.bundle && parsed == *layout => {}
            _ => failures.push(format!("image {i}: aux unreadable after embedding")),
        }
    }
    let ok = failures.is_empty() && audited > 0;
    failures.truncate(5);
    Outcome::new(
        "6e",
        "XOR involution and aux non-interference",
        ok,
        &[],
        format!(
            "{audited} images audited{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!(": {}", failures.join("; "))
            }
        ),
    )
}

#[test]
fn acceptance() {
    let synthetic = synthetic_sample();

    let mut outcomes = vec![criterion_1(&synthetic), criterion_2()];
    outcomes.extend(criterion_3(&synthetic));
    outcomes.extend([
        criterion_4(),
        criterion_5(),
        criterion_6a(),
        criterion_6b(),
        criterion_6c(),
        criterion_6d(),
        criterion_6e(&synthetic),
    ]);

    // straight to the handle so the lines survive output capture
    let mut err = std::io::stderr().lock();
    writeln!(err).unwrap();
    for outcome in &outcomes {
        writeln!(err, "{}", outcome.line()).unwrap();
    }
    drop(err);
    let strict = std::env::var("RDHEI_STRICT_ACCEPTANCE").is_ok_and(|v| v == "1");
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|o| o.status == Status::Fail || (strict && o.status == Status::Blocked))
        .map(|o| o.id)
        .collect();
    assert!(failed.is_empty(), "criteria not met: {failed:?}");
}
