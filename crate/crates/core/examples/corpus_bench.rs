// Embedding rate and full round trip over a directory of PGM files,
// written as CSV.
//
// ```text
// cargo run --release --example corpus_bench -- <dir> [out.csv]
// ```
//
// Without arguments it runs on the bundled test images.

use std::path::PathBuf;

use rdhei::analysis::{write_csv, CsvRow};
use rdhei::raster::list_corpus;
use rdhei::{full_cycle_check, load_pgm, measure_er, DataHidingKey, EncryptionKey};

fn default_out() -> PathBuf {
    std::env::temp_dir().join("rdhei-bench.csv")
}

pub fn run_example() -> rdhei::Result<Vec<CsvRow>> {
    run(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("testdata"),
        default_out(),
    )
}

pub fn run(dir: PathBuf, out: PathBuf) -> rdhei::Result<Vec<CsvRow>> {
    let ke = EncryptionKey::from_bytes([7; 32]);
    let kd = DataHidingKey::from_bytes([9; 32]);

    let mut rows = Vec::new();
    for path in list_corpus(&dir)? {
        let image = load_pgm(&path)?;
        let report = measure_er(&image);
        let payload = vec![0xc3; report.max_payload_bytes()];
        let cycle = full_cycle_check(&image, &ke, &kd, &payload)?;
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        println!(
            "{name}: ER {:.3} bpp, MSE {}, {:.1} ms",
            report.er,
            cycle.mse,
            cycle.total_time().as_secs_f64() * 1e3
        );
        rows.push(CsvRow {
            name,
            report,
            mse: Some(cycle.mse),
        });
    }
    let mean = rows.iter().map(|r| r.report.er).sum::<f64>() / rows.len().max(1) as f64;
    println!("mean ER over {} images: {mean:.3} bpp", rows.len());
    write_csv(std::fs::File::create(&out)?, &rows)?;
    println!("wrote {}", out.display());
    Ok(rows)
}

fn main() -> rdhei::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.as_slice() {
        [] => run_example(),
        [dir] => run(dir.into(), default_out()),
        [dir, out, ..] => run(dir.into(), out.into()),
    }
    .map(|_| ())
}
