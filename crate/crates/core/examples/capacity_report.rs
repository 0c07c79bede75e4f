// Embedding-rate breakdown for one image: overflow pixels, per-plane block
// counts and the net payload room.

use rdhei::analysis::pe_entropy;
use rdhei::cli::print_capacity;
use rdhei::prediction::compute_pe;
use rdhei::{load_pgm, measure_er, CapacityReport};

pub fn run_example() -> rdhei::Result<Vec<CapacityReport>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/testdata");
    let mut reports = Vec::new();
    for name in ["lena.pgm", "baboon.pgm"] {
        let image = load_pgm(format!("{dir}/{name}"))?;
        let report = measure_er(&image);
        println!(
            "== {name} (prediction-error entropy {:.3} bits)",
            pe_entropy(&compute_pe(&image))
        );
        let mut table = Vec::new();
        print_capacity(&mut table, &report)?;
        print!("{}", String::from_utf8_lossy(&table));
        reports.push(report);
    }
    Ok(reports)
}

fn main() -> rdhei::Result<()> {
    run_example().map(|_| ())
}
