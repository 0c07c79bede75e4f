// Content owner: reserve room in a grayscale image and encrypt it.
//
// ```text
// cargo run --example reserve_encrypt -- [input.pgm] [output.pgm]
// ```

use std::path::PathBuf;

use rdhei::{load_pgm, reserve_and_encrypt, store_pgm, EncryptionKey};

pub fn run_example() -> rdhei::Result<f64> {
    run(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("testdata/lena.pgm"),
        std::env::temp_dir().join("rdhei-encrypted.pgm"),
    )
}

pub fn run(input: PathBuf, output: PathBuf) -> rdhei::Result<f64> {
    let image = load_pgm(&input)?;
    let ke: EncryptionKey = "3b".repeat(32).parse()?;
    let result = reserve_and_encrypt(&image, &ke)?;
    store_pgm(&result.encrypted_image(), &output)?;

    for (p, plane) in result.report.planes.iter().enumerate() {
        println!(
            "plane {}: flagged={} UB={} NUB={} net={} bits",
            p + 1,
            plane.flagged,
            plane.ub_count,
            plane.nub_count,
            plane.net_bits
        );
    }
    println!(
        "room for {} payload bytes",
        result.report.max_payload_bytes()
    );
    println!(
        "ER {:.3} bpp, encrypted image at {}",
        result.report.er,
        output.display()
    );
    Ok(result.report.er)
}

fn main() -> rdhei::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.as_slice() {
        [] => run_example(),
        [input] => run(
            input.into(),
            std::env::temp_dir().join("rdhei-encrypted.pgm"),
        ),
        [input, output, ..] => run(input.into(), output.into()),
    }
    .map(|_| ())
}
