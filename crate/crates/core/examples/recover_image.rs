// Receiver with `Ke`: rebuild the original image from a marked one,
// whether or not a payload was embedded.

use rdhei::analysis::mse;
use rdhei::{embed, load_pgm, recover, reserve_and_encrypt};

pub fn run_example() -> rdhei::Result<f64> {
    let image = load_pgm(concat!(env!("CARGO_MANIFEST_DIR"), "/testdata/lena.pgm"))?;
    let ke = "aa".repeat(32).parse()?;
    let kd = "bb".repeat(32).parse()?;

    let encrypted = reserve_and_encrypt(&image, &ke)?.encrypted;
    let marked = embed(&encrypted, &vec![0x5a; 20_000], &kd)?;

    let from_marked = recover(&marked, &ke)?;
    let from_unmarked = recover(&encrypted, &ke)?;
    let err = mse(&image, &from_marked)?;
    println!("MSE after recovery: {err}");
    assert_eq!(from_marked, image);
    assert_eq!(from_unmarked, image);

    // the marked image alone looks like noise
    println!(
        "MSE of the marked image itself: {:.1}",
        mse(&image, &marked.to_image())?
    );
    Ok(err)
}

fn main() -> rdhei::Result<()> {
    run_example().map(|_| ())
}
