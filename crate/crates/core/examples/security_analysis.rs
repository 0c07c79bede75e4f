// How the encrypted image compares with plain stream-cipher encryption:
// pixel entropy and ones-per-block counts of the high planes.

use rdhei::analysis::{
    chi_square_homogeneity, histogram_and_entropy, ones_per_block_histogram, standard_encrypt,
    ChiSquareOutcome,
};
use rdhei::{load_pgm, reserve_and_encrypt, PlaneSet};

pub fn run_example() -> rdhei::Result<(f64, Vec<ChiSquareOutcome>)> {
    let image = load_pgm(concat!(env!("CARGO_MANIFEST_DIR"), "/testdata/lena.pgm"))?;
    let ke = "c4".repeat(32).parse()?;

    let ours = reserve_and_encrypt(&image, &ke)?.encrypted;
    let standard = PlaneSet::from_image(&standard_encrypt(&image, &ke));

    let (_, plain_entropy) = histogram_and_entropy(&image);
    let (_, entropy) = histogram_and_entropy(&ours.to_image());
    println!("entropy: original {plain_entropy:.4}, encrypted {entropy:.4} bits/pixel");

    let mut outcomes = Vec::new();
    for k in 0..4 {
        let test = chi_square_homogeneity(
            &ones_per_block_histogram(ours.plane(k)),
            &ones_per_block_histogram(standard.plane(k)),
        );
        println!(
            "plane {}: chi2 {:.2} on {} dof, p = {:.3}",
            k + 1,
            test.statistic,
            test.dof,
            test.p_value
        );
        outcomes.push(test);
    }
    Ok((entropy, outcomes))
}

fn main() -> rdhei::Result<()> {
    run_example().map(|_| ())
}
