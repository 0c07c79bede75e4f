// Data hider and receiver: hide a message in an encrypted image with `Kd`
// and read it back. Neither step touches `Ke`.

use rdhei::{embed, extract, load_pgm, max_payload_bytes, reserve_and_encrypt, PlaneSet};

pub fn run_example() -> rdhei::Result<Vec<u8>> {
    let image = load_pgm(concat!(env!("CARGO_MANIFEST_DIR"), "/testdata/baboon.pgm"))?;
    let ke = "01".repeat(32).parse()?;
    let kd = "02".repeat(32).parse()?;

    // the hider only ever sees the encrypted file
    let encrypted = reserve_and_encrypt(&image, &ke)?;
    let on_disk = PlaneSet::from_image(&encrypted.encrypted_image());
    println!(
        "hider capacity: {} bytes",
        max_payload_bytes(&encrypted.layout)
    );

    let message = b"meet at the usual place, 7pm".to_vec();
    let marked = embed(&on_disk, &message, &kd)?;
    let received = extract(&PlaneSet::from_image(&marked.to_image()), &kd)?;
    println!("extracted: {}", String::from_utf8_lossy(&received));
    assert_eq!(received, message);

    let wrong = extract(&marked, &"03".repeat(32).parse()?);
    println!("with the wrong Kd: {:?}", wrong.map(|m| m.len()));
    Ok(received)
}

fn main() -> rdhei::Result<()> {
    run_example().map(|_| ())
}
