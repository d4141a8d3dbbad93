//! Extracting a uniform key from a description index and using it as a pad.

use mawc::sim::{build_key_mapping, decrypt, encrypt, equalize_partition};

fn main() -> mawc::Result<()> {
    let (domain, keys) = (1 << 10, 4);
    let (map, report) = build_key_mapping(domain, keys, 11)?;
    println!("random map deviation {:.4}", report.deviation);

    let (bins, part) = equalize_partition(&map, keys)?;
    println!("moved {} indices, H(K|g) = {:.4} <= {:.4}", part.moved, part.conditional_entropy, part.bound);

    let key = bins[517];
    let m = 3;
    let c = encrypt(m, key, keys);
    println!("message {m} key {key} cipher {c} decrypted {}", decrypt(c, key, keys));
    Ok(())
}
