//! Arithmetic in a few small fields, including GF(2^8) with its default modulus.

use coop_regen::galois::{smallest_prime_power_geq, Field, FieldSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gf5 = Field::new(FieldSpec::prime(5)?);
    println!(
        "{}: 3 * 4 = {}, 1/2 = {}",
        gf5.spec(),
        gf5.mul(3, 4),
        gf5.inv(2)?
    );

    let gf256 = Field::new(FieldSpec::with_default_modulus(2, 8)?);
    let modulus: Vec<String> = gf256
        .spec()
        .irreducible()
        .iter()
        .map(u64::to_string)
        .collect();
    println!(
        "{} modulus coefficients (c0..c7): {}",
        gf256.spec(),
        modulus.join(" ")
    );
    println!("0x53 * 0xca = {:#04x}", gf256.mul(0x53, 0xca));
    println!("0x53^-1 = {:#04x}", gf256.inv(0x53)?);

    let gf9 = Field::new(FieldSpec::with_default_modulus(3, 2)?);
    let mut bytes = Vec::new();
    gf9.write_symbol(7, &mut bytes);
    println!(
        "{}: element 7 = 2x + 1, serialized as {bytes:?}",
        gf9.spec()
    );

    for n in [4, 7, 10, 100] {
        println!(
            "smallest field for n = {n}: {}",
            smallest_prime_power_geq(n)?
        );
    }
    Ok(())
}
