mod common;

use common::{check_all_subsets, encode_payload, gf5_params, random_payload, small_code_grid};
use coop_regen::galois::{Field, FieldSpec};
use coop_regen::matrix::Matrix;
use coop_regen::mscr::{
    decode_payload, encode, read_share, reconstruct, stripe, write_share, CodeParams, FieldMode,
    MscrError, SymbolMapping,
};
use proptest::prelude::*;

#[test]
fn every_k_subset_reconstructs() {
    for (n, k, r) in small_code_grid() {
        for mode in [FieldMode::Auto, FieldMode::Gf256] {
            let params = CodeParams::new(n, k, r, mode).unwrap();
            let payload = random_payload(&params, 3 * k * r + 1, (n * 100 + k * 10 + r) as u64);
            let shares = encode_payload(&params, &payload);
            let checked = check_all_subsets(&params, &shares, &payload)
                .unwrap_or_else(|s| panic!("({n},{k},{r}) {mode}: subset {s:?} failed"));
            assert_eq!(checked, binomial(n, k));
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn every_generator_submatrix_is_invertible() {
    for (n, k, r) in small_code_grid() {
        let params = CodeParams::new(n, k, r, FieldMode::Auto).unwrap();
        let f = params.field();
        for cols in itertools::Itertools::combinations(1..=n, k) {
            let sub = params.generator_columns(&cols);
            let inv = sub.invert().unwrap();
            assert_eq!(sub.mul(&inv).unwrap(), Matrix::identity(f, k));
        }
    }
}

#[test]
fn small_example_dimensions() {
    let params = gf5_params();
    let shares = encode_payload(&params, &[1, 2, 3, 4]);
    assert_eq!(shares.len(), 4);
    for s in &shares {
        assert_eq!(s.stripe_count(), 1);
        assert_eq!(s.column(0).len(), 2);
    }
    // node 1 (point 0) stores the first column of M: (m11, m21)
    assert_eq!(shares[0].column(0), &[1, 3]);
}

#[test]
fn empty_payload_round_trips() {
    let params = CodeParams::new(6, 3, 2, FieldMode::Gf256).unwrap();
    let shares = encode_payload(&params, &[]);
    assert!(shares.iter().all(|s| s.stripe_count() == 0));
    let bytes = write_share(&params, &shares[4]).unwrap();
    let (p, s) = read_share(&bytes).unwrap();
    assert_eq!(p, params);
    assert_eq!(
        decode_payload(&[s, shares[0].clone(), shares[1].clone()], &p).unwrap(),
        Vec::<u8>::new()
    );
}

#[test]
fn decode_errors() {
    let params = CodeParams::new(5, 3, 2, FieldMode::Gf256).unwrap();
    let shares = encode_payload(&params, b"some bytes");
    assert!(matches!(
        reconstruct(&shares[..2], &params),
        Err(MscrError::TooFewShares { needed: 3, got: 2 })
    ));
    let dup = vec![shares[0].clone(), shares[0].clone(), shares[1].clone()];
    assert!(matches!(
        reconstruct(&dup, &params),
        Err(MscrError::DuplicateNode(1))
    ));
    assert!(CodeParams::new(4, 3, 2, FieldMode::Gf256).is_err());
    let gf3 = Field::new(FieldSpec::prime(3).unwrap());
    assert!(CodeParams::with_field(4, 2, 2, gf3).is_err());
    let gf7 = CodeParams::new(7, 4, 3, FieldMode::Auto).unwrap();
    assert!(matches!(
        stripe(&[9], &gf7, SymbolMapping::Strict),
        Err(MscrError::SymbolOutOfRange { offset: 0 })
    ));
    let lossy = stripe(&[9], &gf7, SymbolMapping::Lossy).unwrap();
    assert_eq!(lossy.symbols()[0], 2);
}

fn params_strategy() -> impl Strategy<Value = CodeParams> {
    (
        2usize..=5,
        1usize..=3,
        0usize..=3,
        prop_oneof![
            Just(FieldMode::Auto),
            Just(FieldMode::Gf256),
            Just(FieldMode::Gf65536)
        ],
    )
        .prop_map(|(k, r, extra, mode)| CodeParams::new(k + r + extra, k, r, mode).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn binary_fields_round_trip_any_bytes(
        payload in proptest::collection::vec(any::<u8>(), 0..300),
        wide in any::<bool>(),
        pick in any::<u64>(),
    ) {
        let mode = if wide { FieldMode::Gf65536 } else { FieldMode::Gf256 };
        let params = CodeParams::new(7, 4, 3, mode).unwrap();
        let file = stripe(&payload, &params, SymbolMapping::Strict).unwrap();
        let shares = encode(&file, &params).unwrap();
        let mut chosen = shares.clone();
        let len = chosen.len();
        chosen.rotate_left((pick % len as u64) as usize);
        chosen.truncate(4);
        prop_assert_eq!(decode_payload(&chosen, &params).unwrap(), payload);
    }

    #[test]
    fn share_files_round_trip(params in params_strategy(), seed in any::<u64>(), len in 0usize..60) {
        let payload = random_payload(&params, len, seed);
        let shares = encode_payload(&params, &payload);
        for s in &shares {
            let bytes = write_share(&params, s).unwrap();
            let (p, parsed) = read_share(&bytes).unwrap();
            prop_assert_eq!(&p, &params);
            prop_assert_eq!(&parsed, s);
            let mut bad = bytes.clone();
            let i = (seed as usize) % bad.len();
            bad[i] ^= 1;
            prop_assert!(read_share(&bad).is_err());
        }
    }
}
