mod common;

use common::{check_field_axioms, naive_mul, prime_powers_upto};
use coop_regen::galois::{smallest_prime_power_geq, Field, FieldSpec, GaloisError};
use proptest::prelude::*;

#[test]
fn axioms_hold_for_every_field_up_to_64() {
    let fields = prime_powers_upto(64);
    assert_eq!(fields.len(), 27);
    for (p, m) in fields {
        let f = Field::new(FieldSpec::with_default_modulus(p, m).unwrap());
        assert_eq!(f.order(), p.pow(m));
        check_field_axioms(&f).unwrap_or_else(|e| panic!("GF({p}^{m}): {e}"));
    }
}

#[test]
fn default_moduli_of_small_binary_fields() {
    // lowest-index monic irreducibles, coefficients c0..c(m-1)
    let expect: [(u32, &[u64]); 4] = [
        (2, &[1, 1]),
        (3, &[1, 1, 0]),
        (4, &[1, 1, 0, 0]),
        (8, &[1, 1, 0, 1, 1, 0, 0, 0]),
    ];
    for (m, low) in expect {
        let spec = FieldSpec::with_default_modulus(2, m).unwrap();
        assert_eq!(spec.irreducible(), low, "m={m}");
    }
    assert_eq!(
        FieldSpec::with_default_modulus(3, 2).unwrap().irreducible(),
        &[1, 0]
    );
}

#[test]
fn field_selection() {
    let order = |n| smallest_prime_power_geq(n).unwrap().order();
    assert_eq!(order(4), 4);
    assert_eq!(order(6), 7);
    assert_eq!(order(7), 7);
    assert_eq!(order(10), 11);
    assert_eq!(order(33), 37);
    assert!(matches!(
        smallest_prime_power_geq(1),
        Err(GaloisError::FieldTooSmall(1))
    ));
}

#[test]
fn rejects_bad_specs() {
    assert!(FieldSpec::prime(6).is_err());
    assert!(FieldSpec::new(2, 2, vec![0, 0]).is_err()); // x^2 is reducible
    assert!(FieldSpec::new(2, 2, vec![1]).is_err());
    assert!(FieldSpec::new(3, 2, vec![3, 0]).is_err());
}

#[test]
fn tables_agree_with_reference_path() {
    for (p, m) in [(2, 8), (3, 5), (251, 1), (2, 16)] {
        let spec = FieldSpec::with_default_modulus(p, m).unwrap();
        let fast = Field::new(spec.clone());
        let slow = Field::reference(spec);
        assert!(fast.has_tables() && !slow.has_tables());
        let q = fast.order();
        let step = (q / 300).max(1);
        for a in (0..q).step_by(step as usize) {
            for b in (0..q).step_by(step as usize) {
                assert_eq!(fast.mul(a, b), slow.mul(a, b));
            }
            if a != 0 {
                assert_eq!(fast.inv(a).unwrap(), slow.inv(a).unwrap());
            }
        }
    }
}

fn big_field() -> impl Strategy<Value = Field> {
    prop_oneof![
        Just((2u64, 16u32)),
        Just((2, 32)),
        Just((3, 20)),
        Just((65_537, 1)),
        Just((4_294_967_291, 1)),
        Just((257, 3)),
    ]
    .prop_map(|(p, m)| Field::new(FieldSpec::with_default_modulus(p, m).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn large_field_axioms(f in big_field(), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let q = f.order();
        let (a, b, c) = (a % q, b % q, c % q);
        prop_assert_eq!(f.mul(a, b), naive_mul(f.spec(), a, b));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.sub(f.add(a, b), b), a);
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            prop_assert_eq!(f.pow(a, q - 1), 1);
        }
    }

    #[test]
    fn symbol_serialization_round_trips(f in big_field(), a in any::<u64>()) {
        let a = a % f.order();
        let mut bytes = Vec::new();
        f.write_symbol(a, &mut bytes);
        prop_assert_eq!(bytes.len(), f.symbol_width());
        prop_assert_eq!(f.read_symbol(&bytes).unwrap(), a);
    }
}
