//! Ring and Galois properties of `CycInt`, checked against evaluation at
//! `exp(2 pi i k / p^2)` in floating point.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use weakram_core::CycInt;

/// Value at `xi = exp(2 pi i k / p^2)`.
fn embed(a: &CycInt, k: i64) -> (f64, f64) {
    let p = a.p() as f64;
    let n = p * p;
    let mut re = 0.0;
    let mut im = 0.0;
    for (i, c) in a.coeffs().iter().enumerate() {
        let c = c.to_f64().unwrap();
        let t = 2.0 * std::f64::consts::PI * (k as f64) * (i as f64) / n;
        re += c * t.cos();
        im += c * t.sin();
    }
    (re, im)
}

fn close(a: (f64, f64), b: (f64, f64)) -> bool {
    let scale = 1.0 + a.0.abs() + a.1.abs();
    (a.0 - b.0).abs() < 1e-7 * scale && (a.1 - b.1).abs() < 1e-7 * scale
}

fn arb_cyc() -> impl Strategy<Value = CycInt> {
    prop_oneof![Just(3u32), Just(5u32)].prop_flat_map(|p| {
        prop::collection::vec(-20i64..20, (p * p) as usize)
            .prop_map(move |v| CycInt::from_coeffs(p, &v.into_iter().map(BigInt::from).collect::<Vec<_>>()))
    })
}

fn arb_pair() -> impl Strategy<Value = (CycInt, CycInt, CycInt)> {
    prop_oneof![Just(3u32), Just(5u32)].prop_flat_map(|p| {
        let v = move || {
            prop::collection::vec(-20i64..20, (p * p) as usize)
                .prop_map(move |v| CycInt::from_coeffs(p, &v.into_iter().map(BigInt::from).collect::<Vec<_>>()))
        };
        (v(), v(), v())
    })
}

proptest! {
    #[test]
    fn reduced_representative_is_canonical(a in arb_cyc()) {
        let p = a.p() as usize;
        prop_assert_eq!(a.coeffs().len(), p * (p - 1));
        prop_assert_eq!(CycInt::from_coeffs(a.p(), a.coeffs()), a);
    }

    #[test]
    fn ring_axioms((a, b, c) in arb_pair()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &CycInt::one(a.p()), a.clone());
        prop_assert_eq!(&a - &a, CycInt::zero(a.p()));
    }

    #[test]
    fn products_match_complex_embedding((a, b, _) in arb_pair()) {
        let prod = &a * &b;
        for k in [1i64, 2, 4] {
            let (x, y) = (embed(&a, k), embed(&b, k));
            let want = (x.0 * y.0 - x.1 * y.1, x.0 * y.1 + x.1 * y.0);
            prop_assert!(close(embed(&prod, k), want));
        }
    }

    #[test]
    fn galois_is_a_ring_automorphism((a, b, _) in arb_pair(), b1 in 1i64..200, b2 in 1i64..200) {
        let p = a.p() as i64;
        prop_assume!(b1 % p != 0 && b2 % p != 0);
        let g = |x: &CycInt, s: i64| x.galois(s).unwrap();
        prop_assert_eq!(g(&(&a * &b), b1), &g(&a, b1) * &g(&b, b1));
        prop_assert_eq!(g(&(&a + &b), b1), &g(&a, b1) + &g(&b, b1));
        prop_assert_eq!(g(&g(&a, b1), b2), g(&a, b1 * b2));
        // sigma_b(a) evaluated at xi is a evaluated at xi^b
        prop_assert!(close(embed(&g(&a, b1), 1), embed(&a, b1)));
    }

    #[test]
    fn root_exponents_add(e1 in -100i64..100, e2 in -100i64..100, p in prop_oneof![Just(3u32), Just(5u32), Just(7u32)]) {
        let n = (p * p) as i64;
        let r = &CycInt::root(p, e1) * &CycInt::root(p, e2);
        prop_assert_eq!(r.as_root_of_unity(), Some((1, (e1 + e2).rem_euclid(n))));
        let neg = -CycInt::root(p, e1);
        prop_assert_eq!(neg.as_root_of_unity(), Some((-1, e1.rem_euclid(n))));
    }
}

#[test]
fn root_examples() {
    assert_eq!(CycInt::root(3, 0), CycInt::one(3));
    assert_eq!(CycInt::root(3, 9), CycInt::one(3));
    // xi^6 = -1 - xi^3
    let mut want = vec![BigInt::from(0); 6];
    want[0] = BigInt::from(-1);
    want[3] = BigInt::from(-1);
    assert_eq!(CycInt::root(3, 6).coeffs(), &want[..]);
    assert_eq!(&CycInt::root(3, 5) * &CycInt::root(3, 6), CycInt::root(3, 2));
    assert_eq!(&CycInt::zeta_pow(3, 1) + &CycInt::zeta_pow(3, 2), CycInt::from_int(3, -1));
}

#[test]
fn galois_examples() {
    assert_eq!(CycInt::root(3, 1).galois(-1).unwrap(), CycInt::root(3, 8));
    assert_eq!(CycInt::one(5).galois(7).unwrap(), CycInt::one(5));
    assert!(CycInt::root(5, 1).galois(10).is_err());
    // the automorphisms for b mod p^2 prime to p are pairwise distinct
    let xi = CycInt::root(5, 1);
    let images: std::collections::HashSet<_> = (1..25).filter(|b| b % 5 != 0).map(|b| xi.galois(b).unwrap()).collect();
    assert_eq!(images.len(), 20);
}

#[test]
fn root_of_unity_detection() {
    assert_eq!(CycInt::root(3, 4).as_root_of_unity(), Some((1, 4)));
    assert_eq!(CycInt::from_int(3, -1).as_root_of_unity(), Some((-1, 0)));
    let one_plus_xi = &CycInt::one(3) + &CycInt::root(3, 1);
    assert_eq!(one_plus_xi.as_root_of_unity(), None);
}

#[test]
fn zeta_orthogonality() {
    for p in [3u32, 5, 7] {
        for n in 0..2 * p as i64 {
            let mut s = CycInt::zero(p);
            for t in 0..p as i64 {
                s = &s + &CycInt::zeta_pow(p, t * n);
            }
            let want = if n % p as i64 == 0 { p as i64 } else { 0 };
            assert_eq!(s, CycInt::from_int(p, want));
        }
    }
}
