//! Valuation, Galois and power-map properties of the tower arithmetic on
//! random elements.

use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use proptest::prelude::*;
use weakram_core::dwork::{zeta_of_gamma, DworkSeries};
use weakram_core::padic::zp::ZpInt;
use weakram_core::padic::{pow_padic, teichmuller, trace_norm, FieldPair, TraceOrNorm};
use weakram_core::{Level, PadicElem, Tower, Val};

const CAP: i64 = 12;

struct Fixture {
    base: Arc<Tower>,
    full: Arc<Tower>,
}

fn fixture(p: u32, d: usize) -> &'static Fixture {
    static F: OnceLock<Vec<((u32, usize), Fixture)>> = OnceLock::new();
    let all = F.get_or_init(|| {
        [(3u32, 1usize), (3, 2), (5, 1), (5, 2)]
            .into_iter()
            .map(|(p, d)| {
                let (base, _) = Tower::unramified(p, d, CAP, 3).unwrap();
                let s = DworkSeries::new(p, CAP).unwrap();
                let zeta = zeta_of_gamma(&s, &base).unwrap();
                let x = &PadicElem::one(&base, Level::Kprime) + &PadicElem::gamma(&base);
                let full = base.with_kummer(&x, &zeta).unwrap();
                ((p, d), Fixture { base, full })
            })
            .collect()
    });
    &all.iter().find(|(k, _)| *k == (p, d)).unwrap().1
}

fn shape() -> impl Strategy<Value = (u32, usize)> {
    prop_oneof![Just((3u32, 1usize)), Just((3, 2)), Just((5, 1)), Just((5, 2))]
}

fn elem(t: &Arc<Tower>, level: Level, v: &[i64], shift: i64) -> PadicElem {
    let n = level.dim(t.p(), t.degree());
    let c: Vec<BigInt> = v.iter().cycle().take(n).map(|&x| BigInt::from(x)).collect();
    PadicElem::exact(t, level, c).mul_p_pow(shift)
}

fn coords() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-30i64..30, 1..40)
}

fn close(a: &PadicElem, b: &PadicElem, n: i64) -> bool {
    a.agreement(b).unwrap() >= Val::from(n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn valuation_additive_and_ultrametric(
        (p, d) in shape(), a in coords(), b in coords(), s1 in 0i64..3, s2 in 0i64..3,
        level in prop_oneof![Just(Level::K), Just(Level::Kprime), Just(Level::L)],
    ) {
        let t = &fixture(p, d).full;
        let x = elem(t, level, &a, s1);
        let y = elem(t, level, &b, s2);
        prop_assume!(!x.is_zero() && !y.is_zero());
        prop_assert_eq!((&x * &y).valuation(), x.valuation() + y.valuation());
        let sum = &x + &y;
        if !sum.is_zero() {
            prop_assert!(sum.valuation() >= x.valuation().min(y.valuation()));
            if x.valuation() != y.valuation() {
                prop_assert_eq!(sum.valuation(), x.valuation().min(y.valuation()));
            }
        }
    }

    #[test]
    fn frobenius_is_an_automorphism_of_order_d((p, d) in shape(), a in coords(), b in coords()) {
        let t = &fixture(p, d).base;
        let x = elem(t, Level::K, &a, 0);
        let y = elem(t, Level::K, &b, 0);
        let f = |z: &PadicElem| z.frobenius().unwrap();
        prop_assert!(close(&f(&(&x * &y)), &(&f(&x) * &f(&y)), CAP - 1));
        prop_assert!(close(&f(&(&x + &y)), &(&f(&x) + &f(&y)), CAP - 1));
        let mut z = x.clone();
        for _ in 0..d {
            z = f(&z);
        }
        prop_assert!(close(&z, &x, CAP - 1));
    }

    #[test]
    fn trace_additive_norm_multiplicative((p, d) in shape(), a in coords(), b in coords()) {
        let t = &fixture(p, d).base;
        let x = elem(t, Level::K, &a, 0);
        let y = elem(t, Level::K, &b, 0);
        let tr = |z: &PadicElem| trace_norm(FieldPair::KOverQp, z, TraceOrNorm::Trace).unwrap();
        let nm = |z: &PadicElem| trace_norm(FieldPair::KOverQp, z, TraceOrNorm::Norm).unwrap();
        prop_assert!(close(&tr(&(&x + &y)), &(&tr(&x) + &tr(&y)), CAP - 1));
        prop_assert!(close(&nm(&(&x * &y)), &(&nm(&x) * &nm(&y)), CAP - 2));
        // Tr(1) = d
        let one = PadicElem::one(t, Level::K);
        prop_assert!(close(&tr(&one), &PadicElem::from_int(t, Level::Qp, d as i64), CAP));
    }

    #[test]
    fn norm_of_qp_zeta_element_is_dth_power((p, d) in shape(), a in coords()) {
        let t = &fixture(p, d).base;
        let g = PadicElem::gamma(t);
        let mut z = PadicElem::zero(t, Level::Kprime);
        let mut gp = PadicElem::one(t, Level::Kprime);
        for c in a.iter().take(p as usize - 1) {
            z = &z + &(&gp * &PadicElem::from_int(t, Level::Kprime, *c));
            gp = &gp * &g;
        }
        prop_assume!(!z.is_zero());
        let n = trace_norm(FieldPair::KprimeOverQpZeta, &z, TraceOrNorm::Norm).unwrap();
        prop_assert!(close(&n, &z.pow(d as u64), CAP - 2));
    }

    #[test]
    fn teichmuller_is_multiplicative((p, d) in shape(), r1 in prop::collection::vec(0u64..5, 2), r2 in prop::collection::vec(0u64..5, 2)) {
        let t = &fixture(p, d).base;
        let k = t.residue_field();
        let r1: Vec<u64> = r1.iter().take(d).map(|x| x % p as u64).collect();
        let r2: Vec<u64> = r2.iter().take(d).map(|x| x % p as u64).collect();
        prop_assume!(!k.is_zero(&r1) && !k.is_zero(&r2));
        let w1 = teichmuller(t, &r1).unwrap();
        let w2 = teichmuller(t, &r2).unwrap();
        let q = k.size();
        prop_assert!(close(&w1.pow(q - 1), &PadicElem::one(t, Level::K), CAP));
        prop_assert_eq!(w1.residue().unwrap(), k.add(&r1, &k.zero()));
        let w12 = teichmuller(t, &k.mul(&r1, &r2)).unwrap();
        prop_assert!(close(&(&w1 * &w2), &w12, CAP));
        // Frobenius on Teichmuller lifts is the p-th power
        prop_assert!(close(&w1.frobenius().unwrap(), &w1.pow(p as u64), CAP));
    }

    #[test]
    fn h_tilde_is_an_automorphism_of_order_p((p, d) in shape(), a in coords(), b in coords()) {
        let t = &fixture(p, d).full;
        let x = elem(t, Level::L, &a, 0);
        let y = elem(t, Level::L, &b, 0);
        let h = |z: &PadicElem, s: u32| z.h_tilde(s).unwrap();
        let tol = CAP - 2;
        prop_assert!(close(&h(&(&x * &y), 1), &(&h(&x, 1) * &h(&y, 1)), tol));
        prop_assert!(close(&h(&h(&x, 1), 2), &h(&x, 3), tol));
        prop_assert!(close(&h(&x, p), &x, tol));
        // elements of K' are fixed
        let k = elem(t, Level::Kprime, &a, 0).embed(Level::L).unwrap();
        prop_assert!(close(&h(&k, 1), &k, tol));
    }

    #[test]
    fn pow_padic_matches_integer_powers((p, d) in shape(), a in coords(), n in 0u64..40, m in 1u64..30) {
        let t = &fixture(p, d).full;
        let pi = PadicElem::pi(t).unwrap();
        let u = &PadicElem::one(t, Level::L) + &(&pi * &elem(t, Level::L, &a, 0));
        let tol = CAP - 4;
        let lhs = pow_padic(&u, &ZpInt::new(p, n, CAP + 4)).unwrap();
        prop_assert!(close(&lhs, &u.pow(n), tol));
        let nm = pow_padic(&u, &ZpInt::new(p, n * m, CAP + 4)).unwrap();
        let nested = pow_padic(&lhs, &ZpInt::new(p, m, CAP + 4)).unwrap();
        prop_assert!(close(&nm, &nested, tol));
        // negative exponents through the p-adic expansion of -1
        let minus_one = ZpInt::new(p, -1, CAP + 4);
        let inv = pow_padic(&u, &minus_one).unwrap();
        prop_assert!(close(&(&inv * &u), &PadicElem::one(t, Level::L), tol));
    }
}

#[test]
fn kummer_generator_pth_root() {
    for (p, d) in [(3u32, 1usize), (5, 2)] {
        let t = &fixture(p, d).full;
        let tt = PadicElem::kummer_t(t).unwrap();
        assert!(close(&tt.pow(p as u64), t.x().unwrap(), CAP - 1));
        assert_eq!(PadicElem::pi(t).unwrap().valuation(), Val::new(1, (p as i64) * (p as i64 - 1)));
        // h moves T by zeta
        let ht = tt.h_tilde(1).unwrap();
        let z = t.zeta().unwrap();
        let z = PadicElem::from_parts(t, Level::L, z.shift(), z.prec(), z.coords().to_vec());
        let zt = &tt * &z;
        assert!(close(&ht, &zt, CAP - 1));
    }
}

#[test]
fn trace_to_qp_of_teichmuller_is_integer_sum() {
    let t = &fixture(3, 2).base;
    let k = t.residue_field();
    // sum of all Teichmuller lifts of F_9^x is 0
    let mut acc = PadicElem::zero(t, Level::K);
    for a in 0..3u64 {
        for b in 0..3u64 {
            let r = vec![a, b];
            if !k.is_zero(&r) {
                acc = &acc + &teichmuller(t, &r).unwrap();
            }
        }
    }
    assert!(close(&acc, &PadicElem::zero(t, Level::K), CAP));
}
