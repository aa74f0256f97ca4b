//! Coordinate-level multiplication kernels for the fixed tower.
//!
//! Vectors are flat coordinate lists in the basis `Pi^i gamma^j theta^k`
//! (index `(i (p-1) + j) d + k`). Every kernel reduces its output into
//! `[0, m)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

pub(crate) fn reduce_all(v: &mut [BigInt], m: &BigInt) {
    for c in v.iter_mut() {
        if c.sign() == num_bigint::Sign::Minus || &*c >= m {
            *c = c.mod_floor(m);
        }
    }
}

fn is_zero_block(v: &[BigInt]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Product in `Z_p[theta]/f`, without final reduction mod `m` of the
/// schoolbook terms (callers reduce).
fn mul_k_acc(f: &[BigInt], a: &[BigInt], b: &[BigInt], out: &mut [BigInt], m: &BigInt) {
    let d = f.len() - 1;
    if d == 1 {
        out[0] += &a[0] * &b[0];
        return;
    }
    let mut t = vec![BigInt::zero(); 2 * d - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if !bj.is_zero() {
                t[i + j] += ai * bj;
            }
        }
    }
    for deg in (d..2 * d - 1).rev() {
        let c = std::mem::take(&mut t[deg]);
        if c.is_zero() {
            continue;
        }
        let c = c.mod_floor(m);
        for i in 0..d {
            t[deg - d + i] -= &c * &f[i];
        }
    }
    for (o, x) in out.iter_mut().zip(t) {
        *o += x;
    }
}

pub(crate) fn mul_k(f: &[BigInt], a: &[BigInt], b: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let d = f.len() - 1;
    let mut out = vec![BigInt::zero(); d];
    mul_k_acc(f, a, b, &mut out, m);
    reduce_all(&mut out, m);
    out
}

/// Product in `K' = K[gamma]/(gamma^{p-1} + p)`. Inputs may be shorter
/// than a full `K'` vector (a multiple of `d`); the output is full length.
pub(crate) fn mul_kp(p: u32, f: &[BigInt], a: &[BigInt], b: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let d = f.len() - 1;
    let n = p as usize - 1;
    let la = a.len() / d;
    let lb = b.len() / d;
    let mut t = vec![BigInt::zero(); (la + lb).max(1) * d];
    for i in 0..la {
        let ai = &a[i * d..(i + 1) * d];
        if is_zero_block(ai) {
            continue;
        }
        for j in 0..lb {
            let bj = &b[j * d..(j + 1) * d];
            if is_zero_block(bj) {
                continue;
            }
            let (lo, hi) = ((i + j) * d, (i + j + 1) * d);
            mul_k_acc(f, ai, bj, &mut t[lo..hi], m);
        }
    }
    let blocks = t.len() / d;
    let pb = BigInt::from(p);
    // gamma^{n + r} = -p gamma^r
    for deg in (n..blocks).rev() {
        for k in 0..d {
            let c = std::mem::take(&mut t[deg * d + k]);
            if !c.is_zero() {
                t[(deg - n) * d + k] -= c * &pb;
            }
        }
    }
    t.truncate(n * d);
    t.resize(n * d, BigInt::zero());
    reduce_all(&mut t, m);
    t
}

/// Relation data of `L = K'[Pi]/((Pi+1)^p - x)`:
/// `Pi^p = (x - 1) - sum_{i=1}^{p-1} C(p,i) Pi^i`.
pub(crate) struct LRelation<'a> {
    pub x_minus_1: &'a [BigInt],
    pub binom: &'a [BigInt],
}

/// Product in `L`; inputs may be shorter than full length (a multiple of
/// the `K'` block size).
pub(crate) fn mul_l(
    p: u32,
    f: &[BigInt],
    rel: &LRelation<'_>,
    a: &[BigInt],
    b: &[BigInt],
    m: &BigInt,
) -> Vec<BigInt> {
    let d = f.len() - 1;
    let pu = p as usize;
    let w = (pu - 1) * d;
    let la = a.len() / w;
    let lb = b.len() / w;
    let blocks = (la + lb).max(1);
    let mut t: Vec<Vec<BigInt>> = vec![Vec::new(); blocks];
    for i in 0..la {
        let ai = &a[i * w..(i + 1) * w];
        if is_zero_block(ai) {
            continue;
        }
        for j in 0..lb {
            let bj = &b[j * w..(j + 1) * w];
            if is_zero_block(bj) {
                continue;
            }
            let prod = mul_kp(p, f, ai, bj, m);
            add_into(&mut t[i + j], &prod, w);
        }
    }
    for deg in (pu..blocks).rev() {
        let c = std::mem::take(&mut t[deg]);
        if c.is_empty() || is_zero_block(&c) {
            continue;
        }
        let mut c = c;
        reduce_all(&mut c, m);
        let low = mul_kp(p, f, &c, rel.x_minus_1, m);
        add_into(&mut t[deg - pu], &low, w);
        for i in 1..pu {
            let slot = &mut t[deg - pu + i];
            if slot.is_empty() {
                *slot = vec![BigInt::zero(); w];
            }
            for (s, ck) in slot.iter_mut().zip(&c) {
                *s -= ck * &rel.binom[i];
            }
        }
    }
    let mut out = Vec::with_capacity(pu * w);
    for blk in t.into_iter().take(pu) {
        if blk.is_empty() {
            out.extend(std::iter::repeat(BigInt::zero()).take(w));
        } else {
            out.extend(blk);
        }
    }
    out.resize(pu * w, BigInt::zero());
    reduce_all(&mut out, m);
    out
}

fn add_into(slot: &mut Vec<BigInt>, v: &[BigInt], w: usize) {
    if slot.is_empty() {
        *slot = vec![BigInt::zero(); w];
    }
    for (s, x) in slot.iter_mut().zip(v) {
        *s += x;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn k_product_reduces_by_modulus() {
        // f = t^2 + 1, (1 + t)^2 = 2t
        let f = ints(&[1, 0, 1]);
        let m = BigInt::from(3i64.pow(5));
        assert_eq!(mul_k(&f, &ints(&[1, 1]), &ints(&[1, 1]), &m), ints(&[0, 2]));
    }

    #[test]
    fn gamma_power_wraps_to_minus_p() {
        // p = 3, d = 1: gamma * gamma = -3
        let f = ints(&[0, 1]);
        let m = BigInt::from(3i64.pow(6));
        let g = ints(&[0, 1]);
        let sq = mul_kp(3, &f, &g, &g, &m);
        assert_eq!(sq, ints(&[729 - 3, 0]));
    }

    #[test]
    fn kummer_relation_holds() {
        // p = 3, d = 1, x = 1 + gamma: (Pi + 1)^3 = x
        let p = 3;
        let f = ints(&[0, 1]);
        let m = BigInt::from(3i64.pow(8));
        let xm1 = ints(&[0, 1]);
        let binom = ints(&[1, 3, 3]);
        let rel = LRelation { x_minus_1: &xm1, binom: &binom };
        let t = ints(&[1, 0, 1, 0, 0, 0]);
        let t2 = mul_l(p, &f, &rel, &t, &t, &m);
        let t3 = mul_l(p, &f, &rel, &t2, &t, &m);
        assert_eq!(t3, ints(&[1, 1, 0, 0, 0, 0]));
    }
}
