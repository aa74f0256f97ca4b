//! Small prime-field polynomial arithmetic and the residue field `k`.

/// Polynomials over `F_p` as little-endian coefficient vectors.
pub(crate) mod fp_poly {
    pub fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn inv(a: u64, p: u64) -> u64 {
        pow(a % p, p - 2, p)
    }

    pub fn pow(mut b: u64, mut e: u64, p: u64) -> u64 {
        let mut acc = 1u64;
        b %= p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        acc
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        let out = (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y % p) % p
            })
            .collect();
        trim(out)
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        trim(out)
    }

    /// Remainder of `a` by a nonzero `m`.
    pub fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let m = trim(m.to_vec());
        let mut a = trim(a.to_vec());
        let lead_inv = inv(*m.last().expect("nonzero modulus"), p);
        while a.len() >= m.len() {
            let shift = a.len() - m.len();
            let c = a.last().unwrap() * lead_inv % p;
            for (i, mi) in m.iter().enumerate() {
                a[shift + i] = (a[shift + i] + p - c * mi % p) % p;
            }
            a = trim(a);
        }
        a
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut a = trim(a.to_vec());
        let mut b = trim(b.to_vec());
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    pub fn powmod(base: &[u64], mut e: u128, m: &[u64], p: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = rem(&mul(&acc, &b, p), m, p);
            }
            b = rem(&mul(&b, &b, p), m, p);
            e >>= 1;
        }
        acc
    }

    /// Ben-Or irreducibility test for a monic polynomial.
    pub fn is_irreducible(f: &[u64], p: u64) -> bool {
        let f = trim(f.to_vec());
        let d = f.len() - 1;
        if d == 0 {
            return false;
        }
        let x = vec![0, 1];
        let mut xp = x.clone();
        for _ in 0..d / 2 {
            xp = powmod(&xp, p as u128, &f, p);
            let g = gcd(&f, &sub(&xp, &x, p), p);
            if g.len() > 1 {
                return false;
            }
        }
        true
    }

    /// First monic irreducible polynomial of degree `d` in lexicographic order
    /// of its low coefficients.
    pub fn first_irreducible(d: usize, p: u64) -> Vec<u64> {
        let total = p.pow(d as u32);
        for code in 0..total {
            let mut f = Vec::with_capacity(d + 1);
            let mut c = code;
            for _ in 0..d {
                f.push(c % p);
                c /= p;
            }
            f.push(1);
            if is_irreducible(&f, p) {
                return f;
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }
}

/// Dense linear algebra over `F_p`.
pub(crate) mod fp_linalg {
    use super::fp_poly::inv;

    /// Row-reduces in place; returns the pivot columns.
    pub fn rref(m: &mut [Vec<u64>], p: u64) -> Vec<usize> {
        let rows = m.len();
        let cols = if rows == 0 { 0 } else { m[0].len() };
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            let Some(sel) = (r..rows).find(|&i| m[i][c] % p != 0) else {
                continue;
            };
            m.swap(r, sel);
            let iv = inv(m[r][c], p);
            for x in m[r].iter_mut() {
                *x = *x * iv % p;
            }
            for i in 0..rows {
                if i != r && m[i][c] != 0 {
                    let f = m[i][c];
                    for j in 0..cols {
                        m[i][j] = (m[i][j] + p * p - f * m[r][j] % p) % p;
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == rows {
                break;
            }
        }
        pivots
    }

    pub fn rank(m: &[Vec<u64>], p: u64) -> usize {
        let mut w = m.to_vec();
        rref(&mut w, p).len()
    }

    /// Basis of `{ v : m v = 0 }`.
    pub fn nullspace(m: &[Vec<u64>], cols: usize, p: u64) -> Vec<Vec<u64>> {
        let mut w = m.to_vec();
        let pivots = rref(&mut w, p);
        let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![0u64; cols];
                v[f] = 1;
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = (p - w[r][f] % p) % p;
                }
                v
            })
            .collect()
    }

    /// Inverse of a square matrix, if it exists.
    pub fn inverse(m: &[Vec<u64>], p: u64) -> Option<Vec<Vec<u64>>> {
        let n = m.len();
        let mut aug: Vec<Vec<u64>> = m
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.clone();
                r.extend((0..n).map(|j| u64::from(i == j)));
                r
            })
            .collect();
        let pivots = rref(&mut aug, p);
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
    }

    pub fn mat_vec(m: &[Vec<u64>], v: &[u64], p: u64) -> Vec<u64> {
        m.iter().map(|row| row.iter().zip(v).fold(0, |acc, (a, b)| (acc + a * b) % p)).collect()
    }
}

use fp_linalg::{inverse, mat_vec, rank};
use fp_poly::{mul, rem};

/// The residue field `k = F_p[t]/(m(t))`, with `t` a normal basis generator.
#[derive(Clone, Debug)]
pub struct ResidueField {
    p: u64,
    d: usize,
    /// Monic modulus, little-endian, length `d + 1`.
    modulus: Vec<u64>,
    /// Columns: power-basis coordinates of `t^{p^j}`.
    normal_to_power: Vec<Vec<u64>>,
    power_to_normal: Vec<Vec<u64>>,
}

pub type Residue = Vec<u64>;

impl ResidueField {
    /// Plain arithmetic in `F_p[t]/(modulus)`, without normal basis data.
    pub fn arith(p: u64, modulus: Vec<u64>) -> Self {
        let d = modulus.len() - 1;
        ResidueField { p, d, modulus, normal_to_power: Vec::new(), power_to_normal: Vec::new() }
    }

    /// Builds `k` from a monic irreducible modulus whose root `t` generates a
    /// normal basis. Returns `None` when `t` is not normal.
    pub fn new(p: u64, modulus: Vec<u64>) -> Option<Self> {
        let mut field = Self::arith(p, modulus);
        let d = field.d;
        let t = field.root();
        let conj: Vec<Residue> = (0..d).map(|j| field.pow(&t, p.pow(j as u32) as u128)).collect();
        let cols: Vec<Vec<u64>> = (0..d).map(|r| conj.iter().map(|c| c[r]).collect()).collect();
        let inv = inverse(&cols, p)?;
        field.normal_to_power = cols;
        field.power_to_normal = inv;
        Some(field)
    }

    /// The class of `t` in the power basis.
    pub fn root(&self) -> Residue {
        let mut t = vec![0u64; self.d];
        if self.d == 1 {
            t[0] = (self.p - self.modulus[0] % self.p) % self.p;
        } else {
            t[1] = 1;
        }
        t
    }

    /// Minimal polynomial of `a` over `F_p`, assuming its `d` conjugates are
    /// distinct (true for normal elements).
    pub fn min_poly(&self, a: &[u64]) -> Vec<u64> {
        // prod_j (X - a^{p^j}) with coefficients in k
        let mut poly: Vec<Residue> = vec![self.one()];
        let mut c = a.to_vec();
        for _ in 0..self.d {
            let neg_c: Residue = c.iter().map(|x| (self.p - x % self.p) % self.p).collect();
            let mut next = vec![self.zero(); poly.len() + 1];
            for (i, coef) in poly.iter().enumerate() {
                next[i + 1] = self.add(&next[i + 1], coef);
                next[i] = self.add(&next[i], &self.mul(coef, &neg_c));
            }
            poly = next;
            c = self.frobenius(&c);
        }
        poly.iter()
            .map(|coef| {
                debug_assert!(coef[1..].iter().all(|&x| x == 0));
                coef[0]
            })
            .collect()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn size(&self) -> u64 {
        self.p.pow(self.d as u32)
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> Residue {
        vec![0; self.d]
    }

    pub fn one(&self) -> Residue {
        let mut v = self.zero();
        v[0] = 1;
        v
    }

    pub fn from_int(&self, n: i64) -> Residue {
        let mut v = self.zero();
        v[0] = n.rem_euclid(self.p as i64) as u64;
        v
    }

    pub fn is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&c| c % self.p == 0)
    }

    fn pad(&self, mut v: Vec<u64>) -> Residue {
        v.resize(self.d, 0);
        v
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Residue {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.p).collect()
    }

    pub fn scale(&self, a: &[u64], c: u64) -> Residue {
        a.iter().map(|x| x * (c % self.p) % self.p).collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Residue {
        self.pad(rem(&mul(a, b, self.p), &self.modulus, self.p))
    }

    pub fn pow(&self, a: &[u64], e: u128) -> Residue {
        self.pad(fp_poly::powmod(a, e, &self.modulus, self.p))
    }

    pub fn inv(&self, a: &[u64]) -> Option<Residue> {
        if self.is_zero(a) {
            return None;
        }
        Some(self.pow(a, (self.size() - 2) as u128))
    }

    pub fn frobenius(&self, a: &[u64]) -> Residue {
        self.pow(a, self.p as u128)
    }

    /// Absolute trace to `F_p`.
    pub fn trace(&self, a: &[u64]) -> u64 {
        let mut acc = self.zero();
        let mut c = a.to_vec();
        for _ in 0..self.d {
            acc = self.add(&acc, &c);
            c = self.frobenius(&c);
        }
        debug_assert!(acc[1..].iter().all(|&x| x == 0));
        acc[0]
    }

    /// The normal basis generator `t` (the class of `theta`).
    pub fn generator(&self) -> Residue {
        self.root()
    }

    pub fn to_normal(&self, a: &[u64]) -> Vec<u64> {
        mat_vec(&self.power_to_normal, a, self.p)
    }

    pub fn from_normal(&self, u: &[u64]) -> Residue {
        mat_vec(&self.normal_to_power, u, self.p)
    }

    /// Whether the Frobenius conjugates of `a` are linearly independent.
    pub fn is_normal(&self, a: &[u64]) -> bool {
        let conj: Vec<Residue> = (0..self.d)
            .scan(a.to_vec(), |c, _| {
                let out = c.clone();
                *c = self.frobenius(c);
                Some(out)
            })
            .collect();
        rank(&conj, self.p) == self.d
    }

    /// Trace form `Tr(t^{p^i} t^{p^j})` in the normal basis.
    pub fn trace_form(&self) -> Vec<Vec<u64>> {
        let basis: Vec<Residue> = (0..self.d)
            .map(|j| {
                let mut e = vec![0u64; self.d];
                e[j] = 1;
                self.from_normal(&e)
            })
            .collect();
        basis
            .iter()
            .map(|a| basis.iter().map(|b| self.trace(&self.mul(a, b))).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::fp_poly::*;
    use super::*;

    #[test]
    fn irreducibility() {
        // x^2 + 1 is irreducible mod 3, x^2 + 2 = (x-1)(x+1) is not
        assert!(is_irreducible(&[1, 0, 1], 3));
        assert!(!is_irreducible(&[2, 0, 1], 3));
        assert_eq!(first_irreducible(2, 3), vec![1, 0, 1]);
        assert!(is_irreducible(&first_irreducible(3, 5), 5));
    }

    #[test]
    fn exhaustive_normal_elements_f9() {
        // x^2 + 2x + 2 over F_3 is irreducible and its root has trace 1
        assert!(is_irreducible(&[2, 2, 1], 3));
        let k = ResidueField::new(3, vec![2, 2, 1]).expect("root is normal");
        let mut normal = 0;
        for a in 0..3u64 {
            for b in 0..3u64 {
                let e = vec![a, b];
                if k.is_normal(&e) {
                    normal += 1;
                    assert_ne!(k.trace(&e), 0);
                }
            }
        }
        // F_9 over F_3 has Phi_{x^2-1}(9) = 4 normal elements
        assert_eq!(normal, 4);
    }

    #[test]
    fn trace_form_is_nondegenerate() {
        let k0 = ResidueField::arith(5, first_irreducible(3, 5));
        let eta = (1..125u64)
            .map(|a| vec![a % 5, (a / 5) % 5, a / 25])
            .find(|e| k0.is_normal(e))
            .unwrap();
        let k = ResidueField::new(5, k0.min_poly(&eta)).expect("normal generator");
        assert_eq!(rank(&k.trace_form(), 5), 3);
        assert_eq!(k.to_normal(&k.root()), vec![1, 0, 0]);
    }
}
