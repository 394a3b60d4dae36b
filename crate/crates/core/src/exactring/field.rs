//! The residue field `F_q`, `q = p^f`, presented as `F_p[x]/(g)` for a fixed
//! monic irreducible `g`.
//!
//! Elements are stored as their index `Σ c_k p^k` in the coefficient basis
//! `1, x, …, x^{f-1}`. Multiplication goes through discrete log tables built
//! once per context, so every field operation is a table lookup plus a short
//! digit loop for addition.

use crate::error::{Error, Result};

/// Largest field size for which log tables are built.
pub const MAX_FIELD_SIZE: u32 = 1 << 16;

/// An element of `F_q`, encoded as `Σ c_k p^k` over its coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElem(pub(crate) u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Raw index of the element, `Σ c_k p^k`.
    pub fn index(self) -> u32 {
        self.0
    }
}

/// Conway polynomials for the small fields used in practice, coefficients in
/// ascending degree order (leading 1 included).
fn conway(p: u32, f: u32) -> Option<Vec<u32>> {
    let table: &[(u32, u32, &[u32])] = &[
        (2, 1, &[1, 1]),
        (2, 2, &[1, 1, 1]),
        (2, 3, &[1, 1, 0, 1]),
        (2, 4, &[1, 1, 0, 0, 1]),
        (2, 5, &[1, 0, 1, 0, 0, 1]),
        (3, 1, &[1, 1]),
        (3, 2, &[2, 2, 1]),
        (3, 3, &[1, 2, 0, 1]),
        (3, 4, &[2, 0, 0, 2, 1]),
        (5, 1, &[3, 1]),
        (5, 2, &[2, 4, 1]),
        (5, 3, &[3, 3, 0, 1]),
        (5, 4, &[2, 4, 4, 0, 1]),
        (7, 1, &[4, 1]),
        (7, 2, &[3, 6, 1]),
        (7, 3, &[4, 0, 6, 1]),
        (7, 4, &[3, 4, 5, 0, 1]),
        (11, 1, &[9, 1]),
        (11, 2, &[2, 7, 1]),
        (11, 3, &[9, 2, 0, 1]),
        (11, 4, &[2, 10, 8, 0, 1]),
        (13, 1, &[11, 1]),
        (13, 2, &[2, 12, 1]),
        (13, 3, &[11, 2, 0, 1]),
        (13, 4, &[2, 12, 3, 0, 1]),
    ];
    table.iter().find(|(pp, ff, _)| *pp == p && *ff == f).map(|(_, _, c)| c.to_vec())
}

pub(crate) fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

// Dense polynomials over F_p, ascending coefficients, no trailing zeros.

fn trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = inv_mod(m[dm], p);
    while r.len() > dm {
        let top = r.len() - 1;
        let c = r[top] as u64 * lead_inv as u64 % p as u64;
        let shift = top - dm;
        for (k, &mk) in m.iter().enumerate() {
            let sub = c * mk as u64 % p as u64;
            r[shift + k] = ((r[shift + k] as u64 + p as u64 - sub) % p as u64) as u32;
        }
        trim(&mut r);
    }
    r
}

fn poly_mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    let prod: Vec<u32> = prod.into_iter().map(|x| x as u32).collect();
    poly_rem(&prod, m, p)
}

fn poly_powmod(base: &[u32], mut e: u64, m: &[u32], p: u32) -> Vec<u32> {
    let mut result = vec![1u32];
    let mut b = poly_rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            result = poly_mulmod(&result, &b, m, p);
        }
        b = poly_mulmod(&b, &b, m, p);
        e >>= 1;
    }
    result
}

fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Irreducibility over `F_p` of a monic polynomial of degree `f`: no factor of
/// degree at most `f/2`, tested through `gcd(x^{p^k} - x, g)`.
pub fn is_irreducible(g: &[u32], p: u32) -> bool {
    let f = g.len().saturating_sub(1);
    if f == 0 || g[f] != 1 || g.iter().any(|&c| c >= p) {
        return false;
    }
    if f == 1 {
        return true;
    }
    let x = vec![0u32, 1];
    let mut xpk = x.clone();
    for _ in 1..=f / 2 {
        xpk = poly_powmod(&xpk, p as u64, g, p);
        let mut diff = xpk.clone();
        diff.resize(diff.len().max(2), 0);
        diff[1] = (diff[1] + p - 1) % p;
        trim(&mut diff);
        let gcd = poly_gcd(g, &diff, p);
        if gcd.len() != 1 {
            return false;
        }
    }
    true
}

/// Lexicographically smallest monic irreducible polynomial of degree `f`.
fn smallest_irreducible(p: u32, f: u32) -> Vec<u32> {
    let count = (p as u64).pow(f);
    for n in 0..count {
        let mut g = Vec::with_capacity(f as usize + 1);
        let mut m = n;
        for _ in 0..f {
            g.push((m % p as u64) as u32);
            m /= p as u64;
        }
        g.push(1);
        if is_irreducible(&g, p) {
            return g;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// Default modulus for `F_{p^f}`: the Conway polynomial when tabulated,
/// otherwise the smallest irreducible polynomial.
pub fn default_modulus(p: u32, f: u32) -> Vec<u32> {
    conway(p, f).unwrap_or_else(|| smallest_irreducible(p, f))
}

/// Arithmetic tables for `F_q`.
#[derive(Debug)]
pub struct FieldTables {
    p: u32,
    f: u32,
    q: u32,
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl FieldTables {
    pub fn new(p: u32, f: u32, modulus: Option<Vec<u32>>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidContext(format!("p = {p} is not prime")));
        }
        if f == 0 {
            return Err(Error::InvalidContext("f must be positive".into()));
        }
        let q = (p as u64)
            .checked_pow(f)
            .filter(|&q| q <= MAX_FIELD_SIZE as u64)
            .ok_or_else(|| Error::InvalidContext(format!("field size {p}^{f} exceeds {MAX_FIELD_SIZE}")))?
            as u32;
        let modulus = modulus.unwrap_or_else(|| default_modulus(p, f));
        if modulus.len() != f as usize + 1 {
            return Err(Error::InvalidContext(format!(
                "modulus must have {} coefficients, got {}",
                f + 1,
                modulus.len()
            )));
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::InvalidContext(format!(
                "modulus {modulus:?} is not a monic irreducible polynomial over F_{p}"
            )));
        }

        let encode = |poly: &[u32]| -> u32 { poly.iter().rev().fold(0u32, |acc, &c| acc * p + c) };
        // Search for a generator of the multiplicative group.
        let order = q - 1;
        let mut prime_factors = Vec::new();
        let mut m = order;
        let mut k = 2;
        while k * k <= m {
            if m.is_multiple_of(k) {
                prime_factors.push(k);
                while m.is_multiple_of(k) {
                    m /= k;
                }
            }
            k += 1;
        }
        if m > 1 {
            prime_factors.push(m);
        }
        let mut generator = None;
        for cand in 1..q {
            let mut poly = Vec::with_capacity(f as usize);
            let mut c = cand;
            for _ in 0..f {
                poly.push(c % p);
                c /= p;
            }
            trim(&mut poly);
            let is_gen = prime_factors.iter().all(|&l| {
                let r = poly_powmod(&poly, (order / l) as u64, &modulus, p);
                r != vec![1]
            });
            if is_gen {
                generator = Some(poly);
                break;
            }
        }
        let generator = generator.unwrap_or_else(|| vec![1]);
        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![0u32; q as usize];
        let mut cur = vec![1u32];
        for e in 0..order {
            let idx = encode(&cur);
            exp.push(idx);
            log[idx as usize] = e;
            cur = poly_mulmod(&cur, &generator, &modulus, p);
        }
        Ok(FieldTables { p, f, q, modulus, exp, log })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.f
    }

    pub fn size(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if self.f == 1 {
            return FieldElem((a.0 + b.0) % self.p);
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0;
        let mut place = 1;
        while x > 0 || y > 0 {
            out += ((x % self.p + y % self.p) % self.p) * place;
            x /= self.p;
            y /= self.p;
            place *= self.p;
        }
        FieldElem(out)
    }

    pub fn neg(&self, a: FieldElem) -> FieldElem {
        if self.f == 1 {
            return FieldElem((self.p - a.0 % self.p) % self.p);
        }
        let mut x = a.0;
        let mut out = 0;
        let mut place = 1;
        while x > 0 {
            out += ((self.p - x % self.p) % self.p) * place;
            x /= self.p;
            place *= self.p;
        }
        FieldElem(out)
    }

    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a.0 == 0 || b.0 == 0 {
            return FieldElem::ZERO;
        }
        let order = self.q - 1;
        let e = (self.log[a.0 as usize] + self.log[b.0 as usize]) % order;
        FieldElem(self.exp[e as usize])
    }

    pub fn inv(&self, a: FieldElem) -> Option<FieldElem> {
        if a.0 == 0 {
            return None;
        }
        let order = self.q - 1;
        let e = (order - self.log[a.0 as usize]) % order;
        Some(FieldElem(self.exp[e as usize]))
    }

    /// `a^p`, the arithmetic Frobenius of `F_q`.
    pub fn frobenius(&self, a: FieldElem) -> FieldElem {
        self.pow(a, self.p as u64)
    }

    pub fn pow(&self, a: FieldElem, e: u64) -> FieldElem {
        if a.0 == 0 {
            return if e == 0 { FieldElem::ONE } else { FieldElem::ZERO };
        }
        let order = (self.q - 1) as u64;
        let l = self.log[a.0 as usize] as u64 * (e % order) % order;
        FieldElem(self.exp[l as usize])
    }

    /// Builds an element from its coefficient vector (ascending powers of `x`).
    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<FieldElem> {
        if coeffs.len() > self.f as usize {
            return Err(Error::InvalidValue(format!(
                "field element has {} coefficients, degree is {}",
                coeffs.len(),
                self.f
            )));
        }
        if let Some(&c) = coeffs.iter().find(|&&c| c >= self.p) {
            return Err(Error::InvalidValue(format!("coefficient {c} is not reduced modulo {}", self.p)));
        }
        Ok(FieldElem(coeffs.iter().rev().fold(0u32, |acc, &c| acc * self.p + c)))
    }

    /// Coefficient vector of length `f`.
    pub fn coeffs(&self, a: FieldElem) -> Vec<u32> {
        let mut x = a.0;
        (0..self.f)
            .map(|_| {
                let c = x % self.p;
                x /= self.p;
                c
            })
            .collect()
    }

    pub fn from_int(&self, n: i64) -> FieldElem {
        FieldElem(n.rem_euclid(self.p as i64) as u32)
    }

    /// Element with index `n` (reduced modulo `q`).
    pub fn element(&self, n: u32) -> FieldElem {
        FieldElem(n % self.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_mul(a: &[u32], b: &[u32], g: &[u32], p: u32) -> Vec<u32> {
        let mut r = poly_mulmod(a, b, g, p);
        r.resize(g.len() - 1, 0);
        r
    }

    #[test]
    fn conway_table_entries_are_irreducible() {
        for (p, f) in [(2, 1), (2, 2), (2, 3), (2, 4), (2, 5), (3, 2), (3, 3), (3, 4)] {
            assert!(is_irreducible(&conway(p, f).unwrap(), p), "p={p} f={f}");
        }
        for p in [5, 7, 11, 13] {
            for f in 1..=4 {
                assert!(is_irreducible(&conway(p, f).unwrap(), p), "p={p} f={f}");
            }
        }
    }

    #[test]
    fn reducible_modulus_is_rejected() {
        // x^2 + 2 = (x + 1)(x + 2) over F_3
        assert!(FieldTables::new(3, 2, Some(vec![2, 0, 1])).is_err());
        assert!(FieldTables::new(4, 1, None).is_err());
    }

    #[test]
    fn frobenius_in_f9() {
        // F_9 = F_3[x]/(x^2 - x - 1): x^3 = 2x + 1.
        let t = FieldTables::new(3, 2, None).unwrap();
        assert_eq!(t.modulus(), &[2, 2, 1]);
        let x = t.from_coeffs(&[0, 1]).unwrap();
        // oracle: repeated multiplication of polynomials modulo the modulus
        let x3 = naive_mul(&naive_mul(&[0, 1], &[0, 1], &[2, 2, 1], 3), &[0, 1], &[2, 2, 1], 3);
        assert_eq!(x3, vec![1, 2]);
        assert_eq!(t.coeffs(t.frobenius(x)), x3);
    }

    #[test]
    fn table_arithmetic_matches_polynomial_arithmetic() {
        for (p, f) in [(2, 3), (3, 2), (5, 2), (3, 3)] {
            let t = FieldTables::new(p, f, None).unwrap();
            let g = t.modulus().to_vec();
            for a in 0..t.size() {
                for b in (0..t.size()).step_by(3) {
                    let (fa, fb) = (FieldElem(a), FieldElem(b));
                    let expected = naive_mul(&t.coeffs(fa), &t.coeffs(fb), &g, p);
                    assert_eq!(t.coeffs(t.mul(fa, fb)), expected);
                    assert_eq!(t.sub(t.add(fa, fb), fb), fa);
                }
                if a != 0 {
                    let inv = t.inv(FieldElem(a)).unwrap();
                    assert_eq!(t.mul(FieldElem(a), inv), FieldElem::ONE);
                }
            }
        }
    }
}
