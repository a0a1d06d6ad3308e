//! Modular and small finite-field arithmetic.
//!
//! [`ModRing`] backs the integer nets, [`SmallField`] backs the field nets and
//! the affine groups used by the DTS combining construction.

use crate::error::{invalid, Error, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Least prime factor of `m`.
pub fn lpf(m: u64) -> Result<u64> {
    if m < 2 {
        return invalid(format!("lpf requires m >= 2, got {m}"));
    }
    let mut d = 2;
    while d * d <= m {
        if m.is_multiple_of(d) {
            return Ok(d);
        }
        d += 1;
    }
    Ok(m)
}

/// True iff `x` is a unit in the integers modulo `m`.
pub fn is_invertible_mod(x: i64, m: u64) -> bool {
    assert!(m >= 1, "modulus must be positive");
    let r = x.rem_euclid(m as i64) as u64;
    gcd(r, m) == 1
}

/// The ring of integers modulo `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModRing {
    modulus: u64,
}

impl ModRing {
    pub fn new(modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return invalid("modulus must be at least 1");
        }
        Ok(ModRing { modulus })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn reduce(&self, x: i64) -> u64 {
        x.rem_euclid(self.modulus as i64) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.modulus
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a % self.modulus + self.modulus - b % self.modulus) % self.modulus
    }

    pub fn neg(&self, a: u64) -> u64 {
        self.sub(0, a)
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    pub fn is_unit(&self, a: u64) -> bool {
        gcd(a % self.modulus, self.modulus) == 1
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inverse(&self, a: u64) -> Option<u64> {
        let m = self.modulus as i128;
        let (mut r0, mut r1) = (m, (a % self.modulus) as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        if r0 != 1 {
            // gcd(0, 1) = 1 covers the trivial ring
            return if self.modulus == 1 { Some(0) } else { None };
        }
        Some(t0.rem_euclid(m) as u64)
    }
}

/// Prime powers supported by [`SmallField`].
pub const SUPPORTED_FIELD_ORDERS: [u32; 10] = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16];

/// A finite field of order `q = p^k <= 16`.
///
/// Elements are labelled `0..q` by reading the coefficient vector
/// `(c_{k-1}, ..., c_1, c_0)` as a base-`p` numeral, so the constant term is
/// the least significant digit. Label 0 is zero and label 1 is one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallField {
    p: u32,
    k: u32,
    q: u32,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

impl SmallField {
    pub fn new(q: u32) -> Result<Self> {
        let (p, k, modulus): (u32, u32, &[u32]) = match q {
            2 | 3 | 5 | 7 | 11 | 13 => (q, 1, &[0, 1]),
            // low-order coefficient first; monic leading term included
            4 => (2, 2, &[1, 1, 1]),
            8 => (2, 3, &[1, 1, 0, 1]),
            9 => (3, 2, &[1, 0, 1]),
            16 => (2, 4, &[1, 1, 0, 0, 1]),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "field order {q} is not a supported prime power (<= 16)"
                )))
            }
        };
        let digits = |x: u32| -> Vec<u32> {
            let mut v = Vec::with_capacity(k as usize);
            let mut x = x;
            for _ in 0..k {
                v.push(x % p);
                x /= p;
            }
            v
        };
        let label = |v: &[u32]| -> u32 { v.iter().rev().fold(0, |acc, &c| acc * p + c) };

        let n = q as usize;
        let mut add = vec![0u8; n * n];
        let mut mul = vec![0u8; n * n];
        for a in 0..q {
            let da = digits(a);
            for b in 0..q {
                let db = digits(b);
                let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[(a * q + b) as usize] = label(&sum) as u8;

                let mut prod = vec![0u32; (2 * k - 1) as usize];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                // reduce modulo the defining polynomial
                for deg in (k as usize..prod.len()).rev() {
                    let c = prod[deg];
                    if c == 0 {
                        continue;
                    }
                    for (i, &mc) in modulus.iter().enumerate().take(k as usize) {
                        let idx = deg - k as usize + i;
                        prod[idx] = (prod[idx] + p * p - c * mc % p) % p;
                    }
                    prod[deg] = 0;
                }
                prod.truncate(k as usize);
                mul[(a * q + b) as usize] = label(&prod) as u8;
            }
        }
        let mut neg = vec![0u8; n];
        let mut inv = vec![0u8; n];
        for a in 0..n {
            neg[a] = (0..n).find(|&b| add[a * n + b] == 0).unwrap() as u8;
            if a != 0 {
                inv[a] = (1..n)
                    .find(|&b| mul[a * n + b] == 1)
                    .ok_or_else(|| Error::Internal(format!("no inverse for {a} in GF({q})")))?
                    as u8;
            }
        }
        Ok(SmallField { p, k, q, add, mul, neg, inv })
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        self.add[(a * self.q + b) as usize] as u32
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[(a * self.q + b) as usize] as u32
    }

    pub fn neg(&self, a: u32) -> u32 {
        self.neg[a as usize] as u32
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.inv[a as usize] as u32)
    }
}

/// The affine map `x -> a*x + b` over a [`SmallField`], tabulated on labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffinePerm {
    pub a: u32,
    pub b: u32,
    map: Vec<u8>,
}

impl AffinePerm {
    pub fn new(field: &SmallField, a: u32, b: u32) -> Result<Self> {
        if a == 0 || a >= field.order() || b >= field.order() {
            return invalid(format!("affine map needs nonzero a and labels < {}", field.order()));
        }
        let map = (0..field.order())
            .map(|x| field.add(field.mul(a, x), b) as u8)
            .collect();
        Ok(AffinePerm { a, b, map })
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.map[x] as usize
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.map
    }
}

/// All `q(q-1)` invertible affine maps of GF(q), ordered by `a` then `b`.
pub fn sharply_2_transitive_group(q: u32) -> Result<Vec<AffinePerm>> {
    let field = SmallField::new(q)?;
    let mut out = Vec::with_capacity((q * (q - 1)) as usize);
    for a in 1..q {
        for b in 0..q {
            out.push(AffinePerm::new(&field, a, b)?);
        }
    }
    Ok(out)
}
