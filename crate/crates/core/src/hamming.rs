//! Shortened extended Hamming component codes.
//!
//! Parity-check column `i` is the label of the kept coordinate with the
//! overall-parity bit (bit `m`) set. Shortening drops the lowest labels. If the
//! last `r` columns are dependent, independent ones are moved to the end so
//! the code stays systematic with parity last.

use std::fmt;

use crate::error::{invalid, Error, Result};

/// Interface the decoder needs from a component code.
pub trait ComponentCode: Send + Sync {
    /// Codeword length.
    fn n(&self) -> usize;
    /// Number of parity bits.
    fn r(&self) -> usize;
    /// Parity-check column of coordinate `i` as an `r`-bit value.
    fn column(&self, i: usize) -> u32;
    /// Info in the first `n - r` coordinates, parity in the last `r`.
    fn encode_systematic(&self, info: &[u8]) -> Result<Vec<u8>>;
    /// Bounded-distance decision from a syndrome alone.
    fn decode_syndrome(&self, syndrome: u32) -> DecodeOutcome;

    fn k(&self) -> usize {
        self.n() - self.r()
    }

    fn syndrome_of(&self, word: &[u8]) -> u32 {
        word.iter()
            .enumerate()
            .filter(|(_, &b)| b & 1 == 1)
            .fold(0, |s, (i, _)| s ^ self.column(i))
    }
}

/// A syndrome with a marker for changes since the last decode attempt.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Syndrome {
    pub value: u32,
    pub dirty: bool,
}

impl Syndrome {
    pub fn new(value: u32) -> Self {
        Syndrome { value, dirty: true }
    }

    /// Accounts for a flip of a member whose parity-check column is `column`.
    #[inline]
    pub fn toggle(&mut self, column: u32) {
        self.value ^= column;
        self.dirty = true;
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeOutcome {
    NoError,
    Flip(usize),
    DetectedUncorrectable,
}

/// A shortened extended Hamming code of length `n` with `r = m + 1`.
#[derive(Clone, PartialEq, Eq)]
pub struct ComponentCodeSpec {
    n: usize,
    m: u32,
    shorten: usize,
    columns: Vec<u32>,
    /// `lookup[s]` is the coordinate whose column equals `s`, if any.
    lookup: Vec<u32>,
    /// Parity pattern (over the last `r` coordinates) producing syndrome `1 << b`.
    parity_solve: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl fmt::Debug for ComponentCodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComponentCodeSpec")
            .field("n", &self.n)
            .field("r", &self.r())
            .field("m", &self.m)
            .field("shorten", &self.shorten)
            .finish()
    }
}

/// Largest supported base parameter; tables have `2^(m+1)` entries.
pub const MAX_M: u32 = 20;

/// Builds the code of length `n`. `seed_m` overrides the smallest `m` with
/// `2^m >= n`.
pub fn build(n: usize, seed_m: Option<u32>) -> Result<ComponentCodeSpec> {
    if n < 4 {
        return invalid(format!("component length {n} is below 4"));
    }
    let min_m = usize::BITS - (n - 1).leading_zeros();
    let m = match seed_m {
        Some(m) if m < min_m => {
            return invalid(format!("2^{m} coordinates cannot host length {n}"));
        }
        Some(m) => m,
        None => min_m,
    };
    if m > MAX_M {
        return Err(Error::Unsupported(format!("m = {m} exceeds {MAX_M}")));
    }
    let r = m as usize + 1;
    if n <= r {
        return invalid(format!("length {n} cannot host {r} parity bits"));
    }
    let full = 1usize << m;
    let shorten = full - n;
    let mut columns: Vec<u32> = (shorten..full).map(|x| x as u32 | (1 << m)).collect();

    // pick r independent columns scanning from the end; move them last
    let mut basis = Basis::new(r);
    let mut picked = vec![false; n];
    for i in (0..n).rev() {
        if basis.len() == r {
            break;
        }
        if basis.insert(columns[i]) {
            picked[i] = true;
        }
    }
    if basis.len() < r {
        return invalid(format!("parity-check matrix of length {n} has rank {} < {r}", basis.len()));
    }
    let (mut kept, parity): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| !picked[i]);
    kept.extend(parity);
    columns = kept.iter().map(|&i| columns[i]).collect();

    let mut lookup = vec![NONE; 1 << r];
    for (i, &c) in columns.iter().enumerate() {
        lookup[c as usize] = i as u32;
    }
    let parity_solve = solve_parity(&columns[n - r..], r)?;
    Ok(ComponentCodeSpec { n, m, shorten, columns, lookup, parity_solve })
}

/// Incremental GF(2) basis in echelon form keyed by leading bit.
struct Basis {
    rows: Vec<u32>,
    count: usize,
}

impl Basis {
    fn new(r: usize) -> Self {
        Basis { rows: vec![0; r], count: 0 }
    }

    fn len(&self) -> usize {
        self.count
    }

    fn insert(&mut self, mut v: u32) -> bool {
        while v != 0 {
            let top = 31 - v.leading_zeros() as usize;
            if self.rows[top] == 0 {
                self.rows[top] = v;
                self.count += 1;
                return true;
            }
            v ^= self.rows[top];
        }
        false
    }
}

/// For each unit syndrome `1 << b`, the subset of `cols` summing to it.
fn solve_parity(cols: &[u32], r: usize) -> Result<Vec<u32>> {
    // Gauss-Jordan on rows (value, subset mask)
    let mut rows: Vec<(u32, u32)> = cols.iter().enumerate().map(|(j, &c)| (c, 1 << j)).collect();
    for bit in 0..r {
        let pivot = (bit..r)
            .find(|&i| rows[i].0 >> bit & 1 == 1)
            .ok_or_else(|| Error::Internal("parity columns are singular".into()))?;
        rows.swap(bit, pivot);
        let (pv, pm) = rows[bit];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != bit && row.0 >> bit & 1 == 1 {
                row.0 ^= pv;
                row.1 ^= pm;
            }
        }
    }
    Ok(rows.into_iter().map(|(_, mask)| mask).collect())
}

impl ComponentCodeSpec {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn shorten(&self) -> usize {
        self.shorten
    }

    pub fn columns(&self) -> &[u32] {
        &self.columns
    }

    /// Parity-check matrix as `r` rows of `n` bits.
    pub fn parity_check_rows(&self) -> Vec<Vec<u8>> {
        (0..self.r())
            .map(|b| self.columns.iter().map(|c| (c >> b & 1) as u8).collect())
            .collect()
    }

    /// GF(2) rank of the parity-check matrix.
    pub fn rank(&self) -> usize {
        let mut basis = Basis::new(self.r());
        for &c in &self.columns {
            basis.insert(c);
        }
        basis.len()
    }

    /// Parity bits for a syndrome contributed by the info part.
    #[inline]
    pub fn parity_for(&self, info_syndrome: u32) -> u32 {
        let mut out = 0;
        let mut s = info_syndrome;
        while s != 0 {
            let b = s.trailing_zeros();
            out ^= self.parity_solve[b as usize];
            s &= s - 1;
        }
        out
    }

    /// Syndrome of a full word, length-checked.
    pub fn syndrome(&self, word: &[u8]) -> Result<Syndrome> {
        if word.len() != self.n {
            return invalid(format!("word has {} bits, expected {}", word.len(), self.n));
        }
        Ok(Syndrome::new(self.syndrome_of(word)))
    }

    pub fn bdd_decode(&self, syndrome: &Syndrome) -> DecodeOutcome {
        self.decode_syndrome(syndrome.value)
    }
}

impl ComponentCode for ComponentCodeSpec {
    fn n(&self) -> usize {
        self.n
    }

    fn r(&self) -> usize {
        self.m as usize + 1
    }

    #[inline]
    fn column(&self, i: usize) -> u32 {
        self.columns[i]
    }

    fn encode_systematic(&self, info: &[u8]) -> Result<Vec<u8>> {
        let k = self.k();
        if info.len() != k {
            return invalid(format!("info has {} bits, expected {k}", info.len()));
        }
        let s = info
            .iter()
            .enumerate()
            .filter(|(_, &b)| b & 1 == 1)
            .fold(0, |s, (i, _)| s ^ self.columns[i]);
        let p = self.parity_for(s);
        let mut out: Vec<u8> = info.iter().map(|b| b & 1).collect();
        out.extend((0..self.r()).map(|j| (p >> j & 1) as u8));
        Ok(out)
    }

    #[inline]
    fn decode_syndrome(&self, syndrome: u32) -> DecodeOutcome {
        if syndrome == 0 {
            return DecodeOutcome::NoError;
        }
        // an even-weight indication is never corrected
        if syndrome >> self.m & 1 == 0 {
            return DecodeOutcome::DetectedUncorrectable;
        }
        match self.lookup[syndrome as usize] {
            NONE => DecodeOutcome::DetectedUncorrectable,
            p => DecodeOutcome::Flip(p as usize),
        }
    }
}
