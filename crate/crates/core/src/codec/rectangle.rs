use crate::error::{invalid, Result};

/// One constraint period of coded bits: `C (S/L)` rows by `S` columns.
///
/// Row `c (S/L) + i` holds row `i` of the `L` newest blocks of chain `c`,
/// oldest block leftmost.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rectangle {
    rows: usize,
    cols: usize,
    bits: Vec<u8>,
}

impl Rectangle {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Rectangle { rows, cols, bits: vec![0; rows * cols] }
    }

    pub fn from_bits(rows: usize, cols: usize, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != rows * cols {
            return invalid(format!("{} bits do not fill {rows}x{cols}", bits.len()));
        }
        Ok(Rectangle { rows, cols, bits: bits.into_iter().map(|b| b & 1).collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.bits[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: u8) {
        self.bits[row * self.cols + col] = v & 1;
    }

    #[inline]
    pub fn flip(&mut self, row: usize, col: usize) {
        self.bits[row * self.cols + col] ^= 1;
    }

    /// Row-major bits, one per byte.
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn bits_mut(&mut self) -> &mut [u8] {
        &mut self.bits
    }

    /// Bits in the first `info_cols` columns of every row, row-major.
    pub fn info_bits(&self, info_cols: usize) -> Vec<u8> {
        self.bits.chunks(self.cols).flat_map(|row| row[..info_cols].iter().copied()).collect()
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Bit `k` of the row-major order goes to bit `k % 64` of word `k / 64`.
    pub fn pack(&self) -> Vec<u64> {
        let mut words = vec![0u64; self.bits.len().div_ceil(64)];
        for (k, &b) in self.bits.iter().enumerate() {
            words[k / 64] |= (b as u64) << (k % 64);
        }
        words
    }

    pub fn unpack(rows: usize, cols: usize, words: &[u64]) -> Result<Self> {
        let n = rows * cols;
        if words.len() != n.div_ceil(64) {
            return invalid(format!("{} words cannot hold exactly {n} bits", words.len()));
        }
        let bits = (0..n).map(|k| (words[k / 64] >> (k % 64) & 1) as u8).collect();
        Ok(Rectangle { rows, cols, bits })
    }

    /// Packed words, each little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.pack().iter().flat_map(|w| w.to_le_bytes()).collect()
    }

    pub fn from_bytes(rows: usize, cols: usize, bytes: &[u8]) -> Result<Self> {
        if !bytes.len().is_multiple_of(8) {
            return invalid(format!("{} bytes is not a whole number of words", bytes.len()));
        }
        let words: Vec<u64> = bytes
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Self::unpack(rows, cols, &words)
    }

    /// Size in bytes of one serialized rectangle.
    pub fn byte_len(rows: usize, cols: usize) -> usize {
        (rows * cols).div_ceil(64) * 8
    }
}
