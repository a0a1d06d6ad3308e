use std::collections::VecDeque;
use std::sync::Arc;

use super::{Rectangle, Tables};
use crate::construction::HoscSpec;
use crate::error::{invalid, Result};
use crate::hamming::ComponentCode;

/// Recursive encoder: one [`Rectangle`] per constraint period.
#[derive(Debug, Clone)]
pub struct Encoder {
    tables: Arc<Tables>,
    /// `history[k]` is rectangle `t - 1 - k`.
    history: VecDeque<Rectangle>,
    /// Index of the next rectangle.
    t: u64,
}

impl Encoder {
    pub fn new(spec: &HoscSpec) -> Self {
        Encoder { tables: Tables::new(spec), history: VecDeque::new(), t: 1 }
    }

    /// Index of the rectangle the next call to [`Encoder::encode_step`] emits.
    pub fn next_index(&self) -> u64 {
        self.t
    }

    /// Information bits per rectangle: `C (S/L) (S - r)`, row-major over
    /// `(chain, row)` then column.
    pub fn info_len(&self) -> usize {
        self.tables.rect_rows() * self.tables.info_cols
    }

    pub fn encode_step(&mut self, info: &[u8]) -> Result<Rectangle> {
        let tb = &*self.tables;
        if info.len() != self.info_len() {
            return invalid(format!("info has {} bits, expected {}", info.len(), self.info_len()));
        }
        let mut rect = Rectangle::zeros(tb.rect_rows(), tb.s);
        for (row, chunk) in info.chunks(tb.info_cols).enumerate() {
            for (col, &b) in chunk.iter().enumerate() {
                rect.set(row, col, b);
            }
        }
        let mut parity = vec![0u32; tb.rect_rows()];
        for c in 0..tb.chains {
            for rho in 0..tb.side {
                let s = tb.syndrome(c, rho, |back| match back {
                    0 => Some(rect.bits()),
                    b => self.history.get(b - 1).map(|r| r.bits()),
                });
                parity[c * tb.side + rho] = tb.code.parity_for(s);
            }
        }
        for (row, &p) in parity.iter().enumerate() {
            for q in 0..tb.code.r() {
                rect.set(row, tb.info_cols + q, (p >> q & 1) as u8);
            }
        }
        self.history.push_front(rect.clone());
        self.history.truncate(tb.span);
        self.t += 1;
        Ok(rect)
    }

    #[cfg(test)]
    pub(crate) fn history_mut(&mut self) -> &mut VecDeque<Rectangle> {
        &mut self.history
    }

    /// Zero-information rectangles that close the stream.
    pub fn terminate(&mut self, count: usize) -> Vec<Rectangle> {
        let zeros = vec![0u8; self.info_len()];
        (0..count).map(|_| self.encode_step(&zeros).expect("length matches")).collect()
    }
}
