//! Streaming encoder and sliding-window decoder.
//!
//! The stream is a sequence of [`Rectangle`]s. Rectangle `t >= 1` holds
//! blocks `L t - L + 1 ..= L t` of every chain; all blocks with index `<= 0`
//! are zero. The constraints at time `L t` end in rectangle `t`, whose last
//! `r` columns carry their parity.

mod decoder;
mod encoder;
mod rectangle;

use std::sync::Arc;

pub use decoder::{Decoder, DecoderConfig, DecoderStats, Freeze, Schedule};
pub use encoder::Encoder;
pub use rectangle::Rectangle;

use crate::construction::HoscSpec;
use crate::hamming::{ComponentCode, ComponentCodeSpec};

/// Where the block at combined index `k'` sits relative to its constraint.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SlotRef {
    /// Rectangles back from the constraint's own rectangle.
    back: usize,
    /// Block offset inside that rectangle.
    offset: usize,
    /// Taken from the previous chain.
    prev_chain: bool,
    perm: usize,
    col_base: usize,
}

/// A constraint a position in block offset `o` belongs to.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MemberRef {
    /// Rectangles forward from the position's rectangle.
    forward: usize,
    next_chain: bool,
    perm: usize,
    col_base: usize,
}

/// Precomputed incidence shared by encoder and decoder.
#[derive(Debug)]
pub(crate) struct Tables {
    side: usize,
    s: usize,
    chains: usize,
    /// `floor(d_max / L)`: rectangles spanned behind a constraint.
    span: usize,
    min_window: usize,
    info_cols: usize,
    slots: Vec<SlotRef>,
    members: Vec<Vec<MemberRef>>,
    fwd: Vec<Vec<u32>>,
    inv: Vec<Vec<u32>>,
    code: ComponentCodeSpec,
}

impl Tables {
    pub(crate) fn new(spec: &HoscSpec) -> Arc<Self> {
        let l = spec.l();
        let side = spec.block_side();
        let marks = spec.combined_marks();
        let slots: Vec<SlotRef> = marks
            .iter()
            .enumerate()
            .map(|(kp, mk)| SlotRef {
                back: mk.delay as usize / l,
                offset: l - 1 - mk.delay as usize % l,
                prev_chain: kp >= l,
                perm: mk.perm,
                col_base: spec.column_of(kp, 0),
            })
            .collect();
        let members = (0..l)
            .map(|o| {
                let ruler = l - 1 - o;
                marks
                    .iter()
                    .enumerate()
                    .filter(|(_, mk)| mk.ruler == ruler)
                    .map(|(kp, mk)| MemberRef {
                        forward: mk.delay as usize / l,
                        next_chain: kp >= l,
                        perm: mk.perm,
                        col_base: spec.column_of(kp, 0),
                    })
                    .collect()
            })
            .collect();
        let perms = spec.permutations();
        let d_max = spec.d_max() as usize;
        Arc::new(Tables {
            side,
            s: spec.s(),
            chains: spec.chains(),
            span: d_max / l,
            min_window: d_max.div_ceil(l) + 1,
            info_cols: spec.info_per_row(),
            slots,
            members,
            fwd: perms.iter().map(|p| p.forward_table().to_vec()).collect(),
            inv: perms.iter().map(|p| p.inverse_table().to_vec()).collect(),
            code: spec.component().clone(),
        })
    }

    fn rect_rows(&self) -> usize {
        self.chains * self.side
    }

    /// Index inside a rectangle of cell `cell = i side + j` of block `offset`, chain `c`.
    #[inline]
    fn bit_index(&self, chain: usize, offset: usize, cell: usize) -> usize {
        let (i, j) = (cell / self.side, cell % self.side);
        (chain * self.side + i) * self.s + offset * self.side + j
    }

    #[inline]
    fn column(&self, p: usize) -> u32 {
        self.code.column(p)
    }

    /// Syndrome of constraint `(chain, row)` whose newest rectangle is
    /// `rect(0)`; `rect(k)` looks `k` rectangles back.
    fn syndrome<'a>(&self, chain: usize, row: usize, rect: impl Fn(usize) -> Option<&'a [u8]>) -> u32 {
        let mut s = 0;
        let prev = (chain + self.chains - 1) % self.chains;
        for sr in &self.slots {
            let Some(bits) = rect(sr.back) else { continue };
            let c = if sr.prev_chain { prev } else { chain };
            let fwd = &self.fwd[sr.perm][row * self.side..(row + 1) * self.side];
            for (j, &cell) in fwd.iter().enumerate() {
                if bits[self.bit_index(c, sr.offset, cell as usize)] == 1 {
                    s ^= self.column(sr.col_base + j);
                }
            }
        }
        s
    }
}
