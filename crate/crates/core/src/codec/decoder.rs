use std::collections::VecDeque;
use std::sync::Arc;

use super::{Rectangle, Tables};
use crate::construction::HoscSpec;
use crate::error::{invalid, Error, Result};
use crate::hamming::{ComponentCode, DecodeOutcome};

/// Order in which one iteration visits the constraints of the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Oldest time first, then chain, then row.
    #[default]
    OldestFirst,
    NewestFirst,
}

/// Which bits of a pushed rectangle are known to the decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Freeze {
    None,
    All,
    /// Only the information columns (known zero after termination).
    InfoColumns,
}

#[derive(Debug, Clone)]
pub struct DecoderConfig {
    /// `W`, rectangles in the window.
    pub window: usize,
    /// `I`, passes over the window per advance.
    pub iterations: usize,
    pub schedule: Schedule,
    /// Decode every constraint on every pass, not only changed ones.
    pub decode_all: bool,
    /// Recompute all syndromes after each advance and compare.
    pub recheck: bool,
}

impl DecoderConfig {
    pub fn new(window: usize, iterations: usize) -> Self {
        DecoderConfig {
            window,
            iterations,
            schedule: Schedule::default(),
            decode_all: false,
            recheck: cfg!(debug_assertions),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecoderStats {
    pub advances: u64,
    pub component_decodes: u64,
    pub flips: u64,
    /// Flips refused because the target bit was known.
    pub blocked_flips: u64,
    pub detected: u64,
}

#[derive(Debug, Clone)]
struct Slot {
    bits: Vec<u8>,
    freeze: Freeze,
    data: bool,
    /// Syndromes of the constraints ending in this rectangle, by `(chain, row)`.
    synd: Vec<u32>,
    dirty: Vec<bool>,
}

/// Sliding-window iterative bounded-distance decoder.
#[derive(Debug, Clone)]
pub struct Decoder {
    tables: Arc<Tables>,
    config: DecoderConfig,
    window: VecDeque<Slot>,
    stats: DecoderStats,
}

impl Decoder {
    /// A window primed with `W - 1` known zero rectangles.
    pub fn new(spec: &HoscSpec, config: DecoderConfig) -> Result<Self> {
        let tables = Tables::new(spec);
        if config.window < tables.min_window {
            return invalid(format!(
                "window {} is shorter than the {} rectangles a constraint spans",
                config.window, tables.min_window
            ));
        }
        if config.iterations == 0 {
            return invalid("at least one iteration is required");
        }
        let rows = tables.rect_rows();
        let bits = rows * tables.s;
        let window = (0..config.window - 1)
            .map(|_| Slot {
                bits: vec![0; bits],
                freeze: Freeze::All,
                data: false,
                synd: vec![0; rows],
                dirty: vec![false; rows],
            })
            .collect();
        Ok(Decoder { tables, config, window, stats: DecoderStats::default() })
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.config
    }

    pub fn stats(&self) -> DecoderStats {
        self.stats
    }

    /// Rectangles the decoded output lags the input by.
    pub fn latency(&self) -> usize {
        self.config.window - 1
    }

    /// Shifts in a received rectangle and returns the one leaving the window.
    pub fn decode_advance(&mut self, incoming: &Rectangle) -> Result<Option<Rectangle>> {
        self.push(incoming, Freeze::None, true)
    }

    /// Pushes the termination rectangles, then releases whatever data is left.
    pub fn flush(&mut self, tail: &[Rectangle], freeze: Freeze) -> Result<Vec<Rectangle>> {
        let mut out = Vec::new();
        for r in tail {
            out.extend(self.push(r, freeze, false)?);
        }
        while let Some(slot) = self.window.pop_front() {
            if slot.data {
                out.push(self.to_rect(slot));
            }
        }
        Ok(out)
    }

    /// General form of [`Decoder::decode_advance`]: `data` marks rectangles
    /// to emit once they leave the window.
    pub fn push(&mut self, incoming: &Rectangle, freeze: Freeze, data: bool) -> Result<Option<Rectangle>> {
        let tb = Arc::clone(&self.tables);
        if incoming.rows() != tb.rect_rows() || incoming.cols() != tb.s {
            return invalid(format!(
                "rectangle is {}x{}, expected {}x{}",
                incoming.rows(),
                incoming.cols(),
                tb.rect_rows(),
                tb.s
            ));
        }
        if self.window.len() != self.config.window - 1 {
            return Err(Error::InvalidArgument("decoder was already flushed".into()));
        }
        let rows = tb.rect_rows();
        self.window.push_back(Slot {
            bits: incoming.bits().to_vec(),
            freeze,
            data,
            synd: vec![0; rows],
            dirty: vec![true; rows],
        });
        let newest = self.window.len() - 1;
        for c in 0..tb.chains {
            for rho in 0..tb.side {
                let s = tb.syndrome(c, rho, |back| Some(&self.window[newest - back].bits[..]));
                self.window[newest].synd[c * tb.side + rho] = s;
            }
        }
        self.stats.advances += 1;

        for _ in 0..self.config.iterations {
            if self.pass() == 0 {
                break;
            }
        }
        if self.config.recheck {
            self.check_syndromes()?;
        }
        let oldest = self.window.pop_front().expect("window is full");
        Ok(oldest.data.then(|| self.to_rect(oldest)))
    }

    fn to_rect(&self, slot: Slot) -> Rectangle {
        Rectangle::from_bits(self.tables.rect_rows(), self.tables.s, slot.bits).expect("slot size")
    }

    /// One sweep over all held constraints; returns the number of flips.
    fn pass(&mut self) -> u64 {
        let tb = Arc::clone(&self.tables);
        let w = self.window.len();
        let mut flips = 0;
        let order: Box<dyn Iterator<Item = usize>> = match self.config.schedule {
            Schedule::OldestFirst => Box::new(tb.span..w),
            Schedule::NewestFirst => Box::new((tb.span..w).rev()),
        };
        for s in order {
            for idx in 0..tb.rect_rows() {
                let slot = &mut self.window[s];
                if !slot.dirty[idx] && !self.config.decode_all {
                    continue;
                }
                slot.dirty[idx] = false;
                let synd = slot.synd[idx];
                self.stats.component_decodes += 1;
                match tb.code.decode_syndrome(synd) {
                    DecodeOutcome::NoError => {}
                    DecodeOutcome::DetectedUncorrectable => self.stats.detected += 1,
                    DecodeOutcome::Flip(p) => {
                        if self.flip_member(s, idx / tb.side, idx % tb.side, p) {
                            flips += 1;
                        }
                    }
                }
            }
        }
        self.stats.flips += flips;
        flips
    }

    /// Flips codeword column `p` of constraint `(s, chain, row)` unless known.
    fn flip_member(&mut self, s: usize, chain: usize, row: usize, p: usize) -> bool {
        let tb = Arc::clone(&self.tables);
        let kp = tb.slots.len() - 1 - p / tb.side;
        let j = p % tb.side;
        let sr = tb.slots[kp];
        let ps = s - sr.back;
        let c = if sr.prev_chain { (chain + tb.chains - 1) % tb.chains } else { chain };
        let cell = tb.fwd[sr.perm][row * tb.side + j] as usize;
        let col_in_rect = sr.offset * tb.side + cell % tb.side;
        let blocked = match self.window[ps].freeze {
            Freeze::None => false,
            Freeze::All => true,
            Freeze::InfoColumns => col_in_rect < tb.info_cols,
        };
        if blocked {
            self.stats.blocked_flips += 1;
            return false;
        }
        let bit = tb.bit_index(c, sr.offset, cell);
        self.window[ps].bits[bit] ^= 1;

        let w = self.window.len();
        for mr in &tb.members[sr.offset] {
            let cs = ps + mr.forward;
            if cs >= w || cs < tb.span {
                continue;
            }
            let cc = if mr.next_chain { (c + 1) % tb.chains } else { c };
            let pre = tb.inv[mr.perm][cell] as usize;
            let (rho, jj) = (pre / tb.side, pre % tb.side);
            let target = &mut self.window[cs];
            target.synd[cc * tb.side + rho] ^= tb.column(mr.col_base + jj);
            target.dirty[cc * tb.side + rho] = true;
        }
        true
    }

    /// Recomputes every held syndrome from the window bits.
    pub fn check_syndromes(&self) -> Result<()> {
        let tb = &*self.tables;
        for s in tb.span..self.window.len() {
            for c in 0..tb.chains {
                for rho in 0..tb.side {
                    let fresh = tb.syndrome(c, rho, |back| Some(&self.window[s - back].bits[..]));
                    let held = self.window[s].synd[c * tb.side + rho];
                    if fresh != held {
                        return Err(Error::Internal(format!(
                            "syndrome drift at slot {s}, chain {c}, row {rho}: {held:#x} vs {fresh:#x}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
