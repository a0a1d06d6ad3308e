//! Binary symmetric channel and Monte-Carlo bit error rate measurement.
//!
//! A point is measured over independent terminated streams ("chunks") of
//! fixed length. Each chunk draws from its own ChaCha8 stream selected by
//! `(p index, chunk index)`, and chunks are merged in index order, so every
//! reported number is a function of the configuration and seed alone.

mod report;

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use report::{parse_csv, plot_data, write_csv, SimHeader};

use crate::codec::{Decoder, DecoderConfig, Encoder, Freeze, Rectangle, Schedule};
use crate::construction::HoscSpec;
use crate::error::{invalid, Error, Result};

fn threshold(p: f64) -> Result<u64> {
    if !(0.0..=0.5).contains(&p) {
        return invalid(format!("crossover probability {p} is outside [0, 0.5]"));
    }
    // p <= 0.5 so the product stays below 2^64
    Ok((p * 18_446_744_073_709_551_616.0) as u64)
}

/// Flips each bit independently with probability `p`; returns the flip count.
pub fn bsc(bits: &mut [u8], p: f64, rng: &mut impl RngCore) -> Result<u64> {
    let t = threshold(p)?;
    Ok(bsc_with_threshold(bits, t, rng))
}

fn bsc_with_threshold(bits: &mut [u8], t: u64, rng: &mut impl RngCore) -> u64 {
    if t == 0 {
        return 0;
    }
    let mut flips = 0;
    for b in bits {
        if rng.next_u64() < t {
            *b ^= 1;
            flips += 1;
        }
    }
    flips
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub min_bit_errors: u64,
    pub max_bits: u64,
    /// With no errors, stop once `10 / zero_error_target` bits have passed.
    pub zero_error_target: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule { min_bit_errors: 100, max_bits: 10_000_000_000, zero_error_target: 1e-7 }
    }
}

impl StopRule {
    pub fn zero_error_bits(&self) -> u64 {
        (10.0 / self.zero_error_target).ceil() as u64
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub spec: HoscSpec,
    pub window: usize,
    pub iterations: usize,
    pub ps: Vec<f64>,
    pub seed: u64,
    pub stop: StopRule,
    /// Data rectangles per independent stream.
    pub chunk_rects: usize,
    /// Streams simulated per parallel batch; 0 means one per worker.
    /// Results do not depend on it, only wasted work past the stopping point.
    pub batch: usize,
    pub schedule: Schedule,
    pub decode_all: bool,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl SimConfig {
    pub fn new(spec: HoscSpec, window: usize, iterations: usize, ps: Vec<f64>, seed: u64) -> Self {
        SimConfig {
            spec,
            window,
            iterations,
            ps,
            seed,
            stop: StopRule::default(),
            chunk_rects: 1000,
            batch: 0,
            schedule: Schedule::default(),
            decode_all: false,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.chunk_rects == 0 {
            return invalid("iterations and chunk length must be positive");
        }
        if self.ps.is_empty() {
            return invalid("no crossover probabilities given");
        }
        for &p in &self.ps {
            threshold(p)?;
        }
        if !(self.stop.zero_error_target > 0.0 && self.stop.zero_error_target < 1.0) {
            return invalid("zero-error target must lie in (0, 1)");
        }
        if self.workers == Some(0) {
            return invalid("worker count must be positive");
        }
        self.decoder_config().map(|_| ())
    }

    fn decoder_config(&self) -> Result<DecoderConfig> {
        let mut cfg = DecoderConfig::new(self.window, self.iterations);
        cfg.schedule = self.schedule;
        cfg.decode_all = self.decode_all;
        cfg.recheck = false;
        Decoder::new(&self.spec, cfg.clone())?;
        Ok(cfg)
    }

    pub fn header(&self) -> SimHeader {
        let spec = &self.spec;
        SimHeader {
            spec_hash: spec.hash(),
            l: spec.l(),
            m: spec.m(),
            block_side: spec.block_side(),
            chains: spec.chains(),
            window: self.window,
            iterations: self.iterations,
            parity_bits: spec.r(),
            rate: spec.rate(),
            window_bits: spec.window_bits(self.window),
            seed: self.seed,
            stop: self.stop,
            chunk_rects: self.chunk_rects,
            label: format!(
                "({},{},{},{},{},{},{:.4},{})",
                spec.l(),
                spec.m(),
                spec.block_side(),
                spec.chains(),
                self.window,
                self.iterations,
                spec.rate(),
                spec.window_bits(self.window)
            ),
        }
    }
}

/// Counts for one crossover probability.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointResult {
    pub p: f64,
    pub info_bits: u64,
    pub bit_errors: u64,
    pub coded_bits: u64,
    pub channel_flips: u64,
    pub rectangles: u64,
    /// No errors were seen over at least the zero-error budget.
    pub zero_error: bool,
    pub elapsed: Duration,
}

impl PointResult {
    pub fn output_ber(&self) -> f64 {
        if self.info_bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.info_bits as f64
        }
    }

    pub fn input_ber(&self) -> f64 {
        if self.coded_bits == 0 {
            0.0
        } else {
            self.channel_flips as f64 / self.coded_bits as f64
        }
    }

    fn absorb(&mut self, c: &ChunkCounts) {
        self.info_bits += c.info_bits;
        self.bit_errors += c.bit_errors;
        self.coded_bits += c.coded_bits;
        self.channel_flips += c.channel_flips;
        self.rectangles += c.rectangles;
    }
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub header: SimHeader,
    pub points: Vec<PointResult>,
}

#[derive(Debug, Clone, Copy, Default)]
struct ChunkCounts {
    info_bits: u64,
    bit_errors: u64,
    coded_bits: u64,
    channel_flips: u64,
    rectangles: u64,
}

fn chunk_rng(seed: u64, p_index: usize, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((p_index as u64) << 32) | (chunk & 0xffff_ffff));
    rng
}

fn random_bits(out: &mut [u8], rng: &mut ChaCha8Rng) {
    for chunk in out.chunks_mut(64) {
        let w = rng.next_u64();
        for (k, b) in chunk.iter_mut().enumerate() {
            *b = (w >> k & 1) as u8;
        }
    }
}

/// One terminated stream: random data through the channel, then decoded.
/// The termination rectangles are handed to the decoder as known.
fn run_chunk(cfg: &SimConfig, dcfg: &DecoderConfig, t: u64, mut rng: ChaCha8Rng) -> Result<ChunkCounts> {
    let spec = &cfg.spec;
    let info_cols = spec.info_per_row();
    let mut enc = Encoder::new(spec);
    let mut dec = Decoder::new(spec, dcfg.clone())?;
    let mut counts = ChunkCounts::default();
    let mut pending: VecDeque<Vec<u8>> = VecDeque::new();
    let mut info = vec![0u8; enc.info_len()];
    let check = |out: Rectangle, pending: &mut VecDeque<Vec<u8>>| {
        let sent = pending.pop_front().expect("output follows input");
        let got = out.info_bits(info_cols);
        sent.iter().zip(&got).filter(|(a, b)| a != b).count() as u64
    };
    for _ in 0..cfg.chunk_rects {
        random_bits(&mut info, &mut rng);
        let mut rect = enc.encode_step(&info)?;
        counts.channel_flips += bsc_with_threshold(rect.bits_mut(), t, &mut rng);
        counts.coded_bits += rect.len() as u64;
        counts.info_bits += info.len() as u64;
        counts.rectangles += 1;
        pending.push_back(info.clone());
        if let Some(out) = dec.decode_advance(&rect)? {
            counts.bit_errors += check(out, &mut pending);
        }
    }
    let tail = enc.terminate(dcfg.window - 1);
    for out in dec.flush(&tail, Freeze::All)? {
        counts.bit_errors += check(out, &mut pending);
    }
    if !pending.is_empty() {
        return Err(Error::Internal("decoder dropped rectangles".into()));
    }
    Ok(counts)
}

/// Measures one point, stopping per `cfg.stop`.
pub fn run_point(cfg: &SimConfig, p_index: usize) -> Result<PointResult> {
    let p = *cfg.ps.get(p_index).ok_or_else(|| Error::InvalidArgument("no such point".into()))?;
    let t = threshold(p)?;
    let dcfg = cfg.decoder_config()?;
    let start = Instant::now();
    let mut res = PointResult { p, ..Default::default() };
    let zero_bits = cfg.stop.zero_error_bits();
    let batch = if cfg.batch == 0 { rayon::current_num_threads() } else { cfg.batch } as u64;
    let mut next_chunk = 0u64;
    loop {
        let ids: Vec<u64> = (next_chunk..next_chunk + batch).collect();
        next_chunk += batch;
        let counts: Vec<ChunkCounts> = ids
            .par_iter()
            .map(|&id| run_chunk(cfg, &dcfg, t, chunk_rng(cfg.seed, p_index, id)))
            .collect::<Result<_>>()?;
        for c in &counts {
            res.absorb(c);
            let done = if res.bit_errors == 0 {
                // p = 0 cannot produce errors; one chunk suffices
                if p == 0.0 || res.info_bits >= zero_bits {
                    res.zero_error = true;
                    true
                } else {
                    false
                }
            } else {
                res.bit_errors >= cfg.stop.min_bit_errors
            };
            if done || res.info_bits >= cfg.stop.max_bits {
                res.elapsed = start.elapsed();
                return Ok(res);
            }
        }
        if next_chunk >= 1 << 32 {
            return Err(Error::Unsupported("chunk index space exhausted".into()));
        }
    }
}

/// Runs every point in order.
pub fn sweep(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let run = || -> Result<Vec<PointResult>> { (0..cfg.ps.len()).map(|i| run_point(cfg, i)).collect() };
    let points = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    Ok(SimResult { header: cfg.header(), points })
}
