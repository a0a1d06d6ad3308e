use serde::{Deserialize, Serialize};

use super::{PointResult, SimResult, StopRule};
use crate::error::{Error, Result};

/// First line of a results file, as JSON after `# `.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimHeader {
    pub spec_hash: String,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub block_side: usize,
    #[serde(rename = "C")]
    pub chains: usize,
    #[serde(rename = "W")]
    pub window: usize,
    #[serde(rename = "I")]
    pub iterations: usize,
    pub parity_bits: usize,
    pub rate: f64,
    pub window_bits: usize,
    pub seed: u64,
    pub stop: StopRule,
    pub chunk_rects: usize,
    /// `(L,M,S/L,C,W,I,rate,window bits)`.
    pub label: String,
}

const COLUMNS: [&str; 9] = [
    "p",
    "input_ber",
    "output_ber",
    "info_bits",
    "bit_errors",
    "coded_bits",
    "channel_flips",
    "rectangles",
    "zero_error",
];

/// CSV text with the JSON header line. Timing is deliberately left out so
/// equal runs give equal bytes.
pub fn write_csv(res: &SimResult) -> Result<String> {
    let header = serde_json::to_string(&res.header).map_err(|e| Error::Internal(e.to_string()))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(COLUMNS).map_err(io)?;
    for pt in &res.points {
        w.write_record([
            format!("{:e}", pt.p),
            format!("{:e}", pt.input_ber()),
            format!("{:e}", pt.output_ber()),
            pt.info_bits.to_string(),
            pt.bit_errors.to_string(),
            pt.coded_bits.to_string(),
            pt.channel_flips.to_string(),
            pt.rectangles.to_string(),
            (pt.zero_error as u8).to_string(),
        ])
        .map_err(io)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(format!("# {header}\n{}", String::from_utf8(body).expect("ascii csv")))
}

/// Reads back a file written by [`write_csv`].
pub fn parse_csv(text: &str) -> Result<(SimHeader, Vec<PointResult>)> {
    let perr = |line: usize, message: String| Error::Parse { line, message };
    let first = text.lines().next().ok_or_else(|| perr(1, "empty file".into()))?;
    let json = first.strip_prefix("# ").ok_or_else(|| perr(1, "missing header line".into()))?;
    let header: SimHeader = serde_json::from_str(json).map_err(|e| perr(1, e.to_string()))?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 3;
        let rec = rec.map_err(|e| perr(line, e.to_string()))?;
        if rec.len() != COLUMNS.len() {
            return Err(perr(line, format!("expected {} fields", COLUMNS.len())));
        }
        let f = |k: usize| rec[k].parse::<f64>().map_err(|e| perr(line, e.to_string()));
        let u = |k: usize| rec[k].parse::<u64>().map_err(|e| perr(line, e.to_string()));
        points.push(PointResult {
            p: f(0)?,
            info_bits: u(3)?,
            bit_errors: u(4)?,
            coded_bits: u(5)?,
            channel_flips: u(6)?,
            rectangles: u(7)?,
            zero_error: u(8)? == 1,
            ..Default::default()
        });
    }
    Ok((header, points))
}

/// Whitespace-separated columns, one gnuplot data block per input file.
///
/// Zero-error points are written with the BER bound `1 / bits` so they can be
/// drawn (dashed) on a log axis.
pub fn plot_data(files: &[String]) -> Result<String> {
    let mut out = String::new();
    for (i, text) in files.iter().enumerate() {
        let (h, points) = parse_csv(text)?;
        if i > 0 {
            out.push_str("\n\n");
        }
        out.push_str(&format!("# {}\n# p input_ber output_ber zero_error\n", h.label));
        for pt in points {
            let ber = if pt.zero_error { 1.0 / pt.info_bits as f64 } else { pt.output_ber() };
            out.push_str(&format!("{:e} {:e} {:e} {}\n", pt.p, pt.input_ber(), ber, pt.zero_error as u8));
        }
    }
    Ok(out)
}
