//! Parameter sets shipped with the CLI.

use anyhow::{bail, Result};

#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub l: usize,
    pub m: usize,
    pub block_side: usize,
    pub chains: usize,
    pub w: usize,
    pub i: usize,
    pub parity_bits: Option<usize>,
    pub ps: &'static [f64],
}

pub const PRESETS: &[Preset] = &[
    // rate 1 - 9/72 = 0.875
    Preset {
        name: "r875",
        l: 2,
        m: 2,
        block_side: 36,
        chains: 1,
        w: 16,
        i: 3,
        parity_bits: None,
        ps: &[1e-2, 8e-3, 7e-3, 5e-3, 1e-3, 1e-5],
    },
    // rate 1 - 10/160 = 0.9375
    Preset {
        name: "r9375",
        l: 2,
        m: 2,
        block_side: 80,
        chains: 1,
        w: 16,
        i: 3,
        parity_bits: None,
        ps: &[4.5e-3, 4e-3, 3.5e-3, 3e-3, 2.5e-3, 2e-3],
    },
];

pub fn find(name: &str) -> Result<&'static Preset> {
    match PRESETS.iter().find(|p| p.name == name) {
        Some(p) => Ok(p),
        None => {
            let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
            bail!(hosc::Error::InvalidArgument(format!(
                "unknown preset {name:?}; known: {}",
                names.join(", ")
            )))
        }
    }
}
