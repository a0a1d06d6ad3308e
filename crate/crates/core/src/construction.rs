//! Resolved higher-order staircase codes and their incidence structure.
//!
//! Blocks are indexed by `m` on each chain; constraints sit at times
//! `n` in `L Z`. Row `rho` of constraint `(c, n)` is the concatenation of
//! `pi'_{k'}(B_{n - d_{k'}})` for `k' = L(M+1)-1 .. 0`, oldest block leftmost,
//! so parity lands in the newest columns.

use std::collections::HashMap;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dts::{DifferenceTriangleSet, Ruler};
use crate::error::{invalid, Error, Result};
use crate::hamming::{self, ComponentCode, ComponentCodeSpec};
use crate::net::{GridPermutation, Mat2, NetRing, NetSpec};

/// One mark of the combined ruler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CombinedMark {
    /// `d_{k'} = L d_k^{(l)} + l`.
    pub delay: u64,
    /// The DTS ruler `l` it came from.
    pub ruler: usize,
    /// Mark index `k`, which is also the net permutation used.
    pub perm: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstraintId {
    pub chain: usize,
    pub time: i64,
    pub row: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PositionRef {
    pub chain: usize,
    pub block: i64,
    pub row: usize,
    pub col: usize,
}

/// Delays, permutations and chaining, independent of the component code.
#[derive(Debug, Clone)]
pub struct Layout {
    l: usize,
    m: usize,
    side: usize,
    chains: usize,
    dts: DifferenceTriangleSet,
    net: NetSpec,
    marks: Vec<CombinedMark>,
    perms: Vec<GridPermutation>,
}

impl Layout {
    pub fn new(chains: usize, dts: DifferenceTriangleSet, net: NetSpec) -> Result<Self> {
        if !dts.is_normalized() {
            return invalid("DTS rulers must be normalized (sorted, first mark 0)");
        }
        DifferenceTriangleSet::validate(dts.rulers().to_vec())?;
        if !net.satisfies_pair_condition() {
            return Err(Error::Structural("the permutations do not form a net".into()));
        }
        Self::new_unchecked(chains, dts, net)
    }

    /// Skips the DTS and net property checks. Structural verification of
    /// the result is then meaningful only as a negative test.
    pub fn new_unchecked(chains: usize, dts: DifferenceTriangleSet, net: NetSpec) -> Result<Self> {
        let l = dts.num_rulers();
        let m = dts.degree();
        if chains == 0 {
            return invalid("at least one chain is required");
        }
        if net.len() != m + 1 {
            return invalid(format!("net has {} permutations, DTS degree needs {}", net.len(), m + 1));
        }
        if dts.rulers().iter().any(|r| r.marks()[0] != 0 || r.marks().windows(2).any(|w| w[0] >= w[1])) {
            return invalid("DTS rulers must be normalized (sorted, first mark 0)");
        }
        let mut marks: Vec<CombinedMark> = Vec::with_capacity(l * (m + 1));
        for (ruler, r) in dts.rulers().iter().enumerate() {
            for (perm, &d) in r.marks().iter().enumerate() {
                marks.push(CombinedMark { delay: (l as i64 * d) as u64 + ruler as u64, ruler, perm });
            }
        }
        marks.sort_by_key(|c| c.delay);
        if let Some(w) = marks.windows(2).find(|w| w[0].delay == w[1].delay) {
            return Err(Error::Internal(format!("combined ruler repeats delay {}", w[0].delay)));
        }
        for (k, c) in marks.iter().take(l).enumerate() {
            if c.delay != k as u64 || c.perm != 0 {
                return Err(Error::Internal(format!("newest delay {k} is not unpermuted")));
            }
        }
        let side = net.block_side();
        let perms = net.permutations();
        Ok(Layout { l, m, side, chains, dts, net, marks, perms })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `S / L`.
    pub fn block_side(&self) -> usize {
        self.side
    }

    /// `S`.
    pub fn s(&self) -> usize {
        self.l * self.side
    }

    pub fn chains(&self) -> usize {
        self.chains
    }

    pub fn dts(&self) -> &DifferenceTriangleSet {
        &self.dts
    }

    pub fn net(&self) -> &NetSpec {
        &self.net
    }

    pub fn permutations(&self) -> &[GridPermutation] {
        &self.perms
    }

    pub fn combined_marks(&self) -> &[CombinedMark] {
        &self.marks
    }

    /// `d_0 < d_1 < ... < d_{L(M+1)-1}`.
    pub fn combined_ruler(&self) -> Vec<u64> {
        self.marks.iter().map(|c| c.delay).collect()
    }

    /// Net index used by each `d_{k'}`.
    pub fn perm_assignment(&self) -> Vec<usize> {
        self.marks.iter().map(|c| c.perm).collect()
    }

    pub fn d_max(&self) -> u64 {
        self.marks.last().unwrap().delay
    }

    /// Component code length `(M+1) S`.
    pub fn codeword_len(&self) -> usize {
        (self.m + 1) * self.s()
    }

    /// Codeword column of cell `j` in the block at combined index `k'`.
    #[inline]
    pub fn column_of(&self, kp: usize, j: usize) -> usize {
        (self.marks.len() - 1 - kp) * self.side + j
    }

    fn chain_for(&self, chain: usize, kp: usize) -> usize {
        if kp < self.l {
            chain
        } else {
            (chain + self.chains - 1) % self.chains
        }
    }

    fn check_id(&self, id: &ConstraintId) -> Result<()> {
        if id.chain >= self.chains || id.row >= self.side || id.time.rem_euclid(self.l as i64) != 0 {
            return invalid(format!("no constraint {id:?}"));
        }
        Ok(())
    }

    /// Positions of one component codeword, column 0 first.
    pub fn constraint_members(&self, id: ConstraintId) -> Result<Vec<(PositionRef, usize)>> {
        self.check_id(&id)?;
        let mut out = Vec::with_capacity(self.codeword_len());
        for kp in (0..self.marks.len()).rev() {
            let mk = self.marks[kp];
            let chain = self.chain_for(id.chain, kp);
            let block = id.time - mk.delay as i64;
            let perm = &self.perms[mk.perm];
            for j in 0..self.side {
                let (row, col) = perm.map(id.row, j);
                out.push((PositionRef { chain, block, row, col }, self.column_of(kp, j)));
            }
        }
        Ok(out)
    }

    /// The `M + 1` constraints a position belongs to, with its codeword column in each.
    pub fn memberships(&self, pos: PositionRef) -> Result<Vec<(ConstraintId, usize)>> {
        if pos.chain >= self.chains || pos.row >= self.side || pos.col >= self.side {
            return invalid(format!("no position {pos:?}"));
        }
        let ruler = (-pos.block).rem_euclid(self.l as i64) as usize;
        let mut out = Vec::with_capacity(self.m + 1);
        for (kp, mk) in self.marks.iter().enumerate() {
            if mk.ruler != ruler {
                continue;
            }
            let chain = if kp < self.l { pos.chain } else { (pos.chain + 1) % self.chains };
            let (row, j) = self.perms[mk.perm].unmap(pos.row, pos.col);
            let id = ConstraintId { chain, time: pos.block + mk.delay as i64, row };
            out.push((id, self.column_of(kp, j)));
        }
        Ok(out)
    }

    /// Exhaustive incidence check over constraint times `0, L, .., L(horizon-1)`.
    ///
    /// Positions whose memberships all fall inside the horizon must have
    /// exactly `M + 1`, matching [`Layout::memberships`]; any two constraints
    /// must share at most one position.
    pub fn verify_structure(&self, horizon: usize) -> Result<StructureReport> {
        let span = self.d_max().div_ceil(self.l as u64) as usize;
        if horizon <= span {
            return invalid(format!("horizon {horizon} does not exceed the ruler span {span}"));
        }
        let last_time = (self.l * (horizon - 1)) as i64;
        let mut incidence: HashMap<PositionRef, Vec<(ConstraintId, usize)>> = HashMap::new();
        let mut constraints = 0usize;
        for t in 0..horizon {
            for chain in 0..self.chains {
                for row in 0..self.side {
                    let id = ConstraintId { chain, time: (t * self.l) as i64, row };
                    constraints += 1;
                    for (pos, col) in self.constraint_members(id)? {
                        incidence.entry(pos).or_default().push((id, col));
                    }
                }
            }
        }

        let mut steady = 0usize;
        let mut pairs: HashMap<(ConstraintId, ConstraintId), u32> = HashMap::new();
        let mut max_overlap = 0u32;
        let mut positions: Vec<_> = incidence.into_iter().collect();
        positions.sort();
        for (pos, mut list) in positions {
            if pos.block >= 0 && pos.block + self.d_max() as i64 <= last_time {
                steady += 1;
                if list.len() != self.m + 1 {
                    return Err(Error::Structural(format!(
                        "position {pos:?} lies in {} constraints, expected {}",
                        list.len(),
                        self.m + 1
                    )));
                }
                list.sort();
                let mut expected = self.memberships(pos)?;
                expected.sort();
                if list != expected {
                    return Err(Error::Structural(format!(
                        "memberships of {pos:?} disagree with the constraint lists"
                    )));
                }
            }
            for a in 0..list.len() {
                for b in a + 1..list.len() {
                    let (x, y) = (list[a].0.min(list[b].0), list[a].0.max(list[b].0));
                    if x == y {
                        return Err(Error::Structural(format!("{pos:?} appears twice in {x:?}")));
                    }
                    let count = pairs.entry((x, y)).or_default();
                    *count += 1;
                    max_overlap = max_overlap.max(*count);
                    if *count > 1 {
                        return Err(Error::Structural(format!(
                            "constraints {x:?} and {y:?} share {} positions",
                            *count
                        )));
                    }
                }
            }
        }
        if steady == 0 {
            return Err(Error::Internal("no steady-state positions in the horizon".into()));
        }
        Ok(StructureReport { constraints, steady_positions: steady, max_overlap })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureReport {
    pub constraints: usize,
    pub steady_positions: usize,
    pub max_overlap: u32,
}

/// A fully resolved code: layout plus the component code.
#[derive(Debug, Clone)]
pub struct HoscSpec {
    layout: Layout,
    component: ComponentCodeSpec,
}

impl Deref for HoscSpec {
    type Target = Layout;

    fn deref(&self) -> &Layout {
        &self.layout
    }
}

/// Builds the code. `parity_bits` defaults to the smallest extended Hamming
/// code of length `(M+1) S`; it must stay below `S`.
pub fn build_spec(
    chains: usize,
    dts: DifferenceTriangleSet,
    net: NetSpec,
    parity_bits: Option<usize>,
) -> Result<HoscSpec> {
    HoscSpec::from_layout(Layout::new(chains, dts, net)?, parity_bits)
}

impl HoscSpec {
    pub fn from_layout(layout: Layout, parity_bits: Option<usize>) -> Result<Self> {
        let n = layout.codeword_len();
        let seed_m = match parity_bits {
            Some(0) => return invalid("at least one parity bit is required"),
            Some(r) => Some(r as u32 - 1),
            None => None,
        };
        let component = hamming::build(n, seed_m)?;
        if component.r() >= layout.s() {
            return invalid(format!(
                "{} parity bits leave no information in S = {} columns",
                component.r(),
                layout.s()
            ));
        }
        Ok(HoscSpec { layout, component })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn component(&self) -> &ComponentCodeSpec {
        &self.component
    }

    pub fn r(&self) -> usize {
        self.component.r()
    }

    pub fn rate(&self) -> f64 {
        1.0 - self.r() as f64 / self.s() as f64
    }

    /// Information bits per row of the `L` newest blocks: `S - r`.
    pub fn info_per_row(&self) -> usize {
        self.s() - self.r()
    }

    /// Bits in one rectangle: `C (S/L) x L (S/L)`.
    pub fn rectangle_bits(&self) -> usize {
        self.chains() * self.block_side() * self.s()
    }

    pub fn info_bits_per_rectangle(&self) -> usize {
        self.chains() * self.block_side() * self.info_per_row()
    }

    pub fn window_bits(&self, w: usize) -> usize {
        w * self.rectangle_bits()
    }

    pub fn to_document(&self) -> SpecDocument {
        let (ring, size) = match self.net().ring() {
            NetRing::Integers(r) => ("Z".to_string(), r.modulus()),
            NetRing::Field(f) => ("GF".to_string(), f.order() as u64),
        };
        SpecDocument {
            l: self.l(),
            m: self.m(),
            block_side: self.block_side(),
            chains: self.chains(),
            parity_bits: self.r(),
            dts: self.dts().rulers().iter().map(|r| r.marks().to_vec()).collect(),
            net: NetDocument {
                ring,
                size,
                matrices: self.net().matrices().iter().map(|m| [m.a, m.b, m.c, m.d]).collect(),
            },
        }
    }

    /// SHA-256 of the canonical JSON document, hex encoded.
    pub fn hash(&self) -> String {
        self.to_document().hash()
    }

    pub fn to_json(&self) -> String {
        let doc = self.to_document();
        let hash = doc.hash();
        let stored = StoredSpec { spec: doc, hash };
        serde_json::to_string_pretty(&stored).expect("spec serializes") + "\n"
    }

    /// Parses and rebuilds a spec; a stored hash, if present, must match.
    pub fn from_json(text: &str) -> Result<Self> {
        let stored: StoredSpec = serde_json::from_str(text)
            .map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
        let spec = stored.spec.build()?;
        if !stored.hash.is_empty() && stored.hash != spec.hash() {
            return invalid(format!("hash {} does not match contents", stored.hash));
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetDocument {
    /// `"Z"` or `"GF"`.
    pub ring: String,
    pub size: u64,
    pub matrices: Vec<[u32; 4]>,
}

/// Serializable form of a [`HoscSpec`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecDocument {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub block_side: usize,
    pub chains: usize,
    pub parity_bits: usize,
    pub dts: Vec<Vec<i64>>,
    pub net: NetDocument,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StoredSpec {
    spec: SpecDocument,
    #[serde(default)]
    hash: String,
}

impl SpecDocument {
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("document serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn build(&self) -> Result<HoscSpec> {
        let ring = match self.net.ring.as_str() {
            "Z" => NetRing::integers(self.net.size)?,
            "GF" => NetRing::field(self.net.size as u32)?,
            other => return invalid(format!("unknown ring {other:?}")),
        };
        let matrices = self.net.matrices.iter().map(|m| Mat2::new(m[0], m[1], m[2], m[3])).collect();
        let net = NetSpec::new(ring, matrices)?;
        let rulers = self.dts.iter().map(|m| Ruler::new(m.clone())).collect::<Result<Vec<_>>>()?;
        let dts = DifferenceTriangleSet::validate(rulers)?;
        let spec = build_spec(self.chains, dts, net, Some(self.parity_bits))?;
        if (spec.l(), spec.m(), spec.block_side()) != (self.l, self.m, self.block_side) {
            return invalid("L, M or block side disagree with the DTS and net");
        }
        Ok(spec)
    }
}
