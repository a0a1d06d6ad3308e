//! Nets of grid permutations given by invertible 2x2 matrices.
//!
//! A grid cell `(i, j)` is treated as a row vector over a ring of size
//! `S/L` and mapped to `(i, j) * A`. A set of such maps is a net when any row
//! of one permuted block meets any row of another in exactly one cell.

use std::fmt;

use crate::algebra::{lpf, ModRing, SmallField};
use crate::error::{invalid, Error, Result};

/// Coordinate ring of the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetRing {
    /// Integers modulo the block side.
    Integers(ModRing),
    /// A finite field whose order equals the block side.
    Field(SmallField),
}

impl NetRing {
    pub fn integers(m: u64) -> Result<Self> {
        Ok(NetRing::Integers(ModRing::new(m)?))
    }

    pub fn field(q: u32) -> Result<Self> {
        Ok(NetRing::Field(SmallField::new(q)?))
    }

    pub fn size(&self) -> usize {
        match self {
            NetRing::Integers(r) => r.modulus() as usize,
            NetRing::Field(f) => f.order() as usize,
        }
    }

    fn add(&self, a: u32, b: u32) -> u32 {
        match self {
            NetRing::Integers(r) => r.add(a as u64, b as u64) as u32,
            NetRing::Field(f) => f.add(a, b),
        }
    }

    fn sub(&self, a: u32, b: u32) -> u32 {
        match self {
            NetRing::Integers(r) => r.sub(a as u64, b as u64) as u32,
            NetRing::Field(f) => f.sub(a, b),
        }
    }

    fn mul(&self, a: u32, b: u32) -> u32 {
        match self {
            NetRing::Integers(r) => r.mul(a as u64, b as u64) as u32,
            NetRing::Field(f) => f.mul(a, b),
        }
    }

    fn is_unit(&self, a: u32) -> bool {
        match self {
            NetRing::Integers(r) => r.is_unit(a as u64),
            // the one-element "field" does not occur; zero is the only non-unit
            NetRing::Field(_) => a != 0,
        }
    }

    fn reduce(&self, x: i64) -> u32 {
        match self {
            NetRing::Integers(r) => r.reduce(x) as u32,
            NetRing::Field(f) => {
                // integers embed through repeated addition of one
                let mut acc = 0;
                let steps = x.rem_euclid(f.characteristic() as i64);
                for _ in 0..steps {
                    acc = f.add(acc, 1);
                }
                acc
            }
        }
    }
}

/// A 2x2 matrix `[[a, b], [c, d]]` with entries in a [`NetRing`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub d: u32,
}

impl Mat2 {
    pub const fn new(a: u32, b: u32, c: u32, d: u32) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity(ring: &NetRing) -> Self {
        let one = ring.reduce(1);
        Mat2::new(one, 0, 0, one)
    }

    pub fn det(&self, ring: &NetRing) -> u32 {
        ring.sub(ring.mul(self.a, self.d), ring.mul(self.b, self.c))
    }

    pub fn is_invertible(&self, ring: &NetRing) -> bool {
        ring.is_unit(self.det(ring))
    }

    pub fn mul(&self, rhs: &Mat2, ring: &NetRing) -> Mat2 {
        let dot = |x: u32, y: u32, z: u32, w: u32| ring.add(ring.mul(x, y), ring.mul(z, w));
        Mat2::new(
            dot(self.a, rhs.a, self.b, rhs.c),
            dot(self.a, rhs.b, self.b, rhs.d),
            dot(self.c, rhs.a, self.d, rhs.c),
            dot(self.c, rhs.b, self.d, rhs.d),
        )
    }

    fn reduced(&self, ring: &NetRing) -> Mat2 {
        let r = |x: u32| ring.reduce(x as i64);
        match ring {
            NetRing::Integers(_) => Mat2::new(r(self.a), r(self.b), r(self.c), r(self.d)),
            NetRing::Field(_) => *self,
        }
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

/// Whether rows permuted by `a` and by `a2` always meet in one cell:
/// `c * d2 - d * c2` must be a unit.
pub fn check_pair(a: &Mat2, a2: &Mat2, ring: &NetRing) -> Result<bool> {
    if !a.is_invertible(ring) || !a2.is_invertible(ring) {
        return invalid(format!("matrices {a} and {a2} must both be invertible"));
    }
    let x = ring.sub(ring.mul(a.c, a2.d), ring.mul(a.d, a2.c));
    Ok(ring.is_unit(x))
}

/// A bijection of the `side x side` grid, stored on flattened indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridPermutation {
    side: usize,
    forward: Vec<u32>,
    inverse: Vec<u32>,
}

impl GridPermutation {
    pub fn from_matrix(m: &Mat2, ring: &NetRing) -> Result<Self> {
        let side = ring.size();
        let mut forward = vec![0u32; side * side];
        let mut inverse = vec![u32::MAX; side * side];
        for i in 0..side as u32 {
            for j in 0..side as u32 {
                let ni = ring.add(ring.mul(i, m.a), ring.mul(j, m.c));
                let nj = ring.add(ring.mul(i, m.b), ring.mul(j, m.d));
                let src = i as usize * side + j as usize;
                let dst = ni as usize * side + nj as usize;
                if inverse[dst] != u32::MAX {
                    return invalid(format!("matrix {m} does not permute the grid"));
                }
                forward[src] = dst as u32;
                inverse[dst] = src as u32;
            }
        }
        Ok(GridPermutation { side, forward, inverse })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Image of cell `(i, j)`.
    #[inline]
    pub fn map(&self, i: usize, j: usize) -> (usize, usize) {
        let t = self.forward[i * self.side + j] as usize;
        (t / self.side, t % self.side)
    }

    /// Preimage of cell `(i, j)`.
    #[inline]
    pub fn unmap(&self, i: usize, j: usize) -> (usize, usize) {
        let t = self.inverse[i * self.side + j] as usize;
        (t / self.side, t % self.side)
    }

    pub fn forward_table(&self) -> &[u32] {
        &self.forward
    }

    pub fn inverse_table(&self) -> &[u32] {
        &self.inverse
    }
}

/// A square binary matrix; the unit of transmitted data.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Block {
    side: usize,
    bits: Vec<u8>,
}

impl Block {
    pub fn zeros(side: usize) -> Self {
        Block { side, bits: vec![0; side * side] }
    }

    pub fn from_bits(side: usize, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != side * side {
            return invalid(format!("{} bits do not fill a {side}x{side} block", bits.len()));
        }
        Ok(Block { side, bits: bits.into_iter().map(|b| b & 1).collect() })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.bits[i * self.side + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u8) {
        self.bits[i * self.side + j] = v & 1;
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn transpose(&self) -> Block {
        let mut out = Block::zeros(self.side);
        for i in 0..self.side {
            for j in 0..self.side {
                out.set(i, j, self.get(j, i));
            }
        }
        out
    }
}

/// Permuted block: entry `(i, j)` of the result is entry `perm(i, j)` of `block`.
pub fn apply(perm: &GridPermutation, block: &Block) -> Result<Block> {
    if perm.side() != block.side() {
        return invalid(format!(
            "permutation side {} does not match block side {}",
            perm.side(),
            block.side()
        ));
    }
    let bits = perm.forward.iter().map(|&src| block.bits[src as usize]).collect();
    Ok(Block { side: block.side, bits })
}

/// `M + 1` matrices over a ring of size `S/L`, the first being the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetSpec {
    ring: NetRing,
    matrices: Vec<Mat2>,
}

impl NetSpec {
    /// Checks invertibility and the leading identity; the net property
    /// itself is left to [`verify_net`] / [`NetSpec::satisfies_pair_condition`].
    pub fn new(ring: NetRing, matrices: Vec<Mat2>) -> Result<Self> {
        if matrices.is_empty() {
            return invalid("a net needs at least one matrix");
        }
        let matrices: Vec<Mat2> = matrices.iter().map(|m| m.reduced(&ring)).collect();
        if matrices[0] != Mat2::identity(&ring) {
            return invalid(format!("first matrix {} must be the identity", matrices[0]));
        }
        if let Some(m) = matrices.iter().find(|m| !m.is_invertible(&ring)) {
            return invalid(format!("matrix {m} is not invertible over a ring of size {}", ring.size()));
        }
        Ok(NetSpec { ring, matrices })
    }

    pub fn ring(&self) -> &NetRing {
        &self.ring
    }

    pub fn block_side(&self) -> usize {
        self.ring.size()
    }

    pub fn matrices(&self) -> &[Mat2] {
        &self.matrices
    }

    /// `M + 1`.
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn permutations(&self) -> Vec<GridPermutation> {
        self.matrices
            .iter()
            .map(|m| GridPermutation::from_matrix(m, &self.ring).expect("invertible matrix"))
            .collect()
    }

    /// The algebraic net criterion on every pair of distinct matrices.
    pub fn satisfies_pair_condition(&self) -> bool {
        let n = self.matrices.len();
        (0..n).all(|i| {
            (i + 1..n).all(|j| {
                check_pair(&self.matrices[i], &self.matrices[j], &self.ring).unwrap_or(false)
            })
        })
    }

    /// Text form: a header `m <side>` or `gf <q>`, then one `a b c d` line
    /// per matrix.
    pub fn to_text(&self) -> String {
        let mut out = match &self.ring {
            NetRing::Integers(r) => format!("m {}\n", r.modulus()),
            NetRing::Field(f) => format!("gf {}\n", f.order()),
        };
        for m in &self.matrices {
            out.push_str(&format!("{} {} {} {}\n", m.a, m.b, m.c, m.d));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut ring = None;
        let mut matrices = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |message: String| Error::Parse { line: idx + 1, message };
            let toks: Vec<&str> = line.split_whitespace().collect();
            if ring.is_none() {
                let value: u64 = toks
                    .get(1)
                    .ok_or_else(|| perr("header needs a size".into()))?
                    .parse()
                    .map_err(|e| perr(format!("bad size: {e}")))?;
                ring = Some(match toks[0] {
                    "m" => NetRing::integers(value)?,
                    "gf" => NetRing::field(value as u32)?,
                    other => return Err(perr(format!("unknown ring {other:?}"))),
                });
                continue;
            }
            if toks.len() != 4 {
                return Err(perr(format!("expected four entries, got {}", toks.len())));
            }
            let v = toks
                .iter()
                .map(|t| t.parse::<i64>().map_err(|e| perr(format!("bad entry {t:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let r = ring.as_ref().unwrap();
            let e = v
                .iter()
                .map(|&x| match r {
                    NetRing::Integers(_) => Ok(r.reduce(x)),
                    // field entries are element labels, not integers
                    NetRing::Field(f) if (0..f.order() as i64).contains(&x) => Ok(x as u32),
                    NetRing::Field(f) => Err(perr(format!("label {x} outside GF({})", f.order()))),
                })
                .collect::<Result<Vec<_>>>()?;
            matrices.push(Mat2::new(e[0], e[1], e[2], e[3]));
        }
        let ring = ring.ok_or_else(|| Error::Parse { line: 0, message: "missing header".into() })?;
        NetSpec::new(ring, matrices)
    }
}

fn check_degree_against_side(m: usize, side: u64) -> Result<()> {
    if m == 0 {
        return invalid("M must be at least 1");
    }
    if side >= 2 {
        let p = lpf(side)?;
        if m as u64 > p {
            return Err(Error::ConstraintViolation(format!(
                "M = {m} exceeds the least prime factor {p} of {side}"
            )));
        }
    }
    Ok(())
}

/// Identity plus `[[0, 1], [1, z]]` for `z = 0..M` over the integers mod `side`.
pub fn example_shift_net(m: usize, side: u64) -> Result<NetSpec> {
    check_degree_against_side(m, side)?;
    let ring = NetRing::integers(side)?;
    let mut mats = vec![Mat2::identity(&ring)];
    for z in 0..m as i64 {
        mats.push(Mat2::new(0, ring.reduce(1), ring.reduce(1), ring.reduce(z)));
    }
    NetSpec::new(ring, mats)
}

/// Identity plus the involutions `[[-z, 1 - z^2], [1, z]]`, `z = 0..M`.
pub fn example_involution_net(m: usize, side: u64) -> Result<NetSpec> {
    check_degree_against_side(m, side)?;
    let ring = NetRing::integers(side)?;
    let mut mats = vec![Mat2::identity(&ring)];
    for z in 0..m as i64 {
        mats.push(Mat2::new(
            ring.reduce(-z),
            ring.reduce(1 - z * z),
            ring.reduce(1),
            ring.reduce(z),
        ));
    }
    NetSpec::new(ring, mats)
}

/// Shift net over GF(q): identity plus `[[0, 1], [1, z]]` for the first `M`
/// field labels `z`. Admits any `M <= q`.
pub fn field_shift_net(m: usize, q: u32) -> Result<NetSpec> {
    if m == 0 || m > q as usize {
        return Err(Error::ConstraintViolation(format!("M = {m} must lie in 1..={q}")));
    }
    let ring = NetRing::field(q)?;
    let mut mats = vec![Mat2::identity(&ring)];
    for z in 0..m as u32 {
        mats.push(Mat2::new(0, 1, 1, z));
    }
    NetSpec::new(ring, mats)
}

/// The integer shift net when `M <= lpf(side)`, otherwise the field shift net
/// if `side` is a supported field order.
pub fn default_net(m: usize, side: u64) -> Result<NetSpec> {
    match example_shift_net(m, side) {
        Err(Error::ConstraintViolation(msg)) => {
            if crate::algebra::SUPPORTED_FIELD_ORDERS.contains(&(side as u32)) && m as u64 <= side {
                field_shift_net(m, side as u32)
            } else {
                Err(Error::ConstraintViolation(msg))
            }
        }
        other => other,
    }
}

/// Exhaustive check of the net property over all row pairs.
pub fn verify_net(net: &NetSpec) -> bool {
    let perms = net.permutations();
    let side = net.block_side();
    let mut stamp = vec![usize::MAX; side * side];
    for (k1, p1) in perms.iter().enumerate() {
        for p2 in &perms[k1 + 1..] {
            for r1 in 0..side {
                for j in 0..side {
                    stamp[p1.forward[r1 * side + j] as usize] = r1;
                }
                for r2 in 0..side {
                    let shared = (0..side)
                        .filter(|&j| stamp[p2.forward[r2 * side + j] as usize] == r1)
                        .count();
                    if shared != 1 {
                        return false;
                    }
                }
            }
            stamp.iter_mut().for_each(|s| *s = usize::MAX);
        }
    }
    true
}
