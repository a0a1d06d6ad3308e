//! Rulers and difference triangle sets.
//!
//! An `(L, M)`-DTS is a set of `L` rulers with `M + 1` marks each such that
//! every signed difference between two marks of the same ruler occurs only
//! once across the whole set. The rulers are the delay structure of a code.

mod bounds;
mod combine;
mod search;

pub use bounds::{
    golomb_length, scope_lower_bound, sum_of_lengths_lower_bound, trivial_scope_bound,
};
pub use combine::{
    combine, family_closed_form, family_slen_coefficients, generate_family, FamilyMember,
    MATERIALIZE_CAP,
};
pub use search::{
    search_optimal, Objective, SearchOutcome, SearchParams, SearchStatus, MAX_SCOPE_CAP,
};

use std::collections::HashMap;
use std::fmt;

use num_rational::Ratio;

use crate::error::{invalid, Error, Result};

/// An ordered list of distinct integer marks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ruler {
    marks: Vec<i64>,
}

impl Ruler {
    pub fn new(marks: Vec<i64>) -> Result<Self> {
        if marks.len() < 2 {
            return Err(Error::InvalidRuler(format!(
                "a ruler needs at least two marks, got {}",
                marks.len()
            )));
        }
        let mut sorted = marks.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidRuler(format!("mark {} repeated in {marks:?}", w[0])));
        }
        Ok(Ruler { marks })
    }

    pub fn marks(&self) -> &[i64] {
        &self.marks
    }

    /// Number of marks, `M + 1`.
    pub fn order(&self) -> usize {
        self.marks.len()
    }

    /// Largest difference between two marks.
    pub fn length(&self) -> i64 {
        let max = self.marks.iter().max().unwrap();
        let min = self.marks.iter().min().unwrap();
        max - min
    }

    pub fn is_normalized(&self) -> bool {
        self.marks[0] == 0 && self.marks.windows(2).all(|w| w[0] < w[1])
    }

    /// Sorted and shifted so the first mark is zero. Keeps the distance set.
    pub fn normalized(&self) -> Ruler {
        let mut marks = self.marks.clone();
        marks.sort_unstable();
        let base = marks[0];
        marks.iter_mut().for_each(|m| *m -= base);
        Ruler { marks }
    }

    /// Mirror image `length - d`, normalized.
    pub fn reflected(&self) -> Ruler {
        let n = self.normalized();
        let len = n.length();
        let mut marks: Vec<i64> = n.marks.iter().rev().map(|m| len - m).collect();
        marks.sort_unstable();
        Ruler { marks }
    }

    /// Positive differences between all mark pairs.
    pub fn distances(&self) -> impl Iterator<Item = i64> + '_ {
        self.marks
            .iter()
            .enumerate()
            .flat_map(move |(i, a)| self.marks[i + 1..].iter().map(move |b| (a - b).abs()))
    }
}

impl fmt::Display for Ruler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.marks.iter().map(|m| m.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A validated `(L, M)` difference triangle set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DifferenceTriangleSet {
    rulers: Vec<Ruler>,
}

/// Summary statistics of a DTS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DtsCertificate {
    pub scope: i64,
    pub sum_of_lengths: i64,
    pub is_perfect: bool,
    pub distance_set: Vec<i64>,
}

impl DifferenceTriangleSet {
    /// Checks the defining property and returns the set.
    pub fn validate(rulers: Vec<Ruler>) -> Result<Self> {
        let dts = Self::new_unchecked(rulers)?;
        let mut seen: HashMap<i64, (usize, usize, usize)> = HashMap::new();
        for (l, ruler) in dts.rulers.iter().enumerate() {
            let marks = ruler.marks();
            for (i, a) in marks.iter().enumerate() {
                for (j, b) in marks.iter().enumerate().skip(i + 1) {
                    let d = (b - a).abs();
                    if let Some(&first) = seen.get(&d) {
                        return Err(Error::NotADts { difference: d, first, second: (l, i, j) });
                    }
                    seen.insert(d, (l, i, j));
                }
            }
        }
        Ok(dts)
    }

    /// Checks only shape (non-empty, common order, distinct marks per ruler).
    ///
    /// Used to push known-bad inputs through downstream verifiers.
    pub fn new_unchecked(rulers: Vec<Ruler>) -> Result<Self> {
        let Some(first) = rulers.first() else {
            return invalid("a DTS needs at least one ruler");
        };
        let order = first.order();
        if let Some(r) = rulers.iter().find(|r| r.order() != order) {
            return Err(Error::InvalidRuler(format!(
                "ruler {r} has {} marks, expected {order}",
                r.order()
            )));
        }
        Ok(DifferenceTriangleSet { rulers })
    }

    /// Convenience constructor from mark lists.
    pub fn from_marks(marks: &[&[i64]]) -> Result<Self> {
        let rulers = marks
            .iter()
            .map(|m| Ruler::new(m.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::validate(rulers)
    }

    pub fn rulers(&self) -> &[Ruler] {
        &self.rulers
    }

    /// `L`, the number of rulers.
    pub fn num_rulers(&self) -> usize {
        self.rulers.len()
    }

    /// `M`, one less than the ruler order.
    pub fn degree(&self) -> usize {
        self.rulers[0].order() - 1
    }

    pub fn is_normalized(&self) -> bool {
        self.rulers.iter().all(Ruler::is_normalized)
    }

    pub fn normalized(&self) -> Self {
        DifferenceTriangleSet {
            rulers: self.rulers.iter().map(Ruler::normalized).collect(),
        }
    }

    pub fn scope(&self) -> i64 {
        self.rulers.iter().map(Ruler::length).max().unwrap()
    }

    pub fn sum_of_lengths(&self) -> i64 {
        self.rulers.iter().map(Ruler::length).sum()
    }

    pub fn certify(&self) -> DtsCertificate {
        let mut distance_set: Vec<i64> = self.rulers.iter().flat_map(|r| r.distances()).collect();
        distance_set.sort_unstable();
        let l = self.num_rulers() as i64;
        let m = self.degree() as i64;
        let full = l * (m + 1) * m / 2;
        let is_perfect =
            distance_set.len() as i64 == full && distance_set.iter().copied().eq(1..=full);
        DtsCertificate {
            scope: self.scope(),
            sum_of_lengths: self.sum_of_lengths(),
            is_perfect,
            distance_set,
        }
    }

    /// Per-ruler reflection to the lexicographically smaller mirror, rulers
    /// sorted by length. Two DTSs equal up to those symmetries share this form.
    pub fn canonical(&self) -> Self {
        let mut rulers: Vec<Ruler> = self
            .rulers
            .iter()
            .map(|r| {
                let n = r.normalized();
                let m = r.reflected();
                n.min(m)
            })
            .collect();
        rulers.sort_by(|a, b| a.length().cmp(&b.length()).then_with(|| a.cmp(b)));
        DifferenceTriangleSet { rulers }
    }

    /// Parses the text format: one ruler per line, whitespace-separated marks,
    /// `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rulers = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let marks = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<i64>().map_err(|e| Error::Parse {
                        line: idx + 1,
                        message: format!("bad mark {t:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rulers.push(Ruler::new(marks)?);
        }
        Self::validate(rulers)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rulers {
            let parts: Vec<String> = r.marks().iter().map(|m| m.to_string()).collect();
            out.push_str(&parts.join(" "));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for DifferenceTriangleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.rulers.iter().map(|r| r.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl DtsCertificate {
    pub fn to_text(&self) -> String {
        let d: Vec<String> = self.distance_set.iter().map(|x| x.to_string()).collect();
        format!(
            "scope: {}\nslen: {}\nperfect: {}\ndistances: {}\n",
            self.scope,
            self.sum_of_lengths,
            self.is_perfect,
            d.join(" ")
        )
    }
}

/// Memory figures for a code built on a DTS with blocks of side `block_side`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryMetrics {
    /// `(S/L)^2 * sum of ruler lengths`, in bits.
    pub encode_mem: u64,
    /// Window footprint `(S/L)^2 * L * scope`, in bits.
    pub decode_mem: u64,
    /// `encode_mem` over the `L = 1` reference `(S/L)^2 L^2 len1`; `None`
    /// when the optimal single-ruler length is not tabulated.
    pub ratio_vs_single_ruler: Option<Ratio<u64>>,
}

pub fn memory_metrics(dts: &DifferenceTriangleSet, block_side: u64) -> Result<MemoryMetrics> {
    if block_side == 0 {
        return invalid("block side must be positive");
    }
    let area = block_side * block_side;
    let slen = dts.sum_of_lengths() as u64;
    let l = dts.num_rulers() as u64;
    let encode_mem = area * slen;
    let decode_mem = area * l * dts.scope() as u64;
    let ratio_vs_single_ruler = golomb_length(dts.degree() + 1)
        .map(|len1| Ratio::new(encode_mem, area * l * l * len1));
    Ok(MemoryMetrics { encode_mem, decode_mem, ratio_vs_single_ruler })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_distinct(dts: &DifferenceTriangleSet) -> bool {
        let mut diffs = Vec::new();
        for r in dts.rulers() {
            for a in r.marks() {
                for b in r.marks() {
                    if a != b {
                        diffs.push(a - b);
                    }
                }
            }
        }
        let n = diffs.len();
        diffs.sort_unstable();
        diffs.dedup();
        diffs.len() == n
    }

    #[test]
    fn validates_reference_sets() {
        let reference = DifferenceTriangleSet::from_marks(&[&[0, 6, 7], &[0, 2, 5]]).unwrap();
        assert_eq!(reference.num_rulers(), 2);
        assert_eq!(reference.degree(), 2);
        assert_eq!(reference.scope(), 7);
        assert_eq!(reference.sum_of_lengths(), 12);
        assert!(brute_distinct(&reference));

        let g = DifferenceTriangleSet::from_marks(&[&[0, 1, 4, 6]]).unwrap();
        let cert = g.certify();
        assert!(cert.is_perfect);
        assert_eq!(cert.distance_set, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn rejects_arithmetic_progression() {
        let err = DifferenceTriangleSet::from_marks(&[&[0, 1, 2]]).unwrap_err();
        match err {
            Error::NotADts { difference, .. } => assert_eq!(difference, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_rulers() {
        assert!(matches!(Ruler::new(vec![0, 3, 3]), Err(Error::InvalidRuler(_))));
        assert!(matches!(
            DifferenceTriangleSet::from_marks(&[&[0, 1], &[0, 2, 7]]),
            Err(Error::InvalidRuler(_))
        ));
    }

    #[test]
    fn certificates() {
        let reference = DifferenceTriangleSet::from_marks(&[&[0, 6, 7], &[0, 2, 5]]).unwrap();
        let c = reference.certify();
        assert_eq!(c.scope, 7);
        assert_eq!(c.sum_of_lengths, 12);
        assert_eq!(c.distance_set, vec![1, 2, 3, 5, 6, 7]);
        assert!(!c.is_perfect);

        let l1 = DifferenceTriangleSet::from_marks(&[&[0, 1], &[0, 2], &[0, 3]]).unwrap();
        let c = l1.certify();
        assert!(c.is_perfect);
        assert_eq!(c.distance_set, vec![1, 2, 3]);

        let g = DifferenceTriangleSet::from_marks(&[&[0, 1, 4, 6]]).unwrap().certify();
        assert_eq!((g.scope, g.sum_of_lengths, g.is_perfect), (6, 6, true));
    }

    #[test]
    fn perfect_iff_trivial_scope_bound_met() {
        let cases: Vec<Vec<Vec<i64>>> = vec![
            vec![vec![0, 1, 4, 6]],
            vec![vec![0, 6, 7], vec![0, 2, 5]],
            vec![vec![0, 1], vec![0, 2]],
            vec![vec![0, 1], vec![0, 3]],
            vec![vec![0, 1, 3]],
            vec![vec![0, 1, 4]],
            vec![vec![0, 1, 4, 9, 11]],
        ];
        for c in cases {
            let refs: Vec<&[i64]> = c.iter().map(|v| v.as_slice()).collect();
            let d = DifferenceTriangleSet::from_marks(&refs).unwrap();
            let cert = d.certify();
            let bound = trivial_scope_bound(d.num_rulers() as u64, d.degree() as u64) as i64;
            assert!(cert.scope >= bound);
            assert_eq!(cert.is_perfect, cert.scope == bound, "{d}");
        }
    }

    #[test]
    fn text_round_trip() {
        let text = "# example\n0 6 7\n\n0 2 5\n";
        let d = DifferenceTriangleSet::parse(text).unwrap();
        assert_eq!(d.to_text(), "0 6 7\n0 2 5\n");
        assert!(matches!(
            DifferenceTriangleSet::parse("0 x 3"),
            Err(Error::Parse { line: 1, .. })
        ));
        let cert = d.certify().to_text();
        assert!(cert.contains("scope: 7\nslen: 12\nperfect: false\ndistances: 1 2 3 5 6 7"));
    }

    #[test]
    fn canonical_form_merges_reflections() {
        let a = DifferenceTriangleSet::from_marks(&[&[0, 2, 5, 6]]).unwrap();
        let b = DifferenceTriangleSet::from_marks(&[&[0, 1, 4, 6]]).unwrap();
        assert_eq!(a.canonical(), b.canonical());
        let c = DifferenceTriangleSet::from_marks(&[&[0, 6, 7], &[0, 2, 5]]).unwrap();
        assert_eq!(c.canonical().to_text(), "0 2 5\n0 1 7\n");
    }

    #[test]
    fn memory_figures() {
        let reference = DifferenceTriangleSet::from_marks(&[&[0, 6, 7], &[0, 2, 5]]).unwrap();
        let m = memory_metrics(&reference, 10).unwrap();
        assert_eq!(m.encode_mem, 1200);
        assert_eq!(m.decode_mem, 100 * 2 * 7);
        assert_eq!(m.ratio_vs_single_ruler, Some(Ratio::new(12, 4 * 3)));

        let g = DifferenceTriangleSet::from_marks(&[&[0, 1, 4, 6]]).unwrap();
        assert_eq!(memory_metrics(&g, 1).unwrap().encode_mem, 6);
        assert!(memory_metrics(&g, 0).is_err());
    }

    #[test]
    fn single_difference_family_ratio_tends_to_half() {
        for l in [10u64, 100, 1000] {
            let rulers: Vec<Ruler> =
                (1..=l as i64).map(|d| Ruler::new(vec![0, d]).unwrap()).collect();
            let dts = DifferenceTriangleSet::validate(rulers).unwrap();
            let r = memory_metrics(&dts, 3).unwrap().ratio_vs_single_ruler.unwrap();
            assert_eq!(r, Ratio::new(l + 1, 2 * l));
        }
    }
}
