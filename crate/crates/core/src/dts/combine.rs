//! Recursive combining of perfect DTSs and the infinite families it yields.

use num_rational::Ratio;

use super::{DifferenceTriangleSet, Ruler};
use crate::algebra::{sharply_2_transitive_group, AffinePerm};
use crate::error::{invalid, Error, Result};

/// Largest number of rulers [`generate_family`] will materialize.
pub const MATERIALIZE_CAP: u128 = 200_000;

/// Combines perfect `(L1, M)` and `(L2, M)` sets into a perfect
/// `(L1 L2 M (M+1) + L1 + L2, M)` set.
///
/// `group` must be a sharply 2-transitive group on the `M + 1` mark indices.
pub fn combine(
    x: &DifferenceTriangleSet,
    y: &DifferenceTriangleSet,
    group: &[AffinePerm],
) -> Result<DifferenceTriangleSet> {
    let m = x.degree();
    if y.degree() != m {
        return invalid(format!("degree mismatch: {} vs {}", m, y.degree()));
    }
    if !x.certify().is_perfect || !y.certify().is_perfect {
        return invalid("both inputs must be perfect");
    }
    let q = m + 1;
    if group.len() != m * q || group.iter().any(|g| g.as_slice().len() != q) {
        return invalid(format!("group must hold {} permutations of {q} points", m * q));
    }
    let x = x.normalized();
    let y = y.normalized();
    let scale = (y.num_rulers() * m * q + 1) as i64;

    let mut rulers: Vec<Ruler> = y.rulers().to_vec();
    for r in x.rulers() {
        rulers.push(scaled(r, scale));
    }
    for xr in x.rulers() {
        for yr in y.rulers() {
            for g in group {
                let marks = (0..q)
                    .map(|u| scale * xr.marks()[u] + yr.marks()[g.apply(u)])
                    .collect();
                rulers.push(Ruler::new(marks)?.normalized());
            }
        }
    }
    let z = DifferenceTriangleSet::validate(rulers)
        .map_err(|e| Error::Internal(format!("combined set failed validation: {e}")))?;
    if !z.certify().is_perfect {
        return Err(Error::Internal("combined set is not perfect".into()));
    }
    Ok(z)
}

fn scaled(r: &Ruler, k: i64) -> Ruler {
    Ruler::new(r.marks().iter().map(|m| m * k).collect()).expect("scaling keeps marks distinct")
}

/// One step of an iterated self-combination.
#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub index: u32,
    pub rulers: u128,
    pub sum_of_lengths: u128,
    pub dts: Option<DifferenceTriangleSet>,
}

/// `Z_0 = seed`, `Z_i = combine(Z_{i-1}, Z_0)` for `i = 1..=iterations`.
///
/// Sets are built while `materialize` is on and the ruler count stays under
/// [`MATERIALIZE_CAP`]; past that only the exact `(L_i, S_i)` are reported.
pub fn generate_family(
    seed: &DifferenceTriangleSet,
    iterations: u32,
    materialize: bool,
) -> Result<Vec<FamilyMember>> {
    let m = seed.degree();
    if m != 3 && m != 4 {
        return Err(Error::Unsupported(format!("families are generated for M in {{3, 4}}, got {m}")));
    }
    let cert = seed.certify();
    if !cert.is_perfect {
        return invalid("seed must be perfect");
    }
    let group = sharply_2_transitive_group(m as u32 + 1)?;
    let l0 = seed.num_rulers() as u128;
    let s0 = cert.sum_of_lengths as u128;
    let mm = (m * (m + 1)) as u128;

    let mut out = vec![FamilyMember {
        index: 0,
        rulers: l0,
        sum_of_lengths: s0,
        dts: Some(seed.clone()),
    }];
    for i in 1..=iterations {
        let prev = out.last().unwrap();
        let scale = l0 * mm + 1;
        let rulers = prev
            .rulers
            .checked_mul(l0 * mm)
            .and_then(|v| v.checked_add(prev.rulers + l0))
            .ok_or_else(|| Error::Unsupported(format!("L_{i} overflows 128 bits")))?;
        let slen = scale
            .checked_mul(scale)
            .and_then(|s2| s2.checked_mul(prev.sum_of_lengths))
            .and_then(|v| v.checked_add(s0))
            .ok_or_else(|| Error::Unsupported(format!("S_{i} overflows 128 bits")))?;
        let dts = match (&prev.dts, materialize && rulers <= MATERIALIZE_CAP) {
            (Some(p), true) => {
                let z = combine(p, seed, &group)?;
                debug_assert_eq!(z.sum_of_lengths() as u128, slen);
                Some(z)
            }
            _ => None,
        };
        out.push(FamilyMember { index: i, rulers, sum_of_lengths: slen, dts });
    }
    Ok(out)
}

/// Closed forms for member `i` of the family seeded by a perfect
/// `(l0, m)` set of sum-of-lengths `s0`:
/// `L_i = (a^{i+1} - 1) / (M(M+1))` with `a = M(M+1) l0 + 1`, and
/// `S_i = s0 L_i (M(M+1) L_i + 2) / (l0 (M(M+1) l0 + 2))`.
pub fn family_closed_form(l0: u128, s0: u128, m: u128, i: u32) -> Option<(u128, u128)> {
    let mm = m * (m + 1);
    let a = mm * l0 + 1;
    let li = (a.checked_pow(i + 1)? - 1) / mm;
    let num = s0.checked_mul(li)?.checked_mul(mm.checked_mul(li)? + 2)?;
    let den = l0 * (mm * l0 + 2);
    Some((li, num / den))
}

/// Coefficients `(quadratic, linear)` of `S(L)` along the family.
pub fn family_slen_coefficients(l0: i64, s0: i64, m: i64) -> (Ratio<i64>, Ratio<i64>) {
    let mm = m * (m + 1);
    let den = l0 * (mm * l0 + 2);
    (Ratio::new(s0 * mm, den), Ratio::new(2 * s0, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golomb4() -> DifferenceTriangleSet {
        DifferenceTriangleSet::from_marks(&[&[0, 1, 4, 6]]).unwrap()
    }

    /// Exhaustive difference check, independent of `validate`.
    fn distances_are_exactly_one_to_n(d: &DifferenceTriangleSet) -> bool {
        let mut all: Vec<i64> = Vec::new();
        for r in d.rulers() {
            let mk = r.marks();
            for i in 0..mk.len() {
                for j in 0..mk.len() {
                    if i != j {
                        all.push(mk[i] - mk[j]);
                    }
                }
            }
        }
        all.sort();
        let n = all.len() as i64 / 2;
        let expected: Vec<i64> = (-n..=n).filter(|&v| v != 0).collect();
        all == expected
    }

    #[test]
    fn self_combination_of_four_mark_ruler() {
        let g = sharply_2_transitive_group(4).unwrap();
        let z = combine(&golomb4(), &golomb4(), &g).unwrap();
        assert_eq!(z.num_rulers(), 14);
        assert_eq!(z.degree(), 3);
        assert!(distances_are_exactly_one_to_n(&z));
        let c = z.certify();
        assert!(c.is_perfect);
        assert_eq!(c.sum_of_lengths, 1020);
        assert_eq!(c.sum_of_lengths, 13 * 13 * 6 + 6);
        assert_eq!(c.scope, 6 * 14);
    }

    #[test]
    fn degree_one_combination() {
        let g = sharply_2_transitive_group(2).unwrap();
        let x = DifferenceTriangleSet::from_marks(&[&[0, 1]]).unwrap();
        let z = combine(&x, &x, &g).unwrap();
        assert_eq!(z.num_rulers(), 4);
        let c = z.certify();
        assert!(c.is_perfect);
        assert_eq!(c.distance_set, vec![1, 2, 3, 4]);
        assert_eq!(c.sum_of_lengths, 3 * 3 + 1);
    }

    #[test]
    fn slen_formula_over_seed_pairs() {
        let seeds_m1: Vec<DifferenceTriangleSet> = (1..=4)
            .map(|l| {
                let rulers = (1..=l).map(|d| Ruler::new(vec![0, d]).unwrap()).collect();
                DifferenceTriangleSet::validate(rulers).unwrap()
            })
            .collect();
        let g = sharply_2_transitive_group(2).unwrap();
        for x in &seeds_m1 {
            for y in &seeds_m1 {
                let z = combine(x, y, &g).unwrap();
                let (l1, l2) = (x.num_rulers() as i64, y.num_rulers() as i64);
                let scale = l2 * 2 + 1;
                assert_eq!(z.num_rulers() as i64, l1 * l2 * 2 + l1 + l2);
                assert_eq!(
                    z.sum_of_lengths(),
                    scale * scale * x.sum_of_lengths() + y.sum_of_lengths()
                );
                assert!(z.certify().is_perfect);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let g4 = sharply_2_transitive_group(4).unwrap();
        let not_perfect = DifferenceTriangleSet::from_marks(&[&[0, 1, 5, 7]]).unwrap();
        assert!(combine(&not_perfect, &golomb4(), &g4).is_err());
        let g3 = sharply_2_transitive_group(3).unwrap();
        assert!(combine(&golomb4(), &golomb4(), &g3).is_err());
        let m1 = DifferenceTriangleSet::from_marks(&[&[0, 1]]).unwrap();
        assert!(matches!(generate_family(&m1, 1, false), Err(Error::Unsupported(_))));
    }

    #[test]
    fn family_members_match_closed_form() {
        let fam = generate_family(&golomb4(), 3, true).unwrap();
        assert_eq!((fam[1].rulers, fam[1].sum_of_lengths), (14, 1020));
        assert_eq!((13u128 * 13 - 1) / 12, 14);
        for mem in &fam {
            let (l, s) = family_closed_form(1, 6, 3, mem.index).unwrap();
            assert_eq!((mem.rulers, mem.sum_of_lengths), (l, s));
            if let Some(d) = &mem.dts {
                assert!(d.certify().is_perfect);
                assert_eq!(d.sum_of_lengths() as u128, mem.sum_of_lengths);
                assert_eq!(d.num_rulers() as u128, mem.rulers);
            }
        }
        assert!(fam[2].dts.is_some());
        let big = generate_family(&golomb4(), 15, false).unwrap();
        assert!(big.iter().skip(1).all(|m| m.dts.is_none()));
        assert!(generate_family(&golomb4(), 40, false).is_err());
    }

    #[test]
    fn published_family_coefficients() {
        // M = 3 seed meeting 5L^2 + L at L0 = 15
        let (a, b) = family_slen_coefficients(15, 5 * 225 + 15, 3);
        assert_eq!(a, Ratio::from_integer(5) + Ratio::new(1, 91));
        assert_eq!(b, Ratio::from_integer(1) - Ratio::new(15, 91));
        // M = 4 seed meeting 9L^2 + 3L/2 at L0 = 10
        let (a, b) = family_slen_coefficients(10, 915, 4);
        assert_eq!(a, Ratio::from_integer(9) + Ratio::new(6, 101));
        assert_eq!(b, Ratio::new(3, 2) - Ratio::new(60, 101));
    }
}
