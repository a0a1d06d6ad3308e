use crate::error::{Error, Result};

/// Counting bound `L (M+1) M / 2` on the scope; valid for every `M`.
pub fn trivial_scope_bound(l: u64, m: u64) -> u64 {
    l * (m + 1) * m / 2
}

fn check_degree(m: u64) -> Result<()> {
    if (1..=4).contains(&m) {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "sharpened bounds are tabulated for M in 1..=4, got {m}"
        )))
    }
}

/// Best known lower bound on the scope of an `(L, M)`-DTS, `M <= 4`.
pub fn scope_lower_bound(l: u64, m: u64) -> Result<u64> {
    check_degree(m)?;
    Ok(match m {
        1 => l,
        2 => match l % 4 {
            0 | 1 => 3 * l,
            _ => 3 * l + 1,
        },
        3 => 6 * l,
        _ => {
            if l.is_multiple_of(2) {
                10 * l
            } else {
                10 * l + 1
            }
        }
    })
}

/// Lower bound on the sum of ruler lengths of an `(L, M)`-DTS, `M <= 4`.
pub fn sum_of_lengths_lower_bound(l: u64, m: u64) -> Result<u64> {
    check_degree(m)?;
    Ok(match m {
        1 => l * (l + 1) / 2,
        2 => match l % 4 {
            0 | 1 => 3 * l * (3 * l + 1) / 4,
            // (3L-1)3L/4 + (3L+1)/2 over a common denominator
            _ => (9 * l * l + 3 * l + 2) / 4,
        },
        3 => 5 * l * l + l,
        _ => (18 * l * l + 3 * l + (l % 2)) / 2,
    })
}

/// Sum-of-lengths bound usable for any `M`: the sharpened bound when
/// tabulated, else `L` distinct lengths each at least the optimal ruler length.
pub(crate) fn slen_bound_any(l: u64, m: u64) -> u64 {
    if l == 0 {
        return 0;
    }
    if let Ok(b) = sum_of_lengths_lower_bound(l, m) {
        return b;
    }
    let base = golomb_length(m as usize + 1).unwrap_or(m);
    l * base + l * (l - 1) / 2
}

/// Optimal (Golomb) length of a single ruler with `marks` marks.
pub fn golomb_length(marks: usize) -> Option<u64> {
    const LENGTHS: [u64; 11] = [0, 0, 1, 3, 6, 11, 17, 25, 34, 44, 55];
    LENGTHS.get(marks).copied().filter(|_| marks >= 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scope_bounds() {
        assert_eq!(scope_lower_bound(2, 2).unwrap(), 7);
        assert_eq!(scope_lower_bound(1, 3).unwrap(), 6);
        assert_eq!(scope_lower_bound(1, 1).unwrap(), 1);
        assert_eq!(scope_lower_bound(3, 2).unwrap(), 10);
        assert_eq!(scope_lower_bound(4, 2).unwrap(), 12);
        assert_eq!(scope_lower_bound(3, 4).unwrap(), 31);
        assert!(matches!(scope_lower_bound(2, 5), Err(Error::Unsupported(_))));
        assert_eq!(trivial_scope_bound(2, 5), 30);
    }

    #[test]
    fn slen_bounds() {
        assert_eq!(sum_of_lengths_lower_bound(2, 2).unwrap(), 11);
        // (3L-1)3L/4 + (3L+1)/2 at L = 2, evaluated with fractions
        assert_eq!(5.0 * 6.0 / 4.0 + 7.0 / 2.0, 11.0);
        assert_eq!(sum_of_lengths_lower_bound(3, 2).unwrap(), 23);
        assert_eq!(sum_of_lengths_lower_bound(1, 2).unwrap(), 3);
        assert_eq!(sum_of_lengths_lower_bound(1, 3).unwrap(), 6);
        assert_eq!(sum_of_lengths_lower_bound(10, 4).unwrap(), 915);
        assert_eq!(sum_of_lengths_lower_bound(1, 4).unwrap(), 11);
        assert_eq!(sum_of_lengths_lower_bound(5, 1).unwrap(), 15);
        assert!(sum_of_lengths_lower_bound(1, 0).is_err());
    }

    #[test]
    fn slen_bounds_are_exact_rationals() {
        // each closed form must evaluate to an integer for all L
        for l in 1..200u64 {
            let lf = l as f64;
            let m2 = if l % 4 < 2 {
                3.0 * lf * (3.0 * lf + 1.0) / 4.0
            } else {
                (3.0 * lf - 1.0) * 3.0 * lf / 4.0 + (3.0 * lf + 1.0) / 2.0
            };
            assert_eq!(m2, sum_of_lengths_lower_bound(l, 2).unwrap() as f64, "L={l}");
            let m4 = 9.0 * lf * lf + 1.5 * lf + if l % 2 == 1 { 0.5 } else { 0.0 };
            assert_eq!(m4, sum_of_lengths_lower_bound(l, 4).unwrap() as f64, "L={l}");
        }
    }
}
