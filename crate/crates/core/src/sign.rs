//! Centralized sign bookkeeping.
//!
//! Every graded sign in this crate flows through the helpers below, so the
//! conventions interlock and cannot drift between modules. The conventions:
//!
//! * Wedge factors of odd degree anticommute; reordering a list of odd
//!   symbols into strictly increasing order contributes the sign of the
//!   permutation ([`merge_sign`]).
//! * Graded commutativity: `x ∧ y = (-1)^{|x||y|} y ∧ x` ([`koszul`]).
//! * Bracket grading: `[x,y] = -(-1)^{(|x|+1)(|y|+1)} [y,x]`; the shifted
//!   degrees `|x|+1` are what enter every bracket sign.
//! * Simplex orientation: forms on the n-simplex are written in the
//!   coordinates `t_0..t_{n-1}`; integration is positive on
//!   `dt_1 ∧ … ∧ dt_n`.

/// `(-1)^n` as `i8`, for possibly negative `n`.
pub fn pow_sign(n: i64) -> i8 {
    if n.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Koszul sign `(-1)^{ab}`.
pub fn koszul(a: i64, b: i64) -> i8 {
    pow_sign(a * b)
}

/// Merges two strictly increasing lists of odd symbols, returning the merged
/// list and the permutation sign, or `None` if a symbol repeats (odd square).
pub fn merge_sign<T: Ord + Copy>(left: &[T], right: &[T]) -> Option<(Vec<T>, i8)> {
    let mut out = Vec::with_capacity(left.len() + right.len());
    let mut sign = 1i8;
    let mut i = 0;
    let mut j = 0;
    while i < left.len() && j < right.len() {
        match left[i].cmp(&right[j]) {
            std::cmp::Ordering::Less => {
                out.push(left[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                // right[j] jumps over the remaining left factors
                if (left.len() - i) % 2 == 1 {
                    sign = -sign;
                }
                out.push(right[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => return None,
        }
    }
    out.extend_from_slice(&left[i..]);
    out.extend_from_slice(&right[j..]);
    Some((out, sign))
}

/// Sign for inserting one odd symbol in front of a strictly increasing list,
/// i.e. the parity of moving it to its sorted slot. `None` on repetition.
pub fn insert_sign<T: Ord + Copy>(item: T, list: &[T]) -> Option<(Vec<T>, i8)> {
    merge_sign(&[item], list)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_basic() {
        assert_eq!(merge_sign(&[0u8], &[1u8]), Some((vec![0, 1], 1)));
        assert_eq!(merge_sign(&[1u8], &[0u8]), Some((vec![0, 1], -1)));
        assert_eq!(merge_sign(&[1u8], &[1u8]), None);
        // dt1 dt3 merged with dt0 dt2: count transpositions explicitly
        let (m, s) = merge_sign(&[1u8, 3], &[0u8, 2]).unwrap();
        assert_eq!(m, vec![0, 1, 2, 3]);
        // 0 passes 2 symbols, 2 passes 1 symbol: (-1)^3
        assert_eq!(s, -1);
    }

    #[test]
    fn koszul_parity() {
        assert_eq!(koszul(-1, 1), -1);
        assert_eq!(koszul(-2, 1), 1);
        assert_eq!(pow_sign(-3), -1);
    }
}
