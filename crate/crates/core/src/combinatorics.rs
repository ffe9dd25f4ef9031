//! Binomials, user subsets and small enumeration helpers.

use std::fmt;

use itertools::Itertools;

/// Binomial coefficient with the convention `binom(x, y) = 0` when `x < y`,
/// `y < 0` or `x < 0`, and `binom(0, y) = 0` for `y >= 1`.
///
/// `binom(0, 0) = 1`, which keeps Pascal-type sums exact down to `t = 0`.
pub fn binom(n: i64, k: i64) -> u64 {
    if n < 0 || k < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    u64::try_from(acc).expect("binomial overflows u64")
}

/// A subset of users `[K]`, stored as a bitmask over 0-based indices.
///
/// Displayed 1-based, e.g. `{1,3}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct UserSet(pub u32);

impl UserSet {
    pub const EMPTY: UserSet = UserSet(0);

    pub fn full(k: usize) -> Self {
        assert!(k <= 32, "at most 32 users");
        if k == 32 {
            UserSet(u32::MAX)
        } else {
            UserSet((1u32 << k) - 1)
        }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        UserSet(it.into_iter().fold(0, |m, i| m | (1 << i)))
    }

    pub fn contains(self, user: usize) -> bool {
        self.0 >> user & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn with(self, user: usize) -> Self {
        UserSet(self.0 | 1 << user)
    }

    pub fn without(self, user: usize) -> Self {
        UserSet(self.0 & !(1 << user))
    }

    pub fn union(self, other: UserSet) -> Self {
        UserSet(self.0 | other.0)
    }

    pub fn difference(self, other: UserSet) -> Self {
        UserSet(self.0 & !other.0)
    }

    pub fn intersects(self, other: UserSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_subset_of(self, other: UserSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Every subset of `self`, including the empty set and `self`.
    pub fn subsets(self) -> impl Iterator<Item = UserSet> {
        let full = self.0;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full { None } else { Some((cur.wrapping_sub(full)) & full) };
            Some(UserSet(cur))
        })
    }
}

impl fmt::Debug for UserSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for UserSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.iter().map(|i| i + 1).join(","))
    }
}

/// Lexicographic order of the sorted member lists (the empty set first).
impl Ord for UserSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for UserSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// All `t`-subsets of `[k]` in lexicographic order.
pub fn subsets_of_size(k: usize, t: usize) -> Vec<UserSet> {
    (0..k).combinations(t).map(UserSet::from_indices).collect()
}

/// All subsets of `[k]` in lexicographic order.
pub fn all_subsets(k: usize) -> Vec<UserSet> {
    let mut v: Vec<UserSet> = UserSet::full(k).subsets().collect();
    v.sort();
    v
}

/// All `k`-tuples over `[n]` (0-based), in lexicographic order.
pub fn tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::with_capacity(k)];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |x| {
                    let mut next = prefix.clone();
                    next.push(x);
                    next
                })
            })
            .collect();
    }
    out
}

/// All orderings of `items`.
pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    items.iter().copied().permutations(items.len()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binom_values_and_convention() {
        assert_eq!(binom(3, 2), 3);
        assert_eq!(binom(2, 3), 0);
        assert_eq!(binom(-1, 1), 0);
        assert_eq!(binom(0, 1), 0);
        assert_eq!(binom(0, 0), 1);
        assert_eq!(binom(5, 0), 1);
        assert_eq!(binom(10, 5), 252);
        assert_eq!(binom(3, -1), 0);
    }

    #[test]
    fn pascal_aggregation_identity() {
        for k in 0..=8i64 {
            for t in 0..=k {
                for m in 1..=k {
                    let lhs: u64 = (1..=m).map(|i| binom(k - i, t)).sum();
                    assert_eq!(
                        lhs,
                        binom(k, t + 1) - binom(k - m, t + 1),
                        "K={k} t={t} m={m}"
                    );
                }
            }
        }
    }

    #[test]
    fn user_set_order_and_display() {
        let s = subsets_of_size(3, 2);
        let shown: Vec<String> = s.iter().map(|w| w.to_string()).collect();
        assert_eq!(shown, ["{1,2}", "{1,3}", "{2,3}"]);
        let all = all_subsets(2);
        let shown: Vec<String> = all.iter().map(|w| w.to_string()).collect();
        assert_eq!(shown, ["{}", "{1}", "{1,2}", "{2}"]);
    }

    #[test]
    fn tuples_counts() {
        assert_eq!(tuples(3, 2).len(), 9);
        assert_eq!(tuples(2, 0).len(), 1);
        assert_eq!(tuples(2, 3)[0], vec![0, 0, 0]);
        assert_eq!(tuples(2, 3)[1], vec![0, 0, 1]);
    }

    proptest! {
        #[test]
        fn subsets_enumerates_power_set(mask in 0u32..(1 << 10)) {
            let set = UserSet(mask);
            let subs: Vec<_> = set.subsets().collect();
            prop_assert_eq!(subs.len(), 1usize << set.len());
            prop_assert!(subs.iter().all(|s| s.is_subset_of(set)));
        }

        #[test]
        fn subsets_of_size_count(k in 0usize..9, t in 0usize..9) {
            prop_assert_eq!(subsets_of_size(k, t).len() as u64, binom(k as i64, t as i64));
        }
    }
}
