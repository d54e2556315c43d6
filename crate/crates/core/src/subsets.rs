use crate::digraph::VertexSet;

/// Subsets of `universe` ordered by size, and within one size by ascending
/// bitmask value.
pub(crate) fn by_size(universe: VertexSet) -> impl Iterator<Item = VertexSet> {
    let members = universe.to_vec();
    let r = members.len();
    (0..=r).flat_map(move |k| {
        let members = members.clone();
        combinations(r, k).map(move |idx| deposit(idx, &members))
    })
}

/// All `k`-bit masks below `2^r` in ascending order (Gosper's hack).
fn combinations(r: usize, k: usize) -> impl Iterator<Item = u64> {
    let limit = 1u64 << r;
    let mut next = if k == 0 { Some(0) } else { Some((1u64 << k) - 1) };
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let carry = cur + c;
            let succ = (((carry ^ cur) >> 2) / c) | carry;
            (succ < limit).then_some(succ)
        };
        Some(cur)
    })
}

/// Spreads the low bits of `idx` onto the positions listed in `members`.
/// `members` is ascending, so numeric order of `idx` is preserved.
fn deposit(idx: u64, members: &[usize]) -> VertexSet {
    VertexSet::from_iter(VertexSet::from_bits(idx).iter().map(|i| members[i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn visits_every_subset_once_in_size_order() {
        let universe: VertexSet = [1, 4, 6, 9].into_iter().collect();
        let all: Vec<_> = by_size(universe).collect();
        assert_eq!(all.len(), 16);
        assert!(all.windows(2).all(|w| (w[0].len(), w[0].bits()) < (w[1].len(), w[1].bits())));
        assert!(all.iter().all(|s| s.is_subset(universe)));
    }

    #[test]
    fn empty_universe() {
        assert_eq!(by_size(VertexSet::EMPTY).collect::<Vec<_>>(), vec![VertexSet::EMPTY]);
    }

    #[test]
    fn combination_counts() {
        for r in 0..8 {
            for k in 0..=r {
                let n = combinations(r, k).count() as u64;
                let expected = (0..k as u64).fold(1u64, |acc, i| acc * (r as u64 - i) / (i + 1));
                assert_eq!(n, expected, "C({r},{k})");
            }
        }
    }
}
