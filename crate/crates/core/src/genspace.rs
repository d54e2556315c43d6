//! Search spaces for campaigns: every labelled digraph on `n` vertices in
//! arc-mask order, seeded random digraphs, and a brute-force canonical form.
//!
//! Bit `i` of an [`ArcMask`] stands for the `i`-th ordered pair `(u, v)`,
//! `u != v`, in lexicographic order with `u` major. The instance id `"n:mask"`
//! printed in reports is this mask in decimal.

use std::fmt;
use std::ops::Range;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::digraph::Digraph;
use crate::error::{Error, Result};

/// Largest `n` whose arc masks fit in 128 bits.
pub const MASK_CAP: usize = 11;
/// Largest `n` the exhaustive enumerator accepts.
pub const ENUMERATION_CAP: usize = 7;
/// Largest `n` for the permutation sweep in [`canonical_form`].
pub const CANONICAL_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArcMask {
    pub n: usize,
    pub bits: u128,
}

impl ArcMask {
    pub fn pair_count(n: usize) -> usize {
        n * n.saturating_sub(1)
    }

    /// Bit index of the arc `u -> v` (`u != v`).
    pub fn pair_index(n: usize, u: usize, v: usize) -> usize {
        debug_assert!(u != v && u < n && v < n);
        u * (n - 1) + if v > u { v - 1 } else { v }
    }

    pub fn of(d: &Digraph) -> Result<Self> {
        let n = d.n();
        if n > MASK_CAP {
            return Err(Error::CapExceeded { n, cap: MASK_CAP });
        }
        let bits = d.arcs().fold(0u128, |m, (u, v)| m | 1u128 << Self::pair_index(n, u, v));
        Ok(ArcMask { n, bits })
    }

    pub fn to_digraph(self) -> Digraph {
        let n = self.n;
        if n < 2 {
            return Digraph::from_out_masks(n, vec![0; n]);
        }
        let width = n - 1;
        let chunk_mask = (1u128 << width) - 1;
        let out = (0..n)
            .map(|u| {
                let chunk = (self.bits >> (u * width) & chunk_mask) as u64;
                let low = chunk & ((1u64 << u) - 1);
                let high = (chunk >> u) << (u + 1);
                low | high
            })
            .collect();
        Digraph::from_out_masks(n, out)
    }

    /// `"n:mask"`.
    pub fn id(self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ArcMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.n, self.bits)
    }
}

/// Number of labelled loop-free digraphs on `n` vertices, `2^(n(n-1))`.
pub fn digraph_count(n: usize) -> Result<u128> {
    if n > ENUMERATION_CAP {
        return Err(Error::CapExceeded { n, cap: ENUMERATION_CAP });
    }
    Ok(1u128 << ArcMask::pair_count(n))
}

/// All labelled digraphs on `n` vertices in ascending mask order.
pub fn enumerate_digraphs(n: usize) -> Result<impl Iterator<Item = Digraph>> {
    let total = digraph_count(n)?;
    Ok(enumerate_range(n, 0..total))
}

/// The digraphs whose masks fall in `range`. Disjoint ranges can be swept
/// independently.
pub fn enumerate_range(n: usize, range: Range<u128>) -> impl Iterator<Item = Digraph> {
    range.map(move |bits| ArcMask { n, bits }.to_digraph())
}

/// The source-free subsequence of [`enumerate_digraphs`].
pub fn enumerate_source_free(n: usize) -> Result<impl Iterator<Item = Digraph>> {
    Ok(enumerate_digraphs(n)?.filter(Digraph::is_source_free))
}

/// Each ordered pair becomes an arc independently with probability `p`. The
/// generator is seeded from `(seed, n, p)` so equal inputs give equal graphs.
pub fn random_digraph(n: usize, p: f64, seed: u64) -> Result<Digraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(n as u64).to_le_bytes());
    key[16..24].copy_from_slice(&p.to_bits().to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    let mut arcs = Vec::new();
    for u in 0..n {
        for v in (0..n).filter(|&v| v != u) {
            if rng.random_bool(p) {
                arcs.push((u, v));
            }
        }
    }
    Digraph::from_arcs(n, &arcs)
}

/// Smallest arc mask over all relabellings of `d`.
pub fn canonical_form(d: &Digraph) -> Result<ArcMask> {
    let n = d.n();
    if n > CANONICAL_CAP {
        return Err(Error::CapExceeded { n, cap: CANONICAL_CAP });
    }
    let arcs: Vec<_> = d.arcs().collect();
    let best = (0..n)
        .permutations(n)
        .map(|perm| {
            arcs.iter()
                .fold(0u128, |m, &(u, v)| m | 1u128 << ArcMask::pair_index(n, perm[u], perm[v]))
        })
        .min()
        .unwrap_or(0);
    Ok(ArcMask { n, bits: best })
}

/// Applies the relabelling `v -> perm[v]`.
pub fn relabel(d: &Digraph, perm: &[usize]) -> Result<Digraph> {
    let arcs: Vec<_> = d.arcs().map(|(u, v)| (perm[u], perm[v])).collect();
    Digraph::from_arcs(d.n(), &arcs)
}
