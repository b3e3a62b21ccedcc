//! Exact integer combinatorics: partitions, multi-index lists, the
//! refinement counts `R_{λ,μ}`, and factorial helpers.
//!
//! A partition `λ` *refines* `μ` (written `λ ≤_R μ`) when there is a
//! surjection `f: [len(λ)] → [len(μ)]` whose fibers sum the parts of `λ`
//! to the parts of `μ`. `refinement_count` counts those surjections by
//! brute force — partition lengths stay below 8 everywhere this crate is
//! used, so `len(μ)^{len(λ)}` enumeration is cheap and leaves nothing to
//! get wrong.

use num::bigint::BigInt;
use num::One;
use std::cmp::Ordering;
use std::fmt;

/// An integer partition: weakly decreasing positive parts.
///
/// The empty partition is valid and serves as the degree-0 (constant)
/// basis atom. The `Ord` implementation is the canonical enumeration
/// order used for all matrix layouts: weight ascending, then reverse
/// lexicographic within a weight class, so coarser partitions sort first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    /// Builds a partition, sorting the given parts. Panics on a zero part.
    pub fn new(mut parts: Vec<u32>) -> Self {
        assert!(parts.iter().all(|&p| p > 0), "partition parts must be positive");
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition { parts }
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn weight(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// `λ! = Π_i λ_i!`
    pub fn factorial(&self) -> BigInt {
        self.parts.iter().map(|&p| factorial(p as u64)).product()
    }

    /// Multiplicity of each distinct part value, e.g. `(2,2,1) → [(2,2),(1,1)]`.
    pub fn multiplicities(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = Vec::new();
        for &p in &self.parts {
            match out.last_mut() {
                Some((v, m)) if *v == p => *m += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }
}

impl Ord for Partition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight()
            .cmp(&other.weight())
            // reverse-lex within a weight class: (2) sorts before (1,1)
            .then_with(|| other.parts.cmp(&self.parts))
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Partition {
    /// CLI/CSV form: comma-joined parts in brackets, `[]` for empty.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

/// A multi-index `α ∈ ℕ^d`, not identically zero.
pub type MultiIndex = Vec<u32>;

/// A weakly decreasing (lexicographically) list of nonzero multi-indices
/// in a fixed ambient dimension; the index of a monomial/power mean atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndexList {
    entries: Vec<MultiIndex>,
    ambient_dim: usize,
}

impl MultiIndexList {
    /// Builds a list, sorting entries lexicographically descending.
    /// Panics if any entry is zero or has the wrong dimension.
    pub fn new(mut entries: Vec<MultiIndex>, ambient_dim: usize) -> Self {
        assert!(ambient_dim >= 1, "ambient dimension must be positive");
        for e in &entries {
            assert_eq!(e.len(), ambient_dim, "multi-index dimension mismatch");
            assert!(e.iter().any(|&c| c > 0), "zero multi-index not allowed");
        }
        entries.sort_unstable_by(|a, b| b.cmp(a));
        MultiIndexList { entries, ambient_dim }
    }

    /// The empty list (degree-0 atom) in the given ambient dimension.
    pub fn empty(ambient_dim: usize) -> Self {
        MultiIndexList { entries: Vec::new(), ambient_dim }
    }

    /// Sugar for ambient dimension 1: each part becomes the 1-tuple `(p)`.
    pub fn from_parts(parts: &[u32]) -> Self {
        MultiIndexList::new(parts.iter().map(|&p| vec![p]).collect(), 1)
    }

    pub fn entries(&self) -> &[MultiIndex] {
        &self.entries
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `|Λ| = Σ_i |α_i|`
    pub fn weight(&self) -> u32 {
        self.entries.iter().map(|e| e.iter().sum::<u32>()).sum()
    }
}

impl Ord for MultiIndexList {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight()
            .cmp(&other.weight())
            .then_with(|| other.entries.cmp(&self.entries))
            .then_with(|| self.ambient_dim.cmp(&other.ambient_dim))
    }
}

impl PartialOrd for MultiIndexList {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndexList {
    /// CLI form: semicolon-joined tuples in brackets, e.g. `[(2,0);(1,1)]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            write!(f, "(")?;
            for (j, c) in e.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, ")")?;
        }
        write!(f, "]")
    }
}

/// All partitions of weight exactly `w`, reverse-lexicographic.
pub fn partitions_of_weight(w: u32) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(remaining: u32, max_part: u32, current: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition { parts: current.clone() });
            return;
        }
        let hi = max_part.min(remaining);
        for p in (1..=hi).rev() {
            current.push(p);
            rec(remaining - p, p, current, out);
            current.pop();
        }
    }
    rec(w, w, &mut current, &mut out);
    out
}

/// All partitions of weight at most `d`, in canonical order
/// (weight ascending, reverse-lexicographic within each weight).
/// Includes the empty partition.
pub fn partitions_up_to(d: u32) -> Vec<Partition> {
    let mut out = vec![Partition::empty()];
    for w in 1..=d {
        out.extend(partitions_of_weight(w));
    }
    out
}

/// The refinement count `R_{λ,μ}`: the number of surjections
/// `f: [len(λ)] → [len(μ)]` with `Σ_{j ∈ f⁻¹(i)} λ_j = μ_i` for every `i`.
/// Zero when `λ` is not a refinement of `μ`.
pub fn refinement_count(lambda: &Partition, mu: &Partition) -> u64 {
    if lambda.weight() != mu.weight() || lambda.len() < mu.len() {
        return 0;
    }
    if lambda.is_empty() && mu.is_empty() {
        return 1; // the empty map is the unique (vacuous) surjection
    }
    let n = lambda.len();
    let m = mu.len();
    let mut count = 0u64;
    // Enumerate all maps [n] → [m] as base-m counters.
    let mut f = vec![0usize; n];
    loop {
        let mut sums = vec![0u32; m];
        for (j, &fi) in f.iter().enumerate() {
            sums[fi] += lambda.parts[j];
        }
        // Fiber-sum match implies surjectivity here: every μ_i > 0.
        if sums.iter().zip(mu.parts.iter()).all(|(s, p)| s == p) {
            count += 1;
        }
        // increment
        let mut k = 0;
        loop {
            if k == n {
                return count;
            }
            f[k] += 1;
            if f[k] < m {
                break;
            }
            f[k] = 0;
            k += 1;
        }
    }
}

/// `R_{λ,λ} = Π_v (multiplicity of v in λ)!`, the number of part-preserving
/// relabelings.
pub fn aut_count_partition(lambda: &Partition) -> u64 {
    lambda
        .multiplicities()
        .iter()
        .map(|&(_, m)| (1..=m as u64).product::<u64>())
        .product()
}

/// `k!` as a big integer.
pub fn factorial(k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=k {
        acc *= i;
    }
    acc
}

/// The falling factorial `(k)_ℓ = k (k−1) ⋯ (k−ℓ+1)`; zero when `ℓ > k`,
/// one when `ℓ = 0`.
pub fn falling_factorial(k: u64, ell: u64) -> BigInt {
    if ell > k {
        return BigInt::from(0);
    }
    let mut acc = BigInt::one();
    for i in 0..ell {
        acc *= k - i;
    }
    acc
}

/// Binomial coefficient `C(n, k)` as a big integer.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    falling_factorial(n, k) / factorial(k)
}
