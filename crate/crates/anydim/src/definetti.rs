//! Maps between finite sets, their sampling and fiber-sum actions on
//! vectors and symmetric matrices, exact and Monte Carlo expectations over
//! uniformly random maps, and the total-variation / Wasserstein
//! diagnostics behind the convergence rates.
//!
//! The sampling action `ρ(f)` pulls coordinates back (`(ρ(f)x)_i =
//! x_{f(i)}`, i.e. sampling with replacement for a random `f`); its
//! adjoint `ρ(f)*` pushes them forward by fiber sums. Both extend to
//! columns of `ℝ^{d×n}` and to symmetric matrices. The dual-cost
//! representation identity `p_n(x) = E[q_k(L_{k,n} x)]` is checked here by
//! full enumeration over maps, exactly in rational arithmetic.

use crate::combinat::binomial;
use crate::graphalg::{
    dualize_graph_density, dualize_graph_numbers, quotient_point, GraphBasis, GraphPoly, SymMat,
};
use crate::scalar::Scalar;
use crate::symfunc::{dualize_means, dualize_symfunc_at, MeanPoly, SymPoly};
use crate::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Hard budget for exact enumeration over maps.
pub const EXACT_MAP_BUDGET: u128 = 100_000_000;

/// A map `[source] → [target]` between finite sets, 0-indexed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteMap {
    source: usize,
    target: usize,
    map: Vec<usize>,
}

impl FiniteMap {
    pub fn new(target: usize, map: Vec<usize>) -> Self {
        assert!(map.iter().all(|&v| v < target), "map entry out of range");
        FiniteMap { source: map.len(), target, map }
    }

    pub fn identity(n: usize) -> Self {
        FiniteMap::new(n, (0..n).collect())
    }

    /// The inclusion `[n] ↪ [big_n]`, identity on the first `n` elements.
    pub fn inclusion(n: usize, big_n: usize) -> Self {
        assert!(n <= big_n);
        FiniteMap::new(big_n, (0..n).collect())
    }

    /// The standard equipartition `[nk] → [n]` collapsing consecutive
    /// blocks of length `k`.
    pub fn equipartition(n: usize, nk: usize) -> Self {
        assert!(n > 0 && nk % n == 0, "equipartition needs n | nk");
        let k = nk / n;
        FiniteMap::new(n, (0..nk).map(|i| i / k).collect())
    }

    pub fn from_permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &v in perm {
            assert!(v < n && !seen[v], "not a permutation");
            seen[v] = true;
        }
        FiniteMap::new(n, perm.to_vec())
    }

    /// Uniformly random map drawn from the given stream.
    pub fn uniform(source: usize, target: usize, rng: &mut impl Rng) -> Self {
        assert!(target > 0 || source == 0);
        FiniteMap::new(target, (0..source).map(|_| rng.gen_range(0..target)).collect())
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn entries(&self) -> &[usize] {
        &self.map
    }

    /// `other ∘ self`, requiring `self.target == other.source`.
    pub fn then(&self, other: &FiniteMap) -> FiniteMap {
        assert_eq!(self.target, other.source, "composition shape mismatch");
        FiniteMap::new(other.target, self.map.iter().map(|&v| other.map[v]).collect())
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.target];
        for &v in &self.map {
            seen[v] = true;
        }
        seen.iter().all(|&s| s)
    }

    pub fn fibers(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.target];
        for (i, &v) in self.map.iter().enumerate() {
            out[v].push(i);
        }
        out
    }

    pub fn max_fiber_size(&self) -> usize {
        self.fibers().iter().map(|f| f.len()).max().unwrap_or(0)
    }
}

/// Every map factors through an equipartition: for `f: [m] → [n]` and any
/// `k ≥` the largest fiber, there is a permutation `g ∈ S_{nk}` with
/// `f = d_{n,nk} ∘ g ∘ ι_{nk,m}`. Returns `(k, g)` built by packing each
/// fiber into its own block.
pub fn factorize_via_equipartition(f: &FiniteMap) -> (usize, FiniteMap) {
    let n = f.target;
    let k = f.max_fiber_size().max(1);
    let nk = n * k;
    let mut g = vec![usize::MAX; nk];
    for (i, fiber) in f.fibers().iter().enumerate() {
        for (ell, &elem) in fiber.iter().enumerate() {
            g[elem] = i * k + ell;
        }
    }
    // extend the injection on [m] to a permutation of [nk]
    let mut used: Vec<bool> = vec![false; nk];
    for &v in g.iter().filter(|&&v| v != usize::MAX) {
        used[v] = true;
    }
    let mut free = (0..nk).filter(|&v| !used[v]);
    for slot in g.iter_mut() {
        if *slot == usize::MAX {
            *slot = free.next().expect("enough free slots");
        }
    }
    (k, FiniteMap::from_permutation(&g))
}

/// Sampling action on columns: `f: [m] → [n]` applied to `n` columns
/// gives `m` columns with `out[i] = x[f(i)]`.
pub fn act_columns<T: Clone>(f: &FiniteMap, x: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    if x.len() != f.target {
        return Err(Error::ShapeMismatch(format!(
            "{} columns but map targets [{}]",
            x.len(),
            f.target
        )));
    }
    Ok(f.map.iter().map(|&v| x[v].clone()).collect())
}

/// Sampling action on vectors (`d = 1` columns).
pub fn act_vec<T: Clone>(f: &FiniteMap, x: &[T]) -> Result<Vec<T>> {
    if x.len() != f.target {
        return Err(Error::ShapeMismatch(format!(
            "vector length {} but map targets [{}]",
            x.len(),
            f.target
        )));
    }
    Ok(f.map.iter().map(|&v| x[v].clone()).collect())
}

/// Sampling action on symmetric matrices: `out[i][j] = X[f(i)][f(j)]`.
pub fn act_matrix<T: Scalar>(f: &FiniteMap, x: &SymMat<T>) -> Result<SymMat<T>> {
    if x.n() != f.target {
        return Err(Error::ShapeMismatch(format!(
            "matrix size {} but map targets [{}]",
            x.n(),
            f.target
        )));
    }
    Ok(SymMat::from_fn(f.source, |i, j| x.get(f.map[i], f.map[j]).clone()))
}

/// Fiber-sum action on vectors: `(ρ(f)* x)_i = Σ_{j ∈ f⁻¹(i)} x_j`.
pub fn coact_vec<T: Scalar>(f: &FiniteMap, x: &[T]) -> Result<Vec<T>> {
    if x.len() != f.source {
        return Err(Error::ShapeMismatch(format!(
            "vector length {} but map sources [{}]",
            x.len(),
            f.source
        )));
    }
    let mut out = vec![T::zero(); f.target];
    for (j, &i) in f.map.iter().enumerate() {
        out[i] = out[i].clone() + x[j].clone();
    }
    Ok(out)
}

/// Fiber-sum action on columns of `ℝ^{d×n}`.
pub fn coact_columns<T: Scalar>(f: &FiniteMap, x: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    if x.len() != f.source {
        return Err(Error::ShapeMismatch(format!(
            "{} columns but map sources [{}]",
            x.len(),
            f.source
        )));
    }
    let d = x.first().map(|c| c.len()).unwrap_or(0);
    let mut out = vec![vec![T::zero(); d]; f.target];
    for (j, &i) in f.map.iter().enumerate() {
        for (c, v) in x[j].iter().enumerate() {
            out[i][c] = out[i][c].clone() + v.clone();
        }
    }
    Ok(out)
}

/// Fiber-sum action on symmetric matrices — the graph quotient.
pub fn coact_matrix<T: Scalar>(f: &FiniteMap, x: &SymMat<T>) -> Result<SymMat<T>> {
    if x.n() != f.source {
        return Err(Error::ShapeMismatch(format!(
            "matrix size {} but map sources [{}]",
            x.n(),
            f.source
        )));
    }
    Ok(quotient_point(x, &f.map, f.target))
}

/// Derives the RNG for one draw substream from a master seed; the scheme
/// is a fixed (seed, stream) pair so runs are bit-reproducible regardless
/// of how draws are scheduled across threads.
pub fn substream_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Enumerates every map `[source] → [target]` once.
pub fn for_each_finite_map(
    source: usize,
    target: usize,
    f: &mut impl FnMut(&FiniteMap),
) -> Result<()> {
    let count = (target as u128).checked_pow(source as u32).unwrap_or(u128::MAX);
    if count > EXACT_MAP_BUDGET {
        return Err(Error::BudgetExceeded { maps: count, budget: EXACT_MAP_BUDGET });
    }
    crate::graphalg::for_each_map(source, target, &mut |m| {
        f(&FiniteMap { source, target, map: m.to_vec() });
    });
    Ok(())
}

/// Exact expectation of `eval` over the uniformly random map
/// `[source] → [target]`, in rational arithmetic.
pub fn expect_maps_exact(
    source: usize,
    target: usize,
    eval: &mut impl FnMut(&FiniteMap) -> Result<BigRational>,
) -> Result<BigRational> {
    let mut total = BigRational::zero();
    let mut count = 0u64;
    let mut first_err = None;
    for_each_finite_map(source, target, &mut |f| {
        if first_err.is_some() {
            return;
        }
        match eval(f) {
            Ok(v) => {
                total += v;
                count += 1;
            }
            Err(e) => first_err = Some(e),
        }
    })?;
    if let Some(e) = first_err {
        return Err(e);
    }
    Ok(total / BigRational::from_integer(BigInt::from(count)))
}

/// Monte Carlo estimate of the same expectation with the seeded substream
/// scheme; returns `(mean, standard error)`.
pub fn expect_maps_mc(
    source: usize,
    target: usize,
    samples: usize,
    seed: u64,
    eval: &mut impl FnMut(&FiniteMap) -> f64,
) -> (f64, f64) {
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for s in 0..samples {
        let mut rng = substream_rng(seed, s as u64);
        let f = FiniteMap::uniform(source, target, &mut rng);
        let v = eval(&f);
        sum += v;
        sumsq += v * v;
    }
    let mean = sum / samples as f64;
    let var = (sumsq / samples as f64 - mean * mean).max(0.0);
    (mean, (var / samples as f64).sqrt())
}

/// A finitely supported law with exact probabilities. Points are flattened
/// rational vectors; equal points are merged on insertion.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteLaw {
    points: BTreeMap<Vec<BigRational>, BigRational>,
}

impl FiniteLaw {
    pub fn new() -> Self {
        FiniteLaw { points: BTreeMap::new() }
    }

    pub fn push(&mut self, point: Vec<BigRational>, prob: BigRational) {
        if prob.is_zero() {
            return;
        }
        assert!(!prob.is_negative(), "negative probability");
        *self.points.entry(point).or_insert_with(BigRational::zero) += prob;
    }

    pub fn dirac(point: Vec<BigRational>) -> Self {
        let mut law = FiniteLaw::new();
        law.push(point, BigRational::one());
        law
    }

    pub fn support_len(&self) -> usize {
        self.points.len()
    }

    pub fn total_mass(&self) -> BigRational {
        self.points.values().sum()
    }

    pub fn points(&self) -> impl Iterator<Item = (&Vec<BigRational>, &BigRational)> {
        self.points.iter()
    }
}

impl Default for FiniteLaw {
    fn default() -> Self {
        Self::new()
    }
}

/// Total variation in the unhalved convention `Σ_x |p₁(x) − p₂(x)|`, so
/// two distinct Dirac masses are at distance 2.
pub fn tv_exact(a: &FiniteLaw, b: &FiniteLaw) -> BigRational {
    let mut keys: Vec<&Vec<BigRational>> = a.points.keys().collect();
    keys.extend(b.points.keys());
    keys.sort();
    keys.dedup();
    let zero = BigRational::zero();
    keys.iter()
        .map(|k| (a.points.get(*k).unwrap_or(&zero) - b.points.get(*k).unwrap_or(&zero)).abs())
        .sum()
}

/// `W₁` to a point mass in the `ℓ₁` metric: `E ‖X − c‖₁`.
pub fn w1_to_dirac(law: &FiniteLaw, c: &[BigRational]) -> BigRational {
    law.points
        .iter()
        .map(|(x, p)| {
            let dist: BigRational = x.iter().zip(c).map(|(xi, ci)| (xi - ci).abs()).sum();
            dist * p
        })
        .sum()
}

/// Compares the law of `m` coordinates of a uniformly permuted base vector
/// drawn *without* replacement against the law drawn *with* replacement.
/// Returns `(exact TV, bound m(m−1)/n)` and asserts the bound.
pub fn tv_rate_experiment(
    n: usize,
    m: usize,
    base: &[BigRational],
) -> Result<(BigRational, BigRational)> {
    if base.len() != n {
        return Err(Error::ShapeMismatch(format!("base length {} ≠ n = {n}", base.len())));
    }
    if n > 8 || m > 3 {
        return Err(Error::SizeLimit(format!(
            "tv_rate_experiment limited to n ≤ 8, m ≤ 3 (got n = {n}, m = {m})"
        )));
    }
    if m > n {
        return Err(Error::DimensionTooSmall { need: m, got: n });
    }
    // without replacement: uniform over injective index tuples
    let mut without = FiniteLaw::new();
    let mut tuple = vec![0usize; m];
    let inj_count: u128 = (0..m as u128).map(|i| n as u128 - i).product();
    let w_inj = BigRational::new(BigInt::one(), BigInt::from(inj_count));
    inj_tuples(n, m, &mut tuple, 0, 0u64, &mut |idx: &[usize]| {
        without.push(idx.iter().map(|&i| base[i].clone()).collect(), w_inj.clone());
    });
    // with replacement: uniform over all index tuples
    let mut with = FiniteLaw::new();
    let w_all = BigRational::new(BigInt::one(), BigInt::from(n).pow(m as u32));
    for_each_finite_map(m, n, &mut |f| {
        with.push(f.entries().iter().map(|&i| base[i].clone()).collect(), w_all.clone());
    })?;
    let tv = tv_exact(&without, &with);
    let bound = BigRational::new(BigInt::from((m * (m - 1)) as u64), BigInt::from(n as u64));
    assert!(tv <= bound, "TV {tv} exceeded the bound {bound}");
    Ok((tv, bound))
}

fn inj_tuples(
    n: usize,
    m: usize,
    tuple: &mut Vec<usize>,
    depth: usize,
    used: u64,
    f: &mut impl FnMut(&[usize]),
) {
    if depth == m {
        f(tuple);
        return;
    }
    for i in 0..n {
        if (used >> i) & 1 == 0 {
            tuple[depth] = i;
            inj_tuples(n, m, tuple, depth + 1, used | (1 << i), f);
        }
    }
}

/// The dual sampling tightness case: the deterministic vector
/// `(1/2n, …, 1/2n)` equipartitions to `(1/2, 1/2)`, while fiber sums of a
/// random map give `(B/2n, 1 − B/2n)` with `B ~ Bin(2n, 1/2)`. Returns the
/// exact `W₁` distance `E|B − n|/n` between the two.
pub fn w1_binomial_case(n: u64) -> BigRational {
    let two_n = 2 * n;
    let denom = BigInt::from(2u32).pow(two_n as u32);
    let mut law = FiniteLaw::new();
    for k in 0..=two_n {
        let p = BigRational::new(binomial(two_n, k), denom.clone());
        let x = BigRational::new(BigInt::from(k), BigInt::from(two_n));
        law.push(vec![x.clone(), BigRational::one() - x], p);
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    w1_to_dirac(&law, &[half.clone(), half])
}

/// Which convergence-rate regime a setting lives in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateCase {
    /// Sampling side (duplication-structured costs): gap ≤ k(k−1)/n · ‖q_k‖.
    TotalVariation { k: usize, n: usize, q_sup: f64 },
    /// Fiber-sum side (zero-padding-structured costs): gap ≤
    /// 2D √(k(k−1)/(n/k)) · ‖q_k'‖ · max ‖x‖₁; requires `k | n`.
    Wasserstein { degree: u32, k: usize, n: usize, q_grad_sup: f64, l1_radius: f64 },
}

/// The theoretical gap bound for a computed `(u_n, ℓ_n)` pair.
pub fn gap_bound(case: RateCase) -> Result<f64> {
    match case {
        RateCase::TotalVariation { k, n, q_sup } => {
            Ok((k * (k.saturating_sub(1))) as f64 / n as f64 * q_sup)
        }
        RateCase::Wasserstein { degree, k, n, q_grad_sup, l1_radius } => {
            if k == 0 || n % k != 0 {
                return Err(Error::DivisibilityRequired { k, n });
            }
            let ratio = (k * (k - 1)) as f64 / (n as f64 / k as f64);
            Ok(2.0 * degree as f64 * ratio.sqrt() * q_grad_sup * l1_radius)
        }
    }
}

/// Exact verification of the dual-cost representation identity
/// `p_n(x) = E[q_k(L_{k,n} x)]` in each of the four settings. Every
/// function returns `(p_n(x), E[…])`; the two must agree exactly.
pub mod verify {
    use super::*;
    use crate::symfunc::{MeanBasis, SymBasis};

    /// Power-sum costs over `ℝ^n`: the expectation runs over fiber-sum
    /// maps `[n] → [k]` applied to `x`, with `q_k` built at level `k`.
    pub fn representation_symfunc(
        p: &SymPoly,
        x: &[BigRational],
        k: usize,
    ) -> Result<(BigRational, BigRational)> {
        assert_eq!(p.basis(), SymBasis::PowerSum);
        let q = dualize_symfunc_at(p, k as u64)?;
        let lhs = p.eval(x)?;
        let rhs = expect_maps_exact(x.len(), k, &mut |f| q.eval(&coact_vec(f, x)?))?;
        Ok((lhs, rhs))
    }

    /// Power-mean costs over `ℝ^{d×n}`: the expectation samples `k`
    /// columns with replacement.
    pub fn representation_means(
        p: &MeanPoly,
        columns: &[Vec<BigRational>],
        k: usize,
    ) -> Result<(BigRational, BigRational)> {
        assert_eq!(p.basis(), MeanBasis::PowerMean);
        let q = dualize_means(p)?;
        let lhs = p.eval(columns)?;
        let rhs = expect_maps_exact(k, columns.len(), &mut |f| {
            q.eval(&act_columns(f, columns)?)
        })?;
        Ok((lhs, rhs))
    }

    /// Density costs over symmetric matrices: the expectation samples a
    /// `k×k` principal pattern with replacement.
    pub fn representation_graph_density(
        p: &GraphPoly,
        x: &SymMat<BigRational>,
        k: usize,
    ) -> Result<(BigRational, BigRational)> {
        assert_eq!(p.basis(), GraphBasis::T);
        let q = dualize_graph_density(p)?;
        let lhs = p.eval(x)?;
        let rhs = expect_maps_exact(k, x.n(), &mut |f| q.eval(&act_matrix(f, x)?))?;
        Ok((lhs, rhs))
    }

    /// Homomorphism-number costs: the expectation quotients `x` along
    /// fiber-sum maps `[n] → [k]`, with `q_k` built at level `k`.
    pub fn representation_graph_numbers(
        p: &GraphPoly,
        x: &SymMat<BigRational>,
        k: usize,
    ) -> Result<(BigRational, BigRational)> {
        let q = dualize_graph_numbers(p, k)?;
        let lhs = p.eval(x)?;
        let rhs = expect_maps_exact(x.n(), k, &mut |f| q.eval(&coact_matrix(f, x)?))?;
        Ok((lhs, rhs))
    }
}
