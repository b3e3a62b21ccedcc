//! Symmetric-function algebra over `ℝ^n` and `ℝ^{d×n}`: products of power
//! sums, monomial sums, power/monomial means, the triangular basis-change
//! matrices between them, and the dual-cost pipelines.
//!
//! The central object is [`definetti_sym_matrix`]: the matrix `M(k)` whose
//! row `λ` expands the expected pullback of the monomial sum `m_k^{(λ)}`
//! under a uniformly random fiber-sum map into monomial sums,
//!
//! ```text
//! M(k)_{λ,μ} = (λ!/μ!) · ((k)_len(λ) / k^len(μ)) · R_{μ,λ} / R_{λ,λ},   μ ≤_R λ.
//! ```
//!
//! `M(k)` is triangular with respect to the refinement order with diagonal
//! `(k)_len(λ)/k^len(λ) > 0` for `k ≥ deg`, so expressing a cost in this
//! basis is an exact triangular solve. The resulting coefficients form the
//! dual cost whose symmetrizations give increasing lower bounds.

use crate::combinat::{
    aut_count_partition, falling_factorial, partitions_of_weight, partitions_up_to,
    refinement_count, MultiIndexList, Partition,
};
use crate::scalar::Scalar;
use crate::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Basis families for polynomials indexed by partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymBasis {
    /// `s^{(λ)}(x) = Π_i Σ_j x_j^{λ_i}` — products of power sums.
    PowerSum,
    /// `m^{(λ)}(x) = Σ_{λ' ∈ S_n·λ} x^{λ'}` — monomial sums.
    MonomialSum,
}

/// Basis families for polynomials indexed by multi-index lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanBasis {
    /// `s̄^{(Λ)}(x) = Π_i (1/n) Σ_j x_j^{α_i}` — products of power means.
    PowerMean,
    /// Symmetrized monomial, averaged over injective column tuples.
    MonomialMean,
}

/// An exact-rational linear combination of partition-indexed atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct SymPoly {
    basis: SymBasis,
    coeffs: BTreeMap<Partition, BigRational>,
}

impl SymPoly {
    pub fn new(basis: SymBasis) -> Self {
        SymPoly { basis, coeffs: BTreeMap::new() }
    }

    pub fn from_terms<I>(basis: SymBasis, terms: I) -> Self
    where
        I: IntoIterator<Item = (Partition, BigRational)>,
    {
        let mut p = SymPoly::new(basis);
        for (atom, c) in terms {
            p.add_term(atom, c);
        }
        p
    }

    /// Adds `c · atom`, dropping the entry if the total cancels to zero.
    pub fn add_term(&mut self, atom: Partition, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(atom.clone()).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&atom);
        }
    }

    pub fn basis(&self) -> SymBasis {
        self.basis
    }

    pub fn coeffs(&self) -> &BTreeMap<Partition, BigRational> {
        &self.coeffs
    }

    pub fn coeff(&self, atom: &Partition) -> BigRational {
        self.coeffs.get(atom).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Max atom weight with a nonzero coefficient; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(|p| p.weight()).max().unwrap_or(0)
    }

    /// Evaluates at `x ∈ T^n` in the scalar type of the caller's choice.
    pub fn eval<T: Scalar>(&self, x: &[T]) -> Result<T> {
        let mut acc = T::zero();
        for (atom, c) in &self.coeffs {
            let v = match self.basis {
                SymBasis::PowerSum => eval_power_sum_product(atom, x),
                SymBasis::MonomialSum => eval_monomial_sum(atom, x)?,
            };
            acc = acc + T::from_rational(c) * v;
        }
        Ok(acc)
    }

    /// Value and gradient at `x`, converting to the power-sum basis first
    /// so the gradient is analytic.
    pub fn eval_grad_f64(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let s = match self.basis {
            SymBasis::PowerSum => self.clone(),
            SymBasis::MonomialSum => m_to_s(self)?,
        };
        let n = x.len();
        // Power sums s_m = Σ_j x_j^m for every exponent we will need.
        let maxpart = s.coeffs.keys().flat_map(|p| p.parts().iter().copied()).max().unwrap_or(0);
        let mut psums = vec![0.0; (maxpart + 1) as usize];
        for m in 1..=maxpart {
            psums[m as usize] = x.iter().map(|&v| v.powi(m as i32)).sum();
        }
        let mut value = 0.0;
        let mut grad = vec![0.0; n];
        for (atom, c) in &s.coeffs {
            let cf = crate::scalar::rational_to_f64(c);
            let parts = atom.parts();
            let prod: f64 = parts.iter().map(|&m| psums[m as usize]).product();
            value += cf * prod;
            for (i, &m) in parts.iter().enumerate() {
                // ∂/∂x_j of Π_i s_{λ_i} = Σ_i (Π_{i'≠i} s_{λ_i'}) λ_i x_j^{λ_i−1}
                let rest: f64 = parts
                    .iter()
                    .enumerate()
                    .filter(|&(i2, _)| i2 != i)
                    .map(|(_, &m2)| psums[m2 as usize])
                    .product();
                let scale = cf * rest * m as f64;
                for (j, g) in grad.iter_mut().enumerate() {
                    *g += scale * x[j].powi(m as i32 - 1);
                }
            }
        }
        Ok((value, grad))
    }
}

impl fmt::Display for SymPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.basis {
            SymBasis::PowerSum => "s",
            SymBasis::MonomialSum => "m",
        };
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (atom, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*{tag}{atom}")?;
        }
        Ok(())
    }
}

/// `s^{(λ)}(x) = Π_i Σ_j x_j^{λ_i}`; the empty partition evaluates to 1.
pub fn eval_power_sum_product<T: Scalar>(lambda: &Partition, x: &[T]) -> T {
    let mut acc = T::one();
    for &m in lambda.parts() {
        let mut s = T::zero();
        for v in x {
            s = s + v.powu(m);
        }
        acc = acc * s;
    }
    acc
}

/// `m^{(λ)}(x)`: the sum of the `S_n`-orbit of the monomial `x^λ`, computed
/// as the sum over ordered injective index tuples divided by `R_{λ,λ}`.
pub fn eval_monomial_sum<T: Scalar>(lambda: &Partition, x: &[T]) -> Result<T> {
    let n = x.len();
    let len = lambda.len();
    if n < len {
        return Err(Error::DimensionTooSmall { need: len, got: n });
    }
    if len == 0 {
        return Ok(T::one());
    }
    assert!(n <= 64, "monomial-sum enumeration limited to 64 variables");
    let parts = lambda.parts();
    let mut total = T::zero();
    // Depth-first walk over injective tuples, tracking used indices in a mask.
    let mut stack_idx = vec![0usize; len];
    let mut prod = vec![T::one(); len + 1];
    let mut depth = 0usize;
    let mut used: u64 = 0;
    loop {
        if depth == len {
            total = total + prod[len].clone();
            depth -= 1;
            used &= !(1u64 << stack_idx[depth]);
            stack_idx[depth] += 1;
            continue;
        }
        let mut i = stack_idx[depth];
        while i < n && (used >> i) & 1 == 1 {
            i += 1;
        }
        if i >= n {
            if depth == 0 {
                break;
            }
            stack_idx[depth] = 0;
            depth -= 1;
            used &= !(1u64 << stack_idx[depth]);
            stack_idx[depth] += 1;
            continue;
        }
        stack_idx[depth] = i;
        used |= 1u64 << i;
        prod[depth + 1] = prod[depth].clone() * x[i].powu(parts[depth]);
        depth += 1;
        if depth < len {
            stack_idx[depth] = 0;
        }
    }
    let aut = T::from_i64(aut_count_partition(lambda) as i64);
    Ok(total / aut)
}

/// A dense square matrix of exact rationals indexed by a fixed atom list.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<A: Ord + Clone> {
    atoms: Vec<A>,
    entries: Vec<Vec<BigRational>>,
}

impl<A: Ord + Clone + fmt::Debug> TransitionMatrix<A> {
    pub fn new(atoms: Vec<A>, entries: Vec<Vec<BigRational>>) -> Self {
        assert_eq!(atoms.len(), entries.len());
        for row in &entries {
            assert_eq!(row.len(), atoms.len());
        }
        TransitionMatrix { atoms, entries }
    }

    pub fn atoms(&self) -> &[A] {
        &self.atoms
    }

    pub fn index_of(&self, atom: &A) -> Option<usize> {
        self.atoms.iter().position(|a| a == atom)
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i][j]
    }

    pub fn get(&self, row: &A, col: &A) -> Option<&BigRational> {
        Some(self.entry(self.index_of(row)?, self.index_of(col)?))
    }

    pub fn dim(&self) -> usize {
        self.atoms.len()
    }

    /// `M[i][j] = 0` whenever `j < i`, i.e. triangular in atom order.
    pub fn is_upper_triangular(&self) -> bool {
        self.entries
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().take(i).all(|e| e.is_zero()))
    }

    pub fn transpose(&self) -> TransitionMatrix<A> {
        let n = self.dim();
        let entries = (0..n)
            .map(|i| (0..n).map(|j| self.entries[j][i].clone()).collect())
            .collect();
        TransitionMatrix { atoms: self.atoms.clone(), entries }
    }

    /// Matrix–vector product `M v`.
    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        self.entries
            .iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Back substitution for upper-triangular `M`, solving `M x = rhs`.
    pub fn solve_upper(&self, rhs: &[BigRational]) -> Vec<BigRational> {
        let n = self.dim();
        debug_assert!(self.is_upper_triangular(), "matrix is not upper triangular");
        let mut x = vec![BigRational::zero(); n];
        for i in (0..n).rev() {
            let mut acc = rhs[i].clone();
            for j in i + 1..n {
                acc -= &self.entries[i][j] * &x[j];
            }
            assert!(!self.entries[i][i].is_zero(), "zero diagonal at {:?}", self.atoms[i]);
            x[i] = acc / &self.entries[i][i];
        }
        x
    }

    /// Forward substitution for lower-triangular `M`, solving `M x = rhs`.
    pub fn solve_lower(&self, rhs: &[BigRational]) -> Vec<BigRational> {
        let n = self.dim();
        let mut x = vec![BigRational::zero(); n];
        for i in 0..n {
            let mut acc = rhs[i].clone();
            for j in 0..i {
                acc -= &self.entries[i][j] * &x[j];
            }
            assert!(!self.entries[i][i].is_zero(), "zero diagonal at {:?}", self.atoms[i]);
            x[i] = acc / &self.entries[i][i];
        }
        x
    }
}

/// Expands a power-sum-product polynomial into monomial sums via
/// `s^{(λ)} = Σ_{λ ≤_R μ} R_{λ,μ} m^{(μ)}`.
pub fn s_to_m(p: &SymPoly) -> Result<SymPoly> {
    if p.basis != SymBasis::PowerSum {
        return Err(Error::MixedBasis("s_to_m expects the power-sum basis".into()));
    }
    let mut out = SymPoly::new(SymBasis::MonomialSum);
    for (lambda, c) in &p.coeffs {
        for mu in partitions_of_weight(lambda.weight()) {
            let r = refinement_count(lambda, &mu);
            if r > 0 {
                out.add_term(mu, c * BigRational::from_integer(BigInt::from(r)));
            }
        }
    }
    Ok(out)
}

/// Inverse of [`s_to_m`]: triangular solve against the refinement matrix,
/// valid pointwise in every dimension.
pub fn m_to_s(p: &SymPoly) -> Result<SymPoly> {
    if p.basis != SymBasis::MonomialSum {
        return Err(Error::MixedBasis("m_to_s expects the monomial-sum basis".into()));
    }
    if p.is_zero() {
        return Ok(SymPoly::new(SymBasis::PowerSum));
    }
    let atoms = partitions_up_to(p.degree());
    // R[i][j] = R_{λ_i, λ_j}: lower triangular in canonical order
    // (a refinement has at least as many parts, so it sorts later).
    let r_entries: Vec<Vec<BigRational>> = atoms
        .iter()
        .map(|li| {
            atoms
                .iter()
                .map(|lj| BigRational::from_integer(BigInt::from(refinement_count(li, lj))))
                .collect()
        })
        .collect();
    let r = TransitionMatrix::new(atoms.clone(), r_entries);
    let rhs: Vec<BigRational> = atoms.iter().map(|a| p.coeff(a)).collect();
    // m-coefficients satisfy b = Rᵀ a, so solve the upper-triangular Rᵀ.
    let a = r.transpose().solve_upper(&rhs);
    Ok(SymPoly::from_terms(SymBasis::PowerSum, atoms.into_iter().zip(a)))
}

/// The de Finetti basis-change matrix `M(k)` on partitions of weight ≤ `d`.
///
/// Row `λ`, column `μ` holds `(λ!/μ!)·((k)_len(λ)/k^len(μ))·R_{μ,λ}/R_{λ,λ}`
/// when `μ ≤_R λ` and zero otherwise. Requires `k ≥ d` so the diagonal
/// `(k)_len(λ)/k^len(λ)` stays positive.
pub fn definetti_sym_matrix(k: u64, d: u32) -> Result<TransitionMatrix<Partition>> {
    if (k as u128) < d as u128 {
        return Err(Error::BasisIncomplete { k: k as usize, degree: d as usize });
    }
    let atoms = partitions_up_to(d);
    let n = atoms.len();
    let mut entries = vec![vec![BigRational::zero(); n]; n];
    for (i, lambda) in atoms.iter().enumerate() {
        let lam_fact = lambda.factorial();
        let fall = falling_factorial(k, lambda.len() as u64);
        let r_ll = BigInt::from(refinement_count(lambda, lambda));
        for (j, mu) in atoms.iter().enumerate() {
            let r_ml = refinement_count(mu, lambda);
            if r_ml == 0 {
                continue;
            }
            let numer = &lam_fact * &fall * BigInt::from(r_ml);
            let denom = mu.factorial() * BigInt::from(k).pow(mu.len() as u32) * &r_ll;
            entries[i][j] = BigRational::new(numer, denom);
        }
    }
    Ok(TransitionMatrix::new(atoms, entries))
}

/// Dual cost for a power-sum cost: expresses `p` in the de Finetti basis at
/// level `k` and returns `q_k = Σ_λ c^{(k,λ)} m^{(λ)}`.
///
/// The representation identity `p_n(x) = E_f[q_k(fiber-sums of x)]` over
/// uniformly random maps `[n] → [k]` then holds for every `n`.
pub fn dualize_symfunc_at(p: &SymPoly, k: u64) -> Result<SymPoly> {
    if p.basis != SymBasis::PowerSum {
        return Err(Error::MixedBasis("dualize_symfunc expects the power-sum basis".into()));
    }
    let d = p.degree();
    if (k as u128) < d as u128 {
        return Err(Error::TargetBelowDegree { n: k as usize, degree: d as usize });
    }
    let m_poly = s_to_m(p)?;
    let matrix = definetti_sym_matrix(k, d)?;
    let rhs: Vec<BigRational> = matrix.atoms().iter().map(|a| m_poly.coeff(a)).collect();
    // p's monomial coefficients satisfy a = Mᵀ c.
    let c = matrix.transpose().solve_lower(&rhs);
    Ok(SymPoly::from_terms(
        SymBasis::MonomialSum,
        matrix.atoms().iter().cloned().zip(c),
    ))
}

/// [`dualize_symfunc_at`] with `k = n`, the choice matching per-dimension
/// lower bounds `ℓ_n = inf q_n`.
pub fn dualize_symfunc(p: &SymPoly, n: usize) -> Result<SymPoly> {
    dualize_symfunc_at(p, n as u64)
}

/// An exact-rational linear combination of multi-index-list atoms over
/// `ℝ^{d×n}` (the mean-field setting).
#[derive(Debug, Clone, PartialEq)]
pub struct MeanPoly {
    basis: MeanBasis,
    ambient_dim: usize,
    coeffs: BTreeMap<MultiIndexList, BigRational>,
}

impl MeanPoly {
    pub fn new(basis: MeanBasis, ambient_dim: usize) -> Self {
        MeanPoly { basis, ambient_dim, coeffs: BTreeMap::new() }
    }

    pub fn from_terms<I>(basis: MeanBasis, ambient_dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndexList, BigRational)>,
    {
        let mut p = MeanPoly::new(basis, ambient_dim);
        for (atom, c) in terms {
            p.add_term(atom, c);
        }
        p
    }

    pub fn add_term(&mut self, atom: MultiIndexList, c: BigRational) {
        assert_eq!(atom.ambient_dim(), self.ambient_dim, "atom dimension mismatch");
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(atom.clone()).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&atom);
        }
    }

    pub fn basis(&self) -> MeanBasis {
        self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn coeffs(&self) -> &BTreeMap<MultiIndexList, BigRational> {
        &self.coeffs
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(|a| a.weight()).max().unwrap_or(0)
    }

    /// Max atom length: the smallest dimension where every atom is defined.
    pub fn max_len(&self) -> usize {
        self.coeffs.keys().map(|a| a.len()).max().unwrap_or(0)
    }

    /// Evaluates at a point of `T^{d×n}` given as `n` columns of length `d`.
    pub fn eval<T: Scalar>(&self, columns: &[Vec<T>]) -> Result<T> {
        let mut acc = T::zero();
        for (atom, c) in &self.coeffs {
            let v = eval_mean_atom(atom, self.basis, columns)?;
            acc = acc + T::from_rational(c) * v;
        }
        Ok(acc)
    }

    /// Value and analytic gradient (flattened column-major: column `j`
    /// occupies `grad[j*d .. (j+1)*d]`).
    pub fn eval_grad_f64(&self, columns: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
        let n = columns.len();
        let d = self.ambient_dim;
        let mut value = 0.0;
        let mut grad = vec![0.0; n * d];
        for (atom, c) in &self.coeffs {
            let cf = crate::scalar::rational_to_f64(c);
            match self.basis {
                MeanBasis::PowerMean => {
                    // Π_i s̄^{(α_i)}: product rule over the factors.
                    let factors: Vec<f64> = atom
                        .entries()
                        .iter()
                        .map(|alpha| power_mean_factor(alpha, columns))
                        .collect();
                    let prod: f64 = factors.iter().product();
                    value += cf * prod;
                    for (i, alpha) in atom.entries().iter().enumerate() {
                        let rest: f64 = factors
                            .iter()
                            .enumerate()
                            .filter(|&(i2, _)| i2 != i)
                            .map(|(_, f)| f)
                            .product();
                        for (j, col) in columns.iter().enumerate() {
                            for (cidx, &e) in alpha.iter().enumerate() {
                                if e == 0 {
                                    continue;
                                }
                                // ∂/∂x_{c,j} (1/n Σ_j x_j^α) = (α_c/n)·x_j^{α−e_c}
                                let mut m = e as f64 / n as f64;
                                for (c2, &e2) in alpha.iter().enumerate() {
                                    let pow = if c2 == cidx { e2 - 1 } else { e2 };
                                    m *= col[c2].powi(pow as i32);
                                }
                                grad[j * d + cidx] += cf * rest * m;
                            }
                        }
                    }
                }
                MeanBasis::MonomialMean => {
                    let (v, g) = monomial_mean_value_grad(atom, columns)?;
                    value += cf * v;
                    for (gi, gv) in grad.iter_mut().zip(&g) {
                        *gi += cf * gv;
                    }
                }
            }
        }
        Ok((value, grad))
    }
}

impl fmt::Display for MeanPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.basis {
            MeanBasis::PowerMean => "sbar",
            MeanBasis::MonomialMean => "mbar",
        };
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (atom, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*{tag}{atom}")?;
        }
        Ok(())
    }
}

fn column_power<T: Scalar>(col: &[T], alpha: &[u32]) -> T {
    let mut acc = T::one();
    for (c, &e) in col.iter().zip(alpha) {
        if e > 0 {
            acc = acc * c.powu(e);
        }
    }
    acc
}

fn power_mean_factor(alpha: &[u32], columns: &[Vec<f64>]) -> f64 {
    columns.iter().map(|col| column_power(col, alpha)).sum::<f64>() / columns.len() as f64
}

/// Evaluates a single mean-basis atom at `n` columns of length `d`.
///
/// Power means need `n ≥ 1`; monomial means need `n ≥ len(Λ)` and average
/// the monomial over ordered injective column tuples.
pub fn eval_mean_atom<T: Scalar>(
    atom: &MultiIndexList,
    basis: MeanBasis,
    columns: &[Vec<T>],
) -> Result<T> {
    let n = columns.len();
    if n == 0 {
        return Err(Error::DimensionTooSmall { need: 1, got: 0 });
    }
    for col in columns {
        if col.len() != atom.ambient_dim() {
            return Err(Error::ShapeMismatch(format!(
                "column has {} rows, atom lives in dimension {}",
                col.len(),
                atom.ambient_dim()
            )));
        }
    }
    match basis {
        MeanBasis::PowerMean => {
            let n_t = T::from_i64(n as i64);
            let mut acc = T::one();
            for alpha in atom.entries() {
                let mut s = T::zero();
                for col in columns {
                    s = s + column_power(col, alpha);
                }
                acc = acc * (s / n_t.clone());
            }
            Ok(acc)
        }
        MeanBasis::MonomialMean => {
            let len = atom.len();
            if n < len {
                return Err(Error::DimensionTooSmall { need: len, got: n });
            }
            if len == 0 {
                return Ok(T::one());
            }
            let mut total = T::zero();
            let mut tuple = vec![0usize; len];
            injective_tuples(n, len, &mut tuple, 0, 0u64, &mut |idx: &[usize]| {
                let mut prod = T::one();
                for (slot, &j) in idx.iter().enumerate() {
                    prod = prod * column_power(&columns[j], &atom.entries()[slot]);
                }
                total = total.clone() + prod;
            });
            let mut denom = BigInt::one();
            for i in 0..len as u64 {
                denom *= n as u64 - i;
            }
            Ok(total / T::from_rational(&BigRational::from_integer(denom)))
        }
    }
}

fn monomial_mean_value_grad(
    atom: &MultiIndexList,
    columns: &[Vec<f64>],
) -> Result<(f64, Vec<f64>)> {
    let n = columns.len();
    let d = atom.ambient_dim();
    let len = atom.len();
    if n < len {
        return Err(Error::DimensionTooSmall { need: len, got: n });
    }
    let mut value = 0.0;
    let mut grad = vec![0.0; n * d];
    if len == 0 {
        return Ok((1.0, grad));
    }
    let count: f64 = (0..len).map(|i| (n - i) as f64).product();
    let mut tuple = vec![0usize; len];
    injective_tuples(n, len, &mut tuple, 0, 0u64, &mut |idx: &[usize]| {
        let factors: Vec<f64> = idx
            .iter()
            .enumerate()
            .map(|(slot, &j)| column_power(&columns[j], &atom.entries()[slot]))
            .collect();
        let prod: f64 = factors.iter().product();
        value += prod;
        for (slot, &j) in idx.iter().enumerate() {
            let rest: f64 = factors
                .iter()
                .enumerate()
                .filter(|&(s2, _)| s2 != slot)
                .map(|(_, f)| f)
                .product();
            let alpha = &atom.entries()[slot];
            for (cidx, &e) in alpha.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let mut m = e as f64;
                for (c2, &e2) in alpha.iter().enumerate() {
                    let pow = if c2 == cidx { e2 - 1 } else { e2 };
                    m *= columns[j][c2].powi(pow as i32);
                }
                grad[j * d + cidx] += rest * m;
            }
        }
    });
    value /= count;
    for g in &mut grad {
        *g /= count;
    }
    Ok((value, grad))
}

fn injective_tuples(
    n: usize,
    len: usize,
    tuple: &mut Vec<usize>,
    depth: usize,
    used: u64,
    f: &mut impl FnMut(&[usize]),
) {
    if depth == len {
        f(tuple);
        return;
    }
    for i in 0..n {
        if (used >> i) & 1 == 0 {
            tuple[depth] = i;
            injective_tuples(n, len, tuple, depth + 1, used | (1 << i), f);
        }
    }
}

/// Dual cost in the mean-field setting: the de Finetti correspondence maps
/// power means to monomial means coefficient-for-coefficient.
pub fn dualize_means(p: &MeanPoly) -> Result<MeanPoly> {
    if p.basis != MeanBasis::PowerMean {
        return Err(Error::MixedBasis("dualize_means expects the power-mean basis".into()));
    }
    Ok(MeanPoly {
        basis: MeanBasis::MonomialMean,
        ambient_dim: p.ambient_dim,
        coeffs: p.coeffs.clone(),
    })
}

/// `(k)_ℓ / k^ℓ` as a rational — the diagonal of [`definetti_sym_matrix`].
pub fn diagonal_ratio(k: u64, len: usize) -> BigRational {
    BigRational::new(falling_factorial(k, len as u64), BigInt::from(k).pow(len as u32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use num::ToPrimitive;

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec())
    }

    fn q(n: i64, d: i64) -> BigRational {
        ratio(n, d)
    }

    fn rational_vec(vals: &[(i64, i64)]) -> Vec<BigRational> {
        vals.iter().map(|&(n, d)| ratio(n, d)).collect()
    }

    #[test]
    fn power_sum_examples() {
        let x = rational_vec(&[(1, 1), (2, 1)]);
        assert_eq!(eval_power_sum_product(&p(&[1, 1]), &x), q(9, 1));
        let x3 = rational_vec(&[(1, 1), (2, 1), (0, 1)]);
        assert_eq!(eval_power_sum_product(&p(&[2]), &x3), q(5, 1));
        assert_eq!(eval_power_sum_product(&Partition::empty(), &x), q(1, 1));
    }

    #[test]
    fn power_sum_zero_padding_invariance() {
        let x = rational_vec(&[(1, 2), (-3, 1), (5, 7)]);
        let mut padded = x.clone();
        padded.push(BigRational::zero());
        padded.push(BigRational::zero());
        for atom in partitions_up_to(4) {
            assert_eq!(
                eval_power_sum_product(&atom, &x),
                eval_power_sum_product(&atom, &padded)
            );
        }
    }

    #[test]
    fn monomial_sum_examples() {
        let ones = rational_vec(&[(1, 1), (1, 1), (1, 1)]);
        assert_eq!(eval_monomial_sum(&p(&[1, 1]), &ones).unwrap(), q(3, 1));
        let x = rational_vec(&[(1, 1), (2, 1)]);
        assert_eq!(eval_monomial_sum(&p(&[2, 1]), &x).unwrap(), q(6, 1));
        // single part: a monomial sum is a power sum
        let y = rational_vec(&[(2, 1), (3, 1), (-1, 1)]);
        assert_eq!(
            eval_monomial_sum(&p(&[3]), &y).unwrap(),
            eval_power_sum_product(&p(&[3]), &y)
        );
        assert_eq!(
            eval_monomial_sum(&p(&[1, 1, 1]), &x),
            Err(Error::DimensionTooSmall { need: 3, got: 2 })
        );
    }

    #[test]
    fn s_to_m_examples() {
        let s11 = SymPoly::from_terms(SymBasis::PowerSum, [(p(&[1, 1]), q(1, 1))]);
        let m = s_to_m(&s11).unwrap();
        assert_eq!(m.coeff(&p(&[2])), q(1, 1));
        assert_eq!(m.coeff(&p(&[1, 1])), q(2, 1));

        let s111 = SymPoly::from_terms(SymBasis::PowerSum, [(p(&[1, 1, 1]), q(1, 1))]);
        let m3 = s_to_m(&s111).unwrap();
        assert_eq!(m3.coeff(&p(&[3])), q(1, 1));
        assert_eq!(m3.coeff(&p(&[2, 1])), q(3, 1));
        assert_eq!(m3.coeff(&p(&[1, 1, 1])), q(6, 1));

        let sd = SymPoly::from_terms(SymBasis::PowerSum, [(p(&[4]), q(1, 1))]);
        let md = s_to_m(&sd).unwrap();
        assert_eq!(md.coeffs().len(), 1);
        assert_eq!(md.coeff(&p(&[4])), q(1, 1));
    }

    #[test]
    fn m_to_s_examples() {
        let m11 = SymPoly::from_terms(SymBasis::MonomialSum, [(p(&[1, 1]), q(1, 1))]);
        let s = m_to_s(&m11).unwrap();
        assert_eq!(s.coeff(&p(&[1, 1])), q(1, 2));
        assert_eq!(s.coeff(&p(&[2])), q(-1, 2));

        let m2 = SymPoly::from_terms(SymBasis::MonomialSum, [(p(&[2]), q(1, 1))]);
        assert_eq!(m_to_s(&m2).unwrap().coeff(&p(&[2])), q(1, 1));
    }

    #[test]
    fn s_m_round_trip_random() {
        // deterministic LCG so the test is reproducible without rand
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as i64 % 19) - 9
        };
        for _ in 0..100 {
            let mut s = SymPoly::new(SymBasis::PowerSum);
            for atom in partitions_up_to(4) {
                s.add_term(atom, ratio(next(), 1 + next().abs()));
            }
            let back = m_to_s(&s_to_m(&s).unwrap()).unwrap();
            assert_eq!(back, s);
        }
    }

    #[test]
    fn s_to_m_pointwise_agreement() {
        let s = SymPoly::from_terms(
            SymBasis::PowerSum,
            [(p(&[2, 1]), q(3, 2)), (p(&[1, 1]), q(-1, 3)), (Partition::empty(), q(7, 5))],
        );
        let m = s_to_m(&s).unwrap();
        for n in 3..6 {
            let x: Vec<BigRational> = (0..n).map(|i| ratio(i as i64 - 2, 3)).collect();
            assert_eq!(s.eval(&x).unwrap(), m.eval(&x).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn definetti_matrix_quadratic_rows() {
        for k in 2..8u64 {
            let m = definetti_sym_matrix(k, 2).unwrap();
            assert!(m.is_upper_triangular());
            // row (2): m^{(2)} + (2/k) m^{(1,1)}
            assert_eq!(m.get(&p(&[2]), &p(&[2])).unwrap(), &q(1, 1));
            assert_eq!(m.get(&p(&[2]), &p(&[1, 1])).unwrap(), &q(2, k as i64));
            // row (1,1): diagonal k(k-1)/k^2
            assert_eq!(
                m.get(&p(&[1, 1]), &p(&[1, 1])).unwrap(),
                &q((k * (k - 1)) as i64, (k * k) as i64)
            );
        }
    }

    #[test]
    fn definetti_matrix_diagonal_at_111() {
        let k = 5u64;
        let m = definetti_sym_matrix(k, 3).unwrap();
        assert_eq!(
            m.get(&p(&[1, 1, 1]), &p(&[1, 1, 1])).unwrap(),
            &diagonal_ratio(k, 3)
        );
    }

    #[test]
    fn definetti_matrix_triangular_solve_runs_for_k_range() {
        let d = 4u32;
        for k in d as u64..=d as u64 + 10 {
            let m = definetti_sym_matrix(k, d).unwrap();
            assert!(m.is_upper_triangular());
            let rhs: Vec<BigRational> = (0..m.dim()).map(|i| ratio(i as i64 + 1, 3)).collect();
            let c = m.transpose().solve_lower(&rhs);
            let back = m.transpose().mul_vec(&c);
            assert_eq!(back, rhs, "k = {k}");
        }
        assert!(definetti_sym_matrix(3, 4).is_err());
    }

    #[test]
    fn dualize_quadratic_matches_closed_form() {
        // p = α1 s^(2) + α2 s^(1,1) dualizes to
        // q_n = (n α1/(n−1)) s^(2) + ((α2(n−1) − α1)/(n−1)) s^(1,1)
        let a1 = q(3, 7);
        let a2 = q(-2, 5);
        let pcost = SymPoly::from_terms(
            SymBasis::PowerSum,
            [(p(&[2]), a1.clone()), (p(&[1, 1]), a2.clone())],
        );
        for n in 2..9usize {
            let qn = dualize_symfunc(&pcost, n).unwrap();
            let qs = m_to_s(&qn).unwrap();
            let nn = q(n as i64, 1);
            let nm1 = q(n as i64 - 1, 1);
            assert_eq!(qs.coeff(&p(&[2])), &nn * &a1 / &nm1);
            assert_eq!(qs.coeff(&p(&[1, 1])), (&a2 * &nm1 - &a1) / &nm1);
        }
    }

    #[test]
    fn dualize_rejects_small_dimension() {
        let pcost = SymPoly::from_terms(SymBasis::PowerSum, [(p(&[2, 2]), q(1, 1))]);
        assert!(dualize_symfunc(&pcost, 3).is_err());
        assert!(dualize_symfunc(&pcost, 4).is_ok());
    }

    #[test]
    fn bad_quartic_dual_coefficient() {
        // 4s^(4) − 139/20 s^(3,1) + 4 s^(2,2) − 5 s^(2,1,1) + 4 s^(1,1,1,1):
        // the s^(4) coefficient of q_n is n³/((n−1)(n−2)(n−3)) · 4(1 + 3/n).
        let pcost = SymPoly::from_terms(
            SymBasis::PowerSum,
            [
                (p(&[4]), q(4, 1)),
                (p(&[3, 1]), q(-139, 20)),
                (p(&[2, 2]), q(4, 1)),
                (p(&[2, 1, 1]), q(-5, 1)),
                (p(&[1, 1, 1, 1]), q(4, 1)),
            ],
        );
        for n in 4..10i64 {
            let qn = dualize_symfunc(&pcost, n as usize).unwrap();
            let qs = m_to_s(&qn).unwrap();
            let prefactor = q(n * n * n, (n - 1) * (n - 2) * (n - 3));
            let expected = prefactor * (q(4, 1) * (q(1, 1) + q(3, n)));
            assert_eq!(qs.coeff(&p(&[4])), expected, "n = {n}");
        }
    }

    #[test]
    fn dualize_single_atom_limit_is_identity() {
        // As k → ∞ the basis matrix approaches the identity, so the dual of
        // a single power-sum atom converges to itself; check at k = 10^6.
        for d in 1..=4u32 {
            let atom = p(&(1..=1).map(|_| d).collect::<Vec<_>>());
            let pcost = SymPoly::from_terms(SymBasis::PowerSum, [(atom.clone(), q(1, 1))]);
            let qn = dualize_symfunc_at(&pcost, 1_000_000).unwrap();
            let qs = m_to_s(&qn).unwrap();
            for (a, c) in qs.coeffs() {
                let cf = c.to_f64().unwrap();
                if *a == atom {
                    assert!((cf - 1.0).abs() < 1e-4, "coefficient at {a} was {cf}");
                } else {
                    assert!(cf.abs() < 1e-4, "stray coefficient at {a} was {cf}");
                }
            }
        }
    }

    #[test]
    fn mean_atom_examples() {
        let cols = |vals: &[i64]| -> Vec<Vec<BigRational>> {
            vals.iter().map(|&v| vec![q(v, 1)]).collect()
        };
        let x = cols(&[1, 2, 3]);
        let lam1 = MultiIndexList::from_parts(&[1]);
        assert_eq!(eval_mean_atom(&lam1, MeanBasis::PowerMean, &x).unwrap(), q(2, 1));
        let lam11 = MultiIndexList::from_parts(&[1, 1]);
        assert_eq!(
            eval_mean_atom(&lam11, MeanBasis::MonomialMean, &x).unwrap(),
            q(11, 3)
        );
        let empty = MultiIndexList::empty(1);
        assert_eq!(eval_mean_atom(&empty, MeanBasis::MonomialMean, &x).unwrap(), q(1, 1));
    }

    #[test]
    fn power_mean_duplication_invariance() {
        let base: Vec<Vec<BigRational>> =
            vec![vec![q(1, 2), q(-1, 3)], vec![q(2, 1), q(1, 5)], vec![q(-3, 4), q(0, 1)]];
        let mut dup = Vec::new();
        for col in &base {
            for _ in 0..3 {
                dup.push(col.clone());
            }
        }
        for atom in [
            MultiIndexList::new(vec![vec![1, 0]], 2),
            MultiIndexList::new(vec![vec![2, 1], vec![1, 0]], 2),
            MultiIndexList::new(vec![vec![0, 2], vec![1, 1], vec![1, 0]], 2),
        ] {
            assert_eq!(
                eval_mean_atom(&atom, MeanBasis::PowerMean, &base).unwrap(),
                eval_mean_atom(&atom, MeanBasis::PowerMean, &dup).unwrap(),
                "atom {atom}"
            );
        }
    }

    #[test]
    fn dualize_means_retags() {
        // 5 s̄^(1,1) − 4 s̄^(2,1) − s̄^(1) → same coefficients on m̄ atoms
        let pcost = MeanPoly::from_terms(
            MeanBasis::PowerMean,
            1,
            [
                (MultiIndexList::from_parts(&[1, 1]), q(5, 1)),
                (MultiIndexList::from_parts(&[2, 1]), q(-4, 1)),
                (MultiIndexList::from_parts(&[1]), q(-1, 1)),
            ],
        );
        let qcost = dualize_means(&pcost).unwrap();
        assert_eq!(qcost.basis(), MeanBasis::MonomialMean);
        assert_eq!(qcost.coeffs(), pcost.coeffs());
        let zero = MeanPoly::new(MeanBasis::PowerMean, 1);
        assert!(dualize_means(&zero).unwrap().coeffs().is_empty());
    }

    #[test]
    fn sym_grad_matches_finite_differences() {
        let pcost = SymPoly::from_terms(
            SymBasis::PowerSum,
            [(p(&[2, 1]), q(3, 2)), (p(&[1, 1]), q(-1, 3)), (p(&[3]), q(2, 7))],
        );
        let x = vec![0.3, -0.7, 0.51, 0.11];
        let (v, g) = pcost.eval_grad_f64(&x).unwrap();
        let vf: f64 = pcost.eval(&x).unwrap();
        assert!((v - vf).abs() < 1e-12);
        let h = 1e-6;
        for i in 0..x.len() {
            let mut xp = x.clone();
            xp[i] += h;
            let mut xm = x.clone();
            xm[i] -= h;
            let fd: f64 =
                (pcost.eval(&xp).unwrap() - pcost.eval::<f64>(&xm).unwrap()) / (2.0 * h);
            assert!((g[i] - fd).abs() < 1e-5, "i = {i}: {} vs {}", g[i], fd);
        }
    }

    #[test]
    fn mean_grad_matches_finite_differences() {
        let pcost = MeanPoly::from_terms(
            MeanBasis::MonomialMean,
            2,
            [
                (MultiIndexList::new(vec![vec![1, 1], vec![1, 0]], 2), q(2, 1)),
                (MultiIndexList::new(vec![vec![2, 0]], 2), q(-1, 2)),
            ],
        );
        let cols = vec![vec![0.4, -0.2], vec![0.1, 0.9], vec![-0.5, 0.3]];
        let (v, g) = pcost.eval_grad_f64(&cols).unwrap();
        let vf: f64 = pcost.eval(&cols).unwrap();
        assert!((v - vf).abs() < 1e-12);
        let h = 1e-6;
        for j in 0..cols.len() {
            for c in 0..2 {
                let mut cp = cols.clone();
                cp[j][c] += h;
                let mut cm = cols.clone();
                cm[j][c] -= h;
                let fd: f64 =
                    (pcost.eval(&cp).unwrap() - pcost.eval::<f64>(&cm).unwrap()) / (2.0 * h);
                assert!((g[j * 2 + c] - fd).abs() < 1e-5);
            }
        }
    }
}
