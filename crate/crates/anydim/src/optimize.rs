//! Domains, exact Euclidean projections, and the two minimizers backing
//! the bound sweeps: exhaustive search over binary simple graphs (exact,
//! in rational arithmetic) and seeded multi-start projected gradient
//! descent with Armijo backtracking (heuristic upper estimates).
//!
//! Both minimizers reduce their candidates with an associative min keyed
//! by `(value, index)`, so results are identical for any thread count.

use crate::definetti::{gap_bound, substream_rng, RateCase};
use crate::graphalg::{
    dualize_graph_density, dualize_graph_numbers, simple_graph_count, GraphBasis, GraphClass,
    GraphPoly, SymMat,
};
use crate::scalar::rational_to_f64;
use crate::symfunc::{dualize_means, dualize_symfunc, m_to_s, MeanPoly, SymBasis, SymPoly};
use crate::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;

/// Feasible sets with exact Euclidean projections (except the discrete
/// graph domain, which is searched exhaustively instead).
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// `[lo, hi]^len`, the flattening of a product set `Θ^n ⊂ ℝ^{d×n}`.
    Box { lo: f64, hi: f64, len: usize },
    /// `{x ∈ ℝ^len : ‖x‖₁ ≤ radius}`.
    L1Ball { radius: f64, len: usize },
    /// The probability simplex `{x ≥ 0, Σx = 1}`.
    VecSimplex { len: usize },
    /// Symmetric `n×n` matrices with `X ≥ 0` entrywise and `1ᵀX1 = weight`,
    /// coordinatized by the upper triangle.
    MatrixSimplex { n: usize, weight: f64 },
    /// All simple graphs on `n` labeled vertices (discrete).
    BinarySimpleGraphs { n: usize },
}

impl Domain {
    /// Number of optimization coordinates.
    pub fn dim(&self) -> usize {
        match *self {
            Domain::Box { len, .. } => len,
            Domain::L1Ball { len, .. } => len,
            Domain::VecSimplex { len } => len,
            Domain::MatrixSimplex { n, .. } => n * (n + 1) / 2,
            Domain::BinarySimpleGraphs { n } => n * (n - 1) / 2,
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match *self {
            Domain::Box { lo, hi, .. } => x.iter().all(|&v| v >= lo - tol && v <= hi + tol),
            Domain::L1Ball { radius, .. } => x.iter().map(|v| v.abs()).sum::<f64>() <= radius + tol,
            Domain::VecSimplex { .. } => {
                x.iter().all(|&v| v >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol
            }
            Domain::MatrixSimplex { n, weight } => {
                let mut total = 0.0;
                let mut k = 0;
                for i in 0..n {
                    for j in i..n {
                        if x[k] < -tol {
                            return false;
                        }
                        total += if i == j { x[k] } else { 2.0 * x[k] };
                        k += 1;
                    }
                }
                (total - weight).abs() <= tol
            }
            Domain::BinarySimpleGraphs { .. } => x.iter().all(|&v| v == 0.0 || v == 1.0),
        }
    }

    /// Exact Euclidean projection onto the domain.
    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        match *self {
            Domain::Box { lo, hi, .. } => Ok(y.iter().map(|&v| v.clamp(lo, hi)).collect()),
            Domain::VecSimplex { .. } => Ok(project_weighted_simplex(
                y,
                &vec![1.0; y.len()],
                1.0,
            )),
            Domain::L1Ball { radius, .. } => {
                let norm: f64 = y.iter().map(|v| v.abs()).sum();
                if norm <= radius {
                    return Ok(y.to_vec());
                }
                let abs: Vec<f64> = y.iter().map(|v| v.abs()).collect();
                let proj = project_weighted_simplex(&abs, &vec![1.0; y.len()], radius);
                Ok(proj.iter().zip(y).map(|(&p, &v)| p * v.signum()).collect())
            }
            Domain::MatrixSimplex { n, weight } => {
                // upper-triangle coordinates carry weight 1 on the diagonal
                // and 2 off it, in both the metric and the constraint, so
                // the projection is a uniform shift with one threshold
                let mut weights = Vec::with_capacity(self.dim());
                for i in 0..n {
                    for j in i..n {
                        weights.push(if i == j { 1.0 } else { 2.0 });
                    }
                }
                Ok(project_weighted_simplex(y, &weights, weight))
            }
            Domain::BinarySimpleGraphs { .. } => Err(Error::NoProjection),
        }
    }

    /// Uniform draw from the bounding box followed by projection.
    pub fn random_point(&self, rng: &mut impl Rng) -> Result<Vec<f64>> {
        let raw: Vec<f64> = match *self {
            Domain::Box { lo, hi, len } => (0..len).map(|_| rng.gen_range(lo..=hi)).collect(),
            Domain::L1Ball { radius, len } => {
                (0..len).map(|_| rng.gen_range(-radius..=radius)).collect()
            }
            Domain::VecSimplex { len } => (0..len).map(|_| rng.gen_range(0.0..=1.0)).collect(),
            Domain::MatrixSimplex { weight, .. } => {
                (0..self.dim()).map(|_| rng.gen_range(0.0..=weight)).collect()
            }
            Domain::BinarySimpleGraphs { .. } => return Err(Error::NoProjection),
        };
        self.project(&raw)
    }
}

/// Projection onto `{u ≥ 0, Σ w_α u_α = total}` in the metric
/// `Σ w_α (u_α − y_α)²`: the optimum is `u_α = max(0, y_α − t)` with a
/// single threshold `t`, found exactly by scanning sorted breakpoints.
fn project_weighted_simplex(y: &[f64], w: &[f64], total: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| y[b].total_cmp(&y[a]));
    // Largest prefix k with y_(k) > t_k; the k = 1 candidate is always
    // valid, and threshold ties only add zero-sized terms, so this rule is
    // robust to ulp-level noise in the sorted values.
    let mut acc_wy = 0.0;
    let mut acc_w = 0.0;
    let mut t = f64::NEG_INFINITY;
    for &idx in &order {
        acc_wy += w[idx] * y[idx];
        acc_w += w[idx];
        let cand = (acc_wy - total) / acc_w;
        if y[idx] > cand {
            t = cand;
        }
    }
    let out: Vec<f64> = y.iter().map(|&v| (v - t).max(0.0)).collect();
    debug_assert!(
        {
            let s: f64 = out.iter().zip(w).map(|(&u, &wi)| u * wi).sum();
            (s - total).abs() <= 1e-6 * (1.0 + total.abs())
        },
        "projection infeasible for y = {y:?}, w = {w:?}, total = {total}"
    );
    out
}

/// Solver settings; identical seeds and restart counts give identical
/// results regardless of thread count.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub init_step: f64,
    pub shrink: f64,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            restarts: 256,
            max_iters: 2000,
            init_step: 1.0,
            shrink: 0.5,
            tol: 1e-10,
            seed: 0,
        }
    }
}

/// Whether a bound is an exact optimum or a heuristic upper estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Exact,
    HeuristicUpper,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::Exact => "exact",
            BoundKind::HeuristicUpper => "heuristic_upper",
        }
    }
}

/// One computed bound: the value, the point attaining it, and provenance.
#[derive(Debug, Clone)]
pub struct BoundRecord {
    pub n: usize,
    pub value: f64,
    /// Present only for exhaustive (exact) minimization.
    pub value_exact: Option<BigRational>,
    pub minimizer: Vec<f64>,
    /// Upper-triangle bitmask of the optimal graph, for discrete searches.
    pub graph_mask: Option<u64>,
    pub kind: BoundKind,
    pub restarts_used: usize,
    pub best_restart: usize,
}

/// An objective with a value and (optionally analytic) gradient.
pub trait Objective: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        // central differences fallback
        let h = 1e-6;
        let mut g = vec![0.0; x.len()];
        let mut xp = x.to_vec();
        for i in 0..x.len() {
            let orig = xp[i];
            xp[i] = orig + h;
            let fp = self.value(&xp);
            xp[i] = orig - h;
            let fm = self.value(&xp);
            xp[i] = orig;
            g[i] = (fp - fm) / (2.0 * h);
        }
        (self.value(x), g)
    }
}

/// Ready-made objectives wrapping the crate's polynomial types.
pub mod objectives {
    use super::*;

    /// A symmetric-function cost on `ℝ^n`, evaluated through the
    /// power-sum form (analytic gradient).
    pub struct SymCost {
        s_form: SymPoly,
        n: usize,
    }

    impl SymCost {
        pub fn new(p: &SymPoly, n: usize) -> Result<Self> {
            let s_form = match p.basis() {
                SymBasis::PowerSum => p.clone(),
                SymBasis::MonomialSum => m_to_s(p)?,
            };
            Ok(SymCost { s_form, n })
        }
    }

    impl Objective for SymCost {
        fn dim(&self) -> usize {
            self.n
        }
        fn value(&self, x: &[f64]) -> f64 {
            self.s_form.eval(x).expect("power-sum evaluation is total")
        }
        fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
            self.s_form.eval_grad_f64(x).expect("power-sum gradient is total")
        }
    }

    /// A mean-basis cost on `ℝ^{d×n}`, flattened column-major.
    pub struct MeanCost {
        p: MeanPoly,
        n: usize,
    }

    impl MeanCost {
        pub fn new(p: &MeanPoly, n: usize) -> Result<Self> {
            if n < p.max_len() {
                return Err(Error::DimensionTooSmall { need: p.max_len(), got: n });
            }
            Ok(MeanCost { p: p.clone(), n })
        }

        fn columns(&self, x: &[f64]) -> Vec<Vec<f64>> {
            let d = self.p.ambient_dim();
            x.chunks(d).map(|c| c.to_vec()).collect()
        }
    }

    impl Objective for MeanCost {
        fn dim(&self) -> usize {
            self.n * self.p.ambient_dim()
        }
        fn value(&self, x: &[f64]) -> f64 {
            self.p.eval(&self.columns(x)).expect("dimension checked at construction")
        }
        fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
            self.p
                .eval_grad_f64(&self.columns(x))
                .expect("dimension checked at construction")
        }
    }

    /// A graph-polynomial cost on symmetric matrices, in upper-triangle
    /// coordinates.
    pub struct GraphCost {
        p: GraphPoly,
        n: usize,
    }

    impl GraphCost {
        pub fn new(p: &GraphPoly, n: usize) -> Result<Self> {
            if n < p.max_vertices() {
                return Err(Error::DimensionTooSmall { need: p.max_vertices(), got: n });
            }
            Ok(GraphCost { p: p.clone(), n })
        }
    }

    impl Objective for GraphCost {
        fn dim(&self) -> usize {
            self.n * (self.n + 1) / 2
        }
        fn value(&self, x: &[f64]) -> f64 {
            self.p
                .eval(&SymMat::from_upper_coords(self.n, x))
                .expect("dimension checked at construction")
        }
        fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
            self.p
                .eval_grad_upper(&SymMat::from_upper_coords(self.n, x))
                .expect("dimension checked at construction")
        }
    }

    /// Sign-flipped objective, used to estimate suprema by minimization.
    pub struct Negated<'a, O: Objective>(pub &'a O);

    impl<O: Objective> Objective for Negated<'_, O> {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn value(&self, x: &[f64]) -> f64 {
            -self.0.value(x)
        }
        fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
            let (v, mut g) = self.0.value_grad(x);
            for gi in &mut g {
                *gi = -*gi;
            }
            (-v, g)
        }
    }

    /// Closure-backed objective for tests and ad hoc problems.
    pub struct FnCost<F: Fn(&[f64]) -> f64 + Sync> {
        pub dim: usize,
        pub f: F,
    }

    impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnCost<F> {
        fn dim(&self) -> usize {
            self.dim
        }
        fn value(&self, x: &[f64]) -> f64 {
            (self.f)(x)
        }
    }
}

/// Multi-start projected gradient descent with Armijo backtracking.
/// Restart `r` draws its start point from substream `r` of the master
/// seed; the best restart wins, ties broken by restart index.
pub fn minimize_multistart(
    obj: &impl Objective,
    dom: &Domain,
    cfg: &SolverConfig,
) -> Result<BoundRecord> {
    if matches!(dom, Domain::BinarySimpleGraphs { .. }) {
        return Err(Error::NoProjection);
    }
    assert_eq!(obj.dim(), dom.dim(), "objective/domain dimension mismatch");
    let results: Vec<(f64, usize, Vec<f64>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream_rng(cfg.seed, r as u64);
            let x0 = dom.random_point(&mut rng).expect("continuous domain");
            let (x, fx) = projected_gradient_descent(obj, dom, x0, cfg);
            (fx, r, x)
        })
        .collect();
    let best = results
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("at least one restart");
    Ok(BoundRecord {
        n: dom.dim(),
        value: best.0,
        value_exact: None,
        minimizer: best.2,
        graph_mask: None,
        kind: BoundKind::HeuristicUpper,
        restarts_used: cfg.restarts,
        best_restart: best.1,
    })
}

fn projected_gradient_descent(
    obj: &impl Objective,
    dom: &Domain,
    x0: Vec<f64>,
    cfg: &SolverConfig,
) -> (Vec<f64>, f64) {
    let mut x = x0;
    let mut fx = obj.value(&x);
    for _ in 0..cfg.max_iters {
        let (f, g) = obj.value_grad(&x);
        let mut step = cfg.init_step;
        let mut accepted = None;
        while step > 1e-18 {
            let cand: Vec<f64> =
                x.iter().zip(&g).map(|(&xi, &gi)| xi - step * gi).collect();
            let y = dom.project(&cand).expect("continuous domain");
            let fy = obj.value(&y);
            let decrease: f64 =
                g.iter().zip(y.iter().zip(&x)).map(|(&gi, (&yi, &xi))| gi * (yi - xi)).sum();
            if fy <= f + 1e-4 * decrease {
                accepted = Some((y, fy));
                break;
            }
            step *= cfg.shrink;
        }
        let Some((y, fy)) = accepted else { break };
        let move_norm: f64 =
            y.iter().zip(&x).map(|(&a, &b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        x = y;
        fx = fy;
        if move_norm <= cfg.tol {
            break;
        }
    }
    (x, fx)
}

/// A term of an exactly evaluable discrete objective: a graph atom read in
/// one of the counting bases, applied to the graph or its complement.
#[derive(Debug, Clone)]
pub struct ExhaustiveTerm {
    pub coeff: BigRational,
    pub atom: GraphClass,
    pub basis: GraphBasis,
    pub complement: bool,
}

/// An exact objective over binary simple graphs.
#[derive(Debug, Clone)]
pub struct ExhaustiveCost {
    pub terms: Vec<ExhaustiveTerm>,
}

impl ExhaustiveCost {
    pub fn from_poly(p: &GraphPoly) -> Self {
        let terms = p
            .coeffs()
            .iter()
            .map(|(atom, c)| ExhaustiveTerm {
                coeff: c.clone(),
                atom: atom.clone(),
                basis: p.basis(),
                complement: false,
            })
            .collect();
        ExhaustiveCost { terms }
    }

    /// The two-sided density objective `t_inj(H; X) + t_inj(H; 1 − X)`.
    pub fn ramsey(h: &GraphClass) -> Self {
        ExhaustiveCost {
            terms: vec![
                ExhaustiveTerm {
                    coeff: BigRational::one(),
                    atom: h.clone(),
                    basis: GraphBasis::TInj,
                    complement: false,
                },
                ExhaustiveTerm {
                    coeff: BigRational::one(),
                    atom: h.clone(),
                    basis: GraphBasis::TInj,
                    complement: true,
                },
            ],
        }
    }

    /// Per-term integer weights and the common denominator at size `n`,
    /// so a graph's objective is `Σ_j N_j·count_j / D` with `count_j` an
    /// embedding count.
    fn integer_terms(&self, n: usize) -> Result<(Vec<ScoredTerm>, BigInt)> {
        let mut effective: Vec<BigRational> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let k = t.atom.n_vertices();
            let scale = match t.basis {
                GraphBasis::Hom | GraphBasis::Inj => BigRational::one(),
                GraphBasis::T => {
                    BigRational::new(BigInt::one(), BigInt::from(n as u64).pow(k as u32))
                }
                GraphBasis::TInj => {
                    let d = crate::combinat::falling_factorial(n as u64, k as u64);
                    if d.is_zero() {
                        return Err(Error::DimensionTooSmall { need: k, got: n });
                    }
                    BigRational::new(BigInt::one(), d)
                }
                GraphBasis::MGraphSum => {
                    BigRational::new(BigInt::one(), BigInt::from(t.atom.aut_count()))
                }
            };
            effective.push(&t.coeff * scale);
        }
        let mut denom = BigInt::one();
        for e in &effective {
            denom = denom.lcm(e.denom());
        }
        let mut out = Vec::with_capacity(self.terms.len());
        for (t, e) in self.terms.iter().zip(&effective) {
            let weight_big = e.numer() * (&denom / e.denom());
            let weight = weight_big
                .to_i128()
                .ok_or_else(|| Error::SizeLimit("integer weight exceeds i128".into()))?;
            let injective = matches!(
                t.basis,
                GraphBasis::Inj | GraphBasis::TInj | GraphBasis::MGraphSum
            );
            out.push(ScoredTerm {
                weight,
                pattern: PatternBits::new(&t.atom),
                complement: t.complement,
                injective,
            });
        }
        Ok((out, denom))
    }

    /// Exact rational evaluation at an arbitrary 0/1 adjacency, for
    /// cross-checks against the fast integer path.
    pub fn eval_exact(&self, x: &SymMat<BigRational>) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for t in &self.terms {
            let point = if t.complement { x.complement_simple() } else { x.clone() };
            let single =
                GraphPoly::from_terms(t.basis, [(t.atom.clone(), t.coeff.clone())]);
            acc += single.eval(&point)?;
        }
        Ok(acc)
    }
}

/// A term lowered to integer scoring: `weight · count(pattern)`.
#[derive(Debug, Clone)]
struct ScoredTerm {
    weight: i128,
    pattern: PatternBits,
    complement: bool,
    injective: bool,
}

/// A pattern prepared for bit-parallel embedding counts. Patterns with
/// loops never embed into simple graphs, so they count zero.
#[derive(Debug, Clone)]
struct PatternBits {
    k: usize,
    rows: Vec<u16>,
    has_loop: bool,
}

impl PatternBits {
    fn new(atom: &GraphClass) -> Self {
        let rep = atom.representative();
        let k = rep.n_vertices();
        let mut rows = vec![0u16; k];
        let mut has_loop = false;
        for i in 0..k {
            if rep.get(i, i) > 0 {
                has_loop = true;
            }
            for j in 0..k {
                if i != j && rep.get(i, j) > 0 {
                    rows[i] |= 1 << j;
                }
            }
        }
        PatternBits { k, rows, has_loop }
    }

    /// Embedding count into the graph given by adjacency bit rows.
    fn count(&self, rows: &[u64], n: usize, injective: bool) -> u64 {
        if self.has_loop {
            return 0;
        }
        if injective && n < self.k {
            return 0;
        }
        let mut assign = vec![0usize; self.k];
        let mut count = 0u64;
        self.dfs(rows, n, injective, 0, 0u64, &mut assign, &mut count);
        count
    }

    fn dfs(
        &self,
        rows: &[u64],
        n: usize,
        injective: bool,
        depth: usize,
        used: u64,
        assign: &mut [usize],
        count: &mut u64,
    ) {
        if depth == self.k {
            *count += 1;
            return;
        }
        'cand: for c in 0..n {
            if injective && (used >> c) & 1 == 1 {
                continue;
            }
            let prow = self.rows[depth];
            for u in 0..depth {
                if (prow >> u) & 1 == 1 && (rows[assign[u]] >> c) & 1 == 0 {
                    continue 'cand;
                }
            }
            // a pattern edge from `depth` to itself cannot occur (no loops)
            assign[depth] = c;
            self.dfs(rows, n, injective, depth + 1, used | (1 << c), assign, count);
        }
    }
}

fn adjacency_rows(n: usize, mask: u64) -> Vec<u64> {
    let mut rows = vec![0u64; n];
    let mut bit = 0;
    for i in 0..n {
        for j in i + 1..n {
            if (mask >> bit) & 1 == 1 {
                rows[i] |= 1 << j;
                rows[j] |= 1 << i;
            }
            bit += 1;
        }
    }
    rows
}

fn complement_rows(rows: &[u64], n: usize) -> Vec<u64> {
    let all = (1u64 << n) - 1;
    rows.iter()
        .enumerate()
        .map(|(i, &r)| (!r & all) & !(1u64 << i))
        .collect()
}

/// Exact global minimum over all `2^{n(n−1)/2}` labeled simple graphs,
/// tie-broken by the smallest upper-triangle bitmask. `n ≤ 7` by default;
/// `n = 8` needs `allow_large` (a parallel `2^28` scan).
pub fn minimize_exhaustive(
    cost: &ExhaustiveCost,
    n: usize,
    allow_large: bool,
) -> Result<BoundRecord> {
    if n > 8 || (n == 8 && !allow_large) {
        return Err(Error::SizeLimit(format!(
            "exhaustive search limited to n ≤ 7 (n = 8 behind the opt-in flag); got {n}"
        )));
    }
    let count = simple_graph_count(n)?;
    let (terms, denom) = cost.integer_terms(n)?;
    let (best_score, best_mask) = (0..count)
        .into_par_iter()
        .map(|mask| {
            let rows = adjacency_rows(n, mask);
            let mut comp: Option<Vec<u64>> = None;
            let mut score: i128 = 0;
            for t in &terms {
                let r = if t.complement {
                    comp.get_or_insert_with(|| complement_rows(&rows, n))
                } else {
                    &rows
                };
                score += t.weight * t.pattern.count(r, n, t.injective) as i128;
            }
            (score, mask)
        })
        .min()
        .expect("nonempty graph stream");
    let value_exact = BigRational::new(BigInt::from(best_score), denom);
    let x: SymMat<f64> = SymMat::from_simple_mask(n, best_mask);
    Ok(BoundRecord {
        n,
        value: rational_to_f64(&value_exact),
        value_exact: Some(value_exact),
        minimizer: x.upper_coords(),
        graph_mask: Some(best_mask),
        kind: BoundKind::Exact,
        restarts_used: 0,
        best_restart: 0,
    })
}

/// Multi-start estimate of `sup |q|` over a continuous domain: a lower
/// estimate of the true supremum, flagged heuristic by construction.
pub fn sup_norm_estimate(
    obj: &impl Objective,
    dom: &Domain,
    cfg: &SolverConfig,
) -> Result<f64> {
    let low = minimize_multistart(obj, dom, cfg)?;
    let high = minimize_multistart(&objectives::Negated(obj), dom, cfg)?;
    Ok(low.value.abs().max(high.value.abs()))
}

/// One sweep problem: a cost in one of the four settings plus its domain
/// family.
#[derive(Debug, Clone)]
pub enum SweepSetting {
    /// Power-mean cost over boxes `[lo, hi]^{d×n}`.
    Means { cost: MeanPoly, lo: f64, hi: f64 },
    /// Power-sum cost over `ℓ₁` balls or simplices on `ℝ^n`.
    SymFns { cost: SymPoly, domain: VecDomain },
    /// Density cost over binary simple graphs (exact search).
    GraphDensity { cost: GraphPoly },
    /// Homomorphism-number cost over matrix simplices of the given weight.
    GraphNumbers { cost: GraphPoly, weight: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VecDomain {
    L1Ball { radius: f64 },
    Simplex,
}

/// A sweep problem plus optional rate-bound inputs: the level `k` of the
/// dual cost and a known bound on `‖q_k‖` (estimated when absent where
/// feasible).
#[derive(Debug, Clone)]
pub struct SweepProblem {
    pub setting: SweepSetting,
    pub rate_k: Option<usize>,
    pub q_norm_hint: Option<f64>,
}

/// One row of a bound sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub n: usize,
    pub lower: BoundRecord,
    pub upper: BoundRecord,
    pub gap: Option<f64>,
}

/// Runs the full pipeline for each `n`: minimize the cost for `u_n`,
/// dualize and minimize for `ℓ_n`, and attach the theoretical gap bound
/// where the setting provides one.
pub fn bound_sweep(
    problem: &SweepProblem,
    n_range: impl IntoIterator<Item = usize>,
    cfg: &SolverConfig,
    allow_large: bool,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for n in n_range {
        let row = match &problem.setting {
            SweepSetting::Means { cost, lo, hi } => {
                let d = cost.ambient_dim();
                let dom = Domain::Box { lo: *lo, hi: *hi, len: d * n };
                let upper =
                    minimize_multistart(&objectives::MeanCost::new(cost, n)?, &dom, cfg)?;
                let q = dualize_means(cost)?;
                let lower =
                    minimize_multistart(&objectives::MeanCost::new(&q, n)?, &dom, cfg)?;
                let k = problem.rate_k.unwrap_or(cost.degree() as usize);
                let q_sup = match problem.q_norm_hint {
                    Some(v) => v,
                    None => {
                        let qk = objectives::MeanCost::new(&q, k)?;
                        let kdom = Domain::Box { lo: *lo, hi: *hi, len: d * k };
                        sup_norm_estimate(&qk, &kdom, cfg)?
                    }
                };
                let gap = gap_bound(RateCase::TotalVariation { k, n, q_sup }).ok();
                SweepRow { n, lower, upper, gap }
            }
            SweepSetting::SymFns { cost, domain } => {
                let dom = match domain {
                    VecDomain::L1Ball { radius } => {
                        Domain::L1Ball { radius: *radius, len: n }
                    }
                    VecDomain::Simplex => Domain::VecSimplex { len: n },
                };
                let upper =
                    minimize_multistart(&objectives::SymCost::new(cost, n)?, &dom, cfg)?;
                let q = dualize_symfunc(cost, n)?;
                let lower =
                    minimize_multistart(&objectives::SymCost::new(&q, n)?, &dom, cfg)?;
                // the dual is rebuilt at k = n, so the divisibility-based
                // rate bound is vacuous here; no gap column
                SweepRow { n, lower, upper, gap: None }
            }
            SweepSetting::GraphDensity { cost } => {
                let upper =
                    minimize_exhaustive(&ExhaustiveCost::from_poly(cost), n, allow_large)?;
                let q = dualize_graph_density(cost)?;
                let lower =
                    minimize_exhaustive(&ExhaustiveCost::from_poly(&q), n, allow_large)?;
                // t_inj lies in [0,1] on simple graphs, so Σ|c| bounds ‖q‖
                let k = problem.rate_k.unwrap_or(cost.max_vertices());
                let q_sup = problem.q_norm_hint.unwrap_or_else(|| {
                    cost.coeffs().values().map(|c| rational_to_f64(c).abs()).sum()
                });
                let gap = gap_bound(RateCase::TotalVariation { k, n, q_sup }).ok();
                SweepRow { n, lower, upper, gap }
            }
            SweepSetting::GraphNumbers { cost, weight } => {
                let dom = Domain::MatrixSimplex { n, weight: *weight };
                let upper =
                    minimize_multistart(&objectives::GraphCost::new(cost, n)?, &dom, cfg)?;
                let q = dualize_graph_numbers(cost, n)?;
                let lower =
                    minimize_multistart(&objectives::GraphCost::new(&q, n)?, &dom, cfg)?;
                SweepRow { n, lower, upper, gap: None }
            }
        };
        rows.push(row);
    }
    Ok(rows)
}
