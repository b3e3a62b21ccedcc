//! Multigraph algebra: homomorphism and injective counts, densities,
//! quotient graphs, the graph refinement poset with its counts
//! `R_{[G],[H]}`, and the two graph dual-cost pipelines.
//!
//! Patterns are multigraphs with loops, stored as symmetric integer
//! adjacency matrices whose diagonal holds loop multiplicities. A quotient
//! `X/P_f` merges vertices along the fibers of `f`; each upper-triangle
//! entry of `X` lands in exactly one entry of the quotient, so the total
//! edge weight `Σ_{i≤j} X_{ij}` is conserved. `G` refines `H` when some
//! surjection of vertices quotients `G` onto `H`, and `R_{[G],[H]}` counts
//! those surjections against the canonical representative of `H`.

use crate::combinat::{factorial, falling_factorial, Partition};
use crate::scalar::Scalar;
use crate::symfunc::TransitionMatrix;
use crate::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

/// Hard cap on vertices for brute-force canonicalization.
pub const CANON_VERTEX_LIMIT: usize = 9;

/// A multigraph with loops on labeled vertices `0..n`.
///
/// `adj` is a full symmetric `n×n` matrix of nonnegative multiplicities;
/// `adj[i][i]` is the number of self-loops at `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiGraph {
    n: usize,
    adj: Vec<u32>,
}

impl MultiGraph {
    pub fn empty(n: usize) -> Self {
        MultiGraph { n, adj: vec![0; n * n] }
    }

    /// Builds from an edge list; repeated pairs raise multiplicity,
    /// `(i, i)` adds a loop. Indices are 0-based.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = MultiGraph::empty(n);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert!(a < self.n && b < self.n);
        self.adj[a * self.n + b] += 1;
        if a != b {
            self.adj[b * self.n + a] += 1;
        }
    }

    fn remove_edge(&mut self, a: usize, b: usize) {
        self.adj[a * self.n + b] -= 1;
        if a != b {
            self.adj[b * self.n + a] -= 1;
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.adj[i * self.n + j]
    }

    /// `Σ_{i≤j} adj[i][j]` — loops count once.
    pub fn edge_weight(&self) -> u32 {
        let mut w = 0;
        for i in 0..self.n {
            for j in i..self.n {
                w += self.get(i, j);
            }
        }
        w
    }

    pub fn is_simple(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i) == 0) && self.adj.iter().all(|&m| m <= 1)
    }

    fn incident_weight(&self, v: usize) -> u32 {
        let mut w = 2 * self.get(v, v);
        for j in 0..self.n {
            if j != v {
                w += self.get(v, j);
            }
        }
        w
    }

    /// Row-major upper-triangle sequence including the diagonal.
    pub fn upper_seq(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.n * (self.n + 1) / 2);
        for i in 0..self.n {
            for j in i..self.n {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn from_upper_seq(n: usize, seq: &[u32]) -> MultiGraph {
        assert_eq!(seq.len(), n * (n + 1) / 2);
        let mut g = MultiGraph::empty(n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                g.adj[i * n + j] = seq[k];
                g.adj[j * n + i] = seq[k];
                k += 1;
            }
        }
        g
    }

    fn permuted(&self, perm: &[usize]) -> MultiGraph {
        let mut g = MultiGraph::empty(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                g.adj[perm[i] * self.n + perm[j]] = self.get(i, j);
            }
        }
        g
    }

    /// Disjoint union, relabeling `other` after `self`.
    pub fn disjoint_union(&self, other: &MultiGraph) -> MultiGraph {
        let n = self.n + other.n;
        let mut g = MultiGraph::empty(n);
        for i in 0..self.n {
            for j in 0..self.n {
                g.adj[i * n + j] = self.get(i, j);
            }
        }
        for i in 0..other.n {
            for j in 0..other.n {
                g.adj[(self.n + i) * n + (self.n + j)] = other.get(i, j);
            }
        }
        g
    }

    // Named graphs used throughout the examples.
    pub fn complete(n: usize) -> Self {
        let mut g = MultiGraph::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                g.add_edge(i, j);
            }
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = MultiGraph::empty(n);
        for i in 0..n.saturating_sub(1) {
            g.add_edge(i, i + 1);
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = MultiGraph::path(n);
        if n >= 3 {
            g.add_edge(n - 1, 0);
        }
        g
    }

    /// Triangle with a pendant edge: vertices `[4]`, edges
    /// `{1-2, 2-3, 2-4, 3-4}` in 1-based labels.
    pub fn triangle_pendant() -> Self {
        MultiGraph::from_edges(4, &[(0, 1), (1, 2), (1, 3), (2, 3)])
    }

    /// Loop-only graph `diag(λ)`: one vertex per part, with that many loops.
    pub fn from_diag(lambda: &Partition) -> Self {
        let n = lambda.len();
        let mut g = MultiGraph::empty(n);
        for (i, &p) in lambda.parts().iter().enumerate() {
            g.adj[i * n + i] = p;
        }
        g
    }
}

/// An isomorphism class of a multigraph with all isolated vertices
/// removed, keyed by the minimal upper-triangle sequence over all vertex
/// relabelings. Caches `|Aut(H)|`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GraphClass {
    rep: MultiGraph,
    aut: u64,
}

impl GraphClass {
    pub fn representative(&self) -> &MultiGraph {
        &self.rep
    }

    pub fn n_vertices(&self) -> usize {
        self.rep.n
    }

    /// `|H| = Σ_{i≤j} H_{ij}`.
    pub fn edge_count(&self) -> u32 {
        self.rep.edge_weight()
    }

    pub fn aut_count(&self) -> u64 {
        self.aut
    }

    /// `H! = Π_{i≤j} H_{ij}!`
    pub fn entry_factorial(&self) -> BigInt {
        let mut acc = BigInt::one();
        for i in 0..self.rep.n {
            for j in i..self.rep.n {
                acc *= factorial(self.rep.get(i, j) as u64);
            }
        }
        acc
    }

    pub fn is_simple(&self) -> bool {
        self.rep.is_simple()
    }
}

impl Ord for GraphClass {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // A strict refinement has strictly more vertices, so this order is
        // a linear extension of the refinement poset (coarser first).
        self.rep
            .n
            .cmp(&other.rep.n)
            .then_with(|| self.edge_count().cmp(&other.edge_count()))
            .then_with(|| self.rep.upper_seq().cmp(&other.rep.upper_seq()))
    }
}

impl PartialOrd for GraphClass {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GraphClass {
    /// Edge-list form matching the CLI atom syntax, e.g. `H{1-2,2-3}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H{{")?;
        let mut first = true;
        for i in 0..self.rep.n {
            for j in i..self.rep.n {
                for _ in 0..self.rep.get(i, j) {
                    if !first {
                        write!(f, ",")?;
                    }
                    write!(f, "{}-{}", i + 1, j + 1)?;
                    first = false;
                }
            }
        }
        write!(f, "}}")
    }
}

/// Canonicalizes a multigraph: strips isolated vertices and minimizes the
/// upper-triangle sequence over all relabelings of the remaining vertices.
pub fn canonical_form(g: &MultiGraph) -> Result<GraphClass> {
    let keep: Vec<usize> = (0..g.n).filter(|&v| g.incident_weight(v) > 0).collect();
    let n = keep.len();
    if n > CANON_VERTEX_LIMIT {
        return Err(Error::CanonSizeLimit { vertices: n, limit: CANON_VERTEX_LIMIT });
    }
    let mut stripped = MultiGraph::empty(n);
    for (a, &va) in keep.iter().enumerate() {
        for (b, &vb) in keep.iter().enumerate() {
            stripped.adj[a * n + b] = g.get(va, vb);
        }
    }
    let mut best: Option<(Vec<u32>, MultiGraph)> = None;
    let mut aut_of_best = 0u64;
    let mut perm: Vec<usize> = (0..n).collect();
    permute_all(&mut perm, &mut |p| {
        let cand = stripped.permuted(p);
        let seq = cand.upper_seq();
        match &mut best {
            Some((bseq, _)) => {
                if seq < *bseq {
                    best = Some((seq, cand));
                    aut_of_best = 1;
                } else if seq == *bseq {
                    aut_of_best += 1;
                }
            }
            None => {
                best = Some((seq, cand));
                aut_of_best = 1;
            }
        }
    });
    let (_, rep) = best.expect("permutation enumeration always yields a candidate");
    // Relabelings that reproduce the minimal form are exactly |Aut(H)|.
    Ok(GraphClass { rep, aut: aut_of_best })
}

pub(crate) fn permute_all(perm: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    // Heap's algorithm, iterative.
    let n = perm.len();
    f(perm);
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            f(perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// A point of the symmetric-matrix space: a weighted graph on `n` vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat<T> {
    n: usize,
    data: Vec<T>,
}

/// Weighted graphs with floating-point weights.
pub type WeightedGraphPoint = SymMat<f64>;

impl<T: Scalar> SymMat<T> {
    pub fn zeros(n: usize) -> Self {
        SymMat { n, data: vec![T::zero(); n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = SymMat::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.data[i * n + j] = v.clone();
                m.data[j * n + i] = v;
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v.clone();
        self.data[j * self.n + i] = v;
    }

    pub fn add_sym(&mut self, i: usize, j: usize, v: T) {
        let cur = self.data[i * self.n + j].clone();
        self.set_sym(i, j, cur + v);
    }

    /// `1ᵀ X 1` — every off-diagonal entry counted twice.
    pub fn total_sum(&self) -> T {
        let mut acc = T::zero();
        for v in &self.data {
            acc = acc + v.clone();
        }
        acc
    }

    /// `Σ_{i≤j} X_{ij}` — the multigraph edge weight.
    pub fn edge_weight(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.n {
            for j in i..self.n {
                acc = acc + self.get(i, j).clone();
            }
        }
        acc
    }

    /// Upper-triangle coordinates, row-major including the diagonal.
    pub fn upper_coords(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.n * (self.n + 1) / 2);
        for i in 0..self.n {
            for j in i..self.n {
                out.push(self.get(i, j).clone());
            }
        }
        out
    }

    pub fn from_upper_coords(n: usize, coords: &[T]) -> Self {
        assert_eq!(coords.len(), n * (n + 1) / 2);
        let mut m = SymMat::zeros(n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                m.set_sym(i, j, coords[k].clone());
                k += 1;
            }
        }
        m
    }

    /// 0/1 adjacency of a labeled simple graph from the bit order of the
    /// strict upper triangle (row-major, diagonal excluded).
    pub fn from_simple_mask(n: usize, mask: u64) -> Self {
        let mut m = SymMat::zeros(n);
        let mut bit = 0;
        for i in 0..n {
            for j in i + 1..n {
                if (mask >> bit) & 1 == 1 {
                    m.set_sym(i, j, T::one());
                }
                bit += 1;
            }
        }
        m
    }

    /// Complement within simple graphs: off-diagonal `1 − X`, zero diagonal.
    pub fn complement_simple(&self) -> Self {
        SymMat::from_fn(self.n, |i, j| {
            if i == j {
                T::zero()
            } else {
                T::one() - self.get(i, j).clone()
            }
        })
    }
}

impl MultiGraph {
    pub fn to_point<T: Scalar>(&self) -> SymMat<T> {
        SymMat::from_fn(self.n, |i, j| T::from_i64(self.get(i, j) as i64))
    }
}

/// The quotient point `X/P_f` for `f: [n] → [m]`: each upper-triangle
/// entry `X_{ab}` is added to the entry `{f(a), f(b)}` of the result.
/// Conserves `Σ_{i≤j}`.
pub fn quotient_point<T: Scalar>(x: &SymMat<T>, f: &[usize], m: usize) -> SymMat<T> {
    assert_eq!(f.len(), x.n());
    let mut out = SymMat::zeros(m);
    for a in 0..x.n() {
        for b in a..x.n() {
            out.add_sym(f[a], f[b], x.get(a, b).clone());
        }
    }
    out
}

/// Quotient of a pattern multigraph along `f`, same edge-set convention.
pub fn quotient_multigraph(g: &MultiGraph, f: &[usize], m: usize) -> MultiGraph {
    assert_eq!(f.len(), g.n);
    let mut out = MultiGraph::empty(m);
    for a in 0..g.n {
        for b in a..g.n {
            let w = g.get(a, b);
            if w == 0 {
                continue;
            }
            let (i, j) = (f[a].min(f[b]), f[a].max(f[b]));
            out.adj[i * m + j] += w;
            if i != j {
                out.adj[j * m + i] += w;
            }
        }
    }
    out
}

pub(crate) fn for_each_map(k: usize, n: usize, f: &mut impl FnMut(&[usize])) {
    if k == 0 {
        f(&[]);
        return;
    }
    if n == 0 {
        return;
    }
    let mut map = vec![0usize; k];
    loop {
        f(&map);
        let mut d = 0;
        loop {
            if d == k {
                return;
            }
            map[d] += 1;
            if map[d] < n {
                break;
            }
            map[d] = 0;
            d += 1;
        }
    }
}

/// The upper-triangle slots of a pattern with nonzero multiplicity.
fn pattern_slots(h: &MultiGraph) -> Vec<(usize, usize, u32)> {
    let mut slots = Vec::new();
    for i in 0..h.n {
        for j in i..h.n {
            let w = h.get(i, j);
            if w > 0 {
                slots.push((i, j, w));
            }
        }
    }
    slots
}

fn map_product<T: Scalar>(slots: &[(usize, usize, u32)], f: &[usize], x: &SymMat<T>) -> T {
    let mut prod = T::one();
    for &(i, j, w) in slots {
        let v = x.get(f[i], f[j]);
        if v.is_zero() {
            return T::zero();
        }
        prod = prod * v.powu(w);
    }
    prod
}

/// `hom(H; X) = Σ_{f: [|V(H)|] → [n]} Π_{i≤j} X_{f(i),f(j)}^{H_{ij}}`.
/// The empty pattern gives 1 for every `X`.
pub fn hom_number<T: Scalar>(h: &GraphClass, x: &SymMat<T>) -> T {
    let k = h.n_vertices();
    let slots = pattern_slots(&h.rep);
    let mut acc = T::zero();
    for_each_map(k, x.n(), &mut |f| {
        acc = acc.clone() + map_product(&slots, f, x);
    });
    acc
}

/// Same sum restricted to injective maps; zero when `n < |V(H)|`.
pub fn inj_number<T: Scalar>(h: &GraphClass, x: &SymMat<T>) -> T {
    let k = h.n_vertices();
    let n = x.n();
    if n < k {
        return T::zero();
    }
    let slots = pattern_slots(&h.rep);
    let mut acc = T::zero();
    let mut tuple = vec![0usize; k];
    inj_maps(n, k, &mut tuple, 0, 0u64, &mut |f| {
        acc = acc.clone() + map_product(&slots, f, x);
    });
    acc
}

fn inj_maps(
    n: usize,
    k: usize,
    tuple: &mut Vec<usize>,
    depth: usize,
    used: u64,
    f: &mut impl FnMut(&[usize]),
) {
    if depth == k {
        f(tuple);
        return;
    }
    for i in 0..n {
        if (used >> i) & 1 == 0 {
            tuple[depth] = i;
            inj_maps(n, k, tuple, depth + 1, used | (1 << i), f);
        }
    }
}

/// Homomorphism density `t(H; X) = hom(H; X) / n^{|V(H)|}`.
pub fn t_density<T: Scalar>(h: &GraphClass, x: &SymMat<T>) -> T {
    let k = h.n_vertices() as u32;
    hom_number(h, x) / T::from_i64(x.n() as i64).powu(k)
}

/// Injective density `t_inj(H; X) = inj(H; X) / (n)_{|V(H)|}`.
/// Errors when `(n)_{|V(H)|} = 0`, i.e. `n < |V(H)|`.
pub fn t_inj_density<T: Scalar>(h: &GraphClass, x: &SymMat<T>) -> Result<T> {
    let k = h.n_vertices();
    let n = x.n();
    let denom = falling_factorial(n as u64, k as u64);
    if denom.is_zero() {
        return Err(Error::DimensionTooSmall { need: k, got: n });
    }
    Ok(inj_number(h, x) / T::from_rational(&BigRational::from_integer(denom)))
}

/// Graph monomial sum `m^{[H]}(X) = inj(H; X)/|Aut(H)|` — the sum of the
/// distinct relabeled monomials `X^G` for `G` in the class of `H`.
pub fn m_graph_sum<T: Scalar>(h: &GraphClass, x: &SymMat<T>) -> T {
    inj_number(h, x) / T::from_i64(h.aut_count() as i64)
}

/// Counts surjections `f: V(G) → V(H)` whose quotient of `G`'s canonical
/// representative equals `H`'s canonical representative exactly.
/// The count does not depend on the representative chosen for `G`.
pub fn graph_refinement_count(g: &GraphClass, h: &GraphClass) -> Result<u64> {
    let ng = g.n_vertices();
    let nh = h.n_vertices();
    if ng > 8 || nh > 8 {
        return Err(Error::SizeLimit(format!(
            "refinement count limited to 8 vertices, got {ng} and {nh}"
        )));
    }
    if ng < nh || g.edge_count() != h.edge_count() {
        return Ok(0);
    }
    if nh == 0 {
        return Ok(if ng == 0 { 1 } else { 0 });
    }
    let mut count = 0u64;
    for_each_map(ng, nh, &mut |f| {
        let mut seen = 0u64;
        for &v in f {
            seen |= 1 << v;
        }
        if seen.count_ones() as usize != nh {
            return;
        }
        if quotient_multigraph(&g.rep, f, nh) == h.rep {
            count += 1;
        }
    });
    Ok(count)
}

/// All classes `G` with `|G| = |H|` that quotient onto `H`, including `H`
/// itself. Requires `|H| ≤ 5`.
pub fn graph_refinements(h: &GraphClass) -> Result<Vec<GraphClass>> {
    let w = h.edge_count();
    if w > 5 {
        return Err(Error::SizeLimit(format!(
            "refinement enumeration limited to edge weight 5, got {w}"
        )));
    }
    let nh = h.n_vertices();
    if nh == 0 {
        return Ok(vec![h.clone()]);
    }
    // Each vertex of a refinement must catch at least one edge end, and the
    // ends available inside the fiber of vertex v are bounded by v's
    // incident weight (loops supply two ends).
    let bounds: Vec<usize> = (0..nh).map(|v| h.rep.incident_weight(v) as usize).collect();
    let units: Vec<(usize, usize)> = {
        let mut u = Vec::new();
        for (i, j, wij) in pattern_slots(&h.rep) {
            for _ in 0..wij {
                u.push((i, j));
            }
        }
        u
    };
    let mut labeled: HashSet<(usize, Vec<u32>)> = HashSet::new();
    let mut sizes = vec![1usize; nh];
    loop {
        let total: usize = sizes.iter().sum();
        if total <= 2 * w as usize {
            collect_refinement_assignments(&sizes, &units, &mut labeled);
        }
        // advance the fiber-size vector
        let mut d = 0;
        loop {
            if d == nh {
                let mut classes = BTreeSet::new();
                for (n, seq) in labeled {
                    let g = MultiGraph::from_upper_seq(n, &seq);
                    classes.insert(canonical_form(&g)?);
                }
                return Ok(classes.into_iter().collect());
            }
            sizes[d] += 1;
            if sizes[d] <= bounds[d] {
                break;
            }
            sizes[d] = 1;
            d += 1;
        }
    }
}

fn collect_refinement_assignments(
    sizes: &[usize],
    units: &[(usize, usize)],
    labeled: &mut HashSet<(usize, Vec<u32>)>,
) {
    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0usize, |acc, &s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect();
    let total: usize = sizes.iter().sum();
    let mut g = MultiGraph::empty(total);
    fn rec(
        units: &[(usize, usize)],
        sizes: &[usize],
        offsets: &[usize],
        idx: usize,
        g: &mut MultiGraph,
        labeled: &mut HashSet<(usize, Vec<u32>)>,
    ) {
        if idx == units.len() {
            let n = g.n_vertices();
            if (0..n).all(|v| g.incident_weight(v) > 0) {
                labeled.insert((n, g.upper_seq()));
            }
            return;
        }
        let (i, j) = units[idx];
        if i == j {
            // a loop unit becomes any unordered pair inside the fiber
            for a in 0..sizes[i] {
                for b in a..sizes[i] {
                    let (va, vb) = (offsets[i] + a, offsets[i] + b);
                    g.add_edge(va, vb);
                    rec(units, sizes, offsets, idx + 1, g, labeled);
                    g.remove_edge(va, vb);
                }
            }
        } else {
            for a in 0..sizes[i] {
                for b in 0..sizes[j] {
                    let (va, vb) = (offsets[i] + a, offsets[j] + b);
                    g.add_edge(va, vb);
                    rec(units, sizes, offsets, idx + 1, g, labeled);
                    g.remove_edge(va, vb);
                }
            }
        }
    }
    rec(units, sizes, &offsets, 0, &mut g, labeled);
}

/// The refinement closure of a set of classes, sorted in canonical order.
pub fn refinement_closure(atoms: &[GraphClass]) -> Result<Vec<GraphClass>> {
    let mut out = BTreeSet::new();
    for a in atoms {
        out.insert(a.clone());
        for r in graph_refinements(a)? {
            out.insert(r);
        }
    }
    Ok(out.into_iter().collect())
}

/// All quotient classes of `H` together with the counts `R_{[H],[G]}`.
pub fn quotient_counts(h: &GraphClass) -> Result<BTreeMap<GraphClass, u64>> {
    let k = h.n_vertices();
    if k > 8 {
        return Err(Error::SizeLimit(format!(
            "quotient enumeration limited to 8 vertices, got {k}"
        )));
    }
    let mut out = BTreeMap::new();
    if k == 0 {
        out.insert(h.clone(), 1);
        return Ok(out);
    }
    for m in 1..=k {
        let mut labeled: HashMap<Vec<u32>, u64> = HashMap::new();
        for_each_map(k, m, &mut |f| {
            let mut seen = 0u64;
            for &v in f {
                seen |= 1 << v;
            }
            if seen.count_ones() as usize != m {
                return;
            }
            let q = quotient_multigraph(&h.rep, f, m);
            *labeled.entry(q.upper_seq()).or_insert(0) += 1;
        });
        for (seq, count) in labeled {
            let g = MultiGraph::from_upper_seq(m, &seq);
            let class = canonical_form(&g)?;
            // R counts surjections hitting the canonical representative
            // itself; each labeled form in the orbit has the same count.
            if class.rep == g {
                out.insert(class, count);
            }
        }
    }
    Ok(out)
}

/// Basis tags for linear combinations of graph atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphBasis {
    Hom,
    Inj,
    /// densities `t(H;·)`
    T,
    /// injective densities `t_inj(H;·)`
    TInj,
    /// graph monomial sums `m^{[H]}`
    MGraphSum,
}

/// An exact-rational linear combination of graph-class atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphPoly {
    basis: GraphBasis,
    coeffs: BTreeMap<GraphClass, BigRational>,
}

impl GraphPoly {
    pub fn new(basis: GraphBasis) -> Self {
        GraphPoly { basis, coeffs: BTreeMap::new() }
    }

    pub fn from_terms<I>(basis: GraphBasis, terms: I) -> Self
    where
        I: IntoIterator<Item = (GraphClass, BigRational)>,
    {
        let mut p = GraphPoly::new(basis);
        for (atom, c) in terms {
            p.add_term(atom, c);
        }
        p
    }

    pub fn add_term(&mut self, atom: GraphClass, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(atom.clone()).or_insert_with(BigRational::zero);
        *entry += c;
        if num::Zero::is_zero(entry) {
            self.coeffs.remove(&atom);
        }
    }

    pub fn basis(&self) -> GraphBasis {
        self.basis
    }

    pub fn coeffs(&self) -> &BTreeMap<GraphClass, BigRational> {
        &self.coeffs
    }

    pub fn coeff(&self, atom: &GraphClass) -> BigRational {
        self.coeffs.get(atom).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Max edge count over atoms with a nonzero coefficient.
    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(|h| h.edge_count()).max().unwrap_or(0)
    }

    pub fn max_vertices(&self) -> usize {
        self.coeffs.keys().map(|h| h.n_vertices()).max().unwrap_or(0)
    }

    pub fn eval<T: Scalar>(&self, x: &SymMat<T>) -> Result<T> {
        let mut acc = T::zero();
        for (atom, c) in &self.coeffs {
            let v = match self.basis {
                GraphBasis::Hom => hom_number(atom, x),
                GraphBasis::Inj => inj_number(atom, x),
                GraphBasis::T => t_density(atom, x),
                GraphBasis::TInj => t_inj_density(atom, x)?,
                GraphBasis::MGraphSum => m_graph_sum(atom, x),
            };
            acc = acc + T::from_rational(c) * v;
        }
        Ok(acc)
    }

    /// Value and gradient with respect to the upper-triangle coordinates
    /// (row-major including the diagonal).
    pub fn eval_grad_upper(&self, x: &SymMat<f64>) -> Result<(f64, Vec<f64>)> {
        let n = x.n();
        let ncoords = n * (n + 1) / 2;
        let mut value = 0.0;
        let mut grad = vec![0.0; ncoords];
        let upper_idx = |i: usize, j: usize| -> usize {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            a * n - a * (a + 1) / 2 + b
        };
        for (atom, c) in &self.coeffs {
            let k = atom.n_vertices();
            let (scale, injective) = match self.basis {
                GraphBasis::Hom => (1.0, false),
                GraphBasis::Inj => (1.0, true),
                GraphBasis::T => (1.0 / (n as f64).powi(k as i32), false),
                GraphBasis::TInj => {
                    if n < k {
                        return Err(Error::DimensionTooSmall { need: k, got: n });
                    }
                    let denom: f64 = (0..k).map(|i| (n - i) as f64).product();
                    (1.0 / denom, true)
                }
                GraphBasis::MGraphSum => (1.0 / atom.aut_count() as f64, true),
            };
            let cf = crate::scalar::rational_to_f64(c) * scale;
            let slots = pattern_slots(&atom.rep);
            let mut factors: Vec<(f64, f64)> = Vec::with_capacity(slots.len());
            let mut visit = |f: &[usize]| {
                // track zero factors so gradients at boundary points work
                let mut nonzero_prod = 1.0;
                let mut zeros = 0usize;
                let mut zero_slot = 0usize;
                factors.clear();
                for (s, &(i, j, w)) in slots.iter().enumerate() {
                    let v = *x.get(f[i], f[j]);
                    let fac = v.powi(w as i32);
                    factors.push((v, fac));
                    if fac == 0.0 {
                        zeros += 1;
                        zero_slot = s;
                    } else {
                        nonzero_prod *= fac;
                    }
                }
                if zeros == 0 {
                    value += cf * nonzero_prod;
                }
                if zeros > 1 {
                    return;
                }
                for (s, &(i, j, w)) in slots.iter().enumerate() {
                    let (v, fac) = factors[s];
                    let rest = if zeros == 0 {
                        nonzero_prod / fac
                    } else if s == zero_slot {
                        nonzero_prod
                    } else {
                        continue;
                    };
                    let dfac = w as f64 * v.powi(w as i32 - 1);
                    if dfac != 0.0 {
                        grad[upper_idx(f[i], f[j])] += cf * rest * dfac;
                    }
                }
            };
            if injective {
                if n >= k {
                    let mut tuple = vec![0usize; k];
                    inj_maps(n, k, &mut tuple, 0, 0u64, &mut visit);
                }
            } else {
                for_each_map(k, n, &mut visit);
            }
        }
        Ok((value, grad))
    }
}

impl fmt::Display for GraphPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.basis {
            GraphBasis::Hom => "hom",
            GraphBasis::Inj => "inj",
            GraphBasis::T => "t",
            GraphBasis::TInj => "tinj",
            GraphBasis::MGraphSum => "mg",
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

/// Expands a hom- or inj-basis polynomial into graph monomial sums via
/// `hom(H;·) = Σ_{[H] ≤_R [G]} R_{[H],[G]} m^{[G]}` and
/// `inj(H;·) = |Aut(H)| m^{[H]}`.
pub fn hom_to_m(p: &GraphPoly, degree_bound: u32) -> Result<GraphPoly> {
    if p.degree() > degree_bound || degree_bound > 5 {
        return Err(Error::SizeLimit(format!(
            "hom_to_m degree bound {degree_bound} too small for atoms up to {}",
            p.degree()
        )));
    }
    let mut out = GraphPoly::new(GraphBasis::MGraphSum);
    match p.basis {
        GraphBasis::Hom => {
            for (h, c) in &p.coeffs {
                for (g, r) in quotient_counts(h)? {
                    out.add_term(g, c * BigRational::from_integer(BigInt::from(r)));
                }
            }
        }
        GraphBasis::Inj => {
            for (h, c) in &p.coeffs {
                let aut = BigRational::from_integer(BigInt::from(h.aut_count()));
                out.add_term(h.clone(), c * aut);
            }
        }
        GraphBasis::MGraphSum => out = p.clone(),
        _ => {
            return Err(Error::MixedBasis("hom_to_m expects the hom or inj basis".into()));
        }
    }
    Ok(out)
}

/// The graph de Finetti basis-change matrix on a refinement-closed atom
/// set: row `[H]`, column `[G]` holds
/// `(H!/G!)·((k)_{|V(H)|}/k^{|V(G)|})·R_{[G],[H]}/R_{[H],[H]}` for
/// `[G] ≤_R [H]`. Requires `k ≥ 2·max edge count`.
pub fn definetti_graph_matrix(
    k: u64,
    atoms: &[GraphClass],
) -> Result<TransitionMatrix<GraphClass>> {
    let d = atoms.iter().map(|a| a.edge_count()).max().unwrap_or(0);
    if (k as u128) < 2 * d as u128 {
        return Err(Error::BasisIncomplete { k: k as usize, degree: 2 * d as usize });
    }
    let mut sorted = atoms.to_vec();
    sorted.sort();
    sorted.dedup();
    let set: BTreeSet<&GraphClass> = sorted.iter().collect();
    for a in &sorted {
        for r in graph_refinements(a)? {
            if !set.contains(&r) {
                return Err(Error::NotRefinementClosed(r.to_string()));
            }
        }
    }
    let n = sorted.len();
    let mut entries = vec![vec![BigRational::zero(); n]; n];
    for (i, h) in sorted.iter().enumerate() {
        let h_fact = h.entry_factorial();
        let fall = falling_factorial(k, h.n_vertices() as u64);
        let r_hh = BigInt::from(h.aut_count());
        for (j, g) in sorted.iter().enumerate() {
            let r_gh = graph_refinement_count(g, h)?;
            if r_gh == 0 {
                continue;
            }
            let numer = &h_fact * &fall * BigInt::from(r_gh);
            let denom = g.entry_factorial() * BigInt::from(k).pow(g.n_vertices() as u32) * &r_hh;
            entries[i][j] = BigRational::new(numer, denom);
        }
    }
    Ok(TransitionMatrix::new(sorted, entries))
}

/// Dual cost for density inequalities: re-tags `t` atoms to `t_inj`,
/// valid in dimensions `n ≥ max |V(H_j)|`.
pub fn dualize_graph_density(p: &GraphPoly) -> Result<GraphPoly> {
    if p.basis != GraphBasis::T {
        return Err(Error::MixedBasis("dualize_graph_density expects the t basis".into()));
    }
    Ok(GraphPoly { basis: GraphBasis::TInj, coeffs: p.coeffs.clone() })
}

/// Dual cost for homomorphism-number inequalities at dimension `n`:
/// expand into graph monomial sums, solve the triangular system of
/// [`definetti_graph_matrix`] over the refinement closure, and return
/// `q_n` in the monomial-sum basis.
pub fn dualize_graph_numbers(p: &GraphPoly, n: usize) -> Result<GraphPoly> {
    let d = p.degree();
    if (n as u128) < 2 * d as u128 {
        return Err(Error::TargetBelowDegree { n, degree: 2 * d as usize });
    }
    let a = hom_to_m(p, d.min(5))?;
    if a.is_zero() {
        return Ok(GraphPoly::new(GraphBasis::MGraphSum));
    }
    let support: Vec<GraphClass> = a.coeffs.keys().cloned().collect();
    let closure = refinement_closure(&support)?;
    let matrix = definetti_graph_matrix(n as u64, &closure)?;
    let rhs: Vec<BigRational> = matrix.atoms().iter().map(|at| a.coeff(at)).collect();
    let c = matrix.transpose().solve_lower(&rhs);
    Ok(GraphPoly::from_terms(GraphBasis::MGraphSum, matrix.atoms().iter().cloned().zip(c)))
}

/// Number of labeled simple graphs on `n` vertices (`2^{n(n−1)/2}`).
pub fn simple_graph_count(n: usize) -> Result<u64> {
    if n > 8 {
        return Err(Error::SizeLimit(format!(
            "simple-graph stream limited to 8 vertices, got {n}"
        )));
    }
    Ok(1u64 << (n * (n - 1) / 2))
}

/// Streams every labeled simple graph on `n` vertices exactly once, in bit
/// order of the strict upper triangle.
pub fn enumerate_simple_graphs(n: usize) -> Result<impl Iterator<Item = SymMat<f64>>> {
    let count = simple_graph_count(n)?;
    Ok((0..count).map(move |mask| SymMat::from_simple_mask(n, mask)))
}
