//! Acceptance suite: every criterion runs at its stated tolerance and
//! prints one pass line (run with `--nocapture` to see them).

use anydim::combinat::{
    aut_count_partition, partitions_up_to, refinement_count, MultiIndexList, Partition,
};
use anydim::definetti::{self, substream_rng, tv_rate_experiment, verify, w1_binomial_case};
use anydim::graphalg::{
    canonical_form, dualize_graph_density, graph_refinement_count, GraphBasis, GraphClass,
    GraphPoly, MultiGraph, SymMat,
};
use anydim::optimize::{
    bound_sweep, minimize_exhaustive, minimize_multistart, objectives, Domain, ExhaustiveCost,
    Objective, SolverConfig, SweepProblem, SweepSetting,
};
use anydim::scalar::ratio;
use anydim::symfunc::{
    dualize_means, dualize_symfunc, m_to_s, s_to_m, MeanBasis, MeanPoly, SymBasis, SymPoly,
};
use num::rational::BigRational;
use num::ToPrimitive;
use rand::Rng;

fn gclass(g: &MultiGraph) -> GraphClass {
    canonical_form(g).unwrap()
}

fn goodman_cost(basis: GraphBasis) -> GraphPoly {
    let k2 = gclass(&MultiGraph::complete(2));
    let k3 = gclass(&MultiGraph::complete(3));
    let two_k2 = gclass(&MultiGraph::complete(2).disjoint_union(&MultiGraph::complete(2)));
    GraphPoly::from_terms(
        basis,
        [(k3, ratio(1, 1)), (two_k2, ratio(-2, 1)), (k2, ratio(1, 1))],
    )
}

fn bad_quartic() -> SymPoly {
    SymPoly::from_terms(
        SymBasis::PowerSum,
        [
            (Partition::new(vec![4]), ratio(4, 1)),
            (Partition::new(vec![3, 1]), ratio(-139, 20)),
            (Partition::new(vec![2, 2]), ratio(4, 1)),
            (Partition::new(vec![2, 1, 1]), ratio(-5, 1)),
            (Partition::new(vec![1, 1, 1, 1]), ratio(4, 1)),
        ],
    )
}

fn mfg_cost() -> MeanPoly {
    MeanPoly::from_terms(
        MeanBasis::PowerMean,
        1,
        [
            (MultiIndexList::from_parts(&[1, 1]), ratio(5, 1)),
            (MultiIndexList::from_parts(&[2, 1]), ratio(-4, 1)),
            (MultiIndexList::from_parts(&[1]), ratio(-1, 1)),
        ],
    )
}

/// Criterion 1: exhaustive Goodman lower bounds match the closed form
/// from the extremal bipartite graph, exactly in rationals.
#[test]
fn criterion_1_goodman_closed_form() {
    let q = dualize_graph_density(&goodman_cost(GraphBasis::T)).unwrap();
    let cost = ExhaustiveCost::from_poly(&q);
    for n in 4..=7i64 {
        let rec = minimize_exhaustive(&cost, n as usize, false).unwrap();
        let expected = if n % 2 == 0 {
            ratio(-n, 2 * (n * n - 4 * n + 3))
        } else {
            ratio(-(n + 1), 2 * (n * n - 2 * n))
        };
        assert_eq!(rec.value_exact.clone().unwrap(), expected, "n = {n}");
    }
    // frozen values: −2/3, −1/5, −1/5, −4/35
    let vals: Vec<BigRational> = (4..=7)
        .map(|n| minimize_exhaustive(&cost, n, false).unwrap().value_exact.unwrap())
        .collect();
    assert_eq!(vals, vec![ratio(-2, 3), ratio(-1, 5), ratio(-1, 5), ratio(-4, 35)]);
    println!("[criterion 1] PASS — Goodman ℓ_n = −2/3, −1/5, −1/5, −4/35 exactly for n = 4..7");
}

/// Criterion 2: Ramsey multiplicity lower bounds for the triangle with a
/// pendant edge: exactly 0 through n = 6, then 0.0286 ± 5·10⁻⁴ at n = 7.
#[test]
fn criterion_2_ramsey_multiplicity() {
    let h = gclass(&MultiGraph::triangle_pendant());
    let cost = ExhaustiveCost::ramsey(&h);
    for n in 4..=6usize {
        let rec = minimize_exhaustive(&cost, n, false).unwrap();
        assert_eq!(rec.value_exact.unwrap(), ratio(0, 1), "n = {n}");
    }
    let rec = minimize_exhaustive(&cost, 7, false).unwrap();
    let v = rec.value_exact.unwrap().to_f64().unwrap();
    assert!((v - 0.0286).abs() <= 5e-4, "ℓ_7 = {v}");
    println!("[criterion 2] PASS — Ramsey ℓ_n = 0 for n ≤ 6 and ℓ_7 = {v:.4} ∈ 0.0286 ± 5e−4");
}

/// Criterion 2, extended run: n = 8 (2^28 graphs) behind an opt-in flag.
#[test]
#[ignore = "extended 2^28 scan; run with --ignored"]
fn criterion_2_ramsey_multiplicity_n8() {
    let h = gclass(&MultiGraph::triangle_pendant());
    let cost = ExhaustiveCost::ramsey(&h);
    let rec = minimize_exhaustive(&cost, 8, true).unwrap();
    let v = rec.value_exact.unwrap().to_f64().unwrap();
    assert!((v - 0.0286).abs() <= 5e-4, "ℓ_8 = {v}");
    println!("[criterion 2, extended] PASS — Ramsey ℓ_8 = {v:.4} ∈ 0.0286 ± 5e−4");
}

/// Criterion 3: multi-start estimates of the quartic lower bounds over
/// the ℓ1 ball, within 10⁻² of the reference table, seed-pinned with at
/// least 256 restarts.
#[test]
fn criterion_3_bad_quartic_table() {
    let p = bad_quartic();
    let table = [(4, -0.8403), (5, -0.4023), (6, -0.2541), (7, -0.1817), (8, -0.1396)];
    let cfg = SolverConfig { restarts: 256, seed: 20240601, ..Default::default() };
    for (n, expected) in table {
        let q = dualize_symfunc(&p, n).unwrap();
        let obj = objectives::SymCost::new(&q, n).unwrap();
        let dom = Domain::L1Ball { radius: 1.0, len: n };
        let rec = minimize_multistart(&obj, &dom, &cfg).unwrap();
        assert!(
            (rec.value - expected).abs() <= 1e-2,
            "n = {n}: estimate {} vs table {expected}",
            rec.value
        );
    }
    println!("[criterion 3] PASS — quartic ℓ_n estimates within 1e−2 of the reference table, n = 4..8");
}

/// Criterion 4: the quadratic simplex example — u_n = 1/n and ℓ_n = 0 to
/// 10⁻⁸, and the dual-cost coefficients match the closed form exactly.
#[test]
fn criterion_4_quadratic_simplex() {
    let s2 = SymPoly::from_terms(SymBasis::PowerSum, [(Partition::new(vec![2]), ratio(1, 1))]);
    let cfg = SolverConfig { restarts: 32, seed: 7, ..Default::default() };
    for n in 2..=10usize {
        let dom = Domain::VecSimplex { len: n };
        let u = minimize_multistart(&objectives::SymCost::new(&s2, n).unwrap(), &dom, &cfg)
            .unwrap();
        assert!((u.value - 1.0 / n as f64).abs() <= 1e-8, "u_{n} = {}", u.value);
        let q = dualize_symfunc(&s2, n).unwrap();
        let l = minimize_multistart(&objectives::SymCost::new(&q, n).unwrap(), &dom, &cfg)
            .unwrap();
        assert!(l.value.abs() <= 1e-8, "ℓ_{n} = {}", l.value);
        // exact dual coefficients: q_n = n/(n−1) s^(2) − 1/(n−1) s^(1,1)
        let qs = m_to_s(&q).unwrap();
        assert_eq!(qs.coeff(&Partition::new(vec![2])), ratio(n as i64, n as i64 - 1));
        assert_eq!(qs.coeff(&Partition::new(vec![1, 1])), ratio(-1, n as i64 - 1));
    }
    println!("[criterion 4] PASS — quadratic simplex: u_n = 1/n, ℓ_n = 0 (1e−8), exact dual coefficients, n = 2..10");
}

/// Criterion 5: the homomorphism-number example over matrix simplices of
/// weight 2 — u_n within 10⁻² of the reference row and ℓ_n within 10⁻²
/// of the reference points/intervals, n = 4..9.
#[test]
fn criterion_5_graph_numbers_table() {
    let p3 = gclass(&MultiGraph::path(3));
    let two_k2 = gclass(&MultiGraph::complete(2).disjoint_union(&MultiGraph::complete(2)));
    let cost = GraphPoly::from_terms(
        GraphBasis::Inj,
        [(p3, ratio(1, 1)), (two_k2, ratio(-1, 1))],
    );
    let problem = SweepProblem {
        setting: SweepSetting::GraphNumbers { cost, weight: 2.0 },
        rate_k: None,
        q_norm_hint: None,
    };
    let cfg = SolverConfig { restarts: 128, max_iters: 1500, seed: 20240602, ..Default::default() };
    let rows = bound_sweep(&problem, 4..=9, &cfg, false).unwrap();
    let u_table = [-2.00, -2.00, -2.67, -2.67, -3.00, -3.00];
    // points and [lo, hi] intervals for ℓ_n
    let l_table: [(f64, f64); 6] = [
        (-26.67, -26.67),
        (-13.21, -12.50),
        (-11.20, -11.20),
        (-9.33, -8.71),
        (-8.23, -8.23),
        (-7.50, -7.23),
    ];
    for (i, row) in rows.iter().enumerate() {
        assert!(
            (row.upper.value - u_table[i]).abs() <= 1e-2,
            "u_{}: {} vs {}",
            row.n,
            row.upper.value,
            u_table[i]
        );
        let (lo, hi) = l_table[i];
        assert!(
            row.lower.value >= lo - 1e-2 && row.lower.value <= hi + 1e-2,
            "ℓ_{}: {} outside [{lo}, {hi}] ± 1e−2",
            row.n,
            row.lower.value
        );
    }
    println!("[criterion 5] PASS — graph-number sweep matches the reference u_n and ℓ_n rows, n = 4..9");
}

/// Criterion 6: the representation identity p_n(x) = E[q_k(L_{k,n} x)]
/// holds with zero error in rational arithmetic in all four settings,
/// 20 random trials each, k ≤ 3, n ≤ 5.
#[test]
fn criterion_6_representation_identities() {
    let mut rng = substream_rng(606, 0);
    let mut rand_q = {
        let mut r = substream_rng(606, 1);
        move || ratio(r.gen_range(-6..7), r.gen_range(1..5))
    };

    // symmetric functions: power-sum costs, fiber-sum sampling
    for trial in 0..20 {
        let k = rng.gen_range(2..=3usize);
        let n = rng.gen_range(2..=5usize);
        let mut p = SymPoly::new(SymBasis::PowerSum);
        for atom in partitions_up_to(k as u32) {
            p.add_term(atom, rand_q());
        }
        let x: Vec<BigRational> = (0..n).map(|_| rand_q()).collect();
        let (lhs, rhs) = verify::representation_symfunc(&p, &x, k).unwrap();
        assert_eq!(lhs, rhs, "symfunc trial {trial}");
    }

    // means: power-mean costs, with-replacement column sampling
    for trial in 0..20 {
        let k = rng.gen_range(2..=3usize);
        let n = rng.gen_range(1..=5usize);
        let mut p = MeanPoly::new(MeanBasis::PowerMean, 1);
        for len in 1..=k {
            let parts: Vec<u32> = (0..len).map(|_| rng.gen_range(1..=2)).collect();
            p.add_term(MultiIndexList::from_parts(&parts), rand_q());
        }
        let cols: Vec<Vec<BigRational>> = (0..n).map(|_| vec![rand_q()]).collect();
        let (lhs, rhs) = verify::representation_means(&p, &cols, k).unwrap();
        assert_eq!(lhs, rhs, "means trial {trial}");
    }

    // graph densities: t costs, principal-pattern sampling
    let small_atoms = [
        gclass(&MultiGraph::complete(2)),
        gclass(&MultiGraph::path(3)),
        gclass(&MultiGraph::complete(3)),
        gclass(&MultiGraph::from_edges(1, &[(0, 0)])),
    ];
    for trial in 0..20 {
        let n = rng.gen_range(2..=5usize);
        let mut p = GraphPoly::new(GraphBasis::T);
        for atom in &small_atoms {
            p.add_term(atom.clone(), rand_q());
        }
        let x = SymMat::from_fn(n, |_, _| rand_q());
        let (lhs, rhs) = verify::representation_graph_density(&p, &x, 3).unwrap();
        assert_eq!(lhs, rhs, "density trial {trial}");
    }

    // graph numbers: hom costs, quotient sampling
    let k2 = gclass(&MultiGraph::complete(2));
    let single_loop = gclass(&MultiGraph::from_edges(1, &[(0, 0)]));
    for trial in 0..20 {
        let k = rng.gen_range(2..=3usize);
        let n = rng.gen_range(2..=5usize);
        let mut p = GraphPoly::new(GraphBasis::Hom);
        p.add_term(k2.clone(), rand_q());
        p.add_term(single_loop.clone(), rand_q());
        let x = SymMat::from_fn(n, |_, _| rand_q());
        let (lhs, rhs) = verify::representation_graph_numbers(&p, &x, k).unwrap();
        assert_eq!(lhs, rhs, "numbers trial {trial}");
    }
    println!("[criterion 6] PASS — representation identity exact in all four settings, 20 trials each");
}

/// Criterion 7: the sampling total-variation rate — exact TV ≤ m(m−1)/n
/// over permutation-orbit laws, and the tightness case returns exactly
/// 2/n (attained when all base coordinates are distinct).
#[test]
fn criterion_7_tv_rate() {
    let mut rng = substream_rng(707, 0);
    for n in 2..=8usize {
        for m in 2..=3usize {
            if m > n {
                continue;
            }
            // random rational base vectors
            for _ in 0..5 {
                let base: Vec<BigRational> =
                    (0..n).map(|_| ratio(rng.gen_range(-4..5), rng.gen_range(1..4))).collect();
                let (tv, bound) = tv_rate_experiment(n, m, &base).unwrap();
                assert!(tv <= bound, "n = {n}, m = {m}");
            }
            // structured bases
            let one_hot: Vec<BigRational> =
                (0..n).map(|i| ratio(if i == 0 { 1 } else { 0 }, 1)).collect();
            let (tv, bound) = tv_rate_experiment(n, m, &one_hot).unwrap();
            assert!(tv <= bound);
        }
        // tightness: all-distinct coordinates attain the m = 2 bound
        let distinct: Vec<BigRational> = (0..n).map(|i| ratio(i as i64, 1)).collect();
        let (tv, bound) = tv_rate_experiment(n, 2, &distinct).unwrap();
        assert_eq!(tv, ratio(2, n as i64), "tightness at n = {n}");
        assert_eq!(tv, bound);
    }
    println!("[criterion 7] PASS — exact TV ≤ m(m−1)/n for n ≤ 8, m ∈ {{2,3}}; tightness case = 2/n exactly");
}

/// Criterion 8: the fiber-sum Wasserstein rate — the binomial tightness
/// case has W₁ = E|B−n|/n ≤ 4/√n, with the 1/√(πn) asymptotic visible.
#[test]
fn criterion_8_w1_rate() {
    for n in [2u64, 4, 8, 16, 32] {
        let w1 = w1_binomial_case(n);
        let w1f = w1.to_f64().unwrap();
        assert!(w1f <= 4.0 / (n as f64).sqrt(), "n = {n}: W1 = {w1f}");
    }
    let w1 = w1_binomial_case(32).to_f64().unwrap();
    let scaled = w1 * (std::f64::consts::PI * 32.0).sqrt();
    assert!((0.85..=1.15).contains(&scaled), "W1·√(32π) = {scaled}");
    println!("[criterion 8] PASS — binomial W₁ ≤ 4/√n for n ∈ {{2,4,8,16,32}}; W₁·√(πn) = {scaled:.4} at n = 32");
}

/// Criterion 9: the mean-field sweep — ℓ_n nondecreasing (1e−6 slack),
/// u_n ≥ ℓ_n − 1e−6, and the k = 3 rate bound 60/n at multiples of 3.
#[test]
fn criterion_9_mfg_sweep() {
    let problem = SweepProblem {
        setting: SweepSetting::Means { cost: mfg_cost(), lo: -1.0, hi: 1.0 },
        rate_k: Some(3),
        q_norm_hint: Some(10.0),
    };
    let cfg = SolverConfig { restarts: 192, seed: 20240603, ..Default::default() };
    let rows = bound_sweep(&problem, 3..=12, &cfg, false).unwrap();
    for w in rows.windows(2) {
        assert!(
            w[1].lower.value >= w[0].lower.value - 1e-6,
            "ℓ not monotone: ℓ_{} = {} vs ℓ_{} = {}",
            w[0].n,
            w[0].lower.value,
            w[1].n,
            w[1].lower.value
        );
    }
    for row in &rows {
        assert!(row.upper.value >= row.lower.value - 1e-6, "u_{} < ℓ_{}", row.n, row.n);
        if row.n % 3 == 0 {
            let gap = row.upper.value - row.lower.value;
            let bound = 60.0 / row.n as f64;
            assert!(
                gap <= bound + 1e-3,
                "gap at n = {}: {} > {}",
                row.n,
                gap,
                bound
            );
            assert!((row.gap.unwrap() - bound).abs() < 1e-12);
        }
    }
    println!("[criterion 9] PASS — mean-field sweep: ℓ nondecreasing, u ≥ ℓ, gaps within 60/n at n = 3,6,9,12");
}

/// Criterion 10: the transition-matrix oracles — refinement counts, the
/// refinement chain, and exact s↔m round trips.
#[test]
fn criterion_10_transition_matrix_oracles() {
    assert_eq!(refinement_count(&Partition::new(vec![1, 1]), &Partition::new(vec![2])), 1);
    assert_eq!(
        refinement_count(&Partition::new(vec![1, 1, 1]), &Partition::new(vec![2, 1])),
        3
    );
    for lam in partitions_up_to(6) {
        assert_eq!(refinement_count(&lam, &lam), aut_count_partition(&lam), "λ = {lam}");
    }

    // the refinement chain 3K2 ≤ K2⊔P3 ≤ P4 ≤ K3
    let k2 = MultiGraph::complete(2);
    let g1 = gclass(&k2.disjoint_union(&k2).disjoint_union(&k2));
    let g2 = gclass(&k2.disjoint_union(&MultiGraph::path(3)));
    let g3 = gclass(&MultiGraph::path(4));
    let g4 = gclass(&MultiGraph::complete(3));
    assert_eq!(graph_refinement_count(&g1, &g2).unwrap(), 48);
    assert_eq!(graph_refinement_count(&g2, &g3).unwrap(), 8);
    assert_eq!(graph_refinement_count(&g3, &g4).unwrap(), 6);
    assert_eq!(graph_refinement_count(&g4, &g4).unwrap(), 6);

    // s↔m round trips: 100 random rational polynomials per degree ≤ 4
    let mut rng = substream_rng(1010, 0);
    for d in 1..=4u32 {
        for _ in 0..100 {
            let mut p = SymPoly::new(SymBasis::PowerSum);
            for atom in partitions_up_to(d) {
                p.add_term(atom, ratio(rng.gen_range(-9..10), rng.gen_range(1..6)));
            }
            let back = m_to_s(&s_to_m(&p).unwrap()).unwrap();
            assert_eq!(back, p, "degree {d}");
        }
    }
    println!("[criterion 10] PASS — refinement-count oracles, chain counts 48/8/6/6, 100 exact s↔m round trips per degree ≤ 4");
}

/// Sandwich and monotonicity on the exactly computed density bounds:
/// ℓ_n ≤ ℓ_{n+1} and every ℓ_n stays below every exact u_m.
#[test]
fn exact_density_bounds_are_monotone_and_sandwiched() {
    let p = goodman_cost(GraphBasis::T);
    let problem = SweepProblem {
        setting: SweepSetting::GraphDensity { cost: p },
        rate_k: None,
        q_norm_hint: None,
    };
    let cfg = SolverConfig::default();
    let rows = bound_sweep(&problem, 4..=6, &cfg, false).unwrap();
    for w in rows.windows(2) {
        assert!(
            w[1].lower.value_exact.clone().unwrap() >= w[0].lower.value_exact.clone().unwrap()
        );
    }
    for a in &rows {
        for b in &rows {
            assert!(
                a.lower.value_exact.clone().unwrap() <= b.upper.value_exact.clone().unwrap(),
                "ℓ_{} > u_{}",
                a.n,
                b.n
            );
        }
    }
    // Goodman's inequality itself: u_n = 0 for every n, attained at K_n
    for row in &rows {
        assert_eq!(row.upper.value_exact.clone().unwrap(), ratio(0, 1));
    }
}

/// Seed determinism across the sweep machinery.
#[test]
fn sweep_records_are_seed_deterministic() {
    let problem = SweepProblem {
        setting: SweepSetting::Means { cost: mfg_cost(), lo: -1.0, hi: 1.0 },
        rate_k: Some(3),
        q_norm_hint: Some(10.0),
    };
    let cfg = SolverConfig { restarts: 16, seed: 99, ..Default::default() };
    let a = bound_sweep(&problem, 3..=4, &cfg, false).unwrap();
    let b = bound_sweep(&problem, 3..=4, &cfg, false).unwrap();
    for (ra, rb) in a.iter().zip(&b) {
        assert_eq!(ra.lower.value, rb.lower.value);
        assert_eq!(ra.upper.value, rb.upper.value);
        assert_eq!(ra.lower.minimizer, rb.lower.minimizer);
    }
}

/// The MFG dual cost's sup-norm over [−1,1]³ really is below the cap 10
/// used in the rate bound (and above 5, from corner evaluations).
#[test]
fn mfg_dual_sup_norm_window() {
    let q = dualize_means(&mfg_cost()).unwrap();
    let obj = objectives::MeanCost::new(&q, 3).unwrap();
    let dom = Domain::Box { lo: -1.0, hi: 1.0, len: 3 };
    let cfg = SolverConfig { restarts: 64, seed: 11, ..Default::default() };
    let sup = anydim::optimize::sup_norm_estimate(&obj, &dom, &cfg).unwrap();
    assert!(sup <= 10.0, "sup estimate {sup}");
    // corner points already witness a value ≥ 5
    let corners = [[-1.0, -1.0, -1.0], [1.0, 1.0, -1.0], [1.0, 1.0, 1.0]];
    let witness = corners
        .iter()
        .map(|c| obj.value(c).abs())
        .fold(0.0f64, f64::max);
    assert!(witness >= 5.0, "corner witness {witness}");
    assert!(sup >= witness - 1e-9);
}

/// Exact expectation over maps of a sampled marginal reproduces the
/// marginal law directly — the budget guard is also exercised.
#[test]
fn exact_enumeration_consistency_and_budget() {
    let base: Vec<BigRational> = vec![ratio(1, 2), ratio(-1, 3), ratio(2, 1)];
    let mean = definetti::expect_maps_exact(1, 3, &mut |f| {
        Ok(definetti::act_vec(f, &base).unwrap()[0].clone())
    })
    .unwrap();
    let direct: BigRational = base.iter().sum::<BigRational>() / ratio(3, 1);
    assert_eq!(mean, direct);
    assert!(definetti::for_each_finite_map(32, 32, &mut |_| {}).is_err());
}
