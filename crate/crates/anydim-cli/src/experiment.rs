//! Experiment configuration and dispatch: settings, domain compatibility,
//! the bound-sweep runner, verification runners, and CSV emission.

use crate::expr::{CostAtom, CostExpr, Family};
use anydim::combinat::MultiIndexList;
use anydim::definetti::{substream_rng, tv_rate_experiment, verify, w1_binomial_case};
use anydim::graphalg::{GraphBasis, GraphPoly, SymMat};
use anydim::optimize::{
    bound_sweep, BoundRecord, SolverConfig, SweepProblem, SweepRow, SweepSetting, VecDomain,
};
use anydim::scalar::{ratio, rational_to_f64};
use anydim::symfunc::{m_to_s, MeanBasis, MeanPoly, SymBasis, SymPoly};
use num::rational::BigRational;
use num::ToPrimitive;
use rand::Rng;
use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(#[from] crate::expr::ParseError),
    #[error("{0}")]
    Math(#[from] anydim::Error),
    #[error("incompatible setting/domain: {0}")]
    Incompatible(String),
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type CliResult<T> = Result<T, CliError>;

/// The four concrete settings the pipeline supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    Means,
    Symfunc,
    GraphDensity,
    GraphNumbers,
}

impl Setting {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "means" => Ok(Setting::Means),
            "symfunc" => Ok(Setting::Symfunc),
            "graph-density" => Ok(Setting::GraphDensity),
            "graph-numbers" => Ok(Setting::GraphNumbers),
            other => Err(CliError::Invalid(format!(
                "unknown setting '{other}' (expected means, symfunc, graph-density, graph-numbers)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Setting::Means => "means",
            Setting::Symfunc => "symfunc",
            Setting::GraphDensity => "graph-density",
            Setting::GraphNumbers => "graph-numbers",
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Setting::Means => Family::Mean,
            Setting::Symfunc => Family::Sym,
            Setting::GraphDensity => Family::GraphDensity,
            Setting::GraphNumbers => Family::GraphNumbers,
        }
    }
}

/// Domain descriptors as given on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainSpec {
    Box { lo: f64, hi: f64 },
    L1Ball { radius: f64 },
    Simplex,
    MatrixSimplex { weight: f64 },
    BinaryGraphs,
}

impl DomainSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DomainSpec::Box { .. } => "box",
            DomainSpec::L1Ball { .. } => "l1-ball",
            DomainSpec::Simplex => "simplex",
            DomainSpec::MatrixSimplex { .. } => "matrix-simplex",
            DomainSpec::BinaryGraphs => "binary-graphs",
        }
    }
}

/// The compatible-set table: each setting admits exactly the domain
/// families whose sets embed along its duplication order and project
/// along its zero-padding order.
pub fn check_compatible(setting: Setting, domain: &DomainSpec) -> CliResult<()> {
    let ok = matches!(
        (setting, domain),
        (Setting::Means, DomainSpec::Box { .. })
            | (Setting::Symfunc, DomainSpec::L1Ball { .. })
            | (Setting::Symfunc, DomainSpec::Simplex)
            | (Setting::GraphDensity, DomainSpec::BinaryGraphs)
            | (Setting::GraphNumbers, DomainSpec::MatrixSimplex { .. })
    );
    if ok {
        return Ok(());
    }
    let reason = match setting {
        Setting::Means => {
            "the means setting needs product boxes: sets must be closed under \
             duplicating columns and dropping trailing columns"
        }
        Setting::Symfunc => {
            "the symfunc setting needs ℓ1 balls or simplices: sets must be closed \
             under zero-padding and under summing blocks of coordinates"
        }
        Setting::GraphDensity => {
            "the graph-density setting needs binary simple graphs: sets must be \
             closed under vertex duplication and principal submatrices"
        }
        Setting::GraphNumbers => {
            "the graph-numbers setting needs matrix simplices: sets must be closed \
             under zero-padding and vertex-identification quotients"
        }
    };
    Err(CliError::Incompatible(format!(
        "domain '{}' is not usable with setting '{}': {reason}",
        domain.name(),
        setting.as_str()
    )))
}

/// Which minimizer drives the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    Exhaustive,
    Multistart,
}

/// A fully specified experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub setting: Setting,
    pub cost: CostExpr,
    pub domain: DomainSpec,
    pub n_lo: usize,
    pub n_hi: usize,
    pub solver: SolverChoice,
    pub cfg: SolverConfig,
    pub allow_large: bool,
    pub exact_rational: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> CliResult<()> {
        if let Some(f) = self.cost.family() {
            if f != self.setting.family() {
                return Err(CliError::Invalid(format!(
                    "cost atoms are in the {} family but the setting is {}",
                    f.as_str(),
                    self.setting.as_str()
                )));
            }
        }
        check_compatible(self.setting, &self.domain)?;
        if self.n_lo > self.n_hi {
            return Err(CliError::Invalid("empty n range".into()));
        }
        match (self.setting, self.solver) {
            (Setting::GraphDensity, SolverChoice::Multistart) => Err(CliError::Invalid(
                "the graph-density setting is searched exhaustively".into(),
            )),
            (Setting::GraphDensity, SolverChoice::Exhaustive) => Ok(()),
            (_, SolverChoice::Exhaustive) => Err(CliError::Invalid(
                "exhaustive search applies only to the graph-density setting".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Builds the power-sum polynomial of a symfunc cost (monomial atoms are
/// converted through the exact basis change).
pub fn to_sym_poly(cost: &CostExpr) -> CliResult<SymPoly> {
    let mut s = SymPoly::new(SymBasis::PowerSum);
    let mut m = SymPoly::new(SymBasis::MonomialSum);
    for (atom, c) in cost.terms() {
        match atom {
            CostAtom::PowerSum(p) => s.add_term(p.clone(), c.clone()),
            CostAtom::MonomialSum(p) => m.add_term(p.clone(), c.clone()),
            _ => return Err(CliError::Invalid("not a symfunc cost".into())),
        }
    }
    if !m.is_zero() {
        for (p, c) in m_to_s(&m)?.coeffs() {
            s.add_term(p.clone(), c.clone());
        }
    }
    Ok(s)
}

/// Builds the power-mean polynomial of a means cost.
pub fn to_mean_poly(cost: &CostExpr) -> CliResult<MeanPoly> {
    let dim = cost
        .terms()
        .map(|(a, _)| match a {
            CostAtom::PowerMean(l) | CostAtom::MonomialMean(l) => Ok(l.ambient_dim()),
            _ => Err(CliError::Invalid("not a means cost".into())),
        })
        .collect::<CliResult<Vec<_>>>()?;
    let d = dim.first().copied().unwrap_or(1);
    if dim.iter().any(|&x| x != d) {
        return Err(CliError::Invalid("mean atoms must share one ambient dimension".into()));
    }
    let mut p = MeanPoly::new(MeanBasis::PowerMean, d);
    for (atom, c) in cost.terms() {
        match atom {
            CostAtom::PowerMean(l) => p.add_term(l.clone(), c.clone()),
            CostAtom::MonomialMean(_) => {
                return Err(CliError::Invalid(
                    "dualization starts from power means; got a monomial mean".into(),
                ))
            }
            _ => unreachable!("family checked"),
        }
    }
    Ok(p)
}

/// Builds the density polynomial (t basis) of a graph-density cost.
pub fn to_density_poly(cost: &CostExpr) -> CliResult<GraphPoly> {
    let mut p = GraphPoly::new(GraphBasis::T);
    for (atom, c) in cost.terms() {
        match atom {
            CostAtom::T(g) => p.add_term(g.clone(), c.clone()),
            CostAtom::TInj(_) => {
                return Err(CliError::Invalid(
                    "dualization starts from plain densities t; got t_inj".into(),
                ))
            }
            _ => return Err(CliError::Invalid("not a graph-density cost".into())),
        }
    }
    Ok(p)
}

/// Builds the homomorphism-number cost in the graph monomial-sum basis
/// (hom and inj atoms may be mixed; both expand exactly).
pub fn to_numbers_poly(cost: &CostExpr) -> CliResult<GraphPoly> {
    let mut hom = GraphPoly::new(GraphBasis::Hom);
    let mut inj = GraphPoly::new(GraphBasis::Inj);
    for (atom, c) in cost.terms() {
        match atom {
            CostAtom::Hom(g) => hom.add_term(g.clone(), c.clone()),
            CostAtom::Inj(g) => inj.add_term(g.clone(), c.clone()),
            _ => return Err(CliError::Invalid("not a graph-numbers cost".into())),
        }
    }
    let mut out = GraphPoly::new(GraphBasis::MGraphSum);
    let d = hom.degree().max(inj.degree()).max(1);
    for part in [hom, inj] {
        if !part.is_zero() {
            for (g, c) in anydim::graphalg::hom_to_m(&part, d)?.coeffs() {
                out.add_term(g.clone(), c.clone());
            }
        }
    }
    Ok(out)
}

/// Well-known costs addressable by name on the command line.
pub fn named_cost(name: &str) -> Option<&'static str> {
    match name {
        "goodman" => Some("t[K3] - 2*t[K2uK2] + t[K2]"),
        "mfg" => Some("5*sbar[1,1] - 4*sbar[2,1] - sbar[1]"),
        "bad-quartic" | "badquartic" => {
            Some("4*s[4] - 139/20*s[3,1] + 4*s[2,2] - 5*s[2,1,1] + 4*s[1,1,1,1]")
        }
        "graph-numbers-example" | "gnum-example" => Some("inj[P3] - inj[K2uK2]"),
        _ => None,
    }
}

/// One CSV row of a bound sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub setting: String,
    pub n: usize,
    pub l_n: String,
    pub l_kind: String,
    pub u_n: String,
    pub u_kind: String,
    pub gap_bound: String,
    pub seed: u64,
    pub restarts: usize,
}

fn format_value(rec: &BoundRecord, exact: bool) -> String {
    match (&rec.value_exact, exact) {
        (Some(q), true) => q.to_string(),
        _ => format!("{:.10}", rec.value),
    }
}

fn rows_from_sweep(
    setting: Setting,
    rows: &[SweepRow],
    cfg: &SolverConfig,
    exact: bool,
) -> Vec<CsvRow> {
    rows.iter()
        .map(|row| CsvRow {
            setting: setting.as_str().to_string(),
            n: row.n,
            l_n: format_value(&row.lower, exact),
            l_kind: row.lower.kind.as_str().to_string(),
            u_n: format_value(&row.upper, exact),
            u_kind: row.upper.kind.as_str().to_string(),
            gap_bound: row.gap.map(|g| format!("{g:.10}")).unwrap_or_default(),
            seed: cfg.seed,
            restarts: cfg.restarts,
        })
        .collect()
}

/// Runs a bound sweep described by an [`ExperimentSpec`].
pub fn run(spec: &ExperimentSpec) -> CliResult<Vec<CsvRow>> {
    spec.validate()?;
    let sweep_setting = match spec.setting {
        Setting::Means => {
            let cost = to_mean_poly(&spec.cost)?;
            let DomainSpec::Box { lo, hi } = spec.domain else { unreachable!() };
            SweepSetting::Means { cost, lo, hi }
        }
        Setting::Symfunc => {
            let cost = to_sym_poly(&spec.cost)?;
            let domain = match spec.domain {
                DomainSpec::L1Ball { radius } => VecDomain::L1Ball { radius },
                DomainSpec::Simplex => VecDomain::Simplex,
                _ => unreachable!(),
            };
            SweepSetting::SymFns { cost, domain }
        }
        Setting::GraphDensity => {
            SweepSetting::GraphDensity { cost: to_density_poly(&spec.cost)? }
        }
        Setting::GraphNumbers => {
            let DomainSpec::MatrixSimplex { weight } = spec.domain else { unreachable!() };
            SweepSetting::GraphNumbers { cost: to_numbers_poly(&spec.cost)?, weight }
        }
    };
    let problem = SweepProblem { setting: sweep_setting, rate_k: None, q_norm_hint: None };
    let rows = bound_sweep(&problem, spec.n_lo..=spec.n_hi, &spec.cfg, spec.allow_large)?;
    Ok(rows_from_sweep(spec.setting, &rows, &spec.cfg, spec.exact_rational))
}

const CSV_HEADER: [&str; 9] =
    ["setting", "n", "l_n", "l_kind", "u_n", "u_kind", "gap_bound", "seed", "restarts"];

/// Writes rows in the fixed sweep schema (RFC 4180, header included,
/// ascending `n`).
pub fn emit_csv(rows: &[CsvRow], out: impl Write) -> CliResult<()> {
    let mut rows = rows.to_vec();
    rows.sort_by_key(|r| r.n);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.setting.as_str(),
            &r.n.to_string(),
            &r.l_n,
            &r.l_kind,
            &r.u_n,
            &r.u_kind,
            &r.gap_bound,
            &r.seed.to_string(),
            &r.restarts.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows back from the sweep schema.
pub fn read_csv(input: impl Read) -> CliResult<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        out.push(CsvRow {
            setting: rec[0].to_string(),
            n: rec[1].parse().map_err(|_| CliError::Invalid("bad n".into()))?,
            l_n: rec[2].to_string(),
            l_kind: rec[3].to_string(),
            u_n: rec[4].to_string(),
            u_kind: rec[5].to_string(),
            gap_bound: rec[6].to_string(),
            seed: rec[7].parse().map_err(|_| CliError::Invalid("bad seed".into()))?,
            restarts: rec[8].parse().map_err(|_| CliError::Invalid("bad restarts".into()))?,
        });
    }
    Ok(out)
}

/// A generic verification row: (n, k or m, statistic, bound, pass).
#[derive(Debug, Clone)]
pub struct VerifyRow {
    pub n: usize,
    pub k_or_m: usize,
    pub statistic: String,
    pub bound: String,
    pub pass: bool,
}

pub fn emit_verify_csv(rows: &[VerifyRow], out: impl Write) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "k_or_m", "statistic", "bound", "pass"])?;
    for r in rows {
        w.write_record([
            &r.n.to_string(),
            &r.k_or_m.to_string(),
            &r.statistic,
            &r.bound,
            &r.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Exact representation-identity check for one setting at `(k, n)`:
/// random rational costs and points, full enumeration, zero error
/// required. Returns one row per trial.
pub fn verify_identity(
    setting: Setting,
    k: usize,
    n: usize,
    seed: u64,
    trials: usize,
) -> CliResult<Vec<VerifyRow>> {
    let mut rows = Vec::new();
    for trial in 0..trials {
        let mut rng = substream_rng(seed, trial as u64);
        let rand_q = |rng: &mut rand_chacha::ChaCha8Rng| {
            ratio(rng.gen_range(-6..7), rng.gen_range(1..5))
        };
        let (lhs, rhs) = match setting {
            Setting::Symfunc => {
                let mut p = SymPoly::new(SymBasis::PowerSum);
                for atom in anydim::combinat::partitions_up_to(k as u32) {
                    p.add_term(atom, rand_q(&mut rng));
                }
                let x: Vec<BigRational> = (0..n).map(|_| rand_q(&mut rng)).collect();
                verify::representation_symfunc(&p, &x, k)?
            }
            Setting::Means => {
                let mut p = MeanPoly::new(MeanBasis::PowerMean, 1);
                for len in 1..=k {
                    let parts: Vec<u32> = (0..len).map(|_| rng.gen_range(1..=2)).collect();
                    p.add_term(MultiIndexList::from_parts(&parts), rand_q(&mut rng));
                }
                let cols: Vec<Vec<BigRational>> =
                    (0..n).map(|_| vec![rand_q(&mut rng)]).collect();
                verify::representation_means(&p, &cols, k)?
            }
            Setting::GraphDensity => {
                use anydim::graphalg::{canonical_form, MultiGraph};
                let atoms = [
                    canonical_form(&MultiGraph::complete(2))?,
                    canonical_form(&MultiGraph::path(3))?,
                    canonical_form(&MultiGraph::complete(3))?,
                ];
                let mut p = GraphPoly::new(GraphBasis::T);
                for a in atoms.iter().filter(|a| a.n_vertices() <= k) {
                    p.add_term(a.clone(), rand_q(&mut rng));
                }
                let x = SymMat::from_fn(n, |_, _| rand_q(&mut rng));
                verify::representation_graph_density(&p, &x, k)?
            }
            Setting::GraphNumbers => {
                use anydim::graphalg::{canonical_form, MultiGraph};
                let k2 = canonical_form(&MultiGraph::complete(2))?;
                let lp = canonical_form(&MultiGraph::from_edges(1, &[(0, 0)]))?;
                let mut p = GraphPoly::new(GraphBasis::Hom);
                p.add_term(k2, rand_q(&mut rng));
                p.add_term(lp, rand_q(&mut rng));
                let x = SymMat::from_fn(n, |_, _| rand_q(&mut rng));
                verify::representation_graph_numbers(&p, &x, k)?
            }
        };
        let diff = &lhs - &rhs;
        rows.push(VerifyRow {
            n,
            k_or_m: k,
            statistic: diff.to_string(),
            bound: "0".into(),
            pass: num::Zero::is_zero(&diff),
        });
    }
    Ok(rows)
}

/// Exact sampling TV check rows for `m ∈ {2, 3}` against the bound
/// `m(m−1)/n`, using an all-distinct base vector.
pub fn verify_tv(n: usize) -> CliResult<Vec<VerifyRow>> {
    let base: Vec<BigRational> = (0..n).map(|i| ratio(i as i64, 1)).collect();
    let mut rows = Vec::new();
    for m in 2..=3usize.min(n) {
        let (tv, bound) = tv_rate_experiment(n, m, &base)?;
        rows.push(VerifyRow {
            n,
            k_or_m: m,
            statistic: tv.to_string(),
            bound: bound.to_string(),
            pass: tv <= bound,
        });
    }
    Ok(rows)
}

/// Exact fiber-sum Wasserstein check rows against `4/√n`.
pub fn verify_w1(ns: &[u64]) -> CliResult<Vec<VerifyRow>> {
    let mut rows = Vec::new();
    for &n in ns {
        let w1 = w1_binomial_case(n);
        let bound = 4.0 / (n as f64).sqrt();
        let pass = w1.to_f64().unwrap_or(f64::INFINITY) <= bound;
        rows.push(VerifyRow {
            n: n as usize,
            k_or_m: 2,
            statistic: w1.to_string(),
            bound: format!("{bound:.10}"),
            pass,
        });
    }
    Ok(rows)
}

/// Rows of the dual cost of a cost expression at dimension `n`, in the
/// serialization schema (basis, atom, numerator, denominator).
pub fn dualize_rows(setting: Setting, cost: &CostExpr, n: usize) -> CliResult<Vec<[String; 4]>> {
    fn push_rational(rows: &mut Vec<[String; 4]>, basis: &str, atom: String, c: &BigRational) {
        rows.push([basis.into(), atom, c.numer().to_string(), c.denom().to_string()]);
    }
    let mut rows = Vec::new();
    match setting {
        Setting::Symfunc => {
            let p = to_sym_poly(cost)?;
            let q = anydim::symfunc::dualize_symfunc(&p, n)?;
            for (atom, c) in q.coeffs() {
                push_rational(&mut rows, "m", atom.to_string(), c);
            }
            for (atom, c) in m_to_s(&q)?.coeffs() {
                push_rational(&mut rows, "s", atom.to_string(), c);
            }
        }
        Setting::Means => {
            let p = to_mean_poly(cost)?;
            let q = anydim::symfunc::dualize_means(&p)?;
            for (atom, c) in q.coeffs() {
                push_rational(&mut rows, "mbar", atom.to_string(), c);
            }
        }
        Setting::GraphDensity => {
            let p = to_density_poly(cost)?;
            let q = anydim::graphalg::dualize_graph_density(&p)?;
            for (atom, c) in q.coeffs() {
                push_rational(&mut rows, "tinj", atom.to_string(), c);
            }
        }
        Setting::GraphNumbers => {
            let p = to_numbers_poly(cost)?;
            let q = anydim::graphalg::dualize_graph_numbers(&p, n)?;
            for (atom, c) in q.coeffs() {
                push_rational(&mut rows, "mg", atom.to_string(), c);
            }
            // also report in the inj basis for readability
            for (atom, c) in q.coeffs() {
                let inj_c = c / ratio(atom.aut_count() as i64, 1);
                push_rational(&mut rows, "inj", atom.to_string(), &inj_c);
            }
        }
    }
    Ok(rows)
}

/// Flat `key=value` config files mirroring the CLI flags; `#` comments
/// and blank lines are skipped. CLI flags override file values.
pub fn read_config(path: &Path) -> CliResult<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Invalid(format!(
                "config line {} is not key=value: '{line}'",
                lineno + 1
            )));
        };
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Parses `A..B`, `A..=B`, or a single `A` into an inclusive range.
pub fn parse_n_range(text: &str) -> CliResult<(usize, usize)> {
    let parse_one = |s: &str| -> CliResult<usize> {
        s.trim()
            .parse()
            .map_err(|_| CliError::Invalid(format!("bad dimension '{s}'")))
    };
    if let Some((a, b)) = text.split_once("..=") {
        Ok((parse_one(a)?, parse_one(b)?))
    } else if let Some((a, b)) = text.split_once("..") {
        Ok((parse_one(a)?, parse_one(b)?))
    } else {
        let v = parse_one(text)?;
        Ok((v, v))
    }
}

pub fn gap_to_string(gap: Option<f64>) -> String {
    gap.map(|g| format!("{g:.10}")).unwrap_or_default()
}

// silence the unused-import lint for rational_to_f64 used in tests only
#[allow(unused_imports)]
use rational_to_f64 as _rational_to_f64;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_cost;

    #[test]
    fn compatibility_table_is_exhaustive() {
        let settings =
            [Setting::Means, Setting::Symfunc, Setting::GraphDensity, Setting::GraphNumbers];
        let domains = [
            DomainSpec::Box { lo: -1.0, hi: 1.0 },
            DomainSpec::L1Ball { radius: 1.0 },
            DomainSpec::Simplex,
            DomainSpec::MatrixSimplex { weight: 2.0 },
            DomainSpec::BinaryGraphs,
        ];
        let allowed = |s: Setting, d: DomainSpec| match (s, &d) {
            (Setting::Means, DomainSpec::Box { .. }) => true,
            (Setting::Symfunc, DomainSpec::L1Ball { .. }) => true,
            (Setting::Symfunc, DomainSpec::Simplex) => true,
            (Setting::GraphDensity, DomainSpec::BinaryGraphs) => true,
            (Setting::GraphNumbers, DomainSpec::MatrixSimplex { .. }) => true,
            _ => false,
        };
        for s in settings {
            for d in &domains {
                assert_eq!(check_compatible(s, d).is_ok(), allowed(s, *d), "{s:?} {d:?}");
            }
        }
    }

    #[test]
    fn goodman_exhaustive_run() {
        let spec = ExperimentSpec {
            setting: Setting::GraphDensity,
            cost: parse_cost(named_cost("goodman").unwrap()).unwrap(),
            domain: DomainSpec::BinaryGraphs,
            n_lo: 4,
            n_hi: 5,
            solver: SolverChoice::Exhaustive,
            cfg: SolverConfig::default(),
            allow_large: false,
            exact_rational: true,
        };
        let rows = run(&spec).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].l_n, "-2/3");
        assert_eq!(rows[0].l_kind, "exact");
        assert_eq!(rows[0].u_n, "0");
        assert_eq!(rows[1].l_n, "-1/5");
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            CsvRow {
                setting: "graph-density".into(),
                n: 4,
                l_n: "-2/3".into(),
                l_kind: "exact".into(),
                u_n: "0".into(),
                u_kind: "exact".into(),
                gap_bound: "".into(),
                seed: 1,
                restarts: 0,
            },
            CsvRow {
                setting: "symfunc".into(),
                n: 5,
                l_n: "-0.4023000000".into(),
                l_kind: "heuristic_upper".into(),
                u_n: "0.0000000000".into(),
                u_kind: "heuristic_upper".into(),
                gap_bound: "1.2000000000".into(),
                seed: 42,
                restarts: 256,
            },
        ];
        let mut buf = Vec::new();
        emit_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("setting,n,l_n,"));
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(rows, back);
    }

    #[test]
    fn empty_csv_has_header_only() {
        let mut buf = Vec::new();
        emit_csv(&[], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
    }

    #[test]
    fn verify_identity_rows_pass() {
        for setting in
            [Setting::Symfunc, Setting::Means, Setting::GraphDensity, Setting::GraphNumbers]
        {
            let rows = verify_identity(setting, 3, 4, 9, 3).unwrap();
            assert_eq!(rows.len(), 3);
            assert!(rows.iter().all(|r| r.pass && r.statistic == "0"), "{setting:?}");
        }
    }

    #[test]
    fn verify_tv_and_w1_rows() {
        let rows = verify_tv(5).unwrap();
        assert!(rows.iter().all(|r| r.pass));
        assert_eq!(rows[0].statistic, "2/5");
        let rows = verify_w1(&[2, 4]).unwrap();
        assert!(rows.iter().all(|r| r.pass));
        assert_eq!(rows[0].statistic, "3/8");
    }

    #[test]
    fn dualize_rows_quadratic() {
        // s[2] at n = 5 → s-basis rows 5/4 s^(2) and −1/4 s^(1,1)
        let cost = parse_cost("s[2]").unwrap();
        let rows = dualize_rows(Setting::Symfunc, &cost, 5).unwrap();
        let s_rows: Vec<_> = rows.iter().filter(|r| r[0] == "s").collect();
        assert!(s_rows.iter().any(|r| r[1] == "[2]" && r[2] == "5" && r[3] == "4"));
        assert!(s_rows.iter().any(|r| r[1] == "[1,1]" && r[2] == "-1" && r[3] == "4"));
    }

    #[test]
    fn n_range_forms() {
        assert_eq!(parse_n_range("4..9").unwrap(), (4, 9));
        assert_eq!(parse_n_range("4..=9").unwrap(), (4, 9));
        assert_eq!(parse_n_range("6").unwrap(), (6, 6));
        assert!(parse_n_range("x").is_err());
    }

    #[test]
    fn config_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.conf");
        std::fs::write(&path, "# sweep\nsetting = graph-density\ncost=goodman\nn_range=4..6\n")
            .unwrap();
        let cfg = read_config(&path).unwrap();
        assert_eq!(cfg["setting"], "graph-density");
        assert_eq!(cfg["cost"], "goodman");
        assert_eq!(cfg["n_range"], "4..6");
    }

    #[test]
    fn setting_family_mismatch_rejected() {
        let spec = ExperimentSpec {
            setting: Setting::Symfunc,
            cost: parse_cost("t[K3]").unwrap(),
            domain: DomainSpec::L1Ball { radius: 1.0 },
            n_lo: 4,
            n_hi: 4,
            solver: SolverChoice::Multistart,
            cfg: SolverConfig::default(),
            allow_large: false,
            exact_rational: false,
        };
        assert!(matches!(spec.validate(), Err(CliError::Invalid(_))));
    }
}
