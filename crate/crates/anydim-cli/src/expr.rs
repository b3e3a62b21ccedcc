//! Cost-expression parsing: a small recursive-descent grammar for linear
//! combinations of basis atoms, with byte-offset error reporting.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := [rational ('*')?] atom
//! rational := ['-'] int ['/' int]
//! atom     := ident '[' contents ']' | ident '{' edges '}'
//! ident    := s | m | sbar | mbar | hom | inj | t | tinj
//! ```
//!
//! Bracket contents are partitions (`s[3,1]`), multi-index lists
//! (`mbar[(2,0);(1,1)]`, with `sbar[2,1]` as one-dimensional sugar), or a
//! named graph (`t[K3]`). Braces hold 1-based edge lists (`hom{1-2,2-3}`,
//! repeated pairs for multi-edges, `i-i` for loops). Whitespace is
//! ignored everywhere.

use anydim::combinat::{MultiIndexList, Partition};
use anydim::graphalg::{canonical_form, GraphClass, MultiGraph};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// A parse failure with the byte offset where it happened.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at offset {}: {}", self.offset, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Which setting family an atom belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Sym,
    Mean,
    GraphDensity,
    GraphNumbers,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Sym => "symfunc",
            Family::Mean => "means",
            Family::GraphDensity => "graph-density",
            Family::GraphNumbers => "graph-numbers",
        }
    }
}

/// One basis atom of a cost expression.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum CostAtom {
    PowerSum(Partition),
    MonomialSum(Partition),
    PowerMean(MultiIndexList),
    MonomialMean(MultiIndexList),
    Hom(GraphClass),
    Inj(GraphClass),
    T(GraphClass),
    TInj(GraphClass),
}

impl CostAtom {
    pub fn family(&self) -> Family {
        match self {
            CostAtom::PowerSum(_) | CostAtom::MonomialSum(_) => Family::Sym,
            CostAtom::PowerMean(_) | CostAtom::MonomialMean(_) => Family::Mean,
            CostAtom::T(_) | CostAtom::TInj(_) => Family::GraphDensity,
            CostAtom::Hom(_) | CostAtom::Inj(_) => Family::GraphNumbers,
        }
    }

    pub fn degree(&self) -> u32 {
        match self {
            CostAtom::PowerSum(p) | CostAtom::MonomialSum(p) => p.weight(),
            CostAtom::PowerMean(l) | CostAtom::MonomialMean(l) => l.weight(),
            CostAtom::Hom(g) | CostAtom::Inj(g) | CostAtom::T(g) | CostAtom::TInj(g) => {
                g.edge_count()
            }
        }
    }
}

impl fmt::Display for CostAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn edges(g: &GraphClass) -> String {
            let s = g.to_string();
            // GraphClass prints as H{...}; reuse the braces part
            s.trim_start_matches('H').to_string()
        }
        fn parts(p: &Partition) -> String {
            p.to_string()
        }
        match self {
            CostAtom::PowerSum(p) => write!(f, "s{}", parts(p)),
            CostAtom::MonomialSum(p) => write!(f, "m{}", parts(p)),
            CostAtom::PowerMean(l) => write!(f, "sbar{l}"),
            CostAtom::MonomialMean(l) => write!(f, "mbar{l}"),
            CostAtom::Hom(g) => write!(f, "hom{}", edges(g)),
            CostAtom::Inj(g) => write!(f, "inj{}", edges(g)),
            CostAtom::T(g) => write!(f, "t{}", edges(g)),
            CostAtom::TInj(g) => write!(f, "tinj{}", edges(g)),
        }
    }
}

/// Maximum total degree accepted by the parser.
pub const MAX_DEGREE: u32 = 6;

/// A parsed cost: rational coefficients over atoms of one family, kept in
/// canonical (sorted, merged, zero-free) form.
#[derive(Debug, Clone, PartialEq)]
pub struct CostExpr {
    terms: BTreeMap<CostAtom, BigRational>,
}

impl CostExpr {
    pub fn new() -> Self {
        CostExpr { terms: BTreeMap::new() }
    }

    pub fn add_term(&mut self, atom: CostAtom, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(atom.clone()).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&atom);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CostAtom, &BigRational)> {
        self.terms.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn family(&self) -> Option<Family> {
        self.terms.keys().next().map(|a| a.family())
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|a| a.degree()).max().unwrap_or(0)
    }
}

impl Default for CostExpr {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Display for CostExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0*s[]");
        }
        for (i, (atom, c)) in self.terms.iter().enumerate() {
            if i == 0 {
                if c < &BigRational::zero() {
                    write!(f, "-")?;
                }
            } else if c < &BigRational::zero() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = if c < &BigRational::zero() { -c.clone() } else { c.clone() };
            write!(f, "{a}*{atom}")?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { bytes: text.as_bytes(), pos: 0 }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { offset: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<(), ParseError> {
        if self.eat(b) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", b as char))
        }
    }

    fn parse_uint(&mut self) -> Result<u64, ParseError> {
        let start = self.pos;
        while self.peek().map_or(false, |b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected an integer");
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| ParseError { offset: start, message: "integer too large".into() })
    }

    fn parse_ident(&mut self) -> Result<(usize, String), ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().map_or(false, |b| b.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected an atom identifier");
        }
        Ok((start, std::str::from_utf8(&self.bytes[start..self.pos]).unwrap().to_string()))
    }

    /// Optional leading rational, with an optional `*` separator.
    fn parse_coeff(&mut self) -> Result<Option<BigRational>, ParseError> {
        self.skip_ws();
        if !self.peek().map_or(false, |b| b.is_ascii_digit()) {
            return Ok(None);
        }
        let numer = self.parse_uint()?;
        self.skip_ws();
        let denom = if self.eat(b'/') {
            self.skip_ws();
            let at = self.pos;
            let d = self.parse_uint()?;
            if d == 0 {
                return Err(ParseError { offset: at, message: "zero denominator".into() });
            }
            d
        } else {
            1
        };
        self.skip_ws();
        self.eat(b'*');
        Ok(Some(BigRational::new(BigInt::from(numer), BigInt::from(denom))))
    }

    fn parse_partition(&mut self) -> Result<Partition, ParseError> {
        // inside brackets: empty or comma-separated positive integers
        let mut parts = Vec::new();
        self.skip_ws();
        if self.peek() == Some(b']') {
            return Ok(Partition::empty());
        }
        loop {
            self.skip_ws();
            let at = self.pos;
            let p = self.parse_uint()?;
            if p == 0 {
                return Err(ParseError { offset: at, message: "partition parts must be positive".into() });
            }
            parts.push(p as u32);
            self.skip_ws();
            if !self.eat(b',') {
                break;
            }
        }
        Ok(Partition::new(parts))
    }

    fn parse_multi_index_list(&mut self) -> Result<MultiIndexList, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b']') => Ok(MultiIndexList::empty(1)),
            Some(b'(') => {
                // tuple form: (2,0);(1,1)
                let mut entries: Vec<Vec<u32>> = Vec::new();
                loop {
                    self.skip_ws();
                    self.expect(b'(')?;
                    let mut tuple = Vec::new();
                    loop {
                        self.skip_ws();
                        tuple.push(self.parse_uint()? as u32);
                        self.skip_ws();
                        if !self.eat(b',') {
                            break;
                        }
                    }
                    self.expect(b')')?;
                    if tuple.iter().all(|&c| c == 0) {
                        return self.err("zero multi-index not allowed");
                    }
                    entries.push(tuple);
                    self.skip_ws();
                    if !self.eat(b';') {
                        break;
                    }
                }
                let dim = entries[0].len();
                if entries.iter().any(|e| e.len() != dim) {
                    return self.err("multi-index tuples must share one dimension");
                }
                Ok(MultiIndexList::new(entries, dim))
            }
            _ => {
                // one-dimensional sugar: comma-separated exponents
                let p = self.parse_partition()?;
                Ok(MultiIndexList::from_parts(p.parts()))
            }
        }
    }

    fn parse_named_graph(&mut self) -> Result<GraphClass, ParseError> {
        let (at, name) = self.parse_ident_with_digits()?;
        let g = match name.as_str() {
            "K2" => MultiGraph::complete(2),
            "K3" => MultiGraph::complete(3),
            "K4" => MultiGraph::complete(4),
            "P3" => MultiGraph::path(3),
            "P4" => MultiGraph::path(4),
            "C4" => MultiGraph::cycle(4),
            "K2uK2" => MultiGraph::complete(2).disjoint_union(&MultiGraph::complete(2)),
            "K3pendant" => MultiGraph::triangle_pendant(),
            other => {
                return Err(ParseError {
                    offset: at,
                    message: format!("unknown graph shortcut '{other}'"),
                })
            }
        };
        canonical_form(&g).map_err(|e| ParseError { offset: at, message: e.to_string() })
    }

    fn parse_ident_with_digits(&mut self) -> Result<(usize, String), ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().map_or(false, |b| b.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected a name");
        }
        Ok((start, std::str::from_utf8(&self.bytes[start..self.pos]).unwrap().to_string()))
    }

    fn parse_edges(&mut self) -> Result<GraphClass, ParseError> {
        let at = self.pos;
        let mut edges: Vec<(usize, usize)> = Vec::new();
        let mut max_v = 0usize;
        self.skip_ws();
        if self.peek() != Some(b'}') {
            loop {
                self.skip_ws();
                let a_at = self.pos;
                let a = self.parse_uint()? as usize;
                self.skip_ws();
                self.expect(b'-')?;
                self.skip_ws();
                let b = self.parse_uint()? as usize;
                if a == 0 || b == 0 {
                    return Err(ParseError {
                        offset: a_at,
                        message: "vertex labels are 1-based".into(),
                    });
                }
                max_v = max_v.max(a).max(b);
                edges.push((a - 1, b - 1));
                self.skip_ws();
                if !self.eat(b',') {
                    break;
                }
            }
        }
        let g = MultiGraph::from_edges(max_v, &edges);
        canonical_form(&g).map_err(|e| ParseError { offset: at, message: e.to_string() })
    }

    fn parse_atom(&mut self) -> Result<(usize, CostAtom), ParseError> {
        let (at, ident) = self.parse_ident()?;
        self.skip_ws();
        let atom = match self.peek() {
            Some(b'[') => {
                self.pos += 1;
                let atom = match ident.as_str() {
                    "s" => CostAtom::PowerSum(self.parse_partition()?),
                    "m" => CostAtom::MonomialSum(self.parse_partition()?),
                    "sbar" => CostAtom::PowerMean(self.parse_multi_index_list()?),
                    "mbar" => CostAtom::MonomialMean(self.parse_multi_index_list()?),
                    "hom" => CostAtom::Hom(self.parse_named_graph()?),
                    "inj" => CostAtom::Inj(self.parse_named_graph()?),
                    "t" => CostAtom::T(self.parse_named_graph()?),
                    "tinj" => CostAtom::TInj(self.parse_named_graph()?),
                    other => {
                        return Err(ParseError {
                            offset: at,
                            message: format!("unknown atom kind '{other}'"),
                        })
                    }
                };
                self.skip_ws();
                self.expect(b']')?;
                atom
            }
            Some(b'{') => {
                self.pos += 1;
                let g = self.parse_edges()?;
                let atom = match ident.as_str() {
                    "hom" => CostAtom::Hom(g),
                    "inj" => CostAtom::Inj(g),
                    "t" => CostAtom::T(g),
                    "tinj" => CostAtom::TInj(g),
                    other => {
                        return Err(ParseError {
                            offset: at,
                            message: format!("edge lists only apply to graph atoms, not '{other}'"),
                        })
                    }
                };
                self.skip_ws();
                self.expect(b'}')?;
                atom
            }
            _ => return self.err("expected '[' or '{' after the atom kind"),
        };
        Ok((at, atom))
    }
}

/// Parses a cost expression; all atoms must belong to one setting family
/// and the total degree must stay at most [`MAX_DEGREE`].
pub fn parse_cost(text: &str) -> Result<CostExpr, ParseError> {
    let mut p = Parser::new(text);
    let mut out = CostExpr::new();
    let mut family: Option<(usize, Family)> = None;
    let mut sign = BigRational::one();
    p.skip_ws();
    if p.eat(b'-') {
        sign = -sign;
    }
    loop {
        let coeff = p.parse_coeff()?.unwrap_or_else(BigRational::one);
        let (at, atom) = p.parse_atom()?;
        match family {
            None => family = Some((at, atom.family())),
            Some((_, f)) if f == atom.family() => {}
            Some((_, f)) => {
                return Err(ParseError {
                    offset: at,
                    message: format!(
                        "mixed atom families: expression started in the {} family but this atom is {}",
                        f.as_str(),
                        atom.family().as_str()
                    ),
                });
            }
        }
        if atom.degree() > MAX_DEGREE {
            return Err(ParseError {
                offset: at,
                message: format!("atom degree {} exceeds the limit {MAX_DEGREE}", atom.degree()),
            });
        }
        out.add_term(atom, &sign * coeff);
        p.skip_ws();
        match p.peek() {
            None => break,
            Some(b'+') => {
                p.pos += 1;
                sign = BigRational::one();
            }
            Some(b'-') => {
                p.pos += 1;
                sign = -BigRational::one();
            }
            Some(c) => {
                return Err(ParseError {
                    offset: p.pos,
                    message: format!("expected '+', '-', or end of input, found '{}'", c as char),
                })
            }
        }
    }
    Ok(out)
}
