//! Small pattern graphs: canonical codes, automorphisms, enumeration and the
//! plain-text pattern format.
//!
//! Pattern format: a header line `k m` followed by `m` lines `i j` with
//! 0-based endpoints. Blank lines and lines starting with `#` are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_PATTERN_VERTICES: usize = 8;

/// Index of pair `(i, j)`, `i < j`, in colex order: (0,1), (0,2), (1,2), (0,3), ...
#[inline]
fn pair_index(i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    j * (j - 1) / 2 + i
}

fn pair_count(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// Adjacency rows as bitmasks.
fn adjacency_rows(edges: &[(usize, usize)]) -> [u8; MAX_PATTERN_VERTICES] {
    let mut rows = [0u8; MAX_PATTERN_VERTICES];
    for &(u, v) in edges {
        rows[u] |= 1 << v;
        rows[v] |= 1 << u;
    }
    rows
}

struct CanonSearch<'a> {
    k: usize,
    m: usize,
    rows: &'a [u8; MAX_PATTERN_VERTICES],
    order: [usize; MAX_PATTERN_VERTICES],
    used: u8,
    best: u32,
    best_order: [usize; MAX_PATTERN_VERTICES],
    have_best: bool,
}

impl CanonSearch<'_> {
    /// Fills position `j`; `prefix` holds the bits of all pairs inside
    /// positions `0..j`, left-aligned to the full code width.
    fn visit(&mut self, j: usize, prefix: u32) {
        if j == self.k {
            if !self.have_best || prefix < self.best {
                self.best = prefix;
                self.best_order = self.order;
                self.have_best = true;
            }
            return;
        }
        let prefix_bits = pair_count(j + 1);
        for v in 0..self.k {
            if self.used & (1 << v) != 0 {
                continue;
            }
            let mut code = prefix;
            for i in 0..j {
                if self.rows[self.order[i]] & (1 << v) != 0 {
                    code |= 1 << (self.m - 1 - pair_index(i, j));
                }
            }
            if self.have_best && prefix_bits > 0 {
                let shift = self.m - prefix_bits;
                if (code >> shift) > (self.best >> shift) {
                    continue;
                }
            }
            self.order[j] = v;
            self.used |= 1 << v;
            self.visit(j + 1, code);
            self.used &= !(1 << v);
        }
    }
}

/// Minimal adjacency code and a labelling that attains it (`order[p]` is
/// the original vertex placed at position `p`).
fn canonical_with_order(k: usize, edges: &[(usize, usize)]) -> (u32, Vec<usize>) {
    let rows = adjacency_rows(edges);
    let mut search = CanonSearch {
        k,
        m: pair_count(k),
        rows: &rows,
        order: [0; MAX_PATTERN_VERTICES],
        used: 0,
        best: 0,
        best_order: [0; MAX_PATTERN_VERTICES],
        have_best: false,
    };
    search.visit(0, 0);
    (search.best, search.best_order[..k].to_vec())
}

fn validate_edges(k: usize, edges: &[(usize, usize)]) -> Result<()> {
    if k > MAX_PATTERN_VERTICES {
        return Err(Error::UnsupportedSize {
            k,
            max: MAX_PATTERN_VERTICES,
        });
    }
    let mut seen = vec![false; pair_count(k)];
    for &(u, v) in edges {
        if u >= k || v >= k {
            return Err(Error::Pattern(format!("edge ({u}, {v}) out of range for k = {k}")));
        }
        if u == v {
            return Err(Error::Pattern(format!("self-loop at {u}")));
        }
        let idx = pair_index(u.min(v), u.max(v));
        if seen[idx] {
            return Err(Error::Pattern(format!("duplicate edge ({u}, {v})")));
        }
        seen[idx] = true;
    }
    Ok(())
}

/// Canonical code of a simple graph on `k <= 8` vertices: the minimum, over
/// all vertex permutations, of the adjacency bitstring in colex pair order.
/// Two graphs get the same code iff they are isomorphic.
pub fn canonical_form(k: usize, edges: &[(usize, usize)]) -> Result<u32> {
    validate_edges(k, edges)?;
    Ok(canonical_with_order(k, edges).0)
}

fn count_automorphisms(k: usize, rows: &[u8; MAX_PATTERN_VERTICES]) -> u64 {
    fn extend(
        j: usize,
        k: usize,
        rows: &[u8; MAX_PATTERN_VERTICES],
        image: &mut [usize; MAX_PATTERN_VERTICES],
        used: u8,
    ) -> u64 {
        if j == k {
            return 1;
        }
        let mut total = 0;
        for v in 0..k {
            if used & (1 << v) != 0 || rows[j].count_ones() != rows[v].count_ones() {
                continue;
            }
            let consistent = (0..j).all(|i| {
                let original = rows[i] & (1 << j) != 0;
                let mapped = rows[image[i]] & (1 << v) != 0;
                original == mapped
            });
            if consistent {
                image[j] = v;
                total += extend(j + 1, k, rows, image, used | (1 << v));
            }
        }
        total
    }
    let mut image = [0usize; MAX_PATTERN_VERTICES];
    extend(0, k, rows, &mut image, 0)
}

fn is_connected(k: usize, rows: &[u8; MAX_PATTERN_VERTICES]) -> bool {
    if k == 0 {
        return false;
    }
    let full: u8 = if k == 8 { 0xFF } else { (1u8 << k) - 1 };
    let mut seen: u8 = 1;
    let mut frontier: u8 = 1;
    while frontier != 0 {
        let mut next = 0u8;
        for v in 0..k {
            if frontier & (1 << v) != 0 {
                next |= rows[v];
            }
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen & full == full
}

/// A connected simple pattern graph `H` on `k <= 8` vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubgraphPattern {
    k: usize,
    edges: Vec<(usize, usize)>,
    canonical_code: u32,
    aut_count: u64,
}

impl SubgraphPattern {
    pub fn new(k: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if k < 2 {
            return Err(Error::Pattern(format!("patterns need at least 2 vertices, got {k}")));
        }
        validate_edges(k, &edges)?;
        let rows = adjacency_rows(&edges);
        if !is_connected(k, &rows) {
            return Err(Error::Pattern("pattern is not connected".into()));
        }
        let edges: Vec<_> = edges.into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
        let (canonical_code, _) = canonical_with_order(k, &edges);
        Ok(SubgraphPattern {
            k,
            aut_count: count_automorphisms(k, &rows),
            edges,
            canonical_code,
        })
    }

    pub fn clique(k: usize) -> Result<Self> {
        let edges = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
        Self::new(k, edges)
    }

    pub fn path(k: usize) -> Result<Self> {
        Self::new(k, (1..k).map(|i| (i - 1, i)).collect())
    }

    pub fn cycle(k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::Pattern("cycles need at least 3 vertices".into()));
        }
        Self::new(k, (0..k).map(|i| (i, (i + 1) % k)).collect())
    }

    /// Star with vertex 0 as the centre.
    pub fn star(leaves: usize) -> Result<Self> {
        Self::new(leaves + 1, (1..=leaves).map(|i| (0, i)).collect())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn canonical_code(&self) -> u32 {
        self.canonical_code
    }

    pub fn aut_count(&self) -> u64 {
        self.aut_count
    }

    pub fn is_clique(&self) -> bool {
        self.edges.len() == pair_count(self.k)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let (a, b) = (u.min(v), u.max(v));
        self.edges.contains(&(a, b))
    }

    /// Pattern with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k {
            return Err(Error::Pattern("permutation length differs from k".into()));
        }
        let edges = self.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        Self::new(self.k, edges)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Pattern("empty pattern".into()))?;
        let (k, m) = parse_pair(header)?;
        let mut edges = Vec::with_capacity(m);
        for line in lines.by_ref().take(m) {
            edges.push(parse_pair(line)?);
        }
        if edges.len() != m {
            return Err(Error::Pattern(format!("header announces {m} edges, found {}", edges.len())));
        }
        if let Some(extra) = lines.next() {
            return Err(Error::Pattern(format!("unexpected trailing line {extra:?}")));
        }
        Self::new(k, edges)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.k, self.edges.len());
        for (u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Compact single-line form, e.g. `0-1 1-2 0-2`.
    pub fn edge_string(&self) -> String {
        self.edges
            .iter()
            .map(|(u, v)| format!("{u}-{v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn parse_pair(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let parse = |tok: Option<&str>| -> Result<usize> {
        tok.ok_or_else(|| Error::Pattern(format!("expected two integers in {line:?}")))?
            .parse()
            .map_err(|_| Error::Pattern(format!("expected two integers in {line:?}")))
    };
    let a = parse(it.next())?;
    let b = parse(it.next())?;
    if it.next().is_some() {
        return Err(Error::Pattern(format!("expected two integers in {line:?}")));
    }
    Ok((a, b))
}

/// Number of adjacency-preserving permutations of `H`.
pub fn automorphism_count(h: &SubgraphPattern) -> u64 {
    h.aut_count
}

/// One representative per isomorphism class of connected simple graphs on
/// `k` vertices, `3 <= k <= 7`, sorted by `(edge count, canonical code)`.
///
/// Every connected graph has a vertex whose removal leaves it connected, so
/// the classes on `k` vertices are reached by joining a new vertex to a
/// non-empty subset of some class on `k - 1` vertices.
pub fn enumerate_connected(k: usize) -> Result<Vec<SubgraphPattern>> {
    if !(3..=7).contains(&k) {
        return Err(Error::param(format!("enumeration supports 3 <= k <= 7, got {k}")));
    }
    let mut level: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    for size in 2..=k {
        let mut classes: HashMap<u32, Vec<(usize, usize)>> = HashMap::new();
        for base in &level {
            for subset in 1u32..(1 << (size - 1)) {
                let mut edges = base.clone();
                edges.extend((0..size - 1).filter(|i| subset & (1 << i) != 0).map(|i| (i, size - 1)));
                let (code, order) = canonical_with_order(size, &edges);
                classes.entry(code).or_insert_with(|| {
                    let mut position = vec![0; size];
                    for (p, &v) in order.iter().enumerate() {
                        position[v] = p;
                    }
                    let mut relabeled: Vec<_> = edges
                        .iter()
                        .map(|&(u, v)| {
                            let (a, b) = (position[u], position[v]);
                            (a.min(b), a.max(b))
                        })
                        .collect();
                    relabeled.sort_unstable();
                    relabeled
                });
            }
        }
        level = classes.into_values().collect();
    }
    let mut patterns = level
        .into_iter()
        .map(|edges| SubgraphPattern::new(k, edges))
        .collect::<Result<Vec<_>>>()?;
    patterns.sort_by_key(|p| (p.edge_count(), p.canonical_code()));
    Ok(patterns)
}
