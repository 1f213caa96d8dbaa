//! Graph data model: binary networks, signed difference networks, edge-list
//! ingestion and degree statistics.
//!
//! Both orientations of an undirected edge are stored, so every kernel can
//! treat its input as a full (possibly asymmetric) matrix with entries in
//! `{-1, 0, +1}` and zero diagonal.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compressed sparse rows with entries in `{-1, +1}`. Columns within a row are
/// sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
struct SparseRows {
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<i8>,
}

impl SparseRows {
    /// Builds rows from `(i, j, v)` triples. Caller guarantees validity and no
    /// duplicate positions.
    fn from_triples(n: usize, mut triples: Vec<(u32, u32, i8)>) -> Self {
        triples.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut offsets = vec![0usize; n + 1];
        for &(i, _, _) in &triples {
            offsets[i as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let cols = triples.iter().map(|t| t.1).collect();
        let vals = triples.iter().map(|t| t.2).collect();
        Self { offsets, cols, vals }
    }

    #[inline]
    fn row(&self, i: usize) -> (&[u32], &[i8]) {
        let (s, e) = (self.offsets[i], self.offsets[i + 1]);
        (&self.cols[s..e], &self.vals[s..e])
    }

    fn get(&self, i: usize, j: usize) -> i8 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&(j as u32)) {
            Ok(p) => vals[p],
            Err(_) => 0,
        }
    }
}

/// Read-only view shared by [`Network`] and [`SignedNetwork`]: an `n x n`
/// matrix with entries in `{-1, 0, +1}` accessed by sparse rows.
pub trait SignedAdjacency: Sync {
    fn node_count(&self) -> usize;
    fn is_directed(&self) -> bool;
    /// Column indices (sorted) and values of the nonzero entries in row `i`.
    fn row(&self, i: usize) -> (&[u32], &[i8]);
    /// Number of nonzero entries, counting both orientations when undirected.
    fn nnz(&self) -> usize;
}

/// A binary adjacency matrix of one observed graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    n: usize,
    directed: bool,
    rows: SparseRows,
}

impl Network {
    pub fn empty(n: usize, directed: bool) -> Self {
        Self {
            n,
            directed,
            rows: SparseRows::from_triples(n, Vec::new()),
        }
    }

    /// Builds a network from edge pairs. Undirected inputs may list each edge
    /// in either orientation, but only once.
    pub fn from_edges<I>(n: usize, directed: bool, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let list = EdgeList {
            pairs: edges.into_iter().collect(),
            lines: Vec::new(),
        };
        list.into_network(n, directed)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.rows.get(i, j) != 0
    }

    /// Out-neighbors of `i` (all neighbors when undirected).
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows.row(i).0.iter().map(|&j| j as usize)
    }

    /// All stored ordered pairs; undirected edges appear in both orientations.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.neighbors(i).map(move |j| (i, j)))
    }

    /// Number of edges: ordered pairs when directed, unordered pairs otherwise.
    pub fn edge_count(&self) -> usize {
        if self.directed {
            self.rows.cols.len()
        } else {
            self.rows.cols.len() / 2
        }
    }

    /// Serializes to the edge-list text format. Undirected edges are written
    /// once with `i < j`.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (i, j) in self.edges() {
            if self.directed || i < j {
                let _ = writeln!(out, "{i} {j}");
            }
        }
        out
    }

    /// Applies the node relabeling `i -> perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: perm.len(),
            });
        }
        let edges = self
            .edges()
            .filter(|&(i, j)| self.directed || i < j)
            .map(|(i, j)| (perm[i], perm[j]));
        Network::from_edges(self.n, self.directed, edges)
    }

    /// Subgraph induced by nodes `0..m`.
    pub fn induced_prefix(&self, m: usize) -> Self {
        let m = m.min(self.n);
        let triples = self
            .edges()
            .filter(|&(i, j)| i < m && j < m)
            .map(|(i, j)| (i as u32, j as u32, 1i8))
            .collect();
        Self {
            n: m,
            directed: self.directed,
            rows: SparseRows::from_triples(m, triples),
        }
    }

    /// The same matrix viewed as a signed network (all entries `+1`).
    pub fn to_signed(&self) -> SignedNetwork {
        SignedNetwork {
            n: self.n,
            directed: self.directed,
            rows: self.rows.clone(),
        }
    }
}

impl SignedAdjacency for Network {
    fn node_count(&self) -> usize {
        self.n
    }
    fn is_directed(&self) -> bool {
        self.directed
    }
    fn row(&self, i: usize) -> (&[u32], &[i8]) {
        self.rows.row(i)
    }
    fn nnz(&self) -> usize {
        self.rows.cols.len()
    }
}

/// A matrix with entries in `{-1, 0, +1}`, typically `A - Ã`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedNetwork {
    n: usize,
    directed: bool,
    rows: SparseRows,
}

impl SignedNetwork {
    /// Builds from `(i, j, v)` entries with `v` in `{-1, +1}`. For undirected
    /// networks each unordered pair is given once and mirrored.
    pub fn from_entries<I>(n: usize, directed: bool, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, i8)>,
    {
        let mut seen = HashSet::new();
        let mut triples = Vec::new();
        for (i, j, v) in entries {
            for idx in [i, j] {
                if idx >= n {
                    return Err(Error::IndexOutOfRange { index: idx, n });
                }
            }
            if i == j {
                return Err(Error::SelfLoop { line: 0, node: i });
            }
            if v != 1 && v != -1 {
                return Err(Error::invalid(format!("entry ({i}, {j}) = {v} not in {{-1, +1}}")));
            }
            let key = if directed { (i, j) } else { (i.min(j), i.max(j)) };
            if !seen.insert(key) {
                return Err(Error::DuplicateEdge { line: 0, i, j });
            }
            triples.push((i as u32, j as u32, v));
            if !directed {
                triples.push((j as u32, i as u32, v));
            }
        }
        Ok(Self {
            n,
            directed,
            rows: SparseRows::from_triples(n, triples),
        })
    }

    /// Builds from a dense row-major `n x n` matrix. Undirected input must be
    /// symmetric.
    pub fn from_dense(n: usize, directed: bool, dense: &[i8]) -> Result<Self> {
        if dense.len() != n * n {
            return Err(Error::DimensionMismatch {
                left: n * n,
                right: dense.len(),
            });
        }
        let mut triples = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = dense[i * n + j];
                if v == 0 {
                    continue;
                }
                if i == j {
                    return Err(Error::SelfLoop { line: 0, node: i });
                }
                if v != 1 && v != -1 {
                    return Err(Error::invalid(format!("entry ({i}, {j}) = {v} not in {{-1, +1}}")));
                }
                if !directed && dense[j * n + i] != v {
                    return Err(Error::invalid("undirected matrix is not symmetric"));
                }
                triples.push((i as u32, j as u32, v));
            }
        }
        Ok(Self {
            n,
            directed,
            rows: SparseRows::from_triples(n, triples),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.rows.get(i, j)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.cols.is_empty()
    }

    /// Nonzero entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, i8)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (cols, vals) = self.rows.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j as usize, v))
        })
    }

    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        for v in &mut out.rows.vals {
            *v = -*v;
        }
        out
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<i8> {
        let mut d = vec![0i8; self.n * self.n];
        for (i, j, v) in self.entries() {
            d[i * self.n + j] = v;
        }
        d
    }
}

impl SignedAdjacency for SignedNetwork {
    fn node_count(&self) -> usize {
        self.n
    }
    fn is_directed(&self) -> bool {
        self.directed
    }
    fn row(&self, i: usize) -> (&[u32], &[i8]) {
        self.rows.row(i)
    }
    fn nnz(&self) -> usize {
        self.rows.cols.len()
    }
}

/// Average and maximum degree (out-degree when directed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub avg_degree: f64,
    pub max_degree: usize,
}

pub fn degree_stats<G: SignedAdjacency + ?Sized>(g: &G) -> DegreeStats {
    let n = g.node_count();
    let max_degree = (0..n).map(|i| g.row(i).0.len()).max().unwrap_or(0);
    let avg_degree = if n == 0 { 0.0 } else { g.nnz() as f64 / n as f64 };
    DegreeStats {
        avg_degree,
        max_degree,
    }
}

/// Entrywise difference `a - b`.
pub fn diff(a: &Network, b: &Network) -> Result<SignedNetwork> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch {
            left: a.n,
            right: b.n,
        });
    }
    if a.directed != b.directed {
        return Err(Error::DirectednessMismatch);
    }
    let mut triples = Vec::new();
    for i in 0..a.n {
        let (ra, _) = a.rows.row(i);
        let (rb, _) = b.rows.row(i);
        let (mut p, mut q) = (0, 0);
        while p < ra.len() || q < rb.len() {
            match (ra.get(p), rb.get(q)) {
                (Some(&x), Some(&y)) if x == y => {
                    p += 1;
                    q += 1;
                }
                (Some(&x), Some(&y)) if x < y => {
                    triples.push((i as u32, x, 1));
                    p += 1;
                }
                (Some(_), Some(&y)) => {
                    triples.push((i as u32, y, -1));
                    q += 1;
                }
                (Some(&x), None) => {
                    triples.push((i as u32, x, 1));
                    p += 1;
                }
                (None, Some(&y)) => {
                    triples.push((i as u32, y, -1));
                    q += 1;
                }
                (None, None) => unreachable!(),
            }
        }
    }
    Ok(SignedNetwork {
        n: a.n,
        directed: a.directed,
        rows: SparseRows::from_triples(a.n, triples),
    })
}

/// Parsed but not yet validated edge pairs, with their source line numbers.
#[derive(Debug, Clone, Default)]
pub struct EdgeList {
    pairs: Vec<(usize, usize)>,
    lines: Vec<usize>,
}

impl EdgeList {
    /// Parses edge-list text: one `i j` pair per line, `#` comments and blank
    /// lines skipped.
    pub fn parse(text: &str, one_based: bool) -> Result<Self> {
        let mut list = EdgeList::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut toks = trimmed.split_whitespace();
            let (Some(a), Some(b), None) = (toks.next(), toks.next(), toks.next()) else {
                return Err(Error::Parse {
                    line,
                    detail: format!("expected two node ids, got {trimmed:?}"),
                });
            };
            let parse = |tok: &str| -> Result<usize> {
                let v: usize = tok.parse().map_err(|_| Error::Parse {
                    line,
                    detail: format!("invalid node id {tok:?}"),
                })?;
                if one_based {
                    v.checked_sub(1).ok_or_else(|| Error::Parse {
                        line,
                        detail: "node id 0 in a one-based list".into(),
                    })
                } else {
                    Ok(v)
                }
            };
            list.pairs.push((parse(a)?, parse(b)?));
            list.lines.push(line);
        }
        Ok(list)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Largest node id mentioned, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.pairs.iter().map(|&(i, j)| i.max(j)).max()
    }

    pub fn into_network(self, n: usize, directed: bool) -> Result<Network> {
        let mut seen = HashSet::with_capacity(self.pairs.len());
        let mut triples = Vec::with_capacity(self.pairs.len() * if directed { 1 } else { 2 });
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            let line = self.lines.get(k).copied().unwrap_or(0);
            if i == j {
                return Err(Error::SelfLoop { line, node: i });
            }
            for idx in [i, j] {
                if idx >= n {
                    return Err(Error::IndexOutOfRange { index: idx, n });
                }
            }
            let key = if directed { (i, j) } else { (i.min(j), i.max(j)) };
            if !seen.insert(key) {
                return Err(Error::DuplicateEdge { line, i, j });
            }
            triples.push((i as u32, j as u32, 1i8));
            if !directed {
                triples.push((j as u32, i as u32, 1i8));
            }
        }
        Ok(Network {
            n,
            directed,
            rows: SparseRows::from_triples(n, triples),
        })
    }
}

/// Reads an edge list. When `n` is absent it is inferred as one more than the
/// largest node id.
pub fn load_edge_list<R: Read>(
    mut reader: R,
    n: Option<usize>,
    directed: bool,
    one_based: bool,
) -> Result<Network> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let list = EdgeList::parse(&text, one_based)?;
    let n = match n {
        Some(n) => n,
        None => list
            .max_index()
            .map(|m| m + 1)
            .ok_or_else(|| Error::invalid("cannot infer node count from an empty edge list"))?,
    };
    if n == 0 {
        return Err(Error::invalid("node count must be positive"));
    }
    list.into_network(n, directed)
}
