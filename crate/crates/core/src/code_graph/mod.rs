//! Parity-check matrices as Tanner graphs.
//!
//! A [`CodeGraph`] stores the bipartite graph between `n` variable nodes
//! (codeword bits) and `num_checks` parity-check nodes. Edges are kept in a
//! canonical order — sorted lexicographically by `(variable, check)` — and
//! the *edge id* is the rank in that order. Every message vector in the
//! decoder, every weight tensor, and every serialized artifact indexes edges
//! by this id, which makes weight layouts and checkpoints reproducible.

mod alist;
mod peg;

pub use alist::{parse_alist, serialize_alist};
pub use peg::peg_construct;

use sha2::{Digest, Sha256};
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CodeGraphError {
    #[error("alist parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("infeasible construction: {0}")]
    Construction(String),
    #[error("serialization error: {0}")]
    Serialize(String),
}

/// Tanner graph of a binary linear code.
#[derive(Debug, Clone)]
pub struct CodeGraph {
    n: usize,
    num_checks: usize,
    /// Edges sorted lexicographically by (variable, check); edge id = index.
    edges: Vec<(usize, usize)>,
    /// Edge ids incident to each variable, ascending check index.
    var_edges: Vec<Vec<usize>>,
    /// Edge ids incident to each check, ascending variable index.
    check_edges: Vec<Vec<usize>>,
    var_degrees: Vec<usize>,
    check_degrees: Vec<usize>,
    /// Non-fatal conditions recorded during construction (e.g. a masked
    /// descendant whose check lost all neighbors).
    warnings: Vec<String>,
    rank_cache: OnceLock<usize>,
}

impl PartialEq for CodeGraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.num_checks == other.num_checks && self.edges == other.edges
    }
}

impl CodeGraph {
    /// Build a graph from an edge list. Edges may arrive in any order; they
    /// are sorted into the canonical order. Duplicate or out-of-range edges
    /// are rejected.
    pub fn from_edges(
        n: usize,
        num_checks: usize,
        mut edges: Vec<(usize, usize)>,
    ) -> Result<Self, CodeGraphError> {
        for &(v, c) in &edges {
            if v >= n {
                return Err(CodeGraphError::Invalid(format!(
                    "variable index {v} out of range (n = {n})"
                )));
            }
            if c >= num_checks {
                return Err(CodeGraphError::Invalid(format!(
                    "check index {c} out of range (num_checks = {num_checks})"
                )));
            }
        }
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            return Err(CodeGraphError::Invalid("duplicate edge".to_string()));
        }

        let mut var_edges = vec![Vec::new(); n];
        let mut check_edges = vec![Vec::new(); num_checks];
        for (id, &(v, c)) in edges.iter().enumerate() {
            var_edges[v].push(id);
            check_edges[c].push(id);
        }
        for list in check_edges.iter_mut() {
            // already ascending by variable because edges are (var, check) sorted
            list.sort_unstable_by_key(|&id| edges[id].0);
        }
        let var_degrees = var_edges.iter().map(Vec::len).collect();
        let check_degrees: Vec<usize> = check_edges.iter().map(Vec::len).collect();

        Ok(CodeGraph {
            n,
            num_checks,
            edges,
            var_edges,
            check_edges,
            var_degrees,
            check_degrees,
            warnings: Vec::new(),
            rank_cache: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_checks(&self) -> usize {
        self.num_checks
    }

    /// Total edge count; equals the sum of variable degrees and of check
    /// degrees.
    pub fn theta(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> (usize, usize) {
        self.edges[id]
    }

    pub fn var_edges(&self, v: usize) -> &[usize] {
        &self.var_edges[v]
    }

    pub fn check_edges(&self, c: usize) -> &[usize] {
        &self.check_edges[c]
    }

    pub fn var_degrees(&self) -> &[usize] {
        &self.var_degrees
    }

    pub fn check_degrees(&self) -> &[usize] {
        &self.check_degrees
    }

    pub fn max_var_degree(&self) -> usize {
        self.var_degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn max_check_degree(&self) -> usize {
        self.check_degrees.iter().copied().max().unwrap_or(0)
    }

    /// True iff all variable degrees are equal and all check degrees are
    /// equal.
    pub fn is_regular(&self) -> bool {
        let v_ok = self.var_degrees.windows(2).all(|w| w[0] == w[1]);
        let c_ok = self.check_degrees.windows(2).all(|w| w[0] == w[1]);
        v_ok && c_ok
    }

    /// Uniform variable degree, if the profile is constant.
    pub fn d_v(&self) -> Option<usize> {
        let first = *self.var_degrees.first()?;
        self.var_degrees.iter().all(|&d| d == first).then_some(first)
    }

    /// Uniform check degree, if the profile is constant.
    pub fn d_c(&self) -> Option<usize> {
        let first = *self.check_degrees.first()?;
        self.check_degrees
            .iter()
            .all(|&d| d == first)
            .then_some(first)
    }

    /// Design dimension `n - num_checks`; may be non-positive for masked
    /// descendants and is reported as-is.
    pub fn k_design(&self) -> i64 {
        self.n as i64 - self.num_checks as i64
    }

    /// Rank of the parity-check matrix over GF(2), cached after first use.
    pub fn gf2_rank(&self) -> usize {
        *self.rank_cache.get_or_init(|| self.compute_gf2_rank())
    }

    fn compute_gf2_rank(&self) -> usize {
        let words = self.n.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = (0..self.num_checks)
            .map(|c| {
                let mut row = vec![0u64; words];
                for &eid in &self.check_edges[c] {
                    let v = self.edges[eid].0;
                    row[v / 64] |= 1u64 << (v % 64);
                }
                row
            })
            .collect();

        let mut rank = 0;
        for col in 0..self.n {
            let (w, b) = (col / 64, 1u64 << (col % 64));
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] & b != 0) else {
                continue;
            };
            rows.swap(rank, pivot);
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[w] & b != 0 {
                    for (x, &p) in row.iter_mut().zip(&pivot_row) {
                        *x ^= p;
                    }
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rank
    }

    /// True dimension `n - rank_2(H)`.
    pub fn k_true(&self) -> usize {
        self.n - self.gf2_rank()
    }

    /// True code rate `k_true / n`.
    pub fn rate_true(&self) -> f64 {
        self.k_true() as f64 / self.n as f64
    }

    /// Check `H x = 0` over GF(2).
    pub fn syndrome_ok(&self, bits: &[u8]) -> Result<bool, CodeGraphError> {
        if bits.len() != self.n {
            return Err(CodeGraphError::Invalid(format!(
                "bit vector length {} does not match n = {}",
                bits.len(),
                self.n
            )));
        }
        Ok(self.check_edges.iter().all(|edges| {
            edges
                .iter()
                .fold(0u8, |acc, &eid| acc ^ (bits[self.edges[eid].0] & 1))
                == 0
        }))
    }

    /// Girth of the Tanner graph (length of its shortest cycle), or `None`
    /// for a forest. BFS from every node; bipartite, so always even.
    pub fn girth(&self) -> Option<usize> {
        // nodes 0..n are variables, n..n+num_checks are checks
        let total = self.n + self.num_checks;
        let neighbors = |node: usize| -> Vec<(usize, usize)> {
            // (other endpoint, edge id)
            if node < self.n {
                self.var_edges[node]
                    .iter()
                    .map(|&e| (self.n + self.edges[e].1, e))
                    .collect()
            } else {
                self.check_edges[node - self.n]
                    .iter()
                    .map(|&e| (self.edges[e].0, e))
                    .collect()
            }
        };
        let mut best: Option<usize> = None;
        let mut dist = vec![usize::MAX; total];
        let mut via_edge = vec![usize::MAX; total];
        for start in 0..total {
            dist.fill(usize::MAX);
            via_edge.fill(usize::MAX);
            dist[start] = 0;
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for (w, eid) in neighbors(u) {
                    if eid == via_edge[u] {
                        continue;
                    }
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        via_edge[w] = eid;
                        queue.push_back(w);
                    } else {
                        let cycle = dist[u] + dist[w] + 1;
                        if best.is_none_or(|b| cycle < b) {
                            best = Some(cycle);
                        }
                    }
                }
            }
        }
        best
    }

    /// Restrict the code to the given variable columns (in the order listed),
    /// keeping every check row. Kept columns retain their original degrees;
    /// a check that loses all neighbors is recorded as a warning on the
    /// result, not an error.
    pub fn mask_columns(&self, keep: &[usize]) -> Result<CodeGraph, CodeGraphError> {
        if keep.is_empty() {
            return Err(CodeGraphError::Invalid("empty keep list".to_string()));
        }
        let mut seen = vec![false; self.n];
        for &v in keep {
            if v >= self.n {
                return Err(CodeGraphError::Invalid(format!(
                    "keep index {v} out of range (n = {})",
                    self.n
                )));
            }
            if seen[v] {
                return Err(CodeGraphError::Invalid(format!("duplicate keep index {v}")));
            }
            seen[v] = true;
        }
        let mut edges = Vec::new();
        for (new_v, &old_v) in keep.iter().enumerate() {
            for &eid in &self.var_edges[old_v] {
                edges.push((new_v, self.edges[eid].1));
            }
        }
        let mut masked = CodeGraph::from_edges(keep.len(), self.num_checks, edges)?;
        for (c, &d) in masked.check_degrees.iter().enumerate() {
            if d == 0 {
                masked
                    .warnings
                    .push(format!("check {c} lost all neighbors under masking"));
            }
        }
        Ok(masked)
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Identity hash of the code: SHA-256 of the canonical alist serialization.
    pub fn code_hash(&self) -> String {
        let text = serialize_alist(self).expect("non-empty graph serializes");
        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Single parity-check code: one check connected to every variable.
pub fn spc(n: usize) -> CodeGraph {
    let edges = (0..n).map(|v| (v, 0)).collect();
    CodeGraph::from_edges(n, 1, edges).expect("SPC is a valid graph")
}

/// The (7,4) Hamming code with H = [I3 | P].
pub fn hamming_7_4() -> CodeGraph {
    #[rustfmt::skip]
    let h: [[u8; 7]; 3] = [
        [1, 0, 0, 1, 1, 0, 1],
        [0, 1, 0, 1, 0, 1, 1],
        [0, 0, 1, 0, 1, 1, 1],
    ];
    let mut edges = Vec::new();
    for (c, row) in h.iter().enumerate() {
        for (v, &bit) in row.iter().enumerate() {
            if bit == 1 {
                edges.push((v, c));
            }
        }
    }
    CodeGraph::from_edges(7, 3, edges).expect("Hamming(7,4) is a valid graph")
}

/// The (155, 64) Tanner code: a 3x5 array of 31x31 circulant permutation
/// blocks, block (bi, bj) shifted by 5^bi * 2^bj mod 31. The multiplicative
/// orders (ord(5) = 3, ord(2) = 5 mod 31) make all fifteen shifts distinct.
/// Column degree 3, row degree 5, GF(2) rank 91.
pub fn tanner_155() -> CodeGraph {
    let mut edges = Vec::with_capacity(465);
    let mut row_shift = 1usize; // 5^bi mod 31
    for bi in 0..3 {
        let mut shift = row_shift; // 5^bi * 2^bj mod 31
        for bj in 0..5 {
            for r in 0..31 {
                edges.push((31 * bj + (r + shift) % 31, 31 * bi + r));
            }
            shift = shift * 2 % 31;
        }
        row_shift = row_shift * 5 % 31;
    }
    CodeGraph::from_edges(155, 93, edges).expect("Tanner(155) is a valid graph")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_sums_match_edge_count() {
        for g in [spc(3), hamming_7_4(), tanner_155()] {
            let sv: usize = g.var_degrees().iter().sum();
            let sc: usize = g.check_degrees().iter().sum();
            assert_eq!(sv, g.theta());
            assert_eq!(sc, g.theta());
        }
    }

    #[test]
    fn spc3_shape() {
        let g = spc(3);
        assert_eq!(g.n(), 3);
        assert_eq!(g.num_checks(), 1);
        assert_eq!(g.edges(), &[(0, 0), (1, 0), (2, 0)]);
        assert_eq!(g.theta(), 3);
    }

    #[test]
    fn hamming_profile() {
        let g = hamming_7_4();
        assert_eq!(g.n(), 7);
        assert_eq!(g.num_checks(), 3);
        assert_eq!(g.theta(), 12);
        let mut degs = g.var_degrees().to_vec();
        degs.sort_unstable();
        assert_eq!(degs, vec![1, 1, 1, 2, 2, 2, 3]);
        assert!(!g.is_regular());
    }

    #[test]
    fn tanner_155_parameters() {
        let g = tanner_155();
        assert_eq!(g.n(), 155);
        assert_eq!(g.num_checks(), 93);
        assert_eq!(g.d_v(), Some(3));
        assert_eq!(g.d_c(), Some(5));
        assert!(g.is_regular());
        assert_eq!(g.gf2_rank(), 91);
        assert_eq!(g.k_true(), 64);
        assert_eq!(g.k_design(), 62);
        // regular relation: n * d_v = num_checks * d_c
        assert_eq!(g.n() * 3, g.num_checks() * 5);
    }

    #[test]
    fn rank_identity_and_duplicate_rows() {
        // 3x3 identity
        let g = CodeGraph::from_edges(3, 3, vec![(0, 0), (1, 1), (2, 2)]).unwrap();
        assert_eq!(g.gf2_rank(), 3);
        // two identical rows [[1,1],[1,1]]
        let g = CodeGraph::from_edges(2, 2, vec![(0, 0), (1, 0), (0, 1), (1, 1)]).unwrap();
        assert_eq!(g.gf2_rank(), 1);
    }

    #[test]
    fn syndrome_examples() {
        let g = spc(3);
        assert!(g.syndrome_ok(&[0, 0, 0]).unwrap());
        assert!(g.syndrome_ok(&[1, 1, 0]).unwrap());
        assert!(!g.syndrome_ok(&[1, 0, 0]).unwrap());
        assert!(g.syndrome_ok(&[0, 0]).is_err());

        // any single-bit flip of a codeword fails the syndrome (d_min > 1)
        let t = tanner_155();
        let zero = vec![0u8; 155];
        assert!(t.syndrome_ok(&zero).unwrap());
        for flip in [0usize, 42, 154] {
            let mut w = zero.clone();
            w[flip] = 1;
            assert!(!t.syndrome_ok(&w).unwrap());
        }
    }

    #[test]
    fn masking_identity_and_spc() {
        let g = spc(3);
        let all: Vec<usize> = (0..3).collect();
        let same = g.mask_columns(&all).unwrap();
        assert_eq!(same, g);
        assert!(same.warnings().is_empty());

        let two = g.mask_columns(&[0, 1]).unwrap();
        assert_eq!(two.n(), 2);
        assert_eq!(two.check_degrees(), &[2]);

        // idempotent under the identical keep set
        let again = two.mask_columns(&[0, 1]).unwrap();
        assert_eq!(again, two);

        assert!(g.mask_columns(&[]).is_err());
        assert!(g.mask_columns(&[0, 0]).is_err());
        assert!(g.mask_columns(&[7]).is_err());
    }

    #[test]
    fn masking_records_dead_check_warning() {
        // two checks; second check only touches variable 2
        let g =
            CodeGraph::from_edges(3, 2, vec![(0, 0), (1, 0), (2, 1)]).unwrap();
        let masked = g.mask_columns(&[0, 1]).unwrap();
        assert_eq!(masked.check_degrees(), &[2, 0]);
        assert_eq!(masked.warnings().len(), 1);
    }

    #[test]
    fn tanner_girth_is_eight() {
        assert_eq!(tanner_155().girth(), Some(8));
    }

    #[test]
    fn girth_of_forest_is_none() {
        let g = CodeGraph::from_edges(3, 3, vec![(0, 0), (1, 1), (2, 2)]).unwrap();
        assert_eq!(g.girth(), None);
    }

    #[test]
    fn duplicate_and_out_of_range_edges_rejected() {
        assert!(CodeGraph::from_edges(2, 1, vec![(0, 0), (0, 0)]).is_err());
        assert!(CodeGraph::from_edges(2, 1, vec![(2, 0)]).is_err());
        assert!(CodeGraph::from_edges(2, 1, vec![(0, 1)]).is_err());
    }

    #[test]
    fn code_hash_distinguishes_codes() {
        assert_ne!(spc(3).code_hash(), spc(4).code_hash());
        assert_eq!(tanner_155().code_hash(), tanner_155().code_hash());
    }
}
