//! Progressive edge-growth construction of Tanner graphs.

use super::{CodeGraph, CodeGraphError};
use std::collections::VecDeque;

/// Build an `n`-variable graph with `num_checks` checks where every variable
/// has degree exactly `d_v`, placing each edge greedily to maximize local
/// girth: BFS from the variable over the partial graph, connect to the
/// deepest (preferring unreachable) check not already adjacent, breaking
/// ties by lowest current check degree, then lowest check index. That
/// ordering is total, so the final seeded-shuffle stage of the tie-break
/// chain never activates; the construction is identical for every `seed`,
/// and the parameter is retained only as part of the construction record.
pub fn peg_construct(
    n: usize,
    num_checks: usize,
    d_v: usize,
    seed: u64,
) -> Result<CodeGraph, CodeGraphError> {
    let _ = seed;
    if num_checks == 0 {
        return Err(CodeGraphError::Construction(
            "num_checks must be positive".to_string(),
        ));
    }
    if n == 0 || d_v == 0 {
        return Err(CodeGraphError::Construction(
            "n and d_v must be positive".to_string(),
        ));
    }
    if d_v > num_checks {
        return Err(CodeGraphError::Construction(format!(
            "d_v = {d_v} exceeds num_checks = {num_checks}"
        )));
    }
    if n * d_v < num_checks {
        return Err(CodeGraphError::Construction(format!(
            "n * d_v = {} cannot cover {num_checks} checks",
            n * d_v
        )));
    }

    let mut var_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut check_adj: Vec<Vec<usize>> = vec![Vec::new(); num_checks];
    let mut check_deg = vec![0usize; num_checks];
    let mut edges = Vec::with_capacity(n * d_v);

    let mut check_dist = vec![usize::MAX; num_checks];
    let mut var_seen = vec![false; n];

    for v in 0..n {
        for _ in 0..d_v {
            // BFS from v through the partial graph
            check_dist.fill(usize::MAX);
            var_seen.fill(false);
            var_seen[v] = true;
            let mut queue: VecDeque<(usize, usize)> = VecDeque::from([(v, 0)]); // (variable, depth)
            while let Some((u, depth)) = queue.pop_front() {
                for &c in &var_adj[u] {
                    if check_dist[c] != usize::MAX {
                        continue;
                    }
                    check_dist[c] = depth + 1;
                    for &w in &check_adj[c] {
                        if !var_seen[w] {
                            var_seen[w] = true;
                            queue.push_back((w, depth + 2));
                        }
                    }
                }
            }

            // candidates: checks not already adjacent to v; unreachable ones
            // count as infinitely deep
            let adjacent = &var_adj[v];
            let best = (0..num_checks)
                .filter(|c| !adjacent.contains(c))
                .min_by_key(|&c| (usize::MAX - check_dist[c], check_deg[c], c))
                .expect("d_v <= num_checks leaves a candidate");

            edges.push((v, best));
            var_adj[v].push(best);
            check_adj[best].push(v);
            check_deg[best] += 1;
        }
    }

    CodeGraph::from_edges(n, num_checks, edges)
}
