//! Bipartite graph model plus exact cycle-structure verifiers.
//!
//! Left nodes play the role of message symbols and right nodes the role of
//! parity symbols. The verifiers here are exhaustive: 4-cycles by pairwise
//! right-neighborhood collision, 6-cycles by bounded path enumeration, girth
//! by BFS from every vertex. In a bipartite graph, girth ≥ 8 is equivalent to
//! having neither a 4-cycle nor a 6-cycle.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("adjacency has {got} rows, expected n1 = {expected}")]
    RowCount { expected: usize, got: usize },
    #[error("adjacency of left node {left} is not strictly ascending")]
    NotAscending { left: usize },
    #[error("left node {left} references right node {right} outside [0, {n2})")]
    RightOutOfRange {
        left: usize,
        right: usize,
        n2: usize,
    },
    #[error("invalid graph JSON: {0}")]
    Json(String),
}

/// Closed 4-cycle left[0] - right[0] - left[1] - right[1] - left[0].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FourCycle {
    pub left: [usize; 2],
    pub right: [usize; 2],
}

impl std::fmt::Display for FourCycle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "x{} - c{} - x{} - c{} - x{}",
            self.left[0], self.right[0], self.left[1], self.right[1], self.left[0]
        )
    }
}

/// Closed 6-cycle left[0] - right[0] - left[1] - right[1] - left[2] - right[2] - left[0].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SixCycle {
    pub left: [usize; 3],
    pub right: [usize; 3],
}

impl std::fmt::Display for SixCycle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "x{} - c{} - x{} - c{} - x{} - c{} - x{}",
            self.left[0],
            self.right[0],
            self.left[1],
            self.right[1],
            self.left[2],
            self.right[2],
            self.left[0]
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeProfile {
    pub left_min: usize,
    pub left_max: usize,
    pub right_min: usize,
    pub right_max: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphJson {
    n1: usize,
    n2: usize,
    adj: Vec<Vec<usize>>,
}

/// Simple bipartite graph with `n1` left and `n2` right nodes.
///
/// Adjacency is stored left-to-right as strictly ascending index lists;
/// the right-to-left index is derived at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiGraph {
    n1: usize,
    n2: usize,
    adj: Vec<Vec<usize>>,
    radj: Vec<Vec<usize>>,
}

impl BiGraph {
    pub fn new(n1: usize, n2: usize, adj: Vec<Vec<usize>>) -> Result<BiGraph, GraphError> {
        if adj.len() != n1 {
            return Err(GraphError::RowCount {
                expected: n1,
                got: adj.len(),
            });
        }
        for (left, row) in adj.iter().enumerate() {
            for w in row.windows(2) {
                if w[0] >= w[1] {
                    return Err(GraphError::NotAscending { left });
                }
            }
            if let Some(&right) = row.last() {
                if right >= n2 {
                    return Err(GraphError::RightOutOfRange { left, right, n2 });
                }
            }
        }
        let mut radj = vec![Vec::new(); n2];
        for (left, row) in adj.iter().enumerate() {
            for &right in row {
                radj[right].push(left);
            }
        }
        Ok(BiGraph { n1, n2, adj, radj })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// Right neighbors of a left node, ascending.
    pub fn left_neighbors(&self, left: usize) -> &[usize] {
        &self.adj[left]
    }

    /// Left neighbors of a right node, ascending.
    pub fn right_neighbors(&self, right: usize) -> &[usize] {
        &self.radj[right]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, left: usize, right: usize) -> bool {
        self.adj[left].binary_search(&right).is_ok()
    }

    pub fn degree_profile(&self) -> DegreeProfile {
        let (left_min, left_max) = min_max(self.adj.iter().map(Vec::len));
        let (right_min, right_max) = min_max(self.radj.iter().map(Vec::len));
        DegreeProfile {
            left_min,
            left_max,
            right_min,
            right_max,
        }
    }

    /// Minimum left degree: the number of parallel reads the graph supports
    /// once it is verified 4- and 6-cycle free.
    pub fn min_left_degree(&self) -> usize {
        self.degree_profile().left_min
    }

    /// Some pair of left nodes sharing two right neighbors, if any.
    pub fn has_four_cycle(&self) -> Option<FourCycle> {
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        for (left, row) in self.adj.iter().enumerate() {
            for i in 0..row.len() {
                for j in i + 1..row.len() {
                    let pair = (row[i], row[j]);
                    if let Some(&other) = seen.get(&pair) {
                        return Some(FourCycle {
                            left: [other, left],
                            right: [pair.0, pair.1],
                        });
                    }
                    seen.insert(pair, left);
                }
            }
        }
        None
    }

    /// Some 6-cycle, if any, by enumerating length-3 left-to-left paths and
    /// testing for a closing right node.
    pub fn has_six_cycle(&self) -> Option<SixCycle> {
        for (a, row_a) in self.adj.iter().enumerate() {
            for &cp in row_a {
                for &b in &self.radj[cp] {
                    if b == a {
                        continue;
                    }
                    for &cq in &self.adj[b] {
                        if cq == cp {
                            continue;
                        }
                        for &c in &self.radj[cq] {
                            if c == a || c == b {
                                continue;
                            }
                            if let Some(cr) = first_common(row_a, &self.adj[c], &[cp, cq]) {
                                return Some(SixCycle {
                                    left: [a, b, c],
                                    right: [cp, cq, cr],
                                });
                            }
                        }
                    }
                }
            }
        }
        None
    }

    /// Exact girth by BFS from every vertex; `None` for forests. Bipartite,
    /// so any returned value is even.
    pub fn girth(&self) -> Option<usize> {
        let total = self.n1 + self.n2;
        if total == 0 {
            return None;
        }
        let threads = thread_budget(total);
        if threads <= 1 {
            return self.girth_over_roots(0, total);
        }
        let chunk = total.div_ceil(threads);
        let mut results = Vec::new();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let lo = t * chunk;
                    let hi = ((t + 1) * chunk).min(total);
                    scope.spawn(move || self.girth_over_roots(lo, hi))
                })
                .collect();
            for h in handles {
                results.push(h.join().expect("girth worker panicked"));
            }
        });
        results.into_iter().flatten().min()
    }

    /// Shortest cycle found by BFS rooted at each vertex in [lo, hi).
    fn girth_over_roots(&self, lo: usize, hi: usize) -> Option<usize> {
        let total = self.n1 + self.n2;
        let mut best: Option<usize> = None;
        let mut dist = vec![usize::MAX; total];
        let mut parent = vec![usize::MAX; total];
        let mut queue = std::collections::VecDeque::new();
        for root in lo..hi {
            dist.fill(usize::MAX);
            parent.fill(usize::MAX);
            queue.clear();
            dist[root] = 0;
            queue.push_back(root);
            while let Some(u) = queue.pop_front() {
                for v in self.unified_neighbors(u) {
                    if v == parent[u] {
                        continue;
                    }
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        parent[v] = u;
                        queue.push_back(v);
                    } else {
                        // Non-tree edge: the BFS-tree paths to u and v
                        // diverge at their lowest common ancestor and are
                        // disjoint below it, so a cycle of at most this
                        // length exists.
                        let cand = dist[u] + dist[v] + 1;
                        if best.is_none_or(|b| cand < b) {
                            best = Some(cand);
                        }
                    }
                }
            }
        }
        best
    }

    fn unified_neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let n1 = self.n1;
        if v < n1 {
            Either::A(self.adj[v].iter().map(move |&r| r + n1))
        } else {
            Either::B(self.radj[v - n1].iter().copied())
        }
    }

    /// True when the graph has neither a 4- nor a 6-cycle, i.e. girth ≥ 8.
    pub fn girth_at_least_8(&self) -> bool {
        self.girth().is_none_or(|g| g >= 8)
    }

    /// Compact JSON: `{"n1": .., "n2": .., "adj": [[..], ..]}`, no other keys.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphJson {
            n1: self.n1,
            n2: self.n2,
            adj: self.adj.clone(),
        })
        .expect("graph serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<BiGraph, GraphError> {
        let raw: GraphJson =
            serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
        BiGraph::new(raw.n1, raw.n2, raw.adj)
    }
}

enum Either<A, B> {
    A(A),
    B(B),
}

impl<A: Iterator<Item = usize>, B: Iterator<Item = usize>> Iterator for Either<A, B> {
    type Item = usize;
    fn next(&mut self) -> Option<usize> {
        match self {
            Either::A(it) => it.next(),
            Either::B(it) => it.next(),
        }
    }
}

fn min_max(degrees: impl Iterator<Item = usize>) -> (usize, usize) {
    let mut min = usize::MAX;
    let mut max = 0;
    let mut any = false;
    for d in degrees {
        any = true;
        min = min.min(d);
        max = max.max(d);
    }
    if any {
        (min, max)
    } else {
        (0, 0)
    }
}

/// First element of both sorted lists that is not in `exclude`.
fn first_common(a: &[usize], b: &[usize], exclude: &[usize]) -> Option<usize> {
    let mut i = 0;
    let mut j = 0;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if !exclude.contains(&a[i]) {
                    return Some(a[i]);
                }
                i += 1;
                j += 1;
            }
        }
    }
    None
}

/// Verifier thread count: available parallelism capped by BATCHCODE_THREADS.
fn thread_budget(tasks: usize) -> usize {
    let avail = std::thread::available_parallelism()
        .map(|v| v.get())
        .unwrap_or(1);
    let cap = std::env::var("BATCHCODE_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or(avail);
    cap.min(avail).min(tasks.max(1))
}

/// Re-check a reported 4-cycle against the adjacency.
pub fn four_cycle_is_valid(g: &BiGraph, c: &FourCycle) -> bool {
    c.left[0] != c.left[1]
        && c.right[0] != c.right[1]
        && c.left
            .iter()
            .all(|&l| g.has_edge(l, c.right[0]) && g.has_edge(l, c.right[1]))
}

/// Re-check a reported 6-cycle against the adjacency.
pub fn six_cycle_is_valid(g: &BiGraph, c: &SixCycle) -> bool {
    let distinct = c.left[0] != c.left[1] && c.left[1] != c.left[2] && c.left[0] != c.left[2];
    let distinct_r =
        c.right[0] != c.right[1] && c.right[1] != c.right[2] && c.right[0] != c.right[2];
    distinct
        && distinct_r
        && g.has_edge(c.left[0], c.right[0])
        && g.has_edge(c.left[1], c.right[0])
        && g.has_edge(c.left[1], c.right[1])
        && g.has_edge(c.left[2], c.right[1])
        && g.has_edge(c.left[2], c.right[2])
        && g.has_edge(c.left[0], c.right[2])
}
