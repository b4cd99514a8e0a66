//! Generators for bipartite graph families of girth at least 8, the
//! left-copy splitting transform, and a replication baseline.
//!
//! Every generator is deterministic: node indexing, subset choices and
//! neighbor orderings are all canonical, so repeated runs produce identical
//! graphs.

use crate::bigraph::{BiGraph, GraphError};
use crate::gf::{self, Field, FieldElement, GfError};
use num_rational::Ratio;
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("construction requires an odd prime, got {0}")]
    OddPrimeRequired(u64),
    #[error("vector length r must be at least 1")]
    RankTooSmall,
    #[error("exponent {name} = {value} outside supported range [1, {max}]")]
    BadExponent {
        name: &'static str,
        value: u32,
        max: u32,
    },
    #[error("family {family} not generated for q = {q} (supported: prime q <= {max})")]
    UnsupportedQ {
        family: &'static str,
        q: u64,
        max: u64,
    },
    #[error("requested parameters overflow the supported graph size")]
    TooLarge,
    #[error("split requires uniform left degree, found range [{min}, {max}]")]
    NonUniformLeftDegree { min: usize, max: usize },
    #[error("split factor {b} does not divide the left degree {degree}")]
    IndivisibleDegree { degree: usize, b: usize },
    #[error("input graph has a short cycle: {0}")]
    ShortCycle(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Gf(#[from] GfError),
}

/// Keep exhaustive verification comfortably desk-scale.
const MAX_NODES: u64 = 2_000_000;

// ---------------------------------------------------------------------------
// Zig-zag construction
// ---------------------------------------------------------------------------

/// Parameters of the zig-zag graph: prime alphabet `k` (left degree) and
/// vector length `r` (right degree).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZigZagParams {
    pub k: u64,
    pub r: u32,
}

/// Biregular graph on `r·k^r` left and `k^{r+1}` right nodes.
///
/// A left node `(l0, l1..lr)` with `l0 in [1, r]` is adjacent to the right
/// nodes `(v0, v1..vr)` obtained by adding `v0` to coordinate `l0` modulo
/// `k`, one neighbor per `v0`. Girth is at least 8.
pub fn zigzag(params: &ZigZagParams) -> Result<BiGraph, ConstructError> {
    let ZigZagParams { k, r } = *params;
    if !gf::is_prime(k) {
        return Err(ConstructError::NotPrime(k));
    }
    if r < 1 {
        return Err(ConstructError::RankTooSmall);
    }
    let kr = k.checked_pow(r).ok_or(ConstructError::TooLarge)?;
    let n1 = (r as u64).checked_mul(kr).ok_or(ConstructError::TooLarge)?;
    let n2 = kr.checked_mul(k).ok_or(ConstructError::TooLarge)?;
    if n1 + n2 > MAX_NODES {
        return Err(ConstructError::TooLarge);
    }
    let mut adj = Vec::with_capacity(n1 as usize);
    for pos in 0..r {
        // Weight of coordinate l_{pos+1} in the big-endian digit encoding.
        let place = k.pow(r - 1 - pos);
        for digits in 0..kr {
            let digit = (digits / place) % k;
            let row = (0..k)
                .map(|v0| {
                    let shifted = digits - digit * place + ((digit + v0) % k) * place;
                    (v0 * kr + shifted) as usize
                })
                .collect();
            adj.push(row);
        }
    }
    Ok(BiGraph::new(n1 as usize, n2 as usize, adj)?)
}

/// Index of the left node `(l0, coords)` with `l0` 1-based and `coords`
/// the `r` digits `(l1..lr)`.
pub fn zigzag_left_index(k: u64, r: u32, l0: u32, coords: &[u64]) -> usize {
    assert!((1..=r).contains(&l0) && coords.len() == r as usize);
    let digits = coords.iter().fold(0, |acc, &d| acc * k + d % k);
    ((l0 as u64 - 1) * k.pow(r) + digits) as usize
}

/// Index of the right node `(v0, v1..vr)` given all `r + 1` digits.
pub fn zigzag_right_index(k: u64, r: u32, coords: &[u64]) -> usize {
    assert_eq!(coords.len(), r as usize + 1);
    coords.iter().fold(0, |acc, &d| acc * k + d % k) as usize
}

// ---------------------------------------------------------------------------
// Lazebnik-style algebraic construction
// ---------------------------------------------------------------------------

/// Parameters of the algebraic bipartite graph over GF(q) and GF(q²).
///
/// With q restricted to odd primes, integrality of q^s and q^t forces the
/// exponents to be integers: s = 1 and t in {1, 2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LazebnikParams {
    pub q: u64,
    pub s: u32,
    pub t: u32,
}

/// Graph on `q^{3+t}` left and `q^{3+s}` right nodes with `q^{3+s+t}` edges
/// and girth at least 8.
///
/// Left nodes are triples `(l1, l2, l3)` with `l1` ranging over the first
/// `q^t` elements of GF(q²) in (a, b)-lexicographic order, `l2` over GF(q²)
/// and `l3` over GF(q); right nodes are `(v1, v2, v3)` with `v1` over the
/// first `q^s` elements of GF(q). There is an edge iff
///
/// ```text
/// l2 - v2 = l1·v1    and    l3 - v3 = f(l1)·v2 + l1·f(v2)
/// ```
///
/// where `f` is the Frobenius automorphism of GF(q²). The right-hand side of
/// the second condition is Frobenius-fixed, hence a base-field value.
pub fn lazebnik(params: &LazebnikParams) -> Result<BiGraph, ConstructError> {
    let LazebnikParams { q, s, t } = *params;
    if !gf::is_prime(q) {
        return Err(ConstructError::NotPrime(q));
    }
    if q == 2 {
        return Err(ConstructError::OddPrimeRequired(q));
    }
    if s != 1 {
        return Err(ConstructError::BadExponent {
            name: "s",
            value: s,
            max: 1,
        });
    }
    if !(1..=2).contains(&t) {
        return Err(ConstructError::BadExponent {
            name: "t",
            value: t,
            max: 2,
        });
    }
    let base = Field::new(q, false)?;
    let ext = Field::new(q, true)?;
    let q2 = q * q;
    let size_s = q.pow(s);
    let size_t = q.pow(t);
    let n1 = size_t
        .checked_mul(q2)
        .and_then(|v| v.checked_mul(q))
        .ok_or(ConstructError::TooLarge)?;
    let n2 = size_s * q2 * q;
    if n1 + n2 > MAX_NODES {
        return Err(ConstructError::TooLarge);
    }
    let subset_t: Vec<FieldElement> = ext.elements().take(size_t as usize).collect();
    let subset_s: Vec<FieldElement> = base.elements().take(size_s as usize).collect();

    let mut adj = Vec::with_capacity(n1 as usize);
    for &l1 in &subset_t {
        let fl1 = l1.frobenius().expect("extension element");
        for i2 in 0..q2 {
            let l2 = ext.element_at(i2);
            for i3 in 0..q {
                let l3 = base.elem(i3);
                let row = subset_s
                    .iter()
                    .enumerate()
                    .map(|(j1, &v1)| {
                        let v2 = l2 - l1 * ext.embed(v1);
                        let w = fl1 * v2 + l1 * v2.frobenius().expect("extension element");
                        debug_assert!(w.in_base_field());
                        let v3 = l3 - base.elem(w.base_coord());
                        ((j1 as u64 * q2 + ext.index_of(v2)) * q + v3.base_coord()) as usize
                    })
                    .collect();
                adj.push(row);
            }
        }
    }
    Ok(BiGraph::new(n1 as usize, n2 as usize, adj)?)
}

// ---------------------------------------------------------------------------
// Generalized quadrangle incidence graphs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GqFamily {
    /// Symplectic quadrangle of order (q, q): all points of PG(3, q) with
    /// the totally isotropic lines of an alternating form.
    SymplecticW,
    /// Elliptic quadric quadrangle of order (q, q²) in PG(5, q).
    EllipticQ5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GqParams {
    pub family: GqFamily,
    pub q: u64,
}

impl GqParams {
    /// GQ order (s, t): lines carry s+1 points, points lie on t+1 lines.
    pub fn order(&self) -> (u64, u64) {
        match self.family {
            GqFamily::SymplecticW => (self.q, self.q),
            GqFamily::EllipticQ5 => (self.q, self.q * self.q),
        }
    }

    /// (point count, line count) = ((s+1)(st+1), (t+1)(st+1)).
    pub fn expected_counts(&self) -> (u64, u64) {
        let (s, t) = self.order();
        ((s + 1) * (s * t + 1), (t + 1) * (s * t + 1))
    }
}

/// Incidence graph of a generalized quadrangle: left nodes are lines, right
/// nodes are points, edges are incidences. Girth is exactly 8.
pub fn gq_incidence(params: &GqParams) -> Result<BiGraph, ConstructError> {
    let q = params.q;
    if !gf::is_prime(q) {
        return Err(ConstructError::NotPrime(q));
    }
    match params.family {
        GqFamily::SymplecticW => {
            if q > 5 {
                return Err(ConstructError::UnsupportedQ {
                    family: "gq-w",
                    q,
                    max: 5,
                });
            }
            let field = Field::new(q, false)?;
            let points = projective_points(&field, 4);
            let isotropic = |x: &[FieldElement], y: &[FieldElement]| {
                (x[0] * y[1] - x[1] * y[0] + x[2] * y[3] - x[3] * y[2]).is_zero()
            };
            incidence_from_lines(&field, points, isotropic)
        }
        GqFamily::EllipticQ5 => {
            if q > 3 {
                return Err(ConstructError::UnsupportedQ {
                    family: "gq-q5",
                    q,
                    max: 3,
                });
            }
            let field = Field::new(q, false)?;
            // x0·x1 + x2·x3 + Q0(x4, x5) with Q0 irreducible over GF(q):
            // for odd q, Q0 = x² - n0·y² with n0 the least nonresidue;
            // for q = 2, Q0 = x² + x·y + y².
            let n0 = if q == 2 {
                None
            } else {
                Some(field.elem(gf::least_nonresidue_of(q)))
            };
            let quadric = move |x: &[FieldElement]| {
                let q0 = match n0 {
                    Some(n0) => x[4] * x[4] - n0 * x[5] * x[5],
                    None => x[4] * x[4] + x[4] * x[5] + x[5] * x[5],
                };
                (x[0] * x[1] + x[2] * x[3] + q0).is_zero()
            };
            let points: Vec<_> = projective_points(&field, 6)
                .into_iter()
                .filter(|p| quadric(p))
                .collect();
            // A candidate line lies on the quadric iff every point of the
            // span does; brute-force membership keeps this free of any
            // coordinatized line generator.
            let on_quadric = move |x: &[FieldElement], y: &[FieldElement]| {
                span_points(x, y).iter().all(|p| quadric(p))
            };
            incidence_from_lines(&field, points, on_quadric)
        }
    }
}

/// Canonical representatives of the projective space PG(dim-1, q): first
/// nonzero coordinate normalized to 1, ordered by leading position then
/// lexicographically.
fn projective_points(field: &Field, dim: usize) -> Vec<Vec<FieldElement>> {
    let q = field.order();
    let mut pts = Vec::new();
    for lead in 0..dim {
        let free = (dim - lead - 1) as u32;
        for code in 0..q.pow(free) {
            let mut v = vec![field.zero(); dim];
            v[lead] = field.one();
            let mut c = code;
            for pos in (lead + 1..dim).rev() {
                v[pos] = field.element_at(c % q);
                c /= q;
            }
            pts.push(v);
        }
    }
    pts
}

/// Scale so the first nonzero coordinate becomes 1. None for the zero vector.
fn normalize(v: &[FieldElement]) -> Option<Vec<FieldElement>> {
    let pivot = v.iter().find(|x| !x.is_zero())?;
    let inv = pivot.inv().expect("nonzero element");
    Some(v.iter().map(|&x| x * inv).collect())
}

/// The q+1 projective points of the span of two independent points.
fn span_points(x: &[FieldElement], y: &[FieldElement]) -> Vec<Vec<FieldElement>> {
    let field = x[0].field();
    let mut pts = vec![normalize(y).expect("projective point")];
    for c in field.elements() {
        let combo: Vec<FieldElement> = x.iter().zip(y).map(|(&xi, &yi)| xi + c * yi).collect();
        pts.push(normalize(&combo).expect("independent points"));
    }
    pts
}

/// Build the line set from a pairwise predicate: points i < j span a line of
/// the geometry iff `joinable(p_i, p_j)`. Lines are deduplicated and sorted
/// by their ascending point-index lists.
fn incidence_from_lines(
    _field: &Field,
    points: Vec<Vec<FieldElement>>,
    joinable: impl Fn(&[FieldElement], &[FieldElement]) -> bool,
) -> Result<BiGraph, ConstructError> {
    let index: HashMap<Vec<(u64, u64)>, usize> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (coord_key(p), i))
        .collect();
    let mut lines: BTreeSet<Vec<usize>> = BTreeSet::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if !joinable(&points[i], &points[j]) {
                continue;
            }
            let mut line: Vec<usize> = span_points(&points[i], &points[j])
                .iter()
                .map(|p| {
                    *index
                        .get(&coord_key(p))
                        .expect("span stays in the geometry")
                })
                .collect();
            line.sort_unstable();
            line.dedup();
            lines.insert(line);
        }
    }
    let adj: Vec<Vec<usize>> = lines.into_iter().collect();
    let n1 = adj.len();
    Ok(BiGraph::new(n1, points.len(), adj)?)
}

fn coord_key(p: &[FieldElement]) -> Vec<(u64, u64)> {
    p.iter().map(|x| x.coords()).collect()
}

/// Check the three generalized-quadrangle axioms on an incidence graph with
/// left nodes as lines and right nodes as points, for order (s, t).
pub fn verify_gq_axioms(g: &BiGraph, s: u64, t: u64) -> Result<(), String> {
    let prof = g.degree_profile();
    if prof.left_min as u64 != s + 1 || prof.left_max as u64 != s + 1 {
        return Err(format!(
            "line sizes range over [{}, {}], expected s+1 = {}",
            prof.left_min,
            prof.left_max,
            s + 1
        ));
    }
    if prof.right_min as u64 != t + 1 || prof.right_max as u64 != t + 1 {
        return Err(format!(
            "lines per point range over [{}, {}], expected t+1 = {}",
            prof.right_min,
            prof.right_max,
            t + 1
        ));
    }
    // Two points on at most one common line, and two lines meeting in at
    // most one point, are both exactly 4-cycle freeness.
    if let Some(w) = g.has_four_cycle() {
        return Err(format!("two lines share two points: {w}"));
    }
    // Unique connector: for every non-incident (point, line) pair there is
    // exactly one line through the point meeting the line.
    let mut on_line = vec![false; g.n2()];
    for line in 0..g.n1() {
        for &p in g.left_neighbors(line) {
            on_line[p] = true;
        }
        for point in 0..g.n2() {
            if on_line[point] {
                continue;
            }
            let connectors: usize = g
                .right_neighbors(point)
                .iter()
                .map(|&m| g.left_neighbors(m).iter().filter(|&&y| on_line[y]).count())
                .sum();
            if connectors != 1 {
                return Err(format!(
                    "point {point} and line {line} have {connectors} connectors, expected 1"
                ));
            }
        }
        for &p in g.left_neighbors(line) {
            on_line[p] = false;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Left-copy splitting
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitParams {
    pub b: usize,
}

/// Replace each left node by `b` copies, giving copy `u` of node `i` (new
/// index `u·n1 + i`) the `u`-th contiguous block of `D/b` neighbors from
/// the ascending adjacency list.
///
/// Requires uniform left degree `D` divisible by `b` and a 4- and 6-cycle
/// free input; the output is then 4- and 6-cycle free as well, with left
/// degree `D/b` and unchanged right side.
pub fn split_left(g: &BiGraph, params: &SplitParams) -> Result<BiGraph, ConstructError> {
    let b = params.b;
    let prof = g.degree_profile();
    if prof.left_min != prof.left_max {
        return Err(ConstructError::NonUniformLeftDegree {
            min: prof.left_min,
            max: prof.left_max,
        });
    }
    let degree = prof.left_min;
    if b == 0 || !degree.is_multiple_of(b) {
        return Err(ConstructError::IndivisibleDegree { degree, b });
    }
    if let Some(w) = g.has_four_cycle() {
        return Err(ConstructError::ShortCycle(format!("4-cycle {w}")));
    }
    if let Some(w) = g.has_six_cycle() {
        return Err(ConstructError::ShortCycle(format!("6-cycle {w}")));
    }
    let slice = degree / b;
    let n1 = g.n1();
    let mut adj = Vec::with_capacity(b * n1);
    for u in 0..b {
        for i in 0..n1 {
            adj.push(g.left_neighbors(i)[u * slice..(u + 1) * slice].to_vec());
        }
    }
    Ok(BiGraph::new(b * n1, g.n2(), adj)?)
}

// ---------------------------------------------------------------------------
// Replication baseline
// ---------------------------------------------------------------------------

/// Full k-replication: `k` buckets, each holding all `n` symbols. Serves any
/// k-multiset in one round at rate 1/k; used by the simulator as the
/// comparison baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplicationLayout {
    pub n: usize,
    pub k: usize,
}

pub fn replication(n: usize, k: usize) -> ReplicationLayout {
    assert!(n >= 1 && k >= 1, "replication needs n, k >= 1");
    ReplicationLayout { n, k }
}

impl ReplicationLayout {
    pub fn buckets(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> Ratio<u64> {
        Ratio::new(1, self.k as u64)
    }

    pub fn total_symbols(&self) -> usize {
        self.n * self.k
    }

    /// Rounds to serve a batch: one request per replica per round.
    pub fn rounds_for_batch(&self, batch: usize) -> usize {
        batch.div_ceil(self.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zigzag_2_2_shape() {
        let g = zigzag(&ZigZagParams { k: 2, r: 2 }).unwrap();
        assert_eq!((g.n1(), g.n2()), (8, 8));
        assert_eq!(g.edge_count(), 16);
        assert!(g.girth_at_least_8());
        assert_eq!(g.has_four_cycle(), None);
        assert_eq!(g.has_six_cycle(), None);
    }

    #[test]
    fn zigzag_neighbor_example() {
        // l = (l0 = 1, (0, 0)) with k = 2, r = 2 is adjacent to exactly
        // (0,0,0) and (1,1,0).
        let g = zigzag(&ZigZagParams { k: 2, r: 2 }).unwrap();
        let left = zigzag_left_index(2, 2, 1, &[0, 0]);
        let expect = [
            zigzag_right_index(2, 2, &[0, 0, 0]),
            zigzag_right_index(2, 2, &[1, 1, 0]),
        ];
        assert_eq!(g.left_neighbors(left), &expect[..]);
    }

    #[test]
    fn zigzag_rejects_composite_k() {
        assert_eq!(
            zigzag(&ZigZagParams { k: 4, r: 2 }).unwrap_err(),
            ConstructError::NotPrime(4)
        );
    }

    #[test]
    fn zigzag_degrees_uniform() {
        let g = zigzag(&ZigZagParams { k: 3, r: 4 }).unwrap();
        let d = g.degree_profile();
        assert_eq!((d.left_min, d.left_max), (3, 3));
        assert_eq!((d.right_min, d.right_max), (4, 4));
        assert_eq!(g.edge_count(), 4 * 3usize.pow(5));
    }

    #[test]
    fn lazebnik_3_1_1_shape() {
        let g = lazebnik(&LazebnikParams { q: 3, s: 1, t: 1 }).unwrap();
        assert_eq!((g.n1(), g.n2()), (81, 81));
        assert_eq!(g.edge_count(), 243);
        let d = g.degree_profile();
        assert_eq!((d.left_min, d.left_max), (3, 3));
        assert_eq!((d.right_min, d.right_max), (3, 3));
        assert_eq!(g.has_four_cycle(), None);
        assert_eq!(g.has_six_cycle(), None);
    }

    #[test]
    fn lazebnik_3_1_2_shape_and_rate() {
        let g = lazebnik(&LazebnikParams { q: 3, s: 1, t: 2 }).unwrap();
        assert_eq!((g.n1(), g.n2()), (243, 81));
        assert_eq!(g.edge_count(), 3usize.pow(6));
        let d = g.degree_profile();
        assert_eq!((d.left_min, d.left_max), (3, 3));
        assert_eq!((d.right_min, d.right_max), (9, 9));
        assert_eq!(
            Ratio::new(g.n1() as u64, (g.n1() + g.n2()) as u64),
            Ratio::new(3, 4)
        );
    }

    #[test]
    fn lazebnik_edge_conditions_hold() {
        // Re-derive both defining conditions for every enumerated edge.
        let q = 3u64;
        let g = lazebnik(&LazebnikParams { q, s: 1, t: 1 }).unwrap();
        let base = Field::new(q, false).unwrap();
        let ext = Field::new(q, true).unwrap();
        let q2 = q * q;
        let subset_t: Vec<_> = ext.elements().take(q as usize).collect();
        for left in 0..g.n1() {
            let l1 = subset_t[left / (q2 * q) as usize];
            let l2 = ext.element_at((left as u64 / q) % q2);
            let l3 = base.elem(left as u64 % q);
            for &right in g.left_neighbors(left) {
                let v1 = base.elem(right as u64 / (q2 * q));
                let v2 = ext.element_at((right as u64 / q) % q2);
                let v3 = base.elem(right as u64 % q);
                assert_eq!(l2 - v2, l1 * ext.embed(v1));
                let w = l1.frobenius().unwrap() * v2 + l1 * v2.frobenius().unwrap();
                assert!(w.in_base_field());
                assert_eq!(l3 - v3, base.elem(w.base_coord()));
            }
        }
    }

    #[test]
    fn lazebnik_rejects_bad_params() {
        assert_eq!(
            lazebnik(&LazebnikParams { q: 2, s: 1, t: 1 }).unwrap_err(),
            ConstructError::OddPrimeRequired(2)
        );
        assert_eq!(
            lazebnik(&LazebnikParams { q: 9, s: 1, t: 1 }).unwrap_err(),
            ConstructError::NotPrime(9)
        );
        assert!(matches!(
            lazebnik(&LazebnikParams { q: 3, s: 1, t: 3 }).unwrap_err(),
            ConstructError::BadExponent { name: "t", .. }
        ));
    }

    #[test]
    fn symplectic_w3_counts_and_girth() {
        let params = GqParams {
            family: GqFamily::SymplecticW,
            q: 3,
        };
        let g = gq_incidence(&params).unwrap();
        assert_eq!((g.n1(), g.n2()), (40, 40));
        let d = g.degree_profile();
        assert_eq!((d.left_min, d.left_max), (4, 4));
        assert_eq!((d.right_min, d.right_max), (4, 4));
        assert_eq!(g.girth(), Some(8));
        verify_gq_axioms(&g, 3, 3).unwrap();
    }

    #[test]
    fn symplectic_w2_counts() {
        let params = GqParams {
            family: GqFamily::SymplecticW,
            q: 2,
        };
        let g = gq_incidence(&params).unwrap();
        assert_eq!((g.n1(), g.n2()), (15, 15));
        assert_eq!(g.girth(), Some(8));
        verify_gq_axioms(&g, 2, 2).unwrap();
    }

    #[test]
    fn elliptic_q5_2_counts_and_axioms() {
        let params = GqParams {
            family: GqFamily::EllipticQ5,
            q: 2,
        };
        let g = gq_incidence(&params).unwrap();
        assert_eq!((g.n1(), g.n2()), (45, 27));
        let d = g.degree_profile();
        assert_eq!((d.left_min, d.left_max), (3, 3));
        assert_eq!((d.right_min, d.right_max), (5, 5));
        assert_eq!(g.girth(), Some(8));
        verify_gq_axioms(&g, 2, 4).unwrap();
        let (points, lines) = params.expected_counts();
        assert_eq!((g.n2() as u64, g.n1() as u64), (points, lines));
    }

    #[test]
    fn gq_resource_guard() {
        assert!(matches!(
            gq_incidence(&GqParams {
                family: GqFamily::SymplecticW,
                q: 7
            })
            .unwrap_err(),
            ConstructError::UnsupportedQ { .. }
        ));
        assert!(matches!(
            gq_incidence(&GqParams {
                family: GqFamily::EllipticQ5,
                q: 5
            })
            .unwrap_err(),
            ConstructError::UnsupportedQ { .. }
        ));
    }

    #[test]
    fn split_w3_by_two() {
        let base = gq_incidence(&GqParams {
            family: GqFamily::SymplecticW,
            q: 3,
        })
        .unwrap();
        let g = split_left(&base, &SplitParams { b: 2 }).unwrap();
        assert_eq!((g.n1(), g.n2()), (80, 40));
        let d = g.degree_profile();
        assert_eq!((d.left_min, d.left_max), (2, 2));
        assert_eq!(g.edge_count(), base.edge_count());
        assert_eq!(g.has_four_cycle(), None);
        assert_eq!(g.has_six_cycle(), None);
        assert_eq!(
            Ratio::new(g.n1() as u64, (g.n1() + g.n2()) as u64),
            Ratio::new(2, 3)
        );
    }

    #[test]
    fn split_by_one_is_identity() {
        let base = zigzag(&ZigZagParams { k: 2, r: 2 }).unwrap();
        let g = split_left(&base, &SplitParams { b: 1 }).unwrap();
        assert_eq!(g, base);
    }

    #[test]
    fn split_rejects_short_cycles_and_bad_b() {
        let k22 = BiGraph::new(2, 2, vec![vec![0, 1], vec![0, 1]]).unwrap();
        assert!(matches!(
            split_left(&k22, &SplitParams { b: 2 }).unwrap_err(),
            ConstructError::ShortCycle(_)
        ));
        let base = zigzag(&ZigZagParams { k: 3, r: 2 }).unwrap();
        assert!(matches!(
            split_left(&base, &SplitParams { b: 2 }).unwrap_err(),
            ConstructError::IndivisibleDegree { degree: 3, b: 2 }
        ));
    }

    #[test]
    fn replication_layout() {
        let r = replication(10, 3);
        assert_eq!(r.buckets(), 3);
        assert_eq!(r.rate(), Ratio::new(1, 3));
        assert_eq!(r.rounds_for_batch(3), 1);
        assert_eq!(r.rounds_for_batch(1), 1);
        let single = replication(1, 1);
        assert_eq!(single.buckets(), 1);
        assert_eq!(single.rate(), Ratio::new(1, 1));
    }

    #[test]
    fn all_generated_graphs_pass_girth_check() {
        let graphs: Vec<BiGraph> = vec![
            zigzag(&ZigZagParams { k: 2, r: 2 }).unwrap(),
            zigzag(&ZigZagParams { k: 3, r: 2 }).unwrap(),
            lazebnik(&LazebnikParams { q: 3, s: 1, t: 1 }).unwrap(),
            gq_incidence(&GqParams {
                family: GqFamily::SymplecticW,
                q: 2,
            })
            .unwrap(),
        ];
        for g in &graphs {
            assert!(g.girth_at_least_8());
            assert!(g.has_four_cycle().is_none());
            assert!(g.has_six_cycle().is_none());
        }
    }
}
