//! Multiset batch codes built from dense bipartite graphs without 4- or
//! 6-cycles.
//!
//! A systematic linear code is viewed as a bipartite graph: left nodes are
//! message symbols, right nodes are parity symbols, and an edge means the
//! message symbol participates in the parity. When that graph has girth at
//! least 8 and minimum left degree `k`, any multiset of `k` read requests can
//! be served from pairwise disjoint sets of buckets, one symbol read per
//! bucket per batch. This crate provides:
//!
//! - [`gf`]: prime fields GF(p) and quadratic extensions GF(p²),
//! - [`bigraph`]: the bipartite graph model with exact 4-cycle, 6-cycle and
//!   girth verifiers,
//! - [`constructions`]: explicit girth-≥8 graph families (zig-zag, Lazebnik,
//!   generalized-quadrangle incidence, left-copy splitting) plus a
//!   replication baseline,
//! - [`code`]: graph-backed systematic codes, encoding and repair groups,
//! - [`scheduler`]: the deterministic greedy request assignment and an
//!   independent backtracking feasibility oracle,
//! - [`storage`]: the stacked bucket layout that scales message length while
//!   keeping the bucket count fixed,
//! - [`fault`]: systematic Reed–Solomon parities, code composition, erasure
//!   recovery and exact minimum distance,
//! - [`sim`]: a deterministic workload simulator and parameter trade-off
//!   table.

pub mod bigraph;
pub mod code;
pub mod constructions;
pub mod fault;
pub mod gf;
pub mod scheduler;
pub mod sim;
pub mod storage;

pub use bigraph::BiGraph;
pub use code::{RepairGroup, SystematicCode};
pub use gf::{Field, FieldElement};
pub use scheduler::{Assignment, RequestPattern};
pub use storage::BucketStore;
