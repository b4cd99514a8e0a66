//! Systematic linear codes backed by a bipartite graph.
//!
//! The generator has the shape `[I | E]` where `E` is supported on the
//! graph's incidence: parity `j` is the plain sum of the message symbols
//! adjacent to right node `j` (all-ones coefficients). Message symbol `i`
//! occupies bucket `i`, parity `j` occupies bucket `n + j`.

use crate::bigraph::{BiGraph, GraphError};
use crate::gf::{Field, FieldElement, GfError};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("message has {got} symbols, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("symbol belongs to a different field")]
    FieldMismatch,
    #[error("message index {index} out of range [0, {n})")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("reads do not cover exactly the group's buckets (bucket {bucket})")]
    ReadMismatch { bucket: usize },
    #[error("only prime-field codes serialize; extension fields unsupported")]
    ExtensionFieldJson,
    #[error("invalid code JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Gf(#[from] GfError),
}

/// One repair group of a message symbol: a parity containing it plus the
/// other message symbols in that parity. Reading all of them reconstructs
/// the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairGroup {
    /// Message index being repaired.
    pub target: usize,
    /// Global bucket index of the parity, in [n, N).
    pub parity: usize,
    /// Message indices of the other participants, ascending.
    pub members: Vec<usize>,
}

impl RepairGroup {
    /// All buckets the group reads: members plus the parity, ascending.
    pub fn buckets(&self) -> Vec<usize> {
        let mut b = self.members.clone();
        b.push(self.parity);
        b
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodeJson {
    n1: usize,
    n2: usize,
    adj: Vec<Vec<usize>>,
    field_p: u64,
    convention: String,
}

/// An [n, N] systematic code: n = left nodes, N = n + right nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystematicCode {
    graph: BiGraph,
    field: Field,
}

impl SystematicCode {
    pub fn from_graph(graph: BiGraph, field: Field) -> SystematicCode {
        SystematicCode { graph, field }
    }

    pub fn graph(&self) -> &BiGraph {
        &self.graph
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Message length n.
    pub fn message_len(&self) -> usize {
        self.graph.n1()
    }

    /// Codeword length N = n1 + n2.
    pub fn total_len(&self) -> usize {
        self.graph.n1() + self.graph.n2()
    }

    pub fn rate(&self) -> Ratio<u64> {
        Ratio::new(self.message_len() as u64, self.total_len() as u64)
    }

    /// Largest batch the code supports once verified: the minimum left
    /// degree of its graph.
    pub fn supported_k(&self) -> usize {
        self.graph.min_left_degree()
    }

    /// Systematic encoding: message first, then one all-ones parity per
    /// right node.
    pub fn encode(&self, message: &[FieldElement]) -> Result<Vec<FieldElement>, CodeError> {
        if message.len() != self.message_len() {
            return Err(CodeError::LengthMismatch {
                expected: self.message_len(),
                got: message.len(),
            });
        }
        if message.iter().any(|x| x.field() != self.field) {
            return Err(CodeError::FieldMismatch);
        }
        let mut cw = Vec::with_capacity(self.total_len());
        cw.extend_from_slice(message);
        for j in 0..self.graph.n2() {
            let sum = self
                .graph
                .right_neighbors(j)
                .iter()
                .fold(self.field.zero(), |acc, &i| acc + message[i]);
            cw.push(sum);
        }
        Ok(cw)
    }

    /// Repair groups of message symbol `i`, one per parity neighbor,
    /// ordered by ascending parity index. Materialized per query.
    pub fn repair_groups(&self, i: usize) -> Result<Vec<RepairGroup>, CodeError> {
        let n = self.message_len();
        if i >= n {
            return Err(CodeError::IndexOutOfRange { index: i, n });
        }
        Ok(self
            .graph
            .left_neighbors(i)
            .iter()
            .map(|&j| RepairGroup {
                target: i,
                parity: n + j,
                members: self
                    .graph
                    .right_neighbors(j)
                    .iter()
                    .copied()
                    .filter(|&m| m != i)
                    .collect(),
            })
            .collect())
    }

    /// Recover the group's target from reads covering exactly its buckets:
    /// the parity value minus the member contributions.
    pub fn reconstruct(
        &self,
        group: &RepairGroup,
        reads: &[(usize, FieldElement)],
    ) -> Result<FieldElement, CodeError> {
        let buckets = group.buckets();
        if reads.len() != buckets.len() {
            return Err(CodeError::ReadMismatch {
                bucket: reads.len(),
            });
        }
        let mut parity_value = None;
        let mut sum = self.field.zero();
        for &(bucket, value) in reads {
            if value.field() != self.field {
                return Err(CodeError::FieldMismatch);
            }
            if bucket == group.parity {
                parity_value = Some(value);
            } else if group.members.binary_search(&bucket).is_ok() {
                sum = sum + value;
            } else {
                return Err(CodeError::ReadMismatch { bucket });
            }
        }
        match parity_value {
            Some(p) => Ok(p - sum),
            None => Err(CodeError::ReadMismatch {
                bucket: group.parity,
            }),
        }
    }

    /// Convenience: reconstruct against a full codeword.
    pub fn reconstruct_from_codeword(
        &self,
        group: &RepairGroup,
        codeword: &[FieldElement],
    ) -> Result<FieldElement, CodeError> {
        if codeword.len() != self.total_len() {
            return Err(CodeError::LengthMismatch {
                expected: self.total_len(),
                got: codeword.len(),
            });
        }
        let reads: Vec<(usize, FieldElement)> =
            group.buckets().iter().map(|&b| (b, codeword[b])).collect();
        self.reconstruct(group, &reads)
    }

    /// Code JSON: the graph schema plus `field_p` and the coefficient
    /// convention. Prime fields only.
    pub fn to_json(&self) -> Result<String, CodeError> {
        if self.field.is_extension() {
            return Err(CodeError::ExtensionFieldJson);
        }
        let graph: serde_json::Value =
            serde_json::from_str(&self.graph.to_json()).expect("graph json is valid");
        let obj = CodeJson {
            n1: graph["n1"].as_u64().unwrap() as usize,
            n2: graph["n2"].as_u64().unwrap() as usize,
            adj: serde_json::from_value(graph["adj"].clone()).unwrap(),
            field_p: self.field.characteristic(),
            convention: "all-ones".to_string(),
        };
        Ok(serde_json::to_string(&obj).expect("code serialization cannot fail"))
    }

    pub fn from_json(text: &str) -> Result<SystematicCode, CodeError> {
        let raw: CodeJson =
            serde_json::from_str(text).map_err(|e| CodeError::Json(e.to_string()))?;
        if raw.convention != "all-ones" {
            return Err(CodeError::Json(format!(
                "unsupported convention {:?}",
                raw.convention
            )));
        }
        let graph = BiGraph::new(raw.n1, raw.n2, raw.adj)?;
        let field = Field::new(raw.field_p, false)?;
        Ok(SystematicCode { graph, field })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The [3, 8] example: parities x1+x2, x1, x2+x3, x1+x3, x1+x2+x3.
    pub(crate) fn example_code() -> SystematicCode {
        let graph =
            BiGraph::new(3, 5, vec![vec![0, 1, 3, 4], vec![0, 2, 4], vec![2, 3, 4]]).unwrap();
        SystematicCode::from_graph(graph, Field::new(2, false).unwrap())
    }

    fn gf2_vec(code: &SystematicCode, bits: &[u64]) -> Vec<FieldElement> {
        bits.iter().map(|&b| code.field().elem(b)).collect()
    }

    #[test]
    fn example_code_shape() {
        let c = example_code();
        assert_eq!(c.message_len(), 3);
        assert_eq!(c.total_len(), 8);
        assert_eq!(c.rate(), Ratio::new(3, 8));
    }

    #[test]
    fn encode_matches_hand_evaluation() {
        let c = example_code();
        let cw = c.encode(&gf2_vec(&c, &[1, 0, 1])).unwrap();
        let expect = gf2_vec(&c, &[1, 0, 1, 1, 1, 1, 0, 0]);
        assert_eq!(cw, expect);
    }

    #[test]
    fn encode_zero_and_unit_vectors() {
        let c = example_code();
        let zero = c.encode(&gf2_vec(&c, &[0, 0, 0])).unwrap();
        assert!(zero.iter().all(|x| x.is_zero()));
        // e1 lights up exactly x1's incidences: parities c4, c5, c7, c8.
        let e1 = c.encode(&gf2_vec(&c, &[1, 0, 0])).unwrap();
        assert_eq!(e1, gf2_vec(&c, &[1, 0, 0, 1, 1, 0, 1, 1]));
    }

    #[test]
    fn encode_validates_input() {
        let c = example_code();
        assert!(matches!(
            c.encode(&gf2_vec(&c, &[1, 0])).unwrap_err(),
            CodeError::LengthMismatch {
                expected: 3,
                got: 2
            }
        ));
        let other = Field::new(3, false).unwrap();
        let wrong = vec![other.elem(1), other.elem(0), other.elem(1)];
        assert!(matches!(
            c.encode(&wrong).unwrap_err(),
            CodeError::FieldMismatch
        ));
    }

    #[test]
    fn repair_groups_of_x1() {
        // x1 participates in c4, c5, c7, c8 giving groups
        // {x2, c4}, {c5}, {x3, c7}, {x2, x3, c8} (0-based buckets 3, 4, 6, 7).
        let c = example_code();
        let groups = c.repair_groups(0).unwrap();
        let as_tuples: Vec<(usize, Vec<usize>)> = groups
            .iter()
            .map(|g| (g.parity, g.members.clone()))
            .collect();
        assert_eq!(
            as_tuples,
            vec![(3, vec![1]), (4, vec![]), (6, vec![2]), (7, vec![1, 2])]
        );
        for g in &groups {
            assert_eq!(g.target, 0);
            assert!(!g.members.contains(&0));
        }
    }

    #[test]
    fn repair_groups_degree_zero_and_range() {
        let graph = BiGraph::new(2, 1, vec![vec![], vec![0]]).unwrap();
        let c = SystematicCode::from_graph(graph, Field::new(2, false).unwrap());
        assert!(c.repair_groups(0).unwrap().is_empty());
        assert!(matches!(
            c.repair_groups(2).unwrap_err(),
            CodeError::IndexOutOfRange { index: 2, n: 2 }
        ));
    }

    #[test]
    fn reconstruct_examples() {
        let c = example_code();
        let x = gf2_vec(&c, &[1, 0, 1]);
        let cw = c.encode(&x).unwrap();
        let groups = c.repair_groups(0).unwrap();
        // {x2, x3, c8}: c8 = 0, members sum 0 + 1, so x1 = 0 - 1 = 1 in GF(2).
        let g8 = groups.iter().find(|g| g.parity == 7).unwrap();
        assert_eq!(c.reconstruct_from_codeword(g8, &cw).unwrap(), x[0]);
        // Singleton group {c5} returns the parity directly.
        let g5 = groups.iter().find(|g| g.parity == 4).unwrap();
        assert_eq!(c.reconstruct_from_codeword(g5, &cw).unwrap(), x[0]);
        // Zero codeword reconstructs zero.
        let zero_cw = c.encode(&gf2_vec(&c, &[0, 0, 0])).unwrap();
        assert!(c.reconstruct_from_codeword(g8, &zero_cw).unwrap().is_zero());
    }

    #[test]
    fn reconstruct_rejects_wrong_reads() {
        let c = example_code();
        let x = gf2_vec(&c, &[1, 0, 1]);
        let cw = c.encode(&x).unwrap();
        let g = c.repair_groups(0).unwrap()[0].clone();
        // Missing parity read.
        let reads: Vec<_> = g.members.iter().map(|&b| (b, cw[b])).collect();
        assert!(c.reconstruct(&g, &reads).is_err());
        // Extra unrelated bucket.
        let mut reads: Vec<_> = g.buckets().iter().map(|&b| (b, cw[b])).collect();
        reads[0] = (5, cw[5]);
        assert!(c.reconstruct(&g, &reads).is_err());
    }

    #[test]
    fn every_repair_group_reconstructs_exhaustively() {
        // All 2^n messages for the example code and the zig-zag(2,2) code.
        let codes = vec![
            example_code(),
            SystematicCode::from_graph(
                crate::constructions::zigzag(&crate::constructions::ZigZagParams { k: 2, r: 2 })
                    .unwrap(),
                Field::new(2, false).unwrap(),
            ),
        ];
        for c in codes {
            let n = c.message_len();
            for mask in 0u32..(1 << n) {
                let msg: Vec<FieldElement> = (0..n)
                    .map(|i| c.field().elem(((mask >> i) & 1) as u64))
                    .collect();
                let cw = c.encode(&msg).unwrap();
                for (i, &want) in msg.iter().enumerate() {
                    for g in c.repair_groups(i).unwrap() {
                        assert_eq!(c.reconstruct_from_codeword(&g, &cw).unwrap(), want);
                    }
                }
            }
        }
    }

    #[test]
    fn zigzag_code_groups_disjoint() {
        let g = crate::constructions::zigzag(&crate::constructions::ZigZagParams { k: 2, r: 2 })
            .unwrap();
        let c = SystematicCode::from_graph(g, Field::new(2, false).unwrap());
        assert_eq!(c.supported_k(), 2);
        for i in 0..c.message_len() {
            let groups = c.repair_groups(i).unwrap();
            assert_eq!(groups.len(), 2);
            let b0: std::collections::BTreeSet<_> = groups[0].buckets().into_iter().collect();
            let b1: std::collections::BTreeSet<_> = groups[1].buckets().into_iter().collect();
            assert!(b0.is_disjoint(&b1));
        }
    }

    #[test]
    fn empty_right_side_is_identity_code() {
        let graph = BiGraph::new(3, 0, vec![vec![], vec![], vec![]]).unwrap();
        let c = SystematicCode::from_graph(graph, Field::new(2, false).unwrap());
        assert_eq!(c.total_len(), 3);
        assert_eq!(c.rate(), Ratio::new(1, 1));
        let msg = gf2_vec(&c, &[1, 1, 0]);
        assert_eq!(c.encode(&msg).unwrap(), msg);
    }

    #[test]
    fn code_json_round_trip() {
        let c = example_code();
        let text = c.to_json().unwrap();
        assert_eq!(
            text,
            r#"{"n1":3,"n2":5,"adj":[[0,1,3,4],[0,2,4],[2,3,4]],"field_p":2,"convention":"all-ones"}"#
        );
        assert_eq!(SystematicCode::from_json(&text).unwrap(), c);
        assert!(SystematicCode::from_json(
            r#"{"n1":1,"n2":0,"adj":[[]],"field_p":2,"convention":"other"}"#
        )
        .is_err());
        let ext = SystematicCode::from_graph(c.graph().clone(), Field::new(3, true).unwrap());
        assert!(matches!(
            ext.to_json().unwrap_err(),
            CodeError::ExtensionFieldJson
        ));
    }
}
