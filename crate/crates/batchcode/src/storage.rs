//! Stacked bucket storage: g codewords of a base code laid out
//! coordinate-wise across m = N buckets.
//!
//! A message of length g·n is split into g sub-vectors, each encoded by the
//! base code; bucket j holds the j-th coordinate of every codeword. A batch
//! of requests against the long message folds onto a base-code pattern, one
//! scheduling pass serves it, and each plan reads the row of its own
//! request, so the bucket count and the supported batch size never depend
//! on g.

use crate::code::{CodeError, SystematicCode};
use crate::gf::FieldElement;
use crate::scheduler::{schedule, RequestPattern, ScheduleError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StorageError {
    #[error("stacking factor g must be at least 1")]
    ZeroStacking,
    #[error("message has {got} symbols, expected g*n = {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("request index {index} out of range [0, {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("batch of {got} requests exceeds the supported k = {supported}")]
    BatchTooLarge { got: usize, supported: usize },
    #[error("invalid store JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// One bucket read: which bucket and which of its g rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketRead {
    pub bucket: usize,
    pub row: usize,
}

/// Values answering a batch plus the proof that every bucket was read at
/// most once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServeOutcome {
    /// One value per request, in request order.
    pub values: Vec<FieldElement>,
    /// Every bucket access performed, in plan order.
    pub reads: Vec<BucketRead>,
}

impl ServeOutcome {
    pub fn max_reads_per_bucket(&self) -> usize {
        let mut counts = std::collections::BTreeMap::new();
        for r in &self.reads {
            *counts.entry(r.bucket).or_insert(0usize) += 1;
        }
        counts.values().copied().max().unwrap_or(0)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoreJson {
    code: serde_json::Value,
    g: usize,
    buckets: Vec<Vec<u64>>,
}

/// Gadget-expanded storage: m = N buckets of g symbols each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketStore {
    code: SystematicCode,
    g: usize,
    /// buckets[j][i] = coordinate j of the codeword of sub-vector i.
    buckets: Vec<Vec<FieldElement>>,
}

/// Encode a length g·n message into the stacked layout.
pub fn store(
    code: SystematicCode,
    g: usize,
    message: &[FieldElement],
) -> Result<BucketStore, StorageError> {
    if g == 0 {
        return Err(StorageError::ZeroStacking);
    }
    let n = code.message_len();
    if message.len() != g * n {
        return Err(StorageError::LengthMismatch {
            expected: g * n,
            got: message.len(),
        });
    }
    let mut buckets = vec![Vec::with_capacity(g); code.total_len()];
    for row in 0..g {
        let cw = code.encode(&message[row * n..(row + 1) * n])?;
        for (j, &symbol) in cw.iter().enumerate() {
            buckets[j].push(symbol);
        }
    }
    Ok(BucketStore { code, g, buckets })
}

impl BucketStore {
    pub fn code(&self) -> &SystematicCode {
        &self.code
    }

    pub fn stacking(&self) -> usize {
        self.g
    }

    /// Bucket count m = N, independent of g.
    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    /// Message symbols stored: g·n.
    pub fn message_len(&self) -> usize {
        self.g * self.code.message_len()
    }

    /// Total stored symbols: g·N.
    pub fn total_symbols(&self) -> usize {
        self.g * self.code.total_len()
    }

    pub fn bucket(&self, j: usize) -> &[FieldElement] {
        &self.buckets[j]
    }

    /// Serve a multiset of flat message indices in [0, g·n). Folds the batch
    /// onto the base code (index = row·n + column), schedules once, and
    /// executes each plan on the row of its request.
    pub fn serve(&self, requests: &[usize]) -> Result<ServeOutcome, StorageError> {
        let n = self.code.message_len();
        let limit = self.message_len();
        for &idx in requests {
            if idx >= limit {
                return Err(StorageError::IndexOutOfRange { index: idx, limit });
            }
        }
        let supported = self.code.supported_k();
        if requests.len() > supported {
            return Err(StorageError::BatchTooLarge {
                got: requests.len(),
                supported,
            });
        }
        let columns: Vec<usize> = requests.iter().map(|&idx| idx % n).collect();
        let pattern = RequestPattern::from_multiset(&columns);
        let assignment = schedule(&self.code, &pattern)?;

        // Hand each request (in input order) the next unused plan for its
        // column; plans for one column are already in deterministic order.
        let mut next_plan: std::collections::BTreeMap<usize, Vec<usize>> =
            std::collections::BTreeMap::new();
        for (pos, plan) in assignment.plans.iter().enumerate() {
            next_plan.entry(plan.target).or_default().push(pos);
        }
        let mut cursor: std::collections::BTreeMap<usize, usize> =
            next_plan.keys().map(|&t| (t, 0)).collect();

        let mut values = Vec::with_capacity(requests.len());
        let mut reads = Vec::new();
        for (&idx, &col) in requests.iter().zip(&columns) {
            let row = idx / n;
            let plan_ids = &next_plan[&col];
            let take = cursor.get_mut(&col).expect("column seen above");
            let plan = &assignment.plans[plan_ids[*take]];
            *take += 1;
            let mut picked: Vec<(usize, FieldElement)> = Vec::with_capacity(plan.buckets.len());
            for &b in &plan.buckets {
                reads.push(BucketRead { bucket: b, row });
                picked.push((b, self.buckets[b][row]));
            }
            let value = match &plan.recipe {
                crate::scheduler::Recipe::Direct => picked[0].1,
                crate::scheduler::Recipe::Repair { parity, members } => {
                    let group = crate::code::RepairGroup {
                        target: plan.target,
                        parity: *parity,
                        members: members.clone(),
                    };
                    self.code.reconstruct(&group, &picked)?
                }
            };
            values.push(value);
        }
        debug_assert!(
            ServeOutcome {
                values: values.clone(),
                reads: reads.clone()
            }
            .max_reads_per_bucket()
                <= 1
        );
        Ok(ServeOutcome { values, reads })
    }

    /// Store JSON: `{"code": <code json>, "g": .., "buckets": [[ints]]}`.
    pub fn to_json(&self) -> Result<String, StorageError> {
        let code: serde_json::Value =
            serde_json::from_str(&self.code.to_json()?).expect("code json is valid");
        let buckets = self
            .buckets
            .iter()
            .map(|col| col.iter().map(|x| x.base_coord()).collect())
            .collect();
        Ok(serde_json::to_string(&StoreJson {
            code,
            g: self.g,
            buckets,
        })
        .expect("store serialization cannot fail"))
    }

    pub fn from_json(text: &str) -> Result<BucketStore, StorageError> {
        let raw: StoreJson =
            serde_json::from_str(text).map_err(|e| StorageError::Json(e.to_string()))?;
        let code = SystematicCode::from_json(&raw.code.to_string())?;
        if raw.g == 0 {
            return Err(StorageError::ZeroStacking);
        }
        if raw.buckets.len() != code.total_len() || raw.buckets.iter().any(|b| b.len() != raw.g) {
            return Err(StorageError::Json(
                "bucket layout does not match code dimensions".to_string(),
            ));
        }
        let field = code.field();
        let buckets = raw
            .buckets
            .iter()
            .map(|col| col.iter().map(|&v| field.elem(v)).collect())
            .collect();
        Ok(BucketStore {
            code,
            g: raw.g,
            buckets,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{zigzag, ZigZagParams};
    use crate::gf::Field;

    fn zigzag_code() -> SystematicCode {
        SystematicCode::from_graph(
            zigzag(&ZigZagParams { k: 2, r: 2 }).unwrap(),
            Field::new(2, false).unwrap(),
        )
    }

    fn bits(code: &SystematicCode, raw: &[u64]) -> Vec<FieldElement> {
        raw.iter().map(|&b| code.field().elem(b)).collect()
    }

    #[test]
    fn g_one_reduces_to_plain_encode() {
        let code = zigzag_code();
        let msg = bits(&code, &[1, 0, 1, 1, 0, 0, 1, 0]);
        let cw = code.encode(&msg).unwrap();
        let st = store(code, 1, &msg).unwrap();
        assert_eq!(st.bucket_count(), 16);
        for (j, &symbol) in cw.iter().enumerate() {
            assert_eq!(st.bucket(j), &[symbol]);
        }
    }

    #[test]
    fn stacked_layout_by_coordinate() {
        let code = zigzag_code();
        let n = code.message_len();
        let g = 3;
        let msg: Vec<_> = (0..g * n)
            .map(|i| code.field().elem((i % 2) as u64))
            .collect();
        let st = store(code.clone(), g, &msg).unwrap();
        assert_eq!(st.bucket_count(), 16);
        assert_eq!(st.total_symbols(), g * code.total_len());
        // Bucket 0 carries the first message symbol of each sub-vector.
        let expect: Vec<_> = (0..g).map(|row| msg[row * n]).collect();
        assert_eq!(st.bucket(0), &expect[..]);
    }

    #[test]
    fn store_validates_input() {
        let code = zigzag_code();
        let msg = bits(&code, &[1, 0, 1]);
        assert!(matches!(
            store(code.clone(), 1, &msg).unwrap_err(),
            StorageError::LengthMismatch {
                expected: 8,
                got: 3
            }
        ));
        assert!(matches!(
            store(code, 0, &[]).unwrap_err(),
            StorageError::ZeroStacking
        ));
    }

    #[test]
    fn same_symbol_twice_reads_different_recipes() {
        let code = zigzag_code();
        let n = code.message_len();
        let g = 2;
        let msg: Vec<_> = (0..g * n)
            .map(|i| code.field().elem(((i * 7) % 2) as u64))
            .collect();
        let st = store(code, g, &msg).unwrap();
        // Rows 0 and 1 of base column 0.
        let outcome = st.serve(&[0, n]).unwrap();
        assert_eq!(outcome.values, vec![msg[0], msg[n]]);
        assert!(outcome.max_reads_per_bucket() <= 1);
    }

    #[test]
    fn distinct_requests_return_message_entries() {
        let code = zigzag_code();
        let msg = bits(&code, &[1, 1, 0, 1, 0, 0, 1, 0]);
        let st = store(code, 1, &msg).unwrap();
        let outcome = st.serve(&[2, 5]).unwrap();
        assert_eq!(outcome.values, vec![msg[2], msg[5]]);
        assert!(outcome.max_reads_per_bucket() <= 1);
    }

    #[test]
    fn single_request_touches_one_bucket() {
        let code = zigzag_code();
        let msg = bits(&code, &[0, 1, 0, 1, 0, 1, 0, 1]);
        let st = store(code, 1, &msg).unwrap();
        let outcome = st.serve(&[3]).unwrap();
        assert_eq!(outcome.reads.len(), 1);
        assert_eq!(outcome.reads[0].bucket, 3);
        assert_eq!(outcome.values, vec![msg[3]]);
    }

    #[test]
    fn batch_larger_than_k_rejected() {
        let code = zigzag_code();
        let msg = bits(&code, &[0; 8]);
        let st = store(code, 1, &msg).unwrap();
        assert!(matches!(
            st.serve(&[0, 1, 2]).unwrap_err(),
            StorageError::BatchTooLarge {
                got: 3,
                supported: 2
            }
        ));
        assert!(matches!(
            st.serve(&[99]).unwrap_err(),
            StorageError::IndexOutOfRange { index: 99, .. }
        ));
    }

    #[test]
    fn store_json_round_trip() {
        let code = zigzag_code();
        let msg = bits(&code, &[1, 0, 1, 1, 0, 0, 1, 0]);
        let st = store(code, 2, &[msg.clone(), msg].concat()).unwrap();
        let text = st.to_json().unwrap();
        let back = BucketStore::from_json(&text).unwrap();
        assert_eq!(back, st);
        assert_eq!(back.to_json().unwrap(), text);
    }
}
