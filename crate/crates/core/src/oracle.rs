//! Exhaustive maximum-inner-product search over a row-major corpus.
//!
//! Ground truth for the accelerator and host paths. It follows the same
//! arithmetic contract (binary32 accumulation in ascending dimension order,
//! one round to binary16 at the end) and the same ranking (score descending,
//! id ascending, signed zeros equal) but shares no code with them.

use alloc::vec::Vec;
use core::cmp::Reverse;

use half::f16;

use crate::layout::{Corpus, QueryBatch};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleHit {
    pub score: f16,
    pub id: u64,
}

// Maps a score onto u32 so that integer order equals numeric order.
fn order_key(score: f16) -> u32 {
    let mut bits = score.to_f32().to_bits();
    if bits == 0x8000_0000 {
        bits = 0;
    }
    if bits & 0x8000_0000 != 0 {
        !bits
    } else {
        bits | 0x8000_0000
    }
}

fn scores(corpus: &Corpus, query: &[f32]) -> Vec<f16> {
    let mut out = Vec::with_capacity(corpus.len());
    let mut rows = corpus.iter();
    // four rows at a time; each row keeps its own sequential sum
    loop {
        let (Some(a), Some(b), Some(c), Some(d)) = (rows.next(), rows.next(), rows.next(), rows.next())
        else {
            break;
        };
        let mut s = [0.0f32; 4];
        for (j, q) in query.iter().enumerate() {
            s[0] += q * a[j].to_f32();
            s[1] += q * b[j].to_f32();
            s[2] += q * c[j].to_f32();
            s[3] += q * d[j].to_f32();
        }
        out.extend(s.iter().map(|&x| f16::from_f32(x)));
    }
    for row in corpus.iter().skip(out.len()) {
        let mut s = 0.0f32;
        for (q, x) in query.iter().zip(row) {
            s += q * x.to_f32();
        }
        out.push(f16::from_f32(s));
    }
    out
}

/// Exact top-`k` of every query; `k` larger than the corpus returns the full
/// ranking.
pub fn oracle_enns(corpus: &Corpus, queries: &QueryBatch, k: usize) -> Vec<Vec<OracleHit>> {
    assert_eq!(corpus.dim(), queries.dim(), "corpus and query dimensions differ");
    queries
        .iter()
        .map(|q| {
            let q: Vec<f32> = q.iter().map(|x| x.to_f32()).collect();
            let mut hits: Vec<(Reverse<u32>, u64, f16)> = scores(corpus, &q)
                .into_iter()
                .enumerate()
                .map(|(i, s)| (Reverse(order_key(s)), i as u64, s))
                .collect();
            let k = k.min(hits.len());
            if k == 0 {
                return Vec::new();
            }
            if k < hits.len() {
                hits.select_nth_unstable_by_key(k - 1, |h| (h.0, h.1));
                hits.truncate(k);
            }
            hits.sort_unstable_by_key(|h| (h.0, h.1));
            hits.into_iter()
                .map(|(_, id, score)| OracleHit { score, id })
                .collect()
        })
        .collect()
}
