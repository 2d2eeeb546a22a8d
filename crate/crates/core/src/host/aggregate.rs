use alloc::vec::Vec;
use core::cmp::Ordering;

use half::f16;

use crate::nma::PartialTopK;

/// One entry of a final result list.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlobalEntry {
    pub score: f16,
    pub global_id: u64,
}

impl GlobalEntry {
    /// Higher score first, then lower global id; signed zeros tie.
    pub fn rank(&self, other: &Self) -> Ordering {
        let (a, b) = (self.score.to_f32() + 0.0, other.score.to_f32() + 0.0);
        b.total_cmp(&a).then(self.global_id.cmp(&other.global_id))
    }
}

/// A partial list and the global id of its shard's first vector.
#[derive(Clone, Copy, Debug)]
pub struct ShardPartial<'a> {
    pub offset: u64,
    pub list: &'a PartialTopK,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregatedList {
    pub entries: Vec<GlobalEntry>,
    /// Fewer than K entries were available.
    pub short: bool,
}

/// Merges partial lists into the best `k` entries overall.
pub fn aggregate_topk(partials: &[ShardPartial<'_>], k: usize) -> AggregatedList {
    let mut all: Vec<GlobalEntry> = partials
        .iter()
        .flat_map(|p| {
            p.list.entries().iter().map(move |e| GlobalEntry {
                score: e.score,
                global_id: p.offset + u64::from(e.vector_id),
            })
        })
        .collect();
    let short = all.len() < k;
    if k == 0 {
        all.clear();
    } else if k < all.len() {
        all.select_nth_unstable_by(k - 1, GlobalEntry::rank);
        all.truncate(k);
    }
    all.sort_unstable_by(GlobalEntry::rank);
    AggregatedList {
        entries: all,
        short,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nma::ScoreEntry;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn list(entries: &[(f32, u32)], cap: usize) -> PartialTopK {
        let mut l = PartialTopK::new(cap);
        for &(s, id) in entries {
            l.insert(ScoreEntry::new(f16::from_f32(s), id));
        }
        l
    }

    #[test]
    fn single_partial_is_identity() {
        let l = list(&[(3.0, 0), (1.0, 1), (2.0, 2)], 32);
        let out = aggregate_topk(&[ShardPartial { offset: 100, list: &l }], 3);
        let ids: Vec<u64> = out.entries.iter().map(|e| e.global_id).collect();
        assert_eq!(ids, vec![100, 102, 101]);
        assert!(!out.short);
    }

    #[test]
    fn short_result_is_flagged() {
        let l = list(&[(1.0, 0)], 32);
        let out = aggregate_topk(&[ShardPartial { offset: 0, list: &l }], 32);
        assert_eq!(out.entries.len(), 1);
        assert!(out.short);
    }

    #[test]
    fn matches_sort_oracle_and_ignores_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        // 4 units x 8 packages, coarse scores for plenty of ties
        let lists: Vec<PartialTopK> = (0..32)
            .map(|_| {
                let entries: Vec<(f32, u32)> = (0..32)
                    .map(|i| (rng.gen_range(-8i32..8) as f32 * 0.25, i))
                    .collect();
                list(&entries, 32)
            })
            .collect();
        let mut partials: Vec<ShardPartial> = lists
            .iter()
            .enumerate()
            .map(|(s, l)| ShardPartial {
                offset: s as u64 * 1000,
                list: l,
            })
            .collect();
        let mut oracle: Vec<(f32, u64)> = partials
            .iter()
            .flat_map(|p| {
                p.list
                    .entries()
                    .iter()
                    .map(move |e| (e.score.to_f32(), p.offset + e.vector_id as u64))
            })
            .collect();
        assert_eq!(oracle.len(), 1024);
        oracle.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        for k in [1, 5, 32, 1024] {
            let expect: Vec<u64> = oracle[..k].iter().map(|x| x.1).collect();
            for _ in 0..4 {
                partials.shuffle(&mut rng);
                let got: Vec<u64> = aggregate_topk(&partials, k)
                    .entries
                    .iter()
                    .map(|e| e.global_id)
                    .collect();
                assert_eq!(got, expect);
            }
        }
    }
}
