//! Deadlock-freeness reducibility of abstracted pools.
//!
//! A pool is abstracted to one endpoint set per thread. A reduction step on a
//! channel merges the sets holding its endpoints and drops those endpoints; a
//! collection is reducible when every sequence of steps ends with only empty
//! sets.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::runtime::{consistent, find_enabled, rho, EnabledStep, Pool};
use crate::syntax::ast::*;

/// Endpoint sets, one per thread, with the universe of every channel.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Collection {
    pub sets: Vec<BTreeSet<Endpoint>>,
    pub universes: BTreeMap<ChannelId, Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DfError {
    #[error("the pool's endpoints are not consistent")]
    InconsistentPool,
    #[error("channel {0} has no endpoints in the collection")]
    UnknownChannel(ChannelId),
    #[error("two endpoints of {0} lie in the same set")]
    NotApplicable(ChannelId),
}

impl Collection {
    pub fn new(sets: Vec<BTreeSet<Endpoint>>) -> Collection {
        Collection {
            sets,
            universes: BTreeMap::new(),
        }
    }

    /// Channels with at least one endpoint in some set.
    pub fn channels(&self) -> BTreeSet<ChannelId> {
        self.sets.iter().flatten().map(|e| e.channel).collect()
    }

    pub fn endpoint_count(&self) -> usize {
        self.sets.iter().map(BTreeSet::len).sum()
    }

    pub fn nonempty(&self) -> usize {
        self.sets.iter().filter(|s| !s.is_empty()).count()
    }

    /// Drops empty sets.
    pub fn trimmed(&self) -> Collection {
        Collection {
            sets: self.sets.iter().filter(|s| !s.is_empty()).cloned().collect(),
            universes: self.universes.clone(),
        }
    }
}

/// One endpoint set per thread.
pub fn abstract_pool(pool: &Pool) -> Result<Collection, DfError> {
    if !consistent(&pool.resources(), &pool.universes()) {
        return Err(DfError::InconsistentPool);
    }
    Ok(Collection {
        sets: pool.threads.values().map(|e| rho(e).into_iter().collect()).collect(),
        universes: pool.universes(),
    })
}

/// Merges the sets holding `c`'s endpoints, minus those endpoints.
pub fn df_step(m: &Collection, c: ChannelId) -> Result<Collection, DfError> {
    let holding: Vec<usize> = (0..m.sets.len())
        .filter(|&i| m.sets[i].iter().any(|e| e.channel == c))
        .collect();
    if holding.is_empty() {
        return Err(DfError::UnknownChannel(c));
    }
    if holding.iter().any(|&i| m.sets[i].iter().filter(|e| e.channel == c).count() > 1) {
        return Err(DfError::NotApplicable(c));
    }
    let merged: BTreeSet<Endpoint> = holding
        .iter()
        .flat_map(|&i| m.sets[i].iter())
        .filter(|e| e.channel != c)
        .cloned()
        .collect();
    let mut sets: Vec<BTreeSet<Endpoint>> = (0..m.sets.len())
        .filter(|i| !holding.contains(i))
        .map(|i| m.sets[i].clone())
        .collect();
    sets.push(merged);
    let mut universes = m.universes.clone();
    universes.remove(&c);
    Ok(Collection { sets, universes })
}

/// Channel structure up to renaming: each set as a sorted list of channel
/// labels, labels assigned by first occurrence.
fn canonical(m: &Collection) -> Vec<Vec<usize>> {
    let mut sets: Vec<Vec<ChannelId>> = m
        .sets
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| s.iter().map(|e| e.channel).collect())
        .collect();
    // two relabeling passes; any deterministic relabeling is a sound memo key
    let mut shape: Vec<Vec<usize>> = vec![];
    for _ in 0..2 {
        sets.sort_by_key(|s| std::cmp::Reverse(s.len()));
        let mut label: HashMap<ChannelId, usize> = HashMap::new();
        shape = sets
            .iter()
            .map(|s| {
                let mut v: Vec<usize> = s
                    .iter()
                    .map(|c| {
                        let n = label.len();
                        *label.entry(*c).or_insert(n)
                    })
                    .collect();
                v.sort_unstable();
                v
            })
            .collect();
        shape.sort();
        let order: BTreeMap<ChannelId, usize> = label.into_iter().collect();
        sets = sets
            .into_iter()
            .map(|s| {
                let mut s = s;
                s.sort_by_key(|c| order[c]);
                s
            })
            .collect();
    }
    shape
}

fn reducible_memo(m: &Collection, memo: &mut HashMap<Vec<Vec<usize>>, bool>) -> bool {
    let m = m.trimmed();
    if m.sets.is_empty() {
        return true;
    }
    let key = canonical(&m);
    if let Some(v) = memo.get(&key) {
        return *v;
    }
    let succs: Vec<Collection> = m.channels().into_iter().filter_map(|c| df_step(&m, c).ok()).collect();
    let verdict = !succs.is_empty() && succs.iter().all(|s| reducible_memo(s, memo));
    memo.insert(key, verdict);
    verdict
}

/// Exhaustive search over every reduction order.
pub fn df_reducible(m: &Collection) -> bool {
    reducible_memo(m, &mut HashMap::new())
}

/// The same verdict as [`df_reducible`], computed as acyclicity of the
/// bipartite graph linking each non-empty set to the channels of its
/// endpoints (two endpoints of one channel in one set form a cycle).
pub fn df_reducible_graph(m: &Collection) -> bool {
    let m = m.trimmed();
    let channels: Vec<ChannelId> = m.channels().into_iter().collect();
    let index: BTreeMap<ChannelId, usize> = channels.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let mut uf: UnionFind<usize> = UnionFind::new(m.sets.len() + channels.len());
    for (i, set) in m.sets.iter().enumerate() {
        for e in set {
            let node = m.sets.len() + index[&e.channel];
            if !uf.union(i, node) {
                return false;
            }
        }
    }
    true
}

/// `|M| >= |endpoints| - |channels| + 1`, or no non-empty sets.
pub fn relaxed(m: &Collection) -> bool {
    let sets = m.nonempty() as i64;
    sets == 0 || sets > m.endpoint_count() as i64 - m.channels().len() as i64
}

/// A channel whose whole cohort is blocked on matching partial redexes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatchReport {
    pub channel: ChannelId,
    pub threads: Vec<usize>,
    pub kind: String,
}

pub fn find_blocked_match(pool: &Pool) -> Option<MatchReport> {
    find_enabled(pool, false).into_iter().find_map(|s: EnabledStep| {
        s.channel.map(|c| MatchReport {
            channel: c,
            threads: s.threads,
            kind: s.kind.as_str().to_string(),
        })
    })
}

/// One `analyze` record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Snapshot {
    pub step: usize,
    pub relaxed: bool,
    pub df_reducible: bool,
    pub sets: Vec<Vec<String>>,
    pub channels: Vec<String>,
}

impl Snapshot {
    pub fn of(step: usize, m: &Collection) -> Snapshot {
        Snapshot {
            step,
            relaxed: relaxed(m),
            df_reducible: df_reducible_graph(m),
            sets: m.sets.iter().map(|s| s.iter().map(|e| e.to_string()).collect()).collect(),
            channels: m.channels().iter().map(|c| c.to_string()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ep(c: u64, roles: &[i64]) -> Endpoint {
        Endpoint::new(ChannelId(c), roles.to_vec())
    }

    fn coll(sets: &[&[Endpoint]]) -> Collection {
        Collection::new(sets.iter().map(|s| s.iter().cloned().collect()).collect())
    }

    #[test]
    fn step_merges_and_removes() {
        let m = coll(&[&[ep(0, &[0])], &[ep(0, &[1])]]);
        let s = df_step(&m, ChannelId(0)).unwrap();
        assert_eq!(s.trimmed().sets.len(), 0);
        assert_eq!(s.sets, vec![BTreeSet::new()]);

        let m = coll(&[&[ep(0, &[0]), ep(1, &[0])], &[ep(0, &[1]), ep(1, &[1])]]);
        let s = df_step(&m, ChannelId(0)).unwrap();
        assert_eq!(s.sets, vec![[ep(1, &[0]), ep(1, &[1])].into_iter().collect()]);
    }

    #[test]
    fn shared_set_is_refused() {
        let m = coll(&[&[ep(0, &[0]), ep(0, &[1])]]);
        assert_eq!(df_step(&m, ChannelId(0)), Err(DfError::NotApplicable(ChannelId(0))));
        assert_eq!(df_step(&m, ChannelId(7)), Err(DfError::UnknownChannel(ChannelId(7))));
    }

    #[test]
    fn reducibility_examples() {
        assert!(df_reducible(&coll(&[&[], &[]])));
        assert!(df_reducible(&coll(&[&[ep(0, &[0])], &[ep(0, &[1])]])));
        let crossed = coll(&[&[ep(0, &[0]), ep(1, &[1])], &[ep(0, &[1]), ep(1, &[0])]]);
        assert!(!df_reducible(&crossed));
        assert!(!df_reducible_graph(&crossed));
    }

    #[test]
    fn relaxed_examples() {
        assert!(relaxed(&coll(&[&[ep(0, &[0])], &[ep(0, &[1])]])));
        assert!(!relaxed(&coll(&[&[ep(0, &[0]), ep(1, &[1])], &[ep(0, &[1]), ep(1, &[0])]])));
        assert!(relaxed(&Collection::default()));
    }
}
