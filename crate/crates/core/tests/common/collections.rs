//! Random endpoint collections and a naive reducibility oracle.

use std::collections::BTreeSet;

use dsess::dfcheck::Collection;
use dsess::syntax::*;
use proptest::prelude::*;

/// Up to five channels with one to three single-role endpoints each, spread
/// over up to six sets.
pub fn collection() -> impl Strategy<Value = Collection> {
    (1usize..=6, proptest::collection::vec(1usize..=3, 0..=5)).prop_flat_map(|(nsets, sizes)| {
        let total: usize = sizes.iter().sum();
        proptest::collection::vec(0..nsets, total).prop_map(move |placement| {
            let mut sets = vec![BTreeSet::new(); nsets];
            let mut universes = std::collections::BTreeMap::new();
            let mut k = 0;
            for (c, &size) in sizes.iter().enumerate() {
                let c = ChannelId(c as u64);
                universes.insert(c, (0..size as i64).collect());
                for r in 0..size {
                    sets[placement[k]].insert(Endpoint::new(c, vec![r as i64]));
                    k += 1;
                }
            }
            Collection { sets, universes }
        })
    })
}

/// Sets as lists of channel numbers, one entry per endpoint.
fn plain(m: &Collection) -> Vec<Vec<u64>> {
    m.sets.iter().map(|s| s.iter().map(|e| e.channel.0).collect()).collect()
}

fn step(sets: &[Vec<u64>], c: u64) -> Option<Vec<Vec<u64>>> {
    let holders: Vec<usize> = (0..sets.len()).filter(|&i| sets[i].contains(&c)).collect();
    if holders.is_empty() || holders.iter().any(|&i| sets[i].iter().filter(|&&x| x == c).count() > 1) {
        return None;
    }
    let mut merged = vec![];
    let mut rest = vec![];
    for (i, s) in sets.iter().enumerate() {
        if holders.contains(&i) {
            merged.extend(s.iter().copied().filter(|&x| x != c));
        } else {
            rest.push(s.clone());
        }
    }
    rest.push(merged);
    Some(rest)
}

fn reducible(sets: &[Vec<u64>]) -> bool {
    let live: Vec<Vec<u64>> = sets.iter().filter(|s| !s.is_empty()).cloned().collect();
    if live.is_empty() {
        return true;
    }
    let channels: BTreeSet<u64> = live.iter().flatten().copied().collect();
    let next: Vec<Vec<Vec<u64>>> = channels.iter().filter_map(|&c| step(&live, c)).collect();
    !next.is_empty() && next.iter().all(|n| reducible(n))
}

/// Every maximal sequence of steps ends with only empty sets.
pub fn oracle_reducible(m: &Collection) -> bool {
    reducible(&plain(m))
}

/// Whether some step applies.
pub fn oracle_has_step(m: &Collection) -> bool {
    let sets = plain(m);
    let channels: BTreeSet<u64> = sets.iter().flatten().copied().collect();
    channels.iter().any(|&c| step(&sets, c).is_some())
}
