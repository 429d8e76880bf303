//! Reducibility of random endpoint collections.

mod common;

use std::collections::BTreeSet;

use common::collections::*;
use dsess::dfcheck::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 2000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn relaxed_nonempty_collections_admit_a_step(m in collection()) {
        if relaxed(&m) && m.nonempty() > 0 {
            prop_assert!(m.channels().iter().any(|c| df_step(&m, *c).is_ok()), "{:?}", m.sets);
            prop_assert!(oracle_has_step(&m));
        }
    }

    #[test]
    fn reducible_collections_are_relaxed(m in collection()) {
        if df_reducible(&m) {
            prop_assert!(relaxed(&m), "{:?}", m.sets);
        }
    }

    #[test]
    fn graph_check_matches_exhaustive_search(m in collection()) {
        let expected = oracle_reducible(&m);
        prop_assert_eq!(df_reducible(&m), expected, "exhaustive on {:?}", m.sets);
        prop_assert_eq!(df_reducible_graph(&m), expected, "graph on {:?}", m.sets);
    }

    #[test]
    fn a_step_drops_exactly_the_channel(m in collection(), pick in any::<prop::sample::Index>()) {
        let channels: Vec<_> = m.channels().into_iter().collect();
        prop_assume!(!channels.is_empty());
        let c = channels[pick.index(channels.len())];
        if let Ok(next) = df_step(&m, c) {
            let before: BTreeSet<_> = m.sets.iter().flatten().filter(|e| e.channel != c).cloned().collect();
            let after: BTreeSet<_> = next.sets.iter().flatten().cloned().collect();
            prop_assert_eq!(before, after);
            let removed = m.sets.iter().flatten().filter(|e| e.channel == c).count();
            prop_assert_eq!(next.endpoint_count(), m.endpoint_count() - removed);
            prop_assert!(!next.universes.contains_key(&c));
            // a step never turns a reducible collection into an irreducible one
            if df_reducible(&m) {
                prop_assert!(df_reducible(&next));
            }
        }
    }

    #[test]
    fn empty_sets_do_not_matter(m in collection(), extra in 1usize..4) {
        let mut padded = m.clone();
        padded.sets.extend(std::iter::repeat_n(BTreeSet::new(), extra));
        prop_assert_eq!(relaxed(&padded), relaxed(&m));
        prop_assert_eq!(df_reducible(&padded), df_reducible(&m));
        prop_assert_eq!(df_reducible_graph(&padded), df_reducible_graph(&m));
    }
}
