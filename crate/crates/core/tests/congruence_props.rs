//! Structural congruence laws as properties over generated processes:
//! reordering and renaming invariance, connector absorption, gluing
//! laws, and agreement with a brute-force isomorphism search.

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{iso_equiv, key, random_process};
use qlmntal_core::congruence::{canonical_key, congruent, explain_difference, normalize};
use qlmntal_core::process::Process;
use qlmntal_core::syntax::{parse_process, print_process};

/// Deep copy with every level's atom and membrane order shuffled.
fn scramble(p: &Process, rng: &mut ChaCha8Rng) -> Process {
    let mut out = p.clone();
    out.atoms.shuffle(rng);
    out.membranes.shuffle(rng);
    for m in &mut out.membranes {
        m.content = scramble(&m.content, rng);
    }
    out
}

/// Renames every local link to a fresh name outside the generator's
/// alphabet, leaving free links untouched.
fn rename_locals(p: &Process) -> Process {
    let free = p.free_links();
    let map: BTreeMap<String, String> = p
        .link_table()
        .keys()
        .filter(|n| !free.contains(*n))
        .enumerate()
        .map(|(i, n)| (n.clone(), format!("RN{i}")))
        .collect();
    p.rename_links(&map)
}

fn parse(src: &str) -> Process {
    parse_process(&format!("{src}.")).expect("test process parses")
}

proptest! {
    #[test]
    fn reordering_preserves_key(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_process(&mut rng, 8, 2);
        let q = scramble(&p, &mut rng);
        prop_assert_eq!(key(&p), key(&q));
    }

    #[test]
    fn local_renaming_preserves_key(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_process(&mut rng, 8, 2);
        prop_assert_eq!(key(&p), key(&rename_locals(&p)));
    }

    #[test]
    fn free_renaming_changes_key(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_process(&mut rng, 8, 2);
        if let Some(f) = p.free_links().iter().next() {
            let mut map = BTreeMap::new();
            map.insert(f.clone(), "ZZRENAMED".to_string());
            prop_assert_ne!(key(&p), key(&p.rename_links(&map)));
        }
    }

    #[test]
    fn connector_to_fresh_name_renames_the_port(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_process(&mut rng, 6, 2);
        if p.is_empty() {
            return Ok(());
        }
        let printed = print_process(&p);
        if let Some(f) = p.free_links().iter().next() {
            let with_connector = parse(&format!("{printed}, {f} = ZZG"));
            let mut map = BTreeMap::new();
            map.insert(f.clone(), "ZZG".to_string());
            prop_assert_eq!(key(&with_connector), key(&p.rename_links(&map)));
        }
        // A connector closed onto itself adds nothing.
        let with_loop = parse(&format!("{printed}, ZZS = ZZS"));
        prop_assert_eq!(key(&with_loop), key(&p));
    }

    #[test]
    fn gluing_is_commutative_with_empty_identity(
        seed_a in any::<u64>(),
        seed_b in any::<u64>(),
    ) {
        let mut rng_a = ChaCha8Rng::seed_from_u64(seed_a);
        let mut rng_b = ChaCha8Rng::seed_from_u64(seed_b);
        let p = random_process(&mut rng_a, 6, 2);
        let q = random_process(&mut rng_b, 6, 2);
        // Suffix every link of q so the glue cannot exceed two occurrences
        // of any name.
        let map: BTreeMap<String, String> = q
            .link_table()
            .keys()
            .map(|n| (n.clone(), format!("{n}Q")))
            .collect();
        let q = q.rename_links(&map);
        let pq = p.clone().glue(q.clone()).expect("disjoint names glue");
        let qp = q.glue(p.clone()).expect("disjoint names glue");
        prop_assert_eq!(key(&pq), key(&qp));
        let pe = p.clone().glue(Process::default()).expect("empty glues");
        prop_assert_eq!(key(&pe), key(&p));
    }

    #[test]
    fn normalize_is_idempotent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_process(&mut rng, 8, 2);
        let once = normalize(&p);
        let twice = normalize(&once);
        prop_assert_eq!(print_process(&once), print_process(&twice));
    }

    #[test]
    fn roundtrip_preserves_observables(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_process(&mut rng, 8, 2);
        if p.is_empty() {
            return Ok(());
        }
        let q = parse(&print_process(&p));
        prop_assert_eq!(p.atom_census(), q.atom_census());
        prop_assert_eq!(p.membrane_count(), q.membrane_count());
        prop_assert_eq!(p.free_links(), q.free_links());
        prop_assert_eq!(key(&p), key(&q));
    }

    #[test]
    fn membrane_wrapping_changes_key(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_process(&mut rng, 6, 2);
        let wrapped = parse(&format!("{{{}}}", print_process(&p)));
        prop_assert_ne!(key(&p), key(&wrapped));
    }

    #[test]
    fn congruent_transforms_agree_with_brute_force(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_process(&mut rng, 5, 1);
        let q = rename_locals(&scramble(&p, &mut rng));
        prop_assert!(congruent(&p, &q));
        prop_assert!(iso_equiv(&p, &q));
        prop_assert!(explain_difference(&p, &q).is_none());
    }

    #[test]
    fn key_equality_agrees_with_brute_force(
        seed_a in any::<u64>(),
        seed_b in any::<u64>(),
    ) {
        let mut rng_a = ChaCha8Rng::seed_from_u64(seed_a);
        let mut rng_b = ChaCha8Rng::seed_from_u64(seed_b);
        let p = random_process(&mut rng_a, 4, 1);
        let q = random_process(&mut rng_b, 4, 1);
        let same_key = canonical_key(&p) == canonical_key(&q);
        prop_assert_eq!(same_key, iso_equiv(&p, &q));
        prop_assert_eq!(same_key, explain_difference(&p, &q).is_none());
    }
}
