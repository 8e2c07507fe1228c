//! Brute-force ground truth for small deck sizes.
//!
//! Plays the game on every one of the `n!` initial decks and reports the
//! maximum, the decks attaining it, and optionally the full step histogram.
//! Deliberately shares only the flip/play mechanics with the search module —
//! none of its pruning paths — so it can serve as an independent witness.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::game::{self, Card, Deck};

/// Enumerating beyond 10! plays stops being a desk-scale check.
pub const ORACLE_MAX_N: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("brute force supports 1..={ORACLE_MAX_N} cards, refusing n={n}")]
    OutOfGuard { n: usize },
}

/// Exhaustive-play report over all `n!` decks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub n: usize,
    pub max_steps: u32,
    pub max_count: usize,
    /// Lexicographically sorted (enumeration order is lexicographic).
    pub largest_decks: Vec<Deck>,
    pub histogram: Option<BTreeMap<u32, u64>>,
}

/// Advances `perm` to its lexicographic successor; false once exhausted.
fn next_permutation(perm: &mut [Card]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Plays every deck of `n` cards in lexicographic order.
pub fn brute_force(n: usize, with_histogram: bool) -> Result<OracleReport, OracleError> {
    if n == 0 || n > ORACLE_MAX_N {
        return Err(OracleError::OutOfGuard { n });
    }

    let mut perm: Vec<Card> = (1..=n as Card).collect();
    let mut scratch = vec![0u8; n];
    let mut max_steps = 0u32;
    let mut largest: Vec<Vec<Card>> = vec![perm.clone()]; // the sorted deck plays 0
    let mut histogram: BTreeMap<u32, u64> = BTreeMap::new();

    loop {
        scratch.copy_from_slice(&perm);
        let steps = game::play_count_raw(&mut scratch);
        if with_histogram {
            *histogram.entry(steps).or_insert(0) += 1;
        }
        if steps > max_steps {
            max_steps = steps;
            largest.clear();
            largest.push(perm.clone());
        } else if steps == max_steps && steps > 0 {
            largest.push(perm.clone());
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }

    let largest_decks: Vec<Deck> = largest
        .into_iter()
        .map(|cards| Deck::new(cards).expect("enumerated permutations are valid decks"))
        .collect();
    Ok(OracleReport {
        n,
        max_steps,
        max_count: largest_decks.len(),
        largest_decks,
        histogram: with_histogram.then_some(histogram),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::is_derangement;

    fn deck(cards: &[u8]) -> Deck {
        Deck::new(cards.to_vec()).unwrap()
    }

    #[test]
    fn brute_force_small_maxima() {
        assert_eq!(brute_force(4, false).unwrap().max_steps, 4);
        assert_eq!(brute_force(5, false).unwrap().max_steps, 7);
    }

    #[test]
    fn two_cards_single_largest_deck() {
        let report = brute_force(2, false).unwrap();
        assert_eq!(report.max_steps, 1);
        assert_eq!(report.largest_decks, vec![deck(&[2, 1])]);
        assert_eq!(report.max_count, 1);
    }

    #[test]
    fn record_deck_is_found_for_five_cards() {
        let report = brute_force(5, false).unwrap();
        assert!(report.largest_decks.contains(&deck(&[3, 1, 4, 5, 2])));
        for d in &report.largest_decks {
            assert!(is_derangement(d));
        }
    }

    #[test]
    fn histogram_covers_all_permutations() {
        let report = brute_force(6, true).unwrap();
        let histogram = report.histogram.unwrap();
        assert_eq!(histogram.values().sum::<u64>(), 720);
        assert_eq!(histogram[&report.max_steps], report.max_count as u64);
    }

    #[test]
    fn trivial_single_card() {
        let report = brute_force(1, false).unwrap();
        assert_eq!(report.max_steps, 0);
        assert_eq!(report.largest_decks, vec![deck(&[1])]);
    }

    #[test]
    fn guard_is_enforced() {
        assert_eq!(brute_force(11, false), Err(OracleError::OutOfGuard { n: 11 }));
        assert_eq!(brute_force(0, false), Err(OracleError::OutOfGuard { n: 0 }));
    }

    #[test]
    fn largest_decks_are_sorted_and_unique() {
        let report = brute_force(7, false).unwrap();
        let mut sorted = report.largest_decks.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, report.largest_decks);
    }
}
