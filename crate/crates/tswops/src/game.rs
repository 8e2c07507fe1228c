//! Topswops mechanics on complete decks.
//!
//! A deck of `n` cards numbered `1..=n` is played by repeatedly reversing the
//! top `k` cards, where `k` is the current top card, until the top card is 1.
//! Everything here is a pure function of its inputs; values can be shared
//! across threads freely.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A card value. Valid cards are `1..=n` for the ambient deck size `n`.
pub type Card = u8;

/// Largest deck size the crate supports. The published record values stop at
/// 19; one size of headroom keeps bootstrapping past that possible in
/// principle, and node counts stay within u64 everywhere.
pub const MAX_N: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GameError {
    #[error("empty deck")]
    EmptyDeck,
    #[error("deck of {n} cards exceeds the supported maximum {MAX_N}")]
    TooLarge { n: usize },
    #[error("card {value} out of range 1..={n} at position {position}")]
    CardOutOfRange { value: u8, position: usize, n: usize },
    #[error("duplicate card {value} at position {position}")]
    DuplicateCard { value: u8, position: usize },
    #[error("flip size {k} out of range 1..={n}")]
    FlipOutOfRange { k: usize, n: usize },
    #[error("malformed card {token:?} at position {position}")]
    MalformedCard { token: String, position: usize },
}

/// A complete arrangement of cards `1..=n`, position 1 on top.
///
/// Construction validates that the cards form a permutation of `{1..=n}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Deck(Vec<Card>);

impl Deck {
    pub fn new(cards: Vec<Card>) -> Result<Self, GameError> {
        let n = cards.len();
        if n == 0 {
            return Err(GameError::EmptyDeck);
        }
        if n > MAX_N {
            return Err(GameError::TooLarge { n });
        }
        let mut seen = [false; MAX_N + 1];
        for (i, &c) in cards.iter().enumerate() {
            if c == 0 || c as usize > n {
                return Err(GameError::CardOutOfRange { value: c, position: i + 1, n });
            }
            if seen[c as usize] {
                return Err(GameError::DuplicateCard { value: c, position: i + 1 });
            }
            seen[c as usize] = true;
        }
        Ok(Deck(cards))
    }

    /// The identity deck `(1 2 ... n)`.
    pub fn sorted(n: usize) -> Result<Self, GameError> {
        Deck::new((1..=n as u8).collect())
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn cards(&self) -> &[Card] {
        &self.0
    }

    pub fn into_cards(self) -> Vec<Card> {
        self.0
    }

    /// Card currently on top (position 1).
    pub fn top(&self) -> Card {
        self.0[0]
    }
}

impl fmt::Display for Deck {
    /// Renders space-separated, top first: `(3 1 4 5 2)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for Deck {
    type Err = GameError;

    /// Parses space-separated cards, with or without surrounding parentheses.
    fn from_str(s: &str) -> Result<Self, GameError> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut cards = Vec::new();
        for (i, tok) in s.split_whitespace().enumerate() {
            let c: u8 = tok.parse().map_err(|_| GameError::MalformedCard {
                token: tok.to_string(),
                position: i + 1,
            })?;
            cards.push(c);
        }
        Deck::new(cards)
    }
}

/// A completed game: every intermediate deck, the step count, the cards in
/// order of first appearance at the top, and the terminal deck.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameTrace {
    pub steps: Vec<Deck>,
    pub step_count: u32,
    pub top_sequence: Vec<Card>,
    pub terminal: Deck,
}

/// Reverses the top `k` cards, leaving the rest untouched.
pub fn flip_top(deck: &Deck, k: usize) -> Result<Deck, GameError> {
    if k < 1 || k > deck.n() {
        return Err(GameError::FlipOutOfRange { k, n: deck.n() });
    }
    let mut cards = deck.0.clone();
    cards[..k].reverse();
    Ok(Deck(cards))
}

/// Plays the buffer in place until the top card is 1. Returns the step count.
pub(crate) fn play_count_raw(cards: &mut [Card]) -> u32 {
    let mut steps = 0;
    loop {
        let t = cards[0] as usize;
        if t == 1 {
            return steps;
        }
        cards[..t].reverse();
        steps += 1;
    }
}

/// Step count of the game from `deck`, without materializing snapshots.
pub fn play_count(deck: &Deck) -> u32 {
    let mut cards = deck.0.clone();
    play_count_raw(&mut cards)
}

/// Plays the game to termination, recording every deck along the way.
///
/// `steps[0]` is the initial deck and the last entry is the terminal deck, so
/// `step_count == steps.len() - 1`.
pub fn play(deck: &Deck) -> GameTrace {
    let mut current = deck.clone();
    let mut steps = vec![current.clone()];
    let mut top_sequence = Vec::new();
    let mut seen = [false; MAX_N + 1];

    loop {
        let t = current.top();
        if !seen[t as usize] {
            seen[t as usize] = true;
            top_sequence.push(t);
        }
        if t == 1 {
            break;
        }
        current.0[..t as usize].reverse();
        steps.push(current.clone());
    }

    GameTrace {
        step_count: steps.len() as u32 - 1,
        top_sequence,
        terminal: current,
        steps,
    }
}

/// The cards in order of first appearance at the top during the game.
///
/// Repeat visits are not re-recorded; the last element is always 1.
pub fn top_sequence(deck: &Deck) -> Vec<Card> {
    let mut cards = deck.0.clone();
    let mut seq = Vec::new();
    let mut seen = [false; MAX_N + 1];
    loop {
        let t = cards[0];
        if !seen[t as usize] {
            seen[t as usize] = true;
            seq.push(t);
        }
        if t == 1 {
            return seq;
        }
        cards[..t as usize].reverse();
    }
}

/// True iff no card sits at its own-numbered position.
pub fn is_derangement(deck: &Deck) -> bool {
    deck.0.iter().enumerate().all(|(i, &c)| c as usize != i + 1)
}

/// The settled boundary: the smallest `k` such that every card above `k` is
/// parked at its own position, i.e. the start of the maximal identity suffix.
///
/// The game below the boundary never touches positions beyond it, so the
/// remaining game length from this deck is at most `f(k)`. Returns 0 for the
/// sorted deck.
pub fn settled_boundary(deck: &Deck) -> usize {
    let mut k = deck.n();
    while k >= 1 && deck.0[k - 1] as usize == k {
        k -= 1;
    }
    k
}
