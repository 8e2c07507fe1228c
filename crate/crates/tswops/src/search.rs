//! Lazy depth-first search for the longest Topswops game.
//!
//! Only decks whose full top sequence has length `n` can be longest, so the
//! search enumerates candidate top sequences — permutations `p` of `{1..=n}`
//! with `p[n-1] = 1` — and builds the matching initial deck lazily while the
//! game is replayed. A slot holding `-j` stands for "the card at position `j`
//! of the initial deck, not chosen yet"; whenever such a placeholder surfaces,
//! the next element of `p` is committed to it and the flip cascade resumes.
//!
//! Two prunes cut the tree. A longest deck is a derangement, so a card is
//! never committed to its own initial position. And once every card above the
//! settled boundary `T` is parked at its own position, at most `f(T)` steps
//! remain, so a branch dies when `flips + f(T)` cannot reach the incumbent
//! bound.

use std::sync::atomic::{AtomicU32, Ordering};

use thiserror::Error;

use crate::bounds::{self, FMode, FTable};
use crate::game::{Card, Deck, MAX_N};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("deck size {n} out of supported range 1..={MAX_N}")]
    UnsupportedN { n: usize },
    #[error("top sequence is not a permutation of 1..=n")]
    TopSequenceNotPermutation,
    #[error("top sequence must end with card 1")]
    TopSequenceLastNotOne,
}

/// Why a candidate extension was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneReason {
    /// The card would sit at its own initial position.
    Derangement,
    /// `flips + f(boundary)` falls short of the incumbent bound.
    TBound,
}

/// Prune toggles. Both default on; disabling them turns the search into the
/// plain enumeration of all `(n-1)!` candidate top sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prunes {
    pub derangement: bool,
    pub t_bound: bool,
}

impl Default for Prunes {
    fn default() -> Self {
        Prunes { derangement: true, t_bound: true }
    }
}

impl Prunes {
    pub const NONE: Prunes = Prunes { derangement: false, t_bound: false };
}

/// How the pruning bound behaves during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundMode {
    /// The bound is fixed at the seed for the whole run; results and node
    /// statistics are reproducible across any schedule.
    Static,
    /// The bound rises to the best completed game seen so far.
    #[default]
    Dynamic,
}

/// The shared incumbent bound.
///
/// `read` may observe a stale (lower) value under concurrency, which only
/// weakens pruning; `raise` is monotone. In static mode the seed is the bound
/// and raises are recorded but never read back.
pub struct Incumbent {
    mode: BoundMode,
    floor: u32,
    best: AtomicU32,
}

impl Incumbent {
    pub fn new(mode: BoundMode, floor: u32) -> Self {
        Incumbent { mode, floor, best: AtomicU32::new(0) }
    }

    #[inline]
    pub fn read(&self) -> u32 {
        match self.mode {
            BoundMode::Static => self.floor,
            BoundMode::Dynamic => self.floor.max(self.best.load(Ordering::Relaxed)),
        }
    }

    #[inline]
    pub fn raise(&self, steps: u32) {
        self.best.fetch_max(steps, Ordering::Relaxed);
    }
}

/// Per-level traversed-node counters for one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchStats {
    /// Nodes accepted at each tree level, level 0 (the root) through `n-1`.
    pub level_counts: Vec<u64>,
    pub total: u64,
    /// Size of the search tree without pruning.
    pub unpruned: u64,
}

impl SearchStats {
    pub(crate) fn from_levels(levels: Vec<u64>, n: usize) -> Self {
        let total = levels.iter().sum();
        let unpruned = bounds::unpruned_tree_size(n).expect("tree size fits u64 for supported n");
        SearchStats { level_counts: levels, total, unpruned }
    }

    /// Traversed nodes as a fraction of the unpruned tree.
    pub fn ratio(&self) -> f64 {
        self.total as f64 / self.unpruned as f64
    }
}

/// Outcome of a search run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// At least one game reached the bound; the maximum is exact.
    Found,
    /// No completed game reached the seed bound — the seed exceeds `f(n)`.
    NoDeckAtBound,
}

/// Result of a full search: the maximum, every deck attaining it, and the
/// traversal statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub n: usize,
    /// `None` when no completed game reached the seed bound.
    pub max_steps: Option<u32>,
    /// All maximal decks, lexicographically sorted, duplicate-free.
    pub largest_decks: Vec<Deck>,
    pub stats: SearchStats,
    pub seed_bound: u32,
    pub bound_mode: BoundMode,
}

impl SearchResult {
    pub fn outcome(&self) -> Outcome {
        if self.max_steps.is_some() {
            Outcome::Found
        } else {
            Outcome::NoDeckAtBound
        }
    }
}

/// Search configuration; the defaults are a dynamic run seeded at 0 with the
/// trusted f-table and both prunes on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchConfig {
    pub seed_bound: u32,
    pub bound_mode: BoundMode,
    pub f_mode: FMode,
    pub prunes: Prunes,
}

/// A node of the search: a partially constructed initial deck.
///
/// `slots` is the deck as the game sees it right now; positive entries are
/// committed cards, `-j` marks the still-unchosen card of initial position
/// `j`. `assigned` accumulates the initial deck itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct LazyState {
    pub slots: [i8; MAX_N],
    pub assigned: [u8; MAX_N],
    /// Bitmask of committed cards, bit `c` for card `c`.
    pub used: u32,
    pub flips: u32,
    /// Settled boundary: every card above it sits at its own position.
    /// Starts at `n`; the f-table prune engages once it drops below `n`.
    pub boundary: u8,
    /// Number of non-1 cards committed so far; the tree level.
    pub depth: u8,
}

impl LazyState {
    pub fn root(n: usize) -> Self {
        debug_assert!((1..=MAX_N).contains(&n));
        let mut slots = [0i8; MAX_N];
        for (i, slot) in slots.iter_mut().take(n).enumerate() {
            *slot = -((i + 1) as i8);
        }
        LazyState {
            slots,
            assigned: [0u8; MAX_N],
            used: 0,
            flips: 0,
            boundary: n as u8,
            depth: 0,
        }
    }
}

/// Commits `card` to the initial position named by the top placeholder, runs
/// the flip cascade, and applies both prunes.
///
/// The boundary shrinks exactly when a flip of size `t == boundary` parks
/// card `t` at position `t`; any already-parked cards just below it are then
/// absorbed as well.
#[inline]
pub(crate) fn try_extend(
    state: &LazyState,
    card: Card,
    n: usize,
    f_table: &FTable,
    bound: u32,
    prunes: Prunes,
) -> Result<LazyState, PruneReason> {
    debug_assert!(state.slots[0] < 0, "top of an inner node must be a placeholder");
    debug_assert!(card >= 2 && state.used & (1 << card) == 0);
    let position = (-state.slots[0]) as usize;
    if prunes.derangement && card as usize == position {
        return Err(PruneReason::Derangement);
    }

    let mut next = *state;
    next.assigned[position - 1] = card;
    next.used |= 1 << card;
    next.depth += 1;
    next.slots[0] = card as i8;

    while next.slots[0] > 1 {
        let t = next.slots[0] as usize;
        debug_assert!(t <= next.boundary as usize);
        next.slots[..t].reverse();
        next.flips += 1;
        if t == next.boundary as usize {
            next.boundary -= 1;
            while next.boundary >= 1
                && next.slots[next.boundary as usize - 1] == next.boundary as i8
            {
                next.boundary -= 1;
            }
        }
    }

    if prunes.t_bound && (next.boundary as usize) < n {
        if next.flips + f_table.f(next.boundary as usize) < bound {
            return Err(PruneReason::TBound);
        }
    }
    Ok(next)
}

/// Builds the unique initial deck whose top sequence is `p`.
///
/// `p` must be a permutation of `{1..=n}` ending in 1. This is the pure
/// constructor: no pruning, no bound.
pub fn gen_init_deck(p: &[Card]) -> Result<Deck, SearchError> {
    let n = p.len();
    if n == 0 || n > MAX_N {
        return Err(SearchError::UnsupportedN { n });
    }
    let mut seen = 0u32;
    for &c in p {
        if c == 0 || c as usize > n || seen & (1 << c) != 0 {
            return Err(SearchError::TopSequenceNotPermutation);
        }
        seen |= 1 << c;
    }
    if p[n - 1] != 1 {
        return Err(SearchError::TopSequenceLastNotOne);
    }

    let mut slots = [0i8; MAX_N];
    for (i, slot) in slots.iter_mut().take(n).enumerate() {
        *slot = -((i + 1) as i8);
    }
    let mut assigned = [0u8; MAX_N];
    for &card in p {
        debug_assert!(slots[0] < 0);
        let position = (-slots[0]) as usize;
        assigned[position - 1] = card;
        slots[0] = card as i8;
        while slots[0] > 1 {
            let t = slots[0] as usize;
            slots[..t].reverse();
        }
    }
    Ok(Deck::new(assigned[..n].to_vec()).expect("lazy construction yields a permutation"))
}

/// Completed games kept by one worker: only ties of the local best survive,
/// and nothing below the incumbent at the time of completion is kept, so a
/// late incumbent raise can never lose a maximal deck within a worker.
#[derive(Debug, Default)]
pub(crate) struct RecordBuffer {
    pub best: Option<u32>,
    pub decks: Vec<Vec<Card>>,
}

impl RecordBuffer {
    pub fn offer(&mut self, steps: u32, cards: &[Card], incumbent: &Incumbent) {
        if steps < incumbent.read() {
            return;
        }
        self.absorb(steps, cards.to_vec());
        incumbent.raise(steps);
    }

    /// Merges an already-emitted record, keeping only ties of the best.
    pub fn absorb(&mut self, steps: u32, cards: Vec<Card>) {
        match self.best {
            Some(best) if steps < best => {}
            Some(best) if steps == best => self.decks.push(cards),
            _ => {
                self.best = Some(steps);
                self.decks.clear();
                self.decks.push(cards);
            }
        }
    }
}

/// One worker's traversal: local statistics and records, shared incumbent.
pub(crate) struct Explorer<'a> {
    pub n: usize,
    pub f_table: &'a FTable,
    pub incumbent: &'a Incumbent,
    pub prunes: Prunes,
    pub levels: [u64; MAX_N],
    pub records: RecordBuffer,
}

impl<'a> Explorer<'a> {
    pub fn new(n: usize, f_table: &'a FTable, incumbent: &'a Incumbent, prunes: Prunes) -> Self {
        Explorer {
            n,
            f_table,
            incumbent,
            prunes,
            levels: [0; MAX_N],
            records: RecordBuffer::default(),
        }
    }

    /// Candidate cards are the unused ones excluding 1, in ascending order.
    #[inline]
    fn candidates(&self, state: &LazyState) -> u32 {
        let all = ((1u32 << (self.n + 1)) - 1) & !0b11;
        all & !state.used
    }

    /// Depth-first traversal below `state`. The node itself is assumed
    /// already counted by the caller.
    pub fn explore(&mut self, state: &LazyState) {
        if state.depth as usize == self.n - 1 {
            // Single placeholder left: card 1 is forced, the game ends with
            // no further flips, and the assignment is the initial deck.
            let position = (-state.slots[0]) as usize;
            let steps = state.flips;
            if steps >= self.incumbent.read() {
                let mut cards = state.assigned;
                cards[position - 1] = 1;
                self.records.offer(steps, &cards[..self.n], self.incumbent);
            }
            return;
        }
        let bound = self.incumbent.read();
        let mut avail = self.candidates(state);
        while avail != 0 {
            let card = avail.trailing_zeros() as Card;
            avail &= avail - 1;
            if let Ok(child) = try_extend(state, card, self.n, self.f_table, bound, self.prunes) {
                self.levels[child.depth as usize] += 1;
                self.explore(&child);
            }
        }
    }
}

/// Runs the full single-threaded search with an externally supplied f-table.
pub fn run_search(n: usize, f_table: &FTable, config: &SearchConfig) -> SearchResult {
    assert!((1..=MAX_N).contains(&n));
    debug_assert!(f_table.max_m() >= n - 1);
    let incumbent = Incumbent::new(config.bound_mode, config.seed_bound);
    let mut explorer = Explorer::new(n, f_table, &incumbent, config.prunes);
    explorer.levels[0] = 1;
    explorer.explore(&LazyState::root(n));

    let Explorer { levels, records, .. } = explorer;
    finish(n, records, levels[..n].to_vec(), config)
}

pub(crate) fn finish(
    n: usize,
    records: RecordBuffer,
    levels: Vec<u64>,
    config: &SearchConfig,
) -> SearchResult {
    let mut decks: Vec<Deck> = records
        .decks
        .into_iter()
        .map(|cards| Deck::new(cards).expect("completed assignment is a permutation"))
        .collect();
    decks.sort();
    decks.dedup();
    SearchResult {
        n,
        max_steps: records.best,
        largest_decks: decks,
        stats: SearchStats::from_levels(levels, n),
        seed_bound: config.seed_bound,
        bound_mode: config.bound_mode,
    }
}

/// The maximum game length and every deck attaining it.
pub fn search(n: usize, config: &SearchConfig) -> Result<SearchResult, SearchError> {
    if !(1..=MAX_N).contains(&n) {
        return Err(SearchError::UnsupportedN { n });
    }
    let f_table = bounds::ensure_f_table(n, config.f_mode);
    Ok(run_search(n, &f_table, config))
}

/// `f(n)` by dynamic search against an existing table covering `0..n`.
/// Used to bootstrap f-tables in recomputed mode.
pub(crate) fn max_steps_with_table(n: usize, f_table: &FTable) -> u32 {
    let config = SearchConfig::default();
    run_search(n, f_table, &config)
        .max_steps
        .expect("dynamic search seeded at 0 always completes a game")
}
