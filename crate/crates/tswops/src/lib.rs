//! Exhaustive search engine for Topswops.
//!
//! Topswops plays a deck of `n` distinct cards by repeatedly reversing the
//! top `k` cards, `k` being the current top card, until card 1 surfaces. This
//! crate computes `f(n)` — the maximum number of steps over all starting
//! decks (OEIS A000375) — and enumerates every deck attaining it, using a
//! lazy deck-construction depth-first search with derangement and
//! settled-boundary pruning, optionally split into independent subtree tasks
//! for parallel or multi-machine execution.
//!
//! ```
//! use tswops::game::{play, Deck};
//! use tswops::search::{search, SearchConfig};
//!
//! let deck: Deck = "3 1 4 5 2".parse()?;
//! assert_eq!(play(&deck).step_count, 7);
//!
//! let result = search(5, &SearchConfig::default())?;
//! assert_eq!(result.max_steps, Some(7));
//! assert!(result.largest_decks.contains(&deck));
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```
//!
//! The `book/` directory of the repository walks through the game, the
//! search, and the parallel machinery; its code snippets are compiled and run
//! as doc-tests via the hidden module below.

pub mod bounds;
pub mod game;
pub mod oracle;
pub mod parallel;
pub mod search;

pub use game::{Card, Deck, MAX_N};

#[cfg(doctest)]
mod book {
    //! Keeps the guide's code snippets honest: each chapter is compiled and
    //! executed by `cargo test --doc`.
    #[doc = include_str!("../../../book/src/game.md")]
    mod game {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/search.md")]
    mod search {}
    #[doc = include_str!("../../../book/src/parallel.md")]
    mod parallel {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/records.md")]
    mod records {}
}
