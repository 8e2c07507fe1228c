//! Split-level parallel execution.
//!
//! The search tree is truncated at a chosen level; each surviving node
//! becomes a task identified by its prefix of the candidate top sequence.
//! Tasks replay cheaply (at most `level` extensions), so the task file is a
//! few bytes per subtree and ports across machines. Workers pull tasks from
//! a shared queue; shard runs on other machines exchange result files and
//! are merged afterwards. A checkpoint log makes long runs resumable at task
//! granularity.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write as _};
use std::ops::Range;
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::bounds::{self, FTable};
use crate::game::{Card, Deck, MAX_N};
use crate::search::{
    self, try_extend, BoundMode, Explorer, Incumbent, LazyState, Prunes, RecordBuffer,
    SearchConfig, SearchError, SearchResult,
};

#[derive(Debug, Error)]
pub enum ParallelError {
    #[error("split level {level} out of range 1..={max} for n={n}", max = n - 1)]
    InvalidLevel { level: usize, n: usize },
    #[error("shard {index} of {count} is not a valid shard spec")]
    InvalidShardSpec { index: usize, count: usize },
    #[error("task file line {line}: {reason}")]
    TaskFileFormat { line: usize, reason: String },
    #[error("task {index} does not survive replay under its generation bound")]
    TaskPruned { index: usize },
    #[error("cannot merge zero shards")]
    EmptyMerge,
    #[error("shards disagree on run configuration: {0}")]
    MixedConfig(String),
    #[error("shard task ranges overlap at index {index}")]
    OverlappingRanges { index: usize },
    #[error("merge inputs do not cover tasks {missing:?}")]
    IncompleteCoverage { missing: Range<usize> },
    #[error("checkpoint belongs to a different run: expected {expected:?}, found {found:?}")]
    CheckpointMismatch { expected: String, found: String },
    #[error("checkpoint line {line}: {reason}")]
    CheckpointFormat { line: usize, reason: String },
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A frozen search-tree node: the first `level` cards of the candidate top
/// sequence, plus its position in lexicographic task order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub index: usize,
    pub prefix: Vec<Card>,
}

/// An ordered set of tasks for one run configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskSet {
    pub n: usize,
    pub level: usize,
    /// Static bound the tasks were generated under.
    pub seed_bound: u32,
    pub tasks: Vec<Task>,
}

/// Output of the split phase: the tasks plus the nodes accepted per level
/// while truncating the tree (levels `0..=level`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskSplit {
    pub set: TaskSet,
    pub level_counts: Vec<u64>,
}

/// Enumerates the depth-`level` nodes surviving both prunes under a fixed
/// seed bound, in lexicographic prefix order.
pub fn split_tasks(
    n: usize,
    level: usize,
    seed_bound: u32,
    f_table: &FTable,
) -> Result<TaskSplit, ParallelError> {
    split_tasks_with(n, level, seed_bound, f_table, Prunes::default())
}

pub(crate) fn split_tasks_with(
    n: usize,
    level: usize,
    seed_bound: u32,
    f_table: &FTable,
    prunes: Prunes,
) -> Result<TaskSplit, ParallelError> {
    if !(1..=MAX_N).contains(&n) {
        return Err(SearchError::UnsupportedN { n }.into());
    }
    if level < 1 || level > n - 1 {
        return Err(ParallelError::InvalidLevel { level, n });
    }
    let mut level_counts = vec![0u64; level + 1];
    level_counts[0] = 1;
    let mut tasks = Vec::new();
    let mut prefix = Vec::with_capacity(level);
    expand(
        n,
        level,
        seed_bound,
        f_table,
        prunes,
        &LazyState::root(n),
        &mut prefix,
        &mut level_counts,
        &mut tasks,
    );
    Ok(TaskSplit {
        set: TaskSet { n, level, seed_bound, tasks },
        level_counts,
    })
}

#[allow(clippy::too_many_arguments)]
fn expand(
    n: usize,
    level: usize,
    bound: u32,
    f_table: &FTable,
    prunes: Prunes,
    state: &LazyState,
    prefix: &mut Vec<Card>,
    level_counts: &mut [u64],
    tasks: &mut Vec<Task>,
) {
    if state.depth as usize == level {
        tasks.push(Task { index: tasks.len(), prefix: prefix.clone() });
        return;
    }
    let all = ((1u32 << (n + 1)) - 1) & !0b11;
    let mut avail = all & !state.used;
    while avail != 0 {
        let card = avail.trailing_zeros() as Card;
        avail &= avail - 1;
        if let Ok(child) = try_extend(state, card, n, f_table, bound, prunes) {
            level_counts[child.depth as usize] += 1;
            prefix.push(card);
            expand(n, level, bound, f_table, prunes, &child, prefix, level_counts, tasks);
            prefix.pop();
        }
    }
}

/// Rebuilds a task's search state by replaying its prefix under the
/// generation bound. A prune during replay means the task does not belong to
/// this configuration.
pub(crate) fn replay_task(
    set: &TaskSet,
    task: &Task,
    f_table: &FTable,
    prunes: Prunes,
) -> Result<LazyState, ParallelError> {
    let mut state = LazyState::root(set.n);
    for &card in &task.prefix {
        state = try_extend(&state, card, set.n, f_table, set.seed_bound, prunes)
            .map_err(|_| ParallelError::TaskPruned { index: task.index })?;
    }
    Ok(state)
}

const TASK_FILE_MAGIC: &str = "tswops-tasks v1";

impl TaskSet {
    /// Writes the task file: a header line, then one space-separated prefix
    /// per line in lexicographic order.
    pub fn write_to(&self, out: &mut dyn io::Write) -> io::Result<()> {
        writeln!(
            out,
            "{TASK_FILE_MAGIC} n={} level={} bound={}",
            self.n, self.level, self.seed_bound
        )?;
        for task in &self.tasks {
            let line: Vec<String> = task.prefix.iter().map(|c| c.to_string()).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_from(input: &mut dyn io::BufRead) -> Result<TaskSet, ParallelError> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| ParallelError::TaskFileFormat {
                line: 1,
                reason: "missing header".into(),
            })??;
        let (n, level, seed_bound) = parse_task_header(&header)?;

        let mut tasks = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut prefix = Vec::with_capacity(level);
            for tok in line.split_whitespace() {
                let card: Card = tok.parse().map_err(|_| ParallelError::TaskFileFormat {
                    line: i + 2,
                    reason: format!("malformed card {tok:?}"),
                })?;
                if card < 2 || card as usize > n || prefix.contains(&card) {
                    return Err(ParallelError::TaskFileFormat {
                        line: i + 2,
                        reason: format!("card {card} invalid in a prefix for n={n}"),
                    });
                }
                prefix.push(card);
            }
            if prefix.len() != level {
                return Err(ParallelError::TaskFileFormat {
                    line: i + 2,
                    reason: format!("expected {level} cards, found {}", prefix.len()),
                });
            }
            tasks.push(Task { index: tasks.len(), prefix });
        }
        Ok(TaskSet { n, level, seed_bound, tasks })
    }
}

fn parse_task_header(header: &str) -> Result<(usize, usize, u32), ParallelError> {
    let bad = |reason: &str| ParallelError::TaskFileFormat { line: 1, reason: reason.into() };
    let rest = header
        .strip_prefix(TASK_FILE_MAGIC)
        .ok_or_else(|| bad("not a tswops-tasks v1 file"))?;
    let mut n = None;
    let mut level = None;
    let mut bound = None;
    for field in rest.split_whitespace() {
        let (key, value) = field.split_once('=').ok_or_else(|| bad("malformed header field"))?;
        match key {
            "n" => n = value.parse().ok(),
            "level" => level = value.parse().ok(),
            "bound" => bound = value.parse().ok(),
            _ => return Err(bad(&format!("unknown header field {key:?}"))),
        }
    }
    match (n, level, bound) {
        (Some(n), Some(level), Some(bound)) => Ok((n, level, bound)),
        _ => Err(bad("header must carry n=, level= and bound=")),
    }
}

/// The merged outcome of running a contiguous slice of the task list.
#[derive(Debug, Clone, PartialEq)]
pub struct ShardResult {
    pub n: usize,
    pub level: usize,
    pub seed_bound: u32,
    pub bound_mode: BoundMode,
    /// Half-open range of task indices this shard covered.
    pub task_range: Range<usize>,
    /// Best completed game in the shard, if any record survived the bound.
    pub best: Option<u32>,
    /// Decks tying `best`, sorted.
    pub decks: Vec<Deck>,
    /// Worker-side per-level counts; entries `0..=level` stay zero because
    /// the split phase owns those levels.
    pub level_counts: Vec<u64>,
}

/// Worker-pool options for executing tasks.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub threads: usize,
    pub bound_mode: BoundMode,
    pub prunes: Prunes,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            threads: 1,
            bound_mode: BoundMode::Static,
            prunes: Prunes::default(),
        }
    }
}

/// The contiguous slice of task indices belonging to shard `index` of
/// `count` equal-as-possible shards.
pub fn shard_range(total: usize, index: usize, count: usize) -> Result<Range<usize>, ParallelError> {
    if count == 0 || index >= count {
        return Err(ParallelError::InvalidShardSpec { index, count });
    }
    Ok(total * index / count..total * (index + 1) / count)
}

/// Executes `set.tasks[range]` on a pool of `opts.threads` workers.
///
/// In dynamic mode every worker shares one incumbent seeded at the set's
/// bound; in static mode the bound never moves. With a checkpoint log, each
/// finished task is appended to the log and tasks already recorded there are
/// not re-run.
pub fn run_tasks(
    set: &TaskSet,
    range: Range<usize>,
    f_table: &FTable,
    opts: &RunOptions,
    checkpoint: Option<&CheckpointLog>,
) -> Result<ShardResult, ParallelError> {
    let n = set.n;
    let tasks = &set.tasks[range.clone()];
    let incumbent = Incumbent::new(opts.bound_mode, set.seed_bound);
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);

    let mut levels = vec![0u64; n];
    let mut records = RecordBuffer::default();

    // fold in tasks already completed in a previous run
    if let Some(log) = checkpoint {
        let covered = &log.header.task_range;
        if range.start < covered.start || range.end > covered.end {
            return Err(ParallelError::CheckpointMismatch {
                expected: format!("task range within {covered:?}"),
                found: format!("{range:?}"),
            });
        }
        for (_, done) in log.completed.range(range.clone()) {
            for (i, count) in done.level_counts.iter().enumerate() {
                levels[i] += count;
            }
            for (steps, cards) in &done.records {
                records.absorb(*steps, cards.clone());
            }
        }
    }

    let workers = opts.threads.max(1).min(tasks.len().max(1));
    let results = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                let incumbent = &incumbent;
                let next = &next;
                let abort = &abort;
                scope.spawn(move || -> Result<([u64; MAX_N], RecordBuffer), ParallelError> {
                    let mut worker_levels = [0u64; MAX_N];
                    let mut worker_records = RecordBuffer::default();
                    loop {
                        if abort.load(Ordering::Relaxed) {
                            break;
                        }
                        let slot = next.fetch_add(1, Ordering::Relaxed);
                        if slot >= tasks.len() {
                            break;
                        }
                        let task = &tasks[slot];
                        if checkpoint.is_some_and(|log| log.is_completed(task.index)) {
                            continue;
                        }
                        let state = match replay_task(set, task, f_table, opts.prunes) {
                            Ok(state) => state,
                            Err(err) => {
                                abort.store(true, Ordering::Relaxed);
                                return Err(err);
                            }
                        };
                        let mut explorer = Explorer::new(n, f_table, incumbent, opts.prunes);
                        explorer.explore(&state);
                        if let Some(log) = checkpoint {
                            if let Err(err) = log.record_task(task.index, &explorer) {
                                abort.store(true, Ordering::Relaxed);
                                return Err(err.into());
                            }
                        }
                        for (i, count) in explorer.levels[..n].iter().enumerate() {
                            worker_levels[i] += count;
                        }
                        let best = explorer.records.best;
                        for deck in explorer.records.decks {
                            worker_records.absorb(best.unwrap(), deck);
                        }
                    }
                    Ok((worker_levels, worker_records))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect::<Vec<_>>()
    });

    for result in results {
        let (worker_levels, worker_records) = result?;
        for (i, count) in worker_levels[..n].iter().enumerate() {
            levels[i] += count;
        }
        if let Some(best) = worker_records.best {
            for deck in worker_records.decks {
                records.absorb(best, deck);
            }
        }
    }

    let mut decks: Vec<Deck> = records
        .decks
        .into_iter()
        .map(|cards| Deck::new(cards).expect("completed assignment is a permutation"))
        .collect();
    decks.sort();
    decks.dedup();

    Ok(ShardResult {
        n,
        level: set.level,
        seed_bound: set.seed_bound,
        bound_mode: opts.bound_mode,
        task_range: range,
        best: records.best,
        decks,
        level_counts: levels,
    })
}

/// Merges disjoint shards of one run into the final result.
///
/// The split-phase node counts (levels `0..=level`) are reconstructed by
/// re-running the deterministic split, and the shards must jointly cover
/// every task index. Associative and commutative over shards.
pub fn merge_shards(
    shards: &[ShardResult],
    f_table: &FTable,
) -> Result<SearchResult, ParallelError> {
    let first = shards.first().ok_or(ParallelError::EmptyMerge)?;
    for s in shards {
        if s.n != first.n || s.seed_bound != first.seed_bound || s.level != first.level {
            return Err(ParallelError::MixedConfig(format!(
                "n={}/level={}/bound={} vs n={}/level={}/bound={}",
                first.n, first.level, first.seed_bound, s.n, s.level, s.seed_bound
            )));
        }
        if s.bound_mode != first.bound_mode {
            return Err(ParallelError::MixedConfig("bound modes differ".into()));
        }
    }

    let mut ranges: Vec<Range<usize>> = shards.iter().map(|s| s.task_range.clone()).collect();
    ranges.sort_by_key(|r| r.start);
    let mut covered = 0usize;
    for r in &ranges {
        if r.start < covered {
            return Err(ParallelError::OverlappingRanges { index: r.start });
        }
        if r.start > covered {
            return Err(ParallelError::IncompleteCoverage { missing: covered..r.start });
        }
        covered = r.end.max(covered);
    }
    let split = split_tasks(first.n, first.level, first.seed_bound, f_table)?;
    let total_tasks = split.set.tasks.len();
    if covered != total_tasks {
        return Err(ParallelError::IncompleteCoverage { missing: covered..total_tasks });
    }

    let mut levels = vec![0u64; first.n];
    levels[..=first.level].copy_from_slice(&split.level_counts);
    let mut records = RecordBuffer::default();
    for s in shards {
        for (i, count) in s.level_counts.iter().enumerate() {
            levels[i] += count;
        }
        if let Some(best) = s.best {
            for deck in &s.decks {
                records.absorb(best, deck.cards().to_vec());
            }
        }
    }

    let config = SearchConfig {
        seed_bound: first.seed_bound,
        bound_mode: first.bound_mode,
        ..SearchConfig::default()
    };
    Ok(search::finish(first.n, records, levels, &config))
}

/// Configuration for a full (possibly split) in-process run.
#[derive(Debug, Clone, Copy)]
pub struct ParallelConfig {
    pub threads: usize,
    /// 0 means no split: a plain single-threaded search.
    pub split_level: usize,
    pub search: SearchConfig,
}

impl ParallelConfig {
    /// Desk defaults: every available core, split at level 2 once the tree is
    /// big enough to be worth it, dynamic bound from 0, trusted table.
    pub fn defaults_for(n: usize) -> Self {
        ParallelConfig {
            threads: std::thread::available_parallelism().map_or(1, |p| p.get()),
            split_level: if n >= 14 { 2 } else { 0 },
            search: SearchConfig::default(),
        }
    }
}

/// Full search via split-level parallelism: truncate, execute every task on
/// the worker pool, merge. `split_level` 0 falls back to the plain
/// single-threaded search.
pub fn run_parallel(n: usize, config: &ParallelConfig) -> Result<SearchResult, ParallelError> {
    if !(1..=MAX_N).contains(&n) {
        return Err(SearchError::UnsupportedN { n }.into());
    }
    let f_table = bounds::ensure_f_table(n, config.search.f_mode);
    if config.split_level == 0 || n == 1 {
        return Ok(search::run_search(n, &f_table, &config.search));
    }
    let level = config.split_level.min(n - 1);
    let split = split_tasks_with(n, level, config.search.seed_bound, &f_table, config.search.prunes)?;
    let opts = RunOptions {
        threads: config.threads,
        bound_mode: config.search.bound_mode,
        prunes: config.search.prunes,
    };
    let total = split.set.tasks.len();
    let shard = run_tasks(&split.set, 0..total, &f_table, &opts, None)?;

    let mut levels = vec![0u64; n];
    levels[..=level].copy_from_slice(&split.level_counts);
    for (i, count) in shard.level_counts.iter().enumerate() {
        levels[i] += count;
    }
    let mut records = RecordBuffer::default();
    if let Some(best) = shard.best {
        for deck in shard.decks {
            records.absorb(best, deck.into_cards());
        }
    }
    Ok(search::finish(n, records, levels, &config.search))
}

const CHECKPOINT_MAGIC: &str = "tswops-checkpoint v1";

/// Identity of the run a checkpoint belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckpointHeader {
    pub n: usize,
    pub level: usize,
    pub seed_bound: u32,
    pub task_range: Range<usize>,
}

impl CheckpointHeader {
    fn line(&self) -> String {
        format!(
            "{CHECKPOINT_MAGIC} n={} level={} bound={} range={}..{}",
            self.n, self.level, self.seed_bound, self.task_range.start, self.task_range.end
        )
    }
}

#[derive(Debug, Clone, Default)]
struct CompletedTask {
    records: Vec<(u32, Vec<Card>)>,
    level_counts: Vec<u64>,
}

/// Append-only log of completed tasks.
///
/// Each finished task contributes its record decks, its per-level node
/// counts, and a final `done` line that commits the entry; an interrupted
/// write leaves a trailing fragment that is ignored on reload, so resuming
/// re-runs exactly the uncommitted tasks.
pub struct CheckpointLog {
    header: CheckpointHeader,
    completed: BTreeMap<usize, CompletedTask>,
    writer: Mutex<BufWriter<File>>,
}

impl CheckpointLog {
    /// Opens or creates the log at `path`, refusing to resume a file written
    /// for a different run configuration.
    pub fn open(path: &Path, header: CheckpointHeader) -> Result<Self, ParallelError> {
        let completed = match std::fs::metadata(path) {
            Ok(meta) if meta.len() > 0 => {
                let file = File::open(path)?;
                Self::parse(BufReader::new(file), &header)?
            }
            _ => BTreeMap::new(),
        };
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        if file.metadata()?.len() == 0 {
            writeln!(file, "{}", header.line())?;
            file.flush()?;
        }
        Ok(CheckpointLog {
            header,
            completed,
            writer: Mutex::new(BufWriter::new(file)),
        })
    }

    fn parse(
        reader: impl BufRead,
        expected: &CheckpointHeader,
    ) -> Result<BTreeMap<usize, CompletedTask>, ParallelError> {
        let mut lines = reader.lines().enumerate();
        let (_, first) = lines.next().ok_or_else(|| ParallelError::CheckpointFormat {
            line: 1,
            reason: "empty checkpoint".into(),
        })?;
        let first = first?;
        if first != expected.line() {
            return Err(ParallelError::CheckpointMismatch {
                expected: expected.line(),
                found: first,
            });
        }

        let mut completed = BTreeMap::new();
        let mut pending: BTreeMap<usize, CompletedTask> = BTreeMap::new();
        // a torn trailing write is expected after a crash; anything
        // unparseable BEFORE parseable lines is real corruption
        let mut torn: Option<usize> = None;
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let kind = fields.next().expect("non-empty line has a first token");
            let parsed: Option<()> = (|| {
                let index: usize = fields.next()?.parse().ok()?;
                match kind {
                    "deck" => {
                        let steps: u32 = fields.next()?.parse().ok()?;
                        let cards: Option<Vec<Card>> =
                            fields.map(|t| t.parse().ok()).collect();
                        pending.entry(index).or_default().records.push((steps, cards?));
                    }
                    "levels" => {
                        let counts: Option<Vec<u64>> =
                            fields.map(|t| t.parse().ok()).collect();
                        pending.entry(index).or_default().level_counts = counts?;
                    }
                    "done" => {
                        let _best = fields.next()?;
                        let _total: u64 = fields.next()?.parse().ok()?;
                        let entry = pending.remove(&index)?;
                        if entry.level_counts.is_empty() {
                            return None;
                        }
                        completed.insert(index, entry);
                    }
                    _ => return None,
                }
                Some(())
            })();
            match (parsed, torn) {
                (Some(()), Some(line)) => {
                    return Err(ParallelError::CheckpointFormat {
                        line: line + 1,
                        reason: "unparseable entry followed by valid entries".into(),
                    })
                }
                (Some(()), None) => {}
                (None, _) => torn = torn.or(Some(i)),
            }
        }
        Ok(completed)
    }

    pub fn is_completed(&self, index: usize) -> bool {
        self.completed.contains_key(&index)
    }

    pub fn completed_count(&self) -> usize {
        self.completed.len()
    }

    /// Tasks in `set` (restricted to this log's range) that still need to
    /// run. Resuming with an empty log returns everything; a fully written
    /// log returns nothing.
    pub fn pending<'t>(&self, set: &'t TaskSet) -> Vec<&'t Task> {
        set.tasks[self.header.task_range.clone()]
            .iter()
            .filter(|t| !self.is_completed(t.index))
            .collect()
    }

    fn record_task(&self, index: usize, explorer: &Explorer<'_>) -> io::Result<()> {
        let n = explorer.n;
        let mut out = self.writer.lock().expect("checkpoint writer poisoned");
        for cards in &explorer.records.decks {
            let steps = explorer.records.best.expect("records imply a best");
            let rendered: Vec<String> = cards.iter().map(|c| c.to_string()).collect();
            writeln!(out, "deck {index} {steps} {}", rendered.join(" "))?;
        }
        let rendered: Vec<String> = explorer.levels[..n].iter().map(|c| c.to_string()).collect();
        writeln!(out, "levels {index} {}", rendered.join(" "))?;
        let best = match explorer.records.best {
            Some(best) => best.to_string(),
            None => "-".to_string(),
        };
        let total: u64 = explorer.levels[..n].iter().sum();
        writeln!(out, "done {index} {best} {total}")?;
        out.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{ensure_f_table, known_f, FMode};
    use crate::search::{search, SearchConfig};

    fn table(n: usize) -> FTable {
        ensure_f_table(n, FMode::Trusted)
    }

    #[test]
    fn split_five_cards_level_one() {
        let split = split_tasks(5, 1, 7, &table(5)).unwrap();
        let prefixes: Vec<Vec<u8>> = split.set.tasks.iter().map(|t| t.prefix.clone()).collect();
        // playing 5 first settles it immediately and is pruned by the bound
        assert_eq!(prefixes, vec![vec![2], vec![3], vec![4]]);
        assert_eq!(split.level_counts, vec![1, 3]);
    }

    #[test]
    fn split_rejects_bad_levels() {
        assert!(matches!(
            split_tasks(5, 0, 7, &table(5)),
            Err(ParallelError::InvalidLevel { .. })
        ));
        assert!(matches!(
            split_tasks(5, 5, 7, &table(5)),
            Err(ParallelError::InvalidLevel { .. })
        ));
    }

    #[test]
    fn split_count_matches_single_threaded_level_counts() {
        let bound = known_f(9).unwrap();
        let config = SearchConfig {
            seed_bound: bound,
            bound_mode: BoundMode::Static,
            ..SearchConfig::default()
        };
        let single = search(9, &config).unwrap();
        for level in 1..=3 {
            let split = split_tasks(9, level, bound, &table(9)).unwrap();
            assert_eq!(
                split.set.tasks.len() as u64,
                single.stats.level_counts[level],
                "level {level}"
            );
            assert_eq!(split.level_counts, single.stats.level_counts[..=level]);
        }
    }

    #[test]
    fn task_file_round_trip() {
        let split = split_tasks(7, 2, 16, &table(7)).unwrap();
        let mut buf = Vec::new();
        split.set.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("tswops-tasks v1 n=7 level=2 bound=16\n"));
        let parsed = TaskSet::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(parsed, split.set);
    }

    #[test]
    fn task_file_rejects_garbage() {
        let mut bad = "tswops-tasks v1 n=7 level=2 bound=16\n2 x\n".as_bytes();
        assert!(matches!(
            TaskSet::read_from(&mut bad),
            Err(ParallelError::TaskFileFormat { line: 2, .. })
        ));
        let mut bad = "not a task file\n".as_bytes();
        assert!(matches!(
            TaskSet::read_from(&mut bad),
            Err(ParallelError::TaskFileFormat { line: 1, .. })
        ));
    }

    #[test]
    fn shard_ranges_partition_the_tasks() {
        let ranges: Vec<_> = (0..4).map(|i| shard_range(10, i, 4).unwrap()).collect();
        assert_eq!(ranges, vec![0..2, 2..5, 5..7, 7..10]);
        assert!(shard_range(10, 4, 4).is_err());
        assert!(shard_range(10, 0, 0).is_err());
    }

    #[test]
    fn parallel_run_matches_single_threaded() {
        let config = SearchConfig {
            seed_bound: known_f(10).unwrap(),
            bound_mode: BoundMode::Static,
            ..SearchConfig::default()
        };
        let single = search(10, &config).unwrap();
        for (threads, level) in [(2, 1), (3, 2), (2, 4)] {
            let parallel = run_parallel(
                10,
                &ParallelConfig { threads, split_level: level, search: config },
            )
            .unwrap();
            assert_eq!(parallel.max_steps, single.max_steps);
            assert_eq!(parallel.largest_decks, single.largest_decks);
            assert_eq!(parallel.stats, single.stats, "threads={threads} level={level}");
        }
    }

    #[test]
    fn dynamic_parallel_run_finds_the_maximum() {
        let result = run_parallel(
            5,
            &ParallelConfig {
                threads: 2,
                split_level: 1,
                search: SearchConfig::default(),
            },
        )
        .unwrap();
        assert_eq!(result.max_steps, Some(7));
    }

    #[test]
    fn merge_keeps_only_the_global_maximum() {
        let f = table(10);
        let split = split_tasks(10, 2, 38, &f).unwrap();
        let total = split.set.tasks.len();
        let opts = RunOptions { threads: 2, ..RunOptions::default() };
        let lo = run_tasks(&split.set, 0..total / 2, &f, &opts, None).unwrap();
        let hi = run_tasks(&split.set, total / 2..total, &f, &opts, None).unwrap();
        let merged = merge_shards(&[hi, lo], &f).unwrap();

        let single = search(
            10,
            &SearchConfig {
                seed_bound: 38,
                bound_mode: BoundMode::Static,
                ..SearchConfig::default()
            },
        )
        .unwrap();
        assert_eq!(merged.max_steps, single.max_steps);
        assert_eq!(merged.largest_decks, single.largest_decks);
        assert_eq!(merged.stats, single.stats);
    }

    #[test]
    fn merge_is_split_invariant() {
        let f = table(9);
        let split = split_tasks(9, 2, 30, &f).unwrap();
        let total = split.set.tasks.len();
        let opts = RunOptions::default();
        let merge_ways = |ways: usize| {
            let shards: Vec<_> = (0..ways)
                .map(|i| {
                    let range = shard_range(total, i, ways).unwrap();
                    run_tasks(&split.set, range, &f, &opts, None).unwrap()
                })
                .collect();
            merge_shards(&shards, &f).unwrap()
        };
        assert_eq!(merge_ways(2), merge_ways(4));
    }

    #[test]
    fn merge_validates_inputs() {
        let f = table(6);
        let split = split_tasks(6, 1, 10, &f).unwrap();
        let total = split.set.tasks.len();
        let opts = RunOptions::default();
        let all = run_tasks(&split.set, 0..total, &f, &opts, None).unwrap();

        assert!(matches!(merge_shards(&[], &f), Err(ParallelError::EmptyMerge)));

        let mut overlapping = all.clone();
        overlapping.task_range = 0..1;
        assert!(matches!(
            merge_shards(&[all.clone(), overlapping], &f),
            Err(ParallelError::OverlappingRanges { .. })
        ));

        let mut partial = all.clone();
        partial.task_range = 0..total - 1;
        assert!(matches!(
            merge_shards(&[partial], &f),
            Err(ParallelError::IncompleteCoverage { .. })
        ));

        let mut other = all.clone();
        other.n = 7;
        assert!(matches!(
            merge_shards(&[all.clone(), other], &f),
            Err(ParallelError::MixedConfig(_))
        ));

        // single shard covering everything is the identity
        let merged = merge_shards(&[all.clone()], &f).unwrap();
        assert_eq!(merged.max_steps, all.best);
    }

    #[test]
    fn checkpoint_resume_completes_an_interrupted_run() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ckpt");
        let f = table(9);
        let bound = known_f(9).unwrap();
        let split = split_tasks(9, 2, bound, &f).unwrap();
        let total = split.set.tasks.len();
        let header = CheckpointHeader {
            n: 9,
            level: 2,
            seed_bound: bound,
            task_range: 0..total,
        };
        let opts = RunOptions { threads: 2, ..RunOptions::default() };

        // run only a leading slice, as if the rest was killed
        {
            let log = CheckpointLog::open(&path, header.clone()).unwrap();
            assert_eq!(log.pending(&split.set).len(), total);
            let _ = run_tasks(&split.set, 0..total / 3, &f, &opts, Some(&log)).unwrap();
        }

        // resume over the full range; completed tasks are not re-run
        let log = CheckpointLog::open(&path, header.clone()).unwrap();
        assert_eq!(log.completed_count(), total / 3);
        let resumed = run_tasks(&split.set, 0..total, &f, &opts, Some(&log)).unwrap();

        let uninterrupted = run_tasks(&split.set, 0..total, &f, &opts, None).unwrap();
        assert_eq!(resumed, uninterrupted);

        // a fully written log leaves nothing pending and reruns are no-ops
        let log = CheckpointLog::open(&path, header).unwrap();
        assert!(log.pending(&split.set).is_empty());
        let rerun = run_tasks(&split.set, 0..total, &f, &opts, Some(&log)).unwrap();
        assert_eq!(rerun, uninterrupted);
    }

    #[test]
    fn checkpoint_refuses_mismatched_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ckpt");
        let header = CheckpointHeader { n: 9, level: 2, seed_bound: 30, task_range: 0..10 };
        drop(CheckpointLog::open(&path, header.clone()).unwrap());
        let other = CheckpointHeader { seed_bound: 29, ..header };
        assert!(matches!(
            CheckpointLog::open(&path, other),
            Err(ParallelError::CheckpointMismatch { .. })
        ));
    }
}
