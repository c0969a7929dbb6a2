//! Pattern-based FPT search.
//!
//! Users are processed one at a time. After processing a user set `U_i` the
//! pattern set `P` holds one pattern per class of valid partial plans over
//! `U_i` (modulo propagation pruning), each with a representative plan. The
//! next user extends every stored pattern by every nonempty set of steps it
//! is authorized for and that is still open; new classes are collected into
//! `P_u` and merged once the user is done.

mod heuristics;

use std::fmt;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Constraint, Plan, StepId, UserId, WorkflowInstance};
use crate::pattern::{Pattern, PatternSet};

pub use heuristics::{
    build_pairs, check_and_propagate, choose_next_user, choose_next_user_with, preprocess_for_user,
    prune_useless, CheckOutcome, ConstraintPair, UsefulChoice, UserView,
};
use heuristics::{AtMostTables, CoverIndex};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Drop users dominated by a user that produced no new pattern.
    pub enable_useless_pruning: bool,
    /// Propagate pairs of intersecting at-most constraints.
    pub enable_pair_propagation: bool,
    /// Reorder users by the useful / super-useful users found while
    /// propagating.
    pub enable_dynamic_order: bool,
    /// Single at-most propagation. Pair propagation and dynamic ordering
    /// depend on it; with it off every eligible candidate is kept.
    pub enable_atmost_propagation: bool,
    /// Reject a partial plan when an at-most constraint already has `r`
    /// distinct users on its scope and some scope step is still open: only
    /// new users remain, so that step can never be filled.
    pub enable_saturated_pruning: bool,
    pub useful_choice: UsefulChoice,
    /// Seeded shuffle of the initial user order; input order when `None`.
    pub user_order_seed: Option<u64>,
    /// Maximum number of candidate extensions examined.
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            enable_useless_pruning: true,
            enable_pair_propagation: true,
            enable_dynamic_order: true,
            enable_atmost_propagation: true,
            enable_saturated_pruning: true,
            useful_choice: UsefulChoice::default(),
            user_order_seed: None,
            node_limit: None,
            time_limit: None,
        }
    }
}

impl SolverConfig {
    /// Plain search: no pruning, propagation or reordering.
    pub fn plain() -> Self {
        SolverConfig {
            enable_useless_pruning: false,
            enable_pair_propagation: false,
            enable_dynamic_order: false,
            enable_atmost_propagation: false,
            enable_saturated_pruning: false,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Satisfiable,
    Unsatisfiable,
    BudgetExceeded,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Satisfiable => "sat",
            Outcome::Unsatisfiable => "unsat",
            Outcome::BudgetExceeded => "budget_exceeded",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub outcome: Outcome,
    /// Present iff `outcome` is satisfiable; always a valid complete plan.
    pub witness: Option<Plan>,
    /// Outer iterations run.
    pub users_processed: usize,
    /// Patterns stored when the search stopped, zero pattern included.
    pub patterns_generated: usize,
    /// Users whose iteration produced no new pattern.
    pub n_w: usize,
    /// Users removed as useless.
    pub n_useless: usize,
    pub n_users: usize,
    /// Candidate extensions examined.
    pub candidates: u64,
    pub elapsed: Duration,
}

impl SolveReport {
    /// `n: n_w→n_u`.
    pub fn user_triple(&self) -> String {
        format!("{}: {}→{}", self.n_users, self.n_w, self.n_useless)
    }
}

/// Solves `inst` to completion or until a budget runs out.
pub fn solve(inst: &WorkflowInstance, cfg: &SolverConfig) -> Result<SolveReport, SolveError> {
    let mut search = FptSearch::new(inst, cfg.clone())?;
    loop {
        match search.step() {
            Step::Extended { .. } | Step::NoExtension { .. } => {}
            Step::Finished => return Ok(search.into_report()),
        }
    }
}

/// What one outer iteration did.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Extended {
        user: UserId,
        new_patterns: usize,
    },
    NoExtension {
        user: UserId,
        removed: Vec<UserId>,
    },
    /// The search has stopped; see [`FptSearch::into_report`].
    Finished,
}

#[derive(Clone, Copy, Debug)]
struct Link {
    /// Arena slot of the plan this one extends; `u32::MAX` for the root.
    parent: u32,
    user: u32,
    assigned: u64,
}

struct AtLeastRow {
    r: u32,
    scope: u64,
}

/// Subsets of an `m`-element index set ordered by size, then value.
fn subset_order(m: usize) -> Vec<u32> {
    let mut subsets: Vec<u32> = (1..(1u32 << m)).collect();
    subsets.sort_by_key(|&x| (x.count_ones(), x));
    subsets
}

/// Spreads the low bits of `index_subset` onto the set bits of `positions`.
#[inline]
fn deposit(index_subset: u32, positions: &[u8]) -> u64 {
    let mut out = 0u64;
    let mut m = index_subset;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        m &= m - 1;
        out |= 1 << positions[i];
    }
    out
}

/// Step-wise driver of the search; [`solve`] runs it to completion.
pub struct FptSearch<'a> {
    inst: &'a WorkflowInstance,
    cfg: SolverConfig,
    full: u64,
    tables: AtMostTables,
    at_least: Vec<AtLeastRow>,
    /// Constraint index -> at-least table position.
    at_least_pos: Vec<usize>,
    patterns: PatternSet<u32>,
    arena: Vec<Link>,
    remaining: Vec<UserId>,
    useful: Vec<UserId>,
    super_useful: Vec<UserId>,
    subset_orders: Vec<Vec<u32>>,
    users_processed: usize,
    n_w: usize,
    n_useless: usize,
    candidates: u64,
    started: Instant,
    elapsed: Duration,
    outcome: Option<Outcome>,
    witness: Option<Plan>,
    pending_patterns: usize,
}

impl<'a> FptSearch<'a> {
    pub fn new(inst: &'a WorkflowInstance, cfg: SolverConfig) -> Result<Self, SolveError> {
        if cfg.node_limit == Some(0) {
            return Err(SolveError::InvalidConfig("node limit must be positive"));
        }
        if cfg.time_limit.is_some_and(|t| t.is_zero()) {
            return Err(SolveError::InvalidConfig("time limit must be positive"));
        }
        let pairs = build_pairs(inst.constraints());
        let tables = AtMostTables::new(inst, &pairs);
        let mut at_least = Vec::new();
        let mut at_least_pos = vec![usize::MAX; inst.constraints().len()];
        for (i, c) in inst.constraints().iter().enumerate() {
            if let Constraint::AtLeast { r, scope } = *c {
                at_least_pos[i] = at_least.len();
                at_least.push(AtLeastRow {
                    r,
                    scope: scope.bits(),
                });
            }
        }

        let mut remaining: Vec<UserId> = inst.users().collect();
        if let Some(seed) = cfg.user_order_seed {
            remaining.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }

        let mut patterns = PatternSet::new();
        patterns.insert(Pattern::zero(inst.k()), 0);
        let arena = vec![Link {
            parent: u32::MAX,
            user: u32::MAX,
            assigned: 0,
        }];

        let mut search = FptSearch {
            inst,
            full: inst.all_steps().bits(),
            tables,
            at_least,
            at_least_pos,
            patterns,
            arena,
            remaining,
            useful: Vec::new(),
            super_useful: Vec::new(),
            subset_orders: Vec::new(),
            users_processed: 0,
            n_w: 0,
            n_useless: 0,
            candidates: 0,
            started: Instant::now(),
            elapsed: Duration::ZERO,
            outcome: None,
            witness: None,
            pending_patterns: 0,
            cfg,
        };
        // With no steps the empty plan is already complete.
        if inst.k() == 0 {
            search.finish(Outcome::Satisfiable, Some(Plan::new(0)));
        }
        Ok(search)
    }

    /// Patterns currently stored, in lexicographic order.
    pub fn patterns(&self) -> impl Iterator<Item = &Pattern> {
        self.patterns.patterns()
    }

    pub fn pattern_count(&self) -> usize {
        self.patterns.len()
    }

    /// Representative plan stored for `pattern`.
    pub fn representative(&self, pattern: &Pattern) -> Option<Plan> {
        self.patterns
            .get(pattern)
            .map(|&slot| self.reconstruct(slot))
    }

    /// Users not yet processed or removed, in current order.
    pub fn remaining(&self) -> &[UserId] {
        &self.remaining
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    fn reconstruct(&self, slot: u32) -> Plan {
        let mut plan = Plan::new(self.inst.k());
        let mut cur = slot;
        while cur != u32::MAX {
            let link = self.arena[cur as usize];
            if link.parent == u32::MAX {
                break;
            }
            let parent = self.arena[link.parent as usize];
            let mut added = link.assigned & !parent.assigned;
            while added != 0 {
                let s = added.trailing_zeros();
                added &= added - 1;
                plan.assign(StepId(s), UserId(link.user));
            }
            cur = link.parent;
        }
        plan
    }

    fn finish(&mut self, outcome: Outcome, witness: Option<Plan>) {
        self.outcome = Some(outcome);
        self.witness = witness;
        self.elapsed = self.started.elapsed();
    }

    fn subset_order_for(&mut self, m: usize) -> &[u32] {
        while self.subset_orders.len() <= m {
            let next = subset_order(self.subset_orders.len());
            self.subset_orders.push(next);
        }
        &self.subset_orders[m]
    }

    /// Runs one outer iteration.
    pub fn step(&mut self) -> Step {
        if self.outcome.is_some() {
            return Step::Finished;
        }
        if self.remaining.is_empty() {
            self.finish(Outcome::Unsatisfiable, None);
            return Step::Finished;
        }
        if self.over_time() {
            self.finish(Outcome::BudgetExceeded, None);
            return Step::Finished;
        }
        if self.cfg.enable_dynamic_order {
            choose_next_user_with(
                self.cfg.useful_choice,
                &mut self.remaining,
                &self.useful,
                &self.super_useful,
            );
        }
        let u = self.remaining.remove(0);
        self.useful.clear();
        self.super_useful.clear();
        self.users_processed += 1;

        match self.extend_with(u) {
            Err(outcome) => {
                self.finish(outcome.0, outcome.1);
                Step::Finished
            }
            Ok(new) if new.is_empty() => {
                self.n_w += 1;
                let removed = if self.cfg.enable_useless_pruning {
                    prune_useless(self.inst, &mut self.remaining, u)
                } else {
                    Vec::new()
                };
                self.n_useless += removed.len();
                Step::NoExtension { user: u, removed }
            }
            Ok(new) => {
                let count = new.len();
                self.patterns.merge(new);
                Step::Extended {
                    user: u,
                    new_patterns: count,
                }
            }
        }
    }

    /// Inner loops for user `u`. Returns the new patterns, or the terminal
    /// outcome when a complete plan is found or a budget runs out.
    #[allow(clippy::type_complexity)]
    fn extend_with(&mut self, u: UserId) -> Result<PatternSet<u32>, (Outcome, Option<Plan>)> {
        let inst = self.inst;
        let auth = inst.auth(u).bits();
        let view = preprocess_for_user(inst, u);
        let ne_masks: Vec<u64> = view
            .not_equals
            .iter()
            .map(|&i| inst.constraints()[i].scope().bits())
            .collect();
        let eq_masks: Vec<u64> = view
            .equals
            .iter()
            .map(|&i| inst.constraints()[i].scope().bits())
            .collect();
        let least: Vec<usize> = view
            .at_least
            .iter()
            .map(|&i| self.at_least_pos[i])
            .collect();

        let mut cover = CoverIndex::new(inst, &self.remaining);
        debug_assert!(!cover.contains(u), "a processed user is never revisited");
        let propagate = self.cfg.enable_atmost_propagation;
        let pairs = self.cfg.enable_pair_propagation;
        let saturated = self.cfg.enable_saturated_pruning;

        let max_m = auth.count_ones() as usize;
        self.subset_order_for(max_m);
        let subset_orders = std::mem::take(&mut self.subset_orders);

        let n_most = self.tables.rows.len();
        let mut most_counts = vec![0u32; n_most];
        let mut least_counts = vec![0u32; least.len()];
        let mut tight = vec![0u64; n_most];
        let mut positions = [0u8; 64];
        let mut labels = [0u8; 64];
        let mut new_patterns: PatternSet<u32> = PatternSet::new();
        let mut useful = std::mem::take(&mut self.useful);
        let mut super_useful = std::mem::take(&mut self.super_useful);
        let k = inst.k();
        let mut result = Ok(());
        let mut work = 0u64;

        'patterns: for (pattern, &slot) in self.patterns.iter() {
            work += 1;
            if work & 0xff == 0 && self.over_time() {
                result = Err((Outcome::BudgetExceeded, None));
                break;
            }
            let assigned = self.arena[slot as usize].assigned;
            let open = auth & !assigned;
            if open == 0 {
                continue;
            }
            let x = pattern.entries();
            let blocks = pattern.block_count() as u32;

            for (j, row) in self.tables.rows.iter().enumerate() {
                most_counts[j] = label_count(x, row.scope & assigned);
            }
            for (j, &pos) in least.iter().enumerate() {
                least_counts[j] = label_count(x, self.at_least[pos].scope & assigned);
            }

            let mut m = 0;
            let mut bits = open;
            while bits != 0 {
                positions[m] = bits.trailing_zeros() as u8;
                bits &= bits - 1;
                m += 1;
            }

            'subsets: for &idx in &subset_orders[m] {
                self.candidates += 1;
                if let Some(limit) = self.cfg.node_limit {
                    if self.candidates > limit {
                        result = Err((Outcome::BudgetExceeded, None));
                        break 'patterns;
                    }
                }
                if self.candidates & 0xfff == 0 && self.over_time() {
                    result = Err((Outcome::BudgetExceeded, None));
                    break 'patterns;
                }
                let added = deposit(idx, &positions[..m]);
                let now = assigned | added;

                for &ne in &ne_masks {
                    if ne & added == ne {
                        continue 'subsets;
                    }
                }
                for &eq in &eq_masks {
                    let inside = eq & added;
                    // one end joins the new user, the other is already taken
                    if inside != 0 && inside != eq && eq & assigned != 0 {
                        continue 'subsets;
                    }
                }
                let rows = &self.tables.rows;
                let ok = self.tables.check(
                    now,
                    |j| most_counts[j] + (rows[j].scope & added != 0) as u32,
                    propagate,
                    propagate && pairs,
                    saturated,
                    &mut cover,
                    &mut tight,
                    &mut useful,
                    &mut super_useful,
                );
                if !ok {
                    continue;
                }
                for (j, &pos) in least.iter().enumerate() {
                    let row = &self.at_least[pos];
                    if row.scope & added == 0 {
                        continue;
                    }
                    let open_in_scope = (row.scope & !now).count_ones();
                    if least_counts[j] + 1 + open_in_scope < row.r {
                        continue 'subsets;
                    }
                }

                if now == self.full {
                    let mut plan = self.reconstruct(slot);
                    let mut a = added;
                    while a != 0 {
                        let s = a.trailing_zeros();
                        a &= a - 1;
                        plan.assign(StepId(s), u);
                    }
                    assert!(
                        inst.is_valid_complete(&plan),
                        "search produced an invalid witness: {plan}"
                    );
                    result = Err((Outcome::Satisfiable, Some(plan)));
                    break 'patterns;
                }

                labels[..k].copy_from_slice(x);
                let fresh = blocks as u8 + 1;
                let mut a = added;
                while a != 0 {
                    let s = a.trailing_zeros() as usize;
                    a &= a - 1;
                    labels[s] = fresh;
                }
                let next = Pattern::from_labels(&labels[..k]);
                if self.patterns.contains(&next) || new_patterns.contains(&next) {
                    continue;
                }
                let new_slot = self.arena.len() as u32;
                self.arena.push(Link {
                    parent: slot,
                    user: u.0,
                    assigned: now,
                });
                new_patterns.insert(next, new_slot);
            }
        }

        self.subset_orders = subset_orders;
        self.useful = useful;
        self.super_useful = super_useful;
        match result {
            Ok(()) => Ok(new_patterns),
            Err(e) => {
                self.pending_patterns = new_patterns.len();
                Err(e)
            }
        }
    }

    fn over_time(&self) -> bool {
        self.cfg
            .time_limit
            .is_some_and(|limit| self.started.elapsed() > limit)
    }

    pub fn into_report(self) -> SolveReport {
        let elapsed = if self.outcome.is_some() {
            self.elapsed
        } else {
            self.started.elapsed()
        };
        SolveReport {
            outcome: self.outcome.unwrap_or(Outcome::BudgetExceeded),
            witness: self.witness,
            users_processed: self.users_processed,
            patterns_generated: self.patterns.len() + self.pending_patterns,
            n_w: self.n_w,
            n_useless: self.n_useless,
            n_users: self.inst.n(),
            candidates: self.candidates,
            elapsed,
        }
    }
}

/// Number of distinct nonzero labels of `x` over the steps in `mask`.
#[inline]
fn label_count(x: &[u8], mask: u64) -> u32 {
    let mut seen = 0u64;
    let mut m = mask;
    while m != 0 {
        let s = m.trailing_zeros() as usize;
        m &= m - 1;
        seen |= 1 << (x[s] - 1);
    }
    seen.count_ones()
}
