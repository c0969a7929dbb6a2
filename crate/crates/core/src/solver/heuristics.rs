//! Constraint preprocessing, at-most propagation, useless-user pruning and
//! dynamic user ordering.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

use crate::model::{Constraint, Plan, StepId, StepSet, UserId, WorkflowInstance};

/// Two at-most constraints whose scopes intersect, with one common step
/// marked. Indices refer to the instance constraint list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstraintPair {
    pub c1: usize,
    pub c2: usize,
    pub marked_step: StepId,
}

/// One pair per unordered pair of intersecting at-most constraints; the
/// marked step is the lowest-indexed common step.
pub fn build_pairs(constraints: &[Constraint]) -> Vec<ConstraintPair> {
    let at_most: Vec<(usize, StepSet)> = constraints
        .iter()
        .enumerate()
        .filter_map(|(i, c)| match *c {
            Constraint::AtMost { scope, .. } => Some((i, scope)),
            _ => None,
        })
        .collect();
    let mut pairs = Vec::new();
    for (a, &(i, qi)) in at_most.iter().enumerate() {
        for &(j, qj) in &at_most[a + 1..] {
            if let Some(marked_step) = qi.intersection(qj).first() {
                pairs.push(ConstraintPair {
                    c1: i,
                    c2: j,
                    marked_step,
                });
            }
        }
    }
    pairs
}

/// Constraints relevant to extensions by one user. Indices refer to the
/// instance constraint list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UserView {
    /// Not-equals constraints with both steps in `A(u)`.
    pub not_equals: Vec<usize>,
    /// Equals constraints with at least one step in `A(u)`.
    pub equals: Vec<usize>,
    /// At-least constraints whose scope meets `A(u)`.
    pub at_least: Vec<usize>,
    /// Every at-most constraint; these are checked directly.
    pub at_most: Vec<usize>,
}

impl UserView {
    pub fn is_empty(&self) -> bool {
        self.not_equals.is_empty()
            && self.equals.is_empty()
            && self.at_least.is_empty()
            && self.at_most.is_empty()
    }
}

pub fn preprocess_for_user(inst: &WorkflowInstance, u: UserId) -> UserView {
    let auth = inst.auth(u);
    let mut view = UserView::default();
    for (i, c) in inst.constraints().iter().enumerate() {
        match c {
            Constraint::NotEquals(..) if c.scope().is_subset(auth) => view.not_equals.push(i),
            Constraint::Equals(..) if c.scope().intersects(auth) => view.equals.push(i),
            Constraint::AtLeast { scope, .. } if scope.intersects(auth) => view.at_least.push(i),
            Constraint::AtMost { .. } => view.at_most.push(i),
            _ => {}
        }
    }
    view
}

/// Removes from `remaining` every user whose authorizations are contained
/// in those of `failed`, a user whose iteration produced no new pattern.
/// Returns the removed users in list order.
pub fn prune_useless(
    inst: &WorkflowInstance,
    remaining: &mut Vec<UserId>,
    failed: UserId,
) -> Vec<UserId> {
    let dominating = inst.auth(failed);
    let mut removed = Vec::new();
    remaining.retain(|&v| {
        if inst.auth(v).is_subset(dominating) {
            removed.push(v);
            false
        } else {
            true
        }
    });
    removed
}

/// How the next user is picked from the users flagged during propagation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum UsefulChoice {
    /// First super-useful user, else first useful user.
    #[default]
    SuperUsefulFirst,
    /// First useful user, else first super-useful user.
    UsefulFirst,
}

/// Picks the first super-useful user still in `remaining`, else the first
/// useful one, else the head of the list, and moves it to the front.
pub fn choose_next_user(
    remaining: &mut Vec<UserId>,
    useful: &[UserId],
    super_useful: &[UserId],
) -> Option<UserId> {
    choose_next_user_with(
        UsefulChoice::SuperUsefulFirst,
        remaining,
        useful,
        super_useful,
    )
}

pub fn choose_next_user_with(
    policy: UsefulChoice,
    remaining: &mut Vec<UserId>,
    useful: &[UserId],
    super_useful: &[UserId],
) -> Option<UserId> {
    let (first, second) = match policy {
        UsefulChoice::SuperUsefulFirst => (super_useful, useful),
        UsefulChoice::UsefulFirst => (useful, super_useful),
    };
    let pos = first
        .iter()
        .chain(second)
        .find_map(|v| remaining.iter().position(|r| r == v))
        .or(if remaining.is_empty() { None } else { Some(0) })?;
    let chosen = remaining.remove(pos);
    remaining.insert(0, chosen);
    Some(chosen)
}

#[derive(Default)]
pub(crate) struct MaskHasher(u64);

impl Hasher for MaskHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0.rotate_left(8) ^ b as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        }
    }

    fn write_u64(&mut self, x: u64) {
        self.0 = (x ^ (x >> 29)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    }
}

pub(crate) type MaskMap<V> = HashMap<u64, V, BuildHasherDefault<MaskHasher>>;

/// Answers "first remaining user authorized for every step of a mask",
/// memoised for the lifetime of one outer iteration.
pub(crate) struct CoverIndex {
    users: Vec<(UserId, u64)>,
    memo: MaskMap<Option<UserId>>,
}

impl CoverIndex {
    pub(crate) fn new(inst: &WorkflowInstance, remaining: &[UserId]) -> CoverIndex {
        CoverIndex {
            users: remaining
                .iter()
                .map(|&v| (v, inst.auth(v).bits()))
                .collect(),
            memo: MaskMap::default(),
        }
    }

    pub(crate) fn contains(&self, u: UserId) -> bool {
        self.users.iter().any(|&(v, _)| v == u)
    }

    #[inline]
    pub(crate) fn first_cover(&mut self, mask: u64) -> Option<UserId> {
        let users = &self.users;
        *self.memo.entry(mask).or_insert_with(|| {
            users
                .iter()
                .find(|&&(_, auth)| mask & !auth == 0)
                .map(|&(v, _)| v)
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct AtMostRow {
    pub r: u32,
    pub scope: u64,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct PairRow {
    /// Positions in the at-most table.
    pub a: usize,
    pub b: usize,
    pub marked: u64,
}

/// At-most constraints and intersecting pairs in the form the inner loop
/// consumes.
pub(crate) struct AtMostTables {
    pub rows: Vec<AtMostRow>,
    pub pairs: Vec<PairRow>,
    /// `ne_adj[s]`: steps sharing a not-equals constraint with `s`.
    pub ne_adj: Vec<u64>,
}

impl AtMostTables {
    pub(crate) fn new(inst: &WorkflowInstance, pairs: &[ConstraintPair]) -> AtMostTables {
        let mut rows = Vec::new();
        let mut position = vec![usize::MAX; inst.constraints().len()];
        let mut ne_adj = vec![0u64; inst.k()];
        for (i, c) in inst.constraints().iter().enumerate() {
            match *c {
                Constraint::AtMost { r, scope } => {
                    position[i] = rows.len();
                    rows.push(AtMostRow {
                        r,
                        scope: scope.bits(),
                    });
                }
                Constraint::NotEquals(s, t) => {
                    ne_adj[s.index()] |= 1 << t.index();
                    ne_adj[t.index()] |= 1 << s.index();
                }
                _ => {}
            }
        }
        let pairs = pairs
            .iter()
            .map(|p| PairRow {
                a: position[p.c1],
                b: position[p.c2],
                marked: 1 << p.marked_step.index(),
            })
            .collect();
        AtMostTables {
            rows,
            pairs,
            ne_adj,
        }
    }

    #[inline]
    fn has_not_equals_within(&self, mask: u64) -> bool {
        let mut m = mask;
        while m != 0 {
            let s = m.trailing_zeros() as usize;
            m &= m - 1;
            if self.ne_adj[s] & mask != 0 {
                return true;
            }
        }
        false
    }

    /// Checks every at-most constraint against a candidate and propagates.
    ///
    /// `counts[j]` is the number of distinct users on the assigned part of
    /// row `j`'s scope and `assigned` the candidate's assigned steps.
    /// `tight` is scratch space of the same length as `rows`. Flags found
    /// during propagation go to `useful` / `super_useful` (first detection
    /// first); nothing is pushed when the candidate is rejected.
    ///
    /// The "single future user" inference relies on the search never
    /// revisiting a processed user: every user in the candidate is already
    /// processed, so each remaining user contributes at most one new block.
    #[allow(clippy::too_many_arguments)]
    #[inline]
    pub(crate) fn check(
        &self,
        assigned: u64,
        counts: impl Fn(usize) -> u32,
        propagate: bool,
        propagate_pairs: bool,
        saturated: bool,
        cover: &mut CoverIndex,
        tight: &mut [u64],
        useful: &mut Vec<UserId>,
        super_useful: &mut Vec<UserId>,
    ) -> bool {
        let mut new_useful = None;
        for (j, row) in self.rows.iter().enumerate() {
            let used = counts(j);
            if used > row.r {
                return false;
            }
            tight[j] = 0;
            // every later user is new to the plan, so a full scope stays shut
            if saturated && used == row.r && row.scope & !assigned != 0 {
                return false;
            }
            if !propagate || used + 1 != row.r {
                continue;
            }
            let open = row.scope & !assigned;
            if open.count_ones() < 2 {
                continue;
            }
            if self.has_not_equals_within(open) {
                return false;
            }
            match cover.first_cover(open) {
                None => return false,
                Some(v) => {
                    new_useful.get_or_insert(v);
                    tight[j] = open;
                }
            }
        }
        let mut new_super = None;
        if propagate && propagate_pairs {
            for pair in &self.pairs {
                let (qa, qb) = (tight[pair.a], tight[pair.b]);
                if qa == 0 || qb == 0 || pair.marked & assigned != 0 {
                    continue;
                }
                let open = qa | qb;
                if self.has_not_equals_within(open) {
                    return false;
                }
                match cover.first_cover(open) {
                    None => return false,
                    Some(v) => {
                        new_super.get_or_insert(v);
                    }
                }
            }
        }
        if let Some(v) = new_useful {
            if !useful.contains(&v) {
                useful.push(v);
            }
        }
        if let Some(v) = new_super {
            if !super_useful.contains(&v) {
                super_useful.push(v);
            }
        }
        true
    }
}

/// Result of checking one candidate plan.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckOutcome {
    pub eligible: bool,
    pub useful: Vec<UserId>,
    pub super_useful: Vec<UserId>,
}

/// Full eligibility check of `candidate` in the order not-equals / equals,
/// at-most with propagation, at-least, with `remaining_users` as the users
/// still available to extend it.
///
/// `remaining_users` must not contain any user used by `candidate`.
pub fn check_and_propagate(
    inst: &WorkflowInstance,
    candidate: &Plan,
    remaining_users: &[UserId],
    pairs: &[ConstraintPair],
) -> CheckOutcome {
    let used = candidate.users_used();
    assert!(
        remaining_users.iter().all(|v| !used.contains(v)),
        "propagation assumes remaining users are not yet in the plan"
    );
    let mut out = CheckOutcome::default();
    let cs = inst.constraints();
    for c in cs {
        if matches!(c, Constraint::NotEquals(..) | Constraint::Equals(..))
            && c.violated_by(candidate)
        {
            return out;
        }
    }
    let tables = AtMostTables::new(inst, pairs);
    let scopes: Vec<StepSet> = tables.rows.iter().map(|r| StepSet(r.scope)).collect();
    let mut cover = CoverIndex::new(inst, remaining_users);
    let mut tight = vec![0; tables.rows.len()];
    let assigned = candidate.assigned_steps().bits();
    let ok = tables.check(
        assigned,
        |j| candidate.distinct_users_on(scopes[j]) as u32,
        true,
        true,
        false,
        &mut cover,
        &mut tight,
        &mut out.useful,
        &mut out.super_useful,
    );
    if !ok {
        out.useful.clear();
        out.super_useful.clear();
        return out;
    }
    if cs
        .iter()
        .any(|c| matches!(c, Constraint::AtLeast { .. }) && c.violated_by(candidate))
    {
        out.useful.clear();
        out.super_useful.clear();
        return out;
    }
    out.eligible = true;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::instance1;

    fn steps(ids: &[u32]) -> StepSet {
        ids.iter().map(|&i| StepId(i - 1)).collect()
    }

    fn at_most(r: u32, ids: &[u32]) -> Constraint {
        Constraint::AtMost {
            r,
            scope: steps(ids),
        }
    }

    #[test]
    fn pairs_mark_lowest_common_step() {
        let cs = [at_most(3, &[1, 2, 3, 4, 5]), at_most(3, &[4, 5, 6, 7, 8])];
        assert_eq!(
            build_pairs(&cs),
            vec![ConstraintPair {
                c1: 0,
                c2: 1,
                marked_step: StepId(3)
            }]
        );
        let cs = [at_most(2, &[1, 2]), at_most(2, &[3, 4])];
        assert!(build_pairs(&cs).is_empty());
        let cs = [
            at_most(2, &[1, 2, 3]),
            Constraint::NotEquals(StepId(0), StepId(1)),
            at_most(2, &[3, 4, 5]),
            at_most(2, &[1, 5, 6]),
        ];
        let pairs = build_pairs(&cs);
        assert_eq!(pairs.len(), 3);
        assert_eq!(pairs[0].c2, 2);
    }

    #[test]
    fn preprocessing_views() {
        let inst = instance1();
        let v1 = preprocess_for_user(&inst, UserId(0));
        assert!(v1.not_equals.is_empty());
        assert_eq!(v1.equals, vec![0]);
        let v2 = preprocess_for_user(&inst, UserId(1));
        assert_eq!(v2.not_equals, vec![1, 2, 3]);

        let empty =
            WorkflowInstance::new(4, vec![StepSet::EMPTY], inst.constraints().to_vec()).unwrap();
        assert!(preprocess_for_user(&empty, UserId(0)).is_empty());
    }

    #[test]
    fn useless_pruning_uses_subset() {
        let auth = vec![steps(&[1, 2]), steps(&[1]), steps(&[1, 3]), steps(&[1, 2])];
        let inst = WorkflowInstance::new(3, auth, vec![]).unwrap();
        let mut remaining = vec![UserId(1), UserId(2), UserId(3)];
        let removed = prune_useless(&inst, &mut remaining, UserId(0));
        assert_eq!(removed, vec![UserId(1), UserId(3)]);
        assert_eq!(remaining, vec![UserId(2)]);
    }

    #[test]
    fn user_choice_order() {
        let mut remaining: Vec<UserId> = (1..=8).map(UserId).collect();
        let got = choose_next_user(&mut remaining, &[UserId(3)], &[UserId(7)]);
        assert_eq!(got, Some(UserId(7)));
        assert_eq!(remaining[0], UserId(7));

        let mut remaining: Vec<UserId> = (1..=8).map(UserId).collect();
        let got = choose_next_user(&mut remaining, &[UserId(3), UserId(5)], &[]);
        assert_eq!(got, Some(UserId(3)));
        assert_eq!(remaining[..2], [UserId(3), UserId(1)]);

        let mut remaining: Vec<UserId> = vec![UserId(4), UserId(2)];
        assert_eq!(choose_next_user(&mut remaining, &[], &[]), Some(UserId(4)));

        // flagged users that have since left the list are skipped
        let mut remaining: Vec<UserId> = vec![UserId(4), UserId(2)];
        assert_eq!(
            choose_next_user(&mut remaining, &[UserId(2)], &[UserId(9)]),
            Some(UserId(2))
        );
        assert_eq!(choose_next_user(&mut Vec::new(), &[], &[]), None);

        let mut remaining: Vec<UserId> = (1..=8).map(UserId).collect();
        let got = choose_next_user_with(
            UsefulChoice::UsefulFirst,
            &mut remaining,
            &[UserId(3)],
            &[UserId(7)],
        );
        assert_eq!(got, Some(UserId(3)));
    }

    /// Steps s1..s5 under (3,{s1..s5},<=), with s1 -> a, s2 -> b assigned.
    fn tight_fixture(extra: Vec<Constraint>, third_auth: StepSet) -> (WorkflowInstance, Plan) {
        let mut cs = vec![at_most(3, &[1, 2, 3, 4, 5])];
        cs.extend(extra);
        let auth = vec![steps(&[1]), steps(&[2]), third_auth];
        let inst = WorkflowInstance::new(5, auth, cs).unwrap();
        let mut plan = Plan::new(5);
        plan.assign(StepId(0), UserId(0));
        plan.assign(StepId(1), UserId(1));
        (inst, plan)
    }

    #[test]
    fn tight_at_most_without_cover_is_rejected() {
        let (inst, plan) = tight_fixture(vec![], steps(&[3, 4]));
        let out = check_and_propagate(&inst, &plan, &[UserId(2)], &[]);
        assert!(!out.eligible);
    }

    #[test]
    fn tight_at_most_with_cover_flags_useful() {
        let (inst, plan) = tight_fixture(vec![], steps(&[3, 4, 5]));
        let out = check_and_propagate(&inst, &plan, &[UserId(2)], &[]);
        assert!(out.eligible);
        assert_eq!(out.useful, vec![UserId(2)]);
        assert!(out.super_useful.is_empty());
    }

    #[test]
    fn tight_at_most_with_inner_not_equals_is_rejected() {
        let ne = Constraint::NotEquals(StepId(2), StepId(3));
        let (inst, plan) = tight_fixture(vec![ne], steps(&[3, 4, 5]));
        let out = check_and_propagate(&inst, &plan, &[UserId(2)], &[]);
        assert!(!out.eligible);
    }

    #[test]
    fn intersecting_pair_needs_common_cover() {
        // (2,{s1,s2,s3},<=) and (2,{s3,s4,s5},<=) with s1 and s5 on two users:
        // s2,s3,s4 must all go to one future user.
        let cs = vec![at_most(2, &[1, 2, 3]), at_most(2, &[3, 4, 5])];
        let pairs = build_pairs(&cs);
        let auth = vec![
            steps(&[1]),
            steps(&[5]),
            steps(&[2, 3]),
            steps(&[3, 4]),
            steps(&[2, 3, 4]),
        ];
        let inst = WorkflowInstance::new(5, auth, cs).unwrap();
        let mut plan = Plan::new(5);
        plan.assign(StepId(0), UserId(0));
        plan.assign(StepId(4), UserId(1));

        let out = check_and_propagate(&inst, &plan, &[UserId(2), UserId(3)], &pairs);
        assert!(!out.eligible);
        // without pair propagation the two single checks pass
        let out = check_and_propagate(&inst, &plan, &[UserId(2), UserId(3)], &[]);
        assert!(out.eligible);

        let out = check_and_propagate(&inst, &plan, &[UserId(2), UserId(3), UserId(4)], &pairs);
        assert!(out.eligible);
        assert_eq!(out.super_useful, vec![UserId(4)]);
        assert_eq!(out.useful, vec![UserId(2)]);
    }
}
