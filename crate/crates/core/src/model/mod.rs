//! Workflow instances, plans and their validity semantics.
//!
//! Steps and users are dense 0-based ids internally and are rendered as
//! `s1..sk` / `u1..un` in every text format.

mod format;
mod stepset;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use format::{parse_instance, serialize_instance};
pub use stepset::{StepSet, StepSetIter, MAX_STEPS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StepId(pub u32);

impl StepId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StepId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0 + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UserId(pub u32);

impl UserId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u{}", self.0 + 1)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("step s{} out of range (instance has {k} steps)", .index + 1)]
    StepOutOfRange { index: usize, k: usize },
    #[error("user u{} out of range (instance has {n} users)", .index + 1)]
    UserOutOfRange { index: usize, n: usize },
    #[error("malformed constraint {constraint}: {reason}")]
    MalformedConstraint { constraint: String, reason: String },
    #[error("{k} steps exceeds the supported maximum of {MAX_STEPS}")]
    TooManySteps { k: usize },
    #[error("authorization list has {got} entries, expected one per user ({n})")]
    AuthorizationCount { got: usize, n: usize },
}

impl ModelError {
    /// Attach a line number to an error raised while reading a directive.
    pub(crate) fn at_line(self, line: usize) -> ModelError {
        match self {
            ModelError::Syntax { line: 0, message } => ModelError::Syntax { line, message },
            e @ ModelError::Syntax { .. } => e,
            other => ModelError::Syntax {
                line,
                message: other.to_string(),
            },
        }
    }
}

/// One of the four user-independent constraint forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// The two steps must be performed by different users.
    NotEquals(StepId, StepId),
    /// The two steps must be performed by the same user.
    Equals(StepId, StepId),
    /// At most `r` distinct users perform the steps of `scope`.
    AtMost { r: u32, scope: StepSet },
    /// At least `r` distinct users perform the steps of `scope`.
    AtLeast { r: u32, scope: StepSet },
}

impl Constraint {
    /// All steps the constraint mentions.
    pub fn scope(&self) -> StepSet {
        match *self {
            Constraint::NotEquals(s, t) | Constraint::Equals(s, t) => {
                StepSet::singleton(s).union(StepSet::singleton(t))
            }
            Constraint::AtMost { scope, .. } | Constraint::AtLeast { scope, .. } => scope,
        }
    }

    pub fn check_well_formed(&self, k: usize) -> Result<(), ModelError> {
        let scope = self.scope();
        if let Some(bad) = scope.iter().find(|s| s.index() >= k) {
            return Err(ModelError::StepOutOfRange {
                index: bad.index(),
                k,
            });
        }
        let malformed = |reason: &str| ModelError::MalformedConstraint {
            constraint: self.to_string(),
            reason: reason.to_string(),
        };
        match *self {
            Constraint::NotEquals(s, t) | Constraint::Equals(s, t) => {
                if s == t {
                    return Err(malformed("both steps are the same"));
                }
            }
            Constraint::AtMost { r, scope } | Constraint::AtLeast { r, scope } => {
                if scope.len() < 2 {
                    return Err(malformed("scope needs at least two steps"));
                }
                if r < 1 || r as usize > scope.len() {
                    return Err(malformed("threshold must lie in [1, |scope|]"));
                }
            }
        }
        Ok(())
    }

    /// Monotone violation test on a (partial) plan.
    ///
    /// An at-least constraint is violated once the distinct users already on
    /// its scope plus the number of still unassigned scope steps falls below
    /// `r`, i.e. no extension can reach `r` users any more.
    pub fn violated_by(&self, plan: &Plan) -> bool {
        match *self {
            Constraint::NotEquals(s, t) => match (plan.get(s), plan.get(t)) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            },
            Constraint::Equals(s, t) => match (plan.get(s), plan.get(t)) {
                (Some(a), Some(b)) => a != b,
                _ => false,
            },
            Constraint::AtMost { r, scope } => plan.distinct_users_on(scope) > r as usize,
            Constraint::AtLeast { r, scope } => {
                let unassigned = scope.difference(plan.assigned_steps()).len();
                plan.distinct_users_on(scope) + unassigned < r as usize
            }
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::NotEquals(s, t) => write!(f, "({s},{t},≠)"),
            Constraint::Equals(s, t) => write!(f, "({s},{t},=)"),
            Constraint::AtMost { r, scope } => write!(f, "({r},{scope},≤)"),
            Constraint::AtLeast { r, scope } => write!(f, "({r},{scope},≥)"),
        }
    }
}

/// `violates(c, plan)`.
pub fn violates(c: &Constraint, plan: &Plan) -> bool {
    c.violated_by(plan)
}

/// A workflow: steps, users, authorization lists and constraints.
///
/// Immutable once built; `auth_by_step` is always the exact transpose of
/// `auth_by_user`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkflowInstance {
    k: usize,
    auth_by_user: Vec<StepSet>,
    auth_by_step: Vec<Vec<UserId>>,
    constraints: Vec<Constraint>,
}

impl WorkflowInstance {
    pub fn new(
        k: usize,
        auth_by_user: Vec<StepSet>,
        constraints: Vec<Constraint>,
    ) -> Result<Self, ModelError> {
        if k > MAX_STEPS {
            return Err(ModelError::TooManySteps { k });
        }
        let all = StepSet::full(k);
        for a in &auth_by_user {
            if let Some(bad) = a.difference(all).first() {
                return Err(ModelError::StepOutOfRange {
                    index: bad.index(),
                    k,
                });
            }
        }
        for c in &constraints {
            c.check_well_formed(k)?;
        }
        let mut auth_by_step = vec![Vec::new(); k];
        for (u, a) in auth_by_user.iter().enumerate() {
            for s in a.iter() {
                auth_by_step[s.index()].push(UserId(u as u32));
            }
        }
        Ok(WorkflowInstance {
            k,
            auth_by_user,
            auth_by_step,
            constraints,
        })
    }

    /// Number of steps.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of users.
    pub fn n(&self) -> usize {
        self.auth_by_user.len()
    }

    pub fn steps(&self) -> impl Iterator<Item = StepId> {
        (0..self.k as u32).map(StepId)
    }

    pub fn users(&self) -> impl Iterator<Item = UserId> {
        (0..self.n() as u32).map(UserId)
    }

    pub fn all_steps(&self) -> StepSet {
        StepSet::full(self.k)
    }

    /// `A(u)`.
    pub fn auth(&self, u: UserId) -> StepSet {
        self.auth_by_user[u.index()]
    }

    pub fn auth_by_user(&self) -> &[StepSet] {
        &self.auth_by_user
    }

    /// `A(s)`, ascending.
    pub fn users_for(&self, s: StepId) -> &[UserId] {
        &self.auth_by_step[s.index()]
    }

    pub fn is_user_authorized(&self, u: UserId, s: StepId) -> bool {
        self.auth_by_user[u.index()].contains(s)
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn has_equals(&self) -> bool {
        self.constraints
            .iter()
            .any(|c| matches!(c, Constraint::Equals(..)))
    }

    /// The same instance with a different constraint list.
    pub fn with_constraints(&self, constraints: Vec<Constraint>) -> Result<Self, ModelError> {
        WorkflowInstance::new(self.k, self.auth_by_user.clone(), constraints)
    }

    pub fn is_authorized(&self, plan: &Plan) -> bool {
        plan.iter().all(|(s, u)| self.is_user_authorized(u, s))
    }

    pub fn is_eligible(&self, plan: &Plan) -> bool {
        self.constraints.iter().all(|c| !c.violated_by(plan))
    }

    pub fn is_valid(&self, plan: &Plan) -> bool {
        self.is_authorized(plan) && self.is_eligible(plan)
    }

    pub fn is_valid_complete(&self, plan: &Plan) -> bool {
        plan.k() == self.k && plan.is_complete() && self.is_valid(plan)
    }

    /// Every reason `plan` fails to be a valid complete plan, in step then
    /// constraint order. Empty iff the plan is a valid complete plan.
    pub fn diagnose(&self, plan: &Plan) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for s in self.steps() {
            match plan.get(s) {
                None => out.push(Diagnostic::Unassigned(s)),
                Some(u) if u.index() >= self.n() => out.push(Diagnostic::UnknownUser(s, u)),
                Some(u) if !self.is_user_authorized(u, s) => {
                    out.push(Diagnostic::Unauthorized(u, s))
                }
                Some(_) => {}
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.violated_by(plan) {
                out.push(Diagnostic::Violated(i, *c));
            }
        }
        out
    }

    pub fn check_plan_ids(&self, plan: &Plan) -> Result<(), ModelError> {
        if plan.k() != self.k {
            return Err(ModelError::StepOutOfRange {
                index: plan.k().max(1) - 1,
                k: self.k,
            });
        }
        for (_, u) in plan.iter() {
            if u.index() >= self.n() {
                return Err(ModelError::UserOutOfRange {
                    index: u.index(),
                    n: self.n(),
                });
            }
        }
        Ok(())
    }
}

/// Why a plan is not a valid complete plan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    Unassigned(StepId),
    UnknownUser(StepId, UserId),
    Unauthorized(UserId, StepId),
    /// Constraint index and the constraint itself.
    Violated(usize, Constraint),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::Unassigned(s) => write!(f, "step {s} is unassigned"),
            Diagnostic::UnknownUser(s, u) => write!(f, "step {s} assigned to unknown user {u}"),
            Diagnostic::Unauthorized(u, s) => {
                write!(f, "unauthorized ({u},{s}): {u} is not authorized for {s}")
            }
            Diagnostic::Violated(i, c) => write!(f, "violated constraint #{} {c}", i + 1),
        }
    }
}

/// A partial or complete assignment of steps to users.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Plan {
    assignment: Vec<Option<UserId>>,
}

impl Plan {
    /// The empty plan over `k` steps.
    pub fn new(k: usize) -> Plan {
        Plan {
            assignment: vec![None; k],
        }
    }

    pub fn from_assignment(assignment: Vec<Option<UserId>>) -> Plan {
        Plan { assignment }
    }

    /// Complete plan from one user per step.
    pub fn from_users(users: &[UserId]) -> Plan {
        Plan {
            assignment: users.iter().copied().map(Some).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.assignment.len()
    }

    #[inline]
    pub fn get(&self, s: StepId) -> Option<UserId> {
        self.assignment[s.index()]
    }

    pub fn assign(&mut self, s: StepId, u: UserId) {
        self.assignment[s.index()] = Some(u);
    }

    pub fn unassign(&mut self, s: StepId) {
        self.assignment[s.index()] = None;
    }

    pub fn assignment(&self) -> &[Option<UserId>] {
        &self.assignment
    }

    /// Assigned `(step, user)` pairs in step order.
    pub fn iter(&self) -> impl Iterator<Item = (StepId, UserId)> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(i, u)| u.map(|u| (StepId(i as u32), u)))
    }

    /// The set `T` of assigned steps.
    pub fn assigned_steps(&self) -> StepSet {
        self.iter().map(|(s, _)| s).collect()
    }

    pub fn users_used(&self) -> BTreeSet<UserId> {
        self.iter().map(|(_, u)| u).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.assignment.iter().all(Option::is_some)
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.iter().all(Option::is_none)
    }

    /// Number of distinct users performing the assigned steps of `scope`.
    pub fn distinct_users_on(&self, scope: StepSet) -> usize {
        let mut users: Vec<UserId> = scope.iter().filter_map(|s| self.get(s)).collect();
        users.sort_unstable();
        users.dedup();
        users.len()
    }

    /// Restriction of the plan to the steps in `steps`.
    pub fn restrict(&self, steps: StepSet) -> Plan {
        let mut out = Plan::new(self.k());
        for (s, u) in self.iter() {
            if steps.contains(s) {
                out.assign(s, u);
            }
        }
        out
    }

    /// Parses `s1=u2 s2=u2 ...` (whitespace or comma separated).
    pub fn parse(text: &str, k: usize) -> Result<Plan, ModelError> {
        let mut plan = Plan::new(k);
        let mut seen = StepSet::EMPTY;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split(|c: char| c.is_whitespace() || c == ',') {
                if tok.is_empty() {
                    continue;
                }
                let syntax = |message: String| ModelError::Syntax {
                    line: lineno + 1,
                    message,
                };
                let (lhs, rhs) = tok
                    .split_once('=')
                    .ok_or_else(|| syntax(format!("expected `sN=uM`, got `{tok}`")))?;
                let s = format::parse_step(lhs, k).map_err(|e| e.at_line(lineno + 1))?;
                let u = format::parse_user_name(rhs).map_err(|e| e.at_line(lineno + 1))?;
                if seen.contains(s) {
                    return Err(syntax(format!("step {s} assigned twice")));
                }
                seen.insert(s);
                plan.assign(s, u);
            }
        }
        Ok(plan)
    }
}

impl fmt::Display for Plan {
    /// `s1=u2 s3=u4`; unassigned steps are omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (s, u)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}={u}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::{instance1, plan};

    #[test]
    fn example_classification_matrix() {
        let inst = instance1();
        // (plan, authorized, eligible, complete)
        let rows = [
            (
                plan(&[Some(1), Some(2), Some(4), Some(5)]),
                true,
                false,
                true,
            ),
            (
                plan(&[Some(1), Some(1), Some(4), Some(5)]),
                false,
                true,
                true,
            ),
            (plan(&[Some(1), None, Some(4), Some(5)]), true, true, false),
            (
                plan(&[Some(2), Some(2), Some(4), Some(5)]),
                true,
                true,
                true,
            ),
        ];
        for (i, (p, auth, elig, complete)) in rows.iter().enumerate() {
            assert_eq!(inst.is_authorized(p), *auth, "pi{} authorized", i + 1);
            assert_eq!(inst.is_eligible(p), *elig, "pi{} eligible", i + 1);
            assert_eq!(p.is_complete(), *complete, "pi{} complete", i + 1);
        }
        assert!(!inst.is_valid_complete(&rows[0].0));
        assert!(!inst.is_valid_complete(&rows[2].0));
        assert!(inst.is_valid_complete(&rows[3].0));
        assert!(inst.is_valid(&rows[2].0));
    }

    #[test]
    fn empty_plan_is_authorized() {
        let inst = instance1();
        assert!(inst.is_authorized(&Plan::new(4)));
        assert!(inst.is_eligible(&Plan::new(4)));
    }

    #[test]
    fn violation_examples() {
        let pi1 = plan(&[Some(1), Some(2), Some(4), Some(5)]);
        assert!(!Constraint::NotEquals(StepId(1), StepId(2)).violated_by(&pi1));
        assert!(Constraint::Equals(StepId(0), StepId(1)).violated_by(&pi1));

        // at-least 3 over five steps, four of them on one user, one open
        let scope = StepSet::full(5);
        let c = Constraint::AtLeast { r: 3, scope };
        let p = plan(&[Some(1), Some(1), Some(1), Some(1), None]);
        assert!(c.violated_by(&p));
        let p = plan(&[Some(1), Some(1), Some(1), None, None]);
        assert!(!c.violated_by(&p));

        let c = Constraint::AtMost { r: 2, scope };
        assert!(!c.violated_by(&plan(&[Some(1), Some(2), None, None, None])));
        assert!(c.violated_by(&plan(&[Some(1), Some(2), Some(3), None, None])));
    }

    #[test]
    fn malformed_constraints_rejected() {
        let bad = [
            Constraint::NotEquals(StepId(1), StepId(1)),
            Constraint::AtMost {
                r: 6,
                scope: StepSet::full(3),
            },
            Constraint::AtLeast {
                r: 0,
                scope: StepSet::full(3),
            },
            Constraint::AtLeast {
                r: 1,
                scope: StepSet::singleton(StepId(0)),
            },
            Constraint::Equals(StepId(0), StepId(9)),
        ];
        for c in bad {
            assert!(c.check_well_formed(4).is_err(), "{c} accepted");
        }
    }

    #[test]
    fn transpose_is_consistent() {
        let inst = instance1();
        for u in inst.users() {
            for s in inst.steps() {
                assert_eq!(inst.auth(u).contains(s), inst.users_for(s).contains(&u));
            }
        }
    }

    #[test]
    fn diagnose_names_failures() {
        let inst = instance1();
        let pi2 = plan(&[Some(1), Some(1), Some(4), Some(5)]);
        let d = inst.diagnose(&pi2);
        assert_eq!(d, vec![Diagnostic::Unauthorized(UserId(0), StepId(1))]);
        assert!(d[0].to_string().contains("(u1,s2)"));
        let pi1 = plan(&[Some(1), Some(2), Some(4), Some(5)]);
        let d = inst.diagnose(&pi1);
        assert_eq!(d.len(), 1);
        assert!(d[0].to_string().contains("(s1,s2,=)"));
    }

    #[test]
    fn plan_text_round_trip() {
        let p = plan(&[Some(2), None, Some(4), Some(5)]);
        assert_eq!(p.to_string(), "s1=u2 s3=u4 s4=u5");
        assert_eq!(Plan::parse(&p.to_string(), 4).unwrap(), p);
        assert!(Plan::parse("s1=u1 s1=u2", 4).is_err());
        assert!(Plan::parse("s9=u1", 4).is_err());
        assert!(Plan::parse("s1u1", 4).is_err());
    }
}
