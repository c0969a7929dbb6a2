//! Pseudo-Boolean encoding of not-equals / at-most / at-least instances.
//!
//! Variables:
//! * `X(u,s)` for every authorized pair: `u` performs `s`;
//! * `Z(u,c)` per at-least constraint `c` and user meeting its scope;
//! * `Y(u,c)` per at-most constraint `c` and user meeting its scope.
//!
//! Rows:
//! 1. `sum_{u in A(s)} X(u,s) = 1` for each step;
//! 2. `X(u,s) + X(u,t) <= 1` for each not-equals `(s,t)` and `u in A(s) ∩ A(t)`;
//! 3. `Z(u,c) - sum_{s in A(u) ∩ c} X(u,s) <= 0`;
//! 4. `sum_u Z(u,c) >= r` for each at-least `c`;
//! 5. `X(u,s) - Y(u,c) <= 0` for each at-most `c`, `s in c`, `u in A(s)`;
//! 6. `sum_u Y(u,c) <= r` for each at-most `c`.
//!
//! `Z`/`Y` variables of users disjoint from a scope are left out: row 3
//! would pin such a `Z` to 0 and no row 5 mentions such a `Y`.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::model::{Constraint, Plan, StepId, UserId, WorkflowInstance};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PbError {
    #[error("constraint #{} {constraint} cannot be encoded (equals constraints are not supported)", .index + 1)]
    UnsupportedConstraint { index: usize, constraint: String },
    #[error("malformed assignment: step {step} has {count} users selected")]
    MalformedAssignment { step: StepId, count: usize },
    #[error("assignment covers {got} variables, model has {expected}")]
    AssignmentLength { got: usize, expected: usize },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    X {
        user: UserId,
        step: StepId,
    },
    /// `constraint` indexes the instance constraint list.
    Z {
        user: UserId,
        constraint: usize,
    },
    Y {
        user: UserId,
        constraint: usize,
    },
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VarKind::X { user, step } => write!(f, "X {user} {step}"),
            VarKind::Z { user, constraint } => write!(f, "Z {user} c{}", constraint + 1),
            VarKind::Y { user, constraint } => write!(f, "Y {user} c{}", constraint + 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PbVariable {
    /// 1-based, contiguous.
    pub index: usize,
    pub kind: VarKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Ge,
    Le,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Le => "<=",
        }
    }
}

/// Which row family a constraint belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    ExactlyOneUser,
    NotEquals,
    AtLeastLink,
    AtLeastCount,
    AtMostLink,
    AtMostCount,
}

impl Origin {
    /// Row family number, 1 to 6.
    pub fn number(self) -> u8 {
        self as u8 + 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PbConstraint {
    /// `(coefficient, 1-based variable)`.
    pub terms: Vec<(i64, usize)>,
    pub relation: Relation,
    pub bound: i64,
    pub origin: Origin,
}

impl PbConstraint {
    pub fn holds(&self, values: &[bool]) -> bool {
        let lhs: i64 = self
            .terms
            .iter()
            .filter(|&&(_, v)| values[v - 1])
            .map(|&(c, _)| c)
            .sum();
        match self.relation {
            Relation::Eq => lhs == self.bound,
            Relation::Ge => lhs >= self.bound,
            Relation::Le => lhs <= self.bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PbModel {
    pub steps: usize,
    pub users: usize,
    pub variables: Vec<PbVariable>,
    pub constraints: Vec<PbConstraint>,
}

impl PbModel {
    /// Steps nobody is authorized for; their exactly-one row reads `0 = 1`.
    pub fn unassignable_steps(&self) -> Vec<StepId> {
        self.constraints
            .iter()
            .filter(|c| c.origin == Origin::ExactlyOneUser)
            .enumerate()
            .filter(|(_, c)| c.terms.is_empty())
            .map(|(i, _)| StepId(i as u32))
            .collect()
    }

    pub fn warnings(&self) -> Vec<String> {
        self.unassignable_steps()
            .into_iter()
            .map(|s| format!("no user is authorized for {s}; the model is trivially unsatisfiable"))
            .collect()
    }

    pub fn is_satisfied_by(&self, values: &[bool]) -> bool {
        values.len() == self.variables.len() && self.constraints.iter().all(|c| c.holds(values))
    }

    fn x_lookup(&self) -> HashMap<(UserId, StepId), usize> {
        self.variables
            .iter()
            .filter_map(|v| match v.kind {
                VarKind::X { user, step } => Some(((user, step), v.index)),
                _ => None,
            })
            .collect()
    }
}

/// Builds the model. Equals constraints are rejected.
pub fn encode(inst: &WorkflowInstance) -> Result<PbModel, PbError> {
    if let Some((index, c)) = inst
        .constraints()
        .iter()
        .enumerate()
        .find(|(_, c)| matches!(c, Constraint::Equals(..)))
    {
        return Err(PbError::UnsupportedConstraint {
            index,
            constraint: c.to_string(),
        });
    }

    let mut variables = Vec::new();
    let mut new_var = |kind: VarKind| {
        let index = variables.len() + 1;
        variables.push(PbVariable { index, kind });
        index
    };

    let mut x = HashMap::new();
    for s in inst.steps() {
        for &u in inst.users_for(s) {
            x.insert((u, s), new_var(VarKind::X { user: u, step: s }));
        }
    }
    // Z then Y, each constraint-major with users ascending
    let mut linked = |want_at_least: bool| {
        let mut out: Vec<(usize, Vec<(UserId, usize)>)> = Vec::new();
        for (ci, c) in inst.constraints().iter().enumerate() {
            let scope = match (*c, want_at_least) {
                (Constraint::AtLeast { scope, .. }, true) => scope,
                (Constraint::AtMost { scope, .. }, false) => scope,
                _ => continue,
            };
            let vars = inst
                .users()
                .filter(|&u| inst.auth(u).intersects(scope))
                .map(|u| {
                    let kind = if want_at_least {
                        VarKind::Z {
                            user: u,
                            constraint: ci,
                        }
                    } else {
                        VarKind::Y {
                            user: u,
                            constraint: ci,
                        }
                    };
                    (u, new_var(kind))
                })
                .collect();
            out.push((ci, vars));
        }
        out
    };
    let z = linked(true);
    let y = linked(false);

    let mut rows = Vec::new();
    for s in inst.steps() {
        rows.push(PbConstraint {
            terms: inst.users_for(s).iter().map(|&u| (1, x[&(u, s)])).collect(),
            relation: Relation::Eq,
            bound: 1,
            origin: Origin::ExactlyOneUser,
        });
    }
    for c in inst.constraints() {
        if let Constraint::NotEquals(s, t) = *c {
            for &u in inst.users_for(s) {
                if inst.is_user_authorized(u, t) {
                    rows.push(PbConstraint {
                        terms: vec![(1, x[&(u, s)]), (1, x[&(u, t)])],
                        relation: Relation::Le,
                        bound: 1,
                        origin: Origin::NotEquals,
                    });
                }
            }
        }
    }
    for (ci, vars) in &z {
        let scope = inst.constraints()[*ci].scope();
        for &(u, zv) in vars {
            let mut terms = vec![(1, zv)];
            terms.extend(
                inst.auth(u)
                    .intersection(scope)
                    .iter()
                    .map(|s| (-1, x[&(u, s)])),
            );
            rows.push(PbConstraint {
                terms,
                relation: Relation::Le,
                bound: 0,
                origin: Origin::AtLeastLink,
            });
        }
    }
    for (ci, vars) in &z {
        let Constraint::AtLeast { r, .. } = inst.constraints()[*ci] else {
            unreachable!()
        };
        rows.push(PbConstraint {
            terms: vars.iter().map(|&(_, v)| (1, v)).collect(),
            relation: Relation::Ge,
            bound: r as i64,
            origin: Origin::AtLeastCount,
        });
    }
    for (ci, vars) in &y {
        let y_of: HashMap<UserId, usize> = vars.iter().copied().collect();
        for s in inst.constraints()[*ci].scope() {
            for &u in inst.users_for(s) {
                rows.push(PbConstraint {
                    terms: vec![(1, x[&(u, s)]), (-1, y_of[&u])],
                    relation: Relation::Le,
                    bound: 0,
                    origin: Origin::AtMostLink,
                });
            }
        }
    }
    for (ci, vars) in &y {
        let Constraint::AtMost { r, .. } = inst.constraints()[*ci] else {
            unreachable!()
        };
        rows.push(PbConstraint {
            terms: vars.iter().map(|&(_, v)| (1, v)).collect(),
            relation: Relation::Le,
            bound: r as i64,
            origin: Origin::AtMostCount,
        });
    }

    Ok(PbModel {
        steps: inst.k(),
        users: inst.n(),
        variables,
        constraints: rows,
    })
}

/// OPB text and its variable-map sidecar.
pub fn emit_opb(model: &PbModel) -> (String, String) {
    let mut opb = String::new();
    let _ = writeln!(
        opb,
        "* #variable= {} #constraint= {}",
        model.variables.len(),
        model.constraints.len()
    );
    let _ = writeln!(opb, "* wsp steps= {} users= {}", model.steps, model.users);
    for row in &model.constraints {
        for &(coef, var) in &row.terms {
            let _ = write!(opb, "{coef:+} x{var} ");
        }
        let _ = writeln!(opb, "{} {} ;", row.relation.symbol(), row.bound);
    }
    let mut map = String::new();
    for v in &model.variables {
        let _ = writeln!(map, "x{} = {}", v.index, v.kind);
    }
    (opb, map)
}

fn syntax(line: usize, message: impl Into<String>) -> PbError {
    PbError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_var(tok: &str, line: usize) -> Result<usize, PbError> {
    tok.strip_prefix('x')
        .and_then(|d| d.parse::<usize>().ok())
        .filter(|&i| i >= 1)
        .ok_or_else(|| syntax(line, format!("expected variable `xN`, got `{tok}`")))
}

fn parse_prefixed(tok: Option<&str>, prefix: char, line: usize) -> Result<u32, PbError> {
    tok.and_then(|t| t.strip_prefix(prefix))
        .and_then(|d| d.parse::<u32>().ok())
        .filter(|&i| i >= 1)
        .map(|i| i - 1)
        .ok_or_else(|| syntax(line, format!("expected `{prefix}N`")))
}

/// Parses a variable map written by [`emit_opb`].
pub fn parse_map(text: &str) -> Result<Vec<PbVariable>, PbError> {
    let mut vars = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let mut toks = raw.split_whitespace();
        let index = parse_var(toks.next().unwrap_or(""), line)?;
        if index != vars.len() + 1 {
            return Err(syntax(
                line,
                format!("variables must be contiguous, got x{index}"),
            ));
        }
        if toks.next() != Some("=") {
            return Err(syntax(line, "expected `=`"));
        }
        let tag = toks.next();
        let user = UserId(parse_prefixed(toks.next(), 'u', line)?);
        let kind = match tag {
            Some("X") => VarKind::X {
                user,
                step: StepId(parse_prefixed(toks.next(), 's', line)?),
            },
            Some("Z") => VarKind::Z {
                user,
                constraint: parse_prefixed(toks.next(), 'c', line)? as usize,
            },
            Some("Y") => VarKind::Y {
                user,
                constraint: parse_prefixed(toks.next(), 'c', line)? as usize,
            },
            _ => return Err(syntax(line, "expected variable kind X, Z or Y")),
        };
        vars.push(PbVariable { index, kind });
    }
    Ok(vars)
}

/// Infers the row family from the shape of a constraint.
fn classify(row: &PbConstraint, vars: &[PbVariable]) -> Option<Origin> {
    let kind = |v: usize| vars[v - 1].kind;
    let is_x = |v: usize| matches!(kind(v), VarKind::X { .. });
    let is_z = |v: usize| matches!(kind(v), VarKind::Z { .. });
    let is_y = |v: usize| matches!(kind(v), VarKind::Y { .. });
    let t = &row.terms;
    match row.relation {
        Relation::Eq => t
            .iter()
            .all(|&(c, v)| c == 1 && is_x(v))
            .then_some(Origin::ExactlyOneUser),
        Relation::Ge => t
            .iter()
            .all(|&(c, v)| c == 1 && is_z(v))
            .then_some(Origin::AtLeastCount),
        Relation::Le => {
            if t.len() == 2 && row.bound == 1 && t.iter().all(|&(c, v)| c == 1 && is_x(v)) {
                Some(Origin::NotEquals)
            } else if row.bound == 0
                && !t.is_empty()
                && t[0].0 == 1
                && is_z(t[0].1)
                && t[1..].iter().all(|&(c, v)| c == -1 && is_x(v))
            {
                Some(Origin::AtLeastLink)
            } else if row.bound == 0
                && t.len() == 2
                && t[0].0 == 1
                && is_x(t[0].1)
                && t[1].0 == -1
                && is_y(t[1].1)
            {
                Some(Origin::AtMostLink)
            } else if t.iter().all(|&(c, v)| c == 1 && is_y(v)) {
                Some(Origin::AtMostCount)
            } else {
                None
            }
        }
    }
}

/// Reads OPB text plus its map back into a model.
pub fn read_opb(opb: &str, map: &str) -> Result<PbModel, PbError> {
    let variables = parse_map(map)?;
    let mut declared: Option<(usize, usize)> = None;
    let mut dims: Option<(usize, usize)> = None;
    let mut constraints = Vec::new();
    for (i, raw) in opb.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        if let Some(comment) = raw.strip_prefix('*') {
            let toks: Vec<&str> = comment.split_whitespace().collect();
            match toks.as_slice() {
                ["#variable=", v, "#constraint=", c, ..] => {
                    let v = v.parse().map_err(|_| syntax(line, "bad variable count"))?;
                    let c = c
                        .parse()
                        .map_err(|_| syntax(line, "bad constraint count"))?;
                    declared = Some((v, c));
                }
                ["wsp", "steps=", k, "users=", n] => {
                    let k = k.parse().map_err(|_| syntax(line, "bad step count"))?;
                    let n = n.parse().map_err(|_| syntax(line, "bad user count"))?;
                    dims = Some((k, n));
                }
                _ => {}
            }
            continue;
        }
        let body = raw
            .strip_suffix(';')
            .ok_or_else(|| syntax(line, "constraint must end with `;`"))?;
        let toks: Vec<&str> = body.split_whitespace().collect();
        let rel_at = toks
            .iter()
            .position(|t| matches!(*t, "=" | ">=" | "<="))
            .ok_or_else(|| syntax(line, "missing relation"))?;
        if toks.len() != rel_at + 2 || rel_at % 2 != 0 {
            return Err(syntax(line, "expected `coef var ... rel bound ;`"));
        }
        let mut terms = Vec::new();
        for pair in toks[..rel_at].chunks(2) {
            let coef: i64 = pair[0]
                .parse()
                .map_err(|_| syntax(line, format!("bad coefficient `{}`", pair[0])))?;
            let var = parse_var(pair[1], line)?;
            if var > variables.len() {
                return Err(syntax(line, format!("x{var} is not in the variable map")));
            }
            terms.push((coef, var));
        }
        let relation = match toks[rel_at] {
            "=" => Relation::Eq,
            ">=" => Relation::Ge,
            _ => Relation::Le,
        };
        let bound = toks[rel_at + 1]
            .parse()
            .map_err(|_| syntax(line, "bad bound"))?;
        let mut row = PbConstraint {
            terms,
            relation,
            bound,
            origin: Origin::ExactlyOneUser,
        };
        row.origin = classify(&row, &variables)
            .ok_or_else(|| syntax(line, "constraint does not match any row family"))?;
        constraints.push(row);
    }
    let (v, c) = declared.ok_or_else(|| syntax(1, "missing `#variable=` header"))?;
    if v != variables.len() || c != constraints.len() {
        return Err(syntax(1, "header counts do not match the body"));
    }
    let (steps, users) = dims.ok_or_else(|| syntax(2, "missing `wsp steps=` header"))?;
    Ok(PbModel {
        steps,
        users,
        variables,
        constraints,
    })
}

/// Parses solver output literals such as `x3 -x4 x7`; a leading `v` is
/// ignored and unlisted variables are false.
pub fn parse_assignment(text: &str, num_vars: usize) -> Result<Vec<bool>, PbError> {
    let mut values = vec![false; num_vars];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        for tok in raw.split_whitespace() {
            if tok == "v" {
                continue;
            }
            let (positive, name) = match tok.strip_prefix('-') {
                Some(rest) => (false, rest),
                None => (true, tok),
            };
            let var = parse_var(name, line)?;
            if var > num_vars {
                return Err(syntax(line, format!("x{var} is not a model variable")));
            }
            values[var - 1] = positive;
        }
    }
    Ok(values)
}

/// Reads the plan off the `X` variables.
pub fn decode_solution(model: &PbModel, values: &[bool]) -> Result<Plan, PbError> {
    if values.len() != model.variables.len() {
        return Err(PbError::AssignmentLength {
            got: values.len(),
            expected: model.variables.len(),
        });
    }
    let mut chosen: Vec<Vec<UserId>> = vec![Vec::new(); model.steps];
    for v in &model.variables {
        if let VarKind::X { user, step } = v.kind {
            if values[v.index - 1] {
                chosen[step.index()].push(user);
            }
        }
    }
    let mut plan = Plan::new(model.steps);
    for (i, users) in chosen.into_iter().enumerate() {
        let step = StepId(i as u32);
        if users.len() != 1 {
            return Err(PbError::MalformedAssignment {
                step,
                count: users.len(),
            });
        }
        plan.assign(step, users[0]);
    }
    Ok(plan)
}

/// Forward direction of the reduction: `X(u,s)` iff `u` does `s`, and
/// `Z(u,c)` / `Y(u,c)` iff `u` does some step of `c`.
///
/// Panics if the plan does not satisfy the model, which only happens when
/// it is not a valid complete plan of the encoded instance.
pub fn plan_to_assignment(model: &PbModel, inst: &WorkflowInstance, plan: &Plan) -> Vec<bool> {
    let mut values = vec![false; model.variables.len()];
    let x = model.x_lookup();
    for (s, u) in plan.iter() {
        if let Some(&v) = x.get(&(u, s)) {
            values[v - 1] = true;
        }
    }
    for v in &model.variables {
        if let VarKind::Z { user, constraint } | VarKind::Y { user, constraint } = v.kind {
            let scope = inst.constraints()[constraint].scope();
            values[v.index - 1] = scope.iter().any(|s| plan.get(s) == Some(user));
        }
    }
    assert!(
        model.is_satisfied_by(&values),
        "plan {plan} does not satisfy the encoding"
    );
    values
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::StepSet;
    use crate::testing::instance1;

    fn two_by_two() -> WorkflowInstance {
        WorkflowInstance::new(
            2,
            vec![StepSet::full(2); 2],
            vec![Constraint::NotEquals(StepId(0), StepId(1))],
        )
        .unwrap()
    }

    fn count(model: &PbModel, origin: Origin) -> usize {
        model
            .constraints
            .iter()
            .filter(|c| c.origin == origin)
            .count()
    }

    #[test]
    fn two_by_two_counts() {
        let model = encode(&two_by_two()).unwrap();
        assert_eq!(model.variables.len(), 4);
        assert_eq!(count(&model, Origin::ExactlyOneUser), 2);
        assert_eq!(count(&model, Origin::NotEquals), 2);
        assert_eq!(model.constraints.len(), 4);
        let (opb, map) = emit_opb(&model);
        assert!(opb.starts_with("* #variable= 4 #constraint= 4\n"));
        assert!(opb.contains("+1 x1 +1 x2 = 1 ;"));
        assert!(opb.contains("+1 x1 +1 x3 <= 1 ;"));
        assert_eq!(map.lines().next(), Some("x1 = X u1 s1"));
        assert_eq!(emit_opb(&model), (opb, map));
    }

    #[test]
    fn equals_is_rejected() {
        match encode(&instance1()) {
            Err(PbError::UnsupportedConstraint { index, constraint }) => {
                assert_eq!(index, 0);
                assert_eq!(constraint, "(s1,s2,=)");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn instance1_without_equals_has_twelve_x_vars() {
        let inst = instance1();
        let inst = inst
            .with_constraints(inst.constraints()[1..].to_vec())
            .unwrap();
        let model = encode(&inst).unwrap();
        assert_eq!(model.variables.len(), 12);
        assert!(model
            .variables
            .iter()
            .all(|v| matches!(v.kind, VarKind::X { .. })));
    }

    #[test]
    fn at_least_count_row_rendering() {
        let scope = StepSet::full(5);
        let auth = (0..5).map(|i| StepSet::singleton(StepId(i))).collect();
        let inst =
            WorkflowInstance::new(5, auth, vec![Constraint::AtLeast { r: 3, scope }]).unwrap();
        let model = encode(&inst).unwrap();
        let (opb, _) = emit_opb(&model);
        assert!(
            opb.contains("+1 x6 +1 x7 +1 x8 +1 x9 +1 x10 >= 3 ;"),
            "{opb}"
        );
        assert!(opb.contains("+1 x6 -1 x1 <= 0 ;"));
    }

    #[test]
    fn empty_authorization_list_is_flagged() {
        let inst = WorkflowInstance::new(2, vec![StepSet(0b01)], vec![]).unwrap();
        let model = encode(&inst).unwrap();
        assert_eq!(model.unassignable_steps(), vec![StepId(1)]);
        assert_eq!(model.warnings().len(), 1);
        let (opb, map) = emit_opb(&model);
        assert!(opb.contains("\n= 1 ;\n"));
        assert_eq!(read_opb(&opb, &map).unwrap(), model);
    }

    #[test]
    fn decoding() {
        let inst = two_by_two();
        let model = encode(&inst).unwrap();
        let plan = Plan::from_users(&[UserId(0), UserId(1)]);
        let values = plan_to_assignment(&model, &inst, &plan);
        assert_eq!(decode_solution(&model, &values).unwrap(), plan);
        assert!(matches!(
            decode_solution(&model, &[false; 4]),
            Err(PbError::MalformedAssignment { count: 0, .. })
        ));
        assert!(matches!(
            decode_solution(&model, &[true, true, false, true]),
            Err(PbError::MalformedAssignment { count: 2, .. })
        ));
        assert!(decode_solution(&model, &[true]).is_err());
    }

    #[test]
    fn single_step_single_user() {
        let inst = WorkflowInstance::new(1, vec![StepSet::full(1)], vec![]).unwrap();
        let model = encode(&inst).unwrap();
        let values = plan_to_assignment(&model, &inst, &Plan::from_users(&[UserId(0)]));
        assert_eq!(values, vec![true]);
    }

    #[test]
    fn at_most_row_is_tight_when_witness_uses_r_users() {
        let scope = StepSet::full(3);
        let inst = WorkflowInstance::new(
            3,
            vec![StepSet::full(3); 3],
            vec![Constraint::AtMost { r: 2, scope }],
        )
        .unwrap();
        let model = encode(&inst).unwrap();
        let plan = Plan::from_users(&[UserId(0), UserId(1), UserId(1)]);
        let values = plan_to_assignment(&model, &inst, &plan);
        let row = model
            .constraints
            .iter()
            .find(|c| c.origin == Origin::AtMostCount)
            .unwrap();
        let lhs: i64 = row
            .terms
            .iter()
            .filter(|&&(_, v)| values[v - 1])
            .map(|&(c, _)| c)
            .sum();
        assert_eq!(lhs, 2);
    }

    #[test]
    fn assignment_line_parsing() {
        assert_eq!(
            parse_assignment("v x1 -x2 x4\n", 4).unwrap(),
            vec![true, false, false, true]
        );
        assert!(parse_assignment("x5", 4).is_err());
        assert!(parse_assignment("y1", 4).is_err());
    }

    #[test]
    fn reader_rejects_garbage() {
        let model = encode(&two_by_two()).unwrap();
        let (opb, map) = emit_opb(&model);
        assert!(read_opb(&opb.replace(" ;", ""), &map).is_err());
        assert!(read_opb(&opb.replace("x4", "x9"), &map).is_err());
        assert!(read_opb(&opb, "x2 = X u1 s1\n").is_err());
        assert!(read_opb(&opb.replace("#constraint= 4", "#constraint= 5"), &map).is_err());
    }
}
