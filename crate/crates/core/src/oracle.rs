//! Exhaustive reference solvers. Deliberately naive: they use only the
//! validity definitions in [`crate::model`] and plain enumeration.

use thiserror::Error;

use crate::model::{Plan, StepId, UserId, WorkflowInstance};
use crate::pb::{PbModel, Relation};

pub const DEFAULT_PLAN_CAP: u64 = 10_000_000;
pub const MAX_PB_VARIABLES: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{count} authorized assignments exceed the cap of {cap}")]
    CapExceeded { count: u128, cap: u64 },
    #[error("{0} variables exceed the exhaustive limit of {MAX_PB_VARIABLES}")]
    TooManyVariables(usize),
    #[error("partition enumeration supports at most 12 elements, got {0}")]
    TooManyElements(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteOutcome {
    /// Every valid complete plan, lexicographic in `(π(s1), ..., π(sk))`.
    pub witnesses: Vec<Plan>,
}

impl BruteOutcome {
    pub fn is_satisfiable(&self) -> bool {
        !self.witnesses.is_empty()
    }
}

/// Enumerates every complete authorized plan and keeps the eligible ones.
pub fn brute_solve(inst: &WorkflowInstance) -> Result<BruteOutcome, OracleError> {
    brute_solve_capped(inst, DEFAULT_PLAN_CAP)
}

pub fn brute_solve_capped(inst: &WorkflowInstance, cap: u64) -> Result<BruteOutcome, OracleError> {
    let k = inst.k();
    let choices: Vec<&[UserId]> = inst.steps().map(|s| inst.users_for(s)).collect();
    let count = choices
        .iter()
        .fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128));
    if count > cap as u128 {
        return Err(OracleError::CapExceeded { count, cap });
    }
    let mut witnesses = Vec::new();
    if count == 0 {
        return Ok(BruteOutcome { witnesses });
    }
    // odometer, last step fastest
    let mut digits = vec![0usize; k];
    loop {
        let users: Vec<UserId> = (0..k).map(|i| choices[i][digits[i]]).collect();
        let plan = Plan::from_users(&users);
        if inst.is_eligible(&plan) {
            witnesses.push(plan);
        }
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(BruteOutcome { witnesses });
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < choices[i].len() {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// Every valid partial plan (the empty plan included) that uses only users
/// from `users`.
pub fn valid_partial_plans(
    inst: &WorkflowInstance,
    users: &[UserId],
) -> Result<Vec<Plan>, OracleError> {
    let k = inst.k();
    let options = users.len() as u128 + 1;
    let count = options.saturating_pow(k as u32);
    if count > DEFAULT_PLAN_CAP as u128 {
        return Err(OracleError::CapExceeded {
            count,
            cap: DEFAULT_PLAN_CAP,
        });
    }
    let mut out = Vec::new();
    for code in 0..count {
        let mut plan = Plan::new(k);
        let mut c = code;
        for s in 0..k {
            let digit = (c % options) as usize;
            c /= options;
            if digit > 0 {
                plan.assign(StepId(s as u32), users[digit - 1]);
            }
        }
        if inst.is_valid(&plan) {
            out.push(plan);
        }
    }
    Ok(out)
}

/// Exhaustive 0/1 search. Returns a satisfying assignment (indexed by
/// variable position) if one exists.
pub fn brute_pb(model: &PbModel) -> Result<Option<Vec<bool>>, OracleError> {
    let n = model.variables.len();
    if n > MAX_PB_VARIABLES {
        return Err(OracleError::TooManyVariables(n));
    }
    let mut values = vec![false; n];
    for code in 0u64..(1u64 << n) {
        for (i, v) in values.iter_mut().enumerate() {
            *v = code >> i & 1 == 1;
        }
        let all_hold = model.constraints.iter().all(|row| {
            let lhs: i64 = row
                .terms
                .iter()
                .map(|&(coef, var)| if values[var - 1] { coef } else { 0 })
                .sum();
            match row.relation {
                Relation::Eq => lhs == row.bound,
                Relation::Ge => lhs >= row.bound,
                Relation::Le => lhs <= row.bound,
            }
        });
        if all_hold {
            return Ok(Some(values));
        }
    }
    Ok(None)
}

/// All set partitions of `{0, ..., m-1}`, each as a list of blocks.
pub fn enumerate_partitions(m: usize) -> Result<Vec<Vec<Vec<usize>>>, OracleError> {
    if m > 12 {
        return Err(OracleError::TooManyElements(m));
    }
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    place(0, m, &mut blocks, &mut out);
    Ok(out)
}

// element `next` joins an existing block or opens a new one
fn place(next: usize, m: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
    if next == m {
        out.push(blocks.clone());
        return;
    }
    for b in 0..blocks.len() {
        blocks[b].push(next);
        place(next + 1, m, blocks, out);
        blocks[b].pop();
    }
    blocks.push(vec![next]);
    place(next + 1, m, blocks, out);
    blocks.pop();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Constraint, StepSet};
    use crate::testing::{instance1, plan};

    fn bell(m: usize) -> u64 {
        // B_{n+1} = sum_i C(n, i) B_i
        let mut b = vec![1u64];
        for n in 0..m {
            let mut c = 1u64;
            let mut next = 0;
            for (i, bi) in b.iter().enumerate() {
                next += c * bi;
                c = c * (n - i) as u64 / (i + 1) as u64;
            }
            b.push(next);
        }
        b[m]
    }

    #[test]
    fn instance1_has_six_solutions() {
        let out = brute_solve(&instance1()).unwrap();
        assert!(out.is_satisfiable());
        assert_eq!(out.witnesses.len(), 6);
        assert_eq!(
            out.witnesses[0],
            plan(&[Some(2), Some(2), Some(4), Some(5)])
        );
        for w in &out.witnesses {
            assert!(instance1().is_valid_complete(w));
            assert_eq!(w.get(StepId(0)), Some(UserId(1)));
            assert_eq!(w.get(StepId(1)), Some(UserId(1)));
        }
    }

    #[test]
    fn single_user_not_equals_is_unsat() {
        let inst = WorkflowInstance::new(
            2,
            vec![StepSet::full(2)],
            vec![Constraint::NotEquals(StepId(0), StepId(1))],
        )
        .unwrap();
        assert!(!brute_solve(&inst).unwrap().is_satisfiable());
    }

    #[test]
    fn cap_is_enforced() {
        let inst = WorkflowInstance::new(8, vec![StepSet::full(8); 10], vec![]).unwrap();
        assert!(matches!(
            brute_solve(&inst),
            Err(OracleError::CapExceeded { .. })
        ));
    }

    #[test]
    fn partition_counts_follow_bell_recurrence() {
        assert_eq!(enumerate_partitions(0).unwrap().len(), 1);
        assert_eq!(enumerate_partitions(3).unwrap().len(), 5);
        assert_eq!(enumerate_partitions(4).unwrap().len(), 15);
        assert_eq!(enumerate_partitions(6).unwrap().len(), 203);
        for m in 0..=10 {
            assert_eq!(
                enumerate_partitions(m).unwrap().len() as u64,
                bell(m),
                "m={m}"
            );
        }
        assert!(enumerate_partitions(13).is_err());
    }

    #[test]
    fn partitions_are_distinct_and_cover() {
        let parts = enumerate_partitions(5).unwrap();
        let mut canon: Vec<Vec<Vec<usize>>> = parts
            .iter()
            .map(|p| {
                let mut p = p.clone();
                p.sort();
                p
            })
            .collect();
        canon.sort();
        canon.dedup();
        assert_eq!(canon.len(), parts.len());
        for p in &parts {
            let mut all: Vec<usize> = p.iter().flatten().copied().collect();
            all.sort();
            assert_eq!(all, vec![0, 1, 2, 3, 4]);
        }
    }

    #[test]
    fn partial_plans_include_empty_plan() {
        let inst = instance1();
        let plans = valid_partial_plans(&inst, &[UserId(0)]).unwrap();
        // empty plan and s1 -> u1
        assert_eq!(plans.len(), 2);
    }
}
