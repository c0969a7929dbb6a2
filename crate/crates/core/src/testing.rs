//! Shared test vectors: the four-step, six-user running example and helpers.

use crate::model::{parse_instance, Plan, UserId, WorkflowInstance};

pub const INSTANCE1_TEXT: &str = "\
wsp 1
steps 4
users 6
auth u1: s1
auth u2: s1 s2 s3 s4
auth u3: s2
auth u4: s3 s4
auth u5: s3 s4
auth u6: s3 s4
eq s1 s2
ne s2 s3
ne s3 s4
ne s1 s4
";

pub fn instance1() -> WorkflowInstance {
    parse_instance(INSTANCE1_TEXT).expect("instance 1 parses")
}

/// Plan from 1-based user numbers, `None` for unassigned steps.
pub fn plan(users: &[Option<u32>]) -> Plan {
    Plan::from_assignment(users.iter().map(|u| u.map(|u| UserId(u - 1))).collect())
}

/// pi1..pi4 of the worked example, in order.
pub fn example_plans() -> [Plan; 4] {
    [
        plan(&[Some(1), Some(2), Some(4), Some(5)]),
        plan(&[Some(1), Some(1), Some(4), Some(5)]),
        plan(&[Some(1), None, Some(4), Some(5)]),
        plan(&[Some(2), Some(2), Some(4), Some(5)]),
    ]
}
