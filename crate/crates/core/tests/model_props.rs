use proptest::prelude::*;

use wsp_core::gen::{self, micro_instance, GenParams};
use wsp_core::model::{parse_instance, serialize_instance, violates};
use wsp_core::{Plan, StepSet, UserId, WorkflowInstance};

fn arb_instance() -> impl Strategy<Value = WorkflowInstance> {
    (any::<u64>(), 1usize..=6, 1usize..=5, any::<bool>())
        .prop_map(|(seed, k, n, eq)| micro_instance(seed, k, n, eq))
}

/// Any assignment of steps to users (or nobody), authorized or not.
fn arb_plan(k: usize, n: usize) -> impl Strategy<Value = Plan> {
    proptest::collection::vec(proptest::option::of(0..n as u32), k)
        .prop_map(|v| Plan::from_assignment(v.into_iter().map(|u| u.map(UserId)).collect()))
}

fn instance_and_plan() -> impl Strategy<Value = (WorkflowInstance, Plan, u64)> {
    arb_instance().prop_flat_map(|inst| {
        let plan = arb_plan(inst.k(), inst.n());
        (Just(inst), plan, any::<u64>())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn violation_is_monotone_under_extension((inst, plan, mask) in instance_and_plan()) {
        let sub = plan.restrict(StepSet(mask));
        for c in inst.constraints() {
            if violates(c, &sub) {
                prop_assert!(violates(c, &plan), "{c} violated by {sub} but not by {plan}");
            }
        }
    }

    #[test]
    fn restriction_of_eligible_plan_is_eligible((inst, plan, mask) in instance_and_plan()) {
        if inst.is_eligible(&plan) {
            prop_assert!(inst.is_eligible(&plan.restrict(StepSet(mask))));
        }
        if inst.is_valid(&plan) {
            prop_assert!(inst.is_valid(&plan.restrict(StepSet(mask))));
        }
    }

    #[test]
    fn validity_is_authorized_and_eligible((inst, plan, _) in instance_and_plan()) {
        prop_assert_eq!(inst.is_valid(&plan), inst.is_authorized(&plan) && inst.is_eligible(&plan));
        prop_assert_eq!(
            inst.is_valid_complete(&plan),
            inst.is_valid(&plan) && plan.is_complete()
        );
        prop_assert_eq!(inst.diagnose(&plan).is_empty(), inst.is_valid_complete(&plan));
    }

    #[test]
    fn instance_text_round_trips(inst in arb_instance()) {
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(serialize_instance(&back), text);
        prop_assert_eq!(back.constraints(), inst.constraints());
    }

    #[test]
    fn plan_text_round_trips((inst, plan, _) in instance_and_plan()) {
        let text = plan.to_string();
        prop_assert_eq!(Plan::parse(&text, inst.k()).unwrap(), plan);
    }
}

fn assert_transpose(inst: &WorkflowInstance) {
    for u in inst.users() {
        for s in inst.steps() {
            assert_eq!(
                inst.auth(u).contains(s),
                inst.users_for(s).contains(&u),
                "({u},{s})"
            );
        }
    }
}

#[test]
fn generated_instances_round_trip_byte_identically() {
    for seed in 0..100 {
        let p = GenParams::new(
            5 + (seed % 20) as usize,
            30,
            (seed * 7 % 101) as u32,
            2,
            seed,
        );
        let inst = gen::generate(&p).unwrap();
        assert_transpose(&inst);
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        assert_transpose(&back);
        assert_eq!(serialize_instance(&back), text, "seed {seed}");
    }
}
