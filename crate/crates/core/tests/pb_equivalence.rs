use proptest::prelude::*;

use wsp_core::gen::micro_instance;
use wsp_core::oracle::{brute_pb, brute_solve, MAX_PB_VARIABLES};
use wsp_core::pb::{
    decode_solution, emit_opb, encode, parse_assignment, plan_to_assignment, read_opb, Origin,
    PbModel, VarKind,
};
use wsp_core::{Constraint, StepId, StepSet, WorkflowInstance};

/// Seeded micro instances without equals whose encoding fits `brute_pb`.
fn small_models(count: usize) -> Vec<(WorkflowInstance, PbModel)> {
    let mut out = Vec::new();
    let mut seed = 0xb0b0_0000u64;
    while out.len() < count {
        seed += 1;
        let k = 1 + (seed % 4) as usize;
        let n = 1 + (seed / 4 % 3) as usize;
        let inst = micro_instance(seed, k, n, false);
        let model = encode(&inst).unwrap();
        if model.variables.len() <= MAX_PB_VARIABLES {
            out.push((inst, model));
        }
    }
    out
}

#[test]
fn pb_satisfiability_matches_plan_satisfiability() {
    let mut sat = 0;
    for (i, (inst, model)) in small_models(250).iter().enumerate() {
        let plans = brute_solve(inst).unwrap();
        let assignment = brute_pb(model).unwrap();
        assert_eq!(plans.is_satisfiable(), assignment.is_some(), "model {i}");
        if let Some(values) = assignment {
            sat += 1;
            let plan = decode_solution(model, &values).unwrap();
            assert!(inst.is_valid_complete(&plan), "model {i}: {plan}");
        }
        for w in &plans.witnesses {
            let values = plan_to_assignment(model, inst, w);
            assert!(model.is_satisfied_by(&values));
            assert_eq!(&decode_solution(model, &values).unwrap(), w);
        }
    }
    assert!(
        sat > 25 && sat < 225,
        "unbalanced sample: {sat} satisfiable"
    );
}

#[test]
fn variables_follow_the_documented_order() {
    for (_, model) in small_models(100) {
        let rank = |k: &VarKind| match k {
            VarKind::X { step, user } => (0, step.0 as usize, user.0 as usize),
            VarKind::Z { constraint, user } => (1, *constraint, user.0 as usize),
            VarKind::Y { constraint, user } => (2, *constraint, user.0 as usize),
        };
        let ranks: Vec<_> = model.variables.iter().map(|v| rank(&v.kind)).collect();
        assert!(ranks.windows(2).all(|w| w[0] < w[1]));
        let origins: Vec<Origin> = model.constraints.iter().map(|c| c.origin).collect();
        assert!(origins.windows(2).all(|w| w[0] <= w[1]));
        for (i, v) in model.variables.iter().enumerate() {
            assert_eq!(v.index, i + 1);
        }
    }
}

#[test]
fn opb_text_round_trips() {
    for (_, model) in small_models(100) {
        let (opb, map) = emit_opb(&model);
        let back = read_opb(&opb, &map).unwrap();
        assert_eq!(back, model);
        assert_eq!(emit_opb(&back), (opb, map));
    }
}

#[test]
fn empty_authorization_list_makes_model_unsat() {
    let inst = WorkflowInstance::new(2, vec![StepSet(0b01), StepSet(0b01)], vec![]).unwrap();
    let model = encode(&inst).unwrap();
    assert_eq!(model.unassignable_steps(), vec![StepId(1)]);
    assert_eq!(brute_pb(&model).unwrap(), None);
}

#[test]
fn not_equals_two_by_two_is_satisfiable() {
    let inst = WorkflowInstance::new(
        2,
        vec![StepSet::full(2); 2],
        vec![Constraint::NotEquals(StepId(0), StepId(1))],
    )
    .unwrap();
    let model = encode(&inst).unwrap();
    let values = brute_pb(&model).unwrap().unwrap();
    let plan = decode_solution(&model, &values).unwrap();
    assert!(inst.is_valid_complete(&plan));
    // x1 = X u1 s1, x4 = X u2 s2
    assert!(model.is_satisfied_by(&parse_assignment("x1 -x2 -x3 x4", 4).unwrap()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn assignment_text_round_trips(values in proptest::collection::vec(any::<bool>(), 1..40)) {
        let text: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| if v { format!("x{}", i + 1) } else { format!("-x{}", i + 1) })
            .collect();
        let line = format!("v {}", text.join(" "));
        prop_assert_eq!(parse_assignment(&line, values.len()).unwrap(), values);
    }
}
