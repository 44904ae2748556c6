use ssmds_core::codes::{
    assemble, build_c1, build_c2, build_c3, build_c4_r2, build_c5, build_from_config, build_iyb2, build_long_c4p,
    build_yb2, CodeConfig, ConstructedCode,
};
use ssmds_core::verify::{
    audit_bandwidth, check_assignment, check_lemma1, check_mds, check_mds_decomposed, check_optimal_update,
    check_reconstruction, check_repair, VerifyError, Witness,
};

fn yb1() -> ConstructedCode {
    let cfg: CodeConfig = serde_json::from_str(r#"{"family":"YB1","r":2,"n_prime":3}"#).unwrap();
    build_from_config(&cfg).unwrap()
}

fn instances() -> Vec<ConstructedCode> {
    vec![
        yb1(),
        build_yb2(4, 2, None).unwrap(),
        build_iyb2(4, 2, None).unwrap(),
        build_long_c4p(2, 2, None, None, None).unwrap(),
        build_c1(3, 2, 12, None).unwrap(),
        build_c2(4, 2, 8, None).unwrap(),
        build_c3(4, 2, 8, None).unwrap(),
        build_c4_r2(2, 12, None).unwrap(),
        build_c5(3, 2, 12, None).unwrap(),
        build_c3(3, 3, 6, None).unwrap(),
    ]
}

#[test]
fn three_mds_oracles_agree() {
    for code in instances() {
        let broken = code.with_node_copied(0, code.n() - 1);
        for c in [&code, &broken] {
            let dense = check_mds(c).unwrap();
            let decomposed = check_mds_decomposed(c).unwrap();
            let rebuilt = check_reconstruction(c, 11).unwrap();
            assert_eq!(dense.passed, decomposed.passed, "{}", c.spec().family);
            assert_eq!(dense.witnesses, decomposed.witnesses);
            assert_eq!(dense.total_failures, decomposed.total_failures);
            // reconstruction witnesses list the erased nodes
            assert_eq!(dense.total_failures, rebuilt.total_failures, "{}", c.spec().family);
        }
        assert!(check_mds(&code).unwrap().passed, "{}", code.spec().family);
        assert!(!check_mds(&broken).unwrap().passed);
    }
}

#[test]
fn lemma1_pass_implies_mds() {
    for code in instances() {
        if check_lemma1(&code).passed {
            assert!(check_mds(&code).unwrap().passed, "{}", code.spec().family);
        }
    }
}

#[test]
fn constructions_pass_repair_and_bandwidth() {
    for code in instances() {
        assert!(check_repair(&code).passed, "{}", code.spec().family);
        assert!(audit_bandwidth(&code).passed, "{}", code.spec().family);
        assert!(check_assignment(&code).passed, "{}", code.spec().family);
    }
}

#[test]
fn duplicated_node_is_witnessed() {
    let code = build_c1(3, 2, 12, None).unwrap().with_node_copied(0, 5);
    let report = check_mds(&code).unwrap();
    assert!(!report.passed);
    assert!(report.witnesses.contains(&Witness::Subset { nodes: vec![0, 5] }));
    assert_eq!(report.total_failures, 1);
    assert_eq!(report.checked, 66);
}

#[test]
fn witness_lists_are_capped_and_deterministic() {
    let base = build_c1(3, 2, 12, None).unwrap();
    let mut code = base.clone();
    for i in 1..12 {
        code = code.with_node_copied(0, i);
    }
    let a = check_mds(&code).unwrap();
    let b = check_mds(&code).unwrap();
    assert_eq!(a.total_failures, 66);
    assert_eq!(a.witnesses.len(), 32);
    assert_eq!(a.witnesses, b.witnesses);
    assert_eq!(a.witnesses[0], Witness::Subset { nodes: vec![0, 1] });
}

#[test]
fn oversized_dense_check_is_refused() {
    let code = build_c1(4, 3, 8, None).unwrap();
    assert!(matches!(check_mds(&code), Err(VerifyError::TooLarge { subsets: 56, dim: 243 })));
    assert!(check_mds_decomposed(&code).unwrap().passed);
}

#[test]
fn optimal_update_controls() {
    assert!(check_optimal_update(&build_c1(3, 2, 12, None).unwrap()).passed);
    assert!(check_optimal_update(&build_c5(3, 2, 12, None).unwrap()).passed);
    let c3 = check_optimal_update(&build_c3(4, 2, 8, None).unwrap());
    assert!(!c3.passed);
    assert!(matches!(c3.witnesses[0], Witness::OffDiagonal { t: 1, node: 0, .. }));
}

#[test]
fn cross_residue_collision_in_direct_family() {
    let code = build_c5(3, 2, 12, None).unwrap();
    let mut asg = code.assignment().clone();
    // node 3 (residue 0) takes node 1's value for digit 0
    asg.lambdas[3][0] = asg.lambdas[1][0];
    let bad = assemble(code.spec().clone(), code.field().clone(), asg).unwrap();
    let assignment = check_assignment(&bad);
    assert!(!assignment.passed);
    assert!(assignment.witnesses.iter().any(|w| matches!(w, Witness::Coefficient { rule, first, second }
        if rule == "cross-residue eigenvalues distinct" && first == &vec![1, 0] && second == &vec![3, 0])));
    let lemma = check_lemma1(&bad);
    assert!(lemma
        .witnesses
        .iter()
        .any(|w| matches!(w, Witness::Pair { i: 1, j: 3, detail } if detail.contains("rank"))));
    assert!(!check_mds(&bad).unwrap().passed);
}

#[test]
fn reused_xi_is_flagged() {
    let code = build_c5(3, 2, 12, None).unwrap();
    let mut asg = code.assignment().clone();
    asg.xis[1][0][0] = asg.xis[0][0][0];
    let report = check_assignment(&code.with_assignment(asg));
    assert!(report
        .witnesses
        .iter()
        .any(|w| matches!(w, Witness::Coefficient { rule, .. } if rule == "xi pairwise distinct")));
}

#[test]
fn long_code_with_repeated_eigenvalue_is_flagged() {
    let code = build_long_c4p(2, 2, None, None, None).unwrap();
    let mut asg = code.assignment().clone();
    asg.lambdas[0][1] = asg.lambdas[0][0];
    let report = check_assignment(&code.with_assignment(asg));
    assert!(!report.passed);
    assert!(
        matches!(&report.witnesses[0], Witness::Coefficient { rule, .. } if rule == "per-node eigenvalues distinct")
    );
}

#[test]
fn reports_serialize() {
    let report = check_repair(&build_c1(3, 2, 12, None).unwrap());
    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["property"], "repair");
    assert_eq!(json["passed"], true);
    assert_eq!(json["checked"], 12);
}
