//! Acceptance suite: the ten top-level criteria, each as one test (one
//! pass/fail line), all at tolerance 1e-9.

use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;
use wqg_core::action::{
    crossed_product, self_action, takai_duality, trivial_action, verify_action,
};
use wqg_core::coliaison::{
    cocycle_twist_linking, corner_bimodules, corner_group, finite_quantum_group,
    linking_regularity, standard_bicharacter_z2xz2, trivial_linking, FiniteGroup,
    LinkingGroupoid, Presentation,
};
use wqg_core::groupoid::{
    build_v, build_w, dual_data, regularity, theorem_2_13, verify_groupoid, verify_structure,
    RegularReps,
};
use wqg_core::induction::{bidual_morita_check, roundtrip, self_corner_action};
use wqg_core::Error;

const TOL: f64 = 1e-9;

fn build_presets() -> Vec<(String, LinkingGroupoid)> {
    let mut out = Vec::new();
    for (name, gr) in [
        ("trivial-linking:Z2", FiniteGroup::cyclic(2)),
        ("trivial-linking:Z3", FiniteGroup::cyclic(3)),
        ("trivial-linking:Z4", FiniteGroup::cyclic(4)),
        ("trivial-linking:Z2xZ2", FiniteGroup::z2xz2()),
    ] {
        let g = finite_quantum_group(&gr, Presentation::Functions, TOL).unwrap();
        out.push((name.to_string(), trivial_linking(&g, TOL).unwrap()));
    }
    let cl = cocycle_twist_linking(&FiniteGroup::z2xz2(), &standard_bicharacter_z2xz2(), TOL)
        .unwrap();
    out.push(("cocycle-linking:Z2xZ2:standard".to_string(), cl.linking));
    out
}

fn presets() -> &'static [(String, LinkingGroupoid)] {
    static PRESETS: OnceLock<Vec<(String, LinkingGroupoid)>> = OnceLock::new();
    PRESETS.get_or_init(build_presets)
}

fn presets_with_reps() -> &'static [(String, LinkingGroupoid, RegularReps)] {
    static WITH_REPS: OnceLock<Vec<(String, LinkingGroupoid, RegularReps)>> = OnceLock::new();
    WITH_REPS.get_or_init(|| {
        presets()
            .iter()
            .map(|(name, l)| {
                let v = build_v(&l.underlying, TOL).unwrap();
                let w = build_w(&l.underlying).unwrap();
                let reps = dual_data(&l.underlying, &v, &w, TOL).unwrap();
                (name.clone(), l.clone(), reps)
            })
            .collect()
    })
}

#[test]
fn criterion_01_axiom_suite_on_every_preset_within_ten_seconds() {
    let start = Instant::now();
    for (name, l) in build_presets() {
        let rep = verify_groupoid(&l.underlying, TOL);
        assert!(rep.passed(), "{name}:\n{}", rep.render());
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "axiom suite took {elapsed:.2?}");
}

#[test]
fn criterion_02_pentagon_and_support_identities() {
    let wanted = [
        "pentagon for W",
        "pentagon for V",
        "pentagon for Vtilde",
        "V*V = q_{alphahat,beta}",
        "VV* = q_{beta,alpha}",
        "W*W = q_{beta,alpha}",
        "WW* = q_{alpha,betahat}",
        "Vt*Vt = q_{betahat,alphahat}",
        "VtVt* = q_{alphahat,beta}",
    ];
    for (name, l, reps) in presets_with_reps() {
        let rep = verify_structure(&l.underlying, reps, TOL);
        for check in wanted {
            let c = rep.get(check).unwrap_or_else(|| panic!("{name}: missing '{check}'"));
            assert!(c.pass, "{name}: {check} residual {:.3e}", c.residual);
        }
    }
}

#[test]
fn criterion_03_theorem_2_13_scalars_are_unimodular() {
    for (name, l, reps) in presets_with_reps() {
        let lambdas = theorem_2_13(&l.underlying, reps, TOL)
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        for (i, v) in lambdas.iter().enumerate() {
            assert!(
                (v.norm() - 1.0).abs() <= TOL,
                "{name}: |lambda_{i}| = {} is not unimodular",
                v.norm()
            );
        }
    }
}

#[test]
fn criterion_04_coproduct_is_implemented_by_v_and_w() {
    for (name, l, reps) in presets_with_reps() {
        let rep = verify_structure(&l.underlying, reps, TOL);
        for check in ["delta(x) = V(x x 1)V*", "delta(x) = W*(1 x x)W"] {
            let c = rep.get(check).unwrap_or_else(|| panic!("{name}: missing '{check}'"));
            assert!(c.pass, "{name}: {check} residual {:.3e}", c.residual);
        }
    }
}

#[test]
fn criterion_05_regularity_holds_blockwise() {
    for (name, l, reps) in presets_with_reps() {
        let rep = regularity(&l.underlying, reps, TOL);
        assert!(rep.passed(), "{name}:\n{}", rep.render());
        let rep = linking_regularity(l, reps, TOL).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(rep.passed(), "{name}:\n{}", rep.render());
    }
}

#[test]
fn criterion_06_takesaki_takai_biduality() {
    // Trivial action on every preset; self action where the decomposition
    // Gram matrices stay tractable (see the scoping notes in the README).
    for (name, l, reps) in presets_with_reps() {
        let act = trivial_action(&l.underlying, TOL).unwrap();
        let rep = takai_duality(&l.underlying, &reps, &act, TOL).unwrap();
        assert!(rep.passed(), "{name} trivial:\n{}", rep.render());
    }
    for (name, l, reps) in &presets_with_reps()[..2] {
        let act = self_action(&l.underlying, TOL).unwrap();
        let rep = takai_duality(&l.underlying, reps, &act, TOL).unwrap();
        assert!(rep.passed(), "{name} self:\n{}", rep.render());
    }
    // Self actions of all corner quantum groups of the Z2 preset.
    let (_, l, _) = &presets_with_reps()[0];
    for j in [0, 1] {
        let g = corner_group(l, j).unwrap();
        let v = build_v(&g, TOL).unwrap();
        let w = build_w(&g).unwrap();
        let reps = dual_data(&g, &v, &w, TOL).unwrap();
        let act = self_action(&g, TOL).unwrap();
        let rep = takai_duality(&g, &reps, &act, TOL).unwrap();
        assert!(rep.passed(), "corner {j} self:\n{}", rep.render());
    }
}

#[test]
fn criterion_07_trivial_crossed_product_is_the_dual_algebra() {
    for (name, l, reps) in presets_with_reps() {
        let act = trivial_action(&l.underlying, TOL).unwrap();
        let (cp, rep) = crossed_product(&l.underlying, reps, &act, TOL);
        assert!(rep.passed(), "{name}:\n{}", rep.render());
        assert_eq!(cp.b.dim(), reps.shat.dim(), "{name}: dim B != dim Shat");
    }
}

#[test]
fn criterion_08_induction_round_trip_on_every_preset() {
    for (name, l) in presets() {
        let act = self_corner_action(l, 0, TOL).unwrap();
        let rep = roundtrip(l, &act, TOL).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(rep.passed(), "{name}:\n{}", rep.render());
    }
}

#[test]
fn criterion_09_morita_suite_and_bidual_morita_check() {
    for (name, l, reps) in presets_with_reps() {
        let (grid, rep) = corner_bimodules(l, reps, TOL);
        assert!(rep.passed(), "{name}:\n{}", rep.render());
        assert_eq!(grid.len(), 8, "{name}: bimodule grid size");
    }
    let (name, l, reps) = &presets_with_reps()[0];
    let act = self_corner_action(l, 0, TOL).unwrap();
    let rep = bidual_morita_check(l, reps, &act, TOL).unwrap_or_else(|e| panic!("{name}: {e}"));
    assert!(rep.passed(), "{name}:\n{}", rep.render());
}

#[test]
fn criterion_10_negative_controls_name_the_broken_check() {
    // Coassociativity: an asymmetric bump in the coproduct structure
    // constants must fail the named coassociativity check.
    let mut l = presets()[0].1.clone();
    let mut d0 = l.underlying.delta_coeffs[0].clone();
    let v = d0.get(0, 0);
    d0.set(0, 0, v + Complex64::new(0.1, 0.0));
    l.underlying.delta_coeffs[0] = d0;
    let rep = verify_groupoid(&l.underlying, TOL);
    let c = rep.get("coassociativity").unwrap();
    assert!(!c.pass, "seeded coassociativity defect not detected");
    assert!(c.residual > 1e-3);

    // Cocycle identity: a phase bump in the bicharacter table must be
    // rejected as a cocycle defect.
    let mut omega = standard_bicharacter_z2xz2();
    let v = omega.get(1, 1);
    omega.set(1, 1, v * Complex64::new(0.0, 0.1).exp());
    match cocycle_twist_linking(&FiniteGroup::z2xz2(), &omega, TOL) {
        Err(Error::CocycleDefect(_)) => {}
        Err(e) => panic!("expected a cocycle defect, got {e}"),
        Ok(_) => panic!("seeded cocycle defect not detected"),
    }

    // Action continuity: collapsing the coaction range onto delta_A(1)
    // must fail the named continuity check (span equalities are
    // scale-invariant, so the defect is seeded at rank level).
    let l = &presets()[0].1;
    let mut act = self_action(&l.underlying, TOL).unwrap();
    for d in act.delta_a.iter_mut() {
        *d = act.q_a.clone();
    }
    let rep = verify_action(&l.underlying, &act, TOL);
    let c = rep.get("continuity [delta_A(A)(1 x S)] = q(A x S)").unwrap();
    assert!(!c.pass, "seeded continuity defect not detected");
    assert!(c.residual > 1e-3);
}
