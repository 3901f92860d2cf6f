//! Groupoid verification oracles on finite quantum groups.

use num_complex::Complex64 as C64;

use wqg_core::coliaison::{finite_quantum_group, FiniteGroup, Presentation};
use wqg_core::groupoid::{
    build_v, build_w, c_of, dual_data, regularity, theorem_2_13, verify_groupoid,
    verify_structure,
};
use wqg_core::linalg::CMatrix;
use wqg_core::DEFAULT_TOL as TOL;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn axioms_pass_trivial_group() {
    let g = finite_quantum_group(&FiniteGroup::cyclic(1), Presentation::Functions, TOL).unwrap();
    let rep = verify_groupoid(&g, TOL);
    assert!(rep.passed(), "{}", rep.render());
    // W = V = 1 on the one-dimensional space
    let w = build_w(&g).unwrap();
    let v = build_v(&g, TOL).unwrap();
    assert!(w.sub(&CMatrix::identity(1)).fro_norm() < 1e-12);
    assert!(v.sub(&CMatrix::identity(1)).fro_norm() < 1e-12);
    let reps = dual_data(&g, &v, &w, TOL).unwrap();
    assert_eq!(reps.s.dim(), 1);
    assert_eq!(reps.shat.dim(), 1);
    let lam = theorem_2_13(&g, &reps, TOL).unwrap();
    assert_eq!(lam.len(), 1);
    assert!((lam[0] - c(1.0, 0.0)).norm() < 1e-9);
}

#[test]
fn axioms_pass_functions_z2() {
    let g = finite_quantum_group(&FiniteGroup::cyclic(2), Presentation::Functions, TOL).unwrap();
    let rep = verify_groupoid(&g, TOL);
    assert!(rep.passed(), "{}", rep.render());
    for chk in &rep.checks {
        assert!(chk.residual <= 1e-12, "{}: {}", chk.name, chk.residual);
    }
}

#[test]
fn perturbed_coproduct_fails_coassociativity() {
    let mut g =
        finite_quantum_group(&FiniteGroup::cyclic(2), Presentation::Functions, TOL).unwrap();
    // bump one structure constant by 0.1
    let cur = g.delta_coeffs[0].get(0, 0);
    g.delta_coeffs[0].set(0, 0, cur + c(0.1, 0.0));
    let rep = verify_groupoid(&g, TOL);
    assert!(!rep.passed());
    let coassoc = rep.get("coassociativity").unwrap();
    assert!(coassoc.residual >= 0.05, "residual {}", coassoc.residual);
}

#[test]
fn w_oracle_functions_z2() {
    // W(δ_g⊗δ_h) = δ_g⊗δ_{gh} in the normalized GNS basis of C(Z₂)
    let g = finite_quantum_group(&FiniteGroup::cyclic(2), Presentation::Functions, TOL).unwrap();
    let w = build_w(&g).unwrap();
    let mut expected = CMatrix::zeros(4, 4);
    for gg in 0..2 {
        for h in 0..2 {
            expected.set(gg * 2 + (gg + h) % 2, gg * 2 + h, c(1.0, 0.0));
        }
    }
    assert!(w.sub(&expected).fro_norm() < 1e-12, "{:?}", w);
}

#[test]
fn v_oracle_functions_z3() {
    // V(δ_x⊗δ_y) = δ_{xy⁻¹}⊗δ_y; tracial Haar, so Λ_ψ = Λ
    let g = finite_quantum_group(&FiniteGroup::cyclic(3), Presentation::Functions, TOL).unwrap();
    let v = build_v(&g, TOL).unwrap();
    let mut expected = CMatrix::zeros(9, 9);
    for x in 0..3 {
        for y in 0..3 {
            expected.set(((x + 3 - y) % 3) * 3 + y, x * 3 + y, c(1.0, 0.0));
        }
    }
    assert!(v.sub(&expected).fro_norm() < 1e-12, "{:?}", v);
}

#[test]
fn structure_suite_functions_z2() {
    let g = finite_quantum_group(&FiniteGroup::cyclic(2), Presentation::Functions, TOL).unwrap();
    let w = build_w(&g).unwrap();
    let v = build_v(&g, TOL).unwrap();
    let reps = dual_data(&g, &v, &w, TOL).unwrap();
    // Pontryagin: Ŝ ≅ C[Z₂] has dimension 2
    assert_eq!(reps.shat.dim(), 2);
    assert_eq!(reps.s.dim(), 2);
    let rep = verify_structure(&g, &reps, TOL);
    assert!(rep.passed(), "{}", rep.render());
}

#[test]
fn structure_suite_group_algebra_z2() {
    let g = finite_quantum_group(&FiniteGroup::cyclic(2), Presentation::GroupAlgebra, TOL).unwrap();
    let rep = verify_groupoid(&g, TOL);
    assert!(rep.passed(), "{}", rep.render());
    let w = build_w(&g).unwrap();
    let v = build_v(&g, TOL).unwrap();
    let reps = dual_data(&g, &v, &w, TOL).unwrap();
    let rep = verify_structure(&g, &reps, TOL);
    assert!(rep.passed(), "{}", rep.render());
}

#[test]
fn structure_suite_functions_z3_and_z2xz2() {
    for gr in [FiniteGroup::cyclic(3), FiniteGroup::z2xz2()] {
        let g = finite_quantum_group(&gr, Presentation::Functions, TOL).unwrap();
        let w = build_w(&g).unwrap();
        let v = build_v(&g, TOL).unwrap();
        let reps = dual_data(&g, &v, &w, TOL).unwrap();
        let rep = verify_structure(&g, &reps, TOL);
        assert!(rep.passed(), "{}", rep.render());
    }
}

#[test]
fn perturbed_v_breaks_pentagon() {
    let g = finite_quantum_group(&FiniteGroup::cyclic(2), Presentation::Functions, TOL).unwrap();
    let w = build_w(&g).unwrap();
    let mut v = build_v(&g, TOL).unwrap();
    let cur = v.get(0, 0);
    v.set(0, 0, cur + c(0.05, 0.0));
    let reps = dual_data(&g, &v, &w, TOL);
    // either the dual construction fails outright, or the pentagon breaks
    if let Ok(reps) = reps {
        let rep = verify_structure(&g, &reps, TOL);
        let pent = rep.get("pentagon for V").unwrap();
        assert!(pent.residual > 1e-3, "residual {}", pent.residual);
    }
}

#[test]
fn theorem_2_13_scalars_unit_modulus() {
    for pres in [Presentation::Functions, Presentation::GroupAlgebra] {
        let g = finite_quantum_group(&FiniteGroup::cyclic(2), pres, TOL).unwrap();
        let w = build_w(&g).unwrap();
        let v = build_v(&g, TOL).unwrap();
        let reps = dual_data(&g, &v, &w, TOL).unwrap();
        let lam = theorem_2_13(&g, &reps, TOL).unwrap();
        assert_eq!(lam.len(), 1);
        assert!((lam[0].norm() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn regularity_finite_quantum_groups() {
    for gr in [FiniteGroup::cyclic(2), FiniteGroup::cyclic(3)] {
        let g = finite_quantum_group(&gr, Presentation::Functions, TOL).unwrap();
        let w = build_w(&g).unwrap();
        let v = build_v(&g, TOL).unwrap();
        let reps = dual_data(&g, &v, &w, TOL).unwrap();
        // finite quantum groups are regular: C(V) = B(H)
        let cv = c_of(&v, g.dim_h, TOL);
        assert_eq!(cv.dim(), g.dim_h * g.dim_h);
        let rep = regularity(&g, &reps, TOL);
        assert!(rep.passed(), "{}", rep.render());
    }
}
