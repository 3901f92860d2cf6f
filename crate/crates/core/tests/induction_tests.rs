use num_complex::Complex64;
use wqg_core::action::{decompose_linking_action, verify_action};
use wqg_core::coliaison::{
    cocycle_twist_linking, finite_quantum_group, standard_bicharacter_z2xz2, trivial_linking,
    FiniteGroup, LinkingGroupoid, Presentation,
};
use wqg_core::groupoid::{build_v, build_w, dual_data, RegularReps};
use wqg_core::induction::{
    amplify_action, bidual_morita_check, compose_induced, express, induce_algebra,
    induce_linking_algebra, induce_module, induce_morphism, induce_operator, induced_coaction,
    reconstruct_linking_action, roundtrip, self_corner_action, trivial_corner_action,
    verify_corner_action, CornerAction,
};
use wqg_core::linalg::CMatrix;
use wqg_core::Error;

const TOL: f64 = 1e-9;

fn linking_z2() -> LinkingGroupoid {
    let g = finite_quantum_group(&FiniteGroup::cyclic(2), Presentation::Functions, TOL).unwrap();
    trivial_linking(&g, TOL).unwrap()
}

fn cocycle_linking() -> LinkingGroupoid {
    cocycle_twist_linking(&FiniteGroup::z2xz2(), &standard_bicharacter_z2xz2(), TOL)
        .unwrap()
        .linking
}

fn regular_reps(l: &LinkingGroupoid) -> RegularReps {
    let v = build_v(&l.underlying, TOL).unwrap();
    let w = build_w(&l.underlying).unwrap();
    dual_data(&l.underlying, &v, &w, TOL).unwrap()
}

fn matrix_unit(n: usize, r: usize, s: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m.set(r, s, Complex64::new(1.0, 0.0));
    m
}

#[test]
fn corner_actions_satisfy_the_action_axioms() {
    let l = linking_z2();
    for j in [0, 1] {
        for act in [trivial_corner_action(&l, j), self_corner_action(&l, j, TOL).unwrap()] {
            let rep = verify_corner_action(&l, &act, TOL).unwrap();
            assert!(rep.passed(), "corner {j}:\n{}", rep.render());
        }
    }
}

#[test]
fn trivial_source_induces_a_one_dimensional_algebra() {
    let l = linking_z2();
    let act = trivial_corner_action(&l, 0);
    let ia = induce_algebra(&l, &act, TOL).unwrap();
    assert_eq!(ia.carrier.dim(), 1);
    let rep = induced_coaction(&l, &act, &ia, TOL).unwrap();
    assert!(rep.passed(), "{}", rep.render());
}

#[test]
fn the_self_corner_action_induces_the_connecting_corner() {
    // Ind of (S_11, delta^1_11) on the trivial linking of C(Z2) is S_12
    let l = linking_z2();
    let act = self_corner_action(&l, 0, TOL).unwrap();
    let ia = induce_algebra(&l, &act, TOL).unwrap();
    assert_eq!(ia.carrier.dim(), 2);
    assert_eq!(ia.carrier.dim(), l.corner_members(0, 1).len());
    let rep = induced_coaction(&l, &act, &ia, TOL).unwrap();
    assert!(rep.passed(), "{}", rep.render());
}

#[test]
fn induction_preserves_dimension_on_the_cocycle_preset() {
    let l = cocycle_linking();
    let act = self_corner_action(&l, 0, TOL).unwrap();
    let ia = induce_algebra(&l, &act, TOL).unwrap();
    assert_eq!(ia.carrier.dim(), act.basis.len());
}

#[test]
fn a_corrupted_carrier_fails_the_continuity_check() {
    let l = linking_z2();
    let act = self_corner_action(&l, 0, TOL).unwrap();
    let ia = induce_algebra(&l, &act, TOL).unwrap();
    // rotate one carrier basis element out of the induced algebra
    let g = &l.underlying;
    let mut bad = None;
    for &w in &l.corner_members(0, 1) {
        for a in &act.basis {
            let cand = a.tensor(&g.gns.pi[w]);
            let (_, r) = express(&ia.carrier, &cand).unwrap();
            if r > 0.1 {
                bad = Some(cand);
                break;
            }
        }
        if bad.is_some() {
            break;
        }
    }
    let mut corrupted = ia.action.clone();
    corrupted.basis[0] = corrupted.basis[0].add(&bad.unwrap().scale(Complex64::new(0.1, 0.0)));
    let rep = verify_corner_action(&l, &corrupted, TOL).unwrap();
    let cont = rep.get("continuity [delta_A(A)(1 x S_jj)] = A x S_jj").unwrap();
    assert!(cont.residual > 1e-3, "continuity residual {:.3e}", cont.residual);
}

#[test]
fn the_roundtrip_is_an_equivariant_isomorphism() {
    let l = linking_z2();
    for act in [trivial_corner_action(&l, 0), self_corner_action(&l, 0, TOL).unwrap()] {
        let rep = roundtrip(&l, &act, TOL).unwrap();
        assert!(rep.passed(), "{}", rep.render());
    }
}

#[test]
fn the_roundtrip_holds_on_the_cocycle_preset() {
    let l = cocycle_linking();
    let act = self_corner_action(&l, 0, TOL).unwrap();
    let rep = roundtrip(&l, &act, TOL).unwrap();
    assert!(rep.passed(), "{}", rep.render());
}

#[test]
fn the_identity_morphism_induces_the_identity() {
    let l = linking_z2();
    let act = self_corner_action(&l, 0, TOL).unwrap();
    let ia = induce_algebra(&l, &act, TOL).unwrap();
    let f1: Vec<CMatrix> = act.basis.clone();
    let (f2, rep) = induce_morphism(&l, &act, &act, &f1, &ia, &ia, TOL).unwrap();
    assert!(rep.passed(), "{}", rep.render());
    for (img, z) in f2.iter().zip(&ia.carrier.basis) {
        assert!(img.sub(z).fro_norm() <= TOL);
    }
}

#[test]
fn the_unital_inclusion_induces_the_unit_and_functoriality_holds() {
    let l = linking_z2();
    let act = self_corner_action(&l, 0, TOL).unwrap();
    let ia = induce_algebra(&l, &act, TOL).unwrap();
    let triv = trivial_corner_action(&l, 0);
    let ia_t = induce_algebra(&l, &triv, TOL).unwrap();
    let inc = vec![act.one_mat()];
    let (f2_inc, rep) = induce_morphism(&l, &triv, &act, &inc, &ia_t, &ia, TOL).unwrap();
    assert!(rep.passed(), "{}", rep.render());
    // Ind of the inclusion sends the unit of Ind(C) to the unit of A_2
    let one_t = express(&ia_t.carrier, &ia_t.action.one_mat()).unwrap().0;
    let mut img = CMatrix::zeros(f2_inc[0].rows, f2_inc[0].cols);
    for (c, f) in one_t.iter().zip(&f2_inc) {
        img = img.add(&f.scale(*c));
    }
    assert!(img.sub(&ia.action.one_mat()).fro_norm() <= TOL);
    // Ind(id ∘ inc) = Ind(id) ∘ Ind(inc)
    let id1: Vec<CMatrix> = act.basis.clone();
    let (f2_id, _) = induce_morphism(&l, &act, &act, &id1, &ia, &ia, TOL).unwrap();
    let composed = compose_induced(&ia, &f2_inc, &f2_id).unwrap();
    for (a, b) in composed.iter().zip(&f2_inc) {
        assert!(a.sub(b).fro_norm() <= TOL);
    }
}

#[test]
fn a_non_equivariant_morphism_is_rejected() {
    let l = linking_z2();
    let act = self_corner_action(&l, 0, TOL).unwrap();
    let ia = induce_algebra(&l, &act, TOL).unwrap();
    let mut f1: Vec<CMatrix> = act.basis.clone();
    f1[1] = f1[1].add(&f1[0].scale(Complex64::new(0.1, 0.0)));
    match induce_morphism(&l, &act, &act, &f1, &ia, &ia, TOL) {
        Err(Error::NotEquivariant(_)) => {}
        other => panic!("expected NotEquivariant, got {other:?}"),
    }
}

#[test]
fn reconstruction_passes_the_groupoid_action_axioms() {
    let l = linking_z2();
    for (act, corner_dims) in [
        (trivial_corner_action(&l, 0), [1usize, 1]),
        (self_corner_action(&l, 0, TOL).unwrap(), [2, 2]),
    ] {
        let (act_b, ia, rep) = reconstruct_linking_action(&l, &act, TOL).unwrap();
        assert!(rep.passed(), "{}", rep.render());
        let va = verify_action(&l.underlying, &act_b, TOL);
        assert!(va.passed(), "{}", va.render());
        // the inverse correspondence returns the inputs
        let (spaces, drep) = decompose_linking_action(&l, &act_b, TOL).unwrap();
        assert!(drep.passed(), "{}", drep.render());
        let dims: Vec<usize> = spaces.iter().map(|s| s.dim()).collect();
        assert_eq!(dims, corner_dims.to_vec());
        assert_eq!(ia.carrier.dim(), corner_dims[1]);
    }
}

#[test]
fn reconstruction_holds_on_the_cocycle_preset() {
    let l = cocycle_linking();
    let act = self_corner_action(&l, 0, TOL).unwrap();
    let (_, ia, rep) = reconstruct_linking_action(&l, &act, TOL).unwrap();
    assert!(rep.passed(), "{}", rep.render());
    assert_eq!(ia.carrier.dim(), act.basis.len());
}

#[test]
fn module_induction_matches_the_oracles() {
    let l = linking_z2();
    let act = self_corner_action(&l, 0, TOL).unwrap();
    let b2_dim = induce_algebra(&l, &act, TOL).unwrap().carrier.dim();

    // E_1 = B_1: J_1 = M_2(B_1), E_2 = B_2
    let amp2 = amplify_action(&l, &act, 2);
    let one = act.one_mat();
    let e = [one.tensor(&matrix_unit(2, 0, 0)), one.tensor(&matrix_unit(2, 1, 1))];
    let (e2, rep) = induce_module(&l, &amp2, &e, TOL).unwrap();
    assert!(rep.passed(), "{}", rep.render());
    assert_eq!(e2.dim(), b2_dim);

    // E_1 = B_1^2: the induced module doubles
    let amp3 = amplify_action(&l, &act, 3);
    let e_col = matrix_unit(3, 0, 0).add(&matrix_unit(3, 1, 1));
    let e = [one.tensor(&e_col), one.tensor(&matrix_unit(3, 2, 2))];
    let (e2, rep) = induce_module(&l, &amp3, &e, TOL).unwrap();
    assert!(rep.passed(), "{}", rep.render());
    assert_eq!(e2.dim(), 2 * b2_dim);
}

#[test]
fn a_rank_one_corner_module_induces_the_matching_corner() {
    // J_1 = (1⊗Q) M_3(B_1) (1⊗Q) for an invariant rank-two projection Q
    let l = linking_z2();
    let act = self_corner_action(&l, 0, TOL).unwrap();
    let amp = amplify_action(&l, &act, 3);
    // Q = E_00 + r where r projects onto span(f_1 + f_2)
    let half = Complex64::new(0.5, 0.0);
    let mut r_proj = CMatrix::zeros(3, 3);
    r_proj.set(1, 1, half);
    r_proj.set(1, 2, half);
    r_proj.set(2, 1, half);
    r_proj.set(2, 2, half);
    assert!(r_proj.mul(&r_proj).sub(&r_proj).fro_norm() <= TOL);
    let p_big = act
        .one_mat()
        .tensor(&matrix_unit(3, 0, 0))
        .add(&act.one_mat().tensor(&r_proj));
    // compress the amplified linking algebra by the unit p_big
    let mut basis = Vec::new();
    let mut delta = Vec::new();
    let amp_space = wqg_core::linalg::OperatorSpace {
        rows: amp.dim_ka,
        cols: amp.dim_ka,
        basis: amp.basis.clone(),
    };
    let compressed: Vec<CMatrix> =
        amp.basis.iter().map(|b| p_big.mul(b).mul(&p_big)).collect();
    let space = wqg_core::linalg::span(&compressed, amp.dim_ka, amp.dim_ka, TOL);
    for z in &space.basis {
        let (cs, r) = express(&amp_space, z).unwrap();
        assert!(r <= TOL);
        basis.push(z.clone());
        let mut d = CMatrix::zeros(amp.delta[0].rows, amp.delta[0].cols);
        for (c, dm) in cs.iter().zip(&amp.delta) {
            d = d.add(&dm.scale(*c));
        }
        delta.push(d);
    }
    let (one_coeffs, r) = express(&space, &p_big).unwrap();
    assert!(r <= TOL);
    let act_j = CornerAction { corner: 0, dim_ka: amp.dim_ka, basis, one_coeffs, delta };
    let rep = verify_corner_action(&l, &act_j, TOL).unwrap();
    assert!(rep.passed(), "{}", rep.render());
    let e1 = [act.one_mat().tensor(&matrix_unit(3, 0, 0)), act.one_mat().tensor(&r_proj)];
    let (e2, rep) = induce_module(&l, &act_j, &e1, TOL).unwrap();
    assert!(rep.passed(), "{}", rep.render());
    // K(E_2) has the dimension of the (1,1) corner of J_2
    let (ia_j, e2p, _) = induce_linking_algebra(&l, &act_j, &e1, TOL).unwrap();
    let corner11: Vec<CMatrix> = ia_j
        .carrier
        .basis
        .iter()
        .map(|z| e2p[0].mul(z).mul(&e2p[0]))
        .collect();
    let c11 = wqg_core::linalg::span(&corner11, e2.basis[0].rows, e2.basis[0].rows, TOL);
    let mut compacts = Vec::new();
    for x in &e2.basis {
        for y in &e2.basis {
            compacts.push(x.mul(&y.adjoint()));
        }
    }
    let k_e2 = wqg_core::linalg::span(&compacts, e2.basis[0].rows, e2.basis[0].rows, TOL);
    assert_eq!(k_e2.dim(), c11.dim());
}

#[test]
fn operator_induction_preserves_the_hypotheses() {
    let l = linking_z2();
    let act = self_corner_action(&l, 0, TOL).unwrap();
    let amp = amplify_action(&l, &act, 2);
    let one = act.one_mat();
    let e1 = one.tensor(&matrix_unit(2, 0, 0));
    let f1: Vec<CMatrix> = act.basis.iter().map(|b| b.tensor(&matrix_unit(2, 0, 0))).collect();

    // degenerate F_1 = e_1 and a symmetry commuting with everything
    for f_op in [e1.clone(), e1.scale(Complex64::new(-1.0, 0.0))] {
        let (_, rep) = induce_operator(&l, &act, &amp, &f1, &e1, &f_op, TOL).unwrap();
        assert!(rep.passed(), "{}", rep.render());
    }

    // an operator violating delta_J1(F_1) = F_1 x 1 is rejected
    let bad = act.basis[1].tensor(&matrix_unit(2, 0, 0));
    match induce_operator(&l, &act, &amp, &f1, &e1, &bad, TOL) {
        Err(Error::HypothesisDefect(msg)) => {
            assert!(msg.contains("delta_J1"), "unexpected defect: {msg}")
        }
        other => panic!("expected HypothesisDefect, got {other:?}"),
    }
}

#[test]
fn the_bidual_morita_equivalence_holds() {
    let l = linking_z2();
    let reps = regular_reps(&l);
    let act = self_corner_action(&l, 0, TOL).unwrap();
    let rep = bidual_morita_check(&l, &reps, &act, TOL).unwrap();
    assert!(rep.passed(), "{}", rep.render());
}
