use num_complex::Complex64 as C;
use wqg_core::fdcstar::*;
use wqg_core::linalg::{commutant, spaces_equal, CMatrix};
use wqg_core::{Error, DEFAULT_TOL};

fn cx(re: f64, im: f64) -> C {
    C::new(re, im)
}

#[test]
fn markov_trace_values() {
    // ε(1) = Σ n_l² ; for M_2 ⊕ M_3 that is 13.
    let alg = MultiMatrixAlgebra::new(vec![2, 3]);
    let eps = markov_trace(&alg);
    let one = alg.one();
    assert!((eps.apply(&one) - cx(13.0, 0.0)).norm() < 1e-14);
    // ε(e^l_ii) = n_l
    let e = alg.element(&alg.unit_coeff_vec(1, 0, 0));
    assert!((eps.apply(&e) - cx(3.0, 0.0)).norm() < 1e-14);
}

#[test]
fn star_hom_validate() {
    let alg = MultiMatrixAlgebra::new(vec![2, 1]);
    assert!(defining_rep(&alg).validate() < 1e-14);
    assert!(transpose_rep(&alg).validate() < 1e-14);
    // a transpose rep flagged as a homomorphism fails validation
    let broken = StarHom::new(
        alg.clone(),
        alg.rep_dim(),
        transpose_rep(&alg).images.clone(),
        false,
    );
    assert!(broken.validate() > 0.5);
}

#[test]
fn gns_oracle_m2_weighted_trace() {
    // A = M_2, φ = tr(ρ ·), ρ = diag(1/3, 2/3).
    let alg = MultiMatrixAlgebra::new(vec![2]);
    let phi = PositiveFunctional {
        densities: vec![CMatrix::from_rows(&[
            vec![cx(1. / 3., 0.), cx(0., 0.)],
            vec![cx(0., 0.), cx(2. / 3., 0.)],
        ])],
    };
    let g = gns(&alg, &phi, DEFAULT_TOL).unwrap();
    assert_eq!(g.dim, 4);
    // ‖Λ(e_11)‖² = φ(e_11) = 1/3, ‖Λ(e_12)‖² = φ(e_22) = 2/3
    let l11 = g.lambda(&alg.unit_coeff_vec(0, 0, 0));
    let n11: f64 = l11.iter().map(|z| z.norm_sqr()).sum();
    assert!((n11 - 1. / 3.).abs() < 1e-12);
    let l12 = g.lambda(&alg.unit_coeff_vec(0, 0, 1));
    let n12: f64 = l12.iter().map(|z| z.norm_sqr()).sum();
    assert!((n12 - 2. / 3.).abs() < 1e-12);
    // ⟨Λx, Λy⟩ = φ(x*y) on a non-unit pair
    let x = alg.unit_coeff_vec(0, 0, 1);
    let y = alg.unit_coeff_vec(0, 0, 1);
    let lx = g.lambda(&x);
    let ly = g.lambda(&y);
    let ip: C = lx.iter().zip(&ly).map(|(a, b)| a.conj() * b).sum();
    assert!((ip - cx(2. / 3., 0.)).norm() < 1e-12);
    // Δ eigenvalues are the density ratios {1, 1, 1/2, 2}
    let (mut vals, _) = g.delta_mod.hermitian_eig();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let expect = [0.5, 1.0, 1.0, 2.0];
    for (v, e) in vals.iter().zip(expect.iter()) {
        assert!((v - e).abs() < 1e-10);
    }
    // π is multiplicative: π(e_11)π(e_12) = π(e_12)
    let p11 = g.pi_of(&alg.unit_coeff_vec(0, 0, 0));
    let p12 = g.pi_of(&alg.unit_coeff_vec(0, 0, 1));
    assert!(p11.mul(&p12).sub(&p12).fro_norm() < 1e-10);
    // π(a)Λ(x) = Λ(ax)
    let a = alg.element(&alg.unit_coeff_vec(0, 1, 0));
    let xx = alg.element(&alg.unit_coeff_vec(0, 0, 1));
    let ax = a.mul(&xx);
    let lhs = g.pi_of(&a.coeffs()).apply_vec(&g.lambda(&xx.coeffs()));
    let rhs = g.lambda(&ax.coeffs());
    for (u, v) in lhs.iter().zip(&rhs) {
        assert!((u - v).norm() < 1e-10);
    }
    // S = JΔ^{1/2} maps Λx to Λ(x*)
    let sx = g.s_op.apply(&g.lambda(&alg.unit_coeff_vec(0, 0, 1)));
    let target = g.lambda(&alg.unit_coeff_vec(0, 1, 0));
    for (u, v) in sx.iter().zip(&target) {
        assert!((u - v).norm() < 1e-10);
    }
    let jd = g.j_op.compose_linear(&g.delta_mod.positive_sqrt());
    assert!(jd.mat.sub(&g.s_op.mat).fro_norm() < 1e-10);
    // J² = 1
    assert!(g.j_op.compose_anti(&g.j_op).sub(&CMatrix::identity(4)).fro_norm() < 1e-10);
    // φ(x) = ⟨Λ1, π(x)Λ1⟩
    let val = {
        let px = g.pi_of(&alg.unit_coeff_vec(0, 1, 1));
        let v = px.apply_vec(&g.vacuum);
        g.vacuum.iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<C>()
    };
    assert!((val - cx(2. / 3., 0.)).norm() < 1e-12);
}

#[test]
fn gns_rejects_non_faithful() {
    let alg = MultiMatrixAlgebra::new(vec![2]);
    let phi = PositiveFunctional {
        densities: vec![CMatrix::from_rows(&[
            vec![cx(1., 0.), cx(0., 0.)],
            vec![cx(0., 0.), cx(0., 0.)],
        ])],
    };
    match gns(&alg, &phi, DEFAULT_TOL) {
        Err(Error::NonFaithful(_)) => {}
        other => panic!("expected NonFaithful, got {other:?}"),
    }
}

#[test]
fn q_projector_oracles() {
    // N = M_2, μ = transpose rep (anti), ν = defining rep: q is the
    // rank-one projection onto (e_0⊗e_0 + e_1⊗e_1)/√2.
    let alg = MultiMatrixAlgebra::new(vec![2]);
    let mu = transpose_rep(&alg);
    let nu = defining_rep(&alg);
    let q = q_projector(&mu, &nu).unwrap();
    assert!(q.mul(&q).sub(&q).fro_norm() < 1e-12);
    assert!(q.adjoint().sub(&q).fro_norm() < 1e-12);
    assert!((q.trace() - cx(1.0, 0.0)).norm() < 1e-12);
    let omega = [cx(1. / 2f64.sqrt(), 0.), cx(0., 0.), cx(0., 0.), cx(1. / 2f64.sqrt(), 0.)];
    let img = q.apply_vec(&omega);
    for (u, v) in img.iter().zip(&omega) {
        assert!((u - v).norm() < 1e-12);
    }
    // N = C²: q = Σ_j e_jj ⊗ e_jj, rank 2.
    let base = MultiMatrixAlgebra::new(vec![1, 1]);
    let mu2 = StarHom::new(
        base.clone(),
        2,
        vec![CMatrix::unit(2, 0, 0), CMatrix::unit(2, 1, 1)],
        true,
    );
    let nu2 = defining_rep(&base);
    let q2 = q_projector(&mu2, &nu2).unwrap();
    assert!(q2.mul(&q2).sub(&q2).fro_norm() < 1e-12);
    assert!((q2.trace() - cx(2.0, 0.0)).norm() < 1e-12);
}

#[test]
fn q_projector_rejects_matched_variance() {
    let alg = MultiMatrixAlgebra::new(vec![2]);
    let nu = defining_rep(&alg);
    match q_projector(&nu, &nu) {
        Err(Error::SourceMismatch(_)) => {}
        other => panic!("expected SourceMismatch, got {other:?}"),
    }
    let other_base = MultiMatrixAlgebra::new(vec![1, 1]);
    let mu = StarHom::new(
        other_base.clone(),
        2,
        vec![CMatrix::unit(2, 0, 0), CMatrix::unit(2, 1, 1)],
        true,
    );
    let nu2 = defining_rep(&alg);
    match q_projector(&mu, &nu2) {
        Err(Error::SourceMismatch(_)) => {}
        other => panic!("expected SourceMismatch, got {other:?}"),
    }
}

#[test]
fn vector_op_spaces_are_commutants() {
    // R-space of the defining rep of M_2 ⊕ C on C³ = commutant (dim 2)
    let alg = MultiMatrixAlgebra::new(vec![2, 1]);
    let rep = defining_rep(&alg);
    let rr = rr_star_space(&rep, DEFAULT_TOL);
    let com = commutant(&rep.image_space(DEFAULT_TOL), DEFAULT_TOL);
    assert_eq!(rr.dim(), 2);
    assert!(spaces_equal(&rr, &com, 1e-8));
    // L-space of the transpose rep of M_2 on C² = commutant of M_2ᵀ = C
    let alg2 = MultiMatrixAlgebra::new(vec![2]);
    let beta = transpose_rep(&alg2);
    let ll = ll_star_space(&beta, DEFAULT_TOL);
    assert_eq!(ll.dim(), 1);
    assert!(ll.contains(&CMatrix::identity(2), DEFAULT_TOL));
}

#[test]
fn q_compression_of_vector_ops() {
    // q_{μ,ν}(R_ξ(R_η)* ⊗ 1) = q_{μ,ν}(θ_{ξ,η} ⊗ 1) q_{μ,ν} where μ is the
    // homomorphism leg carrying R, and the mirrored identity on the ν leg.
    let alg = MultiMatrixAlgebra::new(vec![2, 1]);
    let alpha = defining_rep(&alg); // on C³, hom
    let beta = transpose_rep(&alg); // on C³, anti
    let q = q_projector(&beta, &alpha).unwrap(); // β-leg first, α-leg second
    let h = 3usize;
    let mk = |vals: &[(f64, f64)]| -> Vec<C> { vals.iter().map(|&(r, i)| cx(r, i)).collect() };
    let xi = mk(&[(1., 0.2), (0., -1.), (0.5, 0.)]);
    let eta = mk(&[(0.3, 0.), (1., 1.), (-0.2, 0.4)]);
    let theta = {
        // θ_{ξ,η} = ξ η*
        let mut m = CMatrix::zeros(h, h);
        for r in 0..h {
            for c in 0..h {
                m.set(r, c, xi[r] * eta[c].conj());
            }
        }
        m
    };
    // α sits on leg 2 of q_{β,α}: R-identity on the second leg
    let r1 = r_xi(&alpha, &xi);
    let r2 = r_xi(&alpha, &eta);
    let rr = r1.mul(&r2.adjoint());
    let i3 = CMatrix::identity(h);
    let lhs = q.mul(&i3.tensor(&rr));
    let rhs = q.mul(&i3.tensor(&theta)).mul(&q);
    assert!(lhs.sub(&rhs).fro_norm() < 1e-10);
    // mirrored identity: L against the anti-homomorphism leg (leg 1)
    let l1 = l_xi(&beta, &xi);
    let l2 = l_xi(&beta, &eta);
    let ll = l1.mul(&l2.adjoint());
    let lhs2 = q.mul(&ll.tensor(&i3));
    let rhs2 = q.mul(&theta.tensor(&i3)).mul(&q);
    assert!(lhs2.sub(&rhs2).fro_norm() < 1e-10);
}
