use num_complex::Complex64 as C;
use wqg_core::linalg::*;
use wqg_core::DEFAULT_TOL;

fn cx(re: f64, im: f64) -> C {
    C::new(re, im)
}

#[test]
fn tensor_oracle() {
    // [[0,1],[1,0]] ⊗ [[1,0],[0,-1]] with the first factor on the slow index
    let x = CMatrix::from_rows(&[vec![cx(0., 0.), cx(1., 0.)], vec![cx(1., 0.), cx(0., 0.)]]);
    let z = CMatrix::from_rows(&[vec![cx(1., 0.), cx(0., 0.)], vec![cx(0., 0.), cx(-1., 0.)]]);
    let t = x.tensor(&z);
    let expected = CMatrix::from_rows(&[
        vec![cx(0., 0.), cx(0., 0.), cx(1., 0.), cx(0., 0.)],
        vec![cx(0., 0.), cx(0., 0.), cx(0., 0.), cx(-1., 0.)],
        vec![cx(1., 0.), cx(0., 0.), cx(0., 0.), cx(0., 0.)],
        vec![cx(0., 0.), cx(-1., 0.), cx(0., 0.), cx(0., 0.)],
    ]);
    assert!(t.sub(&expected).fro_norm() < 1e-15);
}

#[test]
fn flip_conjugation_swaps_legs() {
    let sigma = flip(2, 3);
    assert!(sigma.mul(&sigma.adjoint()).sub(&CMatrix::identity(6)).fro_norm() < 1e-15);
    let a = CMatrix::from_fn(2, 2, |r, c| cx((r + 2 * c) as f64, 1.0));
    let b = CMatrix::from_fn(3, 3, |r, c| cx(r as f64, c as f64));
    // Σ (a⊗b) Σ* = b⊗a, where Σ: H⊗K → K⊗H
    let lhs = sigma.mul(&a.tensor(&b)).mul(&sigma.adjoint());
    assert!(lhs.sub(&b.tensor(&a)).fro_norm() < 1e-12);
}

#[test]
fn slice_oracle() {
    // X = a⊗b; (ω⊗id)(X) = ω(a)·b and (id⊗ω')(X) = ω'(b)·a
    let a = CMatrix::from_rows(&[vec![cx(1., 1.), cx(0., 2.)], vec![cx(3., 0.), cx(-1., 0.)]]);
    let b = CMatrix::from_rows(&[vec![cx(0., 0.), cx(1., 0.)], vec![cx(1., 0.), cx(0., 1.)]]);
    let x = a.tensor(&b);
    let om = VectorFunctional::new(vec![cx(1., 0.), cx(0., 1.)], vec![cx(2., 0.), cx(1., 0.)]);
    let oa = om.apply(&a);
    let left = slice(Side::Left, &om, &x, 2, 2);
    assert!(left.sub(&b.scale(oa)).fro_norm() < 1e-12);
    let ob = om.apply(&b);
    let right = slice(Side::Right, &om, &x, 2, 2);
    assert!(right.sub(&a.scale(ob)).fro_norm() < 1e-12);
}

#[test]
fn span_rank_and_projection() {
    // Pauli family: {I, X, X, X+Z} has rank 3
    let i2 = CMatrix::identity(2);
    let x = CMatrix::from_rows(&[vec![cx(0., 0.), cx(1., 0.)], vec![cx(1., 0.), cx(0., 0.)]]);
    let z = CMatrix::from_rows(&[vec![cx(1., 0.), cx(0., 0.)], vec![cx(0., 0.), cx(-1., 0.)]]);
    let fam = vec![i2.clone(), x.clone(), x.clone(), x.add(&z)];
    let s = span(&fam, 2, 2, DEFAULT_TOL);
    assert_eq!(s.dim(), 3);
    for m in &fam {
        assert!(s.contains(m, DEFAULT_TOL));
    }
    let y = CMatrix::from_rows(&[vec![cx(0., 0.), cx(0., -1.)], vec![cx(0., 1.), cx(0., 0.)]]);
    assert!(!s.contains(&y, DEFAULT_TOL));
    // orthonormality of the returned basis
    for (i, a) in s.basis.iter().enumerate() {
        for (j, b) in s.basis.iter().enumerate() {
            let ip = a.fro_inner(b);
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((ip - cx(expect, 0.)).norm() < 1e-12);
        }
    }
}

#[test]
fn empty_span_is_zero_space() {
    let zero = CMatrix::zeros(3, 3);
    let s = span(&[zero], 3, 3, DEFAULT_TOL);
    assert_eq!(s.dim(), 0);
    let s2 = span(&[], 3, 3, DEFAULT_TOL);
    assert_eq!(s2.dim(), 0);
}

#[test]
fn close_star_algebra_generates_m2() {
    // The single nilpotent e_01 generates all of M_2 as a *-algebra.
    let e01 = CMatrix::unit(2, 0, 1);
    let s = span(&[e01], 2, 2, DEFAULT_TOL);
    let alg = close_star_algebra(&s, DEFAULT_TOL);
    assert_eq!(alg.dim(), 4);
}

#[test]
fn commutant_oracles() {
    // Commutant of the diagonal algebra in M_2 is the diagonal algebra.
    let d = span(
        &[CMatrix::unit(2, 0, 0), CMatrix::unit(2, 1, 1)],
        2,
        2,
        DEFAULT_TOL,
    );
    let dc = commutant(&d, DEFAULT_TOL);
    assert_eq!(dc.dim(), 2);
    assert!(spaces_equal(&d, &dc, DEFAULT_TOL));
    // Commutant of M_2 is the scalars.
    let m2 = span(
        &[
            CMatrix::unit(2, 0, 0),
            CMatrix::unit(2, 0, 1),
            CMatrix::unit(2, 1, 0),
            CMatrix::unit(2, 1, 1),
        ],
        2,
        2,
        DEFAULT_TOL,
    );
    let m2c = commutant(&m2, DEFAULT_TOL);
    assert_eq!(m2c.dim(), 1);
    assert!(m2c.contains(&CMatrix::identity(2), DEFAULT_TOL));
    // Bicommutant of the diagonal algebra returns it.
    let dcc = commutant(&dc, DEFAULT_TOL);
    assert!(spaces_equal(&d, &dcc, DEFAULT_TOL));
}

#[test]
fn hermitian_eig_reconstructs() {
    let h = CMatrix::from_rows(&[
        vec![cx(2., 0.), cx(0., -1.), cx(0.5, 0.)],
        vec![cx(0., 1.), cx(3., 0.), cx(0., 0.)],
        vec![cx(0.5, 0.), cx(0., 0.), cx(-1., 0.)],
    ]);
    let (vals, u) = h.hermitian_eig();
    // unitarity
    assert!(u.adjoint().mul(&u).sub(&CMatrix::identity(3)).fro_norm() < 1e-10);
    // reconstruction
    let mut d = CMatrix::zeros(3, 3);
    for i in 0..3 {
        d.set(i, i, cx(vals[i], 0.));
    }
    let rec = u.mul(&d).mul(&u.adjoint());
    assert!(rec.sub(&h).fro_norm() < 1e-10);
    // trace preserved
    let tr: f64 = vals.iter().sum();
    assert!((tr - 4.0).abs() < 1e-10);
}

#[test]
fn solve_and_inverse() {
    let a = CMatrix::from_rows(&[
        vec![cx(1., 1.), cx(2., 0.), cx(0., 0.)],
        vec![cx(0., 0.), cx(1., -1.), cx(1., 0.)],
        vec![cx(3., 0.), cx(0., 1.), cx(1., 0.)],
    ]);
    let x = vec![cx(1., 0.), cx(0., 2.), cx(-1., 1.)];
    let b = a.apply_vec(&x);
    let sol = a.solve(&b).unwrap();
    for (u, v) in x.iter().zip(&sol) {
        assert!((u - v).norm() < 1e-10);
    }
    let inv = a.inverse().unwrap();
    assert!(a.mul(&inv).sub(&CMatrix::identity(3)).fro_norm() < 1e-10);
}

#[test]
fn antilinear_polar_decomposition() {
    // S(v) = A·conj(v) with S² = id (an involution, like x ↦ x*): the polar
    // part J is antiunitary with J² = id and S = J·Δ^{1/2}.
    let a = CMatrix::from_rows(&[
        vec![cx(0., 0.), cx(2., 0.)],
        vec![cx(0.5, 0.), cx(0., 0.)],
    ]);
    let s = AntiLinear::new(a);
    // involution: S∘S = id
    assert!(s.compose_anti(&s).sub(&CMatrix::identity(2)).fro_norm() < 1e-12);
    let delta = s.grammian();
    let j = s.polar_part(DEFAULT_TOL);
    // S = J ∘ Δ^{1/2}: matrix A = A_J · conj(Δ^{1/2})
    let rec = j.mat.mul(&delta.positive_sqrt().conj());
    assert!(rec.sub(&s.mat).fro_norm() < 1e-9);
    // antiunitarity: the matrix of J is unitary
    let ju = j.mat.adjoint().mul(&j.mat);
    assert!(ju.sub(&CMatrix::identity(2)).fro_norm() < 1e-9);
    // J² = id for an involutive S
    let jj = j.compose_anti(&j);
    assert!(jj.sub(&CMatrix::identity(2)).fro_norm() < 1e-9);
}

#[test]
fn apply_on_legs_matches_dense() {
    // three legs of dims 2,3,2; operator on legs (0,2)
    let dims = [2usize, 3, 2];
    let m = CMatrix::from_fn(4, 4, |r, c| cx((r * 4 + c) as f64 * 0.1, ((r + c) % 3) as f64));
    let op = SparseOp::from(&m);
    // dense operator on the full space: legs (0,2) with leg 1 untouched,
    // built by index bookkeeping
    let total = 12;
    let mut dense = CMatrix::zeros(total, total);
    for a in 0..2 {
        for b in 0..3 {
            for cdx in 0..2 {
                for ap in 0..2 {
                    for cp in 0..2 {
                        let v = m.get(a * 2 + cdx, ap * 2 + cp);
                        let row = (a * 3 + b) * 2 + cdx;
                        let col = (ap * 3 + b) * 2 + cp;
                        let cur = dense.get(row, col);
                        dense.set(row, col, cur + v);
                    }
                }
            }
        }
    }
    for j in 0..total {
        let mut e = vec![cx(0., 0.); total];
        e[j] = cx(1., 0.);
        let fast = apply_on_legs(&op, &[0, 2], &dims, &[2, 2], &e);
        let slow = dense.apply_vec(&e);
        for (u, v) in fast.iter().zip(&slow) {
            assert!((u - v).norm() < 1e-12);
        }
    }
}

#[test]
fn leg_chain_difference_norm_exact() {
    // ‖(A⊗I) − (A'⊗I)‖_F = √dim(I) ‖A−A'‖_F
    let a = CMatrix::from_fn(2, 2, |r, c| cx((r + c) as f64, 0.3));
    let ap = CMatrix::from_fn(2, 2, |r, c| cx((r * c) as f64, -0.2));
    let mut ca = LegChain::new(&[2, 3]);
    ca.push(&a, &[0]);
    let mut cb = LegChain::new(&[2, 3]);
    cb.push(&ap, &[0]);
    let d = chain_difference_norm(&ca, &cb);
    let expect = 3f64.sqrt() * a.sub(&ap).fro_norm();
    assert!((d - expect).abs() < 1e-10);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    fn arb_cmatrix(n: usize) -> impl Strategy<Value = CMatrix> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
            CMatrix {
                rows: n,
                cols: n,
                data: v.into_iter().map(|(re, im)| C::new(re, im)).collect(),
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn tensor_mul_interchange(a in arb_cmatrix(2), b in arb_cmatrix(3),
                                  c in arb_cmatrix(2), d in arb_cmatrix(3)) {
            // (a⊗b)(c⊗d) = (ac)⊗(bd)
            let lhs = a.tensor(&b).mul(&c.tensor(&d));
            let rhs = a.mul(&c).tensor(&b.mul(&d));
            prop_assert!(lhs.sub(&rhs).fro_norm() < 1e-10);
        }

        #[test]
        fn span_projection_idempotent(a in arb_cmatrix(3), b in arb_cmatrix(3), x in arb_cmatrix(3)) {
            let s = span(&[a, b], 3, 3, DEFAULT_TOL);
            let p = s.project(&x);
            let pp = s.project(&p);
            prop_assert!(p.sub(&pp).fro_norm() < 1e-9);
            prop_assert!(s.contains(&p, 1e-7));
        }

        #[test]
        fn commutant_commutes(a in arb_cmatrix(3)) {
            let s = span(&[a.clone()], 3, 3, DEFAULT_TOL);
            let com = commutant(&s, DEFAULT_TOL);
            for x in &com.basis {
                let lhs = x.mul(&a).sub(&a.mul(x));
                prop_assert!(lhs.fro_norm() < 1e-8);
            }
            // bicommutant contains the generator
            let bic = commutant(&com, DEFAULT_TOL);
            prop_assert!(bic.contains(&a, 1e-7));
        }

        #[test]
        fn hermitian_sqrt_squares(a in arb_cmatrix(3)) {
            let pos = a.adjoint().mul(&a); // positive semidefinite
            let r = pos.positive_sqrt();
            prop_assert!(r.mul(&r).sub(&pos).fro_norm() < 1e-8);
        }

        #[test]
        fn close_star_algebra_idempotent(a in arb_cmatrix(2)) {
            let s = span(&[a], 2, 2, DEFAULT_TOL);
            let alg = close_star_algebra(&s, DEFAULT_TOL);
            let again = close_star_algebra(&alg, DEFAULT_TOL);
            prop_assert_eq!(alg.dim(), again.dim());
        }
    }
}
