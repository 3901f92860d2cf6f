//! Finite-dimensional C*-algebras ⊕_l M_{n_l}, positive functionals, the
//! GNS construction, base projectors and bounded vector operators.
//!
//! The GNS Hilbert space of a faithful state is coordinatized by scaled
//! matrix units: the coordinate map sends the coefficient vector of x to
//! Λ(x), and equals G^{1/2} for the Gram matrix G[a,b] = φ(e_a* e_b). For
//! block-diagonal densities this is exactly the scaled-matrix-unit basis.

use num_complex::Complex64 as C64;

use crate::linalg::{AntiLinear, CMatrix, OperatorSpace, span};
use crate::{Error, Result};

/// A multi-matrix algebra ⊕_l M_{n_l}, described by its block sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiMatrixAlgebra {
    pub blocks: Vec<usize>,
}

impl MultiMatrixAlgebra {
    pub fn new(blocks: Vec<usize>) -> Self {
        assert!(!blocks.is_empty() && blocks.iter().all(|&n| n > 0));
        MultiMatrixAlgebra { blocks }
    }

    /// Linear dimension Σ n_l².
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|n| n * n).sum()
    }

    /// Dimension of the defining block-diagonal representation, Σ n_l.
    pub fn rep_dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// Canonical enumeration of matrix units (block, row, col).
    pub fn units(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::with_capacity(self.dim());
        for (l, &n) in self.blocks.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    out.push((l, i, j));
                }
            }
        }
        out
    }

    pub fn unit_index(&self, l: usize, i: usize, j: usize) -> usize {
        let mut off = 0;
        for (m, &n) in self.blocks.iter().enumerate() {
            if m == l {
                return off + i * n + j;
            }
            off += n * n;
        }
        panic!("block out of range");
    }

    /// The unit 1 = Σ_l Σ_i e^l_ii as a coefficient vector.
    pub fn unit_coeffs(&self) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        for (l, &n) in self.blocks.iter().enumerate() {
            for i in 0..n {
                v[self.unit_index(l, i, i)] = C64::new(1.0, 0.0);
            }
        }
        v
    }

    /// Element from coefficients in the matrix-unit basis.
    pub fn element(&self, coeffs: &[C64]) -> AlgebraElement {
        assert_eq!(coeffs.len(), self.dim());
        let mut blocks = Vec::with_capacity(self.blocks.len());
        let mut off = 0;
        for &n in &self.blocks {
            let mut b = CMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    b.set(i, j, coeffs[off + i * n + j]);
                }
            }
            blocks.push(b);
            off += n * n;
        }
        AlgebraElement { sizes: self.blocks.clone(), blocks }
    }

    pub fn one(&self) -> AlgebraElement {
        self.element(&self.unit_coeffs())
    }

    /// Coefficients of the matrix unit (l,i,j).
    pub fn unit_coeff_vec(&self, l: usize, i: usize, j: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        v[self.unit_index(l, i, j)] = C64::new(1.0, 0.0);
        v
    }

    /// The block-diagonal defining representation of the unit (l,i,j).
    pub fn unit_rep(&self, l: usize, i: usize, j: usize) -> CMatrix {
        let n = self.rep_dim();
        let mut m = CMatrix::zeros(n, n);
        let off: usize = self.blocks[..l].iter().sum();
        m.set(off + i, off + j, C64::new(1.0, 0.0));
        m
    }
}

/// An element of a multi-matrix algebra as a list of blocks.
#[derive(Clone, Debug)]
pub struct AlgebraElement {
    pub sizes: Vec<usize>,
    pub blocks: Vec<CMatrix>,
}

impl AlgebraElement {
    pub fn coeffs(&self) -> Vec<C64> {
        let mut v = Vec::new();
        for b in &self.blocks {
            v.extend_from_slice(&b.data);
        }
        v
    }

    pub fn mul(&self, other: &AlgebraElement) -> AlgebraElement {
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.mul(b))
            .collect();
        AlgebraElement { sizes: self.sizes.clone(), blocks }
    }

    pub fn add(&self, other: &AlgebraElement) -> AlgebraElement {
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.add(b))
            .collect();
        AlgebraElement { sizes: self.sizes.clone(), blocks }
    }

    pub fn adjoint(&self) -> AlgebraElement {
        let blocks = self.blocks.iter().map(|b| b.adjoint()).collect();
        AlgebraElement { sizes: self.sizes.clone(), blocks }
    }
}

/// A positive functional x ↦ Σ_l tr(ρ_l x_l) given by density blocks.
#[derive(Clone, Debug)]
pub struct PositiveFunctional {
    pub densities: Vec<CMatrix>,
}

impl PositiveFunctional {
    pub fn apply(&self, x: &AlgebraElement) -> C64 {
        self.densities
            .iter()
            .zip(&x.blocks)
            .map(|(rho, b)| rho.mul(b).trace())
            .sum()
    }
}

/// The Markov trace: densities ρ_l = n_l·I, so ε(x) = Σ_l n_l tr(x_l).
pub fn markov_trace(alg: &MultiMatrixAlgebra) -> PositiveFunctional {
    let densities = alg
        .blocks
        .iter()
        .map(|&n| CMatrix::identity(n).scale(C64::new(n as f64, 0.0)))
        .collect();
    PositiveFunctional { densities }
}

/// A unital *-homomorphism (or *-anti-homomorphism, for maps defined on the
/// opposite algebra N°) from a multi-matrix algebra into B(H), stored by
/// its images on matrix units.
#[derive(Clone, Debug)]
pub struct StarHom {
    pub source: MultiMatrixAlgebra,
    pub target_dim: usize,
    /// Images of the matrix units in canonical order.
    pub images: Vec<CMatrix>,
    /// True when the map reverses products (a morphism of N°).
    pub anti: bool,
}

impl StarHom {
    pub fn new(source: MultiMatrixAlgebra, target_dim: usize, images: Vec<CMatrix>, anti: bool) -> Self {
        assert_eq!(images.len(), source.dim());
        for m in &images {
            assert_eq!((m.rows, m.cols), (target_dim, target_dim));
        }
        StarHom { source, target_dim, images, anti }
    }

    pub fn image(&self, l: usize, i: usize, j: usize) -> &CMatrix {
        &self.images[self.source.unit_index(l, i, j)]
    }

    /// Linear extension to an arbitrary element.
    pub fn apply(&self, x: &AlgebraElement) -> CMatrix {
        let coeffs = x.coeffs();
        let mut out = CMatrix::zeros(self.target_dim, self.target_dim);
        for (c, img) in coeffs.iter().zip(&self.images) {
            if c.re != 0.0 || c.im != 0.0 {
                out = out.add(&img.scale(*c));
            }
        }
        out
    }

    pub fn apply_coeffs(&self, coeffs: &[C64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.target_dim, self.target_dim);
        for (c, img) in coeffs.iter().zip(&self.images) {
            if c.re != 0.0 || c.im != 0.0 {
                out = out.add(&img.scale(*c));
            }
        }
        out
    }

    /// Image of the unit; should be a projection (the support) or 1.
    pub fn unit_image(&self) -> CMatrix {
        self.apply_coeffs(&self.source.unit_coeffs())
    }

    /// Worst residual of multiplicativity (in the stated variance),
    /// *-compatibility, and unit idempotency.
    pub fn validate(&self) -> f64 {
        let mut worst = 0.0f64;
        let units = self.source.units();
        for &(l, i, j) in &units {
            // μ(e_ij)* = μ(e_ji)
            let star = self.image(l, i, j).adjoint().sub(self.image(l, j, i));
            worst = worst.max(star.fro_norm());
            for &(m, k, p) in &units {
                let prod = self.image(l, i, j).mul(self.image(m, k, p));
                let expect = if self.anti {
                    // μ(e_ij)μ(e_kp) = μ(e_kp · e_ij) = δ_{pm i} ...
                    if l == m && p == i {
                        self.image(l, k, j).clone()
                    } else {
                        CMatrix::zeros(self.target_dim, self.target_dim)
                    }
                } else if l == m && j == k {
                    self.image(l, i, p).clone()
                } else {
                    CMatrix::zeros(self.target_dim, self.target_dim)
                };
                worst = worst.max(prod.sub(&expect).fro_norm());
            }
        }
        let u = self.unit_image();
        worst = worst.max(u.mul(&u).sub(&u).fro_norm());
        worst
    }

    /// The span of the image as an operator space.
    pub fn image_space(&self, tol: f64) -> OperatorSpace {
        span(&self.images, self.target_dim, self.target_dim, tol)
    }
}

/// The identity representation of a multi-matrix algebra on C^{Σ n_l}.
pub fn defining_rep(alg: &MultiMatrixAlgebra) -> StarHom {
    let images = alg.units().iter().map(|&(l, i, j)| alg.unit_rep(l, i, j)).collect();
    StarHom::new(alg.clone(), alg.rep_dim(), images, false)
}

/// The transpose of the defining representation: a *-anti-homomorphism
/// (the canonical morphism of N° on C^{Σ n_l}).
pub fn transpose_rep(alg: &MultiMatrixAlgebra) -> StarHom {
    let images = alg
        .units()
        .iter()
        .map(|&(l, i, j)| alg.unit_rep(l, i, j).transpose())
        .collect();
    StarHom::new(alg.clone(), alg.rep_dim(), images, true)
}

/// GNS data of a faithful positive functional on a multi-matrix algebra.
///
/// Coordinates: `coord` maps the coefficient vector of x to Λ(x); the
/// columns of `coord` are the Λ-images of the matrix units, and the GNS
/// basis vectors are the scaled matrix units (for diagonal densities the
/// coordinate matrix is diagonal).
#[derive(Clone, Debug)]
pub struct GnsData {
    pub alg: MultiMatrixAlgebra,
    pub dim: usize,
    /// Coefficients → Hilbert coordinates, Λ = coord (square, invertible).
    pub coord: CMatrix,
    pub coord_inv: CMatrix,
    /// π(e_a) for each matrix unit, in GNS coordinates.
    pub pi: Vec<CMatrix>,
    /// Modular operator Δ: Λx ↦ Λ(ρ x ρ⁻¹).
    pub delta_mod: CMatrix,
    /// Tomita conjugation S: Λx ↦ Λ(x*), antilinear.
    pub s_op: AntiLinear,
    /// Modular conjugation J (polar part of S).
    pub j_op: AntiLinear,
    /// Λ(1).
    pub vacuum: Vec<C64>,
}

impl GnsData {
    /// Λ of an element given by coefficients.
    pub fn lambda(&self, coeffs: &[C64]) -> Vec<C64> {
        self.coord.apply_vec(coeffs)
    }

    /// π of an element given by coefficients.
    pub fn pi_of(&self, coeffs: &[C64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (c, p) in coeffs.iter().zip(&self.pi) {
            if c.re != 0.0 || c.im != 0.0 {
                out = out.add(&p.scale(*c));
            }
        }
        out
    }
}

/// GNS construction for (A, φ); fails with `NonFaithful` when the Gram
/// matrix of φ is singular at the given tolerance.
pub fn gns(alg: &MultiMatrixAlgebra, phi: &PositiveFunctional, tol: f64) -> Result<GnsData> {
    let units = alg.units();
    let d = alg.dim();
    // Gram matrix G[a,b] = φ(e_a* e_b)
    let mut g = CMatrix::zeros(d, d);
    for (a, &(l, i, j)) in units.iter().enumerate() {
        for (b, &(m, k, p)) in units.iter().enumerate() {
            // e_a* e_b = e_ji e_kp, nonzero iff same block and i == k
            if l == m && i == k {
                // = e^l_jp, φ = tr(ρ_l e_jp) = ρ_l[p, j]
                let v = phi.densities[l].get(p, j);
                g.set(a, b, v);
            }
        }
    }
    // faithfulness: G must be positive definite
    let (vals, _) = g.hermitian_eig();
    let max = vals.iter().cloned().fold(0.0f64, f64::max);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > tol * 1.0f64.max(max)) {
        return Err(Error::NonFaithful(format!(
            "Gram matrix has eigenvalue {min:.3e} (max {max:.3e})"
        )));
    }
    let coord = g.positive_sqrt();
    let coord_inv = coord.inverse()?;

    // left multiplication on coefficients: (e^l_ij · x) picks up rows
    let mut pi = Vec::with_capacity(d);
    for &(l, i, j) in &units {
        let n = alg.blocks[l];
        let mut m_a = CMatrix::zeros(d, d);
        for p in 0..n {
            // e_ij e_jp = e_ip
            let row = alg.unit_index(l, i, p);
            let col = alg.unit_index(l, j, p);
            m_a.set(row, col, C64::new(1.0, 0.0));
        }
        pi.push(coord.mul(&m_a).mul(&coord_inv));
    }

    // Δ on coefficients: x ↦ ρ x ρ⁻¹ blockwise
    let mut cmod = CMatrix::zeros(d, d);
    for (b, &(l, k, p)) in units.iter().enumerate() {
        let rho = &phi.densities[l];
        let rho_inv = rho.inverse()?;
        // ρ e_kp ρ⁻¹ = (ρ e_k)(e_p ρ⁻¹): entry (i,j) = ρ[i,k]·ρ⁻¹[p,j]
        let n = alg.blocks[l];
        for i in 0..n {
            for j in 0..n {
                let v = rho.get(i, k) * rho_inv.get(p, j);
                if v.re != 0.0 || v.im != 0.0 {
                    let row = alg.unit_index(l, i, j);
                    let cur = cmod.get(row, b);
                    cmod.set(row, b, cur + v);
                }
            }
        }
    }
    let delta_mod = coord.mul(&cmod).mul(&coord_inv);

    // star on coefficients: e_ij ↦ e_ji (conjugation handled by AntiLinear)
    let mut cstar = CMatrix::zeros(d, d);
    for &(l, i, j) in &units {
        cstar.set(alg.unit_index(l, j, i), alg.unit_index(l, i, j), C64::new(1.0, 0.0));
    }
    let s_mat = coord.mul(&cstar).mul(&coord_inv.conj());
    let s_op = AntiLinear::new(s_mat);
    let j_op = s_op.polar_part(tol);

    let vacuum = coord.apply_vec(&alg.unit_coeffs());
    Ok(GnsData {
        alg: alg.clone(),
        dim: d,
        coord,
        coord_inv,
        pi,
        delta_mod,
        s_op,
        j_op,
        vacuum,
    })
}

/// Base projector q_{μ,ν} = Σ_l (1/n_l) Σ_{ij} μ(e_ji) ⊗ ν(e_ij).
///
/// Exactly one of μ, ν must be an anti-homomorphism; otherwise the formula
/// is not a projection and the call fails with `SourceMismatch`.
pub fn q_projector(mu: &StarHom, nu: &StarHom) -> Result<CMatrix> {
    if mu.source.blocks != nu.source.blocks {
        return Err(Error::SourceMismatch(format!(
            "base blocks differ: {:?} vs {:?}",
            mu.source.blocks, nu.source.blocks
        )));
    }
    if mu.anti == nu.anti {
        return Err(Error::SourceMismatch(
            "exactly one leg must carry the opposite algebra".into(),
        ));
    }
    let dim = mu.target_dim * nu.target_dim;
    let mut p = CMatrix::zeros(dim, dim);
    for (l, &n) in mu.source.blocks.iter().enumerate() {
        let w = C64::new(1.0 / n as f64, 0.0);
        for i in 0..n {
            for j in 0..n {
                let t = mu.image(l, j, i).tensor(nu.image(l, i, j));
                p = p.add(&t.scale(w));
            }
        }
    }
    Ok(p)
}

/// The bounded operator R_ξ^α: H_ε → H, Λ_ε(x) ↦ α(x)ξ, where ε is the
/// Markov trace on the source of α.
pub fn r_xi(alpha: &StarHom, xi: &[C64]) -> CMatrix {
    assert!(!alpha.anti, "R_ξ is defined against a homomorphism leg");
    bounded_vector_op(alpha, xi)
}

/// The mirrored operator L_ξ^β: H_ε → H, Λ_ε(x) ↦ β(x°)ξ, for an
/// anti-homomorphism β (a morphism of N°). For the tracial Markov weight
/// the opposite GNS space is canonically H_ε itself.
pub fn l_xi(beta: &StarHom, xi: &[C64]) -> CMatrix {
    assert!(beta.anti, "L_ξ is defined against an anti-homomorphism leg");
    bounded_vector_op(beta, xi)
}

fn bounded_vector_op(hom: &StarHom, xi: &[C64]) -> CMatrix {
    assert_eq!(xi.len(), hom.target_dim);
    let units = hom.source.units();
    let d = hom.source.dim();
    let mut out = CMatrix::zeros(hom.target_dim, d);
    for (a, &(l, i, j)) in units.iter().enumerate() {
        // Λ_ε(e^l_ij) has norm √n_l under the Markov trace
        let scale = 1.0 / (hom.source.blocks[l] as f64).sqrt();
        let v = hom.image(l, i, j).apply_vec(xi);
        for r in 0..hom.target_dim {
            out.set(r, a, v[r] * C64::new(scale, 0.0));
        }
    }
    out
}

/// A finite-dimensional *-algebra presented on a distinguished basis by
/// structure constants: left-multiplication matrices, the star map on
/// basis elements, and the coefficients of the unit.
///
/// This presentation accommodates algebras whose natural generators are
/// not matrix units (function algebras on a group, twisted group
/// algebras, block assemblies of these), while still supporting GNS.
#[derive(Clone, Debug)]
pub struct BasisAlgebra {
    pub dim: usize,
    /// lmat[a]·v = coefficients of x_a · (Σ v_b x_b).
    pub lmat: Vec<CMatrix>,
    /// Column a = coefficients of x_a*.
    pub star: CMatrix,
    /// Coefficients of 1.
    pub one: Vec<C64>,
}

impl BasisAlgebra {
    pub fn new(lmat: Vec<CMatrix>, star: CMatrix, one: Vec<C64>) -> Self {
        let dim = lmat.len();
        assert_eq!((star.rows, star.cols), (dim, dim));
        assert_eq!(one.len(), dim);
        for m in &lmat {
            assert_eq!((m.rows, m.cols), (dim, dim));
        }
        BasisAlgebra { dim, lmat, star, one }
    }

    /// View a multi-matrix algebra through its matrix-unit basis.
    pub fn from_multi_matrix(alg: &MultiMatrixAlgebra) -> Self {
        let d = alg.dim();
        let units = alg.units();
        let mut lmat = Vec::with_capacity(d);
        let mut star = CMatrix::zeros(d, d);
        for &(l, i, j) in &units {
            let n = alg.blocks[l];
            let mut m = CMatrix::zeros(d, d);
            for p in 0..n {
                m.set(alg.unit_index(l, i, p), alg.unit_index(l, j, p), C64::new(1.0, 0.0));
            }
            lmat.push(m);
            star.set(alg.unit_index(l, j, i), alg.unit_index(l, i, j), C64::new(1.0, 0.0));
        }
        BasisAlgebra { dim: d, lmat, star, one: alg.unit_coeffs() }
    }

    /// Left multiplication by an arbitrary element.
    pub fn lmat_of(&self, coeffs: &[C64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (c, m) in coeffs.iter().zip(&self.lmat) {
            if c.re != 0.0 || c.im != 0.0 {
                out = out.add(&m.scale(*c));
            }
        }
        out
    }

    pub fn mul(&self, a: &[C64], b: &[C64]) -> Vec<C64> {
        self.lmat_of(a).apply_vec(b)
    }

    /// Coefficients of (Σ c_a x_a)* = Σ conj(c_a) x_a*.
    pub fn star_of(&self, coeffs: &[C64]) -> Vec<C64> {
        let conj: Vec<C64> = coeffs.iter().map(|c| c.conj()).collect();
        self.star.apply_vec(&conj)
    }

    /// Worst residual of associativity, unit neutrality, star
    /// anti-multiplicativity and involutivity on the basis.
    pub fn validate(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.dim {
            for b in 0..self.dim {
                // x_a (x_b ·) = (x_a x_b) ·
                let ab = self.lmat[a].apply_vec(&unit_vec(self.dim, b));
                let lhs = self.lmat[a].mul(&self.lmat[b]);
                let rhs = self.lmat_of(&ab);
                worst = worst.max(lhs.sub(&rhs).fro_norm());
                // (x_a x_b)* = x_b* x_a*
                let star_ab = self.star_of(&ab);
                let sb = self.star_of(&unit_vec(self.dim, b));
                let sa = self.star_of(&unit_vec(self.dim, a));
                let prod = self.mul(&sb, &sa);
                worst = worst.max(vec_diff_norm(&star_ab, &prod));
            }
            // x_a** = x_a
            let ss = self.star_of(&self.star_of(&unit_vec(self.dim, a)));
            worst = worst.max(vec_diff_norm(&ss, &unit_vec(self.dim, a)));
            // 1·x_a = x_a·1 = x_a
            let e = unit_vec(self.dim, a);
            worst = worst.max(vec_diff_norm(&self.mul(&self.one, &e), &e));
            worst = worst.max(vec_diff_norm(&self.mul(&e, &self.one), &e));
        }
        worst
    }
}

fn unit_vec(dim: usize, a: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); dim];
    v[a] = C64::new(1.0, 0.0);
    v
}

fn vec_diff_norm(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// GNS data of a faithful positive functional on a `BasisAlgebra`.
///
/// The modular operator is obtained as Δ = S*S for the closed antilinear
/// Tomita map S: Λx ↦ Λ(x*); J is its polar part.
#[derive(Clone, Debug)]
pub struct BasisGns {
    pub dim: usize,
    /// Coefficients → Hilbert coordinates, Λ = coord (square, invertible).
    pub coord: CMatrix,
    pub coord_inv: CMatrix,
    /// π(x_a) in GNS coordinates.
    pub pi: Vec<CMatrix>,
    pub delta_mod: CMatrix,
    pub s_op: AntiLinear,
    pub j_op: AntiLinear,
    pub vacuum: Vec<C64>,
}

impl BasisGns {
    pub fn lambda(&self, coeffs: &[C64]) -> Vec<C64> {
        self.coord.apply_vec(coeffs)
    }

    pub fn pi_of(&self, coeffs: &[C64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (c, p) in coeffs.iter().zip(&self.pi) {
            if c.re != 0.0 || c.im != 0.0 {
                out = out.add(&p.scale(*c));
            }
        }
        out
    }
}

/// GNS construction for (A, φ) with φ given by its values on the basis.
pub fn basis_gns(alg: &BasisAlgebra, phi: &[C64], tol: f64) -> Result<BasisGns> {
    assert_eq!(phi.len(), alg.dim);
    let d = alg.dim;
    let phi_of = |coeffs: &[C64]| -> C64 { coeffs.iter().zip(phi).map(|(c, p)| c * p).sum() };
    // Gram G[a,b] = φ(x_a* x_b)
    let mut g = CMatrix::zeros(d, d);
    for a in 0..d {
        let sa = alg.star_of(&unit_vec(d, a));
        let lsa = alg.lmat_of(&sa);
        for b in 0..d {
            let prod = lsa.apply_vec(&unit_vec(d, b));
            g.set(a, b, phi_of(&prod));
        }
    }
    let (vals, _) = g.hermitian_eig();
    let max = vals.iter().cloned().fold(0.0f64, f64::max);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > tol * 1.0f64.max(max)) {
        return Err(Error::NonFaithful(format!(
            "Gram matrix has eigenvalue {min:.3e} (max {max:.3e})"
        )));
    }
    let coord = g.positive_sqrt();
    let coord_inv = coord.inverse()?;
    let pi: Vec<CMatrix> = alg.lmat.iter().map(|m| coord.mul(m).mul(&coord_inv)).collect();
    let s_mat = coord.mul(&alg.star).mul(&coord_inv.conj());
    let s_op = AntiLinear::new(s_mat);
    let delta_mod = s_op.grammian();
    let j_op = s_op.polar_part(tol);
    let vacuum = coord.apply_vec(&alg.one);
    Ok(BasisGns { dim: d, coord, coord_inv, pi, delta_mod, s_op, j_op, vacuum })
}

/// Span of {R_ξ (R_η)* : ξ, η ∈ H}, which at finite dimension equals the
/// commutant of α(N).
pub fn rr_star_space(alpha: &StarHom, tol: f64) -> OperatorSpace {
    vector_op_space(alpha, tol)
}

/// Span of {L_ξ (L_η)* : ξ, η ∈ H}, the commutant of β(N°).
pub fn ll_star_space(beta: &StarHom, tol: f64) -> OperatorSpace {
    vector_op_space(beta, tol)
}

fn vector_op_space(hom: &StarHom, tol: f64) -> OperatorSpace {
    let h = hom.target_dim;
    let mut gens = Vec::with_capacity(h * h);
    for xi_i in 0..h {
        let mut xi = vec![C64::new(0.0, 0.0); h];
        xi[xi_i] = C64::new(1.0, 0.0);
        let r_xi_mat = bounded_vector_op(hom, &xi);
        for eta_i in 0..h {
            let mut eta = vec![C64::new(0.0, 0.0); h];
            eta[eta_i] = C64::new(1.0, 0.0);
            let r_eta = bounded_vector_op(hom, &eta);
            gens.push(r_xi_mat.mul(&r_eta.adjoint()));
        }
    }
    span(&gens, h, h, tol)
}
