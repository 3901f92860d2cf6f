//! Finite measured quantum groupoids on a finite-dimensional basis.
//!
//! The octuple (N, M, α, β, δ, T, T′, ε) is realized on the GNS space H of
//! the left-invariant weight φ. From δ and the two weights the module
//! builds the fundamental partial isometries W, V, Ṽ, the dual algebra
//! with its modular conjugation Ĵ, the unitary U = ĴJ, and verifies the
//! complete axiom and structure suites; it also certifies regularity.
//!
//! Conventions: δ is given by structure constants over the distinguished
//! basis of M, δ(x_a) = Σ_{b,c} D_a[b,c] x_b⊗x_c; inner products are
//! conjugate-linear in the first argument; q_{μ,ν} always places μ on the
//! first tensor leg.

use num_complex::Complex64 as C64;

use crate::fdcstar::{
    basis_gns, ll_star_space, q_projector, rr_star_space, BasisAlgebra, BasisGns,
    MultiMatrixAlgebra, PositiveFunctional, StarHom,
};
use crate::linalg::{
    chain_difference_norm, flip, slice, span, spaces_equal, spaces_equality_residual, vec_tensor,
    AntiLinear, CMatrix, LegChain, OperatorSpace, Side, VectorFunctional,
};
use crate::report::VerificationReport;
use crate::{Error, Result};

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

fn cone() -> C64 {
    C64::new(1.0, 0.0)
}

fn unit_vec(dim: usize, a: usize) -> Vec<C64> {
    let mut v = vec![czero(); dim];
    v[a] = cone();
    v
}

/// A measured quantum groupoid presented abstractly and realized on the
/// GNS space of φ.
#[derive(Clone, Debug)]
pub struct GroupoidData {
    /// The basis algebra N.
    pub base: MultiMatrixAlgebra,
    /// The total algebra M with its distinguished basis.
    pub algebra: BasisAlgebra,
    /// α(e_n) as coefficient vectors in M, per matrix unit of N.
    pub alpha_coeffs: Vec<Vec<C64>>,
    /// β(e_n°) as coefficient vectors in M, per matrix unit of N.
    pub beta_coeffs: Vec<Vec<C64>>,
    /// Structure constants of δ: δ(x_a) = Σ D_a[b,c] x_b⊗x_c.
    pub delta_coeffs: Vec<CMatrix>,
    /// The base weight ν (ε in the octuple), on N.
    pub epsilon: PositiveFunctional,
    /// Values of φ on the basis of M.
    pub phi: Vec<C64>,
    /// Values of ψ on the basis of M.
    pub psi: Vec<C64>,
    /// GNS data of (M, φ); H is its coordinate space.
    pub gns: BasisGns,
    pub dim_h: usize,
    /// Spatial α: N → B(H) (*-homomorphism).
    pub alpha: StarHom,
    /// Spatial β: N° → B(H) (*-anti-homomorphism).
    pub beta: StarHom,
    /// (π⊗π)(δ(x_a)) on H⊗H.
    pub delta_h: Vec<CMatrix>,
    /// The base projector q_{β,α}.
    pub q_ba: CMatrix,
}

impl GroupoidData {
    /// Assemble and realize a groupoid; validates the algebra structure
    /// and the variance of α and β.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        base: MultiMatrixAlgebra,
        algebra: BasisAlgebra,
        alpha_coeffs: Vec<Vec<C64>>,
        beta_coeffs: Vec<Vec<C64>>,
        delta_coeffs: Vec<CMatrix>,
        epsilon: PositiveFunctional,
        phi: Vec<C64>,
        psi: Vec<C64>,
        tol: f64,
    ) -> Result<GroupoidData> {
        let alg_res = algebra.validate();
        if alg_res > tol {
            return Err(Error::InvalidInput(format!(
                "total algebra structure constants inconsistent (residual {alg_res:.3e})"
            )));
        }
        if alpha_coeffs.len() != base.dim() || beta_coeffs.len() != base.dim() {
            return Err(Error::InvalidInput("α/β images must cover every unit of N".into()));
        }
        if delta_coeffs.len() != algebra.dim {
            return Err(Error::InvalidInput("δ must be given on every basis element".into()));
        }
        let gns = basis_gns(&algebra, &phi, tol)?;
        let dim_h = gns.dim;
        let alpha_imgs: Vec<CMatrix> = alpha_coeffs.iter().map(|c| gns.pi_of(c)).collect();
        let beta_imgs: Vec<CMatrix> = beta_coeffs.iter().map(|c| gns.pi_of(c)).collect();
        let alpha = StarHom::new(base.clone(), dim_h, alpha_imgs, false);
        let beta = StarHom::new(base.clone(), dim_h, beta_imgs, true);
        let ra = alpha.validate();
        if ra > tol {
            return Err(Error::InvalidInput(format!(
                "α is not a *-homomorphism of N (residual {ra:.3e})"
            )));
        }
        let rb = beta.validate();
        if rb > tol {
            return Err(Error::InvalidInput(format!(
                "β is not a *-anti-homomorphism (residual {rb:.3e})"
            )));
        }
        let mut delta_h = Vec::with_capacity(algebra.dim);
        for d_a in &delta_coeffs {
            let mut m = CMatrix::zeros(dim_h * dim_h, dim_h * dim_h);
            for (b, c, t) in d_a.nonzeros() {
                m = m.add(&gns.pi[b].tensor(&gns.pi[c]).scale(t));
            }
            delta_h.push(m);
        }
        let q_ba = q_projector(&beta, &alpha)?;
        Ok(GroupoidData {
            base,
            algebra,
            alpha_coeffs,
            beta_coeffs,
            delta_coeffs,
            epsilon,
            phi,
            psi,
            gns,
            dim_h,
            alpha,
            beta,
            delta_h,
            q_ba,
        })
    }

    /// δ of an element of M given by coefficients, as an operator on H⊗H.
    pub fn delta_of(&self, coeffs: &[C64]) -> CMatrix {
        let d2 = self.dim_h * self.dim_h;
        let mut out = CMatrix::zeros(d2, d2);
        for (c, m) in coeffs.iter().zip(&self.delta_h) {
            if c.re != 0.0 || c.im != 0.0 {
                out = out.add(&m.scale(*c));
            }
        }
        out
    }

    /// π of an element of M given by coefficients.
    pub fn pi_of(&self, coeffs: &[C64]) -> CMatrix {
        self.gns.pi_of(coeffs)
    }

    /// π images of the distinguished basis, spanning M on H.
    pub fn m_space(&self, tol: f64) -> OperatorSpace {
        span(&self.gns.pi, self.dim_h, self.dim_h, tol)
    }
}

/// Least-squares expansion of `target` over `family`; returns coefficients
/// and the residual norm.
pub(crate) fn express_in(family: &[Vec<C64>], target: &[C64]) -> Result<(Vec<C64>, f64)> {
    let rows = target.len();
    let k = family.len();
    let mut a = CMatrix::zeros(rows, k);
    for (j, f) in family.iter().enumerate() {
        for (i, v) in f.iter().enumerate() {
            a.set(i, j, *v);
        }
    }
    let ah = a.adjoint();
    let normal = ah.mul(&a);
    let rhs = ah.apply_vec(target);
    let x = normal.solve(&rhs)?;
    let fit = a.apply_vec(&x);
    let res = target
        .iter()
        .zip(&fit)
        .map(|(t, f)| (t - f).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok((x, res))
}

/// The five defining conditions of a measured quantum groupoid, plus the
/// range condition δ(M) ⊆ q(M⊗M)q, as residual checks.
///
/// Condition 5 (commuting modular groups) is checked through the relative
/// modular operator of (ψ, φ): the check records [Δ_φ, Δ_{ψ,φ}] = 0 and
/// the Ad Δ_φ-invariance of α(N) and β(N°).
pub fn verify_groupoid(g: &GroupoidData, tol: f64) -> VerificationReport {
    let mut rep = VerificationReport::new("measured quantum groupoid axioms", tol);
    let dm = g.algebra.dim;
    let d = g.dim_h;

    // 1. images of α and β commute; δ(1) = q_{β,α}
    let mut worst = 0.0f64;
    for x in &g.alpha.images {
        for y in &g.beta.images {
            worst = worst.max(x.mul(y).sub(&y.mul(x)).fro_norm());
        }
    }
    rep.push("alpha and beta images commute", worst, d as f64);
    let d1 = g.delta_of(&g.algebra.one);
    rep.push("delta(1) = q_{beta,alpha}", d1.sub(&g.q_ba).fro_norm(), g.q_ba.fro_norm());

    // range condition δ(x) = q δ(x) q
    let mut worst = 0.0f64;
    let mut scale = 1.0f64;
    for m in &g.delta_h {
        let comp = g.q_ba.mul(m).mul(&g.q_ba);
        worst = worst.max(comp.sub(m).fro_norm());
        scale = scale.max(m.fro_norm());
    }
    rep.push("delta lands in q(M x M)q", worst, scale);

    // 2. coassociativity via structure constants
    // F[(b,c),m] = D_m[b,c] and G[m,(c,d)] = D_m[c,d]
    let mut f = CMatrix::zeros(dm * dm, dm);
    let mut gmat = CMatrix::zeros(dm, dm * dm);
    for m in 0..dm {
        for (b, c, t) in g.delta_coeffs[m].nonzeros() {
            f.set(b * dm + c, m, t);
            gmat.set(m, b * dm + c, t);
        }
    }
    let mut worst = 0.0f64;
    let mut scale = 1.0f64;
    for a in 0..dm {
        let lhs = f.mul(&g.delta_coeffs[a]); // [(b,c),d]
        let rhs = g.delta_coeffs[a].mul(&gmat); // [b,(c,d)]
        let mut diff2 = 0.0f64;
        for b in 0..dm {
            for c in 0..dm {
                for e in 0..dm {
                    let l = lhs.get(b * dm + c, e);
                    let r = rhs.get(b, c * dm + e);
                    diff2 += (l - r).norm_sqr();
                }
            }
        }
        worst = worst.max(diff2.sqrt());
        scale = scale.max(lhs.fro_norm());
    }
    rep.push("coassociativity", worst, scale);

    // 3. δ(α(n)) = δ(1)(α(n)⊗1) and δ(β(n°)) = δ(1)(1⊗β(n°))
    let id_h = CMatrix::identity(d);
    let mut worst_a = 0.0f64;
    let mut worst_b = 0.0f64;
    for (nu, (ac, bc)) in g.alpha_coeffs.iter().zip(&g.beta_coeffs).enumerate() {
        let da = g.delta_of(ac);
        let rhs = g.q_ba.mul(&g.alpha.images[nu].tensor(&id_h));
        worst_a = worst_a.max(da.sub(&rhs).fro_norm());
        let db = g.delta_of(bc);
        let rhs = g.q_ba.mul(&id_h.tensor(&g.beta.images[nu]));
        worst_b = worst_b.max(db.sub(&rhs).fro_norm());
    }
    rep.push("delta(alpha(n)) = delta(1)(alpha(n) x 1)", worst_a, d as f64);
    rep.push("delta(beta(n)) = delta(1)(1 x beta(n))", worst_b, d as f64);

    // 4. T = (id⊗φ)δ lands in α(N) with φ = ε∘α⁻¹∘T, and the mirror
    // statement for T′ = (ψ⊗id)δ.
    let mut worst_range = 0.0f64;
    let mut worst_eps = 0.0f64;
    for a in 0..dm {
        let mut t = vec![czero(); dm];
        for (b, c, v) in g.delta_coeffs[a].nonzeros() {
            t[b] += v * g.phi[c];
        }
        match express_in(&g.alpha_coeffs, &t) {
            Ok((x, res)) => {
                worst_range = worst_range.max(res);
                let n = g.base.element(&x);
                let eps = g.epsilon.apply(&n);
                worst_eps = worst_eps.max((eps - g.phi[a]).norm());
            }
            Err(_) => worst_range = worst_range.max(f64::INFINITY),
        }
    }
    rep.push("T = (id x phi)delta lands in alpha(N)", worst_range, 1.0);
    rep.push("phi = eps.alpha^-1.T", worst_eps, 1.0);

    let mut worst_range = 0.0f64;
    let mut worst_eps = 0.0f64;
    for a in 0..dm {
        let mut t = vec![czero(); dm];
        for (b, c, v) in g.delta_coeffs[a].nonzeros() {
            t[c] += v * g.psi[b];
        }
        match express_in(&g.beta_coeffs, &t) {
            Ok((x, res)) => {
                worst_range = worst_range.max(res);
                let n = g.base.element(&x);
                let eps = g.epsilon.apply(&n);
                worst_eps = worst_eps.max((eps - g.psi[a]).norm());
            }
            Err(_) => worst_range = worst_range.max(f64::INFINITY),
        }
    }
    rep.push("T' = (psi x id)delta lands in beta(N)", worst_range, 1.0);
    rep.push("psi = eps.beta^-1.T'", worst_eps, 1.0);

    // 5. commuting modular structure. The relative Tomita map
    // S_{ψ,φ}: Λ_φ(x) ↦ Λ_ψ(x*) gives Δ_{ψ,φ} = S*S implementing σ^ψ;
    // the modular groups commute iff [Δ_φ, Δ_{ψ,φ}] = 0.
    match basis_gns(&g.algebra, &g.psi, tol) {
        Ok(gns_psi) => {
            let s_rel =
                gns_psi.coord.mul(&g.algebra.star).mul(&g.gns.coord_inv.conj());
            let delta_rel = AntiLinear::new(s_rel).grammian();
            let dphi = &g.gns.delta_mod;
            let comm = dphi.mul(&delta_rel).sub(&delta_rel.mul(dphi));
            rep.push(
                "[Delta_phi, Delta_{psi,phi}] = 0",
                comm.fro_norm(),
                dphi.fro_norm() * delta_rel.fro_norm(),
            );
        }
        Err(_) => rep.push_flag("[Delta_phi, Delta_{psi,phi}] = 0 (psi faithful)", false),
    }
    let dphi = &g.gns.delta_mod;
    let dphi_inv = dphi.inverse().expect("modular operator invertible");
    let alpha_span = span(&g.alpha.images, d, d, tol);
    let beta_span = span(&g.beta.images, d, d, tol);
    let mut worst_a = 0.0f64;
    let mut worst_b = 0.0f64;
    for x in &g.alpha.images {
        worst_a = worst_a.max(alpha_span.residual(&dphi.mul(x).mul(&dphi_inv)));
    }
    for x in &g.beta.images {
        worst_b = worst_b.max(beta_span.residual(&dphi.mul(x).mul(&dphi_inv)));
    }
    rep.push("Ad Delta_phi preserves alpha(N)", worst_a, d as f64);
    rep.push("Ad Delta_phi preserves beta(N)", worst_b, d as f64);

    rep
}

/// The left regular partial isometry W, defined through
/// W*(Λx⊗Λy) = (π⊗π)(δ(y))(Λx⊗Λ1).
pub fn build_w(g: &GroupoidData) -> Result<CMatrix> {
    let d = g.dim_h;
    let dm = g.algebra.dim;
    let mut k = CMatrix::zeros(d * d, d * d);
    for b in 0..dm {
        for a in 0..dm {
            let lam_a: Vec<C64> = (0..d).map(|r| g.gns.coord.get(r, a)).collect();
            let col = g.delta_h[b].apply_vec(&vec_tensor(&lam_a, &g.gns.vacuum));
            for (r, v) in col.iter().enumerate() {
                if v.re != 0.0 || v.im != 0.0 {
                    k.set(r, a * dm + b, *v);
                }
            }
        }
    }
    let ci = &g.gns.coord_inv;
    let w = k.mul(&ci.tensor(ci)).adjoint();
    let pdef = w.mul(&w.adjoint()).mul(&w).sub(&w).fro_norm();
    let sdef = w.adjoint().mul(&w).sub(&g.q_ba).fro_norm();
    if pdef > 1e-6 * 1.0f64.max(w.fro_norm()) || sdef > 1e-6 * 1.0f64.max(g.q_ba.fro_norm()) {
        return Err(Error::NotIsometric(format!(
            "W is not a partial isometry with support q_{{beta,alpha}} \
             (isometry defect {pdef:.3e}, support defect {sdef:.3e})"
        )));
    }
    Ok(w)
}

/// The right regular partial isometry V, defined through
/// V(Λ_ψx⊗Λ_ψy) = (Λ_ψ⊗Λ_ψ)(δ(x)(1⊗y)), with Λ_ψ = Λ(· d^{1/2}) for the
/// density d of ψ with respect to φ.
pub fn build_v(g: &GroupoidData, tol: f64) -> Result<CMatrix> {
    let d = g.dim_h;
    let dm = g.algebra.dim;
    // density h with ψ(x) = φ(h x), solved from the φ-moment matrix
    let mut moment = CMatrix::zeros(dm, dm);
    for a in 0..dm {
        for b in 0..dm {
            let prod = g.algebra.mul(&unit_vec(dm, a), &unit_vec(dm, b));
            let val: C64 = prod.iter().zip(&g.phi).map(|(c, p)| c * p).sum();
            moment.set(b, a, val);
        }
    }
    let h = moment.solve(&g.psi)?;
    let pi_h = g.pi_of(&h);
    // σ^φ-invariance of the density (commuting modular groups at the
    // level of the Radon–Nikodym element)
    let comm = pi_h.mul(&g.gns.delta_mod).sub(&g.gns.delta_mod.mul(&pi_h));
    if comm.fro_norm() > 1e-6 * 1.0f64.max(pi_h.fro_norm() * g.gns.delta_mod.fro_norm()) {
        return Err(Error::NonCommutingDensities(format!(
            "the density of psi w.r.t. phi is not sigma^phi-invariant \
             (commutator norm {:.3e})",
            comm.fro_norm()
        )));
    }
    let herm = pi_h.sub(&pi_h.adjoint()).fro_norm();
    if herm > 1e-8 * 1.0f64.max(pi_h.fro_norm()) {
        return Err(Error::NonCommutingDensities(
            "the density of psi w.r.t. phi is not self-adjoint".into(),
        ));
    }
    let sqrt_pi = pi_h.positive_sqrt();
    // coefficients of d^{1/2}: apply the coordinate-level inverse of π
    let half = g
        .gns
        .coord_inv
        .mul(&sqrt_pi)
        .mul(&g.gns.coord)
        .apply_vec(&g.algebra.one);
    // Λ_ψ on coefficients: right multiplication by d^{1/2}, then Λ
    let mut rd = CMatrix::zeros(dm, dm);
    for a in 0..dm {
        let col = g.algebra.mul(&unit_vec(dm, a), &half);
        for (r, v) in col.iter().enumerate() {
            rd.set(r, a, *v);
        }
    }
    let l_psi = g.gns.coord.mul(&rd);
    let l_psi_inv = l_psi.inverse().map_err(|_| {
        Error::NonFaithful("psi is not faithful: Lambda_psi is singular".into())
    })?;
    let vac_psi = g.gns.coord.apply_vec(&half);
    let mut k = CMatrix::zeros(d * d, d * d);
    for a in 0..dm {
        for b in 0..dm {
            let lam_b: Vec<C64> = (0..d).map(|r| l_psi.get(r, b)).collect();
            let col = g.delta_h[a].apply_vec(&vec_tensor(&vac_psi, &lam_b));
            for (r, v) in col.iter().enumerate() {
                if v.re != 0.0 || v.im != 0.0 {
                    k.set(r, a * dm + b, *v);
                }
            }
        }
    }
    let v = k.mul(&l_psi_inv.tensor(&l_psi_inv));
    let pdef = v.mul(&v.adjoint()).mul(&v).sub(&v).fro_norm();
    let sdef = v.mul(&v.adjoint()).sub(&g.q_ba).fro_norm();
    if pdef > 1e-6 * 1.0f64.max(v.fro_norm()) || sdef > 1e-6 * 1.0f64.max(g.q_ba.fro_norm()) {
        return Err(Error::NotIsometric(format!(
            "V is not a partial isometry with range q_{{beta,alpha}} \
             (isometry defect {pdef:.3e}, range defect {sdef:.3e})"
        )));
    }
    let _ = tol;
    Ok(v)
}

/// The regular representations and the dual structure of a groupoid.
#[derive(Clone, Debug)]
pub struct RegularReps {
    pub w: CMatrix,
    pub v: CMatrix,
    pub vtilde: CMatrix,
    /// U = ĴJ (a linear unitary).
    pub u: CMatrix,
    pub jhat: AntiLinear,
    /// S = [(ω⊗id)V], the algebra M on H.
    pub s: OperatorSpace,
    /// Ŝ = [(id⊗ω)V], the dual algebra (the commutant presentation M̂′).
    pub shat: OperatorSpace,
    /// M̂ = [(ω⊗id)W], the dual von Neumann algebra.
    pub mhat: OperatorSpace,
    /// α̂ = Ad U ∘ α (*-homomorphism).
    pub alpha_hat: StarHom,
    /// β̂ = Ad U ∘ β (*-anti-homomorphism).
    pub beta_hat: StarHom,
}

/// Build S, Ŝ, the dual GNS data (Λ̂ through a_φ(ω)), Ĵ, U = ĴJ, the
/// lifted base maps α̂, β̂ and Ṽ = Σ(1⊗U)V(1⊗U*)Σ.
pub fn dual_data(g: &GroupoidData, v: &CMatrix, w: &CMatrix, tol: f64) -> Result<RegularReps> {
    let d = g.dim_h;
    let mut s_slices = Vec::with_capacity(d * d);
    let mut shat_slices = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let om = VectorFunctional::new(unit_vec(d, i), unit_vec(d, j));
            s_slices.push(slice(Side::Left, &om, v, d, d));
            shat_slices.push(slice(Side::Right, &om, v, d, d));
        }
    }
    let s = span(&s_slices, d, d, tol);
    let shat = span(&shat_slices, d, d, tol);

    // dual GNS: Λ̂((ω⊗id)W) = a_φ(ω) with ⟨Λx, a_φ(ω)⟩ = ω(x*)
    let mut kept_y: Vec<CMatrix> = Vec::new();
    let mut kept_a: Vec<Vec<C64>> = Vec::new();
    let mut onb: Vec<CMatrix> = Vec::new();
    let mut all_y: Vec<CMatrix> = Vec::new();
    let coord_h = g.gns.coord.adjoint();
    for i in 0..d {
        for j in 0..d {
            let om = VectorFunctional::new(unit_vec(d, i), unit_vec(d, j));
            let y = slice(Side::Left, &om, w, d, d);
            all_y.push(y.clone());
            // b_k = ω(x_k*) over the basis of M
            let mut b = vec![czero(); d];
            for (k_idx, b_k) in b.iter_mut().enumerate() {
                let star_k = g.algebra.star_of(&unit_vec(g.algebra.dim, k_idx));
                *b_k = om.apply(&g.pi_of(&star_k));
            }
            let a = coord_h.solve(&b)?;
            // keep a maximal independent family of slices
            let mut r = y.clone();
            for e in &onb {
                let c = e.fro_inner(&r);
                r = r.sub(&e.scale(c));
            }
            let rn = r.fro_norm();
            if rn > tol * 1.0f64.max(y.fro_norm()) {
                onb.push(r.scale(C64::new(1.0 / rn, 0.0)));
                kept_y.push(y);
                kept_a.push(a);
            }
        }
    }
    let mhat = span(&all_y, d, d, tol);
    if kept_y.len() != d {
        return Err(Error::DegenerateDual(format!(
            "dual GNS map has rank {} on a {}-dimensional space",
            kept_y.len(),
            d
        )));
    }
    // Tomita map of the dual weight: Λ̂(y) ↦ Λ̂(y*)
    let kdim = kept_y.len();
    let mut gram = CMatrix::zeros(kdim, kdim);
    for (m, ym) in kept_y.iter().enumerate() {
        for (n, yn) in kept_y.iter().enumerate() {
            gram.set(m, n, ym.fro_inner(yn));
        }
    }
    let mut b_cols = CMatrix::zeros(d, kdim);
    for (k_idx, yk) in kept_y.iter().enumerate() {
        let ystar = yk.adjoint();
        let rhs: Vec<C64> = kept_y.iter().map(|ym| ym.fro_inner(&ystar)).collect();
        let coeff = gram.solve(&rhs)?;
        // consistency: y* must stay inside the dual algebra
        let mut fit = CMatrix::zeros(d, d);
        for (c, ym) in coeff.iter().zip(&kept_y) {
            fit = fit.add(&ym.scale(*c));
        }
        if fit.sub(&ystar).fro_norm() > 1e-6 * 1.0f64.max(ystar.fro_norm()) {
            return Err(Error::DegenerateDual(
                "dual slice algebra is not *-closed".into(),
            ));
        }
        let mut lam = vec![czero(); d];
        for (c, am) in coeff.iter().zip(&kept_a) {
            for (t, s_v) in lam.iter_mut().zip(am) {
                *t += c * s_v;
            }
        }
        for (r, v_r) in lam.iter().enumerate() {
            b_cols.set(r, k_idx, *v_r);
        }
    }
    let mut a_cols = CMatrix::zeros(d, kdim);
    for (k_idx, ak) in kept_a.iter().enumerate() {
        for (r, v_r) in ak.iter().enumerate() {
            a_cols.set(r, k_idx, *v_r);
        }
    }
    let a_conj_inv = a_cols
        .conj()
        .inverse()
        .map_err(|_| Error::DegenerateDual("dual GNS vectors do not span H".into()))?;
    let s_hat = AntiLinear::new(b_cols.mul(&a_conj_inv));
    let jhat = s_hat.polar_part(tol);
    let u = jhat.compose_anti(&g.gns.j_op);

    let alpha_hat_imgs: Vec<CMatrix> =
        g.alpha.images.iter().map(|x| u.mul(x).mul(&u.adjoint())).collect();
    let beta_hat_imgs: Vec<CMatrix> =
        g.beta.images.iter().map(|x| u.mul(x).mul(&u.adjoint())).collect();
    let alpha_hat = StarHom::new(g.base.clone(), d, alpha_hat_imgs, false);
    let beta_hat = StarHom::new(g.base.clone(), d, beta_hat_imgs, true);

    let sigma = flip(d, d);
    let id_h = CMatrix::identity(d);
    let vtilde = sigma
        .mul(&id_h.tensor(&u))
        .mul(v)
        .mul(&id_h.tensor(&u.adjoint()))
        .mul(&sigma);

    Ok(RegularReps { w: w.clone(), v: v.clone(), vtilde, u, jhat, s, shat, mhat, alpha_hat, beta_hat })
}

fn pentagon_residual(x: &CMatrix, d: usize) -> f64 {
    let dims = [d, d, d];
    let mut a = LegChain::new(&dims);
    a.push(x, &[0, 1]);
    a.push(x, &[0, 2]);
    a.push(x, &[1, 2]);
    let mut b = LegChain::new(&dims);
    b.push(x, &[1, 2]);
    b.push(x, &[0, 1]);
    chain_difference_norm(&a, &b)
}

fn exchange_residual(x: &CMatrix, y: &CMatrix, d: usize) -> f64 {
    // X₁₂Y₂₃ = Y₂₃X₁₂ on H⊗H⊗H
    let dims = [d, d, d];
    let mut a = LegChain::new(&dims);
    a.push(x, &[0, 1]);
    a.push(y, &[1, 2]);
    let mut b = LegChain::new(&dims);
    b.push(y, &[1, 2]);
    b.push(x, &[0, 1]);
    chain_difference_norm(&a, &b)
}

/// The complete structure suite for the regular representations: pentagon
/// equations, exchange relations, supports, symmetry relations through J
/// and Ĵ, base-map intertwinings, both coproduct implementations, density
/// relations of the coproducts, and commutation of left and right regular
/// representations.
pub fn verify_structure(g: &GroupoidData, reps: &RegularReps, tol: f64) -> VerificationReport {
    let mut rep = VerificationReport::new("regular representation structure", tol);
    let d = g.dim_h;
    let id_h = CMatrix::identity(d);
    let sigma = flip(d, d);
    let scale3 = (d as f64).powf(1.5);
    let scale2 = d as f64;
    let (w, v, vt, u) = (&reps.w, &reps.v, &reps.vtilde, &reps.u);

    rep.push("pentagon for W", pentagon_residual(w, d), scale3);
    rep.push("pentagon for V", pentagon_residual(v, d), scale3);
    rep.push("pentagon for Vtilde", pentagon_residual(vt, d), scale3);
    rep.push("W12 V23 = V23 W12", exchange_residual(w, v, d), scale3);
    rep.push("V12 Vt23 = Vt23 V12", exchange_residual(v, vt, d), scale3);

    // unitarity of U and the two conjugation symmetries
    rep.push("U = JhatJ is unitary", u.adjoint().mul(u).sub(&id_h).fro_norm(), 1.0);
    let w_from_v = sigma
        .mul(&u.tensor(&id_h))
        .mul(v)
        .mul(&u.adjoint().tensor(&id_h))
        .mul(&sigma);
    rep.push("W = Sigma(U x 1)V(U* x 1)Sigma", w.sub(&w_from_v).fro_norm(), scale2);
    let aj = &g.gns.j_op.mat;
    let ajh = &reps.jhat.mat;
    let b_v = aj.tensor(ajh);
    let v_conj = b_v.mul(&v.conj()).mul(&b_v.conj());
    rep.push("V* = (J x Jhat)V(J x Jhat)", v.adjoint().sub(&v_conj).fro_norm(), scale2);
    let b_w = ajh.tensor(aj);
    let w_conj = b_w.mul(&w.conj()).mul(&b_w.conj());
    rep.push("W* = (Jhat x J)W(Jhat x J)", w.adjoint().sub(&w_conj).fro_norm(), scale2);

    // β̂(n°) = Jα(n)*J
    let mut worst = 0.0f64;
    for (bh, a) in reps.beta_hat.images.iter().zip(&g.alpha.images) {
        let rhs = aj.mul(&a.transpose()).mul(&aj.conj());
        worst = worst.max(bh.sub(&rhs).fro_norm());
    }
    rep.push("betahat(n) = J alpha(n)* J", worst, scale2);

    // supports (all six)
    let q_ba = &g.q_ba;
    let q_ahat_b = q_projector(&reps.alpha_hat, &g.beta).expect("mixed variance");
    let q_a_bhat = q_projector(&g.alpha, &reps.beta_hat).expect("mixed variance");
    let q_bhat_ahat = q_projector(&reps.beta_hat, &reps.alpha_hat).expect("mixed variance");
    let qs = q_ba.fro_norm();
    rep.push("V*V = q_{alphahat,beta}", v.adjoint().mul(v).sub(&q_ahat_b).fro_norm(), qs);
    rep.push("VV* = q_{beta,alpha}", v.mul(&v.adjoint()).sub(q_ba).fro_norm(), qs);
    rep.push("W*W = q_{beta,alpha}", w.adjoint().mul(w).sub(q_ba).fro_norm(), qs);
    rep.push("WW* = q_{alpha,betahat}", w.mul(&w.adjoint()).sub(&q_a_bhat).fro_norm(), qs);
    rep.push("Vt*Vt = q_{betahat,alphahat}", vt.adjoint().mul(vt).sub(&q_bhat_ahat).fro_norm(), qs);
    rep.push("VtVt* = q_{alphahat,beta}", vt.mul(&vt.adjoint()).sub(&q_ahat_b).fro_norm(), qs);

    // base-map commutations and intertwinings
    let nb = g.base.dim();
    let mut worst_v = 0.0f64;
    let mut worst_w = 0.0f64;
    let mut worst_vt = 0.0f64;
    for n in 0..nb {
        let a_n = &g.alpha.images[n];
        let b_n = &g.beta.images[n];
        let ah_n = &reps.alpha_hat.images[n];
        let bh_n = &reps.beta_hat.images[n];
        let comm = |x: &CMatrix, y: &CMatrix| x.mul(y).sub(&y.mul(x)).fro_norm();
        for y in [a_n.tensor(&id_h), bh_n.tensor(&id_h), id_h.tensor(ah_n), id_h.tensor(bh_n)] {
            worst_v = worst_v.max(comm(v, &y));
        }
        worst_v = worst_v
            .max(v.mul(&id_h.tensor(a_n)).sub(&ah_n.tensor(&id_h).mul(v)).fro_norm());
        worst_v = worst_v
            .max(v.mul(&b_n.tensor(&id_h)).sub(&id_h.tensor(b_n).mul(v)).fro_norm());
        for y in [bh_n.tensor(&id_h), ah_n.tensor(&id_h), id_h.tensor(b_n), id_h.tensor(ah_n)] {
            worst_w = worst_w.max(comm(w, &y));
        }
        worst_w = worst_w
            .max(w.mul(&id_h.tensor(bh_n)).sub(&b_n.tensor(&id_h).mul(w)).fro_norm());
        worst_w = worst_w
            .max(w.mul(&a_n.tensor(&id_h)).sub(&id_h.tensor(a_n).mul(w)).fro_norm());
        for y in [a_n.tensor(&id_h), b_n.tensor(&id_h), id_h.tensor(a_n), id_h.tensor(bh_n)] {
            worst_vt = worst_vt.max(comm(vt, &y));
        }
        worst_vt = worst_vt
            .max(vt.mul(&id_h.tensor(b_n)).sub(&bh_n.tensor(&id_h).mul(vt)).fro_norm());
        worst_vt = worst_vt
            .max(vt.mul(&ah_n.tensor(&id_h)).sub(&id_h.tensor(ah_n).mul(vt)).fro_norm());
    }
    rep.push("V base-map relations", worst_v, scale2);
    rep.push("W base-map relations", worst_w, scale2);
    rep.push("Vtilde base-map relations", worst_vt, scale2);

    // both implementations of δ
    let mut worst_v = 0.0f64;
    let mut worst_w = 0.0f64;
    for (a, dh) in g.delta_h.iter().enumerate() {
        let x = &g.gns.pi[a];
        let by_v = v.mul(&x.tensor(&id_h)).mul(&v.adjoint());
        worst_v = worst_v.max(dh.sub(&by_v).fro_norm());
        let by_w = w.adjoint().mul(&id_h.tensor(x)).mul(w);
        worst_w = worst_w.max(dh.sub(&by_w).fro_norm());
    }
    rep.push("delta(x) = V(x x 1)V*", worst_v, scale2);
    rep.push("delta(x) = W*(1 x x)W", worst_w, scale2);

    // dual coproduct: both implementations agree on Ŝ
    let mut worst = 0.0f64;
    for y in &reps.shat.basis {
        let by_v = v.adjoint().mul(&id_h.tensor(y)).mul(v);
        let by_vt = vt.mul(&y.tensor(&id_h)).mul(&vt.adjoint());
        worst = worst.max(by_v.sub(&by_vt).fro_norm());
    }
    rep.push("deltahat(y) = V*(1 x y)V = Vt(y x 1)Vt*", worst, scale2);

    // algebra identifications: S = π(M); identities lie in S and Ŝ
    let m_space = g.m_space(tol);
    rep.push("S = pi(M)", spaces_equality_residual(&reps.s, &m_space), 1.0);
    rep.push("1 in S", reps.s.residual(&id_h), 1.0);
    rep.push("1 in Shat", reps.shat.residual(&id_h), 1.0);
    rep.push("Mhat and Shat are commutants", {
        let mut worst = 0.0f64;
        for x in &reps.mhat.basis {
            for y in &reps.shat.basis {
                worst = worst.max(x.mul(y).sub(&y.mul(x)).fro_norm());
            }
        }
        worst
    }, 1.0);

    // left/right regular representations commute
    let mut worst_s = 0.0f64;
    for x in &reps.s.basis {
        for y in &reps.s.basis {
            let ry = u.mul(y).mul(&u.adjoint());
            worst_s = worst_s.max(x.mul(&ry).sub(&ry.mul(x)).fro_norm());
        }
    }
    rep.push("[S, USU*] = 0", worst_s, 1.0);
    let mut worst_sh = 0.0f64;
    for x in &reps.shat.basis {
        for y in &reps.shat.basis {
            let ly = u.mul(y).mul(&u.adjoint());
            worst_sh = worst_sh.max(x.mul(&ly).sub(&ly.mul(x)).fro_norm());
        }
    }
    rep.push("[Shat, UShatU*] = 0", worst_sh, 1.0);

    // density relations of the coproducts
    let dm = g.algebra.dim;
    let mut gens_r = Vec::with_capacity(dm * dm);
    let mut gens_l = Vec::with_capacity(dm * dm);
    let mut gens_q = Vec::with_capacity(dm * dm);
    for a in 0..dm {
        for b in 0..dm {
            let xb = &g.gns.pi[b];
            gens_r.push(g.delta_h[a].mul(&id_h.tensor(xb)));
            gens_l.push(g.delta_h[a].mul(&xb.tensor(&id_h)));
            gens_q.push(q_ba.mul(&g.gns.pi[a].tensor(xb)));
        }
    }
    let sp_r = span(&gens_r, d * d, d * d, tol);
    let sp_l = span(&gens_l, d * d, d * d, tol);
    let sp_q = span(&gens_q, d * d, d * d, tol);
    rep.push("[delta(S)(1 x S)] = delta(1)(S x S)", spaces_equality_residual(&sp_r, &sp_q), 1.0);
    rep.push("[delta(S)(S x 1)] = delta(1)(S x S)", spaces_equality_residual(&sp_l, &sp_q), 1.0);

    let sh = &reps.shat.basis;
    let mut gens_r = Vec::with_capacity(sh.len() * sh.len());
    let mut gens_l = Vec::with_capacity(sh.len() * sh.len());
    let mut gens_q = Vec::with_capacity(sh.len() * sh.len());
    for ya in sh {
        let dya = v.adjoint().mul(&id_h.tensor(ya)).mul(v);
        for yb in sh {
            gens_r.push(dya.mul(&id_h.tensor(yb)));
            gens_l.push(dya.mul(&yb.tensor(&id_h)));
            gens_q.push(q_ahat_b.mul(&ya.tensor(yb)));
        }
    }
    let sp_r = span(&gens_r, d * d, d * d, tol);
    let sp_l = span(&gens_l, d * d, d * d, tol);
    let sp_q = span(&gens_q, d * d, d * d, tol);
    rep.push(
        "[deltahat(Shat)(1 x Shat)] = deltahat(1)(Shat x Shat)",
        spaces_equality_residual(&sp_r, &sp_q),
        1.0,
    );
    rep.push(
        "[deltahat(Shat)(Shat x 1)] = deltahat(1)(Shat x Shat)",
        spaces_equality_residual(&sp_l, &sp_q),
        1.0,
    );

    // multiplier units of the coproducts
    rep.push(
        "delta(1_S) = q_{beta,alpha}",
        g.delta_of(&g.algebra.one).sub(q_ba).fro_norm(),
        qs,
    );
    rep.push(
        "deltahat(1_Shat) = q_{alphahat,beta}",
        v.adjoint().mul(v).sub(&q_ahat_b).fro_norm(),
        qs,
    );

    rep
}

/// The unit-modulus block scalars of the product formula
/// (1⊗U)ΣWVṼ = Σ_l λ_l (β̂(e^{(l)})⊗α̂(e^{(l)})) q_{β̂,α̂}, where e^{(l)}
/// runs over the minimal central projections of the basis N.
pub fn theorem_2_13(g: &GroupoidData, reps: &RegularReps, tol: f64) -> Result<Vec<C64>> {
    let d = g.dim_h;
    let id_h = CMatrix::identity(d);
    let sigma = flip(d, d);
    let t = id_h
        .tensor(&reps.u)
        .mul(&sigma)
        .mul(&reps.w)
        .mul(&reps.v)
        .mul(&reps.vtilde);
    let q_hat = q_projector(&reps.beta_hat, &reps.alpha_hat)?;
    let support = t.adjoint().mul(&t).sub(&q_hat).fro_norm();
    if support > tol * 1.0f64.max(q_hat.fro_norm()) {
        return Err(Error::NotScalarForm(format!(
            "T*T does not recover q_{{betahat,alphahat}} (defect {support:.3e})"
        )));
    }
    let mut lambdas = Vec::with_capacity(g.base.blocks.len());
    let mut fit = CMatrix::zeros(d * d, d * d);
    for (l, &n) in g.base.blocks.iter().enumerate() {
        // central projection of block l as a coefficient vector over units
        let mut z = vec![czero(); g.base.dim()];
        for i in 0..n {
            z[g.base.unit_index(l, i, i)] = cone();
        }
        let p = reps
            .beta_hat
            .apply_coeffs(&z)
            .tensor(&reps.alpha_hat.apply_coeffs(&z))
            .mul(&q_hat);
        let denom = p.fro_inner(&p);
        if denom.norm() < tol {
            return Err(Error::NotScalarForm(format!(
                "block {l} of the base has vanishing support in the product formula"
            )));
        }
        let lam = p.fro_inner(&t) / denom;
        fit = fit.add(&p.scale(lam));
        lambdas.push(lam );
    }
    let res = t.sub(&fit).fro_norm();
    if res > tol * 1.0f64.max(t.fro_norm()) {
        return Err(Error::NotScalarForm(format!(
            "(1 x U)Sigma W V Vt is not of block-scalar form (residual {res:.3e})"
        )));
    }
    for (l, lam) in lambdas.iter().enumerate() {
        if (lam.norm() - 1.0).abs() > tol {
            return Err(Error::NotScalarForm(format!(
                "lambda_{l} = {lam} is not of unit modulus"
            )));
        }
    }
    Ok(lambdas)
}

/// C(X) = [(id⊗ω)(ΣX)], the slice space of the flipped operator.
pub fn c_of(x: &CMatrix, dim_h: usize, tol: f64) -> OperatorSpace {
    let sigma = flip(dim_h, dim_h);
    let sx = sigma.mul(x);
    let mut slices = Vec::with_capacity(dim_h * dim_h);
    for i in 0..dim_h {
        for j in 0..dim_h {
            let om = VectorFunctional::new(unit_vec(dim_h, i), unit_vec(dim_h, j));
            slices.push(slice(Side::Right, &om, &sx, dim_h, dim_h));
        }
    }
    span(&slices, dim_h, dim_h, tol)
}

/// Regularity certification: compares C(V) with the β-compacts [L_ξL_η*],
/// cross-checks the equivalent conditions C(W) = [R_ξR_η*] (α-compacts),
/// SŜ = [L̂L̂*] (β̂-compacts), SŜ = U·C(V)·U*, and reports whether all
/// conditions agree.
pub fn regularity(g: &GroupoidData, reps: &RegularReps, tol: f64) -> VerificationReport {
    let mut rep = VerificationReport::new("regularity", tol);
    let d = g.dim_h;

    let cv = c_of(&reps.v, d, tol);
    let ll = ll_star_space(&g.beta, tol);
    let r1 = spaces_equality_residual(&cv, &ll);
    rep.push("C(V) = [L L*] over beta (regular)", r1, 1.0);
    rep.push_flag("[L L*] inside C(V) (semi-regular)", cv.contains_space(&ll, tol));
    rep.push_flag("C(V) inside [L L*]", ll.contains_space(&cv, tol));

    let cw = c_of(&reps.w, d, tol);
    let rr = rr_star_space(&g.alpha, tol);
    let r2 = spaces_equality_residual(&cw, &rr);
    rep.push("C(W) = [R R*] over alpha", r2, 1.0);

    let sshat = crate::linalg::multiply_spaces(&reps.s, &reps.shat, tol);
    let llhat = ll_star_space(&reps.beta_hat, tol);
    let r3 = spaces_equality_residual(&sshat, &llhat);
    rep.push("S Shat = [L L*] over betahat", r3, 1.0);

    let ucvu: Vec<CMatrix> = cv
        .basis
        .iter()
        .map(|x| reps.u.mul(x).mul(&reps.u.adjoint()))
        .collect();
    let ucvu = span(&ucvu, d, d, tol);
    rep.push("S Shat = U C(V) U*", spaces_equality_residual(&sshat, &ucvu), 1.0);
    rep.push_flag("C(V) is a *-algebra", {
        let closed = crate::linalg::close_star_algebra(&cv, tol);
        spaces_equal(&closed, &cv, tol)
    });

    let conds = [
        crate::linalg::passes(r1, 1.0, tol),
        crate::linalg::passes(r2, 1.0, tol),
        crate::linalg::passes(r3, 1.0, tol),
    ];
    rep.push_flag("equivalent regularity conditions agree", conds.iter().all(|&c| c == conds[0]));
    rep
}
