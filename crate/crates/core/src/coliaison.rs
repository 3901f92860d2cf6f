//! Linking groupoids on the basis C² and their building blocks: finite
//! quantum groups (function algebras and group algebras of finite
//! groups), trivial linking groupoids, and cocycle-twist linking
//! groupoids of monoidally equivalent pairs.

use num_complex::Complex64 as C64;

use crate::fdcstar::{BasisAlgebra, MultiMatrixAlgebra, PositiveFunctional};
use crate::groupoid::{self, GroupoidData, RegularReps};
use crate::linalg::{
    chain_difference_norm, flip, multiply_spaces, slice, span, spaces_equality_residual,
    CMatrix, LegChain, OperatorSpace, Side, VectorFunctional,
};
use crate::report::VerificationReport;
use crate::{Error, Result};

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

fn cone() -> C64 {
    C64::new(1.0, 0.0)
}

/// A finite group given by its multiplication table.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    pub order: usize,
    /// mul[g][h] = g·h.
    pub mul: Vec<Vec<usize>>,
    pub inv: Vec<usize>,
    pub id: usize,
}

impl FiniteGroup {
    /// Build from a multiplication table; validates the group axioms.
    pub fn from_table(mul: Vec<Vec<usize>>) -> Result<FiniteGroup> {
        let n = mul.len();
        if n == 0 || mul.iter().any(|r| r.len() != n || r.iter().any(|&v| v >= n)) {
            return Err(Error::InvalidInput("malformed multiplication table".into()));
        }
        // identity
        let mut id = None;
        for e in 0..n {
            if (0..n).all(|g| mul[e][g] == g && mul[g][e] == g) {
                id = Some(e);
                break;
            }
        }
        let id = id.ok_or_else(|| Error::InvalidInput("table has no identity".into()))?;
        // associativity
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(Error::InvalidInput(format!(
                            "table is not associative at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        // inverses
        let mut inv = vec![0usize; n];
        for g in 0..n {
            let h = (0..n)
                .find(|&h| mul[g][h] == id && mul[h][g] == id)
                .ok_or_else(|| Error::InvalidInput(format!("element {g} has no inverse")))?;
            inv[g] = h;
        }
        Ok(FiniteGroup { order: n, mul, inv, id })
    }

    /// The cyclic group Z_n.
    pub fn cyclic(n: usize) -> FiniteGroup {
        let mul: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        FiniteGroup::from_table(mul).expect("cyclic table is a group")
    }

    /// The direct product of two groups, elements indexed g·|H|+h.
    pub fn product(a: &FiniteGroup, b: &FiniteGroup) -> FiniteGroup {
        let n = a.order * b.order;
        let idx = |g: usize, h: usize| g * b.order + h;
        let mut mul = vec![vec![0usize; n]; n];
        for g1 in 0..a.order {
            for h1 in 0..b.order {
                for g2 in 0..a.order {
                    for h2 in 0..b.order {
                        mul[idx(g1, h1)][idx(g2, h2)] = idx(a.mul[g1][g2], b.mul[h1][h2]);
                    }
                }
            }
        }
        FiniteGroup::from_table(mul).expect("product table is a group")
    }

    pub fn z2xz2() -> FiniteGroup {
        let z2 = FiniteGroup::cyclic(2);
        FiniteGroup::product(&z2, &z2)
    }
}

/// Which presentation of a finite group carries the quantum group
/// structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Presentation {
    /// C(Γ) with pointwise product and δ(e_g) = Σ_h e_h ⊗ e_{h⁻¹g}.
    Functions,
    /// C[Γ] with convolution product and δ(u_g) = u_g ⊗ u_g.
    GroupAlgebra,
}

/// The function algebra C(Γ) or group algebra C[Γ] of a finite group as a
/// measured quantum groupoid over the trivial basis N = C, with the Haar
/// state as both invariant weights.
pub fn finite_quantum_group(gr: &FiniteGroup, pres: Presentation, tol: f64) -> Result<GroupoidData> {
    let n = gr.order;
    let base = MultiMatrixAlgebra::new(vec![1]);
    let epsilon = PositiveFunctional { densities: vec![CMatrix::identity(1)] };
    let (algebra, delta_coeffs, phi) = match pres {
        Presentation::Functions => {
            let mut lmat = Vec::with_capacity(n);
            for g in 0..n {
                lmat.push(CMatrix::unit(n, g, g));
            }
            let star = CMatrix::identity(n);
            let one = vec![cone(); n];
            let algebra = BasisAlgebra::new(lmat, star, one);
            let mut delta = Vec::with_capacity(n);
            for g in 0..n {
                let mut d = CMatrix::zeros(n, n);
                for h in 0..n {
                    d.set(h, gr.mul[gr.inv[h]][g], cone());
                }
                delta.push(d);
            }
            let phi = vec![C64::new(1.0 / n as f64, 0.0); n];
            (algebra, delta, phi)
        }
        Presentation::GroupAlgebra => {
            let mut lmat = Vec::with_capacity(n);
            for g in 0..n {
                let mut m = CMatrix::zeros(n, n);
                for h in 0..n {
                    m.set(gr.mul[g][h], h, cone());
                }
                lmat.push(m);
            }
            let mut star = CMatrix::zeros(n, n);
            for g in 0..n {
                star.set(gr.inv[g], g, cone());
            }
            let mut one = vec![czero(); n];
            one[gr.id] = cone();
            let algebra = BasisAlgebra::new(lmat, star, one);
            let mut delta = Vec::with_capacity(n);
            for g in 0..n {
                let mut d = CMatrix::zeros(n, n);
                d.set(g, g, cone());
                delta.push(d);
            }
            let mut phi = vec![czero(); n];
            phi[gr.id] = cone();
            (algebra, delta, phi)
        }
    };
    let alpha_coeffs = vec![algebra.one.clone()];
    let beta_coeffs = vec![algebra.one.clone()];
    let psi = phi.clone();
    GroupoidData::new(base, algebra, alpha_coeffs, beta_coeffs, delta_coeffs, epsilon, phi, psi, tol)
}

/// A linking groupoid: a groupoid on the basis C² whose α and β are
/// central, together with its corner decomposition data.
#[derive(Clone, Debug)]
pub struct LinkingGroupoid {
    pub underlying: GroupoidData,
    /// Corner of each basis element of M.
    pub corner_index: Vec<(usize, usize)>,
    /// Spatial projections p_ij = α(ε_i)β(ε_j), indexed \[i\]\[j\].
    pub p: Vec<Vec<CMatrix>>,
    /// Isometries u_ij: H_ij → H (columns span the range of p_ij).
    pub iso: Vec<Vec<CMatrix>>,
    pub corner_dims: Vec<Vec<usize>>,
}

impl LinkingGroupoid {
    /// Wrap a base-C² groupoid; requires central α, β images and a
    /// corner assignment of the basis of M.
    pub fn from_groupoid(
        underlying: GroupoidData,
        corner_index: Vec<(usize, usize)>,
        tol: f64,
    ) -> Result<LinkingGroupoid> {
        if underlying.base.blocks != vec![1, 1] {
            return Err(Error::WrongBase(format!(
                "a linking groupoid has basis C², got blocks {:?}",
                underlying.base.blocks
            )));
        }
        if corner_index.len() != underlying.algebra.dim {
            return Err(Error::InvalidInput("corner assignment must cover the basis".into()));
        }
        // α, β must be central in M
        let mut worst = 0.0f64;
        for img in underlying.alpha.images.iter().chain(&underlying.beta.images) {
            for x in &underlying.gns.pi {
                worst = worst.max(img.mul(x).sub(&x.mul(img)).fro_norm());
            }
        }
        if worst > tol * underlying.dim_h as f64 {
            return Err(Error::NotLinking(format!(
                "alpha/beta images are not central (residual {worst:.3e})"
            )));
        }
        let d = underlying.dim_h;
        let mut p = vec![vec![CMatrix::zeros(d, d); 2]; 2];
        let mut iso = vec![vec![CMatrix::zeros(d, 0); 2]; 2];
        let mut corner_dims = vec![vec![0usize; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let pij = underlying.alpha.images[i].mul(&underlying.beta.images[j]);
                let idem = pij.mul(&pij).sub(&pij).fro_norm();
                if idem > tol * (d as f64) {
                    return Err(Error::NotLinking(format!(
                        "p_{}{} is not idempotent (residual {idem:.3e})",
                        i + 1,
                        j + 1
                    )));
                }
                let (vals, vecs) = pij.hermitian_eig();
                let cols: Vec<usize> =
                    (0..d).filter(|&k| vals[k] > 0.5).collect();
                let mut u = CMatrix::zeros(d, cols.len());
                for (c, &k) in cols.iter().enumerate() {
                    for r in 0..d {
                        u.set(r, c, vecs.get(r, k));
                    }
                }
                corner_dims[i][j] = cols.len();
                iso[i][j] = u;
                p[i][j] = pij;
            }
        }
        Ok(LinkingGroupoid { underlying, corner_index, p, iso, corner_dims })
    }

    /// Basis indices of M lying in corner (i, j).
    pub fn corner_members(&self, i: usize, j: usize) -> Vec<usize> {
        self.corner_index
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == (i, j))
            .map(|(a, _)| a)
            .collect()
    }
}

/// Internal: one corner of a linking groupoid under assembly.
struct CornerSpec {
    alg: BasisAlgebra,
    phi: Vec<C64>,
}

/// Assemble a base-C² groupoid out of four corner algebras and the grid
/// of block coproducts δ^k_{ij}: M_ij → M_ik⊗M_kj.
///
/// `delta_blocks[i*2+j][k][a]` holds the coefficients of δ^k_{ij}(x_a)
/// with rows over the basis of M_ik and columns over the basis of M_kj.
fn assemble_linking(
    corners: Vec<CornerSpec>,
    delta_blocks: Vec<Vec<Vec<CMatrix>>>,
    tol: f64,
) -> Result<LinkingGroupoid> {
    assert_eq!(corners.len(), 4);
    let dims: Vec<usize> = corners.iter().map(|c| c.alg.dim).collect();
    let off: Vec<usize> = {
        let mut o = vec![0usize; 4];
        for k in 1..4 {
            o[k] = o[k - 1] + dims[k - 1];
        }
        o
    };
    let dim_m: usize = dims.iter().sum();
    let idx = |i: usize, j: usize| i * 2 + j;

    // direct-sum algebra
    let mut lmat = Vec::with_capacity(dim_m);
    let mut star = CMatrix::zeros(dim_m, dim_m);
    let mut one = vec![czero(); dim_m];
    let mut phi = vec![czero(); dim_m];
    let mut corner_index = Vec::with_capacity(dim_m);
    for i in 0..2 {
        for j in 0..2 {
            let c = &corners[idx(i, j)];
            let o = off[idx(i, j)];
            for a in 0..c.alg.dim {
                let mut m = CMatrix::zeros(dim_m, dim_m);
                for (r, cc, v) in c.alg.lmat[a].nonzeros() {
                    m.set(o + r, o + cc, v);
                }
                lmat.push(m);
                corner_index.push((i, j));
                phi[o + a] = c.phi[a];
            }
            for (r, cc, v) in c.alg.star.nonzeros() {
                star.set(o + r, o + cc, v);
            }
            for (a, v) in c.alg.one.iter().enumerate() {
                one[o + a] = *v;
            }
        }
    }
    let algebra = BasisAlgebra::new(lmat, star, one.clone());

    // coproduct
    let mut delta_coeffs = Vec::with_capacity(dim_m);
    for i in 0..2 {
        for j in 0..2 {
            let blocks = &delta_blocks[idx(i, j)];
            for a in 0..dims[idx(i, j)] {
                let mut dmat = CMatrix::zeros(dim_m, dim_m);
                for (k, blk) in blocks.iter().enumerate() {
                    for (b, c, v) in blk[a].nonzeros() {
                        dmat.set(off[idx(i, k)] + b, off[idx(k, j)] + c, v);
                    }
                }
                delta_coeffs.push(dmat);
            }
        }
    }

    // base C² with the counting weight; α selects rows, β columns
    let base = MultiMatrixAlgebra::new(vec![1, 1]);
    let epsilon =
        PositiveFunctional { densities: vec![CMatrix::identity(1), CMatrix::identity(1)] };
    let mut alpha_coeffs = vec![vec![czero(); dim_m]; 2];
    let mut beta_coeffs = vec![vec![czero(); dim_m]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let c = &corners[idx(i, j)];
            let o = off[idx(i, j)];
            for (a, v) in c.alg.one.iter().enumerate() {
                alpha_coeffs[i][o + a] += *v;
                beta_coeffs[j][o + a] += *v;
            }
        }
    }
    let psi = phi.clone();
    let g = GroupoidData::new(
        base,
        algebra,
        alpha_coeffs,
        beta_coeffs,
        delta_coeffs,
        epsilon,
        phi,
        psi,
        tol,
    )?;
    LinkingGroupoid::from_groupoid(g, corner_index, tol)
}

/// The linking groupoid of the identity monoidal equivalence: all four
/// corners are G and every block coproduct is δ_G.
pub fn trivial_linking(g: &GroupoidData, tol: f64) -> Result<LinkingGroupoid> {
    if g.base.blocks != vec![1] {
        return Err(Error::WrongBase("trivial linking needs a trivial-basis group".into()));
    }
    let corner = || CornerSpec { alg: g.algebra.clone(), phi: g.phi.clone() };
    let corners = vec![corner(), corner(), corner(), corner()];
    let blocks: Vec<Vec<CMatrix>> =
        vec![g.delta_coeffs.clone(), g.delta_coeffs.clone()];
    let delta_blocks = vec![blocks.clone(), blocks.clone(), blocks.clone(), blocks];
    assemble_linking(corners, delta_blocks, tol)
}

/// Validate a 2-cocycle table: unit modulus, normalization at the
/// identity, and the cocycle identity ω(g,h)ω(gh,k) = ω(h,k)ω(g,hk).
fn validate_cocycle(gr: &FiniteGroup, om: &CMatrix) -> Result<()> {
    let n = gr.order;
    if om.rows != n || om.cols != n {
        return Err(Error::CocycleDefect(format!(
            "cocycle table must be {n}×{n}, got {}×{}",
            om.rows, om.cols
        )));
    }
    let mut worst = 0.0f64;
    for g in 0..n {
        for h in 0..n {
            worst = worst.max((om.get(g, h).norm() - 1.0).abs());
        }
        worst = worst.max((om.get(g, gr.id) - cone()).norm());
        worst = worst.max((om.get(gr.id, g) - cone()).norm());
    }
    if worst > 1e-9 {
        return Err(Error::CocycleDefect(format!(
            "table is not a normalized unitary cocycle (defect {worst:.3e})"
        )));
    }
    let mut worst = 0.0f64;
    for g in 0..n {
        for h in 0..n {
            for k in 0..n {
                let lhs = om.get(g, h) * om.get(gr.mul[g][h], k);
                let rhs = om.get(h, k) * om.get(g, gr.mul[h][k]);
                worst = worst.max((lhs - rhs).norm());
            }
        }
    }
    if worst > 1e-9 {
        return Err(Error::CocycleDefect(format!(
            "2-cocycle identity fails (defect {worst:.3e})"
        )));
    }
    Ok(())
}

/// The twisted group algebra C_ω[Γ]: v_g v_h = ω(g,h) v_{gh}, with the
/// canonical trace τ(v_g) = δ_{g,e}.
fn twisted_group_algebra(gr: &FiniteGroup, om: &CMatrix) -> (BasisAlgebra, Vec<C64>) {
    let n = gr.order;
    let mut lmat = Vec::with_capacity(n);
    for g in 0..n {
        let mut m = CMatrix::zeros(n, n);
        for h in 0..n {
            m.set(gr.mul[g][h], h, om.get(g, h));
        }
        lmat.push(m);
    }
    let mut star = CMatrix::zeros(n, n);
    for g in 0..n {
        // v_g* = conj(ω(g,g⁻¹)) v_{g⁻¹} makes every v_g unitary
        star.set(gr.inv[g], g, om.get(g, gr.inv[g]).conj());
    }
    let mut one = vec![czero(); n];
    one[gr.id] = cone();
    let mut phi = vec![czero(); n];
    phi[gr.id] = cone();
    (BasisAlgebra::new(lmat, star, one), phi)
}

/// The orientation of a cocycle-twist linking groupoid that passed
/// verification.
#[derive(Clone, Debug)]
pub struct CocycleLinking {
    pub linking: LinkingGroupoid,
    /// "omega" when S₁₂ carries ω, "omega-conjugate" when it carries ω̄.
    pub orientation: &'static str,
    /// The axiom report of the orientation that succeeded.
    pub report: VerificationReport,
}

/// The linking groupoid of the monoidal equivalence induced by a unitary
/// 2-cocycle ω of a finite group Γ: diagonal corners C\[Γ\], off-diagonal
/// corners the twisted algebras C_ω\[Γ\] and C_ω̄\[Γ\], with group-like
/// block coproducts δ^k_{ij}(x_g) = y_g ⊗ z_g.
///
/// The constructor does not trust any sign convention: both orientations
/// (ω on S₁₂ versus ω̄ on S₁₂) are assembled and verified, and the one
/// whose axiom suite passes is returned.
pub fn cocycle_twist_linking(
    gr: &FiniteGroup,
    omega: &CMatrix,
    tol: f64,
) -> Result<CocycleLinking> {
    validate_cocycle(gr, omega)?;
    let mut last_err = None;
    for (orientation, om) in [("omega", omega.clone()), ("omega-conjugate", omega.conj())] {
        let om_bar = om.conj();
        let (plain, tau) = twisted_group_algebra(gr, &CMatrix::from_fn(gr.order, gr.order, |_, _| cone()));
        let (tw, _) = twisted_group_algebra(gr, &om);
        let (tw_bar, _) = twisted_group_algebra(gr, &om_bar);
        // corners (0,0)=(1,1)=C[Γ], (0,1)=C_ω[Γ], (1,0)=C_ω̄[Γ]
        let corners = vec![
            CornerSpec { alg: plain.clone(), phi: tau.clone() },
            CornerSpec { alg: tw, phi: tau.clone() },
            CornerSpec { alg: tw_bar, phi: tau.clone() },
            CornerSpec { alg: plain.clone(), phi: tau.clone() },
        ];
        // every block coproduct is group-like with coefficient 1
        let n = gr.order;
        let diag: Vec<CMatrix> = (0..n)
            .map(|g| {
                let mut d = CMatrix::zeros(n, n);
                d.set(g, g, cone());
                d
            })
            .collect();
        let blocks = |_: ()| vec![diag.clone(), diag.clone()];
        let delta_blocks = vec![blocks(()), blocks(()), blocks(()), blocks(())];
        match assemble_linking(corners, delta_blocks, tol) {
            Ok(linking) => {
                let report = groupoid::verify_groupoid(&linking.underlying, tol);
                if report.passed() {
                    return Ok(CocycleLinking { linking, orientation, report });
                }
                last_err = Some(Error::AxiomDefect(format!(
                    "orientation {orientation}: axiom suite failed ({})",
                    report
                        .worst()
                        .map(|c| format!("{} residual {:.3e}", c.name, c.residual))
                        .unwrap_or_default()
                )));
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::AxiomDefect("no orientation verified".into())))
}

/// The twelve indexed block partial isometries of Notations on V, W, Ṽ,
/// kept on the full space H⊗H (zero outside their corner supports).
#[derive(Clone, Debug)]
pub struct BlockUnitaries {
    /// V^i_{jl} = (p_ij⊗p_jl) V (p_il⊗p_jl), flattened i*4+j*2+l.
    pub v: Vec<CMatrix>,
    /// W^j_{ik} = (p_ik⊗p_ij) W (p_ik⊗p_kj), flattened j*4+i*2+k.
    pub w: Vec<CMatrix>,
    /// Ṽ^j_{ki} = (p_ki⊗p_ji) Ṽ (p_ki⊗p_jk), flattened j*4+k*2+i.
    pub vt: Vec<CMatrix>,
}

impl BlockUnitaries {
    pub fn v_blk(&self, i: usize, j: usize, l: usize) -> &CMatrix {
        &self.v[i * 4 + j * 2 + l]
    }
    pub fn w_blk(&self, j: usize, i: usize, k: usize) -> &CMatrix {
        &self.w[j * 4 + i * 2 + k]
    }
    pub fn vt_blk(&self, j: usize, k: usize, i: usize) -> &CMatrix {
        &self.vt[j * 4 + k * 2 + i]
    }
}

/// Extract the corner data: verifies the projection grid, builds the
/// block unitaries, and checks block unitarity, block pentagons, block
/// commutation relations, slice compatibility, block coassociativity and
/// both block implementations of the coproduct.
pub fn corner_decomposition(
    l: &LinkingGroupoid,
    reps: &RegularReps,
    tol: f64,
) -> (BlockUnitaries, VerificationReport) {
    let mut rep = VerificationReport::new("corner decomposition", tol);
    let g = &l.underlying;
    let d = g.dim_h;
    let id_h = CMatrix::identity(d);

    // projection grid
    let mut sum = CMatrix::zeros(d, d);
    let mut worst_orth = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            sum = sum.add(&l.p[i][j]);
            for k in 0..2 {
                for m in 0..2 {
                    if (i, j) != (k, m) {
                        worst_orth =
                            worst_orth.max(l.p[i][j].mul(&l.p[k][m]).fro_norm());
                    }
                }
            }
        }
    }
    rep.push("p_11 + p_12 + p_21 + p_22 = 1", sum.sub(&id_h).fro_norm(), d as f64);
    rep.push("p_ij mutually orthogonal", worst_orth, d as f64);
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let mut coeffs = vec![czero(); g.algebra.dim];
            for (a, &(ci, cj)) in l.corner_index.iter().enumerate() {
                if (ci, cj) == (i, j) {
                    coeffs[a] = g.algebra.one[a];
                }
            }
            let lhs = g.delta_of(&coeffs);
            let mut rhs = CMatrix::zeros(d * d, d * d);
            for k in 0..2 {
                rhs = rhs.add(&l.p[i][k].tensor(&l.p[k][j]));
            }
            worst = worst.max(lhs.sub(&rhs).fro_norm());
        }
    }
    rep.push("delta(p_ij) = sum_k p_ik x p_kj", worst, d as f64);

    // block operators on the full space
    let mut bu = BlockUnitaries { v: Vec::new(), w: Vec::new(), vt: Vec::new() };
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                bu.v.push(
                    l.p[i][j]
                        .tensor(&l.p[j][k])
                        .mul(&reps.v)
                        .mul(&l.p[i][k].tensor(&l.p[j][k])),
                );
                bu.w.push(
                    l.p[j][k]
                        .tensor(&l.p[j][i])
                        .mul(&reps.w)
                        .mul(&l.p[j][k].tensor(&l.p[k][i])),
                );
                bu.vt.push(
                    l.p[j][k]
                        .tensor(&l.p[i][k])
                        .mul(&reps.vtilde)
                        .mul(&l.p[j][k].tensor(&l.p[i][j])),
                );
            }
        }
    }

    // unitarity between corner spaces
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let checks = [
                    (bu.v_blk(i, j, k), (i, k, j, k), (i, j, j, k)),
                    (bu.w_blk(i, j, k), (j, k, k, i), (j, k, j, i)),
                    (bu.vt_blk(i, j, k), (j, k, i, j), (j, k, i, k)),
                ];
                for (x, dom, rng) in checks {
                    let u_dom = l.iso[dom.0][dom.1].tensor(&l.iso[dom.2][dom.3]);
                    let u_rng = l.iso[rng.0][rng.1].tensor(&l.iso[rng.2][rng.3]);
                    let c = u_rng.adjoint().mul(x).mul(&u_dom);
                    let n_dom = c.cols;
                    let n_rng = c.rows;
                    worst = worst
                        .max(c.adjoint().mul(&c).sub(&CMatrix::identity(n_dom)).fro_norm());
                    worst = worst
                        .max(c.mul(&c.adjoint()).sub(&CMatrix::identity(n_rng)).fro_norm());
                }
            }
        }
    }
    rep.push("block operators unitary between corner spaces", worst, d as f64);

    // block pentagons
    let dims = [d, d, d];
    let mut worst_v = 0.0f64;
    let mut worst_w = 0.0f64;
    let mut worst_vt = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for m in 0..2 {
                    // (V^i_{jk})₁₂(V^i_{km})₁₃(V^j_{km})₂₃ = (V^j_{km})₂₃(V^i_{jm})₁₂
                    let mut a = LegChain::new(&dims);
                    a.push(bu.v_blk(i, j, k), &[0, 1]);
                    a.push(bu.v_blk(i, k, m), &[0, 2]);
                    a.push(bu.v_blk(j, k, m), &[1, 2]);
                    let mut b = LegChain::new(&dims);
                    b.push(bu.v_blk(j, k, m), &[1, 2]);
                    b.push(bu.v_blk(i, j, m), &[0, 1]);
                    worst_v = worst_v.max(chain_difference_norm(&a, &b));
                    // (W^k_{ij})₁₂(W^m_{ij})₁₃(W^m_{jk})₂₃ = (W^m_{ik})₂₃(W^k_{ij})₁₂
                    let mut a = LegChain::new(&dims);
                    a.push(bu.w_blk(k, i, j), &[0, 1]);
                    a.push(bu.w_blk(m, i, j), &[0, 2]);
                    a.push(bu.w_blk(m, j, k), &[1, 2]);
                    let mut b = LegChain::new(&dims);
                    b.push(bu.w_blk(m, i, k), &[1, 2]);
                    b.push(bu.w_blk(k, i, j), &[0, 1]);
                    worst_w = worst_w.max(chain_difference_norm(&a, &b));
                    // (Ṽ^k_{ji})₁₂(Ṽ^m_{ji})₁₃(Ṽ^m_{kj})₂₃ = (Ṽ^m_{ki})₂₃(Ṽ^k_{ji})₁₂
                    let mut a = LegChain::new(&dims);
                    a.push(bu.vt_blk(k, j, i), &[0, 1]);
                    a.push(bu.vt_blk(m, j, i), &[0, 2]);
                    a.push(bu.vt_blk(m, k, j), &[1, 2]);
                    let mut b = LegChain::new(&dims);
                    b.push(bu.vt_blk(m, k, i), &[1, 2]);
                    b.push(bu.vt_blk(k, j, i), &[0, 1]);
                    worst_vt = worst_vt.max(chain_difference_norm(&a, &b));
                }
            }
        }
    }
    let scale3 = (d as f64).powf(1.5);
    rep.push("block pentagons for V", worst_v, scale3);
    rep.push("block pentagons for W", worst_w, scale3);
    rep.push("block pentagons for Vtilde", worst_vt, scale3);

    // block commutation relations
    let mut worst = 0.0f64;
    for k in 0..2 {
        for j in 0..2 {
            for m in 0..2 {
                for mp in 0..2 {
                    // V^m_{kj,23} W^j_{mm′,12} = W^k_{mm′,12} V^{m′}_{kj,23}
                    let mut a = LegChain::new(&dims);
                    a.push(bu.v_blk(m, k, j), &[1, 2]);
                    a.push(bu.w_blk(j, m, mp), &[0, 1]);
                    let mut b = LegChain::new(&dims);
                    b.push(bu.w_blk(k, m, mp), &[0, 1]);
                    b.push(bu.v_blk(mp, k, j), &[1, 2]);
                    worst = worst.max(chain_difference_norm(&a, &b));
                    // V^s_{kj,12} Ṽ^i_{kj,23} = Ṽ^i_{kj,23} V^s_{kj,12}
                    let mut a = LegChain::new(&dims);
                    a.push(bu.v_blk(m, k, j), &[0, 1]);
                    a.push(bu.vt_blk(mp, k, j), &[1, 2]);
                    let mut b = LegChain::new(&dims);
                    b.push(bu.vt_blk(mp, k, j), &[1, 2]);
                    b.push(bu.v_blk(m, k, j), &[0, 1]);
                    worst = worst.max(chain_difference_norm(&a, &b));
                }
            }
        }
    }
    rep.push("block commutation relations", worst, scale3);

    // slice compatibility
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            for m in 0..2 {
                for bi in 0..d {
                    for bj in 0..d {
                        let mut xi = vec![czero(); d];
                        xi[bi] = cone();
                        let mut eta = vec![czero(); d];
                        eta[bj] = cone();
                        let om = VectorFunctional::new(xi.clone(), eta.clone());
                        let om_p = VectorFunctional::new(
                            l.p[j][m].apply_vec(&xi),
                            l.p[j][m].apply_vec(&eta),
                        );
                        let lhs = slice(Side::Right, &om_p, bu.v_blk(i, j, m), d, d);
                        let rhs = l.p[i][j]
                            .mul(&slice(Side::Right, &om, &reps.v, d, d))
                            .mul(&l.p[i][m]);
                        worst = worst.max(lhs.sub(&rhs).fro_norm());
                        let om_p = VectorFunctional::new(
                            l.p[i][m].apply_vec(&xi),
                            l.p[i][m].apply_vec(&eta),
                        );
                        let lhs = slice(Side::Left, &om_p, bu.w_blk(j, i, m), d, d);
                        let rhs = l.p[i][j]
                            .mul(&slice(Side::Left, &om, &reps.w, d, d))
                            .mul(&l.p[m][j]);
                        worst = worst.max(lhs.sub(&rhs).fro_norm());
                    }
                }
            }
        }
    }
    rep.push("slice compatibility of block operators", worst, d as f64);

    // block coassociativity through structure constants
    let dm = g.algebra.dim;
    let mut f_t = CMatrix::zeros(dm * dm, dm);
    let mut g_t = CMatrix::zeros(dm, dm * dm);
    for m in 0..dm {
        for (b, c, t) in g.delta_coeffs[m].nonzeros() {
            f_t.set(b * dm + c, m, t);
            g_t.set(m, b * dm + c, t);
        }
    }
    let mut worst = 0.0f64;
    for a in 0..dm {
        let (i, j) = l.corner_index[a];
        let lhs = f_t.mul(&g.delta_coeffs[a]);
        let rhs = g.delta_coeffs[a].mul(&g_t);
        for k in 0..2 {
            for mm in 0..2 {
                // restrict to components (i,mm)×(mm,k)×(k,j)
                let mut diff2 = 0.0f64;
                for b in 0..dm {
                    if l.corner_index[b] != (i, mm) {
                        continue;
                    }
                    for c in 0..dm {
                        if l.corner_index[c] != (mm, k) {
                            continue;
                        }
                        for e in 0..dm {
                            if l.corner_index[e] != (k, j) {
                                continue;
                            }
                            let lv = lhs.get(b * dm + c, e);
                            let rv = rhs.get(b, c * dm + e);
                            diff2 += (lv - rv).norm_sqr();
                        }
                    }
                }
                worst = worst.max(diff2.sqrt());
            }
        }
    }
    rep.push("block coassociativity", worst, d as f64);

    // both block implementations of the coproduct
    let mut worst = 0.0f64;
    for a in 0..dm {
        let (i, j) = l.corner_index[a];
        let x = &g.gns.pi[a];
        for k in 0..2 {
            let lhs = l.p[i][k].tensor(&l.p[k][j]).mul(&g.delta_h[a]);
            let w_blk = bu.w_blk(j, i, k);
            let by_w = w_blk.adjoint().mul(&id_h.tensor(x)).mul(w_blk);
            worst = worst.max(lhs.sub(&by_w).fro_norm());
            let v_blk = bu.v_blk(i, k, j);
            let by_v = v_blk.mul(&x.tensor(&id_h)).mul(&v_blk.adjoint());
            worst = worst.max(lhs.sub(&by_v).fro_norm());
        }
    }
    rep.push("block coproduct via W and V blocks", worst, d as f64);

    // α = β̂ and β = α̂ (Lemma on linking groupoids)
    let mut worst = 0.0f64;
    for n in 0..2 {
        worst = worst.max(
            g.alpha.images[n].sub(&reps.beta_hat.images[n]).fro_norm(),
        );
        worst = worst.max(g.beta.images[n].sub(&reps.alpha_hat.images[n]).fro_norm());
    }
    rep.push("alpha = betahat and beta = alphahat", worst, d as f64);

    (bu, rep)
}

/// Package corner (i,i) as a finite quantum group on the trivial basis.
pub fn corner_group(l: &LinkingGroupoid, i: usize) -> Result<GroupoidData> {
    let g = &l.underlying;
    let members = l.corner_members(i, i);
    if members.is_empty() {
        return Err(Error::InvalidInput(format!("corner ({i},{i}) is empty")));
    }
    let n = members.len();
    let pos: std::collections::HashMap<usize, usize> =
        members.iter().enumerate().map(|(p, &a)| (a, p)).collect();
    let mut lmat = Vec::with_capacity(n);
    let mut star = CMatrix::zeros(n, n);
    let mut one = vec![czero(); n];
    let mut phi = vec![czero(); n];
    for (pa, &a) in members.iter().enumerate() {
        let mut m = CMatrix::zeros(n, n);
        for (r, c, v) in g.algebra.lmat[a].nonzeros() {
            if let (Some(&pr), Some(&pc)) = (pos.get(&r), pos.get(&c)) {
                m.set(pr, pc, v);
            }
        }
        lmat.push(m);
        for (r, c, v) in g.algebra.star.nonzeros() {
            if c == a {
                if let Some(&pr) = pos.get(&r) {
                    star.set(pr, pa, v);
                }
            }
        }
        one[pa] = g.algebra.one[a];
        phi[pa] = g.phi[a];
    }
    let mut delta = Vec::with_capacity(n);
    for &a in &members {
        let mut d = CMatrix::zeros(n, n);
        for (b, c, v) in g.delta_coeffs[a].nonzeros() {
            if let (Some(&pb), Some(&pc)) = (pos.get(&b), pos.get(&c)) {
                d.set(pb, pc, v);
            }
        }
        delta.push(d);
    }
    let alg = BasisAlgebra::new(lmat, star, one.clone());
    let base = MultiMatrixAlgebra::new(vec![1]);
    let epsilon = PositiveFunctional { densities: vec![CMatrix::identity(1)] };
    let psi = phi.clone();
    GroupoidData::new(
        base,
        alg,
        vec![one.clone()],
        vec![one],
        delta,
        epsilon,
        phi,
        psi,
        crate::DEFAULT_TOL,
    )
}

/// The bimodule grid E^i_{jk} = p_ij Ŝ p_ik (compressed to the corner
/// spaces), with its Morita identities.
pub fn corner_bimodules(
    l: &LinkingGroupoid,
    reps: &RegularReps,
    tol: f64,
) -> (Vec<OperatorSpace>, VerificationReport) {
    let mut rep = VerificationReport::new("corner bimodules", tol);
    let mut grid = Vec::with_capacity(8);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let u_rng = &l.iso[i][j];
                let u_dom = &l.iso[i][k];
                let gens: Vec<CMatrix> = reps
                    .shat
                    .basis
                    .iter()
                    .map(|y| u_rng.adjoint().mul(y).mul(u_dom))
                    .collect();
                grid.push(span(&gens, u_rng.cols, u_dom.cols, tol));
            }
        }
    }
    let e = |i: usize, j: usize, k: usize| &grid[i * 4 + j * 2 + k];

    // (E^i_{jl})* = E^i_{lj}
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let adj: Vec<CMatrix> =
                    e(i, j, k).basis.iter().map(|x| x.adjoint()).collect();
                let adj = span(&adj, e(i, k, j).rows, e(i, k, j).cols, tol);
                worst = worst.max(spaces_equality_residual(&adj, e(i, k, j)));
            }
        }
    }
    rep.push("(E^i_jl)* = E^i_lj", worst, 1.0);

    // composition: [E^i_{jk} E^i_{km}] = E^i_{jm}
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for m in 0..2 {
                    let prod = multiply_spaces(e(i, j, k), e(i, k, m), tol);
                    worst = worst.max(spaces_equality_residual(&prod, e(i, j, m)));
                }
            }
        }
    }
    rep.push("[E^i_jk E^i_km] = E^i_jm", worst, 1.0);

    // fullness: [E^i_{jl} H_il] = H_ij
    let mut ok = true;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let sp = e(i, j, k);
                let mut cols: Vec<CMatrix> = Vec::new();
                for b in &sp.basis {
                    for c in 0..b.cols {
                        let mut col = CMatrix::zeros(b.rows, 1);
                        for r in 0..b.rows {
                            col.set(r, 0, b.get(r, c));
                        }
                        cols.push(col);
                    }
                }
                let reach = span(&cols, l.corner_dims[i][j], 1, tol);
                ok &= reach.dim() == l.corner_dims[i][j];
            }
        }
    }
    rep.push_flag("[E^i_jl H_il] = H_ij", ok);

    // [Ŝ β(ε_j) Ŝ] = Ŝ
    let mut worst = 0.0f64;
    for j in 0..2 {
        let b_j = &l.underlying.beta.images[j];
        let mut gens = Vec::new();
        for x in &reps.shat.basis {
            for y in &reps.shat.basis {
                gens.push(x.mul(b_j).mul(y));
            }
        }
        let sp = span(&gens, l.underlying.dim_h, l.underlying.dim_h, tol);
        worst = worst.max(spaces_equality_residual(&sp, &reps.shat));
    }
    rep.push("[Shat beta(eps_j) Shat] = Shat", worst, 1.0);

    (grid, rep)
}

/// Blockwise regularity: C(V^i_{rj}) must be all of K(H_ij, H_rj) for
/// every index choice, the corner groups must be regular, and the global
/// certificate must agree with the blockwise ones.
pub fn linking_regularity(
    l: &LinkingGroupoid,
    reps: &RegularReps,
    tol: f64,
) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("linking regularity", tol);
    let g = &l.underlying;
    let d = g.dim_h;
    let sigma = flip(d, d);
    let mut blocks_full = true;
    for i in 0..2 {
        for r in 0..2 {
            for j in 0..2 {
                let blk = l.p[i][r]
                    .tensor(&l.p[r][j])
                    .mul(&reps.v)
                    .mul(&l.p[i][j].tensor(&l.p[r][j]));
                let sx = sigma.mul(&blk);
                let mut slices = Vec::new();
                for bi in 0..d {
                    for bj in 0..d {
                        let mut xi = vec![czero(); d];
                        xi[bi] = cone();
                        let mut eta = vec![czero(); d];
                        eta[bj] = cone();
                        let om = VectorFunctional::new(xi, eta);
                        let s = slice(Side::Right, &om, &sx, d, d);
                        // compress to B(H_ij, H_rj)
                        slices.push(l.iso[r][j].adjoint().mul(&s).mul(&l.iso[i][j]));
                    }
                }
                let sp = span(&slices, l.corner_dims[r][j], l.corner_dims[i][j], tol);
                blocks_full &= sp.dim() == l.corner_dims[r][j] * l.corner_dims[i][j];
            }
        }
    }
    rep.push_flag("C(V^i_rj) = K(H_ij, H_rj) at every block", blocks_full);

    let global = groupoid::regularity(g, reps, tol);
    let global_regular = global
        .get("C(V) = [L L*] over beta (regular)")
        .map(|c| c.pass)
        .unwrap_or(false);
    rep.push_flag("groupoid regular", global_regular);

    let mut corners_regular = true;
    for i in 0..2 {
        let cg = corner_group(l, i)?;
        let w = groupoid::build_w(&cg)?;
        let v = groupoid::build_v(&cg, tol)?;
        let creps = groupoid::dual_data(&cg, &v, &w, tol)?;
        let crep = groupoid::regularity(&cg, &creps, tol);
        corners_regular &= crep
            .get("C(V) = [L L*] over beta (regular)")
            .map(|c| c.pass)
            .unwrap_or(false);
    }
    rep.push_flag("corner groups regular", corners_regular);
    rep.push_flag(
        "global and blockwise regularity agree",
        blocks_full == global_regular && global_regular == corners_regular,
    );
    Ok(rep)
}

/// The standard bicharacter 2-cocycle of Z₂×Z₂ (elements indexed
/// (a,b) ↦ 2a+b): ω((a,b),(c,d)) = (−1)^{bc}.
pub fn standard_bicharacter_z2xz2() -> CMatrix {
    CMatrix::from_fn(4, 4, |g, h| {
        let b = g % 2;
        let c = h / 2;
        if b * c % 2 == 1 {
            C64::new(-1.0, 0.0)
        } else {
            cone()
        }
    })
}
