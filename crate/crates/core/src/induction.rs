//! Induction of actions along a linking groupoid: Ind_{G_j}^{G_k} on
//! algebras, morphisms, linking algebras, modules, and operators, the
//! round-trip isomorphism, reconstruction of the linking action, and
//! the bidual Morita theorem.
//!
//! A corner group G_j of a linking groupoid acts through coactions with
//! values in the corner algebra S_jj realized inside the groupoid's own
//! representation space H, so the connecting corners S_jk needed by the
//! induction construction are available without changing models.

use num_complex::Complex64 as C64;

use crate::action::{embed, ActionData, Decomposer};
use crate::fdcstar::StarHom;
use crate::groupoid::RegularReps;
use crate::coliaison::LinkingGroupoid;
use crate::linalg::{
    close_star_algebra, span, spaces_equality_residual, CMatrix, OperatorSpace,
};
use crate::report::VerificationReport;
use crate::{Error, Result};

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

fn cone() -> C64 {
    C64::new(1.0, 0.0)
}

/// An action of the corner group G_j on a C*-algebra A, with the corner
/// algebra S_jj kept inside the full representation of the linking
/// groupoid: δ_A(a) acts on K_A⊗H with values in A⊗S_jj.
#[derive(Clone, Debug)]
pub struct CornerAction {
    /// Which diagonal corner group acts.
    pub corner: usize,
    pub dim_ka: usize,
    pub basis: Vec<CMatrix>,
    /// Coefficients of 1_A in the basis.
    pub one_coeffs: Vec<C64>,
    /// δ_A of each basis element, on K_A⊗H.
    pub delta: Vec<CMatrix>,
}

impl CornerAction {
    pub fn one_mat(&self) -> CMatrix {
        combine(&self.basis, &self.one_coeffs)
    }

    pub fn delta_of(&self, coeffs: &[C64]) -> CMatrix {
        combine(&self.delta, coeffs)
    }
}

fn combine(mats: &[CMatrix], coeffs: &[C64]) -> CMatrix {
    let mut out = CMatrix::zeros(mats[0].rows, mats[0].cols);
    for (m, c) in mats.iter().zip(coeffs) {
        if c.norm_sqr() > 1e-30 {
            out = out.add(&m.scale(*c));
        }
    }
    out
}

/// The unit of the corner algebra S_jj as an operator on H.
pub fn corner_unit(l: &LinkingGroupoid, j: usize) -> CMatrix {
    let g = &l.underlying;
    let mut u = CMatrix::zeros(g.dim_h, g.dim_h);
    for m in l.corner_members(j, j) {
        let c = g.algebra.one[m];
        if c.norm_sqr() > 1e-30 {
            u = u.add(&g.gns.pi[m].scale(c));
        }
    }
    u
}

/// Entries (a, b, v) of the coproduct δ(e_m) = Σ v·e_a⊗e_b whose first
/// leg lands in the corners (·, k).
fn coproduct_component(l: &LinkingGroupoid, m: usize, k: usize) -> Vec<(usize, usize, C64)> {
    l.underlying.delta_coeffs[m]
        .nonzeros()
        .into_iter()
        .filter(|&(a, _, _)| l.corner_index[a].1 == k)
        .collect()
}

/// The decomposition family {a_p ⊗ π(e_m)} for the members of one corner
/// of M; coefficients over it identify elements of A⊗S_corner exactly.
fn leg_family(
    l: &LinkingGroupoid,
    basis: &[CMatrix],
    members: &[usize],
) -> (Vec<CMatrix>, Decomposer) {
    let g = &l.underlying;
    let mut fam = Vec::with_capacity(basis.len() * members.len());
    for a in basis {
        for &m in members {
            fam.push(a.tensor(&g.gns.pi[m]));
        }
    }
    let dec = Decomposer::new(&fam);
    (fam, dec)
}

/// The trivial action of G_j on A = C.
pub fn trivial_corner_action(l: &LinkingGroupoid, j: usize) -> CornerAction {
    CornerAction {
        corner: j,
        dim_ka: 1,
        basis: vec![CMatrix::identity(1)],
        one_coeffs: vec![cone()],
        delta: vec![CMatrix::identity(1).tensor(&corner_unit(l, j))],
    }
}

/// The action of G_j on its own corner algebra S_jj by the corner
/// coproduct, with A carried by the corner group's GNS space.
pub fn self_corner_action(l: &LinkingGroupoid, j: usize, _tol: f64) -> Result<CornerAction> {
    let g = &l.underlying;
    let gc = crate::coliaison::corner_group(l, j)?;
    let members = l.corner_members(j, j);
    let pos: std::collections::HashMap<usize, usize> =
        members.iter().enumerate().map(|(p, &a)| (a, p)).collect();
    let dim_ka = gc.dim_h;
    let mut delta = Vec::with_capacity(members.len());
    for &m in &members {
        let mut d = CMatrix::zeros(dim_ka * g.dim_h, dim_ka * g.dim_h);
        for (a, b, v) in g.delta_coeffs[m].nonzeros() {
            if let Some(&pa) = pos.get(&a) {
                d = d.add(&gc.gns.pi[pa].tensor(&g.gns.pi[b]).scale(v));
            }
        }
        delta.push(d);
    }
    Ok(CornerAction {
        corner: j,
        dim_ka,
        basis: gc.gns.pi.clone(),
        one_coeffs: gc.algebra.one.clone(),
        delta,
    })
}

/// Coefficient table of δ_A over the family {a_p ⊗ π(e_m)}, m running
/// over the (j,j) corner members.
fn action_table(
    l: &LinkingGroupoid,
    act: &CornerAction,
    members: &[usize],
) -> Result<(Vec<Vec<C64>>, f64)> {
    let (_, dec) = leg_family(l, &act.basis, members);
    let mut rows = Vec::with_capacity(act.delta.len());
    let mut worst = 0.0f64;
    for d in &act.delta {
        let (cs, r) = dec.coeffs(d)?;
        worst = worst.max(r);
        rows.push(cs);
    }
    Ok((rows, worst))
}

/// Verify the quantum-group action axioms of a corner action: unit,
/// *-morphism property, corner-valued image, coassociativity against the
/// corner coproduct, and continuity.
pub fn verify_corner_action(
    l: &LinkingGroupoid,
    act: &CornerAction,
    tol: f64,
) -> Result<VerificationReport> {
    let g = &l.underlying;
    let j = act.corner;
    let mut rep = VerificationReport::new("corner-group action", tol);
    let members = l.corner_members(j, j);
    let nm = members.len();
    let na = act.basis.len();
    let d = act.dim_ka * g.dim_h;
    let scale = d as f64;

    let u_jj = corner_unit(l, j);
    let one = act.one_mat();
    let unit_defect = act.delta_of(&act.one_coeffs).sub(&one.tensor(&u_jj)).fro_norm();
    rep.push("delta_A(1) = 1_A x 1_Sjj", unit_defect, scale);
    let mut unit_acts = 0.0f64;
    for b in &act.basis {
        unit_acts = unit_acts
            .max(one.mul(b).sub(b).fro_norm())
            .max(b.mul(&one).sub(b).fro_norm());
    }
    rep.push("1_A is a two-sided unit", unit_acts, scale);

    let (table, img_res) = action_table(l, act, &members)?;
    rep.push("delta_A lands in A x S_jj", img_res, scale);

    // *-morphism: products and adjoints through the A-side decomposition
    let a_dec = Decomposer::new(&act.basis);
    let mut worst = 0.0f64;
    for u in 0..na {
        let (cs, r) = a_dec.coeffs(&act.basis[u].adjoint())?;
        worst = worst.max(r);
        worst = worst.max(act.delta_of(&cs).sub(&act.delta[u].adjoint()).fro_norm());
        for v in 0..na {
            let (cs, r) = a_dec.coeffs(&act.basis[u].mul(&act.basis[v]))?;
            worst = worst.max(r);
            worst = worst
                .max(act.delta_of(&cs).sub(&act.delta[u].mul(&act.delta[v])).fro_norm());
        }
    }
    rep.push("delta_A is a *-homomorphism", worst, scale);

    // coassociativity at the coefficient level over a_p x e_m1 x e_m2
    let mpos: std::collections::HashMap<usize, usize> =
        members.iter().enumerate().map(|(p, &a)| (a, p)).collect();
    let mut worst = 0.0f64;
    for u in 0..na {
        let mut lhs = vec![czero(); na * nm * nm];
        let mut rhs = vec![czero(); na * nm * nm];
        for q in 0..na {
            for (m2, &c2) in table[u][q * nm..(q + 1) * nm].iter().enumerate() {
                if c2.norm_sqr() < 1e-28 {
                    continue;
                }
                for p in 0..na {
                    for m1 in 0..nm {
                        lhs[(p * nm + m1) * nm + m2] += c2 * table[q][p * nm + m1];
                    }
                }
            }
        }
        for p in 0..na {
            for (mi, &m) in members.iter().enumerate() {
                let c = table[u][p * nm + mi];
                if c.norm_sqr() < 1e-28 {
                    continue;
                }
                for (a, b, v) in g.delta_coeffs[m].nonzeros() {
                    if let (Some(&m1), Some(&m2)) = (mpos.get(&a), mpos.get(&b)) {
                        rhs[(p * nm + m1) * nm + m2] += c * v;
                    }
                }
            }
        }
        let diff: f64 = lhs
            .iter()
            .zip(&rhs)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum();
        worst = worst.max(diff.sqrt());
    }
    rep.push("coassociativity over the corner coproduct", worst, scale);

    // continuity: [delta_A(A)(1 x S_jj)] = A x S_jj
    let id_ka = CMatrix::identity(act.dim_ka);
    let mut lhs_gens = Vec::with_capacity(na * nm);
    let mut rhs_gens = Vec::with_capacity(na * nm);
    for u in 0..na {
        for &m in &members {
            lhs_gens.push(act.delta[u].mul(&id_ka.tensor(&g.gns.pi[m])));
            rhs_gens.push(act.basis[u].tensor(&g.gns.pi[m]));
        }
    }
    let lhs_sp = span(&lhs_gens, d, d, tol);
    let rhs_sp = span(&rhs_gens, d, d, tol);
    rep.push(
        "continuity [delta_A(A)(1 x S_jj)] = A x S_jj",
        spaces_equality_residual(&lhs_sp, &rhs_sp),
        1.0,
    );

    Ok(rep)
}

/// The induced G_k-algebra Ind_{G_j}^{G_k}(A): its carrier inside
/// A⊗S_jk together with its own induced coaction.
#[derive(Clone, Debug)]
pub struct InducedAlgebra {
    pub source_corner: usize,
    /// Operator space of the induced algebra on K_A⊗H.
    pub carrier: OperatorSpace,
    /// The induced action of G_k carried by the carrier basis.
    pub action: CornerAction,
}

/// Right-leg slices (id⊗id⊗ω)δ^{(k)}(a_u) spanning the induced algebra;
/// the tripartite δ^{(k)} itself is never materialized here.
fn slice_generators(l: &LinkingGroupoid, act: &CornerAction, tol: f64) -> Result<Vec<CMatrix>> {
    let g = &l.underlying;
    let j = act.corner;
    let k = 1 - j;
    let dh = g.dim_h;
    let d = act.dim_ka * dh;
    let na = act.basis.len();
    let members_jj = l.corner_members(j, j);
    let nm = members_jj.len();
    let (table, img_res) = action_table(l, act, &members_jj)?;
    if img_res > tol * d as f64 {
        return Err(Error::SourceMismatch(format!(
            "coaction does not land in A x S_jj (residual {img_res:.3e})"
        )));
    }
    let mut gens: Vec<CMatrix> = Vec::new();
    for u in 0..na {
        // slices[r*dh+s] accumulates (id⊗id⊗ω_{rs})δ^{(k)}(a_u)
        let mut slices = vec![CMatrix::zeros(d, d); dh * dh];
        for p in 0..na {
            for (mi, &m) in members_jj.iter().enumerate() {
                let c = table[u][p * nm + mi];
                if c.norm_sqr() < 1e-28 {
                    continue;
                }
                for (a, b, v) in coproduct_component(l, m, k) {
                    let ap_a = act.basis[p].tensor(&g.gns.pi[a]).scale(c * v);
                    for (r, s, w) in g.gns.pi[b].nonzeros() {
                        slices[r * dh + s] = slices[r * dh + s].add(&ap_a.scale(w));
                    }
                }
            }
        }
        gens.extend(slices.into_iter().filter(|m| m.fro_norm() > tol));
    }
    Ok(gens)
}

/// δ^{(k)}(a_u) = (id⊗δ^k_{jj})δ_A(a_u) as dense operators on K_A⊗H⊗H.
pub fn delta2_ops(l: &LinkingGroupoid, act: &CornerAction) -> Result<Vec<CMatrix>> {
    let g = &l.underlying;
    let j = act.corner;
    let k = 1 - j;
    let dh = g.dim_h;
    let na = act.basis.len();
    let members_jj = l.corner_members(j, j);
    let nm = members_jj.len();
    let (table, _) = action_table(l, act, &members_jj)?;
    let dims = [act.dim_ka, dh, dh];
    let mut delta2 = Vec::with_capacity(na);
    for u in 0..na {
        let mut d2 = CMatrix::zeros(act.dim_ka * dh * dh, act.dim_ka * dh * dh);
        for p in 0..na {
            for (mi, &m) in members_jj.iter().enumerate() {
                let c = table[u][p * nm + mi];
                if c.norm_sqr() < 1e-28 {
                    continue;
                }
                for (a, b, v) in coproduct_component(l, m, k) {
                    let ap_a = act.basis[p].tensor(&g.gns.pi[a]).scale(c * v);
                    d2 = d2
                        .add(&embed(&ap_a, &[0, 1], &dims).mul(&embed(&g.gns.pi[b], &[2], &dims)));
                }
            }
        }
        delta2.push(d2);
    }
    Ok(delta2)
}

/// Induce a G_j-action to the opposite corner group along the linking
/// groupoid: A_k = span of the right-leg slices of δ^{(k)}(A).
pub fn induce_algebra(
    l: &LinkingGroupoid,
    act: &CornerAction,
    tol: f64,
) -> Result<InducedAlgebra> {
    let g = &l.underlying;
    let j = act.corner;
    let k = 1 - j;
    let dh = g.dim_h;
    let d = act.dim_ka * dh;
    let na = act.basis.len();
    let gens = slice_generators(l, act, tol)?;
    let carrier = span(&gens, d, d, tol);
    let closed = close_star_algebra(&carrier, tol);
    if closed.dim() != carrier.dim() {
        return Err(Error::NotClosed(format!(
            "induced span is not a *-algebra (dim {} closes to {})",
            carrier.dim(),
            closed.dim()
        )));
    }

    // induced coaction: (id ⊗ δ^k_{jk}) restricted to the carrier
    let members_jk = l.corner_members(j, k);
    let (_, dec_jk) = leg_family(l, &act.basis, &members_jk);
    let nk = members_jk.len();
    let mut delta = Vec::with_capacity(carrier.dim());
    for z in &carrier.basis {
        let (cs, r) = dec_jk.coeffs(z)?;
        if r > tol * d as f64 {
            return Err(Error::NotClosed(format!(
                "induced element leaves A x S_jk (residual {r:.3e})"
            )));
        }
        let mut dz = CMatrix::zeros(d * dh, d * dh);
        for p in 0..na {
            for (mi, &m) in members_jk.iter().enumerate() {
                let c = cs[p * nk + mi];
                if c.norm_sqr() < 1e-28 {
                    continue;
                }
                for (a, b, v) in coproduct_component(l, m, k) {
                    dz = dz.add(&act.basis[p].tensor(&g.gns.pi[a]).tensor(&g.gns.pi[b]).scale(c * v));
                }
            }
        }
        delta.push(dz);
    }

    let one_coeffs = algebra_unit_coeffs(&carrier, tol)?;
    let action = CornerAction {
        corner: k,
        dim_ka: d,
        basis: carrier.basis.clone(),
        one_coeffs,
        delta,
    };
    Ok(InducedAlgebra { source_corner: j, carrier, action })
}

/// Coefficients of a matrix over the basis of an operator space,
/// together with the decomposition residual.
pub fn express(space: &OperatorSpace, x: &CMatrix) -> Result<(Vec<C64>, f64)> {
    Decomposer::new(&space.basis).coeffs(x)
}

/// Coefficients of the algebra unit of a spanned matrix algebra: the
/// element acting as a two-sided identity on the basis.
fn algebra_unit_coeffs(space: &OperatorSpace, _tol: f64) -> Result<Vec<C64>> {
    let n = space.dim();
    // normal equations for Σ_g x_g (z_g z_h) = z_h over all h
    let mut prods = Vec::with_capacity(n * n);
    for zg in &space.basis {
        for zh in &space.basis {
            prods.push(zg.mul(zh));
        }
    }
    let mut gram = CMatrix::zeros(n, n);
    let mut rhs = vec![czero(); n];
    for a in 0..n {
        for b in 0..n {
            let mut acc = czero();
            for h in 0..n {
                acc += prods[a * n + h].fro_inner(&prods[b * n + h]);
            }
            gram.set(a, b, acc);
        }
    }
    for (b, r) in rhs.iter_mut().enumerate() {
        let mut acc = czero();
        for h in 0..n {
            acc += prods[b * n + h].fro_inner(&space.basis[h]);
        }
        *r = acc;
    }
    // gram x = rhs with the convention <u,v> = u*·v on the first index
    let sol = gram.solve(&rhs)?;
    Ok(sol)
}

/// Verify that an induced algebra is a continuous G_k-algebra:
/// closure, coaction image, coassociativity, continuity, and the
/// fullness property [carrier·(1⊗S_jk)] = A⊗S_jk.
pub fn induced_coaction(
    l: &LinkingGroupoid,
    act: &CornerAction,
    ia: &InducedAlgebra,
    tol: f64,
) -> Result<VerificationReport> {
    let g = &l.underlying;
    let j = ia.source_corner;
    let k = 1 - j;
    let dh = g.dim_h;
    let d = ia.action.dim_ka;
    let _ = dh;
    let mut rep = verify_corner_action(l, &ia.action, tol)?;

    // fullness of the carrier: [A_2 (1 x S_jk)] = A x S_jk
    let members_jk = l.corner_members(j, k);
    let id_ka = CMatrix::identity(act.dim_ka);
    let mut lhs_gens = Vec::new();
    let mut rhs_gens = Vec::new();
    for z in &ia.carrier.basis {
        for &m in &members_jk {
            lhs_gens.push(z.mul(&id_ka.tensor(&g.gns.pi[m])));
        }
    }
    for a in &act.basis {
        for &m in &members_jk {
            rhs_gens.push(a.tensor(&g.gns.pi[m]));
        }
    }
    let lhs_sp = span(&lhs_gens, d, d, tol);
    let rhs_sp = span(&rhs_gens, d, d, tol);
    rep.push(
        "fullness [A_2 (1 x S_jk)] = A x S_jk",
        spaces_equality_residual(&lhs_sp, &rhs_sp),
        1.0,
    );
    Ok(rep)
}

/// Direct sum of two square matrices as diagonal blocks.
fn block_diag(x: &CMatrix, y: &CMatrix) -> CMatrix {
    let n = x.rows + y.rows;
    let mut out = CMatrix::zeros(n, n);
    for (r, c, v) in x.nonzeros() {
        out.set(r, c, v);
    }
    for (r, c, v) in y.nonzeros() {
        out.set(x.rows + r, x.cols + c, v);
    }
    out
}

/// Shared coefficient data of one induction: the source coaction table,
/// the carrier basis expressed over {a_p⊗π(e_m)} with m in the (j,k)
/// corner, and δ^{(k)}(a_u) expressed over {z_q⊗π(e_y)} with y in (k,j).
struct InductionTables {
    /// δ_A(a_u) over {a_p⊗e_m}, m in (j,j).
    table_a: Vec<Vec<C64>>,
    /// Carrier basis z_g over {a_p⊗e_w}, w in (j,k).
    cz: Vec<Vec<C64>>,
    /// δ^{(k)}(a_u) over {z_q⊗e_y}, y in (k,j); the residual certifies
    /// that δ^{(k)} lands in A_2⊗S_kj.
    cd: Vec<Vec<C64>>,
    cd_res: f64,
    /// δ_{A_2}(z_g) over {z_q⊗e_m2}, m2 in (k,k).
    table_b: Vec<Vec<C64>>,
}

fn induction_tables(
    l: &LinkingGroupoid,
    act: &CornerAction,
    ia: &InducedAlgebra,
    delta2: &[CMatrix],
) -> Result<InductionTables> {
    let j = act.corner;
    let k = 1 - j;
    let (table_a, _) = action_table(l, act, &l.corner_members(j, j))?;
    let (_, dec_jk) = leg_family(l, &act.basis, &l.corner_members(j, k));
    let mut cz = Vec::with_capacity(ia.carrier.dim());
    for z in &ia.carrier.basis {
        cz.push(dec_jk.coeffs(z)?.0);
    }
    let (_, dec_kj) = leg_family(l, &ia.carrier.basis, &l.corner_members(k, j));
    let mut cd = Vec::with_capacity(delta2.len());
    let mut cd_res = 0.0f64;
    for d2 in delta2 {
        let (cs, r) = dec_kj.coeffs(d2)?;
        cd_res = cd_res.max(r);
        cd.push(cs);
    }
    let (_, dec_kk) = leg_family(l, &ia.carrier.basis, &l.corner_members(k, k));
    let mut table_b = Vec::with_capacity(ia.action.delta.len());
    for d in &ia.action.delta {
        table_b.push(dec_kk.coeffs(d)?.0);
    }
    Ok(InductionTables { table_a, cz, cd, cd_res, table_b })
}

/// Round-trip verification: the double induction C = Ind∘Ind(A_1)
/// coincides with δ^{(2)}(A_1) and π_1: a ↦ δ^{(2)}(a) is an equivariant
/// *-isomorphism onto it.
pub fn roundtrip(l: &LinkingGroupoid, act: &CornerAction, tol: f64) -> Result<VerificationReport> {
    let g = &l.underlying;
    let j = act.corner;
    let k = 1 - j;
    let na = act.basis.len();
    let d3 = act.dim_ka * g.dim_h * g.dim_h;
    let mut rep = VerificationReport::new("round-trip of the induction", tol);

    let ia = induce_algebra(l, act, tol)?;
    let delta2 = delta2_ops(l, act)?;
    let tabs = induction_tables(l, act, &ia, &delta2)?;

    // C = Ind back from the induced action; compare with δ^{(2)}(A_1)
    let gens2 = slice_generators(l, &ia.action, tol)?;
    let c_span = span(&gens2, d3, d3, tol);
    let pi1_span = span(&delta2, d3, d3, tol);
    rep.push(
        "C = delta^(2)(A_1)",
        spaces_equality_residual(&c_span, &pi1_span),
        1.0,
    );
    rep.push_flag("pi_1 is injective", pi1_span.dim() == na);

    // π_1 is a *-homomorphism
    let dec_a = Decomposer::new(&act.basis);
    let mut worst_mul = 0.0f64;
    let mut worst_star = 0.0f64;
    for u in 0..na {
        let (cs, _) = dec_a.coeffs(&act.basis[u].adjoint())?;
        worst_star = worst_star.max(combine(&delta2, &cs).sub(&delta2[u].adjoint()).fro_norm());
        for v in 0..na {
            let (cp, _) = dec_a.coeffs(&act.basis[u].mul(&act.basis[v]))?;
            worst_mul =
                worst_mul.max(combine(&delta2, &cp).sub(&delta2[u].mul(&delta2[v])).fro_norm());
        }
    }
    rep.push("pi_1 is multiplicative", worst_mul, d3 as f64);
    rep.push("pi_1 preserves adjoints", worst_star, d3 as f64);

    // intertwining δ_C∘π_1 = (π_1⊗id)∘δ_A at the coefficient level over
    // the family {z_q⊗e_y⊗e_m}, y in (k,j), m in (j,j)
    let members_jj = l.corner_members(j, j);
    let members_kj = l.corner_members(k, j);
    let nm = members_jj.len();
    let ny = members_kj.len();
    let nc = ia.carrier.dim();
    let mpos: std::collections::HashMap<usize, usize> =
        members_jj.iter().enumerate().map(|(p, &a)| (a, p)).collect();
    let ypos: std::collections::HashMap<usize, usize> =
        members_kj.iter().enumerate().map(|(p, &a)| (a, p)).collect();
    let mut worst = tabs.cd_res;
    for u in 0..na {
        let mut lhs = vec![czero(); nc * ny * nm];
        let mut rhs = vec![czero(); nc * ny * nm];
        for q in 0..nc {
            for (yi, &y) in members_kj.iter().enumerate() {
                let c = tabs.cd[u][q * ny + yi];
                if c.norm_sqr() < 1e-28 {
                    continue;
                }
                // δ^j applied to the S_kj leg of δ^(2)(a_u)
                for (a, b, v) in coproduct_component(l, y, j) {
                    if let (Some(&y1), Some(&m1)) = (ypos.get(&a), mpos.get(&b)) {
                        lhs[(q * ny + y1) * nm + m1] += c * v;
                    }
                }
            }
        }
        for p in 0..na {
            for mi in 0..nm {
                let c = tabs.table_a[u][p * nm + mi];
                if c.norm_sqr() < 1e-28 {
                    continue;
                }
                for q in 0..nc {
                    for yi in 0..ny {
                        rhs[(q * ny + yi) * nm + mi] += c * tabs.cd[p][q * ny + yi];
                    }
                }
            }
        }
        let diff: f64 = lhs.iter().zip(&rhs).map(|(x, y)| (x - y).norm_sqr()).sum();
        worst = worst.max(diff.sqrt());
    }
    rep.push("pi_1 intertwines delta_A1 and delta_C", worst, d3 as f64);
    Ok(rep)
}

/// Assemble the linking-groupoid action B = B_1⊕B_2 from a corner
/// action: δ^1_{B_1} = δ_A, δ^2_{B_2} = δ_{A_2}, δ^2_{B_1} = δ^{(2)} and
/// δ^1_{B_2} the inclusion A_2 ⊂ A_1⊗S_12, certified by the relation
/// δ^{(1)}_{B_2} = (π_1⊗id)δ^1_{B_2}.
pub fn reconstruct_linking_action(
    l: &LinkingGroupoid,
    act: &CornerAction,
    tol: f64,
) -> Result<(ActionData, InducedAlgebra, VerificationReport)> {
    let g = &l.underlying;
    let j = act.corner;
    let k = 1 - j;
    let dh = g.dim_h;
    let na = act.basis.len();
    let d2 = act.dim_ka * dh;
    let mut rep = VerificationReport::new("reconstructed linking action", tol);

    let ia = induce_algebra(l, act, tol)?;
    let delta2 = delta2_ops(l, act)?;
    let tabs = induction_tables(l, act, &ia, &delta2)?;
    let scale = (act.dim_ka * dh * dh) as f64;
    if tabs.cd_res > tol * scale {
        return Err(Error::AssemblyDefect(format!(
            "delta^(2)(B_1) does not land in B_2 x S_kj (residual {:.3e})",
            tabs.cd_res
        )));
    }
    rep.push("delta^(2)(B_1) lands in B_2 x S_kj", tabs.cd_res, scale);

    // the pi1 relation over the family {z_q⊗e_y⊗e_w}, y in (k,j), w in (j,k)
    let members_kj = l.corner_members(k, j);
    let members_jk = l.corner_members(j, k);
    let members_kk = l.corner_members(k, k);
    let ny = members_kj.len();
    let nw = members_jk.len();
    let nc = ia.carrier.dim();
    let ypos: std::collections::HashMap<usize, usize> =
        members_kj.iter().enumerate().map(|(p, &a)| (a, p)).collect();
    let wpos: std::collections::HashMap<usize, usize> =
        members_jk.iter().enumerate().map(|(p, &a)| (a, p)).collect();
    let mut worst = 0.0f64;
    for gx in 0..nc {
        let mut lhs = vec![czero(); nc * ny * nw];
        let mut rhs = vec![czero(); nc * ny * nw];
        for p in 0..na {
            for wi in 0..nw {
                let c = tabs.cz[gx][p * nw + wi];
                if c.norm_sqr() < 1e-28 {
                    continue;
                }
                for q in 0..nc {
                    for yi in 0..ny {
                        lhs[(q * ny + yi) * nw + wi] += c * tabs.cd[p][q * ny + yi];
                    }
                }
            }
        }
        for q in 0..nc {
            for (m2i, &m2) in members_kk.iter().enumerate() {
                let c = tabs.table_b[gx][q * members_kk.len() + m2i];
                if c.norm_sqr() < 1e-28 {
                    continue;
                }
                for (a, b, v) in coproduct_component(l, m2, j) {
                    if let (Some(&yi), Some(&wi)) = (ypos.get(&a), wpos.get(&b)) {
                        rhs[(q * ny + yi) * nw + wi] += c * v;
                    }
                }
            }
        }
        let diff: f64 = lhs.iter().zip(&rhs).map(|(x, y)| (x - y).norm_sqr()).sum();
        worst = worst.max(diff.sqrt());
    }
    if worst > tol * scale {
        return Err(Error::AssemblyDefect(format!(
            "the inclusion does not solve delta^(1)_B2 = (pi_1 x id) delta^1_B2 (residual {worst:.3e})"
        )));
    }
    rep.push("delta^(1)_B2 = (pi_1 x id) delta^1_B2", worst, scale);

    // fullness of the off-diagonal component (Lemma on the four morphisms)
    let d3 = act.dim_ka * dh * dh;
    let mut lhs_gens = Vec::new();
    let mut rhs_gens = Vec::new();
    let idk = CMatrix::identity(d2);
    for d in &delta2 {
        for &y in &members_kj {
            lhs_gens.push(d.mul(&idk.tensor(&g.gns.pi[y])));
        }
    }
    for z in &ia.carrier.basis {
        for &y in &members_kj {
            rhs_gens.push(z.tensor(&g.gns.pi[y]));
        }
    }
    let lhs_sp = span(&lhs_gens, d3, d3, tol);
    let rhs_sp = span(&rhs_gens, d3, d3, tol);
    rep.push(
        "fullness [delta^2_B1(B_1)(1 x S_kj)] = B_2 x S_kj",
        spaces_equality_residual(&lhs_sp, &rhs_sp),
        1.0,
    );

    // assemble the ActionData on K_B = K_A ⊕ (K_A⊗H)
    let da = act.dim_ka;
    let dim_kb = da + d2;
    let mut basis = Vec::with_capacity(na + nc);
    let mut delta_b = Vec::with_capacity(na + nc);
    let mut one = Vec::with_capacity(na + nc);
    let zero2 = CMatrix::zeros(d2, d2);
    let zero1 = CMatrix::zeros(da, da);
    for u in 0..na {
        basis.push(block_diag(&act.basis[u], &zero2));
        delta_b.push(block_diag(&act.delta[u], &delta2[u]));
        one.push(act.one_coeffs[u]);
    }
    for gx in 0..nc {
        basis.push(block_diag(&zero1, &ia.carrier.basis[gx]));
        delta_b.push(block_diag(&ia.carrier.basis[gx], &ia.action.delta[gx]));
        one.push(ia.action.one_coeffs[gx]);
    }
    let one1 = block_diag(&act.one_mat(), &zero2);
    let one2 = block_diag(&zero1, &ia.action.one_mat());
    let mut beta_images = Vec::with_capacity(g.base.dim());
    for &(blk, r, s) in &g.base.units() {
        if r != s {
            beta_images.push(CMatrix::zeros(dim_kb, dim_kb));
        } else if blk == j {
            beta_images.push(one1.clone());
        } else {
            beta_images.push(one2.clone());
        }
    }
    let beta_b = StarHom::new(g.base.clone(), dim_kb, beta_images, true);
    let act_b = ActionData::new(dim_kb, basis, one, beta_b, delta_b, g, tol)
        .map_err(|e| Error::AssemblyDefect(format!("assembled action is inconsistent: {e}")))?;
    rep.push(
        "delta_B(1_B) = q_B",
        act_b.delta_of(&act_b.one).sub(&act_b.q_a).fro_norm(),
        (dim_kb * dh) as f64,
    );
    let _ = k;
    Ok((act_b, ia, rep))
}

/// Matrix amplification of a corner action: A⊗M_n with the coaction
/// acting trivially on the matrix leg; the linking algebra of a free
/// module column space.
pub fn amplify_action(l: &LinkingGroupoid, act: &CornerAction, n: usize) -> CornerAction {
    let dh = l.underlying.dim_h;
    let dka = act.dim_ka * n;
    let dims = [act.dim_ka, n, dh];
    let na = act.basis.len();
    let mut basis = Vec::with_capacity(na * n * n);
    let mut delta = Vec::with_capacity(na * n * n);
    let mut one_coeffs = Vec::with_capacity(na * n * n);
    for p in 0..na {
        for r in 0..n {
            for s in 0..n {
                let mut e_rs = CMatrix::zeros(n, n);
                e_rs.set(r, s, cone());
                basis.push(act.basis[p].tensor(&e_rs));
                delta.push(embed(&act.delta[p], &[0, 2], &dims).mul(&embed(&e_rs, &[1], &dims)));
                one_coeffs.push(if r == s { act.one_coeffs[p] } else { czero() });
            }
        }
    }
    CornerAction { corner: act.corner, dim_ka: dka, basis, one_coeffs, delta }
}

/// Induce a G_1-equivariant morphism f_1: A → B to f_2 = (f_1⊗id)
/// between the induced algebras; returns the images of the carrier
/// basis of Ind(A).
pub fn induce_morphism(
    l: &LinkingGroupoid,
    src: &CornerAction,
    dst: &CornerAction,
    f1: &[CMatrix],
    ia_src: &InducedAlgebra,
    ia_dst: &InducedAlgebra,
    tol: f64,
) -> Result<(Vec<CMatrix>, VerificationReport)> {
    let g = &l.underlying;
    let j = src.corner;
    let k = 1 - j;
    if dst.corner != j {
        return Err(Error::SourceMismatch("source and target corners differ".into()));
    }
    let dh = g.dim_h;
    let scale = (dst.dim_ka * dh) as f64;
    let mut rep = VerificationReport::new("induced morphism", tol);

    // equivariance of f_1 (precondition)
    let members_jj = l.corner_members(j, j);
    let nm = members_jj.len();
    let (table_src, _) = action_table(l, src, &members_jj)?;
    let dec_dst = Decomposer::new(&dst.basis);
    let mut worst = 0.0f64;
    for u in 0..src.basis.len() {
        let mut lhs = CMatrix::zeros(dst.dim_ka * dh, dst.dim_ka * dh);
        for p in 0..src.basis.len() {
            for (mi, &m) in members_jj.iter().enumerate() {
                let c = table_src[u][p * nm + mi];
                if c.norm_sqr() > 1e-28 {
                    lhs = lhs.add(&f1[p].tensor(&g.gns.pi[m]).scale(c));
                }
            }
        }
        let (cs, r) = dec_dst.coeffs(&f1[u])?;
        worst = worst.max(r).max(lhs.sub(&dst.delta_of(&cs)).fro_norm());
    }
    if worst > tol * scale {
        return Err(Error::NotEquivariant(format!(
            "f_1 does not intertwine the source and target coactions (residual {worst:.3e})"
        )));
    }
    rep.push("f_1 is G_1-equivariant", worst, scale);

    // f_2 = (f_1 ⊗ id) restricted to the carrier
    let members_jk = l.corner_members(j, k);
    let nw = members_jk.len();
    let (_, dec_jk) = leg_family(l, &src.basis, &members_jk);
    let mut f2 = Vec::with_capacity(ia_src.carrier.dim());
    for z in &ia_src.carrier.basis {
        let (cs, _) = dec_jk.coeffs(z)?;
        let mut img = CMatrix::zeros(dst.dim_ka * dh, dst.dim_ka * dh);
        for p in 0..src.basis.len() {
            for (wi, &w) in members_jk.iter().enumerate() {
                let c = cs[p * nw + wi];
                if c.norm_sqr() > 1e-28 {
                    img = img.add(&f1[p].tensor(&g.gns.pi[w]).scale(c));
                }
            }
        }
        f2.push(img);
    }

    // f_2 lands in Ind(B) and is a *-homomorphism
    let dec_c = Decomposer::new(&ia_dst.carrier.basis);
    let dec_s = Decomposer::new(&ia_src.carrier.basis);
    let mut land = 0.0f64;
    let mut mul = 0.0f64;
    let mut star = 0.0f64;
    let mut coeffs2 = Vec::with_capacity(f2.len());
    for (gx, img) in f2.iter().enumerate() {
        let (cs, r) = dec_c.coeffs(img)?;
        land = land.max(r);
        coeffs2.push(cs);
        let (ca, _) = dec_s.coeffs(&ia_src.carrier.basis[gx].adjoint())?;
        star = star.max(combine(&f2, &ca).sub(&img.adjoint()).fro_norm());
        for (hx, img2) in f2.iter().enumerate() {
            let (cp, _) =
                dec_s.coeffs(&ia_src.carrier.basis[gx].mul(&ia_src.carrier.basis[hx]))?;
            mul = mul.max(combine(&f2, &cp).sub(&img.mul(img2)).fro_norm());
        }
    }
    rep.push("f_2 lands in Ind(B)", land, scale);
    rep.push("f_2 is multiplicative", mul, scale);
    rep.push("f_2 preserves adjoints", star, scale);

    // G_2-equivariance of f_2
    let members_kk = l.corner_members(k, k);
    let (_, dec_kk_src) = leg_family(l, &ia_src.carrier.basis, &members_kk);
    let mut eq2 = 0.0f64;
    for (gx, img) in f2.iter().enumerate() {
        let lhs = ia_dst.action.delta_of(&coeffs2[gx]);
        let (tb, _) = dec_kk_src.coeffs(&ia_src.action.delta[gx])?;
        let mut rhs = CMatrix::zeros(lhs.rows, lhs.cols);
        for q in 0..f2.len() {
            for (m2i, &m2) in members_kk.iter().enumerate() {
                let c = tb[q * members_kk.len() + m2i];
                if c.norm_sqr() > 1e-28 {
                    rhs = rhs.add(&f2[q].tensor(&g.gns.pi[m2]).scale(c));
                }
            }
        }
        eq2 = eq2.max(lhs.sub(&rhs).fro_norm());
        let _ = img;
    }
    rep.push("f_2 is G_2-equivariant", eq2, (dst.dim_ka * dh * dh) as f64);

    // the image of the unit is a projection (the limit projection e_2)
    let f2_one = combine(&f2, &ia_src.action.one_coeffs);
    let proj = f2_one
        .mul(&f2_one)
        .sub(&f2_one)
        .fro_norm()
        .max(f2_one.adjoint().sub(&f2_one).fro_norm());
    rep.push("f_2(1) is a projection", proj, scale);
    Ok((f2, rep))
}

/// Compose induced morphisms: images of g_2∘f_2 on the carrier basis of
/// the common source, given f_2 into a middle induced algebra.
pub fn compose_induced(
    ia_mid: &InducedAlgebra,
    f2: &[CMatrix],
    g2: &[CMatrix],
) -> Result<Vec<CMatrix>> {
    let dec = Decomposer::new(&ia_mid.carrier.basis);
    let mut out = Vec::with_capacity(f2.len());
    for img in f2 {
        let (cs, _) = dec.coeffs(img)?;
        out.push(combine(g2, &cs));
    }
    Ok(out)
}

/// Induce a G_1-linking algebra (J_1, e_{1,1}, e_{2,1}) to the
/// G_2-linking algebra (J_2, e_{i,2} = e_{i,1}⊗1_{S_12}).
pub fn induce_linking_algebra(
    l: &LinkingGroupoid,
    act_j: &CornerAction,
    e1: &[CMatrix; 2],
    tol: f64,
) -> Result<(InducedAlgebra, [CMatrix; 2], VerificationReport)> {
    let g = &l.underlying;
    let j = act_j.corner;
    let k = 1 - j;
    let dh = g.dim_h;
    let dka = act_j.dim_ka;
    let scale = dka as f64;
    let mut rep = VerificationReport::new("induced linking algebra", tol);

    // preconditions on (J_1, e_{i,1})
    let sum_defect = e1[0].add(&e1[1]).sub(&act_j.one_mat()).fro_norm();
    if sum_defect > tol * scale {
        return Err(Error::NotLinking(format!(
            "e_{{1,1}} + e_{{2,1}} is not the unit of J_1 (residual {sum_defect:.3e})"
        )));
    }
    let dec_j = Decomposer::new(&act_j.basis);
    let u_jj = corner_unit(l, j);
    for (i, e) in e1.iter().enumerate() {
        let p = e.mul(e).sub(e).fro_norm().max(e.adjoint().sub(e).fro_norm());
        if p > tol * scale {
            return Err(Error::NotLinking(format!("e_{{{},1}} is not a projection", i + 1)));
        }
        let (cs, _) = dec_j.coeffs(e)?;
        let dd = act_j.delta_of(&cs).sub(&e.tensor(&u_jj)).fro_norm();
        if dd > tol * (dka * dh) as f64 {
            return Err(Error::NotLinking(format!(
                "delta_J1(e_{{{},1}}) differs from e_{{{},1}} x 1 (residual {dd:.3e})",
                i + 1,
                i + 1
            )));
        }
        let mut gens = Vec::new();
        for a in &act_j.basis {
            for b in &act_j.basis {
                gens.push(a.mul(e).mul(b));
            }
        }
        let full = span(&gens, dka, dka, tol);
        if full.dim() != act_j.basis.len() {
            return Err(Error::NotLinking(format!(
                "[J_1 e_{{{},1}} J_1] has dimension {} < {}",
                i + 1,
                full.dim(),
                act_j.basis.len()
            )));
        }
    }
    rep.push("J_1 with e_{i,1} is a G_1-linking algebra", sum_defect, scale);

    let ia = induce_algebra(l, act_j, tol)?;
    let p_jk = &l.p[j][k];
    let e2 = [e1[0].tensor(p_jk), e1[1].tensor(p_jk)];
    let d2 = dka * dh;
    let scale2 = d2 as f64;

    // e_{1,2} + e_{2,2} acts as the unit of M(J_2)
    let esum = e2[0].add(&e2[1]);
    let mut unit_defect = 0.0f64;
    for z in &ia.carrier.basis {
        unit_defect = unit_defect
            .max(esum.mul(z).sub(z).fro_norm())
            .max(z.mul(&esum).sub(z).fro_norm());
    }
    rep.push("e_{1,2} + e_{2,2} is the unit of M(J_2)", unit_defect, scale2);

    let dec_c = Decomposer::new(&ia.carrier.basis);
    let p_kk = &l.p[k][k];
    for (i, e) in e2.iter().enumerate() {
        // multiplier property and corner fullness
        let mut memb = 0.0f64;
        let mut gens = Vec::new();
        for z in &ia.carrier.basis {
            memb = memb
                .max(dec_c.coeffs(&e.mul(z))?.1)
                .max(dec_c.coeffs(&z.mul(e))?.1);
            for z2 in &ia.carrier.basis {
                gens.push(z.mul(e).mul(z2));
            }
        }
        rep.push(format!("e_{{{},2}} multiplies J_2", i + 1), memb, scale2);
        let full = span(&gens, d2, d2, tol);
        if full.dim() != ia.carrier.dim() {
            return Err(Error::NotLinking(format!(
                "[J_2 e_{{{},2}} J_2] has dimension {} < {}",
                i + 1,
                full.dim(),
                ia.carrier.dim()
            )));
        }
        rep.push_flag(format!("[J_2 e_{{{},2}} J_2] = J_2", i + 1), true);
        // coaction fixes the projections: δ(e z) = (e⊗1)δ(z)
        let mut co = 0.0f64;
        for (gx, z) in ia.carrier.basis.iter().enumerate() {
            let (cs, _) = dec_c.coeffs(&e.mul(z))?;
            let lhs = ia.action.delta_of(&cs);
            let rhs = e
                .tensor(p_kk)
                .mul(&ia.action.delta[gx]);
            co = co.max(lhs.sub(&rhs).fro_norm());
        }
        rep.push(format!("delta_J2(e_{{{},2}}) = e_{{{},2}} x 1", i + 1, i + 1), co, scale2);
        // the inclusion component sends e_{i,2} to e_{i,1} x 1 by construction
        rep.push(
            format!("delta^1_J2(e_{{{},2}}) = e_{{{},1}} x 1", i + 1, i + 1),
            e.sub(&e1[i].tensor(p_jk)).fro_norm(),
            scale2,
        );
    }
    Ok((ia, e2, rep))
}

/// Induce an equivariant Hilbert module: E_2 = e_{1,2} J_2 e_{2,2} from
/// the linking algebra J_1 = K(E_1 ⊕ B_1); verifies that E_2 is a full
/// right module over the corner e_{2,2} J_2 e_{2,2}.
pub fn induce_module(
    l: &LinkingGroupoid,
    act_j: &CornerAction,
    e1: &[CMatrix; 2],
    tol: f64,
) -> Result<(OperatorSpace, VerificationReport)> {
    let (ia, e2, mut rep) = induce_linking_algebra(l, act_j, e1, tol)?;
    let d2 = ia.action.dim_ka;
    let corner = |a: &CMatrix, b: &CMatrix| -> Vec<CMatrix> {
        ia.carrier.basis.iter().map(|z| a.mul(z).mul(b)).collect()
    };
    let e_gens = corner(&e2[0], &e2[1]);
    let e_span = span(&e_gens, d2, d2, tol);
    let b_span = span(&corner(&e2[1], &e2[1]), d2, d2, tol);
    let k_span = span(&corner(&e2[0], &e2[0]), d2, d2, tol);

    // right module: E_2 · (e_22 J_2 e_22) ⊂ E_2
    let mut prods = Vec::new();
    for x in &e_span.basis {
        for b in &b_span.basis {
            prods.push(x.mul(b));
        }
    }
    let dec_e = Decomposer::new(&e_span.basis);
    let mut memb = 0.0f64;
    for p in &prods {
        memb = memb.max(dec_e.coeffs(p)?.1);
    }
    rep.push("E_2 is a right e_22 J_2 e_22 module", memb, d2 as f64);

    // fullness of the inner products on both sides
    let mut inner = Vec::new();
    let mut compacts = Vec::new();
    for x in &e_span.basis {
        for y in &e_span.basis {
            inner.push(x.adjoint().mul(y));
            compacts.push(x.mul(&y.adjoint()));
        }
    }
    let inner_sp = span(&inner, d2, d2, tol);
    let compact_sp = span(&compacts, d2, d2, tol);
    rep.push("[<E_2, E_2>] = e_22 J_2 e_22", spaces_equality_residual(&inner_sp, &b_span), 1.0);
    rep.push("[K(E_2)] = e_11 J_2 e_11", spaces_equality_residual(&compact_sp, &k_span), 1.0);
    Ok((e_span, rep))
}

/// Induce an operator F_1 in e_1 M(J_1) e_1 to F_2 = F_1 ⊗ 1_{S_12},
/// after checking the Fredholm-type hypotheses relative to a morphism
/// f_1: B → M(J_1); the mirrored conditions are verified for F_2.
pub fn induce_operator(
    l: &LinkingGroupoid,
    act_b: &CornerAction,
    act_j: &CornerAction,
    f1: &[CMatrix],
    e1: &CMatrix,
    f_op: &CMatrix,
    tol: f64,
) -> Result<(CMatrix, VerificationReport)> {
    let g = &l.underlying;
    let j = act_j.corner;
    let k = 1 - j;
    let dh = g.dim_h;
    let dka = act_j.dim_ka;
    let scale = dka as f64;
    let mut rep = VerificationReport::new("induced operator", tol);

    // hypotheses on (F_1, f_1, e_1)
    let corner_gens: Vec<CMatrix> =
        act_j.basis.iter().map(|b| e1.mul(b).mul(e1)).collect();
    let es = span(&corner_gens, dka, dka, tol);
    let dec_es = Decomposer::new(&es.basis);
    let one_j = act_j.one_mat();
    let checks: Vec<(&str, Box<dyn Fn(&CMatrix) -> CMatrix>)> = vec![
        (
            "[F_1, f_1(b)] lies in e_1 J_1 e_1",
            Box::new(|b: &CMatrix| f_op.mul(b).sub(&b.mul(f_op))),
        ),
        (
            "f_1(b)(F_1 - F_1*) lies in e_1 J_1 e_1",
            Box::new(|b: &CMatrix| b.mul(&f_op.sub(&f_op.adjoint()))),
        ),
        (
            "f_1(b)(F_1^2 - 1) lies in e_1 J_1 e_1",
            Box::new(|b: &CMatrix| b.mul(&f_op.mul(f_op).sub(&one_j))),
        ),
    ];
    for (name, make) in &checks {
        let mut worst = 0.0f64;
        for b in f1 {
            worst = worst.max(dec_es.coeffs(&make(b))?.1);
        }
        if worst > tol * scale {
            return Err(Error::HypothesisDefect(format!("{name} fails (residual {worst:.3e})")));
        }
        rep.push(*name, worst, scale);
    }
    let dec_j = Decomposer::new(&act_j.basis);
    let (cf, rf) = dec_j.coeffs(f_op)?;
    let inv = act_j
        .delta_of(&cf)
        .sub(&f_op.tensor(&corner_unit(l, j)))
        .fro_norm()
        .max(rf);
    if inv > tol * (dka * dh) as f64 {
        return Err(Error::HypothesisDefect(format!(
            "delta_J1(F_1) = F_1 x 1 fails (residual {inv:.3e})"
        )));
    }
    rep.push("delta_J1(F_1) = F_1 x 1", inv, (dka * dh) as f64);

    // induce everything
    let ia_j = induce_algebra(l, act_j, tol)?;
    let ia_b = induce_algebra(l, act_b, tol)?;
    let p_jk = &l.p[j][k];
    let f_op2 = f_op.tensor(p_jk);
    let e2 = e1.tensor(p_jk);
    let (f2, _) = induce_morphism(l, act_b, act_j, f1, &ia_b, &ia_j, tol)?;
    let d2 = dka * dh;
    let scale2 = d2 as f64;
    let corner2: Vec<CMatrix> =
        ia_j.carrier.basis.iter().map(|z| e2.mul(z).mul(&e2)).collect();
    let es2 = span(&corner2, d2, d2, tol);
    let dec_es2 = Decomposer::new(&es2.basis);
    let one_j2 = ia_j.action.one_mat();
    let checks2: Vec<(&str, Box<dyn Fn(&CMatrix) -> CMatrix>)> = vec![
        (
            "[F_2, f_2(b)] lies in e_2 J_2 e_2",
            Box::new(|b: &CMatrix| f_op2.mul(b).sub(&b.mul(&f_op2))),
        ),
        (
            "f_2(b)(F_2 - F_2*) lies in e_2 J_2 e_2",
            Box::new(|b: &CMatrix| b.mul(&f_op2.sub(&f_op2.adjoint()))),
        ),
        (
            "f_2(b)(F_2^2 - 1) lies in e_2 J_2 e_2",
            Box::new(|b: &CMatrix| b.mul(&f_op2.mul(&f_op2).sub(&one_j2))),
        ),
    ];
    for (name, make) in &checks2 {
        let mut worst = 0.0f64;
        for b in &f2 {
            worst = worst.max(dec_es2.coeffs(&make(b))?.1);
        }
        rep.push(*name, worst, scale2);
    }
    // δ_J2(F_2) = F_2 ⊗ 1 as a multiplier identity
    let dec_c = Decomposer::new(&ia_j.carrier.basis);
    let p_kk = &l.p[k][k];
    let mut co = 0.0f64;
    for (gx, z) in ia_j.carrier.basis.iter().enumerate() {
        let (cs, _) = dec_c.coeffs(&f_op2.mul(z))?;
        co = co.max(
            ia_j.action
                .delta_of(&cs)
                .sub(&f_op2.tensor(p_kk).mul(&ia_j.action.delta[gx]))
                .fro_norm(),
        );
    }
    rep.push("delta_J2(F_2) = F_2 x 1", co, scale2);
    drop(checks2);
    Ok((f_op2, rep))
}

/// The bidual Morita theorem for an induced pair: the assembled linking
/// action satisfies Takesaki–Takai duality, the coaction images of the
/// bidual corners coincide with the induced algebras, and the Morita
/// bimodule grid of the crossed product satisfies the composition law.
pub fn bidual_morita_check(
    l: &LinkingGroupoid,
    reps: &RegularReps,
    act: &CornerAction,
    tol: f64,
) -> Result<VerificationReport> {
    let g = &l.underlying;
    let d3 = act.dim_ka * g.dim_h * g.dim_h;
    let mut rep = VerificationReport::new("bidual Morita equivalence", tol);

    let (act_b, ia, recon) = reconstruct_linking_action(l, act, tol)?;
    for c in &recon.checks {
        rep.push(format!("assembly: {}", c.name), c.residual, c.scale);
    }

    // Theorem: the coaction images of the corners are the induced
    // algebras. δ^1_{B_2}(B_2) = Ind(B_1) holds by construction (the
    // inclusion); δ^2_{B_1}(B_1) = Ind(B_2) is the double induction.
    let delta2 = delta2_ops(l, act)?;
    let gens2 = slice_generators(l, &ia.action, tol)?;
    let lhs = span(&delta2, d3, d3, tol);
    let rhs = span(&gens2, d3, d3, tol);
    rep.push(
        "delta^2_B1(B_1) = Ind(B_2)",
        spaces_equality_residual(&lhs, &rhs),
        1.0,
    );

    // Takesaki–Takai duality for the assembled linking action
    let takai = crate::action::takai_duality(g, reps, &act_b, tol)?;
    if !takai.passed() {
        return Err(Error::AxiomDefect(
            "Takesaki-Takai duality fails for the assembled linking action".into(),
        ));
    }
    let worst = takai.worst().map(|c| c.residual / 1.0f64.max(c.scale)).unwrap_or(0.0);
    rep.push("Takesaki-Takai duality for the assembled action", worst, 1.0);

    // Morita bimodule grid of the crossed product: fullness and the
    // composition law of the corner bimodules
    let (bu, _) = crate::coliaison::corner_decomposition(l, reps, tol);
    let (cp, _) = crate::action::crossed_product(g, reps, &act_b, tol);
    let (_, grid_rep) = crate::action::action_bimodules(l, reps, &bu, &act_b, &cp, tol)?;
    for c in &grid_rep.checks {
        rep.push(format!("bimodule: {}", c.name), c.residual, c.scale);
    }
    Ok(rep)
}
