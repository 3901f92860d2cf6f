//! Dense complex matrices, vector functionals and operator spaces.
//!
//! Everything downstream is expressed through four primitives: Kronecker
//! products, leg flips, slices against vector functionals, and spans of
//! operator families under a modified Gram–Schmidt with a relative rank
//! tolerance.

use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;

/// Shorthand for a complex scalar.
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl std::fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for cidx in 0..self.cols.min(8) {
                let z = self.get(r, cidx);
                write!(f, "{:+.3}{:+.3}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    /// Matrix unit e_{ij} of size n×n.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        m.set(i, j, C64::new(1.0, 0.0));
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        CMatrix { rows: r, cols: c, data }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut m = CMatrix::zeros(rows, cols);
        for r in 0..rows {
            for cc in 0..cols {
                m.set(r, cc, f(r, cc));
            }
        }
        m
    }

    /// Column vector from a slice.
    pub fn col_vec(v: &[C64]) -> Self {
        CMatrix { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        CMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        CMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        let data = self.data.iter().map(|a| a * s).collect();
        CMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row_out = r * out.cols;
                let row_b = k * other.cols;
                for cc in 0..other.cols {
                    out.data[row_out + cc] += a * other.data[row_b + cc];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for cc in 0..self.cols {
                out.set(cc, r, self.get(r, cc).conj());
            }
        }
        out
    }

    pub fn transpose(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for cc in 0..self.cols {
                out.set(cc, r, self.get(r, cc));
            }
        }
        out
    }

    pub fn conj(&self) -> CMatrix {
        let data = self.data.iter().map(|a| a.conj()).collect();
        CMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Kronecker product, first factor on the slow index.
    pub fn tensor(&self, other: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self.get(r1, c1);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for r2 in 0..other.rows {
                    for c2 in 0..other.cols {
                        let b = other.get(r2, c2);
                        if b.re == 0.0 && b.im == 0.0 {
                            continue;
                        }
                        out.set(r1 * other.rows + r2, c1 * other.cols + c2, a * b);
                    }
                }
            }
        }
        out
    }

    /// Frobenius inner product ⟨A,B⟩ = tr(A*B), conjugate-linear in A.
    pub fn fro_inner(&self, other: &CMatrix) -> C64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value via the Hermitian spectrum of A*A.
    pub fn op_norm(&self) -> f64 {
        let g = self.adjoint().mul(self);
        let (vals, _) = g.hermitian_eig();
        vals.iter().cloned().fold(0.0f64, f64::max).max(0.0).sqrt()
    }

    pub fn apply_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for r in 0..self.rows {
            let mut s = C64::new(0.0, 0.0);
            let row = r * self.cols;
            for cc in 0..self.cols {
                let a = self.data[row + cc];
                if a.re != 0.0 || a.im != 0.0 {
                    s += a * v[cc];
                }
            }
            out[r] = s;
        }
        out
    }

    /// Exact nonzero entries as (row, col, value).
    pub fn nonzeros(&self) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for cc in 0..self.cols {
                let v = self.get(r, cc);
                if v.re != 0.0 || v.im != 0.0 {
                    out.push((r, cc, v));
                }
            }
        }
        out
    }

    /// Solve the square system self · x = b by LU with partial pivoting.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        assert!(self.is_square());
        assert_eq!(self.rows, b.len());
        let n = self.rows;
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let mut piv = col;
            let mut best = a[perm[col] * n + col].norm();
            for r in col + 1..n {
                let v = a[perm[r] * n + col].norm();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < 1e-300 {
                return Err(Error::InvalidInput("singular system in solve".into()));
            }
            perm.swap(col, piv);
            let prow = perm[col];
            let pval = a[prow * n + col];
            for r in col + 1..n {
                let rr = perm[r];
                let f = a[rr * n + col] / pval;
                if f.re == 0.0 && f.im == 0.0 {
                    continue;
                }
                a[rr * n + col] = f;
                for cc in col + 1..n {
                    let sub = f * a[prow * n + cc];
                    a[rr * n + cc] -= sub;
                }
            }
        }
        // forward substitution on the permuted right-hand side
        let mut y = vec![C64::new(0.0, 0.0); n];
        for r in 0..n {
            let rr = perm[r];
            let mut s = x[rr];
            for cc in 0..r {
                s -= a[rr * n + cc] * y[cc];
            }
            y[r] = s;
        }
        for r in (0..n).rev() {
            let rr = perm[r];
            let mut s = y[r];
            for cc in r + 1..n {
                s -= a[rr * n + cc] * x[cc];
            }
            x[r] = s / a[rr * n + r];
        }
        Ok(x)
    }

    /// Inverse of a square matrix via LU solves against the identity.
    pub fn inverse(&self) -> Result<CMatrix> {
        assert!(self.is_square());
        let n = self.rows;
        let mut out = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            let x = self.solve(&e)?;
            for i in 0..n {
                out.set(i, j, x[i]);
            }
        }
        Ok(out)
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Returns (real eigenvalues, unitary of column eigenvectors).
    pub fn hermitian_eig(&self) -> (Vec<f64>, CMatrix) {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut v = CMatrix::identity(n);
        for _sweep in 0..100 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in p + 1..n {
                    off += a.get(p, q).norm_sqr();
                }
            }
            if off.sqrt() < 1e-14 * (1.0 + self.fro_norm()) {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a.get(p, q);
                    if apq.norm() < 1e-300 {
                        continue;
                    }
                    let app = a.get(p, p).re;
                    let aqq = a.get(q, q).re;
                    // phase factor makes the pivot real, then a real Jacobi
                    // rotation zeroes it: tan(2θ) = 2|a_pq| / (a_pp − a_qq)
                    let g = apq.norm();
                    let phase = apq / g;
                    let theta = 0.5 * (2.0 * g).atan2(app - aqq);
                    let (s, co) = theta.sin_cos();
                    let u_pp = phase * co;
                    let u_pq = -phase * s;
                    let u_qp = C64::new(s, 0.0);
                    let u_qq = C64::new(co, 0.0);
                    // A <- U* A U ; V <- V U  with U = [[u_pp, u_pq],[u_qp, u_qq]]
                    for r in 0..n {
                        let arp = a.get(r, p);
                        let arq = a.get(r, q);
                        a.set(r, p, arp * u_pp + arq * u_qp);
                        a.set(r, q, arp * u_pq + arq * u_qq);
                    }
                    for cc in 0..n {
                        let apc = a.get(p, cc);
                        let aqc = a.get(q, cc);
                        a.set(p, cc, u_pp.conj() * apc + u_qp.conj() * aqc);
                        a.set(q, cc, u_pq.conj() * apc + u_qq.conj() * aqc);
                    }
                    for r in 0..n {
                        let vrp = v.get(r, p);
                        let vrq = v.get(r, q);
                        v.set(r, p, vrp * u_pp + vrq * u_qp);
                        v.set(r, q, vrp * u_pq + vrq * u_qq);
                    }
                }
            }
        }
        let vals = (0..n).map(|i| a.get(i, i).re).collect();
        (vals, v)
    }

    /// f applied to a Hermitian matrix through its spectrum.
    pub fn hermitian_fn(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let (vals, u) = self.hermitian_eig();
        let n = self.rows;
        let mut d = CMatrix::zeros(n, n);
        for i in 0..n {
            d.set(i, i, C64::new(f(vals[i]), 0.0));
        }
        u.mul(&d).mul(&u.adjoint())
    }

    /// Positive square root of a positive semidefinite matrix.
    pub fn positive_sqrt(&self) -> CMatrix {
        self.hermitian_fn(|x| if x > 0.0 { x.sqrt() } else { 0.0 })
    }

    /// Inverse positive square root on the support of a positive matrix.
    pub fn positive_inv_sqrt(&self, tol: f64) -> CMatrix {
        let cutoff = tol * (1.0 + self.fro_norm());
        self.hermitian_fn(|x| if x > cutoff { 1.0 / x.sqrt() } else { 0.0 })
    }
}

/// Antilinear operator v ↦ mat · conj(v).
///
/// Composition rules (A, B matrices; T antilinear with matrix A):
/// T∘(linear B) has matrix A·conj(B); (linear B)∘T has matrix B·A;
/// T₁∘T₂ is linear with matrix A₁·conj(A₂); the adjoint of T is antilinear
/// with matrix Aᵀ.
#[derive(Clone, Debug)]
pub struct AntiLinear {
    pub mat: CMatrix,
}

impl AntiLinear {
    pub fn new(mat: CMatrix) -> Self {
        AntiLinear { mat }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let cv: Vec<C64> = v.iter().map(|z| z.conj()).collect();
        self.mat.apply_vec(&cv)
    }

    pub fn adjoint(&self) -> AntiLinear {
        AntiLinear { mat: self.mat.transpose() }
    }

    /// T*T as a linear (positive) operator.
    pub fn grammian(&self) -> CMatrix {
        self.mat.transpose().mul(&self.mat.conj())
    }

    /// Antilinear polar part J of T = J·|T|, i.e. J = T∘|T|⁻¹.
    pub fn polar_part(&self, tol: f64) -> AntiLinear {
        let inv_sqrt = self.grammian().positive_inv_sqrt(tol);
        AntiLinear { mat: self.mat.mul(&inv_sqrt.conj()) }
    }

    /// Composition with a linear operator on the right: T∘B.
    pub fn compose_linear(&self, b: &CMatrix) -> AntiLinear {
        AntiLinear { mat: self.mat.mul(&b.conj()) }
    }

    /// Composition of two antilinear operators, a linear operator.
    pub fn compose_anti(&self, other: &AntiLinear) -> CMatrix {
        self.mat.mul(&other.mat.conj())
    }
}

/// The flip Σ: H⊗K → K⊗H.
pub fn flip(dim_h: usize, dim_k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim_h * dim_k, dim_h * dim_k);
    for h in 0..dim_h {
        for k in 0..dim_k {
            m.set(k * dim_h + h, h * dim_k + k, C64::new(1.0, 0.0));
        }
    }
    m
}

/// Tensor product of coordinate vectors.
pub fn vec_tensor(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// Vector functional ω_{ξ,η}(x) = ⟨ξ, x η⟩ (conjugate-linear in ξ).
#[derive(Clone, Debug)]
pub struct VectorFunctional {
    pub xi: Vec<C64>,
    pub eta: Vec<C64>,
}

impl VectorFunctional {
    pub fn new(xi: Vec<C64>, eta: Vec<C64>) -> Self {
        VectorFunctional { xi, eta }
    }

    pub fn apply(&self, x: &CMatrix) -> C64 {
        let v = x.apply_vec(&self.eta);
        self.xi.iter().zip(&v).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Which leg of a two-leg tensor product a slice contracts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Contract the first leg: (ω⊗id)(X).
    Left,
    /// Contract the second leg: (id⊗ω)(X).
    Right,
}

/// Slice a two-leg operator X on H⊗K against ω.
///
/// `Left` returns (ω⊗id)(X) on K, `Right` returns (id⊗ω)(X) on H.
pub fn slice(side: Side, omega: &VectorFunctional, x: &CMatrix, dim_h: usize, dim_k: usize) -> CMatrix {
    assert_eq!(x.rows, dim_h * dim_k);
    assert_eq!(x.cols, dim_h * dim_k);
    match side {
        Side::Left => {
            assert_eq!(omega.xi.len(), dim_h);
            let mut out = CMatrix::zeros(dim_k, dim_k);
            for h in 0..dim_h {
                let xh = omega.xi[h].conj();
                if xh.re == 0.0 && xh.im == 0.0 {
                    continue;
                }
                for hp in 0..dim_h {
                    let f = xh * omega.eta[hp];
                    if f.re == 0.0 && f.im == 0.0 {
                        continue;
                    }
                    for k in 0..dim_k {
                        for kp in 0..dim_k {
                            let v = x.get(h * dim_k + k, hp * dim_k + kp);
                            if v.re != 0.0 || v.im != 0.0 {
                                let add = f * v;
                                let cur = out.get(k, kp);
                                out.set(k, kp, cur + add);
                            }
                        }
                    }
                }
            }
            out
        }
        Side::Right => {
            assert_eq!(omega.xi.len(), dim_k);
            let mut out = CMatrix::zeros(dim_h, dim_h);
            for k in 0..dim_k {
                let xk = omega.xi[k].conj();
                if xk.re == 0.0 && xk.im == 0.0 {
                    continue;
                }
                for kp in 0..dim_k {
                    let f = xk * omega.eta[kp];
                    if f.re == 0.0 && f.im == 0.0 {
                        continue;
                    }
                    for h in 0..dim_h {
                        for hp in 0..dim_h {
                            let v = x.get(h * dim_k + k, hp * dim_k + kp);
                            if v.re != 0.0 || v.im != 0.0 {
                                let add = f * v;
                                let cur = out.get(h, hp);
                                out.set(h, hp, cur + add);
                            }
                        }
                    }
                }
            }
            out
        }
    }
}

/// A linear subspace of rectangular operators with a Frobenius-orthonormal
/// basis. An empty basis is the zero space.
#[derive(Clone, Debug)]
pub struct OperatorSpace {
    pub rows: usize,
    pub cols: usize,
    pub basis: Vec<CMatrix>,
}

impl OperatorSpace {
    pub fn zero(rows: usize, cols: usize) -> Self {
        OperatorSpace { rows, cols, basis: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Orthogonal projection of X onto the space.
    pub fn project(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows, self.cols);
        for b in &self.basis {
            let coeff = b.fro_inner(x);
            if coeff.re != 0.0 || coeff.im != 0.0 {
                out = out.add(&b.scale(coeff));
            }
        }
        out
    }

    /// Frobenius distance from X to the space.
    pub fn residual(&self, x: &CMatrix) -> f64 {
        x.sub(&self.project(x)).fro_norm()
    }

    /// Membership up to tol·max(1, ‖X‖).
    pub fn contains(&self, x: &CMatrix, tol: f64) -> bool {
        self.residual(x) <= tol * 1.0f64.max(x.fro_norm())
    }

    /// Containment of another space, basis element by basis element.
    pub fn contains_space(&self, other: &OperatorSpace, tol: f64) -> bool {
        other.basis.iter().all(|b| self.contains(b, tol))
    }

    /// Expansion coefficients of X in the orthonormal basis. The second
    /// return value is the residual left outside the space.
    pub fn coefficients(&self, x: &CMatrix) -> (Vec<C64>, f64) {
        let coeffs: Vec<C64> = self.basis.iter().map(|b| b.fro_inner(x)).collect();
        let mut rem = x.clone();
        for (b, co) in self.basis.iter().zip(&coeffs) {
            rem = rem.sub(&b.scale(*co));
        }
        (coeffs, rem.fro_norm())
    }
}

/// Span of a family of operators: modified Gram–Schmidt in input order,
/// discarding a candidate when its residual is ≤ tol·max(1, input norm).
pub fn span(mats: &[CMatrix], rows: usize, cols: usize, tol: f64) -> OperatorSpace {
    let mut basis: Vec<CMatrix> = Vec::new();
    for m in mats {
        assert_eq!((m.rows, m.cols), (rows, cols), "span over mixed shapes");
        let input_norm = m.fro_norm();
        let mut v = m.clone();
        // two passes of MGS for numerical orthogonality
        for _ in 0..2 {
            for b in &basis {
                let coeff = b.fro_inner(&v);
                v = v.sub(&b.scale(coeff));
            }
        }
        let rnorm = v.fro_norm();
        if rnorm > tol * 1.0f64.max(input_norm) {
            basis.push(v.scale(C64::new(1.0 / rnorm, 0.0)));
        }
    }
    OperatorSpace { rows, cols, basis }
}

/// Span of all pairwise products {a·b}.
pub fn multiply_spaces(a: &OperatorSpace, b: &OperatorSpace, tol: f64) -> OperatorSpace {
    assert_eq!(a.cols, b.rows);
    let mut prods = Vec::with_capacity(a.dim() * b.dim());
    for x in &a.basis {
        for y in &b.basis {
            prods.push(x.mul(y));
        }
    }
    span(&prods, a.rows, b.cols, tol)
}

/// Smallest *-algebra (not necessarily unital) containing the space:
/// iterate adjoin-star and multiply until the dimension is stable.
pub fn close_star_algebra(s: &OperatorSpace, tol: f64) -> OperatorSpace {
    assert_eq!(s.rows, s.cols);
    let mut cur = s.clone();
    loop {
        let mut gens: Vec<CMatrix> = cur.basis.clone();
        for b in &cur.basis {
            gens.push(b.adjoint());
        }
        let with_star = span(&gens, s.rows, s.cols, tol);
        let mut gens2 = with_star.basis.clone();
        for x in &with_star.basis {
            for y in &with_star.basis {
                gens2.push(x.mul(y));
            }
        }
        let next = span(&gens2, s.rows, s.cols, tol);
        if next.dim() == cur.dim() {
            return next;
        }
        cur = next;
    }
}

/// Equality of spaces: mutual containment of orthonormal bases.
pub fn spaces_equal(a: &OperatorSpace, b: &OperatorSpace, tol: f64) -> bool {
    a.dim() == b.dim() && a.contains_space(b, tol) && b.contains_space(a, tol)
}

/// Worst membership residual of either basis in the other space; a
/// numeric certificate for `spaces_equal`.
pub fn spaces_equality_residual(a: &OperatorSpace, b: &OperatorSpace) -> f64 {
    let mut worst: f64 = if a.dim() == b.dim() { 0.0 } else { 1.0 };
    for x in &b.basis {
        worst = worst.max(a.residual(x));
    }
    for x in &a.basis {
        worst = worst.max(b.residual(x));
    }
    worst
}

/// Commutant of a space of square operators on C^n: the kernel of
/// X ↦ ([X,b])_b, found as the orthogonal complement of the constraint rows.
pub fn commutant(s: &OperatorSpace, tol: f64) -> OperatorSpace {
    assert_eq!(s.rows, s.cols);
    let n = s.rows;
    // Constraint rows: for each basis b and each (r,c), the linear form
    // (bX - Xb)[r,c] = Σ_t b[r,t]X[t,c] - X[r,t]b[t,c] over the n² unknowns.
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for b in &s.basis {
        for r in 0..n {
            for cc in 0..n {
                let mut row = vec![C64::new(0.0, 0.0); n * n];
                for t in 0..n {
                    row[t * n + cc] += b.get(r, t);
                    row[r * n + t] -= b.get(t, cc);
                }
                rows.push(row);
            }
        }
    }
    // Kernel = complement of span of conjugated rows.
    let conj_rows: Vec<CMatrix> = rows
        .iter()
        .map(|r| CMatrix { rows: 1, cols: n * n, data: r.iter().map(|z| z.conj()).collect() })
        .collect();
    let row_space = span(&conj_rows, 1, n * n, tol);
    let mut kernel: Vec<CMatrix> = Vec::new();
    for t in 0..n * n {
        let mut e = CMatrix::zeros(1, n * n);
        e.set(0, t, C64::new(1.0, 0.0));
        let mut v = e;
        for _ in 0..2 {
            for b in &row_space.basis {
                let coeff = b.fro_inner(&v);
                v = v.sub(&b.scale(coeff));
            }
            for b in &kernel {
                let coeff = b.fro_inner(&v);
                v = v.sub(&b.scale(coeff));
            }
        }
        let rnorm = v.fro_norm();
        if rnorm > tol {
            kernel.push(v.scale(C64::new(1.0 / rnorm, 0.0)));
        }
    }
    let basis = kernel
        .into_iter()
        .map(|flat| CMatrix { rows: n, cols: n, data: flat.data })
        .collect();
    OperatorSpace { rows: n, cols: n, basis }
}

/// Sparse view of a matrix for structured tensor-leg application.
#[derive(Clone, Debug)]
pub struct SparseOp {
    pub rows: usize,
    pub cols: usize,
    pub nz: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    pub fn from(m: &CMatrix) -> Self {
        SparseOp { rows: m.rows, cols: m.cols, nz: m.nonzeros() }
    }

    pub fn adjoint(&self) -> SparseOp {
        let nz = self.nz.iter().map(|&(r, c, v)| (c, r, v.conj())).collect();
        SparseOp { rows: self.cols, cols: self.rows, nz }
    }
}

/// A leg-structured sparse operator with precomputed index offsets, for
/// repeated column applications (the offset tables scale with the number
/// of nonzeros, so rebuilding them per apply dominates hot loops).
pub struct PreparedLegOp {
    /// Nonzeros with row/column indices resolved to vector offsets.
    nz: Vec<(usize, usize, C64)>,
    /// Per complement assignment: (input offset, output offset).
    comp: Vec<(usize, usize)>,
    total_in: usize,
    total_out: usize,
}

impl PreparedLegOp {
    /// Prepare `op` acting on the tensor legs `legs` (in the given order)
    /// of a tensor product with factor dimensions `dims`. The operator may
    /// be rectangular: legs refer to the input factorization, and the
    /// output replaces those legs by `out_leg_dims` (product = op.rows).
    pub fn new(op: &SparseOp, legs: &[usize], dims: &[usize], out_leg_dims: &[usize]) -> Self {
        let in_leg_dims: Vec<usize> = legs.iter().map(|&l| dims[l]).collect();
        let d_in: usize = in_leg_dims.iter().product();
        let d_out: usize = out_leg_dims.iter().product();
        assert_eq!(op.cols, d_in);
        assert_eq!(op.rows, d_out);
        let total_in: usize = dims.iter().product();

        // strides of each factor in the input space
        let nlegs = dims.len();
        let mut strides = vec![1usize; nlegs];
        for i in (0..nlegs.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        // output dims: same factors, with legs replaced by out_leg_dims
        let mut out_dims = dims.to_vec();
        for (k, &l) in legs.iter().enumerate() {
            out_dims[l] = out_leg_dims[k];
        }
        let mut out_strides = vec![1usize; nlegs];
        for i in (0..nlegs.saturating_sub(1)).rev() {
            out_strides[i] = out_strides[i + 1] * out_dims[i + 1];
        }
        let total_out: usize = out_dims.iter().product();

        // offset of an op column index inside the input space
        let col_offset = |mut idx: usize| -> usize {
            let mut off = 0;
            for k in (0..legs.len()).rev() {
                let d = in_leg_dims[k];
                off += (idx % d) * strides[legs[k]];
                idx /= d;
            }
            off
        };
        let row_offset = |mut idx: usize| -> usize {
            let mut off = 0;
            for k in (0..legs.len()).rev() {
                let d = out_leg_dims[k];
                off += (idx % d) * out_strides[legs[k]];
                idx /= d;
            }
            off
        };

        // enumerate complement assignments
        let comp_legs: Vec<usize> = (0..nlegs).filter(|l| !legs.contains(l)).collect();
        let comp_size: usize = comp_legs.iter().map(|&l| dims[l]).product();
        let mut comp = Vec::with_capacity(comp_size);
        for mut c in 0..comp_size {
            let mut off_in = 0;
            let mut off_out = 0;
            for &l in comp_legs.iter().rev() {
                let d = dims[l];
                let i = c % d;
                c /= d;
                off_in += i * strides[l];
                off_out += i * out_strides[l];
            }
            comp.push((off_in, off_out));
        }

        let nz = op
            .nz
            .iter()
            .map(|&(r, cidx, val)| (row_offset(r), col_offset(cidx), val))
            .collect();
        PreparedLegOp { nz, comp, total_in, total_out }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.total_in);
        let mut out = vec![C64::new(0.0, 0.0); self.total_out];
        for &(ro, co, val) in &self.nz {
            for &(ci, co2) in &self.comp {
                let x = v[co + ci];
                if x.re != 0.0 || x.im != 0.0 {
                    out[ro + co2] += val * x;
                }
            }
        }
        out
    }
}

/// Apply `op`, acting on the tensor legs `legs` (in the given order) of a
/// tensor product with factor dimensions `dims`, to the vector `v`.
///
/// The operator may be rectangular: legs refer to the input factorization,
/// and the output replaces those legs by the operator's row dimensions
/// (`out_leg_dims`, which must multiply to op.rows).
///
/// One-shot convenience over [`PreparedLegOp`]; prepare the operator once
/// when applying it to many columns.
pub fn apply_on_legs(
    op: &SparseOp,
    legs: &[usize],
    dims: &[usize],
    out_leg_dims: &[usize],
    v: &[C64],
) -> Vec<C64> {
    PreparedLegOp::new(op, legs, dims, out_leg_dims).apply(v)
}

/// A chain of leg-structured factors applied right-to-left, as in an
/// operator product F₁F₂…F_k acting on ⊗ dims.
pub struct LegChain {
    pub dims: Vec<usize>,
    pub factors: Vec<PreparedLegOp>,
}

impl LegChain {
    pub fn new(dims: &[usize]) -> Self {
        LegChain { dims: dims.to_vec(), factors: Vec::new() }
    }

    /// Push a square factor acting on `legs`; factors push left (applied last).
    pub fn push(&mut self, m: &CMatrix, legs: &[usize]) {
        let out_dims: Vec<usize> = legs.iter().map(|&l| self.dims[l]).collect();
        let op = SparseOp::from(m);
        self.factors.push(PreparedLegOp::new(&op, legs, &self.dims, &out_dims));
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut cur = v.to_vec();
        for f in self.factors.iter().rev() {
            cur = f.apply(&cur);
        }
        cur
    }
}

/// Exact Frobenius norm of the difference of two leg-structured chains,
/// computed by enumerating the standard basis columns.
pub fn chain_difference_norm(a: &LegChain, b: &LegChain) -> f64 {
    assert_eq!(a.dims, b.dims);
    let total: usize = a.dims.iter().product();
    let cols: Vec<usize> = (0..total).collect();
    let sums = crate::par_map(cols, |j| {
        let mut e = vec![C64::new(0.0, 0.0); total];
        e[j] = C64::new(1.0, 0.0);
        let va = a.apply(&e);
        let vb = b.apply(&e);
        va.iter().zip(&vb).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>()
    });
    sums.iter().sum::<f64>().sqrt()
}

/// Default tolerance helper: residual passes when ≤ tol·max(1, scale).
pub fn passes(residual: f64, scale: f64, tol: f64) -> bool {
    residual <= tol * 1.0f64.max(scale)
}

pub use crate::DEFAULT_TOL as TOL;

/// Convenience: build an operator space with shapes taken from the first
/// element.
pub fn span_auto(mats: &[CMatrix], tol: f64) -> OperatorSpace {
    assert!(!mats.is_empty(), "span_auto of empty family");
    span(mats, mats[0].rows, mats[0].cols, tol)
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}
