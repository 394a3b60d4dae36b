mod corpus;

pub use corpus::{
    random_elem, random_gauge, random_general_module, random_invertible, random_matrix, random_perturbation,
    random_perturbed_module, random_unipotent, CorpusItem, CorpusKind, CorpusParams,
};

use crate::error::{Error, Result};
use crate::exactring::{Ctx, RingElem};
use crate::report::ValidationReport;
use crate::semilinear::{smith, Matrix, PivotRule, Submodule};

/// Combinatorial data derived from the type `(d_i)`: the distinct values
/// `δ_1 < … < δ_r` of the `d_i` strictly between `0` and `h`, padded with
/// `δ_0 = 0` and `δ_{r+1} = h`, and the index `s(i)` with `d_i = δ_{s(i)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiltrationProfile {
    pub h: usize,
    pub r: usize,
    pub delta: Vec<usize>,
    pub s: Vec<usize>,
}

impl FiltrationProfile {
    pub fn new(h: usize, d: &[usize]) -> Self {
        let mut inner: Vec<usize> = d.iter().copied().filter(|&x| x >= 1 && x < h).collect();
        inner.sort_unstable();
        inner.dedup();
        let r = inner.len();
        let mut delta = Vec::with_capacity(r + 2);
        delta.push(0);
        delta.extend(inner);
        delta.push(h);
        let s = d
            .iter()
            .map(|&x| match x {
                0 => 0,
                x if x == h => r + 1,
                x => delta.iter().position(|&v| v == x).expect("value listed"),
            })
            .collect();
        FiltrationProfile { h, r, delta, s }
    }

    pub fn f(&self) -> usize {
        self.s.len()
    }

    pub fn prev(&self, i: usize) -> usize {
        (i + self.f() - 1) % self.f()
    }

    pub fn next(&self, i: usize) -> usize {
        (i + 1) % self.f()
    }

    /// Embeddings `i` with `s(i) = j`.
    pub fn seeds(&self, j: usize) -> Vec<usize> {
        (0..self.f()).filter(|&i| self.s[i] == j).collect()
    }
}

/// Dieudonné-crystal datum over `R_N` with `f` embeddings (0-based, cyclic).
///
/// `V_i : E_i → E_{i−1}^{(p)}` has matrix `A_i`, `F_i : E_{i−1}^{(p)} → E_i`
/// has matrix `B_i`, and the Hodge summand `F_i ⊂ E_i` has rank `d_i`.
#[derive(Clone, Debug)]
pub struct DieudonneModule {
    ctx: Ctx,
    h: usize,
    d: Vec<usize>,
    v: Vec<Matrix>,
    frob: Vec<Matrix>,
    hodge: Vec<Submodule>,
}

impl PartialEq for DieudonneModule {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same(&other.ctx)
            && self.h == other.h
            && self.d == other.d
            && self.v == other.v
            && self.frob == other.frob
            && self.hodge.iter().zip(&other.hodge).all(|(a, b)| a.basis() == b.basis())
    }
}

impl DieudonneModule {
    /// Assembles a datum from matrices, checking shapes and that each Hodge
    /// basis spans a direct summand. The crystal axioms are checked by
    /// [`DieudonneModule::validate`].
    pub fn new(ctx: &Ctx, d: Vec<usize>, v: Vec<Matrix>, frob: Vec<Matrix>, hodge: Vec<Matrix>) -> Result<Self> {
        let hodge = hodge
            .iter()
            .enumerate()
            .map(|(i, b)| {
                Submodule::from_basis(b)
                    .map_err(|e| Error::InvalidModule(format!("Hodge basis at i={} is not a summand: {e}", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(ctx, d, v, frob, hodge)
    }

    pub fn from_parts(
        ctx: &Ctx,
        d: Vec<usize>,
        v: Vec<Matrix>,
        frob: Vec<Matrix>,
        hodge: Vec<Submodule>,
    ) -> Result<Self> {
        let f = ctx.f() as usize;
        if d.len() != f || v.len() != f || frob.len() != f || hodge.len() != f {
            return Err(Error::InvalidModule(format!(
                "expected {f} embeddings, got d:{} V:{} F:{} hodge:{}",
                d.len(),
                v.len(),
                frob.len(),
                hodge.len()
            )));
        }
        let h = v[0].rows();
        for i in 0..f {
            let label = i + 1;
            if !v[i].ctx().same(ctx) || !frob[i].ctx().same(ctx) || !hodge[i].ctx().same(ctx) {
                return Err(Error::ContextMismatch);
            }
            if (v[i].rows(), v[i].cols()) != (h, h) || (frob[i].rows(), frob[i].cols()) != (h, h) {
                return Err(Error::InvalidModule(format!("V or F at i={label} is not {h}x{h}")));
            }
            if hodge[i].ambient_rank() != h || hodge[i].rank() != d[i] {
                return Err(Error::InvalidModule(format!(
                    "Hodge summand at i={label} has rank {} in {}, expected {} in {h}",
                    hodge[i].rank(),
                    hodge[i].ambient_rank(),
                    d[i]
                )));
            }
        }
        Ok(DieudonneModule { ctx: ctx.clone(), h, d, v, frob, hodge })
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn h(&self) -> usize {
        self.h
    }

    /// Number of embeddings.
    pub fn f(&self) -> usize {
        self.d.len()
    }

    pub fn d(&self) -> &[usize] {
        &self.d
    }

    pub fn prev(&self, i: usize) -> usize {
        (i + self.f() - 1) % self.f()
    }

    pub fn next(&self, i: usize) -> usize {
        (i + 1) % self.f()
    }

    pub fn profile(&self) -> FiltrationProfile {
        FiltrationProfile::new(self.h, &self.d)
    }

    /// `A_i`, the matrix of `V_i`.
    pub fn verschiebung(&self, i: usize) -> &Matrix {
        &self.v[i]
    }

    /// `B_i`, the matrix of `F_i`.
    pub fn frobenius(&self, i: usize) -> &Matrix {
        &self.frob[i]
    }

    pub fn hodge(&self, i: usize) -> &Submodule {
        &self.hodge[i]
    }

    pub fn hodge_basis(&self, i: usize) -> Matrix {
        self.hodge[i].basis()
    }

    /// `F_{i−1}^{(p)} ⊂ E_{i−1}^{(p)}`, the target-side image of `V_i`.
    pub fn twisted_hodge(&self, i: usize) -> Submodule {
        self.hodge[self.prev(i)].frobenius()
    }

    /// The conjugate filtration `wF_i = Ker V_i = Im F_i`.
    pub fn conjugate(&self, i: usize) -> Result<Submodule> {
        let rank = self.h - self.d[self.prev(i)];
        Submodule::kernel_summand(&self.v[i], rank, PivotRule::First)
    }

    /// Checks the crystal axioms for every embedding.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        let n = self.ctx.n();
        for i in 0..self.f() {
            let label = i + 1;
            let a = &self.v[i];
            let b = &self.frob[i];
            let dp = self.d[self.prev(i)];
            let h = self.h;

            let ab = a * b;
            report.push(
                format!("A·B = 0 at i={label}"),
                ab.is_zero(),
                if ab.is_zero() { String::new() } else { format!("{ab:?}") },
            );
            let ba = b * a;
            report.push(
                format!("B·A = 0 at i={label}"),
                ba.is_zero(),
                if ba.is_zero() { String::new() } else { format!("{ba:?}") },
            );

            let sa = smith(a, PivotRule::First);
            let ok = sa.sigma.iter().all(|&c| c == 0 || c == n) && sa.rank(n) == dp;
            report.push(
                format!("V elementary divisors at i={label}"),
                ok,
                if ok { String::new() } else { format!("digits {:?}, expected rank {dp}", sa.sigma) },
            );
            let sb = smith(b, PivotRule::First);
            let ok = sb.sigma.iter().all(|&c| c == 0 || c == n) && sb.rank(n) == h - dp;
            report.push(
                format!("F elementary divisors at i={label}"),
                ok,
                if ok { String::new() } else { format!("digits {:?}, expected rank {}", sb.sigma, h - dp) },
            );

            let hs = smith(&self.hodge[i].basis(), PivotRule::First);
            let ok = self.hodge[i].rank() == self.d[i] && hs.sigma.iter().all(|&c| c == 0);
            report.push(format!("Hodge summand of rank d_i at i={label}"), ok, "");

            let conj = Submodule::image_hull(b, h - dp, PivotRule::First)
                .and_then(|im| Submodule::kernel_summand(a, h - dp, PivotRule::First).map(|ker| (im, ker)));
            match conj {
                Ok((im, ker)) => {
                    let ok = im.same_span(&ker) && im.contains(b) && (a * &ker.basis()).is_zero();
                    report.push(format!("Im F = Ker V at i={label}"), ok, "");
                }
                Err(e) => report.fail(format!("Im F = Ker V at i={label}"), e.to_string()),
            }

            let twisted = self.twisted_hodge(i);
            match Submodule::kernel_summand(b, dp, PivotRule::First) {
                Ok(ker) => {
                    let ok = ker.same_span(&twisted) && (b * &twisted.basis()).is_zero();
                    report.push(format!("Ker F = Frob(Hodge) at i={label}"), ok, "");
                }
                Err(e) => report.fail(format!("Ker F = Frob(Hodge) at i={label}"), e.to_string()),
            }
            match Submodule::image_hull(a, dp, PivotRule::First) {
                Ok(im) => {
                    let ok = im.same_span(&twisted) && twisted.contains(a);
                    report.push(format!("Im V = Frob(Hodge) at i={label}"), ok, "");
                }
                Err(e) => report.fail(format!("Im V = Frob(Hodge) at i={label}"), e.to_string()),
            }
        }
        report
    }

    pub fn is_valid(&self) -> bool {
        self.validate().all_passed()
    }

    /// Change of basis `E_i ↦ g_i E_i`.
    pub fn gauge_twist(&self, g: &[Matrix]) -> Result<Self> {
        if g.len() != self.f() {
            return Err(Error::Dimension(format!("{} gauge matrices for {} embeddings", g.len(), self.f())));
        }
        let g_inv = g
            .iter()
            .enumerate()
            .map(|(i, m)| {
                if (m.rows(), m.cols()) != (self.h, self.h) {
                    return Err(Error::Dimension(format!("gauge matrix at i={} is not {0}x{0}", self.h)));
                }
                m.inverse().map_err(|_| Error::NotInvertible(format!("gauge matrix at i={} is not invertible", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        let f = self.f();
        let mut v = Vec::with_capacity(f);
        let mut frob = Vec::with_capacity(f);
        let mut hodge = Vec::with_capacity(f);
        for i in 0..f {
            let p = self.prev(i);
            let gp = g[p].frobenius();
            let gp_inv = g_inv[p].frobenius();
            v.push(&(&gp * &self.v[i]) * &g_inv[i]);
            frob.push(&(&g[i] * &self.frob[i]) * &gp_inv);
            hodge.push(self.hodge[i].transform(&g[i], &g_inv[i]));
        }
        Self::from_parts(&self.ctx, self.d.clone(), v, frob, hodge)
    }

    /// Moves the Hodge basis at `i` by `Z`, whose entries must lie in
    /// `m_{1/p}` so that the twisted Hodge summand is unchanged.
    pub fn perturb_hodge(&self, i: usize, z: &Matrix) -> Result<Self> {
        if i >= self.f() {
            return Err(Error::Dimension(format!("embedding {i} out of range")));
        }
        if (z.rows(), z.cols()) != (self.h, self.d[i]) {
            return Err(Error::Dimension(format!(
                "perturbation is {}x{}, Hodge basis is {}x{}",
                z.rows(),
                z.cols(),
                self.h,
                self.d[i]
            )));
        }
        let p = self.ctx.p();
        let n = self.ctx.n();
        for e in z.entries() {
            if let Some(k) = e.val_digits() {
                if p * k < n {
                    return Err(Error::InvalidValue(format!("perturbation entry {e} has valuation {k}/{n} < 1/{p}")));
                }
            }
        }
        let basis = &self.hodge[i].basis() + z;
        let mut hodge = self.hodge.clone();
        hodge[i] = Submodule::from_basis(&basis)?;
        Self::from_parts(&self.ctx, self.d.clone(), self.v.clone(), self.frob.clone(), hodge)
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if !self.ctx.same(&other.ctx) {
            return Err(Error::ContextMismatch);
        }
        let f = self.f();
        let d = self.d.iter().zip(&other.d).map(|(a, b)| a + b).collect();
        let v = (0..f).map(|i| self.v[i].block_diag(&other.v[i])).collect();
        let frob = (0..f).map(|i| self.frob[i].block_diag(&other.frob[i])).collect();
        let hodge = (0..f).map(|i| self.hodge[i].direct_sum(&other.hodge[i])).collect();
        Self::from_parts(&self.ctx, d, v, frob, hodge)
    }

    /// Replaces `B_i`; used to build corrupted data for validator tests.
    pub fn with_frobenius(&self, i: usize, m: Matrix) -> Result<Self> {
        let mut frob = self.frob.clone();
        frob[i] = m;
        Self::from_parts(&self.ctx, self.d.clone(), self.v.clone(), frob, self.hodge.clone())
    }

    /// Replaces `A_i`.
    pub fn with_verschiebung(&self, i: usize, m: Matrix) -> Result<Self> {
        let mut v = self.v.clone();
        v[i] = m;
        Self::from_parts(&self.ctx, self.d.clone(), v, self.frob.clone(), self.hodge.clone())
    }

    /// Replaces the Hodge summand at `i`, keeping everything else.
    pub fn with_hodge(&self, i: usize, hodge_i: Submodule) -> Result<Self> {
        let mut hodge = self.hodge.clone();
        hodge[i] = hodge_i;
        let mut d = self.d.clone();
        d[i] = hodge[i].rank();
        Self::from_parts(&self.ctx, d, self.v.clone(), self.frob.clone(), hodge)
    }
}

/// The split model with the minimal Newton polygon for the type `d`:
/// `A_i = diag(1^{d_{i−1}}, 0)`, `B_i = diag(0^{d_{i−1}}, 1)`, Hodge spanned
/// by the first `d_i` coordinates.
pub fn mu_ordinary(ctx: &Ctx, h: usize, d: &[usize]) -> Result<DieudonneModule> {
    let f = ctx.f() as usize;
    if d.len() != f {
        return Err(Error::InvalidModule(format!("type has {} entries, context has f={f}", d.len())));
    }
    if h == 0 || d.iter().any(|&x| x > h) {
        return Err(Error::InvalidModule(format!("type {d:?} out of range for h={h}")));
    }
    let one = RingElem::one(ctx);
    let mut v = Vec::with_capacity(f);
    let mut frob = Vec::with_capacity(f);
    let mut hodge = Vec::with_capacity(f);
    for i in 0..f {
        let dp = d[(i + f - 1) % f];
        let mut a = Matrix::zero(ctx, h, h);
        let mut b = Matrix::zero(ctx, h, h);
        for k in 0..h {
            if k < dp {
                a[(k, k)] = one.clone();
            } else {
                b[(k, k)] = one.clone();
            }
        }
        v.push(a);
        frob.push(b);
        hodge.push(Matrix::identity(ctx, h).cols_range(0..d[i]));
    }
    DieudonneModule::new(ctx, d.to_vec(), v, frob, hodge)
}

/// The `f = 1`, `h = 2` datum `A = B = [[0,1],[0,0]]` with Hodge line
/// spanned by `(1, c)`; requires `v(c) ≥ 1/p`. Its Hasse invariant is `c`.
pub fn supersingular_line(ctx: &Ctx, c: &RingElem) -> Result<DieudonneModule> {
    if ctx.f() != 1 {
        return Err(Error::InvalidContext("the classical example needs f = 1".into()));
    }
    let k = c.val_digits().unwrap_or(ctx.n());
    if ctx.p() * k < ctx.n() {
        return Err(Error::InvalidValue(format!("v({c}) < 1/p breaks Im V = Frob(Hodge)")));
    }
    let nil = Matrix::from_ints(ctx, &[&[0, 1], &[0, 0]]);
    let mut hodge = Matrix::zero(ctx, 2, 1);
    hodge[(0, 0)] = RingElem::one(ctx);
    hodge[(1, 0)] = c.lift();
    DieudonneModule::new(ctx, vec![1], vec![nil.clone()], vec![nil], vec![hodge])
}

/// Rank-2 ordinary-type block with Hodge lines `(1, c_i)` and conjugate line
/// `e_1`: `A_i = [[0,1],[0,φ(c_{i−1})]]`, `B_i = [[−φ(c_{i−1}),1],[0,0]]`.
/// Its refined invariants are `w_i = v(c_i)`.
pub fn hasse_block(ctx: &Ctx, c: &[RingElem]) -> Result<DieudonneModule> {
    let f = ctx.f() as usize;
    if c.len() != f {
        return Err(Error::InvalidModule(format!("{} parameters for f={f}", c.len())));
    }
    let one = RingElem::one(ctx);
    let mut v = Vec::with_capacity(f);
    let mut frob = Vec::with_capacity(f);
    let mut hodge = Vec::with_capacity(f);
    for i in 0..f {
        let pc = c[(i + f - 1) % f].lift().frobenius();
        let mut a = Matrix::zero(ctx, 2, 2);
        a[(0, 1)] = one.clone();
        a[(1, 1)] = pc.clone();
        let mut b = Matrix::zero(ctx, 2, 2);
        b[(0, 0)] = -&pc;
        b[(0, 1)] = one.clone();
        let mut hb = Matrix::zero(ctx, 2, 1);
        hb[(0, 0)] = one.clone();
        hb[(1, 0)] = c[i].lift();
        v.push(a);
        frob.push(b);
        hodge.push(hb);
    }
    DieudonneModule::new(ctx, vec![1; f], v, frob, hodge)
}
