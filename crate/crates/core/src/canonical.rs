use num_rational::Ratio;

use crate::crystal::{hasse_block, mu_ordinary, DieudonneModule};
use crate::error::{Error, Result};
use crate::exactring::{Ctx, RingElem};
use crate::filtration::AdequateFiltration;
use crate::invariants::{compute_invariants, InvariantReport};
use crate::report::ValidationReport;
use crate::semilinear::{smith, Matrix, PivotRule, Submodule};

/// Parameters `(a_i, b_i)` of a rank-one-per-embedding group with
/// `v(a_i) + v(b_i) = 1`, given by valuations and unit parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RaynaudParams {
    pub v_a: Vec<Ratio<i64>>,
    pub v_b: Vec<Ratio<i64>>,
    pub u_a: Vec<RingElem>,
    pub u_b: Vec<RingElem>,
}

impl RaynaudParams {
    pub fn new(v_a: Vec<Ratio<i64>>, v_b: Vec<Ratio<i64>>, u_a: Vec<RingElem>, u_b: Vec<RingElem>) -> Result<Self> {
        let f = v_a.len();
        if f == 0 || v_b.len() != f || u_a.len() != f || u_b.len() != f {
            return Err(Error::Dimension("parameter vectors must share a nonzero length".into()));
        }
        let (zero, one) = (Ratio::from_integer(0), Ratio::from_integer(1));
        for i in 0..f {
            if v_a[i] < zero || v_b[i] < zero || v_a[i] + v_b[i] != one {
                return Err(Error::InvalidValue(format!(
                    "valuations ({}, {}) at i={} must be non-negative with sum 1",
                    v_a[i],
                    v_b[i],
                    i + 1
                )));
            }
            if !u_a[i].is_unit() || !u_b[i].is_unit() {
                return Err(Error::InvalidValue(format!("unit parts at i={} must be units", i + 1)));
            }
        }
        Ok(RaynaudParams { v_a, v_b, u_a, u_b })
    }

    /// Unit parts `1`, `v_b = 1 − v_a`.
    pub fn from_degrees(ctx: &Ctx, v_a: &[Ratio<i64>]) -> Result<Self> {
        let one = Ratio::from_integer(1);
        let units = vec![RingElem::one(ctx); v_a.len()];
        Self::new(v_a.to_vec(), v_a.iter().map(|&a| one - a).collect(), units.clone(), units)
    }

    pub fn f(&self) -> usize {
        self.v_a.len()
    }

    /// Parameters of the dual group: `(b_i, a_i)`.
    pub fn dual(&self) -> Self {
        RaynaudParams { v_a: self.v_b.clone(), v_b: self.v_a.clone(), u_a: self.u_b.clone(), u_b: self.u_a.clone() }
    }
}

/// The rank-one crystal of a Raynaud group: `V_i` has valuation
/// `p·v(b_{i−1})`, `F_i` has valuation `p·v(a_{i−1})`, both clamped at 1.
/// Not a p-divisible datum, so it is not validated as one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RaynaudCrystal {
    pub v: Vec<RingElem>,
    pub frob: Vec<RingElem>,
}

pub fn raynaud_crystal(ctx: &Ctx, params: &RaynaudParams) -> Result<RaynaudCrystal> {
    let f = params.f();
    if f != ctx.f() as usize {
        return Err(Error::Dimension(format!("{f} parameters for f={}", ctx.f())));
    }
    let p = Ratio::from_integer(ctx.p() as i64);
    let generator = |val: Ratio<i64>, unit: &RingElem| -> Result<RingElem> {
        ctx.digits_of(val)?;
        let scaled = p * val;
        if scaled >= Ratio::from_integer(1) {
            return Ok(RingElem::zero(ctx));
        }
        Ok(&RingElem::uniformizer_pow(ctx, ctx.digits_of(scaled)?) * unit)
    };
    let mut v = Vec::with_capacity(f);
    let mut frob = Vec::with_capacity(f);
    for i in 0..f {
        let pi = (i + f - 1) % f;
        v.push(generator(params.v_b[pi], &params.u_b[pi])?);
        frob.push(generator(params.v_a[pi], &params.u_a[pi])?);
    }
    Ok(RaynaudCrystal { v, frob })
}

/// The crystal of a quotient `E_i ↠ E_{C,i}` of a datum, with its induced
/// Frobenius and Verschiebung and the partial codegrees `deg_i C^D`.
#[derive(Clone, Debug)]
pub struct QuotientCrystal {
    level: usize,
    rank: usize,
    proj: Vec<Matrix>,
    v: Vec<Matrix>,
    frob: Vec<Matrix>,
    kernels: Vec<Submodule>,
    /// `deg_i C^D` in digits.
    codegrees: Vec<u32>,
    /// `max(δ − d_i, 0)` in digits.
    floors: Vec<u32>,
    n: u32,
    p: u32,
}

impl QuotientCrystal {
    /// The filtration level `j` with `δ_j = rank`.
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn proj(&self) -> &[Matrix] {
        &self.proj
    }

    /// `V_{C,i}`.
    pub fn verschiebung(&self, i: usize) -> &Matrix {
        &self.v[i]
    }

    /// `F_{C,i}`.
    pub fn frobenius(&self, i: usize) -> &Matrix {
        &self.frob[i]
    }

    /// `wG_i = Ker π_i`.
    pub fn kernel(&self, i: usize) -> &Submodule {
        &self.kernels[i]
    }

    pub fn codegree_digits(&self, i: usize) -> u32 {
        self.codegrees[i]
    }

    pub fn codegree(&self, i: usize) -> Ratio<i64> {
        Ratio::new(self.codegrees[i] as i64, self.n as i64)
    }

    pub fn codegrees(&self) -> Vec<Ratio<i64>> {
        (0..self.codegrees.len()).map(|i| self.codegree(i)).collect()
    }

    /// `deg C^D − Σ_i max(δ − d_i, 0)`, in digits.
    pub fn alpha_digits(&self) -> u32 {
        self.codegrees.iter().zip(&self.floors).map(|(c, f)| c - f).sum()
    }

    pub fn alpha(&self) -> Ratio<i64> {
        Ratio::new(self.alpha_digits() as i64, self.n as i64)
    }

    /// `deg_i C^D − max(δ − d_i, 0)` in digits.
    pub fn excess_digits(&self, i: usize) -> u32 {
        self.codegrees[i] - self.floors[i]
    }

    pub fn is_canonical(&self) -> bool {
        self.alpha() < Ratio::new(1, 2)
    }

    pub fn is_strong_canonical(&self) -> bool {
        self.alpha() < Ratio::new(1, self.p as i64 + 1)
    }
}

/// `deg C^D < Σ max(δ − d_i, 0) + 1/2`, or `+ 1/(p+1)` when `strong`.
pub fn is_canonical(q: &QuotientCrystal, strong: bool) -> bool {
    if strong {
        q.is_strong_canonical()
    } else {
        q.is_canonical()
    }
}

/// A right inverse of a surjection with a unit maximal minor.
fn section_of(pi: &Matrix, i: usize) -> Result<Matrix> {
    let delta = pi.rows();
    let snf = smith(pi, PivotRule::First);
    if snf.sigma.len() != delta || snf.sigma.iter().any(|&c| c != 0) {
        return Err(Error::InvalidValue(format!("projection at i={} is not surjective", i + 1)));
    }
    Ok(&snf.w_inv.cols_range(0..delta) * &snf.u_inv)
}

/// Attaches the quotient `π_i : E_i ↠ R_N^δ` at level `j` and computes the
/// induced maps and codegrees.
///
/// For `δ ≤ d_i` the codegree is `v(det V_{C,i+1})/p`. For `δ > d_i` it is
/// `(δ − d_i) + v(det F_{i+1} : wG_i^{(p)} → wG_{i+1})/p`.
pub fn attach_quotient(module: &DieudonneModule, proj: &[Matrix], level: usize) -> Result<QuotientCrystal> {
    let ctx = module.ctx();
    let (f, h, n, p) = (module.f(), module.h(), ctx.n(), ctx.p());
    let profile = module.profile();
    if level == 0 || level > profile.r {
        return Err(Error::InvalidValue(format!("level {level} outside 1..={}", profile.r)));
    }
    let delta = profile.delta[level];
    if proj.len() != f || proj.iter().any(|m| (m.rows(), m.cols()) != (delta, h)) {
        return Err(Error::Dimension(format!("need {f} projections of shape {delta}x{h}")));
    }
    let proj: Vec<Matrix> = proj.iter().map(Matrix::lift).collect();
    let sections = proj.iter().enumerate().map(|(i, m)| section_of(m, i)).collect::<Result<Vec<_>>>()?;
    let mut v = Vec::with_capacity(f);
    let mut frob = Vec::with_capacity(f);
    for i in 0..f {
        let pp = module.prev(i);
        let lhs_v = &proj[pp].frobenius() * module.verschiebung(i);
        let vc = &lhs_v * &sections[i];
        if !(&lhs_v - &(&vc * &proj[i])).is_zero() {
            return Err(Error::InvalidValue(format!("projection does not commute with V at i={}", i + 1)));
        }
        let lhs_f = &proj[i] * module.frobenius(i);
        let fc = &lhs_f * &sections[pp].frobenius();
        if !(&lhs_f - &(&fc * &proj[pp].frobenius())).is_zero() {
            return Err(Error::InvalidValue(format!("projection does not commute with F at i={}", i + 1)));
        }
        v.push(vc);
        frob.push(fc);
    }
    let kernels =
        proj.iter().map(|m| Submodule::kernel_summand(m, h - delta, PivotRule::First)).collect::<Result<Vec<_>>>()?;

    let mut codegrees = Vec::with_capacity(f);
    let mut floors = Vec::with_capacity(f);
    for i in 0..f {
        let nx = module.next(i);
        let di = module.d()[i];
        let (det, floor) = if delta <= di {
            (v[nx].det()?, 0)
        } else {
            let m = &(&kernels[nx].coordinate_map() * module.frobenius(nx)) * &kernels[i].basis().frobenius();
            (m.det()?, (delta - di) as u32 * n)
        };
        let Some(val) = det.val_digits().filter(|&x| x < n) else {
            return Err(Error::Precision(format!("codegree determinant at i={} vanishes at precision {n}", i + 1)));
        };
        if val % p != 0 {
            return Err(Error::NotRepresentable(format!(
                "codegree determinant at i={} has valuation {val}/{n}, not divisible by p={p}",
                i + 1
            )));
        }
        codegrees.push(floor + val / p);
        floors.push(floor);
    }
    Ok(QuotientCrystal { level, rank: delta, proj, v, frob, kernels, codegrees, floors, n, p })
}

/// `s^⌈x·N⌉` cutoff for `x = 1 − k·α`, at least 1 digit.
fn cutoff(q: &QuotientCrystal, k: u32) -> u32 {
    let a = q.alpha_digits() as u64 * k as u64;
    (q.n as u64).saturating_sub(a).max(1) as u32
}

/// Degree theorem for a strong canonical quotient at level `j`:
/// `deg_i C^D = max(δ_j − d_i, 0) + w_i^[j]` modulo `m_{1−2α}`, the
/// weighted codegree sum at `j = s(i)`, freeness of the Hodge images modulo
/// `m_{1−α}`, and `F^[j]` against `Ker π` modulo `m_{1−2α}`.
pub fn check_degree_theorem(
    module: &DieudonneModule,
    af: &AdequateFiltration,
    q: &QuotientCrystal,
) -> ValidationReport {
    match compute_invariants(module, af) {
        Ok(report) => check_degree_theorem_with(module, af, &report, q),
        Err(e) => {
            let mut out = ValidationReport::new();
            out.fail("invariant report", e.to_string());
            out
        }
    }
}

pub fn check_degree_theorem_with(
    module: &DieudonneModule,
    af: &AdequateFiltration,
    report: &InvariantReport,
    q: &QuotientCrystal,
) -> ValidationReport {
    let mut out = ValidationReport::new();
    let (f, h, n, p) = (module.f(), module.h(), q.n, q.p);
    let j = q.level;
    let delta = q.rank;
    out.push("strong canonical", q.is_strong_canonical(), format!("alpha = {}", q.alpha()));
    if !q.is_strong_canonical() {
        return out;
    }
    let k2 = cutoff(q, 2);
    let k1 = cutoff(q, 1);
    if k2 > af.ambiguity() {
        out.fail("working precision", format!("filtration known to {} digits, {k2} needed", af.ambiguity()));
    }
    let alpha = q.alpha_digits();
    let full = Submodule::full(module.ctx(), h);
    for i in 0..f {
        let s = report.profile.s[i];
        let di = module.d()[i];
        let eps = q.excess_digits(i);
        out.push(format!("excess within alpha at i={}", i + 1), eps <= alpha, format!("{eps} vs {alpha}"));
        let w = report.w(i, j);
        out.push(
            format!("degree theorem at i={}", i + 1),
            eps.min(k2) == w.min(k2),
            format!("deg - floor = {eps}/{n}, w = {w}/{n}, compared mod {k2}"),
        );

        if j == s {
            let mut sum: u64 = 0;
            let mut weight: u64 = 1;
            for t in 0..f {
                let idx = (i + f * t - t) % f;
                let d_idx = module.d()[idx];
                let floor = di.saturating_sub(d_idx) as u64 * n as u64;
                sum += weight * (q.codegrees[idx] as u64).saturating_sub(floor);
                weight *= p as u64;
            }
            let ha = report.ha_digits(i).map(|x| x as u64);
            out.push(
                format!("weighted codegree sum at i={}", i + 1),
                ha == Some(sum.min(n as u64)),
                format!("{sum}/{n} vs v(Ha) = {ha:?}"),
            );
        }

        let (image, rank) = if j <= s {
            (&q.proj[i] * &module.hodge_basis(i), delta)
        } else {
            let coords = Submodule::relative_coords(&full, module.hodge(i));
            match coords {
                Ok(c) => (&c * &q.kernels[i].basis(), h - delta),
                Err(e) => {
                    out.fail(format!("free Hodge image at i={}", i + 1), e.to_string());
                    continue;
                }
            }
        };
        let sigma = smith(&image, PivotRule::First).sigma;
        let free = sigma.iter().filter(|&&c| c < k1).count();
        out.push(
            format!("free Hodge image at i={}", i + 1),
            free == rank,
            format!("elementary divisors {sigma:?}, {rank} below {k1}"),
        );

        let piece = af.hodge_piece(i, j);
        let contained = if j <= s {
            q.kernels[i].contains_submodule_mod(piece, k2)
        } else {
            piece.contains_submodule_mod(&q.kernels[i], k2)
        };
        out.push(format!("filtration matches kernel at i={}", i + 1), contained, format!("modulo s^{k2}"));
    }
    out
}

/// Graded degrees of a full chain `C_1 ⊂ … ⊂ C_r`: `deg_i(C_k/C_{k−1})^D =
/// v(m_i^[k])` for `k ≤ s(i)` and `deg_i(C_{k+1}/C_k) = v(n_i^[k])` for
/// `k ≥ s(i)`, with `C_0 = 0`, `C_{r+1} = G[p]`.
pub fn check_graded_chain(
    module: &DieudonneModule,
    report: &InvariantReport,
    chain: &[QuotientCrystal],
) -> ValidationReport {
    let mut out = ValidationReport::new();
    let r = report.r();
    let n = report.n as u64;
    if chain.len() != r || chain.iter().enumerate().any(|(k, q)| q.level != k + 1) {
        out.fail("chain levels", format!("need quotients at levels 1..={r} in order"));
        return out;
    }
    for k in 1..r {
        let ok = (0..module.f()).all(|i| chain[k - 1].kernels[i].contains_submodule(&chain[k].kernels[i]));
        out.push(format!("C_{k} inside C_{}", k + 1), ok, "");
    }
    let delta = &report.profile.delta;
    for i in 0..module.f() {
        let s = report.profile.s[i];
        let top = (module.h() - module.d()[i]) as u64 * n;
        let codeg = |k: usize| -> u64 {
            match k {
                0 => 0,
                k if k == r + 1 => top,
                k => chain[k - 1].codegrees[i] as u64,
            }
        };
        for k in 1..=s.min(r) {
            let lhs = codeg(k).saturating_sub(codeg(k - 1));
            let rhs = report.m_digits(i, k).map(|x| x as u64);
            out.push(
                format!("graded codegree (i={}, k={k})", i + 1),
                rhs.is_some_and(|x| x.min(n) == lhs.min(n)),
                format!("{lhs}/{n} vs v(m) = {rhs:?}"),
            );
        }
        for k in s.max(1)..=r {
            let width = (delta[k + 1] - delta[k]) as u64 * n;
            let lhs = width.saturating_sub(codeg(k + 1).saturating_sub(codeg(k)));
            let rhs = report.n_digits(i, k).map(|x| x as u64);
            out.push(
                format!("graded degree (i={}, k={k})", i + 1),
                rhs.is_some_and(|x| x.min(n) == lhs.min(n)),
                format!("{lhs}/{n} vs v(n) = {rhs:?}"),
            );
        }
    }
    out
}

/// Projections onto the first `δ_j` coordinates.
pub fn split_quotient(module: &DieudonneModule, level: usize) -> Result<Vec<Matrix>> {
    let profile = module.profile();
    if level == 0 || level > profile.r {
        return Err(Error::InvalidValue(format!("level {level} outside 1..={}", profile.r)));
    }
    let rows = Matrix::identity(module.ctx(), module.h()).rows_range(0..profile.delta[level]);
    Ok(vec![rows; module.f()])
}

/// `E_i ↠ E_i/wF_i^[j]`.
pub fn tautological_quotient(af: &AdequateFiltration, level: usize) -> Result<Vec<Matrix>> {
    let f = af.profile().f();
    if level == 0 || level > af.profile().r {
        return Err(Error::InvalidValue(format!("level {level} outside 1..={}", af.profile().r)));
    }
    (0..f)
        .map(|i| {
            let w = af.conj_piece(i, level);
            Submodule::relative_coords(&Submodule::full(w.ctx(), w.ambient_rank()), w)
        })
        .collect()
}

/// Transports projections along a gauge twist `E_i ↦ g_i E_i`: `π_i·g_i^{-1}`.
pub fn gauge_quotient(proj: &[Matrix], g: &[Matrix]) -> Result<Vec<Matrix>> {
    if proj.len() != g.len() {
        return Err(Error::Dimension("one gauge matrix per projection".into()));
    }
    proj.iter().zip(g).map(|(pi, gi)| Ok(pi * &gi.inverse()?)).collect()
}

/// Direct sum of rank-2 Hasse blocks with parameters `c[b]`, and the
/// projection onto the second coordinate of every block. The quotient is a
/// sum of rank-one crystals with `V_{C,i} = φ(c_{i−1})` and `F_C = 0`.
pub fn hasse_chain(ctx: &Ctx, blocks: &[Vec<RingElem>]) -> Result<(DieudonneModule, Vec<Matrix>)> {
    let Some((first, rest)) = blocks.split_first() else {
        return Err(Error::InvalidValue("need at least one block".into()));
    };
    let mut module = hasse_block(ctx, first)?;
    for c in rest {
        module = module.direct_sum(&hasse_block(ctx, c)?)?;
    }
    let h = module.h();
    let rows: Vec<usize> = (0..blocks.len()).map(|b| 2 * b + 1).collect();
    let pi = Matrix::identity(ctx, h).select_rows(&rows);
    let f = module.f();
    Ok((module, vec![pi; f]))
}

/// A two-level chain: a Hasse block `X` with parameters `c` plus the rank-one
/// split datum `Y` of type `(0, 1, …, 1)`, so `h = 3`, `d = (1, 2, …, 2)`.
/// Returns the datum and the projections for `C_1 = span(e_1, e_3)` and
/// `C_2 = span(e_1)`, as kernels. Needs `f ≥ 2`.
pub fn two_step_chain(ctx: &Ctx, c: &[RingElem]) -> Result<(DieudonneModule, [Vec<Matrix>; 2])> {
    let f = ctx.f() as usize;
    if f < 2 {
        return Err(Error::InvalidContext("the two-step chain needs f ≥ 2".into()));
    }
    let mut dy = vec![1; f];
    dy[0] = 0;
    let module = hasse_block(ctx, c)?.direct_sum(&mu_ordinary(ctx, 1, &dy)?)?;
    let id = Matrix::identity(ctx, 3);
    let c1 = id.select_rows(&[1]);
    let c2 = id.select_rows(&[1, 2]);
    Ok((module, [vec![c1; f], vec![c2; f]]))
}
