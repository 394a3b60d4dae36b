use std::fmt;

use num_rational::Ratio;

use crate::crystal::{DieudonneModule, FiltrationProfile};
use crate::error::{Error, Result};
use crate::exactring::{RingElem, Valuation};
use crate::filtration::{build_adequate, AdequateFiltration, BuildOptions};
use crate::report::ValidationReport;
use crate::semilinear::{exterior_power, smith, subsets, wedge_columns, Matrix, PivotRule, Submodule};

/// A trivialized section: the determinant in the stored bases and its
/// valuation in digit units (`N` when it vanishes).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub value: RingElem,
    pub digits: u32,
}

impl Section {
    fn of_matrix(m: &Matrix) -> Result<Self> {
        let value = m.det()?;
        let digits = value.val_or_prec();
        Ok(Section { value, digits })
    }

    pub fn valuation(&self) -> Valuation {
        Valuation::exact(self.digits, self.value.ctx().n())
    }

    pub fn ratio(&self) -> Ratio<i64> {
        self.valuation().ratio()
    }
}

/// Refined partial Hasse invariants, graded sections and μ-ordinary partial
/// Hasse invariants of one datum with one adequate filtration.
///
/// Grids are indexed `[i][j − 1]` for `j ∈ 1..=r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantReport {
    pub n: u32,
    pub profile: FiltrationProfile,
    /// `h_i^[j]`, for every `(i, j)`.
    pub h: Vec<Vec<Section>>,
    /// `m_i^[j]` for `j ≤ s(i)`.
    pub m: Vec<Vec<Option<Section>>>,
    /// `n_i^[j]` for `j ≥ s(i)`.
    pub n_sec: Vec<Vec<Option<Section>>>,
    /// `Ha_i` for `d_i ≠ 0`.
    pub ha: Vec<Option<Section>>,
    /// Digits of the filtration's strengthening ambiguity.
    pub ambiguity: u32,
}

impl InvariantReport {
    pub fn f(&self) -> usize {
        self.h.len()
    }

    pub fn r(&self) -> usize {
        self.profile.r
    }

    /// `w_i^[j]` in digits, `j ∈ 1..=r`.
    pub fn w(&self, i: usize, j: usize) -> u32 {
        self.h[i][j - 1].digits
    }

    pub fn w_ratio(&self, i: usize, j: usize) -> Ratio<i64> {
        Ratio::new(self.w(i, j) as i64, self.n as i64)
    }

    /// The grid of `w_i^[j]` in digits.
    pub fn w_grid(&self) -> Vec<Vec<u32>> {
        self.h.iter().map(|row| row.iter().map(|c| c.digits).collect()).collect()
    }

    /// `w = Σ_{i,j} w_i^[j]` in digits (not clamped).
    pub fn w_total(&self) -> u64 {
        self.h.iter().flatten().map(|c| c.digits as u64).sum()
    }

    pub fn w_total_ratio(&self) -> Ratio<i64> {
        Ratio::new(self.w_total() as i64, self.n as i64)
    }

    pub fn m_digits(&self, i: usize, j: usize) -> Option<u32> {
        self.m[i][j - 1].as_ref().map(|c| c.digits)
    }

    pub fn n_digits(&self, i: usize, j: usize) -> Option<u32> {
        self.n_sec[i][j - 1].as_ref().map(|c| c.digits)
    }

    pub fn ha_digits(&self, i: usize) -> Option<u32> {
        self.ha[i].as_ref().map(|c| c.digits)
    }

    /// Valuation of the total μ-ordinary Hasse invariant, clamped at 1.
    pub fn ha_total(&self) -> u32 {
        let sum: u64 = self.ha.iter().flatten().map(|c| c.digits as u64).sum();
        sum.min(self.n as u64) as u32
    }

    fn fmt_digits(&self, digits: u32) -> String {
        Valuation::exact(digits, self.n).to_string()
    }
}

impl fmt::Display for InvariantReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.r();
        write!(f, "{:>4}", "i")?;
        for j in 1..=r {
            write!(f, " {:>8}", format!("w[{j}]"))?;
        }
        writeln!(f, " {:>8}", "v(Ha)")?;
        for i in 0..self.f() {
            write!(f, "{:>4}", i + 1)?;
            for j in 1..=r {
                write!(f, " {:>8}", self.fmt_digits(self.w(i, j)))?;
            }
            let ha = self.ha_digits(i).map_or("-".to_string(), |d| self.fmt_digits(d));
            writeln!(f, " {:>8}", ha)?;
        }
        writeln!(f, "w = {}, v(Ha) = {}", self.w_total_ratio(), self.fmt_digits(self.ha_total()))
    }
}

/// Coordinates on `E/W` along the witness complement of `W`.
fn quotient_coords(w: &Submodule) -> Result<Matrix> {
    Submodule::relative_coords(&Submodule::full(w.ctx(), w.ambient_rank()), w)
}

/// `h_i^[j]`: the determinant of `F_i/F_i^[j] → E_i/wF_i^[j]` for
/// `j ≤ s(i)`, and of `wF_i^[j] → F_i^[j]/F_i` for `j > s(i)`.
pub fn refined_hasse(module: &DieudonneModule, af: &AdequateFiltration, i: usize, j: usize) -> Result<Section> {
    let s = af.profile().s[i];
    let hodge = module.hodge(i);
    let m = if j <= s {
        &quotient_coords(af.conj_piece(i, j))? * &Submodule::relative_basis(hodge, af.hodge_piece(i, j))?
    } else {
        &Submodule::relative_coords(af.hodge_piece(i, j), hodge)? * &af.conj_piece(i, j).basis()
    };
    Section::of_matrix(&m)
}

/// `m_i^[j]` (`j ≤ s(i)`): `F^[j−1]/F^[j] → wF^[j−1]/wF^[j]`.
pub fn graded_m(af: &AdequateFiltration, i: usize, j: usize) -> Result<Section> {
    let m = &Submodule::relative_coords(af.conj_piece(i, j - 1), af.conj_piece(i, j))?
        * &Submodule::relative_basis(af.hodge_piece(i, j - 1), af.hodge_piece(i, j))?;
    Section::of_matrix(&m)
}

/// `n_i^[j]` (`j ≥ s(i)`): `wF^[j]/wF^[j+1] → F^[j]/F^[j+1]`, with target
/// `E/F^[s+1]` when `j = s(i)`.
pub fn graded_n(af: &AdequateFiltration, i: usize, j: usize) -> Result<Section> {
    let s = af.profile().s[i];
    let source = Submodule::relative_basis(af.conj_piece(i, j), af.conj_piece(i, j + 1))?;
    let coords = if j == s {
        quotient_coords(af.hodge_piece(i, j + 1))?
    } else {
        Submodule::relative_coords(af.hodge_piece(i, j), af.hodge_piece(i, j + 1))?
    };
    Section::of_matrix(&(&coords * &source))
}

/// `f_i^d : ∧^d E_i → ∧^d E_{i−1}^{(p)}`, in the lexicographic wedge bases.
pub fn f_map(module: &DieudonneModule, i: usize, d: usize) -> Result<Matrix> {
    let dp = module.d()[module.prev(i)];
    if d > module.h() {
        return Err(Error::Dimension(format!("wedge degree {d} exceeds h = {}", module.h())));
    }
    if d <= dp {
        exterior_power(module.verschiebung(i), d)
    } else {
        f_map_adapted(module, i, d, None)
    }
}

/// `f_i^d` for `d ≥ d_{i−1}` through an adapted basis: `x_1 … x_{d_{i−1}}`
/// completing a basis `u` of `wF_i = Im F_i`, and preimages `y` with
/// `F_i y = u`. Wedges `x_A ∧ u_B` map to `V x_A ∧ y_B` when `A` is all of
/// `x`, and to `0` otherwise.
///
/// `shift` (a `d_{i−1} × (h − d_{i−1})` matrix) moves the preimages by
/// elements of `Ker F_i`; the result must not depend on it.
pub fn f_map_adapted(module: &DieudonneModule, i: usize, d: usize, shift: Option<&Matrix>) -> Result<Matrix> {
    let ctx = module.ctx();
    let h = module.h();
    let dp = module.d()[module.prev(i)];
    if d < dp || d > h {
        return Err(Error::Dimension(format!("adapted wedge map needs {dp} ≤ d ≤ {h}, got {d}")));
    }
    let k = h - dp;
    let snf = smith(module.frobenius(i), PivotRule::First);
    if snf.sigma.iter().take(k).any(|&c| c != 0) || snf.rank(ctx.n()) != k {
        return Err(Error::InvalidModule(format!("F at i={} is not of rank {k} with free image", i + 1)));
    }
    let mut y = snf.w_inv.cols_range(0..k);
    if let Some(shift) = shift {
        if (shift.rows(), shift.cols()) != (dp, k) {
            return Err(Error::Dimension(format!("preimage shift must be {dp}x{k}")));
        }
        y = &y + &(&snf.w_inv.cols_range(k..h) * shift);
    }
    let order: Vec<usize> = (k..h).chain(0..k).collect();
    let p_inv = snf.u_inv.select_rows(&order);
    let vx = module.verschiebung(i) * &snf.u.cols_range(k..h);

    let sets = subsets(h, d);
    let mut t = Matrix::zero(ctx, sets.len(), sets.len());
    for (col, set) in sets.iter().enumerate() {
        if set.len() < dp || set[..dp].iter().enumerate().any(|(a, &b)| a != b) {
            continue;
        }
        let ys: Vec<usize> = set[dp..].iter().map(|&idx| idx - dp).collect();
        let image = wedge_columns(&vx.hstack(&y.select_cols(&ys))?)?;
        for row in 0..sets.len() {
            t[(row, col)] = image[(row, 0)].clone();
        }
    }
    Ok(&t * &exterior_power(&p_inv, d)?)
}

/// `Ha_i`: the `f`-fold twisted composition of the wedge maps restricted to
/// `∧^{d_i} F_i`, as a multiple of `φ^f(∧^{d_i} F_i)`. `None` when `d_i = 0`.
pub fn mu_hasse(module: &DieudonneModule, i: usize) -> Result<Option<Section>> {
    let d = module.d()[i];
    if d == 0 {
        return Ok(None);
    }
    let f = module.f();
    let line = wedge_columns(&module.hodge_basis(i))?;
    let mut v = line.clone();
    for k in 0..f {
        let idx = (i + f * k - k) % f;
        let map = f_map(module, idx, d)?.frobenius_pow(k as u32);
        v = &map * &v;
    }
    let target = line.frobenius_pow(f as u32);
    let t = (0..target.rows())
        .find(|&r| target[(r, 0)].is_unit())
        .ok_or_else(|| Error::InvalidModule(format!("Hodge line at i={} has no unit coordinate", i + 1)))?;
    let lambda = &v[(t, 0)] * &target[(t, 0)].inverse()?;
    if target.scale(&lambda) != v {
        return Err(Error::InvalidModule(format!("twisted composition at i={} leaves the Hodge line", i + 1)));
    }
    let digits = lambda.val_or_prec();
    Ok(Some(Section { value: lambda, digits }))
}

/// All sections for one datum and adequate filtration.
pub fn compute_invariants(module: &DieudonneModule, af: &AdequateFiltration) -> Result<InvariantReport> {
    let profile = af.profile().clone();
    let (f, r) = (module.f(), profile.r);
    let mut h = Vec::with_capacity(f);
    let mut m = Vec::with_capacity(f);
    let mut n_sec = Vec::with_capacity(f);
    let mut ha = Vec::with_capacity(f);
    for i in 0..f {
        let s = profile.s[i];
        let at = |j: usize, e: Error| Error::Precision(format!("section at (i={}, j={j}): {e}", i + 1));
        h.push((1..=r).map(|j| refined_hasse(module, af, i, j).map_err(|e| at(j, e))).collect::<Result<Vec<_>>>()?);
        m.push(
            (1..=r)
                .map(|j| if j <= s { graded_m(af, i, j).map(Some).map_err(|e| at(j, e)) } else { Ok(None) })
                .collect::<Result<Vec<_>>>()?,
        );
        n_sec.push(
            (1..=r)
                .map(|j| if j >= s { graded_n(af, i, j).map(Some).map_err(|e| at(j, e)) } else { Ok(None) })
                .collect::<Result<Vec<_>>>()?,
        );
        ha.push(mu_hasse(module, i)?);
    }
    Ok(InvariantReport { n: module.ctx().n(), profile, h, m, n_sec, ha, ambiguity: af.ambiguity() })
}

/// `min(1, Σ_k p^k·w_{i−k}^[s(i)]) = v(Ha_i)` for every `i` with
/// `d_i ∉ {0, h}`.
pub fn check_link(module: &DieudonneModule, report: &InvariantReport) -> ValidationReport {
    let mut out = ValidationReport::new();
    let (f, n, p) = (module.f(), report.n as u64, module.ctx().p() as u64);
    for i in 0..f {
        let s = report.profile.s[i];
        if s == 0 || s > report.r() {
            continue;
        }
        let mut sum: u64 = 0;
        let mut weight: u64 = 1;
        for k in 0..f {
            let idx = (i + f * k - k) % f;
            sum = sum.saturating_add(weight.saturating_mul(report.w(idx, s) as u64));
            weight = weight.saturating_mul(p);
        }
        let lhs = sum.min(n);
        let rhs = report.ha_digits(i).map(|d| d as u64);
        out.push(
            format!("link at i={}", i + 1),
            rhs == Some(lhs),
            format!("Σ p^k w = {lhs}/{n}, v(Ha) = {:?}/{n}", rhs),
        );
    }
    out
}

/// `h = Π m` (`j ≤ s`) and `h = Π n` (`j > s`) at valuation level, clamped
/// at 1; also `v(h^[s]) = Σ_{k≥s} v(n^[k])`.
pub fn check_factorization(report: &InvariantReport) -> ValidationReport {
    let mut out = ValidationReport::new();
    let n = report.n as u64;
    let r = report.r();
    for i in 0..report.f() {
        let s = report.profile.s[i];
        for j in 1..=r {
            let sum: u64 = if j <= s {
                (1..=j).map(|k| report.m_digits(i, k).unwrap_or(0) as u64).sum()
            } else {
                (j..=r).map(|k| report.n_digits(i, k).unwrap_or(0) as u64).sum()
            };
            let w = report.w(i, j) as u64;
            out.push(
                format!("factorization (i={}, j={j})", i + 1),
                sum.min(n) == w,
                format!("sum {sum}/{n}, v(h) = {w}/{n}"),
            );
        }
        if (1..=r).contains(&s) {
            let sum: u64 = (s..=r).map(|k| report.n_digits(i, k).unwrap_or(0) as u64).sum();
            let w = report.w(i, s) as u64;
            out.push(format!("h^[s] via n (i={})", i + 1), sum.min(n) == w, format!("sum {sum}/{n}, v(h) = {w}/{n}"));
        }
    }
    out
}

/// Determinant of `V_{i+1} : E_{i+1}/wF_{i+1}^[j] → (E_i/wF_i^[j])^{(p)}`
/// (`j ≤ s(i)`) or `F_{i+1} : (wF_i^[j])^{(p)} → wF_{i+1}^[j]` (`j > s(i)`).
pub fn conjugate_power_section(
    module: &DieudonneModule,
    af: &AdequateFiltration,
    i: usize,
    j: usize,
) -> Result<Section> {
    let nx = module.next(i);
    let m = if j <= af.profile().s[i] {
        &(&quotient_coords(af.conj_piece(i, j))?.frobenius() * module.verschiebung(nx))
            * &Submodule::relative_basis(&Submodule::full(module.ctx(), module.h()), af.conj_piece(nx, j))?
    } else {
        &(&af.conj_piece(nx, j).coordinate_map() * module.frobenius(nx)) * &af.conj_piece(i, j).basis().frobenius()
    };
    Section::of_matrix(&m)
}

/// The conjugate side recovers `(h_i^[j])^p`: valuation `min(p·w, 1)`.
pub fn check_conjugate_power(
    module: &DieudonneModule,
    af: &AdequateFiltration,
    report: &InvariantReport,
) -> ValidationReport {
    let mut out = ValidationReport::new();
    let n = report.n as u64;
    let p = module.ctx().p() as u64;
    for i in 0..module.f() {
        for j in 1..=report.r() {
            let name = format!("conjugate power (i={}, j={j})", i + 1);
            match conjugate_power_section(module, af, i, j) {
                Ok(sec) => {
                    let expected = (p * report.w(i, j) as u64).min(n);
                    out.push(
                        name,
                        sec.digits as u64 == expected,
                        format!("{}/{n} vs p·w = {expected}/{n}", sec.digits),
                    );
                }
                Err(e) => out.fail(name, e.to_string()),
            }
        }
    }
    out
}

/// Builds the filtration twice, with the default options and with shifted
/// seeds plus the opposite pivot rule. When `w < 1/2` both builds must give
/// the same `w`-grid and agree modulo `m_{1−w}`. Returns `None` for
/// instances with `w ≥ 1/2`.
pub fn check_uniqueness(module: &DieudonneModule) -> Result<Option<ValidationReport>> {
    let first = build_adequate(module, BuildOptions::default())?;
    let report = compute_invariants(module, &first)?;
    let w = report.w_total_ratio();
    if w >= Ratio::new(1, 2) {
        return Ok(None);
    }
    let second = build_adequate(module, BuildOptions { seed_shift: 1, pivot: PivotRule::Last })?;
    let other = compute_invariants(module, &second)?;
    let mut out = ValidationReport::new();
    out.push(
        "w-grids agree",
        report.w_grid() == other.w_grid(),
        format!("{:?} vs {:?}", report.w_grid(), other.w_grid()),
    );
    let cutoff = Ratio::from_integer(1) - w;
    out.push("filtrations agree modulo m_{1-w}", first.compare_mod(&second, cutoff)?, format!("cutoff {cutoff}"));
    Ok(Some(out))
}
