use num_rational::Ratio;

use crate::crystal::{DieudonneModule, FiltrationProfile};
use crate::error::{Error, Result};
use crate::exactring::RingElem;
use crate::report::ValidationReport;
use crate::semilinear::{smith, Matrix, PivotRule, Submodule};

/// Knobs for [`build_adequate`]. Different options may produce different
/// (equally adequate) filtrations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BuildOptions {
    /// Which embedding with `s(i) = j` starts the induction at level `j`,
    /// counted cyclically among the candidates.
    pub seed_shift: usize,
    /// Tie-breaking for pivots and for the coordinate dropped on an empty
    /// equation.
    pub pivot: PivotRule,
}

/// Adequate filtration pieces `F_i^[j]` and the induced conjugate pieces
/// `wF_i^[j]`, both indexed by `j ∈ 0..=r+1`.
///
/// Conventions: `F_i^[0] = F_i^[r+1] = F_i`, `F_i^[s(i)] = 0` (when
/// `1 ≤ s(i) ≤ r`), `wF_i^[0] = E_i`, `wF_i^[r+1] = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdequateFiltration {
    profile: FiltrationProfile,
    hodge_side: Vec<Vec<Submodule>>,
    conj_side: Vec<Vec<Submodule>>,
    ambiguity: u32,
}

impl AdequateFiltration {
    /// Wraps explicit pieces `F_i^[j]` (`j ∈ 0..=r+1`) and derives the
    /// conjugate side. Adequacy is not checked here; see [`verify_adequate`].
    pub fn from_hodge_side(module: &DieudonneModule, hodge_side: Vec<Vec<Submodule>>) -> Result<Self> {
        let profile = module.profile();
        let (f, r, h) = (module.f(), profile.r, module.h());
        if hodge_side.len() != f || hodge_side.iter().any(|row| row.len() != r + 2) {
            return Err(Error::Dimension(format!("filtration must have {f} rows of {} pieces", r + 2)));
        }
        if hodge_side.iter().flatten().any(|s| s.ambient_rank() != h) {
            return Err(Error::Dimension(format!("filtration pieces must live in rank {h}")));
        }
        let mut conj_side = Vec::with_capacity(f);
        for i in 0..f {
            let mut row = Vec::with_capacity(r + 2);
            for j in 0..=r + 1 {
                row.push(conjugate_piece(module, &profile, i, j, &hodge_side[module.prev(i)][j], PivotRule::First)?);
            }
            conj_side.push(row);
        }
        Ok(AdequateFiltration { profile, hodge_side, conj_side, ambiguity: module.ctx().n() })
    }

    pub(crate) fn with_ambiguity(mut self, ambiguity: u32) -> Self {
        self.ambiguity = ambiguity;
        self
    }

    pub fn profile(&self) -> &FiltrationProfile {
        &self.profile
    }

    /// `F_i^[j]`.
    pub fn hodge_piece(&self, i: usize, j: usize) -> &Submodule {
        &self.hodge_side[i][j]
    }

    /// `wF_i^[j]`.
    pub fn conj_piece(&self, i: usize, j: usize) -> &Submodule {
        &self.conj_side[i][j]
    }

    pub fn hodge_side(&self) -> &[Vec<Submodule>] {
        &self.hodge_side
    }

    /// Smallest `N − v(x)` over the pivots `x` used to strengthen cutting
    /// equations, in digits: the strengthened quotients are only determined
    /// modulo `s^ambiguity`. `N` when no division by a non-unit occurred.
    pub fn ambiguity(&self) -> u32 {
        self.ambiguity
    }

    /// True iff every `F_i^[j]` agrees with its counterpart modulo
    /// `s^⌈cutoff·N⌉`.
    pub fn compare_mod(&self, other: &AdequateFiltration, cutoff: Ratio<i64>) -> Result<bool> {
        if cutoff <= Ratio::from_integer(0) || cutoff > Ratio::from_integer(1) {
            return Err(Error::InvalidValue(format!("cutoff {cutoff} outside (0, 1]")));
        }
        if self.profile != other.profile {
            return Err(Error::Dimension("filtrations of different profiles".into()));
        }
        let Some(ctx) = self.hodge_side.first().and_then(|row| row.first()).map(|s| s.ctx().clone()) else {
            return Ok(true);
        };
        let k = ctx.ceil_digits(cutoff);
        for (row_a, row_b) in self.hodge_side.iter().zip(&other.hodge_side) {
            for j in 1..=self.profile.r {
                if !row_a[j].same_span_mod(&row_b[j], k) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// `wF_i^[j]` from `F_{i−1}^[j]`: the `V_i`-preimage of its twist when
/// `j ≤ s(i−1)`, the hull of its `F_i`-image otherwise.
fn conjugate_piece(
    module: &DieudonneModule,
    profile: &FiltrationProfile,
    i: usize,
    j: usize,
    prev_piece: &Submodule,
    rule: PivotRule,
) -> Result<Submodule> {
    let h = module.h();
    let r = profile.r;
    if j == 0 {
        return Ok(Submodule::full(module.ctx(), h));
    }
    if j == r + 1 {
        return Ok(Submodule::zero(module.ctx(), h));
    }
    let target = h - profile.delta[j];
    let sp = profile.s[module.prev(i)];
    let twisted = prev_piece.frobenius();
    let piece = if j <= sp {
        let m = &twisted.quotient_map() * module.verschiebung(i);
        Submodule::kernel_summand(&m, target, rule)
    } else {
        let m = module.frobenius(i) * &twisted.basis();
        Submodule::image_hull(&m, target, rule)
    };
    piece.map_err(|e| Error::Precision(format!("conjugate piece at (i={}, j={j}): {e}", i + 1)))
}

/// Builds an adequate filtration by induction on `j`, propagating from a
/// seed embedding with `s(i) = j` around the cycle.
pub fn build_adequate(module: &DieudonneModule, opts: BuildOptions) -> Result<AdequateFiltration> {
    let profile = module.profile();
    let ctx = module.ctx();
    let (f, r, h) = (module.f(), profile.r, module.h());
    let zero = Submodule::zero(ctx, h);
    let mut hodge_side: Vec<Vec<Submodule>> = (0..f)
        .map(|i| {
            let mut row = vec![zero.clone(); r + 2];
            row[0] = module.hodge(i).clone();
            row[r + 1] = module.hodge(i).clone();
            row
        })
        .collect();
    let mut conj_side: Vec<Vec<Submodule>> = (0..f)
        .map(|_| {
            let mut row = vec![zero.clone(); r + 2];
            row[0] = Submodule::full(ctx, h);
            row
        })
        .collect();
    let mut ambiguity = ctx.n();

    for j in 1..=r {
        let seeds = profile.seeds(j);
        let start = seeds[opts.seed_shift % seeds.len()];
        for step in 1..f {
            let i = (start + step) % f;
            let prev = module.prev(i);
            let wf = conjugate_piece(module, &profile, i, j, &hodge_side[prev][j], opts.pivot)?;
            conj_side[i][j] = wf;
            let s = profile.s[i];
            if s == j {
                continue;
            }
            let piece = if j < s {
                let (piece, amb) = carve(module, &profile, i, j, &hodge_side[i], &conj_side[i], opts.pivot)?;
                ambiguity = ambiguity.min(amb);
                piece
            } else {
                hull(module, &profile, i, j, &hodge_side[i], &conj_side[i][j], opts.pivot)?
            };
            hodge_side[i][j] = piece;
        }
        let prev = module.prev(start);
        conj_side[start][j] = conjugate_piece(module, &profile, start, j, &hodge_side[prev][j], opts.pivot)?;
    }

    Ok(AdequateFiltration { profile, hodge_side, conj_side, ambiguity })
}

/// `j < s(i)`: a rank `d_i − δ_j` summand of `F_i^[j−1] ∩ wF_i^[j]`, cut out
/// by strengthening each equation at a coordinate of minimal valuation.
fn carve(
    module: &DieudonneModule,
    profile: &FiltrationProfile,
    i: usize,
    j: usize,
    hodge_row: &[Submodule],
    conj_row: &[Submodule],
    rule: PivotRule,
) -> Result<(Submodule, u32)> {
    let ctx = module.ctx();
    let n = ctx.n();
    let outer = &hodge_row[j - 1];
    let basis = outer.basis();
    let eqs = &Submodule::relative_coords(&conj_row[j - 1], &conj_row[j])
        .map_err(|e| Error::Precision(format!("carving at (i={}, j={j}): {e}", i + 1)))?
        * &basis;
    let mut coeffs = Matrix::identity(ctx, basis.cols());
    let mut ambiguity = n;
    for e in 0..eqs.rows() {
        let row = &eqs.select_rows(&[e]) * &coeffs;
        let cur = coeffs.cols();
        let vals: Vec<u32> = (0..cur).map(|k| row[(0, k)].val_or_prec()).collect();
        let min = vals.iter().copied().min().unwrap_or(n);
        if cur == 0 {
            break;
        }
        let l = if min >= n {
            match rule {
                PivotRule::First => 0,
                PivotRule::Last => cur - 1,
            }
        } else {
            let mut hits = (0..cur).filter(|&k| vals[k] == min);
            match rule {
                PivotRule::First => hits.next(),
                PivotRule::Last => hits.next_back(),
            }
            .expect("a coordinate attains the minimum")
        };
        let keep: Vec<usize> = (0..cur).filter(|&k| k != l).collect();
        if min >= n {
            coeffs = coeffs.select_cols(&keep);
            continue;
        }
        ambiguity = ambiguity.min(n - min);
        let pivot = row[(0, l)].clone();
        let cl = coeffs.column(l);
        let mut next = Matrix::zero(ctx, coeffs.rows(), keep.len());
        for (t, &k) in keep.iter().enumerate() {
            let q: RingElem = row[(0, k)].divide_repr(&pivot)?;
            for rr in 0..coeffs.rows() {
                next[(rr, t)] = &coeffs[(rr, k)] - &(&q * &cl[(rr, 0)]);
            }
        }
        coeffs = next;
    }
    let expected = module.d()[i] - profile.delta[j];
    if coeffs.cols() != expected {
        return Err(Error::Precision(format!(
            "carving at (i={}, j={j}) left rank {}, expected {expected}",
            i + 1,
            coeffs.cols()
        )));
    }
    Ok((Submodule::from_basis(&(&basis * &coeffs))?, ambiguity))
}

/// `j > s(i)`: a rank `h + d_i − δ_j` summand of `G` containing `F_i` and
/// `wF_i^[j]`, with `G = F_i^[j−1]` or `E_i` when `j = s(i) + 1`.
fn hull(
    module: &DieudonneModule,
    profile: &FiltrationProfile,
    i: usize,
    j: usize,
    hodge_row: &[Submodule],
    conj: &Submodule,
    rule: PivotRule,
) -> Result<Submodule> {
    let h = module.h();
    let s = profile.s[i];
    let full = Submodule::full(module.ctx(), h);
    let outer = if j > s + 1 { &hodge_row[j - 1] } else { &full };
    let hodge = module.hodge(i);
    let wrap = |e: Error| Error::Precision(format!("hull at (i={}, j={j}): {e}", i + 1));
    let complement = Submodule::relative_basis(outer, hodge).map_err(wrap)?;
    let image = &Submodule::relative_coords(outer, hodge).map_err(wrap)? * &conj.basis();
    let target = h - profile.delta[j];
    let snf = smith(&image, rule);
    if snf.rank(module.ctx().n()) > target {
        return Err(wrap(Error::NotSummand("conjugate image too large".into())));
    }
    let extra = &complement * &snf.u.cols_range(0..target);
    Submodule::from_basis(&hodge.basis().hstack(&extra)?).map_err(wrap)
}

/// Checks ranks, summands, chain inclusions, adequacy and consistency of the
/// conjugate side, plus the induced stability under `V` and `F`.
pub fn verify_adequate(module: &DieudonneModule, af: &AdequateFiltration) -> ValidationReport {
    let mut report = ValidationReport::new();
    let profile = module.profile();
    if *af.profile() != profile {
        report.fail("profile", "filtration profile does not match the module type");
        return report;
    }
    let (f, r, h) = (module.f(), profile.r, module.h());
    let delta = &profile.delta;
    for i in 0..f {
        let s = profile.s[i];
        let di = module.d()[i];
        let at = |j: usize| format!("(i={}, j={j})", i + 1);
        let piece = |j: usize| af.hodge_piece(i, j);
        let conj = |j: usize| af.conj_piece(i, j);

        for j in 1..=r {
            let expected = match j.cmp(&s) {
                std::cmp::Ordering::Less => di - delta[j],
                std::cmp::Ordering::Greater => h + di - delta[j],
                std::cmp::Ordering::Equal => 0,
            };
            let p = piece(j);
            let is_summand = smith(&p.basis(), PivotRule::First).sigma.iter().all(|&c| c == 0);
            report.push(
                format!("rank and summand {}", at(j)),
                p.rank() == expected && is_summand,
                format!("rank {}, expected {expected}", p.rank()),
            );
        }

        // 0 ⊂ F^[s−1] ⊂ … ⊂ F^[1] ⊂ F and F ⊂ F^[r] ⊂ … ⊂ F^[s+1] ⊂ E.
        for j in 1..s.min(r + 1) {
            let ok = piece(j - 1).contains_submodule(piece(j));
            report.push(format!("chain F^[{j}] ⊂ F^[{}] {}", j - 1, at(j)), ok, "");
        }
        for j in (s + 1)..=r {
            let ok = piece(j).contains_submodule(module.hodge(i))
                && (j == s + 1 || piece(j - 1).contains_submodule(piece(j)));
            report.push(format!("chain F ⊂ F^[{j}] {}", at(j)), ok, "");
        }

        for j in 1..=r {
            if j < s {
                let ok = conj(j).contains_submodule(piece(j));
                report.push(format!("adequacy F^[j] ⊂ wF^[j] {}", at(j)), ok, "");
            } else if j > s {
                let ok = piece(j).contains_submodule(conj(j));
                report.push(format!("adequacy wF^[j] ⊂ F^[j] {}", at(j)), ok, "");
            }
        }

        for j in 0..=r + 1 {
            let recomputed =
                conjugate_piece(module, &profile, i, j, af.hodge_piece(module.prev(i), j), PivotRule::First);
            let ok = match recomputed {
                Ok(w) => w.same_span(conj(j)) && conj(j).rank() == h - delta[j],
                Err(_) => false,
            };
            report.push(format!("conjugate piece consistent {}", at(j)), ok, "");
        }

        // Stability of the conjugate refinement under V_{i+1} and F_{i+1}.
        let nx = module.next(i);
        for j in 1..=r {
            if j < s {
                let image = module.verschiebung(nx) * &af.conj_piece(nx, j).basis();
                let ok = conj(j).frobenius().contains(&image);
                report.push(format!("V-stability {}", at(j)), ok, "");
            } else if j > s {
                let image = module.frobenius(nx) * &conj(j).basis().frobenius();
                let ok = af.conj_piece(nx, j).contains(&image);
                report.push(format!("F-stability {}", at(j)), ok, "");
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::mu_ordinary;
    use crate::exactring::Context;

    fn span(ctx: &crate::exactring::Ctx, h: usize, cols: &[usize]) -> Submodule {
        Submodule::from_basis(&Matrix::identity(ctx, h).select_cols(cols)).unwrap()
    }

    #[test]
    fn split_filtration_in_coordinates() {
        let ctx = Context::new(3, 2, 24, None).unwrap();
        let m = mu_ordinary(&ctx, 3, &[1, 2]).unwrap();
        let af = build_adequate(&m, BuildOptions::default()).unwrap();
        assert!(verify_adequate(&m, &af).all_passed(), "{}", verify_adequate(&m, &af));
        // F_1^[2] ⊇ F_1 + wF_1^[2] = span(e_1) + span(e_3).
        assert!(af.hodge_piece(0, 2).same_span(&span(&ctx, 3, &[0, 2])));
        assert!(af.hodge_piece(1, 1).same_span(&span(&ctx, 3, &[1])));
    }

    #[test]
    fn ordinary_case_is_trivial() {
        let ctx = Context::new(5, 3, 30, None).unwrap();
        let m = mu_ordinary(&ctx, 4, &[2, 2, 2]).unwrap();
        let af = build_adequate(&m, BuildOptions::default()).unwrap();
        assert_eq!(af.profile().r, 1);
        for i in 0..3 {
            assert_eq!(af.hodge_piece(i, 1).rank(), 0);
        }
        assert!(verify_adequate(&m, &af).all_passed());
    }

    #[test]
    fn broken_inclusion_is_reported() {
        let ctx = Context::new(3, 2, 12, None).unwrap();
        let m = mu_ordinary(&ctx, 3, &[1, 2]).unwrap();
        let af = build_adequate(&m, BuildOptions::default()).unwrap();
        let mut side = af.hodge_side().to_vec();
        side[1][1] = span(&ctx, 3, &[0]);
        let broken = AdequateFiltration::from_hodge_side(&m, side).unwrap();
        let report = verify_adequate(&m, &broken);
        assert!(!report.all_passed());
        assert!(report.failures().any(|c| c.name.contains("(i=2, j=1)")));
        assert!(!af.compare_mod(&broken, Ratio::from_integer(1)).unwrap());
        assert!(af.compare_mod(&af, Ratio::new(1, 3)).unwrap());
        assert!(af.compare_mod(&af, Ratio::from_integer(0)).is_err());
    }
}
