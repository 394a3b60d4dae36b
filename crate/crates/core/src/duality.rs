use crate::crystal::DieudonneModule;
use crate::error::{Error, Result};
use crate::filtration::{verify_adequate, AdequateFiltration};
use crate::invariants::{compute_invariants, InvariantReport, Section};
use crate::report::ValidationReport;
use crate::semilinear::{Matrix, Submodule};

/// The datum of the dual: `V'_i = B_iᵀ`, `F'_i = A_iᵀ`, Hodge summand
/// `F_i^⊥` of rank `h − d_i`. Dualizing twice returns the input unchanged.
pub fn dual_module(module: &DieudonneModule) -> Result<DieudonneModule> {
    let f = module.f();
    let h = module.h();
    let d = module.d().iter().map(|&x| h - x).collect();
    let v = (0..f).map(|i| module.frobenius(i).transpose()).collect();
    let frob = (0..f).map(|i| module.verschiebung(i).transpose()).collect();
    let hodge = (0..f).map(|i| module.hodge(i).orthogonal_complement()).collect();
    DieudonneModule::from_parts(module.ctx(), d, v, frob, hodge)
}

/// `F'^[k] = (F^[r+1−k])^⊥` on the dual, with `F'^[s'(i)] = 0` and
/// `F'^[0] = F'^[r+1] = F_i^⊥`. The conjugate side is recomputed on the dual.
pub fn dual_filtration(module: &DieudonneModule, af: &AdequateFiltration) -> Result<AdequateFiltration> {
    let dual = dual_module(module)?;
    let profile = dual.profile();
    let (f, r, h) = (module.f(), profile.r, module.h());
    if r != af.profile().r {
        return Err(Error::Dimension("dual profile has a different length".into()));
    }
    let mut side = Vec::with_capacity(f);
    for i in 0..f {
        let s = profile.s[i];
        let row = (0..=r + 1)
            .map(|k| {
                if (1..=r).contains(&k) && k == s {
                    Submodule::zero(module.ctx(), h)
                } else {
                    af.hodge_piece(i, r + 1 - k).orthogonal_complement()
                }
            })
            .collect();
        side.push(row);
    }
    Ok(AdequateFiltration::from_hodge_side(&dual, side)?.with_ambiguity(af.ambiguity()))
}

/// Sections of `C → A/B` and `B → A/C` for summands `B`, `C` of
/// complementary ranks in `A = R_N^h`; their valuations always agree.
pub fn transversal_sections(b: &Submodule, c: &Submodule) -> Result<(Section, Section)> {
    let h = b.ambient_rank();
    if c.ambient_rank() != h || b.rank() + c.rank() != h {
        return Err(Error::Dimension(format!(
            "summands of ranks {} and {} are not complementary in rank {h}",
            b.rank(),
            c.rank()
        )));
    }
    let full = Submodule::full(b.ctx(), h);
    let x = section(&(&Submodule::relative_coords(&full, b)? * &c.basis()))?;
    let y = section(&(&Submodule::relative_coords(&full, c)? * &b.basis()))?;
    Ok((x, y))
}

fn section(m: &Matrix) -> Result<Section> {
    let value = m.det()?;
    let digits = value.val_or_prec();
    Ok(Section { value, digits })
}

/// The dual datum, its transported filtration and both invariant reports.
#[derive(Clone, Debug)]
pub struct DualityBundle {
    pub dual: DieudonneModule,
    pub dual_filtration: AdequateFiltration,
    pub report: InvariantReport,
    pub dual_report: InvariantReport,
}

pub fn dualize(module: &DieudonneModule, af: &AdequateFiltration) -> Result<DualityBundle> {
    let dual = dual_module(module)?;
    let dual_af = dual_filtration(module, af)?;
    Ok(DualityBundle {
        report: compute_invariants(module, af)?,
        dual_report: compute_invariants(&dual, &dual_af)?,
        dual,
        dual_filtration: dual_af,
    })
}

/// Valuation-level duality: reversed `w`-grids, `m ↔ n`, `v(Ha)` on both
/// sides, adequacy and conjugate transport on the dual, and the double dual.
pub fn check_duality(module: &DieudonneModule, af: &AdequateFiltration) -> ValidationReport {
    let mut out = ValidationReport::new();
    let bundle = match dualize(module, af) {
        Ok(b) => b,
        Err(e) => {
            out.fail("dual pipeline", e.to_string());
            return out;
        }
    };
    out.extend(check_bundle(module, af, &bundle));
    out
}

pub fn check_bundle(module: &DieudonneModule, af: &AdequateFiltration, bundle: &DualityBundle) -> ValidationReport {
    let mut out = ValidationReport::new();
    let dual = &bundle.dual;
    let (rep, drep) = (&bundle.report, &bundle.dual_report);
    let r = rep.r();

    let valid = dual.validate();
    out.push("dual datum is valid", valid.all_passed(), valid.failure_summary());
    let adequate = verify_adequate(dual, &bundle.dual_filtration);
    out.push("dual filtration is adequate", adequate.all_passed(), adequate.failure_summary());
    match dual_module(dual) {
        Ok(back) => out.push("double dual is the identity", &back == module, ""),
        Err(e) => out.fail("double dual is the identity", e.to_string()),
    }

    for i in 0..module.f() {
        let s = rep.profile.s[i];
        for j in 1..=r {
            let k = r + 1 - j;
            let conj_ok =
                bundle.dual_filtration.conj_piece(i, k).same_span(&af.conj_piece(i, j).orthogonal_complement());
            out.push(format!("conjugate transport (i={}, j={j})", i + 1), conj_ok, "");
            let (w, wd) = (rep.w(i, j), drep.w(i, k));
            out.push(format!("w reversal (i={}, j={j})", i + 1), w == wd, format!("{w} vs dual {wd}"));
            let mut pairs = Vec::new();
            if j <= s {
                pairs.push(("m/n", rep.m_digits(i, j), drep.n_digits(i, k)));
            }
            if j >= s {
                pairs.push(("n/m", rep.n_digits(i, j), drep.m_digits(i, k)));
            }
            for (label, a, b) in pairs {
                out.push(
                    format!("{label} duality (i={}, j={j})", i + 1),
                    a.is_some() && a == b,
                    format!("{a:?} vs dual {b:?}"),
                );
            }
        }
        if let (Some(a), Some(b)) = (rep.ha_digits(i), drep.ha_digits(i)) {
            out.push(format!("Hasse duality at i={}", i + 1), a == b, format!("{a} vs dual {b}"));
        }
    }
    out
}
