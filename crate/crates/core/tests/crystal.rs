use crystal_forge::crystal::{random_gauge, random_general_module, random_perturbed_module, CorpusParams};
use crystal_forge::exactring::Context;
use crystal_forge::filtration::{build_adequate, verify_adequate, AdequateFiltration, BuildOptions};
use crystal_forge::invariants::{compute_invariants, InvariantReport};
use crystal_forge::semilinear::{subsets, Matrix};
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn valuations(
    rep: &InvariantReport,
) -> (Vec<Vec<u32>>, Vec<Vec<Option<u32>>>, Vec<Vec<Option<u32>>>, Vec<Option<u32>>) {
    let f = rep.f();
    let r = rep.r();
    (
        rep.w_grid(),
        (0..f).map(|i| (1..=r).map(|j| rep.m_digits(i, j)).collect()).collect(),
        (0..f).map(|i| (1..=r).map(|j| rep.n_digits(i, j)).collect()).collect(),
        (0..f).map(|i| rep.ha_digits(i)).collect(),
    )
}

#[test]
fn report_valuations_are_gauge_invariant() {
    let params = CorpusParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6A);
    for item in params.corpus(0x6A06E, 50).unwrap() {
        let m = &item.module;
        let af = build_adequate(m, BuildOptions::default()).unwrap();
        let g = random_gauge(m.ctx(), m.h(), m.f(), &mut rng);
        let gm = m.gauge_twist(&g).unwrap();
        assert!(gm.is_valid());
        let moved: Vec<Vec<_>> = af
            .hodge_side()
            .iter()
            .zip(&g)
            .map(|(row, gi)| row.iter().map(|s| s.transform(gi, &gi.inverse().unwrap())).collect())
            .collect();
        let gaf = AdequateFiltration::from_hodge_side(&gm, moved).unwrap();
        assert!(verify_adequate(&gm, &gaf).all_passed(), "item {}", item.index);
        let rep = compute_invariants(m, &af).unwrap();
        let grep = compute_invariants(&gm, &gaf).unwrap();
        assert_eq!(valuations(&rep), valuations(&grep), "item {}", item.index);

        // A filtration built from scratch on the gauged datum gives the same
        // invariants when they are small enough to be determined.
        if rep.w_total_ratio() < Ratio::new(1, 2) {
            let built = build_adequate(&gm, BuildOptions::default()).unwrap();
            let brep = compute_invariants(&gm, &built).unwrap();
            assert_eq!(rep.w_grid(), brep.w_grid(), "item {}", item.index);
        }
    }
}

/// Minimum valuation of the maximal minors of `m` over row subsets.
fn min_row_minor(m: &Matrix) -> u32 {
    let n = m.ctx().n();
    subsets(m.rows(), m.cols())
        .iter()
        .map(|rows| m.select_rows(rows).det().unwrap().val_or_prec().min(n))
        .min()
        .unwrap_or(n)
}

/// `h_i^[j]` by enumerating bases: for `j ≤ s(i)`, the least valuation of
/// `det[F_S | wF^[j]]` over column subsets `S` of the Hodge basis; for
/// `j > s(i)`, the least maximal minor of `[F | wF^[j]]`.
fn brute_force_w(m: &crystal_forge::crystal::DieudonneModule, af: &AdequateFiltration, i: usize, j: usize) -> u32 {
    let n = m.ctx().n();
    let profile = m.profile();
    let hb = m.hodge_basis(i);
    let wb = af.conj_piece(i, j).basis();
    if j <= profile.s[i] {
        subsets(hb.cols(), profile.delta[j])
            .iter()
            .map(|cols| hb.select_cols(cols).hstack(&wb).unwrap().det().unwrap().val_or_prec().min(n))
            .min()
            .unwrap()
    } else {
        min_row_minor(&hb.hstack(&wb).unwrap())
    }
}

#[test]
fn refined_invariants_match_basis_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB5);
    for trial in 0..40 {
        let ctx = Context::new(3, 2, 24, None).unwrap();
        let m = if trial % 2 == 0 {
            random_perturbed_module(&ctx, 3, &[1, 2], &mut rng).unwrap()
        } else {
            random_general_module(&ctx, 3, &[1, 2], &mut rng).unwrap()
        };
        let af = build_adequate(&m, BuildOptions::default()).unwrap();
        let rep = compute_invariants(&m, &af).unwrap();
        for i in 0..2 {
            for j in 1..=2 {
                assert_eq!(rep.w(i, j).min(24), brute_force_w(&m, &af, i, j), "trial {trial} (i={i}, j={j})");
            }
        }
    }
}
