use crystal_forge::crystal::{random_matrix, CorpusParams};
use crystal_forge::duality::{check_duality, transversal_sections};
use crystal_forge::exactring::{Context, Ctx};
use crystal_forge::filtration::{build_adequate, BuildOptions};
use crystal_forge::semilinear::{Matrix, Submodule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn corpus_satisfies_duality() {
    for item in CorpusParams::default().corpus(0xD0A1, 60).unwrap() {
        let af = build_adequate(&item.module, BuildOptions::default()).unwrap();
        let report = check_duality(&item.module, &af);
        assert!(report.all_passed(), "item {}:\n{report}", item.index);
    }
}

/// A summand of rank `k` whose basis is a random matrix with a unit top
/// block skewed by `s^t` below.
fn skewed_summand(ctx: &Ctx, h: usize, k: usize, rng: &mut ChaCha8Rng) -> Submodule {
    let t = rng.gen_range(0..ctx.n());
    let top = Matrix::identity(ctx, k);
    let bottom = random_matrix(ctx, h - k, k, rng, t);
    let b = Matrix::from_fn(ctx, h, k, |r, c| if r < k { top[(r, c)].clone() } else { bottom[(r - k, c)].clone() });
    let perm: Vec<usize> = {
        let mut p: Vec<usize> = (0..h).collect();
        for a in (1..h).rev() {
            p.swap(a, rng.gen_range(0..=a));
        }
        p
    };
    Submodule::from_basis(&b.select_rows(&perm)).unwrap()
}

#[test]
fn transversal_sections_have_equal_valuations() {
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    for trial in 0..200 {
        let p = [2, 3, 5][trial % 3];
        let ctx = Context::new(p, 1, 12, None).unwrap();
        let h = rng.gen_range(2..=5);
        let k = rng.gen_range(1..h);
        let b = skewed_summand(&ctx, h, k, &mut rng);
        let c = skewed_summand(&ctx, h, h - k, &mut rng);
        let (x, y) = transversal_sections(&b, &c).unwrap();
        assert_eq!(x.digits, y.digits, "trial {trial}");
    }
}
