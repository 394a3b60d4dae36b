use crystal_forge::crystal::{random_matrix, CorpusParams};
use crystal_forge::filtration::{build_adequate, BuildOptions};
use crystal_forge::invariants::{
    check_conjugate_power, check_factorization, check_link, compute_invariants, f_map_adapted,
};
use crystal_forge::semilinear::exterior_power;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn sections_satisfy_link_factorization_and_conjugate_power() {
    let params = CorpusParams::default();
    for item in params.corpus(0x1A7, 60).unwrap() {
        let m = &item.module;
        let af = build_adequate(m, BuildOptions::default()).unwrap();
        let rep = compute_invariants(m, &af).unwrap_or_else(|e| panic!("item {}: {e}", item.index));
        for (name, check) in [
            ("link", check_link(m, &rep)),
            ("factorization", check_factorization(&rep)),
            ("conjugate power", check_conjugate_power(m, &af, &rep)),
        ] {
            assert!(check.all_passed(), "item {} {name}:\n{check}", item.index);
        }
    }
}

#[test]
fn adapted_wedge_map_is_well_defined() {
    let params = CorpusParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for item in params.corpus(0xAD, 40).unwrap() {
        let m = &item.module;
        let ctx = m.ctx();
        let h = m.h();
        for i in 0..m.f() {
            let dp = m.d()[m.prev(i)];
            let base = f_map_adapted(m, i, dp, None).unwrap();
            assert_eq!(base, exterior_power(m.verschiebung(i), dp).unwrap(), "item {}", item.index);
            let shift = random_matrix(ctx, dp, h - dp, &mut rng, 0);
            for d in dp..=h {
                let a = f_map_adapted(m, i, d, None).unwrap();
                let b = f_map_adapted(m, i, d, Some(&shift)).unwrap();
                assert_eq!(a, b, "item {} i={i} d={d}", item.index);
            }
        }
    }
}
