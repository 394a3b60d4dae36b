use crystal_forge::canonical::{
    attach_quotient, check_degree_theorem, check_graded_chain, gauge_quotient, hasse_chain, raynaud_crystal,
    split_quotient, tautological_quotient, two_step_chain, RaynaudParams,
};
use crystal_forge::crystal::{mu_ordinary, random_gauge, CorpusParams};
use crystal_forge::exactring::{Context, RingElem};
use crystal_forge::filtration::{build_adequate, BuildOptions};
use crystal_forge::invariants::compute_invariants;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn gauged_split_quotients_satisfy_degree_theorem() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (p, f, h, d) in [(3, 2, 3, vec![1, 2]), (3, 3, 4, vec![1, 2, 4]), (5, 2, 2, vec![1, 1]), (2, 2, 4, vec![3, 1])]
    {
        let ctx = Context::new(p, f, 24, None).unwrap();
        let m = mu_ordinary(&ctx, h, &d).unwrap();
        let g = random_gauge(&ctx, h, f as usize, &mut rng);
        let gm = m.gauge_twist(&g).unwrap();
        let af = build_adequate(&gm, BuildOptions::default()).unwrap();
        for level in 1..=m.profile().r {
            let pi = gauge_quotient(&split_quotient(&m, level).unwrap(), &g).unwrap();
            let q = attach_quotient(&gm, &pi, level).unwrap();
            assert_eq!(q.alpha_digits(), 0);
            let check = check_degree_theorem(&gm, &af, &q);
            assert!(check.all_passed(), "type {d:?} level {level}:\n{check}");
        }
    }
}

#[test]
fn hasse_chains_match_rank_one_crystals_and_degree_theorem() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (p, n) = (3u32, 40u32);
    // alpha ≤ 1/(p+2) = 8 digits.
    for trial in 0..30 {
        let f = 1 + trial % 3;
        let ctx = Context::new(p, f as u32, n, None).unwrap();
        let blocks = 1 + trial % 2;
        let mut budget = 8u32;
        let mut vals = Vec::new();
        for _ in 0..blocks * f {
            let v = rng.gen_range(0..=budget.min(4));
            budget -= v;
            vals.push(v);
        }
        let params: Vec<Vec<RingElem>> =
            vals.chunks(f).map(|c| c.iter().map(|&v| RingElem::uniformizer_pow(&ctx, v)).collect()).collect();
        let (m, pi) = hasse_chain(&ctx, &params).unwrap();
        let g = random_gauge(&ctx, m.h(), f, &mut rng);
        let gm = m.gauge_twist(&g).unwrap();
        let pi = gauge_quotient(&pi, &g).unwrap();
        let q = attach_quotient(&gm, &pi, 1).unwrap();
        assert!(q.alpha() <= Ratio::new(1, p as i64 + 2));

        if blocks == 1 {
            let v_b: Vec<Ratio<i64>> = vals.iter().map(|&v| Ratio::new(v as i64, n as i64)).collect();
            let v_a: Vec<Ratio<i64>> = v_b.iter().map(|&b| Ratio::from_integer(1) - b).collect();
            let rc = raynaud_crystal(&ctx, &RaynaudParams::from_degrees(&ctx, &v_a).unwrap()).unwrap();
            for i in 0..f {
                assert_eq!(q.verschiebung(i)[(0, 0)].val_or_prec(), rc.v[i].val_or_prec(), "trial {trial}");
                assert_eq!(q.frobenius(i)[(0, 0)].val_or_prec(), rc.frob[i].val_or_prec(), "trial {trial}");
            }
        }
        let af = build_adequate(&gm, BuildOptions::default()).unwrap();
        let check = check_degree_theorem(&gm, &af, &q);
        assert!(check.all_passed(), "trial {trial}:\n{check}");
    }
}

#[test]
fn two_step_chain_graded_degrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ctx = Context::new(3, 2, 40, None).unwrap();
    for (a, b) in [(0, 0), (1, 2), (3, 5), (4, 0)] {
        let c = vec![RingElem::uniformizer_pow(&ctx, a), RingElem::uniformizer_pow(&ctx, b)];
        let (m, [p1, p2]) = two_step_chain(&ctx, &c).unwrap();
        let g = random_gauge(&ctx, 3, 2, &mut rng);
        let gm = m.gauge_twist(&g).unwrap();
        let af = build_adequate(&gm, BuildOptions::default()).unwrap();
        let report = compute_invariants(&gm, &af).unwrap();
        let q1 = attach_quotient(&gm, &gauge_quotient(&p1, &g).unwrap(), 1).unwrap();
        let q2 = attach_quotient(&gm, &gauge_quotient(&p2, &g).unwrap(), 2).unwrap();
        for q in [&q1, &q2] {
            let check = check_degree_theorem(&gm, &af, q);
            assert!(check.all_passed(), "c = ({a}, {b}) level {}:\n{check}", q.level());
        }
        let graded = check_graded_chain(&gm, &report, &[q1, q2]);
        assert!(graded.all_passed(), "c = ({a}, {b}):\n{graded}");
    }
}

#[test]
fn tautological_quotients_commute() {
    for item in CorpusParams::default().corpus(0x7A, 30).unwrap() {
        let m = &item.module;
        let af = build_adequate(m, BuildOptions::default()).unwrap();
        for level in 1..=m.profile().r {
            let pi = tautological_quotient(&af, level).unwrap();
            match attach_quotient(m, &pi, level) {
                Ok(q) => {
                    let report = compute_invariants(m, &af).unwrap();
                    for i in 0..m.f() {
                        assert_eq!(q.excess_digits(i), report.w(i, level), "item {}", item.index);
                    }
                }
                Err(e) => {
                    let msg = e.to_string();
                    assert!(!msg.contains("commute") && !msg.contains("surjective"), "item {}: {msg}", item.index);
                }
            }
        }
    }
}
