//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use crystal_forge::canonical::{
    attach_quotient, check_degree_theorem_with, check_graded_chain, gauge_quotient, hasse_chain, split_quotient,
    two_step_chain,
};
use crystal_forge::crystal::{
    mu_ordinary, random_gauge, random_matrix, supersingular_line, CorpusItem, CorpusParams, DieudonneModule,
};
use crystal_forge::duality::{check_bundle, dualize, transversal_sections, DualityBundle};
use crystal_forge::exactring::{Context, Ctx, RingElem};
use crystal_forge::filtration::{build_adequate, AdequateFiltration, BuildOptions};
use crystal_forge::invariants::{
    check_conjugate_power, check_factorization, check_link, check_uniqueness, f_map_adapted,
};
use crystal_forge::report::ValidationReport;
use crystal_forge::semilinear::{exterior_power, smith, Matrix, PivotRule, Submodule};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORPUS_SEED: u64 = 0xC0FFEE;
const CORPUS_SIZE: usize = 100;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome { passed, detail: detail.into() }
    }
}

/// Tally of instances passing a per-instance check, with the first failure kept.
#[derive(Default)]
struct Tally {
    passed: usize,
    total: usize,
    first_failure: Option<String>,
}

impl Tally {
    fn record(&mut self, label: impl std::fmt::Display, report: &ValidationReport) {
        self.total += 1;
        if report.all_passed() {
            self.passed += 1;
        } else if self.first_failure.is_none() {
            self.first_failure = Some(format!("{label}: {}", report.failure_summary()));
        }
    }

    fn record_bool(&mut self, label: impl std::fmt::Display, ok: bool, detail: impl std::fmt::Display) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else if self.first_failure.is_none() {
            self.first_failure = Some(format!("{label}: {detail}"));
        }
    }

    fn ok(&self) -> bool {
        self.passed == self.total
    }

    fn summary(&self, what: &str) -> String {
        match &self.first_failure {
            None => format!("{what} {}/{}", self.passed, self.total),
            Some(f) => format!("{what} {}/{}; first failure {f}", self.passed, self.total),
        }
    }
}

fn build(m: &DieudonneModule) -> AdequateFiltration {
    build_adequate(m, BuildOptions::default()).expect("adequate filtration")
}

fn mu_ordinary_baseline() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (p, f, h, d) in [(3, 2, 3, vec![1, 2]), (3, 3, 4, vec![1, 2, 4]), (5, 2, 2, vec![1, 1])] {
        let ctx = Context::new(p, f, 24, None).unwrap();
        let m = mu_ordinary(&ctx, h, &d).unwrap();
        let rep = dualize(&m, &build(&m)).unwrap().report;
        let w_zero = rep.w_grid().iter().flatten().all(|&w| w == 0);
        let ha_zero = (0..m.f()).all(|i| rep.ha_digits(i) == Some(0));
        ok &= w_zero && ha_zero;
        lines.push(format!("(p={p}, f={f}, h={h}, d={d:?}) w=0:{w_zero} v(Ha)=0:{ha_zero}"));
    }
    Outcome::new(ok, lines.join("; "))
}

/// The f = 1, h = 2 datum whose Hodge line is moved by a parameter `c`. The
/// oracle for `v(ha)` is the valuation of `c` itself.
fn classical_case() -> Outcome {
    let mut tally = Tally::default();
    for p in [2u32, 3, 5] {
        let n = 4 * p * p;
        let ctx = Context::new(p, 1, n, None).unwrap();
        for k in [1u32, 2] {
            let a = Ratio::new(k as i64, p as i64);
            let digits = k * n / p;
            // A unit multiple of s^digits with higher-order noise.
            let mut c = RingElem::uniformizer_pow(&ctx, digits);
            c = &c + &RingElem::uniformizer_pow(&ctx, digits + 1);
            let oracle = Ratio::new(c.val_or_prec() as i64, n as i64);
            let m = supersingular_line(&ctx, &c).unwrap();
            let bundle = dualize(&m, &build(&m)).unwrap();
            let ha = bundle.report.ha[0].as_ref().map(|s| s.ratio());
            let ha_dual = bundle.dual_report.ha[0].as_ref().map(|s| s.ratio());
            let label = format!("p={p} a={a}");
            tally.record_bool(&label, oracle == a && ha == Some(a), format!("v(ha) = {ha:?}"));
            tally.record_bool(&label, ha == ha_dual, format!("v(ha(G)) = {ha:?}, v(ha(G^D)) = {ha_dual:?}"));
        }
    }
    Outcome::new(tally.ok(), tally.summary("checks"))
}

/// The random corpus: gauge twists and Hodge perturbations, applied both to
/// split data and to data in general position. Perturbations alone never
/// leave the split locus, so the general half is what makes `w` non-zero.
fn corpus() -> Vec<CorpusItem> {
    CorpusParams::default().corpus(CORPUS_SEED, CORPUS_SIZE).expect("corpus")
}

struct Analysed {
    item: CorpusItem,
    af: AdequateFiltration,
    bundle: DualityBundle,
}

fn analyse(items: Vec<CorpusItem>) -> Vec<Analysed> {
    items
        .into_iter()
        .map(|item| {
            let af = build(&item.module);
            let bundle = dualize(&item.module, &af).expect("dual pipeline");
            Analysed { item, af, bundle }
        })
        .collect()
}

fn link_theorem(corpus: &[Analysed]) -> Outcome {
    let mut tally = Tally::default();
    let mut applicable = 0;
    let nontrivial = corpus.iter().filter(|a| a.bundle.report.w_total() > 0).count();
    for a in corpus {
        let check = check_link(&a.item.module, &a.bundle.report);
        applicable += check.len();
        tally.record(format!("item {}", a.item.index), &check);
    }
    Outcome::new(
        tally.ok() && applicable > 0 && nontrivial > 0,
        format!("{}; {applicable} embeddings checked; {nontrivial} instances with w > 0", tally.summary("instances")),
    )
}

fn duality(corpus: &[Analysed]) -> Outcome {
    let mut tally = Tally::default();
    for a in corpus {
        let check = check_bundle(&a.item.module, &a.af, &a.bundle);
        tally.record(format!("item {}", a.item.index), &check);
    }
    Outcome::new(tally.ok(), tally.summary("instances"))
}

fn uniqueness(corpus: &[Analysed]) -> Outcome {
    let mut tally = Tally::default();
    for a in corpus {
        if let Some(check) = check_uniqueness(&a.item.module).expect("uniqueness builds") {
            tally.record(format!("item {}", a.item.index), &check);
        }
    }
    Outcome::new(tally.ok() && tally.total > 0, tally.summary("qualifying instances"))
}

fn graded_factorization(corpus: &[Analysed]) -> Outcome {
    let mut tally = Tally::default();
    for a in corpus {
        tally.record(format!("item {}", a.item.index), &check_factorization(&a.bundle.report));
    }
    Outcome::new(tally.ok(), tally.summary("instances"))
}

fn conjugate_power(corpus: &[Analysed]) -> Outcome {
    let mut tally = Tally::default();
    for a in corpus {
        let check = check_conjugate_power(&a.item.module, &a.af, &a.bundle.report);
        tally.record(format!("item {}", a.item.index), &check);
    }
    Outcome::new(tally.ok(), tally.summary("instances"))
}

fn degree_theorem() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xDE6);
    let mut tally = Tally::default();
    let mut codegree_sums = 0;
    let mut within_bound = true;
    let mut run = |label: String, m: &DieudonneModule, proj: &[Matrix], level: usize, tally: &mut Tally| {
        let af = build(m);
        let report = dualize(m, &af).unwrap().report;
        let q = attach_quotient(m, proj, level).expect("quotient crystal");
        let p = m.ctx().p() as i64;
        within_bound &= q.alpha() <= Ratio::new(1, p + 2);
        let check = check_degree_theorem_with(m, &af, &report, &q);
        codegree_sums += check.checks.iter().filter(|c| c.name.starts_with("weighted codegree sum")).count();
        tally.record(label, &check);
        (q, report)
    };

    // Split family: the μ-ordinary data under a random gauge, every level.
    for (p, f, h, d) in [(3, 2, 3, vec![1, 2]), (3, 3, 4, vec![1, 2, 4]), (5, 2, 2, vec![1, 1]), (2, 2, 4, vec![3, 1])]
    {
        let ctx = Context::new(p, f, 24, None).unwrap();
        let m = mu_ordinary(&ctx, h, &d).unwrap();
        let g = random_gauge(&ctx, h, f as usize, &mut rng);
        let gm = m.gauge_twist(&g).unwrap();
        for level in 1..=m.profile().r {
            let pi = gauge_quotient(&split_quotient(&m, level).unwrap(), &g).unwrap();
            run(format!("split d={d:?} level {level}"), &gm, &pi, level, &mut tally);
        }
    }

    // Raynaud chains: sums of Hasse blocks with total alpha at most 1/(p+2).
    for trial in 0..40 {
        let (p, n) = if trial % 2 == 0 { (3u32, 40u32) } else { (5, 35) };
        let bound = n / (p + 2);
        let f = 1 + trial % 3;
        let ctx = Context::new(p, f as u32, n, None).unwrap();
        let blocks = 1 + (trial / 3) % 2;
        let mut budget = bound;
        let vals: Vec<u32> = (0..blocks * f)
            .map(|_| {
                let v = rng.gen_range(0..=budget.min(5));
                budget -= v;
                v
            })
            .collect();
        let params: Vec<Vec<RingElem>> =
            vals.chunks(f).map(|c| c.iter().map(|&v| RingElem::uniformizer_pow(&ctx, v)).collect()).collect();
        let (m, pi) = hasse_chain(&ctx, &params).unwrap();
        let g = random_gauge(&ctx, m.h(), f, &mut rng);
        let gm = m.gauge_twist(&g).unwrap();
        let pi = gauge_quotient(&pi, &g).unwrap();
        run(format!("chain trial {trial} {vals:?}"), &gm, &pi, 1, &mut tally);
    }

    // Two-step chains: graded degrees against m and n.
    let ctx = Context::new(3, 2, 40, None).unwrap();
    let mut graded = Tally::default();
    for (a, b) in [(0, 0), (1, 2), (3, 4), (4, 0), (2, 6)] {
        let c = vec![RingElem::uniformizer_pow(&ctx, a), RingElem::uniformizer_pow(&ctx, b)];
        let (m, [p1, p2]) = two_step_chain(&ctx, &c).unwrap();
        let g = random_gauge(&ctx, 3, 2, &mut rng);
        let gm = m.gauge_twist(&g).unwrap();
        let (q1, report) =
            run(format!("two-step ({a},{b}) level 1"), &gm, &gauge_quotient(&p1, &g).unwrap(), 1, &mut tally);
        let (q2, _) = run(format!("two-step ({a},{b}) level 2"), &gm, &gauge_quotient(&p2, &g).unwrap(), 2, &mut tally);
        graded.record(format!("two-step ({a},{b})"), &check_graded_chain(&gm, &report, &[q1, q2]));
    }

    Outcome::new(
        tally.ok() && graded.ok() && within_bound && codegree_sums > 0,
        format!(
            "{}; {} weighted codegree sums; {}; alpha within 1/(p+2): {within_bound}",
            tally.summary("quotients"),
            codegree_sums,
            graded.summary("graded chains"),
        ),
    )
}

fn skewed_summand(ctx: &Ctx, h: usize, k: usize, rng: &mut ChaCha8Rng) -> Submodule {
    let t = rng.gen_range(0..ctx.n());
    let top = Matrix::identity(ctx, k);
    let bottom = random_matrix(ctx, h - k, k, rng, t);
    let b = Matrix::from_fn(ctx, h, k, |r, c| if r < k { top[(r, c)].clone() } else { bottom[(r - k, c)].clone() });
    let mut perm: Vec<usize> = (0..h).collect();
    for a in (1..h).rev() {
        perm.swap(a, rng.gen_range(0..=a));
    }
    Submodule::from_basis(&b.select_rows(&perm)).unwrap()
}

fn engine_lemmas() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE9);

    let mut sections = Tally::default();
    for trial in 0..200 {
        let p = [2, 3, 5][trial % 3];
        let ctx = Context::new(p, 1 + (trial % 2) as u32, 12, None).unwrap();
        let h = rng.gen_range(2..=5);
        let k = rng.gen_range(1..h);
        let b = skewed_summand(&ctx, h, k, &mut rng);
        let c = skewed_summand(&ctx, h, h - k, &mut rng);
        let (x, y) = transversal_sections(&b, &c).unwrap();
        sections.record_bool(format!("pair {trial}"), x.digits == y.digits, format!("{} vs {}", x.digits, y.digits));
    }

    let mut preimage = Tally::default();
    let params = CorpusParams::default();
    for idx in 0..50 {
        let item = params.item(0xF1, idx).unwrap();
        let m = &item.module;
        let (ctx, h) = (m.ctx(), m.h());
        let mut ok = true;
        for i in 0..m.f() {
            let dp = m.d()[m.prev(i)];
            let shift = random_matrix(ctx, dp, h - dp, &mut rng, 0);
            ok &= f_map_adapted(m, i, dp, None).unwrap() == exterior_power(m.verschiebung(i), dp).unwrap();
            for d in dp..=h {
                ok &= f_map_adapted(m, i, d, None).unwrap() == f_map_adapted(m, i, d, Some(&shift)).unwrap();
            }
        }
        preimage.record_bool(format!("instance {idx}"), ok, "wedge map depends on the preimage");
    }

    let mut snf = Tally::default();
    let mut functorial = Tally::default();
    for trial in 0..200 {
        let p = [2, 3, 5][trial % 3];
        let ctx = Context::new(p, 1 + (trial % 2) as u32, 8, None).unwrap();
        let (rows, cols) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
        let t = rng.gen_range(0..4);
        let m = random_matrix(&ctx, rows, cols, &mut rng, t);
        let rule = if trial % 2 == 0 { PivotRule::First } else { PivotRule::Last };
        let s = smith(&m, rule);
        let ok = &(&s.u * &s.sigma_matrix(rows, cols)) * &s.w == m
            && &s.u * &s.u_inv == Matrix::identity(&ctx, rows)
            && &s.w * &s.w_inv == Matrix::identity(&ctx, cols)
            && s.sigma.windows(2).all(|w| w[0] <= w[1]);
        snf.record_bool(format!("matrix {trial}"), ok, "U·Σ·W differs from the input");

        let n = rng.gen_range(1..=4);
        let a = random_matrix(&ctx, n, n, &mut rng, 0);
        let b = random_matrix(&ctx, n, n, &mut rng, 0);
        let d = rng.gen_range(0..=n);
        let lhs = exterior_power(&(&a * &b), d).unwrap();
        let rhs = &exterior_power(&a, d).unwrap() * &exterior_power(&b, d).unwrap();
        functorial.record_bool(format!("pair {trial} d={d}"), lhs == rhs, "∧(AB) ≠ ∧A·∧B");
    }

    let all = [&sections, &preimage, &snf, &functorial];
    Outcome::new(
        all.iter().all(|t| t.ok()),
        format!(
            "{}; {}; {}; {}",
            sections.summary("transversal pairs"),
            preimage.summary("preimage instances"),
            snf.summary("SNF round trips"),
            functorial.summary("functoriality pairs"),
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 mu-ordinary baseline", mu_ordinary_baseline()));
    results.push(("2 classical f=1 case", classical_case()));
    let corpus = analyse(corpus());
    results.push(("3 link theorem", link_theorem(&corpus)));
    results.push(("4 duality", duality(&corpus)));
    results.push(("5 uniqueness", uniqueness(&corpus)));
    results.push(("6 graded factorization", graded_factorization(&corpus)));
    results.push(("7 conjugate power", conjugate_power(&corpus)));
    results.push(("8 degree theorem", degree_theorem()));
    results.push(("9 engine lemmas", engine_lemmas()));

    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.1}s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
