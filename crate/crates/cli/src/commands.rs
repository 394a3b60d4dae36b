use std::fs;
use std::path::Path;

use anyhow::{bail, Context as _, Result};
use crystal_forge::canonical::{attach_quotient, check_degree_theorem, hasse_chain};
use crystal_forge::crystal::{
    mu_ordinary, random_gauge, random_general_module, random_perturbation, supersingular_line, CorpusParams,
    DieudonneModule,
};
use crystal_forge::duality::{check_bundle, dualize};
use crystal_forge::exactring::{Context, Ctx, RingElem};
use crystal_forge::filtration::{build_adequate, verify_adequate, AdequateFiltration, BuildOptions};
use crystal_forge::invariants::{
    check_conjugate_power, check_factorization, check_link, check_uniqueness, compute_invariants,
};
use crystal_forge::io;
use crystal_forge::report::ValidationReport;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::{BuildArgs, Command, CtxArgs, Format, OutArgs, Recipe};

pub fn run(command: Command) -> Result<bool> {
    match command {
        Command::Gen { recipe } => generate(recipe).map(|()| true),
        Command::Validate(a) => {
            let m = read_module(&a.input)?;
            let report = m.validate();
            match a.format {
                Format::Json => write_json(&a.out, &io::report_to_json("validation", &report))?,
                Format::Table => write_text(&a.out, &report.to_string())?,
            }
            Ok(report.all_passed())
        }
        Command::Filtration(a) => {
            let m = read_module(&a.input)?;
            let af = build_adequate(&m, options(&a.build))?;
            let report = verify_adequate(&m, &af);
            let doc = with_checks(io::filtration_to_json(&m, &af), &report);
            write_json(&a.out, &doc)?;
            summarize("filtration", &report);
            Ok(report.all_passed())
        }
        Command::Invariants(a) => {
            let m = read_module(&a.input)?;
            let af = load_filtration(&m, a.filtration.as_deref(), &a.build)?;
            let rep = compute_invariants(&m, &af)?;
            let mut checks = check_link(&m, &rep);
            checks.extend(check_factorization(&rep));
            checks.extend(check_conjugate_power(&m, &af, &rep));
            match a.format {
                Format::Json => write_json(&a.out, &with_checks(io::invariants_to_json(m.ctx(), &rep), &checks))?,
                Format::Table => write_text(&a.out, &format!("{rep}\n{}", check_summary(&checks)))?,
            }
            Ok(checks.all_passed())
        }
        Command::Dual(a) => {
            let m = read_module(&a.input)?;
            let af = build_adequate(&m, options(&a.build))?;
            let bundle = dualize(&m, &af)?;
            let checks = check_bundle(&m, &af, &bundle);
            write_json(&a.out, &with_checks(io::module_to_json(&bundle.dual), &checks))?;
            summarize("duality", &checks);
            Ok(checks.all_passed())
        }
        Command::Canonical(a) => {
            let m = read_module(&a.input)?;
            let (rank, proj) = io::quotient_from_json(m.ctx(), &read_json(&a.quotient)?)
                .with_context(|| format!("reading {}", a.quotient.display()))?;
            let profile = m.profile();
            let Some(level) = (1..=profile.r).find(|&j| profile.delta[j] == rank) else {
                bail!("quotient rank {rank} is not a filtration rank (available: {:?})", &profile.delta[1..=profile.r]);
            };
            let q = attach_quotient(&m, &proj, level)?;
            let af = load_filtration(&m, a.filtration.as_deref(), &a.build)?;
            let checks = check_degree_theorem(&m, &af, &q);
            match a.format {
                Format::Json => write_json(&a.out, &io::degree_report_to_json(&q, &checks))?,
                Format::Table => {
                    let codegrees: Vec<String> = q.codegrees().into_iter().map(io::ratio_string).collect();
                    let text = format!(
                        "level {level}, rank {rank}\ncodegrees {}\nalpha {} (canonical: {}, strong: {})\n{}",
                        codegrees.join(" "),
                        q.alpha(),
                        q.is_canonical(),
                        q.is_strong_canonical(),
                        check_summary(&checks)
                    );
                    write_text(&a.out, &text)?
                }
            }
            Ok(checks.all_passed())
        }
        Command::Fuzz(a) => fuzz(a.count, a.seed, a.format, &a.out),
    }
}

fn options(b: &BuildArgs) -> BuildOptions {
    BuildOptions { seed_shift: b.seed_shift, pivot: b.pivot.into() }
}

fn context(c: &CtxArgs) -> Result<Ctx> {
    Ok(Context::new(c.p, c.f, c.n, c.modulus.clone())?)
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    io::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_module(path: &Path) -> Result<DieudonneModule> {
    io::module_from_json(&read_json(path)?).with_context(|| format!("reading module {}", path.display()))
}

fn load_filtration(m: &DieudonneModule, path: Option<&Path>, build: &BuildArgs) -> Result<AdequateFiltration> {
    match path {
        Some(p) => {
            let af = io::filtration_from_json(m, &read_json(p)?)
                .with_context(|| format!("reading filtration {}", p.display()))?;
            let report = verify_adequate(m, &af);
            if !report.all_passed() {
                bail!("stored filtration is not adequate: {}", report.failure_summary());
            }
            Ok(af)
        }
        None => Ok(build_adequate(m, options(build))?),
    }
}

fn write_text(out: &OutArgs, text: &str) -> Result<()> {
    match &out.output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_json(out: &OutArgs, value: &Value) -> Result<()> {
    write_text(out, &io::emit(value))
}

fn with_checks(mut doc: Value, checks: &ValidationReport) -> Value {
    doc["passed"] = json!(checks.all_passed());
    doc["checks"] = serde_json::to_value(&checks.checks).expect("checks serialize");
    doc
}

fn check_summary(checks: &ValidationReport) -> String {
    let failed = checks.failures().count();
    let mut s = format!("{} checks, {} failed\n", checks.len(), failed);
    for c in checks.failures() {
        s.push_str(&format!("[FAIL] {}: {}\n", c.name, c.detail));
    }
    s
}

fn summarize(label: &str, checks: &ValidationReport) {
    eprint!("{label}: {}", check_summary(checks));
}

fn generate(recipe: Recipe) -> Result<()> {
    let (module, out) = match recipe {
        Recipe::MuOrdinary { ctx, h, d, out } => (mu_ordinary(&context(&ctx)?, h, &d)?, out),
        Recipe::Random { ctx, h, d, seed, out } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (random_general_module(&context(&ctx)?, h, &d, &mut rng)?, out)
        }
        Recipe::Gauge { input, seed, out } => {
            let m = read_module(&input)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_gauge(m.ctx(), m.h(), m.f(), &mut rng);
            (m.gauge_twist(&g)?, out)
        }
        Recipe::Perturb { input, seed, out } => {
            let mut m = read_module(&input)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in 0..m.f() {
                let z = random_perturbation(m.ctx(), m.h(), m.d()[i], &mut rng);
                m = m.perturb_hodge(i, &z)?;
            }
            (m, out)
        }
        Recipe::Classical { p, n, c, out } => {
            let ctx = Context::new(p, 1, n, None)?;
            (supersingular_line(&ctx, &RingElem::uniformizer_pow(&ctx, c))?, out)
        }
        Recipe::HasseChain { ctx, c, quotient, out } => {
            let ctx = context(&ctx)?;
            let blocks = parse_blocks(&ctx, &c)?;
            let (m, proj) = hasse_chain(&ctx, &blocks)?;
            if let Some(path) = quotient {
                fs::write(&path, io::emit(&io::quotient_to_json(blocks.len(), &proj)))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            (m, out)
        }
    };
    write_json(&out, &io::module_to_json(&module))
}

fn parse_blocks(ctx: &Ctx, spec: &str) -> Result<Vec<Vec<RingElem>>> {
    spec.split(';')
        .map(|block| {
            let vals = block
                .split(',')
                .map(|t| t.trim().parse::<u32>().with_context(|| format!("bad valuation {t:?}")))
                .collect::<Result<Vec<_>>>()?;
            if vals.len() != ctx.f() as usize {
                bail!("block {block:?} needs {} valuations", ctx.f());
            }
            Ok(vals.into_iter().map(|v| RingElem::uniformizer_pow(ctx, v)).collect())
        })
        .collect()
}

struct FuzzOutcome {
    value: Value,
    link: bool,
    duality: bool,
    uniqueness: Option<bool>,
}

fn fuzz_item(params: &CorpusParams, seed: u64, index: usize) -> FuzzOutcome {
    let run = || -> crystal_forge::Result<FuzzOutcome> {
        let item = params.item(seed, index)?;
        let m = &item.module;
        let valid = m.validate().all_passed();
        let af = build_adequate(m, BuildOptions::default())?;
        let bundle = dualize(m, &af)?;
        let link = valid && check_link(m, &bundle.report).all_passed();
        let duality = valid && check_bundle(m, &af, &bundle).all_passed();
        let uniqueness = check_uniqueness(m)?.map(|r| r.all_passed());
        let ctx = m.ctx();
        let value = json!({
            "index": index,
            "kind": item.kind,
            "p": ctx.p(), "f": ctx.f(), "N": ctx.n(), "h": m.h(), "d": m.d(),
            "w": io::ratio_string(bundle.report.w_total_ratio()),
            "link": link,
            "duality": duality,
            "uniqueness": uniqueness,
        });
        Ok(FuzzOutcome { value, link, duality, uniqueness })
    };
    run().unwrap_or_else(|e| FuzzOutcome {
        value: json!({"index": index, "error": e.to_string()}),
        link: false,
        duality: false,
        uniqueness: None,
    })
}

fn fuzz(count: usize, seed: u64, format: Format, out: &OutArgs) -> Result<bool> {
    let params = CorpusParams::default();
    let outcomes: Vec<FuzzOutcome> = (0..count).into_par_iter().map(|k| fuzz_item(&params, seed, k)).collect();
    let link = outcomes.iter().filter(|o| o.link).count();
    let duality = outcomes.iter().filter(|o| o.duality).count();
    let qualifying = outcomes.iter().filter(|o| o.uniqueness.is_some()).count();
    let unique = outcomes.iter().filter(|o| o.uniqueness == Some(true)).count();
    let passed = link == count && duality == count && unique == qualifying;
    match format {
        Format::Json => {
            let doc = json!({
                "schema": io::SCHEMA,
                "kind": "fuzz",
                "seed": seed,
                "count": count,
                "link": {"passed": link, "total": count},
                "duality": {"passed": duality, "total": count},
                "uniqueness": {"passed": unique, "qualifying": qualifying},
                "passed": passed,
                "items": outcomes.iter().map(|o| o.value.clone()).collect::<Vec<_>>(),
            });
            write_json(out, &doc)?;
        }
        Format::Table => {
            let mut text = format!(
                "link {link}/{count}\nduality {duality}/{count}\nuniqueness {unique}/{qualifying} (instances with w < 1/2)\n"
            );
            for o in outcomes.iter().filter(|o| !o.link || !o.duality || o.uniqueness == Some(false)) {
                text.push_str(&format!("failed: {}\n", o.value));
            }
            write_text(out, &text)?;
        }
    }
    Ok(passed)
}
