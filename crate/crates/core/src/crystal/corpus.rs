use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::crystal::{mu_ordinary, DieudonneModule};
use crate::error::Result;
use crate::exactring::{Context, Ctx, FieldElem, RingElem};
use crate::semilinear::{Matrix, Submodule};

/// A full-precision element whose digits below `min_digit` vanish.
pub fn random_elem<R: Rng + ?Sized>(ctx: &Ctx, rng: &mut R, min_digit: u32) -> RingElem {
    let q = ctx.field().size();
    let digits: Vec<FieldElem> = (0..ctx.n())
        .map(|k| if k < min_digit { FieldElem::ZERO } else { ctx.field().element(rng.gen_range(0..q)) })
        .collect();
    RingElem::from_digits(ctx, digits).expect("digits within N")
}

pub fn random_matrix<R: Rng + ?Sized>(ctx: &Ctx, rows: usize, cols: usize, rng: &mut R, min_digit: u32) -> Matrix {
    Matrix::from_fn(ctx, rows, cols, |_, _| random_elem(ctx, rng, min_digit))
}

/// A uniformly random invertible matrix (rejection sampling on the residue).
pub fn random_invertible<R: Rng + ?Sized>(ctx: &Ctx, n: usize, rng: &mut R) -> Matrix {
    loop {
        let m = random_matrix(ctx, n, n, rng, 0);
        if m.det().map(|d| d.is_unit()).unwrap_or(false) {
            return m;
        }
    }
}

/// Upper unitriangular with random entries above the diagonal.
pub fn random_unipotent<R: Rng + ?Sized>(ctx: &Ctx, n: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(ctx, n, n, |r, c| match r.cmp(&c) {
        std::cmp::Ordering::Equal => RingElem::one(ctx),
        std::cmp::Ordering::Less => random_elem(ctx, rng, 0),
        std::cmp::Ordering::Greater => RingElem::zero(ctx),
    })
}

pub fn random_gauge<R: Rng + ?Sized>(ctx: &Ctx, h: usize, f: usize, rng: &mut R) -> Vec<Matrix> {
    (0..f).map(|_| random_invertible(ctx, h, rng)).collect()
}

/// An `h × k` matrix with entries of valuation at least `1/p`.
pub fn random_perturbation<R: Rng + ?Sized>(ctx: &Ctx, h: usize, k: usize, rng: &mut R) -> Matrix {
    let min_digit = ctx.n().div_ceil(ctx.p());
    let shift = rng.gen_range(min_digit..=ctx.n());
    random_matrix(ctx, h, k, rng, shift)
}

/// Split model, then Hodge perturbations at every embedding, then a random
/// change of basis.
pub fn random_perturbed_module<R: Rng + ?Sized>(
    ctx: &Ctx,
    h: usize,
    d: &[usize],
    rng: &mut R,
) -> Result<DieudonneModule> {
    let mut m = mu_ordinary(ctx, h, d)?;
    for (i, &di) in d.iter().enumerate() {
        let z = random_perturbation(ctx, h, di, rng);
        m = m.perturb_hodge(i, &z)?;
    }
    m.gauge_twist(&random_gauge(ctx, h, d.len(), rng))
}

fn skewed_shift<R: Rng + ?Sized>(ctx: &Ctx, rng: &mut R) -> u32 {
    let n = ctx.n();
    if rng.gen_bool(0.5) {
        rng.gen_range(1..=(n / 6).max(1))
    } else {
        rng.gen_range(1..n)
    }
}

/// A coordinate summand of rank `k` moved by `s^t·Z`.
fn near_coordinate_summand<R: Rng + ?Sized>(ctx: &Ctx, h: usize, k: usize, rng: &mut R) -> Submodule {
    let mut coords: Vec<usize> = sample(rng, h, k).into_vec();
    coords.sort_unstable();
    let skeleton = Matrix::identity(ctx, h).select_cols(&coords);
    let t = skewed_shift(ctx, rng);
    let basis = &skeleton + &random_matrix(ctx, h, k, rng, t);
    Submodule::from_basis(&basis).expect("unit-perturbed coordinate basis")
}

/// A datum with independently chosen Hodge and conjugate summands in
/// near-special position, linked by random isomorphisms, then gauged.
///
/// `A_i = φ(H_{i−1})·α_i·P_i` with `P_i` a projection killing `wF_i`, and
/// `B_i = W_i·β_i·Q_i` with `Q_i` a projection killing `φ(F_{i−1})`.
pub fn random_general_module<R: Rng + ?Sized>(
    ctx: &Ctx,
    h: usize,
    d: &[usize],
    rng: &mut R,
) -> Result<DieudonneModule> {
    let f = d.len();
    let hodge: Vec<Submodule> = d.iter().map(|&k| near_coordinate_summand(ctx, h, k, rng)).collect();
    let mut v = Vec::with_capacity(f);
    let mut frob = Vec::with_capacity(f);
    for i in 0..f {
        let dp = d[(i + f - 1) % f];
        let conj = near_coordinate_summand(ctx, h, h - dp, rng);
        let twisted = hodge[(i + f - 1) % f].frobenius();
        let alpha = random_invertible(ctx, dp, rng);
        let beta = random_invertible(ctx, h - dp, rng);
        v.push(&(&twisted.basis() * &alpha) * &conj.quotient_map());
        frob.push(&(&conj.basis() * &beta) * &twisted.quotient_map());
    }
    let m = DieudonneModule::from_parts(ctx, d.to_vec(), v, frob, hodge)?;
    m.gauge_twist(&random_gauge(ctx, h, f, rng))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusKind {
    Perturbed,
    General,
}

/// Shape of the random corpus.
#[derive(Clone, Debug)]
pub struct CorpusParams {
    pub primes: Vec<u32>,
    pub max_f: u32,
    pub max_h: usize,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams { primes: vec![2, 3, 5], max_f: 3, max_h: 4 }
    }
}

#[derive(Clone, Debug)]
pub struct CorpusItem {
    pub index: usize,
    pub kind: CorpusKind,
    pub module: DieudonneModule,
}

impl CorpusParams {
    /// Default `N` for a prime: a multiple of `2p` below 48 with many divisors.
    pub fn default_n(p: u32) -> u32 {
        match p {
            2 => 24,
            3 => 36,
            5 => 40,
            _ => 2 * p * (48 / (2 * p)).max(1),
        }
    }

    /// The `index`-th corpus item for `seed`. Each item has its own RNG
    /// stream, so items can be generated in any order or in parallel.
    pub fn item(&self, seed: u64, index: usize) -> Result<CorpusItem> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        let p = self.primes[rng.gen_range(0..self.primes.len())];
        let f = rng.gen_range(1..=self.max_f);
        let h = rng.gen_range(2..=self.max_h);
        let ctx = Context::new(p, f, Self::default_n(p), None)?;
        let d: Vec<usize> = loop {
            let d: Vec<usize> = (0..f).map(|_| rng.gen_range(0..=h)).collect();
            if d.iter().any(|&x| x >= 1 && x < h) {
                break d;
            }
        };
        let kind = if index.is_multiple_of(2) { CorpusKind::General } else { CorpusKind::Perturbed };
        let module = match kind {
            CorpusKind::General => {
                let mut m = random_general_module(&ctx, h, &d, &mut rng)?;
                for (i, &di) in d.iter().enumerate() {
                    m = m.perturb_hodge(i, &random_perturbation(&ctx, h, di, &mut rng))?;
                }
                m
            }
            CorpusKind::Perturbed => random_perturbed_module(&ctx, h, &d, &mut rng)?,
        };
        Ok(CorpusItem { index, kind, module })
    }

    pub fn corpus(&self, seed: u64, count: usize) -> Result<Vec<CorpusItem>> {
        (0..count).map(|k| self.item(seed, k)).collect()
    }
}
