use std::cmp::{min, Ordering};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_rational::Ratio;

use super::field::{FieldElem, FieldTables};
use crate::error::{Error, Result};

/// Shared parameters of `R_N = F_q[s]/(s^N)`, with `v(s) = 1/N` and `v(p) = 1`.
#[derive(Debug)]
pub struct Context {
    field: FieldTables,
    n: u32,
}

pub type Ctx = Arc<Context>;

impl Context {
    pub fn new(p: u32, f: u32, n: u32, modulus: Option<Vec<u32>>) -> Result<Ctx> {
        if n == 0 {
            return Err(Error::InvalidContext("N must be positive".into()));
        }
        Ok(Arc::new(Context { field: FieldTables::new(p, f, modulus)?, n }))
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    /// Degree of the residue field over `F_p`.
    pub fn f(&self) -> u32 {
        self.field.degree()
    }

    /// Denominator of the value group, `v(s) = 1/N`.
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn modulus(&self) -> &[u32] {
        self.field.modulus()
    }

    pub fn field(&self) -> &FieldTables {
        &self.field
    }

    pub fn same(&self, other: &Context) -> bool {
        std::ptr::eq(self, other)
            || (self.p() == other.p()
                && self.f() == other.f()
                && self.n == other.n
                && self.modulus() == other.modulus())
    }

    /// Converts a rational valuation into digit units, if it is representable.
    pub fn digits_of(&self, value: Ratio<i64>) -> Result<u32> {
        let scaled = value * Ratio::from_integer(self.n as i64);
        if !scaled.is_integer() || *scaled.numer() < 0 {
            return Err(Error::NotRepresentable(format!("valuation {value} is not a multiple of 1/{}", self.n)));
        }
        Ok(*scaled.numer() as u32)
    }

    /// `⌈w·N⌉` for a rational cutoff `w`.
    pub fn ceil_digits(&self, value: Ratio<i64>) -> u32 {
        let scaled = value * Ratio::from_integer(self.n as i64);
        scaled.ceil().to_integer().clamp(0, self.n as i64) as u32
    }
}

/// Valuation of a truncated element: `digits / N`, clamped to `[0, 1]`.
///
/// `floor` is set when the element vanishes to its working precision, so the
/// true valuation is only known to be at least `digits / N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Valuation {
    pub digits: u32,
    pub n: u32,
    pub floor: bool,
}

impl Valuation {
    pub fn exact(digits: u32, n: u32) -> Self {
        Valuation { digits: digits.min(n), n, floor: digits >= n }
    }

    pub fn ratio(&self) -> Ratio<i64> {
        Ratio::new(self.digits as i64, self.n as i64)
    }

    /// Valuation of the zero section of `O/p`: exactly 1.
    pub fn is_one(&self) -> bool {
        self.digits >= self.n
    }

    pub fn is_zero(&self) -> bool {
        self.digits == 0 && !self.floor
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.digits as u64 * other.n as u64).cmp(&(other.digits as u64 * self.n as u64))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.ratio();
        if self.floor && !self.is_one() {
            write!(f, ">={r}")
        } else {
            write!(f, "{r}")
        }
    }
}

/// An element of `R_N` known modulo `s^prec`.
///
/// `digits[k]` is the coefficient of `s^k`; the vector has length exactly
/// `prec`, so no digit at or beyond the precision is ever stored.
#[derive(Clone)]
pub struct RingElem {
    ctx: Ctx,
    digits: Vec<FieldElem>,
}

impl PartialEq for RingElem {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same(&other.ctx) && self.digits == other.digits
    }
}

impl Eq for RingElem {}

impl fmt::Debug for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let field = self.ctx.field();
        let mut first = true;
        for (k, &c) in self.digits.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let coeff = if field.degree() == 1 { format!("{}", c.index()) } else { format!("{:?}", field.coeffs(c)) };
            match k {
                0 => write!(f, "{coeff}")?,
                _ if c == FieldElem::ONE => write!(f, "s^{k}")?,
                _ => write!(f, "{coeff}*s^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        if self.prec() < self.ctx.n() {
            write!(f, " + O(s^{})", self.prec())?;
        }
        Ok(())
    }
}

impl RingElem {
    pub fn zero(ctx: &Ctx) -> Self {
        RingElem { ctx: ctx.clone(), digits: vec![FieldElem::ZERO; ctx.n() as usize] }
    }

    pub fn one(ctx: &Ctx) -> Self {
        Self::constant(ctx, FieldElem::ONE)
    }

    pub fn constant(ctx: &Ctx, c: FieldElem) -> Self {
        Self::monomial(ctx, c, 0)
    }

    pub fn from_int(ctx: &Ctx, n: i64) -> Self {
        Self::constant(ctx, ctx.field().from_int(n))
    }

    /// `c·s^k` at full precision (zero when `k ≥ N`).
    pub fn monomial(ctx: &Ctx, c: FieldElem, k: u32) -> Self {
        let mut e = Self::zero(ctx);
        if k < ctx.n() {
            e.digits[k as usize] = c;
        }
        e
    }

    /// `s^k` at full precision.
    pub fn uniformizer_pow(ctx: &Ctx, k: u32) -> Self {
        Self::monomial(ctx, FieldElem::ONE, k)
    }

    /// Builds an element from its digit vector; the precision is the length.
    pub fn from_digits(ctx: &Ctx, digits: Vec<FieldElem>) -> Result<Self> {
        if digits.len() > ctx.n() as usize {
            return Err(Error::InvalidValue(format!("precision {} exceeds N = {}", digits.len(), ctx.n())));
        }
        if let Some(c) = digits.iter().find(|c| c.index() >= ctx.field().size()) {
            return Err(Error::InvalidValue(format!("field index {} out of range", c.index())));
        }
        Ok(RingElem { ctx: ctx.clone(), digits })
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn digits(&self) -> &[FieldElem] {
        &self.digits
    }

    /// Coefficient of `s^k` (zero beyond the stored precision).
    pub fn digit(&self, k: u32) -> FieldElem {
        self.digits.get(k as usize).copied().unwrap_or_default()
    }

    pub fn prec(&self) -> u32 {
        self.digits.len() as u32
    }

    pub fn is_exact(&self) -> bool {
        self.prec() == self.ctx.n()
    }

    /// Index of the first nonzero digit, if any digit below the precision is nonzero.
    pub fn val_digits(&self) -> Option<u32> {
        self.digits.iter().position(|c| !c.is_zero()).map(|k| k as u32)
    }

    /// Valuation in digit units, with `prec` standing in for "zero to precision".
    pub fn val_or_prec(&self) -> u32 {
        self.val_digits().unwrap_or(self.prec())
    }

    pub fn valuation(&self) -> Valuation {
        match self.val_digits() {
            Some(k) => Valuation { digits: k, n: self.ctx.n(), floor: false },
            None => Valuation { digits: self.prec(), n: self.ctx.n(), floor: true },
        }
    }

    /// True when every digit below the precision vanishes.
    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|c| c.is_zero())
    }

    pub fn is_unit(&self) -> bool {
        self.digits.first().is_some_and(|c| !c.is_zero())
    }

    /// True when all digits below `k` vanish, i.e. the element lies in `m_{k/N}`.
    pub fn vanishes_mod(&self, k: u32) -> bool {
        self.digits.iter().take(k as usize).all(|c| c.is_zero())
    }

    /// Drops precision to at most `k` digits.
    pub fn truncate(&self, k: u32) -> Self {
        let mut digits = self.digits.clone();
        digits.truncate(k as usize);
        RingElem { ctx: self.ctx.clone(), digits }
    }

    /// Promotes the stored representative to a full-precision element.
    pub fn lift(&self) -> Self {
        let mut digits = self.digits.clone();
        digits.resize(self.ctx.n() as usize, FieldElem::ZERO);
        RingElem { ctx: self.ctx.clone(), digits }
    }

    fn check_ctx(&self, other: &RingElem) {
        assert!(self.ctx.same(&other.ctx), "ring elements from different contexts");
    }

    pub fn checked_add(&self, other: &RingElem) -> Result<RingElem> {
        if !self.ctx.same(&other.ctx) {
            return Err(Error::ContextMismatch);
        }
        Ok(self + other)
    }

    pub fn checked_mul(&self, other: &RingElem) -> Result<RingElem> {
        if !self.ctx.same(&other.ctx) {
            return Err(Error::ContextMismatch);
        }
        Ok(self * other)
    }

    fn combine(&self, other: &RingElem, negate: bool) -> RingElem {
        self.check_ctx(other);
        let field = self.ctx.field();
        let prec = min(self.prec(), other.prec()) as usize;
        let digits = (0..prec)
            .map(|k| {
                let b = other.digits[k];
                let b = if negate { field.neg(b) } else { b };
                field.add(self.digits[k], b)
            })
            .collect();
        RingElem { ctx: self.ctx.clone(), digits }
    }

    /// Multiplies by the field scalar `c`, keeping the precision.
    pub fn scale(&self, c: FieldElem) -> RingElem {
        let field = self.ctx.field();
        RingElem { ctx: self.ctx.clone(), digits: self.digits.iter().map(|&d| field.mul(d, c)).collect() }
    }

    fn product(&self, other: &RingElem) -> RingElem {
        self.check_ctx(other);
        let n = self.ctx.n();
        let prec = min(min(self.prec() + other.val_or_prec(), other.prec() + self.val_or_prec()), n) as usize;
        let field = self.ctx.field();
        let mut digits = vec![FieldElem::ZERO; prec];
        for (i, &a) in self.digits.iter().enumerate().take(prec) {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.digits.iter().enumerate().take(prec - i) {
                if b.is_zero() {
                    continue;
                }
                digits[i + j] = field.add(digits[i + j], field.mul(a, b));
            }
        }
        RingElem { ctx: self.ctx.clone(), digits }
    }

    /// Inverse of a unit, at the unit's precision.
    pub fn inverse(&self) -> Result<RingElem> {
        if !self.is_unit() {
            return Err(Error::NotInvertible(format!("{self} is not a unit")));
        }
        let field = self.ctx.field();
        let prec = self.prec() as usize;
        let inv0 = field.inv(self.digits[0]).expect("nonzero leading digit");
        let mut out = vec![FieldElem::ZERO; prec];
        out[0] = inv0;
        // out_k = -inv0 · Σ_{i=1..k} a_i out_{k-i}
        for k in 1..prec {
            let mut acc = FieldElem::ZERO;
            for i in 1..=k {
                acc = field.add(acc, field.mul(self.digits[i], out[k - i]));
            }
            out[k] = field.neg(field.mul(inv0, acc));
        }
        Ok(RingElem { ctx: self.ctx.clone(), digits: out })
    }

    /// Digits shifted down by `k`: the exact quotient by `s^k` of an element
    /// divisible by `s^k`, at precision `prec − k`.
    pub(crate) fn shift_down(&self, k: u32) -> RingElem {
        RingElem { ctx: self.ctx.clone(), digits: self.digits.iter().skip(k as usize).copied().collect() }
    }

    /// Solves `q·y = x` for `v(x) ≥ v(y)`.
    ///
    /// With `x` known modulo `s^px`, `y = s^vy·u` known modulo `s^py`, the
    /// quotient is known modulo
    /// `s^min(px − vy, py − 2vy + vx, N − vy)`; the last term is the
    /// annihilator of `y`, so the result is only determined up to it.
    pub fn divide_exact(&self, y: &RingElem) -> Result<RingElem> {
        self.check_ctx(y);
        let n = self.ctx.n();
        let vy = y
            .val_digits()
            .ok_or_else(|| Error::NotDivisible(format!("division by {y}, which is zero to its precision")))?;
        let vx = self.val_or_prec();
        if vx < vy {
            return Err(Error::NotDivisible(format!("v({self}) = {vx}/{n} < v({y}) = {vy}/{n}")));
        }
        let prec = [self.prec().saturating_sub(vy), (y.prec() + vx).saturating_sub(2 * vy), n - vy]
            .into_iter()
            .min()
            .unwrap_or(0);
        let unit = y.shift_down(vy).inverse()?;
        let numer = self.shift_down(vy);
        let q = &numer.lift().truncate(prec) * &unit.lift().truncate(prec);
        Ok(q.truncate(prec))
    }

    /// Exact-representative quotient: for full-precision `x` and `y` with
    /// `v(x) ≥ v(y)`, returns the representative `q` (digits below `N − v(y)`)
    /// with `q·y = x` exactly, at full precision.
    pub fn divide_repr(&self, y: &RingElem) -> Result<RingElem> {
        Ok(self.divide_exact(y)?.lift())
    }

    /// The absolute Frobenius `c·s^k ↦ c^p·s^{pk}` at precision `min(p·prec, N)`.
    pub fn frobenius(&self) -> RingElem {
        let p = self.ctx.p();
        let n = self.ctx.n();
        let field = self.ctx.field();
        let prec = min(self.prec().saturating_mul(p), n) as usize;
        let mut digits = vec![FieldElem::ZERO; prec];
        for (k, &c) in self.digits.iter().enumerate() {
            let target = k * p as usize;
            if target >= prec {
                break;
            }
            digits[target] = field.frobenius(c);
        }
        RingElem { ctx: self.ctx.clone(), digits }
    }

    /// `k`-fold Frobenius.
    pub fn frobenius_pow(&self, k: u32) -> RingElem {
        (0..k).fold(self.clone(), |acc, _| acc.frobenius())
    }

    pub fn pow(&self, e: u32) -> RingElem {
        let mut acc = RingElem::one(&self.ctx);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }
}

impl Add for &RingElem {
    type Output = RingElem;
    fn add(self, rhs: &RingElem) -> RingElem {
        self.combine(rhs, false)
    }
}

impl Sub for &RingElem {
    type Output = RingElem;
    fn sub(self, rhs: &RingElem) -> RingElem {
        self.combine(rhs, true)
    }
}

impl Mul for &RingElem {
    type Output = RingElem;
    fn mul(self, rhs: &RingElem) -> RingElem {
        self.product(rhs)
    }
}

impl Neg for &RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        let field = self.ctx.field();
        RingElem { ctx: self.ctx.clone(), digits: self.digits.iter().map(|&c| field.neg(c)).collect() }
    }
}
