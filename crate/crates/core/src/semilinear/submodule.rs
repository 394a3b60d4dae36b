use crate::error::{Error, Result};
use crate::exactring::Ctx;
use crate::semilinear::{smith, Matrix, PivotRule};

/// A direct summand of `R_N^h`, stored through an invertible witness whose
/// leading `rank` columns are a basis of the summand and whose remaining
/// columns span a chosen complement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Submodule {
    witness: Matrix,
    inverse: Matrix,
    rank: usize,
}

impl Submodule {
    fn from_parts(witness: Matrix, inverse: Matrix, rank: usize) -> Self {
        debug_assert!(witness.is_square() && rank <= witness.rows());
        Submodule { witness, inverse, rank }
    }

    /// Builds from an explicit witness, checking that it is invertible.
    pub fn from_witness(witness: Matrix, rank: usize) -> Result<Self> {
        if !witness.is_square() || rank > witness.rows() {
            return Err(Error::Dimension(format!("witness {}x{} with rank {rank}", witness.rows(), witness.cols())));
        }
        let inverse = witness.lift().inverse()?;
        Ok(Self::from_parts(witness.lift(), inverse, rank))
    }

    /// Builds from a witness and its stored inverse, checking both products.
    pub fn from_witness_pair(witness: Matrix, inverse: Matrix, rank: usize) -> Result<Self> {
        let h = witness.rows();
        if !witness.is_square() || (inverse.rows(), inverse.cols()) != (h, h) || rank > h {
            return Err(Error::Dimension(format!("witness pair of shape {h}x{} with rank {rank}", witness.cols())));
        }
        let id = Matrix::identity(witness.ctx(), h);
        if &witness * &inverse != id || &inverse * &witness != id {
            return Err(Error::NotInvertible("stored inverse does not invert the witness".into()));
        }
        Ok(Self::from_parts(witness, inverse, rank))
    }

    pub fn zero(ctx: &Ctx, h: usize) -> Self {
        Self::from_parts(Matrix::identity(ctx, h), Matrix::identity(ctx, h), 0)
    }

    pub fn full(ctx: &Ctx, h: usize) -> Self {
        Self::from_parts(Matrix::identity(ctx, h), Matrix::identity(ctx, h), h)
    }

    /// The summand spanned by the columns of `b`, which are kept verbatim as
    /// the basis. Fails unless the columns extend to a basis of `R_N^h`.
    pub fn from_basis(b: &Matrix) -> Result<Self> {
        let ctx = b.ctx();
        let (h, k) = (b.rows(), b.cols());
        if k > h {
            return Err(Error::NotSummand(format!("{k} columns in rank {h}")));
        }
        let snf = smith(b, PivotRule::First);
        if snf.sigma.iter().any(|&c| c != 0) {
            return Err(Error::NotSummand(format!(
                "columns do not span a direct summand (elementary divisors {:?} in digits)",
                snf.sigma
            )));
        }
        let b = b.lift();
        let witness = b.hstack(&snf.u.cols_range(k..h))?;
        let left = snf.w_inv.block_diag(&Matrix::identity(ctx, h - k));
        let inverse = &left * &snf.u_inv;
        Ok(Self::from_parts(witness, inverse, k))
    }

    /// The saturation of the image of `m`, of the given rank: the summand
    /// spanned by the first `target` columns of the left SNF factor.
    pub fn image_hull(m: &Matrix, target: usize, rule: PivotRule) -> Result<Self> {
        let h = m.rows();
        let snf = smith(m, rule);
        let nonzero = snf.rank(m.ctx().n());
        if nonzero > target || target > h {
            return Err(Error::NotSummand(format!(
                "image has {nonzero} nonzero elementary divisors, hull rank {target} requested in rank {h}"
            )));
        }
        Ok(Self::from_parts(snf.u, snf.u_inv, target))
    }

    /// The summand of `R_N^h` on which `m` vanishes identically in SNF
    /// coordinates, of the given rank.
    pub fn kernel_summand(m: &Matrix, target: usize, rule: PivotRule) -> Result<Self> {
        let h = m.cols();
        let n = m.ctx().n();
        let snf = smith(m, rule);
        let is_free = |k: usize| k >= snf.sigma.len() || snf.sigma[k] >= n;
        let free: Vec<usize> = (0..h).filter(|&k| is_free(k)).collect();
        if free.len() < target || target > h {
            return Err(Error::NotSummand(format!(
                "kernel has {} free coordinates, rank {target} requested",
                free.len()
            )));
        }
        let chosen = &free[..target];
        let order: Vec<usize> = chosen.iter().copied().chain((0..h).filter(|k| !chosen.contains(k))).collect();
        let witness = snf.w_inv.select_cols(&order);
        let inverse = snf.w.select_rows(&order);
        Ok(Self::from_parts(witness, inverse, target))
    }

    pub fn ctx(&self) -> &Ctx {
        self.witness.ctx()
    }

    pub fn ambient_rank(&self) -> usize {
        self.witness.rows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn witness(&self) -> &Matrix {
        &self.witness
    }

    pub fn witness_inverse(&self) -> Matrix {
        self.inverse.clone()
    }

    pub fn basis(&self) -> Matrix {
        self.witness.cols_range(0..self.rank)
    }

    /// Basis of the complement carried by the witness.
    pub fn complement(&self) -> Matrix {
        self.witness.cols_range(self.rank..self.ambient_rank())
    }

    /// Coordinates along the basis with respect to the witness splitting.
    pub fn coordinate_map(&self) -> Matrix {
        self.inverse.rows_range(0..self.rank)
    }

    /// A projection `R_N^h → R_N^{h−rank}` whose kernel is this summand.
    pub fn quotient_map(&self) -> Matrix {
        self.inverse.rows_range(self.rank..self.ambient_rank())
    }

    /// Column-wise membership, exact to full precision.
    pub fn contains(&self, vectors: &Matrix) -> bool {
        (&self.quotient_map() * &vectors.lift()).is_zero()
    }

    /// Column-wise membership modulo `s^k`.
    pub fn contains_mod(&self, vectors: &Matrix, k: u32) -> bool {
        (&self.quotient_map() * &vectors.lift()).vanishes_mod(k)
    }

    pub fn contains_submodule(&self, other: &Submodule) -> bool {
        self.contains(&other.basis())
    }

    pub fn contains_submodule_mod(&self, other: &Submodule, k: u32) -> bool {
        self.contains_mod(&other.basis(), k)
    }

    /// Equality as submodules (not as stored witnesses).
    pub fn same_span(&self, other: &Submodule) -> bool {
        self.rank == other.rank && self.contains_submodule(other) && other.contains_submodule(self)
    }

    pub fn same_span_mod(&self, other: &Submodule, k: u32) -> bool {
        self.rank == other.rank && self.contains_submodule_mod(other, k) && other.contains_submodule_mod(self, k)
    }

    /// Annihilator under the standard pairing `⟨x, y⟩ = xᵀy`. Applying it
    /// twice returns the original witness unchanged.
    pub fn orthogonal_complement(&self) -> Submodule {
        let h = self.ambient_rank();
        let order: Vec<usize> = (self.rank..h).chain(0..self.rank).collect();
        let witness = self.inverse.transpose().select_cols(&order);
        let inverse = self.witness.transpose().select_rows(&order);
        Self::from_parts(witness, inverse, h - self.rank)
    }

    /// Image under an invertible change of basis `g`.
    pub fn transform(&self, g: &Matrix, g_inv: &Matrix) -> Submodule {
        Self::from_parts(g * &self.witness, &self.inverse * g_inv, self.rank)
    }

    /// Entrywise Frobenius of the witness: the twisted summand.
    pub fn frobenius(&self) -> Submodule {
        Self::from_parts(self.witness.frobenius(), self.inverse.frobenius(), self.rank)
    }

    pub fn direct_sum(&self, other: &Submodule) -> Submodule {
        let (h1, h2) = (self.ambient_rank(), other.ambient_rank());
        let (r1, r2) = (self.rank, other.rank);
        let w = self.witness.block_diag(&other.witness);
        let inv = self.inverse.block_diag(&other.inverse);
        let order: Vec<usize> = (0..r1).chain(h1..h1 + r2).chain(r1..h1).chain(h1 + r2..h1 + h2).collect();
        Self::from_parts(w.select_cols(&order), inv.select_rows(&order), r1 + r2)
    }

    fn relative_split(outer: &Submodule, inner: &Submodule) -> Result<Submodule> {
        if outer.ambient_rank() != inner.ambient_rank() {
            return Err(Error::Dimension("submodules of different ambient ranks".into()));
        }
        if !outer.contains_submodule(inner) {
            return Err(Error::NotSummand("inner submodule is not contained in outer".into()));
        }
        Submodule::from_basis(&(&outer.coordinate_map() * &inner.basis()))
    }

    /// Basis of a complement of `inner` inside `outer`, lifting the quotient
    /// `outer / inner`.
    pub fn relative_basis(outer: &Submodule, inner: &Submodule) -> Result<Matrix> {
        let sub = Self::relative_split(outer, inner)?;
        Ok(&outer.basis() * &sub.complement())
    }

    /// `R_N^h ⊇ outer → outer / inner` in the coordinates of
    /// [`Submodule::relative_basis`]; defined on all of `R_N^h` via the
    /// witness splitting of `outer`.
    pub fn relative_coords(outer: &Submodule, inner: &Submodule) -> Result<Matrix> {
        let sub = Self::relative_split(outer, inner)?;
        Ok(&sub.quotient_map() * &outer.coordinate_map())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactring::{Context, RingElem};

    #[test]
    fn basis_is_kept_verbatim() {
        let ctx = Context::new(3, 1, 4, None).unwrap();
        let b = Matrix::from_ints(&ctx, &[&[1, 0], &[2, 1], &[0, 2]]);
        let sub = Submodule::from_basis(&b).unwrap();
        assert_eq!(sub.basis(), b);
        assert_eq!(&sub.coordinate_map() * &b, Matrix::identity(&ctx, 2));
        assert!(sub.quotient_map().checked_mul(&b).unwrap().is_zero());
    }

    #[test]
    fn non_saturated_basis_is_rejected() {
        let ctx = Context::new(3, 1, 4, None).unwrap();
        let mut b = Matrix::zero(&ctx, 2, 1);
        b[(0, 0)] = RingElem::uniformizer_pow(&ctx, 1);
        assert!(Submodule::from_basis(&b).is_err());
    }

    #[test]
    fn double_complement_is_identical() {
        let ctx = Context::new(2, 2, 6, None).unwrap();
        let b = Matrix::from_ints(&ctx, &[&[1, 0], &[1, 1], &[0, 1], &[1, 1]]);
        let sub = Submodule::from_basis(&b).unwrap();
        let perp = sub.orthogonal_complement();
        assert!((&b.transpose() * &perp.basis()).is_zero());
        assert_eq!(perp.orthogonal_complement(), sub);
    }

    #[test]
    fn relative_maps_split_the_quotient() {
        let ctx = Context::new(5, 1, 5, None).unwrap();
        let outer = Submodule::from_basis(&Matrix::from_ints(&ctx, &[&[1, 0], &[0, 1], &[3, 4]])).unwrap();
        let inner = Submodule::from_basis(&Matrix::from_ints(&ctx, &[&[1], &[1], &[2]])).unwrap();
        let q = Submodule::relative_basis(&outer, &inner).unwrap();
        let c = Submodule::relative_coords(&outer, &inner).unwrap();
        assert_eq!(&c * &q, Matrix::identity(&ctx, 1));
        assert!((&c * &inner.basis()).is_zero());
        assert!(outer.contains(&q));
    }
}
