use serde::{Deserialize, Serialize};

use crate::exactring::RingElem;
use crate::semilinear::Matrix;

/// Tie-breaking among entries of minimal valuation during elimination.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PivotRule {
    /// Lowest row, then lowest column.
    #[default]
    First,
    /// Highest row, then highest column.
    Last,
}

/// `M = U · Σ · W` with `U`, `W` invertible and `Σ = diag(s^{c_k})`.
///
/// `sigma[k] == N` marks a zero diagonal entry; `sigma` has length
/// `min(rows, cols)`.
#[derive(Clone, Debug)]
pub struct Snf {
    pub u: Matrix,
    pub u_inv: Matrix,
    pub w: Matrix,
    pub w_inv: Matrix,
    pub sigma: Vec<u32>,
}

impl Snf {
    /// Number of nonzero diagonal entries.
    pub fn rank(&self, n: u32) -> usize {
        self.sigma.iter().filter(|&&c| c < n).count()
    }

    /// The diagonal middle factor as a matrix.
    pub fn sigma_matrix(&self, rows: usize, cols: usize) -> Matrix {
        let ctx = self.u.ctx();
        let mut m = Matrix::zero(ctx, rows, cols);
        for (k, &c) in self.sigma.iter().enumerate() {
            if c < ctx.n() {
                m[(k, k)] = RingElem::uniformizer_pow(ctx, c);
            }
        }
        m
    }
}

/// Smith normal form of the stored representatives of `m`.
pub fn smith(m: &Matrix, rule: PivotRule) -> Snf {
    let ctx = m.ctx().clone();
    let n = ctx.n();
    let (rows, cols) = (m.rows(), m.cols());
    let mut d = m.lift();
    let mut u = Matrix::identity(&ctx, rows);
    let mut u_inv = Matrix::identity(&ctx, rows);
    let mut w = Matrix::identity(&ctx, cols);
    let mut w_inv = Matrix::identity(&ctx, cols);
    let steps = rows.min(cols);
    let mut sigma = Vec::with_capacity(steps);

    for t in 0..steps {
        let mut best: Option<(u32, usize, usize)> = None;
        for r in t..rows {
            for c in t..cols {
                let v = d[(r, c)].val_or_prec();
                if v >= n {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bv, _, _)) => match rule {
                        PivotRule::First => v < bv,
                        PivotRule::Last => v <= bv,
                    },
                };
                if better {
                    best = Some((v, r, c));
                }
            }
        }
        let Some((v, pr, pc)) = best else {
            sigma.extend(std::iter::repeat_n(n, steps - t));
            break;
        };

        d.swap_rows(t, pr);
        u.swap_cols(t, pr);
        u_inv.swap_rows(t, pr);
        d.swap_cols(t, pc);
        w.swap_rows(t, pc);
        w_inv.swap_cols(t, pc);

        // d[t,t] = s^v·unit; rescale so the pivot is exactly s^v.
        let unit = d[(t, t)].shift_down(v).lift();
        let unit_inv = unit.inverse().expect("pivot unit");
        d.scale_row(t, &unit_inv);
        u.scale_col(t, &unit);
        u_inv.scale_row(t, &unit_inv);
        let pivot = RingElem::uniformizer_pow(&ctx, v);

        for r in t + 1..rows {
            if d[(r, t)].is_zero() {
                continue;
            }
            let q = d[(r, t)].divide_repr(&pivot).expect("pivot divides column");
            d.add_row_multiple(r, t, &-&q);
            u.add_col_multiple(t, r, &q);
            u_inv.add_row_multiple(r, t, &-&q);
        }
        for c in t + 1..cols {
            if d[(t, c)].is_zero() {
                continue;
            }
            let q = d[(t, c)].divide_repr(&pivot).expect("pivot divides row");
            d.add_col_multiple(c, t, &-&q);
            w.add_row_multiple(t, c, &q);
            w_inv.add_col_multiple(c, t, &-&q);
        }
        sigma.push(v);
    }

    Snf { u, u_inv, w, w_inv, sigma }
}
