use crate::error::Result;
use crate::semilinear::{det_division_free, Matrix};

/// All `d`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, d: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for k in start..n {
            if n - k < d - cur.len() {
                break;
            }
            cur.push(k);
            rec(k + 1, n, d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if d <= n {
        rec(0, n, d, &mut Vec::with_capacity(d), &mut out);
    }
    out
}

/// Position of a sorted subset in the lexicographic list of [`subsets`].
pub fn subset_index(n: usize, subset: &[usize]) -> usize {
    subsets(n, subset.len()).iter().position(|s| s == subset).expect("subset of the right size")
}

/// The matrix of `d×d` minors, rows and columns indexed by lexicographic
/// subsets.
pub fn exterior_power(m: &Matrix, d: usize) -> Result<Matrix> {
    let row_sets = subsets(m.rows(), d);
    let col_sets = subsets(m.cols(), d);
    let mut out = Matrix::zero(m.ctx(), row_sets.len(), col_sets.len());
    for (a, rs) in row_sets.iter().enumerate() {
        let block = m.select_rows(rs);
        for (b, cs) in col_sets.iter().enumerate() {
            out[(a, b)] = det_division_free(&block.select_cols(cs))?;
        }
    }
    Ok(out)
}

/// Wedge of the columns of an `h × d` matrix, as a column of length `C(h, d)`.
pub fn wedge_columns(m: &Matrix) -> Result<Matrix> {
    exterior_power(m, m.cols())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_enumeration() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(subsets(2, 3).len(), 0);
        assert_eq!(subset_index(4, &[1, 3]), 4);
    }
}
