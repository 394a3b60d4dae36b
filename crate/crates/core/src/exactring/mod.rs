//! Exact arithmetic in the residue field `F_q` and in the truncated valuation
//! ring `R_N = F_q[s]/(s^N)`, the desk model of `O_K/p` with `v(s) = 1/N`.

mod field;
mod ring;

pub use field::{default_modulus, is_irreducible, FieldElem, FieldTables, MAX_FIELD_SIZE};
pub use ring::{Context, Ctx, RingElem, Valuation};
