use std::collections::BTreeMap;

use super::{exp, ilog, log, INJECTIVITY_LEVEL};
use crate::error::{Error, Result};
use crate::matrix::PadicMatrix;
use crate::padic::PadicContext;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BchMode {
    /// Dynkin's nested-commutator series, truncated by degree.
    DynkinSeries,
    /// `log(exp x · exp y)`.
    Direct,
}

/// Largest total degree `m <= 500` whose Dynkin terms are not certified to
/// vanish modulo `p^N` when `min(v(x), v(y)) = v`.
///
/// A degree-`m` term carries a denominator `k · m · prod r_i! s_i!` with
/// `k <= m`, so its valuation is at least `m v - 2 floor(log_p m) - (m-1)/(p-1)`.
pub fn dynkin_degree_bound(v: i64, ctx: PadicContext) -> usize {
    let p1 = ctx.p() as i64 - 1;
    let target = ctx.precision() as i64 * p1;
    (1..=500i64)
        .filter(|&m| (m * v - 2 * ilog(m as u64, ctx.p()) as i64) * p1 - (m - 1) < target)
        .max()
        .unwrap_or(1) as usize
}

/// `z` with `exp z = exp x · exp y`, for `||x||, ||y|| <= p^-2`.
pub fn bch(x: &PadicMatrix, y: &PadicMatrix, mode: BchMode) -> Result<PadicMatrix> {
    if !x.is_square() || x.rows() != y.rows() || x.cols() != y.cols() {
        return Err(Error::DimensionMismatch("bch needs two square matrices of one size".into()));
    }
    if x.context() != y.context() {
        return Err(Error::ContextMismatch);
    }
    for m in [x, y] {
        if !m.norm_at_most(INJECTIVITY_LEVEL) {
            return Err(Error::DomainError("bch needs ||x||, ||y|| <= p^-2".into()));
        }
    }
    match mode {
        BchMode::Direct => log(&(&exp(x)? * &exp(y)?)),
        BchMode::DynkinSeries => Ok(dynkin(x, y)),
    }
}

fn dynkin(x: &PadicMatrix, y: &PadicMatrix) -> PadicMatrix {
    let ctx = x.context();
    let n = x.dim();
    let target = ctx.precision() as i64;
    let v = match (x.min_valuation(), y.min_valuation()) {
        (None, None) => return PadicMatrix::zeros(n, n, ctx),
        (a, b) => a.into_iter().chain(b).min().unwrap_or(target),
    };
    let deg = dynkin_degree_bound(v, ctx);
    let inv = |k: usize| ctx.ratio(1, k as i128);

    // layer[(i, j)]: sum over words of k blocks with i x's and j y's of
    // ad_x^r1 ad_y^s1 ... (last block) / prod r! s!
    // The last block is (r, 1) giving ad_x^r y / r!, or (1, 0) giving x.
    let mut layer: BTreeMap<(usize, usize), PadicMatrix> = BTreeMap::new();
    layer.insert((1, 0), x.clone());
    let mut t = y.clone();
    for r in 0..deg {
        if t.is_zero() {
            break;
        }
        layer.insert((r, 1), t.clone());
        t = x.commutator(&t).scale(&inv(r + 1));
    }

    let mut z = PadicMatrix::zeros(n, n, ctx);
    for k in 1..=deg {
        layer.retain(|_, m| !m.is_zero());
        if layer.is_empty() {
            break;
        }
        let sign = if k % 2 == 1 { 1 } else { -1 };
        for (&(i, j), m) in &layer {
            z = &z + &m.scale(&ctx.ratio(sign, (k * (i + j)) as i128));
        }
        let mut next: BTreeMap<(usize, usize), PadicMatrix> = BTreeMap::new();
        for (&(i, j), m) in &layer {
            let room = deg - (i + j);
            let mut a = m.clone();
            for s in 0..=room {
                if s > 0 {
                    a = y.commutator(&a).scale(&inv(s));
                }
                if a.is_zero() {
                    break;
                }
                let mut b = a.clone();
                for r in 0..=room - s {
                    if r > 0 {
                        b = x.commutator(&b).scale(&inv(r));
                    }
                    if b.is_zero() {
                        break;
                    }
                    if r + s == 0 {
                        continue;
                    }
                    let slot = next.entry((i + r, j + s)).or_insert_with(|| PadicMatrix::zeros(n, n, ctx));
                    *slot = &*slot + &b;
                }
            }
        }
        layer = next;
    }
    if nilpotent_within(x, y, deg) {
        z
    } else {
        z.truncate_abs(target)
    }
}

/// Whether every right-nested bracket of `x, y` of some length `<= max_len`
/// vanishes, so that the degree-truncated series is exact. Gives up beyond
/// length 8.
fn nilpotent_within(x: &PadicMatrix, y: &PadicMatrix, max_len: usize) -> bool {
    let mut level = vec![x.clone(), y.clone()];
    for _ in 1..max_len.min(8) {
        level = level
            .iter()
            .flat_map(|b| [x.commutator(b), y.commutator(b)])
            .filter(|b| !b.is_zero())
            .collect();
        if level.is_empty() {
            return true;
        }
    }
    false
}
