//! Roots in `Q_p` of polynomials with `Q_p` coefficients.
//!
//! Roots are separated by valuation with the Newton polygon, then by residue
//! class. Simple residues are lifted by Newton's method; a residue carrying
//! several roots is refined on the smaller disk `r0 + p^j Z_p` until either
//! the cluster splits or its lower coefficients vanish at the working
//! precision, in which case it is reported as one root with multiplicity.

use crate::error::{Error, Result};
use crate::padic::{PadicContext, PadicScalar};

/// A root together with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Root {
    pub value: PadicScalar,
    pub multiplicity: usize,
}

/// Horner evaluation; `coeffs[i]` multiplies `x^i`.
pub fn eval_poly(coeffs: &[PadicScalar], x: &PadicScalar) -> PadicScalar {
    coeffs.iter().rev().fold(x.context().zero(), |acc, c| acc * *x + *c)
}

fn derivative(coeffs: &[PadicScalar]) -> Vec<PadicScalar> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| *c * c.context().int(i as i128))
        .collect()
}

/// Coefficients of `f(c + z)`.
fn taylor_shift(coeffs: &[PadicScalar], c: &PadicScalar) -> Vec<PadicScalar> {
    let mut a = coeffs.to_vec();
    let n = a.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let add = a[j + 1] * *c;
            a[j] = a[j] + add;
        }
    }
    a
}

/// Coefficients of `f(p^e z)`.
fn scale_variable(coeffs: &[PadicScalar], e: i64) -> Vec<PadicScalar> {
    coeffs.iter().enumerate().map(|(i, c)| c.shift(e * i as i64)).collect()
}

/// Divide by the content so the minimal coefficient valuation is zero.
fn normalize(coeffs: &[PadicScalar]) -> Vec<PadicScalar> {
    let v = coeffs.iter().filter_map(PadicScalar::valuation).min().unwrap_or(0);
    coeffs.iter().map(|c| c.shift(-v)).collect()
}

/// Truncate every coefficient to the least absolute precision among them, so
/// that digits past a cancelled partial sum are never trusted.
fn cap(coeffs: &[PadicScalar]) -> Vec<PadicScalar> {
    match coeffs.iter().filter_map(PadicScalar::abs_precision).min() {
        Some(a) => coeffs.iter().map(|c| c.truncate_abs(a)).collect(),
        None => coeffs.to_vec(),
    }
}

fn cap_at(coeffs: &[PadicScalar], a: Option<i64>) -> Vec<PadicScalar> {
    match a {
        Some(a) => coeffs.iter().map(|c| c.truncate_abs(a)).collect(),
        None => coeffs.to_vec(),
    }
}

fn reduce_mod_p(coeffs: &[PadicScalar], p: u64) -> Vec<u64> {
    coeffs.iter().map(|c| c.residue(1).unwrap_or(0) % p).collect()
}

fn degree_mod_p(red: &[u64]) -> Option<usize> {
    red.iter().rposition(|&c| c != 0)
}

/// Roots of a polynomial over `F_p` with multiplicities, by exhaustion.
fn fp_roots(red: &[u64], p: u64) -> Vec<(u64, usize)> {
    let mut out = Vec::new();
    let Some(deg) = degree_mod_p(red) else {
        return out;
    };
    for t in 0..p {
        let mut q: Vec<u64> = red[..=deg].to_vec();
        let mut mult = 0;
        while q.len() > 1 {
            // synthetic division by (x - t)
            let mut quotient = vec![0u64; q.len() - 1];
            let mut carry = 0u64;
            for i in (0..q.len()).rev() {
                let cur = (q[i] + carry * t) % p;
                if i == 0 {
                    carry = cur;
                } else {
                    quotient[i - 1] = cur;
                    carry = cur;
                }
            }
            if carry != 0 {
                break;
            }
            mult += 1;
            q = quotient;
        }
        if mult > 0 {
            out.push((t, mult));
        }
    }
    out
}

/// Newton iteration from an approximate simple root.
fn newton_lift(coeffs: &[PadicScalar], start: PadicScalar, target: i64) -> Result<PadicScalar> {
    let deriv = derivative(coeffs);
    let mut t = start;
    for _ in 0..128 {
        let value = eval_poly(coeffs, &t);
        if value.valuation().is_none_or(|v| v >= target) {
            return Ok(t.truncate_abs(target));
        }
        let slope = eval_poly(&deriv, &t);
        if slope.valuation().is_none_or(|v| v > 0) {
            return Err(Error::NotSplitAtPrecision("derivative vanishes at a simple residue".into()));
        }
        t = t - value * slope.inv()?;
    }
    Err(Error::NotSplitAtPrecision("Newton iteration did not converge".into()))
}

struct Finder {
    ctx: PadicContext,
    max_depth: u32,
}

impl Finder {
    #[allow(clippy::too_many_arguments)]
    fn split_residues(
        &self,
        g: &[PadicScalar],
        red: &[u64],
        center: PadicScalar,
        j: i64,
        count: usize,
        depth: u32,
        units_only: bool,
    ) -> Result<Vec<Root>> {
        let residues: Vec<(u64, usize)> =
            fp_roots(red, self.ctx.p()).into_iter().filter(|(t, _)| !units_only || *t != 0).collect();
        let found: usize = residues.iter().map(|(_, m)| m).sum();
        if found != count {
            return Err(Error::NotSplitAtPrecision(format!(
                "{found} of {count} roots have residues in F_{}",
                self.ctx.p()
            )));
        }
        let target = self.ctx.precision() as i64;
        let mut out = Vec::new();
        for (t0, mult) in residues {
            let t0 = self.ctx.int(t0 as i128);
            if mult == 1 {
                let t = newton_lift(g, t0, target)?;
                out.push(Root { value: (center + t.shift(j)).truncate_abs(target + j), multiplicity: 1 });
            } else {
                let sub_center = center + t0.shift(j);
                // `g` is `h(center + p^j t)`; refine on `t0 + p t`
                let floor = g.iter().filter_map(PadicScalar::abs_precision).min();
                let shifted = scale_variable(&cap_at(&taylor_shift(g, &t0), floor), 1);
                if shifted[..mult.min(shifted.len())].iter().all(PadicScalar::is_zero) {
                    out.push(Root { value: sub_center, multiplicity: mult });
                    continue;
                }
                let shifted = normalize(&shifted);
                let red = reduce_mod_p(&shifted, self.ctx.p());
                if degree_mod_p(&red) != Some(mult) {
                    return Err(Error::NotSplitAtPrecision("roots leave Q_p inside a residue disk".into()));
                }
                if depth + 1 > self.max_depth {
                    return Err(Error::NotSplitAtPrecision("root cluster unresolved at working precision".into()));
                }
                out.extend(self.split_residues(&shifted, &red, sub_center, j + 1, mult, depth + 1, false)?);
            }
        }
        Ok(out)
    }
}

/// All roots of `sum coeffs[i] x^i` in `Q_p`, with multiplicities.
///
/// Fails with `NotSplitAtPrecision` when some root lies outside `Q_p`
/// (a ramified slope in the Newton polygon, or a residue factor with no
/// `F_p`-root) or when a root cluster cannot be resolved within `2N`
/// refinements.
pub fn hensel_roots(coeffs: &[PadicScalar], ctx: PadicContext) -> Result<Vec<Root>> {
    let Some(deg) = coeffs.iter().rposition(|c| !c.is_zero()) else {
        return Err(Error::InvalidInput("the zero polynomial has no finite root set".into()));
    };
    let coeffs = &coeffs[..=deg];
    let mut roots = Vec::new();
    let zeros = coeffs.iter().take_while(|c| c.is_zero()).count();
    if zeros > 0 {
        roots.push(Root { value: ctx.zero(), multiplicity: zeros });
    }
    let f = &coeffs[zeros..];
    if f.len() == 1 {
        return Ok(roots);
    }

    let points: Vec<(i64, i64)> = f
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.valuation().map(|v| (i as i64, v)))
        .collect();
    let hull = lower_hull(&points);
    let finder = Finder { ctx, max_depth: 2 * ctx.precision() };
    for w in hull.windows(2) {
        let ((i0, v0), (i1, v1)) = (w[0], w[1]);
        let len = i1 - i0;
        if (v0 - v1) % len != 0 {
            return Err(Error::NotSplitAtPrecision(format!(
                "Newton polygon slope {}/{} is not integral",
                v0 - v1,
                len
            )));
        }
        let root_val = (v0 - v1) / len;
        let h = cap(&normalize(&scale_variable(f, root_val)));
        let red = reduce_mod_p(&h, ctx.p());
        let unit_roots = finder.split_residues(&h, &red, ctx.zero(), 0, len as usize, 0, true)?;
        roots.extend(unit_roots.into_iter().map(|r| Root { value: r.value.shift(root_val), ..r }));
    }
    roots.sort_by_key(|r| (r.value.valuation().unwrap_or(i64::MAX), r.value.unit().unwrap_or(0)));
    Ok(roots)
}

/// Lower convex hull of points sorted by abscissa.
fn lower_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &pt in points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    hull
}
