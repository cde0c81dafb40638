use super::{HorosphericalDecomposition, Stability};
use crate::error::{Error, Result};
use crate::liegroup::exp;
use crate::matrix::PadicMatrix;

/// Smallest level at which the atoms `x K^P_{k,k}` split cleanly: `|ν| + 2`.
pub fn min_partition_level(dec: &HorosphericalDecomposition) -> i64 {
    dec.nu_total as i64 + 2
}

/// Transversal `{exp(sum_i c_i p^(k-ν_i) u_i)}` of `K^{g-}_{k-ν} / K^{g-}_k`,
/// with `0 <= c_i < p^ν_i`; the first stable vector carries the slowest digit.
pub fn atom_representatives(dec: &HorosphericalDecomposition, k: i64) -> Result<Vec<PadicMatrix>> {
    let need = min_partition_level(dec);
    if k < need {
        return Err(Error::LevelTooSmall(format!("k = {k} but atoms need k >= |nu| + 2 = {need}")));
    }
    let ctx = dec.group.context();
    let p = dec.p();
    let stable: Vec<(&PadicMatrix, i64)> = dec
        .vectors()
        .into_iter()
        .filter(|(_, _, c)| *c == Stability::Stable)
        .map(|(u, v, _)| (u, v))
        .collect();
    let d = dec.group.dim_ambient();
    let total = p.pow(dec.nu_total as u32);
    (0..total)
        .map(|mut index| {
            let mut x = PadicMatrix::zeros(d, d, ctx);
            for &(u, v) in stable.iter().rev() {
                let radix = p.pow(v as u32);
                let digit = index % radix;
                index /= radix;
                if digit != 0 {
                    x = &x + &u.scale(&(ctx.int(digit as i128) * ctx.p_power(k - v)));
                }
            }
            exp(&x)
        })
        .collect()
}

/// The index `j` with `g_j^-1 g ∈ K^P_{k,k}`, if any.
pub fn classify_atom(dec: &HorosphericalDecomposition, reps: &[PadicMatrix], k: i64, g: &PadicMatrix) -> Option<usize> {
    reps.iter().position(|r| {
        r.inverse().is_ok_and(|ri| dec.in_thickened_stable_ball(&(&ri * g), k, k))
    })
}
