use super::{exp, log};
use crate::dynamics::{HorosphericalDecomposition, Stability};
use crate::error::{Error, Result};
use crate::matrix::PadicMatrix;

/// `g = f · h` with `f ∈ K^{G+}_k` and `h ∈ K^P_{k,k}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub f: PadicMatrix,
    pub h: PadicMatrix,
    pub iterations: usize,
}

const MAX_ROUNDS: usize = 64;

/// Split `g ∈ K^G_k` into an unstable factor on the left and a
/// thickened-stable factor on the right.
///
/// Each round peels `exp v` and `exp w` off the residue, where `v` and `w`
/// are the unstable and remaining parts of its logarithm; the residue is then
/// `exp` of a commutator term and its distance to `e` roughly squares.
pub fn horospherical_factor(g: &PadicMatrix, k: i64, dec: &HorosphericalDecomposition) -> Result<Factorization> {
    if k < 2 {
        return Err(Error::LevelTooSmall(format!("factorization needs k >= 2, got {k}")));
    }
    if !dec.group.ball_membership(g, k) {
        return Err(Error::DomainError(format!("g is not in K^G_{k}")));
    }
    let ctx = g.context();
    let target = ctx.precision() as i64;
    let e = PadicMatrix::identity(g.dim(), ctx);
    let classes = dec.classes();
    let distance = |r: &PadicMatrix| (r - &e).truncate_abs(target).min_valuation().unwrap_or(target);

    let mut residue = g.clone();
    let mut f = e.clone();
    let mut h = e.clone();
    let mut last = distance(&residue);
    let mut rounds = 0;
    while last < target {
        if rounds == MAX_ROUNDS {
            return Err(Error::NoConvergence(format!("residue stuck at valuation {last}")));
        }
        rounds += 1;
        let coords = dec.eigen_coordinates(&log(&residue)?)?;
        let zero = ctx.zero();
        let split = |keep: bool| -> Vec<_> {
            coords
                .iter()
                .zip(&classes)
                .map(|(c, &cls)| if (cls == Stability::Unstable) == keep { *c } else { zero })
                .collect()
        };
        let v = dec.from_eigen_coordinates(&split(true));
        let w = dec.from_eigen_coordinates(&split(false));
        let (fi, hi) = (exp(&v)?, exp(&w)?);
        residue = (&(&exp(&-&v)? * &residue) * &exp(&-&w)?).truncate_abs(target);
        f = (&f * &fi).truncate_abs(target);
        h = (&hi * &h).truncate_abs(target);
        let now = distance(&residue);
        if now <= last {
            return Err(Error::NoConvergence(format!("residue did not shrink below valuation {last}")));
        }
        last = now;
    }
    Ok(Factorization { f, h, iterations: rounds })
}
