use crate::error::{Error, Result};
use crate::padic::PadicScalar;

use super::PadicMatrix;

/// Coefficients of `det(x I - M)`, constant term first (monic).
///
/// Uses the division-free Berkowitz recursion, so no precision is lost to
/// pivots.
pub fn char_poly(m: &PadicMatrix) -> Result<Vec<PadicScalar>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("characteristic polynomial of a non-square matrix".into()));
    }
    let ctx = m.context();
    let n = m.dim();
    let zero = ctx.zero();
    let one = ctx.one();

    let mut transforms: Vec<Vec<Vec<PadicScalar>>> = Vec::with_capacity(n);
    let mut block = m.to_rows();
    for size in (2..=n).rev() {
        let k = size - 1;
        let r: Vec<PadicScalar> = block[k][..k].iter().map(|x| -*x).collect();
        let col: Vec<PadicScalar> = (0..k).map(|i| block[i][k]).collect();
        let inner: Vec<Vec<PadicScalar>> = block[..k].iter().map(|row| row[..k].to_vec()).collect();
        let alpha = -block[k][k];

        let mut powers = vec![col];
        for i in 0..size.saturating_sub(2) {
            let next = (0..k)
                .map(|row| inner[row].iter().zip(&powers[i]).fold(zero, |acc, (a, b)| acc + *a * *b))
                .collect();
            powers.push(next);
        }
        let mut items = vec![one, alpha];
        items.extend(powers.iter().map(|b| r.iter().zip(b).fold(zero, |acc, (a, b)| acc + *a * *b)));

        let mut t = vec![vec![zero; size]; size + 1];
        for j in 0..size {
            for (i, item) in items.iter().enumerate().take(size + 1 - j) {
                t[i + j][j] = *item;
            }
        }
        transforms.push(t);
        block = inner;
    }

    let mut poly = vec![one, -block[0][0]];
    for t in transforms.iter().rev() {
        poly = t.iter().map(|row| row.iter().zip(&poly).fold(zero, |acc, (a, b)| acc + *a * *b)).collect();
    }
    poly.reverse();
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicContext;

    fn assert_poly(got: &[PadicScalar], want: &[PadicScalar], abs: i64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!(g.agrees_to(w, abs), "{g} vs {w}");
        }
    }

    #[test]
    fn two_by_two() {
        let c = PadicContext::new(5, 10).unwrap();
        let m = PadicMatrix::from_ints(&[vec![1, 2], vec![3, 4]], c);
        // x^2 - 5x - 2
        assert_poly(&char_poly(&m).unwrap(), &[c.int(-2), c.int(-5), c.one()], 10);
    }

    #[test]
    fn three_by_three_matches_expansion() {
        let c = PadicContext::new(7, 10).unwrap();
        let m = PadicMatrix::from_ints(&[vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 4]], c);
        // det(xI - M) = x^3 - 9x^2 + 24x - 18
        assert_poly(&char_poly(&m).unwrap(), &[c.int(-18), c.int(24), c.int(-9), c.one()], 10);
    }

    #[test]
    fn one_by_one() {
        let c = PadicContext::new(3, 6).unwrap();
        let m = PadicMatrix::from_ints(&[vec![4]], c);
        assert_eq!(char_poly(&m).unwrap(), vec![c.int(-4), c.one()]);
    }
}
