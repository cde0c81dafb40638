use crate::error::{Error, Result};
use crate::padic::PadicScalar;

use super::Echelon;

/// A `Z_p`-basis of `span_Qp(vectors) ∩ Z_p^n`.
///
/// Gauss-Jordan with minimal-valuation complete pivoting leaves rows of the
/// form `[I | C]` (up to a column permutation) with `C` integral, so the
/// reduced rows are integral, contain a unit entry, and every integral
/// vector of the span has integral coordinates in them.
pub fn zp_module_basis(vectors: &[Vec<PadicScalar>]) -> Result<Vec<Vec<PadicScalar>>> {
    let Some(first) = vectors.first() else {
        return Ok(Vec::new());
    };
    let n = first.len();
    if vectors.iter().any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch("vectors of different lengths".into()));
    }
    let ech = Echelon::reduce(vectors.to_vec(), None);
    for row in &ech.rows {
        if row.iter().any(|x| !x.is_integral()) {
            return Err(Error::PrecisionExhausted("reduced basis vector is not integral".into()));
        }
    }
    Ok(ech.rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicContext;

    #[test]
    fn scales_up_to_a_unit_vector() {
        let c = PadicContext::new(3, 12).unwrap();
        let basis = zp_module_basis(&[vec![c.ratio(1, 3), c.zero()]]).unwrap();
        assert_eq!(basis, vec![vec![c.one(), c.zero()]]);
    }

    #[test]
    fn standard_basis_is_kept() {
        let c = PadicContext::new(3, 12).unwrap();
        let input = vec![vec![c.one(), c.zero()], vec![c.zero(), c.one()]];
        assert_eq!(zp_module_basis(&input).unwrap(), input);
    }

    #[test]
    fn divides_out_the_content() {
        let c = PadicContext::new(3, 12).unwrap();
        let basis = zp_module_basis(&[vec![c.int(3), c.int(9)]]).unwrap();
        assert_eq!(basis, vec![vec![c.one(), c.int(3)]]);
        assert_eq!(basis[0].iter().filter_map(|x| x.valuation()).min(), Some(0));
    }

    #[test]
    fn dependent_inputs_collapse() {
        let c = PadicContext::new(5, 8).unwrap();
        let basis = zp_module_basis(&[
            vec![c.int(5), c.int(10), c.zero()],
            vec![c.int(1), c.int(2), c.zero()],
            vec![c.zero(), c.int(25), c.int(5)],
        ])
        .unwrap();
        assert_eq!(basis.len(), 2);
    }
}
