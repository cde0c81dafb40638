//! Exponential and logarithm on the `p^-2` balls, BCH composition, and the
//! groups they act on.

mod bch;
mod factor;

use crate::error::{Error, Result};
use crate::matrix::{Echelon, PadicMatrix};
use crate::padic::{PadicContext, PadicScalar};

pub use bch::{bch, dynkin_degree_bound, BchMode};
pub use factor::{horospherical_factor, Factorization};

/// Smallest ball level on which `exp` and `log` are used.
pub const INJECTIVITY_LEVEL: i64 = 2;

/// A monomial `coeff * prod g_ij^e_ij` in the `d*d` matrix entries (row-major).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: PadicScalar,
    pub exponents: Vec<u32>,
}

/// A polynomial in the matrix entries, one of the defining equations of a group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn eval(&self, g: &PadicMatrix) -> PadicScalar {
        let entries = g.entries();
        self.terms
            .iter()
            .map(|t| {
                t.exponents
                    .iter()
                    .zip(entries)
                    .fold(t.coeff, |acc, (&e, x)| if e == 0 { acc } else { acc * x.pow(e) })
            })
            .fold(g.context().zero(), |a, x| a + x)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupFamily {
    Special,
    General,
    Custom(Vec<Polynomial>),
}

/// Maps algebra elements to coordinates in the Lie basis.
#[derive(Debug, Clone, PartialEq, Eq)]
struct CoordinateMap {
    entry_rows: Vec<usize>,
    inverse: PadicMatrix,
}

/// A linear algebraic group `G < GL_d(Q_p)` with a `Z_p`-basis of its Lie
/// algebra lattice `g ∩ Mat_d(Z_p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSpec {
    family: GroupFamily,
    dim_ambient: usize,
    lie_basis: Vec<PadicMatrix>,
    coords: CoordinateMap,
}

impl GroupSpec {
    /// `SL_d` with basis `E_ij (i<j)`, `H_i = E_ii - E_(i+1)(i+1)`, `E_ij (i>j)`.
    pub fn sl(d: usize, ctx: PadicContext) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidInput("SL_d needs d >= 2".into()));
        }
        let mut basis = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                basis.push(PadicMatrix::unit(d, i, j, ctx));
            }
        }
        for i in 0..d - 1 {
            basis.push(&PadicMatrix::unit(d, i, i, ctx) - &PadicMatrix::unit(d, i + 1, i + 1, ctx));
        }
        for i in 0..d {
            for j in 0..i {
                basis.push(PadicMatrix::unit(d, i, j, ctx));
            }
        }
        Self::build(GroupFamily::Special, d, basis)
    }

    /// `GL_d` with the matrix units in row-major order.
    pub fn gl(d: usize, ctx: PadicContext) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidInput("GL_d needs d >= 1".into()));
        }
        let basis = (0..d * d).map(|k| PadicMatrix::unit(d, k / d, k % d, ctx)).collect();
        Self::build(GroupFamily::General, d, basis)
    }

    /// A group cut out by polynomial equations, with a user-supplied
    /// `Z_p`-basis of its Lie algebra lattice.
    pub fn custom(d: usize, equations: Vec<Polynomial>, lie_basis: Vec<PadicMatrix>) -> Result<Self> {
        if lie_basis.is_empty() {
            return Err(Error::InvalidInput("empty Lie basis".into()));
        }
        for (i, b) in lie_basis.iter().enumerate() {
            if b.rows() != d || b.cols() != d {
                return Err(Error::DimensionMismatch(format!("basis element {i} is not {d}x{d}")));
            }
            if b.min_valuation() != Some(0) {
                return Err(Error::InvalidInput(format!("basis element {i} is not integral with unit content")));
            }
        }
        if equations.iter().flat_map(|e| &e.terms).any(|t| t.exponents.len() != d * d) {
            return Err(Error::InvalidInput(format!("monomials need {} exponents", d * d)));
        }
        let spec = Self::build(GroupFamily::Custom(equations), d, lie_basis)?;
        // the basis must span the whole integral lattice of its Q_p-span
        let flat: Vec<_> = spec.lie_basis.iter().map(PadicMatrix::flatten).collect();
        for v in crate::matrix::zp_module_basis(&flat)? {
            let x = PadicMatrix::from_flat(&v, d, d)?;
            if spec.lie_coordinates(&x)?.iter().any(|c| !c.is_integral()) {
                return Err(Error::InvalidInput("Lie basis does not span the integral lattice".into()));
            }
        }
        Ok(spec)
    }

    fn build(family: GroupFamily, d: usize, lie_basis: Vec<PadicMatrix>) -> Result<Self> {
        let ctx = lie_basis[0].context();
        let flat: Vec<Vec<PadicScalar>> = lie_basis.iter().map(PadicMatrix::flatten).collect();
        let ech = Echelon::reduce(flat.clone(), None);
        if ech.pivots.len() != lie_basis.len() {
            return Err(Error::InvalidInput("Lie basis is linearly dependent".into()));
        }
        let entry_rows = ech.pivots;
        let m = lie_basis.len();
        let mut square = PadicMatrix::zeros(m, m, ctx);
        for (r, &e) in entry_rows.iter().enumerate() {
            for (c, b) in flat.iter().enumerate() {
                square[(r, c)] = b[e];
            }
        }
        let inverse = square.inverse()?;
        Ok(Self { family, dim_ambient: d, lie_basis, coords: CoordinateMap { entry_rows, inverse } })
    }

    pub fn family(&self) -> &GroupFamily {
        &self.family
    }

    pub fn dim_ambient(&self) -> usize {
        self.dim_ambient
    }

    /// `dim g`.
    pub fn dim(&self) -> usize {
        self.lie_basis.len()
    }

    pub fn lie_basis(&self) -> &[PadicMatrix] {
        &self.lie_basis
    }

    pub fn context(&self) -> PadicContext {
        self.lie_basis[0].context()
    }

    pub fn name(&self) -> String {
        match self.family {
            GroupFamily::Special => format!("SL{}", self.dim_ambient),
            GroupFamily::General => format!("GL{}", self.dim_ambient),
            GroupFamily::Custom(_) => format!("custom{}", self.dim_ambient),
        }
    }

    /// Coordinates of `x` in the Lie basis, read off from a set of
    /// independent entries. Use [`GroupSpec::in_algebra`] to check that `x`
    /// actually lies in the algebra.
    pub fn lie_coordinates(&self, x: &PadicMatrix) -> Result<Vec<PadicScalar>> {
        if x.rows() != self.dim_ambient || x.cols() != self.dim_ambient {
            return Err(Error::DimensionMismatch("element has the wrong size".into()));
        }
        let picked: Vec<_> = self.coords.entry_rows.iter().map(|&e| x.entries()[e]).collect();
        Ok(self.coords.inverse.apply(&picked))
    }

    pub fn from_coordinates(&self, coords: &[PadicScalar]) -> PadicMatrix {
        let ctx = self.context();
        let d = self.dim_ambient;
        coords
            .iter()
            .zip(&self.lie_basis)
            .fold(PadicMatrix::zeros(d, d, ctx), |acc, (c, b)| if c.is_zero() { acc } else { &acc + &b.scale(c) })
    }

    fn vanishes(&self, x: &PadicScalar) -> bool {
        x.valuation().is_none_or(|v| v >= self.context().precision() as i64)
    }

    /// Whether `x` lies in the Lie algebra at the working precision.
    pub fn in_algebra(&self, x: &PadicMatrix) -> bool {
        let Ok(c) = self.lie_coordinates(x) else {
            return false;
        };
        let back = self.from_coordinates(&c);
        (x - &back).entries().iter().all(|e| self.vanishes(e))
    }

    /// Whether the defining equations hold at `g` at the working precision.
    pub fn satisfies_equations(&self, g: &PadicMatrix) -> bool {
        if g.rows() != self.dim_ambient || g.cols() != self.dim_ambient {
            return false;
        }
        match &self.family {
            GroupFamily::Special => g.det().is_ok_and(|d| self.vanishes(&(d - self.context().one()))),
            GroupFamily::General => g.det().is_ok_and(|d| !d.is_zero()),
            GroupFamily::Custom(eqs) => eqs.iter().all(|eq| self.vanishes(&eq.eval(g))),
        }
    }

    /// `g ∈ K^G_k`: `||g - e|| <= p^-k` and `g ∈ G`.
    pub fn ball_membership(&self, g: &PadicMatrix, k: i64) -> bool {
        if g.rows() != self.dim_ambient || g.cols() != self.dim_ambient {
            return false;
        }
        let e = PadicMatrix::identity(self.dim_ambient, self.context());
        (g - &e).norm_at_most(k) && self.satisfies_equations(g)
    }

    /// `X ∈ K^g_k`: `||X|| <= p^-k` and `X ∈ g`.
    pub fn lie_ball_membership(&self, x: &PadicMatrix, k: i64) -> bool {
        x.norm_at_most(k) && self.in_algebra(x)
    }
}

/// `g ∈ K^G_k` for the group described by `spec`.
pub fn ball_membership(g: &PadicMatrix, spec: &GroupSpec, k: i64) -> bool {
    spec.ball_membership(g, k)
}

fn check_square(m: &PadicMatrix) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch("expected a square matrix".into()))
    }
}

/// `exp X = sum X^n / n!` on `||X|| <= p^-2`; isometric there.
///
/// Terms are summed until every remaining one is certified to vanish modulo
/// `p^N` via `|n!|_p >= p^(-(n-1)/(p-1))`; the result is truncated to
/// absolute precision `N`.
pub fn exp(x: &PadicMatrix) -> Result<PadicMatrix> {
    check_square(x)?;
    let ctx = x.context();
    let n = x.dim();
    let target = ctx.precision() as i64;
    let Some(v) = x.min_valuation() else {
        return Ok(PadicMatrix::identity(n, ctx));
    };
    if v < INJECTIVITY_LEVEL {
        return Err(Error::DomainError(format!("exp needs ||X|| <= p^-2, got valuation {v}")));
    }
    let p1 = ctx.p() as i64 - 1;
    let mut sum = PadicMatrix::identity(n, ctx);
    let mut term = PadicMatrix::identity(n, ctx);
    for k in 1i64.. {
        term = (&term * x).scale(&ctx.ratio(1, k as i128));
        if term.is_zero() {
            // nilpotent: the sum is exact
            return Ok(sum);
        }
        sum = &sum + &term;
        // lower bound on v(X^m/m!) for m = k+1, increasing in m
        if (k + 1) * v * p1 - k >= target * p1 {
            break;
        }
    }
    Ok(sum.truncate_abs(target))
}

/// `log g = sum (-1)^(n+1) (g-e)^n / n` on `||g - e|| <= p^-2`.
pub fn log(g: &PadicMatrix) -> Result<PadicMatrix> {
    check_square(g)?;
    let ctx = g.context();
    let n = g.dim();
    let target = ctx.precision() as i64;
    let y = g - &PadicMatrix::identity(n, ctx);
    let Some(v) = y.min_valuation() else {
        return Ok(PadicMatrix::zeros(n, n, ctx));
    };
    if v < INJECTIVITY_LEVEL {
        return Err(Error::DomainError(format!("log needs ||g - e|| <= p^-2, got valuation {v}")));
    }
    let mut sum = PadicMatrix::zeros(n, n, ctx);
    let mut power = PadicMatrix::identity(n, ctx);
    for k in 1i64.. {
        power = &power * &y;
        if power.is_zero() {
            return Ok(sum);
        }
        let sign = if k % 2 == 1 { 1 } else { -1 };
        sum = &sum + &power.scale(&ctx.ratio(sign, k as i128));
        // v((g-e)^m / m) >= m v - floor(log_p m), increasing in m for v >= 2
        let m = k + 1;
        if m * v - ilog(m as u64, ctx.p()) as i64 >= target {
            break;
        }
    }
    Ok(sum.truncate_abs(target))
}

/// `floor(log_p m)` for `m >= 1`.
pub(crate) fn ilog(m: u64, p: u64) -> u32 {
    let mut e = 0;
    let mut q = m;
    while q >= p {
        q /= p;
        e += 1;
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c3() -> PadicContext {
        PadicContext::new(3, 12).unwrap()
    }

    #[test]
    fn sl_basis_order_matches_convention() {
        let c = c3();
        let g = GroupSpec::sl(2, c).unwrap();
        assert_eq!(g.dim(), 3);
        assert_eq!(g.lie_basis()[0], PadicMatrix::unit(2, 0, 1, c));
        assert_eq!(g.lie_basis()[2], PadicMatrix::unit(2, 1, 0, c));
        assert_eq!(GroupSpec::sl(3, c).unwrap().dim(), 8);
        assert_eq!(GroupSpec::gl(3, c).unwrap().dim(), 9);
    }

    #[test]
    fn coordinates_round_trip() {
        let c = c3();
        let g = GroupSpec::sl(3, c).unwrap();
        let coords: Vec<_> = (1..=8).map(|i| c.int(i)).collect();
        let x = g.from_coordinates(&coords);
        assert_eq!(g.lie_coordinates(&x).unwrap(), coords);
        assert!(g.in_algebra(&x));
        assert!(!g.in_algebra(&PadicMatrix::identity(3, c)));
    }

    #[test]
    fn exp_of_nilpotent_terminates() {
        let c = c3();
        let x = PadicMatrix::unit(2, 0, 1, c).scale(&c.int(9));
        let g = exp(&x).unwrap();
        assert_eq!(g, &PadicMatrix::identity(2, c) + &x);
        assert_eq!(exp(&PadicMatrix::zeros(2, 2, c)).unwrap(), PadicMatrix::identity(2, c));
    }

    #[test]
    fn exp_rejects_large_arguments() {
        let c = c3();
        let x = PadicMatrix::unit(2, 0, 1, c).scale(&c.int(3));
        assert!(matches!(exp(&x), Err(Error::DomainError(_))));
        assert!(matches!(log(&(&PadicMatrix::identity(2, c) + &x)), Err(Error::DomainError(_))));
    }

    #[test]
    fn log_of_nilpotent_and_identity() {
        let c = c3();
        let x = PadicMatrix::unit(2, 1, 0, c).scale(&c.int(9));
        assert_eq!(log(&(&PadicMatrix::identity(2, c) + &x)).unwrap(), x);
        assert!(log(&PadicMatrix::identity(2, c)).unwrap().is_zero());
    }

    #[test]
    fn exp_of_scalar_matches_series_value() {
        // exp(9) in Q_3 modulo 3^12, against an independent scalar sum
        let c = c3();
        let x = PadicMatrix::identity(1, c).scale(&c.int(9));
        let g = exp(&x).unwrap();
        let mut expected = c.zero();
        let mut term = c.one();
        for k in 1..40 {
            expected = expected + term;
            term = term * c.int(9) * c.ratio(1, k);
        }
        assert!(g[(0, 0)].agrees_to(&expected, 12));
    }

    #[test]
    fn ball_membership_examples() {
        let c = c3();
        let sl2 = GroupSpec::sl(2, c).unwrap();
        let e = PadicMatrix::identity(2, c);
        for k in 0..12 {
            assert!(ball_membership(&e, &sl2, k));
        }
        let g = &e + &PadicMatrix::unit(2, 0, 1, c).scale(&c.int(3));
        assert!(!ball_membership(&g, &sl2, 2));
        assert!(ball_membership(&g, &sl2, 1));
        // determinant 1 + 9 is not in SL_2
        let h = &e + &PadicMatrix::unit(2, 0, 0, c).scale(&c.int(9));
        assert!(!ball_membership(&h, &sl2, 2));
        assert!(ball_membership(&h, &GroupSpec::gl(2, c).unwrap(), 2));
    }

    #[test]
    fn custom_group_checks_its_equations() {
        // the diagonal torus of SL_2: g01 = 0, g10 = 0, g00 g11 = 1
        let c = c3();
        let mono = |coeff: i128, e: [u32; 4]| Monomial { coeff: c.int(coeff), exponents: e.to_vec() };
        let eqs = vec![
            Polynomial { terms: vec![mono(1, [0, 1, 0, 0])] },
            Polynomial { terms: vec![mono(1, [0, 0, 1, 0])] },
            Polynomial { terms: vec![mono(1, [1, 0, 0, 1]), mono(-1, [0, 0, 0, 0])] },
        ];
        let h = &PadicMatrix::unit(2, 0, 0, c) - &PadicMatrix::unit(2, 1, 1, c);
        let torus = GroupSpec::custom(2, eqs, vec![h.clone()]).unwrap();
        let t = exp(&h.scale(&c.int(9))).unwrap();
        assert!(torus.ball_membership(&t, 2));
        let u = exp(&PadicMatrix::unit(2, 0, 1, c).scale(&c.int(9))).unwrap();
        assert!(!torus.ball_membership(&u, 2));
        // a non-saturated basis is rejected
        assert!(GroupSpec::custom(2, vec![], vec![h.scale(&c.int(3))]).is_err());
    }
}
