//! Matrices over `Q_p` with the ultrametric max-norm.
//!
//! Elimination always pivots on an entry of minimal valuation in the
//! remaining block (ties broken in row-major order), the p-adic analogue of
//! complete pivoting. On unimodular input this never divides by a non-unit.

mod charpoly;
mod hensel;
mod lattice;

use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::Zero;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::padic::{p_power_rational, PadicContext, PadicScalar};

pub use charpoly::char_poly;
pub use hensel::{eval_poly, hensel_roots, Root};
pub use lattice::zp_module_basis;

/// A `rows x cols` array of scalars sharing one context.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PadicMatrix {
    ctx: PadicContext,
    rows: usize,
    cols: usize,
    data: Vec<PadicScalar>,
}

impl PadicMatrix {
    pub fn zeros(rows: usize, cols: usize, ctx: PadicContext) -> Self {
        Self { ctx, rows, cols, data: vec![ctx.zero(); rows * cols] }
    }

    pub fn identity(dim: usize, ctx: PadicContext) -> Self {
        let mut m = Self::zeros(dim, dim, ctx);
        for i in 0..dim {
            m[(i, i)] = ctx.one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<PadicScalar>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::DimensionMismatch("empty matrix".into()));
        }
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let ctx = rows[0][0].context();
        let data: Vec<_> = rows.into_iter().flatten().collect();
        if data.iter().any(|x| x.context() != ctx) {
            return Err(Error::ContextMismatch);
        }
        Ok(Self { ctx, rows: r, cols: c, data })
    }

    /// Build from `(numerator, denominator)` pairs.
    pub fn from_ratios(rows: &[Vec<(i128, i128)>], ctx: PadicContext) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|row| row.iter().map(|&(a, b)| PadicScalar::from_rational(a, b, ctx)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }

    pub fn from_ints(rows: &[Vec<i128>], ctx: PadicContext) -> Self {
        let rows = rows.iter().map(|row| row.iter().map(|&a| ctx.int(a)).collect()).collect();
        Self::from_rows(rows).expect("well-formed integer rows")
    }

    pub fn diagonal(entries: &[PadicScalar]) -> Self {
        let ctx = entries[0].context();
        let mut m = Self::zeros(entries.len(), entries.len(), ctx);
        for (i, x) in entries.iter().enumerate() {
            m[(i, i)] = *x;
        }
        m
    }

    /// The matrix unit `E_ij`.
    pub fn unit(dim: usize, i: usize, j: usize, ctx: PadicContext) -> Self {
        let mut m = Self::zeros(dim, dim, ctx);
        m[(i, j)] = ctx.one();
        m
    }

    #[inline]
    pub fn context(&self) -> PadicContext {
        self.ctx
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Side length of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    pub fn entries(&self) -> &[PadicScalar] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[PadicScalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<PadicScalar>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Entries in row-major order, viewed as a flat vector.
    pub fn flatten(&self) -> Vec<PadicScalar> {
        self.data.clone()
    }

    pub fn from_flat(flat: &[PadicScalar], rows: usize, cols: usize) -> Result<Self> {
        if flat.len() != rows * cols || flat.is_empty() {
            return Err(Error::DimensionMismatch(format!("{} entries for a {rows}x{cols} matrix", flat.len())));
        }
        Ok(Self { ctx: flat[0].context(), rows, cols, data: flat.to_vec() })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(PadicScalar::is_zero)
    }

    /// Smallest entry valuation; `None` for the zero matrix.
    pub fn min_valuation(&self) -> Option<i64> {
        self.data.iter().filter_map(PadicScalar::valuation).min()
    }

    /// `||M|| = max |M_ij|_p`.
    pub fn max_norm(&self) -> BigRational {
        match self.min_valuation() {
            None => BigRational::zero(),
            Some(v) => p_power_rational(self.ctx.p(), -v),
        }
    }

    /// `||M|| <= p^(-k)`.
    pub fn norm_at_most(&self, k: i64) -> bool {
        self.min_valuation().is_none_or(|v| v >= k)
    }

    pub fn map(&self, f: impl Fn(&PadicScalar) -> PadicScalar) -> Self {
        Self { ctx: self.ctx, rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn scale(&self, s: &PadicScalar) -> Self {
        self.map(|x| *x * *s)
    }

    pub fn truncate_abs(&self, m: i64) -> Self {
        self.map(|x| x.truncate_abs(m))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows, self.ctx);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn mat_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self + other)
    }

    pub fn mat_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self - other)
    }

    pub fn mat_mul(&self, other: &Self) -> Result<Self> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self * other)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[PadicScalar]) -> Vec<PadicScalar> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| *a * *b).fold(self.ctx.zero(), |acc, x| acc + x))
            .collect()
    }

    pub fn trace(&self) -> PadicScalar {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).fold(self.ctx.zero(), |a, x| a + x)
    }

    /// `[X, Y] = XY - YX`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::identity(self.dim(), self.ctx);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Entrywise certified agreement modulo `p^abs`.
    pub fn agrees_to(&self, other: &Self, abs: i64) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.data.iter().zip(&other.data).all(|(a, b)| a.agrees_to(b, abs))
    }

    pub fn det(&self) -> Result<PadicScalar> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = self.ctx.one();
        for t in 0..n {
            let Some((pr, pc)) = min_valuation_pivot(&a, t..n, t..n) else {
                return Ok(self.ctx.zero());
            };
            if pr != t {
                a.swap_rows(pr, t);
                det = -det;
            }
            if pc != t {
                a.swap_cols(pc, t);
                det = -det;
            }
            let pivot = a[(t, t)];
            det = det * pivot;
            let pinv = pivot.inv()?;
            for i in t + 1..n {
                let factor = a[(i, t)] * pinv;
                if factor.is_zero() {
                    continue;
                }
                for j in t..n {
                    let sub = factor * a[(t, j)];
                    a[(i, j)] = a[(i, j)] - sub;
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let ech = Echelon::reduce(self.to_rows(), Some(Self::identity(n, self.ctx).to_rows()));
        if ech.pivots.len() < n {
            return Err(Error::SingularAtPrecision);
        }
        let mut inv = Self::zeros(n, n, self.ctx);
        for (t, &c) in ech.pivots.iter().enumerate() {
            for j in 0..n {
                inv[(c, j)] = ech.augmented[t][j];
            }
        }
        Ok(inv)
    }

    /// Solve `self * x = b` for a square invertible matrix.
    pub fn solve(&self, b: &[PadicScalar]) -> Result<Vec<PadicScalar>> {
        Ok(self.inverse()?.apply(b))
    }

    /// Basis of the right kernel `{x : self * x = 0}`.
    pub fn kernel(&self) -> Vec<Vec<PadicScalar>> {
        Self::kernel_from(self.cols, self.ctx, Echelon::reduce(self.to_rows(), None))
    }

    /// Kernel of dimension `nullity`, declaring whatever is left after
    /// `cols - nullity` pivots to be zero. Returns the basis together with
    /// the smallest valuation that was discarded.
    pub fn kernel_with_nullity(&self, nullity: usize) -> (Vec<Vec<PadicScalar>>, Option<i64>) {
        let limit = self.cols.saturating_sub(nullity);
        let ech = Echelon::reduce_limited(self.to_rows(), None, limit);
        let residual = ech.residual;
        (Self::kernel_from(self.cols, self.ctx, ech), residual)
    }

    fn kernel_from(cols: usize, ctx: PadicContext, ech: Echelon) -> Vec<Vec<PadicScalar>> {
        let pivot_cols: Vec<usize> = ech.pivots.clone();
        let free: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![ctx.zero(); cols];
                x[f] = ctx.one();
                for (t, &c) in pivot_cols.iter().enumerate() {
                    x[c] = -ech.rows[t][f];
                }
                x
            })
            .collect()
    }

    pub fn rank(&self) -> usize {
        Echelon::reduce(self.to_rows(), None).pivots.len()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// JSON matrix literal: an array of rows of rational strings.
    pub fn to_literal(&self) -> Value {
        Value::Array(
            (0..self.rows)
                .map(|i| Value::Array(self.row(i).iter().map(|x| Value::String(x.to_rational_string())).collect()))
                .collect(),
        )
    }

    pub fn to_literal_string(&self) -> String {
        serde_json::to_string(&self.to_literal()).expect("literal serializes")
    }

    /// Parse a JSON matrix literal; entries may be rational strings or integers.
    pub fn parse_literal(text: &str, ctx: PadicContext) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("matrix literal: {e}")))?;
        Self::from_json(&value, ctx)
    }

    pub fn from_json(value: &Value, ctx: PadicContext) -> Result<Self> {
        let rows = value.as_array().ok_or_else(|| Error::Parse("matrix literal must be an array of rows".into()))?;
        let rows = rows
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| Error::Parse("matrix row must be an array".into()))?
                    .iter()
                    .map(|entry| match entry {
                        Value::String(s) => PadicScalar::parse(s, ctx),
                        Value::Number(n) => n
                            .as_i64()
                            .map(|a| ctx.int(a as i128))
                            .ok_or_else(|| Error::Parse(format!("non-integer number {n}; use a rational string"))),
                        other => Err(Error::Parse(format!("bad matrix entry {other}"))),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn min_valuation_pivot(
    a: &PadicMatrix,
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
) -> Option<(usize, usize)> {
    let mut best: Option<(i64, usize, usize)> = None;
    for i in rows {
        for j in cols.clone() {
            if let Some(v) = a[(i, j)].valuation() {
                if best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                }
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

/// Gauss-Jordan reduction with minimal-valuation complete pivoting.
///
/// Row `t` of `rows` ends with a one in column `pivots[t]` and zeros in every
/// other pivot column; because each pivot had minimal valuation in its block,
/// the normalized pivot rows are integral on the columns still unreduced.
pub(crate) struct Echelon {
    pub rows: Vec<Vec<PadicScalar>>,
    pub augmented: Vec<Vec<PadicScalar>>,
    pub pivots: Vec<usize>,
    /// Smallest valuation left outside the pivot rows and columns.
    pub residual: Option<i64>,
}

impl Echelon {
    pub fn reduce(rows: Vec<Vec<PadicScalar>>, augmented: Option<Vec<Vec<PadicScalar>>>) -> Self {
        Self::reduce_limited(rows, augmented, usize::MAX)
    }

    /// As [`Echelon::reduce`], stopping after at most `limit` pivots.
    pub fn reduce_limited(
        mut rows: Vec<Vec<PadicScalar>>,
        augmented: Option<Vec<Vec<PadicScalar>>>,
        limit: usize,
    ) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut aug = augmented.unwrap_or_else(|| vec![Vec::new(); n_rows]);
        let mut pivots = Vec::new();
        let mut used = vec![false; n_cols];
        for t in 0..n_rows.min(limit) {
            let mut best: Option<(i64, usize, usize)> = None;
            for (i, row) in rows.iter().enumerate().skip(t) {
                for (j, x) in row.iter().enumerate() {
                    if used[j] {
                        continue;
                    }
                    if let Some(v) = x.valuation() {
                        if best.is_none_or(|(bv, _, _)| v < bv) {
                            best = Some((v, i, j));
                        }
                    }
                }
            }
            let Some((_, pr, pc)) = best else { break };
            rows.swap(t, pr);
            aug.swap(t, pr);
            let pinv = rows[t][pc].inv().expect("pivot is nonzero");
            for x in rows[t].iter_mut().chain(aug[t].iter_mut()) {
                *x = *x * pinv;
            }
            rows[t][pc] = pinv.context().one();
            for i in 0..n_rows {
                if i == t {
                    continue;
                }
                let factor = rows[i][pc];
                if factor.is_zero() {
                    continue;
                }
                let pivot_row = rows[t].clone();
                for (x, y) in rows[i].iter_mut().zip(&pivot_row).take(n_cols) {
                    *x = *x - factor * *y;
                }
                rows[i][pc] = factor.context().zero();
                for j in 0..aug[i].len() {
                    let sub = factor * aug[t][j];
                    aug[i][j] = aug[i][j] - sub;
                }
            }
            used[pc] = true;
            pivots.push(pc);
        }
        let residual = rows[pivots.len()..]
            .iter()
            .flat_map(|row| row.iter().enumerate().filter(|(j, _)| !used[*j]))
            .filter_map(|(_, x)| x.valuation())
            .min();
        rows.truncate(pivots.len());
        aug.truncate(pivots.len());
        Self { rows, augmented: aug, pivots, residual }
    }
}

impl std::ops::Index<(usize, usize)> for PadicMatrix {
    type Output = PadicScalar;
    fn index(&self, (i, j): (usize, usize)) -> &PadicScalar {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for PadicMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut PadicScalar {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &PadicMatrix {
    type Output = PadicMatrix;
    fn add(self, rhs: &PadicMatrix) -> PadicMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in +");
        PadicMatrix {
            ctx: self.ctx,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl Sub for &PadicMatrix {
    type Output = PadicMatrix;
    fn sub(self, rhs: &PadicMatrix) -> PadicMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in -");
        PadicMatrix {
            ctx: self.ctx,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect(),
        }
    }
}

impl Neg for &PadicMatrix {
    type Output = PadicMatrix;
    fn neg(self) -> PadicMatrix {
        self.map(|x| -*x)
    }
}

impl Mul for &PadicMatrix {
    type Output = PadicMatrix;
    fn mul(self, rhs: &PadicMatrix) -> PadicMatrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in *");
        let mut out = PadicMatrix::zeros(self.rows, rhs.cols, self.ctx);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    out[(i, j)] = out[(i, j)] + a * b;
                }
            }
        }
        out
    }
}

/// Kind of ball: around zero in an algebra, or around the identity in a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BallKind {
    Lie,
    Group,
}

/// `K_k` of radius `p^(-k)`, either `K^m_k` (Lie) or `K^H_k` (group).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BallSpec {
    pub level: i64,
    pub kind: BallKind,
}

impl BallSpec {
    pub fn lie(level: i64) -> Self {
        Self { level, kind: BallKind::Lie }
    }

    pub fn group(level: i64) -> Self {
        Self { level, kind: BallKind::Group }
    }

    /// The norm condition alone: `||X|| <= p^-k` or `||g - e|| <= p^-k`.
    /// Membership in the algebra or group is checked by the caller.
    pub fn norm_condition(&self, m: &PadicMatrix) -> bool {
        match self.kind {
            BallKind::Lie => m.norm_at_most(self.level),
            BallKind::Group => (m - &PadicMatrix::identity(m.dim(), m.context())).norm_at_most(self.level),
        }
    }
}
