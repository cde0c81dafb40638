//! Eigen-decomposition of `Ad_a`, adapted balls, entropy and Bowen balls.

mod atoms;
mod bowen;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::liegroup::{log, GroupSpec};
use crate::matrix::{char_poly, hensel_roots, zp_module_basis, PadicMatrix};
use crate::padic::{p_power_rational, rational_string, PadicScalar};

pub use atoms::{atom_representatives, classify_atom, min_partition_level};
pub use bowen::{
    bowen_ball, bowen_count_oracle, bowen_volume_ratio, OracleMode, OracleResult, DEFAULT_ORACLE_BUDGET,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stability {
    /// Eigenvalue norm `< 1`: contracted by `Ad_a`, part of `g^-`.
    Stable,
    /// Eigenvalue norm `= 1`: part of `g^0`.
    Neutral,
    /// Eigenvalue norm `> 1`: part of `g^+`.
    Unstable,
}

impl Stability {
    pub fn of_valuation(v: i64) -> Self {
        match v {
            v if v > 0 => Self::Stable,
            0 => Self::Neutral,
            _ => Self::Unstable,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Stable => "STABLE",
            Self::Neutral => "NEUTRAL",
            Self::Unstable => "UNSTABLE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Eigenpair {
    pub eigenvalue: PadicScalar,
    /// `Z_p`-basis of the eigenspace intersected with the integral lattice.
    pub basis: Vec<PadicMatrix>,
    pub class: Stability,
}

impl Eigenpair {
    /// `v(λ)`.
    pub fn valuation(&self) -> i64 {
        self.eigenvalue.valuation().expect("Ad_a is invertible")
    }
}

/// Entropy of translation by `a`, as `|ν|` units of `log p` and in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entropy {
    pub log_p_units: u64,
    pub nats: f64,
}

/// Eigendata of `Ad_a` on `g`, with the eigenbasis `{X_i}` listed eigenpair
/// by eigenpair in order of increasing eigenvalue valuation.
#[derive(Debug, Clone, PartialEq)]
pub struct HorosphericalDecomposition {
    pub a: PadicMatrix,
    pub group: GroupSpec,
    pub eigenpairs: Vec<Eigenpair>,
    /// Valuations `ν_i` of the contracting eigenvalues, one per STABLE vector.
    pub nu: Vec<u64>,
    pub nu_total: u64,
    /// `||a||`.
    pub a_norm: BigRational,
    ad: PadicMatrix,
    to_eigen: PadicMatrix,
}

/// Eigen-decomposition of `Ad_a` on the Lie algebra of `group`.
pub fn decompose(a: &PadicMatrix, group: &GroupSpec) -> Result<HorosphericalDecomposition> {
    let d = group.dim_ambient();
    if a.rows() != d || a.cols() != d {
        return Err(Error::DimensionMismatch(format!("a must be {d}x{d}")));
    }
    let ctx = group.context();
    let a_inv = a.inverse()?;
    let dim = group.dim();
    let mut ad = PadicMatrix::zeros(dim, dim, ctx);
    for (j, b) in group.lie_basis().iter().enumerate() {
        let conj = &(a * b) * &a_inv;
        if !group.in_algebra(&conj) {
            return Err(Error::InvalidInput("a does not normalize the Lie algebra".into()));
        }
        for (i, c) in group.lie_coordinates(&conj)?.into_iter().enumerate() {
            ad[(i, j)] = c;
        }
    }

    let poly = char_poly(&ad)?;
    let roots = hensel_roots(&poly, ctx).map_err(|e| match e {
        Error::NotSplitAtPrecision(m) => Error::NotDiagonalizable(m),
        other => other,
    })?;
    if roots.iter().map(|r| r.multiplicity).sum::<usize>() != dim {
        return Err(Error::NotDiagonalizable("characteristic polynomial does not split".into()));
    }

    let half = ctx.precision() as i64 / 2;
    let mut eigenpairs = Vec::new();
    let mut columns: Vec<Vec<PadicScalar>> = Vec::new();
    for root in &roots {
        if root.value.is_zero() {
            return Err(Error::NotDiagonalizable("Ad_a has a zero eigenvalue".into()));
        }
        let shifted = &ad - &PadicMatrix::identity(dim, ctx).scale(&root.value);
        let (kernel, residual) = shifted.kernel_with_nullity(root.multiplicity);
        let floor = shifted.min_valuation().unwrap_or(0);
        if kernel.len() != root.multiplicity || residual.is_some_and(|r| r < floor + half) {
            return Err(Error::NotDiagonalizable(format!(
                "eigenvalue {} has a defective eigenspace",
                root.value.to_rational_string()
            )));
        }
        let basis = zp_module_basis(&kernel)?;
        columns.extend(basis.iter().cloned());
        let v = root.value.valuation().expect("nonzero root");
        eigenpairs.push(Eigenpair {
            eigenvalue: root.value,
            basis: basis.iter().map(|c| group.from_coordinates(c)).collect(),
            class: Stability::of_valuation(v),
        });
    }

    let mut change = PadicMatrix::zeros(dim, dim, ctx);
    for (j, col) in columns.iter().enumerate() {
        for (i, x) in col.iter().enumerate() {
            change[(i, j)] = *x;
        }
    }
    let to_eigen = change.inverse().map_err(|_| Error::NotDiagonalizable("eigenvectors are dependent".into()))?;

    let mut nu = Vec::new();
    let mut unstable = 0u64;
    for pair in &eigenpairs {
        let v = pair.valuation();
        for _ in &pair.basis {
            match pair.class {
                Stability::Stable => nu.push(v as u64),
                Stability::Unstable => unstable += (-v) as u64,
                Stability::Neutral => {}
            }
        }
    }
    let nu_total: u64 = nu.iter().sum();
    if nu_total == 0 && unstable == 0 {
        return Err(Error::NoHyperbolicity);
    }
    if nu_total != unstable {
        return Err(Error::NotUnimodular { stable: nu_total, unstable });
    }
    Ok(HorosphericalDecomposition {
        a: a.clone(),
        group: group.clone(),
        eigenpairs,
        nu,
        nu_total,
        a_norm: a.max_norm(),
        ad,
        to_eigen,
    })
}

impl HorosphericalDecomposition {
    pub fn p(&self) -> u64 {
        self.group.context().p()
    }

    pub fn dim(&self) -> usize {
        self.group.dim()
    }

    /// `Ad_a` in Lie-basis coordinates.
    pub fn ad_matrix(&self) -> &PadicMatrix {
        &self.ad
    }

    /// The eigenbasis `{X_i}` with eigenvalue valuation and class per vector.
    pub fn vectors(&self) -> Vec<(&PadicMatrix, i64, Stability)> {
        self.eigenpairs
            .iter()
            .flat_map(|pair| pair.basis.iter().map(move |b| (b, pair.valuation(), pair.class)))
            .collect()
    }

    pub fn classes(&self) -> Vec<Stability> {
        self.vectors().into_iter().map(|(_, _, c)| c).collect()
    }

    /// Eigenvalue valuation of each basis vector.
    pub fn valuations(&self) -> Vec<i64> {
        self.vectors().into_iter().map(|(_, v, _)| v).collect()
    }

    /// Sum of the expanding valuations; equals `|ν|` for a valid decomposition.
    pub fn unstable_total(&self) -> u64 {
        self.valuations().into_iter().filter(|&v| v < 0).map(|v| (-v) as u64).sum()
    }

    pub fn max_nu(&self) -> u64 {
        self.nu.iter().copied().max().unwrap_or(0)
    }

    /// Coordinates of `x ∈ g` in the eigenbasis.
    pub fn eigen_coordinates(&self, x: &PadicMatrix) -> Result<Vec<PadicScalar>> {
        Ok(self.to_eigen.apply(&self.group.lie_coordinates(x)?))
    }

    pub fn from_eigen_coordinates(&self, coords: &[PadicScalar]) -> PadicMatrix {
        let ctx = self.group.context();
        let d = self.group.dim_ambient();
        self.vectors()
            .into_iter()
            .zip(coords)
            .fold(PadicMatrix::zeros(d, d, ctx), |acc, ((b, _, _), c)| {
                if c.is_zero() {
                    acc
                } else {
                    &acc + &b.scale(c)
                }
            })
    }

    fn vanishes(&self, x: &PadicScalar) -> bool {
        x.valuation().is_none_or(|v| v >= self.group.context().precision() as i64)
    }

    /// Whether `log h` has eigen-coordinates meeting per-class levels, and
    /// no component in the classes mapped to `None`.
    fn log_levels(&self, h: &PadicMatrix, level: impl Fn(Stability, i64) -> Option<i64>) -> bool {
        let Ok(x) = log(h) else {
            return false;
        };
        if !self.group.satisfies_equations(h) || !self.group.in_algebra(&x) {
            return false;
        }
        let Ok(coords) = self.eigen_coordinates(&x) else {
            return false;
        };
        self.vectors().into_iter().zip(&coords).all(|((_, v, class), c)| match level(class, v) {
            None => self.vanishes(c),
            Some(l) => c.valuation().is_none_or(|cv| cv >= l) || self.vanishes(c),
        })
    }

    /// `f ∈ K^{G+}_k = exp(K^{g+}_k)`.
    pub fn in_unstable_ball(&self, f: &PadicMatrix, k: i64) -> bool {
        self.log_levels(f, |c, _| (c == Stability::Unstable).then_some(k))
    }

    /// `h ∈ K^P_{k,l} = exp(K^{g0}_k + K^{g-}_l)`.
    pub fn in_thickened_stable_ball(&self, h: &PadicMatrix, k: i64, l: i64) -> bool {
        self.log_levels(h, |c, _| match c {
            Stability::Unstable => None,
            Stability::Neutral => Some(k),
            Stability::Stable => Some(l),
        })
    }

    /// `h ∈ K^P_{k,k-ν}`: stable coordinate `i` only needs level `k - ν_i`.
    pub fn in_atom_ball(&self, h: &PadicMatrix, k: i64) -> bool {
        self.log_levels(h, |c, v| match c {
            Stability::Unstable => None,
            Stability::Neutral => Some(k),
            Stability::Stable => Some(k - v),
        })
    }

    /// `h = |ν| log p`.
    pub fn entropy(&self) -> Entropy {
        Entropy { log_p_units: self.nu_total, nats: self.nu_total as f64 * (self.p() as f64).ln() }
    }

    /// The modular character `mod(a, G^-) = p^|ν|`.
    pub fn mod_character(&self) -> BigRational {
        p_power_rational(self.p(), self.nu_total as i64)
    }

    pub fn to_json(&self) -> Value {
        let pairs: Vec<Value> = self
            .eigenpairs
            .iter()
            .map(|pair| {
                json!({
                    "eigenvalue": pair.eigenvalue.to_rational_string(),
                    "valuation": pair.valuation(),
                    "class": pair.class.label(),
                    "basis": pair.basis.iter().map(PadicMatrix::to_literal).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "group": self.group.name(),
            "a": self.a.to_literal(),
            "a_norm": rational_string(&self.a_norm),
            "eigenpairs": pairs,
            "nu": self.nu,
            "nu_total": self.nu_total,
        })
    }
}

/// Per-coordinate levels in the eigenbasis of a decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaptedBall {
    pub levels: Vec<i64>,
}

impl AdaptedBall {
    pub fn uniform(dec: &HorosphericalDecomposition, k: i64) -> Self {
        Self { levels: vec![k; dec.dim()] }
    }

    pub fn contains_coordinates(&self, coords: &[PadicScalar]) -> bool {
        coords.len() == self.levels.len()
            && coords.iter().zip(&self.levels).all(|(c, &l)| c.valuation().is_none_or(|v| v >= l))
    }

    /// Every eigen-coordinate of `x` has valuation at least its level.
    pub fn contains(&self, dec: &HorosphericalDecomposition, x: &PadicMatrix) -> Result<bool> {
        Ok(dec.group.in_algebra(x) && self.contains_coordinates(&dec.eigen_coordinates(x)?))
    }

    /// Haar volume relative to the uniform ball at level `k`.
    pub fn volume_ratio(&self, p: u64, k: i64) -> BigRational {
        let excess: i64 = self.levels.iter().map(|l| l - k).sum();
        p_power_rational(p, -excess)
    }
}

pub(crate) fn big(x: u64) -> BigInt {
    BigInt::from(x)
}
