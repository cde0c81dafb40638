//! Symbolic model of the conditional-measure argument: Markov measures on
//! words, Pinsker's inequality, the entropy-gap identity and the telescoping
//! sequence `f_n`.
//!
//! A word `w = (w_0, ..., w_{m-1})` lists atom choices from finest (`w_0`) to
//! coarsest. Its index is `sum_i w_i s^i`, so coordinate 0 varies fastest.
//! A Markov measure generates words coarse to fine:
//! `μ(w) = π(w_{m-1}) prod_i T[w_{i+1}, w_i]`.

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// Tolerance for probability normalization.
pub const PROB_TOL: f64 = 1e-12;
/// Tolerance for the two sides of the gap identity.
pub const GAP_TOL: f64 = 1e-10;
/// Largest number of words a cylinder function may index.
pub const MAX_WORDS: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    weights: Vec<f64>,
}

impl ProbVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("empty probability vector".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidInput("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidInput(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(s: usize) -> Self {
        Self { weights: vec![1.0 / s as f64; s] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.weights.iter().all(|&w| w > 0.0)
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self.weights.iter().filter(|&&w| w > 0.0).map(|&w| w * w.ln()).sum::<f64>()
    }
}

/// `φ_p(q) = sum q_i ln(q_i / p_i)`, the relative entropy of `q` to `p`.
pub fn phi(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!("vectors of length {} and {}", p.len(), q.len())));
    }
    let mut total = 0.0;
    for (i, (&pi, &qi)) in p.weights.iter().zip(&q.weights).enumerate() {
        if qi == 0.0 {
            continue;
        }
        if pi == 0.0 {
            return Err(Error::SupportMismatch(i));
        }
        total += qi * (qi / pi).ln();
    }
    Ok(total.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinskerReport {
    pub l1: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `||p - q||_1^2 <= 2 φ_p(q)`.
pub fn pinsker_check(p: &ProbVector, q: &ProbVector) -> Result<PinskerReport> {
    let bound = 2.0 * phi(p, q)?;
    let l1: f64 = p.weights.iter().zip(&q.weights).map(|(a, b)| (a - b).abs()).sum();
    Ok(PinskerReport { l1, bound, holds: l1 * l1 <= bound + PROB_TOL })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovMeasure {
    transition: Vec<ProbVector>,
    stationary: ProbVector,
}

impl MarkovMeasure {
    /// Validates the row-stochastic matrix and solves `π T = π`.
    pub fn new(transition: Vec<Vec<f64>>) -> Result<Self> {
        let s = transition.len();
        if s == 0 {
            return Err(Error::InvalidInput("empty transition matrix".into()));
        }
        if transition.iter().any(|r| r.len() != s) {
            return Err(Error::DimensionMismatch("transition matrix must be square".into()));
        }
        let rows = transition.into_iter().map(ProbVector::new).collect::<Result<Vec<_>>>()?;
        let stationary = stationary_distribution(&rows)?;
        Ok(Self { transition: rows, stationary })
    }

    /// Every row equal to `q`.
    pub fn bernoulli(q: ProbVector) -> Self {
        Self { transition: vec![q.clone(); q.len()], stationary: q }
    }

    /// The Haar analogue: all conditionals uniform.
    pub fn uniform(s: usize) -> Self {
        Self::bernoulli(ProbVector::uniform(s))
    }

    pub fn symbol_count(&self) -> usize {
        self.transition.len()
    }

    pub fn row(&self, s: usize) -> &ProbVector {
        &self.transition[s]
    }

    pub fn transition(&self) -> &[ProbVector] {
        &self.transition
    }

    pub fn stationary(&self) -> &ProbVector {
        &self.stationary
    }

    /// `μ(w)` for every word of length `m`, by word index.
    pub fn word_measure(&self, m: usize) -> Result<Vec<f64>> {
        let s = self.symbol_count();
        let count = word_count(s, m)?;
        Ok((0..count)
            .map(|index| {
                let w = decode(index, s, m);
                if m == 0 {
                    return 1.0;
                }
                (0..m - 1).fold(self.stationary.weights[w[m - 1]], |acc, i| {
                    acc * self.transition[w[i + 1]].weights[w[i]]
                })
            })
            .collect())
    }

    /// `μ(f)`.
    pub fn integrate(&self, f: &CylinderFunction) -> Result<f64> {
        self.check_symbols(f.s)?;
        let measure = self.word_measure(f.depth)?;
        Ok(measure.iter().zip(&f.values).map(|(a, b)| a * b).sum())
    }

    fn check_symbols(&self, s: usize) -> Result<()> {
        if s == self.symbol_count() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "function over {s} symbols, measure over {}",
                self.symbol_count()
            )))
        }
    }
}

fn stationary_distribution(rows: &[ProbVector]) -> Result<ProbVector> {
    let s = rows.len();
    let t = DMatrix::from_fn(s, s, |i, j| rows[i].weights[j]);
    // (T^t - I) π = 0 with the last equation replaced by sum π = 1
    let mut a = t.transpose() - DMatrix::identity(s, s);
    let mut b = DVector::zeros(s);
    for j in 0..s {
        a[(s - 1, j)] = 1.0;
    }
    b[s - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::InvalidInput("transition matrix has no unique stationary distribution".into()))?;
    let fixed = t.transpose() * &pi;
    let residual = (fixed - &pi).amax();
    if residual > PROB_TOL || pi.iter().any(|&x| x < -PROB_TOL) {
        return Err(Error::InvalidInput(format!("stationary solve left residual {residual:e}")));
    }
    let clipped: Vec<f64> = pi.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    ProbVector::new(clipped.into_iter().map(|x| x / total).collect())
}

fn word_count(s: usize, m: usize) -> Result<usize> {
    s.checked_pow(m as u32)
        .filter(|&c| c <= MAX_WORDS)
        .ok_or_else(|| Error::InvalidInput(format!("{s}^{m} words exceed the limit of {MAX_WORDS}")))
}

fn decode(mut index: usize, s: usize, m: usize) -> Vec<usize> {
    let mut w = vec![0; m];
    for slot in w.iter_mut() {
        *slot = index % s;
        index /= s;
    }
    w
}

/// `h_μ = sum_s' π_s' H(T[s', ·])` in nats.
pub fn entropy_rate(m: &MarkovMeasure) -> f64 {
    m.stationary.weights.iter().zip(&m.transition).map(|(w, row)| w * row.entropy()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    /// `|ν| ln p`.
    pub max_entropy: f64,
    pub entropy_rate: f64,
    /// `|ν| ln p - h_μ`.
    pub side_a: f64,
    /// `sum_s' π_s' φ(uniform, T[s', ·])`.
    pub side_b: f64,
    pub agree: bool,
}

impl GapReport {
    pub fn gap(&self) -> f64 {
        self.side_a
    }
}

/// Both sides of `h_max - h_μ = ∫ φ_uniform(q(x)) dμ(x)` for `s = p^|ν|`.
pub fn entropy_gap(m: &MarkovMeasure, nu_total: u32, p: u64) -> Result<GapReport> {
    let expected = p.checked_pow(nu_total).unwrap_or(u64::MAX);
    if m.symbol_count() as u64 != expected {
        return Err(Error::SymbolCountMismatch { symbols: m.symbol_count(), expected });
    }
    let uniform = ProbVector::uniform(m.symbol_count());
    let max_entropy = nu_total as f64 * (p as f64).ln();
    let rate = entropy_rate(m);
    let side_a = max_entropy - rate;
    let side_b = m
        .stationary
        .weights
        .iter()
        .zip(&m.transition)
        .map(|(w, row)| Ok(w * phi(&uniform, row)?))
        .sum::<Result<f64>>()?;
    Ok(GapReport { max_entropy, entropy_rate: rate, side_a, side_b, agree: (side_a - side_b).abs() <= GAP_TOL })
}

/// A function of the first `depth` coordinates, indexed by word.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderFunction {
    s: usize,
    depth: usize,
    values: Vec<f64>,
}

impl CylinderFunction {
    pub fn new(s: usize, depth: usize, values: Vec<f64>) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidInput("alphabet must be nonempty".into()));
        }
        let count = word_count(s, depth)?;
        if values.len() != count {
            return Err(Error::DimensionMismatch(format!("depth {depth} over {s} symbols needs {count} values")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("function values must be finite".into()));
        }
        Ok(Self { s, depth, values })
    }

    pub fn from_fn(s: usize, depth: usize, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        let count = word_count(s, depth)?;
        Self::new(s, depth, (0..count).map(|i| f(&decode(i, s, depth))).collect())
    }

    pub fn symbol_count(&self) -> usize {
        self.s
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Average under the uniform (Haar) measure.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Average over coordinate `c`, leaving a function constant in it.
    fn average_coordinate(&self, c: usize) -> Self {
        let stride = self.s.pow(c as u32);
        let block = stride * self.s;
        let mut values = self.values.clone();
        for start in (0..values.len()).step_by(block) {
            for offset in 0..stride {
                let idx = |j: usize| start + offset + j * stride;
                let avg = (0..self.s).map(|j| self.values[idx(j)]).sum::<f64>() / self.s as f64;
                for j in 0..self.s {
                    values[idx(j)] = avg;
                }
            }
        }
        Self { values, ..self.clone() }
    }

    /// `f_n` by averaging every prefix of length `n` at once.
    pub fn averaged_direct(&self, n: usize) -> Self {
        let n = n.min(self.depth);
        let prefixes = self.s.pow(n as u32);
        let values = (0..self.values.len())
            .map(|i| {
                let tail = i - i % prefixes;
                (0..prefixes).map(|j| self.values[tail + j]).sum::<f64>() / prefixes as f64
            })
            .collect();
        Self { values, ..self.clone() }
    }
}

/// `f_0 = f, f_{n+1} = f_n` averaged over coordinate `n`; `f_n = mean(f)` for `n >= depth`.
pub fn f_sequence(f: &CylinderFunction, n_max: usize) -> Vec<CylinderFunction> {
    let mut out = vec![f.clone()];
    for n in 0..n_max {
        let next = if n < f.depth { out[n].average_coordinate(n) } else { out[n].clone() };
        out.push(next);
    }
    out
}

/// Largest deviation between the recursive and the direct `f_n`.
pub fn recursion_defect(f: &CylinderFunction, n_max: usize) -> f64 {
    f_sequence(f, n_max)
        .iter()
        .enumerate()
        .map(|(n, fn_)| {
            let direct = f.averaged_direct(n);
            fn_.values.iter().zip(&direct.values).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TelescopeStep {
    pub n: usize,
    /// `Δ_n = |μ(f_{n+1}) - μ(f_n)|`.
    pub delta: f64,
    /// `∫ |f_{n+1} - f_n| dμ`, reported for comparison.
    pub l1_step: f64,
    pub sup_norm: f64,
    /// `sqrt(2) ||f_n||_∞ sqrt(gap)`.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TelescopeReport {
    pub gap: f64,
    pub mean: f64,
    pub mu_f: f64,
    /// `|mean(f) - μ(f)|`.
    pub total: f64,
    /// `sum_n Δ_n`.
    pub delta_sum: f64,
    pub steps: Vec<TelescopeStep>,
    pub holds: bool,
}

/// `mean(f) - μ(f) = sum_{n < depth} (μ(f_{n+1}) - μ(f_n))`, each step bounded
/// through Pinsker by `sqrt(2) ||f_n||_∞ sqrt(gap)`.
pub fn telescope_bound_check(f: &CylinderFunction, m: &MarkovMeasure) -> Result<TelescopeReport> {
    m.check_symbols(f.s)?;
    let s = f.s;
    let uniform = ProbVector::uniform(s);
    let gap: f64 = m
        .stationary
        .weights
        .iter()
        .zip(&m.transition)
        .map(|(w, row)| Ok(w * phi(&uniform, row)?))
        .sum::<Result<f64>>()?;
    let measure = m.word_measure(f.depth)?;
    let integrate = |g: &CylinderFunction| measure.iter().zip(&g.values).map(|(a, b)| a * b).sum::<f64>();
    let seq = f_sequence(f, f.depth);
    let mut steps = Vec::new();
    for n in 0..f.depth {
        let (cur, next) = (&seq[n], &seq[n + 1]);
        let delta = (integrate(next) - integrate(cur)).abs();
        let l1_step = measure.iter().zip(cur.values.iter().zip(&next.values)).map(|(w, (a, b))| w * (b - a).abs()).sum();
        let sup_norm = cur.sup_norm();
        let bound = std::f64::consts::SQRT_2 * sup_norm * gap.sqrt();
        steps.push(TelescopeStep { n, delta, l1_step, sup_norm, bound, holds: delta <= bound + PROB_TOL });
    }
    let mean = f.mean();
    let mu_f = integrate(f);
    let total = (mean - mu_f).abs();
    let delta_sum: f64 = steps.iter().map(|s| s.delta).sum();
    let holds = total <= delta_sum + PROB_TOL && steps.iter().all(|s| s.holds);
    Ok(TelescopeReport { gap, mean, mu_f, total, delta_sum, steps, holds })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    fn value(&self) -> Result<f64> {
        match self {
            Number::Float(x) => Ok(*x),
            Number::Text(t) => parse_real(t),
        }
    }
}

/// A decimal or `a/b` rational string.
pub fn parse_real(text: &str) -> Result<f64> {
    let t = text.trim();
    let bad = || Error::Parse(format!("bad real {text:?}"));
    match t.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if b == 0.0 {
                return Err(bad());
            }
            Ok(a / b)
        }
        None => t.parse().map_err(|_| bad()),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionDoc {
    depth: usize,
    values: Vec<Number>,
}

/// `{"s": int, "transition": [[...]], "f": {"depth": m, "values": [...]}}`;
/// both `transition` and `f` are optional, and a missing transition
/// means the uniform Bernoulli measure.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LabDoc {
    s: usize,
    #[serde(default)]
    transition: Option<Vec<Vec<Number>>>,
    #[serde(default)]
    f: Option<FunctionDoc>,
}

fn lab_doc(value: &Value) -> Result<LabDoc> {
    LabDoc::deserialize(value).map_err(|e| Error::Parse(format!("lab document: {e}")))
}

/// The Markov measure of a lab document.
pub fn markov_from_json(value: &Value) -> Result<MarkovMeasure> {
    let doc = lab_doc(value)?;
    let Some(rows) = doc.transition else {
        return if doc.s == 0 { Err(Error::InvalidInput("\"s\" must be positive".into())) } else { Ok(MarkovMeasure::uniform(doc.s)) };
    };
    if rows.len() != doc.s {
        return Err(Error::Parse(format!("\"s\" is {} but the transition has {} rows", doc.s, rows.len())));
    }
    let rows = rows
        .iter()
        .map(|r| r.iter().map(Number::value).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    MarkovMeasure::new(rows)
}

/// The cylinder function of a lab document.
pub fn function_from_json(value: &Value) -> Result<CylinderFunction> {
    let doc = lab_doc(value)?;
    let f = doc.f.ok_or_else(|| Error::Parse("lab document has no \"f\"".into()))?;
    let values = f.values.iter().map(Number::value).collect::<Result<Vec<_>>>()?;
    CylinderFunction::new(doc.s, f.depth, values)
}
