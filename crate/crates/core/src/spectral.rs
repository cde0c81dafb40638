//! Closed-form constants: the spherical function of `PGL_2(Q_p)`, Cartan
//! data, matrix-coefficient and equidistribution bounds, and `κ`.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::format::decimal;
use crate::matrix::PadicMatrix;

/// Exponential mixing data `(c, α, δ)`: `|<a^n f, h>| <= c p^((l_f+l_h)α) ||a||^(-δn)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingParams {
    pub c: f64,
    pub alpha: f64,
    pub delta: f64,
}

impl MixingParams {
    pub fn new(c: f64, alpha: f64, delta: f64) -> Result<Self> {
        for (name, x) in [("c", c), ("alpha", alpha), ("delta", delta)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {x}")));
            }
        }
        Ok(Self { c, alpha, delta })
    }
}

/// Everything `κ` and the equidistribution bound depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantsBundle {
    pub mixing: MixingParams,
    pub p: u64,
    /// `d = dim G`.
    pub d: u32,
    /// `h = |ν| ln p`.
    pub entropy_nats: f64,
    /// `m_G(K^G_2)`.
    pub base_ball_measure: f64,
    pub a_norm: f64,
    pub nu_total: u64,
    /// Whether the caller already replaced `l_f` by `l_f + |ν|`.
    pub lf_shift_applied: bool,
}

impl ConstantsBundle {
    pub fn validate(&self) -> Result<()> {
        MixingParams::new(self.mixing.c, self.mixing.alpha, self.mixing.delta)?;
        if !crate::padic::is_prime(self.p) {
            return Err(Error::InvalidInput(format!("{} is not prime", self.p)));
        }
        if !(self.base_ball_measure > 0.0 && self.base_ball_measure <= 1.0) {
            return Err(Error::InvalidInput("base_ball_measure must lie in (0, 1]".into()));
        }
        if !(self.entropy_nats.is_finite() && self.entropy_nats >= 0.0) {
            return Err(Error::InvalidInput("entropy_nats must be nonnegative".into()));
        }
        if !self.a_norm.is_finite() {
            return Err(Error::InvalidInput("a_norm must be finite".into()));
        }
        Ok(())
    }

    /// Flat JSON with reals as decimal strings.
    pub fn to_json(&self) -> Value {
        json!({
            "c": decimal(self.mixing.c),
            "alpha": decimal(self.mixing.alpha),
            "delta": decimal(self.mixing.delta),
            "p": self.p,
            "d": self.d,
            "entropy_nats": decimal(self.entropy_nats),
            "base_ball_measure": decimal(self.base_ball_measure),
            "a_norm": decimal(self.a_norm),
            "nu_total": self.nu_total,
            "lf_shift_applied": self.lf_shift_applied,
        })
    }

    /// Reads the flat document; reals may be numbers or decimal/rational strings.
    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value.as_object().ok_or_else(|| Error::Parse("constants bundle must be an object".into()))?;
        const KEYS: [&str; 10] =
            ["c", "alpha", "delta", "p", "d", "entropy_nats", "base_ball_measure", "a_norm", "nu_total", "lf_shift_applied"];
        if let Some(k) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::Parse(format!("unknown bundle field {k:?}")));
        }
        let field = |k: &str| obj.get(k).ok_or_else(|| Error::Parse(format!("bundle is missing {k:?}")));
        let real = |k: &str| -> Result<f64> {
            match field(k)? {
                Value::Number(n) => n.as_f64().ok_or_else(|| Error::Parse(format!("bad number in {k:?}"))),
                Value::String(s) => crate::entropy_lab::parse_real(s),
                _ => Err(Error::Parse(format!("{k:?} must be a real"))),
            }
        };
        let int = |k: &str| -> Result<u64> {
            field(k)?.as_u64().ok_or_else(|| Error::Parse(format!("{k:?} must be a nonnegative integer")))
        };
        let p = int("p")?;
        let nu_total = int("nu_total")?;
        let entropy_nats = match obj.get("entropy_nats") {
            Some(_) => real("entropy_nats")?,
            None => nu_total as f64 * (p as f64).ln(),
        };
        let bundle = Self {
            mixing: MixingParams { c: real("c")?, alpha: real("alpha")?, delta: real("delta")? },
            p,
            d: u32::try_from(int("d")?).map_err(|_| Error::Parse("d too large".into()))?,
            entropy_nats,
            base_ball_measure: real("base_ball_measure")?,
            a_norm: real("a_norm")?,
            nu_total,
            lf_shift_applied: match obj.get("lf_shift_applied") {
                None => false,
                Some(v) => v.as_bool().ok_or_else(|| Error::Parse("lf_shift_applied must be a boolean".into()))?,
            },
        };
        bundle.validate().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(bundle)
    }
}

/// `Ξ(p^k) = p^(-k/2) (k(p-1) + p + 1) / (p + 1)` on `PGL_2(Q_p)`.
pub fn xi_pgl2(p: u64, k: u32) -> f64 {
    let pf = p as f64;
    pf.powf(-(k as f64) / 2.0) * (k as f64 * (pf - 1.0) + pf + 1.0) / (pf + 1.0)
}

/// Exponents `k_1 >= ... >= k_m` of the Cartan factor `diag(p^(k_i))`,
/// the negated valuations of the elementary divisors of `g`.
pub fn cartan_valuations(g: &PadicMatrix) -> Result<Vec<i64>> {
    if !g.is_square() {
        return Err(Error::DimensionMismatch("Cartan data needs a square matrix".into()));
    }
    let n = g.rows();
    let mut a = g.clone();
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let mut best: Option<(i64, usize, usize)> = None;
        for i in t..n {
            for j in t..n {
                if let Some(v) = a[(i, j)].valuation() {
                    if best.is_none_or(|(bv, _, _)| v < bv) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((v, pi, pj)) = best else {
            return Err(Error::SingularAtPrecision);
        };
        for j in 0..n {
            let tmp = a[(t, j)];
            a[(t, j)] = a[(pi, j)];
            a[(pi, j)] = tmp;
        }
        for i in 0..n {
            let tmp = a[(i, t)];
            a[(i, t)] = a[(i, pj)];
            a[(i, pj)] = tmp;
        }
        let pivot_inv = a[(t, t)].inv()?;
        for i in t + 1..n {
            let factor = a[(i, t)] * pivot_inv;
            if factor.is_zero() {
                continue;
            }
            for j in t..n {
                let sub = factor * a[(t, j)];
                a[(i, j)] = a[(i, j)] - sub;
            }
        }
        // the row operations leave column t zero below the pivot; the pivot
        // divides its row, so column operations clear it without touching the rest
        for j in t + 1..n {
            let ctx = a[(t, j)].context();
            a[(t, j)] = ctx.zero();
        }
        out.push(-v);
    }
    out.sort_by(|x, y| y.cmp(x));
    Ok(out)
}

/// `sqrt(dim K v · dim K w) · prod_{i <= m/2} Ξ(a_i / a_{m+1-i})`.
pub fn oh_bound(p: u64, cartan: &[i64], dim_kv: u64, dim_kw: u64) -> Result<f64> {
    let m = cartan.len();
    if m < 2 {
        return Err(Error::InvalidInput("Cartan data needs m >= 2 entries".into()));
    }
    if dim_kv == 0 || dim_kw == 0 {
        return Err(Error::InvalidInput("K-orbit dimensions must be positive".into()));
    }
    let mut product = ((dim_kv * dim_kw) as f64).sqrt();
    for i in 0..m / 2 {
        let diff = cartan[i] - cartan[m - 1 - i];
        if diff < 0 {
            return Err(Error::NegativeExponent(i + 1));
        }
        product *= xi_pgl2(p, diff as u32);
    }
    Ok(product)
}

/// `c p^((l_f + l_h) α) ||a||^(-δ n)`.
pub fn mixing_bound(params: &MixingParams, p: u64, l_f: u32, l_h: u32, a_norm: f64, n: u32) -> f64 {
    params.c * (p as f64).powf((l_f + l_h) as f64 * params.alpha) * a_norm.powf(-params.delta * n as f64)
}

/// `m_G(K^G_k) = m_G(K^G_2) p^(-d(k-2))`.
pub fn ball_measure_at(k: i64, base_ball_measure: f64, d: u32, p: u64) -> Result<f64> {
    if k < 2 {
        return Err(Error::LevelTooSmall(format!("ball measures start at k = 2, got {k}")));
    }
    Ok(base_ball_measure * (p as f64).powf(-(d as f64) * (k - 2) as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquidistributionBound {
    /// Bound on the averaged matrix coefficient per unit `||f||_2`.
    pub value: f64,
    /// `p^(d(l_f+|ν|)/2) / sqrt(m_G(K^G_2))`, the norm of the test vector.
    pub test_vector_norm: f64,
}

/// `(c / sqrt(m_G(K^G_2))) p^((α+d/2)|ν| + 2α) p^(l_f(2α+d/2)) ||a||^(-δn)`.
pub fn equidistribution_bound(bundle: &ConstantsBundle, l_f: u32, n: u32) -> EquidistributionBound {
    let MixingParams { c, alpha, delta } = bundle.mixing;
    let p = bundle.p as f64;
    let d = bundle.d as f64;
    let nu = bundle.nu_total as f64;
    let lf = l_f as f64;
    let value = c / bundle.base_ball_measure.sqrt()
        * p.powf((alpha + d / 2.0) * nu + 2.0 * alpha)
        * p.powf(lf * (2.0 * alpha + d / 2.0))
        * bundle.a_norm.powf(-delta * n as f64);
    let test_vector_norm = p.powf(d * (lf + nu) / 2.0) / bundle.base_ball_measure.sqrt();
    EquidistributionBound { value, test_vector_norm }
}

/// `κ = sqrt(2) c p^(2α) m_G(K^G_2)^(-1/2) (1 - ||a||^(-δ))^(-1) exp((3α+d) h)`.
pub fn kappa(bundle: &ConstantsBundle) -> Result<f64> {
    if bundle.a_norm <= 1.0 {
        return Err(Error::DivergentSeries(bundle.a_norm));
    }
    let MixingParams { c, alpha, delta } = bundle.mixing;
    let p = bundle.p as f64;
    Ok(std::f64::consts::SQRT_2 * c * p.powf(2.0 * alpha) / bundle.base_ball_measure.sqrt()
        / (1.0 - bundle.a_norm.powf(-delta))
        * ((3.0 * alpha + bundle.d as f64) * bundle.entropy_nats).exp())
}

/// `κ p^((2α + d/2) l_f) ||f||_2 sqrt(gap)`.
pub fn theorem1_rhs(kappa_value: f64, p: u64, alpha: f64, d: u32, l_f: u32, f_l2_norm: f64, gap: f64) -> Result<f64> {
    if gap < 0.0 {
        return Err(Error::NegativeGap(gap));
    }
    Ok(kappa_value * (p as f64).powf((2.0 * alpha + d as f64 / 2.0) * l_f as f64) * f_l2_norm * gap.sqrt())
}
