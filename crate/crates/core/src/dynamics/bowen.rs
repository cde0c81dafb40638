use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use super::{big, AdaptedBall, HorosphericalDecomposition, Stability};
use crate::error::{Error, Result};
use crate::padic::p_power_rational;

/// Largest number of lattice points FULL mode will enumerate.
pub const DEFAULT_ORACLE_BUDGET: u128 = 1 << 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// Exhaustive enumeration of the truncated lattice.
    Full,
    /// Digit counting on each eigenline separately.
    Factored,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// `counts[w-1]`: points whose first `w` conjugates stay in the ball.
    pub counts: Vec<BigInt>,
    /// `counts[w-1] / counts[0]`.
    pub ratios: Vec<BigRational>,
}

fn check_level(dec: &HorosphericalDecomposition, k: i64) -> Result<()> {
    let need = 2.max(dec.max_nu() as i64 + 2);
    if k < need {
        return Err(Error::LevelTooSmall(format!("k = {k} but Bowen balls need k >= {need}")));
    }
    Ok(())
}

/// `K^{g+}_{k+nν} + K^{g0}_k + K^{g-}_k`: the intersection of `a^-l K_k a^l`
/// for `0 <= l <= n`.
pub fn bowen_ball(dec: &HorosphericalDecomposition, k: i64, n: u32) -> Result<AdaptedBall> {
    check_level(dec, k)?;
    let levels = dec
        .vectors()
        .into_iter()
        .map(|(_, v, class)| if class == Stability::Unstable { k - n as i64 * v } else { k })
        .collect();
    Ok(AdaptedBall { levels })
}

/// `m_G(D_n) / m_G(D_0) = p^(-(n-1)|ν|)` where `D_n` intersects the
/// conjugates for `0 <= l <= n-1`.
pub fn bowen_volume_ratio(dec: &HorosphericalDecomposition, k: i64, n: u32) -> Result<BigRational> {
    check_level(dec, k)?;
    if n == 0 {
        return Err(Error::InvalidInput("window length n must be at least 1".into()));
    }
    Ok(p_power_rational(dec.p(), -((n as i64 - 1) * dec.nu_total as i64)))
}

/// Count points of `K^g_k` modulo `p^L` whose conjugates `Ad_a^l X` stay in
/// `K^g_k` for `0 <= l < w`, for every window `1 <= w <= n`.
///
/// FULL enumerates Lie-basis coordinates and refuses more than `budget`
/// points; FACTORED counts digits along each eigenline.
pub fn bowen_count_oracle(
    dec: &HorosphericalDecomposition,
    k: i64,
    n: u32,
    level: i64,
    mode: OracleMode,
    budget: u128,
) -> Result<OracleResult> {
    check_level(dec, k)?;
    if n == 0 {
        return Err(Error::InvalidInput("window length n must be at least 1".into()));
    }
    let reach = k + (n as i64 - 1) * dec.max_nu().max(dec.max_unstable()) as i64;
    if level <= reach {
        return Err(Error::LevelTooSmall(format!("truncation level {level} must exceed {reach}")));
    }
    let counts = match mode {
        OracleMode::Full => full_counts(dec, n, (level - k) as u32, budget)?,
        OracleMode::Factored => factored_counts(dec, n, level - k),
    };
    let ratios = counts.iter().map(|c| BigRational::new(c.clone(), counts[0].clone())).collect();
    Ok(OracleResult { counts, ratios })
}

impl HorosphericalDecomposition {
    pub(crate) fn max_unstable(&self) -> u64 {
        self.valuations().into_iter().filter(|&v| v < 0).map(|v| (-v) as u64).max().unwrap_or(0)
    }
}

fn factored_counts(dec: &HorosphericalDecomposition, n: u32, digits: i64) -> Vec<BigInt> {
    let p = big(dec.p());
    (1..=n)
        .map(|w| {
            let lost: i64 = dec.valuations().iter().map(|&v| 0.max(-(w as i64 - 1) * v)).sum();
            num_traits::pow(p.clone(), (dec.dim() as i64 * digits - lost) as usize)
        })
        .collect()
}

/// One congruence `sum_j coeffs[j] t_j ≡ 0 mod modulus` from a window step.
struct Constraint {
    step: u32,
    modulus: u64,
    coeffs: Vec<u64>,
}

fn full_counts(dec: &HorosphericalDecomposition, n: u32, digits: u32, budget: u128) -> Result<Vec<BigInt>> {
    let p = dec.p();
    let dim = dec.dim();
    let radix = (p as u128).checked_pow(digits);
    let points = radix.and_then(|r| r.checked_pow(dim as u32));
    let (radix, points) = match (radix, points) {
        (Some(r), Some(t)) if t <= budget => (r as u64, t),
        (_, t) => return Err(Error::BudgetExceeded { points: t.unwrap_or(u128::MAX), budget }),
    };

    // X = p^k sum_j t_j B_j stays in K_k after Ad^l iff p^s (Ad^l) t ≡ 0 mod p^s
    let ad = dec.ad_matrix();
    let mut constraints = Vec::new();
    let mut power = ad.clone();
    for step in 1..n {
        if step > 1 {
            power = &power * ad;
        }
        let s = (-power.min_valuation().unwrap_or(0)).max(0);
        if s == 0 {
            continue;
        }
        if s > digits as i64 {
            return Err(Error::LevelTooSmall(format!("conjugate {step} needs {s} digits, have {digits}")));
        }
        let scaled = power.map(|x| x.shift(s));
        for i in 0..dim {
            let coeffs = (0..dim)
                .map(|j| scaled[(i, j)].residue(s as u32))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::PrecisionExhausted("Ad_a power lost its low digits".into()))?;
            if coeffs.iter().any(|&c| c != 0) {
                constraints.push(Constraint { step, modulus: p.pow(s as u32), coeffs });
            }
        }
    }

    let first_failure = |mut index: u64| -> u32 {
        let mut t = vec![0u64; dim];
        for slot in t.iter_mut() {
            *slot = index % radix;
            index /= radix;
        }
        let mut fail = n;
        for c in &constraints {
            if c.step >= fail {
                continue;
            }
            let sum = c.coeffs.iter().zip(&t).fold(0u128, |acc, (&a, &b)| acc + a as u128 * b as u128);
            if sum % c.modulus as u128 != 0 {
                fail = c.step;
            }
        }
        fail
    };
    let histogram = worker_pool().install(|| {
        (0..points as u64)
            .into_par_iter()
            .fold(
                || vec![0u64; n as usize + 1],
                |mut h, index| {
                    h[first_failure(index) as usize] += 1;
                    h
                },
            )
            .reduce(
                || vec![0u64; n as usize + 1],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    });
    // a point counts for window w when its first failing step is >= w
    Ok((1..=n as usize).map(|w| big(histogram[w..].iter().sum())).collect())
}

/// Thread pool sized by `PADLAB_THREADS` when set.
fn worker_pool() -> rayon::ThreadPool {
    let threads = std::env::var("PADLAB_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()).unwrap_or(0);
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool")
}
