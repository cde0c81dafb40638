//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use padlab::dynamics::{bowen_count_oracle, bowen_volume_ratio, decompose, OracleMode, Stability, DEFAULT_ORACLE_BUDGET};
use padlab::entropy_lab::{entropy_gap, phi, pinsker_check, telescope_bound_check, CylinderFunction, MarkovMeasure, ProbVector};
use padlab::liegroup::{bch, exp, horospherical_factor, log, BchMode, GroupSpec};
use padlab::spectral::{
    cartan_valuations, equidistribution_bound, kappa, oh_bound, theorem1_rhs, xi_pgl2, ConstantsBundle, MixingParams,
};
use padlab::{PadicContext, PadicMatrix, PadicScalar};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn p_pow(p: u64, e: i64) -> BigRational {
    let base = BigRational::from_integer(BigInt::from(p));
    if e >= 0 {
        num_traits::pow(base, e as usize)
    } else {
        num_traits::pow(base.recip(), (-e) as usize)
    }
}

/// A random scalar of valuation at least `min_val`, sometimes zero.
fn random_small(rng: &mut ChaCha8Rng, ctx: PadicContext, min_val: i64) -> PadicScalar {
    if rng.gen_bool(0.1) {
        return ctx.zero();
    }
    let extra = rng.gen_range(0..3);
    let unit = rng.gen_range(-(ctx.modulus() as i128)..ctx.modulus() as i128);
    ctx.int(unit).shift(min_val + extra)
}

fn random_gl(rng: &mut ChaCha8Rng, d: usize, ctx: PadicContext, min_val: i64) -> PadicMatrix {
    let rows = (0..d).map(|_| (0..d).map(|_| random_small(rng, ctx, min_val)).collect()).collect();
    PadicMatrix::from_rows(rows).expect("square")
}

fn random_algebra(rng: &mut ChaCha8Rng, spec: &GroupSpec, min_val: i64) -> PadicMatrix {
    let ctx = spec.context();
    let coords: Vec<_> = (0..spec.dim()).map(|_| random_small(rng, ctx, min_val)).collect();
    spec.from_coordinates(&coords)
}

fn diag_powers(exps: &[i64], ctx: PadicContext) -> PadicMatrix {
    PadicMatrix::diagonal(&exps.iter().map(|&e| ctx.p_power(e)).collect::<Vec<_>>())
}

fn criterion_1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut total = 0;
    for p in [2, 3, 5] {
        let ctx = PadicContext::new(p, 12).map_err(|e| e.to_string())?;
        for d in [2, 3] {
            for _ in 0..1000 {
                let x = random_gl(&mut rng, d, ctx, 2);
                let g = exp(&x).map_err(|e| format!("exp: {e}"))?;
                let back = log(&g).map_err(|e| format!("log: {e}"))?;
                ensure(back.agrees_to(&x, 12), || format!("log(exp X) != X at p={p} d={d}: {}", x.to_literal_string()))?;
                let dist = (&g - &PadicMatrix::identity(d, ctx)).max_norm();
                ensure(dist == x.max_norm(), || format!("isometry fails at p={p} d={d}"))?;
                total += 1;
            }
        }
    }
    Ok(format!("{total} samples"))
}

fn criterion_2() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ctx = PadicContext::new(3, 12).unwrap();
    let sl2 = GroupSpec::sl(2, ctx).unwrap();
    for _ in 0..200 {
        let x = random_algebra(&mut rng, &sl2, 2);
        let y = random_algebra(&mut rng, &sl2, 2);
        let a = bch(&x, &y, BchMode::DynkinSeries).map_err(|e| e.to_string())?;
        let b = bch(&x, &y, BchMode::Direct).map_err(|e| e.to_string())?;
        ensure(a.agrees_to(&b, 10), || format!("modes differ mod 3^10 for {} {}", x.to_literal_string(), y.to_literal_string()))?;
    }
    let half = ctx.ratio(1, 2);
    for _ in 0..50 {
        let upper = |rng: &mut ChaCha8Rng| {
            let mut m = PadicMatrix::zeros(3, 3, ctx);
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                m = &m + &PadicMatrix::unit(3, i, j, ctx).scale(&ctx.int(rng.gen_range(-20..20) * 9));
            }
            m
        };
        let x = upper(&mut rng);
        let y = upper(&mut rng);
        let a = bch(&x, &y, BchMode::DynkinSeries).map_err(|e| e.to_string())?;
        let b = bch(&x, &y, BchMode::Direct).map_err(|e| e.to_string())?;
        ensure(a.to_literal_string() == b.to_literal_string(), || format!("nilpotent modes differ: {} vs {}", a.to_literal_string(), b.to_literal_string()))?;
        let closed = &(&x + &y) + &x.commutator(&y).scale(&half);
        ensure(a.to_literal_string() == closed.to_literal_string(), || {
            format!("nilpotent BCH {} != x+y+[x,y]/2 = {}", a.to_literal_string(), closed.to_literal_string())
        })?;
    }
    Ok("200 sl2 pairs mod 3^10, 50 nilpotent sl3 pairs exact".into())
}

fn criterion_3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ctx = PadicContext::new(3, 12).unwrap();
    let sl2 = GroupSpec::sl(2, ctx).unwrap();
    let a = PadicMatrix::from_ratios(&[vec![(1, 3), (0, 1)], vec![(0, 1), (3, 1)]], ctx).unwrap();
    let dec = decompose(&a, &sl2).map_err(|e| e.to_string())?;
    let mut worst = 0;
    for _ in 0..500 {
        let g = exp(&random_algebra(&mut rng, &sl2, 2)).map_err(|e| e.to_string())?;
        let fac = horospherical_factor(&g, 2, &dec).map_err(|e| e.to_string())?;
        ensure(dec.in_unstable_ball(&fac.f, 2), || format!("F outside K^G+_2 for {}", g.to_literal_string()))?;
        ensure(dec.in_thickened_stable_ball(&fac.h, 2, 2), || format!("H outside K^P_2,2 for {}", g.to_literal_string()))?;
        ensure((&fac.f * &fac.h).agrees_to(&g, 12), || format!("F·H != g mod 3^12 for {}", g.to_literal_string()))?;
        ensure(fac.iterations <= 6, || format!("{} iterations for {}", fac.iterations, g.to_literal_string()))?;
        worst = worst.max(fac.iterations);
    }
    Ok(format!("500 samples, at most {worst} iterations"))
}

fn criterion_4() -> Check {
    let mut lines = Vec::new();
    for p in [2u64, 3] {
        let ctx = PadicContext::new(p, 12).unwrap();
        let sl2 = GroupSpec::sl(2, ctx).unwrap();
        let a = diag_powers(&[-1, 1], ctx);
        let dec = decompose(&a, &sl2).map_err(|e| e.to_string())?;
        let max_nu = dec.max_nu() as i64;
        let k = max_nu + 2;
        for n in 1..=3u32 {
            let level = k + (n as i64 - 1) * max_nu + 1;
            let res = bowen_count_oracle(&dec, k, n, level, OracleMode::Full, DEFAULT_ORACLE_BUDGET).map_err(|e| e.to_string())?;
            let expected = p_pow(p, -((n as i64 - 1) * dec.nu_total as i64));
            let got = res.ratios.last().unwrap();
            ensure(*got == expected, || format!("FULL p={p} n={n}: {got} != {expected}"))?;
            ensure(bowen_volume_ratio(&dec, k, n).unwrap() == expected, || format!("closed form p={p} n={n}"))?;
        }
        lines.push(format!("FULL sl2 p={p}"));
    }
    for p in [2u64, 3] {
        let ctx = PadicContext::new(p, 12).unwrap();
        let sl3 = GroupSpec::sl(3, ctx).unwrap();
        let dec = decompose(&diag_powers(&[-1, 0, 1], ctx), &sl3).map_err(|e| e.to_string())?;
        ensure(dec.nu_total == 4, || format!("|ν| = {} on sl3", dec.nu_total))?;
        let max_nu = dec.max_nu() as i64;
        let k = max_nu + 2;
        for n in 1..=3u32 {
            let level = k + (n as i64 - 1) * max_nu + 1;
            let res = bowen_count_oracle(&dec, k, n, level, OracleMode::Factored, DEFAULT_ORACLE_BUDGET)
                .map_err(|e| e.to_string())?;
            let expected = p_pow(p, -((n as i64 - 1) * 4));
            let got = res.ratios.last().unwrap();
            ensure(*got == expected, || format!("FACTORED p={p} n={n}: {got} != {expected}"))?;
        }
        lines.push(format!("FACTORED sl3 p={p}"));
    }
    Ok(lines.join(", "))
}

fn criterion_5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut done = 0;
    while done < 20 {
        let p = [2u64, 3, 5][rng.gen_range(0..3)];
        let d = rng.gen_range(2..=3usize);
        let mut exps: Vec<i64> = (0..d - 1).map(|_| rng.gen_range(-3..=3)).collect();
        exps.push(-exps.iter().sum::<i64>());
        if exps.iter().all(|&e| e == exps[0]) {
            continue;
        }
        let ctx = PadicContext::new(p, 12).unwrap();
        let group = GroupSpec::sl(d, ctx).unwrap();
        let dec = decompose(&diag_powers(&exps, ctx), &group).map_err(|e| e.to_string())?;
        let independent: i64 = exps.iter().flat_map(|&a| exps.iter().map(move |&b| (a - b).max(0))).sum();
        ensure(dec.nu_total as i64 == independent, || format!("|ν| = {} but Σ(e_i-e_j)+ = {independent} for {exps:?}", dec.nu_total))?;
        ensure(dec.nu_total == dec.unstable_total(), || format!("stable {} != unstable {}", dec.nu_total, dec.unstable_total()))?;
        let mut product = BigRational::one();
        for pair in dec.eigenpairs.iter().filter(|e| e.class == Stability::Unstable) {
            for _ in &pair.basis {
                product *= pair.eigenvalue.norm();
            }
        }
        let expected = p_pow(p, dec.nu_total as i64);
        ensure(product == expected, || format!("product of expanding norms {product} != p^|ν| for {exps:?}"))?;
        ensure(dec.mod_character() == expected, || format!("modular character for {exps:?}"))?;
        done += 1;
    }
    Ok("20 diagonal elements".into())
}

fn random_simplex(rng: &mut ChaCha8Rng, n: usize, zeros: bool) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..n)
            .map(|_| if zeros && rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..1.0f64).powi(2) + 1e-9 })
            .collect();
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            let mut out: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let drift: f64 = 1.0 - out.iter().sum::<f64>();
            let i = out.iter().position(|&x| x > 0.0).unwrap();
            out[i] += drift;
            if out.iter().all(|&x| x >= 0.0) {
                return out;
            }
        }
    }
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut equal = 0;
    for i in 0..10_000 {
        let n = rng.gen_range(2..=10);
        let p = ProbVector::new(random_simplex(&mut rng, n, false)).map_err(|e| e.to_string())?;
        let q = if i % 10 == 0 { p.clone() } else { ProbVector::new(random_simplex(&mut rng, n, true)).map_err(|e| e.to_string())? };
        let report = pinsker_check(&p, &q).map_err(|e| e.to_string())?;
        let l1: f64 = p.weights().iter().zip(q.weights()).map(|(a, b)| (a - b).abs()).sum();
        ensure(l1 * l1 <= report.bound + 1e-12, || format!("Pinsker fails: l1^2 = {} > {}", l1 * l1, report.bound))?;
        let f = phi(&p, &q).map_err(|e| e.to_string())?;
        let same = p.weights().iter().zip(q.weights()).all(|(a, b)| (a - b).abs() <= 1e-12);
        if same {
            equal += 1;
            ensure(f.abs() <= 1e-12, || format!("φ = {f} on equal vectors"))?;
        } else {
            ensure(f > 0.0, || format!("φ = 0 on distinct vectors {:?} {:?}", p.weights(), q.weights()))?;
        }
    }
    Ok(format!("10000 pairs, {equal} equal"))
}

fn random_chain(rng: &mut ChaCha8Rng, s: usize) -> Vec<Vec<f64>> {
    (0..s).map(|_| random_simplex(rng, s, false)).collect()
}

/// Stationary vector by power iteration, independent of the library solve.
fn power_stationary(rows: &[Vec<f64>]) -> Vec<f64> {
    let s = rows.len();
    let mut pi = vec![1.0 / s as f64; s];
    for _ in 0..100_000 {
        let next: Vec<f64> = (0..s).map(|j| (0..s).map(|i| pi[i] * rows[i][j]).sum()).collect();
        let change: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if change < 1e-16 {
            break;
        }
    }
    pi
}

fn criterion_7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let shapes = [(2u64, 1u32), (3, 1), (2, 2), (3, 2)];
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let (p, nu) = shapes[i % 4];
        let s = p.pow(nu) as usize;
        let rows = random_chain(&mut rng, s);
        let m = MarkovMeasure::new(rows.clone()).map_err(|e| e.to_string())?;
        let report = entropy_gap(&m, nu, p).map_err(|e| e.to_string())?;
        let pi = power_stationary(&rows);
        let rate: f64 = pi.iter().zip(&rows).map(|(w, r)| -w * r.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>()).sum();
        let side_a = nu as f64 * (p as f64).ln() - rate;
        let side_b: f64 = pi
            .iter()
            .zip(&rows)
            .map(|(w, r)| w * r.iter().filter(|&&x| x > 0.0).map(|x| x * (x * s as f64).ln()).sum::<f64>())
            .sum();
        ensure((side_a - side_b).abs() <= 1e-10, || format!("independent sides differ by {}", (side_a - side_b).abs()))?;
        ensure((report.side_a - report.side_b).abs() <= 1e-10 && report.agree, || {
            format!("library sides differ by {}", (report.side_a - report.side_b).abs())
        })?;
        ensure((report.side_a - side_a).abs() <= 1e-10, || format!("gap {} vs independent {side_a}", report.side_a))?;
        worst = worst.max((report.side_a - report.side_b).abs());
    }
    Ok(format!("100 chains, max |A-B| = {worst:.2e}"))
}

/// `μ(f_n)` by direct summation: word `w` has index `Σ w_i s^i`, the chain runs
/// from coordinate `m-1` down to 0, and `f_n` averages coordinates `0..n`.
fn direct_mu_fn(rows: &[Vec<f64>], pi: &[f64], values: &[f64], depth: usize, n: usize) -> f64 {
    let s = rows.len();
    let words = s.pow(depth as u32);
    let digits = |mut idx: usize| -> Vec<usize> {
        (0..depth)
            .map(|_| {
                let d = idx % s;
                idx /= s;
                d
            })
            .collect()
    };
    let block = s.pow(n as u32);
    let mut total = 0.0;
    for idx in 0..words {
        let w = digits(idx);
        let mut weight = pi[w[depth - 1]];
        for i in 0..depth - 1 {
            weight *= rows[w[i + 1]][w[i]];
        }
        let base = idx - idx % block;
        let fn_value: f64 = (0..block).map(|j| values[base + j]).sum::<f64>() / block as f64;
        total += weight * fn_value;
    }
    total
}

fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let s = rng.gen_range(2..=4usize);
        let depth = rng.gen_range(1..=3usize);
        let rows = random_chain(&mut rng, s);
        let m = MarkovMeasure::new(rows.clone()).map_err(|e| e.to_string())?;
        let values: Vec<f64> = (0..s.pow(depth as u32)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = CylinderFunction::new(s, depth, values.clone()).map_err(|e| e.to_string())?;
        let report = telescope_bound_check(&f, &m).map_err(|e| e.to_string())?;
        ensure(report.total <= report.delta_sum + 1e-12, || format!("total {} > Σ Δ {}", report.total, report.delta_sum))?;
        let pi = power_stationary(&rows);
        for step in &report.steps {
            ensure(step.delta <= std::f64::consts::SQRT_2 * step.sup_norm * report.gap.sqrt() + 1e-12, || {
                format!("Δ_{} = {} exceeds the Pinsker bound", step.n, step.delta)
            })?;
            let a = direct_mu_fn(&rows, &pi, &values, depth, step.n);
            let b = direct_mu_fn(&rows, &pi, &values, depth, step.n + 1);
            ensure(((b - a).abs() - step.delta).abs() <= 1e-10, || format!("Δ_{} = {} vs direct {}", step.n, step.delta, (b - a).abs()))?;
        }
    }
    for s in [2usize, 3, 4] {
        for depth in 1..=3 {
            let mut rng = ChaCha8Rng::seed_from_u64((s * 10 + depth) as u64);
            let values: Vec<f64> = (0..s.pow(depth as u32)).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = CylinderFunction::new(s, depth, values).map_err(|e| e.to_string())?;
            let report = telescope_bound_check(&f, &MarkovMeasure::uniform(s)).map_err(|e| e.to_string())?;
            ensure(report.gap == 0.0, || format!("uniform gap {}", report.gap))?;
            ensure(report.steps.iter().all(|st| st.delta <= 1e-15), || format!("uniform Δ_n nonzero for s={s}"))?;
        }
    }
    Ok("100 random pairs and the uniform branch".into())
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn criterion_9() -> Check {
    for p in [2, 3, 5, 7] {
        ensure(xi_pgl2(p, 0) == 1.0, || format!("Ξ(p^0) != 1 for p={p}"))?;
        for k in 1..40 {
            ensure(xi_pgl2(p, k + 1) < xi_pgl2(p, k), || format!("Ξ not decreasing at p={p} k={k}"))?;
        }
    }
    ensure((xi_pgl2(3, 1) - 0.866025).abs() <= 1e-6, || format!("Ξ(3) = {}", xi_pgl2(3, 1)))?;
    ensure((xi_pgl2(2, 2) - 0.833333).abs() <= 1e-6, || format!("Ξ(4) = {}", xi_pgl2(2, 2)))?;
    for p in [2, 3, 5] {
        let ctx = PadicContext::new(p, 12).unwrap();
        for d in 2..=4 {
            let cartan = cartan_valuations(&PadicMatrix::identity(d, ctx)).map_err(|e| e.to_string())?;
            for (kv, kw) in [(1u64, 1u64), (2, 3), (4, 9)] {
                let b = oh_bound(p, &cartan, kv, kw).map_err(|e| e.to_string())?;
                ensure(b == ((kv * kw) as f64).sqrt(), || format!("oh_bound(identity) = {b}"))?;
            }
        }
    }
    let mut grid = 0;
    for c in [0.5, 1.0, 3.0] {
        for alpha in [0.25, 0.5, 1.0] {
            for delta in [0.1, 0.5, 1.0] {
                for a_norm in [2.0, 9.0, 25.0] {
                    let bundle = ConstantsBundle {
                        mixing: MixingParams::new(c, alpha, delta).map_err(|e| e.to_string())?,
                        p: 3,
                        d: 3,
                        entropy_nats: 2.0 * 3f64.ln(),
                        base_ball_measure: 1.0 / 27.0,
                        a_norm,
                        nu_total: 2,
                        lf_shift_applied: false,
                    };
                    for n in 0..5 {
                        let r = equidistribution_bound(&bundle, 1, n + 1).value / equidistribution_bound(&bundle, 1, n).value;
                        ensure(rel_close(r, a_norm.powf(-delta), 1e-12), || format!("ratio {r} at ||a|| = {a_norm}"))?;
                    }
                    let k = kappa(&bundle).map_err(|e| e.to_string())?;
                    let log_k = 0.5 * 2f64.ln() + c.ln() + 2.0 * alpha * 3f64.ln() - 0.5 * (1.0f64 / 27.0).ln()
                        - (-(-delta * a_norm.ln()).exp_m1()).ln()
                        + (3.0 * alpha + 3.0) * 2.0 * 3f64.ln();
                    ensure(rel_close(k, log_k.exp(), 1e-12), || format!("κ = {k} vs {}", log_k.exp()))?;
                    for (l_f, f_norm, gap) in [(0u32, 1.0, 0.25), (2, 0.5, 1e-3)] {
                        let rhs = theorem1_rhs(k, 3, alpha, 3, l_f, f_norm, gap).map_err(|e| e.to_string())?;
                        let log_rhs = k.ln() + (2.0 * alpha + 1.5) * l_f as f64 * 3f64.ln() + f_norm.ln() + 0.5 * gap.ln();
                        ensure(rel_close(rhs, log_rhs.exp(), 1e-12), || format!("rhs = {rhs} vs {}", log_rhs.exp()))?;
                    }
                    grid += 1;
                }
            }
        }
    }
    Ok(format!("Ξ, oh_bound, {grid}-point κ grid"))
}

fn criterion_10() -> Check {
    let (count, failures) = common::run_goldens(env!("CARGO_BIN_EXE_padlab"));
    if failures.is_empty() {
        Ok(format!("{count} golden cases"))
    } else {
        Err(failures.join("; "))
    }
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("exp/log round trip and isometry", criterion_1),
        ("BCH consistency", criterion_2),
        ("horospherical factorization", criterion_3),
        ("Bowen volume ratio", criterion_4),
        ("entropy consistency", criterion_5),
        ("Pinsker inequality", criterion_6),
        ("entropy-gap identity", criterion_7),
        ("telescoping chain", criterion_8),
        ("spectral constants", criterion_9),
        ("CLI regression", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail}; {secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

