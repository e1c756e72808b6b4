//! End-to-end acceptance checks, one PASS/FAIL line per criterion.

use std::path::PathBuf;
use std::process::{Command, Output};
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use anticonc::frontier::{self, SweepConfig};
use anticonc::lemmas::{self, Verdict};
use anticonc::numerics::{binom, DEFAULT_PRECISION_CAP};
use anticonc::subsetsum::{
    concentration, fiber, profile, profile_dp, profile_mitm, profile_naive, unique_preimages, Caps,
    CubeSet, Weights,
};
use anticonc::sumsets::{self, DEFAULT_ENUM_BUDGET};

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn w(v: &[i64]) -> Weights {
    Weights::from_i64(v).unwrap()
}

/// Every vector in {0..=max}^n.
fn all_vectors(n: usize, max: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..=max).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

fn criterion_1() -> Check {
    let caps = Caps::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let inputs: Vec<Vec<i64>> = (0..1000)
        .map(|_| {
            let n = rng.gen_range(1..=16);
            (0..n).map(|_| rng.gen_range(-50..=50)).collect()
        })
        .collect();
    let bad: Vec<String> = inputs
        .par_iter()
        .filter_map(|v| {
            let ws = w(v);
            let a = profile_naive(&ws, &caps).unwrap();
            let b = profile_dp(&ws, &caps).unwrap();
            let c = profile_mitm(&ws, &caps).unwrap();
            (a != b || a != c).then(|| ws.to_string())
        })
        .collect();
    ensure(bad.is_empty(), || format!("routes disagree on {}", bad[0]))?;
    Ok("1000 vectors, naive = dp = mitm".into())
}

fn criterion_2() -> Check {
    let caps = Caps::default();
    for n in 1..=20usize {
        let zero = concentration(&profile(&w(&vec![0; n]), &caps).unwrap());
        ensure(zero.rho == BigRational::one(), || {
            format!("rho(0^{n}) = {}", zero.rho)
        })?;
        ensure(zero.range_size == BigUint::one(), || {
            format!("|R(0^{n})| = {}", zero.range_size)
        })?;
        let sup: Vec<i64> = (0..n).map(|i| 1 << i).collect();
        let pow = BigUint::one() << n;
        for p in [
            profile(&w(&sup), &caps).unwrap(),
            profile_naive(&w(&sup), &caps).unwrap(),
        ] {
            let r = concentration(&p);
            ensure(
                r.rho == BigRational::new(BigInt::one(), BigInt::from(pow.clone())),
                || format!("rho(superincreasing n={n}) = {}", r.rho),
            )?;
            ensure(r.range_size == pow, || {
                format!("|R| = {} at n={n}", r.range_size)
            })?;
        }
    }
    Ok("n = 1..20 exact".into())
}

fn criterion_3() -> Check {
    let mut total = 0;
    for n in 1..=8 {
        let points =
            frontier::sweep(&SweepConfig::new(n, 12).workers(8)).map_err(|e| e.to_string())?;
        frontier::audit(&points, lemmas::DEFAULT_CONSTANT).map_err(|e| e.to_string())?;
        total += points.len();
    }
    Ok(format!(
        "{total} canonical vectors, 0 violations of |R| rho >= 1"
    ))
}

fn injectivity_for(ws: &Weights, ks: &[u32]) -> std::result::Result<(), String> {
    let caps = Caps::default();
    let rep = concentration(&profile(ws, &caps).unwrap());
    let a = unique_preimages(ws, &caps).unwrap();
    let b = fiber(ws, &rep.tau, &caps).unwrap();
    for &k in ks {
        let res = sumsets::check_injectivity(&a, &b, k, DEFAULT_ENUM_BUDGET)
            .map_err(|e| e.to_string())?;
        ensure(res.holds(), || {
            format!("injectivity fails for {ws}, k = {k}")
        })?;
    }
    Ok(())
}

fn criterion_4() -> Check {
    let mut vectors: Vec<Vec<i64>> = (1..=6).flat_map(|n| all_vectors(n, 6)).collect();
    let exhaustive = vectors.len();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let n = rng.gen_range(1..=8);
        vectors.push((0..n).map(|_| rng.gen_range(-20..=20)).collect());
    }
    vectors
        .par_iter()
        .try_for_each(|v| injectivity_for(&w(v), &[1, 2, 3]))?;
    Ok(format!(
        "{exhaustive} exhaustive + 200 random vectors, k = 1,2,3"
    ))
}

fn criterion_5() -> Check {
    let caps = Caps::default();
    let vectors: Vec<Vec<i64>> = (1..=6).flat_map(|n| all_vectors(n, 6)).collect();
    let fibers: usize = vectors
        .par_iter()
        .map(|v| -> std::result::Result<usize, String> {
            let ws = w(v);
            let p = profile(&ws, &caps).unwrap();
            for (tau, _) in p.entries() {
                let b = fiber(&ws, tau, &caps).unwrap();
                for k in 1..=3 {
                    let ratio = sumsets::density_ratio_max(&b, k, DEFAULT_ENUM_BUDGET)
                        .map_err(|e| e.to_string())?;
                    let bound = sumsets::density_bound(&b, k);
                    ensure(ratio <= bound, || {
                        format!("density {ratio} > {bound} for {ws}, tau = {tau}, k = {k}")
                    })?;
                }
            }
            Ok(p.entries().len())
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(format!(
        "{fibers} fibers over {} vectors, k = 1,2,3",
        vectors.len()
    ))
}

fn criterion_6() -> Check {
    let mut checked = Vec::new();
    for k in [51u32, 64, 100, 128, 256] {
        let s_max = lemmas::max_hypothesis_s(k);
        let expect = (k as f64 / (16.0 * std::f64::consts::PI)).floor() as u32;
        ensure(s_max == expect, || {
            format!("k = {k}: s range {s_max}, expected {expect}")
        })?;
        for s in 1..=s_max {
            let r = lemmas::check_initial_bound(k, s, DEFAULT_PRECISION_CAP)
                .map_err(|e| e.to_string())?;
            ensure(r.verdict == Verdict::Holds, || {
                format!("k = {k}, s = {s}: {}", r.verdict)
            })?;
            checked.push(format!("({k},{s})"));
        }
    }
    Ok(format!("holds at {}", checked.join(" ")))
}

fn criterion_7() -> Check {
    for k in 3..=256 {
        let r = lemmas::second_moment_identity(k).map_err(|e| e.to_string())?;
        ensure(r.identity && r.lower && r.at_least_one, || {
            format!("chain breaks at k = {k}")
        })?;
    }
    let r = lemmas::second_moment_identity(3).unwrap();
    let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    ensure(r.lhs == q(37, 24) && r.mid == q(9, 8), || {
        format!("k = 3 gives {} vs {}", r.lhs, r.mid)
    })?;
    Ok("k = 3..256 exact; k = 3: 37/24 >= 9/8".into())
}

fn criterion_8() -> Check {
    for k in 1..=256 {
        let r = lemmas::tail_check(k, DEFAULT_PRECISION_CAP).map_err(|e| e.to_string())?;
        ensure(r.verdict == Verdict::Holds, || {
            format!("k = {k}: {}", r.verdict)
        })?;
    }
    Ok("k = 1..256".into())
}

fn criterion_9() -> Check {
    let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let budget = 1 << 20;
    for n in 1..=4 {
        ensure(
            lemmas::sup_ratio_exact(&CubeSet::origin(n), 3, budget).unwrap() == BigRational::one(),
            || format!("A = {{0^{n}}} not 1"),
        )?;
    }
    let one = CubeSet::parse("1").unwrap();
    let both = CubeSet::parse("0,1").unwrap();
    ensure(
        lemmas::sup_ratio_exact(&one, 2, budget).unwrap() == q(3, 4),
        || "A = {1}".into(),
    )?;
    ensure(
        lemmas::sup_ratio_exact(&both, 2, budget).unwrap() == q(5, 4),
        || "A = {0,1}".into(),
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut passing = 0;
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let n = rng.gen_range(1..=5usize);
        let k = rng.gen_range(1..=6u32);
        let size = rng.gen_range(1..=8usize.min(1 << n));
        let mut members = Vec::new();
        while members.len() < size {
            let m = rng.gen_range(0..1u64 << n);
            if !members.contains(&m) {
                members.push(m);
            }
        }
        let a = CubeSet::new(n, members).unwrap();
        let exact = lemmas::sup_ratio_exact(&a, k, budget)
            .unwrap()
            .to_f64()
            .unwrap();
        let est = lemmas::sup_ratio_mc(&a, k, 100_000, 1000 + i).unwrap();
        let z = if est.std_error > 0.0 {
            (est.mean - exact).abs() / est.std_error
        } else {
            // constant integrand: the mean is exact up to summation rounding
            if (est.mean - exact).abs() <= 1e-12 * exact {
                0.0
            } else {
                f64::INFINITY
            }
        };
        worst = worst.max(z);
        if z <= 3.0 {
            passing += 1;
        }
    }
    ensure(passing >= 18, || format!("{passing}/20 within 3 SE"))?;
    Ok(format!(
        "hand values exact; {passing}/20 within 3 SE (max |z| = {worst:.2})"
    ))
}

fn criterion_10() -> Check {
    let caps = Caps::default();
    for (n, k) in [(4, 2), (6, 2), (8, 2), (6, 3), (9, 3), (8, 4)] {
        let block = lemmas::block_construction(n, k).unwrap();
        let theory = lemmas::block_theory(n, k).unwrap();
        let rep = concentration(&profile(&block.weights, &caps).unwrap());
        ensure(rep.rho == theory.rho, || {
            format!("({n},{k}): rho {} vs {}", rep.rho, theory.rho)
        })?;
        ensure(BigInt::from(rep.range_size.clone()) == theory.range, || {
            format!("({n},{k}): |R| {} vs {}", rep.range_size, theory.range)
        })?;
        let c = binom(k as u64, (k / 2) as i64).to_f64().unwrap();
        let predicted = ((k + 1) as f64).ln() / (2f64.powi(k as i32) / c).ln();
        let measured = rep.delta / rep.epsilon;
        ensure((measured - predicted).abs() <= 1e-12 * predicted, || {
            format!("({n},{k}): delta/eps {measured} vs {predicted}")
        })?;
    }
    Ok("6 block shapes exact, delta/eps to 12 digits".into())
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_anticonc"))
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn run_ok(cmd: &mut Command) -> std::result::Result<Output, String> {
    let out = cmd.output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!(
            "{cmd:?} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        )
    })?;
    Ok(out)
}

/// Runs `frontier` and returns (csv bytes, summary bytes).
fn frontier_run(
    n: usize,
    max: u64,
    workers: usize,
    tag: &str,
) -> std::result::Result<(Vec<u8>, Vec<u8>), String> {
    let path = tmp(&format!("frontier_{n}_{max}_{workers}_{tag}.csv"));
    let out = run_ok(
        bin()
            .args([
                "frontier",
                "--n",
                &n.to_string(),
                "--max-weight",
                &max.to_string(),
                "--workers",
                &workers.to_string(),
                "--output",
            ])
            .arg(&path),
    )?;
    let csv = std::fs::read(&path).map_err(|e| e.to_string())?;
    Ok((csv, out.stdout))
}

fn criterion_11() -> Check {
    let mut best = f64::NEG_INFINITY;
    let mut arg = String::new();
    for n in 1..=8 {
        let one = frontier_run(n, 12, 1, "a")?;
        let four = frontier_run(n, 12, 4, "b")?;
        let again = frontier_run(n, 12, 4, "c")?;
        ensure(one == four && four == again, || {
            format!("n = {n}: outputs differ")
        })?;
        let summary: serde_json::Value =
            serde_json::from_slice(&one.1).map_err(|e| e.to_string())?;
        let v: f64 = summary["outputs"]["max_delta_over_sqrt_eps"]
            .as_str()
            .and_then(|s| s.parse().ok())
            .ok_or("summary lacks max_delta_over_sqrt_eps")?;
        ensure(v.is_finite(), || {
            format!("n = {n}: max delta/sqrt(eps) = {v}")
        })?;
        if v > best {
            best = v;
            arg = summary["outputs"]["argmax_delta_over_sqrt_eps"].to_string();
        }
    }
    Ok(format!(
        "max delta/sqrt(eps) = {best} at {arg}, identical across runs and workers"
    ))
}

fn criterion_12() -> Check {
    for (n, max) in [(3, 4), (6, 8)] {
        let a = frontier_run(n, max, 1, "d")?;
        let b = frontier_run(n, max, 4, "e")?;
        ensure(a == b, || {
            format!("frontier n = {n} differs across workers")
        })?;
    }
    let verifies: &[&[&str]] = &[
        &["verify", "injectivity", "--weights", "1,1,2", "--k", "2"],
        &["verify", "density", "--weights", "1,1,2", "--k", "2"],
        &["verify", "partition", "--weights", "1,1,2", "--k", "2"],
        &["verify", "moment", "--k", "128", "--s", "2"],
        &["verify", "second-moment", "--k", "10"],
        &["verify", "tail", "--k", "30"],
        &["verify", "max-ratio", "--k", "12"],
        &["verify", "supratio", "--set", "100,011", "--k", "3"],
        &[
            "verify",
            "supratio",
            "--set",
            "100,011",
            "--k",
            "3",
            "--samples",
            "20000",
        ],
        &["verify", "theorem", "--weights", "1,1,3,3"],
    ];
    for args in verifies {
        let first = run_ok(bin().args(["--seed", "42"]).args(*args))?;
        let second = run_ok(bin().args(["--seed", "42"]).args(*args))?;
        ensure(first.stdout == second.stdout, || {
            format!("{args:?} not reproducible")
        })?;
    }
    Ok(format!(
        "frontier workers 1 = 4; {} verify commands byte-identical",
        verifies.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 12] = [
        ("oracle equivalence", criterion_1),
        ("anchor cases", criterion_2),
        ("universal lower bound", criterion_3),
        ("injectivity", criterion_4),
        ("density bound", criterion_5),
        ("initial moment bound", criterion_6),
        ("second-moment chain", criterion_7),
        ("binomial tail", criterion_8),
        ("sup-ratio", criterion_9),
        ("block construction", criterion_10),
        ("frontier summary stability", criterion_11),
        ("determinism", criterion_12),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({secs:.1}s) {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({secs:.1}s) {why}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
