//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p qcoupling-cli --test acceptance`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use qcoupling::binomial::{binom_row, cdf, cdf_row, pmf, support, tail_prob, tail_probs};
use qcoupling::conjecture::{delta, margins_on_grid, tusnady_margin};
use qcoupling::gaussian::{q, q_inv};
use qcoupling::numerics::{certified_compare, enclose, CompareOutcome, Real};
use qcoupling::rate::{f_eval, log_rho, MgfSpec};
use qcoupling::{ExactDyadic, Integer};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn qcoupling(args: &[&str]) -> Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_qcoupling"))
        .args(args)
        .output()
        .map_err(|e| format!("could not run qcoupling: {e}"))
}

/// `verify --m-max 1000` exits 0 within ten minutes.
fn full_verification() -> Outcome {
    let limit = Duration::from_secs(600);
    let start = Instant::now();
    let out = qcoupling(&["verify", "--m-max", "1000", "--output", "/dev/null"])?;
    let took = start.elapsed();
    let code = out.status.code();
    if code != Some(0) {
        return Err(format!(
            "exit status {code:?}: {}",
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    if took >= limit {
        return Err(format!(
            "took {:.1} s, limit {} s",
            took.as_secs_f64(),
            limit.as_secs()
        ));
    }
    Ok(format!("exit 0 in {:.1} s", took.as_secs_f64()))
}

/// The sweep's argmax is (10, 10) and Delta(10, 10) lies in (1.0, 1.036)
/// with an enclosure no wider than 2^-64 on either side.
fn pessimal_location() -> Outcome {
    let out = qcoupling(&["sweep", "--m-max", "1000"])?;
    let text = String::from_utf8_lossy(&out.stdout);
    let summary = text
        .lines()
        .rev()
        .find(|l| l.starts_with("# "))
        .ok_or("sweep printed no summary line")?;
    let field = |key: &str| {
        summary[2..]
            .split(',')
            .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
            .map(str::to_owned)
    };
    let (am, ak) = (field("argmax_m"), field("argmax_k"));
    if am.as_deref() != Some("10") || ak.as_deref() != Some("10") {
        return Err(format!("argmax is ({am:?}, {ak:?})"));
    }
    let enc = enclose(|p| Ok(delta(10, 10, p)?.delta), 128).map_err(|e| e.to_string())?;
    if enc.radius > Real::pow2(-64, 128) {
        return Err(format!("enclosure radius {} exceeds 2^-64", enc.radius));
    }
    if !(enc.lo() > 1.0 && enc.hi() < 1.036) {
        return Err(format!("Delta(10,10) = {} +- {}", enc.mid, enc.radius));
    }
    Ok(format!(
        "argmax (10, 10), Delta = {} +- {:.1e}",
        enc.mid.to_decimal(20),
        enc.radius.to_f64()
    ))
}

/// Q(0.723359) < 1/4 < Q(0.6435214), each decided at P <= 256.
fn spot_inequality() -> Outcome {
    let quarter = |p: u32| Ok(Real::ratio(1, 4, p));
    let q_at = |s: &'static str| move |p: u32| Ok(q(&Real::parse(s, p)?, p));
    let left = certified_compare(q_at("0.723359"), quarter, 128, 256).map_err(|e| e.to_string())?;
    let right =
        certified_compare(quarter, q_at("0.6435214"), 128, 256).map_err(|e| e.to_string())?;
    if left != CompareOutcome::Less || right != CompareOutcome::Less {
        return Err(format!("outcomes {left:?} and {right:?}"));
    }
    Ok("both comparisons certified with P <= 256".into())
}

/// Delta matches the double-precision reimplementation within 1e-9 for
/// even m <= 100.
fn oracle_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for m in (2..=100).step_by(2) {
        for (k, _, want) in common::reference_deltas(m) {
            let got = delta(m, k, 128).map_err(|e| e.to_string())?.delta.to_f64();
            let err = (got - want).abs();
            if err > 1e-9 {
                return Err(format!("({m}, {k}): {got} vs oracle {want}"));
            }
            worst = worst.max(err);
            count += 1;
        }
    }
    Ok(format!("{count} points, max abs difference {worst:.2e}"))
}

/// |-2 log rho(x) - f(x)^2| <= 1e-30 for the Rademacher law, x = 0.01..0.99.
fn chernoff_identity() -> Outcome {
    let rad = MgfSpec::rademacher();
    let mut worst = Real::zero(128);
    for j in 1..=99 {
        let x = Real::ratio(j, 100, 128);
        let lhs = -log_rho(&rad, &x, 128)
            .map_err(|e| e.to_string())?
            .mul_pow2(1);
        let rhs = f_eval(&x, 128).map_err(|e| e.to_string())?.square();
        worst = worst.max((lhs - rhs).abs());
    }
    if worst > 1e-30 {
        return Err(format!("max deviation {worst}"));
    }
    Ok(format!("max deviation {:.2e}", worst.to_f64()))
}

/// Classical margin >= 0 on the grid for m <= 100, zero at (1, 0).
fn classical_bound() -> Outcome {
    let mut points = 0;
    for m in 1..=100 {
        for s in margins_on_grid(m, 128).map_err(|e| e.to_string())? {
            if s.classical < 0.0 {
                return Err(format!("m = {m}, y = {}: margin {}", s.y, s.classical));
            }
            points += 1;
        }
    }
    let at_origin = tusnady_margin(1, &Real::zero(128), 128).map_err(|e| e.to_string())?;
    if at_origin.abs() > Real::pow2(-60, 128) {
        return Err(format!("margin at (1, 0) is {at_origin}, not 0"));
    }
    Ok(format!("{points} grid points, equality at (1, 0)"))
}

/// Sharpened margin > 0 on the same grid for even m <= 100.
fn sharpened_bound() -> Outcome {
    let mut points = 0;
    let mut least: Option<Real> = None;
    for m in (2..=100).step_by(2) {
        for s in margins_on_grid(m, 128).map_err(|e| e.to_string())? {
            if !(s.sharp > 0.0) {
                return Err(format!("m = {m}, y = {}: margin {}", s.y, s.sharp));
            }
            least = Some(match least {
                Some(l) => l.min(s.sharp),
                None => s.sharp,
            });
            points += 1;
        }
    }
    let least = least.map_or(f64::NAN, |l| l.to_f64());
    Ok(format!("{points} grid points, least margin {least:.3e}"))
}

/// |Q(Q_inv(2^-j)) - 2^-j| / 2^-j <= 2^-128 for j <= 2000 at P = 256.
fn gaussian_roundtrip() -> Outcome {
    let bound = Real::pow2(-128, 256);
    let mut worst = Real::zero(256);
    for j in 1..=2000u32 {
        let p = ExactDyadic::new(Integer::from(1), j);
        let x = q_inv(&p, 256).map_err(|e| e.to_string())?;
        let want = p.to_real(256);
        let rel = ((q(&x, 256) - &want) / want).abs();
        if rel > bound {
            return Err(format!("j = {j}: relative error {rel}"));
        }
        worst = worst.max(rel);
    }
    Ok(format!(
        "j = 1..2000, max relative error 2^{:.1}",
        worst.to_f64().log2()
    ))
}

/// Normalisation, tail/CDF consistency and symmetry, exactly, for m <= 200.
fn exactness() -> Outcome {
    let one = ExactDyadic::one();
    for m in 1..=200u32 {
        let total: Integer = binom_row(m).into_iter().sum();
        if total != Integer::from(1) << m {
            return Err(format!("m = {m}: coefficients sum to {total}"));
        }
        let cdfs = cdf_row(m);
        if cdfs.last() != Some(&one) {
            return Err(format!("m = {m}: cdf does not reach 1"));
        }
        let mut acc = ExactDyadic::new(Integer::new(), m);
        for (s, c) in support(m).into_iter().zip(&cdfs) {
            let mass = pmf(m, s).map_err(|e| e.to_string())?;
            if mass != pmf(m, -s).map_err(|e| e.to_string())? {
                return Err(format!("m = {m}: pmf not symmetric at {s}"));
            }
            acc = acc.add(&mass);
            if &acc != c || cdf(m, s).map_err(|e| e.to_string())? != acc {
                return Err(format!("m = {m}: cdf inconsistent at {s}"));
            }
        }
        if m % 2 == 0 {
            for (k, p) in tail_probs(m).map_err(|e| e.to_string())? {
                let s = 2 * i64::from(k) - i64::from(m);
                let below = cdf(m, s - 2).map_err(|e| e.to_string())?;
                if p.add(&below) != one || tail_prob(m, i64::from(k)).ok() != Some(p.clone()) {
                    return Err(format!("m = {m}: tail and cdf disagree at k = {k}"));
                }
                // P(X >= s) = P(X <= -s)
                if p != cdf(m, -s).map_err(|e| e.to_string())? {
                    return Err(format!("m = {m}: tail not symmetric at k = {k}"));
                }
            }
        }
    }
    Ok("all identities exact for m = 1..200".into())
}

/// `sweep --m-max 200` is byte-identical with 8 workers and with 1.
fn determinism() -> Outcome {
    let run = |jobs: &str| -> Result<Vec<u8>, String> {
        let out = qcoupling(&["sweep", "--m-max", "200", "--jobs", jobs])?;
        if !out.status.success() {
            return Err(format!("--jobs {jobs} exited {:?}", out.status.code()));
        }
        Ok(out.stdout)
    };
    let (many, one) = (run("8")?, run("1")?);
    if many != one {
        return Err("outputs differ".into());
    }
    Ok(format!("{} identical bytes", one.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (
            "verify --m-max 1000 exits 0 in under 10 minutes",
            full_verification,
        ),
        ("pessimal location (10, 10)", pessimal_location),
        (
            "spot inequality Q(0.723359) < 1/4 < Q(0.6435214)",
            spot_inequality,
        ),
        (
            "agreement with the double-precision oracle",
            oracle_equivalence,
        ),
        ("Rademacher Chernoff identity", chernoff_identity),
        ("classical Tusnady bound", classical_bound),
        ("sharpened bound", sharpened_bound),
        ("Gaussian tail roundtrip", gaussian_roundtrip),
        ("exact binomial identities", exactness),
        ("sweep determinism across thread counts", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
