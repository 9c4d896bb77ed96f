use std::io;

use qcoupling::binomial::tail_probs;
use qcoupling::conjecture::{
    band_label, check_sharp_with_bounds, check_weak_with_tail, delta_upper_bound, figure1_data,
    figure2_data, CertifiedResult, QuantileTransform, Verdict, TIGHT_MARGIN,
};
use qcoupling::numerics::{check_precision, decimal_digits, parse_decimal, Real};
use qcoupling::rate::{alpha, couple_to_gauss, log_rho, MgfSpec};
use qcoupling::{Error, Rational};
use rayon::prelude::*;
use rayon::ThreadPool;
use thiserror::Error;

use crate::output::{open_output, Cell, Table};
use crate::{ChernoffArgs, Common, FigureArgs, PsiArgs, SweepArgs, VerifyArgs};

pub const EXIT_HOLDS: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_UNDECIDABLE: u8 = 2;
pub const EXIT_USAGE: u8 = 3;

/// Largest accepted `--max-precision`.
const PRECISION_CAP: u32 = 1 << 20;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot write output: {0}")]
    Io(#[from] io::Error),
    #[error("evaluation failed: {0}")]
    Numeric(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_UNDECIDABLE,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn check_common(c: &Common) -> CliResult<()> {
    check_precision(c.precision).map_err(|e| usage(format!("--precision: {e}")))?;
    if c.max_precision < c.precision {
        return Err(usage(format!(
            "--max-precision {} is below --precision {}",
            c.max_precision, c.precision
        )));
    }
    if c.max_precision > PRECISION_CAP {
        return Err(usage(format!(
            "--max-precision may not exceed {PRECISION_CAP}"
        )));
    }
    if c.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    Ok(())
}

fn check_even(flag: &str, m: u32) -> CliResult<()> {
    if m < 2 || m % 2 != 0 {
        return Err(usage(format!(
            "{flag} must be an even integer >= 2, got {m}"
        )));
    }
    Ok(())
}

fn pool(jobs: usize) -> CliResult<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| usage(format!("cannot start {jobs} workers: {e}")))
}

/// Formats numbers with the significant digits carried by `prec` bits.
struct Fmt(usize);

impl Fmt {
    fn new(prec: u32) -> Self {
        Fmt(decimal_digits(prec))
    }

    fn num(&self, x: &Real) -> Cell {
        Cell::Num(x.to_decimal(self.0))
    }
}

struct VerifyRow {
    m: u32,
    k: u32,
    weak: Result<CertifiedResult, Error>,
    sharp: Result<CertifiedResult, Error>,
}

fn verdict_of(r: &Result<CertifiedResult, Error>) -> Verdict {
    r.as_ref().map_or(Verdict::Undecidable, |c| c.verdict)
}

pub fn verify(a: &VerifyArgs) -> CliResult<u8> {
    let c = &a.common;
    check_common(c)?;
    let ms: Vec<u32> = match (a.m, a.m_max) {
        (Some(m), None) => {
            check_even("--m", m)?;
            vec![m]
        }
        (None, Some(m_max)) => {
            check_even("--m-max", m_max)?;
            (1..=m_max / 2).map(|h| 2 * h).collect()
        }
        _ => return Err(usage("verify needs exactly one of --m or --m-max")),
    };
    if let (Some(k), Some(m)) = (a.k, a.m) {
        if 2 * k <= m || k > m {
            return Err(usage(format!(
                "--k must satisfy m/2 < k <= m, got k = {k} for m = {m}"
            )));
        }
    }
    let bound = |flag: &str, text: &Option<String>, default: Rational| -> CliResult<Rational> {
        match text {
            Some(t) => parse_decimal(t).map_err(|e| usage(format!("{flag}: {e}"))),
            None => Ok(default),
        }
    };
    let upper = bound("--delta-upper", &a.delta_upper, delta_upper_bound())?;
    let lower = bound("--delta-lower", &a.delta_lower, Rational::new())?;
    if lower >= upper {
        return Err(usage(
            "the lower bound on Delta must be below the upper bound",
        ));
    }

    let (start, max) = (c.precision, c.max_precision);
    let check_m = |m: u32| -> Vec<VerifyRow> {
        let tails = tail_probs(m).expect("m is even and positive");
        tails
            .into_iter()
            .filter(|(k, _)| a.k.map_or(true, |only| only == *k))
            .map(|(k, p)| VerifyRow {
                m,
                k,
                weak: check_weak_with_tail(m, k, &p, start, max),
                sharp: check_sharp_with_bounds(m, k, &p, &lower, &upper, start, max),
            })
            .collect()
    };

    let fmt = Fmt::new(c.precision);
    let mut table = Table::new(
        c.format,
        open_output(c.output.as_deref())?,
        &[
            "m",
            "k",
            "weak",
            "weak_lower_margin",
            "weak_upper_margin",
            "sharp",
            "delta",
            "sharp_lower_margin",
            "sharp_upper_margin",
            "precision",
            "tight",
        ],
    )?;
    let workers = pool(c.jobs)?;
    let (mut holds, mut fails, mut undecidable) = (0u64, 0u64, 0u64);
    let mut tightest: Option<(Real, u32, u32)> = None;
    let mut max_used = start;
    let margin_cells = |r: &Result<CertifiedResult, Error>| match r {
        Ok(c) => (fmt.num(&c.lower_margin), fmt.num(&c.upper_margin)),
        Err(_) => (Cell::Empty, Cell::Empty),
    };
    for chunk in ms.chunks(4 * c.jobs) {
        let rows: Vec<Vec<VerifyRow>> =
            workers.install(|| chunk.par_iter().map(|&m| check_m(m)).collect());
        for row in rows.into_iter().flatten() {
            for r in [&row.weak, &row.sharp] {
                if let Err(e) = r {
                    eprintln!("qcoupling: (m, k) = ({}, {}): {e}", row.m, row.k);
                }
            }
            let verdict = verdict_of(&row.weak).combine(verdict_of(&row.sharp));
            match verdict {
                Verdict::Holds => holds += 1,
                Verdict::Fails => fails += 1,
                Verdict::Undecidable => undecidable += 1,
            }
            let precision = [&row.weak, &row.sharp]
                .iter()
                .filter_map(|r| r.as_ref().ok().map(|c| c.precision))
                .max()
                .unwrap_or(max);
            max_used = max_used.max(precision);
            if let Ok(s) = &row.sharp {
                let mm = s.min_margin();
                if tightest.as_ref().map_or(true, |(t, _, _)| mm < *t) {
                    tightest = Some((mm, row.m, row.k));
                }
            }
            let (wl, wu) = margin_cells(&row.weak);
            let (sl, su) = margin_cells(&row.sharp);
            table.row(&[
                Cell::Int(row.m.into()),
                Cell::Int(row.k.into()),
                Cell::Text(verdict_of(&row.weak).as_str().into()),
                wl,
                wu,
                Cell::Text(verdict_of(&row.sharp).as_str().into()),
                row.sharp
                    .as_ref()
                    .map_or(Cell::Empty, |s| fmt.num(&s.value)),
                sl,
                su,
                Cell::Int(precision.into()),
                Cell::Bool(row.sharp.as_ref().is_ok_and(|s| s.is_tight(TIGHT_MARGIN))),
            ])?;
        }
    }
    let (tm, tmm, tmk) = match &tightest {
        Some((t, m, k)) => (fmt.num(t), Cell::Int((*m).into()), Cell::Int((*k).into())),
        None => (Cell::Empty, Cell::Empty, Cell::Empty),
    };
    table.finish(&[
        ("checks", Cell::Int((holds + fails + undecidable) as i64)),
        ("holds", Cell::Int(holds as i64)),
        ("fails", Cell::Int(fails as i64)),
        ("undecidable", Cell::Int(undecidable as i64)),
        ("min_sharp_margin", tm),
        ("min_sharp_margin_m", tmm),
        ("min_sharp_margin_k", tmk),
        ("max_precision_used", Cell::Int(max_used.into())),
    ])?;
    Ok(if fails > 0 {
        EXIT_VIOLATION
    } else if undecidable > 0 {
        EXIT_UNDECIDABLE
    } else {
        EXIT_HOLDS
    })
}

pub fn sweep(a: &SweepArgs) -> CliResult<u8> {
    let c = &a.common;
    check_common(c)?;
    check_even("--m-max", a.m_max)?;
    let report = pool(c.jobs)?.install(|| qcoupling::conjecture::sweep(a.m_max, c.precision))?;
    let fmt = Fmt::new(c.precision);
    let mut table = Table::new(
        c.format,
        open_output(c.output.as_deref())?,
        &["m", "k", "p_log2", "y", "b", "delta", "band"],
    )?;
    for r in &report.records {
        table.row(&[
            Cell::Int(r.m.into()),
            Cell::Int(r.k.into()),
            fmt.num(&r.p.log2(c.precision)?),
            fmt.num(&r.y),
            fmt.num(&r.b),
            fmt.num(&r.delta),
            Cell::Text(band_label(r.m).into()),
        ])?;
    }
    for v in &report.violations {
        eprintln!("qcoupling: (m, k) = ({}, {}): {}", v.m, v.k, v.reason);
    }
    table.finish(&[
        ("delta_min", fmt.num(&report.delta_min)),
        ("delta_max", fmt.num(&report.delta_max)),
        ("argmax_m", Cell::Int(report.argmax.0.into())),
        ("argmax_k", Cell::Int(report.argmax.1.into())),
        ("violations", Cell::Int(report.violations.len() as i64)),
    ])?;
    Ok(EXIT_HOLDS)
}

pub fn figure(a: &FigureArgs) -> CliResult<u8> {
    let c = &a.common;
    check_common(c)?;
    let fmt = Fmt::new(c.precision);
    let out = open_output(c.output.as_deref())?;
    if a.which == 1 {
        check_even("--m", a.m)?;
        if !(a.grid_step > 0.0 && a.grid_step <= 1.0) {
            return Err(usage(format!(
                "--grid-step must lie in (0, 1], got {}",
                a.grid_step
            )));
        }
        let fig = figure1_data(a.m, c.precision, a.grid_step)?;
        let mut table = Table::new(c.format, out, &["series", "eta", "xi", "eta_end"])?;
        for s in &fig.steps {
            table.row(&[
                Cell::Text("step".into()),
                fmt.num(&s.eta_lo),
                fmt.num(&s.xi),
                fmt.num(&s.eta_hi),
            ])?;
        }
        for (series, points) in [("limit", &fig.limit), ("delta", &fig.delta)] {
            for p in points {
                table.row(&[
                    Cell::Text(series.into()),
                    fmt.num(&p.eta),
                    fmt.num(&p.xi),
                    Cell::Empty,
                ])?;
            }
        }
        table.finish(&[
            ("m", Cell::Int(a.m.into())),
            ("steps", Cell::Int(fig.steps.len() as i64)),
            ("limit_points", Cell::Int(fig.limit.len() as i64)),
            ("delta_points", Cell::Int(fig.delta.len() as i64)),
        ])?;
    } else {
        check_even("--m-max", a.m_max)?;
        let curves = pool(c.jobs)?.install(|| figure2_data(a.m_max, c.precision))?;
        let mut table = Table::new(c.format, out, &["m", "k", "band", "y", "delta"])?;
        let mut points = 0i64;
        for curve in &curves {
            for r in &curve.points {
                points += 1;
                table.row(&[
                    Cell::Int(r.m.into()),
                    Cell::Int(r.k.into()),
                    Cell::Text(curve.band.into()),
                    fmt.num(&r.y),
                    fmt.num(&r.delta),
                ])?;
            }
        }
        table.finish(&[
            ("m_max", Cell::Int(a.m_max.into())),
            ("curves", Cell::Int(curves.len() as i64)),
            ("points", Cell::Int(points)),
        ])?;
    }
    Ok(EXIT_HOLDS)
}

fn parse_real(flag: &str, text: &str, prec: u32) -> CliResult<Real> {
    Real::parse(text, prec).map_err(|_| usage(format!("{flag}: `{text}` is not a finite number")))
}

pub fn chernoff(a: &ChernoffArgs) -> CliResult<u8> {
    let c = &a.common;
    check_common(c)?;
    let spec = MgfSpec::from_name(&a.dist).map_err(|e| usage(format!("--dist {}: {e}", a.dist)))?;
    let prec = c.precision;
    let fmt = Fmt::new(prec);
    let mut rows = Vec::with_capacity(a.x.len());
    for text in &a.x {
        let x = parse_real("--x", text, prec)?;
        let bad = |e: Error| usage(format!("--x {text}: {e}"));
        let al = alpha(&spec, &x, prec).map_err(bad)?;
        let lr = log_rho(&spec, &x, prec).map_err(bad)?;
        let y = couple_to_gauss(&spec, &x, prec).map_err(bad)?;
        rows.push([
            fmt.num(&x),
            fmt.num(&al),
            fmt.num(&lr.exp()),
            fmt.num(&lr),
            fmt.num(&y),
        ]);
    }
    let mut table = Table::new(
        c.format,
        open_output(c.output.as_deref())?,
        &["x", "alpha", "rho", "log_rho", "y_coupled"],
    )?;
    for row in &rows {
        table.row(row)?;
    }
    table.finish(&[
        ("dist", Cell::Text(spec.name.clone())),
        ("points", Cell::Int(rows.len() as i64)),
    ])?;
    Ok(EXIT_HOLDS)
}

pub fn psi(a: &PsiArgs) -> CliResult<u8> {
    let c = &a.common;
    check_common(c)?;
    if a.m == 0 {
        return Err(usage("--m must be at least 1"));
    }
    let prec = c.precision;
    let ys: Vec<Real> = if a.y.is_empty() {
        if !(a.grid_step > 0.0 && a.grid_step.is_finite()) {
            return Err(usage(format!(
                "--grid-step must be positive, got {}",
                a.grid_step
            )));
        }
        let reach = (3.0 * f64::from(a.m).sqrt() / a.grid_step).floor() as i64;
        let step = Real::from_f64(a.grid_step, prec);
        (-reach..=reach).map(|j| &step * j).collect()
    } else {
        a.y.iter()
            .map(|t| parse_real("--y", t, prec))
            .collect::<CliResult<_>>()?
    };
    let transform = QuantileTransform::new(a.m, prec)?;
    let samples: Vec<_> = pool(c.jobs)?.install(|| {
        ys.par_iter()
            .map(|y| transform.margins(y))
            .collect::<Result<_, _>>()
    })?;

    let fmt = Fmt::new(prec);
    let mut table = Table::new(
        c.format,
        open_output(c.output.as_deref())?,
        &["y", "psi", "classical_margin", "sharp_margin", "saturated"],
    )?;
    let mut saturated = 0i64;
    for s in &samples {
        saturated += i64::from(s.saturated);
        table.row(&[
            fmt.num(&s.y),
            Cell::Int(s.psi),
            fmt.num(&s.classical),
            fmt.num(&s.sharp),
            Cell::Bool(s.saturated),
        ])?;
    }
    if saturated > 0 {
        eprintln!(
            "qcoupling: {saturated} point(s) have |y|/m >= sqrt(ln 4); m f^-1(y/m) was saturated at +-m there"
        );
    }
    table.finish(&[
        ("m", Cell::Int(a.m.into())),
        ("points", Cell::Int(samples.len() as i64)),
        ("saturated", Cell::Int(saturated)),
    ])?;
    Ok(EXIT_HOLDS)
}
