//! The five headline figures: key length, guessing time, the certain-forgery
//! bound and its waiting time, and the engineered attack with its waiting time.

use std::io::{self, Write};

use clap::{Args, ValueEnum};
use serde::Serialize;
use wcauth_core::bounds::{chebyshev_bound, engineered_attack_prob, expected_break_time};
use wcauth_core::{wc_key_length, BoundParams, ChebyshevMode, Epsilon, Prob, Result};

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Table,
    Json,
}

#[derive(Args)]
pub struct ReproduceArgs {
    /// Relative tolerance for the approximate figures.
    #[arg(long, default_value_t = 0.05)]
    tolerance: f64,
    #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
    format: ReportFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Line {
    pub name: &'static str,
    pub computed: String,
    pub published: String,
    pub criterion: String,
    pub pass: bool,
}

fn within(computed: f64, published: f64, tol: f64) -> bool {
    ((computed - published) / published).abs() <= tol
}

/// Relative closeness of two numbers known only by their log₁₀.
fn within_log10(computed: f64, published: f64, tol: f64) -> bool {
    ((computed - published) * std::f64::consts::LN_10)
        .exp_m1()
        .abs()
        <= tol
}

pub fn lines(tol: f64) -> Result<Vec<Line>> {
    let eps = Epsilon::new(2, 1 << 32)?;
    let r = (-0.125f64).exp2();
    let params = BoundParams::new(2176.0, 32.0, eps, r)?;
    let mut out = Vec::new();

    let key = wc_key_length(100_000, 32)?;
    out.push(Line {
        name: "key length (bits)",
        computed: key.to_string(),
        published: "2176".into(),
        criterion: "exact".into(),
        pass: key == 2176,
    });

    let guess = expected_break_time(Prob::from_log2(-31.0), 0.1, 0.0)?;
    out.push(Line {
        name: "time to guess a tag",
        computed: format!("{:.1} years", guess.years()),
        published: "680 years".into(),
        criterion: format!("±{tol}"),
        pass: within(guess.years(), 680.0, tol),
    });

    let weak = chebyshev_bound(&params, ChebyshevMode::Asymptotic)?.prob;
    let published_log10 = 3.5f64.log10() - 647.0;
    let mantissa = 10f64.powf(weak.log10() - weak.log10().floor());
    out.push(Line {
        name: "certain-forgery bound",
        computed: format!("{mantissa:.3}e{}", weak.log10().floor() as i64),
        published: "3.5e-647".into(),
        criterion: format!("±{tol}"),
        pass: within_log10(weak.log10(), published_log10, tol),
    });

    let wait = expected_break_time(weak, 1000.0, 0.0)?;
    out.push(Line {
        name: "time to certain forgery (log10 years)",
        computed: format!("{:.2}", wait.log10_years()),
        published: "at least 635".into(),
        criterion: "≥ 635".into(),
        pass: wait.log10_years() >= 635.0,
    });

    let eng = engineered_attack_prob(&params)?.success.prob;
    let months = expected_break_time(eng, 1000.0, 0.0)?.months();
    out.push(Line {
        name: "engineered attack; time to forgery",
        computed: format!("{:.4e}; {months:.2} months", eng.value()),
        published: "4.2e-11; nine months".into(),
        criterion: format!("±{tol} each"),
        pass: within(eng.value(), 4.2e-11, tol) && within(months, 9.0, tol),
    });
    Ok(out)
}

/// Exit status 4 if any line fails.
pub fn run(a: ReproduceArgs) -> std::result::Result<u8, Failure> {
    let lines = lines(a.tolerance)?;
    let all = lines.iter().all(|l| l.pass);
    let mut out = io::stdout().lock();
    match a.format {
        ReportFormat::Json => {
            #[derive(Serialize)]
            struct Report<'a> {
                tolerance: f64,
                all_pass: bool,
                lines: &'a [Line],
            }
            serde_json::to_writer_pretty(
                &mut out,
                &Report {
                    tolerance: a.tolerance,
                    all_pass: all,
                    lines: &lines,
                },
            )?;
            writeln!(out)?;
        }
        ReportFormat::Table => {
            for l in &lines {
                writeln!(
                    out,
                    "{}  {:<38} computed {:<28} published {:<22} ({})",
                    if l.pass { "PASS" } else { "FAIL" },
                    l.name,
                    l.computed,
                    l.published,
                    l.criterion
                )?;
            }
        }
    }
    Ok(if all { 0 } else { 4 })
}
