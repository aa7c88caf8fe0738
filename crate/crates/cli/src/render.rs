use std::io::{self, Write};

use serde_json::{json, Value};
use wcauth_core::bounds::Evaluated;
use wcauth_core::{
    BoundReport, BreakTime, CampaignConfig, Prob, RoundOutcome, RoundTranscript, SuccessStats,
};

/// `log2 = x` plus a decimal rendering; below 10⁻³⁰⁰ the decimal is rebuilt
/// from the logarithm.
pub fn prob(p: &Prob) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let clamp = if p.clamped() { " (clamped)" } else { "" };
    if p.log10() >= -300.0 {
        format!("{:.6e}  [log2 {:.4}]{clamp}", p.value(), p.log2())
    } else {
        format!(
            "{}  [log2 {:.4}]{clamp}",
            sci_from_log10(p.log10()),
            p.log2()
        )
    }
}

fn sci_from_log10(l: f64) -> String {
    let exp = l.floor();
    format!("{:.3}e{}", 10f64.powf(l - exp), exp as i64)
}

fn evaluated(e: &Evaluated) -> String {
    match &e.exact {
        Some(x) => format!("{}  = {}/{}", prob(&e.prob), x.numer(), x.denom()),
        None => prob(&e.prob),
    }
}

fn years(t: &BreakTime) -> String {
    if t.is_infinite() {
        "never".into()
    } else if t.log10_years() < 300.0 {
        format!("{:.4e} years", t.years())
    } else {
        format!("{} years", sci_from_log10(t.log10_years()))
    }
}

pub fn bound_table(out: &mut impl Write, r: &BoundReport) -> io::Result<()> {
    let p = &r.params;
    writeln!(
        out,
        "log2|H| = {}, log2|T| = {}, epsilon = {}, r = {}",
        p.log2_keys, p.log2_tags, p.epsilon, p.r
    )?;
    let row = |out: &mut dyn Write, name: &str, v: String| writeln!(out, "  {name:<34} {v}");
    row(out, "guess, no knowledge", prob(&r.guess_uniform))?;
    row(out, "guess after one pair", prob(&r.guess_after_pair))?;
    row(out, "guess with partial key", prob(&r.guess_partial))?;
    row(
        out,
        "average success before tag",
        prob(&r.average_before_tag),
    )?;
    row(
        out,
        "min-entropy (bits)",
        format!("{:.6}", r.min_entropy_bits),
    )?;
    row(
        out,
        "mean surviving in class (log2)",
        format!("{:.6}", r.moments.log2_mu),
    )?;
    if let Some(w) = &r.weak_pair_exact {
        row(out, "weak-pair probability (exact)", evaluated(w))?;
    }
    if let Some(c) = &r.chebyshev_exact_moments {
        row(out, "Chebyshev bound, exact moments", evaluated(c))?;
    }
    row(
        out,
        "Chebyshev bound, asymptotic",
        evaluated(&r.chebyshev_asymptotic),
    )?;
    if let Some(e) = &r.engineered {
        row(out, "good subsets n", format!("{:.6}", e.n_good_subsets))?;
        row(out, "engineered-partition success", evaluated(&e.success))?;
    }
    row(
        out,
        "time to guess",
        years(&r.break_times.guessing_after_pair),
    )?;
    row(
        out,
        "time to a weak pair",
        years(&r.break_times.waiting_for_weak_pair),
    )?;
    if let Some(t) = &r.break_times.engineered {
        row(out, "time to engineered forgery", years(t))?;
    }
    for note in &r.notes {
        writeln!(out, "  note: {note}")?;
    }
    Ok(())
}

pub fn stats_table(out: &mut impl Write, cfg: &CampaignConfig, s: &SuccessStats) -> io::Result<()> {
    writeln!(
        out,
        "config        {}",
        serde_json::to_string(cfg).unwrap_or_default()
    )?;
    writeln!(out, "trials        {}", s.trials)?;
    writeln!(out, "attempts      {}", s.attempts)?;
    writeln!(out, "forgeries     {}", s.forgeries)?;
    writeln!(out, "detections    {}", s.detections)?;
    writeln!(out, "honest ok     {}", s.honest_accepted)?;
    writeln!(
        out,
        "success rate  {:.6} ± {:.6}  (95% [{:.6}, {:.6}])",
        s.success_rate, s.standard_error, s.wilson_95[0], s.wilson_95[1]
    )?;
    if let Some(p) = &s.prediction {
        let kind = match p.kind {
            wcauth_core::protocol::PredictionKind::Point => "point",
            wcauth_core::protocol::PredictionKind::Ceiling => "ceiling",
        };
        writeln!(
            out,
            "prediction    {kind} {:.6} ({}{})",
            p.value,
            p.source,
            p.exact
                .as_deref()
                .map(|x| format!(", exact {x}"))
                .unwrap_or_default()
        )?;
    }
    if let Some(d) = &s.design {
        writeln!(
            out,
            "design        {} good subsets of {}, {} full, integral rate {}",
            d.good_subsets, d.good_subset_size, d.full_subsets, d.certain_forgery_rate
        )?;
    }
    if let Some(v) = s.verdict {
        writeln!(
            out,
            "verdict       {}",
            serde_json::to_value(v)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default()
        )?;
    }
    Ok(())
}

pub fn demo_table(out: &mut impl Write, t: &RoundTranscript, o: &RoundOutcome) -> io::Result<()> {
    writeln!(out, "true key {}", t.true_key)?;
    if let (Some(before), Some(after)) = (&t.knowledge_before, &t.knowledge_after) {
        writeln!(
            out,
            "Eve's candidates: {} before, {} after",
            before.len(),
            after.len()
        )?;
    }
    for (i, e) in t.events.iter().enumerate() {
        writeln!(
            out,
            "{:>3}  {}",
            i,
            serde_json::to_string(e).unwrap_or_default()
        )?;
    }
    writeln!(
        out,
        "forgery accepted {}, honest accepted {}, Eve attempted {}, Eve detected {}",
        o.forgery_accepted, o.honest_accepted, o.eve_attempted, o.eve_detected
    )
}

/// One line per round header and one per event, each tagged with the trial
/// index.
pub fn transcript_lines(out: &mut impl Write, transcripts: &[RoundTranscript]) -> io::Result<()> {
    for (trial, t) in transcripts.iter().enumerate() {
        let header = json!({
            "trial": trial,
            "record": "round",
            "true_key": t.true_key,
            "knowledge_before": t.knowledge_before,
            "knowledge_after": t.knowledge_after,
        });
        writeln!(out, "{header}")?;
        for (seq, e) in t.events.iter().enumerate() {
            let mut v = json!({ "trial": trial, "record": "event", "seq": seq });
            if let (Value::Object(m), Ok(Value::Object(ev))) = (&mut v, serde_json::to_value(e)) {
                m.extend(ev);
            }
            writeln!(out, "{v}")?;
        }
    }
    Ok(())
}
