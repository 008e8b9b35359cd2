use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use definetti_core::bounds::{verify_instance, BoundId, BoundParams, BoundRegistry, Subject, VerificationReport};
use definetti_core::divergence::{DivergenceValue, Metric};
use definetti_core::exchangeable::{model_random_permutation, random_model_seeded, ExchangeableModel, ModelFile};
use definetti_core::suite::{run_suite, SuiteConfig, SuiteReport};
use definetti_core::urn::{enumerate_compositions, hypergeom_composition, multinom_composition, UrnComposition};

use crate::args::{
    BoundsTableArgs, DefinettiArgs, Format, ModelArgs, ModelKind, SamplingArgs, SweepArgs, UrnFamily, VerifyArgs,
};
use crate::report::{bound_note, convention, divergence_row, entry_row, fmt_bound, summarize_pmf, write_rows, Row};
use crate::CliError;

/// What a command produced: whether every asserted check passed.
pub struct Outcome {
    pub all_passed: bool,
}

impl Outcome {
    fn from_rows(rows: &[Row]) -> Self {
        Outcome {
            all_passed: rows.iter().all(|r| r.pass != Some(false)),
        }
    }
}

fn report_rows(
    subject_id: &str,
    c: usize,
    n: u64,
    report: &VerificationReport,
    metrics: &[Metric],
    first_note: String,
) -> Vec<Row> {
    let tv = DivergenceValue::Tv(report.tv.clone());
    let kl = DivergenceValue::Kl(report.kl.clone());
    let mut rows = Vec::new();
    let mut note = Some(first_note);
    for d in [&tv, &kl] {
        if metrics.contains(&d.metric()) {
            let mut row = divergence_row(subject_id, c, n, report.k, d);
            row.note = note.take().unwrap_or_default();
            rows.push(row);
        }
    }
    for e in &report.entries {
        if !metrics.contains(&e.metric) {
            continue;
        }
        let d = match e.metric {
            Metric::TvL1 => &tv,
            Metric::Kl => &kl,
        };
        rows.push(entry_row(subject_id, c, n, report.k, e, Some(d)));
    }
    rows
}

pub fn sampling(args: &SamplingArgs, bits: u32, format: Format) -> Result<Outcome, CliError> {
    let urn = &args.urn;
    if args.k > urn.size() {
        return Err(CliError::Input(format!(
            "k = {} exceeds the urn size n = {}",
            args.k,
            urn.size()
        )));
    }
    let subject = Subject::UrnPair(urn.clone());
    let report = verify_instance(
        &subject,
        args.k,
        &subject.relevant_bounds(),
        &BoundRegistry::standard(),
        bits,
    )?;
    let h = hypergeom_composition(urn, args.k)?;
    let b = multinom_composition(urn, args.k)?;
    let summary = format!("H={} B={}", summarize_pmf(h.iter()), summarize_pmf(b.iter()));
    let id = format!("urn{urn}");
    let rows = report_rows(&id, urn.colours(), urn.size(), &report, &args.metric, summary);
    write_rows(io::stdout().lock(), &rows, format)?;
    Ok(Outcome::from_rows(&rows))
}

pub fn load_model(path: &Path) -> Result<ExchangeableModel, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let file: ModelFile =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    ExchangeableModel::try_from(file).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn definetti(args: &DefinettiArgs, bits: u32, format: Format) -> Result<Outcome, CliError> {
    let model = load_model(&args.model)?;
    let n = model.length();
    let ks = match &args.k {
        Some(list) => list.0.clone(),
        None => (1..=n).collect(),
    };
    if let Some(bad) = ks.iter().find(|&&k| k == 0 || k > n) {
        return Err(CliError::Input(format!("k = {bad} is outside 1..={n}")));
    }
    let id = args
        .model
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".into());
    let c = model.alphabet_size();
    let subject = Subject::Model(model);
    let ids = subject.relevant_bounds();
    let registry = BoundRegistry::standard();
    let reports: Vec<_> = ks
        .par_iter()
        .map(|&k| verify_instance(&subject, k, &ids, &registry, bits))
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for report in &reports {
        rows.extend(report_rows(&id, c, n, report, &args.metric, "gap".into()));
    }
    write_rows(io::stdout().lock(), &rows, format)?;
    Ok(Outcome::from_rows(&rows))
}

pub fn bounds_table(args: &BoundsTableArgs, bits: u32, format: Format) -> Result<(), CliError> {
    let mut params = BoundParams::new(0, args.k);
    params.n = None;
    if let Some(urn) = &args.urn {
        if args.c.is_some_and(|c| c != urn.colours()) || args.n.is_some_and(|n| n != urn.size()) {
            return Err(CliError::Input(format!("--urn {urn} disagrees with --c/--n")));
        }
        params = params.with_urn(urn.clone());
    }
    params.c = params.c.or(args.c);
    params.n = params.n.or(args.n);
    let Some(n) = params.n else {
        return Err(CliError::Input("bounds-table needs --n or --urn".into()));
    };
    let registry = BoundRegistry::standard();
    let subject_id = match &args.urn {
        Some(u) => format!("urn{u}"),
        None => "params".to_string(),
    };
    let mut rows = Vec::new();
    for id in BoundId::ALL {
        let res = registry.evaluate(id, &params, bits)?;
        let spec = registry.spec(id);
        let mut note = bound_note(&res, true);
        if !spec.convention_note.is_empty() {
            note.push(spec.convention_note.to_string());
        }
        rows.push(Row {
            subject_id: subject_id.clone(),
            c: params.c,
            n: Some(n),
            k: Some(args.k),
            metric: res.metric.to_string(),
            bound_id: id.to_string(),
            bound_value: res.value.as_ref().map(fmt_bound).unwrap_or_default(),
            convention: convention(res.metric).into(),
            valid: Some(res.valid()),
            error_bound: format!("{:.3e}", res.value.as_ref().map_or(0.0, |v| v.error_bound_f64())),
            note: note.join("; "),
            ..Row::default()
        });
    }
    write_rows(io::stdout().lock(), &rows, format)
}

pub fn registry(format: Format) -> Result<(), CliError> {
    let registry = BoundRegistry::standard();
    let mut out = io::stdout().lock();
    match format {
        Format::Json => serde_json::to_writer_pretty(&mut out, registry.specs())?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["id", "metric", "kind", "formula", "validity", "reference"])?;
            for s in registry.specs() {
                w.write_record([
                    s.id.as_str(),
                    s.metric.as_str(),
                    s.kind.as_str(),
                    s.formula,
                    s.validity,
                    s.reference,
                ])?;
            }
            w.flush()?;
            return Ok(());
        }
    }
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct VerifySummary<'a> {
    scope: &'a str,
    seed: String,
    precision_bits: u32,
    modified_bounds: Vec<String>,
    passed: bool,
    total_checks: u64,
    criteria: Vec<CriterionSummary>,
    bounds: Vec<TallySummary>,
    failures: Vec<String>,
}

#[derive(Serialize)]
struct CriterionSummary {
    number: u8,
    name: &'static str,
    passed: bool,
    checks: u64,
    failures: usize,
    seconds: f64,
}

#[derive(Serialize)]
struct TallySummary {
    bound_id: String,
    checked: u64,
    passed: u64,
    failed: u64,
    skipped: u64,
    tight: u64,
}

fn summarize(report: &SuiteReport, args: &VerifyArgs) -> VerifySummary<'static> {
    VerifySummary {
        scope: report.scope.as_str(),
        seed: format!("{:#018x}", report.seed),
        precision_bits: report.min_bits,
        modified_bounds: args.scale_bound.iter().map(|(id, f)| format!("{id}={f}")).collect(),
        passed: report.passed(),
        total_checks: report.total_checks(),
        criteria: report
            .criteria
            .iter()
            .map(|c| CriterionSummary {
                number: c.number,
                name: c.name,
                passed: c.passed(),
                checks: c.checks,
                failures: c.failures.len(),
                seconds: c.elapsed.as_secs_f64(),
            })
            .collect(),
        bounds: report
            .tallies()
            .into_iter()
            .map(|(id, t)| TallySummary {
                bound_id: id.to_string(),
                checked: t.checked,
                passed: t.passed,
                failed: t.failed,
                skipped: t.skipped,
                tight: t.tight,
            })
            .collect(),
        failures: report
            .criteria
            .iter()
            .flat_map(|c| c.failures.iter().take(args.max_witnesses))
            .map(ToString::to_string)
            .collect(),
    }
}

pub fn verify(args: &VerifyArgs, bits: u32, format: Format) -> Result<Outcome, CliError> {
    let mut registry = BoundRegistry::standard();
    for (id, factor) in &args.scale_bound {
        registry = registry.with_scaled(*id, factor.clone());
    }
    let cfg = SuiteConfig::new(args.scope).with_registry(registry).with_min_bits(bits);
    let report = run_suite(&cfg)?;
    let summary = summarize(&report, args);
    let mut out = io::stdout().lock();
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &summary)?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(
                out,
                "# verify scope={} seed={} precision_bits={}",
                summary.scope, summary.seed, summary.precision_bits
            )?;
            for m in &summary.modified_bounds {
                writeln!(out, "# modified bound: {m}")?;
            }
            for c in &summary.criteria {
                writeln!(
                    out,
                    "criterion {:>2} {}  checks={:<7} failures={:<4} {:>7.2}s  {}",
                    c.number,
                    if c.passed { "PASS" } else { "FAIL" },
                    c.checks,
                    c.failures,
                    c.seconds,
                    c.name
                )?;
            }
            writeln!(
                out,
                "{:<18} {:>8} {:>8} {:>7} {:>8} {:>6}",
                "bound_id", "checked", "passed", "failed", "skipped", "tight"
            )?;
            for t in &summary.bounds {
                writeln!(
                    out,
                    "{:<18} {:>8} {:>8} {:>7} {:>8} {:>6}",
                    t.bound_id, t.checked, t.passed, t.failed, t.skipped, t.tight
                )?;
            }
            for w in &summary.failures {
                writeln!(out, "witness: {w}")?;
            }
            writeln!(
                out,
                "result: {} ({} checks)",
                if summary.passed { "PASS" } else { "FAIL" },
                summary.total_checks
            )?;
        }
    }
    if !summary.passed {
        let first = report.failures().next().map(ToString::to_string).unwrap_or_default();
        eprintln!("verification failed: {first}");
    }
    Ok(Outcome {
        all_passed: summary.passed,
    })
}

/// Urns of one `(c, n)` cell in ascending lexicographic order.
fn sweep_urns(family: UrnFamily, c: u64, n: u64) -> Result<Vec<UrnComposition>, CliError> {
    let mut urns: Vec<UrnComposition> = match family {
        UrnFamily::Uniform => vec![UrnComposition::distinct(n)?],
        UrnFamily::All | UrnFamily::Full => enumerate_compositions(c as usize, n, None)?
            .into_iter()
            .map(|s| UrnComposition::new(s.counts().to_vec()))
            .collect::<Result<_, _>>()?,
    };
    if family == UrnFamily::Full {
        urns.retain(UrnComposition::all_colours_present);
    }
    urns.sort_by(|a, b| a.counts().cmp(b.counts()));
    Ok(urns)
}

enum Cell {
    Run(UrnComposition, u64),
    Skip { c: u64, n: u64, k: u64, reason: String },
}

pub fn sweep(args: &SweepArgs, bits: u32, format: Format) -> Result<Outcome, CliError> {
    let mut cells = Vec::new();
    let cs: Vec<Option<u64>> = match args.urns {
        UrnFamily::Uniform => vec![None],
        _ => args.c_range.0.iter().copied().map(Some).collect(),
    };
    for c in cs {
        for &n in &args.n_range.0 {
            let c_eff = c.unwrap_or(n);
            for &k in &args.k_range.0 {
                let skip = |reason: &str| Cell::Skip {
                    c: c_eff,
                    n,
                    k,
                    reason: reason.to_string(),
                };
                if n == 0 {
                    cells.push(skip("n = 0"));
                } else if c_eff == 0 {
                    cells.push(skip("c = 0"));
                } else if k == 0 {
                    cells.push(skip("k = 0"));
                } else if k > n {
                    cells.push(skip("k > n"));
                } else {
                    let urns = sweep_urns(args.urns, c_eff, n)?;
                    if urns.is_empty() {
                        cells.push(skip("no urn in this family"));
                    }
                    cells.extend(urns.into_iter().map(|u| Cell::Run(u, k)));
                }
            }
        }
    }
    let registry = BoundRegistry::standard();
    let per_cell: Vec<Vec<Row>> = cells
        .par_iter()
        .map(|cell| match cell {
            Cell::Skip { c, n, k, reason } => Ok(vec![Row {
                subject_id: String::new(),
                c: Some(*c as usize),
                n: Some(*n),
                k: Some(*k),
                valid: Some(false),
                note: format!("skipped: {reason}"),
                ..Row::default()
            }]),
            Cell::Run(urn, k) => {
                let subject = Subject::UrnPair(urn.clone());
                let ids = args.bounds.clone().unwrap_or_else(|| subject.relevant_bounds());
                let report = verify_instance(&subject, *k, &ids, &registry, bits)?;
                let id = format!("urn{urn}");
                Ok(report_rows(
                    &id,
                    urn.colours(),
                    urn.size(),
                    &report,
                    &[Metric::TvL1, Metric::Kl],
                    String::new(),
                ))
            }
        })
        .collect::<Result<_, CliError>>()?;
    let rows: Vec<Row> = per_cell.into_iter().flatten().collect();
    match &args.out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let mut buf = io::BufWriter::new(file);
            write_rows(&mut buf, &rows, format)?;
            buf.flush()?;
        }
        None => write_rows(io::stdout().lock(), &rows, format)?,
    }
    Ok(Outcome::from_rows(&rows))
}

pub fn model(args: &ModelArgs) -> Result<(), CliError> {
    let model = match args.kind {
        ModelKind::Permutation => model_random_permutation(args.n)?,
        ModelKind::Random => random_model_seeded(args.seed, args.c, args.n)?,
    };
    let text = serde_json::to_string_pretty(&ModelFile::from(&model))? + "\n";
    match &args.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
