//! One function per subcommand. Each returns whether its assertions held.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use schlicht::bounds::{bound_br_koebe_piecewise, bound_for, write_csv, BoundReport};
use schlicht::classes::ClassSpec;
use schlicht::harness::io::{read_jsonl, write_jsonl, write_summary_csv};
use schlicht::harness::{
    run_identity_regression, tightness_search_with, verify_inverse, BatchSummary, Exec, Margins,
    SampleRecord, SearchResult, Verifier,
};

use crate::config::{Command, Format, RunConfig};
use crate::format::{sig, sig_complex, sig_opt, table};
use crate::CliError;

/// Agreement required between the general and piecewise Koebe bounds.
const PIECEWISE_TOL: f64 = 1e-12;

pub fn dispatch(config: &RunConfig, out: &mut (dyn Write + Send)) -> Result<bool, CliError> {
    with_pool(config.jobs, || match config.command {
        Command::Bounds if config.table => bounds_table(config, out),
        Command::Bounds => bounds(config, out),
        Command::VerifyInverse => verify(config, out),
        Command::Identities => identities(config, out),
        Command::Sample => sample(config, out),
        Command::Search => search(config, out),
        Command::Report => report(config, out),
    })
}

#[cfg(feature = "parallel")]
fn with_pool<T: Send>(
    jobs: Option<usize>,
    run: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_pool<T>(_jobs: Option<usize>, run: impl FnOnce() -> Result<T, CliError>) -> Result<T, CliError> {
    run()
}

fn class_label(spec: &ClassSpec) -> String {
    let base = format!("m={}, beta={}", sig(spec.m), sig(spec.beta));
    match spec.alpha {
        None => format!("ratio ({base})"),
        Some(a) => format!("alpha operator ({base}, alpha={})", sig_complex(a)),
    }
}

fn kernel_label(config: &RunConfig) -> String {
    format!(
        "{} (k2={}, k3={})",
        config.kernel_label,
        sig_complex(config.kernel.coeff(2).unwrap_or_default()),
        sig_complex(config.kernel.coeff(3).unwrap_or_default()),
    )
}

fn report_for(config: &RunConfig, beta: f64) -> Result<BoundReport, CliError> {
    let k = &config.kernel;
    Ok(bound_for(
        config.m,
        beta,
        config.alpha,
        k.coeff(2).unwrap_or_default(),
        k.coeff(3).unwrap_or_default(),
    )?)
}

fn print_json(value: &impl Serialize, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(std::io::Error::other)?;
    writeln!(out)?;
    Ok(())
}

/// Single-row CSV of a flat struct.
fn print_csv_row(value: &impl Serialize, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.serialize(value)?;
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))
}

fn bounds(config: &RunConfig, out: &mut (dyn Write + Send)) -> Result<bool, CliError> {
    let spec = config.spec()?;
    let r = report_for(config, config.beta)?;
    match config.format {
        Format::Json => print_json(&r, out)?,
        Format::Csv => write_csv(&[r], out)?,
        Format::Text => {
            let mut rows = vec![
                ("class".into(), class_label(&spec)),
                ("kernel".into(), kernel_label(config)),
                ("|a2| <=".into(), format!("{}  [{}]", sig(r.a2_bound), r.active_branch_a2.label())),
            ];
            let a3 = match (r.a3_bound, r.active_branch_a3) {
                (Some(b), Some(branch)) => format!("{}  [{}]", sig(b), branch.label()),
                _ => "n/a (needs alpha != -1/2)".into(),
            };
            rows.push(("|a3| <=".into(), a3));
            if let Some(c) = r.combo_bound {
                rows.push(("|2a2^2 - a3| <=".into(), sig(c)));
            }
            write!(out, "{}", table(&rows))?;
        }
    }
    Ok(true)
}

fn beta_grid(steps: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..steps).map(|i| i as f64 / steps as f64).collect();
    // The Koebe knee.
    let knee = 1.0 / 3.0;
    if !grid.iter().any(|&b| (b - knee).abs() < 1e-15) {
        grid.push(knee);
        grid.sort_by(f64::total_cmp);
    }
    grid
}

fn bounds_table(config: &RunConfig, out: &mut (dyn Write + Send)) -> Result<bool, CliError> {
    let reports = beta_grid(config.steps)
        .into_iter()
        .map(|beta| report_for(config, beta))
        .collect::<Result<Vec<_>, _>>()?;

    // For the Koebe ratio class at m = 2 the sweep must match the piecewise curve.
    let koebe_piecewise = config.kernel_label == "koebe" && config.alpha.is_none() && config.m == 2.0;
    let mut pass = true;
    if koebe_piecewise {
        for r in &reports {
            let p = bound_br_koebe_piecewise(2.0, r.inputs.beta)?;
            if (p.a2_bound - r.a2_bound).abs() > PIECEWISE_TOL {
                eprintln!(
                    "piecewise mismatch at beta={}: {} vs {}",
                    sig(r.inputs.beta),
                    sig(r.a2_bound),
                    sig(p.a2_bound)
                );
                pass = false;
            }
        }
    }

    if let Some(path) = &config.out {
        write_csv(&reports, create(path)?)?;
    }
    match config.format {
        Format::Json => print_json(&reports, out)?,
        Format::Csv => write_csv(&reports, out)?,
        Format::Text => {
            writeln!(out, "{:<10} {:<10} {:<10} {:<10} branches", "beta", "a2", "a3", "combo")?;
            for r in &reports {
                let a3 = r.active_branch_a3.map_or("none", |b| b.label());
                writeln!(
                    out,
                    "{:<10} {:<10} {:<10} {:<10} {}/{}",
                    sig(r.inputs.beta),
                    sig(r.a2_bound),
                    sig_opt(r.a3_bound),
                    sig_opt(r.combo_bound),
                    r.active_branch_a2.label(),
                    a3
                )?;
            }
            if koebe_piecewise {
                writeln!(out, "piecewise curve: {}", if pass { "match" } else { "MISMATCH" })?;
            }
        }
    }
    Ok(pass)
}

fn warn(warning: &Option<String>) {
    if let Some(w) = warning {
        eprintln!("warning: {w}");
    }
}

fn verdict(pass: bool) -> String {
    if pass { "pass" } else { "FAIL" }.into()
}

fn verify(config: &RunConfig, out: &mut (dyn Write + Send)) -> Result<bool, CliError> {
    let r = verify_inverse(config.seed, config.n);
    warn(&r.warning);
    match config.format {
        Format::Json => print_json(&r, out)?,
        Format::Csv => print_csv_row(&r, out)?,
        Format::Text => write!(
            out,
            "{}",
            table(&[
                ("trials".into(), r.n.to_string()),
                ("seed".into(), r.seed.to_string()),
                ("closed-form max deviation".into(), sig(r.closed_form_max_deviation)),
                ("round-trip max deviation".into(), sig(r.round_trip_max_deviation)),
                ("result".into(), verdict(r.pass)),
            ])
        )?,
    }
    Ok(r.pass)
}

fn identities(config: &RunConfig, out: &mut (dyn Write + Send)) -> Result<bool, CliError> {
    let r = run_identity_regression(config.seed, config.n);
    warn(&r.warning);
    match config.format {
        Format::Json => print_json(&r, out)?,
        Format::Csv => print_csv_row(&r, out)?,
        Format::Text => write!(
            out,
            "{}",
            table(&[
                ("trials".into(), r.n.to_string()),
                ("seed".into(), r.seed.to_string()),
                ("identity max deviation".into(), sig(r.identity_max_deviation)),
                ("pipeline max deviation".into(), sig(r.pipeline_max_deviation)),
                ("inverse closed form".into(), sig(r.inverse_closed_form_max_deviation)),
                ("round trip".into(), sig(r.round_trip_max_deviation)),
                ("worst conditioning".into(), sig(r.worst_conditioning)),
                ("tolerance".into(), sig(r.tolerance)),
                ("result".into(), verdict(r.pass)),
            ])
        )?,
    }
    Ok(r.pass)
}

fn summary_rows(s: &BatchSummary) -> Vec<(String, String)> {
    vec![
        ("trials".into(), s.trials.to_string()),
        ("accepted".into(), s.accepted.to_string()),
        ("violations".into(), s.violations.to_string()),
        ("errors".into(), s.errors.to_string()),
        ("truncated".into(), s.truncated.to_string()),
        ("min margin a2".into(), sig_opt(s.min_margin_a2)),
        ("min margin a3".into(), sig_opt(s.min_margin_a3)),
        ("min margin combo".into(), sig_opt(s.min_margin_combo)),
        ("max |a2|".into(), sig_opt(s.max_abs_a2)),
        ("max |a3|".into(), sig_opt(s.max_abs_a3)),
        ("max |2a2^2 - a3|".into(), sig_opt(s.max_abs_combo)),
    ]
}

fn bound_rows(r: &BoundReport) -> Vec<(String, String)> {
    let mut rows = vec![("bound |a2|".into(), sig(r.a2_bound))];
    rows.push(("bound |a3|".into(), sig_opt(r.a3_bound)));
    if let Some(c) = r.combo_bound {
        rows.push(("bound |2a2^2 - a3|".into(), sig(c)));
    }
    rows
}

fn sample(config: &RunConfig, out: &mut (dyn Write + Send)) -> Result<bool, CliError> {
    let verifier = Verifier::new(config.spec()?)?;
    let records = verifier.run(config.n, config.seed, Exec::Parallel);
    let summary = BatchSummary::of(&records);
    if let Some(path) = &config.out {
        write_jsonl(&records, create(path)?)?;
    }
    let row = [(config.kernel_label.clone(), verifier.spec().clone(), summary.clone())];
    if let Some(path) = &config.summary {
        write_summary_csv(&row, create(path)?)?;
    }
    match config.format {
        Format::Json => print_json(&summary, out)?,
        Format::Csv => write_summary_csv(&row, out)?,
        Format::Text => {
            let mut rows = vec![
                ("class".into(), class_label(verifier.spec())),
                ("kernel".into(), kernel_label(config)),
                ("seed".into(), config.seed.to_string()),
            ];
            rows.extend(bound_rows(verifier.bounds()));
            rows.extend(summary_rows(&summary));
            rows.push(("result".into(), verdict(summary.violations == 0)));
            write!(out, "{}", table(&rows))?;
        }
    }
    Ok(summary.violations == 0)
}

#[derive(Serialize)]
struct SearchRow {
    target: String,
    bound: f64,
    best_value: f64,
    ratio: f64,
    evaluations: u64,
    accepted_evaluations: u64,
    restarts: u64,
    found: bool,
}

impl From<&SearchResult> for SearchRow {
    fn from(r: &SearchResult) -> Self {
        Self {
            target: format!("{:?}", r.target).to_lowercase(),
            bound: r.bound,
            best_value: r.best_value,
            ratio: r.ratio,
            evaluations: r.evaluations,
            accepted_evaluations: r.accepted_evaluations,
            restarts: r.restarts,
            found: r.found,
        }
    }
}

fn search(config: &RunConfig, out: &mut (dyn Write + Send)) -> Result<bool, CliError> {
    let verifier = Verifier::new(config.spec()?)?;
    let r = tightness_search_with(&verifier, config.target, config.budget, config.seed)?;
    if !r.found {
        eprintln!("warning: no accepted evaluation; ratio is 0");
    }
    if let (Some(path), Some(w)) = (&config.out, &r.witness) {
        write_jsonl(std::slice::from_ref(w), create(path)?)?;
    }
    let pass = !r.exceeds_bound();
    match config.format {
        Format::Json => print_json(&r, out)?,
        Format::Csv => print_csv_row(&SearchRow::from(&r), out)?,
        Format::Text => {
            let row = SearchRow::from(&r);
            let mut rows = vec![
                ("class".into(), class_label(verifier.spec())),
                ("kernel".into(), kernel_label(config)),
                ("target".into(), row.target),
                ("bound".into(), sig(r.bound)),
                ("best value".into(), sig(r.best_value)),
                ("ratio".into(), sig(r.ratio)),
                ("evaluations".into(), r.evaluations.to_string()),
                ("accepted".into(), r.accepted_evaluations.to_string()),
                ("restarts".into(), r.restarts.to_string()),
            ];
            if let Some(w) = &r.witness {
                rows.push(("witness trial".into(), w.trial.to_string()));
                rows.push(("witness dilation".into(), sig(w.dilation)));
            }
            rows.push(("result".into(), verdict(pass)));
            write!(out, "{}", table(&rows))?;
        }
    }
    Ok(pass)
}

/// Accepted records whose stored coefficients break freshly computed bounds.
fn regrade(records: &[SampleRecord]) -> Result<u64, CliError> {
    let mut violations = 0;
    for r in records.iter().filter(|r| r.accepted) {
        let Some(x) = &r.extracted else { continue };
        let s = &r.spec;
        let bounds = bound_for(s.m, s.beta, s.alpha, s.k2(), s.k3())?;
        violations += u64::from(Margins::grade(x, &bounds).violated());
    }
    Ok(violations)
}

fn report(config: &RunConfig, out: &mut (dyn Write + Send)) -> Result<bool, CliError> {
    let path = config.input.as_deref().expect("validated");
    let file = File::open(path)
        .map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))?;
    let records = read_jsonl(BufReader::new(file))
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let summary = BatchSummary::of(&records);
    let regraded = regrade(&records)?;
    let pass = summary.violations == 0 && regraded == 0;
    if records.is_empty() {
        eprintln!("warning: {} holds no records", path.display());
    }
    let label = path.display().to_string();
    match config.format {
        Format::Json => print_json(&summary, out)?,
        Format::Csv => match records.first() {
            Some(first) => write_summary_csv(&[(label, first.spec.clone(), summary)], out)?,
            None => write_summary_csv(&[], out)?,
        },
        Format::Text => {
            let mut rows = vec![("input".into(), label)];
            rows.extend(summary_rows(&summary));
            rows.push(("regraded violations".into(), regraded.to_string()));
            rows.push(("result".into(), verdict(pass)));
            write!(out, "{}", table(&rows))?;
        }
    }
    Ok(pass)
}
