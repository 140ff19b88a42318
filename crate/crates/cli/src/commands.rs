use std::path::Path;

use anyhow::{bail, Context, Result};
use poa_core::embedding::{
    classical_mds, compare, distortion_report, embed as embed_set, DistortionReport, DistortionSummary, Embedding, Norm,
};
use poa_core::extension::{ExtensionMode, SampledObservable};
use poa_core::io::format_values;
use poa_core::signals::{
    analyze as analyze_signal, orthonormalize, synthesize as synthesize_signal, ObservableSpectrum,
};
use poa_core::stability::{default_families, CovarianceAuditReport, MeanAuditReport, StabilityAuditor};
use poa_core::{Error, Observable, PoaSolver, PrincipalObservableSet, SolverConfig};
use serde::Serialize;

use crate::input::{load_dataset, load_measure, load_values, read_columns, read_matrix, Dataset};
use crate::output::{numbered, scatter_svg, Envelope, OutDir};
use crate::{DatasetArgs, SolverArgs};

pub enum Status {
    Success,
    AuditFailed,
}

fn dataset(args: &DatasetArgs) -> Result<Dataset> {
    load_dataset(&args.input, args.format, args.measure.as_deref(), args.validate)
}

fn solve(ds: &Dataset, solver: &SolverArgs) -> Result<PrincipalObservableSet> {
    let k = solver.k();
    let set = PoaSolver::new(&ds.space, &ds.mu, ds.graph.as_ref(), solver.config())?.solve(k)?;
    if set.len() < k {
        eprintln!(
            "warning: only {} of {k} principal observables obtainable; the variance degenerates after that",
            set.len()
        );
    }
    if set.is_empty() {
        bail!(Error::NotEnoughObservables {
            requested: k,
            available: 0
        });
    }
    Ok(set)
}

/// Observables from an earlier `po.csv`, or solved afresh.
fn observables(ds: &Dataset, solver: &SolverArgs, po: Option<&Path>) -> Result<PrincipalObservableSet> {
    let Some(path) = po else {
        return solve(ds, solver);
    };
    let (_, columns) = read_columns(path)?;
    for col in &columns {
        if col.len() != ds.space.len() {
            bail!(Error::LengthMismatch {
                expected: ds.space.len(),
                found: col.len()
            });
        }
    }
    let obs = columns.into_iter().map(Observable::new).collect();
    Ok(PrincipalObservableSet::from_observables(obs, &ds.mu)?)
}

#[derive(Serialize)]
struct ObservableEntry {
    index: usize,
    variance: f64,
    best_restart: usize,
    restarts_used: usize,
    iterations: usize,
}

#[derive(Serialize)]
struct PoaReport<'a> {
    points: usize,
    requested: usize,
    found: usize,
    truncated: bool,
    config: &'a SolverConfig,
    observables: Vec<ObservableEntry>,
}

fn write_pos(out: &OutDir, set: &PrincipalObservableSet) -> Result<()> {
    let cols: Vec<&[f64]> = set.observables.iter().map(|o| o.values()).collect();
    out.write_columns("po.csv", &numbered("po", cols.len()), &cols)
}

pub fn poa(data: &DatasetArgs, solver: &SolverArgs) -> Result<Status> {
    let ds = dataset(data)?;
    let set = solve(&ds, solver)?;
    let out = OutDir::create(&data.out)?;
    write_pos(&out, &set)?;
    let config = solver.config();
    let report = PoaReport {
        points: ds.space.len(),
        requested: solver.k(),
        found: set.len(),
        truncated: set.len() < solver.k(),
        config: &config,
        observables: set
            .variances
            .iter()
            .zip(&set.diagnostics)
            .enumerate()
            .map(|(i, (&variance, d))| ObservableEntry {
                index: i + 1,
                variance,
                best_restart: d.best_restart,
                restarts_used: d.restarts_used,
                iterations: d.iterations,
            })
            .collect(),
    };
    out.write_json("poa.json", &Envelope::new("poa", report))?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct HistogramView<'a> {
    norm: Norm,
    dimension: usize,
    pairs: usize,
    bin_edges: &'a [f64],
    counts: &'a [usize],
    summary: &'a DistortionSummary,
}

fn view<'a>(r: &'a DistortionReport, dimension: usize) -> HistogramView<'a> {
    HistogramView {
        norm: r.norm,
        dimension,
        pairs: r.pairs.len(),
        bin_edges: &r.bin_edges,
        counts: &r.counts,
        summary: &r.summary,
    }
}

fn write_embedding(out: &OutDir, name: &str, emb: &Embedding) -> Result<()> {
    let cols: Vec<Vec<f64>> = (0..emb.dim())
        .map(|c| emb.coords.iter().map(|r| r[c]).collect())
        .collect();
    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    out.write_columns(name, &numbered("x", refs.len()), &refs)
}

fn poa_embedding(ds: &Dataset, solver: &SolverArgs) -> Result<Embedding> {
    let set = solve(ds, solver)?;
    Ok(embed_set(&set, set.len())?)
}

fn mds_embedding(ds: &Dataset, k: usize) -> Result<Embedding> {
    let max = ds.space.len().saturating_sub(1);
    if max == 0 {
        bail!(Error::NotEnoughObservables {
            requested: k,
            available: 0
        });
    }
    if k > max {
        eprintln!("warning: MDS dimension capped at {max} for {} points", ds.space.len());
    }
    Ok(classical_mds(&ds.space, k.min(max))?)
}

pub fn embed(data: &DatasetArgs, solver: &SolverArgs, bins: usize, svg: bool) -> Result<Status> {
    let ds = dataset(data)?;
    let emb = poa_embedding(&ds, solver)?;
    let report = distortion_report(&ds.space, &emb, bins)?;
    let out = OutDir::create(&data.out)?;
    write_embedding(&out, "embedding.csv", &emb)?;
    out.write_json("distortion.json", &Envelope::new("embed", view(&report, emb.dim())))?;
    if svg {
        out.write_text("embedding.svg", &scatter_svg(&emb.coords, "POA embedding"))?;
    }
    Ok(Status::Success)
}

pub fn mds(data: &DatasetArgs, solver: &SolverArgs, bins: usize, svg: bool) -> Result<Status> {
    let ds = dataset(data)?;
    let emb = mds_embedding(&ds, solver.k())?;
    let report = distortion_report(&ds.space, &emb, bins)?;
    let out = OutDir::create(&data.out)?;
    write_embedding(&out, "mds_embedding.csv", &emb)?;
    out.write_json("mds_distortion.json", &Envelope::new("mds", view(&report, emb.dim())))?;
    if svg {
        out.write_text("mds_embedding.svg", &scatter_svg(&emb.coords, "MDS embedding"))?;
    }
    Ok(Status::Success)
}

#[derive(Serialize)]
struct ComparisonView<'a> {
    poa: HistogramView<'a>,
    mds: HistogramView<'a>,
}

pub fn distort(data: &DatasetArgs, solver: &SolverArgs, bins: usize, svg: bool) -> Result<Status> {
    let ds = dataset(data)?;
    let poa_emb = poa_embedding(&ds, solver)?;
    let mds_emb = mds_embedding(&ds, poa_emb.dim())?;
    let report = compare(&ds.space, &poa_emb, &mds_emb, bins)?;
    let out = OutDir::create(&data.out)?;
    write_embedding(&out, "embedding.csv", &poa_emb)?;
    write_embedding(&out, "mds_embedding.csv", &mds_emb)?;
    let body = ComparisonView {
        poa: view(&report.poa, poa_emb.dim()),
        mds: view(&report.mds, mds_emb.dim()),
    };
    out.write_json("comparison.json", &Envelope::new("distort", body))?;
    if svg {
        out.write_text("embedding.svg", &scatter_svg(&poa_emb.coords, "POA embedding"))?;
        out.write_text("mds_embedding.svg", &scatter_svg(&mds_emb.coords, "MDS embedding"))?;
    }
    Ok(Status::Success)
}

pub fn extend(data: &DatasetArgs, solver: &SolverArgs, queries: &Path, values: Option<&Path>) -> Result<Status> {
    let ds = dataset(data)?;
    let sample = match values {
        Some(p) => load_values(p)?,
        None => {
            let cfg = solver.config();
            let po = PoaSolver::new(&ds.space, &ds.mu, ds.graph.as_ref(), cfg)?.principal_observable(&[])?;
            po.observable.into_values()
        }
    };
    if sample.len() != ds.space.len() {
        bail!(Error::LengthMismatch {
            expected: ds.space.len(),
            found: sample.len()
        });
    }
    let phi = SampledObservable::new(sample)?;
    let rows = read_matrix(queries)?;
    let mut cols: Vec<Vec<f64>> = (0..4).map(|_| Vec::with_capacity(rows.len())).collect();
    for (q, row) in rows.iter().enumerate() {
        cols[0].push(q as f64);
        for (m, mode) in ExtensionMode::ALL.iter().enumerate() {
            let v = phi
                .extend(row, *mode)
                .with_context(|| format!("query {} in {}", q + 1, queries.display()))?;
            cols[m + 1].push(v);
        }
    }
    let out = OutDir::create(&data.out)?;
    let header = ["query", "upper", "lower", "balanced"].map(String::from);
    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    out.write_columns("extension.csv", &header, &refs)?;
    Ok(Status::Success)
}

pub fn analyze(data: &DatasetArgs, solver: &SolverArgs, signal: &Path, po: Option<&Path>) -> Result<Status> {
    let ds = dataset(data)?;
    let f = load_values(signal)?;
    let set = observables(&ds, solver, po)?;
    let basis = orthonormalize(&set, &ds.mu)?;
    let spectrum = analyze_signal(&f, &basis, &ds.mu)?;
    let index: Vec<f64> = (0..spectrum.coefficients.len()).map(|i| i as f64).collect();
    let out = OutDir::create(&data.out)?;
    out.write_columns(
        "spectrum.csv",
        &["index", "coefficient"].map(String::from),
        &[&index, &spectrum.coefficients],
    )?;
    Ok(Status::Success)
}

pub fn synthesize(data: &DatasetArgs, solver: &SolverArgs, spectrum: &Path, po: Option<&Path>) -> Result<Status> {
    let ds = dataset(data)?;
    let (header, columns) = read_columns(spectrum)?;
    let (Some(ix), Some(cx)) = (
        header.iter().position(|h| h == "index"),
        header.iter().position(|h| h == "coefficient"),
    ) else {
        bail!("{}: expected `index,coefficient` header", spectrum.display());
    };
    let mut coefficients = vec![0.0; columns[ix].len()];
    for (&i, &c) in columns[ix].iter().zip(&columns[cx]) {
        if i < 0.0 || i.fract() != 0.0 || i as usize >= coefficients.len() {
            bail!("{}: invalid coefficient index {i}", spectrum.display());
        }
        coefficients[i as usize] = c;
    }
    coefficients.truncate(solver.k() + 1);
    let set = observables(&ds, solver, po)?;
    let basis = orthonormalize(&set, &ds.mu)?;
    let f = synthesize_signal(&ObservableSpectrum { coefficients }, &basis)?;
    OutDir::create(&data.out)?.write_text("signal.txt", &format_values(&f))?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct FamilyAudit {
    family: String,
    size: usize,
    mean: MeanAuditReport,
    covariance: CovarianceAuditReport,
}

#[derive(Serialize)]
struct StabilityReport {
    points: usize,
    w1: f64,
    pass: bool,
    families: Vec<FamilyAudit>,
}

pub fn stability(data: &DatasetArgs, solver: &SolverArgs, nu: &Path, random: usize) -> Result<Status> {
    let ds = dataset(data)?;
    let nu = load_measure(nu, ds.space.len())?;
    let set = solve(&ds, solver)?;
    let families = default_families(&ds.space, &ds.mu, Some(&set), random, solver.seed)?;
    let auditor = StabilityAuditor::new(&ds.space, &ds.mu, &nu)?;
    let mut audits = Vec::with_capacity(families.len());
    for fam in &families {
        audits.push(FamilyAudit {
            family: fam.name.clone(),
            size: fam.members.len(),
            mean: auditor.mean_audit(&fam.slices())?,
            covariance: auditor.covariance_audit(&fam.pairs())?,
        });
    }
    let pass = audits.iter().all(|a| a.mean.pass && a.covariance.pass);
    let report = StabilityReport {
        points: ds.space.len(),
        w1: auditor.w1(),
        pass,
        families: audits,
    };
    OutDir::create(&data.out)?.write_json("stability.json", &Envelope::new("stability", report))?;
    println!(
        "stability: {} (w1 = {})",
        if pass { "PASS" } else { "FAIL" },
        auditor.w1()
    );
    Ok(if pass { Status::Success } else { Status::AuditFailed })
}
