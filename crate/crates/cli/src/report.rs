use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use coincidence_core::phasespace::ValueKind;

use crate::output::{Document, Record};

/// What each record illustrates, and how to read its numbers.
const CROSS_REFERENCE: [(&str, &str, &str); 12] = [
    ("lemma42", "Normal-ordered alternating sum over slot partitions vanishes once N > 2E/m", "residual / scale, exact"),
    ("claim", "Ring and core splitting of a product of commuting observables; conformal boundary values", "identity residual, quadrature"),
    ("taudual", "Closed form of the multiindex functionals against Fock-space matrix elements", "route gap, exact + eta"),
    ("energybounds", "Products of annihilators on the energy window are bounded by (E/m)^{n/2}", "singular value vs bound, exact"),
    ("expansions", "Weyl calculus and the normal-ordered, exponential and creation expansions", "residual vs truncation tail"),
    ("bounds", "Series majorants, bound chain, exponential decay of localized correlations", "bound ratios, fitted slope"),
    ("pinorm", "Norm of compressed coincidence products decays with the time window", "sampled sup, lower bound"),
    ("epscontent", "Image of the coincidence map collapses to a point as the window grows", "epsilon content, lower bound"),
    ("clustering", "Vacuum correlations of separated Weyl operators cluster exponentially", "two routes, exact + eta"),
    ("averaging", "Spatial averages of a centered observable stay below the pair majorant", "sup over states vs majorant"),
    ("ppp", "Spacetime averages in a one-particle state approach the vacuum value", "deviation, quadrature"),
    ("sharp", "Response to a local observable in sharp energy-momentum balls", "compressed norm, exact"),
];

fn kind(k: ValueKind) -> &'static str {
    match k {
        ValueKind::Exact => "exact",
        ValueKind::LowerBound => "lower-bound",
        ValueKind::Quadrature => "quadrature",
    }
}

/// JSON result documents in `dir`, sorted by file name.
pub fn collect(dir: &Path) -> Result<Vec<(PathBuf, Document)>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no result documents in {}", dir.display());
    }
    paths.into_iter().map(|p| Document::read(&p).map(|d| (p, d))).collect()
}

pub fn render(docs: &[(PathBuf, Document)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Coincidence laboratory results\n");
    let _ = writeln!(out, "| document | command | seed | records | status |");
    let _ = writeln!(out, "|---|---|---|---|---|");
    for (path, doc) in docs {
        let status = if doc.partial {
            "partial"
        } else if doc.passed() {
            "pass"
        } else {
            "FAIL"
        };
        let name = path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        let seed = doc.seed.map_or("-".to_string(), |s| s.to_string());
        let _ = writeln!(out, "| {name} | {} | {seed} | {} | {status} |", doc.command, doc.results.len());
    }

    let _ = writeln!(out, "\n## Cross-reference\n");
    let _ = writeln!(out, "| record | statement | reported as |");
    let _ = writeln!(out, "|---|---|---|");
    for (name, statement, reading) in CROSS_REFERENCE {
        let _ = writeln!(out, "| {name} | {statement} | {reading} |");
    }

    for (_, doc) in docs {
        for record in &doc.results {
            render_record(&mut out, record);
        }
    }
    out
}

fn render_record(out: &mut String, record: &Record) {
    match record {
        Record::Verify(v) => {
            let failed = v.checks.iter().filter(|c| !c.passed).count();
            let worst = v
                .checks
                .iter()
                .filter(|c| c.tolerance > 0.0)
                .map(|c| c.value.value / c.tolerance)
                .fold(0.0, f64::max);
            let _ = writeln!(out, "\n## verify {}\n", v.suite);
            let _ = writeln!(
                out,
                "{} checks, {failed} failed, largest value/tolerance {worst:.3e}.\n",
                v.checks.len()
            );
            let _ = writeln!(out, "| check | value | tolerance | eta | passed |");
            let _ = writeln!(out, "|---|---|---|---|---|");
            for c in &v.checks {
                let _ = writeln!(
                    out,
                    "| {} | {:.3e} | {:.3e} | {:.1e} | {} |",
                    c.name, c.value.value, c.tolerance, c.value.eta, c.passed
                );
            }
            for n in &v.notes {
                let _ = writeln!(out, "\n- {n}");
            }
        }
        Record::Scan(s) => {
            let _ = writeln!(out, "\n## scan {}\n", s.experiment);
            let _ = writeln!(out, "| {} | estimate | kind | bound | samples | eta |", s.parameter);
            let _ = writeln!(out, "|---|---|---|---|---|---|");
            for p in &s.points {
                let bound = p.bound.as_ref().map_or("-".to_string(), |b| format!("{:.4e}", b.value));
                let _ = writeln!(
                    out,
                    "| {} | {:.4e} | {} | {bound} | {} | {:.1e} |",
                    p.parameter,
                    p.estimate.value,
                    kind(p.estimate.kind),
                    p.estimate.samples,
                    p.estimate.eta
                );
            }
            for n in &s.notes {
                let _ = writeln!(out, "\n- {n}");
            }
        }
    }
}
