//! Acceptance criteria on the reference preset with seed 7. Prints one
//! PASS/FAIL line per criterion and exits nonzero if any criterion fails.
//! Runs without the test harness so the lines are never captured.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use coincidence_cli::output::without_timestamp;
use coincidence_cli::{run_suite, Budget, Check, Document, ExperimentConfig, Preset, Record, VerifyResult};
use coincidence_core::phasespace::ScanResult;

const SEED: u64 = 7;
const LEMMA_REL_TOL: f64 = 1e-10;
const LEMMA_SECONDS: f64 = 60.0;
const WEYL_TOL: f64 = 1e-6;
const ROUTE_TOL: f64 = 1e-8;
const CONFORMAL_SWEEP_TOL: f64 = 1e-9;
const CLAIM_TOL: f64 = 1e-7;
const BOUNDARY_TOL: f64 = 1e-12;
const EXPANSION_TOL: f64 = 1e-8;
const DECAY_DROP: f64 = 10.0;
const CLUSTER_RATIO: f64 = 1e-3;
const SLOPE_REL_TOL: f64 = 0.15;
const SUITE_SECONDS: f64 = 600.0;

struct Verdict {
    id: usize,
    title: &'static str,
    passed: bool,
    detail: String,
}

fn verdict(id: usize, title: &'static str, passed: bool, detail: String) -> Verdict {
    Verdict { id, title, passed, detail }
}

fn verify<'a>(records: &'a [Record], suite: &str) -> &'a VerifyResult {
    records
        .iter()
        .find_map(|r| match r {
            Record::Verify(v) if v.suite == suite => Some(v),
            _ => None,
        })
        .unwrap_or_else(|| panic!("no verify record {suite}"))
}

fn scan<'a>(records: &'a [Record], name: &str) -> &'a ScanResult {
    records
        .iter()
        .find_map(|r| match r {
            Record::Scan(s) if s.experiment == name => Some(s),
            _ => None,
        })
        .unwrap_or_else(|| panic!("no scan record {name}"))
}

fn worst(checks: &[&Check]) -> f64 {
    checks.iter().map(|c| c.value.value).fold(0.0, f64::max)
}

fn sci(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn output_dir() -> PathBuf {
    std::env::temp_dir().join(format!("coinlab-acceptance-{}", std::process::id()))
}

fn reference_config() -> ExperimentConfig {
    let mut config = ExperimentConfig::preset(Preset::Reference);
    config.seed = Some(SEED);
    config.output = output_dir();
    config
}

fn lemma(records: &[Record], config: &ExperimentConfig, seconds: f64) -> Verdict {
    let v = verify(records, "lemma42");
    let s: Vec<&Check> = v.group("S[").collect();
    let ok_setup = config.model.mass == 1.0
        && config.model.energy == 1.2
        && config.scan.slots == 4
        && config.model.n_max == 6
        && s.len() >= 20
        && s.iter().all(|c| c.value.samples >= 20);
    let within = s.iter().all(|c| c.value.value <= LEMMA_REL_TOL * c.details["scale"]);
    let ratio = s.iter().map(|c| c.value.value / c.details["scale"]).fold(0.0, f64::max);
    verdict(
        1,
        "S vanishes on the window",
        ok_setup && within && seconds <= LEMMA_SECONDS,
        format!("{} instances, max |S|/scale {ratio:.2e}, {seconds:.1} s", s.len()),
    )
}

fn energy_bounds(records: &[Record]) -> Verdict {
    let v = verify(records, "energybounds");
    let mut ok = true;
    let mut ratios = Vec::new();
    for n in 1..=3 {
        let prefix = format!("n={n}[");
        let checks: Vec<&Check> = v.group(&prefix).collect();
        ok &= checks.len() >= 50 && checks.iter().all(|c| c.value.value <= c.tolerance);
        ratios.push(checks.iter().map(|c| c.value.value / c.tolerance).fold(0.0, f64::max));
    }
    verdict(2, "energy bounds", ok, format!("max norm/bound per n {ratios:.4?}"))
}

fn weyl(records: &[Record], config: &ExperimentConfig) -> Verdict {
    let v = verify(records, "expansions");
    let vacuum: Vec<&Check> = v.group("weyl vacuum").collect();
    let normal: Vec<&Check> = v.group("weyl normal order").collect();
    let eta: Vec<&Check> = v.group("weyl eta").collect();
    let norms_ok = vacuum.iter().chain(&normal).all(|c| c.details["norm"] <= 1.0);
    let ok = config.verify.weyl_n_max >= 12
        && !vacuum.is_empty()
        && eta.len() == vacuum.len()
        && norms_ok
        && worst(&vacuum) <= WEYL_TOL
        && worst(&normal) <= WEYL_TOL
        && worst(&eta) <= WEYL_TOL;
    verdict(
        3,
        "Weyl calculus",
        ok,
        format!(
            "vacuum {:.2e}, normal order {:.2e}, eta {:.2e}",
            worst(&vacuum),
            worst(&normal),
            worst(&eta)
        ),
    )
}

fn tau(records: &[Record]) -> Verdict {
    let v = verify(records, "taudual");
    let routes: Vec<&Check> = v.group("routes[").collect();
    let norms: Vec<&Check> = v.group("norm[").collect();
    let ok = routes.len() >= 50
        && routes.iter().all(|c| c.value.value <= ROUTE_TOL + c.value.eta && c.details["degree"] <= 3.0)
        && norms.len() == routes.len()
        && norms.iter().all(|c| c.value.value <= c.tolerance);
    verdict(4, "tau dual route", ok, format!("{} cases, worst gap {:.2e}", routes.len(), worst(&routes)))
}

fn conformal(records: &[Record]) -> Verdict {
    let v = verify(records, "claim");
    let claims: Vec<&Check> = v.group("claim[").collect();
    let sweep = v.check("boundary sweep").expect("sweep");
    let g0 = v.check("g(0) = delta").expect("g(0)");
    let gpi = v.check("g(pi) = -delta").expect("g(pi)");
    let ok = claims.len() >= 20
        && worst(&claims) <= CLAIM_TOL
        && sweep.value.value <= CONFORMAL_SWEEP_TOL
        && sweep.value.samples + sweep.details["skipped"] as usize == 1000
        && g0.value.value <= BOUNDARY_TOL
        && gpi.value.value <= BOUNDARY_TOL;
    verdict(
        5,
        "conformal machinery",
        ok,
        format!(
            "sweep {:.2e}, claim {:.2e}, g(0) {:.1e}, g(pi) {:.1e}",
            sweep.value.value,
            worst(&claims),
            g0.value.value,
            gpi.value.value
        ),
    )
}

fn expansions(records: &[Record], config: &ExperimentConfig) -> Verdict {
    let v = verify(records, "expansions");
    let summunu: Vec<&Check> = v.group("summunu").collect();
    let expo: Vec<&Check> = v.group("expo").collect();
    let creation: Vec<&Check> = v.group("creation").collect();
    let ok = !summunu.is_empty()
        && !expo.is_empty()
        && !creation.is_empty()
        && config.verify.expo_degree == 8
        && worst(&summunu) <= EXPANSION_TOL
        && expo.iter().all(|c| c.value.value <= EXPANSION_TOL + c.details["tail_bound"])
        && worst(&creation) <= EXPANSION_TOL;
    verdict(
        6,
        "expansion identities",
        ok,
        format!(
            "summunu {:.2e}, expo {:.2e}, creation {:.2e}",
            worst(&summunu),
            worst(&expo),
            worst(&creation)
        ),
    )
}

fn pinorm(records: &[Record]) -> Verdict {
    let s = scan(records, "pinorm");
    let deltas: Vec<f64> = s.points.iter().map(|p| p.parameter).collect();
    let est = s.estimates();
    let ok = deltas == [1.0, 2.0, 4.0, 8.0]
        && s.points.iter().all(|p| p.estimate.samples == 200)
        && est.windows(2).all(|w| w[1] <= w[0])
        && est[0] >= DECAY_DROP * est[3];
    verdict(7, "norm decay scan", ok, format!("estimates {}, drop {:.0}x", sci(&est), est[0] / est[3]))
}

fn content(records: &[Record]) -> Verdict {
    let s = scan(records, "epscontent");
    let first = &s.points[0];
    let eps_ok = (first.details["epsilon"] - first.details["diameter"] / 10.0).abs() <= 1e-15 * first.details["diameter"];
    let last = s.points.iter().find(|p| p.parameter == 8.0);
    let ok = eps_ok && last.is_some_and(|p| p.estimate.value == 1.0);
    verdict(8, "epsilon content collapse", ok, format!("contents {:?}", s.estimates()))
}

fn clustering(records: &[Record]) -> Verdict {
    let s = scan(records, "clustering");
    let first = &s.points[0];
    let last = s.points.iter().find(|p| (p.parameter - 15.0).abs() < 0.05).expect("lambda = 15");
    let routes = s.points.iter().all(|p| p.details["route_difference"] <= ROUTE_TOL + p.estimate.eta);
    let ratio = last.estimate.value / first.estimate.value;
    verdict(
        9,
        "vacuum clustering",
        first.parameter == 0.0 && ratio <= CLUSTER_RATIO && routes,
        format!("ratio at lambda 15: {ratio:.2e}"),
    )
}

fn decay(records: &[Record]) -> Verdict {
    let v = verify(records, "bounds");
    let fits: Vec<&Check> = v.group("decay").collect();
    let slopes: Vec<f64> = fits.iter().map(|c| c.details["slope"]).collect();
    let ok = !fits.is_empty() && slopes.iter().all(|s| (s + 1.0).abs() <= SLOPE_REL_TOL);
    verdict(10, "correlation decay", ok, format!("slopes {slopes:.3?}"))
}

fn averaging(records: &[Record]) -> Verdict {
    let avg = scan(records, "averaging");
    let dominated = avg
        .points
        .iter()
        .all(|p| p.bound.as_ref().is_some_and(|b| p.estimate.value <= b.value));
    let ppp = scan(records, "ppp");
    let lengths: Vec<f64> = ppp.points.iter().map(|p| p.parameter).collect();
    let est = ppp.estimates();
    let ok = dominated && lengths == [5.0, 10.0, 20.0] && est.windows(2).all(|w| w[1] < w[0]);
    verdict(11, "averaging", ok, format!("averages {}, ppp {}", sci(&avg.estimates()), sci(&est)))
}

fn determinism(config: &ExperimentConfig, records: &[Record]) -> Verdict {
    let dir = output_dir();
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_coinlab"))
        .args(["suite", "--seed", &SEED.to_string(), "--out"])
        .arg(&dir)
        .env("COINLAB_THREADS", "2")
        .output()
        .expect("run coinlab");
    let seconds = start.elapsed().as_secs_f64();
    if !status.status.success() {
        return verdict(
            12,
            "determinism and runtime",
            false,
            format!("suite exited with {}: {}", status.status, String::from_utf8_lossy(&status.stderr)),
        );
    }
    let written = std::fs::read_to_string(dir.join("suite.json")).expect("suite.json");
    let local = Document::new("suite", config, records.to_vec(), false).to_json().expect("json");
    let strip = |s: &str| s.lines().filter(|l| !l.trim_start().starts_with("\"timestamp\"")).collect::<Vec<_>>().join("\n");
    let identical = strip(&written) == strip(&local);
    let same_value = without_timestamp(&written).ok() == without_timestamp(&local).ok();
    let _ = std::fs::remove_dir_all(&dir);
    verdict(
        12,
        "determinism and runtime",
        identical && same_value && seconds <= SUITE_SECONDS,
        format!("byte-identical {identical}, suite run {seconds:.1} s"),
    )
}

fn main() {
    let config = reference_config();
    let mut timings: Vec<(String, Duration)> = Vec::new();
    let start = Instant::now();
    let mut last = Duration::ZERO;
    let outcome = run_suite(&config, &Budget::unlimited(), |r| {
        let now = start.elapsed();
        timings.push((r.name().to_string(), now - last));
        last = now;
    })
    .expect("suite runs");
    assert!(!outcome.partial);
    let records = &outcome.records;
    let lemma_seconds = timings
        .iter()
        .find(|(n, _)| n == "lemma42")
        .map_or(f64::INFINITY, |(_, d)| d.as_secs_f64());

    let verdicts = [
        lemma(records, &config, lemma_seconds),
        energy_bounds(records),
        weyl(records, &config),
        tau(records),
        conformal(records),
        expansions(records, &config),
        pinorm(records),
        content(records),
        clustering(records),
        decay(records),
        averaging(records),
        determinism(&config, records),
    ];
    for v in &verdicts {
        println!(
            "{} criterion {:>2} {:<26} {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.id,
            v.title,
            v.detail
        );
    }
    let failed: Vec<usize> = verdicts.iter().filter(|v| !v.passed).map(|v| v.id).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
