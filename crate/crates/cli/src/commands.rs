use std::collections::BTreeSet;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::Path;

use vlcswarm::simulator::trace::to_jsonl_string;
use vlcswarm::{oracle, Error, HistogramKind, RunMetrics, RunOutput, Scenario, ScenarioParams};

use crate::fsutil::{check_writable, open, read_to_string, write_atomic};
use crate::Failure;

type Outcome = Result<(), Failure>;

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    let scenario = Scenario::from_json(&read_to_string(path)?)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    scenario.validate()?;
    Ok(scenario)
}

fn summary_line(out: &RunOutput) -> String {
    let d = &out.metrics.drones;
    let last = d.iter().filter_map(|m| m.arrival_time).fold(f64::NAN, f64::max);
    format!(
        "arrived {}/{} (last at {last:.1} s), avoided {}, waited {}",
        d.iter().filter(|m| m.arrived).count(),
        d.len(),
        d.iter().filter(|m| m.avoided).count(),
        d.iter().filter(|m| m.waited).count()
    )
}

pub fn generate(seed: u64, params: &ScenarioParams, out: &Path) -> Outcome {
    check_writable(out)?;
    let scenario = vlcswarm::generate_scenario(seed, params)?;
    write_atomic(out, scenario.to_json()?.as_bytes())?;
    println!("seed {seed}: {} drones -> {}", scenario.drones.len(), out.display());
    Ok(())
}

pub fn run(scenario_path: &Path, trace: &Path, metrics: &Path) -> Outcome {
    check_writable(trace)?;
    check_writable(metrics)?;
    if trace == metrics {
        return Err(Failure::Invalid("--trace and --metrics must differ".into()));
    }
    let scenario = load_scenario(scenario_path)?;
    let out = vlcswarm::run(&scenario)?;
    write_atomic(trace, to_jsonl_string(&out.trace).as_bytes())?;
    write_atomic(metrics, out.metrics.to_csv_string()?.as_bytes())?;
    println!("{}", summary_line(&out));
    Ok(())
}

/// `A-B` (inclusive) or `a,b,c`; returned sorted, duplicates rejected.
fn parse_seeds(spec: &str) -> Result<Vec<u64>, Failure> {
    let bad = |what: &str| Failure::Invalid(format!("--seeds {spec:?}: {what}"));
    let num = |s: &str| s.trim().parse::<u64>().map_err(|e| bad(&e.to_string()));
    let seeds: Vec<u64> = match spec.split_once('-') {
        Some((a, b)) => {
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                return Err(bad("range start exceeds end"));
            }
            (a..=b).collect()
        }
        None => spec.split(',').map(num).collect::<Result<_, _>>()?,
    };
    let unique: BTreeSet<u64> = seeds.iter().copied().collect();
    if unique.len() != seeds.len() {
        return Err(bad("duplicate seeds"));
    }
    Ok(unique.into_iter().collect())
}

pub fn batch(seeds: &str, jobs: usize, out_dir: &Path, params: &ScenarioParams) -> Outcome {
    let seeds = parse_seeds(seeds)?;
    if jobs == 0 {
        return Err(Failure::Invalid("--jobs must be at least 1".into()));
    }
    if out_dir.exists() && !out_dir.is_dir() {
        return Err(Failure::Invalid(format!("{} is not a directory", out_dir.display())));
    }
    // Bad parameters fail every seed alike; report them before touching the disk.
    if let Err(e @ (Error::InvalidParameter(_) | Error::InvalidScenario(_))) =
        vlcswarm::generate_scenario(seeds[0], params)
    {
        return Err(e.into());
    }
    fs::create_dir_all(out_dir).map_err(|e| Failure::Runtime(format!("creating {}: {e}", out_dir.display())))?;

    let results = vlcswarm::batch(&seeds, params, jobs)?;
    let mut summary = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Failure::Runtime(e.to_string());
    summary
        .write_record(["seed", "status", "drones", "arrived", "last_arrival", "avoided", "waited", "error"])
        .map_err(csv_err)?;
    let mut failed = 0;
    for (&seed, result) in seeds.iter().zip(results) {
        match result {
            Ok(r) => {
                let file = |ext: &str| out_dir.join(format!("seed-{seed}.{ext}"));
                write_atomic(&file("scenario.json"), r.scenario.to_json()?.as_bytes())?;
                write_atomic(&file("trace.jsonl"), to_jsonl_string(&r.output.trace).as_bytes())?;
                write_atomic(&file("metrics.csv"), r.output.metrics.to_csv_string()?.as_bytes())?;
                let d = &r.output.metrics.drones;
                let last = d.iter().filter_map(|m| m.arrival_time).fold(f64::NAN, f64::max);
                let count = |f: fn(&vlcswarm::DroneMetrics) -> bool| d.iter().filter(|m| f(m)).count().to_string();
                summary
                    .write_record([
                        seed.to_string(),
                        "ok".into(),
                        d.len().to_string(),
                        count(|m| m.arrived),
                        if last.is_nan() { String::new() } else { last.to_string() },
                        count(|m| m.avoided),
                        count(|m| m.waited),
                        String::new(),
                    ])
                    .map_err(csv_err)?;
            }
            Err(e) => {
                failed += 1;
                let blank = String::new;
                summary
                    .write_record([
                        seed.to_string(),
                        "error".into(),
                        blank(),
                        blank(),
                        blank(),
                        blank(),
                        blank(),
                        e.to_string(),
                    ])
                    .map_err(csv_err)?;
            }
        }
    }
    let bytes = summary.into_inner().map_err(|e| Failure::Runtime(e.to_string()))?;
    write_atomic(&out_dir.join("summary.csv"), &bytes)?;
    println!("{} seed(s), {failed} failed -> {}", seeds.len(), out_dir.display());
    if failed > 0 {
        return Err(Failure::Runtime(format!("{failed} of {} seeds failed; see summary.csv", seeds.len())));
    }
    Ok(())
}

pub fn report(paths: &[std::path::PathBuf], bin_width: f64, kind: HistogramKind, out: Option<&Path>) -> Outcome {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Failure::Invalid(format!("--bin-width must be > 0, got {bin_width}")));
    }
    if let Some(out) = out {
        check_writable(out)?;
    }
    let runs = paths
        .iter()
        .map(|p| RunMetrics::read_csv(open(p)?).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display()))))
        .collect::<Result<Vec<_>, _>>()?;
    let histogram = kind.histogram(&runs, bin_width)?;
    let mut buf = Vec::new();
    histogram.write_csv(&mut buf, kind.summary_label(), kind.fraction_below_one(&runs))?;
    match out {
        Some(out) => write_atomic(out, &buf),
        None => io::stdout().write_all(&buf).map_err(|e| Failure::Runtime(e.to_string())),
    }
}

pub fn check(trace: &Path, scenario_path: &Path) -> Outcome {
    let scenario = load_scenario(scenario_path)?;
    let report = oracle::audit_jsonl(BufReader::new(open(trace)?), &scenario)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::Runtime(e.to_string()))?;
    println!("{json}");
    if report.is_clean() {
        Ok(())
    } else {
        Err(Failure::Violations(report.violations.len()))
    }
}
