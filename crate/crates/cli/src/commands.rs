use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use gradcode::analysis::{completion_cdf, count_recoverable_by_type, expected_completion_time, DEFAULT_BUDGET};
use gradcode::gd::{centralized_gd, run_gd, GdConfig, RegressionProblem};
use gradcode::reference::{compare, enumerate_example, FULL_RECOVERY, PARTIAL_RECOVERY};
use gradcode::report::{self, Metric};
use gradcode::schedule::{build, validate_schedule};
use gradcode::sim::{sweep_tolerance, SimConfig};
use gradcode::Scheme;

use crate::config::Config;

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn tables(out: &Path) -> Result<()> {
    let mut diff = create(out, "tables_diff.txt")?;
    let mut total = 0;
    for (file, m_prime, rows) in [("table1.csv", 4, &FULL_RECOVERY[..]), ("table2.csv", 3, &PARTIAL_RECOVERY[..])] {
        let tables = enumerate_example(m_prime)?;
        report::write_reference_table(create(out, file)?, rows, &tables)?;
        let mismatches = compare(rows, &tables);
        writeln!(diff, "{file} (M'={m_prime}): {} mismatches", mismatches.len())?;
        for m in &mismatches {
            writeln!(diff, "  {m}")?;
        }
        for r in rows.iter().filter(|r| r.label_mismatch()) {
            writeln!(
                diff,
                "  note: {} printed as N2={},N1={},N0={}; compared against N2={},N1={},N0={}",
                r.label, r.printed[0], r.printed[1], r.printed[2], r.actual[0], r.actual[1], r.actual[2]
            )?;
        }
        total += mismatches.len();
    }
    diff.flush()?;
    println!("tables: {total} mismatches");
    Ok(())
}

pub fn analyze(cfg: &Config, out: &Path) -> Result<()> {
    let a = &cfg.analyze;
    let params = cfg.straggler;
    let grid: Vec<f64> = match a.t_points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| a.t_max * i as f64 / (n - 1) as f64).collect(),
    };
    let mut etimes = csv_like(create(out, "etimes.csv")?, "scheme,m_prime,expected_T")?;
    for scheme in Scheme::ALL {
        let s = build(scheme, a.blocks, a.workers, a.load, cfg.cluster.mds_points)?;
        let mut columns = Vec::new();
        let mut values = Vec::new();
        for &m in &a.thresholds {
            let table = count_recoverable_by_type(&s, scheme.delivery(), m, DEFAULT_BUDGET)?;
            report::write_type_table(create(out, &format!("counts_{}_m{m}.csv", scheme.slug()))?, &table)?;
            columns.push(format!("cdf_m{m}"));
            values.push(
                grid.iter()
                    .map(|&t| completion_cdf(&table, t, &params))
                    .collect::<gradcode::Result<Vec<_>>>()?,
            );
            let e = expected_completion_time(&table, &params)?;
            writeln!(etimes, "{},{m},{e}", scheme.slug())?;
            println!("{scheme} M'={m}: E[T] = {e:.6}");
        }
        report::write_curves(create(out, &format!("cdf_{}.csv", scheme.slug()))?, &columns, &grid, &values)?;
    }
    etimes.flush()?;
    Ok(())
}

fn csv_like<W: Write>(mut w: W, header: &str) -> Result<W> {
    writeln!(w, "{header}")?;
    Ok(w)
}

pub fn simulate(cfg: &Config, out: &Path) -> Result<()> {
    let s = &cfg.simulate;
    let base = SimConfig {
        scheme: Scheme::Cpgc,
        blocks: cfg.cluster.blocks,
        workers: cfg.cluster.workers,
        load: cfg.cluster.load,
        params: cfg.straggler,
        tolerance_rate: 0.0,
        trials: s.trials,
        master_seed: s.seed,
        mds_points: cfg.cluster.mds_points,
        threads: (s.threads > 0).then_some(s.threads),
    };
    let rows = sweep_tolerance(&base, &s.schemes, &s.tolerance_grid)?;
    report::write_sweep(create(out, "sweep.csv")?, &rows)?;
    for metric in Metric::ALL {
        report::write_metric_long(create(out, &format!("metric_{}.csv", metric.name()))?, &rows, metric)?;
    }
    if s.trace {
        for r in &rows {
            let name = format!("trace_{}_tol{}.csv", r.scheme.slug(), r.tolerance);
            report::write_trace(create(out, &name)?, &r.outcomes)?;
        }
    }
    for r in &rows {
        let a = &r.aggregate;
        println!(
            "{:<7} tol={:<5} M'={:<3} T={:.4}±{:.4} load={:.2} volume={:.4}",
            r.scheme.label(),
            r.tolerance,
            r.threshold,
            a.time.mean,
            a.time.ci,
            a.load.mean,
            a.volume.mean
        );
    }
    Ok(())
}

pub fn gd(cfg: &Config, out: &Path) -> Result<()> {
    let g = &cfg.gd;
    let problem = RegressionProblem::synthetic(g.samples, g.features, cfg.cluster.blocks, g.noise, g.data_seed)?;
    let run_cfg = GdConfig {
        scheme: g.scheme,
        workers: cfg.cluster.workers,
        load: cfg.cluster.load,
        params: cfg.straggler,
        tolerance_rate: g.tolerance,
        seed: g.seed,
        mds_points: cfg.cluster.mds_points,
    };
    let eta = (g.eta > 0.0).then_some(g.eta);
    let run = run_gd(&problem, &run_cfg, g.iterations, eta)?;
    report::write_gd(create(out, "gd_trajectory.csv")?, &run)?;
    let reference = centralized_gd(&problem, g.iterations, run.learning_rate);
    report::write_losses(create(out, "gd_reference.csv")?, &reference)?;
    let worst = run.iterations.iter().map(|i| i.max_decode_error).fold(0.0, f64::max);
    println!(
        "{} tol={}: eta={:.4e}, loss {:.6e} -> {:.6e} (centralized {:.6e}), time {:.4}, max decode error {worst:.2e}",
        g.scheme,
        g.tolerance,
        run.learning_rate,
        run.losses[0],
        run.losses.last().copied().unwrap_or(f64::NAN),
        reference.last().copied().unwrap_or(f64::NAN),
        run.total_time()
    );
    Ok(())
}

pub fn dump_schedule(cfg: &Config, scheme: Scheme, out: &Path) -> Result<()> {
    let c = &cfg.cluster;
    let s = build(scheme, c.blocks, c.workers, c.load, c.mds_points)?;
    let mut json = create(out, &format!("schedule_{}.json", scheme.slug()))?;
    json.write_all(s.to_json().as_bytes())?;
    json.flush()?;
    let report = validate_schedule(&s);
    let mut text = create(out, &format!("schedule_{}.txt", scheme.slug()))?;
    write!(text, "{s}")?;
    for v in &report.violations {
        writeln!(text, "violation: {v}")?;
    }
    for w in &report.warnings {
        writeln!(text, "warning: {w}")?;
    }
    text.flush()?;
    print!("{s}");
    Ok(())
}
