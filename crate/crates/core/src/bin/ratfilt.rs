use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use ratfilt::baselines::gauss_legendre_filter;
use ratfilt::designer::{reduce_filter_wcr, DesignConfig};
use ratfilt::error::FilterError;
use ratfilt::filter::{compute_wcr, InnerInterval};
use ratfilt::harness::{generate_slices, run_sweep, subspace_iteration, SolveOptions};
use ratfilt::io::{
    fmt_f64, read_filter, read_json, read_spectrum, to_json, write_text, Csv, FilterFile, ProblemFile, WeightFile,
};
use ratfilt::weights::initial_weight_vector;

#[derive(Parser, Debug)]
#[command(name = "ratfilt", version, about = "Design and validate rational spectral filters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Inner {
    Gap,
    Full,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Design a filter by weight-function search.
    Design {
        #[arg(long)]
        gap: f64,
        #[arg(long)]
        poles: usize,
        #[arg(long, default_value_t = 5)]
        intervals: usize,
        /// Lower bound on the imaginary part of every pole.
        #[arg(long)]
        lb: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        max_outer: usize,
        #[arg(long, default_value_t = 1e-9)]
        res_tol: f64,
        #[arg(long, default_value_t = 300)]
        de_evals: usize,
        #[arg(long, default_value_t = 1000)]
        nm_evals: usize,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Also write the final weight vector.
        #[arg(long)]
        weights_out: Option<PathBuf>,
    },
    /// Print the worst-case convergence rate of a filter.
    Wcr {
        filter: PathBuf,
        #[arg(long)]
        gap: f64,
        #[arg(long, value_enum, default_value_t = Inner::Full)]
        inner: Inner,
    },
    /// Evaluate a filter at the given points.
    Eval {
        filter: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
    },
    /// Tabulate a filter on a grid.
    Curve {
        filter: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long)]
        points: usize,
        /// Logarithmic spacing (requires 0 < from < to).
        #[arg(long)]
        log: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run subspace iteration on one problem.
    Solve {
        problem: PathBuf,
        filter: PathBuf,
        #[arg(long = "C", alias = "c", default_value_t = 1.1)]
        c: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compare filters over generated search intervals of a spectrum.
    Sweep {
        spectrum: PathBuf,
        #[arg(long, default_value_t = 200)]
        slices: usize,
        /// `name=path` pairs; repeat for several filters.
        #[arg(long = "filter", required = true)]
        filters: Vec<String>,
        #[arg(long = "C", alias = "c", value_delimiter = ',', default_value = "1.02,1.1,1.5")]
        cs: Vec<f64>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
        /// Per filter and multiplier means.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Write a Gauss-Legendre filter.
    Gl {
        #[arg(long)]
        poles: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
}

/// Outcome of a command that ran to completion.
enum Done {
    Ok,
    NotConverged,
}

type CmdResult = Result<Done, String>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Ok(t) = std::env::var("RATFILT_THREADS") {
        match t.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: RATFILT_THREADS must be a positive integer, got {t:?}");
                return ExitCode::from(1);
            }
        }
    }
    let invocation: Vec<String> = std::env::args().skip(1).collect();
    match run(cli.command, &invocation.join(" ")) {
        Ok(Done::Ok) => ExitCode::SUCCESS,
        Ok(Done::NotConverged) => ExitCode::from(2),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn err(e: FilterError) -> String {
    e.to_string()
}

fn check_gap(gap: f64) -> Result<(), String> {
    if gap > 0.0 && gap < 1.0 {
        Ok(())
    } else {
        Err(format!("--gap must lie in the open interval (0, 1), got {gap}"))
    }
}

fn run(cmd: Command, invocation: &str) -> CmdResult {
    match cmd {
        Command::Design {
            gap,
            poles,
            intervals,
            lb,
            seed,
            max_outer,
            res_tol,
            de_evals,
            nm_evals,
            output,
            trace,
            weights_out,
        } => {
            check_gap(gap)?;
            if poles < 1 {
                return Err("--poles must be at least 1".into());
            }
            if intervals < 2 {
                return Err("--intervals must be at least 2".into());
            }
            if let Some(l) = lb {
                if !(l > 0.0 && l.is_finite()) {
                    return Err(format!("--lb must be positive, got {l}"));
                }
            }
            if !(res_tol >= 0.0) {
                return Err(format!("--res-tol must be non-negative, got {res_tol}"));
            }
            let cfg = DesignConfig {
                s: intervals,
                lb,
                seed,
                max_outer_iters: max_outer,
                res_tol,
                de_max_evals: de_evals,
                nm_max_evals: nm_evals,
                ..DesignConfig::new(gap, poles)
            };
            let v0 = initial_weight_vector(intervals, gap).map_err(err)?;
            let f0 = gauss_legendre_filter(poles);
            let res = reduce_filter_wcr(&v0, &f0, &cfg).map_err(err)?;
            let config = json!({
                "command": "design",
                "gap": gap,
                "poles": poles,
                "intervals": intervals,
                "lb": lb,
                "seed": seed,
                "max_outer": max_outer,
                "res_tol": res_tol,
                "de_evals": de_evals,
                "nm_evals": nm_evals,
                "weights": res.weight.values(),
                "unscaled_wcr": res.unscaled_wcr,
                "converged": res.converged,
            });
            let file = FilterFile::from_filter(&res.filter, Some(res.wcr), config);
            write_text(&output, &to_json(&file).map_err(err)?).map_err(err)?;
            if let Some(path) = trace {
                let mut csv = Csv::new(invocation, &["outer_iter", "h", "residual", "f_omega", "inner_iters"]);
                for t in &res.trace {
                    csv.row([
                        t.outer_iter.to_string(),
                        fmt_f64(t.h),
                        fmt_f64(t.residual),
                        fmt_f64(t.f_omega),
                        t.inner_iters.to_string(),
                    ]);
                }
                write_text(&path, csv.as_str()).map_err(err)?;
            }
            if let Some(path) = weights_out {
                write_text(&path, &to_json(&WeightFile::from_weight(&res.weight)).map_err(err)?).map_err(err)?;
            }
            println!(
                "wcr={} unscaled_wcr={} outer_iters={} converged={}",
                fmt_f64(res.wcr),
                fmt_f64(res.unscaled_wcr),
                res.trace.len(),
                res.converged
            );
            Ok(if res.converged { Done::Ok } else { Done::NotConverged })
        }
        Command::Wcr { filter, gap, inner } => {
            check_gap(gap)?;
            let f = read_filter(&filter).map_err(err)?;
            let inner = match inner {
                Inner::Gap => InnerInterval::Gap,
                Inner::Full => InnerInterval::FullInterval,
            };
            let rep = compute_wcr(&f, gap, inner).map_err(err)?;
            println!(
                "wcr={} num_max={} den_min={} num_argmax={} den_argmin={}",
                fmt_f64(rep.wcr),
                fmt_f64(rep.num_max),
                fmt_f64(rep.den_min),
                fmt_f64(rep.num_argmax),
                fmt_f64(rep.den_argmin)
            );
            Ok(Done::Ok)
        }
        Command::Eval { filter, x } => {
            let f = read_filter(&filter).map_err(err)?;
            for xi in x {
                println!("x={} r={}", fmt_f64(xi), fmt_f64(f.eval(xi)));
            }
            Ok(Done::Ok)
        }
        Command::Curve { filter, from, to, points, log, output } => {
            if points < 1 {
                return Err("--points must be at least 1".into());
            }
            if !(from.is_finite() && to.is_finite()) {
                return Err("--from and --to must be finite".into());
            }
            if log && !(from > 0.0 && to > from) {
                return Err("--log needs 0 < --from < --to".into());
            }
            let f = read_filter(&filter).map_err(err)?;
            let mut csv = Csv::new(invocation, &["x", "r", "abs_r"]);
            for k in 0..points {
                let t = if points == 1 { 0.0 } else { k as f64 / (points - 1) as f64 };
                let x = if log { (from.ln() + t * (to.ln() - from.ln())).exp() } else { from + t * (to - from) };
                let x = if k + 1 == points && points > 1 { to } else { x };
                let r = f.eval(x);
                csv.row([fmt_f64(x), fmt_f64(r), fmt_f64(r.abs())]);
            }
            write_text(&output, csv.as_str()).map_err(err)?;
            Ok(Done::Ok)
        }
        Command::Solve { problem, filter, c, tol, max_iters, seed, output } => {
            let p = read_json::<ProblemFile>(&problem).and_then(|p| p.to_problem()).map_err(err)?;
            let f = read_filter(&filter).map_err(err)?;
            let rep = subspace_iteration(&f, &p, SolveOptions { c, tol, max_iters, seed }).map_err(err)?;
            let mut csv = Csv::new(invocation, &["iter", "max_residual"]);
            for (k, r) in rep.residual_history.iter().enumerate() {
                csv.row([(k + 1).to_string(), fmt_f64(*r)]);
            }
            write_text(&output, csv.as_str()).map_err(err)?;
            println!(
                "iterations={} converged={} converged_count={} eigencount={} m0={} observed_rate={} predicted_rate={} flops_estimate={}",
                rep.iterations,
                rep.converged,
                rep.converged_count,
                rep.eigencount,
                rep.m0,
                fmt_f64(rep.observed_rate),
                fmt_f64(rep.predicted_rate),
                fmt_f64(rep.flops)
            );
            Ok(if rep.converged { Done::Ok } else { Done::NotConverged })
        }
        Command::Sweep { spectrum, slices, filters, cs, tol, max_iters, seed, output, summary } => {
            if slices < 1 {
                return Err("--slices must be at least 1".into());
            }
            if cs.is_empty() {
                return Err("--C needs at least one multiplier".into());
            }
            let mut named = Vec::new();
            for spec in &filters {
                let (name, path) =
                    spec.split_once('=').ok_or_else(|| format!("--filter expects name=path, got {spec:?}"))?;
                named.push((name.to_string(), read_filter(Path::new(path)).map_err(err)?));
            }
            let spec = read_spectrum(&spectrum).map_err(err)?;
            let problems = generate_slices(&spec, slices, seed).map_err(err)?;
            let rows = run_sweep(&problems, &named, &cs, tol, max_iters, seed).map_err(err)?;
            let mut csv =
                Csv::new(invocation, &["slice", "filter", "C", "eigencount", "iterations", "converged", "flops_estimate"]);
            for r in &rows {
                csv.row([
                    r.slice.to_string(),
                    r.filter.clone(),
                    r.c.to_string(),
                    r.eigencount.to_string(),
                    r.iterations.to_string(),
                    r.converged.to_string(),
                    fmt_f64(r.flops),
                ]);
            }
            write_text(&output, csv.as_str()).map_err(err)?;
            let mut sum = Csv::new(invocation, &["filter", "C", "mean_iterations", "mean_flops_estimate", "converged"]);
            for (name, _) in &named {
                for &c in &cs {
                    let sel: Vec<_> = rows.iter().filter(|r| &r.filter == name && r.c == c).collect();
                    let k = sel.len() as f64;
                    let it = sel.iter().map(|r| r.iterations as f64).sum::<f64>() / k;
                    let fl = sel.iter().map(|r| r.flops).sum::<f64>() / k;
                    let conv = sel.iter().filter(|r| r.converged).count();
                    println!("filter={name} C={c} mean_iterations={it} mean_flops_estimate={} converged={conv}/{}", fmt_f64(fl), sel.len());
                    sum.row([name.clone(), c.to_string(), it.to_string(), fmt_f64(fl), conv.to_string()]);
                }
            }
            if let Some(path) = summary {
                write_text(&path, sum.as_str()).map_err(err)?;
            }
            let all = rows.iter().all(|r| r.converged);
            Ok(if all { Done::Ok } else { Done::NotConverged })
        }
        Command::Gl { poles, output } => {
            if poles < 1 {
                return Err("--poles must be at least 1".into());
            }
            let f = gauss_legendre_filter(poles);
            let file = FilterFile::from_filter(&f, None, json!({ "command": "gl", "poles": poles }));
            write_text(&output, &to_json(&file).map_err(err)?).map_err(err)?;
            Ok(Done::Ok)
        }
    }
}
