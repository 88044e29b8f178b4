use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use dnsprior::admm::{admm_solve, beta_search, AdmmConfig, BetaSearch, Method};
use dnsprior::eval::{degree_histogram, evaluate_predictions, ranked_edges, regression_slope};
use dnsprior::io;
use dnsprior::model::{edges_from_matrix, DEFAULT_EDGE_THRESHOLD};
use dnsprior::partition::solve_ordered;
use dnsprior::synth::{GeneratorSpec, Rng};
use dnsprior::Error;

#[derive(Parser)]
#[command(
    name = "dnsprior",
    version,
    about = "Scale-free Gaussian graphical model estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Dns,
    L1,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a scale-free graph, its precision matrix and Gaussian data.
    Generate {
        #[arg(long, default_value_t = 100)]
        nodes: usize,
        #[arg(long, default_value_t = 2)]
        attach: usize,
        #[arg(long, default_value_t = 250)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.3)]
        edge_weight: f64,
        #[arg(long, default_value_t = 0.2)]
        diag_pad: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate a sparse precision matrix from samples.
    Infer {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Dns)]
        method: MethodArg,
        #[arg(long, default_value_t = 2.5)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, conflicts_with = "target_edges")]
        beta: Option<f64>,
        /// Tune the regularization until the estimate has this many edges.
        #[arg(long)]
        target_edges: Option<usize>,
        /// Allowed distance from the target edge count.
        #[arg(long, default_value_t = 3)]
        edge_tol: usize,
        /// Expected edge count behind the degree schedule when `--beta` is
        /// given; defaults to the number of variables.
        #[arg(long, requires = "beta")]
        schedule_edges: Option<usize>,
        #[arg(long, default_value_t = 2.0)]
        degree_scale: f64,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        #[arg(long)]
        out: PathBuf,
        /// Write per-iteration residuals and ranking rounds next to the output.
        #[arg(long)]
        trace: bool,
        /// Write the degree schedule (index,H,h,tau,g) to this file.
        #[arg(long)]
        dump_schedule: Option<PathBuf>,
    },
    /// Count correct edges among the strongest predicted entries.
    Evaluate {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EDGE_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = 1)]
        sweep_step: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Log-log degree histogram of a thresholded network.
    DegreeDist {
        #[arg(long)]
        network: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EDGE_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
    #[command(hide = true)]
    ProxBench {
        #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Numerical(String),
    NotConverged(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotPositiveDefinite | Error::NonFinite { .. } | Error::Bracket { .. } => {
                Failure::Numerical(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate {
            nodes,
            attach,
            samples,
            seed,
            edge_weight,
            diag_pad,
            out,
        } => {
            let spec = GeneratorSpec {
                p: nodes,
                attach,
                edge_weight,
                diag_pad,
                n_samples: samples,
                seed,
            };
            let inst = spec.generate()?;
            fs::create_dir_all(&out)?;
            let header: Vec<String> = (0..nodes).map(|i| format!("x{i}")).collect();
            io::write_edges(create(&out.join("edges.csv"))?, &inst.edges)?;
            io::write_table(
                create(&out.join("precision.csv"))?,
                inst.precision.as_matrix(),
                None,
            )?;
            io::write_table(
                create(&out.join("data.csv"))?,
                inst.data.values(),
                Some(&header),
            )?;
            println!(
                "{} nodes, {} edges, {samples} samples",
                nodes,
                inst.edges.len()
            );
        }
        Command::Infer {
            data,
            method,
            gamma,
            alpha,
            beta,
            target_edges,
            edge_tol,
            schedule_edges,
            degree_scale,
            rho,
            max_iter,
            out,
            trace,
            dump_schedule,
        } => {
            let dataset = io::read_dataset(open(&data)?)?;
            let s = dataset.empirical_covariance();
            let config = AdmmConfig {
                rho,
                beta: beta.unwrap_or(0.1),
                gamma,
                alpha,
                target_edges: schedule_edges.or(target_edges),
                degree_scale,
                max_outer: max_iter,
                method: match method {
                    MethodArg::Dns => Method::Dns,
                    MethodArg::L1 => Method::L1,
                },
                trace,
                ..Default::default()
            };
            config.validate()?;
            if let Some(path) = &dump_schedule {
                io::write_schedule(create(path)?, &config.schedule(s.order())?)?;
            }
            let (beta, result) = match (beta, target_edges) {
                (_, Some(k)) => beta_search(&s, &config, k, edge_tol, &BetaSearch::default())?,
                (Some(b), None) => (b, admm_solve(&s, &config)?),
                (None, None) => {
                    return Err(Failure::Usage(
                        "one of --beta or --target-edges is required".into(),
                    ))
                }
            };
            io::write_table(create(&out)?, result.y.as_matrix(), None)?;
            if trace {
                io::write_trace(create(&out.with_extension("trace.csv"))?, &result.trace)?;
            }
            println!(
                "beta {beta:.6e}, {} edges, {} iterations, residuals {:.3e} / {:.3e}",
                result.edge_count(),
                result.iterations,
                result.primal_residual,
                result.dual_residual
            );
            if !result.converged {
                return Err(Failure::NotConverged(format!(
                    "stopped after {} iterations without meeting the tolerances",
                    result.iterations
                )));
            }
        }
        Command::Evaluate {
            pred,
            truth,
            threshold,
            sweep_step,
            out,
        } => {
            if sweep_step == 0 {
                return Err(Failure::Usage("--sweep-step must be positive".into()));
            }
            let x = io::read_symmetric(open(&pred)?)?;
            let truth = io::read_edges(open(&truth)?, x.order())?;
            let ranked = ranked_edges(&x, threshold);
            let mut ks: Vec<usize> = (1..=ranked.len() / sweep_step)
                .map(|i| i * sweep_step)
                .collect();
            if ks.last() != Some(&ranked.len()) {
                ks.push(ranked.len());
            }
            let curve = evaluate_predictions(&ranked, &truth, &ks)?;
            let mut w = create(&out)?;
            writeln!(w, "k,correct")?;
            for (k, c) in &curve {
                writeln!(w, "{k},{c}")?;
            }
            let (k, c) = curve.last().copied().unwrap_or((0, 0));
            println!(
                "{c} of {k} predicted edges correct ({} true edges)",
                truth.len()
            );
        }
        Command::DegreeDist {
            network,
            threshold,
            out,
        } => {
            let x = io::read_symmetric(open(&network)?)?;
            let edges = edges_from_matrix(&x, threshold)?;
            let hist = degree_histogram(&edges);
            let mut w = create(&out)?;
            writeln!(w, "ln_degree,ln_count")?;
            for (d, c) in &hist.pairs {
                writeln!(w, "{d:.16e},{c:.16e}")?;
            }
            let slope = regression_slope(&hist.pairs).map_or("n/a".into(), |s| format!("{s:.4}"));
            println!(
                "{} edges, {} isolated nodes, slope {slope}",
                edges.len(),
                hist.zero_degree
            );
        }
        Command::ProxBench {
            sizes,
            reps,
            seed,
            out,
        } => {
            let mut rng = Rng::new(seed);
            let mut w = create(&out)?;
            writeln!(w, "m,median_seconds,min_seconds")?;
            for m in sizes {
                let mut b: Vec<f64> = (0..m).map(|_| 3.0 * rng.normal().abs()).collect();
                b.sort_by(|x, y| y.total_cmp(x));
                let mut g: Vec<f64> = (0..m).map(|_| 2.0 * rng.uniform()).collect();
                g.sort_by(f64::total_cmp);
                let mut times: Vec<f64> = (0..reps.max(1))
                    .map(|_| {
                        let t = Instant::now();
                        let y = solve_ordered(&b, &g);
                        let dt = t.elapsed().as_secs_f64();
                        y.map(|_| dt)
                    })
                    .collect::<Result<_, _>>()?;
                times.sort_by(f64::total_cmp);
                writeln!(w, "{m},{:.6e},{:.6e}", times[times.len() / 2], times[0])?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::NotConverged(msg)) => {
            eprintln!("warning: {msg}; results written");
            ExitCode::from(3)
        }
    }
}
