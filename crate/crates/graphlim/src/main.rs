use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use graphlim::cutnorm;
use graphlim::densities::{self, GraphParameter};
use graphlim::error::{Error, Result};
use graphlim::graphons::{t_step, GraphonRepr, StepGraphon};
use graphlim::graphs::SimpleGraph;
use graphlim::io;
use graphlim::numeric::fmt_sig15;
use graphlim::regularity;
use graphlim::sampling;

#[derive(Parser)]
#[command(name = "graphlim", version, about = "Homomorphism densities, graphons, cut norms, weak regularity, and reflection positivity at desk scale")]
struct Cli {
    /// Cap the worker pool (default: available parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum DensityMode {
    Hom,
    Inj,
    Ind,
    T,
    T0,
    T1,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact density of a test graph in a finite (weighted) graph
    Density {
        /// test graph F (edge list)
        #[arg(long = "F")]
        f: PathBuf,
        /// target graph G (edge list or weighted JSON)
        #[arg(long = "G")]
        g: PathBuf,
        #[arg(long, value_enum)]
        mode: DensityMode,
    },
    /// Density of a test graph in a graphon (exact or Monte Carlo)
    GraphonDensity {
        /// constant:p | half-graph | stepfunction .json | grid .csv
        #[arg(long)]
        graphon: String,
        #[arg(long = "F")]
        f: PathBuf,
        /// Monte-Carlo sample count (default: exact via stepfunction form)
        #[arg(long)]
        mc: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// grid resolution for the half-graph limit's exact form
        #[arg(long, default_value_t = 256)]
        grid: usize,
    },
    /// Sample a W-random graph and write its edge list
    Sample {
        #[arg(long)]
        graphon: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// print the latent coordinates to stderr
        #[arg(long)]
        emit_latents: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sampled densities against the graphon truth for growing n (CSV)
    Converge {
        #[arg(long)]
        graphon: String,
        #[arg(long = "F")]
        f: PathBuf,
        /// comma-separated sizes, e.g. 50,100,200
        #[arg(long)]
        n_list: String,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tail frequency and variance against concentration bounds (CSV)
    Concentration {
        #[arg(long)]
        graphon: String,
        #[arg(long = "F")]
        f: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cut norm of a CSV matrix with its witness rectangle
    Cutnorm {
        #[arg(long)]
        matrix: PathBuf,
        /// force the exact enumeration (default: exact when feasible)
        #[arg(long, conflicts_with = "heuristic")]
        exact: bool,
        /// force the alternating heuristic
        #[arg(long)]
        heuristic: bool,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Weak regular partition of a graph (JSON report)
    Regularity {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        seed: u64,
        /// rebalance block sizes to within one and report the new deviation
        #[arg(long)]
        balance: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Connection matrix of a parameter: size, minimum eigenvalue, PSD verdict
    Connection {
        /// graphon:<spec> | matchings
        #[arg(long)]
        param: String,
        #[arg(long)]
        k: usize,
        /// truncated matrix over k-labeled graphs up to --max-nodes
        #[arg(long)]
        truncated: bool,
        #[arg(long)]
        max_nodes: Option<usize>,
        /// write the matrix entries as CSV to this path
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Inclusion-exclusion transform of a parameter at a graph
    Dagger {
        #[arg(long)]
        param: String,
        #[arg(long = "F")]
        f: PathBuf,
    },
    /// Consistency and expectation checks for a random graph model
    ModelCheck {
        /// build the exact table of this graphon...
        #[arg(long, conflicts_with = "param")]
        graphon: Option<String>,
        /// ...or of the model induced by this parameter (graphon:<spec> | matchings)
        #[arg(long)]
        param: Option<String>,
        #[arg(long)]
        n: usize,
        /// test graph for the expectation identity (default: single edge)
        #[arg(long = "F")]
        f: Option<PathBuf>,
    },
}

fn parse_parameter(spec: &str, grid: usize) -> Result<GraphParameter> {
    if spec == "matchings" {
        return Ok(GraphParameter::matchings());
    }
    if let Some(rest) = spec.strip_prefix("graphon:") {
        let repr = io::load_graphon_arg(rest)?;
        return Ok(repr.to_step(grid)?.density_parameter());
    }
    Err(Error::Parse(format!(
        "parameter {spec:?} must be graphon:<spec> or matchings"
    )))
}

fn load_simple(path: &Path) -> Result<SimpleGraph> {
    io::parse_graph_file(path)?.as_simple().cloned()
}

fn write_output(out: Option<&PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(Error::from),
        None => {
            print!("{content}");
            std::io::stdout().flush().map_err(Error::from)
        }
    }
}

fn graphon_step(spec: &str, grid: usize) -> Result<StepGraphon> {
    io::load_graphon_arg(spec)?.to_step(grid)
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Density { f, g, mode } => {
            let f = load_simple(&f)?;
            let g = io::parse_graph_file(&g)?.into_weighted();
            let value = match mode {
                DensityMode::Hom => densities::hom(&f, &g)?,
                DensityMode::Inj => densities::inj(&f, &g)?,
                DensityMode::Ind => densities::ind(&f, &g)?,
                DensityMode::T => densities::t(&f, &g)?,
                DensityMode::T0 => densities::t0(&f, &g)?,
                DensityMode::T1 => densities::t1(&f, &g)?,
            };
            println!("{}", fmt_sig15(value));
            Ok(())
        }
        Cmd::GraphonDensity {
            graphon,
            f,
            mc,
            seed,
            grid,
        } => {
            let f = load_simple(&f)?;
            let repr = io::load_graphon_arg(&graphon)?;
            match mc {
                Some(samples) => {
                    let (est, err) = graphlim::graphons::t_mc(&f, &repr, samples, seed)?;
                    println!("{} {}", fmt_sig15(est), fmt_sig15(err));
                }
                None => {
                    let w = repr.to_step(grid)?;
                    println!("{}", fmt_sig15(t_step(&f, &w)?));
                }
            }
            Ok(())
        }
        Cmd::Sample {
            graphon,
            n,
            seed,
            emit_latents,
            out,
        } => {
            let repr = io::load_graphon_arg(&graphon)?;
            let record = sampling::sample_wrandom(&repr, n, seed, emit_latents);
            write_output(out.as_ref(), &io::serialize_simple_graph(&record.graph))?;
            if let Some(latents) = record.latents {
                let mut err = std::io::stderr().lock();
                for (i, x) in latents.iter().enumerate() {
                    writeln!(err, "latent {} {}", i + 1, fmt_sig15(*x))?;
                }
            }
            Ok(())
        }
        Cmd::Converge {
            graphon,
            f,
            n_list,
            trials,
            seed,
            out,
        } => {
            let f = load_simple(&f)?;
            let w = graphon_step(&graphon, 256)?;
            let reference = t_step(&f, &w)?;
            let sizes: Vec<usize> = n_list
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad size {tok:?}")))
                })
                .collect::<Result<_>>()?;
            let mut csv = String::from("n,trial,t0,t,deviation\n");
            for &n in &sizes {
                for trial in 0..trials {
                    let stream_seed = (n as u64) << 32 | trial as u64;
                    let mut rng = graphlim::rng::stream(seed, stream_seed);
                    use rand::Rng;
                    let sample_seed = rng.gen::<u64>();
                    let rec = sampling::sample_wrandom(&w, n, sample_seed, false);
                    let gw = rec.graph.to_weighted();
                    let t0 = densities::t0(&f, &gw)?;
                    let tv = densities::t(&f, &gw)?;
                    csv.push_str(&format!(
                        "{n},{trial},{},{},{}\n",
                        fmt_sig15(t0),
                        fmt_sig15(tv),
                        fmt_sig15((tv - reference).abs())
                    ));
                }
            }
            write_output(out.as_ref(), &csv)
        }
        Cmd::Concentration {
            graphon,
            f,
            n,
            eps,
            trials,
            seed,
            out,
        } => {
            let f = load_simple(&f)?;
            let w = graphon_step(&graphon, 256)?;
            let report = sampling::concentration_experiment(&w, &f, n, trials, eps, seed)?;
            let csv = format!(
                "empirical_tail,azuma_bound,variance,var_bound\n{},{},{},{}\n",
                fmt_sig15(report.empirical_tail),
                fmt_sig15(report.azuma_bound),
                fmt_sig15(report.variance),
                fmt_sig15(report.var_bound)
            );
            write_output(out.as_ref(), &csv)
        }
        Cmd::Cutnorm {
            matrix,
            exact,
            heuristic,
            restarts,
            seed,
        } => {
            let text = std::fs::read_to_string(&matrix)
                .map_err(|e| Error::Parse(format!("{}: {e}", matrix.display())))?;
            let m = io::parse_csv_matrix(&text)?;
            let witness = if heuristic {
                cutnorm::cutnorm_heuristic(&m, restarts, seed)
            } else if exact {
                cutnorm::cutnorm_exact(&m)?
            } else {
                cutnorm::cutnorm_auto(&m, restarts, seed)
            };
            println!("value {}", fmt_sig15(witness.value));
            let fmt_set = |s: &[usize]| {
                s.iter()
                    .map(|i| (i + 1).to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            println!("rows {}", fmt_set(&witness.rows));
            println!("cols {}", fmt_set(&witness.cols));
            Ok(())
        }
        Cmd::Regularity {
            graph,
            eps,
            seed,
            balance,
            out,
        } => {
            let g = load_simple(&graph)?;
            let outcome = regularity::weak_regular_partition(&g, eps, seed, None)?;
            let (partition, density, deviation) = if balance {
                let balanced = outcome.partition.balanced();
                let q = regularity::density_matrix(&g, &balanced)?;
                let kpq = regularity::build_kpq(&balanced, &q)?;
                let d = cutnorm::rect_distance(&g.to_weighted(), &kpq)?;
                (balanced, q, d * (g.n() * g.n()) as f64)
            } else {
                (
                    outcome.partition.clone(),
                    outcome.density.clone(),
                    outcome.certificate.best_deviation,
                )
            };
            let blocks_json: Vec<Vec<usize>> = partition
                .blocks()
                .iter()
                .map(|b| b.iter().map(|v| v + 1).collect())
                .collect();
            let q_json: Vec<Vec<f64>> = (0..density.rows())
                .map(|i| density.row(i).to_vec())
                .collect();
            let report = serde_json::json!({
                "blocks": blocks_json,
                "q": q_json,
                "certified": outcome.certificate.certified,
                "best_deviation": deviation,
                "threshold": outcome.certificate.threshold,
                "rounds": outcome.certificate.rounds,
                "balanced": balance,
            });
            write_output(out.as_ref(), &format!("{report}\n"))
        }
        Cmd::Connection {
            param,
            k,
            truncated,
            max_nodes,
            dump,
        } => {
            let parameter = parse_parameter(&param, 256)?;
            let matrix = if truncated {
                let max_nodes = max_nodes.unwrap_or(k + 2);
                graphlim::connection::truncated_m(&parameter, k, max_nodes)?
            } else {
                graphlim::connection::m0_matrix(&parameter, k)?
            };
            let (psd, min_eig) = graphlim::connection::psd_check(&matrix, 1e-8);
            println!("index size: {}", matrix.dim());
            println!("min eigenvalue: {}", fmt_sig15(min_eig));
            println!("PSD: {psd}");
            if let Some(path) = dump {
                std::fs::write(&path, io::matrix_to_csv(&matrix.entries))?;
            }
            Ok(())
        }
        Cmd::Dagger { param, f } => {
            let parameter = parse_parameter(&param, 256)?;
            let f = load_simple(&f)?;
            println!("{}", fmt_sig15(parameter.dagger(&f)?));
            Ok(())
        }
        Cmd::ModelCheck { graphon, param, n, f } => {
            if n < 2 {
                return Err(Error::Precondition("model checks need n >= 2".into()));
            }
            let test_graph = match f {
                Some(path) => load_simple(&path)?,
                None => SimpleGraph::complete(2),
            };
            let (label, model, model_minus, reference): (_, _, _, Option<(f64, f64)>) =
                match (&graphon, &param) {
                    (Some(spec), None) => {
                        let w = graphon_step(spec, 64)?;
                        let identity =
                            sampling::check_expectation_identity(&w, &test_graph, n)?;
                        (
                            "graphon",
                            sampling::exact_distribution(&w, n)?,
                            sampling::exact_distribution(&w, n - 1)?,
                            Some(identity),
                        )
                    }
                    (None, Some(spec)) => {
                        let parameter = parse_parameter(spec, 64)?;
                        (
                            "parameter",
                            sampling::model_from_parameter(&parameter, n, 1e-9)?,
                            sampling::model_from_parameter(&parameter, n - 1, 1e-9)?,
                            None,
                        )
                    }
                    _ => {
                        return Err(Error::Parse(
                            "model-check needs exactly one of --graphon or --param".into(),
                        ))
                    }
                };
            let report = sampling::check_model_consistency(&model, &model_minus)?;
            println!("model source: {label}");
            println!("relabel deviation: {}", fmt_sig15(report.relabel_dev));
            println!("deletion deviation: {}", fmt_sig15(report.deletion_dev));
            println!(
                "independence deviation: {}",
                fmt_sig15(report.independence_dev)
            );
            if let Some((lhs, rhs)) = reference {
                println!(
                    "expectation identity: {} vs {}",
                    fmt_sig15(lhs),
                    fmt_sig15(rhs)
                );
            }
            let ok = report.passes(1e-10);
            println!("ok: {ok}");
            if !ok {
                return Err(Error::Invariant(format!(
                    "model consistency deviation {}",
                    report.max_deviation()
                )));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
