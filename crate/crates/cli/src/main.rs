//! CSV-first command line for exact planar Ising correlation computations,
//! identity verification, double-current sampling and scaling studies.
//! Machine-readable output goes to stdout (or --out), human summaries to
//! stderr. Exit codes: 0 success, 1 identity/property failure, 2 input
//! error, 3 capacity.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use planar_ising::currents::{sample_double_current, Components, EventPredicate, SampleMode};
use planar_ising::graph::{Color, PlanarGraph};
use planar_ising::ising::CorrelationTable;
use planar_ising::linalg::{build_k, build_m, build_n};
use planar_ising::rational::format_rat;
use planar_ising::scaling::{convergence_study, Rect};
use planar_ising::verify::{run_suite, Suite};
use planar_ising::{Error, Result};

#[derive(Parser)]
#[command(
    name = "planar-ising",
    version,
    about = "Exact planar Ising boundary correlations, random currents and alternating flows"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an identity suite on a graph; every check row is printed as CSV.
    Verify {
        #[arg(long)]
        graph: PathBuf,
        /// One of: all, det, pf, flow, dcurr, tnn.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Largest terminal-set order swept by the det suite.
        #[arg(long = "k-max", default_value_t = 2)]
        k_max: usize,
        /// Boundary coloring override, e.g. "o,b,o".
        #[arg(long)]
        coloring: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact quantities printed as rationals p/q.
    Compute {
        #[command(subcommand)]
        what: ComputeCmd,
    },
    /// Seeded samples from the induced double random current measure.
    Sample {
        #[arg(long)]
        graph: PathBuf,
        /// Source vertices, e.g. "0,1,2,3". Must have even cardinality.
        #[arg(long = "A")]
        a: String,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        /// Use the Metropolis chain instead of exact categorical sampling.
        #[arg(long)]
        mcmc: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Critical-lattice convergence study on a rectangle.
    Scaling {
        /// Rectangle "w,h"; the unit square by default.
        #[arg(long)]
        rect: Option<String>,
        /// Marked points a_1..a_k as "x,y;x,y;...".
        #[arg(long = "A")]
        a: String,
        /// Marked points b_1..b_k (pairing order: a_1..a_k,b_k..b_1 ccw).
        #[arg(long = "B")]
        b: String,
        /// Mesh ladder, e.g. "1/8,1/12,1/16,1/20".
        #[arg(long)]
        eps: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ComputeCmd {
    /// Two-point function between boundary vertices a and b.
    Corr {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long = "A")]
        a: usize,
        #[arg(long = "B")]
        b: usize,
        #[arg(long)]
        coloring: Option<String>,
    },
    /// Dump an N, M or K correlation matrix as CSV of rationals.
    Matrix {
        /// One of: N, M, K.
        kind: String,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long = "A")]
        a: String,
        /// Required for N and M; ignored for K.
        #[arg(long = "B")]
        b: Option<String>,
        #[arg(long)]
        coloring: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probability of parallel disjoint connections between contiguous A, B.
    ProbParallel {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long = "A")]
        a: String,
        #[arg(long = "B")]
        b: String,
        #[arg(long)]
        coloring: Option<String>,
    },
}

fn parse_vertex_list(s: &str) -> Result<Vec<usize>> {
    if s.trim().is_empty() {
        return Ok(vec![]);
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad vertex id '{t}'")))
        })
        .collect()
}

fn parse_point_list(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(';')
        .map(|pair| {
            let (x, y) = pair
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad point '{pair}', expected x,y")))?;
            let parse = |t: &str| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad coordinate '{t}'")))
            };
            Ok((parse(x)?, parse(y)?))
        })
        .collect()
}

fn parse_fraction(s: &str) -> Result<f64> {
    let t = s.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: f64 = p
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad mesh '{t}'")))?;
        let q: f64 = q
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad mesh '{t}'")))?;
        if q == 0.0 {
            return Err(Error::Parse(format!("bad mesh '{t}'")));
        }
        Ok(p / q)
    } else {
        t.parse()
            .map_err(|_| Error::Parse(format!("bad mesh '{t}'")))
    }
}

fn load_graph(path: &PathBuf, coloring: &Option<String>) -> Result<PlanarGraph> {
    let text = std::fs::read_to_string(path)?;
    let g = PlanarGraph::parse(&text)?;
    match coloring {
        None => Ok(g),
        Some(spec) => {
            let colors: Vec<Color> = spec
                .split(',')
                .map(|t| Color::from_code(t.trim()))
                .collect::<Result<_>>()?;
            g.with_coloring(&colors)
        }
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Verify {
            graph,
            suite,
            k_max,
            coloring,
            out,
        } => {
            let g = load_graph(&graph, &coloring)?;
            let suite = Suite::parse(&suite)
                .ok_or_else(|| Error::Parse(format!("unknown suite '{suite}'")))?;
            let checks = run_suite(&g, suite, k_max)?;
            let mut csv = String::from("suite,identity,params,lhs,rhs,status\n");
            for c in &checks {
                csv.push_str(&c.to_csv_row());
                csv.push('\n');
            }
            emit(&out, &csv)?;
            let failures = checks.iter().filter(|c| !c.ok).count();
            eprintln!("verify: {} checks, {} failures", checks.len(), failures);
            if failures > 0 {
                for c in checks.iter().filter(|c| !c.ok).take(10) {
                    eprintln!("  counterexample: {}", c.to_csv_row());
                }
            }
            Ok(failures == 0)
        }
        Cmd::Compute { what } => {
            match what {
                ComputeCmd::Corr {
                    graph,
                    a,
                    b,
                    coloring,
                } => {
                    let g = load_graph(&graph, &coloring)?;
                    let c = planar_ising::ising::correlation(&g, a, b)?;
                    println!("{}", format_rat(&c));
                }
                ComputeCmd::Matrix {
                    kind,
                    graph,
                    a,
                    b,
                    coloring,
                    out,
                } => {
                    let g = load_graph(&graph, &coloring)?;
                    let table = CorrelationTable::new(&g)?;
                    let a = parse_vertex_list(&a)?;
                    let m = match kind.as_str() {
                        "N" | "n" => {
                            let b = parse_vertex_list(
                                b.as_deref()
                                    .ok_or_else(|| Error::Parse("N needs --B".into()))?,
                            )?;
                            build_n(&table, &a, &b)?
                        }
                        "M" | "m" => {
                            let b = parse_vertex_list(
                                b.as_deref()
                                    .ok_or_else(|| Error::Parse("M needs --B".into()))?,
                            )?;
                            build_m(&table, &a, &b)?
                        }
                        "K" | "k" => build_k(&table, &a)?,
                        other => {
                            return Err(Error::Parse(format!(
                                "unknown matrix kind '{other}', expected N, M or K"
                            )))
                        }
                    };
                    emit(&out, &m.to_csv())?;
                }
                ComputeCmd::ProbParallel {
                    graph,
                    a,
                    b,
                    coloring,
                } => {
                    let g = load_graph(&graph, &coloring)?;
                    let a = parse_vertex_list(&a)?;
                    let b = parse_vertex_list(&b)?;
                    let p = planar_ising::currents::prob_parallel(&g, &a, &b)?;
                    println!("{}", format_rat(&p));
                }
            }
            Ok(true)
        }
        Cmd::Sample {
            graph,
            a,
            samples,
            seed,
            mcmc,
            out,
        } => {
            let g = load_graph(&graph, &None)?;
            let sources = parse_vertex_list(&a)?;
            let mode = if mcmc {
                SampleMode::Mcmc
            } else {
                SampleMode::Exact
            };
            let draws = sample_double_current(&g, &sources, samples, seed, mode)?;
            // Registered events: the two pairings and the all-connected
            // event for four sources, a single connection event for two.
            let events: Vec<(String, EventPredicate)> = match sources.len() {
                2 => vec![(
                    format!("conn_{}_{}", sources[0], sources[1]),
                    EventPredicate::Connected(sources[0], sources[1]),
                )],
                4 => {
                    let s = &sources;
                    vec![
                        (
                            format!("pair_{}{}_{}{}", s[0], s[1], s[3], s[2]),
                            EventPredicate::Parallel {
                                a: vec![s[0], s[1]],
                                b: vec![s[3], s[2]],
                            },
                        ),
                        (
                            format!("pair_{}{}_{}{}", s[3], s[0], s[2], s[1]),
                            EventPredicate::Parallel {
                                a: vec![s[3], s[0]],
                                b: vec![s[2], s[1]],
                            },
                        ),
                        (
                            "all_connected".to_string(),
                            EventPredicate::AllConnected(s.clone()),
                        ),
                    ]
                }
                _ => vec![],
            };
            let mut csv = String::from("sample_index,omega1,omega2");
            for (name, _) in &events {
                let _ = write!(csv, ",{name}");
            }
            csv.push('\n');
            for (i, w) in draws.iter().enumerate() {
                let comps = Components::of(&g, w.support());
                let _ = write!(csv, "{i},{},{}", w.omega1, w.omega2);
                for (_, ev) in &events {
                    let _ = write!(csv, ",{}", ev.eval(&comps) as u8);
                }
                csv.push('\n');
            }
            emit(&out, &csv)?;
            eprintln!("sample: {} draws, seed {}", draws.len(), seed);
            Ok(true)
        }
        Cmd::Scaling {
            rect,
            a,
            b,
            eps,
            out,
        } => {
            let rect = match rect {
                None => Rect::unit_square(),
                Some(spec) => {
                    let (w, h) = spec
                        .split_once(',')
                        .ok_or_else(|| Error::Parse("rect must be w,h".into()))?;
                    Rect {
                        w: parse_fraction(w)?,
                        h: parse_fraction(h)?,
                    }
                }
            };
            let a = parse_point_list(&a)?;
            let b = parse_point_list(&b)?;
            let eps: Vec<f64> = eps.split(',').map(parse_fraction).collect::<Result<_>>()?;
            let study = convergence_study(rect, &a, &b, &eps)?;
            let mut csv = String::from("eps,lattice_p,continuum_p,gap\n");
            for row in &study.rows {
                let _ = writeln!(
                    csv,
                    "{},{:.12},{:.12},{:.12}",
                    row.eps, row.lattice_p, row.continuum_p, row.gap
                );
            }
            emit(&out, &csv)?;
            eprintln!(
                "scaling: {} meshes, gap non-increasing: {}",
                study.rows.len(),
                study.gap_non_increasing
            );
            Ok(study.gap_non_increasing)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
