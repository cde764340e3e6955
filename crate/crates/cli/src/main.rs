use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use biparsdp::certify::DEFAULT_MU_TOL;
use biparsdp::graph::{
    bipartition, build_graph, connected_components, cycle_basis, cycle_edges, edge_signs, is_forest,
};
use biparsdp::io::{instance_to_json_value, load_instance};
use biparsdp::relaxation::{solve_relaxation, DEFAULT_RANK_TOL};
use biparsdp::sdp::DEFAULT_TOL;
use biparsdp::transform::{
    build_connecting_perturbation, build_full_graph_perturbation, sign_split_transform, DEFAULT_DELTA,
};
use biparsdp::{certify, CertifyOptions, QcqpInstance};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "biparsdp",
    version,
    about = "Certify exactness of SDP relaxations of QCQPs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the certification pipeline and print the report.
    Certify {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        tols: Tolerances,
        #[arg(long, default_value_t = biparsdp::certify::DEFAULT_Y_CAP)]
        y_cap: f64,
        #[arg(long, default_value_t = DEFAULT_MU_TOL)]
        mu_tol: f64,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        /// Worker threads for per-edge solves.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Solve the SDP relaxation.
    Solve {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        tols: Tolerances,
    },
    /// Describe the aggregated sparsity graph.
    Graph {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 0.0)]
        zero_tol: f64,
    },
    /// Write a transformed or perturbed instance.
    Transform {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value_t = Mode::SignSplit)]
        mode: Mode,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = 1e-2)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.0)]
        zero_tol: f64,
        /// Mapping sidecar path (defaults to `<output>.mapping.json`).
        #[arg(long)]
        mapping: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Io {
    /// Instance file (JSON).
    input: PathBuf,
    /// Write JSON here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Suppress the summary line on standard error.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Args)]
struct Tolerances {
    #[arg(long, env = "BIPARSDP_TOL", default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    rank_tol: f64,
    #[arg(long, default_value_t = 0.0)]
    zero_tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    SignSplit,
    Connect,
    FullLaplacian,
}

fn load(path: &Path) -> Result<QcqpInstance> {
    Ok(load_instance(path)?)
}

fn emit(io: &Io, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match &io.output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn summary(io: &Io, line: String) {
    if !io.quiet {
        eprintln!("{line}");
    }
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn rows(m: &biparsdp::SymMatrix) -> Value {
    json!(m.to_rows())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Certify {
            io,
            tols,
            y_cap,
            mu_tol,
            delta,
            parallel,
        } => {
            let inst = load(&io.input)?;
            let opts = CertifyOptions {
                solver_tol: tols.tol,
                mu_tol,
                y_cap,
                rank_tol: tols.rank_tol,
                zero_tol: tols.zero_tol,
                delta,
                parallel,
            };
            opts.validate()?;
            let report = certify(&inst, &opts);
            emit(&io, &serde_json::to_value(&report)?)?;
            let rule = report
                .applied_rule
                .map(|r| r.to_string())
                .unwrap_or_else(|| "none".into());
            summary(
                &io,
                format!("{}: {} (rule: {rule})", io.input.display(), report.verdict),
            );
            Ok(report.verdict.exit_code() as u8)
        }
        Command::Solve { io, tols } => {
            let inst = load(&io.input)?;
            let r = solve_relaxation(&inst, tols.tol, tols.rank_tol)?;
            let out = json!({
                "status": r.status,
                "primal_value": r.primal_value,
                "dual_value": r.dual_value,
                "rank": r.numeric_rank,
                "x": r.x,
                "X": rows(&r.x_star),
                "y": r.y_star,
                "gap": r.gap,
                "complementarity": r.complementarity,
            });
            emit(&io, &out)?;
            summary(
                &io,
                format!(
                    "{}: value {:.6}, rank {}",
                    io.input.display(),
                    r.primal_value,
                    r.numeric_rank
                ),
            );
            Ok(0)
        }
        Command::Graph { io, zero_tol } => {
            if !(zero_tol.is_finite() && zero_tol >= 0.0) {
                bail!("zero_tol must be nonnegative");
            }
            let inst = load(&io.input)?;
            let g = build_graph(&inst, zero_tol);
            let signs = edge_signs(&inst, &g, zero_tol);
            let b = bipartition(&g);
            let edges: Vec<Value> = signs
                .iter()
                .map(|((i, j), s)| json!({ "edge": [i + 1, j + 1], "sign": s.value() }))
                .collect();
            let cycles: Vec<Value> = cycle_basis(&g)
                .cycles
                .iter()
                .map(|c| {
                    let prod: i32 = cycle_edges(c)
                        .iter()
                        .map(|&(i, j)| signs.get(i, j).map_or(0, |s| s.value()))
                        .product();
                    json!({ "cycle": one_based(c), "length": c.len(), "sign_product": prod })
                })
                .collect();
            let comps: Vec<Vec<usize>> = connected_components(&g).iter().map(|c| one_based(c)).collect();
            let out = json!({
                "n": g.n(),
                "edges": edges,
                "components": comps,
                "forest": is_forest(&g),
                "bipartite": b.bipartite,
                "parts": b.bipartite.then(|| [one_based(&b.parts.0), one_based(&b.parts.1)]),
                "odd_cycle": one_based(&b.witness),
                "cycle_basis": cycles,
            });
            emit(&io, &out)?;
            summary(
                &io,
                format!(
                    "{}: {} vertices, {} edges, bipartite: {}",
                    io.input.display(),
                    g.n(),
                    g.edge_count(),
                    b.bipartite
                ),
            );
            Ok(0)
        }
        Command::Transform {
            io,
            mode,
            delta,
            epsilon,
            zero_tol,
            mapping,
        } => {
            let inst = load(&io.input)?;
            let (instance, sidecar) = match mode {
                Mode::SignSplit => {
                    let t = sign_split_transform(&inst, delta, zero_tol)?;
                    (
                        t.transformed,
                        json!({ "mode": "sign-split", "delta": t.delta, "mapping": t.mapping }),
                    )
                }
                Mode::Connect | Mode::FullLaplacian => {
                    let p = match mode {
                        Mode::Connect => build_connecting_perturbation(&inst, epsilon, zero_tol)?,
                        _ => build_full_graph_perturbation(&inst, epsilon, zero_tol)?,
                    };
                    let f: Vec<[usize; 2]> = p.f.iter().map(|&(i, j)| [i + 1, j + 1]).collect();
                    let name = if matches!(mode, Mode::Connect) {
                        "connect"
                    } else {
                        "full-laplacian"
                    };
                    (
                        p.instance,
                        json!({ "mode": name, "epsilon": p.epsilon, "P": rows(&p.p), "F": f }),
                    )
                }
            };
            emit(&io, &instance_to_json_value(&instance))?;
            let side_path = mapping.or_else(|| {
                io.output.as_ref().map(|o| {
                    let mut s = o.clone().into_os_string();
                    s.push(".mapping.json");
                    PathBuf::from(s)
                })
            });
            match side_path {
                Some(p) => fs::write(&p, serde_json::to_string_pretty(&sidecar)? + "\n")
                    .with_context(|| format!("writing {}", p.display()))?,
                None => summary(
                    &io,
                    "mapping sidecar not written (pass --mapping or --output)".into(),
                ),
            }
            summary(
                &io,
                format!(
                    "{}: wrote {} variables, {} constraints",
                    io.input.display(),
                    instance.n(),
                    instance.m()
                ),
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
