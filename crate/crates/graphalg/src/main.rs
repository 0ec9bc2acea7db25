use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use graphalg::driver::{self, bind_graph_args, check_source, AlgoArgs, DriverError, Options};
use graphalg::graph_io::{load_graph, write_result, Mode};
use graphalg::preprocess::Preprocess;
use graphalg::{gen, oracle, stdlib};
use graphalg_core::core_ir::{dump_core, lower};
use graphalg_core::optimizer::{OptLevel, DEFAULT_DENSE_LIMIT};
use graphalg_core::plan::pretty_plan;

#[derive(Parser)]
#[command(name = "graphalg", version, about = "Compile and run GraphAlg programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Bool,
    Trop,
    Real,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Bool => Mode::Bool,
            ModeArg::Trop => Mode::Trop,
            ModeArg::Real => Mode::Real,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a function of a program on a graph.
    Run(RunArgs),
    /// Parse and type-check a program.
    Check { program: PathBuf },
    /// Compare a stdlib program with its reference on a random graph.
    Oracle {
        /// One of reach, bfs, sssp, pr, wcc.
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    program: PathBuf,
    #[arg(long = "func")]
    func: String,
    #[arg(long)]
    vertices: PathBuf,
    #[arg(long)]
    edges: PathBuf,
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// External id of the source vertex.
    #[arg(long)]
    source: Option<u64>,
    #[arg(long)]
    drop_self_loops: bool,
    #[arg(long)]
    dedup_edges: bool,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(0..=2))]
    opt_level: u8,
    #[arg(long, default_value_t = DEFAULT_DENSE_LIMIT)]
    dense_limit: u64,
    #[arg(long, default_value_t = stdlib::DEFAULT_ITERS)]
    iters: i64,
    #[arg(long, default_value_t = stdlib::DEFAULT_DAMPING)]
    damping: f64,
    /// Write the result here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Print the Core IR and stop.
    #[arg(long)]
    dump_core: bool,
    /// Print the optimized plan and stop.
    #[arg(long)]
    dump_plan: bool,
    /// Print execution statistics to stderr.
    #[arg(long)]
    stats: bool,
}

fn read(path: &PathBuf) -> Result<String, DriverError> {
    std::fs::read_to_string(path).map_err(|e| DriverError::Usage(format!("{}: {e}", path.display())))
}

fn run(a: RunArgs) -> Result<(), DriverError> {
    let tp = check_source(&read(&a.program)?)?;
    let f = driver::lower_named(&tp, &a.func)?;
    if a.dump_core {
        print!("{}", dump_core(&lower(&tp)));
    }
    let graph = load_graph(&a.vertices, &a.edges, a.mode.into()).map_err(|e| DriverError::Usage(e.to_string()))?;
    if graph.warnings.duplicate_edges > 0 {
        eprintln!("warning: {} duplicate edges combined", graph.warnings.duplicate_edges);
    }
    if graph.warnings.ignored_weights > 0 {
        eprintln!(
            "warning: {} edge weights ignored in bool mode",
            graph.warnings.ignored_weights
        );
    }
    let source = match a.source {
        Some(id) => Some(
            *graph
                .index
                .get(&id)
                .ok_or_else(|| DriverError::Usage(format!("source vertex {id} is not in the vertex file")))?,
        ),
        None => None,
    };
    let args = AlgoArgs {
        source,
        damping: a.damping,
        iters: a.iters,
    };
    let (bound, graphs) = bind_graph_args(&f, &graph, &args)?;
    let opts = Options {
        level: OptLevel::from_number(a.opt_level).unwrap_or_default(),
        dense_limit: a.dense_limit,
        preprocess: Preprocess {
            drop_self_loops: a.drop_self_loops,
            dedup_edges: a.dedup_edges,
        },
        ..Options::default()
    };
    if a.dump_plan {
        let binding = graphalg_core::engine::Binding::bind(&f.params, bound.clone())
            .map_err(|e| DriverError::Usage(e.to_string()))?;
        let plan = driver::build_plan(&f, &graphs, Some(&binding.dims), &opts)?;
        print!("{}", pretty_plan(&plan));
    }
    if a.dump_core || a.dump_plan {
        return Ok(());
    }
    let out = driver::run(&f, bound, &graphs, &opts)?;
    if a.stats {
        eprint!("{}", out.stats.to_text());
    }
    let text = write_result(&out.result, &graph.ids);
    match &a.output {
        Some(p) => std::fs::write(p, text).map_err(|e| DriverError::Runtime(format!("{}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run_oracle(name: &str, seed: u64) -> Result<bool, DriverError> {
    let mode = stdlib::mode(name).ok_or_else(|| DriverError::Usage(format!("no stdlib program `{name}`")))?;
    let graph = gen::random_graph(seed, mode);
    let args = AlgoArgs {
        source: stdlib::needs_source(name).then_some(0),
        ..AlgoArgs::default()
    };
    let mut ok = true;
    println!(
        "graph: {} vertices, {} edges",
        graph.vertex_count(),
        graph.adjacency.len()
    );
    for level in [OptLevel::O0, OptLevel::O1, OptLevel::O2] {
        let opts = Options {
            level,
            check_invariants: true,
            ..Options::default()
        };
        let report = oracle::oracle_check(name, &graph, &args, &opts)?;
        println!("{level:?} {report}");
        ok &= report.passed();
    }
    Ok(ok)
}

fn main() -> ExitCode {
    // Argument errors exit with the usage status rather than clap's own.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Check { program } => read(&program).and_then(|src| {
            let tp = check_source(&src)?;
            let names: BTreeSet<&str> = tp.ast.functions.iter().map(|f| f.name.as_str()).collect();
            println!("ok: {}", names.into_iter().collect::<Vec<_>>().join(", "));
            Ok(())
        }),
        Command::Oracle { name, seed } => match run_oracle(&name, seed) {
            Ok(true) => Ok(()),
            Ok(false) => Err(DriverError::Runtime(format!("{name} disagrees with its reference"))),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
