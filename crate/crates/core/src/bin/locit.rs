use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use locit::engine::RoundModel;
use locit::report::{fit_rounds, load_dir};
use locit::runner::{run_scenario, verify_trace, write_summary_csv};
use locit::scenario::{Grid, Scenario};
use locit::Result;

const EXIT_SCENARIO: u8 = 4;

#[derive(Parser)]
#[command(name = "locit", version, about = "Locally-iterative distributed coloring simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trace and summary.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// local, congest:B, bit or set-local.
        #[arg(long)]
        model: Option<RoundModel>,
        #[arg(long)]
        seed: Option<u64>,
        /// Neighbor IDs are known up front (edge pipelines).
        #[arg(long)]
        known_ids: bool,
        /// Directory for the trace and summary files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Re-check a trace with the oracles.
    Verify {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Run every point of a grid and emit the summary CSV.
    Sweep {
        #[arg(long)]
        grid: PathBuf,
        /// Write `<grid name>.csv` here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit round counts from the summary CSVs in a directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn run(
    scenario: &Path,
    model: Option<RoundModel>,
    seed: Option<u64>,
    known_ids: bool,
    out: &Path,
) -> Result<u8> {
    let mut s = Scenario::load(scenario)?;
    if let Some(m) = model {
        s.model = m;
    }
    if let Some(seed) = seed {
        s.seed = seed;
        s.graph.seed = Some(seed);
    }
    s.params.known_ids |= known_ids;
    let outcome = run_scenario(&s)?;
    std::fs::create_dir_all(out)?;
    let trace_path = out.join(format!("{}.trace.jsonl", s.name));
    let mut w = BufWriter::new(File::create(&trace_path)?);
    outcome.write_jsonl(&mut w)?;
    w.flush()?;
    write_summary_csv(
        std::slice::from_ref(&outcome.summary),
        File::create(out.join(format!("{}.csv", s.name)))?,
    )?;
    let yes = |b: bool| if b { "yes" } else { "no" };
    let row = &outcome.summary;
    println!("trace: {}", trace_path.display());
    println!("proper every round: {}", yes(outcome.proper_every_round));
    if let Some(valid) = outcome.final_valid {
        println!("final structure valid: {}", yes(valid));
    }
    println!("rounds: {} ({} engine rounds)", row.rounds, row.bit_rounds);
    match row.stab_rounds {
        Some(t) => println!("stabilized after: {t} (bound {})", outcome.stab_bound),
        None => println!("stabilized after: never (bound {})", outcome.stab_bound),
    }
    println!("palette: {}", row.palette);
    if let Some(r) = row.adj_radius {
        println!("adjustment radius: {r}");
    }
    println!("max bits per edge: {}", row.max_bits_per_edge);
    Ok(outcome.exit_code() as u8)
}

fn verify(trace: &Path) -> Result<u8> {
    let check = verify_trace(&std::fs::read_to_string(trace)?)?;
    for p in &check.problems {
        println!("{p}");
    }
    if check.exit_code == 0 {
        println!("trace verified");
    }
    Ok(check.exit_code as u8)
}

fn sweep(grid: &Path, out: Option<&Path>) -> Result<u8> {
    let g = Grid::load(grid)?;
    let results: Vec<_> = g
        .scenarios()
        .into_par_iter()
        .map(|s| (s.name.clone(), run_scenario(&s)))
        .collect();
    let mut rows = Vec::new();
    let mut code = 0;
    for (name, r) in results {
        match r {
            Ok(o) => {
                code = code.max(o.exit_code() as u8);
                rows.push(o.summary);
            }
            Err(e) => eprintln!("skipping {name}: {e}"),
        }
    }
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("{}.csv", g.name));
            write_summary_csv(&rows, File::create(&path)?)?;
            println!("{} rows written to {}", rows.len(), path.display());
        }
        None => write_summary_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(code)
}

fn report(input: &Path) -> Result<u8> {
    let rows = load_dir(input)?;
    for fit in fit_rounds(&rows)? {
        println!("{fit}");
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            scenario,
            model,
            seed,
            known_ids,
            out,
        } => run(scenario, *model, *seed, *known_ids, out),
        Command::Verify { trace } => verify(trace),
        Command::Sweep { grid, out } => sweep(grid, out.as_deref()),
        Command::Report { input } => report(input),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_SCENARIO)
        }
    }
}
