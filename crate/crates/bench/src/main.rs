use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fpp::heap::AllocatorKind;
use fppbench::{emit_csv, run_bench, run_examples, Bench, BenchError, BenchSpec, Container};

const AFTER_HELP: &str = "\
CSV cells are integers: nanoseconds per operation for every benchmark except
concat (total nanoseconds to join ten containers of size/10) and memory (bytes
held after building the container). Each cell is the median of --reps runs
after one discarded warm-up run; every run uses a fresh thread and node pool.

Exit status: 0 on success, 1 when an example check fails, 2 on usage errors.";

#[derive(Parser, Debug)]
#[command(name = "fppbench", version, about = "Benchmarks and example checks for fpp containers", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    cmd: Option<Cmd>,

    /// access, append, update, concat, erase, access_it, append_it, update_it, erase_it or memory
    #[arg(long)]
    bench: Option<String>,

    /// vector, set, map or string
    #[arg(long, default_value = "vector")]
    container: String,

    /// Comma-separated element counts, strictly increasing
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000,1000000")]
    sizes: Vec<usize>,

    #[arg(long, default_value_t = 5)]
    reps: usize,

    /// pool or system
    #[arg(long, default_value = "pool")]
    alloc: String,

    /// Output file; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run the example programs against their oracles
    Examples {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn bench(cli: &Cli) -> Result<(), BenchError> {
    let name = cli.bench.as_deref().ok_or_else(|| BenchError::Usage("--bench is required".into()))?;
    let spec = BenchSpec {
        bench: name.parse::<Bench>()?,
        container: cli.container.parse::<Container>()?,
        sizes: cli.sizes.clone(),
        reps: cli.reps,
        alloc: cli.alloc.parse::<AllocatorKind>().map_err(BenchError::Usage)?,
    };
    let table = run_bench(&spec)?;
    match &cli.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            emit_csv(&table, &mut w)?;
            w.flush()?;
        }
        None => emit_csv(&table, &mut io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(Cmd::Examples { seed }) = cli.cmd {
        let report = run_examples(seed);
        print!("{report}");
        return if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) };
    }
    match bench(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ BenchError::Usage(_)) => {
            eprintln!("fppbench: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("fppbench: {e}");
            ExitCode::from(1)
        }
    }
}
