//! `oscv`: Coulomb matrix elements in the 3D harmonic-oscillator basis.
//!
//! Exit status is 0 on success, 1 when validation fails or a computation
//! errors, and 2 for invalid arguments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ho_coulomb::bench::bench_family;
use ho_coulomb::tensor_store::{build_tensor, BasisCutoff, BuildOptions, ExportFormat, Strategy};
use ho_coulomb::validate::{exhaustive_keys, random_keys, validate_keys};
use ho_coulomb::{selection_rule, Backend, ClosedForm, ElementKey, Error, OscillatorScale};

#[derive(Parser)]
#[command(name = "oscv", version, about = "Coulomb matrix elements in the 3D harmonic-oscillator basis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one element <λ1 λ2|1/r12|λ3 λ4>.
    Element(ElementArgs),
    /// Build and export the symmetry-reduced tensor up to a cutoff.
    Tensor(TensorArgs),
    /// Compare the closed form against numerical quadrature.
    Validate(ValidateArgs),
    /// Time a recurrence family against direct evaluation.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ElementArgs {
    /// Twelve indices nx1 ny1 nz1 nx2 ... nz4 (commas also accepted).
    #[arg(required = true, num_args = 1.., allow_negative_numbers = true)]
    indices: Vec<String>,
    /// Oscillator length a.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, env = "OSCV_BACKEND", default_value = "exact")]
    backend: Backend,
}

#[derive(Args)]
#[group(id = "cutoff", required = true, multiple = false)]
struct CutoffArgs {
    /// Keep states with nx + ny + nz <= N.
    #[arg(long, group = "cutoff")]
    shells: Option<u32>,
    /// Keep states with every component <= N.
    #[arg(long, group = "cutoff")]
    n_max: Option<u32>,
}

#[derive(Args)]
struct TensorArgs {
    #[command(flatten)]
    cutoff: CutoffArgs,
    #[arg(long, default_value = "direct")]
    strategy: Strategy,
    /// binary, json or csv; inferred from the output extension if omitted.
    #[arg(long)]
    format: Option<ExportFormat>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, env = "OSCV_WORKERS", default_value_t = 1)]
    workers: usize,
    #[arg(long, env = "OSCV_BACKEND", default_value = "float")]
    backend: Backend,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
}

#[derive(Args)]
struct ValidateArgs {
    /// Largest single index in the checked keys.
    #[arg(long, default_value_t = 2)]
    max_index: u32,
    /// Check this many random keys instead of every key.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "OSCV_BACKEND", default_value = "exact")]
    backend: Backend,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Print the full report as JSON.
    #[arg(long)]
    json: bool,
    /// Negate every closed-form value (negative control).
    #[arg(long, hide = true)]
    inject_sign_flip: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 8)]
    n_max: u32,
    #[arg(long, default_value_t = 5)]
    repetitions: usize,
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Element(args) => element(args),
        Command::Tensor(args) => tensor(args),
        Command::Validate(args) => validate(args),
        Command::Bench(args) => bench(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidArgument(_) | Error::InvalidScale(_) | Error::TooLarge { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn element(args: ElementArgs) -> Result<ExitCode, Error> {
    let key: ElementKey = args.indices.join(" ").parse()?;
    let scale = OscillatorScale::new(args.a)?;
    let v = ClosedForm::uncached(scale, key.max_index()).element(&key, args.backend)?;
    println!("{:.16e}", v.value);
    match selection_rule(&key) {
        [Some(sx), Some(sy), Some(sz)] => println!("s = ({sx}, {sy}, {sz}); selection rule: allowed"),
        parities => {
            let axes: Vec<&str> = ["x", "y", "z"]
                .iter()
                .zip(parities)
                .filter(|(_, p)| p.is_none())
                .map(|(a, _)| *a)
                .collect();
            println!("selection rule: forbidden (odd parity on {})", axes.join(", "));
        }
    }
    if let Some(e) = &v.exact {
        println!("exact: {} * sqrt({}) * sqrt(2/pi) / a", e.coefficient, e.radicand);
    }
    Ok(ExitCode::SUCCESS)
}

fn tensor(args: TensorArgs) -> Result<ExitCode, Error> {
    let cutoff = match (args.cutoff.shells, args.cutoff.n_max) {
        (Some(n), _) => BasisCutoff::Shells(n),
        (_, Some(n)) => BasisCutoff::PerAxis(n),
        _ => unreachable!("clap enforces one cutoff"),
    };
    let format = match args.format.or_else(|| ExportFormat::from_path(&args.out)) {
        Some(f) => f,
        None => return Err(Error::InvalidArgument("cannot infer --format from the output path".into())),
    };
    let options = BuildOptions {
        scale: OscillatorScale::new(args.a)?,
        backend: args.backend,
        strategy: args.strategy,
        workers: args.workers,
        ..BuildOptions::new(cutoff)
    };
    let t = build_tensor(&options)?;
    t.write_file(&args.out, format)?;
    println!("{} canonical nonzero elements ({cutoff}, {} backend)", t.len(), t.backend());
    println!("digest {}", t.digest()?);
    Ok(ExitCode::SUCCESS)
}

fn validate(args: ValidateArgs) -> Result<ExitCode, Error> {
    let scale = OscillatorScale::new(args.a)?;
    let keys: Vec<ElementKey> = match args.random {
        Some(n) => random_keys(n, args.max_index, args.seed),
        None => {
            if args.max_index > 3 {
                return Err(Error::InvalidArgument(
                    "exhaustive validation is limited to --max-index 3; use --random".into(),
                ));
            }
            exhaustive_keys(args.max_index).collect()
        }
    };
    let report = validate_keys(&keys, scale, args.backend, args.inject_sign_flip)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(Error::from)?);
    } else {
        for row in report.failing_rows().take(20) {
            println!(
                "FAIL {}  closed {:.16e}  oracle {:.16e}  rel {:.3e}",
                row.key, row.closed_form, row.oracle, row.rel_error
            );
        }
        println!(
            "{} keys, {} failures, max rel error {:.3e}, mean {:.3e} (threshold {:.0e})",
            report.checked, report.failures, report.max_rel_error, report.mean_rel_error, report.threshold
        );
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn bench(args: BenchArgs) -> Result<ExitCode, Error> {
    let r = bench_family(args.n_max, args.repetitions)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&r).map_err(Error::from)?);
    } else {
        println!(
            "n_max {}  family {}  direct {} ns  recurrence {} ns  ratio {:.2}",
            r.n_max, r.family_size, r.direct_ns, r.recurrence_ns, r.ratio
        );
    }
    Ok(ExitCode::SUCCESS)
}
