use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use spherecalc_cli::commands::{self, Output};

#[derive(Parser)]
#[command(
    name = "spherecalc",
    version,
    about = "Simple spheres in simply-connected 4-manifolds"
)]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args)]
struct ManifoldArgs {
    /// Manifold expression, e.g. "CP2", "H#H", "E8#-E8", "diag(1,-1)", "[[0,1],[1,0]]".
    #[arg(long)]
    manifold: String,
    /// Kirby–Siebenmann invariant; overrides the value implied by the expression.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    ks: Option<u8>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide existence and uniqueness of simple spheres in one class.
    Classify {
        #[command(flatten)]
        manifold: ManifoldArgs,
        /// Class coordinates as a JSON array.
        #[arg(long, allow_hyphen_values = true)]
        class: String,
    },
    /// Classify every class with coordinates bounded by --max-abs.
    Enumerate {
        #[command(flatten)]
        manifold: ManifoldArgs,
        #[arg(long)]
        max_abs: u64,
        /// Write the catalog here and print only the summary.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep only classes with a simple sphere in the report list.
        #[arg(long)]
        representable_only: bool,
    },
    /// Rank, signature, parity and definiteness of a manifold's form.
    Invariants {
        #[command(flatten)]
        manifold: ManifoldArgs,
    },
    /// Hermitian forms over Z[Z_d] and Z[Z].
    Form {
        #[command(subcommand)]
        command: FormCommand,
    },
}

#[derive(Subcommand)]
enum FormCommand {
    /// Set T = 1.
    Augment {
        #[arg(long)]
        ring: String,
        #[arg(long)]
        a: String,
    },
    /// Whether the determinant is a unit.
    Nonsingular {
        #[arg(long)]
        ring: String,
        #[arg(long)]
        a: String,
    },
    /// Search for P with P·A·P* = B, or refute congruence.
    Congruent {
        #[arg(long)]
        ring: String,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// Distinguished class for A (pointed search; needs --zb).
        #[arg(long, requires = "zb")]
        za: Option<String>,
        /// Distinguished class for B.
        #[arg(long, requires = "za")]
        zb: Option<String>,
        /// Maximum number of search nodes.
        #[arg(long, env = "SPHERECALC_BUDGET", default_value_t = 1_000_000)]
        budget: usize,
    },
    /// Equivariant form of an integer form with a Z_d action, on a free basis.
    BuildEquivariant {
        /// Integer intersection form.
        #[arg(long)]
        form: String,
        /// Matrix of the generator acting on columns.
        #[arg(long)]
        action: String,
        #[arg(long)]
        order: usize,
        /// Free basis vectors, one per row.
        #[arg(long)]
        basis: String,
    },
    /// Extend an integer form to the group ring.
    Extend {
        #[arg(long)]
        ring: String,
        #[arg(long)]
        form: String,
    },
    /// Whether a form over Z[Z] can arise from a nullhomologous sphere.
    Realizable {
        #[command(flatten)]
        manifold: ManifoldArgs,
        #[arg(long)]
        a: String,
    },
}

fn emit(out: &Output, format: Format) {
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&out.json).expect("json value serializes")
        ),
        Format::Table => print!("{}", out.table),
    }
}

fn run(cli: Cli) -> Result<()> {
    let format = cli.format;
    match cli.command {
        Command::Classify { manifold, class } => emit(
            &commands::cmd_classify(&manifold.manifold, manifold.ks, &class)?,
            format,
        ),
        Command::Enumerate {
            manifold,
            max_abs,
            out,
            representable_only,
        } => {
            let cat = commands::cmd_enumerate(
                &manifold.manifold,
                manifold.ks,
                max_abs,
                representable_only,
            )?;
            match out {
                Some(path) => {
                    fs::write(&path, cat.to_json())
                        .with_context(|| format!("writing {}", path.display()))?;
                    let summary = Output {
                        json: serde_json::json!({
                            "out": path.display().to_string(),
                            "summary": cat.summary,
                        }),
                        table: commands::summary_table(&cat),
                    };
                    emit(&summary, format);
                }
                None => match format {
                    Format::Json => print!("{}", cat.to_json()),
                    Format::Table => print!("{}", commands::catalog_table(&cat)),
                },
            }
        }
        Command::Invariants { manifold } => emit(
            &commands::cmd_invariants(&manifold.manifold, manifold.ks)?,
            format,
        ),
        Command::Form { command } => {
            let out = match command {
                FormCommand::Augment { ring, a } => commands::cmd_form_augment(&ring, &a)?,
                FormCommand::Nonsingular { ring, a } => commands::cmd_form_nonsingular(&ring, &a)?,
                FormCommand::Congruent {
                    ring,
                    a,
                    b,
                    za,
                    zb,
                    budget,
                } => {
                    let points = za.as_deref().zip(zb.as_deref());
                    commands::cmd_form_congruent(&ring, &a, &b, points, budget)?
                }
                FormCommand::BuildEquivariant {
                    form,
                    action,
                    order,
                    basis,
                } => commands::cmd_form_build_equivariant(&form, &action, order, &basis)?,
                FormCommand::Extend { ring, form } => commands::cmd_form_extend(&ring, &form)?,
                FormCommand::Realizable { manifold, a } => {
                    commands::cmd_form_realizable(&manifold.manifold, manifold.ks, &a)?
                }
            };
            emit(&out, format);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
