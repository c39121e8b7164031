//! `treecomm`: audits, worked examples and reports for commensurators of
//! groups acting on trees.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use treecomm::permgroup::DEFAULT_CAP;

use commands::{Outcome, Settings};
use output::Format;

#[derive(Parser)]
#[command(name = "treecomm", version, about = "Finite computations for groups acting on trees")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value = "tsv")]
    format: Format,
    /// Maximum number of elements enumerated for any one group.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Seed for the commands that sample.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Add per-entry wall-clock times to batch reports.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Orbits, transitivity, primitivity, normalizer and structure flags.
    #[command(group(ArgGroup::new("source").required(true).args(["inline", "catalog"])))]
    Group {
        /// Comma-separated generators, e.g. "(0 1 2),(0 1)".
        #[arg(long)]
        inline: Option<String>,
        /// Degree for --inline; defaults to one more than the largest point.
        #[arg(long)]
        degree: Option<usize>,
        /// JSON catalog file.
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    /// Audit groups of degree d+1 as local actions.
    Audit {
        #[arg(long, conflicts_with = "group")]
        catalog: Option<PathBuf>,
        /// Built-in group name; repeat for several.
        #[arg(long)]
        group: Vec<String>,
    },
    /// PSL(2,7) against AΓL(1,8).
    ExamplePslAgl {
        /// Use AGL(1,8) in place of AΓL(1,8).
        #[arg(long)]
        perturbed: bool,
    },
    /// Orders of the finite quotients W_n and A_n.
    Tower {
        #[arg(long = "d")]
        d: usize,
        #[arg(long = "D")]
        group: String,
        #[arg(long = "n")]
        n: usize,
    },
    /// Automorphism groups of coloured balls.
    Ball {
        #[arg(long = "F")]
        f: String,
        #[arg(long = "R")]
        radius: usize,
        /// Centre the ball on an edge.
        #[arg(long)]
        edge: bool,
        /// Check that the edge stabilizer splits over the two half-balls.
        #[arg(long)]
        independence: bool,
        /// Recover the local action as K/C.
        #[arg(long)]
        recover: bool,
    },
    /// Tree-pair elements in the three-line text format.
    Thompson {
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[command(subcommand)]
        op: ThompsonOp,
    },
    /// Germs given as JSON.
    Germ {
        #[command(subcommand)]
        op: GermOp,
    },
    /// Print the built-in groups as a catalog.
    Catalog,
}

#[derive(Subcommand)]
enum ThompsonOp {
    /// Reduced form. `-` reads standard input.
    Reduce { file: PathBuf },
    /// Product, applying the first element first.
    Compose { first: PathBuf, second: PathBuf },
    /// Sign of the leaf permutation.
    Parity {
        file: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
    },
    /// A random element.
    Random {
        #[arg(long, default_value_t = 4)]
        expansions: usize,
    },
}

#[derive(Subcommand)]
enum GermOp {
    /// Split into an order-preserving tree pair and a level-preserving germ.
    Factor { file: PathBuf },
    /// Sign character.
    Chi { file: PathBuf },
    /// Membership in the subgroup M.
    #[command(name = "in-m", alias = "inM")]
    InM { file: PathBuf },
    /// Membership flags for the standard subgroups.
    Membership { file: PathBuf },
    /// A random germ.
    Random {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long = "D", default_value = "S3")]
        group: String,
        #[arg(long, default_value_t = 3)]
        expansions: usize,
        #[arg(long, default_value_t = 2)]
        label_depth: usize,
    },
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let s = Settings {
        format: cli.format,
        cap: cli.cap,
        seed: cli.seed,
        timing: cli.timing,
    };
    match cli.command {
        Command::Group { inline, degree, catalog } => commands::group(&s, inline.as_deref(), degree, catalog.as_deref()),
        Command::Audit { catalog, group } => commands::audit(&s, catalog.as_deref(), &group),
        Command::ExamplePslAgl { perturbed } => commands::example_psl_agl(&s, perturbed),
        Command::Tower { d, group, n } => commands::tower(&s, d, &group, n),
        Command::Ball {
            f,
            radius,
            edge,
            independence,
            recover,
        } => commands::ball(&s, &f, radius, edge, independence, recover),
        Command::Thompson { k, d, op } => match op {
            ThompsonOp::Reduce { file } => commands::thompson_reduce(&s, k, d, &file),
            ThompsonOp::Compose { first, second } => commands::thompson_compose(&s, k, d, &first, &second),
            ThompsonOp::Parity { file, max_steps } => commands::thompson_parity(&s, k, d, &file, max_steps),
            ThompsonOp::Random { expansions } => commands::thompson_random(&s, k, d, expansions),
        },
        Command::Germ { op } => match op {
            GermOp::Factor { file } => commands::germ_factor(&s, &file),
            GermOp::Chi { file } => commands::germ_chi(&s, &file),
            GermOp::InM { file } => commands::germ_in_m(&s, &file),
            GermOp::Membership { file } => commands::germ_membership(&s, &file),
            GermOp::Random {
                k,
                group,
                expansions,
                label_depth,
            } => commands::germ_random(&s, k, &group, expansions, label_depth),
        },
        Command::Catalog => commands::builtin_catalog(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            print!("{}", outcome.text);
            if outcome.failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
