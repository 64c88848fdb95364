use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use oeb_cli::verify::{Level, Mutation};

#[derive(Parser)]
#[command(name = "oeb", version, about = "Ishikawa-type iterations with optimal error bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum MutationArg {
    FlipUpperSign,
}

#[derive(Subcommand)]
enum Command {
    /// Run a TOML config and write the requested CSVs.
    Run { config: PathBuf },
    /// Reproduce a figure: one CSV per curve plus manifest.json.
    Figure {
        id: String,
        /// Output directory (default: figures/<id>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suite.
    Verify {
        #[arg(long, value_enum, default_value = "fast")]
        level: LevelArg,
        /// Inject a known defect to check that the suite catches it.
        #[arg(long, value_enum, hide = true)]
        mutate: Option<MutationArg>,
    },
    /// List schedule, map, pair and figure keys.
    Catalog,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config } => oeb_cli::cmd_run(&config),
        Command::Figure { id, out } => {
            let out = out.unwrap_or_else(|| PathBuf::from("figures").join(&id));
            oeb_cli::cmd_figure(&id, &out)
        }
        Command::Verify { level, mutate } => {
            let level = match level {
                LevelArg::Fast => Level::Fast,
                LevelArg::Full => Level::Full,
            };
            let mutation = match mutate {
                Some(MutationArg::FlipUpperSign) => Mutation::FlipUpperSign,
                None => Mutation::None,
            };
            oeb_cli::cmd_verify_to(level, mutation, &mut std::io::stdout())
        }
        Command::Catalog => oeb_cli::cmd_catalog(),
    };
    ExitCode::from(code as u8)
}
