use clap::Parser;
use geofil_cli::commands::{self, CompareArgs, IntegrateArgs, SweepArgs, VerifyArgs};
use geofil_cli::{config, Failure};

/// Geodesics of piecewise-smooth metrics: integrate, compare solvers,
/// sweep initial conditions, verify the catalog.
#[derive(Parser, Debug)]
#[command(name = "geofil", version, disable_help_subcommand = true)]
enum Cli {
    /// Integrate one run and write the trajectory as CSV.
    Integrate(IntegrateArgs),
    /// Run the event-driven, fixed-step, and mollified solvers on the same
    /// start and report their deviations as JSON.
    Compare(CompareArgs),
    /// Integrate many random starts and summarize each run as a CSV row.
    Sweep(SweepArgs),
    /// Run the built-in check suite and report as JSON.
    Verify(VerifyArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests print to stdout and succeed; real
            // parse errors are usage mistakes and land in the validation
            // exit class with a one-line message.
            if err.use_stderr() {
                let rendered = err.render().to_string();
                let msg = rendered.strip_prefix("error: ").unwrap_or(&rendered);
                let failure = Failure::Validation(config::single_line(msg));
                eprintln!("{failure}");
                std::process::exit(failure.code());
            }
            print!("{err}");
            std::process::exit(0);
        }
    };
    let result = match &cli {
        Cli::Integrate(args) => commands::integrate(args),
        Cli::Compare(args) => commands::compare(args),
        Cli::Sweep(args) => commands::sweep(args),
        Cli::Verify(args) => commands::verify(args),
    };
    if let Err(failure) = result {
        eprintln!("{failure}");
        std::process::exit(failure.code());
    }
}
