use clap::Parser;

use rareweak_cli::{output::write_output, run, Cli, CliError};

fn main() {
    let cli = Cli::parse();
    let out = cli.command.output().clone();
    let code = match run(&cli.command) {
        Ok(outcome) => {
            let bytes = outcome.document.render(out.format, out.full_precision);
            match write_output(&bytes, out.out.as_deref()) {
                Err(e) => report(&CliError::Computation(format!("writing output: {e}"))),
                Ok(()) => outcome.failure.as_ref().map_or(0, report),
            }
        }
        Err(e) => report(&e),
    };
    std::process::exit(code);
}

fn report(e: &CliError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}
