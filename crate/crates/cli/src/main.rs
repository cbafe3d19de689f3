use clap::Parser;
use pelab_cli::{execute, output_dir, Cli, RunConfig, EXIT_USAGE};
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let name = cli.command.name();
    let cfg = match RunConfig::layered(cli.config.as_deref(), &cli.set, &cli.command.flags()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("pelab {name}: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let report = execute(name, &cfg);
    print!("{}", report.human());
    let dir = output_dir(cli.out);
    match report.write(&dir) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("pelab {name}: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    }
    ExitCode::from(report.exit_code as u8)
}
