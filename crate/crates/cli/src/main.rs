use std::process::ExitCode;

use clap::Parser;

use jcurve_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help / --version are successes; anything else is a usage error.
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    // The invocation's arguments, echoed into report metadata. The output
    // destination is dropped: it does not affect the numbers, and keeping it
    // would make the same report differ depending on where it was written.
    let mut args: Vec<String> = std::env::args().skip(1).collect();
    let mut i = 0;
    while i < args.len() {
        if args[i] == "--out" {
            let end = (i + 2).min(args.len());
            args.drain(i..end);
        } else if args[i].starts_with("--out=") {
            args.remove(i);
        } else {
            i += 1;
        }
    }
    let options_line = args.join(" ");

    match execute(&cli, &options_line) {
        Ok(out) => {
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &out.payload) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{}", out.payload);
            }
            if out.warnings.is_empty() {
                ExitCode::SUCCESS
            } else {
                // A payload exists, but part of the work failed numerically.
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
