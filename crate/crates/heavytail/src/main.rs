use clap::Parser;

use heavytail::cli::{exit_code, run, Cli};

fn main() {
    // clap exits with 2 on usage errors by itself (configured via the error
    // kind); map library failures to 3 (model) or 4 (numeric).
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { 2 } else { 0 };
            std::process::exit(code);
        }
    };
    if let Err(err) = run(&cli) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}
