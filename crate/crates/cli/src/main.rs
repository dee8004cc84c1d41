use std::process;

use branchdepth_cli::{run, Cli, ExitCode};
use clap::Parser;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            process::exit(if usage { ExitCode::Usage as i32 } else { 0 });
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        process::exit(e.code as i32);
    }
}
