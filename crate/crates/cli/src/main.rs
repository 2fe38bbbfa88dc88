use std::process::ExitCode;

use clap::Parser;
use rggclt::{main_with, Args};

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            // clap reports usage errors with 2, which is reserved for
            // infeasible runs here.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    ExitCode::from(main_with(args))
}
