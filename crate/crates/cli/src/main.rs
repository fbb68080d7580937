use std::io::{self, Write};
use std::process::ExitCode;
use std::thread;

const STACK: usize = 256 * 1024 * 1024;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let worker = thread::Builder::new().stack_size(STACK).spawn(move || {
        let stdin = io::stdin();
        let mut lock = stdin.lock();
        transseries_cli::run(args, &mut lock)
    });
    let outcome = match worker.map(|h| h.join()) {
        Ok(Ok(o)) => o,
        _ => {
            eprintln!("error: internal failure");
            return ExitCode::from(1);
        }
    };
    let _ = io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = io::stderr().write_all(outcome.stderr.as_bytes());
    ExitCode::from(outcome.code as u8)
}
