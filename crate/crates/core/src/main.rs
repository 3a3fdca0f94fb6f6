use std::process::ExitCode;

use plm_enet::cli::{run_cli, thread_cap};

fn main() -> ExitCode {
    match thread_cap() {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("plm-enet: cannot size thread pool: {e}");
                return ExitCode::from(1);
            }
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("plm-enet: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    }
    ExitCode::from(run_cli(std::env::args_os()) as u8)
}
