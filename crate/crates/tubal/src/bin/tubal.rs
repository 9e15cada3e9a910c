use std::process::ExitCode;

fn main() -> ExitCode {
    // Per-slice matrices are small; threading pays off across trials, not
    // inside a single factorization.
    faer::set_global_parallelism(faer::Par::Seq);
    ExitCode::from(tubal::cli::cli_dispatch(std::env::args()) as u8)
}
