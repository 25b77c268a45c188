use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    let result = monoalign::cli::run(std::env::args_os(), &mut out);
    let flushed = out.flush();
    match result.and(flushed.map_err(|e| monoalign::Error::io("<stdout>", e))) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("monoalign: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
