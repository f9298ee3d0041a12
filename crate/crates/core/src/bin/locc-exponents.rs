use std::process::ExitCode;

fn main() -> ExitCode {
    match locc_exponents::cli::run(std::env::args_os()) {
        Ok(out) => {
            for f in &out.files {
                println!("{}", f.display());
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("verification failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
