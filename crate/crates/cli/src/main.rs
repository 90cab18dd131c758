use std::io::Write;
use std::process::ExitCode;

use arrival_cli::{parse_args, run, usage_document, UsageError};

fn emit(text: &str) {
    // a closed pipe is not worth a panic
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let req = match parse_args(std::env::args_os()) {
        Ok(req) => req,
        Err(UsageError::Info(text)) => {
            emit(text.trim_end());
            return ExitCode::SUCCESS;
        }
        Err(UsageError::Invalid(reason)) => {
            emit(&usage_document(&reason).to_string());
            eprintln!("usage error: {reason}");
            return ExitCode::from(2);
        }
    };
    let out = run(&req);
    emit(&out.render(req.pretty));
    ExitCode::from(out.exit_code as u8)
}
