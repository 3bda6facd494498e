use std::process::ExitCode;

use clap::Parser;
use objdetect_service::{router, Args};

#[tokio::main]
async fn main() -> ExitCode {
    let args = Args::parse();
    let config = match args.config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let listener = match tokio::net::TcpListener::bind(&args.bind).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot bind {}: {e}", args.bind);
            return ExitCode::from(3);
        }
    };
    eprintln!("objdetect-serve listening on http://{}", args.bind);
    if let Err(e) = axum::serve(listener, router(&config)).await {
        eprintln!("error: {e}");
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}
