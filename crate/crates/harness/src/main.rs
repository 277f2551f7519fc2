use clap::Parser;

use dualdiv_harness::cli;

fn main() {
    let parsed = match cli::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                // argument errors become the machine-readable failure shape
                let msg = e.render().to_string();
                eprintln!("{}", serde_json::json!({ "error": msg }));
                std::process::exit(2);
            }
            // --help / --version print to stdout and exit 0
            e.exit();
        }
    };
    if let Err(e) = cli::run(parsed) {
        eprintln!("{}", serde_json::json!({ "error": e.to_string() }));
        std::process::exit(1);
    }
}
