use clap::Parser;
use meshqa_cli::{run, Cli, CliError};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let json = std::env::args().any(|a| a == "--json");
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            std::process::exit(0);
        }
        Err(e) => {
            let err = CliError::Usage(e.to_string().trim_end().to_owned());
            report(&err, json);
            std::process::exit(err.exit_code());
        }
    };
    let json = cli.json;
    if let Err(e) = run(cli) {
        report(&e, json);
        std::process::exit(e.exit_code());
    }
}

fn report(e: &CliError, json: bool) {
    if json {
        eprintln!("{}", e.to_json());
    } else {
        eprintln!("meshqa: {e}");
    }
}
