use std::io::{self, BufWriter};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let stdin = io::stdin();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let code = conpole::cli::run(std::env::args(), &mut stdin.lock(), &mut out, &mut io::stderr());
    drop(out);
    std::process::exit(code);
}
