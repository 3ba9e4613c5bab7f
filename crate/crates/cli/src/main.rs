use std::io::{self, BufWriter};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ATN_LOG", "warn")).init();
    let stdin = io::stdin();
    let mut stdin = stdin.lock();
    let mut stdout = BufWriter::new(io::stdout().lock());
    let mut stderr = io::stderr();
    let code = atn_cli::run(std::env::args_os(), &mut stdin, &mut stdout, &mut stderr);
    drop(stdout);
    std::process::exit(code);
}
