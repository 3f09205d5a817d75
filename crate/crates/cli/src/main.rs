fn main() {
    let code = wglab_cli::run(std::env::args_os(), std::env::var(wglab_cli::WORKERS_ENV).ok());
    std::process::exit(code);
}
