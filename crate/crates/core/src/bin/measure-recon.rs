fn main() {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    std::process::exit(measure_recon::harness::commands::run_cli(std::env::args_os()));
}
