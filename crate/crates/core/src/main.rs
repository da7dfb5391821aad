fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(easv::cli::LOG_ENV, "warn")).init();
    std::process::exit(easv::cli::run(std::env::args_os()));
}
