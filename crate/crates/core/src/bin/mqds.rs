fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MQDS_LOG", "warn"))
        .format_timestamp(None)
        .init();
    std::process::exit(mqds::cli::main_with_args(std::env::args_os()));
}
