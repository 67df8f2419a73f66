fn main() {
    std::process::exit(abcboost::cli::run(std::env::args_os()));
}
