fn main() {
    std::process::exit(regionrrt::cli::dispatch(std::env::args_os()));
}
