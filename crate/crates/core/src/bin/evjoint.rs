fn main() {
    std::process::exit(evjoint::cli::dispatch(std::env::args_os()));
}
