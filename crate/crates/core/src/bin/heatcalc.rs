fn main() {
    std::process::exit(heatcalc::cli::main_with(std::env::args_os()));
}
