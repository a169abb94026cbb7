fn main() {
    let result = helmbeam::cli::run(std::env::args_os());
    print!("{}", result.stdout);
    for line in &result.diagnostics {
        eprint!("{line}");
        if !line.ends_with('\n') {
            eprintln!();
        }
    }
    std::process::exit(result.exit_code);
}
