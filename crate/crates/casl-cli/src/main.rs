use std::io::Write;

fn main() {
    let report = casl_cli::run(std::env::args_os());
    let mut stdout = std::io::stdout();
    let mut stderr = std::io::stderr();
    let _ = stdout.write_all(report.stdout.as_bytes());
    let _ = stderr.write_all(report.stderr.as_bytes());
    let _ = stdout.flush();
    let _ = stderr.flush();
    std::process::exit(report.exit_code);
}
