use std::io::Write;

fn main() {
    let out = wfcheck::cli::execute(std::env::args_os().skip(1));
    std::io::stdout().write_all(out.stdout.as_bytes()).ok();
    std::io::stderr().write_all(out.stderr.as_bytes()).ok();
    std::process::exit(out.code);
}
