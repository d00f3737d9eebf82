use std::io::Write;

fn main() {
    let inv = gradgauge_cli::invoke(std::env::args_os());
    print!("{}", inv.stdout);
    eprint!("{}", inv.stderr);
    std::io::stdout().flush().ok();
    std::process::exit(inv.code);
}
