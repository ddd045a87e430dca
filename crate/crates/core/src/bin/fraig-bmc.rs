use std::io::{stderr, stdout};
use std::process::exit;

fn main() {
    let code = fraig_bmc::cli::run(std::env::args_os(), &mut stdout().lock(), &mut stderr().lock());
    exit(code);
}
