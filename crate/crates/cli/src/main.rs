use std::io::Write;

fn main() {
    let mut out = std::io::stdout().lock();
    match ceinv_cli::run(std::env::args_os(), &mut out) {
        Ok(()) => {}
        Err(e) => {
            let _ = out.flush();
            if e.code == 0 {
                print!("{}", e.message);
            } else {
                eprintln!("error: {}", e.message.trim_end());
            }
            std::process::exit(e.code);
        }
    }
}
