use std::io::{self, ErrorKind, Write};

/// Stdout that goes quiet once the reader hangs up (`ontoquery ... | head`).
struct Stdout(io::Stdout);

impl Write for Stdout {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match self.0.write(buf) {
            Err(e) if e.kind() == ErrorKind::BrokenPipe => Ok(buf.len()),
            r => r,
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self.0.flush() {
            Err(e) if e.kind() == ErrorKind::BrokenPipe => Ok(()),
            r => r,
        }
    }
}

fn main() {
    let code = ontoquery_service::cli::main_with_args(std::env::args_os(), &mut Stdout(io::stdout()), &mut io::stderr());
    std::process::exit(code);
}
