use std::sync::atomic::Ordering;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = ctrlc::set_handler(|| {
        eprintln!("interrupt: stopping at the next stage boundary");
        codetrans::cli::STOP.store(true, Ordering::SeqCst);
    }) {
        log::warn!("cannot install the Ctrl-C handler: {e}");
    }
    let code = codetrans::cli::run_with(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
