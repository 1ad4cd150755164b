use clap::Parser;
use coarse_lab::cli::{run, RunConfig};

fn main() {
    if let Some(n) = std::env::var("COARSE_LAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    std::process::exit(run(RunConfig::parse()));
}
