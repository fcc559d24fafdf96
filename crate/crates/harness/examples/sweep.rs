//! Runs every mode over a few seeds and prints the summary metrics.
//!
//! `cargo run --release -p symcanon-harness --example sweep -- [config.json] [seeds]`

use std::time::Instant;

use symcanon_harness::{run, HarnessConfig, Mode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let cfg = match args.get(1) {
        Some(p) if p != "-" => HarnessConfig::load(std::path::Path::new(p))?,
        _ => HarnessConfig::default(),
    };
    let seeds: u64 = args.get(2).map_or(Ok(3), |s| s.parse())?;
    for mode in Mode::ALL {
        for seed in 0..seeds {
            let mut c = cfg.clone();
            c.seed = seed;
            let t0 = Instant::now();
            let (_, rep) = run(&c, mode)?;
            let s = &rep.summary;
            println!(
                "{:<9} seed {seed} {:>5.1}s mean {:.4} med {:.4} rms {:.2}px centroid {:.2}px orbit {:?} seam {:?}/{:?} clf {:?}/{:?} forced {:?} ({}) fails {}",
                mode.name(),
                t0.elapsed().as_secs_f64(),
                s.val_rot_err_mean,
                s.val_rot_err_median,
                s.val_rms_px,
                s.centroid_rms_px,
                s.orbit_mean_rms_px,
                s.seam_band_err_mean,
                s.seam_interior_err_mean,
                s.clf_acc,
                s.clf_acc_interior,
                s.misrouted_forced_err_median,
                s.misrouted_forced_count,
                s.pnp_failures,
            );
        }
    }
    Ok(())
}
