//! Measurement-count bounds and the prescribed index sets for a few geometries.

use phaseless_stft::bounds::{blind_closure_block, blind_measurement_set, bound_report, known_window_measurement_set};
use phaseless_stft::problem::ProblemParams;

fn main() -> phaseless_stft::Result<()> {
    for (n, w, l) in [(11, 3, 1), (100, 10, 4), (100, 20, 1), (16, 5, 2)] {
        let p = ProblemParams::new(n, w, l)?;
        let rep = bound_report(&p);
        println!(
            "N={n:3} W={w:2} L={l} alpha={} known={:3} (cap {}) blind={:3} (cap {})",
            rep.alpha, rep.known_window_count, rep.four_n, rep.blind_count, rep.four_n_plus_2w
        );
        let known = known_window_measurement_set(&p)?;
        let blind = blind_measurement_set(&p)?;
        let closure = blind_closure_block(&p)?.map_or(0, |b| b.count);
        println!("    sets: known {} indices, blind {} (+{closure} closure)", known.len(), blind.len());
    }
    Ok(())
}
