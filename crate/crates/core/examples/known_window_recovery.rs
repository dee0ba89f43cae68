//! Exact recovery from the bound-sized known-window measurement set.

use phaseless_stft::ambiguity::{quotient_error, Mode};
use phaseless_stft::bounds::{known_window_bound, known_window_measurement_set};
use phaseless_stft::problem::{random_pair, Distribution, ProblemParams, Rng};
use phaseless_stft::proof_solver::recover_known_window;
use phaseless_stft::stft::measure;

fn main() -> phaseless_stft::Result<()> {
    let p = ProblemParams::new(16, 4, 1)?;
    let pair = random_pair(&p, Distribution::ComplexGaussian, &mut Rng::new(1));
    let set = measure(&p, &pair, &known_window_measurement_set(&p)?)?;
    let res = recover_known_window(&set, &pair.w, &p)?;
    println!(
        "{} of {} grid magnitudes (bound {}), status {:?}, {} steps",
        set.len(),
        p.grid_size(),
        known_window_bound(&p),
        res.status,
        res.steps_used
    );
    println!("error modulo global phase: {:.2e}", quotient_error(&res.estimate, &pair, &p, Mode::KnownWindow)?);
    println!("{}", res.to_json()?);
    Ok(())
}
