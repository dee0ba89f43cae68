//! Forward transform, masked magnitudes and a CSV round trip.

use phaseless_stft::problem::{random_pair, Distribution, ProblemParams, Rng};
use phaseless_stft::stft::{forward, measure, random_mask, MeasurementSet};

fn main() -> phaseless_stft::Result<()> {
    let p = ProblemParams::new(8, 3, 2)?;
    let mut rng = Rng::new(1);
    let pair = random_pair(&p, Distribution::ComplexGaussian, &mut rng);
    let table = forward(&p, &pair);
    println!("N={} R={} sections, max |Y| = {:.4}", p.n(), p.sections(), table.max_abs());
    for r in 0..p.sections() {
        let row: Vec<String> = table.column(r).iter().map(|z| format!("{:6.3}", z.norm())).collect();
        println!("r={r}: {}", row.join(" "));
    }
    let set = measure(&p, &pair, &random_mask(&p, 12, &mut rng)?)?;
    let mut buf = Vec::new();
    set.write_csv(&mut buf)?;
    let back = MeasurementSet::read_csv(buf.as_slice())?;
    println!("{} masked magnitudes, CSV round trip equal: {}", set.len(), back == set.sorted());
    print!("{}", String::from_utf8_lossy(&buf));
    Ok(())
}
