//! A reduced success-rate grid written as CSV to stdout.

use phaseless_stft::harness::{run_figure4, write_figure4_csv, ExperimentGrid};

fn main() -> phaseless_stft::Result<()> {
    let grid = ExperimentGrid {
        k_list: vec![2, 8],
        l_range: vec![1, 3, 5],
        w_range: vec![5, 8, 11],
        trials: 10,
        seed: 7,
        ..ExperimentGrid::default()
    };
    let res = run_figure4(&grid)?;
    write_figure4_csv(&res, std::io::stdout())
}
