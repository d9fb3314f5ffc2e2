use std::fmt::Write as _;
use std::path::Path;

use spdgeo::ajd::{ajd_pham, AjdConfig};
use spdgeo::io::read_set_file;
use spdgeo::Result;

pub fn run(input: &Path, db: f64, max_sweeps: usize, out: Option<&Path>) -> Result<u8> {
    let set = read_set_file(input)?;
    let report = ajd_pham(
        &set,
        &AjdConfig {
            stop_decrement_db: db,
            max_sweeps,
        },
    )?;

    let trace = &report.criterion_trace;
    let mut block = String::new();
    let _ = writeln!(block, "ajddiag v1 N={} K={}", set.dim(), set.len());
    let _ = writeln!(block, "# algo: AJD-Pham");
    let _ = writeln!(block, "# source: {}", input.display());
    let _ = writeln!(block, "# sweeps: {}", report.sweeps);
    let _ = writeln!(block, "# converged: {}", report.converged);
    let _ = writeln!(block, "# initial_criterion: {:e}", trace[0]);
    let _ = writeln!(
        block,
        "# final_criterion: {:e}",
        trace.last().copied().unwrap_or(f64::NAN)
    );
    block.push('B');
    let b = report.diagonalizer.b();
    for i in 0..b.nrows() {
        for j in 0..b.ncols() {
            let _ = write!(block, " {}", b[(i, j)]);
        }
    }
    block.push('\n');

    print!("{block}");
    if let Some(path) = out {
        std::fs::write(path, &block)?;
    }
    Ok(if report.converged { 0 } else { 2 })
}
