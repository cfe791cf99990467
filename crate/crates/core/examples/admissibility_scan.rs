//! Scans each built-in loss along every parameter slice and reports whether
//! it has a single minimum or is monotone. The double well is the negative
//! control.

use gxboost::loss::{check_admissibility, DoubleWell, GammaNll, Loss, NegBinNll, SquaredError, ZipNll};

fn main() -> gxboost::Result<()> {
    let cases: Vec<(Box<dyn Loss>, Vec<f64>)> = vec![
        (Box::new(SquaredError), vec![-5.0, 0.0, 3.5]),
        (Box::new(GammaNll::new(5.0)?), vec![0.1, 4.0, 100.0]),
        (Box::new(ZipNll::new(0.5)?), vec![0.0, 1.0, 7.0]),
        (Box::new(NegBinNll), vec![0.0, 2.0, 25.0]),
        (Box::new(DoubleWell), vec![0.0]),
    ];
    for (loss, ys) in &cases {
        let report = check_admissibility(loss.as_ref(), ys, 1000)?;
        println!("{}: {}", loss.name(), if report.passed() { "PASS" } else { "FAIL" });
        for s in &report.slices {
            println!("  y={} {}: {}", s.y, s.param, s.shape);
        }
    }
    Ok(())
}
