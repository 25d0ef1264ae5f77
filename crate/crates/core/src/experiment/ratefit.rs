//! Log–log rate fits over columns of an artifact CSV.

use std::path::Path;

use crate::error::{Error, Result};
use crate::holder::{fit_rate, RateFit};

/// Reads columns `x` and `y` of a CSV (lines starting with `#` are skipped)
/// and fits `ln y = slope·ln x + intercept`. With `exp2_x` the x column is a
/// base-2 exponent (a dyadic level) and `2^x` is used instead.
pub fn ratefit_csv(path: &Path, x: &str, y: &str, exp2_x: bool) -> Result<RateFit> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Config {
            path: name.to_string(),
            reason: format!("no such column; available: {}", headers.iter().collect::<Vec<_>>().join(", ")),
        })
    };
    let (ix, iy) = (col(x)?, col(y)?);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize, name: &str| -> Result<f64> {
            rec.get(i).unwrap_or("").trim().parse::<f64>().map_err(|e| Error::Config {
                path: name.to_string(),
                reason: format!("row {}: {e}", row + 1),
            })
        };
        let xv = parse(ix, x)?;
        xs.push(if exp2_x { xv.exp2() } else { xv });
        ys.push(parse(iy, y)?);
    }
    fit_rate(&xs, &ys)
}

/// `{ slope: …, intercept: …, r_squared: …, points: … }`
pub fn format_fit(fit: &RateFit) -> String {
    format!(
        "{{ slope: {}, intercept: {}, r_squared: {}, points: {} }}",
        fit.slope, fit.intercept, fit.r_squared, fit.points
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn csv_file(name: &str, body: &str) -> std::path::PathBuf {
        let p = std::env::temp_dir().join(format!("mildsew-ratefit-{name}-{}.csv", std::process::id()));
        let mut f = std::fs::File::create(&p).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn quadratic_and_constant_columns() {
        let p = csv_file("q", "# config_hash=x\nx,y,c\n1,1,5\n2,4,5\n3,9,5\n4,16,5\n");
        assert!((ratefit_csv(&p, "x", "y", false).unwrap().slope - 2.0).abs() < 1e-12);
        assert!(ratefit_csv(&p, "x", "c", false).unwrap().slope.abs() < 1e-12);
        std::fs::remove_file(p).unwrap();
    }

    #[test]
    fn rejects_nonpositive_rows_and_missing_columns() {
        let p = csv_file("n", "x,y\n1,1\n2,0\n3,9\n");
        assert!(matches!(ratefit_csv(&p, "x", "y", false), Err(Error::NonPositive { .. })));
        assert!(matches!(ratefit_csv(&p, "x", "z", false), Err(Error::Config { .. })));
        std::fs::remove_file(p).unwrap();
    }

    #[test]
    fn dyadic_levels() {
        let p = csv_file("l", "level,diff\n1,0.5\n2,0.25\n3,0.125\n");
        assert!((ratefit_csv(&p, "level", "diff", true).unwrap().slope + 1.0).abs() < 1e-12);
        std::fs::remove_file(p).unwrap();
    }
}
