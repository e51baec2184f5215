//! Text formats shared by the CLI and the browser demo.

use crate::discrepancy::CurveRow;

/// 17 significant digits in scientific notation; round-trips every `f64`.
/// Non-finite values are written as `inf`, `-inf` or `nan`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub const CURVE_HEADER: &str = "k,lower_plancherel,exact,upper_series,upper_closed";

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.k,
            fmt_f64(row.lower_plancherel),
            fmt_f64(row.exact),
            fmt_f64(row.upper_series),
            fmt_f64(row.upper_closed)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, -2.5e-300, 1.0 / 3.0, std::f64::consts::PI, 0.0, 1e300] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }
}
