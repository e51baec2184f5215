use spheremix::spectral::{DeviationSeries, DEFAULT_EPSILON};
use spheremix_web::{curve_rows, points, surface, SURFACE_DEGREE};
use std::f64::consts::PI;

#[test]
fn surface_layout_and_values() {
    let n = 33;
    let s = surface(1.0, 5, n).unwrap();
    assert_eq!(s.len(), n * n + 2);
    let (grid, extremes) = s.split_at(n * n);
    let lo = grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(extremes, &[lo, hi]);

    let series = DeviationSeries::best_effort(1.0, 5, DEFAULT_EPSILON).unwrap().truncated(SURFACE_DEGREE);
    let step = PI / (n - 1) as f64;
    for (i, j) in [(0, 5), (7, 20), (16, 16), (32, 1)] {
        let v = series.eval(i as f64 * step, j as f64 * step).value;
        assert!((grid[i * n + j] - v).abs() < 1e-13);
    }
}

// the cap (π - γ, π - r) is the complement of (γ, r), so the deviation flips sign
#[test]
fn surface_is_antisymmetric_under_complement() {
    let n = 21;
    let s = surface(0.8, 7, n).unwrap();
    for i in 0..n {
        for j in 0..n {
            assert!((s[i * n + j] + s[(n - 1 - i) * n + (n - 1 - j)]).abs() < 1e-12);
        }
    }
}

#[test]
fn curve_rows_are_sandwiched() {
    let rows = curve_rows(1.2, 9).unwrap();
    assert_eq!(rows.len(), 5 * 8);
    for (idx, row) in rows.chunks(5).enumerate() {
        assert_eq!(row[0], (idx + 2) as f64);
        assert!(row[1] <= row[2] + row[3]);
        assert!(row[4] <= 1.0);
    }
}

#[test]
fn points_are_unit_vectors() {
    let p = points(0.9, 4, "rotate_spin", 500, 3).unwrap();
    assert_eq!(p.len(), 1500);
    for v in p.chunks(3) {
        assert!((v[0] * v[0] + v[1] * v[1] + v[2] * v[2] - 1.0).abs() < 1e-12);
    }
    assert_eq!(p, points(0.9, 4, "rotate_spin", 500, 3).unwrap());
}

#[test]
fn errors_are_reported() {
    assert!(surface(1.0, 5, 1).is_err());
    assert!(surface(1.0, 1, 8).is_err());
    assert!(curve_rows(1.0, 1).is_err());
    assert!(points(1.0, 3, "hover", 10, 0).is_err());
    assert!(points(4.0, 3, "drunkard", 10, 0).is_err());
}
