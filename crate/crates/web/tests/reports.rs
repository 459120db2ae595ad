use num_complex::Complex64 as C64;

use effuniv_web::{constants_report, disk_fill_report, scan_report};

#[test]
fn constants_at_three_quarters() {
    let v = constants_report(0.75, 0.5).unwrap();
    assert_eq!(v["constants"]["d"], 64.0);
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);
    assert!((v["log10_log_log_t"].as_f64().unwrap() - 64.0 * 2f64.log10()).abs() < 1e-12);
    assert!(constants_report(0.4, 0.5).unwrap_err().contains("σ_L"));
}

#[test]
fn disk_fill_closes_the_path() {
    let radii: Vec<f64> = (2..40).map(|n| (n as f64).powf(-0.75)).collect();
    let target = C64::new(0.7, -1.1);
    let v = disk_fill_report(&radii, target).unwrap();
    assert!(v["residual"].as_f64().unwrap() < 1e-12);
    let path = v["path"].as_array().unwrap();
    assert_eq!(path.len(), radii.len() + 1);
    let end = path.last().unwrap();
    assert!((end[0].as_f64().unwrap() - 0.7).abs() < 1e-12);
    assert!((end[1].as_f64().unwrap() + 1.1).abs() < 1e-12);
    assert!(disk_fill_report(&[1.0, 0.5], C64::new(3.0, 0.0)).is_err());
}

#[test]
fn scan_finds_its_own_value() {
    let first = scan_report(0.75, 10.0, 20.0, 101, C64::new(0.0, 0.0)).unwrap();
    let sample = &first["values"][37];
    let target = C64::new(sample[1].as_f64().unwrap(), sample[2].as_f64().unwrap());
    let v = scan_report(0.75, 10.0, 20.0, 101, target).unwrap();
    assert_eq!(v["best_distance"], 0.0);
    assert!((v["best_t"].as_f64().unwrap() - 13.7).abs() < 1e-12);
    assert!(scan_report(0.75, 10.0, 5000.0, 10, target).is_err());
    assert!(scan_report(1.2, 10.0, 20.0, 10, target).is_err());
}
