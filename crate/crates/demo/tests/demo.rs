use ttns_demo::{bounds_curves, extremal_pair, truncation_run};

#[test]
fn bounds_bracket_the_true_error() {
    let weights = [0.6, 0.25, 0.1, 0.05];
    let v = bounds_curves(&weights, 2).unwrap();
    let eps = v["eps"].as_f64().unwrap();
    assert!((eps - 0.15).abs() < 1e-15);
    for row in v["rows"].as_array().unwrap() {
        let a = row["alpha"].as_f64().unwrap();
        let s = row["entropy"].as_f64().unwrap();
        let direct = weights.iter().map(|w: &f64| w.powf(a)).sum::<f64>().ln() / (1.0 - a);
        assert!((s - direct).abs() < 1e-12, "alpha {a}");
        if let Some(l) = row["lower"].as_f64() {
            assert!(l <= eps + 1e-12);
        }
        if let Some(u) = row["upper"].as_f64() {
            assert!(eps <= u + 1e-12);
        }
    }
    assert!(bounds_curves(&[0.0, 0.0], 1).is_err());
}

#[test]
fn ghz_truncation_ledger() {
    let v = truncation_run("ghz", 6, 1, 0, true).unwrap();
    assert!((v["delta"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["sum_eps"].as_f64().unwrap() - 2.5).abs() < 1e-12);
    assert!((v["delta_lazy"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(v["edges"].as_array().unwrap().len(), 5);

    let r = truncation_run("random", 8, 2, 3, false).unwrap();
    let (d, m, s) = (r["delta"].as_f64().unwrap(), r["max_eps"].as_f64().unwrap(), r["sum_eps"].as_f64().unwrap());
    assert!(m <= d + 1e-12 && d <= s + 1e-12);
    assert!(truncation_run("nope", 4, 1, 0, true).is_err());
}

#[test]
fn extremal_distributions_are_normalized() {
    let v = extremal_pair(2, 0.2, 6, 0.1, 0.05).unwrap();
    for key in ["spread", "head"] {
        let total: f64 = v[key].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12, "{key}");
    }
    assert_eq!(v["spread"][2].as_f64().unwrap(), 0.05);
}
