use std::process::{Command, Output};

fn covmet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covmet"))
        .args(args)
        .env_remove("COVMET_THREADS")
        .output()
        .expect("spawn covmet")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn validate_exit_codes() {
    let ok = covmet(&["validate", "--eta-perp", "0.5", "--eta-par", "0.5", "--kappa", "0.1"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).trim_end().ends_with("CPTP"));

    let bad = covmet(&["validate", "--eta-perp", "0.9", "--eta-par", "0.8", "--kappa", "0.1"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("NOT CPTP"));

    let negative_kappa = covmet(&["validate", "--eta-perp", "0.3", "--eta-par", "0.2", "--kappa", "-0.5"]);
    assert_eq!(negative_kappa.status.code(), Some(0));

    assert_eq!(covmet(&["validate", "--eta-perp", "0.5"]).status.code(), Some(2));
    assert_eq!(covmet(&["validate", "--eta-perp", "-0.5", "--eta-par", "0.5", "--kappa", "0"]).status.code(), Some(2));
    assert_eq!(covmet(&["validate", "--model", "sl", "--t", "2"]).status.code(), Some(0));
}

#[test]
fn scan_csv_format() {
    let o = covmet(&["scan", "--model", "sl", "--n-min", "10", "--n-max", "1000", "--n-count", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,t_opt,mse_T,rescaled_const,method,flag");
    assert_eq!(lines.len(), 6);
    let ns: Vec<u64> = lines[1..].iter().map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(ns.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(ns.first(), Some(&10));
    assert_eq!(ns.last(), Some(&1000));
}

#[test]
fn scan_sl_constant_near_prediction() {
    let o = covmet(&["scan", "--model", "sl", "--n-min", "100000", "--n-max", "100000", "--n-count", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let c: f64 = row[3].parse().unwrap();
    assert!((c - 0.64).abs() / 0.64 < 0.1, "constant {c}");
    assert_eq!(row[4], "bound-analytic");
    assert_eq!(row[5], "ok");
}

#[test]
fn scan_independent_of_thread_count() {
    let args = [
        "scan", "--model", "sl", "--method", "bound-numeric", "--n-min", "10", "--n-max", "1000", "--n-count", "4",
    ];
    let mut one = vec!["--threads", "1"];
    one.extend_from_slice(&args);
    let mut four = vec!["--threads", "4"];
    four.extend_from_slice(&args);
    let a = covmet(&one);
    let b = covmet(&four);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn scan_rejects_bad_grid() {
    let o = covmet(&["scan", "--model", "sl", "--n-min", "100", "--n-max", "10"]);
    assert_eq!(o.status.code(), Some(2));
    let o = covmet(&["scan", "--model", "sl", "--method", "oracle", "--n-max", "100"]);
    assert_eq!(o.status.code(), Some(2));
    let o = covmet(&["scan", "--n-max", "100"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn crosscheck_noiseless_and_random() {
    let o = covmet(&["crosscheck", "--model", "noiseless", "--n", "4", "--samples", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row4 = text.lines().find(|l| l.starts_with("4 ")).unwrap();
    let oracle: f64 = row4.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((oracle - 16.0).abs() < 1e-9);

    let o = covmet(&["crosscheck", "--random", "--seed", "7", "--n", "3", "--samples", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("all checks passed"));

    assert_eq!(covmet(&["crosscheck", "--random", "--n", "5"]).status.code(), Some(2));
}

#[test]
fn rates_semigroup_recovers_constants() {
    let o = covmet(&[
        "rates", "--model", "semigroup", "--g-plus", "0.1", "--g-minus", "0.3", "--g-z", "0.2", "--t-end", "2", "--points", "4",
    ]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("CP-divisible"));
    let text = stdout(&o);
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[5] - 0.1).abs() < 1e-6 && (v[6] - 0.3).abs() < 1e-6 && (v[7] - 0.2).abs() < 1e-6, "{line}");
    }
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn validate_documented_examples() {
    assert_eq!(covmet(&["validate", "--eta-perp", "1", "--eta-par", "1", "--kappa", "0"]).status.code(), Some(0));
    assert_eq!(covmet(&["validate", "--eta-perp", "1", "--eta-par", "0.5", "--kappa", "0"]).status.code(), Some(1));
    let sl = ["validate", "--model", "sl", "--gamma", "0.2", "--gamma0", "0.1", "--n-bath", "10", "--t", "1.0"];
    assert_eq!(covmet(&sl).status.code(), Some(0));
}

#[test]
fn scan_ghz_constant_at_one_million() {
    let o = covmet(&["scan", "--model", "sl", "--method", "ghz", "--n-min", "1e6", "--n-max", "1e6", "--n-count", "1"]);
    assert!(o.status.success());
    let c: f64 = rows(&stdout(&o))[0][3].parse().unwrap();
    assert!((c - 0.7375).abs() / 0.7375 < 0.03, "constant {c}");
}

#[test]
fn scan_top_decade_slope() {
    let o = covmet(&["scan", "--model", "sl", "--n-min", "1e5", "--n-max", "1e6", "--n-count", "8"]);
    let r = rows(&stdout(&o));
    let pts: Vec<(f64, f64)> = r
        .iter()
        .map(|row| (row[0].parse::<f64>().unwrap().ln(), row[2].parse::<f64>().unwrap().ln()))
        .collect();
    assert!(pts.windows(2).all(|w| w[1].1 < w[0].1));
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope + 1.5).abs() <= 0.03, "slope {slope}");
}

#[test]
fn crosscheck_documented_examples() {
    let o = covmet(&["crosscheck", "--model", "sl", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = covmet(&["crosscheck", "--random", "--seed", "42", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn scan_repeatable() {
    let args = ["scan", "--model", "zeno", "--method", "ghz", "--n-count", "10"];
    assert_eq!(covmet(&args).stdout, covmet(&args).stdout);
}
