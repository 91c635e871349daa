use std::fs;
use std::process::{Command, Output};

fn coallab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coallab"))
        .args(args)
        .env_remove("COALLAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn kingman_rates_table() {
    let o = coallab(&["rates", "--kingman", "--b", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("b,k,lambda,total_rate,first_jump_pmf"));
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0], ["5", "2", "1", "10", "1"]);
    for r in &rows[1..] {
        assert_eq!(r[2], "0");
    }
}

#[test]
fn missing_sample_size_is_a_usage_error() {
    let o = coallab(&["verify", "sigma", "--beta", "0.5", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("--n"), "{err}");
    assert!(err.contains("Usage"), "{err}");
}

#[test]
fn bad_configuration_exits_two() {
    for args in [
        vec!["simulate", "external", "--beta", "-1", "1", "--n", "10"],
        vec!["simulate", "external", "--kingman", "--n", "1"],
        vec![
            "verify",
            "ratios",
            "--kingman",
            "--n",
            "100",
            "--reps",
            "10",
        ],
        vec![
            "verify",
            "sigma",
            "--density",
            "nope",
            "--c0",
            "1",
            "--alpha",
            "1.5",
            "--n",
            "10",
        ],
    ] {
        let o = coallab(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn verify_sigma_report() {
    let dir = tempfile::tempdir().unwrap();
    let ecdf = dir.path().join("ecdf.csv");
    let o = coallab(&[
        "verify",
        "sigma",
        "--beta",
        "0.5",
        "1.5",
        "--n",
        "5000",
        "--reps",
        "20000",
        "--seed",
        "42",
        "--ecdf",
        ecdf.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["theorem"], "sigma_limit");
    assert_eq!(report["passed"], true);
    assert_eq!(report["n"], 5000);
    assert!(report["statistic"].as_f64().unwrap() <= 0.02);
    let grid = fs::read_to_string(&ecdf).unwrap();
    let mut lines = grid.lines();
    assert_eq!(lines.next(), Some("value,empirical_cdf,analytic_cdf"));
    // one row per distinct value; the KS distance is recoverable from the rows
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert!(!rows.is_empty() && rows.len() <= 20_000);
    assert_eq!(rows.last().unwrap()[1], 1.0);
    let mut prev = 0.0;
    let mut ks: f64 = 0.0;
    for r in &rows {
        ks = ks.max((r[1] - r[2]).abs()).max((prev - r[2]).abs());
        prev = r[1];
    }
    assert!((ks - report["statistic"].as_f64().unwrap()).abs() <= 1e-12);
}

#[test]
fn verification_failure_exits_one() {
    // a tiny sample cannot meet the frozen KS threshold
    let o = coallab(&[
        "verify", "sigma", "--beta", "0.5", "1.5", "--n", "50", "--reps", "200",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn output_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 3] = [
        &[
            "simulate", "external", "--beta", "0.5", "1.5", "--n", "300", "--reps", "400",
        ],
        &[
            "simulate",
            "blockcount",
            "--beta",
            "0.5",
            "1.5",
            "--n",
            "300",
            "--reps",
            "8",
            "--grid",
            "64",
        ],
        &[
            "verify",
            "tlen",
            "--beta",
            "0.5",
            "1.5",
            "--n",
            "300",
            "--reps",
            "500",
            "--sampler",
            "cox",
        ],
    ];
    for (i, case) in cases.iter().enumerate() {
        let mut files = Vec::new();
        for workers in ["1", "2", "4"] {
            let path = dir.path().join(format!("{i}-{workers}.out"));
            let mut args = vec!["--workers", workers];
            args.extend_from_slice(case);
            args.extend_from_slice(&["--seed", "7", "--out", path.to_str().unwrap()]);
            let o = coallab(&args);
            assert!(
                o.status.code() == Some(0) || o.status.code() == Some(1),
                "{case:?}"
            );
            files.push(fs::read(&path).unwrap());
        }
        assert_eq!(files[0], files[1], "{case:?}");
        assert_eq!(files[0], files[2], "{case:?}");
    }
}

#[test]
fn workers_from_environment() {
    let run = |env: &str| {
        Command::new(env!("CARGO_BIN_EXE_coallab"))
            .args([
                "simulate",
                "external",
                "--kingman",
                "--n",
                "50",
                "--reps",
                "20",
            ])
            .env("COALLAB_WORKERS", env)
            .output()
            .unwrap()
    };
    let a = run("1");
    let b = run("3");
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn external_csv_rows() {
    let o = coallab(&[
        "simulate", "external", "--beta", "0.5", "1.5", "--n", "20", "--reps", "5",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("replicate,n,sigma,t_len,tau,y_at_sigma"));
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 6);
        assert_eq!(f[0], i.to_string());
        assert_eq!(f[1], "20");
        let sigma: usize = f[2].parse().unwrap();
        let tau: usize = f[4].parse().unwrap();
        assert!(sigma >= 1 && sigma <= tau);
        // shortest round-trip formatting
        let t: f64 = f[3].parse().unwrap();
        assert_eq!(t.to_string(), f[3]);
    }
}

#[test]
fn chain_csv_blocks_decrease_to_one() {
    let o = coallab(&[
        "simulate", "chain", "--beta", "0.5", "1.5", "--n", "30", "--reps", "2",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("replicate,step,blocks,lost,wait,time"));
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    for rep in ["0", "1"] {
        let blocks: Vec<usize> = rows
            .iter()
            .filter(|r| r[0] == rep)
            .map(|r| r[2].parse().unwrap())
            .collect();
        assert!(blocks.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(*blocks.last().unwrap(), 1);
    }
}

#[test]
fn limit_tables() {
    let o = coallab(&[
        "limits", "tabulate", "--law", "sigma", "--alpha", "1.5", "--lo", "0", "--hi", "1",
        "--points", "11",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,cdf,pdf"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (f[0], f[1])
        })
        .collect();
    assert_eq!(rows.len(), 11);
    for (x, cdf) in rows {
        assert!((cdf - (1.0 - (1.0 - x).powf(1.5))).abs() <= 1e-14);
    }

    let o = coallab(&[
        "limits",
        "tabulate",
        "--law",
        "kingman-block",
        "--lo",
        "0",
        "--hi",
        "4",
        "--points",
        "5",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("t,fraction\n"));
    assert!(text.lines().nth(1).unwrap().starts_with("0,1"));

    let o = coallab(&["limits", "tabulate", "--law", "sigma", "--alpha", "2.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn convergence_table_output() {
    let o = coallab(&[
        "verify",
        "convergence",
        "--beta",
        "0.5",
        "1.5",
        "--n-list",
        "100,1000,10000",
        "--reps",
        "4000",
        "--seed",
        "3",
        "--kind",
        "sigma",
    ]);
    let reports: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let arr = reports.as_array().unwrap();
    assert_eq!(arr.len(), 3);
    let stats: Vec<f64> = arr
        .iter()
        .map(|r| r["statistic"].as_f64().unwrap())
        .collect();
    let decreasing = stats.windows(2).all(|w| w[1] < w[0]);
    assert_eq!(o.status.code(), Some(if decreasing { 0 } else { 1 }));
}
