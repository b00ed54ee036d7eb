use std::process::Command;

use cosetlab::cli;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("cosetlab").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn product_of_two_swaps() {
    let (code, out, _) = run(&[
        "product", "--family", "symmetric", "--alpha", "1", "--k", "1", "--N", "3", "--g", "(1 2)", "--h", "(1 2)",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["perm"], serde_json::json!([3, 2, 1, 4, 5]));
}

#[test]
fn infinite_product_of_unitaries_is_dense() {
    let (code, out, _) = run(&[
        "product", "--family", "unitary_orthogonal", "--alpha", "1", "--k", "1", "--g", "random_unitary", "--h",
        "identity", "--seed", "3",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["dim"], 3);
    let (code, _, err) = run(&[
        "product", "--family", "unitary_orthogonal", "--alpha", "1", "--k", "1", "--g", "random_unitary", "--h",
        "identity",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("--seed"), "{err}");
}

#[test]
fn membership_verdicts() {
    let (code, out, _) = run(&["membership", "--alpha", "1", "--k", "1", "--N", "1", "--x", "identity", "--target", "(1 2)"]);
    assert_eq!((code, out.trim()), (0, "{\"member\":false}"));
    let (code, out, _) = run(&["membership", "--alpha", "1", "--k", "1", "--N", "2", "--x", "(2 3)", "--target", "identity"]);
    assert_eq!((code, out.trim()), (0, "{\"member\":true}"));
}

#[test]
fn exact_sym_and_budget() {
    let (code, out, _) = run(&["exact-sym", "--alpha", "1", "--k", "1", "--N", "3", "--g", "(1 2)", "--h", "(1 2)"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let probs: Vec<&str> = v["atoms"].as_array().unwrap().iter().map(|a| a["prob"].as_str().unwrap()).collect();
    assert!(probs.contains(&"3/4") && probs.contains(&"1/4"), "{probs:?}");
    let (code, _, err) = run(&["exact-sym", "--alpha", "1", "--k", "1", "--N", "7", "--g", "(1 2)", "--h", "(1 2)"]);
    assert_eq!(code, 1);
    assert!(err.contains("budget"), "{err}");
}

#[test]
fn concentration_with_config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"family": "symmetric", "alpha": 1, "k": 1, "N_list": [2], "epsilon_list": [0.5],
            "samples": 50, "seed": 5, "g_spec": "(1 2)", "h_spec": "(1 2)"}"#,
    )
    .unwrap();
    let out = dir.path().join("r.csv");
    let args = ["concentration", "--config", cfg.to_str().unwrap(), "--N", "3", "--out", out.to_str().unwrap()];
    let (code, stdout, _) = run(&args);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "family,alpha,k,m,N,epsilon,samples,hits,fraction,ci_low,ci_high,median_dist,mean_dist,seed,runtime_s"
    );
    assert!(lines.next().unwrap().starts_with("symmetric,1,1,1,3,0.5,50,"));
    run(&args);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), text);
}

#[test]
fn config_errors_exit_with_one() {
    let (code, _, err) = run(&["concentration", "--config", "missing.json"]);
    assert_eq!(code, 1);
    assert!(err.contains("missing.json"), "{err}");
    let (code, _, err) = run(&["block-decay", "--k", "2", "--N", "20", "--samples", "50"]);
    assert_eq!(code, 1);
    assert!(err.contains("--seed"), "{err}");
    assert_eq!(run(&["sample", "--bogus"]).0, 1);
    assert_eq!(run(&["block-decay", "--k", "2", "--N", "20", "--samples", "10", "--seed", "1"]).0, 1);
}

#[test]
fn help_lists_every_subcommand_with_an_example() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    for sub in ["sample", "product", "membership", "exact-sym", "block-decay", "concentration"] {
        assert!(out.contains(sub), "{sub} missing from help");
        let (code, help, _) = run(&[sub, "--help"]);
        assert_eq!(code, 0);
        assert!(help.contains(&format!("Example:\n  cosetlab {sub}")), "{sub}");
    }
}

#[test]
fn binary_exit_codes_and_thread_cap() {
    let bin = env!("CARGO_BIN_EXE_cosetlab");
    let status = Command::new(bin).args(["concentration", "--config", "missing.json"]).output().unwrap();
    assert_eq!(status.status.code(), Some(1));
    assert!(status.stdout.is_empty());
    let args = ["block-decay", "--k", "1", "--N", "5", "--samples", "30", "--seed", "2", "--format", "json"];
    let one = Command::new(bin).args(args).env("COSETLAB_THREADS", "1").output().unwrap();
    let many = Command::new(bin).args(args).output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
    let bad = Command::new(bin).args(args).env("COSETLAB_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn sample_is_reproducible() {
    let args = ["sample", "--family", "unitary_conjugation", "--alpha", "1", "--k", "1", "--N", "2", "--of", "k", "--seed", "9"];
    let (code, a, _) = run(&args);
    assert_eq!(code, 0);
    assert_eq!(run(&args).1, a);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["dim"], 4);
}
