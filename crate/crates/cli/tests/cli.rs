use std::process::Command;

const S2: &str = "(1 + x1^2 + x2^2)/2";
const S2_RHO: &str = "(1 + x3^2 + x4^2)/2";

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Out {
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let lookup = |k: &str| env.iter().find(|(n, _)| *n == k).map(|(_, v)| v.to_string());
    let mut full = vec!["biconf"];
    full.extend_from_slice(args);
    let code = biconf::run(full, &lookup, &mut o, &mut e);
    Out {
        code,
        stdout: String::from_utf8(o).unwrap(),
        stderr: String::from_utf8(e).unwrap(),
    }
}

fn run(args: &[&str]) -> Out {
    run_env(args, &[])
}

#[test]
fn verify_sphere_product_passes() {
    let r = run(&["verify", "--sigma", S2, "--rho", S2_RHO]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let mut lines = r.stdout.lines();
    assert_eq!(lines.next(), Some("x1,x2,x3,x4,max_abs_diff,fd_asymmetry"));
    assert_eq!(lines.count(), 625);
    assert!(r.stderr.contains("status: ok"));
}

#[test]
fn nonpositive_field_is_numerical_failure() {
    let r = run(&["verify", "--sigma", "x1", "--rho", "1"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("not strictly positive"));
}

#[test]
fn wrong_constant_exceeds_tolerance() {
    let r = run(&["residual", "--sigma", S2, "--rho", S2_RHO, "--A", "0"]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("tolerance exceeded"));
    let r = run(&["residual", "--sigma", S2, "--rho", S2_RHO, "--A", "1"]);
    assert_eq!(r.code, 0);
    let header = r.stdout.lines().next().unwrap();
    assert_eq!(
        header,
        "x1,x2,x3,x4,i_1,i_2,ii,iii_13,iii_14,iii_23,iii_24,iv_3,iv_4,v,max_abs"
    );
}

#[test]
fn validation_errors_exit_one() {
    assert_eq!(run(&["solve-warped", "--gamma0", "0"]).code, 1);
    let r = run(&["verify", "--sigma", "1 +", "--rho", "1"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("byte 3"));
    assert_eq!(run(&["examples", "run", "nope"]).code, 1);
    assert_eq!(run(&["residual", "--sigma", "1", "--rho", "1"]).code, 1);
    assert_eq!(run(&["solve-family", "--alpha", "0", "--beta", "1"]).code, 1);
    assert_eq!(run(&["verify", "--sigma", "1", "--rho", "1", "--grid", "x9=0"]).code, 1);
    assert_eq!(run(&["solve-warped", "--C", "1", "--Ctilde", "2"]).code, 1);
    assert_eq!(run(&["no-such-command"]).code, 1);
}

#[test]
fn help_exits_zero() {
    let r = run(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("solve-family"));
}

#[test]
fn family_blow_up_and_expect_complete() {
    let r = run(&["solve-family", "--alpha", "1", "--beta", "-1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stderr.contains("termination: blow_up"));
    let r = run(&["solve-family", "--alpha", "1", "--beta", "-1", "--expect-complete"]);
    assert_eq!(r.code, 2);
    let r = run(&["solve-family", "--alpha", "1", "--beta", "1", "--rho0", "1"]);
    assert_eq!(r.code, 2);
}

#[test]
fn family_one_output() {
    let r = run(&["solve-family", "--alpha", "-1", "--beta", "1", "--t-max", "2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let mut lines = r.stdout.lines();
    assert_eq!(
        lines.next(),
        Some("t,rho,rho_prime,sigma,proj_residual_max,fd_einstein_residual")
    );
    assert_eq!(lines.count(), 2001);
    assert!(r.stderr.contains("A: -3.0000000000000000e0"));
    let fd = r.stdout.lines().skip(1).filter(|l| !l.ends_with(',')).count();
    assert!((15..=25).contains(&fd), "{fd} FD samples");
}

#[test]
fn warped_hyperbolic_conserves_constant() {
    let r = run(&["solve-warped", "--format", "json"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    let samples = v["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 1001);
    for key in ["t", "alpha", "gamma", "delta", "sigma", "A_integral"] {
        assert!(samples[0].get(key).is_some(), "{key}");
    }
    assert_eq!(v["summary"]["termination"], "reached_t_max");
    assert!((v["summary"]["A_initial"].as_f64().unwrap() + 3.0).abs() < 1e-14);
    let last = &samples[1000];
    assert!((last["alpha"].as_f64().unwrap() - 2.0).abs() < 1e-10);
}

#[test]
fn warped_singular_gamma_is_numerical() {
    let r = run(&["solve-warped", "--C", "20", "--t-max", "3"]);
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert!(r.stderr.contains("termination: singular_gamma"));
}

#[test]
fn csv_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let read = |name: &str| {
        let path = dir.path().join(name);
        let p = path.to_str().unwrap();
        let r = run(&["residual", "--sigma", S2, "--rho", S2_RHO, "--A", "1", "--out", p]);
        assert_eq!(r.code, 0);
        assert!(r.stdout.contains("status: ok"));
        std::fs::read(path).unwrap()
    };
    assert_eq!(read("a.csv"), read("b.csv"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        format!("# sphere product\nsigma = {S2}\nrho = {S2_RHO}\nA = 0\ngrid = x1=0,x2=0,x3=0,x4=-0.2:0.2:3\n"),
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let r = run(&["residual", "--config", c]);
    assert_eq!(r.code, 3);
    assert_eq!(r.stdout.lines().count(), 4);
    let r = run(&["residual", "--config", c, "--A", "1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);

    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(run(&["residual", "--config", c]).code, 1);
    assert_eq!(run(&["residual", "--config", "/nonexistent/x.cfg"]).code, 1);
}

#[test]
fn tolerance_precedence() {
    let args = ["solve-warped", "--t-max", "0.1"];
    assert_eq!(run(&args).code, 0);
    assert_eq!(run_env(&args, &[("BICONF_TOL", "1e-30")]).code, 3);
    let mut with_flag = args.to_vec();
    with_flag.extend(["--tol", "1e-6"]);
    assert_eq!(run_env(&with_flag, &[("BICONF_TOL", "1e-30")]).code, 0);
    assert_eq!(run_env(&args, &[("BICONF_TOL", "-1")]).code, 1);
}

#[test]
fn examples_list_and_run() {
    let r = run(&["examples", "list"]);
    assert_eq!(r.code, 0);
    for name in ["s2xs2", "h2xh2", "ricci-flat", "hyperbolic", "family-i", "family-ii"] {
        assert!(r.stdout.contains(name));
    }
    for name in ["h2xh2", "hyperbolic", "family-ii"] {
        let r = run(&["examples", "run", name]);
        assert_eq!(r.code, 0, "{name}: {}", r.stdout);
        assert!(!r.stdout.contains("FAIL"));
    }
    assert!(run(&["examples", "run", "family-ii"]).stdout.contains("incomplete"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_biconf");
    let out = Command::new(bin)
        .args(["residual", "--sigma", S2, "--rho", S2_RHO, "--A", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(bin).args(["examples", "run", "s2xs2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}
