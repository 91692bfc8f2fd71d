use invman_cli::main_with_args;

#[test]
fn exit_codes() {
    let (out, code) = main_with_args(["invman", "check", "--system", "decoupled_toy"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("# summary command=check status=pass"));

    let (out, code) = main_with_args(["invman", "check", "-s", "torus_family", "-p", "beta=0.2"]);
    assert_eq!(code, 3, "{out}");

    let (_, code) = main_with_args(["invman", "check", "-s", "no_such_system"]);
    assert_eq!(code, 2);
    let (_, code) = main_with_args(["invman", "check", "-s", "decoupled_toy", "--tol", "-1"]);
    assert_eq!(code, 2);
    let (_, code) = main_with_args(["invman", "frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn records_format_and_output_file() {
    let dir = std::env::temp_dir().join(format!("invman-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("graph.txt");
    let (out, code) = main_with_args([
        "invman", "manifold", "-s", "decoupled_toy", "--format", "records", "-o", path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("# summary command=manifold status=pass"));
    assert!(!out.contains("# columns:"));
    let body = std::fs::read_to_string(&path).unwrap();
    assert!(invman_core::manifold::GraphManifold::<f64>::from_table(&body).is_ok());
    std::fs::remove_dir_all(dir).ok();
}
