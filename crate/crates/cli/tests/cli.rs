use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const PATH3: &str = "# unit path\n0 1 1.0\n1 2 1.0\n";

fn poa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poa")).args(args).output().unwrap()
}

fn poa_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poa"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_columns(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let mut cols = vec![Vec::new(); header.len()];
    for line in lines {
        for (c, v) in cols.iter_mut().zip(line.split(',')) {
            c.push(v.parse().unwrap());
        }
    }
    (header, cols)
}

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
    }
}

#[test]
fn poa_on_the_three_path() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "path.txt", PATH3);
    let out = dir.path().join("out");
    let o = poa(&["poa", "--input", s(&input), "--k", "2", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, cols) = csv_columns(&out.join("po.csv"));
    assert_eq!(header, ["po1", "po2"]);
    assert_close(&cols[0], &[1.0, 0.0, -1.0], 1e-9);
    assert_close(&cols[1], &[-1.0 / 3.0, 2.0 / 3.0, -1.0 / 3.0], 1e-9);

    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("poa.json")).unwrap()).unwrap();
    assert_eq!(json["schema"], 1);
    assert_eq!(json["found"], 2);
    assert!((json["observables"][1]["variance"].as_f64().unwrap() - 2.0 / 9.0).abs() < 1e-9);
}

#[test]
fn distance_csv_gives_the_same_observables() {
    let dir = TempDir::new().unwrap();
    let edges = write(dir.path(), "path.txt", PATH3);
    let matrix = write(dir.path(), "path.csv", "0,1,2\n1,0,1\n2,1,0\n");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(poa(&["poa", "--input", s(&edges), "--out", s(&a)]).status.success());
    let o = poa(&[
        "poa",
        "--input",
        s(&matrix),
        "--format",
        "distance-csv",
        "--validate",
        "--out",
        s(&b),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(a.join("po.csv")).unwrap(), fs::read(b.join("po.csv")).unwrap());

    // no graph is retained for matrix input
    let o = poa(&[
        "poa",
        "--input",
        s(&matrix),
        "--format",
        "distance-csv",
        "--mode",
        "edges",
        "--out",
        s(&b),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn embed_truncates_with_a_warning() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "path.txt", PATH3);
    let out = dir.path().join("out");
    let o = poa(&["embed", "--input", s(&input), "--k", "3", "--out", s(&out), "--svg"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning: only 2 of 3"));
    let (header, cols) = csv_columns(&out.join("embedding.csv"));
    assert_eq!(header, ["x1", "x2"]);
    assert_eq!(cols[0].len(), 3);
    let svg = fs::read_to_string(out.join("embedding.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 3);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("distortion.json")).unwrap()).unwrap();
    assert_eq!(json["schema"], 1);
    assert_eq!(json["norm"], "linf");
    assert_eq!(json["counts"].as_array().unwrap().len(), 30);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.txt", "0 1 1.0\n0 x 1\n");
    let o = poa(&["poa", "--input", s(&bad), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let broken = write(dir.path(), "tri.csv", "0,1,5\n1,0,1\n5,1,0\n");
    let o = poa(&[
        "poa",
        "--input",
        s(&broken),
        "--format",
        "distance-csv",
        "--validate",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));

    let missing = dir.path().join("nope.txt");
    assert_eq!(poa(&["poa", "--input", s(&missing)]).status.code(), Some(2));

    let input = write(dir.path(), "path.txt", PATH3);
    assert_eq!(poa(&["poa", "--input", s(&input), "--k", "0"]).status.code(), Some(2));
    let short = write(dir.path(), "mu.txt", "1\n1\n");
    let o = poa(&[
        "poa",
        "--input",
        s(&input),
        "--measure",
        s(&short),
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stability_with_equal_measures_passes() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "path.txt", PATH3);
    let mu = write(dir.path(), "mu.txt", "1\n2\n1\n");
    let out = dir.path().join("out");
    let o = poa(&[
        "stability",
        "--input",
        s(&input),
        "--mu",
        s(&mu),
        "--nu",
        s(&mu),
        "--out",
        s(&out),
        "--random",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("stability.json")).unwrap()).unwrap();
    assert_eq!(json["schema"], 1);
    assert_eq!(json["w1"], 0.0);
    assert_eq!(json["pass"], true);

    let nu = write(dir.path(), "nu.txt", "1\n0\n0\n");
    let o = poa(&["stability", "--input", s(&input), "--nu", s(&nu), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("stability.json")).unwrap()).unwrap();
    assert!((json["w1"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn signal_round_trip() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "path.txt", PATH3);
    let out = dir.path().join("out");
    assert!(poa(&["poa", "--input", s(&input), "--k", "2", "--out", s(&out)])
        .status
        .success());
    let signal = write(dir.path(), "f.txt", "1\n2\n3\n");
    let po = out.join("po.csv");
    let o = poa(&[
        "signal",
        "analyze",
        "--input",
        s(&input),
        "--signal",
        s(&signal),
        "--po",
        s(&po),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, cols) = csv_columns(&out.join("spectrum.csv"));
    assert_eq!(header, ["index", "coefficient"]);
    assert_close(&cols[1], &[2.0, -2.0 * 1.5_f64.sqrt() / 3.0, 0.0], 1e-9);

    let spectrum = out.join("spectrum.csv");
    let args = [
        "signal",
        "synthesize",
        "--input",
        s(&input),
        "--spectrum",
        s(&spectrum),
        "--po",
        s(&po),
    ];
    let o = poa(&[&args[..], &["--k", "2", "--out", s(&out)]].concat());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let back: Vec<f64> = fs::read_to_string(out.join("signal.txt"))
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    assert_close(&back, &[1.0, 2.0, 3.0], 1e-7);

    // constant term only
    let o = poa(&[&args[..], &["--k", "1", "--out", s(&out)]].concat());
    assert!(o.status.success());
}

#[test]
fn extend_midpoint_queries() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "pair.txt", "0 1 2.0\n");
    let values = write(dir.path(), "phi.txt", "0\n2\n");
    let queries = write(dir.path(), "q.csv", "1,1\n0,2\n3,1\n");
    let out = dir.path().join("out");
    let o = poa(&[
        "extend",
        "--input",
        s(&input),
        "--values",
        s(&values),
        "--queries",
        s(&queries),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, cols) = csv_columns(&out.join("extension.csv"));
    assert_eq!(header, ["query", "upper", "lower", "balanced"]);
    assert_eq!(cols[1], [1.0, 0.0, 3.0]);
    assert_eq!(cols[2], [1.0, 0.0, 1.0]);
    assert_eq!(cols[3], [1.0, 0.0, 2.0]);
}

#[test]
fn mds_and_distort_outputs() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "cycle.txt", "0 1 1\n1 2 1\n2 3 1\n3 0 1\n");
    let out = dir.path().join("out");
    let o = poa(&["distort", "--input", s(&input), "--k", "2", "--out", s(&out), "--svg"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("comparison.json")).unwrap()).unwrap();
    assert_eq!(json["poa"]["bin_edges"], json["mds"]["bin_edges"]);
    assert_eq!(json["mds"]["norm"], "l2");
    assert!(out.join("mds_embedding.svg").exists());

    let o = poa(&["mds", "--input", s(&input), "--k", "9", "--out", s(&out)]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("capped at 3"));
    let (header, _) = csv_columns(&out.join("mds_embedding.csv"));
    assert_eq!(header.len(), 3);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_threads() {
    let dir = TempDir::new().unwrap();
    let mut text = String::new();
    // a small deterministic graph with a few cycles
    for i in 0..24usize {
        text.push_str(&format!("{} {} {}\n", i, (i + 1) % 24, 1.0 + (i % 5) as f64 * 0.25));
        if i % 4 == 0 {
            text.push_str(&format!("{} {} {}\n", i, (i + 9) % 24, 2.5));
        }
    }
    let input = write(dir.path(), "g.txt", &text);
    let mut outputs = Vec::new();
    for (run, threads) in ["1", "4", "4"].iter().enumerate() {
        let out = dir.path().join(format!("run{run}"));
        let o = poa_env(
            &[
                "embed",
                "--input",
                s(&input),
                "--k",
                "3",
                "--restarts",
                "6",
                "--seed",
                "7",
                "--out",
                s(&out),
                "--svg",
            ],
            threads,
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(["embedding.csv", "distortion.json", "embedding.svg"].map(|f| fs::read(out.join(f)).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}
