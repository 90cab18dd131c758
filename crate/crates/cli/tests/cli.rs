use std::io::Write;
use std::path::PathBuf;
use std::process::Command;

use arrival_cli::{parse_args, Command as Cmd, Prob, UsageError};
use arrival_core::scalar::{format_ratio, parse_ratio, ratio};
use arrival_core::Mode;
use serde_json::Value;
use tempfile::NamedTempFile;

fn graph_file(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

const K3: &str = "p 1/2\nedge a b\nedge b c\nedge a c\n";
const P4: &str = "edge a b\nedge b c\nedge c d\nedge d e\n";

struct Run {
    code: i32,
    stdout: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap()
    }
}

fn arrival(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_arrival")).args(args).output().unwrap();
    Run { code: out.status.code().unwrap(), stdout: String::from_utf8(out.stdout).unwrap() }
}

fn path_of(f: &NamedTempFile) -> String {
    f.path().to_str().unwrap().to_string()
}

#[test]
fn exact_on_path() {
    let g = graph_file(P4);
    let run = arrival(&["exact", "-g", &path_of(&g), "-s", "a", "-t", "e", "--p", "1/3", "--mode", "rational"]);
    assert_eq!(run.code, 0);
    let doc = run.json();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["command"], "exact");
    assert_eq!(doc["mode"], "rational");
    assert_eq!(doc["inputs"]["p"], "1/3");
    assert_eq!(doc["result"]["expected"], "12/1");
}

#[test]
fn exact_with_q_and_float_mode() {
    let g = graph_file(P4);
    let run = arrival(&["exact", "-g", &path_of(&g), "-s", "a", "-t", "e", "--q", "0.75", "--mode", "float"]);
    assert_eq!(run.code, 0);
    let t = run.json()["result"]["expected"].as_f64().unwrap();
    assert!((t - 16.0).abs() < 1e-9);
}

#[test]
fn resistance_on_triangle() {
    let g = graph_file(K3);
    let run = arrival(&["resistance", "-g", &path_of(&g), "-s", "a", "-t", "c"]);
    assert_eq!(run.code, 0);
    assert_eq!(run.json()["result"]["rho"], "3/4");
}

#[test]
fn bounds_pass_through() {
    let g = graph_file(K3);
    let run = arrival(&["bounds", "-g", &path_of(&g), "-s", "a", "-t", "c", "--q", "1/2"]);
    assert_eq!(run.code, 0);
    let r = &run.json()["result"];
    assert_eq!(r["upper_distance"], "2/1");
    assert_eq!(r["lower_lyons_tau"], "4/3");
    assert_eq!(r["effective_resistance"], "2/3");
    assert_eq!(r["exact_T"], "16/9");
    assert_eq!(r["exact_tau"], "3/2");
    let graph = arrival_core::MultiGraph::parse(K3).unwrap();
    let lower = arrival_core::bounds::lower_bound_reliability(&graph, 0, 2, &ratio(1, 2)).unwrap();
    assert_eq!(r["lower_reliability"], format_ratio(&lower));
}

#[test]
fn pmf_defaults() {
    let g = graph_file(K3);
    let rational = arrival(&["pmf", "-g", &path_of(&g), "-s", "a", "-t", "c"]).json();
    assert_eq!(rational["result"]["pmf"].as_array().unwrap().len(), 41);
    assert_eq!(rational["result"]["pmf"][1], "1/2");

    let float = arrival(&["pmf", "-g", &path_of(&g), "-s", "a", "-t", "c", "--mode", "float"]).json();
    assert!(float["result"]["tail"].as_f64().unwrap() < 1e-9);

    let short = arrival(&["pmf", "-g", &path_of(&g), "-s", "a", "-t", "c", "--n-max", "3"]).json();
    assert_eq!(short["result"]["pmf"].as_array().unwrap().len(), 4);
}

#[test]
fn usage_errors_exit_two() {
    let g = graph_file(P4);
    let path = path_of(&g);
    for args in [
        vec!["exact", "-g", &path, "-s", "a", "--p", "1/3"],
        vec!["exact", "-g", &path, "-s", "a", "-t", "e", "--p", "1/3", "--q", "2/3"],
        vec!["exact", "-g", &path, "-s", "a", "-t", "e", "--unknown"],
        vec!["exact", "-g", &path, "-s", "a", "-t", "e", "--p", "half"],
        vec!["bounds", "-g", &path, "-s", "a", "-t", "e"],
        vec!["reduce-demo", "--lengths", "1,2,3", "--q", "1/2"],
        vec!["frobnicate"],
    ] {
        let run = arrival(&args);
        assert_eq!(run.code, 2, "{args:?}");
        let doc = run.json();
        assert_eq!(doc["error"]["kind"], "UsageError");
        let message = doc["error"]["message"].as_str().unwrap();
        assert!(!message.is_empty() && !message.contains('\n'));
    }
}

#[test]
fn computational_errors_exit_one() {
    let split = graph_file("p 1/2\nedge a b\nedge c d\n");
    let run = arrival(&["exact", "-g", &path_of(&split), "-s", "a", "-t", "d"]);
    assert_eq!(run.code, 1);
    assert_eq!(run.json()["error"]["kind"], "UnreachableTarget");

    let g = graph_file(K3);
    let run = arrival(&["exact", "-g", &path_of(&g), "-s", "a", "-t", "x"]);
    assert_eq!((run.code, run.json()["error"]["kind"].clone()), (1, "UnknownVertex".into()));

    let mixed = graph_file("edge a b 1/2\nedge b c 1/3\n");
    let run = arrival(&["resistance", "-g", &path_of(&mixed), "-s", "a", "-t", "c"]);
    assert_eq!(run.json()["error"]["kind"], "NonUniformProbabilities");

    let run = arrival(&["exact", "-g", "/nonexistent/graph.txt", "-s", "a", "-t", "c"]);
    assert_eq!((run.code, run.json()["error"]["kind"].clone()), (1, "IoError".into()));

    let run = arrival(&["ogf-eval", "-g", &path_of(&g), "-s", "a", "-t", "c", "--z", "4"]);
    assert_eq!(run.json()["error"]["kind"], "DivergentDiagonal");
}

#[test]
fn identical_requests_are_byte_identical() {
    let g = graph_file(K3);
    let path = path_of(&g);
    for args in [
        vec!["exact", "-g", &path, "-s", "a", "-t", "c"],
        vec!["simulate", "-g", &path, "-s", "a", "-t", "c", "--seed", "7", "--samples", "5000"],
        vec!["equiv-check", "-g", &path, "-s", "a", "-t", "c", "--samples", "5000"],
        vec!["conjecture-scan", "-g", &path, "-s", "a", "-t", "c"],
    ] {
        assert_eq!(arrival(&args).stdout, arrival(&args).stdout, "{args:?}");
    }
}

fn collect_strings<'a>(v: &'a Value, out: &mut Vec<&'a str>) {
    match v {
        Value::String(s) => out.push(s),
        Value::Array(xs) => xs.iter().for_each(|x| collect_strings(x, out)),
        Value::Object(m) => m.values().for_each(|x| collect_strings(x, out)),
        _ => {}
    }
}

#[test]
fn rational_strings_round_trip() {
    let g = graph_file(K3);
    let path = path_of(&g);
    for args in [
        vec!["pmf", "-g", &path, "-s", "a", "-t", "c", "--n-max", "12"],
        vec!["bounds", "-g", &path, "-s", "a", "-t", "c", "--q", "0.3"],
        vec!["reduce-demo", "--lengths", "2,3", "--q", "1/3", "--trunc", "10"],
        vec!["conjecture-scan", "-g", &path, "-s", "a", "-t", "c"],
    ] {
        let doc = arrival(&args).json();
        let mut strings = Vec::new();
        collect_strings(&doc["result"], &mut strings);
        let rationals: Vec<&str> = strings.into_iter().filter(|s| s.contains('/')).collect();
        assert!(!rationals.is_empty());
        for s in rationals {
            assert_eq!(format_ratio(&parse_ratio(s).unwrap()), s);
        }
    }
}

#[test]
fn pretty_only_changes_layout() {
    let g = graph_file(K3);
    let path = path_of(&g);
    let plain = arrival(&["bounds", "-g", &path, "-s", "a", "-t", "c", "--q", "1/2"]);
    let pretty = arrival(&["bounds", "-g", &path, "-s", "a", "-t", "c", "--q", "1/2", "--pretty"]);
    assert_ne!(plain.stdout, pretty.stdout);
    assert_eq!(plain.json(), pretty.json());
}

#[test]
fn special_and_reduction_commands() {
    let kn = arrival(&["special-kn", "--n", "3", "--q", "1/2"]).json();
    assert_eq!((kn["result"]["expected"].clone(), kn["result"]["rho"].clone()), ("16/9".into(), "3/4".into()));
    let pp = arrival(&["special-ppaths", "--lengths", "2,2"]).json();
    assert_eq!(pp["result"]["rho"], "5/4");
    let demo = arrival(&["reduce-demo", "--lengths", "2,3", "--q", "1/2", "--trunc", "12"]).json();
    assert_eq!(demo["result"]["series"]["matches_path"], true);
    assert_eq!(demo["result"]["parallel"]["matches_closed_form"], true);
}

#[test]
fn reliability_and_tau() {
    let g = graph_file(K3);
    let path = path_of(&g);
    let rel = arrival(&["reliability", "-g", &path, "-s", "a", "-t", "c", "--q", "1/2"]).json();
    assert_eq!(rel["result"]["coefficients"], serde_json::json!(["1", "0", "-2", "1"]));
    assert_eq!(rel["result"]["value"], "5/8");
    let tau = arrival(&["tau", "-g", &path, "-s", "a", "-t", "c", "--p", "1/2"]).json();
    assert_eq!(tau["result"]["tau"], "3/2");
}

#[test]
fn simulation_commands() {
    let g = graph_file(K3);
    let path = path_of(&g);
    let sim = arrival(&["simulate", "-g", &path, "-s", "a", "-t", "c", "--samples", "40000"]).json();
    let r = &sim["result"];
    let (mean, se) = (r["mean"].as_f64().unwrap(), r["stderr"].as_f64().unwrap());
    assert!((mean - 16.0 / 9.0).abs() <= 4.0 * se);
    let total: u64 = r["histogram"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum();
    assert_eq!(total + r["overflow"].as_u64().unwrap(), r["n"].as_u64().unwrap());

    let expo = arrival(&["simulate", "-g", &path, "-s", "a", "-t", "c", "--sampler", "exponential", "--p", "1/2"]);
    let r = &expo.json()["result"];
    assert!((r["mean"].as_f64().unwrap() - 1.5).abs() <= 4.0 * r["stderr"].as_f64().unwrap());

    let run = arrival(&["simulate", "-g", &path, "-s", "a", "-t", "c", "--sampler", "exponential"]);
    assert_eq!(run.code, 2);

    let eq = arrival(&["equiv-check", "-g", &path, "-s", "a", "-t", "c", "--samples", "20000"]).json();
    assert!(eq["result"]["two_sample"]["p_value"].as_f64().is_some());
}

#[test]
fn parse_args_builds_requests() {
    let req = parse_args(["arrival", "exact", "-g", "g.txt", "-s", "a", "-t", "b", "--p", "1/2", "--mode", "rational"])
        .unwrap();
    assert_eq!(req.mode, Mode::Rational);
    match req.command {
        Cmd::Exact { graph, prob, .. } => {
            assert_eq!(graph.path, PathBuf::from("g.txt"));
            assert_eq!((graph.s.as_str(), graph.t.as_str()), ("a", "b"));
            assert_eq!(prob, Some(Prob::P(ratio(1, 2))));
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(
        parse_args(["arrival", "exact", "-g", "g.txt", "-s", "a", "--p", "1/2"]),
        Err(UsageError::Invalid(_))
    ));
    assert!(matches!(parse_args(["arrival", "--help"]), Err(UsageError::Info(_))));
}

#[test]
fn help_exits_zero() {
    let run = arrival(&["--help"]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.contains("conjecture-scan"));
}

#[test]
fn topology_only_files_feed_edge_only_commands() {
    let g = graph_file("edge a b\nedge b c\nedge a c\n");
    let path = path_of(&g);
    let bounds = arrival(&["bounds", "-g", &path, "-s", "a", "-t", "c", "--q", "1/2"]);
    assert_eq!(bounds.code, 0);
    assert_eq!(bounds.json()["result"]["exact_T"], "16/9");
    assert_eq!(bounds.json()["result"]["lower_reliability"], "32/21");
    for cmd in ["resistance", "reliability", "conjecture-scan"] {
        assert_eq!(arrival(&[cmd, "-g", &path, "-s", "a", "-t", "c"]).code, 0, "{cmd}");
    }
    // commands that need probabilities still refuse the file
    assert_eq!(arrival(&["exact", "-g", &path, "-s", "a", "-t", "c"]).code, 1);
}
