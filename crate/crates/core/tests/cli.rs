use intsel::cli;
use intsel::{parse_stream, Instance};
use serde_json::Value;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str], input: &str) -> Outcome {
    let mut argv = vec!["intsel"];
    argv.extend_from_slice(args);
    let mut stdin = input.as_bytes();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(argv, &mut stdin, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json_lines(s: &str) -> Vec<Value> {
    s.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

const SMALL: &str = "n 20\n1 4\n3 6\n5 9 oc\n10 12\n12 15 oo\n";

#[test]
fn gen_uniform_parses_back() {
    let o = run(&["gen", "uniform", "--n", "100", "--count", "40", "--seed", "3"], "");
    assert_eq!(o.code, 0, "{}", o.stderr);
    let inst = parse_stream(&o.stdout).unwrap();
    assert_eq!(inst.n, 100);
    assert_eq!(inst.len(), 40);
}

#[test]
fn gen_uniform_fixed_length() {
    let o = run(&["gen", "uniform", "--n", "100", "--count", "30", "--lambda", "5"], "");
    assert_eq!(o.code, 0);
    let inst = parse_stream(&o.stdout).unwrap();
    assert!(inst.intervals.iter().all(|iv| iv.len() == 5));
}

#[test]
fn index_generators_hit_their_optima() {
    let member = run(&["gen", "index-samelen", "--n-bits", "6", "--set", "2,5", "--index", "5"], "");
    let absent = run(&["gen", "index-samelen", "--n-bits", "6", "--set", "2,5", "--index", "4"], "");
    assert_eq!(json_lines(&run(&["exact"], &member.stdout).stdout)[0]["alpha"], 3);
    assert_eq!(json_lines(&run(&["exact"], &absent.stdout).stdout)[0]["alpha"], 2);

    let args = ["gen", "index-general", "--n-bits", "5", "--k", "4", "--set", "1", "--index"];
    let hit = run(&[&args[..], &["1"]].concat(), "");
    let miss = run(&[&args[..], &["2"]].concat(), "");
    assert_eq!(json_lines(&run(&["exact"], &hit.stdout).stdout)[0]["alpha"], 9);
    assert_eq!(json_lines(&run(&["exact"], &miss.stdout).stdout)[0]["alpha"], 5);
}

#[test]
fn tree_cover_has_one_interval_per_node() {
    let o = run(&["gen", "tree-cover", "--n", "64"], "");
    let inst = parse_stream(&o.stdout).unwrap();
    assert_eq!(inst.len(), 127);
}

#[test]
fn select_reports_disjoint_solution() {
    let o = run(&["select"], SMALL);
    assert_eq!(o.code, 0);
    let v = &json_lines(&o.stdout)[0];
    assert_eq!(v["alpha"], 4);
    assert_eq!(v["success"], true);
    let sol = v["solution"].as_array().unwrap();
    assert_eq!(sol.len() as f64, v["output"].as_f64().unwrap());
}

#[test]
fn select_samelen_infers_lambda() {
    let o = run(&["select", "--algo", "samelen"], "n 20\n1 3\n4 6\n8 10\n");
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v = &json_lines(&o.stdout)[0];
    assert_eq!(v["lambda"], 2);
    assert_eq!(v["output"], 2.0);
}

#[test]
fn select_samelen_rejects_mixed_lengths() {
    let o = run(&["select", "--algo", "samelen"], "n 20\n1 3\n4 7\n");
    assert_eq!(o.code, 2);
    assert!(o.stderr.starts_with("error:"));
}

#[test]
fn estimate_oracle_is_in_bracket() {
    let o = run(&["estimate", "--oracle", "--eps", "0.2"], SMALL);
    assert_eq!(o.code, 0);
    let v = &json_lines(&o.stdout)[0];
    let out = v["output"].as_f64().unwrap();
    assert!((1.0..=4.0).contains(&out));
    assert!(v.get("wall_ms").is_none());
}

#[test]
fn estimate_timing_adds_wall_clock() {
    let o = run(&["estimate", "--oracle", "--timing"], SMALL);
    assert!(json_lines(&o.stdout)[0]["wall_ms"].is_number());
}

#[test]
fn estimate_samelen_is_seeded() {
    let inst = run(&["gen", "uniform", "--n", "300", "--count", "80", "--lambda", "4", "--seed", "9"], "").stdout;
    let args = ["estimate", "--algo", "samelen", "--eps", "0.45", "--seed", "5"];
    let a = run(&args, &inst);
    let b = run(&args, &inst);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn zero_length_stream_uses_distinct_counting() {
    let o = run(&["estimate", "--algo", "samelen"], "n 10\n2 2\n5 5\n5 5\n9 9\n");
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v = &json_lines(&o.stdout)[0];
    assert_eq!(v["algo"], "distinct-points");
    assert_eq!(v["output"], 3.0);
}

#[test]
fn trials_emit_reports_and_summary() {
    let o = run(&["trials", "--algo", "select-general", "--trials", "3"], SMALL);
    assert_eq!(o.code, 0);
    let lines = json_lines(&o.stdout);
    assert_eq!(lines.len(), 4);
    let summary = &lines[3];
    assert_eq!(summary["summary"], true);
    assert_eq!(summary["successes"], 3);
    let seeds: Vec<u64> = lines[..3].iter().map(|v| v["seed"].as_u64().unwrap()).collect();
    assert_eq!(seeds, [0, 1, 2]);
}

#[test]
fn trials_min_success_is_a_fraction() {
    let ok = run(&["trials", "--algo", "select-general", "--trials", "2", "--min-success", "1"], SMALL);
    assert_eq!(ok.code, 0);
    let bad = run(&["trials", "--algo", "select-general", "--min-success", "1.5"], SMALL);
    assert_eq!(bad.code, 2);
    assert!(bad.stderr.contains("min-success"));
}

#[test]
fn worker_count_does_not_change_output() {
    let inst = run(&["gen", "uniform", "--n", "200", "--count", "60", "--seed", "2"], "").stdout;
    let base = ["trials", "--algo", "oracle-general", "--trials", "4"];
    let one = run(&[&base[..], &["--workers", "1"]].concat(), &inst);
    let two = run(&[&base[..], &["--workers", "2"]].concat(), &inst);
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn output_file_is_written() {
    let dir = std::env::temp_dir().join(format!("intsel-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("inst.txt");
    let o = run(&["gen", "uniform", "--n", "40", "--count", "5", "--out", path.to_str().unwrap()], "");
    assert_eq!(o.code, 0);
    assert!(o.stdout.is_empty());
    let inst: Instance = parse_stream(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(inst.len(), 5);
    let e = run(&["exact", path.to_str().unwrap()], "");
    assert_eq!(json_lines(&e.stdout)[0]["instance"], "inst.txt");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn bad_input_and_parameters_exit_two() {
    assert_eq!(run(&["exact"], "1 x\n").code, 2);
    assert_eq!(run(&["exact"], "n 5\n4 9\n").code, 2);
    assert_eq!(run(&["exact"], "n 5\n3 3 oo\n").code, 2);
    assert_eq!(run(&["estimate", "--eps", "0.6"], SMALL).code, 2);
    assert_eq!(run(&["estimate", "--algo", "samelen", "--lambda", "0"], SMALL).code, 2);
    assert_eq!(run(&["trials", "--algo", "nope"], SMALL).code, 2);
    assert_eq!(run(&["exact", "/nonexistent/file"], "").code, 2);
    assert_eq!(run(&["frobnicate"], "").code, 2);
}
