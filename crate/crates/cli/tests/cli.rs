use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn graphmark(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphmark")).current_dir(dir).args(args).output().expect("spawn graphmark")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = graphmark(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    text.split_whitespace()
        .find_map(|tok| tok.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in {text:?}"))
}

const PLG: [&str; 10] = ["--model", "plg", "--n", "5000", "--m", "120", "--w", "8", "--gamma", "2.7"];

fn generate(dir: &Path, seed: &str, out: &str) -> String {
    let mut args = vec!["generate"];
    args.extend(PLG);
    args.extend(["--seed", seed, "-o", out]);
    ok(dir, &args)
}

#[test]
fn generate_reports_size_and_writes_header() {
    let dir = tempfile::tempdir().unwrap();
    let summary = generate(dir.path(), "1", "g.el");
    let text = fs::read_to_string(dir.path().join("g.el")).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, format!("# nodes: {} edges: {}", value(&summary, "nodes"), value(&summary, "edges")));
    let edges: usize = value(&summary, "edges").parse().unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), edges);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d, "4", "a.el");
    generate(d, "4", "b.el");
    assert_eq!(fs::read(d.join("a.el")).unwrap(), fs::read(d.join("b.el")).unwrap());
    generate(d, "5", "c.el");
    assert_ne!(fs::read(d.join("a.el")).unwrap(), fs::read(d.join("c.el")).unwrap());

    let fit = |_: ()| ok(d, &["fit", "-i", "a.el", "--resamples", "100", "--seed", "2"]);
    assert_eq!(fit(()), fit(()));

    fs::write(d.join("exp.kv"), "model=er\nn=60\np=0.5\ncopies=3\ntrials=2\nsweep=0,0.01\nseed=1\n").unwrap();
    let a = ok(d, &["experiment", "--config", "exp.kv"]);
    let b = ok(d, &["experiment", "--config", "exp.kv"]);
    assert_eq!(a, b);
    assert!(a.starts_with("fraction,success_rate,dk2_deviation,"));
    assert_eq!(a.lines().count(), 3);
}

#[test]
fn mark_then_identify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let gen = ["generate", "--model", "plg", "--n", "10000", "--m", "1000", "--w", "20", "--gamma", "2.75", "-o", "g.el"];
    ok(d, &gen);
    ok(d, &["keygen", "--x", "438", "--n", "10000", "--ell", "219", "--seed", "3", "-o", "key.txt"]);
    let classes = ["--high", "64", "--medium", "374"];
    let mut args = vec!["mark", "-i", "g.el", "--key", "key.txt", "--copies", "4", "--seed", "9", "--out-dir", "out"];
    args.extend(classes);
    assert_eq!(ok(d, &args).lines().count(), 4);
    let ids = ["out/copy_0.id", "out/copy_1.id", "out/copy_2.id", "out/copy_3.id"];
    for i in 0..4 {
        let suspect = format!("out/copy_{i}.el");
        let mut args = vec!["identify", "--original", "g.el", "--suspect", &suspect, "--key", "key.txt", "--ids"];
        args.extend(ids);
        args.extend(classes);
        let res = ok(d, &args);
        assert_eq!(value(&res, "result"), "found");
        assert_eq!(value(&res, "index"), i.to_string());
        assert!(value(&res, "distance").parse::<usize>().unwrap() <= 10, "{res}");
    }
    // a cutoff below the observed distance turns the answer into bottom
    let mut args = vec!["identify", "--original", "g.el", "--suspect", "g.el", "--key", "key.txt", "--max-distance", "0"];
    args.extend(classes);
    args.extend(["--ids", "out/copy_0.id"]);
    assert_eq!(value(&ok(d, &args), "result"), "bottom");
}

#[test]
fn attack_and_dk2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d, "2", "g.el");
    let summary = ok(d, &["attack", "-i", "g.el", "--pairs", "50", "--seed", "1", "-o", "h.el"]);
    assert_eq!(value(&summary, "edit_distance"), "50");
    let same = ok(d, &["dk2", "-i", "g.el", "--compare", "g.el"]);
    assert_eq!(value(&same, "deviation"), "0");
    let diff = ok(d, &["dk2", "-i", "g.el", "--compare", "h.el"]);
    assert!(value(&diff, "deviation").parse::<f64>().unwrap() > 0.0);
    let series = ok(d, &["dk2", "-i", "g.el"]);
    let edges: u64 = series.lines().map(|l| l.rsplit(' ').next().unwrap().parse::<u64>().unwrap()).sum();
    let header = fs::read_to_string(d.join("g.el")).unwrap();
    assert!(header.starts_with(&format!("# nodes: 5000 edges: {edges}\n")));

    fs::write(d.join("atk.kv"), "attack=random\nprob=0\n").unwrap();
    let none = ok(d, &["attack", "-i", "g.el", "--config", "atk.kv", "-o", "same.el"]);
    assert_eq!(value(&none, "edit_distance"), "0");
}

#[test]
fn fit_from_sample_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let samples: String = (1..=400u64).map(|i| format!("{}\n", 1 + 4000 / (i * i))).collect();
    fs::write(d.join("s.txt"), samples).unwrap();
    let out = ok(d, &["fit", "--samples", "s.txt", "--resamples", "0"]);
    assert_eq!(value(&out, "pvalue"), "none");
    assert_eq!(value(&out, "n"), "400");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(graphmark(d, &["generate", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(graphmark(d, &[]).status.code(), Some(2));
    let bad = graphmark(d, &["generate", "--model", "plg", "--n", "100", "--m", "10", "--w", "3", "--gamma", "2.5"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).starts_with("error: "));
    assert_eq!(graphmark(d, &["analyze", "-i", "missing.el"]).status.code(), Some(1));
    fs::write(d.join("bad.kv"), "model=er\nn=10\nbogus=1\n").unwrap();
    assert_eq!(graphmark(d, &["experiment", "--config", "bad.kv"]).status.code(), Some(1));
}
