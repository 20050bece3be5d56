use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lscd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lscd"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("lscd runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = lscd(dir, args);
    assert!(
        out.status.success(),
        "lscd {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

const SMALL: [&str; 8] = ["--dim", "16", "--window", "3", "--epochs", "3", "--seed", "4"];

fn with_small<'a>(args: &[&'a str]) -> Vec<&'a str> {
    args.iter().copied().chain(SMALL).collect()
}

fn kv_value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.trim_start().strip_prefix('=')))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn subcommands_chain_from_corpora_to_evaluation() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(
        d,
        &[
            "generate-synthetic",
            "--out",
            ".",
            "--sentences",
            "1000",
            "--vocab-size",
            "120",
        ],
    );
    for f in ["corpus1.txt", "corpus2.txt", "targets.txt", "gold.tsv"] {
        assert!(d.join(f).is_file(), "{f} missing");
    }

    ok(d, &with_small(&["train", "--corpus", "corpus1.txt", "--out", "m1.vec"]));
    ok(d, &with_small(&["train", "--corpus", "corpus2.txt", "--out", "m2.vec"]));
    assert!(d.join("m1.meta").is_file());
    ok(
        d,
        &[
            "align", "--method", "OP", "--model1", "m1.vec", "--model2", "m2.vec", "--out", "op",
        ],
    );

    ok(
        d,
        &with_small(&[
            "pretrain",
            "--source",
            "diachron",
            "--corpus1",
            "corpus1.txt",
            "--corpus2",
            "corpus2.txt",
            "--out",
            "pre.vec",
        ]),
    );
    ok(
        d,
        &with_small(&[
            "train",
            "--corpus",
            "corpus2.txt",
            "--init",
            "pre.vec",
            "--length-normalize",
            "--out",
            "m2i.vec",
        ]),
    );

    ok(
        d,
        &with_small(&[
            "align",
            "--method",
            "WI",
            "--corpus1",
            "corpus1.txt",
            "--corpus2",
            "corpus2.txt",
            "--targets",
            "targets.txt",
            "--out",
            "wi",
        ]),
    );
    let stdout = ok(
        d,
        &[
            "postprocess",
            "--spaces",
            "wi",
            "--transform",
            "sot",
            "--alpha",
            "-0.5",
            "--stacking",
            "SEP_PA",
        ],
    );
    assert!(stdout.contains("wi.sot_a-0.5+SEP_PA"), "{stdout}");

    ok(
        d,
        &[
            "score",
            "--spaces",
            "wi.sot_a-0.5+SEP_PA",
            "--targets",
            "targets.txt",
            "--out",
            "scores.tsv",
        ],
    );
    let report = ok(
        d,
        &[
            "evaluate",
            "--scores",
            "scores.tsv",
            "--gold",
            "gold.tsv",
            "--tsv",
            "eval.tsv",
        ],
    );
    let rho = kv_value(&report, "rho");
    assert!((-1.0..=1.0).contains(&rho));
    assert_eq!(kv_value(&report, "coverage"), 10.0);
    assert!(fs::read_to_string(d.join("eval.tsv"))
        .unwrap()
        .starts_with("task\trho\tcoverage\tdropped\nlscd\t"));

    let analysis = ok(d, &["analyze", "--spaces", "op", "--targets", "targets.txt"]);
    let lines: Vec<&str> = analysis.lines().collect();
    assert_eq!(lines.len(), 3, "{analysis}");
    for line in &lines[1..] {
        let iso: f64 = line.split('\t').nth(1).unwrap().parse().unwrap();
        assert!(iso > 0.0 && iso <= 1.0);
    }

    ok(
        d,
        &[
            "postprocess",
            "--matrix",
            "m1.vec",
            "--transform",
            "mcpcr",
            "--pcs",
            "2",
        ],
    );
    assert!(d.join("m1.mcpcr_m2.vec").is_file());
    let single = ok(d, &["analyze", "--matrix", "m1.mcpcr_m2.vec"]);
    assert_eq!(single.lines().count(), 2);
}

#[test]
fn sweep_then_plot_data() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(
        d,
        &[
            "generate-synthetic",
            "--out",
            "data",
            "--sentences",
            "600",
            "--vocab-size",
            "120",
        ],
    );
    fs::write(
        d.join("grid.conf"),
        "# two OP points with an SOT sweep\n\
         corpus1 = data/corpus1.txt\ncorpus2 = data/corpus2.txt\ntargets = data/targets.txt\ngold = data/gold.tsv\n\
         alignment = OP\ndims = 8, 12\nwindows = 3\nepochs = 2\n\
         postprocess = sot\nsot_alphas = -0.5, 0, 0.5\npersist = baseline\noutput = out\n",
    )
    .unwrap();
    let stdout = ok(d, &["sweep", "--config", "grid.conf"]);
    assert!(stdout.contains("configs_per_cell = 2"), "{stdout}");
    assert!(stdout.contains("rows = 8"), "{stdout}");
    assert!(stdout.contains("errors = 0"), "{stdout}");
    for f in ["results.tsv", "summary.tsv", "summary.txt", "errors.txt"] {
        assert!(d.join("out").join(f).is_file(), "{f} missing");
    }
    assert_eq!(fs::read_dir(d.join("out").join("points")).unwrap().count(), 2);

    let written = ok(
        d,
        &[
            "plot-data",
            "--results",
            "out/results.tsv",
            "--kind",
            "sot_curve",
            "--out",
            "plots",
        ],
    );
    assert_eq!(written.lines().count(), 2, "{written}");
    let first = written.lines().next().unwrap().trim_start_matches("wrote ").to_string();
    let series = fs::read_to_string(d.join(&first)).unwrap_or_else(|_| fs::read_to_string(&first).unwrap());
    assert_eq!(series.lines().count(), 4);
}

#[test]
fn errors_are_reported_not_panicked() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let out = lscd(d, &["train", "--corpus", "missing.txt", "--out", "m.vec"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.starts_with("error:") && stderr.contains("missing.txt"),
        "{stderr}"
    );

    fs::write(
        d.join("bad.conf"),
        "corpus1 = a\nwindows = 0x\ncorpus2 = b\ntargets = t\ngold = g\n",
    )
    .unwrap();
    let out = lscd(d, &["sweep", "--config", "bad.conf"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bad.conf:2: invalid"), "{stderr}");

    ok(
        d,
        &[
            "generate-synthetic",
            "--out",
            ".",
            "--sentences",
            "200",
            "--vocab-size",
            "60",
        ],
    );
    let out = lscd(
        d,
        &[
            "align",
            "--method",
            "WI",
            "--corpus1",
            "corpus1.txt",
            "--corpus2",
            "corpus2.txt",
            "--out",
            "wi",
        ],
    );
    assert!(!out.status.success(), "WI without targets must fail");
    let out = lscd(
        d,
        &[
            "align",
            "--method",
            "NO",
            "--corpus1",
            "corpus1.txt",
            "--corpus2",
            "corpus2.txt",
            "--out",
            "no",
        ],
    );
    assert!(!out.status.success(), "NO without pre-training must fail");
}
