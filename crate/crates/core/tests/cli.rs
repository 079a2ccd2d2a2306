//! Black-box tests of the command-line binary: workflows and exit codes.

mod common;

use std::path::Path;
use std::process::{Command, Output};

fn parsieve(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parsieve"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn assert_code(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}


#[test]
fn full_workflow_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    common::write_lines(d.join("de.txt"), &common::gen_src_lines(600, 1));
    common::write_lines(d.join("en.txt"), &common::gen_trg_lines(600, 2));
    common::write_lines(d.join("fr.txt"), &common::gen_third_lines(600, 3));
    let seed_bitext = common::gen_clean_bitext(1200, 4);
    common::write_bitext(d.join("seed.src"), d.join("seed.trg"), &seed_bitext);
    let rev: Vec<_> = seed_bitext
        .iter()
        .map(|p| parsieve::corpus::SentencePair {
            id: p.id,
            src_raw: p.trg_raw.clone(),
            trg_raw: p.src_raw.clone(),
        })
        .collect();
    common::write_bitext(d.join("seed-rev.src"), d.join("seed-rev.trg"), &rev);
    common::write_bitext(d.join("clean.src"), d.join("clean.trg"), &common::gen_clean_bitext(500, 5));

    assert_code(
        &parsieve(&["train-langid", "de=de.txt", "en=en.txt", "fr=fr.txt", "--out", "gate.langid"], d),
        0,
    );
    assert_code(
        &parsieve(&["train-ibm1", "--src", "seed.src", "--trg", "seed.trg", "--out", "de-en.ibm1"], d),
        0,
    );
    assert_code(
        &parsieve(
            &["train-ibm1", "--src", "seed-rev.src", "--trg", "seed-rev.trg", "--out", "en-de.ibm1"],
            d,
        ),
        0,
    );
    assert_code(&parsieve(&["train-lm", "en.txt", "--order", "3", "--out", "clean.lm"], d), 0);

    assert_code(
        &parsieve(
            &[
                "bench-generate",
                "--src",
                "clean.src",
                "--trg",
                "clean.trg",
                "--third",
                "fr.txt",
                "--seed",
                "7",
                "--out-prefix",
                "bench",
            ],
            d,
        ),
        0,
    );
    // out-of-domain model from a disjoint noisy sample: a count-based
    // model trained on the scored lines themselves would memorize them
    common::write_bitext(d.join("raw.src"), d.join("raw.trg"), &common::gen_clean_bitext(500, 6));
    assert_code(
        &parsieve(
            &[
                "bench-generate",
                "--src",
                "raw.src",
                "--trg",
                "raw.trg",
                "--third",
                "fr.txt",
                "--seed",
                "8",
                "--out-prefix",
                "sample",
            ],
            d,
        ),
        0,
    );
    assert_code(&parsieve(&["train-lm", "sample.trg", "--order", "3", "--out", "noisy.lm"], d), 0);

    std::fs::write(
        d.join("pipeline.conf"),
        "scorer gate\nkind langid\nmodel gate.langid\nsrc-lang de\ntrg-lang en\n\n\
         scorer adq\nkind adq\nfwd-model de-en.ibm1\nbwd-model en-de.ibm1\n\n\
         scorer dom\nkind dom\nin-model clean.lm\nout-model noisy.lm\ncutoff 0.25\n",
    )
    .unwrap();
    assert_code(
        &parsieve(
            &[
                "score",
                "--config",
                "pipeline.conf",
                "--src",
                "bench.src",
                "--trg",
                "bench.trg",
                "--out",
                "bench.tsv",
                "--totals",
                "bench.scores",
            ],
            d,
        ),
        0,
    );

    let stats = parsieve(&["stats", "--scores", "bench.scores"], d);
    assert_code(&stats, 0);
    let stats_text = String::from_utf8_lossy(&stats.stdout).to_string();
    assert!(stats_text.contains("count 500"), "got: {stats_text}");

    let eval = parsieve(&["bench-eval", "--scores", "bench.scores", "--labels", "bench.labels"], d);
    assert_code(&eval, 0);
    let eval_text = String::from_utf8_lossy(&eval.stdout).to_string();
    assert!(eval_text.contains("auc 0."), "got: {eval_text}");

    let select = parsieve(
        &[
            "select",
            "--scores",
            "bench.scores",
            "--src",
            "bench.src",
            "--trg",
            "bench.trg",
            "--budget-words",
            "800",
            "--out-prefix",
            "subset",
        ],
        d,
    );
    assert_code(&select, 0);
    let select_text = String::from_utf8_lossy(&select.stdout).to_string();
    assert!(select_text.contains("threshold "), "got: {select_text}");
    assert!(select_text.contains("exhausted false"), "got: {select_text}");
    let words: u64 = select_text
        .lines()
        .find_map(|l| l.strip_prefix("words "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(words >= 800);
    assert!(d.join("subset.src").exists() && d.join("subset.trg").exists());

    assert_code(
        &parsieve(&["merge-scores", "bench.scores", "bench.scores", "--out", "merged.scores"], d),
        0,
    );
}

#[test]
fn retraining_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    common::write_lines(d.join("de.txt"), &common::gen_src_lines(300, 11));
    common::write_lines(d.join("en.txt"), &common::gen_trg_lines(300, 12));
    common::write_bitext(d.join("b.src"), d.join("b.trg"), &common::gen_clean_bitext(400, 13));

    for round in ["one", "two"] {
        assert_code(
            &parsieve(
                &["train-langid", "de=de.txt", "en=en.txt", "--out", &format!("l.{round}")],
                d,
            ),
            0,
        );
        assert_code(
            &parsieve(
                &["train-ibm1", "--src", "b.src", "--trg", "b.trg", "--out", &format!("i.{round}")],
                d,
            ),
            0,
        );
        assert_code(
            &parsieve(&["train-lm", "en.txt", "--out", &format!("m.{round}")], d),
            0,
        );
    }
    for stem in ["l", "i", "m"] {
        let a = std::fs::read(d.join(format!("{stem}.one"))).unwrap();
        let b = std::fs::read(d.join(format!("{stem}.two"))).unwrap();
        assert_eq!(a, b, "artifact {stem} differs between runs");
    }
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // unknown flag
    assert_code(&parsieve(&["stats", "--bogus"], d), 1);
    // missing required flag
    assert_code(&parsieve(&["select", "--scores", "x"], d), 1);
    // one language is not enough
    common::write_lines(d.join("en.txt"), &common::gen_trg_lines(10, 1));
    assert_code(&parsieve(&["train-langid", "en=en.txt", "--out", "m"], d), 1);
    // malformed sample spec
    assert_code(&parsieve(&["train-langid", "ennoequals", "x=y", "--out", "m"], d), 1);
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("a.txt"), "s1\ns2\ns3\n").unwrap();
    std::fs::write(d.join("b.txt"), "t1\nt2\n").unwrap();
    // line-count mismatch during training
    let out = parsieve(&["train-ibm1", "--src", "a.txt", "--trg", "b.txt", "--out", "m"], d);
    assert_code(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("mismatch"));

    // unparseable score file
    std::fs::write(d.join("bad.scores"), "0.5\nnope\n").unwrap();
    let out = parsieve(&["stats", "--scores", "bad.scores"], d);
    assert_code(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));

    // missing corpus file
    assert_code(&parsieve(&["stats", "--scores", "missing.scores"], d), 2);
}

#[test]
fn model_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    common::write_bitext(d.join("c.src"), d.join("c.trg"), &common::gen_clean_bitext(5, 2));

    // config referencing a missing model artifact
    std::fs::write(
        d.join("p.conf"),
        "scorer gate\nkind langid\nmodel nothere.langid\nsrc-lang de\ntrg-lang en\n",
    )
    .unwrap();
    let out = parsieve(
        &[
            "score", "--config", "p.conf", "--src", "c.src", "--trg", "c.trg", "--out", "o.tsv",
            "--totals", "o.scores",
        ],
        d,
    );
    assert_code(&out, 3);

    // corrupt artifact with a future format version
    std::fs::write(d.join("future.langid"), "parsieve-langid 99\n").unwrap();
    std::fs::write(
        d.join("p2.conf"),
        "scorer gate\nkind langid\nmodel future.langid\nsrc-lang de\ntrg-lang en\n",
    )
    .unwrap();
    let out = parsieve(
        &[
            "score", "--config", "p2.conf", "--src", "c.src", "--trg", "c.trg", "--out", "o.tsv",
            "--totals", "o.scores",
        ],
        d,
    );
    assert_code(&out, 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("newer"));
}

#[test]
fn score_ablation_flags_change_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    common::write_bitext(d.join("seed.src"), d.join("seed.trg"), &common::gen_clean_bitext(500, 31));
    let rev: Vec<_> = common::gen_clean_bitext(500, 31)
        .into_iter()
        .map(|p| parsieve::corpus::SentencePair { id: p.id, src_raw: p.trg_raw, trg_raw: p.src_raw })
        .collect();
    common::write_bitext(d.join("rev.src"), d.join("rev.trg"), &rev);
    assert_code(
        &parsieve(&["train-ibm1", "--src", "seed.src", "--trg", "seed.trg", "--out", "f.ibm1"], d),
        0,
    );
    assert_code(
        &parsieve(&["train-ibm1", "--src", "rev.src", "--trg", "rev.trg", "--out", "b.ibm1"], d),
        0,
    );
    // score a truncated pair where the two terms differ
    std::fs::write(d.join("x.src"), "das haus ist groß und schön\n").unwrap();
    std::fs::write(d.join("x.trg"), "the house is\n").unwrap();
    std::fs::write(d.join("a.conf"), "scorer adq\nkind adq\nfwd-model f.ibm1\nbwd-model b.ibm1\n")
        .unwrap();

    let mut totals = Vec::new();
    for (name, extra) in [
        ("full", None),
        ("noabs", Some("--no-abs-difference")),
        ("noce", Some("--no-ce-weighting")),
    ] {
        let totals_name = format!("x.{name}.scores");
        let mut args = vec![
            "score", "--config", "a.conf", "--src", "x.src", "--trg", "x.trg", "--out",
            "x.tsv", "--totals", &totals_name,
        ];
        if let Some(flag) = extra {
            args.push(flag);
        }
        assert_code(&parsieve(&args, d), 0);
        totals.push(
            std::fs::read_to_string(d.join(&totals_name)).unwrap().trim().parse::<f64>().unwrap(),
        );
    }
    let (full, noabs, noce) = (totals[0], totals[1], totals[2]);
    // dropping a penalty term can only raise the score
    assert!(noabs > full, "noabs {noabs} vs full {full}");
    assert!(noce > full, "noce {noce} vs full {full}");
}
