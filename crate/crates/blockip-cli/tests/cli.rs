use std::path::PathBuf;
use std::process::{Command, Output};

fn blockip(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_blockip"));
    cmd.args(args).env_remove("BLOCKIP_BUDGET");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn path(p: &PathBuf) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sat_instance_is_solved_by_the_direct_engine() {
    // each clause rules out one of eight assignments, so two clauses are satisfiable
    let file = scratch("sat.txt");
    let gen = blockip(&["gen", "sat3", "--vars", "3", "--clauses", "2", "--seed", "5", "-o", path(&file)], &[]);
    assert_eq!(gen.status.code(), Some(0), "{gen:?}");
    let text = std::fs::read_to_string(&file).unwrap();
    assert!(text.starts_with("# 3-CNF:"));
    let out = blockip(&["solve", "two-stage", path(&file), "--engine", "direct", "--solution"], &[]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let s = stdout(&out);
    assert!(s.starts_with("FEASIBLE\n") && s.contains("\nx "), "{s}");
}

#[test]
fn subset_sum_reports_the_optimum() {
    let file = scratch("subset.txt");
    let gen = blockip(&["gen", "subset-sum", "--items", "3,5,7", "--target", "8", "-o", path(&file)], &[]);
    assert_eq!(gen.status.code(), Some(0), "{gen:?}");
    let out = blockip(&["solve", "nfold", path(&file)], &[]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert_eq!(stdout(&out), "OPTIMUM 0\n");
    let out = blockip(&["gen", "subset-sum", "--items", "3,5,7", "--target", "4", "-o", path(&file)], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&blockip(&["solve", "nfold", path(&file)], &[])), "INFEASIBLE\n");
}

#[test]
fn input_errors_exit_with_code_two() {
    assert_eq!(blockip(&["solve", "nfold", "--no-such-flag", "x"], &[]).status.code(), Some(2));
    assert_eq!(blockip(&["solve", "nfold", path(&scratch("missing.txt"))], &[]).status.code(), Some(2));
    // two-stage bricks carry no cost vector
    let file = scratch("costed.txt");
    let gen = blockip(&["gen", "random", "two-stage", "--seed", "1", "-o", path(&file)], &[]);
    assert_eq!(gen.status.code(), Some(0), "{gen:?}");
    let text = std::fs::read_to_string(&file).unwrap();
    let b_line = text.lines().find(|l| l.trim_start().starts_with("b ")).unwrap().to_string();
    let indent: String = b_line.chars().take_while(|c| c.is_whitespace()).collect();
    let bad = text.replacen(&b_line, &format!("{b_line}\n{indent}c 1"), 1);
    std::fs::write(&file, bad).unwrap();
    let out = blockip(&["solve", "two-stage", path(&file)], &[]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("cost"));
}

#[test]
fn budgets_come_from_the_flag_or_the_environment() {
    let file = scratch("budget.txt");
    let gen = blockip(&["gen", "random", "two-stage", "--seed", "3", "--coupling", "50", "-o", path(&file)], &[]);
    assert_eq!(gen.status.code(), Some(0), "{gen:?}");
    let limited = blockip(&["solve", "two-stage", path(&file), "--budget", "1"], &[]);
    assert_eq!(limited.status.code(), Some(3), "{limited:?}");
    let limited = blockip(&["solve", "two-stage", path(&file)], &[("BLOCKIP_BUDGET", "1")]);
    assert_eq!(limited.status.code(), Some(3), "{limited:?}");
    let bad = blockip(&["solve", "two-stage", path(&file)], &[("BLOCKIP_BUDGET", "lots")]);
    assert_eq!(bad.status.code(), Some(2), "{bad:?}");
    let direct = blockip(&["solve", "two-stage", path(&file), "--engine", "direct"], &[("BLOCKIP_BUDGET", "1")]);
    assert_eq!(direct.status.code(), Some(0), "{direct:?}");
}

#[test]
fn generated_files_round_trip_through_the_shrink_transform() {
    let input = scratch("four.txt");
    let output = scratch("four_shrunk.txt");
    let gen = blockip(&["gen", "random", "fourblock", "--seed", "2", "--coupling", "5", "--bricks", "3", "-o", path(&input)], &[]);
    assert_eq!(gen.status.code(), Some(0), "{gen:?}");
    let out = blockip(&["transform", "shrink-4block", path(&input), path(&output)], &[]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let shrunk = std::fs::read_to_string(&output).unwrap();
    assert!(shrunk.starts_with("FOURBLOCK"), "{shrunk}");
    // analysing the shrunk file parses it again
    let out = blockip(&["analyze", path(&output)], &[]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout(&out).starts_with("MATRIX 0\n"));
}

#[test]
fn check_agrees_with_the_box_oracle() {
    let file = scratch("check.txt");
    let gen = blockip(&["gen", "random", "nfold", "--seed", "4", "-o", path(&file)], &[]);
    assert_eq!(gen.status.code(), Some(0), "{gen:?}");
    let out = blockip(&["check", path(&file), "--oracle-box", "6"], &[]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout(&out).lines().any(|l| l == "AGREE"), "{}", stdout(&out));
}
