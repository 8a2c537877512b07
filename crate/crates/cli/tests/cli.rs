use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
        .to_str()
        .unwrap()
        .to_string()
}

fn linweb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linweb"))
        .args(args)
        .env_remove("LINWEB_PATH")
        .output()
        .unwrap()
}

fn with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_linweb"))
        .args(args)
        .env_remove("LINWEB_PATH")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn max_query() {
    let o = linweb(&["--consult", &corpus("max.lw"), "-q", "max(9,3,M)"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "M = 9\n");
}

#[test]
fn max_second_alternative_with_all() {
    let o = linweb(&["-c", &corpus("max.lw"), "-q", "max(3,9,M)", "--all"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "M = 9\nno more answers\n");
}

#[test]
fn mapped_lists_module() {
    let map = format!("www.dau.com/lists={}", corpus("lists.lw"));
    let o = linweb(&[
        "--offline",
        "--map",
        &map,
        "-q",
        "\"www.dau.com/lists\" => uni([a,b],[b,c],Z)",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "Z = [a,b,c]\n");
}

#[test]
fn map_file() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("modules.map");
    std::fs::write(
        &map,
        format!(
            "% local copies\nwww.dau.com/lists\t{}\n",
            corpus("lists.lw")
        ),
    )
    .unwrap();
    let o = linweb(&[
        "--offline",
        "--map-file",
        map.to_str().unwrap(),
        "-q",
        "\"www.dau.com/lists\" => memb(b,[a,b])",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "true\n");
}

#[test]
fn exit_codes_for_corpus_queries() {
    let cases: &[(&[&str], i32)] = &[
        (&["-c", "max.lw", "-q", "max(9,3,9)"], 0),
        (&["-c", "max.lw", "-q", "max(9,3,3)"], 1),
        (&["-c", "lists.lw", "-q", "memb(a,[a,b,a])", "--all"], 0),
        (&["-c", "lists.lw", "-q", "memb(z,[a,b])"], 1),
        (&["-c", "lists.lw", "-q", "memb(X,[a,b])", "--all"], 0),
        (&["-c", "append.lw", "-q", "append(X,Y,[1,2])", "--all"], 0),
        (
            &["-c", "append_horn.lw", "-q", "append(X,Y,[1,2])", "--all"],
            0,
        ),
        (&["-c", "append_horn.lw", "-q", "append(X,[3],[1,2])"], 1),
        (&["-c", "max.lw", "-q", "max(X,3,M)"], 2),
        (&["-c", "max.lw", "-q", "max(9,3,"], 2),
        (&["-c", "no_such_file.lw", "-q", "p"], 2),
        (
            &["--offline", "-q", "\"www.dau.com/lists\" => memb(a,[a])"],
            2,
        ),
    ];
    for (args, code) in cases {
        let args: Vec<String> = args
            .iter()
            .map(|a| {
                if a.ends_with(".lw") {
                    corpus(a)
                } else {
                    a.to_string()
                }
            })
            .collect();
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = linweb(&args);
        assert_eq!(
            o.status.code(),
            Some(*code),
            "{args:?}\n{}{}",
            stdout(&o),
            stderr(&o)
        );
    }
}

#[test]
fn step_limit_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("loop.lw");
    std::fs::write(&file, "loop :- loop.\n").unwrap();
    let o = linweb(&[
        "-c",
        file.to_str().unwrap(),
        "-q",
        "loop",
        "--max-steps",
        "1000",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("step limit"), "{}", stderr(&o));
    assert!(linweb(&["--max-steps", "0", "-q", "p"]).status.code() == Some(2));
}

#[test]
fn trace_and_stats_on_stderr() {
    let o = linweb(&[
        "-c",
        &corpus("max.lw"),
        "-q",
        "max(9,3,M)",
        "--all",
        "--trace",
        "--stats",
    ]);
    assert_eq!(stdout(&o), "M = 9\nno more answers\n");
    let err = stderr(&o);
    let trace: Vec<&str> = err.lines().filter(|l| !l.starts_with('%')).collect();
    assert_eq!(
        trace,
        [
            "CALL 0 max(9,3,_G0)",
            "TRY 0 #0 left",
            "COMMIT 0 #0 left max(9,3,9) :- 9 >= 3",
            "PRUNE 0 #0 right max(9,3,3) :- 9 < 3",
            "EXIT 0 max(9,3,9)",
            "FAIL 0 max(9,3,_G0)",
        ]
    );
    assert!(
        err.contains("% inferences=1 choice_commits=1 choice_prunes=1"),
        "{err}"
    );
}

#[test]
fn oracle_report_and_exit() {
    let o = linweb(&[
        "-c",
        &corpus("append.lw"),
        "-q",
        "append(X,Y,[1,2])",
        "--oracle",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("% engine answers (1)"), "{out}");
    assert!(out.contains("% oracle answers (3)"), "{out}");
    assert!(out.contains("% subset holds: true"), "{out}");
}

#[test]
fn strict_commit_and_occurs_check_flags() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.lw");
    std::fs::write(&file, "(p(X) :- q(X)) & p(z).\nq(1).\nq(2).\n").unwrap();
    let f = file.to_str().unwrap();
    assert_eq!(
        stdout(&linweb(&["-c", f, "-q", "p(X)", "--all"])),
        "X = 1\nX = 2\nno more answers\n"
    );
    assert_eq!(
        stdout(&linweb(&[
            "-c",
            f,
            "-q",
            "p(X)",
            "--all",
            "--strict-commit"
        ])),
        "X = 1\nno more answers\n"
    );
    assert_eq!(linweb(&["-q", "X = f(X)"]).status.code(), Some(1));
    assert_eq!(
        linweb(&["-q", "X = f(X)", "--no-occurs-check"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn repl_session() {
    let input = "?- append(X,Y,[1,2]).\n;\n:trace on\nappend([1],[2],L).\n\n:stats\n:quit\n";
    let o = with_stdin(&["-c", &corpus("append.lw")], input);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("X = [], Y = [1,2] no more answers"), "{out}");
    assert!(out.contains("L = [1,2]"), "{out}");
    assert!(out.contains("% inferences="), "{out}");
    assert!(stderr(&o).contains("COMMIT"), "{}", stderr(&o));
}

#[test]
fn repl_survives_garbage_until_end_of_input() {
    let o = with_stdin(&[], "p(.\n:nope\n)))\n\u{1}\u{7f}.\n?- X = 1.\n\n");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("X = 1"), "{}", stdout(&o));
    assert!(stderr(&o).matches("error").count() >= 3, "{}", stderr(&o));
}
