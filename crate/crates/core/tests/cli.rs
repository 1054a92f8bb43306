use std::fs;
use std::process::{Command, Output};

fn qpke_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpke-sim"))
        .args(args)
        .env_remove("QPKE_SIM_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn line<'a>(text: &'a str, name: &str) -> Option<&'a str> {
    text.lines().find_map(|l| l.strip_prefix(name)?.strip_prefix(' '))
}

#[test]
fn honest_qkd_agrees_every_session() {
    let o = qpke_sim(&["--experiment", "qkd", "--scenario", "identity", "--trials", "100", "--seed", "7"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert_eq!(line(&text, "agreements"), Some("100/100"));
    assert_eq!(line(&text, "status"), Some("pass"));
}

#[test]
fn toy_keyspace_attack_always_wins() {
    let o = qpke_sim(&["--experiment", "appendix-attack", "--seed", "3"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert_eq!(line(&text, "success"), Some("100/100"));
}

#[test]
fn same_seed_same_output() {
    let args = ["--experiment", "ev-qpke", "--scenario", "measure_resend", "--trials", "200", "--seed", "99"];
    let a = qpke_sim(&args);
    let b = qpke_sim(&args);
    assert_eq!(a.stdout, b.stdout);
    let c = qpke_sim(&["--experiment", "ev-qpke", "--scenario", "measure_resend", "--trials", "200", "--seed", "98"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn seed_from_environment() {
    let run = |env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_qpke-sim"));
        cmd.args(["--experiment", "comp-qpke", "--trials", "50"]);
        match env {
            Some(s) => cmd.env("QPKE_SIM_SEED", s),
            None => cmd.env_remove("QPKE_SIM_SEED"),
        };
        cmd.output().unwrap().stdout
    };
    let flag = qpke_sim(&["--experiment", "comp-qpke", "--trials", "50", "--seed", "12345"]).stdout;
    assert_eq!(run(Some("12345")), flag);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("out.txt");
    fs::write(&cfg, "# block the response\nexperiment = qkd\nscenario = block_second_message\ntrials = 20\nseed = 1\n")
        .unwrap();
    let o = qpke_sim(&["--config", cfg.to_str().unwrap(), "--trials", "30", "--out", out.to_str().unwrap()]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert_eq!(line(&text, "trials"), Some("30"));
    let machine = fs::read_to_string(&out).unwrap();
    assert_eq!(machine.matches("\nend\n").count() + machine.starts_with("end\n") as usize, 30);
}

#[test]
fn bad_input_exits_with_error() {
    let o = qpke_sim(&["--experiment", "qkd", "--scenario", "no_such_channel"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let o = qpke_sim(&["--experiment", "ev-qpke", "--lambda", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = qpke_sim(&["--replay", "/nonexistent/transcript.bin"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn transcript_written_and_replayed() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("session.bin");
    let o = qpke_sim(&[
        "--experiment", "qkd", "--lambda", "2", "--trials", "5", "--seed", "4", "--transcript",
        t.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = qpke_sim(&["--replay", t.to_str().unwrap()]);
    let text = stdout(&r);
    assert_eq!(r.status.code(), Some(0));
    assert_eq!(line(&text, "lambda"), Some("2"));
    assert_eq!(line(&text, "agree"), Some("1"));
    assert_eq!(line(&text, "blocked"), Some("0"));
}
