use std::path::Path;
use std::process::{Command, Output};

fn silif(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_silif"))
        .args(args)
        .env("SILIF_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SMALL: &str = "seed = 3\nlayers = 1\nhidden = 16\nepochs = 2\nbatch = 16\n\n[data.synthetic]\nclasses = 3\nchannels = 8\ntimesteps = 30\nsamples_per_class = 10\n";

#[test]
fn gen_synthetic_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.spkt");
    let b = dir.path().join("b.spkt");
    for out in [&a, &b] {
        let o = silif(&["gen-synthetic", "--seed", "7", "--split", "val", "--out", p(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let c = dir.path().join("c.spkt");
    silif(&["gen-synthetic", "--seed", "8", "--split", "val", "--out", p(&c)]);
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn sop_calc_prints_total() {
    let o = silif(&["sop-calc-eventssm", "--state", "64", "--events", "8000", "--events2", "1000"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().last().unwrap().trim(), "98.3M", "{text}");
}

#[test]
fn gradcheck_passes_on_linear_network() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("linear.toml");
    std::fs::write(
        &cfg,
        "hidden = 6\nlayers = 2\ndropout = 0.0\n[neuron]\ntheta = inf\noutput = \"membrane\"\n[data.synthetic]\nchannels = 5\nclasses = 3\n",
    )
    .unwrap();
    let o = silif(&["gradcheck", "--config", p(&cfg), "--batch", "2", "--timesteps", "10"]);
    assert!(o.status.success(), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(silif(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(silif(&[]).status.code(), Some(2));
    assert_eq!(silif(&["sop-calc-eventssm", "--state", "x"]).status.code(), Some(2));
}

#[test]
fn invalid_config_names_key_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "seed = 1\nhidden = -1\n").unwrap();
    let o = silif(&["train", "--config", p(&cfg), "--out", p(&dir.path().join("run"))]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("hidden") && err.contains("line 2"), "{err}");
}

#[test]
fn train_then_eval_leaves_checkpoint_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let run = dir.path().join("run");
    let o = silif(&["train", "--config", p(&cfg), "--out", p(&run)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let log = std::fs::read_to_string(run.join("log.jsonl")).unwrap();
    // epoch 0 val, two epochs of train + val, final test
    assert_eq!(log.lines().count(), 6, "{log}");
    assert!(log.lines().last().unwrap().contains("\"test\""));

    let ckpt = run.join("best.slck");
    let before = std::fs::read(&ckpt).unwrap();
    let o = silif(&["eval", "--checkpoint", p(&ckpt)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("accuracy"));
    assert_eq!(std::fs::read(&ckpt).unwrap(), before);

    let o = silif(&["analyze-eigen", "--checkpoint", p(&ckpt)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = silif(&["profile-sops", "--checkpoint", p(&ckpt)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn convert_events_writes_loadable_tensor() {
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("ev.txt");
    let labels = dir.path().join("lb.txt");
    std::fs::write(&events, "# two samples\n0,0\n1500,2\n\n200,1\n").unwrap();
    std::fs::write(&labels, "1\n0\n").unwrap();
    let out = dir.path().join("ev.spkt");
    let o = silif(&[
        "convert-events", "--events", p(&events), "--labels", p(&labels), "--channels", "3", "--out", p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = silif::data::decode_spkt(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(t.samples(), 2);
    assert_eq!(t.labels, vec![1, 0]);
}
