//! Smoke tests for the benchmark binary: exit codes and the model
//! inspection command.

use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_due-bench")
}

#[test]
fn missing_config_file_is_a_data_error() {
    let out = Command::new(bin())
        .args(["run", "--config", "/nonexistent/x.conf"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn incomplete_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "seed = 4\n").unwrap();
    let out = Command::new(bin())
        .args(["run", "--config"])
        .arg(&conf)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unknown_algorithm_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("map.tsv"), "c1\tkettle\tCooking\n").unwrap();
    std::fs::write(
        dir.path().join("hh.kv"),
        "person.1.employment = full-time\nperson.1.age_group = adult-active\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("diary.tsv"), "person\temployment\tage_group\tdate\tactivity\tstart\tend\n").unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(
        &conf,
        "dataset.dir = .\ndataset.channel_map = map.tsv\nhousehold = hh.kv\n\
         diary = diary.tsv\nalgorithms = magic\n",
    )
    .unwrap();
    let out = Command::new(bin())
        .args(["run", "--config"])
        .arg(&conf)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn inspect_model_prints_strata() {
    let dir = tempfile::tempdir().unwrap();
    let diary = "\
person\temployment\tage_group\tdate\tactivity\tstart\tend
p1\tfull-time\tadult-active\t2012-10-08\tSleeping\t00:00\t07:00
p1\tfull-time\tadult-active\t2012-10-08\tWorking\t07:00\t17:00
p1\tfull-time\tadult-active\t2012-10-08\tSleeping\t17:00\t24:00
";
    std::fs::write(dir.path().join("diary.tsv"), diary).unwrap();
    let conf = dir.path().join("m.conf");
    std::fs::write(&conf, "diary = diary.tsv\n").unwrap();
    let out = Command::new(bin())
        .args(["inspect-model", "--config"])
        .arg(&conf)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("full-time/adult-active/weekday"), "{text}");
    assert!(text.contains("total strata: 1"), "{text}");
}
