#![allow(dead_code)]

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pedsim::io::{write_clip, write_scenario_spec};
use pedsim::synth::crossing_scene;

pub fn pedsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pedsim"))
        .args(args)
        .env_remove("PEDSIM_CONFIG_DIR")
        .output()
        .expect("binary runs")
}

pub fn pedsim_ok(args: &[&str]) -> Output {
    let out = pedsim(args);
    assert!(out.status.success(), "pedsim {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes the crossing scene to `<dir>/scenarios/crossing.json` and `<dir>/clips/cross.clip.json`.
pub fn write_crossing(dir: &Path) {
    let (spec, clips) = crossing_scene();
    fs::create_dir_all(dir.join("scenarios")).unwrap();
    fs::create_dir_all(dir.join("clips")).unwrap();
    fs::write(dir.join("scenarios/crossing.json"), write_scenario_spec(&spec).unwrap()).unwrap();
    for (id, c) in &clips {
        fs::write(dir.join(format!("clips/{id}.clip.json")), write_clip(c).unwrap()).unwrap();
    }
}
