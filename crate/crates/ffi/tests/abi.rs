use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use locit_ffi::*;

const K3: &str = "name = \"k3\"\nalgorithm = \"ag\"\n[graph]\nkind = \"complete\"\nn = 3\ndelta = 2\n";

const EDGES: &str = "name = \"edges\"\nalgorithm = \"edge-ag\"\nseed = 3\n\
[graph]\nkind = \"random-capped\"\nn = 24\ndelta = 4\n";

fn last_error() -> String {
    let p = locit_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(toml: &str) -> *mut LocitScenario {
    let text = CString::new(toml).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { locit_scenario_parse(text.as_ptr(), &mut s) }, LocitStatus::Ok);
    s
}

fn run(s: *const LocitScenario) -> *mut LocitOutcome {
    let mut o = ptr::null_mut();
    assert_eq!(unsafe { locit_run(s, &mut o) }, LocitStatus::Ok, "{}", last_error());
    o
}

#[test]
fn k3_run_reports_a_proper_coloring() {
    let s = parse(K3);
    let o = run(s);
    let mut sum = LocitSummary::default();
    assert_eq!(unsafe { locit_outcome_summary(o, &mut sum) }, LocitStatus::Ok);
    assert_eq!((sum.n, sum.delta, sum.exit_code), (3, 2, 0));
    assert!(sum.proper_every_round);
    assert_eq!(sum.adj_radius, -1);

    let mut len = 0;
    let st = unsafe { locit_outcome_vertex_colors(o, ptr::null_mut(), ptr::null_mut(), 0, &mut len) };
    assert_eq!((st, len), (LocitStatus::BufferTooSmall, 3));
    let (mut ids, mut colors) = (vec![0u32; len], vec![0u64; len]);
    let st = unsafe { locit_outcome_vertex_colors(o, ids.as_mut_ptr(), colors.as_mut_ptr(), len, &mut len) };
    assert_eq!(st, LocitStatus::Ok);
    assert_eq!(ids, [0, 1, 2]);
    assert!(colors[0] != colors[1] && colors[1] != colors[2] && colors[0] != colors[2]);
    assert!(colors.iter().all(|&c| c < sum.palette));

    let st = unsafe { locit_outcome_edge_colors(o, ptr::null_mut(), ptr::null_mut(), ptr::null_mut(), 0, &mut len) };
    assert_eq!(st, LocitStatus::NotApplicable);
    unsafe {
        locit_outcome_free(o);
        locit_scenario_free(s);
    }
}

#[test]
fn trace_round_trips_through_verify() {
    let s = parse(K3);
    let o = run(s);
    let mut text: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { locit_outcome_trace_jsonl(o, &mut text) }, LocitStatus::Ok);
    let trace = unsafe { CStr::from_ptr(text) }.to_str().unwrap().to_owned();
    let mut code = -1;
    assert_eq!(unsafe { locit_verify_trace(text, &mut code) }, LocitStatus::Ok);
    assert_eq!(code, 0);

    let bad = CString::new(trace.replacen("[[0,0],[1,1],[2,2]]", "[[0,0],[1,0],[2,2]]", 1)).unwrap();
    assert_ne!(bad.as_bytes(), trace.as_bytes());
    assert_eq!(unsafe { locit_verify_trace(bad.as_ptr(), &mut code) }, LocitStatus::Ok);
    assert_ne!(code, 0);
    assert!(!last_error().is_empty());
    unsafe {
        locit_string_free(text);
        locit_outcome_free(o);
        locit_scenario_free(s);
    }
}

#[test]
fn edge_pipeline_exposes_edge_colors() {
    let s = parse(EDGES);
    let o = run(s);
    let mut len = 0;
    unsafe { locit_outcome_edge_colors(o, ptr::null_mut(), ptr::null_mut(), ptr::null_mut(), 0, &mut len) };
    assert!(len > 0);
    let (mut us, mut vs, mut cs) = (vec![0u32; len], vec![0u32; len], vec![0u64; len]);
    let st = unsafe { locit_outcome_edge_colors(o, us.as_mut_ptr(), vs.as_mut_ptr(), cs.as_mut_ptr(), len, &mut len) };
    assert_eq!(st, LocitStatus::Ok);
    for i in 0..len {
        assert!(us[i] < vs[i]);
        for j in i + 1..len {
            let share = us[i] == us[j] || us[i] == vs[j] || vs[i] == us[j] || vs[i] == vs[j];
            assert!(!share || cs[i] != cs[j], "edges {i} and {j} collide");
        }
    }
    unsafe {
        locit_outcome_free(o);
        locit_scenario_free(s);
    }
}

#[test]
fn overrides_and_errors_map_to_status_codes() {
    let s = parse(K3);
    let model = CString::new("congest:64").unwrap();
    assert_eq!(unsafe { locit_scenario_set_model(s, model.as_ptr()) }, LocitStatus::Ok);
    assert_eq!(unsafe { locit_scenario_set_seed(s, 9) }, LocitStatus::Ok);
    let junk = CString::new("warp").unwrap();
    assert_eq!(unsafe { locit_scenario_set_model(s, junk.as_ptr()) }, LocitStatus::Params);
    assert!(last_error().contains("warp"));
    unsafe { locit_outcome_free(run(s)) };
    unsafe { locit_scenario_free(s) };

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { locit_scenario_parse(ptr::null(), &mut out) }, LocitStatus::NullArgument);
    let bad = CString::new("name = \"x\"\nalgorithm = \"nope\"\n").unwrap();
    let st = unsafe { locit_scenario_parse(bad.as_ptr(), &mut out) };
    assert!(matches!(st, LocitStatus::Params | LocitStatus::Parse), "{st:?}");
    assert!(out.is_null());
    let missing = CString::new("/nonexistent/s.toml").unwrap();
    assert_eq!(unsafe { locit_scenario_load(missing.as_ptr(), &mut out) }, LocitStatus::Io);
    let mut code = 0;
    let garbage = CString::new("{not json").unwrap();
    assert_ne!(unsafe { locit_verify_trace(garbage.as_ptr(), &mut code) }, LocitStatus::Ok);
    unsafe {
        locit_scenario_free(ptr::null_mut());
        locit_outcome_free(ptr::null_mut());
        locit_string_free(ptr::null_mut());
    }
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(locit_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn c_program_links_against_the_static_library() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let target = root.join("../../target/debug");
    let lib = target.join("liblocit_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let cc = Command::new("cc")
        .arg(root.join("tests/smoke.c"))
        .arg("-I")
        .arg(root.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .expect("cc available");
    assert!(cc.status.success(), "{}", String::from_utf8_lossy(&cc.stderr));
    let out = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout.contains("proper every round: yes"), "{stdout}");
}
