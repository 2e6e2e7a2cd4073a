use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use permfilter::fp::psnr;
use permfilter::io::{read_flow, read_image, write_flow, write_image};
use permfilter::{synth, Image2D};
use tempfile::TempDir;

fn permfilter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permfilter"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = permfilter(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Scratch {
    dir: TempDir,
}

impl Scratch {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn image(&self, name: &str, img: &Image2D) -> PathBuf {
        let p = self.path(name);
        write_image(&p, img).unwrap();
        p
    }
}

#[test]
fn tiled_and_global_agree_on_a_single_tile() {
    let t = Scratch::new();
    let input = t.image("in.pfm", &synth::sdr_scene(48, 48, 1));
    let (g, tl) = (t.path("g.pfm"), t.path("t.pfm"));
    ok(&["filter", s(&input), "--mode", "global", "--out", s(&g)]);
    ok(&["filter", s(&input), "--mode", "tiled", "--out", s(&tl)]);
    assert_eq!(fs::read(&g).unwrap(), fs::read(&tl).unwrap());
}

#[test]
fn blocking_permeabilities_give_back_the_input() {
    let t = Scratch::new();
    let img = synth::sdr_scene(70, 50, 2).map(|v| v as f32 as f64);
    let input = t.image("in.pfm", &img);
    let out = t.path("out.pfm");
    ok(&[
        "filter",
        s(&input),
        "--permeability",
        "zero",
        "--lambda",
        "0",
        "--out",
        s(&out),
    ]);
    assert_eq!(read_image(&out).unwrap(), img);
}

#[test]
fn fp24_filter_stays_above_90_db() {
    let t = Scratch::new();
    let input = t.image("in.pfm", &synth::sdr_scene(96, 72, 3));
    let (exact, fp24) = (t.path("exact.pfm"), t.path("fp24.pfm"));
    ok(&["filter", s(&input), "--out", s(&exact)]);
    ok(&["filter", s(&input), "--fp", "6,17", "--out", s(&fp24)]);
    let db = psnr(
        &read_image(&exact).unwrap(),
        &read_image(&fp24).unwrap(),
        1.0,
    )
    .unwrap();
    assert!(db > 90.0, "{db}");
}

#[test]
fn filters_flow_fields_with_a_guide() {
    let t = Scratch::new();
    let (guide, flow) = synth::flow_scene(40, 30, 4);
    let g = t.image("guide.pgm", &guide);
    let f = t.path("in.flo");
    write_flow(&f, &flow).unwrap();
    let out = t.path("out.flo");
    let no_guide = permfilter(&["filter", s(&f), "--out", s(&out)]);
    assert_eq!(no_guide.status.code(), Some(2));
    assert!(!out.exists());
    ok(&["filter", s(&f), "--guide", s(&g), "--out", s(&out)]);
    let back = read_flow(&out).unwrap();
    assert_eq!((back.width(), back.height()), (40, 30));
    assert_ne!(back, flow);
}

#[test]
fn format_sweep_rows_and_monotonicity() {
    let t = Scratch::new();
    let input = t.image("in.pfm", &synth::sdr_scene(64, 48, 5));
    let csv = t.path("sweep.csv");
    let mut args = vec![
        "sweep",
        "formats",
        s(&input),
        "--mode",
        "global",
        "--peak",
        "1",
        "--out",
        s(&csv),
    ];
    let formats = ["6,10", "6,14", "6,17", "6,20", "7,17"];
    for f in &formats {
        args.extend(["--fp", f]);
    }
    ok(&args);
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("exp_bits,mant_bits,psnr_db,aee"));
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    assert_eq!(rows.len(), formats.len());
    let db: Vec<f64> = rows[..4].iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(db.windows(2).all(|w| w[0] <= w[1]), "{db:?}");
    assert!(rows.iter().all(|r| r[3].is_empty()));
}

#[test]
fn format_sweep_scores_flow() {
    let t = Scratch::new();
    let (guide, flow) = synth::flow_scene(40, 30, 6);
    let g = t.image("guide.pfm", &guide);
    let f = t.path("in.flo");
    write_flow(&f, &flow).unwrap();
    let out = ok(&[
        "sweep",
        "formats",
        s(&g),
        "--flow",
        s(&f),
        "--fp",
        "6,17",
        "--report",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let aee = v[0]["aee"].as_f64().unwrap();
    assert!(aee > 0.0 && aee < 2e-4, "{aee}");
}

#[test]
fn empty_format_list_is_a_usage_error() {
    let t = Scratch::new();
    let input = t.image("in.pgm", &synth::sdr_scene(20, 20, 7));
    let csv = t.path("sweep.csv");
    let out = permfilter(&["sweep", "formats", s(&input), "--out", s(&csv)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least one"));
    assert!(!csv.exists());
}

#[test]
fn overlap_sweep_reports_three_ratios() {
    let t = Scratch::new();
    let img = synth::sdr_scene(128, 96, 8);
    let input = t.image("in.pfm", &img);
    let diffs = t.path("diffs");
    let out = ok(&[
        "sweep",
        "overlap",
        s(&input),
        "--diff-dir",
        s(&diffs),
        "--report",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let rows = v.as_array().unwrap();
    let names: Vec<_> = rows
        .iter()
        .map(|r| r["overlap"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["1/2", "3/5", "2/3"]);
    let seam: Vec<f64> = rows
        .iter()
        .map(|r| r["seam_residual"].as_f64().unwrap())
        .collect();
    assert!(seam[2] < seam[0] && seam[2] < seam[1], "{seam:?}");
    for name in ["overlap_1-2.pfm", "overlap_3-5.pfm", "overlap_2-3.pfm"] {
        let d = read_image(&diffs.join(name)).unwrap();
        assert_eq!((d.width(), d.height()), (128, 96));
    }
}

#[test]
fn model_defaults_match_published_figures() {
    let out = ok(&["model", "--report", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let m = &v["model"];
    let f = |k: &str| m[k].as_f64().unwrap();
    assert_eq!(f("working_memory_bits"), 88_473_600.0);
    assert_eq!(f("global_bandwidth_bytes_per_s"), 6.08256e9);
    assert_eq!(f("tile_sram_bytes"), 27_648.0);
    assert_eq!(f("tile_count"), 3354.0);
    assert_eq!(f("divisions_per_s"), 1.5455232e9);
    assert_eq!(format!("{:.1}", f("working_memory_bits") / 1e6), "88.5");
    assert_eq!(format!("{:.1}", f("tile_sram_bytes") / 1e3), "27.6");
    assert_eq!(format!("{:.2}", f("divisions_per_s") / 1e9), "1.55");
    assert!(v.get("banks").is_none());
}

#[test]
fn model_simulations() {
    let out = ok(&["model", "--simulate", "banks", "--report", "csv"]);
    for dir in ["horizontal", "vertical"] {
        assert!(
            out.contains(&format!("banks/checkerboard/{dir},conflict_count,0,cycles")),
            "{out}"
        );
    }
    let out = ok(&["model", "--simulate", "pipeline", "--report", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["pipeline"]["adder_utilization"].as_f64().unwrap() >= 0.99);
    assert!(v["pipeline"]["multiplier_utilization"].as_f64().unwrap() >= 0.99);
}

#[test]
fn model_tile_size_table() {
    let out = ok(&["model", "--tile-sizes", "24,48,96", "--report", "csv"]);
    assert!(out.contains("tile_memory,T=24,6912,B"));
    assert!(out.contains("tile_memory,T=96,110592,B"));
}

#[test]
fn bad_geometry_is_a_usage_error() {
    let out = permfilter(&["model", "--tile", "50"]);
    assert_eq!(out.status.code(), Some(2));
    let out = permfilter(&["simulate", "banks", "--fus", "13", "--banks", "12"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bank_trace_is_written() {
    let t = Scratch::new();
    let trace = t.path("trace.csv");
    ok(&["simulate", "banks", "--trace", s(&trace)]);
    let text = fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("cycle,fu,bank,address\n"));
    assert!(text.lines().count() > 1000);
}

#[test]
fn frag_simulation_cycles_through_states() {
    let out = ok(&[
        "simulate",
        "frag",
        "--steps",
        "r,r,r,d,l,l,l,d,r",
        "--report",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r["retained"] == 1536));
    assert_eq!(
        (rows[2]["sx"].as_u64(), rows[2]["sy"].as_u64()),
        (Some(0), Some(0))
    );
}

#[test]
fn config_file_layers_under_flags() {
    let t = Scratch::new();
    let input = t.image("in.pfm", &synth::sdr_scene(60, 40, 9));
    let conf = t.path("run.conf");
    fs::write(
        &conf,
        "# strong smoothing\nsigma = 0.5\niterations = 2\nmode = global\n",
    )
    .unwrap();
    let (a, b, c) = (t.path("a.pfm"), t.path("b.pfm"), t.path("c.pfm"));
    ok(&["filter", s(&input), "--config", s(&conf), "--out", s(&a)]);
    ok(&[
        "filter",
        s(&input),
        "--mode",
        "global",
        "--sigma",
        "0.5",
        "--iterations",
        "2",
        "--out",
        s(&b),
    ]);
    ok(&[
        "filter",
        s(&input),
        "--config",
        s(&conf),
        "--sigma",
        "0.05",
        "--out",
        s(&c),
    ]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());

    fs::write(&conf, "sigmaa = 0.5\n").unwrap();
    let out = permfilter(&["filter", s(&input), "--config", s(&conf), "--out", s(&a)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigmaa"));
}

#[test]
fn model_reads_system_config() {
    let t = Scratch::new();
    let conf = t.path("hw.conf");
    fs::write(&conf, "width = 1920\nheight = 1080\nreport = json\n").unwrap();
    let out = ok(&["model", "--config", s(&conf)]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["model"]["working_memory_bits"], 4 * 1920 * 1080 * 24);
}

#[test]
fn outputs_are_deterministic() {
    let t = Scratch::new();
    let input = t.image("in.pgm", &synth::sdr_scene(100, 64, 10));
    let (a, b) = (t.path("a.pfm"), t.path("b.pfm"));
    ok(&["filter", s(&input), "--fp", "5,10", "--out", s(&a)]);
    ok(&["filter", s(&input), "--fp", "5,10", "--out", s(&b)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn failures_leave_no_output() {
    let t = Scratch::new();
    let bad = t.path("bad.pgm");
    fs::write(&bad, b"P5\n4 4\n255\n\x00\x01").unwrap();
    let out = t.path("out.pgm");
    let r = permfilter(&["filter", s(&bad), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("pgm"));
    assert!(!out.exists());

    let input = t.image("in.pgm", &synth::sdr_scene(20, 20, 11));
    let r = permfilter(&["filter", s(&input), "--lambda", "2", "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(2));
    let r = permfilter(&["filter", s(&input), "--out", s(&t.path("out.png"))]);
    assert_ne!(r.status.code(), Some(0));
    assert!(fs::read_dir(t.dir.path()).unwrap().count() == 2);

    let flo = t.path("short.flo");
    fs::write(&flo, b"PIEH\x02\x00\x00\x00\x02\x00\x00\x00\x00").unwrap();
    let r = permfilter(&[
        "filter",
        s(&flo),
        "--guide",
        s(&input),
        "--out",
        s(&t.path("o.flo")),
    ]);
    assert_eq!(r.status.code(), Some(1));
    assert!(!t.path("o.flo").exists());
}
