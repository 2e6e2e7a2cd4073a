use pyo3::prelude::*;
use pyo3::types::{PyDict, PyModule};

fn run(script: &str) {
    Python::with_gil(|py| {
        let m = PyModule::new_bound(py, "pypermfilter").unwrap();
        pypermfilter::pypermfilter(&m).unwrap();
        let locals = PyDict::new_bound(py);
        locals.set_item("pf", &m).unwrap();
        if let Err(e) = py.run_bound(script, Some(&locals), None) {
            e.print(py);
            panic!("script failed");
        }
    });
}

#[test]
fn filters_through_the_module() {
    run(r#"
img = pf.sdr_scene(48, 48, 1)
a = pf.filter(img, mode="global")
b = pf.filter(img, mode="tiled")
assert a == b
q = pf.filter(img, fp=pf.FpFormat.parse("6,17"))
assert pf.psnr(b, q, 1.0) > 90
flat = pf.Image.filled(20, 10, 0.3)
assert pf.filter(flat, guide=pf.sdr_scene(20, 10, 2)) == flat
rows = [[0.0, 1.0, 0.5], [0.25, 0.75, 1.0]]
assert pf.Image(rows).to_list() == rows
"#);
}

#[test]
fn scanline_matches_dense_evaluation() {
    run(r#"
pi, j, a = [0.5, 0.9, 0.1], [0.0, 1.0, 0.3, 0.7], [0.2, 0.2, 0.2, 0.2]
fast = pf.filter_line(pi, j, a, 0.4)
slow = pf.filter_line_dense(pi, j, a, 0.4)
assert all(abs(x - y) <= 1e-12 * abs(y) for x, y in zip(fast, slow))
"#);
}

#[test]
fn formats_and_sweeps() {
    run(r#"
f = pf.FpFormat.fp24()
assert (f.exp_bits, f.mant_bits, f.total_bits) == (6, 17, 24)
assert f.quantize(1.0 + 2.0 ** -20) == 1.0
assert f.mul(3.0, 1.0 / 3.0) != 1.0 / 3.0
rows = pf.format_sweep(pf.sdr_scene(32, 32, 3), [f, pf.FpFormat(5, 10)], mode="global", peak=1.0)
assert [r["format"]["mant_bits"] for r in rows] == [17, 10]
assert rows[0]["psnr_db"] > rows[1]["psnr_db"]
ov = pf.overlap_sweep(pf.sdr_scene(64, 64, 4), tile=24)
assert [r["overlap"] for r in ov] == ["1/2", "3/5", "2/3"]
"#);
}

#[test]
fn model_and_simulations() {
    run(r#"
cfg = pf.SystemConfig()
r = cfg.model_report()
assert r["working_memory_bits"] == 88473600 and r["tile_count"] == 3354
assert cfg.simulate_banks("horizontal")["conflict_cycles"] == 0
assert cfg.simulate_banks("vertical", "row-major")["conflict_cycles"] > 0
assert cfg.simulate_pipeline()["adder_utilization"] >= 0.99
assert pf.frag_translate(0, 0, 5, 7) == (5, 7)
"#);
}

#[test]
fn errors_become_python_exceptions() {
    run(r#"
for bad in (lambda: pf.FilterParams(lam=2.0), lambda: pf.FpFormat(1, 10),
            lambda: pf.SystemConfig(tile_side=50), lambda: pf.Image([[1.0], [1.0, 2.0]]),
            lambda: pf.filter_line([0.5], [1.0], [1.0])):
    try:
        bad()
    except ValueError:
        pass
    else:
        raise AssertionError("accepted bad input")
try:
    pf.Image.read("/nonexistent/x.pgm")
except OSError:
    pass
else:
    raise AssertionError("missing file accepted")
"#);
}
