use std::path::Path;
use std::process::{Command, Output};

use meshsteg::cli::{BenchOutput, CapacityOutput, EmbedOutput, ExtractOutput, StatsOutput};
use meshsteg::fixtures;
use meshsteg::mesh::{write_mesh, MeshFormat};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meshsteg")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write_cover(dir: &Path, fmt: MeshFormat) -> String {
    let mesh = fixtures::quantized(&fixtures::noisy_sphere(2, 1.0, 0.02, 9), 6);
    let path = dir.join(format!("ball.{}", fmt.extension()));
    std::fs::write(&path, write_mesh(&mesh, fmt, 6)).unwrap();
    path.display().to_string()
}

#[test]
fn embed_extract_stats() {
    let dir = tempfile::tempdir().unwrap();
    let cover = write_cover(dir.path(), MeshFormat::Off);
    let msg = dir.path().join("msg.bin");
    std::fs::write(&msg, b"\x00\xffbinary payload\n").unwrap();

    let report: EmbedOutput = serde_json::from_str(&ok(&[
        "embed", "--cover", &cover, "--message", msg.to_str().unwrap(), "--alpha", "3", "--seed", "5", "--json",
    ]))
    .unwrap();
    assert!(report.stego.ends_with("ball.stego.off"));
    assert!(report.params.ends_with("ball.params"));
    assert_eq!(report.changes, vec![-1, 0, 1, 2]);
    assert_eq!(report.report.message_bits, 17 * 8);
    // the report survives a second trip through the parser
    let again: EmbedOutput = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(again, report);

    let back = dir.path().join("back.bin");
    let ex: ExtractOutput = serde_json::from_str(&ok(&[
        "extract", "--stego", &report.stego, "--params", &report.params, "--out", back.to_str().unwrap(), "--json",
    ]))
    .unwrap();
    assert_eq!(ex.bytes, 17);
    assert_eq!(std::fs::read(&back).unwrap(), std::fs::read(&msg).unwrap());

    let raw = run(&["extract", "--stego", &report.stego, "--params", &report.params]);
    assert_eq!(raw.stdout, std::fs::read(&msg).unwrap());

    let table = dir.path().join("errors.csv");
    let stats: StatsOutput = serde_json::from_str(&ok(&[
        "stats", "--cover", &cover, "--stego", &report.stego, "--table", table.to_str().unwrap(), "--json",
    ]))
    .unwrap();
    assert_eq!(stats.k_star, 6);
    assert!(stats.changed_coordinates > 0);
    assert!(stats.max_displacement <= 2e-6 * 3f64.sqrt() + 1e-12);
    assert!(stats.hausdorff <= stats.max_displacement + 1e-15);
    assert_eq!(std::fs::read_to_string(&table).unwrap().lines().count(), 163);
}

#[test]
fn text_message_and_ply() {
    let dir = tempfile::tempdir().unwrap();
    let cover = write_cover(dir.path(), MeshFormat::Ply);
    let out = dir.path().join("s.ply");
    let params = dir.path().join("s.params");
    ok(&[
        "embed", "--cover", &cover, "--text", "hello mesh", "--out", out.to_str().unwrap(), "--params",
        params.to_str().unwrap(), "--profile", "dihedral", "--changes", "-1,0,1",
    ]);
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("ply\n"));
    let ex: ExtractOutput = serde_json::from_str(&ok(&[
        "--json", "extract", "--stego", out.to_str().unwrap(), "--params", params.to_str().unwrap(),
    ]))
    .unwrap();
    assert_eq!(ex.text.as_deref(), Some("hello mesh"));
}

#[test]
fn costmap_capacity_bench() {
    let dir = tempfile::tempdir().unwrap();
    let cover = write_cover(dir.path(), MeshFormat::Off);
    let csv = ok(&["costmap", "--cover", &cover, "--changes", "-1,0,1"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "vertex,channel,step,cost");
    assert_eq!(lines.len(), 1 + 162 * 3 * 3);
    assert!(lines[2].starts_with("0,x,0,0"));
    let raw = ok(&["costmap", "--cover", &cover, "--changes", "-1,0,1", "--raw", "--profile", "ifpd-s2"]);
    assert_eq!(raw.lines().count(), lines.len());

    let cap: CapacityOutput = serde_json::from_str(&ok(&["capacity", "--cover", &cover, "--alpha", "4.5", "--json"])).unwrap();
    assert_eq!(cap.q, 3);
    assert_eq!(cap.max_alpha, 9.0);
    assert_eq!(cap.feasible, Some(true));
    assert_eq!(cap.channels.len(), 3);
    for c in &cap.channels {
        assert!((c.entropy_nats - c.target_nats).abs() <= 1e-6 * c.target_nats);
    }

    let bench: BenchOutput = serde_json::from_str(&ok(&[
        "bench", "--cover", &cover, "--changes", "-1,0,1", "--sample", "4", "--json", "--threads", "1",
    ]))
    .unwrap();
    assert_eq!(bench.rows.len(), 4);
    assert!(bench.rows.iter().all(|r| r.max_abs_diff == 0.0));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cover = write_cover(dir.path(), MeshFormat::Off);
    assert_eq!(run(&["embed", "--cover", &cover]).status.code(), Some(2));
    assert_eq!(run(&["embed", "--cover", &cover, "--text", "x", "--changes", "1,2"]).status.code(), Some(2));
    let long = "x".repeat(400);
    assert_eq!(run(&["embed", "--cover", &cover, "--text", &long, "--alpha", "1.5"]).status.code(), Some(3));
    assert_eq!(run(&["capacity", "--cover", &cover, "--alpha", "30"]).status.code(), Some(3));

    let bad = dir.path().join("bad.off");
    std::fs::write(&bad, "OFF\n3 1 0\n0 0 0\n1 0 zero\n0 1 0\n3 0 1 2\n").unwrap();
    let out = run(&["embed", "--cover", bad.to_str().unwrap(), "--text", "x"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    let params = dir.path().join("p.params");
    let stego = dir.path().join("s.off");
    ok(&[
        "embed", "--cover", &cover, "--text", "some text here", "--out", stego.to_str().unwrap(), "--params",
        params.to_str().unwrap(),
    ]);
    let tiny = dir.path().join("tiny.off");
    std::fs::write(&tiny, write_mesh(&fixtures::tetrahedron(), MeshFormat::Off, 6)).unwrap();
    let p = params.to_str().unwrap();
    assert_eq!(run(&["extract", "--stego", tiny.to_str().unwrap(), "--params", p]).status.code(), Some(5));
    std::fs::write(&params, "version = 2\n").unwrap();
    assert_eq!(run(&["extract", "--stego", stego.to_str().unwrap(), "--params", p]).status.code(), Some(5));
}
