use std::path::Path;
use std::process::{Command, Output};

fn cellthin(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cellthin"))
        .args(args)
        .env("CELLTHIN_CACHE_DIR", cache)
        .output()
        .expect("spawn cellthin")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn thin_ball_certifies() {
    let dir = tempfile::tempdir().unwrap();
    let vox = dir.path().join("ball");
    let o = cellthin(&["sample", "--name", "ball", "--out", p(&vox)], dir.path());
    assert!(o.status.success());
    let vox = vox.with_extension("vox");
    let skel = dir.path().join("ball.skel");
    let vtk = dir.path().join("ball.vtk");
    let o = cellthin(
        &[
            "thin",
            "--voxels",
            p(&vox),
            "--auto-table",
            "--algorithm",
            "topo",
            "--out",
            p(&skel),
            "--vtk",
            p(&vtk),
            "--certify",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("betti (1,0,0)=(1,0,0)"));
    assert!(dir.path().join("voxel-v1.acy").exists());
    let vtk_text = std::fs::read_to_string(&vtk).unwrap();
    assert!(vtk_text.contains("CELL_TYPES 257"));

    let o = cellthin(
        &["verify", "--voxels", p(&vox), "--skeleton", p(&skel)],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn thin_tetgen_mesh_with_table_file() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("tet.acy");
    let o = cellthin(
        &[
            "gen-tables",
            "--model",
            "tet",
            "--out",
            p(&table),
            "--jobs",
            "2",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let prefix = dir.path().join("torus");
    let o = cellthin(
        &["sample", "--name", "tet-torus", "--out", p(&prefix)],
        dir.path(),
    );
    assert!(o.status.success());
    let mesh = format!(
        "{},{}",
        p(&prefix.with_extension("node")),
        p(&prefix.with_extension("ele"))
    );
    let skel = dir.path().join("t.skel");
    let o = cellthin(
        &[
            "thin",
            "--mesh",
            &mesh,
            "--table",
            p(&table),
            "--algorithm",
            "shape",
            "--out",
            p(&skel),
            "--certify",
            "--debug-mv",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("betti (1,1,0)=(1,1,0)"));

    let o = cellthin(&["info", "--mesh", &mesh], dir.path());
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("top_cells 72"));
    assert!(out.contains("euler_characteristic 0"));
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // Neither --table nor --auto-table.
    let o = cellthin(&["thin", "--sample", "fan", "--out", "x.skel"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = cellthin(&["no-such-command"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = cellthin(
        &[
            "gen-tables",
            "--model",
            "simp4",
            "--out",
            p(&dir.path().join("s4.acy")),
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lazily"));
    // --debug-mv above 500 cells.
    let vox = dir.path().join("big.vox");
    std::fs::write(&vox, format!("VOX 9 9 9\n{}\n", vec!["1"; 729].join(" "))).unwrap();
    let o = cellthin(
        &[
            "thin",
            "--voxels",
            p(&vox),
            "--auto-table",
            "--out",
            p(&dir.path().join("b.skel")),
            "--debug-mv",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let o = cellthin(&["--help"], dir.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn parse_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let node = dir.path().join("a.node");
    let ele = dir.path().join("a.ele");
    std::fs::write(&node, "3 2 0 0\n0 0 0\n1 1 0\n2 0 1\n").unwrap();
    std::fs::write(&ele, "1 3 0\n0 0 1 99\n").unwrap();
    let mesh = format!("{},{}", p(&node), p(&ele));
    let o = cellthin(&["info", "--mesh", &mesh], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2: unknown vertex 99"));

    let bad = dir.path().join("bad.acy");
    std::fs::write(&bad, b"ACYC nonsense").unwrap();
    let o = cellthin(&["table-stats", "--table", p(&bad)], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn punctured_ring_fails_certification() {
    let dir = tempfile::tempdir().unwrap();
    let vox = dir.path().join("ring");
    assert!(
        cellthin(&["sample", "--name", "ring", "--out", p(&vox)], dir.path())
            .status
            .success()
    );
    // The ring has 8 pixels. Dropping the middle one of the bottom row
    // opens the loop (a corner would not: its neighbours share a vertex).
    let skel = dir.path().join("broken.skel");
    std::fs::write(&skel, "0\n2\n3\n4\n5\n6\n7\n").unwrap();
    let o = cellthin(
        &[
            "verify",
            "--voxels",
            p(&vox.with_extension("vox")),
            "--skeleton",
            p(&skel),
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("betti (1,1)!=(1,0)"));
}

#[test]
fn table_stats_reports() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("tet.acy");
    assert!(cellthin(
        &["gen-tables", "--model", "tet", "--out", p(&table)],
        dir.path()
    )
    .status
    .success());
    let o = cellthin(
        &[
            "table-stats",
            "--table",
            p(&table),
            "--euler-report",
            "--collapse-audit",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("euler_plus_connected_false_positives = 0"));
    assert!(out.contains("acyclic_configurations 64"));
    assert!(out.contains("collapse_failures = 0"));

    let o = cellthin(
        &["table-stats", "--model", "simp4", "--euler-report"],
        dir.path(),
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("euler_plus_connected_false_positives = 195"));
}

#[test]
fn anchored_strip_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("strip");
    assert!(cellthin(
        &["sample", "--name", "strip", "--out", p(&prefix)],
        dir.path()
    )
    .status
    .success());
    let anchors = dir.path().join("ends.txt");
    std::fs::write(&anchors, "0 1\n# far end\n9 8\n").unwrap();
    let mesh = format!(
        "{},{}",
        p(&prefix.with_extension("node")),
        p(&prefix.with_extension("ele"))
    );
    let skel = dir.path().join("s.skel");
    let o = cellthin(
        &[
            "thin",
            "--mesh",
            &mesh,
            "--auto-table",
            "--anchors",
            p(&anchors),
            "--out",
            p(&skel),
            "--certify",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = std::fs::read_to_string(&skel).unwrap();
    let kept: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(kept.contains(&"0"));
    assert!(kept.contains(&"7"));
}
