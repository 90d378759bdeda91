use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn sagnac(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sagnac"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = sagnac(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Independent netpbm reader: P5 (8 or 16 bit) and P6 (8 bit).
struct Netpbm {
    magic: String,
    width: usize,
    height: usize,
    maxval: u32,
    samples: Vec<u32>,
}

fn read_netpbm(bytes: &[u8]) -> Netpbm {
    let mut pos = 0;
    let mut tokens = Vec::new();
    while tokens.len() < 4 {
        while bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if bytes[pos] == b'#' {
            while bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        tokens.push(String::from_utf8(bytes[start..pos].to_vec()).unwrap());
    }
    pos += 1;
    let magic = tokens[0].clone();
    let width: usize = tokens[1].parse().unwrap();
    let height: usize = tokens[2].parse().unwrap();
    let maxval: u32 = tokens[3].parse().unwrap();
    assert!(magic == "P5" || magic == "P6", "magic {magic}");
    assert!(maxval > 0 && maxval < 65536);
    let channels = if magic == "P6" { 3 } else { 1 };
    let width_bytes = if maxval > 255 { 2 } else { 1 };
    let body = &bytes[pos..];
    assert_eq!(body.len(), width * height * channels * width_bytes);
    let samples: Vec<u32> = if width_bytes == 2 {
        body.chunks(2)
            .map(|c| u32::from(u16::from_be_bytes([c[0], c[1]])))
            .collect()
    } else {
        body.iter().map(|&b| u32::from(b)).collect()
    };
    assert!(samples.iter().all(|&s| s <= maxval));
    Netpbm {
        magic,
        width,
        height,
        maxval,
        samples,
    }
}

fn read_csv_matrix(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn grab(report: &str, key: &str) -> String {
    report
        .lines()
        .find_map(|l| l.trim().strip_prefix(key))
        .unwrap_or_else(|| panic!("{key} missing from\n{report}"))
        .trim()
        .trim_start_matches("= ")
        .to_string()
}

#[test]
fn hg11_has_four_lobes() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &["--grid-size", "64", "--half-width", "4", "mode", "hg:1,1"],
    );
    let img = read_netpbm(&std::fs::read(dir.path().join("mode_intensity.pgm")).unwrap());
    assert_eq!((img.magic.as_str(), img.width, img.height), ("P5", 64, 64));
    assert_eq!(img.maxval, 65535);
    let at = |i: usize, j: usize| img.samples[j * 64 + i];
    let q = [at(27, 27), at(36, 27), at(27, 36), at(36, 36)];
    assert!(q.iter().all(|&v| v > 30000), "{q:?}");
    assert!(at(31, 10) < 100 && at(10, 31) < 100);
    assert_eq!(*img.samples.iter().max().unwrap(), 65535);
}

#[test]
fn vortex_is_dark_in_the_middle() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &["--grid-size", "64", "--half-width", "4", "mode", "lg:0,1"],
    );
    let img = read_netpbm(&std::fs::read(dir.path().join("mode_intensity.pgm")).unwrap());
    let at = |i: usize, j: usize| img.samples[j * 64 + i];
    for (i, j) in [(31, 31), (32, 31), (31, 32), (32, 32)] {
        assert!(at(i, j) < 3277, "{}", at(i, j));
    }
    assert!(at(37, 32) > 40000 && at(32, 26) > 40000);
}

#[test]
fn gaussian_phase_is_flat() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "--grid-size",
            "64",
            "--half-width",
            "4",
            "mode",
            "hg:0,0",
            "--phase",
        ],
    );
    let img = read_netpbm(&std::fs::read(dir.path().join("mode_phase.pgm")).unwrap());
    assert!(img.samples.iter().all(|&s| s == img.samples[0]));
    ok(
        dir.path(),
        &[
            "--grid-size",
            "64",
            "--half-width",
            "4",
            "--format",
            "ppm",
            "mode",
            "lg:0,1",
            "--phase",
        ],
    );
    let ppm = read_netpbm(&std::fs::read(dir.path().join("mode_phase.ppm")).unwrap());
    assert_eq!((ppm.magic.as_str(), ppm.maxval), ("P6", 255));
}

#[test]
fn sort_reports() {
    let dir = TempDir::new().unwrap();
    let r = ok(dir.path(), &["sort", "hg:1,5"]);
    assert!(r.contains("port A power 1.000000"), "{r}");
    let r = ok(dir.path(), &["sort", "hg45"]);
    assert!(r.contains("port B power 1.000000"), "{r}");
    let r = ok(dir.path(), &["sort", "fiber-demo"]);
    assert!(r.contains("port A power 0.850000") && r.contains("port B power 0.150000"));
    assert!(dir.path().join("sort_port_a.pgm").is_file());
    assert!(dir.path().join("sort_report.txt").is_file());
}

#[test]
fn fork_and_straight_fringes() {
    let dir = TempDir::new().unwrap();
    let r = ok(dir.path(), &["interfere", "hg:1,0", "--analyze-fork"]);
    assert_eq!(grab(&r, "port"), "B");
    assert_eq!(grab(&r, "fork difference"), "1");
    let r = ok(
        dir.path(),
        &["interfere", "hg:0,0", "--no-sort", "--analyze-fork"],
    );
    assert_eq!(grab(&r, "fork difference"), "0");
    assert!(grab(&r, "fork upper_maxima").parse::<usize>().unwrap() > 2);
}

#[test]
fn untilted_identical_beams_quadruple() {
    let dir = TempDir::new().unwrap();
    let common = ["--grid-size", "64", "--half-width", "4", "--format", "csv"];
    ok(dir.path(), &[&common[..], &["mode", "hg:2,1"]].concat());
    ok(
        dir.path(),
        &[
            &common[..],
            &[
                "interfere",
                "hg:2,1",
                "--no-sort",
                "--tilt",
                "0",
                "--ref-phase",
                "0",
            ],
        ]
        .concat(),
    );
    let single = read_csv_matrix(&dir.path().join("mode_intensity.csv"));
    let both = read_csv_matrix(&dir.path().join("interfere.csv"));
    for (a, b) in single.iter().flatten().zip(both.iter().flatten()) {
        assert!((b - 4.0 * a).abs() <= 1e-8 * 4.0 * a, "{a} {b}");
    }
}

#[test]
fn sweep_theta_table() {
    let dir = TempDir::new().unwrap();
    let csv = ok(dir.path(), &["sweep-theta", "--samples", "101"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("theta_rad,omega_rad,psi_rad"));
    let rows: Vec<[f64; 3]> = lines
        .map(|l| {
            assert_eq!(l.split(',').count(), 3);
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect();
    assert_eq!(rows.len(), 101);
    assert!((rows[0][1] - PI).abs() < 1e-12);
    let mid = rows[50];
    assert!((mid[0] - PI / 4.0).abs() < 1e-15);
    assert!((mid[1] - PI / 2.0).abs() < 1e-12 && (mid[2] - PI).abs() < 1e-12);
    assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1]));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("sweep_theta.csv")).unwrap(),
        csv
    );
}

fn routing(csv: &str) -> Vec<(String, String, f64)> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("input_label,leaf_label,power_fraction"));
    lines
        .map(|l| {
            let (label, rest) = if let Some(stripped) = l.strip_prefix('"') {
                let end = stripped.find('"').unwrap();
                (stripped[..end].to_string(), &stripped[end + 2..])
            } else {
                let (a, b) = l.split_once(',').unwrap();
                (a.to_string(), b)
            };
            let (leaf, p) = rest.split_once(',').unwrap();
            (label, leaf.to_string(), p.parse().unwrap())
        })
        .collect()
}

#[test]
fn cascade_depth_two() {
    let dir = TempDir::new().unwrap();
    let rows = routing(&ok(dir.path(), &["cascade", "--depth", "2", "--l=-3..3"]));
    assert_eq!(rows.len(), 7 * 4);
    for l in -3i32..=3 {
        let label = format!("lg:0,{l}");
        let want = format!("{} mod 4", l.rem_euclid(4));
        for (_, leaf, p) in rows.iter().filter(|r| r.0 == label) {
            let expected = if *leaf == want { 1.0 } else { 0.0 };
            assert!((p - expected).abs() < 1e-9, "{label} {leaf} {p}");
        }
    }
    let rows = routing(&ok(dir.path(), &["cascade", "--depth", "1", "--l", "7"]));
    let odd = rows.iter().find(|r| r.1 == "1 mod 2").unwrap();
    assert!((odd.2 - 1.0).abs() < 1e-12);
}

#[test]
fn cascade_superposition_file() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("mix.txt");
    std::fs::write(
        &file,
        "hg-expansion v1 w0=0.001\n0 0 0.6 0\n1 0 0 0.48\n2 0 0.64 0\n",
    )
    .unwrap();
    let rows = routing(&ok(
        dir.path(),
        &["cascade", "--depth", "3", "--input", file.to_str().unwrap()],
    ));
    assert_eq!(rows.len(), 8);
    let total: f64 = rows.iter().map(|r| r.2).sum();
    assert!((total - 1.0).abs() < 1e-9, "{total}");
    assert!(rows.iter().filter(|r| r.2 > 1e-6).count() > 1);
}

#[test]
fn cascade_network_file() {
    let dir = TempDir::new().unwrap();
    let net = dir.path().join("net.txt");
    std::fs::write(&net, "# two-level tree\ntree 2\n").unwrap();
    let rows = routing(&ok(
        dir.path(),
        &["cascade", "--network", net.to_str().unwrap(), "--l", "2"],
    ));
    let hit = rows.iter().find(|r| r.2 > 0.5).unwrap();
    assert_eq!(hit.1, "2 mod 4");
    std::fs::write(
        &net,
        "stage a theta=0.7853981633974483 phi=0\nstage b theta=0.7853981633974483 phi=0\n\
         route a.A -> b\nroute b.A -> a\n",
    )
    .unwrap();
    let out = sagnac(
        dir.path(),
        &["cascade", "--network", net.to_str().unwrap(), "--l", "2"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pipelines() {
    let dir = TempDir::new().unwrap();
    let r = ok(dir.path(), &["pipeline", "bell"]);
    let s: Vec<f64> = grab(&r, "schmidt")
        .split_whitespace()
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(
        s.iter()
            .all(|v| (v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-7),
        "{s:?}"
    );
    for name in ["herald", "herald-lg"] {
        let r = ok(dir.path(), &["pipeline", name]);
        let overlap: f64 = grab(&r, "overlap").parse().unwrap();
        assert!((overlap - 1.0).abs() < 1e-9, "{name}: {overlap}");
    }
    let script = dir.path().join("broken.txt");
    std::fs::write(&script, "source spdc-hg00\nfilter\nwobble\n").unwrap();
    let out = sagnac(dir.path(), &["pipeline", script.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn identical_invocations_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [&a, &b] {
        ok(
            dir.path(),
            &[
                "--grid-size",
                "64",
                "--half-width",
                "4",
                "interfere",
                "hg45",
            ],
        );
    }
    for name in ["interfere.pgm", "interfere_report.txt"] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
    let meta = std::fs::read_to_string(a.path().join("interfere.meta")).unwrap();
    assert!(meta.contains("sagnac-core ") && meta.contains("artifact interfere.pgm"));
}

#[test]
fn failures_are_single_line_with_exit_codes() {
    let dir = TempDir::new().unwrap();
    for (args, code) in [
        (vec!["mode", "hg:1"], 2),
        (vec!["mode", "no-such-mode"], 2),
        (vec!["--bogus"], 2),
        (vec!["sort", "hg:0,0", "--theta", "nan"], 2),
        (vec!["sweep-theta", "--samples", "1"], 2),
        (vec!["--format", "tiff", "mode", "hg:0,0"], 2),
        (vec!["cascade", "--depth", "9", "--l", "1"], 2),
        (vec!["--grid-size", "16", "mode", "hg:8,8"], 3),
    ] {
        let out = sagnac(dir.path(), &args);
        assert_eq!(out.status.code(), Some(code), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
    }
}
