use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use locperv::fixtures::{fixture, fixture_factors};
use locperv::serial::{matrix_to_json, parse, perv_from_json, perv_to_json, to_pretty};
use locperv::transport::{m_alien, m_eps};
use locperv::{AlienMethod, Frame, QPerv};

struct Session {
    dir: TempDir,
}

impl Session {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn workspace(&self) -> PathBuf {
        self.path("ws.json")
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_locperv"))
            .arg("--workspace")
            .arg(self.workspace())
            .args(args)
            .current_dir(self.dir.path())
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    }

    fn matrix(&self, args: &[&str]) -> Value {
        let mut a = vec!["--json"];
        a.extend_from_slice(args);
        parse(&self.ok(&a)).unwrap()["matrix"].clone()
    }

    fn object(&self, name: &str) -> QPerv {
        perv_from_json(&parse(&self.ok(&["show", name, "--json"])).unwrap()).unwrap()
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn empty_word_gives_the_stored_transport() {
    let s = Session::new();
    s.ok(&["new", "seg", "--fixture", "segment"]);
    let f = fixture("segment").unwrap();
    assert_eq!(
        s.matrix(&["transport", "seg", "0->1:"]),
        matrix_to_json(f.mplus(0, 1))
    );
    assert_eq!(
        s.matrix(&["transport", "seg", "1->0"]),
        matrix_to_json(f.mplus(1, 0))
    );
}

#[test]
fn word_and_alien_transports_match_the_library() {
    let s = Session::new();
    s.ok(&["new", "c4", "--fixture", "collinear4"]);
    let f = fixture("collinear4").unwrap();
    for word in ["++", "+-", "-+", "--"] {
        let spec = format!("0->3:{word}");
        let expected = m_eps(&f, 0, 3, &word.parse().unwrap(), Frame::Based).unwrap();
        assert_eq!(
            s.matrix(&["transport", "c4", &spec]),
            matrix_to_json(&expected),
            "{spec}"
        );
        let direction = m_eps(&f, 0, 3, &word.parse().unwrap(), Frame::DirectionStalks).unwrap();
        assert_eq!(
            s.matrix(&["transport", "c4", &spec, "--frame", "direction"]),
            matrix_to_json(&direction)
        );
    }
    let alien = m_alien(&f, 0, 3, AlienMethod::EcalleWeights, Frame::Based).unwrap();
    assert_eq!(
        s.matrix(&["transport", "c4", "0->3:alien"]),
        matrix_to_json(&alien)
    );
    assert_eq!(
        s.matrix(&["alien", "c4", "0", "3", "--method", "subset"]),
        matrix_to_json(&alien)
    );
    assert_eq!(
        s.ok(&["transport", "c4", "0->3:+-"]),
        format!(
            "{}",
            m_eps(&f, 0, 3, &"+-".parse().unwrap(), Frame::Based).unwrap()
        )
    );
}

#[test]
fn unit_fixture_passes_every_check() {
    let s = Session::new();
    s.ok(&["new", "one", "--fixture", "unit"]);
    let out = s.ok(&["check", "one"]);
    assert!(!out.contains("FAIL"), "{out}");
    assert!(out.contains("PASS one unit-law"));
}

#[test]
fn corrupted_transport_is_caught_with_a_witness() {
    let s = Session::new();
    s.ok(&["new", "par", "--fixture", "parallelogram"]);
    let mut v = parse(&fs::read_to_string(s.workspace()).unwrap()).unwrap();
    let cell = &mut v["objects"]["par"]["perv"]["mplus"]["0->3"][0][0];
    assert!(cell.is_string());
    *cell = Value::String("99/1".into());
    fs::write(s.workspace(), to_pretty(&v)).unwrap();

    let out = s.run(&["--json", "check", "par"]);
    assert_eq!(code(&out), 3);
    let report = parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report["pass"], Value::Bool(false));
    let failed: Vec<&Value> = report["objects"][0]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == Value::Bool(false))
        .collect();
    let names: Vec<&str> = failed
        .iter()
        .map(|c| c["check"].as_str().unwrap())
        .collect();
    assert!(
        names.contains(&"provenance") && names.contains(&"tensor-transports"),
        "{names:?}"
    );
    for c in failed {
        assert!(c["witness"].is_object(), "{c}");
    }
}

#[test]
fn parallelogram_diagonal_vanishes() {
    let s = Session::new();
    s.ok(&["new", "par", "--fixture", "parallelogram"]);
    let out = s.ok(&["check", "par"]);
    assert!(out.contains("PASS par diagonal-zero"), "{out}");
    assert!(out.contains("PASS par thom-sebastiani"), "{out}");

    // the same object built from its factors through the command line
    let (f, g) = fixture_factors("parallelogram").unwrap();
    for (name, p) in [("f", &f), ("g", &g)] {
        let file = s.path(&format!("{name}.json"));
        fs::write(&file, to_pretty(&perv_to_json(p))).unwrap();
        s.ok(&["new", name, "--file", file.to_str().unwrap()]);
    }
    s.ok(&["convolve", "f", "g", "--out", "fg"]);
    assert_eq!(s.object("fg"), fixture("parallelogram").unwrap());
    let out = s.ok(&["check", "fg"]);
    assert!(
        !out.contains("FAIL") && out.contains("PASS fg diagonal-zero"),
        "{out}"
    );
}

/// Arcs of the overlay path as (start, end, sweep flag).
fn arcs(svg: &str) -> Vec<((f64, f64), (f64, f64), u8)> {
    let d = svg
        .split("class=\"avoidance\"")
        .nth(1)
        .unwrap()
        .split(" d=\"")
        .nth(1)
        .unwrap()
        .split('"')
        .next()
        .unwrap();
    let tokens: Vec<&str> = d.split_whitespace().collect();
    let mut out = Vec::new();
    let mut last = (0.0, 0.0);
    let mut k = 0;
    while k < tokens.len() {
        let num = |i: usize| tokens[i].parse::<f64>().unwrap();
        match tokens[k] {
            "M" | "L" => {
                last = (num(k + 1), num(k + 2));
                k += 3;
            }
            "A" => {
                let end = (num(k + 6), num(k + 7));
                out.push((last, end, tokens[k + 5].parse().unwrap()));
                last = end;
                k += 8;
            }
            t => panic!("unexpected path token {t}"),
        }
    }
    out
}

/// Side of travel on which a screen-space semicircle bulges, in the upward
/// oriented plane: positive for left. Sweep flag 1 turns with increasing
/// angle in screen coordinates.
fn bulge_side(start: (f64, f64), end: (f64, f64), sweep: u8) -> f64 {
    let centre = ((start.0 + end.0) / 2.0, (start.1 + end.1) / 2.0);
    let theta = (start.1 - centre.1).atan2(start.0 - centre.0);
    let turn = if sweep == 1 {
        std::f64::consts::FRAC_PI_2
    } else {
        -std::f64::consts::FRAC_PI_2
    };
    let mid = (
        centre.0 + (theta + turn).cos(),
        centre.1 + (theta + turn).sin(),
    );
    // flip y to get back to the plane
    let (t, m) = (
        (end.0 - start.0, start.1 - end.1),
        (mid.0 - start.0, start.1 - mid.1),
    );
    t.0 * m.1 - t.1 * m.0
}

fn render(s: &Session, name: &str, path: Option<&str>) -> String {
    let out = s.path(&format!("{name}.svg"));
    let mut args = vec!["render", name, out.to_str().unwrap()];
    if let Some(p) = path {
        args.extend(["--path", p]);
    }
    s.ok(&args);
    fs::read_to_string(out).unwrap()
}

#[test]
fn render_examples() {
    let s = Session::new();
    s.ok(&["new", "one", "--fixture", "unit"]);
    let svg = render(&s, "one", None);
    assert_eq!(svg.matches("<circle data-point=").count(), 1);
    assert!(!svg.contains("<line data-pair"));
    assert_eq!(render(&s, "one", None), svg);

    s.ok(&["new", "par", "--fixture", "parallelogram"]);
    let svg = render(&s, "par", None);
    assert_eq!(svg.matches("<circle data-point=").count(), 4);
    // points 0 = 0, 1 = -1+3i, 2 = 2+i, 3 = 1+4i: the diagonals are 0-3 and 1-2
    assert!(svg.contains("data-pair=\"0-3\"") && svg.contains("data-pair=\"1-2\""));
    assert_eq!(svg.matches("<line data-pair").count(), 6);

    s.ok(&["new", "c4", "--fixture", "collinear4"]);
    for word in ["+-", "-+", "++", "--"] {
        let svg = render(&s, "c4", Some(&format!("0->3:{word}")));
        let a = arcs(&svg);
        assert_eq!(a.len(), 2);
        for ((start, end, sweep), sign) in a.into_iter().zip(word.chars()) {
            // plus keeps the point on the left, so the detour bulges right
            let side = bulge_side(start, end, sweep);
            assert!(
                if sign == '+' { side < 0.0 } else { side > 0.0 },
                "{word}: {side}"
            );
        }
    }
    assert_eq!(
        code(&s.run(&["render", "c4", "x.svg", "--path", "0->3:+"])),
        2
    );
}

#[test]
fn save_load_save_is_byte_identical() {
    let s = Session::new();
    s.ok(&["new", "c3", "--fixture", "collinear3"]);
    s.ok(&["new", "r", "--random", "4", "--seed", "9"]);
    s.ok(&["new", "sky", "--skyscraper", "1/2,-3", "--dim", "2"]);
    s.ok(&[
        "perturb",
        "c3",
        "--displacement",
        r#"["0,0","1/5,-1/5","0,0"]"#,
        "--out",
        "moved",
    ]);
    let first = fs::read(s.workspace()).unwrap();
    s.ok(&[
        "new",
        "sky",
        "--skyscraper",
        "1/2,-3",
        "--dim",
        "2",
        "--force",
    ]);
    assert_eq!(fs::read(s.workspace()).unwrap(), first);
}

#[test]
fn perturb_and_specialize_round_trip() {
    let s = Session::new();
    s.ok(&["new", "c3", "--fixture", "collinear3"]);
    let cert = parse(&s.ok(&[
        "perturb",
        "c3",
        "--displacement",
        r#"["0,0","1/5,-1/5","0,0"]"#,
        "--out",
        "moved",
    ]))
    .unwrap();
    assert_eq!(cert["sides"]["0->2"].as_str().map(str::len), Some(1));
    assert_ne!(cert["sides"]["0->2"], cert["sides"]["2->0"]);
    let moved = s.object("moved");
    assert!(moved.config().is_general_position());
    s.ok(&["specialize", "moved", "--out", "back"]);
    assert_eq!(s.object("back"), fixture("collinear3").unwrap());
    let out = s.ok(&["check", "moved"]);
    assert!(!out.contains("FAIL"), "{out}");
}

#[test]
fn lefschetz_objects_check_against_regeneration() {
    let s = Session::new();
    s.ok(&["new", "x", "--fixture", "unit"]);
    s.ok(&["lefschetz-gen", "--poly", "1,0,-3,0", "--out", "cubic"]);
    let f = s.object("cubic");
    assert_eq!(f.len(), 2);
    let out = s.ok(&["check", "cubic"]);
    assert!(
        !out.contains("FAIL") && out.contains("PASS cubic lefschetz-numeric"),
        "{out}"
    );
    assert_eq!(
        code(&s.run(&["lefschetz-gen", "--poly", "1,0,0,0", "--out", "bad"])),
        2
    );
}

#[test]
fn exit_codes() {
    let s = Session::new();
    s.ok(&["new", "seg", "--fixture", "segment"]);
    assert_eq!(code(&s.run(&["--help"])), 0);
    assert_eq!(code(&s.run(&["frobnicate"])), 1);
    assert_eq!(code(&s.run(&["transport", "seg"])), 1);
    assert_eq!(code(&s.run(&["transport", "nope", "0->1"])), 2);
    assert_eq!(code(&s.run(&["transport", "seg", "0->7"])), 2);
    assert_eq!(code(&s.run(&["transport", "seg", "0->1:+"])), 2);
    assert_eq!(code(&s.run(&["transport", "seg", "zero to one"])), 2);
    assert_eq!(code(&s.run(&["new", "seg", "--fixture", "segment"])), 2);
    assert_eq!(code(&s.run(&["new", "h", "--fixture", "no-such-thing"])), 2);
    fs::write(s.workspace(), "{").unwrap();
    assert_eq!(code(&s.run(&["list"])), 2);
}

#[test]
fn fixture_report_is_reproducible() {
    let s = Session::new();
    let a = s.ok(&["--json", "--seed", "3", "check", "--all-fixtures"]);
    let b = s.ok(&["--json", "--seed", "3", "check", "--all-fixtures"]);
    assert_eq!(a, b);
    assert_eq!(parse(&a).unwrap()["pass"], Value::Bool(true));
    assert!(!Path::new(&s.workspace()).exists());
}
