use std::path::PathBuf;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wfcheck::qcore::{Label, SpaceLayout, C64};
use wfcheck::scenario::{
    parse, parse_unchecked, print, resolve_state, validate, BasisExpr, DiagKind, Encoding, Event, MeasureFactor, Scenario, ScenarioBuilder, StateExpr,
};

fn fixture(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name);
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn fixtures_round_trip() {
    for name in ["epr.wfs", "cpl.wfs", "ghz.wfs"] {
        let src = fixture(name);
        let s = parse(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
        let text = print(&s);
        assert_eq!(parse(&text).unwrap(), s, "{name}");
        assert_eq!(print(&parse(&text).unwrap()), text, "{name}");
        assert_eq!(text, src, "{name} is stored in canonical form");
    }
}

#[test]
fn epr_golden_print() {
    let s = parse(&fixture("epr.wfs")).unwrap();
    let expected = "\
scenario epr
agent Alice
observer Bob
system S1 2
system S2 2
agent Alice record rA dim 2 pointer comp init 0
prepare schmidt(0.5477225575051661, 0.8366600265340756) on S1,S2
interact Alice on S1 in comp record rA -> ra
measure Bob on S2 in comp -> rb
";
    assert_eq!(print(&s), expected);
}

#[test]
fn comments_and_spacing_are_not_significant() {
    let src = "# two qubits\nscenario  t\n\nobserver W   # watcher\nsystem q 2\nprepare [ 0.6 , 0.8i ] on q\nmeasure W on q in basis1 -> x\n";
    let s = parse(src).unwrap();
    assert_eq!(
        print(&s),
        "scenario t\nobserver W\nsystem q 2\nprepare [0.6, 0.8i] on q\nmeasure W on q in basis1 -> x\n"
    );
}

#[test]
fn errors_are_located() {
    let truncated = "scenario t\nobserver W\nsystem q 2\nprepare [0.6, 0.8] on q\nmeasure W on q in";
    let e = parse(truncated).unwrap_err();
    assert_eq!(e.errors[0].line, 5);
    assert!(e.errors[0].col >= 18, "{}", e.errors[0]);

    let unknown = "scenario t\nobserver W\nsystem q 2\nprepare [1, 0] on q\nmeasure W on r in comp -> x\n";
    let e = parse(unknown).unwrap_err();
    assert_eq!(e.errors[0].line, 5, "{e}");
    assert!(e.errors[0].message.contains('r'), "{e}");

    let bad_norm = "scenario t\nsystem q 2\nprepare [1, 1] on q\n";
    let e = parse(bad_norm).unwrap_err();
    assert_eq!(e.errors[0].line, 3, "{e}");

    let unknown_kw = "scenario t\nfrobnicate\n";
    let e = parse(unknown_kw).unwrap_err();
    assert_eq!((e.errors[0].line, e.errors[0].col), (2, 1), "{e}");
}

#[test]
fn presets_expand_to_their_amplitudes() {
    let q3 = SpaceLayout::qubits(&["a", "b", "c"]).unwrap();
    let g = resolve_state(&StateExpr::Ghz, &q3).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for (i, a) in g.amplitudes().iter().enumerate() {
        let want = if i == 0 || i == 7 { h } else { 0.0 };
        assert!((a - C64::new(want, 0.0)).norm() < 1e-15, "{i}");
    }
    let q2 = SpaceLayout::new([("x".to_string(), 3usize), ("y".to_string(), 3usize)]).unwrap();
    let cs = [0.6, 0.0, 0.8];
    let s = resolve_state(&StateExpr::Schmidt(cs.to_vec()), &q2).unwrap();
    for (i, a) in s.amplitudes().iter().enumerate() {
        let want = if i % 4 == 0 { cs[i / 4] } else { 0.0 };
        assert!((a - C64::new(want, 0.0)).norm() < 1e-15, "{i}");
    }
}

#[test]
fn malformed_fixtures_report_the_offending_event() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures");
    let cases = [
        ("unwritten_read.wfs", 1, DiagKind::RecordNeverWritten),
        ("stray_concurrent.wfs", 1, DiagKind::ConcurrentWithoutMeasure),
        ("unprepared.wfs", 0, DiagKind::UnpreparedTarget),
        ("foreign_record.wfs", 1, DiagKind::NotOwner),
    ];
    for (file, event, kind) in cases {
        let src = std::fs::read_to_string(dir.join(file)).unwrap();
        let (s, map) = parse_unchecked(&src).unwrap();
        let diags = validate(&s);
        assert!(diags.iter().any(|d| d.event == Some(event) && d.kind == kind), "{file}: {diags:?}");
        let e = parse(&src).unwrap_err();
        assert!(e.errors.iter().any(|x| x.line == map.event_lines[event]), "{file}: {e}");
    }
}

const LABELS: &[&str] = &["up", "down", "x", "y_1"];

fn rand_complex(rng: &mut ChaCha8Rng) -> C64 {
    let pick = |rng: &mut ChaCha8Rng| match rng.gen_range(0..4) {
        0 => 0.0,
        1 => rng.gen_range(-1.0..1.0),
        2 => rng.gen_range(-1e-9..1e-9),
        _ => (rng.gen_range(-4..4) as f64) * 0.25,
    };
    C64::new(pick(rng), pick(rng))
}

fn rand_label(rng: &mut ChaCha8Rng, k: usize) -> Label {
    if rng.gen_bool(0.5) {
        Label::Int(k as i64 - 1)
    } else {
        Label::Sym(format!("{}{k}", LABELS[rng.gen_range(0..LABELS.len())]))
    }
}

fn rand_basis(rng: &mut ChaCha8Rng, named: &[String]) -> BasisExpr {
    match rng.gen_range(0..6) {
        0 => BasisExpr::Comp,
        1 => BasisExpr::Basis1,
        2 => BasisExpr::Basis2,
        3 => BasisExpr::Basis3,
        4 if !named.is_empty() => BasisExpr::Named(named[rng.gen_range(0..named.len())].clone()),
        _ => {
            let n = rng.gen_range(1..4);
            BasisExpr::Vectors(
                (0..n).map(|k| (rand_label(rng, k), (0..rng.gen_range(1..4)).map(|_| rand_complex(rng)).collect())).collect(),
            )
        }
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, xs: &'a [String]) -> &'a str {
    &xs[rng.gen_range(0..xs.len())]
}

fn subset(rng: &mut ChaCha8Rng, xs: &[String]) -> Vec<String> {
    let mut out: Vec<String> = xs.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    if out.is_empty() {
        out.push(pick(rng, xs).to_string());
    }
    out
}

/// Structurally arbitrary scenario; not necessarily semantically valid.
fn random_scenario(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = ScenarioBuilder::new(format!("s{seed}"));
    let agents: Vec<String> = (0..rng.gen_range(1..3)).map(|i| format!("Ag{i}")).collect();
    let observers: Vec<String> = (0..rng.gen_range(0..3)).map(|i| format!("Ob{i}")).collect();
    for a in &agents {
        b = b.agent(a);
    }
    for o in &observers {
        b = b.observer(o);
    }
    let mut ids = Vec::new();
    let mut records = Vec::new();
    for i in 0..rng.gen_range(1..5) {
        if rng.gen_bool(0.4) {
            let id = format!("r{i}");
            let ag = pick(&mut rng, &agents).to_string();
            let pointer = rand_basis(&mut rng, &[]);
            let init = rand_label(&mut rng, i);
            b = b.record(&ag, &id, rng.gen_range(2..4), pointer, init);
            records.push(id.clone());
            ids.push(id);
        } else {
            let id = format!("S{i}");
            b = b.system(&id, rng.gen_range(2..5));
            ids.push(id);
        }
    }
    let named: Vec<String> = (0..rng.gen_range(0..3)).map(|i| format!("B{i}")).collect();
    for n in &named {
        let expr = rand_basis(&mut rng, &[]);
        b = b.basis(n, expr);
    }
    let actors: Vec<String> = agents.iter().chain(&observers).cloned().collect();
    for k in 0..rng.gen_range(0..8) {
        let e = match rng.gen_range(0..5) {
            0 => {
                let state = match rng.gen_range(0..3) {
                    0 => StateExpr::Ghz,
                    1 => StateExpr::Schmidt((0..rng.gen_range(1..4)).map(|_| rng.gen_range(0.0..1.0)).collect()),
                    _ => StateExpr::Amplitudes((0..rng.gen_range(1..5)).map(|_| rand_complex(&mut rng)).collect()),
                };
                Event::Prepare { state, targets: subset(&mut rng, &ids) }
            }
            1 => Event::Interact {
                agent: pick(&mut rng, &agents).to_string(),
                targets: subset(&mut rng, &ids),
                basis: rand_basis(&mut rng, &named),
                record: pick(&mut rng, &ids).to_string(),
                fact: format!("f{k}"),
            },
            2 => Event::Measure {
                observer: pick(&mut rng, &actors).to_string(),
                factors: (0..rng.gen_range(1..3))
                    .map(|_| MeasureFactor { targets: subset(&mut rng, &ids), basis: rand_basis(&mut rng, &named) })
                    .collect(),
                single: rng.gen_bool(0.3),
                encoding: rng.gen_bool(0.3).then_some(Encoding::Bits),
                result: format!("m{k}"),
                concurrent: rng.gen_bool(0.3),
            },
            3 if !records.is_empty() => Event::ReadRecord {
                observer: pick(&mut rng, &actors).to_string(),
                record: pick(&mut rng, &records).to_string(),
                basis: rng.gen_bool(0.5).then(|| rand_basis(&mut rng, &named)),
                into: rng.gen_bool(0.5).then(|| pick(&mut rng, &ids).to_string()),
                result: format!("v{k}"),
            },
            _ => Event::DeclarePartition {
                name: format!("p{k}"),
                groups: (0..rng.gen_range(1..3)).map(|_| subset(&mut rng, &actors)).collect(),
            },
        };
        b = b.event(e);
    }
    b.build().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let s = random_scenario(seed);
        let text = print(&s);
        let (back, map) = parse_unchecked(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &s, "{}", text);
        prop_assert_eq!(print(&back), text);
        prop_assert_eq!(map.event_lines.len(), s.timeline.len());
    }
}
