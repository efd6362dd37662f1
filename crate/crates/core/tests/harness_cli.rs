use std::fs;
use std::process::Command;

use dimer_nm::harness::{self, Experiment, FGrid, ModelKind, RunConfig, Series};
use proptest::prelude::*;

fn cli() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dimer-nm"));
    c.env("RUST_LOG", "warn");
    c
}

fn arb_config() -> impl Strategy<Value = RunConfig> {
    (
        prop::sample::select(Experiment::ALL.to_vec()),
        prop::sample::select(vec![ModelKind::Full, ModelKind::Symmetric, ModelKind::Global]),
        (0.1f64..5.0, 0.1f64..3.0, 1.0f64..50.0, 2usize..6, 0.0f64..0.5),
        prop_oneof![
            prop::collection::vec(1e-3f64..10.0, 1..5).prop_map(FGrid::List),
            (1e-3f64..0.1, 0.2f64..10.0, 2usize..20, any::<bool>()).prop_map(|(a, b, n, l)| FGrid::Range {
                f_min: a,
                f_max: b,
                n_points: n,
                log_spaced: l
            }),
        ],
        (1.0f64..100.0, prop::option::of(1e-4f64..1e-2), 1usize..50),
        (prop::option::of(1e-3f64..1e-2), prop::option::of(1.0f64..300.0)),
        prop::sample::subsequence(
            vec![Series::Inversion, Series::LogNegativity, Series::SingletOverlap, Series::ModeExcitation],
            1..4,
        ),
        prop::option::of("[a-z]{1,8}/[a-z]{1,8}\\.csv"),
    )
        .prop_map(|(exp, model, (w, g, k, n, nth), grid, (t_end, dt, store), (eps, hor), series, out)| {
            let mut c = RunConfig::new(exp);
            c.model = model;
            c.base.mode_freq = [w, w];
            c.base.coupling = [g, g * 1.5];
            c.base.damping = [k, k];
            c.base.n_fock = n;
            c.base.n_th = nth;
            c.f_grid = grid;
            c.t_end = t_end;
            c.dt = dt;
            c.store_every = store;
            c.epsilon = eps;
            c.horizon = hor;
            c.series = series;
            c.output = out.map(Into::into);
            c
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn config_round_trips(cfg in arb_config()) {
        let text = cfg.serialize();
        let back = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn bundled_presets_are_valid() {
    for name in ["fig1", "fig2", "fig3", "eq8"] {
        let cfg = RunConfig::parse(harness::preset(name).unwrap()).unwrap();
        cfg.validate().unwrap();
    }
}

#[test]
fn csv_output_is_reproducible_and_sorted() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let status = cli()
            .args(["eq8check", "--f", "1,0.01,0.1", "--out"])
            .arg(&path)
            .status()
            .unwrap();
        assert!(status.success());
        fs::read(&path).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(!text.contains('\r'));
    let fs_col: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(fs_col, vec![0.01, 0.1, 1.0]);
    let meta = fs::read_to_string(dir.path().join("a.csv.meta")).unwrap();
    assert!(meta.contains("version = "));
    assert!(meta.contains("experiment = eq8check"));

    // the metadata reproduces the run
    let again = cli()
        .args(["eq8check", "--out", "-", "--config"])
        .arg(dir.path().join("a.csv.meta"))
        .output()
        .unwrap();
    assert!(again.status.success());
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn evolve_writes_one_column_per_f() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let status = cli()
        .args(["evolve", "--f", "0.1,0.01", "--tmax", "1", "--out"])
        .arg(&path)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&path).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("t,inversion_f=0.01,"), "{header}");
    assert!(header.contains("inversion_f=0.1"));
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| cli().args(args).output().unwrap().status.code();
    assert_eq!(code(&["bogus"]), Some(2));
    assert_eq!(code(&["steady", "--config", "/nonexistent/run.conf"]), Some(2));
    assert_eq!(code(&["steady", "--preset", "nope"]), Some(2));
    assert_eq!(code(&["steady", "--f", "-1"]), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    fs::write(&conf, "experiment = steady\nwobble = 3\n").unwrap();
    assert_eq!(code(&["steady", "--config", conf.to_str().unwrap()]), Some(2));

    // dt far outside the RK4 stability region: the invariant guard aborts the run
    assert_eq!(code(&["evolve", "--f", "1", "--dt", "0.05", "--tmax", "5", "--out", "-"]), Some(3));
}
