use coboson::runner::{run, write_csv};
use coboson::scenario::{
    preset, Axis, BranchingParams, CobosonModel, CobosonParams, EpScanParams, Format, Grid, NetworkParams, Output,
    Params, Range, Scenario, TimeUnit, TunnelParams, PRESETS,
};
use proptest::prelude::*;

fn grid() -> impl Strategy<Value = Grid> {
    prop_oneof![
        (0.0f64..1.0, 1.0f64..3.0, 2usize..6).prop_map(|(start, stop, count)| Grid::Range(Range { start, stop, count })),
        prop::collection::vec(0.0f64..3.0, 1..5).prop_map(Grid::Values),
    ]
}

fn output() -> impl Strategy<Value = Output> {
    (prop::option::of("[a-z]{1,8}\\.csv"), any::<bool>()).prop_map(|(path, json)| Output {
        path,
        format: if json { Format::Json } else { Format::Csv },
    })
}

fn tunnel() -> impl Strategy<Value = Scenario> {
    (0.0f64..1.0, 0.0f64..2.0, grid(), 0.0f64..1.0, 0.0f64..1.0, 1.0f64..30.0, 0.01f64..0.5, any::<bool>(), output())
        .prop_map(|(w1, w0, vgrid, g1, d2, t_max, dt, t0, output)| Scenario {
            version: 1,
            params: Params::Tunnel(TunnelParams {
                omega1: w1,
                omega0: Some(w0),
                v: None,
                gamma1: Some(g1),
                gamma2: None,
                delta1: None,
                delta2: Some(d2),
                scale1: 1.0,
                scale2: 2.5,
                t_max,
                dt,
                time_unit: if t0 { TimeUnit::T0 } else { TimeUnit::Absolute },
            }),
            sweep: vec![Axis { name: "v".into(), grid: vgrid }],
            output,
        })
        .prop_filter("t0 needs a splitting", |s| s.validate().is_ok())
}

fn branching() -> impl Strategy<Value = Scenario> {
    (grid(), grid(), 0.0f64..2.0, 0.1f64..5.0, 1e-10f64..1e-4, output()).prop_map(|(g1, g2, w0, v, tol, output)| {
        Scenario {
            version: 1,
            params: Params::BranchingSweep(BranchingParams {
                delta1: None,
                delta2: None,
                omega0: Some(w0),
                v: Some(v),
                scale1: 1.0,
                scale2: 1.0,
                tolerance: tol,
            }),
            sweep: vec![
                Axis { name: "delta2".into(), grid: g2 },
                Axis { name: "delta1".into(), grid: g1 },
            ],
            output,
        }
    })
}

fn other() -> impl Strategy<Value = Scenario> {
    prop_oneof![
        (prop::collection::vec(0.01f64..1.0, 3..10), output()).prop_map(|(w, output)| Scenario {
            version: 1,
            params: Params::CobosonSweep(CobosonParams {
                model: CobosonModel::Spectrum,
                weights: Some(w),
                uniform_modes: None,
                spectrum_file: None,
                n: Some(2.0),
                r: None,
            }),
            sweep: Vec::new(),
            output,
        }),
        (grid(), -1.0f64..1.0, output()).prop_map(|(v, w0, output)| Scenario {
            version: 1,
            params: Params::EpScan(EpScanParams { v: None, gamma_diff: Some(0.3), omega0: Some(w0) }),
            sweep: vec![Axis { name: "v".into(), grid: v }],
            output,
        }),
        (prop::collection::vec(-1.0f64..1.0, 3), 0.1f64..2.0, prop::option::of(5.0f64..50.0)).prop_map(
            |(e, c, horizon)| Scenario {
                version: 1,
                params: Params::Network(NetworkParams {
                    energies: e,
                    decays: vec![0.0, 0.1, 0.4],
                    couplings: vec![vec![0.0, c, 0.0], vec![c, 0.0, c], vec![0.0, c, 0.0]],
                    initial_site: 2,
                    t_max: 5.0,
                    dt: 0.5,
                    horizon,
                    max_horizon: 1e4,
                    tolerance: 1e-7,
                    note: Some("random".into()),
                },),
                sweep: Vec::new(),
                output: Output::default(),
            }
        ),
    ]
}

fn scenario() -> impl Strategy<Value = Scenario> {
    prop_oneof![tunnel(), branching(), other()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn random_scenarios_round_trip(s in scenario()) {
        prop_assume!(s.validate().is_ok());
        let text = s.to_json();
        let back = Scenario::from_json(&text).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.to_json(), text);
    }
}

#[test]
fn every_preset_round_trips() {
    for name in PRESETS {
        let s = preset(name).unwrap();
        assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s, "{name}");
    }
}

#[test]
fn preset_spot_values() {
    let report = run(&preset("fig3a").unwrap(), 1).unwrap();
    let d1 = report.table.numbers("delta1");
    let d2 = report.table.numbers("delta2");
    let f2 = report.table.numbers("f2_closed");
    let k = (0..d1.len())
        .find(|&k| (d1[k].unwrap() - 0.1).abs() < 1e-12 && (d2[k].unwrap() - 0.1).abs() < 1e-12)
        .unwrap();
    assert!((f2[k].unwrap() - 0.469484).abs() < 1e-6);

    let report = run(&preset("fig2a").unwrap(), 1).unwrap();
    let t = report.table.numbers("t");
    let dp = report.table.numbers("delta_p");
    for k in (0..t.len()).filter(|&k| t[k] == Some(0.0)) {
        assert_eq!(dp[k], Some(1.0));
    }
}

#[test]
fn csv_is_repeatable() {
    let s = preset("fig3b").unwrap();
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_csv(&run(&s, 3).unwrap(), &mut a).unwrap();
    write_csv(&run(&s, 1).unwrap(), &mut b).unwrap();
    assert_eq!(a, b);
}
