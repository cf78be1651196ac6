use backscatter::born::{born_approx, BornSchemes, BornTable, CutoffSpec};
use backscatter::cli::config::ExperimentConfig;
use backscatter::dispersion::{DispersionSample, RadialQuad};
use backscatter::fields::io::{read_profile_csv, write_profile_csv};
use backscatter::fields::GridSpec1D;
use backscatter::potentials::gaussian_spectrum;
use backscatter::regularity::{bound_table, counterexample_experiment, CounterexampleSettings, ExperimentReport};

#[test]
fn profile_csv_round_trip() {
    let grid = GridSpec1D::logarithmic(0.1, 20.0, 40).unwrap();
    let p = gaussian_spectrum(1.0).resample(grid).unwrap();
    let mut buf = Vec::new();
    write_profile_csv(&p, &mut buf).unwrap();
    let back = read_profile_csv(buf.as_slice()).unwrap();
    assert_eq!(back.grid().nodes(), p.grid().nodes());
    assert_eq!(back.values(), p.values());
}

#[test]
fn profile_csv_rejects_wrong_header() {
    assert!(read_profile_csv("r,re,im\n1,2,3\n".as_bytes()).is_err());
}

#[test]
fn dispersion_sample_round_trip() {
    let s = DispersionSample::tabulate(&gaussian_spectrum(1.0), 3, 2.0, vec![0.5, 1.0, 1.5], false, RadialQuad::default()).unwrap();
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    assert_eq!(DispersionSample::read_csv(buf.as_slice()).unwrap(), s);
}

#[test]
fn born_csv_columns() {
    let grid = GridSpec1D::logarithmic(1.0, 6.0, 5).unwrap();
    let born = born_approx(&gaussian_spectrum(1.0), 2, &grid, 2, &CutoffSpec::default(), &BornSchemes::default()).unwrap();
    let mut buf = Vec::new();
    born.write_csv(&mut buf).unwrap();
    let table = BornTable::read_csv(buf.as_slice()).unwrap();
    assert_eq!(
        table.headers,
        ["eta_abs", "re_qhat", "im_qhat", "re_q2", "im_q2", "re_qB", "im_qB", "re_res", "im_res"]
    );
    assert_eq!(table.column("eta_abs").unwrap(), grid.nodes());
    let re_q2 = table.column("re_q2").unwrap();
    for (a, b) in re_q2.iter().zip(&born.q2hat) {
        assert_eq!(*a, b.re);
    }
}

#[test]
fn counterexample_csv_and_report() {
    let mut s = CounterexampleSettings::new(GridSpec1D::logarithmic(8.0, 64.0, 10).unwrap());
    s.with_q2 = false;
    let r = counterexample_experiment(2, 1.0, &s).unwrap();
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    // Q2 columns stay empty when Q2 is skipped
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("eta_abs,s1,re_q2,im_q2"));
    assert_eq!(text.lines().count(), 11);

    let report = ExperimentReport {
        config: serde_json::json!({"n": 2}),
        bounds: bound_table(2, 1.0, 3).unwrap(),
        entries: vec![r.entry.clone()],
        failures: vec![],
    };
    let v: serde_json::Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
    assert_eq!(v["entries"][0]["predicted"], 3.0);
    assert_eq!(v["bounds"]["teo_main1_alpha_max"], 2.0);
}

#[test]
fn config_text_round_trip_after_overrides() {
    let mut c = ExperimentConfig::default();
    for (k, v) in [
        ("n", "3"),
        ("beta", "0.75"),
        ("pv.near_scheme", "taylor"),
        ("pv.tail_tol", "1e-6"),
        ("q3.orders", "12,12,8"),
        ("fit-min", "10"),
    ] {
        c.set(k, v).unwrap();
    }
    let back = ExperimentConfig::from_text(&c.to_text()).unwrap();
    assert_eq!(back, c);
    assert!(c.set("pv.nope", "1").is_err());
}
