use std::ffi::{CStr, CString};
use std::ptr;

use sgdlab_ffi::*;

fn last_error() -> String {
    let p = sgdlab_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { sgdlab_string_free(p) };
    s
}

fn quadratic(l: f64, delta: f64, dim: usize) -> *mut SgdInstance {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { sgdlab_quadratic_new(l, delta, dim, &mut h) }, SgdStatus::Ok);
    h
}

fn run(h: *const SgdInstance, optimizer: &str, horizon: u64) -> Vec<SgdRecord> {
    let opt = CString::new(optimizer).unwrap();
    let mut t = ptr::null_mut();
    let st = unsafe { sgdlab_run(h, opt.as_ptr(), ptr::null(), horizon, 1, false, &mut t) };
    assert_eq!(st, SgdStatus::Ok, "{}", last_error());
    let n = unsafe { sgdlab_trajectory_len(t) };
    let mut recs = vec![SgdRecord::default(); n];
    let mut written = 0;
    assert_eq!(unsafe { sgdlab_trajectory_records(t, recs.as_mut_ptr(), n, &mut written) }, SgdStatus::Ok);
    assert_eq!(written, n);
    unsafe { sgdlab_trajectory_free(t) };
    recs
}

#[test]
fn quadratic_gd_matches_closed_form() {
    let h = quadratic(1.0, 0.5, 1);
    assert_eq!(unsafe { sgdlab_instance_dimension(h) }, 1);
    let mut x0 = [0.0];
    assert_eq!(unsafe { sgdlab_instance_initial_point(h, x0.as_mut_ptr(), 1) }, SgdStatus::Ok);
    let recs = run(h, r#"{"kind": "sgd", "eta": 0.5, "alpha": 0.0}"#, 20);
    assert_eq!(recs.len(), 20);
    for r in &recs {
        let want = x0[0] * 0.5f64.powi(r.t as i32);
        assert!((r.x1 - want).abs() <= 1e-14 * x0[0].abs());
    }
    unsafe { sgdlab_instance_free(h) };
}

#[test]
fn evaluate_returns_value_and_gradient() {
    let h = quadratic(2.0, 1.0, 2);
    let x = [1.0, -3.0];
    let mut f = 0.0;
    let mut g = [0.0; 2];
    assert_eq!(unsafe { sgdlab_instance_evaluate(h, x.as_ptr(), 2, &mut f, g.as_mut_ptr()) }, SgdStatus::Ok);
    assert_eq!(f, 10.0);
    assert_eq!(g, [2.0, -6.0]);
    assert_eq!(unsafe { sgdlab_instance_smoothness(h) }, 2.0);

    let st = unsafe { sgdlab_instance_evaluate(h, x.as_ptr(), 1, &mut f, ptr::null_mut()) };
    assert_eq!(st, SgdStatus::Dimension);
    unsafe { sgdlab_instance_free(h) };
}

#[test]
fn null_and_bad_arguments_report_status() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { sgdlab_quadratic_new(-1.0, 1.0, 1, &mut h) }, SgdStatus::Precondition);
    assert!(h.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { sgdlab_quadratic_new(1.0, 1.0, 1, ptr::null_mut()) }, SgdStatus::NullPointer);
    assert!(last_error().contains("out"));

    let mut t = ptr::null_mut();
    let opt = CString::new(r#"{"kind": "sgd", "eta": 1.0}"#).unwrap();
    let st = unsafe { sgdlab_run(ptr::null(), opt.as_ptr(), ptr::null(), 10, 1, false, &mut t) };
    assert_eq!(st, SgdStatus::NullPointer);

    let bytes = [0xffu8, 0xfe, 0];
    let mut out = ptr::null_mut();
    let st = unsafe { sgdlab_instance_from_json(bytes.as_ptr().cast(), &mut out) };
    assert_eq!(st, SgdStatus::InvalidUtf8);

    // null handles are tolerated by the accessors
    unsafe {
        sgdlab_instance_free(ptr::null_mut());
        sgdlab_trajectory_free(ptr::null_mut());
        sgdlab_string_free(ptr::null_mut());
        assert_eq!(sgdlab_instance_dimension(ptr::null()), 0);
        assert_eq!(sgdlab_trajectory_len(ptr::null()), 0);
    }
}

#[test]
fn bad_optimizer_json_is_a_config_error() {
    let h = quadratic(1.0, 0.5, 1);
    let opt = CString::new(r#"{"kind": "sgd", "eta": 1.0, "bogus": 1}"#).unwrap();
    let mut t = ptr::null_mut();
    let st = unsafe { sgdlab_run(h, opt.as_ptr(), ptr::null(), 10, 1, false, &mut t) };
    assert_eq!(st, SgdStatus::Config);
    assert!(last_error().contains("optimizer_spec"));
    unsafe { sgdlab_instance_free(h) };
}

#[test]
fn overflow_is_reported_or_truncated() {
    let h = quadratic(1.0, 0.5, 1);
    let opt = CString::new(r#"{"kind": "sgd", "eta": 50.0}"#).unwrap();
    let mut t = ptr::null_mut();
    let st = unsafe { sgdlab_run(h, opt.as_ptr(), ptr::null(), 1000, 1, false, &mut t) };
    assert_eq!(st, SgdStatus::Overflow);
    assert!(t.is_null());

    let st = unsafe { sgdlab_run(h, opt.as_ptr(), ptr::null(), 1000, 1, true, &mut t) };
    assert_eq!(st, SgdStatus::Ok);
    let len = unsafe { sgdlab_trajectory_len(t) };
    assert!(len > 0 && len < 1000);
    assert_eq!(unsafe { sgdlab_trajectory_overflow_at(t) }, len as i64);
    unsafe {
        sgdlab_trajectory_free(t);
        sgdlab_instance_free(h);
    }
}

#[test]
fn noisy_runs_are_seeded() {
    let h = quadratic(1.0, 0.5, 1);
    let opt = CString::new(r#"{"kind": "sgd", "eta": 0.5, "alpha": 0.5}"#).unwrap();
    let noise = CString::new(r#"{"kind": "gaussian", "sigma": 1.0}"#).unwrap();
    let collect = |seed| {
        let mut t = ptr::null_mut();
        assert_eq!(unsafe { sgdlab_run(h, opt.as_ptr(), noise.as_ptr(), 50, seed, false, &mut t) }, SgdStatus::Ok);
        let mut recs = vec![SgdRecord::default(); 50];
        let mut n = 0;
        unsafe { sgdlab_trajectory_records(t, recs.as_mut_ptr(), 50, &mut n) };
        unsafe { sgdlab_trajectory_free(t) };
        recs.iter().map(|r| r.x1.to_bits()).collect::<Vec<_>>()
    };
    assert_eq!(collect(7), collect(7));
    assert_ne!(collect(7), collect(8));
    unsafe { sgdlab_instance_free(h) };
}

#[test]
fn instance_json_round_trips() {
    let mut h = ptr::null_mut();
    let mut report = SgdHardReport::default();
    let st = unsafe { sgdlab_sgd_hard_new(1.0, 1.0, 8.0, 1000, &mut h, &mut report) };
    assert_eq!(st, SgdStatus::Ok, "{}", last_error());
    assert_eq!(report.t0, sgdlab_hard_instance_t0(8.0, 1.0));
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { sgdlab_instance_to_json(h, &mut json) }, SgdStatus::Ok);
    let text = CString::new(take_string(json)).unwrap();
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { sgdlab_instance_from_json(text.as_ptr(), &mut back) }, SgdStatus::Ok);
    for x in [-3.0, -0.2, 0.0, 0.7, 2.5, report.x_t0, report.x_t0_plus1] {
        let (mut a, mut b) = (0.0, 0.0);
        let (mut ga, mut gb) = ([0.0], [0.0]);
        unsafe {
            sgdlab_instance_evaluate(h, &x, 1, &mut a, ga.as_mut_ptr());
            sgdlab_instance_evaluate(back, &x, 1, &mut b, gb.as_mut_ptr());
        }
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(ga[0].to_bits(), gb[0].to_bits());
    }
    let mut ratio = 0.0;
    assert_eq!(unsafe { sgdlab_instance_verify_smoothness(back, 2000, 3, &mut ratio) }, SgdStatus::Ok);
    assert!(ratio <= 1.0 + 1e-6);
    unsafe {
        sgdlab_instance_free(h);
        sgdlab_instance_free(back);
    }
}

#[test]
fn other_builders_certify() {
    let mut handles = Vec::new();
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(sgdlab_momentum_lb_new(1.0, 1.0, 1.0, 0.5, 500, &mut h), SgdStatus::Ok, "{}", last_error());
        handles.push(h);
        assert_eq!(sgdlab_amsgrad_oscillator_new(0.2, 0.5, 1.0, 1.0, &mut h), SgdStatus::Ok, "{}", last_error());
        handles.push(h);
        assert_eq!(sgdlab_nsgd_noncvg_new(1.0, 1.0, 0.1, 1.0, 0.05, &mut h), SgdStatus::Ok, "{}", last_error());
        handles.push(h);
        assert_eq!(sgdlab_amsgrad_slow_new(1.0, 1.0, 1.0, 0.75, 0.1, 0.999, 1000, &mut h), SgdStatus::Ok, "{}", last_error());
        handles.push(h);
    }
    for h in handles {
        let mut ratio = f64::NAN;
        assert_eq!(unsafe { sgdlab_instance_verify_smoothness(h, 1000, 1, &mut ratio) }, SgdStatus::Ok);
        assert!(ratio <= 1.0 + 1e-6, "ratio {ratio}");
        unsafe { sgdlab_instance_free(h) };
    }
}

#[test]
fn theory_wrappers_follow_absent_parameters() {
    let mut req = sgdlab_bound_request_new(1000.0);
    let mut v = 0.0;
    // missing parameters are a precondition failure
    assert_eq!(unsafe { sgdlab_sgd_upper_bound(&req, false, &mut v) }, SgdStatus::Precondition);
    req.eta = 0.5;
    req.l = 1.0;
    req.sigma = 1.0;
    req.delta = 1.0;
    req.alpha = 0.5;
    assert_eq!(unsafe { sgdlab_sgd_upper_bound(&req, false, &mut v) }, SgdStatus::Ok, "{}", last_error());
    let mut w = 0.0;
    assert_eq!(unsafe { sgdlab_sgd_upper_bound(&req, true, &mut w) }, SgdStatus::Ok);
    assert!(v.is_finite() && w.is_finite() && w <= v * (1.0 + 1e-12));

    let mut g = 0.0;
    assert_eq!(unsafe { sgdlab_gamma(5.0, &mut g) }, SgdStatus::Ok);
    assert!((g - 24.0).abs() < 1e-10);
    let mut tau = 0;
    assert_eq!(unsafe { sgdlab_tau_sgd(0.5, 1.0, 0.5, &mut tau) }, SgdStatus::Ok);
    assert_eq!(tau, 0);
}

#[test]
fn fit_power_law_recovers_exponent() {
    let t: Vec<f64> = (1..=1000).map(f64::from).collect();
    let y: Vec<f64> = t.iter().map(|t| 3.0 * t.powf(-0.5)).collect();
    let mut fit = SgdRateFit::default();
    assert_eq!(unsafe { sgdlab_fit_power_law(t.as_ptr(), y.as_ptr(), t.len(), 0.5, &mut fit) }, SgdStatus::Ok);
    assert!((fit.exponent + 0.5).abs() < 1e-12);
    assert!((fit.log_intercept - 3f64.ln()).abs() < 1e-10);
    assert!(fit.window_start < fit.window_end);
}

#[test]
fn run_config_and_reproduction() {
    let cfg = CString::new(
        r#"{
            "experiment_id": "ffi",
            "instance_spec": {"kind": "quadratic", "l": 1.0, "delta": 0.5},
            "optimizer_spec": {"kind": "sgd", "eta": 0.5, "alpha": 0.5},
            "horizon_T": 50,
            "seeds": [1, 2]
        }"#,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out_dir = CString::new(dir.path().to_str().unwrap()).unwrap();
    let mut summary = ptr::null_mut();
    let st = unsafe { sgdlab_run_config(cfg.as_ptr(), 2, out_dir.as_ptr(), &mut summary) };
    assert_eq!(st, SgdStatus::Ok, "{}", last_error());
    let v: serde_json::Value = serde_json::from_str(&take_string(summary)).unwrap();
    assert_eq!(v["spec"]["experiment_id"], "ffi");
    assert!(dir.path().join("ffi_summary.json").exists());

    let bad = CString::new(r#"{"experiment_id": "x"}"#).unwrap();
    assert_eq!(unsafe { sgdlab_run_config(bad.as_ptr(), 1, ptr::null(), &mut summary) }, SgdStatus::Config);

    let mut list = ptr::null_mut();
    assert_eq!(unsafe { sgdlab_list_reproductions(&mut list) }, SgdStatus::Ok);
    assert!(take_string(list).lines().any(|l| l == "amsgrad-oscillator"));

    let name = CString::new("amsgrad-oscillator").unwrap();
    let st = unsafe { sgdlab_run_reproduction(name.as_ptr(), 2, ptr::null(), &mut summary) };
    assert_eq!(st, SgdStatus::Ok, "{}", last_error());
    assert!(!take_string(summary).is_empty());

    let name = CString::new("no-such-entry").unwrap();
    assert_ne!(unsafe { sgdlab_run_reproduction(name.as_ptr(), 1, ptr::null(), &mut summary) }, SgdStatus::Ok);
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/sgdlab.h")).unwrap();
    for sym in [
        "SgdStatus",
        "SgdRecord",
        "SgdBoundRequest",
        "sgdlab_last_error_message",
        "sgdlab_quadratic_new",
        "sgdlab_run",
        "sgdlab_trajectory_records",
        "sgdlab_sgd_upper_bound",
        "sgdlab_run_config",
        "sgdlab_run_reproduction",
        "sgdlab_string_free",
    ] {
        assert!(header.contains(sym), "header lacks {sym}");
    }
    let v = unsafe { CStr::from_ptr(sgdlab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
