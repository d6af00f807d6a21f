use std::ffi::{CStr, CString};
use std::ptr;

use medium_ffi::*;

fn coeff(spec: &str) -> *mut MediumCoeff {
    let s = CString::new(spec).unwrap();
    let mut c = ptr::null_mut();
    assert_eq!(
        unsafe { medium_coeff_parse(s.as_ptr(), &mut c) },
        MediumStatus::Ok
    );
    assert!(!c.is_null());
    c
}

fn last_error() -> String {
    let p = medium_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

fn compare(a: &[u64], b: &[u64], c: *const MediumCoeff) -> i32 {
    let mut out = 7;
    let st =
        unsafe { medium_compare_weight(a.as_ptr(), a.len(), b.as_ptr(), b.len(), c, &mut out) };
    assert_eq!(
        st,
        MediumStatus::Ok,
        "{}",
        if st == MediumStatus::Ok {
            String::new()
        } else {
            last_error()
        }
    );
    out
}

#[test]
fn weight_comparison_matches_direct_evaluation() {
    // [1, 3] against [1, 0, 1]: 1 + 3c against 1 + c^2
    for (spec, c) in [("2", 2.0f64), ("3", 3.0), ("5", 5.0), ("ghost", 1.0)] {
        let h = coeff(spec);
        let lhs = 1.0 + 3.0 * c;
        let rhs = 1.0 + c * c;
        let expected = lhs.partial_cmp(&rhs).unwrap() as i32;
        assert_eq!(compare(&[1, 3], &[1, 0, 1], h), expected, "c = {spec}");
        unsafe { medium_coeff_free(h) };
    }
    let b = coeff("bitcoin");
    assert_eq!(compare(&[1, 3], &[1, 0, 1], b), -1);
    assert!(unsafe { medium_coeff_approx(b) }.is_infinite());
    unsafe { medium_coeff_free(b) };

    let root = coeff("10001521^(1/100)");
    let approx = unsafe { medium_coeff_approx(root) };
    assert!((approx - 10_001_521f64.powf(0.01)).abs() < 1e-12);
    assert_eq!(compare(&[1, 2, 1], &[1, 2, 1], root), 0);
    assert_eq!(compare(&[1, 1, 0, 1], &[1, 3, 1], root), -1);
    unsafe { medium_coeff_free(root) };
}

#[test]
fn errors_carry_status_and_message() {
    let bad = CString::new("10001522^(1/10)").unwrap();
    let mut c = ptr::null_mut();
    assert_eq!(
        unsafe { medium_coeff_parse(bad.as_ptr(), &mut c) },
        MediumStatus::InvalidArgument
    );
    assert!(c.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(
        unsafe { medium_coeff_parse(ptr::null(), &mut c) },
        MediumStatus::NullPointer
    );
    assert!(last_error().contains("spec"));

    let h = coeff("ghost");
    assert!(medium_last_error().is_null());
    let mut out = 0;
    let st = unsafe { medium_compare_weight(ptr::null(), 2, [1u64].as_ptr(), 1, h, &mut out) };
    assert_eq!(st, MediumStatus::NullPointer);
    unsafe { medium_coeff_free(h) };
    unsafe { medium_coeff_free(ptr::null_mut()) };
    unsafe { medium_tree_free(ptr::null_mut()) };
    unsafe { medium_results_free(ptr::null_mut()) };
}

#[test]
fn main_chain_depends_on_coefficient() {
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { medium_tree_new(&mut t) }, MediumStatus::Ok);
    let mut id = 0;
    // bush: genesis -> a -> {a1, a2, a3}; chain: genesis -> b -> b1 -> b2
    unsafe {
        medium_tree_extend(t, 0, 0, &mut id);
        let a = id;
        for _ in 0..3 {
            medium_tree_extend(t, a, 0, &mut id);
        }
        medium_tree_extend(t, 0, 1, &mut id);
        let b = id;
        medium_tree_extend(t, b, 1, &mut id);
        let b1 = id;
        medium_tree_extend(t, b1, 1, &mut id);
        assert_eq!(medium_tree_len(t), 8);
        assert_eq!(
            medium_tree_extend(t, 999, 0, &mut id),
            MediumStatus::InvalidArgument
        );
    }
    let chain = |spec: &str| -> Vec<u64> {
        let c = coeff(spec);
        let mut buf = [0u64; 8];
        let mut len = 0;
        let st = unsafe { medium_tree_main_chain(t, c, buf.as_mut_ptr(), buf.len(), &mut len) };
        assert_eq!(st, MediumStatus::Ok);
        unsafe { medium_coeff_free(c) };
        buf[..len].to_vec()
    };
    // ghost: 4 blocks against 3; bitcoin: depth 3 against 2
    assert_eq!(chain("ghost")[..2], [0, 1]);
    assert_eq!(chain("ghost").len(), 3);
    assert_eq!(chain("bitcoin"), vec![0, 5, 6, 7]);
    // 1 + 3c against 1 + c + c^2 turns at c = 2
    assert_eq!(chain("3").len(), 4);

    let c = coeff("bitcoin");
    let mut buf = [0u64; 2];
    let mut len = 0;
    let st = unsafe { medium_tree_main_chain(t, c, buf.as_mut_ptr(), buf.len(), &mut len) };
    assert_eq!(st, MediumStatus::BufferTooSmall);
    assert_eq!(len, 4);
    unsafe {
        medium_coeff_free(c);
        medium_tree_free(t);
    }
}

#[test]
fn derived_parameters_of_default_configuration() {
    let p = medium_params_default();
    assert_eq!((p.n, p.t, p.q, p.lambda), (100, 20, 10, 200));
    let c = coeff("10001521^(1/100)");
    let mut d = MediumDerived::default();
    assert_eq!(unsafe { medium_derive(&p, c, &mut d) }, MediumStatus::Ok);
    assert!((d.alpha - 0.8).abs() < 1e-12);
    assert!((d.beta - 0.2).abs() < 1e-12);
    assert_eq!(d.k_terms, 226);
    assert_eq!(d.k_threshold, 135);
    assert_eq!(d.r, 226);
    assert_eq!(d.r_hat, 113);
    assert!(d.u > 1e4);
    assert!(d.g < 0.0);

    let bad = MediumParams { t: 200, ..p };
    assert_ne!(unsafe { medium_derive(&bad, c, &mut d) }, MediumStatus::Ok);
    unsafe { medium_coeff_free(c) };

    let b = coeff("bitcoin");
    assert_eq!(
        unsafe { medium_derive(&p, b, &mut d) },
        MediumStatus::Analysis
    );
    unsafe { medium_coeff_free(b) };
}

#[test]
fn experiment_rows_and_csv() {
    let text = CString::new("protocols = ghost, 10001521^(1/10)\nn = 20\nt = 4\nq = 5\nrounds = 200\nreps = 2\nt_values = 0, 2, 4\n").unwrap();
    let kind = CString::new("throughput").unwrap();
    let mut res = ptr::null_mut();
    let st = unsafe { medium_experiment_run(text.as_ptr(), kind.as_ptr(), &mut res) };
    assert_eq!(
        st,
        MediumStatus::Ok,
        "{}",
        if st == MediumStatus::Ok {
            String::new()
        } else {
            last_error()
        }
    );
    let n = unsafe { medium_results_len(res) };
    assert!(n > 0);
    let mut row = MediumRow {
        protocol: ptr::null(),
        metric: ptr::null(),
        var: 0.0,
        seed: 0,
        value: 0.0,
    };
    let mut protocols = std::collections::BTreeSet::new();
    for k in 0..n {
        assert_eq!(
            unsafe { medium_results_row(res, k, &mut row) },
            MediumStatus::Ok
        );
        protocols.insert(
            unsafe { CStr::from_ptr(row.protocol) }
                .to_str()
                .unwrap()
                .to_owned(),
        );
        let metric = unsafe { CStr::from_ptr(row.metric) }.to_str().unwrap();
        if metric == "honest_fraction" {
            assert!((0.0..=1.0).contains(&row.value));
        }
    }
    assert!(protocols.contains("GHOST"));
    assert!(protocols.contains("Medium(10001521^(1/10))"));
    assert_eq!(
        unsafe { medium_results_row(res, n, &mut row) },
        MediumStatus::InvalidArgument
    );

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    assert_eq!(
        unsafe { medium_results_write_csv(res, cpath.as_ptr()) },
        MediumStatus::Ok
    );
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("experiment,protocol,c,var,seed,metric,value\n"));
    assert_eq!(csv.lines().count(), n + 1);
    unsafe { medium_results_free(res) };

    let bad = CString::new("rounds = many\n").unwrap();
    let st = unsafe { medium_experiment_run(bad.as_ptr(), kind.as_ptr(), &mut res) };
    assert_eq!(st, MediumStatus::Config);
}

#[test]
fn header_declares_every_entry_point() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/medium.h")).unwrap();
    for name in [
        "medium_last_error",
        "medium_coeff_parse",
        "medium_coeff_approx",
        "medium_coeff_free",
        "medium_compare_weight",
        "medium_tree_new",
        "medium_tree_free",
        "medium_tree_len",
        "medium_tree_extend",
        "medium_tree_main_chain",
        "medium_params_default",
        "medium_derive",
        "medium_experiment_run",
        "medium_results_len",
        "medium_results_row",
        "medium_results_write_csv",
        "medium_results_free",
        "MEDIUM_STATUS_BUFFER_TOO_SMALL",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
