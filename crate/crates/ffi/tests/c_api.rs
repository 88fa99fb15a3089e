use std::ffi::{c_char, CStr, CString};
use std::ptr;

use nodal_zeta_ffi::*;

const CAYLEY: &str = r#"
n = 3
polynomial = "x1*x2*x3 + x0*x2*x3 + x0*x1*x3 + x0*x1*x2"
prime = 5
nodes = [["1","0","0","0"], ["0","1","0","0"], ["0","0","1","0"], ["0","0","0","1"]]
"#;

type Getter = unsafe extern "C" fn(*const NzZeta, *mut c_char, usize, *mut usize) -> NzStatus;

/// Calls a string getter twice: once to learn the size, once to fill the buffer.
unsafe fn read_string(zeta: *const NzZeta, get: Getter) -> String {
    let mut needed = 0usize;
    assert_eq!(get(zeta, ptr::null_mut(), 0, &mut needed), NzStatus::BufferTooSmall);
    let mut buf = vec![0 as c_char; needed];
    assert_eq!(get(zeta, buf.as_mut_ptr(), buf.len(), &mut needed), NzStatus::Ok);
    CStr::from_ptr(buf.as_ptr()).to_str().unwrap().to_string()
}

unsafe fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let mut needed = 0usize;
    nz_last_error(buf.as_mut_ptr(), buf.len(), &mut needed);
    CStr::from_ptr(buf.as_ptr()).to_str().unwrap().to_string()
}

#[test]
fn cayley_round_trip() {
    unsafe {
        let text = CString::new(CAYLEY).unwrap();
        let mut problem = ptr::null_mut();
        assert_eq!(nz_problem_parse(text.as_ptr(), &mut problem), NzStatus::Ok);
        let mut zeta = ptr::null_mut();
        assert_eq!(nz_zeta_compute(problem, 0, 0, 0, &mut zeta), NzStatus::Ok);
        assert_eq!(nz_zeta_degree(zeta), 2);
        assert_eq!(nz_zeta_certified(zeta), 1);

        let coeffs: Vec<String> = (0..3)
            .map(|i| {
                let mut buf = vec![0 as c_char; 32];
                let mut needed = 0;
                assert_eq!(nz_zeta_coefficient(zeta, i, buf.as_mut_ptr(), buf.len(), &mut needed), NzStatus::Ok);
                CStr::from_ptr(buf.as_ptr()).to_str().unwrap().to_string()
            })
            .collect();
        assert_eq!(coeffs, ["1", "-10", "25"]);
        assert_eq!(read_string(zeta, nz_zeta_to_string), "1/((1-T)(1-5T)^3(1-25T))");
        assert_eq!(read_string(zeta, nz_zeta_factored), "(1-5T)^2");

        let mut count = 0u64;
        assert_eq!(nz_count_points(problem, 5, 1, 0, &mut count), NzStatus::Ok);
        assert_eq!(count, 41);

        nz_zeta_free(zeta);
        nz_problem_free(problem);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut problem = ptr::null_mut();
        let bad = CString::new("n = 3\npolynomial = \"x0^2 +\"").unwrap();
        assert_eq!(nz_problem_parse(bad.as_ptr(), &mut problem), NzStatus::Parse);
        assert!(problem.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(nz_problem_parse(ptr::null(), &mut problem), NzStatus::NullPointer);

        // two nodes over Q, four singular points over F_5
        let text = include_str!("../../core/data/quartic_two_nodes.toml");
        let two = CString::new(text).unwrap();
        assert_eq!(nz_problem_parse(two.as_ptr(), &mut problem), NzStatus::Ok);
        let mut zeta = ptr::null_mut();
        assert_eq!(nz_zeta_compute(problem, 0, 0, 0, &mut zeta), NzStatus::Equisingularity);
        assert!(zeta.is_null());
        assert!(last_error().contains('5'));
        nz_problem_free(problem);

        let mut out = 0u64;
        assert_eq!(nz_count_points(ptr::null(), 5, 1, 0, &mut out), NzStatus::NullPointer);
        nz_zeta_free(ptr::null_mut());
        nz_problem_free(ptr::null_mut());
    }
}
