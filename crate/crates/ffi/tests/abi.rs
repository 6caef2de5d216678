use std::ffi::{CStr, CString};
use std::ptr;

use dmsel_ffi::*;

const DATA: &str = "A,B,S\n\
0,0,x\n0,0,x\n0,1,x\n1,1,y\n1,1,y\n1,0,y\n0,0,x\n1,1,y\n0,0,x\n1,1,y\n\
0,1,x\n1,0,y\n0,0,x\n1,1,y\n0,0,x\n1,1,y\n0,0,y\n1,1,x\n0,0,x\n1,1,y\n";

fn parse(text: &str) -> *mut DmselDataset {
    let text = CString::new(text).unwrap();
    let class = CString::new("S").unwrap();
    let mut ds = ptr::null_mut();
    let status = unsafe { dmsel_dataset_parse(text.as_ptr(), class.as_ptr(), b',' as _, &mut ds) };
    assert_eq!(status, DmselStatus::Ok);
    ds
}

fn last_error() -> String {
    let p = dmsel_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn select_notation_and_evaluate() {
    let ds = parse(DATA);
    assert_eq!(unsafe { dmsel_dataset_total(ds) }, 20);

    let (mut train, mut test) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(
        unsafe { dmsel_dataset_split(ds, 1, 4, 7, &mut train, &mut test) },
        DmselStatus::Ok
    );
    assert_eq!(unsafe { dmsel_dataset_total(test) }, 5);
    assert_eq!(unsafe { dmsel_dataset_total(train) }, 15);

    let mut model = ptr::null_mut();
    let status = unsafe {
        dmsel_select(
            train,
            DmselDirection::Backward,
            DmselCriterion::Aic,
            0.0,
            0,
            0,
            &mut model,
        )
    };
    assert_eq!(status, DmselStatus::Ok);
    assert!(unsafe { dmsel_model_complexity(model) } <= 3);

    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { dmsel_model_notation(model, &mut s) },
        DmselStatus::Ok
    );
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    assert!(text.starts_with('('));
    unsafe { dmsel_string_free(s) };

    let mut metrics = DmselMetrics::default();
    assert_eq!(
        unsafe { dmsel_evaluate(model, train, test, &mut metrics) },
        DmselStatus::Ok
    );
    assert_eq!(metrics.n_test, 5);
    assert!(metrics.accuracy <= metrics.recall);

    unsafe {
        dmsel_model_free(model);
        dmsel_dataset_free(train);
        dmsel_dataset_free(test);
        dmsel_dataset_free(ds);
    }
}

#[test]
fn parsed_model_round_trips() {
    let ds = parse(DATA);
    let notation = CString::new("(B S)(A S)").unwrap();
    let mut model = ptr::null_mut();
    assert_eq!(
        unsafe { dmsel_model_parse(ds, notation.as_ptr(), &mut model) },
        DmselStatus::Ok
    );
    assert_eq!(unsafe { dmsel_model_complexity(model) }, 2);
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { dmsel_model_notation(model, &mut s) },
        DmselStatus::Ok
    );
    assert_eq!(unsafe { CStr::from_ptr(s) }.to_str().unwrap(), "(A S)(B S)");
    unsafe {
        dmsel_string_free(s);
        dmsel_model_free(model);
        dmsel_dataset_free(ds);
    }
}

#[test]
fn errors_map_to_codes() {
    let text = CString::new("A,S\n0,x\n1\n").unwrap();
    let class = CString::new("S").unwrap();
    let mut ds = ptr::null_mut();
    let status = unsafe { dmsel_dataset_parse(text.as_ptr(), class.as_ptr(), b',' as _, &mut ds) };
    assert_eq!(status, DmselStatus::Parse);
    assert!(last_error().contains("line 3"), "{}", last_error());
    assert!(ds.is_null());

    let missing = CString::new("Q").unwrap();
    let status =
        unsafe { dmsel_dataset_parse(text.as_ptr(), missing.as_ptr(), b',' as _, &mut ds) };
    assert_eq!(status, DmselStatus::Parse);

    let status = unsafe { dmsel_dataset_parse(ptr::null(), class.as_ptr(), b',' as _, &mut ds) };
    assert_eq!(status, DmselStatus::NullPointer);

    let ds = parse(DATA);
    let unknown = CString::new("(A Z)").unwrap();
    let mut model = ptr::null_mut();
    assert_eq!(
        unsafe { dmsel_model_parse(ds, unknown.as_ptr(), &mut model) },
        DmselStatus::Notation
    );

    let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(
        unsafe { dmsel_dataset_split(ds, 3, 2, 0, &mut a, &mut b) },
        DmselStatus::InvalidFraction
    );

    let mut model = ptr::null_mut();
    let status = unsafe {
        dmsel_select(
            ds,
            DmselDirection::Forward,
            DmselCriterion::Chi2,
            1.5,
            0,
            0,
            &mut model,
        )
    };
    assert_eq!(status, DmselStatus::InvalidConfig);
    unsafe { dmsel_dataset_free(ds) };
}

#[test]
fn chi_square_cdf_through_abi() {
    let mut p = 0.0;
    assert_eq!(
        unsafe { dmsel_chi_square_cdf(2.0, 2, &mut p) },
        DmselStatus::Ok
    );
    assert!((p - 0.6321205588285577).abs() < 1e-12);
    assert_eq!(
        unsafe { dmsel_chi_square_cdf(1.0, 0, &mut p) },
        DmselStatus::InvalidDof
    );
}

#[test]
fn header_declares_the_interface() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/dmsel.h")).unwrap();
    for name in [
        "dmsel_last_error_message",
        "dmsel_string_free",
        "dmsel_dataset_parse",
        "dmsel_dataset_free",
        "dmsel_dataset_split",
        "dmsel_select",
        "dmsel_model_parse",
        "dmsel_model_notation",
        "dmsel_model_complexity",
        "dmsel_evaluate",
        "dmsel_chi_square_cdf",
        "typedef struct DmselDataset DmselDataset",
        "DMSEL_STATUS_OK = 0",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"dmsel.h\"\n\
         int main(void) {\n\
           DmselDataset *ds = 0;\n\
           enum DmselStatus s = dmsel_dataset_parse(\"A,S\\n0,x\\n\", \"S\", ',', &ds);\n\
           dmsel_dataset_free(ds);\n\
           return s == DMSEL_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let compiler = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = std::process::Command::new(compiler)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .status()
        .expect("a C compiler on PATH");
    assert!(status.success());
}
