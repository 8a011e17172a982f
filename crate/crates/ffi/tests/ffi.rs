use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use chaingraph_ffi::*;

const FIG2: &str = "model fig2 {
  node a; node b; node c; node d; node e; node f; node g; node h;
  a -- b; b -> c; a -> d; c -> d; c -> e; b -> f;
  e -- f; f -- h; h -- g; g -- e;
}";

fn parse(src: &str) -> *mut CgModel {
    let src = CString::new(src).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { cg_model_parse(src.as_ptr(), &mut m) }, CgStatus::Ok);
    assert!(!m.is_null());
    m
}

fn take(s: *mut std::ffi::c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { cg_string_free(s) };
    out
}

fn last_error() -> String {
    let p = cg_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn components_subgraphs_and_factorization() {
    let m = parse(FIG2);
    let mut n = 0usize;
    assert_eq!(unsafe { cg_node_count(m, &mut n) }, CgStatus::Ok);
    assert_eq!(n, 8);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cg_components(m, &mut s) }, CgStatus::Ok);
    assert_eq!(take(s), "a b\nc\nd\ne f g h\n");
    assert_eq!(unsafe { cg_subgraphs(m, &mut s) }, CgStatus::Ok);
    assert_eq!(take(s), "a b\nc d\ne f g h\n");
    assert_eq!(
        unsafe { cg_factorize(m, CgFormat::Text, ptr::null(), &mut s) },
        CgStatus::Ok
    );
    assert_eq!(
        take(s),
        "p(a,b) p(c|b) p(d|a,c) f_0(b,c) f_1(c,e) f_2(b,f) f_3(e,f) f_4(f,h) f_5(h,g) f_6(g,e)"
    );
    assert_eq!(unsafe { cg_dot(m, &mut s) }, CgStatus::Ok);
    assert!(take(s).starts_with("digraph \"fig2\" {"));
    unsafe { cg_model_free(m) };
}

#[test]
fn queries() {
    let m = parse(FIG2);
    let mut ans = false;
    let q = CString::new("a _||_ e | b,c").unwrap();
    assert_eq!(unsafe { cg_query(m, q.as_ptr(), &mut ans) }, CgStatus::Ok);
    assert!(ans);
    let q = CString::new("b _||_ c").unwrap();
    assert_eq!(unsafe { cg_query(m, q.as_ptr(), &mut ans) }, CgStatus::Ok);
    assert!(!ans);
    let q = CString::new("b _||_ zz").unwrap();
    assert_eq!(unsafe { cg_query(m, q.as_ptr(), &mut ans) }, CgStatus::Usage);
    assert!(last_error().contains("zz"));
    unsafe { cg_model_free(m) };
}

#[test]
fn plated_factorization_with_bindings() {
    let m = parse("model coin { node t; plate Tosses [N] { obs node heads; } t -> heads; }");
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { cg_factorize(m, CgFormat::Text, ptr::null(), &mut s) },
        CgStatus::Ok
    );
    assert_eq!(take(s), "p(t) ∏_{i∈Tosses} p(heads_i|t)");
    let b = CString::new("N=2").unwrap();
    assert_eq!(
        unsafe { cg_factorize(m, CgFormat::Text, b.as_ptr(), &mut s) },
        CgStatus::Ok
    );
    assert_eq!(take(s), "p(t) p(heads_1|t) p(heads_2|t)");
    let b = CString::new("N=x").unwrap();
    assert_eq!(
        unsafe { cg_factorize(m, CgFormat::Text, b.as_ptr(), &mut s) },
        CgStatus::Usage
    );
    unsafe { cg_model_free(m) };
}

#[test]
fn errors_are_reported() {
    let src = CString::new("model m { a -> ; }").unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { cg_model_parse(src.as_ptr(), &mut m) }, CgStatus::InvalidModel);
    assert!(m.is_null());
    assert!(last_error().contains("error"));

    assert_eq!(unsafe { cg_model_parse(ptr::null(), &mut m) }, CgStatus::NullArgument);
    let bad = [0xffu8, 0];
    assert_eq!(
        unsafe { cg_model_parse(bad.as_ptr().cast(), &mut m) },
        CgStatus::InvalidUtf8
    );
    let path = CString::new("/nonexistent/model.cg").unwrap();
    assert_eq!(unsafe { cg_model_load(path.as_ptr(), &mut m) }, CgStatus::Io);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cg_components(ptr::null(), &mut s) }, CgStatus::NullArgument);
    unsafe {
        cg_model_free(ptr::null_mut());
        cg_string_free(ptr::null_mut());
    }
}

#[test]
fn load_corpus_file() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models/fig3.cg");
    let path = CString::new(path.to_str().unwrap()).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { cg_model_load(path.as_ptr(), &mut m) }, CgStatus::Ok);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cg_subgraphs(m, &mut s) }, CgStatus::Ok);
    assert_eq!(take(s), "a b\nc d\ne f\n");
    unsafe { cg_model_free(m) };
}

#[test]
fn header_compiles_as_c() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = root.join("include/chaingraph.h");
    assert!(header.exists());
    let text = std::fs::read_to_string(&header).unwrap();
    for f in [
        "cg_model_parse",
        "cg_model_free",
        "cg_last_error",
        "cg_string_free",
        "typedef struct CgModel CgModel",
    ] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("use.c");
    std::fs::write(
        &c,
        "#include \"chaingraph.h\"\nint main(void) { CgModel *m = 0; CgStatus s = cg_model_parse(\"\", &m); cg_model_free(m); return s == CG_STATUS_OK; }\n",
    )
    .unwrap();
    match Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-I")
        .arg(root.join("include"))
        .arg(&c)
        .output()
    {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler, skipping syntax check"),
    }
}
