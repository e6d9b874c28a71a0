use std::ffi::{CStr, CString};
use std::ptr;

use meshsmith_ffi::*;

/// Unit square split into four triangles around a displaced center node 0.
fn fan_mesh() -> *mut MsMesh {
    let xy = [0.3, 0.7, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0];
    let tris: [u32; 12] = [0, 1, 2, 0, 2, 3, 0, 3, 4, 0, 4, 1];
    let mut mesh = ptr::null_mut();
    let status = unsafe { ms_mesh_new(xy.as_ptr(), 5, tris.as_ptr(), 4, ptr::null(), &mut mesh) };
    assert_eq!(status, MsStatus::Ok);
    mesh
}

fn last_error() -> String {
    let p = ms_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn smoother(name: &str) -> *mut MsSmoother {
    let name = CString::new(name).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { ms_smoother_new(name.as_ptr(), ptr::null(), &mut s) },
        MsStatus::Ok
    );
    s
}

#[test]
fn laplacian_moves_center_to_centroid() {
    let mesh = fan_mesh();
    let s = smoother("laplacian");
    let mut sweeps = 0u32;
    assert_eq!(unsafe { ms_smooth(mesh, s, 100, &mut sweeps) }, MsStatus::Ok);
    assert!(sweeps <= 3);
    let mut xy = [0.0; 10];
    assert_eq!(
        unsafe { ms_mesh_copy_nodes(mesh, xy.as_mut_ptr(), xy.len()) },
        MsStatus::Ok
    );
    assert_eq!(&xy[..2], &[0.5, 0.5]);
    assert_eq!(&xy[2..4], &[0.0, 0.0]);
    unsafe {
        assert_eq!(ms_mesh_node_count(mesh), 5);
        assert_eq!(ms_mesh_triangle_count(mesh), 4);
        assert_eq!(ms_mesh_negative_elements(mesh), 0);
        ms_smoother_free(s);
        ms_mesh_free(mesh);
    }
}

#[test]
fn quality_of_centered_fan() {
    let mesh = fan_mesh();
    let s = smoother("laplacian");
    let mut q = MsQuality::default();
    unsafe {
        ms_smooth(mesh, s, 100, ptr::null_mut());
        assert_eq!(ms_mesh_quality(mesh, &mut q), MsStatus::Ok);
        ms_smoother_free(s);
        ms_mesh_free(mesh);
    }
    // four right isosceles triangles: angles 45/45/90, 1/q = 4√3·(1/4) / 2
    assert_eq!(q.element_count, 4);
    assert!((q.min_angle_min - 45.0).abs() < 1e-9);
    assert!((q.max_angle_max - 90.0).abs() < 1e-9);
    assert!((q.inv_ar_mean - 3f64.sqrt() / 2.0).abs() < 1e-12);
}

#[test]
fn error_codes_and_messages() {
    let name = CString::new("getme").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { ms_smoother_new(name.as_ptr(), ptr::null(), &mut s) },
        MsStatus::UnknownSmoother
    );
    assert!(s.is_null());
    assert!(last_error().contains("getme"));

    let name = CString::new("gmsnet").unwrap();
    assert_eq!(
        unsafe { ms_smoother_new(name.as_ptr(), ptr::null(), &mut s) },
        MsStatus::MissingModel
    );

    let missing = CString::new("/nonexistent/model.json").unwrap();
    assert_eq!(
        unsafe { ms_smoother_new(name.as_ptr(), missing.as_ptr(), &mut s) },
        MsStatus::Io
    );

    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { ms_mesh_read(ptr::null(), &mut out) },
        MsStatus::NullPointer
    );
    assert_eq!(
        unsafe { ms_smooth(ptr::null_mut(), ptr::null(), 1, ptr::null_mut()) },
        MsStatus::NullPointer
    );

    let mesh = fan_mesh();
    let mut small = [0.0; 3];
    assert_eq!(
        unsafe { ms_mesh_copy_nodes(mesh, small.as_mut_ptr(), small.len()) },
        MsStatus::BufferTooSmall
    );
    unsafe { ms_mesh_free(mesh) };
}

#[test]
fn clockwise_input_is_rejected() {
    let xy = [0.0, 0.0, 1.0, 0.0, 0.0, 1.0];
    let tris: [u32; 3] = [0, 2, 1];
    let mut mesh = ptr::null_mut();
    let status = unsafe { ms_mesh_new(xy.as_ptr(), 3, tris.as_ptr(), 1, ptr::null(), &mut mesh) };
    assert_eq!(status, MsStatus::InvalidMesh);
    assert!(mesh.is_null());
    let tris: [u32; 3] = [0, 1, 7];
    let status = unsafe { ms_mesh_new(xy.as_ptr(), 3, tris.as_ptr(), 1, ptr::null(), &mut mesh) };
    assert_eq!(status, MsStatus::InvalidMesh);
}

#[test]
fn file_round_trip_and_render() {
    let dir = tempfile::tempdir().unwrap();
    let m2d = CString::new(dir.path().join("fan.m2d").to_str().unwrap()).unwrap();
    let svg = CString::new(dir.path().join("fan.svg").to_str().unwrap()).unwrap();
    let mesh = fan_mesh();
    let mut back = ptr::null_mut();
    unsafe {
        assert_eq!(ms_mesh_write(mesh, m2d.as_ptr()), MsStatus::Ok);
        assert_eq!(ms_mesh_read(m2d.as_ptr(), &mut back), MsStatus::Ok);
        assert_eq!(ms_mesh_render_svg(back, svg.as_ptr()), MsStatus::Ok);
    }
    let (mut a, mut b) = ([0.0; 10], [0.0; 10]);
    unsafe {
        ms_mesh_copy_nodes(mesh, a.as_mut_ptr(), 10);
        ms_mesh_copy_nodes(back, b.as_mut_ptr(), 10);
        ms_mesh_free(mesh);
        ms_mesh_free(back);
    }
    assert_eq!(a, b);
    let text = std::fs::read_to_string(dir.path().join("fan.svg")).unwrap();
    assert_eq!(text.matches("<polygon").count(), 4);
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(ms_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn free_accepts_null() {
    unsafe {
        ms_mesh_free(ptr::null_mut());
        ms_smoother_free(ptr::null_mut());
        assert_eq!(ms_mesh_node_count(ptr::null()), 0);
    }
}
