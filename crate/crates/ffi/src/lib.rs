//! C ABI for meshsmith.
//!
//! Every function returns an [`MsStatus`]; on failure a message is available
//! from [`ms_last_error_message`] on the same thread. Handles are opaque and
//! must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use meshsmith::driver::{smooth_mesh, Smoother};
use meshsmith::io::{read_m2d, write_m2d};
use meshsmith::render::render_svg;
use meshsmith::{quality_report, Mesh, MeshError, Point2};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidMesh = 3,
    Io = 4,
    UnknownSmoother = 5,
    MissingModel = 6,
    BadModel = 7,
    BufferTooSmall = 8,
    Internal = 9,
}

/// Opaque triangle mesh.
pub struct MsMesh {
    inner: Mesh,
}

/// Opaque smoother, possibly holding a loaded model.
pub struct MsSmoother {
    inner: Smoother,
}

/// Whole-mesh quality summary. Angles are in degrees.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MsQuality {
    pub min_angle_min: f64,
    pub min_angle_mean: f64,
    pub max_angle_max: f64,
    pub max_angle_mean: f64,
    pub inv_ar_min: f64,
    pub inv_ar_mean: f64,
    pub weighted_quality: f64,
    pub element_count: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(MsStatus, String);

impl From<MeshError> for Failure {
    fn from(e: MeshError) -> Self {
        let status = match &e {
            MeshError::Io { .. } => MsStatus::Io,
            MeshError::UnknownSmoother(_) => MsStatus::UnknownSmoother,
            MeshError::MissingModel(_) => MsStatus::MissingModel,
            MeshError::VersionMismatch(_) | MeshError::CorruptFile(_) => MsStatus::BadModel,
            MeshError::InvalidConfig(_) => MsStatus::InvalidArgument,
            _ => MsStatus::InvalidMesh,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: MsStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

/// Runs `f`, converting errors and panics into a status plus last-error text.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            MsStatus::Internal
        }
    }
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return fail(MsStatus::NullPointer, format!("{what} is null"));
    }
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => fail(MsStatus::InvalidArgument, format!("{what} is not UTF-8")),
    }
}

unsafe fn mesh_ref<'a>(mesh: *const MsMesh) -> Result<&'a MsMesh, Failure> {
    mesh.as_ref()
        .map_or_else(|| fail(MsStatus::NullPointer, "mesh is null"), Ok)
}

fn store<T>(out: *mut *mut T, value: T) {
    // SAFETY: callers check `out` for null first.
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ms_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ms_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a mesh from `node_count` interleaved `x, y` pairs and
/// `triangle_count` counter-clockwise index triples. `fixed` holds one flag
/// per node or is null; boundary nodes are always fixed.
///
/// # Safety
/// Array pointers must be valid for the stated lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_mesh_new(
    xy: *const f64,
    node_count: usize,
    triangles: *const u32,
    triangle_count: usize,
    fixed: *const u8,
    out: *mut *mut MsMesh,
) -> MsStatus {
    guard(|| {
        if out.is_null() || (xy.is_null() && node_count > 0) || (triangles.is_null() && triangle_count > 0) {
            return fail(MsStatus::NullPointer, "null array or output pointer");
        }
        let coords = if node_count == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(xy, 2 * node_count)
        };
        let tris = if triangle_count == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(triangles, 3 * triangle_count)
        };
        let nodes = coords.chunks_exact(2).map(|c| Point2::new(c[0], c[1])).collect();
        let triangles = tris
            .chunks_exact(3)
            .map(|t| [t[0] as usize, t[1] as usize, t[2] as usize])
            .collect();
        let flags = if fixed.is_null() {
            vec![false; node_count]
        } else {
            std::slice::from_raw_parts(fixed, node_count)
                .iter()
                .map(|&f| f != 0)
                .collect()
        };
        let mut mesh = Mesh::new(nodes, triangles, flags)?;
        mesh.validate_orientation()?;
        mesh.fix_boundary();
        store(out, MsMesh { inner: mesh });
        Ok(())
    })
}

/// Reads an `.m2d` mesh file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_mesh_read(path: *const c_char, out: *mut *mut MsMesh) -> MsStatus {
    guard(|| {
        if out.is_null() {
            return fail(MsStatus::NullPointer, "out is null");
        }
        let mesh = read_m2d(path_arg(path, "path")?)?;
        store(out, MsMesh { inner: mesh });
        Ok(())
    })
}

/// Writes the mesh as an `.m2d` file.
///
/// # Safety
/// `mesh` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ms_mesh_write(mesh: *const MsMesh, path: *const c_char) -> MsStatus {
    guard(|| {
        let mesh = mesh_ref(mesh)?;
        write_m2d(&mesh.inner, path_arg(path, "path")?)?;
        Ok(())
    })
}

/// Releases a mesh. Null is ignored.
///
/// # Safety
/// `mesh` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ms_mesh_free(mesh: *mut MsMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn ms_mesh_node_count(mesh: *const MsMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.inner.node_count())
}

/// Number of triangles, or 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn ms_mesh_triangle_count(mesh: *const MsMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.inner.triangle_count())
}

/// Copies the node coordinates as interleaved `x, y` pairs into `xy`, which
/// holds `len` doubles.
///
/// # Safety
/// `xy` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ms_mesh_copy_nodes(mesh: *const MsMesh, xy: *mut f64, len: usize) -> MsStatus {
    guard(|| {
        let mesh = mesh_ref(mesh)?;
        if xy.is_null() {
            return fail(MsStatus::NullPointer, "xy is null");
        }
        let need = 2 * mesh.inner.node_count();
        if len < need {
            return fail(
                MsStatus::BufferTooSmall,
                format!("need {need} doubles, got {len}"),
            );
        }
        let dst = std::slice::from_raw_parts_mut(xy, need);
        for (d, p) in dst.chunks_exact_mut(2).zip(&mesh.inner.nodes) {
            d[0] = p.x;
            d[1] = p.y;
        }
        Ok(())
    })
}

/// Number of elements with non-positive area, or 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn ms_mesh_negative_elements(mesh: *const MsMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.inner.negative_element_count())
}

/// Computes the quality summary of `mesh`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_mesh_quality(mesh: *const MsMesh, out: *mut MsQuality) -> MsStatus {
    guard(|| {
        let mesh = mesh_ref(mesh)?;
        if out.is_null() {
            return fail(MsStatus::NullPointer, "out is null");
        }
        let r = quality_report(&mesh.inner)?;
        *out = MsQuality {
            min_angle_min: r.min_angle_min,
            min_angle_mean: r.min_angle_mean,
            max_angle_max: r.max_angle_max,
            max_angle_mean: r.max_angle_mean,
            inv_ar_min: r.inv_ar_min,
            inv_ar_mean: r.inv_ar_mean,
            weighted_quality: r.weighted_quality(),
            element_count: r.element_count,
        };
        Ok(())
    })
}

/// Renders the mesh to an SVG file.
///
/// # Safety
/// `mesh` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ms_mesh_render_svg(mesh: *const MsMesh, path: *const c_char) -> MsStatus {
    guard(|| {
        let mesh = mesh_ref(mesh)?;
        render_svg(&mesh.inner, path_arg(path, "path")?)?;
        Ok(())
    })
}

/// Creates a smoother by name: `laplacian`, `smart-laplacian`, `angle`,
/// `cvt`, `optim`, `nn` or `gmsnet`. `model_path` is required for the last
/// two and ignored otherwise; it may be null.
///
/// # Safety
/// `name` and a non-null `model_path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_smoother_new(
    name: *const c_char,
    model_path: *const c_char,
    out: *mut *mut MsSmoother,
) -> MsStatus {
    guard(|| {
        if out.is_null() {
            return fail(MsStatus::NullPointer, "out is null");
        }
        let name = path_arg(name, "name")?;
        let name = name.to_str().expect("checked UTF-8");
        let model = if model_path.is_null() {
            None
        } else {
            Some(path_arg(model_path, "model_path")?)
        };
        let smoother = Smoother::from_name(name, model.as_deref())?;
        store(out, MsSmoother { inner: smoother });
        Ok(())
    })
}

/// Releases a smoother. Null is ignored.
///
/// # Safety
/// `smoother` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ms_smoother_free(smoother: *mut MsSmoother) {
    if !smoother.is_null() {
        drop(Box::from_raw(smoother));
    }
}

/// Smooths `mesh` in place for at most `max_sweeps` sweeps. The executed
/// sweep count is written to `sweeps_out` unless it is null.
///
/// # Safety
/// Handles must come from this library; `sweeps_out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn ms_smooth(
    mesh: *mut MsMesh,
    smoother: *const MsSmoother,
    max_sweeps: u32,
    sweeps_out: *mut u32,
) -> MsStatus {
    guard(|| {
        let Some(mesh) = mesh.as_mut() else {
            return fail(MsStatus::NullPointer, "mesh is null");
        };
        let Some(smoother) = smoother.as_ref() else {
            return fail(MsStatus::NullPointer, "smoother is null");
        };
        let result = smooth_mesh(&mesh.inner, &smoother.inner, max_sweeps as usize)?;
        mesh.inner = result.mesh;
        if !sweeps_out.is_null() {
            *sweeps_out = result.sweeps as u32;
        }
        Ok(())
    })
}
