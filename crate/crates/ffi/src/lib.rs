//! C ABI over `meshsteg`.
//!
//! Meshes and params are opaque handles created and destroyed through this
//! API. Every function returns an [`MstegStatus`]; on failure a message is
//! kept per thread and can be read with [`msteg_last_error`]. Buffers and
//! strings handed out by the library must be released with
//! [`msteg_buffer_free`] and [`msteg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use meshsteg::distortion::{compute_costs, CostOptions, Profile};
use meshsteg::error::StegoError;
use meshsteg::layered::{bits_to_bytes, bytes_to_bits, embed, extract, ChangeSet, EmbedConfig};
use meshsteg::mesh::{parse_mesh, read_mesh, write_mesh, Mesh, MeshFormat};
use meshsteg::params::StegoParams;
use meshsteg::quant::detect_k_star;
use meshsteg::stc::DEFAULT_HEIGHT;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MstegStatus {
    Ok = 0,
    NullPointer = 1,
    Parse = 2,
    Capacity = 3,
    ParamsMismatch = 4,
    InvalidArgument = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MstegFormat {
    Off = 0,
    Ply = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MstegProfile {
    IfpdCs = 0,
    IfpdS1 = 1,
    IfpdS2 = 2,
    IfpdS3 = 3,
    Vnd = 4,
    Gcd = 5,
    Dihedral = 6,
}

/// Embedding knobs. Start from [`msteg_embed_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MstegEmbedOptions {
    /// Bits per vertex used to pick the change set; `<= 0` derives it from
    /// the message length.
    pub alpha: f64,
    /// Decimal digits; negative means detect from the cover.
    pub k_star: i32,
    pub profile: MstegProfile,
    /// Syndrome-trellis constraint height, 6..=15.
    pub stc_height: u32,
    pub seed: u64,
}

/// Opaque mesh handle.
pub struct MstegMesh(Mesh);

/// Opaque params handle.
pub struct MstegParams(StegoParams);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(MstegStatus, String);

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MstegStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MstegStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            MstegStatus::Internal
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(MstegStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(MstegStatus::InvalidArgument, msg.into())
}

unsafe fn cstr<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn bytes<'a>(p: *const u8, len: usize, what: &str) -> Result<&'a [u8], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn format_of(f: MstegFormat) -> MeshFormat {
    match f {
        MstegFormat::Off => MeshFormat::Off,
        MstegFormat::Ply => MeshFormat::Ply,
    }
}

fn profile_of(p: MstegProfile) -> Profile {
    match p {
        MstegProfile::IfpdCs => Profile::IfpdCs,
        MstegProfile::IfpdS1 => Profile::IfpdS1,
        MstegProfile::IfpdS2 => Profile::IfpdS2,
        MstegProfile::IfpdS3 => Profile::IfpdS3,
        MstegProfile::Vnd => Profile::Vnd,
        MstegProfile::Gcd => Profile::Gcd,
        MstegProfile::Dihedral => Profile::Dihedral,
    }
}

fn stego_failure(e: StegoError) -> Failure {
    let status = match e {
        StegoError::Capacity { .. } | StegoError::Gibbs(_) => MstegStatus::Capacity,
        StegoError::MeshMismatch { .. } => MstegStatus::ParamsMismatch,
        StegoError::ChangeSet(_) | StegoError::Stc(_) => MstegStatus::InvalidArgument,
        _ => MstegStatus::Internal,
    };
    Failure(status, e.to_string())
}

fn hand_out(buf: Vec<u8>, out: *mut *mut u8, out_len: *mut usize) {
    let boxed = buf.into_boxed_slice();
    unsafe {
        *out_len = boxed.len();
        *out = Box::into_raw(boxed) as *mut u8;
    }
}

fn hand_out_string(s: String, out: *mut *mut c_char) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure(MstegStatus::Internal, "string contains NUL".into()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn msteg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn msteg_embed_options_default() -> MstegEmbedOptions {
    MstegEmbedOptions {
        alpha: 0.0,
        k_star: -1,
        profile: MstegProfile::IfpdCs,
        stc_height: DEFAULT_HEIGHT,
        seed: 0,
    }
}

/// Parse OFF or PLY text of `len` bytes.
///
/// # Safety
/// `text` must point to `len` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msteg_mesh_parse(
    text: *const u8,
    len: usize,
    format: MstegFormat,
    out: *mut *mut MstegMesh,
) -> MstegStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let raw = bytes(text, len, "text")?;
        let s = std::str::from_utf8(raw).map_err(|_| Failure(MstegStatus::Parse, "mesh text is not UTF-8".into()))?;
        let mesh = parse_mesh(s, format_of(format)).map_err(|e| Failure(MstegStatus::Parse, e.to_string()))?;
        *out = Box::into_raw(Box::new(MstegMesh(mesh)));
        Ok(())
    })
}

/// Read a mesh file; the format follows the extension.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn msteg_mesh_read(path: *const c_char, out: *mut *mut MstegMesh) -> MstegStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = cstr(path, "path")?;
        let (mesh, _) = read_mesh(p.as_ref()).map_err(|e| Failure(MstegStatus::Parse, e.to_string()))?;
        *out = Box::into_raw(Box::new(MstegMesh(mesh)));
        Ok(())
    })
}

/// Render a mesh with `decimals` fixed fractional digits. Free the result
/// with [`msteg_buffer_free`].
///
/// # Safety
/// `mesh` must come from this library; `out` and `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn msteg_mesh_write(
    mesh: *const MstegMesh,
    format: MstegFormat,
    decimals: u32,
    out: *mut *mut u8,
    out_len: *mut usize,
) -> MstegStatus {
    guard(|| {
        let m = mesh.as_ref().ok_or_else(|| null("mesh"))?;
        if out.is_null() || out_len.is_null() {
            return Err(null("out"));
        }
        if decimals > 15 {
            return Err(invalid("decimals must be at most 15"));
        }
        hand_out(write_mesh(&m.0, format_of(format), decimals).into_bytes(), out, out_len);
        Ok(())
    })
}

/// Vertex count, or 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn msteg_mesh_vertex_count(mesh: *const MstegMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.vertex_count())
}

/// Copy the vertex coordinates, `3 * vertex_count` doubles, into `xyz`.
///
/// # Safety
/// `xyz` must have room for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn msteg_mesh_vertices(mesh: *const MstegMesh, xyz: *mut f64, cap: usize) -> MstegStatus {
    guard(|| {
        let m = mesh.as_ref().ok_or_else(|| null("mesh"))?;
        if xyz.is_null() {
            return Err(null("xyz"));
        }
        let v = m.0.vertices();
        if cap < 3 * v.len() {
            return Err(invalid(format!("buffer holds {cap} doubles, need {}", 3 * v.len())));
        }
        let dst = std::slice::from_raw_parts_mut(xyz, 3 * v.len());
        for (d, p) in dst.chunks_exact_mut(3).zip(v) {
            d.copy_from_slice(p);
        }
        Ok(())
    })
}

/// # Safety
/// `mesh` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn msteg_mesh_free(mesh: *mut MstegMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Parse a params file.
///
/// # Safety
/// `text` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn msteg_params_parse(text: *const c_char, out: *mut *mut MstegParams) -> MstegStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let t = cstr(text, "text")?;
        let p: StegoParams = t
            .parse()
            .map_err(|e: meshsteg::error::ParamsError| Failure(MstegStatus::ParamsMismatch, e.to_string()))?;
        *out = Box::into_raw(Box::new(MstegParams(p)));
        Ok(())
    })
}

/// Serialize params; free with [`msteg_string_free`].
///
/// # Safety
/// `params` must come from this library and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn msteg_params_to_text(params: *const MstegParams, out: *mut *mut c_char) -> MstegStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        hand_out_string(p.0.to_text(), out)
    })
}

/// Message length in bytes carried by these params.
///
/// # Safety
/// `params` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn msteg_params_message_bytes(params: *const MstegParams) -> usize {
    params.as_ref().map_or(0, |p| p.0.message_len().div_ceil(8))
}

/// # Safety
/// `params` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn msteg_params_free(params: *mut MstegParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Hide `len` bytes in `cover`. On success `*stego` and `*params` are new
/// handles owned by the caller.
///
/// # Safety
/// Pointers must be valid as described; `options` may be null for defaults.
#[no_mangle]
pub unsafe extern "C" fn msteg_embed(
    cover: *const MstegMesh,
    message: *const u8,
    len: usize,
    options: *const MstegEmbedOptions,
    stego: *mut *mut MstegMesh,
    params: *mut *mut MstegParams,
) -> MstegStatus {
    guard(|| {
        let c = cover.as_ref().ok_or_else(|| null("cover"))?;
        if stego.is_null() || params.is_null() {
            return Err(null("out"));
        }
        let msg = bytes(message, len, "message")?;
        let opts = options.as_ref().copied().unwrap_or_else(|| msteg_embed_options_default());
        let mesh = &c.0;
        let n = mesh.vertex_count();
        let bits = bytes_to_bits(msg);
        let alpha = if opts.alpha > 0.0 {
            opts.alpha
        } else {
            bits.len() as f64 / n.max(1) as f64
        };
        if !alpha.is_finite() {
            return Err(invalid("alpha must be finite"));
        }
        let k = if opts.k_star < 0 {
            detect_k_star(mesh)
        } else {
            opts.k_star as u32
        };
        let cs = ChangeSet::preset(alpha);
        let mut config = EmbedConfig::new(cs.clone());
        config.k_star = k;
        config.stc_height = opts.stc_height;
        config.stc_seed = opts.seed;
        let costs = compute_costs(mesh, k, cs.steps(), profile_of(opts.profile), CostOptions::default())
            .map_err(|e| invalid(e.to_string()))?;
        let out = embed(mesh, &bits, &config, &costs).map_err(stego_failure)?;
        *stego = Box::into_raw(Box::new(MstegMesh(out.stego)));
        *params = Box::into_raw(Box::new(MstegParams(out.params)));
        Ok(())
    })
}

/// Recover the message. Free the buffer with [`msteg_buffer_free`].
///
/// # Safety
/// Handles must come from this library; `out` and `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn msteg_extract(
    stego: *const MstegMesh,
    params: *const MstegParams,
    out: *mut *mut u8,
    out_len: *mut usize,
) -> MstegStatus {
    guard(|| {
        let s = stego.as_ref().ok_or_else(|| null("stego"))?;
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        if out.is_null() || out_len.is_null() {
            return Err(null("out"));
        }
        let bits = extract(&s.0, &p.0).map_err(stego_failure)?;
        hand_out(bits_to_bytes(&bits), out, out_len);
        Ok(())
    })
}

/// # Safety
/// `buf`/`len` must be exactly what this library handed out, or null.
#[no_mangle]
pub unsafe extern "C" fn msteg_buffer_free(buf: *mut u8, len: usize) {
    if !buf.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(buf, len)));
    }
}

/// # Safety
/// `s` must be a string from this library, or null.
#[no_mangle]
pub unsafe extern "C" fn msteg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
