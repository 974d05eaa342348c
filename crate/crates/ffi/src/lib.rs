//! C ABI for `dimerchain`.
//!
//! Geometries and coupling parameters are opaque heap handles created by
//! `dc_*_new`/`dc_geometry_*` and released with the matching `*_free`.
//! Every fallible function returns a [`DcStatus`]; on failure a message is
//! available from [`dc_last_error_message`] on the same thread. Output
//! pointers are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use dimerchain::bidirectional::{self, Solver};
use dimerchain::disorder::{ensemble_ln_t, estimate_localization, DisorderModel, DisorderUnits, EnsembleSpec};
use dimerchain::{build_periodic_chain, chiral, dipole_coupling, ChainGeometry, Coupling, CouplingParams, Error, ScatteringResult, Waveguide};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidGeometry = 3,
    InvalidParams = 4,
    Domain = 5,
    Singular = 6,
    IllConditioned = 7,
    DisorderTooStrong = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcWaveguide {
    Chiral = 0,
    Bidirectional = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcDisorderTarget {
    DimerLength = 0,
    DimerSeparation = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcDisorderUnits {
    LengthNm = 0,
    PhaseRadians = 1,
}

/// Opaque chain geometry.
pub struct DcGeometry(ChainGeometry);

/// Opaque waveguide and coupling parameters.
pub struct DcParams(CouplingParams);

/// Response of a chain at one detuning.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DcScattering {
    pub t_re: f64,
    pub t_im: f64,
    pub r_re: f64,
    pub r_im: f64,
    pub transmission: f64,
    pub reflection: f64,
    /// `ln T`; finite even where `transmission` underflows to zero.
    pub ln_transmission: f64,
}

/// Localization fit of `<ln T>` against the number of dimers.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DcLocalization {
    /// Localization length in dimers; `+inf` when `<ln T>` does not decay.
    pub xi: f64,
    pub xi_stderr: f64,
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(error: &Error) -> DcStatus {
    match error {
        Error::Domain(_) => DcStatus::Domain,
        Error::InvalidGeometry(_) => DcStatus::InvalidGeometry,
        Error::InvalidParams(_) => DcStatus::InvalidParams,
        Error::Singular { .. } => DcStatus::Singular,
        Error::IllConditioned { .. } => DcStatus::IllConditioned,
        Error::DisorderTooStrong { .. } => DcStatus::DisorderTooStrong,
    }
}

struct Failure(DcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DcStatus::NullPointer, format!("{what} is NULL"))
}

/// Runs `body`, converting errors and panics into a status plus message.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> DcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            DcStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal panic: {message}"));
            DcStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Boxes `value` into a handle only once `out` is known to be writable.
unsafe fn write_handle<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dc_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Message of the last failed call on this thread (empty after a success).
/// The pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn dc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Near-field dipole-dipole coupling at `distance_nm`, in units of Γ₀.
///
/// # Safety
/// `out` must be NULL or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn dc_dipole_coupling(distance_nm: f64, lambda_nm: f64, prefactor: f64, out: *mut f64) -> DcStatus {
    guard(|| write(out, dipole_coupling(distance_nm, lambda_nm, prefactor)?))
}

/// Periodic chain of `dimers` dimers.
///
/// # Safety
/// `out` must be NULL or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn dc_geometry_periodic(
    dimers: usize,
    length_nm: f64,
    separation_nm: f64,
    out: *mut *mut DcGeometry,
) -> DcStatus {
    guard(|| {
        let geometry = build_periodic_chain(dimers, length_nm, separation_nm)?;
        write_handle(out, DcGeometry(geometry))
    })
}

/// Chain from `count` sorted atom positions (nm); consecutive pairs form dimers.
///
/// # Safety
/// `positions` must point to `count` readable doubles; `out` must be NULL or
/// valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn dc_geometry_from_positions(
    positions: *const f64,
    count: usize,
    out: *mut *mut DcGeometry,
) -> DcStatus {
    guard(|| {
        if positions.is_null() {
            return Err(null("positions"));
        }
        let slice = std::slice::from_raw_parts(positions, count);
        let geometry = ChainGeometry::from_positions(slice.to_vec())?;
        write_handle(out, DcGeometry(geometry))
    })
}

/// Number of dimers, or 0 for NULL.
///
/// # Safety
/// `geometry` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dc_geometry_dimer_count(geometry: *const DcGeometry) -> usize {
    geometry.as_ref().map_or(0, |g| g.0.dimer_count())
}

/// Releases a geometry. NULL is ignored.
///
/// # Safety
/// `geometry` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dc_geometry_free(geometry: *mut DcGeometry) {
    if !geometry.is_null() {
        drop(Box::from_raw(geometry));
    }
}

unsafe fn new_params(
    waveguide: DcWaveguide,
    gamma: f64,
    loss: f64,
    lambda_nm: f64,
    coupling: Coupling,
    out: *mut *mut DcParams,
) -> DcStatus {
    guard(|| {
        let waveguide = match waveguide {
            DcWaveguide::Chiral => Waveguide::Chiral,
            DcWaveguide::Bidirectional => Waveguide::Bidirectional,
        };
        let params = CouplingParams::for_waveguide(waveguide, gamma, loss, lambda_nm, coupling)?;
        write_handle(out, DcParams(params))
    })
}

/// Parameters with the same coupling `j` for every dimer. Rates are in
/// units of Γ₀; `gamma` is the decay rate into each guided mode and `loss`
/// the rate into everything else.
///
/// # Safety
/// `out` must be NULL or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn dc_params_new(
    waveguide: DcWaveguide,
    gamma: f64,
    loss: f64,
    lambda_nm: f64,
    j: f64,
    out: *mut *mut DcParams,
) -> DcStatus {
    new_params(waveguide, gamma, loss, lambda_nm, Coupling::Fixed(j), out)
}

/// Parameters whose coupling follows the near-field law of each dimer's
/// length, scaled so that a dimer of `anchor_length_nm` has coupling `j`.
///
/// # Safety
/// `out` must be NULL or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn dc_params_new_anchored(
    waveguide: DcWaveguide,
    gamma: f64,
    loss: f64,
    lambda_nm: f64,
    j: f64,
    anchor_length_nm: f64,
    out: *mut *mut DcParams,
) -> DcStatus {
    let coupling = Coupling::Anchored {
        j,
        length_nm: anchor_length_nm,
    };
    new_params(waveguide, gamma, loss, lambda_nm, coupling, out)
}

/// Releases parameters. NULL is ignored.
///
/// # Safety
/// `params` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dc_params_free(params: *mut DcParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

fn to_scattering(r: &ScatteringResult) -> DcScattering {
    DcScattering {
        t_re: r.t.re,
        t_im: r.t.im,
        r_re: r.r.re,
        r_im: r.r.im,
        transmission: r.transmission,
        reflection: r.reflection,
        ln_transmission: r.ln_transmission,
    }
}

unsafe fn transmission(
    geometry: *const DcGeometry,
    params: *const DcParams,
    delta: f64,
    solver: Solver,
    out: *mut DcScattering,
) -> DcStatus {
    guard(|| {
        let geometry = &borrow(geometry, "geometry")?.0;
        let params = &borrow(params, "params")?.0;
        let result = if params.is_chiral() {
            chiral::chain_transmission(geometry, params, delta)?
        } else {
            bidirectional::chain_transmission(geometry, params, delta, solver)?
        };
        write(out, to_scattering(&result))
    })
}

/// Transmission and reflection of a chain at detuning `delta` (units of Γ₀),
/// using the transfer-matrix route for two-way waveguides.
///
/// # Safety
/// `geometry` and `params` must be live handles; `out` must be NULL or valid
/// for writing one `DcScattering`.
#[no_mangle]
pub unsafe extern "C" fn dc_chain_transmission(
    geometry: *const DcGeometry,
    params: *const DcParams,
    delta: f64,
    out: *mut DcScattering,
) -> DcStatus {
    transmission(geometry, params, delta, Solver::Fast, out)
}

/// As [`dc_chain_transmission`], but solving the full linear system for
/// two-way waveguides. Slower; intended as a cross-check.
///
/// # Safety
/// Same as [`dc_chain_transmission`].
#[no_mangle]
pub unsafe extern "C" fn dc_chain_transmission_dense(
    geometry: *const DcGeometry,
    params: *const DcParams,
    delta: f64,
    out: *mut DcScattering,
) -> DcStatus {
    transmission(geometry, params, delta, Solver::Dense, out)
}

/// Localization length of a disordered chain built around a periodic base
/// (`length_nm`, `separation_nm`). `<ln T>` is averaged over `realizations`
/// at each of the `n_count` strictly increasing dimer counts in `n_values`
/// and fitted against `n`. Results depend only on the inputs and `seed`.
///
/// # Safety
/// `params` must be a live handle, `n_values` must point to `n_count`
/// readable values, and `out` must be NULL or valid for writing one
/// `DcLocalization`.
#[no_mangle]
pub unsafe extern "C" fn dc_localization(
    params: *const DcParams,
    length_nm: f64,
    separation_nm: f64,
    target: DcDisorderTarget,
    units: DcDisorderUnits,
    sigma: f64,
    delta: f64,
    n_values: *const usize,
    n_count: usize,
    realizations: u64,
    seed: u64,
    out: *mut DcLocalization,
) -> DcStatus {
    guard(|| {
        let params = borrow(params, "params")?.0;
        if n_values.is_null() {
            return Err(null("n_values"));
        }
        let n_values = std::slice::from_raw_parts(n_values, n_count).to_vec();
        let max_n = n_values
            .iter()
            .copied()
            .max()
            .ok_or_else(|| Failure(DcStatus::InvalidArgument, "n_values is empty".into()))?;
        if realizations == 0 {
            return Err(Failure(DcStatus::InvalidArgument, "realizations must be at least 1".into()));
        }
        let units = match units {
            DcDisorderUnits::LengthNm => DisorderUnits::LengthNm,
            DcDisorderUnits::PhaseRadians => DisorderUnits::PhaseRadians,
        };
        let model = match target {
            DcDisorderTarget::DimerLength => DisorderModel::dimer_length(sigma, units),
            DcDisorderTarget::DimerSeparation => DisorderModel::dimer_separation(sigma, units),
        };
        let spec = EnsembleSpec {
            model,
            params,
            waveguide: if params.is_chiral() { Waveguide::Chiral } else { Waveguide::Bidirectional },
            base: build_periodic_chain(max_n, length_nm, separation_nm)?,
            n_values,
            realizations,
            seed,
            delta,
        };
        let fit = estimate_localization(&ensemble_ln_t(&spec)?)?;
        write(
            out,
            DcLocalization {
                xi: fit.xi,
                xi_stderr: fit.xi_stderr,
                slope: fit.slope,
                slope_stderr: fit.slope_stderr,
                intercept: fit.intercept,
                r_squared: fit.r_squared,
            },
        )
    })
}
