//! C ABI over `crit-core`.
//!
//! Lattices and chains are opaque heap handles released with their `_free`
//! function. Every fallible call returns a [`CritStatus`]; on failure the
//! message is available from [`crit_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use crit_core::estimators::riesz_variance_integral;
use crit_core::field::{field_from_spins, magnetization, sobolev_norm_sq, RenormScheme, SobolevCoeffs};
use crit_core::lattice::{build_lattice, BoundaryCondition, LatticeSpec};
use crit_core::sampler::{critical_constants, Algorithm, Chain, SamplerConfig};
use crit_core::CritError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CritStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Io = 3,
    Panic = 4,
    Internal = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CritBoundary {
    Free = 0,
    Plus = 1,
    Minus = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CritAlgorithm {
    SwendsenWang = 0,
    Wolff = 1,
}

/// Square grid with its boundary condition.
pub struct CritLattice {
    spec: LatticeSpec,
}

/// Markov chain bound to a copy of a lattice.
pub struct CritChain {
    chain: Chain,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &CritError) -> CritStatus {
    match err {
        CritError::InvalidArgument(_) => CritStatus::InvalidArgument,
        CritError::Io(_) => CritStatus::Io,
        _ => CritStatus::Internal,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), CritStatus>) -> CritStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CritStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            CritStatus::Panic
        }
    }
}

fn check<T>(r: crit_core::Result<T>) -> Result<T, CritStatus> {
    r.map_err(|e| {
        let s = status_of(&e);
        set_error(e.to_string());
        s
    })
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, CritStatus> {
    // SAFETY: callers pass handles obtained from this library or null.
    unsafe { p.as_ref() }.ok_or_else(|| {
        set_error(format!("{what} is null"));
        CritStatus::NullPointer
    })
}

fn non_null_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, CritStatus> {
    // SAFETY: as in `non_null`, and the caller does not alias the handle.
    unsafe { p.as_mut() }.ok_or_else(|| {
        set_error(format!("{what} is null"));
        CritStatus::NullPointer
    })
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn crit_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// `ln(1 + √2) / 2`.
#[no_mangle]
pub extern "C" fn crit_critical_beta() -> f64 {
    critical_constants().0
}

/// `2 − √2`.
#[no_mangle]
pub extern "C" fn crit_critical_bond_probability() -> f64 {
    critical_constants().1
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn crit_lattice_new(n_side: usize, boundary: CritBoundary, out: *mut *mut CritLattice) -> CritStatus {
    guard(|| {
        let out = non_null_mut(out, "out")?;
        let bc = match boundary {
            CritBoundary::Free => BoundaryCondition::Free,
            CritBoundary::Plus => BoundaryCondition::Plus,
            CritBoundary::Minus => BoundaryCondition::Minus,
        };
        let spec = check(build_lattice(n_side, bc))?;
        *out = Box::into_raw(Box::new(CritLattice { spec }));
        Ok(())
    })
}

/// # Safety
/// `lattice` must be null or a handle from [`crit_lattice_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn crit_lattice_free(lattice: *mut CritLattice) {
    if !lattice.is_null() {
        drop(Box::from_raw(lattice));
    }
}

/// Number of sites, or 0 for a null handle.
///
/// # Safety
/// `lattice` must be null or a live lattice handle.
#[no_mangle]
pub unsafe extern "C" fn crit_lattice_site_count(lattice: *const CritLattice) -> usize {
    lattice.as_ref().map_or(0, |l| l.spec.site_count())
}

/// Creates a chain and runs its thermalization sweeps.
///
/// # Safety
/// `lattice` must be a live lattice handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn crit_chain_new(
    lattice: *const CritLattice,
    algorithm: CritAlgorithm,
    seed: u64,
    stream: u64,
    thermalization_sweeps: usize,
    decorrelation_sweeps: usize,
    out: *mut *mut CritChain,
) -> CritStatus {
    guard(|| {
        let lattice = non_null(lattice, "lattice")?;
        let out = non_null_mut(out, "out")?;
        let algorithm = match algorithm {
            CritAlgorithm::SwendsenWang => Algorithm::SwendsenWang,
            CritAlgorithm::Wolff => Algorithm::Wolff,
        };
        let cfg = SamplerConfig {
            stream,
            thermalization_sweeps,
            decorrelation_sweeps,
            ..SamplerConfig::new(algorithm, seed)
        };
        let mut chain = check(Chain::new(&lattice.spec, &cfg))?;
        chain.thermalize();
        *out = Box::into_raw(Box::new(CritChain { chain }));
        Ok(())
    })
}

/// # Safety
/// `chain` must be null or a handle from [`crit_chain_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn crit_chain_free(chain: *mut CritChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Advances to the next retained sample.
///
/// # Safety
/// `chain` must be a live chain handle not used concurrently.
#[no_mangle]
pub unsafe extern "C" fn crit_chain_next(chain: *mut CritChain) -> CritStatus {
    guard(|| {
        non_null_mut(chain, "chain")?.chain.advance();
        Ok(())
    })
}

/// Copies the current spins (row-major, ±1) into `buf`, which must hold
/// exactly the lattice site count.
///
/// # Safety
/// `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn crit_chain_spins(chain: *const CritChain, buf: *mut i8, len: usize) -> CritStatus {
    guard(|| {
        let c = non_null(chain, "chain")?;
        if buf.is_null() {
            set_error("buf is null".into());
            return Err(CritStatus::NullPointer);
        }
        let spins = c.chain.spins().spins();
        if len != spins.len() {
            set_error(format!("buffer holds {len} spins, lattice has {}", spins.len()));
            return Err(CritStatus::InvalidArgument);
        }
        ptr::copy_nonoverlapping(spins.as_ptr(), buf, len);
        Ok(())
    })
}

/// Renormalized magnetization `a^{15/8} Σ σ` of the current sample.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn crit_chain_magnetization(chain: *const CritChain, out: *mut f64) -> CritStatus {
    guard(|| {
        let c = non_null(chain, "chain")?;
        let out = non_null_mut(out, "out")?;
        *out = check(magnetization(c.chain.spec(), c.chain.spins(), &RenormScheme::WuExponent))?;
        Ok(())
    })
}

/// Truncated `‖Φ^a‖²_{H^{-alpha}}` of the current sample with `j_max`
/// sine modes per axis.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn crit_chain_sobolev_norm(chain: *const CritChain, alpha: f64, j_max: usize, out: *mut f64) -> CritStatus {
    guard(|| {
        let c = non_null(chain, "chain")?;
        let out = non_null_mut(out, "out")?;
        let field = check(field_from_spins(c.chain.spec(), c.chain.spins(), &RenormScheme::WuExponent))?;
        let coeffs = check(SobolevCoeffs::compute(&field, j_max))?;
        *out = check(sobolev_norm_sq(&coeffs, alpha))?.value;
        Ok(())
    })
}

/// `∬ |x − y|^{−s}` over the unit square squared, for `0 ≤ s < 2`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn crit_riesz_integral(s: f64, out: *mut f64) -> CritStatus {
    guard(|| {
        let out = non_null_mut(out, "out")?;
        *out = check(riesz_variance_integral(s))?;
        Ok(())
    })
}
