//! C ABI over `lrdfield`.
//!
//! Every fallible call returns an [`LrdStatus`]; on failure the message is
//! kept per thread and read back with `lrd_last_error`. Handles are opaque
//! and released with the matching `_free` function. Panics are caught at the
//! boundary and reported as `LRD_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use lrdfield::covmodel::FieldSpec;
use lrdfield::fieldsim::CholeskySampler;
use lrdfield::geometry::{build_surface, double_surface_integral, Hypersurface, Shape};
use lrdfield::hermite::{hermite_poly, Integrand};
use lrdfield::limitlaw::{build_grid_with_levels, variance_oracle, LimitSampler};
use lrdfield::rates::{kolmogorov_distance, rate_bound, RateCase};
use lrdfield::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LrdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    NonConvergence = 4,
    BudgetExceeded = 5,
    DivergentIntegral = 6,
    NotPositiveDefinite = 7,
    UnsupportedDimension = 8,
    RankNotFound = 9,
    EmptySample = 10,
    Config = 11,
    Io = 12,
    Panic = 13,
}

/// Surface with its quadrature rule.
pub struct LrdSurface {
    inner: Hypersurface,
}

/// Prepared sampler of the limit X_κ.
pub struct LrdLimitSampler {
    inner: LimitSampler,
}

/// Cholesky factor of the field covariance on a surface's nodes.
pub struct LrdFieldSampler {
    inner: CholeskySampler,
    nodes: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LrdRateBound {
    pub a: f64,
    pub kappa1: f64,
    pub tail_exponent: f64,
    pub bound: f64,
    pub best_bound: f64,
    /// NaN when condition (bb) fails.
    pub alpha_star: f64,
    /// NaN unless tau = 0.
    pub g_exponent: f64,
    /// 1, 2, or 0 for tau = 0.
    pub case_number: i32,
    pub tau_in_window: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> LrdStatus {
    match e {
        Error::Domain(_) | Error::DegenerateSet | Error::RootIsolationFailure(_) | Error::SingularIntegrand { .. } => LrdStatus::Domain,
        Error::NonConvergence { .. } | Error::NoRoot { .. } => LrdStatus::NonConvergence,
        Error::BudgetExceeded { .. } => LrdStatus::BudgetExceeded,
        Error::DivergentIntegral { .. } => LrdStatus::DivergentIntegral,
        Error::NotPositiveDefinite => LrdStatus::NotPositiveDefinite,
        Error::UnsupportedDimension(_) | Error::ResolutionTooCoarse { .. } => LrdStatus::UnsupportedDimension,
        Error::RankNotFound(_) => LrdStatus::RankNotFound,
        Error::EmptySample => LrdStatus::EmptySample,
        Error::Config(_) | Error::Json(_) | Error::Csv(_) => LrdStatus::Config,
        Error::Io(_) => LrdStatus::Io,
    }
}

/// Runs `f`, records any error or panic, and returns its status.
fn guard<F: FnOnce() -> Result<(), LrdStatus>>(f: F) -> LrdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            LrdStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside lrdfield");
            LrdStatus::Panic
        }
    }
}

fn lift<T>(r: lrdfield::Result<T>) -> Result<T, LrdStatus> {
    r.map_err(|e| {
        set_error(&e.to_string());
        status_of(&e)
    })
}

fn null(what: &str) -> LrdStatus {
    set_error(&format!("null pointer: {what}"));
    LrdStatus::NullPointer
}

fn invalid(msg: &str) -> LrdStatus {
    set_error(msg);
    LrdStatus::InvalidArgument
}

unsafe fn json_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, LrdStatus> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| invalid("string is not UTF-8"))
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn lrd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static NUL-terminated version string.
#[no_mangle]
pub extern "C" fn lrd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Probabilists' Hermite polynomial H_k(t).
#[no_mangle]
pub extern "C" fn lrd_hermite_poly(k: u32, t: f64) -> f64 {
    hermite_poly(k as usize, t)
}

/// Writes C_0..C_J of a JSON integrand (e.g. `{"kind":"power","l":2,"threshold":1}`)
/// into `out` (length j_max+1) and its Hermite rank into `rank` (-1 if none).
#[no_mangle]
pub unsafe extern "C" fn lrd_integrand_coefficients(integrand_json: *const c_char, j_max: u32, out: *mut f64, rank: *mut i32) -> LrdStatus {
    guard(|| {
        let text = json_arg(integrand_json, "integrand_json")?;
        if out.is_null() || rank.is_null() {
            return Err(null("out/rank"));
        }
        let g: Integrand = lift(serde_json::from_str(text).map_err(Error::from))?;
        let e = lift(g.expansion(j_max as usize))?;
        let dst = std::slice::from_raw_parts_mut(out, j_max as usize + 1);
        dst.copy_from_slice(&e.coefficients);
        *rank = e.rank.map(|k| k as i32).unwrap_or(-1);
        Ok(())
    })
}

/// shape: 0 sphere, 1 cube boundary.
#[no_mangle]
pub unsafe extern "C" fn lrd_surface_new(shape: u32, d: u32, r: f64, resolution: u32, out: *mut *mut LrdSurface) -> LrdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let shape = match shape {
            0 => Shape::Sphere,
            1 => Shape::Cube,
            _ => return Err(invalid("shape must be 0 (sphere) or 1 (cube)")),
        };
        let s = lift(build_surface(shape, d as usize, r, resolution as usize))?;
        *out = Box::into_raw(Box::new(LrdSurface { inner: s }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn lrd_surface_free(s: *mut LrdSurface) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of quadrature nodes, 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn lrd_surface_len(s: *const LrdSurface) -> usize {
    s.as_ref().map(|s| s.inner.len()).unwrap_or(0)
}

/// Closed-form area, NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn lrd_surface_area(s: *const LrdSurface) -> f64 {
    s.as_ref().map(|s| s.inner.area()).unwrap_or(f64::NAN)
}

/// Copies nodes (row-major, len·d values) and weights (len values).
#[no_mangle]
pub unsafe extern "C" fn lrd_surface_nodes(s: *const LrdSurface, nodes: *mut f64, weights: *mut f64) -> LrdStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("surface"))?;
        if nodes.is_null() || weights.is_null() {
            return Err(null("nodes/weights"));
        }
        let d = s.inner.d;
        let n = std::slice::from_raw_parts_mut(nodes, s.inner.len() * d);
        for (i, p) in s.inner.nodes.iter().enumerate() {
            n[i * d..(i + 1) * d].copy_from_slice(p);
        }
        std::slice::from_raw_parts_mut(weights, s.inner.len()).copy_from_slice(&s.inner.weights);
        Ok(())
    })
}

/// 𝒦(x) = ∫ e^{i⟨x,u⟩} dσ(u); `x` has d entries.
#[no_mangle]
pub unsafe extern "C" fn lrd_surface_fourier(s: *const LrdSurface, x: *const f64, re: *mut f64, im: *mut f64) -> LrdStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("surface"))?;
        if x.is_null() || re.is_null() || im.is_null() {
            return Err(null("x/re/im"));
        }
        let v = s.inner.fourier(std::slice::from_raw_parts(x, s.inner.d));
        *re = v.re;
        *im = v.im;
        Ok(())
    })
}

/// ∬ ‖x - y‖^{-β} dσ dσ by node quadrature with singular correction.
#[no_mangle]
pub unsafe extern "C" fn lrd_double_integral_power(s: *const LrdSurface, beta: f64, out: *mut f64) -> LrdStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("surface"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let v = lift(double_surface_integral(&s.inner, |rho| rho.powf(-beta), beta))?;
        *out = v.value();
        Ok(())
    })
}

/// κ! ∬ ‖x - y‖^{-κα}.
#[no_mangle]
pub unsafe extern "C" fn lrd_variance_oracle(kappa: u32, alpha: f64, s: *const LrdSurface, out: *mut f64) -> LrdStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("surface"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lift(variance_oracle(kappa as usize, alpha, &s.inner))?;
        Ok(())
    })
}

/// Cholesky sampler for a JSON field spec (e.g. `{"d":2,"alpha":0.4,"L":"constant"}`)
/// on the nodes of `s`.
#[no_mangle]
pub unsafe extern "C" fn lrd_field_sampler_new(field_json: *const c_char, s: *const LrdSurface, out: *mut *mut LrdFieldSampler) -> LrdStatus {
    guard(|| {
        let text = json_arg(field_json, "field_json")?;
        let s = s.as_ref().ok_or_else(|| null("surface"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let spec: FieldSpec = lift(serde_json::from_str(text).map_err(Error::from))?;
        lift(spec.validate())?;
        if spec.d != s.inner.d {
            return Err(invalid("field and surface dimensions differ"));
        }
        let inner = lift(CholeskySampler::new(&spec, &s.inner.nodes))?;
        *out = Box::into_raw(Box::new(LrdFieldSampler { inner, nodes: s.inner.len() }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn lrd_field_sampler_free(f: *mut LrdFieldSampler) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// One field realization at the surface nodes into `out` (node count values).
#[no_mangle]
pub unsafe extern "C" fn lrd_field_sample(f: *const LrdFieldSampler, seed: u64, out: *mut f64) -> LrdStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("sampler"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        std::slice::from_raw_parts_mut(out, f.nodes).copy_from_slice(&f.inner.sample(seed));
        Ok(())
    })
}

/// Limit sampler on the grid [-Λ, Λ]^d with `origin_levels` dyadic levels
/// around the origin. `s` must be the unit surface.
#[no_mangle]
pub unsafe extern "C" fn lrd_limit_sampler_new(
    s: *const LrdSurface,
    kappa: u32,
    alpha: f64,
    lambda: f64,
    cells_per_axis: u32,
    origin_levels: u32,
    out: *mut *mut LrdLimitSampler,
) -> LrdStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("surface"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let grid = lift(build_grid_with_levels(s.inner.d, lambda, cells_per_axis as usize, origin_levels as usize))?;
        let inner = lift(LimitSampler::new(&grid, &s.inner, kappa as usize, alpha))?;
        *out = Box::into_raw(Box::new(LrdLimitSampler { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn lrd_limit_sampler_free(p: *mut LrdLimitSampler) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// One draw; `imag_residual` may be null.
#[no_mangle]
pub unsafe extern "C" fn lrd_limit_draw(p: *const LrdLimitSampler, seed: u64, value: *mut f64, imag_residual: *mut f64) -> LrdStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("sampler"))?;
        if value.is_null() {
            return Err(null("value"));
        }
        let d = lift(p.inner.draw(seed))?;
        *value = d.value;
        if !imag_residual.is_null() {
            *imag_residual = d.imag_residual;
        }
        Ok(())
    })
}

/// `n` draws with seeds derived from `seed` into `out`.
#[no_mangle]
pub unsafe extern "C" fn lrd_limit_draws(p: *const LrdLimitSampler, n: usize, seed: u64, out: *mut f64) -> LrdStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("sampler"))?;
        if out.is_null() && n > 0 {
            return Err(null("out"));
        }
        let draws = lift(p.inner.draws(n, seed))?;
        for (i, d) in draws.iter().enumerate() {
            *out.add(i) = d.value;
        }
        Ok(())
    })
}

/// Exact variance of the discretized integral (κ ≤ 2).
#[no_mangle]
pub unsafe extern "C" fn lrd_limit_grid_variance(p: *const LrdLimitSampler, out: *mut f64) -> LrdStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("sampler"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = p.inner.grid_variance().ok_or_else(|| invalid("grid variance needs kappa <= 2"))?;
        Ok(())
    })
}

/// Two-sample Kolmogorov distance.
#[no_mangle]
pub unsafe extern "C" fn lrd_kolmogorov_distance(a: *const f64, na: usize, b: *const f64, nb: usize, out: *mut f64) -> LrdStatus {
    guard(|| {
        if (a.is_null() && na > 0) || (b.is_null() && nb > 0) || out.is_null() {
            return Err(null("a/b/out"));
        }
        let sa = if na == 0 { &[][..] } else { std::slice::from_raw_parts(a, na) };
        let sb = if nb == 0 { &[][..] } else { std::slice::from_raw_parts(b, nb) };
        *out = lift(kolmogorov_distance(sa, sb))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn lrd_rate_bound(d: u32, alpha: f64, kappa: u32, tau: f64, out: *mut LrdRateBound) -> LrdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let r = lift(rate_bound(d as usize, alpha, kappa as usize, tau))?;
        *out = LrdRateBound {
            a: r.a,
            kappa1: r.kappa1,
            tail_exponent: r.tail_exponent,
            bound: r.bound,
            best_bound: r.best_bound,
            alpha_star: r.alpha_star.unwrap_or(f64::NAN),
            g_exponent: r.g_exponent.unwrap_or(f64::NAN),
            case_number: match r.case {
                RateCase::Case1 => 1,
                RateCase::Case2 => 2,
                RateCase::Tau0 => 0,
            },
            tau_in_window: r.tau_in_window as i32,
        };
        Ok(())
    })
}
