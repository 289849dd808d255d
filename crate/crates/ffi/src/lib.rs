//! C ABI for `logdiv`.
//!
//! Functions are created through constructor calls returning opaque
//! [`LogdivFunction`] handles and released with [`logdiv_function_free`].
//! Every fallible call returns a [`LogdivStatus`]; on failure a description
//! is available from [`logdiv_last_error`] on the same thread. Matrices are
//! passed row-major as `d·d` doubles. Panics never cross the boundary: they
//! are reported as [`LogdivStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use logdiv::conjugate::{dual_function, legendre};
use logdiv::divergence::{self, DivergenceInstance};
use logdiv::function::{FunctionVector, GaussianParams, LogConcaveFunction};
use logdiv::generator::Generator;
use logdiv::linalg::{Matrix, Vector};
use logdiv::quadrature::{IntegrationResult, QuadratureSpec};
use logdiv::surface;
use logdiv::verify::{self, SuiteConfig};
use logdiv::Error;

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogdivStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotSpd = 4,
    NonConvexPotential = 5,
    DomainError = 6,
    IntegralDiverged = 7,
    NegativeFactor = 8,
    SingularHessian = 9,
    OptimizationFailed = 10,
    GateViolation = 11,
    Config = 12,
    Panic = 13,
}

impl From<&Error> for LogdivStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::DimensionMismatch { .. } => LogdivStatus::DimensionMismatch,
            Error::NonConvexPotential => LogdivStatus::NonConvexPotential,
            Error::NotSpd => LogdivStatus::NotSpd,
            Error::NotSelfAdjoint | Error::NotUnimodular { .. } | Error::IndexOutOfRange(_) | Error::InvalidArgument(_) => {
                LogdivStatus::InvalidArgument
            }
            Error::DomainError { .. } => LogdivStatus::DomainError,
            Error::IntegralDiverged { .. } => LogdivStatus::IntegralDiverged,
            Error::NegativeFactor { .. } => LogdivStatus::NegativeFactor,
            Error::SingularHessian => LogdivStatus::SingularHessian,
            Error::OptimizationFailed { .. } => LogdivStatus::OptimizationFailed,
            Error::GateViolation { .. } => LogdivStatus::GateViolation,
            Error::Config(_) => LogdivStatus::Config,
        }
    }
}

/// Generator families.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogdivGeneratorKind {
    /// `t^λ`, using the `lambda` field.
    Power = 0,
    /// `log t`
    Log = 1,
    /// `max(log t, 0)`
    LogPlus = 2,
    /// `|t − 1|`
    AbsMinusOne = 3,
    /// `−t·log t`
    NegTLog = 4,
    /// `t·max(−log t, 0)`
    NegTLogPlus = 5,
}

/// A generator; `lambda` is read only for [`LogdivGeneratorKind::Power`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LogdivGenerator {
    pub kind: LogdivGeneratorKind,
    pub lambda: f64,
}

impl LogdivGenerator {
    fn to_generator(self) -> Result<Generator, Failure> {
        Ok(match self.kind {
            LogdivGeneratorKind::Power => {
                if !self.lambda.is_finite() {
                    return Err(Failure::invalid("power exponent must be finite"));
                }
                Generator::power(self.lambda)
            }
            LogdivGeneratorKind::Log => Generator::Log,
            LogdivGeneratorKind::LogPlus => Generator::LogPlus,
            LogdivGeneratorKind::AbsMinusOne => Generator::AbsMinusOne,
            LogdivGeneratorKind::NegTLog => Generator::NegTLog,
            LogdivGeneratorKind::NegTLogPlus => Generator::NegTLogPlus,
        })
    }
}

/// Value of an integral with its error estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LogdivIntegral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

impl From<IntegrationResult> for LogdivIntegral {
    fn from(r: IntegrationResult) -> Self {
        LogdivIntegral {
            value: r.value,
            error: r.error,
            evaluations: r.evaluations,
        }
    }
}

/// Opaque handle to a log-concave function `c·e^{-ψ}`.
pub struct LogdivFunction(LogConcaveFunction);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: LogdivStatus,
    message: String,
}

impl Failure {
    fn new(status: LogdivStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }

    fn null(what: &str) -> Self {
        Failure::new(LogdivStatus::NullPointer, format!("{what} is null"))
    }

    fn invalid(message: impl Into<String>) -> Self {
        Failure::new(LogdivStatus::InvalidArgument, message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::new((&e).into(), e.to_string())
    }
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> LogdivStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            LogdivStatus::Ok
        }
        Ok(Err(f)) => {
            set_last_error(f.message);
            f.status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {message}"));
            LogdivStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a>(p: *const LogdivFunction, what: &str) -> Result<&'a LogConcaveFunction, Failure> {
    p.as_ref().map(|h| &h.0).ok_or_else(|| Failure::null(what))
}

unsafe fn store<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn emit_function(out: *mut *mut LogdivFunction, f: LogConcaveFunction) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("out"));
    }
    out.write(Box::into_raw(Box::new(LogdivFunction(f))));
    Ok(())
}

unsafe fn square(p: *const f64, d: usize, what: &str) -> Result<Matrix, Failure> {
    if d == 0 {
        return Err(Failure::invalid("dimension must be positive"));
    }
    Ok(Matrix::from_row_slice(d, d, slice(p, d * d, what)?))
}

unsafe fn vector(fs: *const *const LogdivFunction, n: usize) -> Result<FunctionVector, Failure> {
    if n == 0 {
        return Err(Failure::invalid("at least one function is required"));
    }
    let handles = slice(fs, n, "functions")?;
    let functions = handles
        .iter()
        .map(|&h| handle(h, "function").cloned())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FunctionVector::new(functions)?)
}

fn checked_scale(c: f64) -> Result<f64, Failure> {
    if c.is_finite() && c > 0.0 {
        Ok(c)
    } else {
        Err(Failure::invalid(format!("scale must be positive and finite, got {c}")))
    }
}

/// Message describing the last failed call on this thread, or NULL after a
/// successful call. The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn logdiv_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates `c·e^{-⟨Ax,x⟩/2}`; `a` is a row-major symmetric positive definite `d×d` matrix.
///
/// # Safety
/// `a` must point to `d·d` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn logdiv_gaussian_new(c: f64, a: *const f64, d: usize, out: *mut *mut LogdivFunction) -> LogdivStatus {
    guard(|| {
        let params = GaussianParams::new(checked_scale(c)?, square(a, d, "a")?)?;
        emit_function(out, LogConcaveFunction::gaussian(&params)?)
    })
}

/// Creates `c·e^{-Σⱼ(cosh xⱼ − 1)}` in dimension `d`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn logdiv_cosh_new(c: f64, d: usize, out: *mut *mut LogdivFunction) -> LogdivStatus {
    guard(|| {
        if d == 0 {
            return Err(Failure::invalid("dimension must be positive"));
        }
        emit_function(out, LogConcaveFunction::cosh(d).scaled(checked_scale(c)?)?)
    })
}

/// Creates `c·e^{-(|x|²/2 + |x|⁴/4)}` in dimension `d`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn logdiv_quartic_new(c: f64, d: usize, out: *mut *mut LogdivFunction) -> LogdivStatus {
    guard(|| {
        if d == 0 {
            return Err(Failure::invalid("dimension must be positive"));
        }
        emit_function(out, LogConcaveFunction::quartic(d).scaled(checked_scale(c)?)?)
    })
}

/// Creates `x ↦ φ(Tx)` for an invertible row-major `d×d` matrix `t`.
///
/// # Safety
/// `f` must be a live handle, `t` must point to `d·d` doubles with `d` the
/// dimension of `f`, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn logdiv_function_compose(
    f: *const LogdivFunction,
    t: *const f64,
    out: *mut *mut LogdivFunction,
) -> LogdivStatus {
    guard(|| {
        let f = handle(f, "f")?;
        let t = square(t, f.dim(), "t")?;
        emit_function(out, f.compose_linear(&t)?)
    })
}

/// Creates the dual function `φ° = e^{-ψ*}`.
///
/// # Safety
/// `f` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn logdiv_function_dual(f: *const LogdivFunction, out: *mut *mut LogdivFunction) -> LogdivStatus {
    guard(|| emit_function(out, dual_function(handle(f, "f")?)?))
}

/// Releases a handle. Passing NULL is a no-op.
///
/// # Safety
/// `f` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn logdiv_function_free(f: *mut LogdivFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Dimension of the function, or 0 for NULL.
///
/// # Safety
/// `f` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn logdiv_function_dim(f: *const LogdivFunction) -> usize {
    f.as_ref().map_or(0, |h| h.0.dim())
}

/// Evaluates `φ(x)`.
///
/// # Safety
/// `f` must be a live handle, `x` must point to `len` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn logdiv_function_value(
    f: *const LogdivFunction,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> LogdivStatus {
    guard(|| {
        let f = handle(f, "f")?;
        let x = Vector::from_column_slice(slice(x, len, "x")?);
        store(out, f.value(&x)?, "out")
    })
}

/// Legendre transform `ψ*(y)` of the potential. When `maximizer` is not NULL
/// it receives the `len` coordinates of the maximizing `x`.
///
/// # Safety
/// `f` must be a live handle, `y` must point to `len` doubles, `value` must be
/// writable and `maximizer` NULL or writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn logdiv_legendre(
    f: *const LogdivFunction,
    y: *const f64,
    len: usize,
    value: *mut f64,
    maximizer: *mut f64,
) -> LogdivStatus {
    guard(|| {
        let f = handle(f, "f")?;
        let r = legendre(f, &Vector::from_column_slice(slice(y, len, "y")?))?;
        store(value, r.value, "value")?;
        if !maximizer.is_null() {
            ptr::copy_nonoverlapping(r.maximizer.as_ptr(), maximizer, len);
        }
        Ok(())
    })
}

/// Mixed f-divergence of `n` functions with `n` generators, using the
/// default quadrature for the dimension.
///
/// # Safety
/// `functions` must point to `n` live handles, `generators` to `n` entries,
/// and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn logdiv_mixed(
    functions: *const *const LogdivFunction,
    generators: *const LogdivGenerator,
    n: usize,
    out: *mut LogdivIntegral,
) -> LogdivStatus {
    guard(|| {
        let fv = vector(functions, n)?;
        let gens = slice(generators, n, "generators")?
            .iter()
            .map(|g| g.to_generator())
            .collect::<Result<Vec<_>, _>>()?;
        let spec = QuadratureSpec::default_for(fv.dim());
        let r = divergence::mixed(&DivergenceInstance::new(fv, gens)?, &spec)?;
        store(out, r.into(), "out")
    })
}

/// Classical f-divergence of one function.
///
/// # Safety
/// `f` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn logdiv_classical(
    f: *const LogdivFunction,
    generator: LogdivGenerator,
    out: *mut LogdivIntegral,
) -> LogdivStatus {
    guard(|| {
        let f = handle(f, "f")?;
        let r = divergence::classical(generator.to_generator()?, f, &QuadratureSpec::default_for(f.dim()))?;
        store(out, r.into(), "out")
    })
}

/// Mixed Kullback–Leibler divergence (positive-part clamp) of `n` functions.
///
/// # Safety
/// `functions` must point to `n` live handles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn logdiv_mixed_kl(
    functions: *const *const LogdivFunction,
    n: usize,
    out: *mut LogdivIntegral,
) -> LogdivStatus {
    guard(|| {
        let fv = vector(functions, n)?;
        let r = divergence::mixed_kl(&fv, &QuadratureSpec::default_for(fv.dim()))?;
        store(out, r.into(), "out")
    })
}

/// Mixed L_λ affine surface area. `lambda` may be `±INFINITY`, in which case
/// the value is the extremal limit and `error` and `evaluations` are zero.
///
/// # Safety
/// `functions` must point to `n` live handles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn logdiv_surface_area(
    functions: *const *const LogdivFunction,
    n: usize,
    lambda: f64,
    out: *mut LogdivIntegral,
) -> LogdivStatus {
    guard(|| {
        let fv = vector(functions, n)?;
        let r = if lambda == f64::INFINITY {
            IntegrationResult::exact(surface::as_infinity(&fv)?.value)
        } else if lambda == f64::NEG_INFINITY {
            IntegrationResult::exact(surface::as_minus_infinity(&fv)?.value)
        } else if lambda.is_nan() {
            return Err(Failure::invalid("λ is NaN"));
        } else {
            surface::as_lambda(&fv, lambda, &QuadratureSpec::default_for(fv.dim()))?
        };
        store(out, r.into(), "out")
    })
}

/// The Ω invariant of `n` functions.
///
/// # Safety
/// `functions` must point to `n` live handles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn logdiv_omega(functions: *const *const LogdivFunction, n: usize, out: *mut f64) -> LogdivStatus {
    guard(|| {
        let fv = vector(functions, n)?;
        let r = divergence::omega(&fv, &QuadratureSpec::default_for(fv.dim()))?;
        store(out, r.value, "out")
    })
}

/// Runs the inequality suite. `config_json` is a suite configuration
/// (`{}` selects the defaults). On success `*reports` receives the reports as
/// JSON lines, to be released with [`logdiv_string_free`], and `*exit_code`
/// the verdict summary: 0 all hold, 2 a violation, 3 inconclusive results.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `reports` and `exit_code`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn logdiv_run_suite(
    config_json: *const c_char,
    seed: u64,
    reports: *mut *mut c_char,
    exit_code: *mut i32,
) -> LogdivStatus {
    guard(|| {
        if config_json.is_null() {
            return Err(Failure::null("config_json"));
        }
        if reports.is_null() || exit_code.is_null() {
            return Err(Failure::null("output pointer"));
        }
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|e| Failure::new(LogdivStatus::Config, e.to_string()))?;
        let config: SuiteConfig =
            serde_json::from_str(text).map_err(|e| Failure::new(LogdivStatus::Config, e.to_string()))?;
        let result = verify::run_suite(&config, seed)?;
        let mut lines = String::new();
        for r in &result {
            lines.push_str(&serde_json::to_string(r).map_err(|e| Failure::invalid(e.to_string()))?);
            lines.push('\n');
        }
        let c = CString::new(lines).map_err(|e| Failure::invalid(e.to_string()))?;
        reports.write(c.into_raw());
        exit_code.write(verify::exit_code(&result));
        Ok(())
    })
}

/// Releases a string returned by this library. Passing NULL is a no-op.
///
/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn logdiv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
