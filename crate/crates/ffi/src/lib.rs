//! C ABI for the `cliffsynth` toolkit.
//!
//! All functions return a `cs_status` code; results come back through out
//! parameters. Handles are opaque pointers freed with the matching
//! `*_free` function. Strings crossing the boundary are NUL-terminated
//! UTF-8; strings returned by the library must be released with
//! `cs_string_free`.
//!
//! The authoritative C declarations live in `include/cliffsynth.h`.

use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use cliffsynth::canonical::{canonicalize, EquivMode};
use cliffsynth::circuit::{emit_circuit, parse_circuit, CostModel};
use cliffsynth::database::{BuildOptions, Database, DatabaseError};
use cliffsynth::peephole;
use cliffsynth::synth::{self, SynthError};
use cliffsynth::tableau::SymplecticTableau;

/// Status codes; keep in sync with `cs_status` in the header.
pub const CS_OK: c_int = 0;
pub const CS_ERR_NULL_ARGUMENT: c_int = 1;
pub const CS_ERR_INVALID_ARGUMENT: c_int = 2;
pub const CS_ERR_UTF8: c_int = 3;
pub const CS_ERR_PARSE: c_int = 4;
pub const CS_ERR_IO: c_int = 5;
pub const CS_ERR_UNSUPPORTED: c_int = 6;
pub const CS_ERR_NOT_FOUND: c_int = 7;
pub const CS_ERR_MEMORY_BUDGET: c_int = 8;
pub const CS_ERR_INTERNAL: c_int = 9;

/// Opaque database handle.
pub struct CsDatabase(Database);

fn guard(f: impl FnOnce() -> c_int) -> c_int {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(CS_ERR_INTERNAL)
}

/// # Safety: `ptr` must be a valid NUL-terminated string or the call fails.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, c_int> {
    if ptr.is_null() {
        return Err(CS_ERR_NULL_ARGUMENT);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| CS_ERR_UTF8)
}

fn mode_from_int(mode: c_int) -> Result<EquivMode, c_int> {
    match mode {
        0 => Ok(EquivMode::Exact),
        1 => Ok(EquivMode::Simultaneous),
        2 => Ok(EquivMode::Independent),
        _ => Err(CS_ERR_INVALID_ARGUMENT),
    }
}

fn metric_from_int(metric: c_int) -> Result<CostModel, c_int> {
    match metric {
        0 => Ok(CostModel::gate_count()),
        1 => Ok(CostModel::depth()),
        2 => Ok(CostModel::cz_count()),
        _ => Err(CS_ERR_INVALID_ARGUMENT),
    }
}

fn write_out<T>(out: *mut T, value: T) -> c_int {
    if out.is_null() {
        return CS_ERR_NULL_ARGUMENT;
    }
    unsafe { out.write(value) };
    CS_OK
}

fn write_string(out: *mut *mut c_char, s: String) -> c_int {
    match CString::new(s) {
        Ok(c) => write_out(out, c.into_raw()),
        Err(_) => CS_ERR_INTERNAL,
    }
}

fn db_error_code(e: &DatabaseError) -> c_int {
    match e {
        DatabaseError::MemoryBudget { .. } => CS_ERR_MEMORY_BUDGET,
        DatabaseError::Io(_) => CS_ERR_IO,
        DatabaseError::Format(_) => CS_ERR_PARSE,
        _ => CS_ERR_INVALID_ARGUMENT,
    }
}

/// Build a cost database.
///
/// `mode`: 0 exact, 1 simultaneous, 2 independent. `metric`: 0 gate
/// count, 1 depth, 2 CZ count. `linear`: nonzero restricts to CNOT
/// circuits. `max_cost < 0` means unbounded.
#[no_mangle]
pub extern "C" fn cs_db_build(
    qubits: usize,
    mode: c_int,
    metric: c_int,
    linear: c_int,
    max_cost: c_int,
    out: *mut *mut CsDatabase,
) -> c_int {
    guard(|| {
        let mode = match mode_from_int(mode) {
            Ok(m) => m,
            Err(c) => return c,
        };
        let mut model = match metric_from_int(metric) {
            Ok(m) => m,
            Err(c) => return c,
        };
        if linear != 0 {
            model.gate_set = vec![cliffsynth::GateKind::Cx];
        }
        let opts = BuildOptions {
            max_cost: usize::try_from(max_cost).ok(),
            max_bytes: None,
        };
        match Database::build(qubits, mode, linear != 0, model, opts) {
            Ok(db) => write_out(out, Box::into_raw(Box::new(CsDatabase(db)))),
            Err(e) => db_error_code(&e),
        }
    })
}

/// Load a database written by `cs_db_save` or the CLI.
#[no_mangle]
pub unsafe extern "C" fn cs_db_load(path: *const c_char, out: *mut *mut CsDatabase) -> c_int {
    guard(|| {
        let path = match unsafe { read_str(path) } {
            Ok(p) => p,
            Err(c) => return c,
        };
        match Database::load(std::path::Path::new(path)) {
            Ok(db) => write_out(out, Box::into_raw(Box::new(CsDatabase(db)))),
            Err(e) => db_error_code(&e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_db_save(db: *const CsDatabase, path: *const c_char) -> c_int {
    guard(|| {
        let Some(db) = (unsafe { db.as_ref() }) else { return CS_ERR_NULL_ARGUMENT };
        let path = match unsafe { read_str(path) } {
            Ok(p) => p,
            Err(c) => return c,
        };
        match db.0.save(std::path::Path::new(path)) {
            Ok(()) => CS_OK,
            Err(e) => db_error_code(&e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_db_free(db: *mut CsDatabase) {
    if !db.is_null() {
        drop(unsafe { Box::from_raw(db) });
    }
}

#[no_mangle]
pub unsafe extern "C" fn cs_db_qubits(db: *const CsDatabase, out: *mut usize) -> c_int {
    guard(|| {
        let Some(db) = (unsafe { db.as_ref() }) else { return CS_ERR_NULL_ARGUMENT };
        write_out(out, db.0.n)
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_db_max_cost(db: *const CsDatabase, out: *mut usize) -> c_int {
    guard(|| {
        let Some(db) = (unsafe { db.as_ref() }) else { return CS_ERR_NULL_ARGUMENT };
        write_out(out, db.0.max_cost())
    })
}

/// Nonzero iff the breadth-first search exhausted the group.
#[no_mangle]
pub unsafe extern "C" fn cs_db_is_complete(db: *const CsDatabase, out: *mut c_int) -> c_int {
    guard(|| {
        let Some(db) = (unsafe { db.as_ref() }) else { return CS_ERR_NULL_ARGUMENT };
        write_out(out, db.0.complete as c_int)
    })
}

/// Number of canonical classes stored at the given cost.
#[no_mangle]
pub unsafe extern "C" fn cs_db_layer_size(
    db: *const CsDatabase,
    cost: usize,
    out: *mut usize,
) -> c_int {
    guard(|| {
        let Some(db) = (unsafe { db.as_ref() }) else { return CS_ERR_NULL_ARGUMENT };
        let sizes = db.0.layer_sizes();
        match sizes.get(cost) {
            Some(&s) => write_out(out, s),
            None => CS_ERR_NOT_FOUND,
        }
    })
}

/// Optimal cost of the Clifford implemented by a circuit, per the
/// database's metric and equivalence mode. Fails with
/// `CS_ERR_NOT_FOUND` if the class is outside a truncated database.
#[no_mangle]
pub unsafe extern "C" fn cs_db_cost_of_circuit(
    db: *const CsDatabase,
    circuit: *const c_char,
    out: *mut usize,
) -> c_int {
    guard(|| {
        let Some(db) = (unsafe { db.as_ref() }) else { return CS_ERR_NULL_ARGUMENT };
        let text = match unsafe { read_str(circuit) } {
            Ok(t) => t,
            Err(c) => return c,
        };
        let c = match parse_circuit(text) {
            Ok(c) => c,
            Err(_) => return CS_ERR_PARSE,
        };
        if c.n != db.0.n || db.0.linear {
            return CS_ERR_INVALID_ARGUMENT;
        }
        let t = match SymplecticTableau::from_circuit(&c) {
            Ok(t) => t,
            Err(_) => return CS_ERR_PARSE,
        };
        match db.0.cost_of(&t) {
            Some(cost) => write_out(out, cost),
            None => CS_ERR_NOT_FOUND,
        }
    })
}

/// Synthesize an optimal circuit for the Clifford implemented by
/// `target` (circuit text). With `mim` nonzero, meet-in-the-middle
/// extends the reach to twice the database depth. The circuit text
/// written to `*out_circuit` must be freed with `cs_string_free`.
#[no_mangle]
pub unsafe extern "C" fn cs_synthesize(
    db: *const CsDatabase,
    target: *const c_char,
    mim: c_int,
    out_cost: *mut usize,
    out_circuit: *mut *mut c_char,
) -> c_int {
    guard(|| {
        let Some(db) = (unsafe { db.as_ref() }) else { return CS_ERR_NULL_ARGUMENT };
        let text = match unsafe { read_str(target) } {
            Ok(t) => t,
            Err(c) => return c,
        };
        let c = match parse_circuit(text) {
            Ok(c) => c,
            Err(_) => return CS_ERR_PARSE,
        };
        let t = match SymplecticTableau::from_circuit(&c) {
            Ok(t) => t,
            Err(_) => return CS_ERR_PARSE,
        };
        let result = if mim != 0 {
            synth::synthesize(&db.0, &t)
        } else {
            synth::reconstruct(&db.0, &t)
        };
        match result {
            Ok(r) => {
                let rc = write_out(out_cost, r.cost);
                if rc != CS_OK {
                    return rc;
                }
                write_string(out_circuit, emit_circuit(&r.circuit))
            }
            Err(SynthError::NotCovered { .. }) => CS_ERR_NOT_FOUND,
            Err(_) => CS_ERR_INVALID_ARGUMENT,
        }
    })
}

/// Peephole-optimize `circuit` against the database. On success the
/// optimized circuit text is written to `*out_circuit` (free with
/// `cs_string_free`) and the before/after costs to the out parameters.
#[no_mangle]
pub unsafe extern "C" fn cs_optimize(
    db: *const CsDatabase,
    circuit: *const c_char,
    out_cost_before: *mut u64,
    out_cost_after: *mut u64,
    out_circuit: *mut *mut c_char,
) -> c_int {
    guard(|| {
        let Some(db) = (unsafe { db.as_ref() }) else { return CS_ERR_NULL_ARGUMENT };
        let text = match unsafe { read_str(circuit) } {
            Ok(t) => t,
            Err(c) => return c,
        };
        let c = match parse_circuit(text) {
            Ok(c) => c,
            Err(_) => return CS_ERR_PARSE,
        };
        match peephole::optimize(&c, &db.0) {
            Ok((out, report)) => {
                let rc = write_out(out_cost_before, report.cost_before);
                if rc != CS_OK {
                    return rc;
                }
                let rc = write_out(out_cost_after, report.cost_after);
                if rc != CS_OK {
                    return rc;
                }
                write_string(out_circuit, emit_circuit(&out))
            }
            Err(_) => CS_ERR_UNSUPPORTED,
        }
    })
}

/// Compare two circuits under an equivalence mode (0 exact, 1
/// simultaneous, 2 independent); writes 1 or 0 to `*out_equal`.
#[no_mangle]
pub unsafe extern "C" fn cs_verify(
    circuit: *const c_char,
    target: *const c_char,
    mode: c_int,
    out_equal: *mut c_int,
) -> c_int {
    guard(|| {
        let mode = match mode_from_int(mode) {
            Ok(m) => m,
            Err(c) => return c,
        };
        let parse = |ptr| -> Result<SymplecticTableau, c_int> {
            let text = unsafe { read_str(ptr) }?;
            let c = parse_circuit(text).map_err(|_| CS_ERR_PARSE)?;
            SymplecticTableau::from_circuit(&c).map_err(|_| CS_ERR_PARSE)
        };
        let (a, b) = match (parse(circuit), parse(target)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(c), _) | (_, Err(c)) => return c,
        };
        if a.n() != b.n() {
            return CS_ERR_INVALID_ARGUMENT;
        }
        let equal = canonicalize(&a, mode) == canonicalize(&b, mode);
        write_out(out_equal, equal as c_int)
    })
}

/// Free a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn cs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
