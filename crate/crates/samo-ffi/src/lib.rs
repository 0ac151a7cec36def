//! C ABI for the samo library: opaque handles, integer status codes, and
//! plain-array observations/actions so other languages can train,
//! evaluate and step the environments.
//!
//! Conventions:
//! - Every fallible call returns a [`SamoStatus`]; outputs go through out
//!   pointers that are written only on `Ok`.
//! - Handles are created and freed by this library only; passing a handle
//!   to the wrong free function is undefined behavior.
//! - Continuous actions are `f64` arrays; discrete actions use a single
//!   `f64` holding the action index.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use samo::cascade::{select_action_cascade_tmin, ExecState};
use samo::envs::{make_env, Environment, StepInfo};
use samo::error::SamoError;
use samo::harness::{checkpoint, evaluate, parse_config, run_experiment, RunArgs, RunConfig};
use samo::options::OptionSet;
use samo::policy::{Action, ActionSpace};
use samo::rng::{stream_rng, Stream};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Utf8 = 3,
    Io = 4,
    Config = 5,
    Format = 6,
    Numeric = 7,
    Domain = 8,
    Usage = 9,
    Interrupted = 10,
    Panic = 11,
}

fn status_of(err: &SamoError) -> SamoStatus {
    match err {
        SamoError::Config(_) => SamoStatus::Config,
        SamoError::Domain(_) => SamoStatus::Domain,
        SamoError::Numeric(_) => SamoStatus::Numeric,
        SamoError::Usage(_) => SamoStatus::Usage,
        SamoError::Format(_) => SamoStatus::Format,
        SamoError::Io(_) => SamoStatus::Io,
        SamoError::Interrupted => SamoStatus::Interrupted,
    }
}

/// Human-readable description of a status code. The returned pointer is
/// static and must not be freed.
#[no_mangle]
pub extern "C" fn samo_status_message(status: SamoStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        SamoStatus::Ok => b"ok\0",
        SamoStatus::NullPointer => b"null pointer argument\0",
        SamoStatus::InvalidArgument => b"invalid argument\0",
        SamoStatus::Utf8 => b"invalid utf-8 in string argument\0",
        SamoStatus::Io => b"io error\0",
        SamoStatus::Config => b"configuration error\0",
        SamoStatus::Format => b"format error\0",
        SamoStatus::Numeric => b"numeric error\0",
        SamoStatus::Domain => b"domain error\0",
        SamoStatus::Usage => b"usage error\0",
        SamoStatus::Interrupted => b"run interrupted\0",
        SamoStatus::Panic => b"internal panic\0",
    };
    msg.as_ptr() as *const c_char
}

/// Library version as a static string; must not be freed.
#[no_mangle]
pub extern "C" fn samo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

fn guard(f: impl FnOnce() -> SamoStatus) -> SamoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => SamoStatus::Panic,
    }
}

unsafe fn cstr_to_path(ptr: *const c_char) -> Result<PathBuf, SamoStatus> {
    if ptr.is_null() {
        return Err(SamoStatus::NullPointer);
    }
    let s = CStr::from_ptr(ptr).to_str().map_err(|_| SamoStatus::Utf8)?;
    Ok(PathBuf::from(s))
}

/// Opaque run configuration handle.
pub struct SamoConfig {
    inner: RunConfig,
}

/// Opaque trained option set (checkpoint contents).
pub struct SamoOptionSet {
    set: OptionSet,
    meta: checkpoint::CheckpointMeta,
}

/// Opaque environment instance.
pub struct SamoEnv {
    inner: Box<dyn Environment>,
    done: bool,
}

/// Opaque execution session: a loaded option set driven by the cascade
/// with its own RNG and dwell state.
pub struct SamoSession {
    set: *const SamoOptionSet,
    exec: ExecState,
    t_min: u32,
    greedy: bool,
    rng: samo::rng::ChaCha8Rng,
}

/// Loads and validates a TOML run configuration.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. On `Ok` the caller owns the handle and must free it with
/// [`samo_config_free`].
#[no_mangle]
pub unsafe extern "C" fn samo_config_load(path: *const c_char, out: *mut *mut SamoConfig) -> SamoStatus {
    guard(|| {
        if out.is_null() {
            return SamoStatus::NullPointer;
        }
        let path = match cstr_to_path(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match parse_config(&path) {
            Ok(cfg) => {
                *out = Box::into_raw(Box::new(SamoConfig { inner: cfg }));
                SamoStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// # Safety
/// `cfg` must come from [`samo_config_load`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn samo_config_free(cfg: *mut SamoConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Trains (or resumes) one seed of the configured experiment, writing
/// metrics and checkpoints under `out_dir`.
///
/// # Safety
/// `cfg` must be a live handle from [`samo_config_load`]; `out_dir` a
/// valid NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn samo_train_seed(cfg: *const SamoConfig, seed: u64, out_dir: *const c_char) -> SamoStatus {
    guard(|| {
        if cfg.is_null() {
            return SamoStatus::NullPointer;
        }
        let out_dir = match cstr_to_path(out_dir) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let args = RunArgs {
            config: (*cfg).inner.clone(),
            out_dir,
            seed_filter: Some(seed),
            interrupt_after: None,
        };
        match run_experiment(&args) {
            Ok(_) => SamoStatus::Ok,
            Err(e) => status_of(&e),
        }
    })
}

/// Loads a checkpoint into an option-set handle.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` a valid pointer.
/// Free the handle with [`samo_option_set_free`].
#[no_mangle]
pub unsafe extern "C" fn samo_checkpoint_load(path: *const c_char, out: *mut *mut SamoOptionSet) -> SamoStatus {
    guard(|| {
        if out.is_null() {
            return SamoStatus::NullPointer;
        }
        let path = match cstr_to_path(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match checkpoint::load(&path) {
            Ok((set, meta)) => {
                *out = Box::into_raw(Box::new(SamoOptionSet { set, meta }));
                SamoStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// # Safety
/// `set` must come from [`samo_checkpoint_load`] and not be freed twice;
/// any session created over it must be freed first.
#[no_mangle]
pub unsafe extern "C" fn samo_option_set_free(set: *mut SamoOptionSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Number of options in the set.
///
/// # Safety
/// `set` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn samo_option_count(set: *const SamoOptionSet) -> usize {
    if set.is_null() {
        return 0;
    }
    (*set).set.len()
}

/// Observation width the checkpointed policies expect.
///
/// # Safety
/// `set` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn samo_option_set_obs_dim(set: *const SamoOptionSet) -> usize {
    if set.is_null() {
        return 0;
    }
    (*set).meta.obs_dim
}

/// Creates an environment. Known names: corridor, color_corridor,
/// goal_corridor, two_zone.
///
/// # Safety
/// `name` must be a valid NUL-terminated string; `out` a valid pointer.
/// Free with [`samo_env_free`].
#[no_mangle]
pub unsafe extern "C" fn samo_env_create(
    name: *const c_char,
    k_frames: usize,
    max_steps: u32,
    seed: u64,
    out: *mut *mut SamoEnv,
) -> SamoStatus {
    guard(|| {
        if out.is_null() || name.is_null() {
            return SamoStatus::NullPointer;
        }
        let name = match CStr::from_ptr(name).to_str() {
            Ok(s) => s,
            Err(_) => return SamoStatus::Utf8,
        };
        if k_frames == 0 || max_steps == 0 {
            return SamoStatus::InvalidArgument;
        }
        match make_env(name, k_frames, max_steps, seed) {
            Ok(env) => {
                *out = Box::into_raw(Box::new(SamoEnv { inner: env, done: true }));
                SamoStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// # Safety
/// `env` must come from [`samo_env_create`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn samo_env_free(env: *mut SamoEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Observation width of the environment (frames already stacked).
///
/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn samo_env_obs_dim(env: *const SamoEnv) -> usize {
    if env.is_null() {
        return 0;
    }
    (*env).inner.obs_dim()
}

/// Action kind: 0 = continuous, 1 = discrete.
///
/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn samo_env_action_kind(env: *const SamoEnv) -> i32 {
    if env.is_null() {
        return -1;
    }
    match (*env).inner.action_space() {
        ActionSpace::Continuous { .. } => 0,
        ActionSpace::Discrete { .. } => 1,
    }
}

/// Continuous dimension or discrete action count.
///
/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn samo_env_action_dim(env: *const SamoEnv) -> usize {
    if env.is_null() {
        return 0;
    }
    (*env).inner.action_space().encoded_dim()
}

/// Resets the environment and writes the first observation.
///
/// # Safety
/// `env` must be a live handle; `obs_out` must point to `obs_len` f64s
/// with `obs_len >= samo_env_obs_dim(env)`.
#[no_mangle]
pub unsafe extern "C" fn samo_env_reset(
    env: *mut SamoEnv,
    seed: u64,
    obs_out: *mut f64,
    obs_len: usize,
) -> SamoStatus {
    guard(|| {
        if env.is_null() || obs_out.is_null() {
            return SamoStatus::NullPointer;
        }
        let e = &mut *env;
        if obs_len < e.inner.obs_dim() {
            return SamoStatus::InvalidArgument;
        }
        let obs = e.inner.reset(seed);
        std::ptr::copy_nonoverlapping(obs.as_ptr(), obs_out, obs.len());
        e.done = false;
        SamoStatus::Ok
    })
}

fn decode_action(space: ActionSpace, data: &[f64]) -> Result<Action, SamoStatus> {
    match space {
        ActionSpace::Continuous { dim } => {
            if data.len() != dim {
                return Err(SamoStatus::InvalidArgument);
            }
            Ok(Action::Continuous(data.to_vec()))
        }
        ActionSpace::Discrete { n } => {
            if data.len() != 1 {
                return Err(SamoStatus::InvalidArgument);
            }
            let idx = data[0];
            if !(0.0..n as f64).contains(&idx) || idx.fract() != 0.0 {
                return Err(SamoStatus::InvalidArgument);
            }
            Ok(Action::Discrete(idx as usize))
        }
    }
}

/// Advances one step. `info_out` receives 0 none, 1 failure, 2 goal,
/// 3 cap, 4 wrong-corridor.
///
/// # Safety
/// `env` must be a live, reset handle; `action` must point to
/// `action_len` f64s; `obs_out` to `obs_len >= samo_env_obs_dim(env)`
/// f64s; `reward_out`, `done_out` and `info_out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn samo_env_step(
    env: *mut SamoEnv,
    action: *const f64,
    action_len: usize,
    obs_out: *mut f64,
    obs_len: usize,
    reward_out: *mut f64,
    done_out: *mut bool,
    info_out: *mut i32,
) -> SamoStatus {
    guard(|| {
        if env.is_null() || action.is_null() || obs_out.is_null() || reward_out.is_null() || done_out.is_null() || info_out.is_null()
        {
            return SamoStatus::NullPointer;
        }
        let e = &mut *env;
        if obs_len < e.inner.obs_dim() {
            return SamoStatus::InvalidArgument;
        }
        let data = std::slice::from_raw_parts(action, action_len);
        let act = match decode_action(e.inner.action_space(), data) {
            Ok(a) => a,
            Err(s) => return s,
        };
        match e.inner.step(&act) {
            Ok(step) => {
                std::ptr::copy_nonoverlapping(step.obs.as_ptr(), obs_out, step.obs.len());
                *reward_out = step.reward;
                *done_out = step.done;
                *info_out = match step.info {
                    StepInfo::None => 0,
                    StepInfo::Failure => 1,
                    StepInfo::Goal => 2,
                    StepInfo::Cap => 3,
                    StepInfo::WrongCorridor => 4,
                };
                e.done = step.done;
                SamoStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Creates an execution session over a loaded option set.
///
/// # Safety
/// `set` must be a live handle that outlives the session; `out` a valid
/// pointer. Free with [`samo_session_free`]. `t_min = 0` uses the value
/// stored in the checkpoint.
#[no_mangle]
pub unsafe extern "C" fn samo_session_create(
    set: *const SamoOptionSet,
    seed: u64,
    t_min: u32,
    greedy: bool,
    out: *mut *mut SamoSession,
) -> SamoStatus {
    guard(|| {
        if set.is_null() || out.is_null() {
            return SamoStatus::NullPointer;
        }
        let t_min = if t_min == 0 { (*set).meta.t_min.max(1) } else { t_min };
        *out = Box::into_raw(Box::new(SamoSession {
            set,
            exec: ExecState::reset((*set).set.len()),
            t_min,
            greedy,
            rng: stream_rng(seed, Stream::Eval, 1),
        }));
        SamoStatus::Ok
    })
}

/// # Safety
/// `session` must come from [`samo_session_create`] and not be freed
/// twice.
#[no_mangle]
pub unsafe extern "C" fn samo_session_free(session: *mut SamoSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Resets the cascade state at an episode boundary.
///
/// # Safety
/// `session` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn samo_session_reset(session: *mut SamoSession) -> SamoStatus {
    guard(|| {
        if session.is_null() {
            return SamoStatus::NullPointer;
        }
        let s = &mut *session;
        s.exec = ExecState::reset((*s.set).set.len());
        SamoStatus::Ok
    })
}

/// Selects the cascade action for an observation. Continuous actions fill
/// `action_out[0..dim]`; discrete actions write the index to
/// `action_out[0]`. `active_out` receives the acting option (1-based).
///
/// # Safety
/// `session` must be a live handle whose option set is still alive; `obs`
/// must point to `obs_len` f64s matching the checkpoint's observation
/// width; `action_out` must hold at least the action dimension;
/// `active_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn samo_session_act(
    session: *mut SamoSession,
    obs: *const f64,
    obs_len: usize,
    action_out: *mut f64,
    action_len: usize,
    active_out: *mut usize,
) -> SamoStatus {
    guard(|| {
        if session.is_null() || obs.is_null() || action_out.is_null() || active_out.is_null() {
            return SamoStatus::NullPointer;
        }
        let s = &mut *session;
        let set = &*s.set;
        if obs_len != set.meta.obs_dim {
            return SamoStatus::InvalidArgument;
        }
        let dim = match set.meta.space {
            ActionSpace::Continuous { dim } => dim,
            ActionSpace::Discrete { .. } => 1,
        };
        if action_len < dim {
            return SamoStatus::InvalidArgument;
        }
        let state = std::slice::from_raw_parts(obs, obs_len);
        match select_action_cascade_tmin(&set.set, state, &mut s.exec, s.t_min, s.greedy, &mut s.rng) {
            Ok(Action::Continuous(v)) => {
                std::ptr::copy_nonoverlapping(v.as_ptr(), action_out, v.len());
                *active_out = s.exec.active;
                SamoStatus::Ok
            }
            Ok(Action::Discrete(i)) => {
                *action_out = i as f64;
                *active_out = s.exec.active;
                SamoStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Flat evaluation report for C callers.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SamoEvalReport {
    pub episodes: usize,
    pub mean_length: f64,
    pub min_length: u32,
    pub max_length: u32,
    pub mean_return: f64,
    /// Negative when the environment has no goals.
    pub goal_success: f64,
}

/// Evaluates a checkpointed option set on a named environment.
///
/// # Safety
/// `set` must be a live handle; `env_name` a valid NUL-terminated string;
/// `report_out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn samo_evaluate(
    set: *const SamoOptionSet,
    env_name: *const c_char,
    episodes: usize,
    greedy: bool,
    eval_seed: u64,
    max_steps: u32,
    report_out: *mut SamoEvalReport,
) -> SamoStatus {
    guard(|| {
        if set.is_null() || env_name.is_null() || report_out.is_null() {
            return SamoStatus::NullPointer;
        }
        if episodes == 0 || max_steps == 0 {
            return SamoStatus::InvalidArgument;
        }
        let name = match CStr::from_ptr(env_name).to_str() {
            Ok(s) => s,
            Err(_) => return SamoStatus::Utf8,
        };
        let s = &*set;
        let probe = match make_env(name, 1, max_steps, 0) {
            Ok(p) => p,
            Err(e) => return status_of(&e),
        };
        let frame = probe.obs_dim();
        if s.meta.obs_dim % frame != 0 {
            return SamoStatus::InvalidArgument;
        }
        let mut env = match make_env(name, s.meta.obs_dim / frame, max_steps, 0) {
            Ok(e) => e,
            Err(e) => return status_of(&e),
        };
        match evaluate(&s.set, env.as_mut(), episodes, greedy, s.meta.t_min.max(1), eval_seed) {
            Ok(report) => {
                *report_out = SamoEvalReport {
                    episodes: report.episodes,
                    mean_length: report.mean_length,
                    min_length: report.min_length,
                    max_length: report.max_length,
                    mean_return: report.mean_return,
                    goal_success: report.goal_success.unwrap_or(-1.0),
                };
                SamoStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Frees a string allocated by this library.
///
/// # Safety
/// `s` must come from a samo allocation-returning function and not be
/// freed twice.
#[no_mangle]
pub unsafe extern "C" fn samo_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
