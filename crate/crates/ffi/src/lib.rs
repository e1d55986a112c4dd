//! C ABI over deckforge.
//!
//! Every call returns a [`DfStatus`]; on failure the message is available
//! from [`df_last_error_message`] on the same thread until the next call.
//! Handles are opaque and must be released with their `_free` function.
//! Strings handed out by the library are released with [`df_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::ptr;

use deckforge::assemble::{assemble, AssemblyConfig, AssemblyMode};
use deckforge::export::{export_html, export_pptx, ExportContext, ExportOptions};
use deckforge::manifest::deck_manifest;
use deckforge::model::{Deck, SlideTemplate, Topic};
use deckforge::schema::PresentationSchema;
use deckforge::services::Services;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfStatus {
    Ok = 0,
    InvalidArgument = 1,
    Config = 3,
    Assembly = 4,
    Export = 5,
    Panic = 99,
}

/// Loaded corpus: semantic graph, grammar and content sources.
pub struct DfServices {
    inner: Services,
    root: PathBuf,
}

/// An assembled deck together with what is needed to export it.
pub struct DfDeck {
    deck: Deck,
    templates: Vec<SlideTemplate>,
    media_root: PathBuf,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DfAssembleOptions {
    /// 0 takes the schema's default length.
    pub n_slides: usize,
    pub seed: u64,
    /// 0 uses every available core.
    pub parallelism: usize,
    /// Generation rounds including the first; 0 means 10.
    pub max_rounds: usize,
    /// Non-zero selects the sequential reference assembler.
    pub serial: u8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), (DfStatus, String)>) -> DfStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DfStatus::Panic
        }
    }
}

fn invalid(what: &str) -> (DfStatus, String) {
    (DfStatus::InvalidArgument, what.to_string())
}

unsafe fn opt_str<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, (DfStatus, String)> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p).to_str().map(Some).map_err(|_| invalid(&format!("{what} is not valid UTF-8")))
}

unsafe fn req_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (DfStatus, String)> {
    opt_str(p, what)?.ok_or_else(|| invalid(&format!("{what} is null")))
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// owned by the library and valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn df_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn df_assemble_options_default() -> DfAssembleOptions {
    DfAssembleOptions { n_slides: 0, seed: 0, parallelism: 0, max_rounds: 0, serial: 0 }
}

/// Loads an offline corpus. A NULL `corpus_dir` selects the bundled one.
///
/// # Safety
/// `corpus_dir` must be NULL or a NUL-terminated string; `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn df_services_load(corpus_dir: *const c_char, out: *mut *mut DfServices) -> DfStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        *out = ptr::null_mut();
        let root = match opt_str(corpus_dir, "corpus_dir")? {
            Some(p) => PathBuf::from(p),
            None => deckforge::cli::default_corpus_dir(),
        };
        let inner = Services::offline(&root).map_err(|e| (DfStatus::Config, e.to_string()))?;
        *out = Box::into_raw(Box::new(DfServices { inner, root }));
        Ok(())
    })
}

/// # Safety
/// `services` must be NULL or a handle from [`df_services_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn df_services_free(services: *mut DfServices) {
    if !services.is_null() {
        drop(Box::from_raw(services));
    }
}

/// Assembles a deck about `topic`. `schema` is a bundled schema name or a
/// path to a schema file; NULL selects the default. `options` may be NULL.
///
/// # Safety
/// Pointers must be NULL or valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn df_assemble(
    services: *const DfServices,
    topic: *const c_char,
    schema: *const c_char,
    options: *const DfAssembleOptions,
    out: *mut *mut DfDeck,
) -> DfStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        *out = ptr::null_mut();
        let services = services.as_ref().ok_or_else(|| invalid("services is null"))?;
        let topic = Topic::new(req_str(topic, "topic")?).map_err(|e| invalid(&e.to_string()))?;
        let schema_arg = opt_str(schema, "schema")?.unwrap_or(deckforge::cli::DEFAULT_SCHEMA);
        let schema = PresentationSchema::load(&deckforge::cli::schema_path(schema_arg))
            .map_err(|e| (DfStatus::Config, e.to_string()))?;
        let o = options.as_ref().copied().unwrap_or_else(|| df_assemble_options_default());
        let defaults = AssemblyConfig::default();
        let config = AssemblyConfig {
            n_slides: if o.n_slides == 0 { schema.deck_length_default } else { o.n_slides },
            parallelism: if o.parallelism == 0 { defaults.parallelism } else { o.parallelism },
            max_rounds: if o.max_rounds == 0 { defaults.max_rounds } else { o.max_rounds },
            master_rng_seed: o.seed,
            mode: if o.serial != 0 { AssemblyMode::Serial } else { AssemblyMode::Parallel },
        };
        let a = assemble(&topic, &schema, &services.inner, &config).map_err(|e| (DfStatus::Assembly, e.to_string()))?;
        *out = Box::into_raw(Box::new(DfDeck {
            deck: a.deck,
            templates: schema.templates,
            media_root: services.root.clone(),
        }));
        Ok(())
    })
}

/// # Safety
/// `deck` must be NULL or a live handle from [`df_assemble`].
#[no_mangle]
pub unsafe extern "C" fn df_deck_slide_count(deck: *const DfDeck) -> usize {
    deck.as_ref().map_or(0, |d| d.deck.len())
}

/// Canonical JSON manifest of the deck. Free the result with [`df_string_free`].
///
/// # Safety
/// `deck` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn df_deck_manifest_json(deck: *const DfDeck, out: *mut *mut c_char) -> DfStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        *out = ptr::null_mut();
        let deck = deck.as_ref().ok_or_else(|| invalid("deck is null"))?;
        let json = CString::new(deck_manifest(&deck.deck)).map_err(|e| invalid(&e.to_string()))?;
        *out = json.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn df_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn export_args<'a>(deck: *const DfDeck, path: *const c_char) -> Result<(&'a DfDeck, &'a Path), (DfStatus, String)> {
    let deck = deck.as_ref().ok_or_else(|| invalid("deck is null"))?;
    Ok((deck, Path::new(req_str(path, "path")?)))
}

/// Writes a pptx file. With `embed_media` zero, pictures link to the
/// corpus files instead of being copied in.
///
/// # Safety
/// `deck` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn df_deck_export_pptx(deck: *const DfDeck, path: *const c_char, embed_media: u8) -> DfStatus {
    guard(|| {
        let (deck, path) = export_args(deck, path)?;
        let ctx = ExportContext::new(&deck.templates, &deck.media_root);
        let options = ExportOptions { embed_media: embed_media != 0, ..ExportOptions::default() };
        export_pptx(&deck.deck, &ctx, path, &options).map_err(|e| (DfStatus::Export, e.to_string()))
    })
}

/// # Safety
/// `deck` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn df_deck_export_html(deck: *const DfDeck, path: *const c_char) -> DfStatus {
    guard(|| {
        let (deck, path) = export_args(deck, path)?;
        let ctx = ExportContext::new(&deck.templates, &deck.media_root);
        export_html(&deck.deck, &ctx, path).map_err(|e| (DfStatus::Export, e.to_string()))
    })
}

/// # Safety
/// `deck` must be NULL or a handle from [`df_assemble`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn df_deck_free(deck: *mut DfDeck) {
    if !deck.is_null() {
        drop(Box::from_raw(deck));
    }
}
