//! HTTP navigation over compiled programs.
//!
//! A session holds one immutable [`CompiledArtifact`] plus a stack of
//! assumed literals. Counts and facet reports are computed on the blocking
//! pool and serialized with all counts as decimal strings.
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/programs` | compile program text, `200` or `202` + poll URL |
//! | GET | `/programs/{id}` | session state or compile status |
//! | GET | `/programs/{id}/count?assume=a,-b&depth=k` | count under the session assumptions plus `assume` |
//! | GET | `/programs/{id}/facets?depth=k` | true/false counts for every free atom |
//! | POST | `/programs/{id}/assume` | push `{"literal": "-b"}` |
//! | POST | `/programs/{id}/undo` | pop the last literal |

mod error;
mod session;

use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use asnav_core::artifact::{build, digest_of, BuildOptions, CompiledArtifact, FacetReport, NnfSource};
use asnav_core::depgraph::{CycleMode, DEFAULT_CYCLE_CAP};
use asnav_core::inclexcl::{CountReport, RefineOptions};
use asnav_core::lp::{parse_program, AssumptionSet};
use asnav_core::nnf::{CompileOptions, DEFAULT_NODE_CAP};
use asnav_core::Error;
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

pub use error::ApiError;
use session::{Entry, Lookup, Navigation, Session, Store};

pub const BIND_ENV: &str = "ASNAV_BIND";
pub const CACHE_ENV: &str = "ASNAV_CACHE_DIR";
pub const CORS_ENV: &str = "ASNAV_CORS_ORIGIN";
pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

/// Programs with more atoms compile in the background.
pub const DEFAULT_SYNC_ATOMS: usize = 400;

#[derive(Clone, Debug)]
pub struct Config {
    pub bind: String,
    /// Artifacts are cached here by program digest and cycle mode.
    pub cache_dir: Option<PathBuf>,
    /// Allowed CORS origin; any origin when unset.
    pub cors_origin: Option<String>,
    pub sync_atom_limit: usize,
    pub node_cap: usize,
    pub cycle_cap: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            bind: DEFAULT_BIND.to_owned(),
            cache_dir: None,
            cors_origin: None,
            sync_atom_limit: DEFAULT_SYNC_ATOMS,
            node_cap: DEFAULT_NODE_CAP,
            cycle_cap: DEFAULT_CYCLE_CAP,
        }
    }
}

impl Config {
    /// Defaults overridden by `ASNAV_BIND`, `ASNAV_CACHE_DIR` and
    /// `ASNAV_CORS_ORIGIN`.
    pub fn from_env() -> Self {
        let var = |k: &str| std::env::var(k).ok().filter(|v| !v.is_empty());
        Config {
            bind: var(BIND_ENV).unwrap_or_else(|| DEFAULT_BIND.to_owned()),
            cache_dir: var(CACHE_ENV).map(PathBuf::from),
            cors_origin: var(CORS_ENV),
            ..Default::default()
        }
    }
}

struct AppState {
    config: Config,
    store: Store,
}

type Shared = State<Arc<AppState>>;

pub fn router(config: Config) -> Router {
    let cors = CorsLayer::new().allow_methods(Any).allow_headers(Any);
    let cors = match config.cors_origin.as_deref().map(HeaderValue::from_str) {
        Some(Ok(origin)) => cors.allow_origin(AllowOrigin::exact(origin)),
        _ => cors.allow_origin(Any),
    };
    let state = Arc::new(AppState { config, store: Store::default() });
    Router::new()
        .route("/programs", post(create_program))
        .route("/programs/{id}", get(get_program))
        .route("/programs/{id}/count", get(count))
        .route("/programs/{id}/facets", get(facets))
        .route("/programs/{id}/assume", post(assume))
        .route("/programs/{id}/undo", post(undo))
        .layer(cors)
        .with_state(state)
}

pub async fn serve(config: Config) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(&config.bind).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(config)).await
}

fn parse_depth(text: Option<&str>, default: Option<usize>) -> Result<Option<usize>, ApiError> {
    match text.map(str::trim) {
        None | Some("") => Ok(default),
        Some("full") => Ok(None),
        Some(t) => t
            .parse()
            .map(Some)
            .map_err(|_| ApiError::bad_request(format!("depth must be a non-negative integer or `full`, got `{t}`"))),
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, Error> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(ApiError::from)
}

fn cache_path(dir: &FsPath, text: &str, mode: CycleMode) -> PathBuf {
    dir.join(format!("{}-{mode}.asnav", digest_of(text)))
}

/// Builds the artifact or loads it from the cache directory.
fn build_cached(cache: Option<PathBuf>, text: String, opts: BuildOptions) -> Result<CompiledArtifact, Error> {
    let path = cache.as_deref().map(|d| cache_path(d, &text, opts.cycle_mode));
    if let Some(p) = &path {
        if let Ok(file) = fs::File::open(p) {
            match CompiledArtifact::read_from(std::io::BufReader::new(file)) {
                Ok(a) if a.check_program(&text).is_ok() => return Ok(a),
                Ok(_) => tracing::warn!(path = %p.display(), "cached artifact has a different digest"),
                Err(e) => tracing::warn!(path = %p.display(), error = %e, "unreadable cached artifact"),
            }
        }
    }
    let artifact = build(&text, &opts)?;
    if let Some(p) = &path {
        let tmp = p.with_extension("tmp");
        let written = fs::create_dir_all(p.parent().unwrap())
            .and_then(|_| fs::write(&tmp, artifact.to_bytes()))
            .and_then(|_| fs::rename(&tmp, p));
        if let Err(e) = written {
            tracing::warn!(path = %p.display(), error = %e, "could not cache artifact");
        }
    }
    Ok(artifact)
}

#[derive(Deserialize, Default)]
struct CreateQuery {
    cycles: Option<String>,
    depth: Option<String>,
    #[serde(rename = "async")]
    background: Option<bool>,
    budget_nodes: Option<usize>,
    budget_cycles: Option<usize>,
}

#[derive(Deserialize)]
struct CreateBody {
    program: String,
    cycles: Option<String>,
    depth: Option<String>,
}

#[derive(Serialize)]
struct SessionView<'a> {
    session_id: &'a str,
    status: &'static str,
    digest: &'a str,
    stats: &'a asnav_core::artifact::ArtifactStats,
    timings: &'a asnav_core::artifact::Timings,
    depth: Option<usize>,
    assumptions: Vec<String>,
    history: usize,
    state_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    count: Option<CountResponse>,
}

fn view(session: &Session, nav: &Navigation, count: Option<CountResponse>) -> Response {
    let a = &session.artifact;
    Json(SessionView {
        session_id: &session.id,
        status: "ready",
        digest: &a.digest,
        stats: &a.stats,
        timings: &a.timings,
        depth: session.depth,
        assumptions: nav.assumptions.iter().map(|l| a.program.format_lit(l)).collect(),
        history: nav.history.len(),
        state_digest: session.state_digest(nav),
        count,
    })
    .into_response()
}

async fn create_program(
    State(app): Shared,
    Query(mut q): Query<CreateQuery>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let is_json = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("application/json"));
    let text = if is_json {
        let b: CreateBody =
            serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))?;
        q.cycles = b.cycles.or(q.cycles);
        q.depth = b.depth.or(q.depth);
        b.program
    } else {
        String::from_utf8(body.to_vec()).map_err(|_| ApiError::bad_request("program text is not UTF-8"))?
    };
    let program = parse_program(&text).map_err(|e| ApiError::from(Error::from(e)))?;
    let cycle_mode = match q.cycles.as_deref() {
        None => CycleMode::Simple,
        Some(m) => m.parse().map_err(|e: String| ApiError::bad_request(e))?,
    };
    let depth = parse_depth(q.depth.as_deref(), None)?;
    let opts = BuildOptions {
        cycle_mode,
        cycle_cap: q.budget_cycles.unwrap_or(app.config.cycle_cap),
        nnf: NnfSource::Internal(CompileOptions {
            node_cap: q.budget_nodes.unwrap_or(app.config.node_cap),
            ..Default::default()
        }),
    };
    let id = uuid::Uuid::new_v4().simple().to_string();
    let cache = app.config.cache_dir.clone();
    let background = q.background.unwrap_or(program.atom_count() > app.config.sync_atom_limit);

    if !background {
        let artifact = blocking(move || build_cached(cache, text, opts)).await?;
        let session = Arc::new(Session::new(id.clone(), Arc::new(artifact), depth));
        app.store.insert(&id, Entry::Ready(session.clone()));
        return Ok(view(&session, &Navigation::default(), None));
    }

    app.store.insert(&id, Entry::Compiling);
    let job_id = id.clone();
    let job_app = app.clone();
    tokio::spawn(async move {
        let entry = match blocking(move || build_cached(cache, text, opts)).await {
            Ok(a) => Entry::Ready(Arc::new(Session::new(job_id.clone(), Arc::new(a), depth))),
            Err(e) => Entry::Failed(e),
        };
        job_app.store.insert(&job_id, entry);
    });
    let poll = format!("/programs/{id}");
    let mut resp =
        (StatusCode::ACCEPTED, Json(json!({ "session_id": id, "status": "compiling", "poll": poll }))).into_response();
    resp.headers_mut().insert(header::LOCATION, HeaderValue::from_str(&poll).unwrap());
    Ok(resp)
}

async fn get_program(State(app): Shared, Path(id): Path<String>) -> Result<Response, ApiError> {
    match app.store.lookup(&id)? {
        Lookup::Compiling => {
            Ok((StatusCode::ACCEPTED, Json(json!({ "session_id": id, "status": "compiling" }))).into_response())
        }
        Lookup::Ready(s) => Ok(view(&s, &s.navigation(), None)),
    }
}

#[derive(Deserialize)]
struct CountQuery {
    assume: Option<String>,
    depth: Option<String>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct CountTimings {
    pub count_s: f64,
}

/// Count response; the same shape as `asnav count --json`.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct CountResponse {
    #[serde(flatten)]
    pub report: CountReport,
    pub assumptions: String,
    pub timings: CountTimings,
}

impl CountResponse {
    pub fn compute(
        artifact: &CompiledArtifact,
        assumptions: &AssumptionSet,
        opts: &RefineOptions,
    ) -> Result<CountResponse, Error> {
        let t = Instant::now();
        let trace = artifact.count(assumptions, opts)?;
        Ok(CountResponse {
            report: CountReport::from(&trace),
            assumptions: assumptions.format(&artifact.program),
            timings: CountTimings { count_s: t.elapsed().as_secs_f64() },
        })
    }
}

fn with_query(session: &Session, nav: &Navigation, extra: Option<&str>) -> Result<AssumptionSet, ApiError> {
    let mut l = nav.assumptions.clone();
    if let Some(text) = extra {
        l.extend(session.artifact.parse_assumptions(text)?.iter());
    }
    Ok(l)
}

async fn count_at(session: &Arc<Session>, l: AssumptionSet, depth: Option<usize>) -> Result<CountResponse, ApiError> {
    let s = session.clone();
    let opts = RefineOptions { depth, ..Default::default() };
    blocking(move || CountResponse::compute(&s.artifact, &l, &opts)).await
}

async fn count(State(app): Shared, Path(id): Path<String>, Query(q): Query<CountQuery>) -> Result<Response, ApiError> {
    let s = app.store.ready(&id)?;
    let l = with_query(&s, &s.navigation(), q.assume.as_deref())?;
    let depth = parse_depth(q.depth.as_deref(), s.depth)?;
    Ok(Json(count_at(&s, l, depth).await?).into_response())
}

#[derive(Serialize)]
struct FacetResponse {
    #[serde(flatten)]
    report: FacetReport,
    assumptions: String,
}

async fn facets(State(app): Shared, Path(id): Path<String>, Query(q): Query<CountQuery>) -> Result<Response, ApiError> {
    let s = app.store.ready(&id)?;
    let l = with_query(&s, &s.navigation(), q.assume.as_deref())?;
    let opts = RefineOptions { depth: parse_depth(q.depth.as_deref(), s.depth)?, ..Default::default() };
    let assumptions = l.format(&s.artifact.program);
    let session = s.clone();
    let report = blocking(move || session.artifact.facets(&l, &opts)).await?;
    Ok(Json(FacetResponse { report, assumptions }).into_response())
}

#[derive(Deserialize)]
struct AssumeBody {
    literal: String,
}

async fn assume(
    State(app): Shared,
    Path(id): Path<String>,
    Json(body): Json<AssumeBody>,
) -> Result<Response, ApiError> {
    let s = app.store.ready(&id)?;
    let set = s.artifact.parse_assumptions(&body.literal)?;
    let mut lits = set.iter();
    let (Some(lit), None) = (lits.next(), lits.next()) else {
        return Err(ApiError::bad_request("expected exactly one literal"));
    };
    let nav = s.assume(lit)?;
    let c = count_at(&s, nav.assumptions.clone(), s.depth).await?;
    Ok(view(&s, &nav, Some(c)))
}

async fn undo(State(app): Shared, Path(id): Path<String>) -> Result<Response, ApiError> {
    let s = app.store.ready(&id)?;
    let nav = s.undo()?;
    let c = count_at(&s, nav.assumptions.clone(), s.depth).await?;
    Ok(view(&s, &nav, Some(c)))
}
