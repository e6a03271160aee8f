//! Multi-KB sessions behind a single XML endpoint.
//!
//! A KB is owned by the client that created it. With `shared="false"` only
//! the owner may change or release it; anyone may ask. Non-permanent KBs are
//! released once idle for longer than the TTL: lazily on the next access, and
//! by a periodic reaper.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use alnmatch::{subsumes, Advertisement, Concept, Error, KnowledgeBase};
use axum::extract::{ConnectInfo, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::Router;

use crate::dig::{self, escape, Ask, AskKind, Expr, PenaltyKind, Request, Tell};
use crate::ops;

/// Header that overrides the peer address as the client identity.
pub const CLIENT_HEADER: &str = "x-client-id";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Config {
    pub ttl: Duration,
    pub reaper_period: Duration,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            ttl: Duration::from_secs(300),
            reaper_period: Duration::from_secs(10),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    UnknownKb,
    UnauthorizedTell,
    MalformedQuery,
    ExpiredKb,
    InvalidTbox,
}

impl FailureKind {
    pub fn code(self) -> &'static str {
        match self {
            FailureKind::UnknownKb => "unknown-kb",
            FailureKind::UnauthorizedTell => "unauthorized-tell",
            FailureKind::MalformedQuery => "malformed-query",
            FailureKind::ExpiredKb => "expired-kb",
            FailureKind::InvalidTbox => "invalid-tbox",
        }
    }

    pub fn status(self) -> StatusCode {
        match self {
            FailureKind::UnknownKb => StatusCode::NOT_FOUND,
            FailureKind::UnauthorizedTell => StatusCode::FORBIDDEN,
            FailureKind::MalformedQuery => StatusCode::BAD_REQUEST,
            FailureKind::ExpiredKb => StatusCode::GONE,
            FailureKind::InvalidTbox => StatusCode::UNPROCESSABLE_ENTITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub kind: FailureKind,
    pub message: String,
}

fn fail<T>(kind: FailureKind, message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure {
        kind,
        message: message.into(),
    })
}

struct Session {
    owner: String,
    shared: bool,
    permanent: bool,
    last_used: Mutex<Instant>,
    kb: RwLock<KnowledgeBase>,
}

impl Session {
    fn idle_since(&self) -> Instant {
        *self.last_used.lock().unwrap()
    }

    fn may_modify(&self, client: &str) -> bool {
        self.shared || self.owner == client
    }
}

pub struct Registry {
    config: Config,
    next: AtomicU64,
    live: Mutex<HashMap<String, Arc<Session>>>,
    expired: Mutex<HashSet<String>>,
}

impl Registry {
    pub fn new(config: Config) -> Self {
        Registry {
            config,
            next: AtomicU64::new(1),
            live: Mutex::new(HashMap::new()),
            expired: Mutex::new(HashSet::new()),
        }
    }

    pub fn config(&self) -> Config {
        self.config
    }

    pub fn create(&self, owner: &str, shared: bool, permanent: bool, now: Instant) -> String {
        let uri = format!("kb-{}", self.next.fetch_add(1, Ordering::Relaxed));
        let session = Session {
            owner: owner.to_string(),
            shared,
            permanent,
            last_used: Mutex::new(now),
            kb: RwLock::new(KnowledgeBase::default()),
        };
        self.live.lock().unwrap().insert(uri.clone(), Arc::new(session));
        uri
    }

    fn stale(&self, s: &Session, now: Instant) -> bool {
        !s.permanent && now.saturating_duration_since(s.idle_since()) > self.config.ttl
    }

    /// Looks up a live session and marks it used.
    fn open(&self, uri: &str, now: Instant) -> Result<Arc<Session>, Failure> {
        let mut live = self.live.lock().unwrap();
        let Some(s) = live.get(uri).cloned() else {
            return if self.expired.lock().unwrap().contains(uri) {
                fail(FailureKind::ExpiredKb, format!("KB `{uri}` expired"))
            } else {
                fail(FailureKind::UnknownKb, format!("no KB `{uri}`"))
            };
        };
        if self.stale(&s, now) {
            live.remove(uri);
            self.expired.lock().unwrap().insert(uri.to_string());
            return fail(FailureKind::ExpiredKb, format!("KB `{uri}` expired"));
        }
        *s.last_used.lock().unwrap() = now;
        Ok(s)
    }

    /// Releases every non-permanent KB idle for longer than the TTL and
    /// returns their uris.
    pub fn reap(&self, now: Instant) -> Vec<String> {
        let mut live = self.live.lock().unwrap();
        let mut gone: Vec<String> = live
            .iter()
            .filter(|(_, s)| self.stale(s, now))
            .map(|(uri, _)| uri.clone())
            .collect();
        gone.sort();
        let mut expired = self.expired.lock().unwrap();
        for uri in &gone {
            live.remove(uri);
            expired.insert(uri.clone());
        }
        gone
    }

    pub fn live_count(&self) -> usize {
        self.live.lock().unwrap().len()
    }

    fn release(&self, uri: &str, client: &str, now: Instant) -> Result<(), Failure> {
        let s = self.open(uri, now)?;
        if !s.may_modify(client) {
            return fail(FailureKind::UnauthorizedTell, format!("only the owner may release `{uri}`"));
        }
        self.live.lock().unwrap().remove(uri);
        Ok(())
    }

    fn tell(&self, uri: &str, client: &str, tells: Vec<Tell>, now: Instant) -> Result<(), Failure> {
        let s = self.open(uri, now)?;
        if !s.may_modify(client) {
            return fail(FailureKind::UnauthorizedTell, format!("only the owner may tell `{uri}`"));
        }
        let mut kb = s.kb.write().unwrap();
        let mut axioms = Vec::new();
        let mut ads = kb.advertisements.clone();
        for t in tells {
            match t {
                Tell::Axiom(ax) => axioms.push(ax),
                Tell::Instance { id, side, concept } => {
                    let concept = resolve_in(&ads, &concept)?;
                    let ad = Advertisement { id, side, concept };
                    match ads.iter_mut().find(|a| a.id == ad.id) {
                        Some(slot) => *slot = ad,
                        None => ads.push(ad),
                    }
                }
            }
        }
        let tbox = match kb.tbox.extended(axioms) {
            Ok(t) => t,
            Err(e) => return fail(FailureKind::InvalidTbox, e.to_string()),
        };
        *kb = KnowledgeBase {
            tbox,
            advertisements: ads,
        };
        Ok(())
    }

    fn ask(&self, uri: &str, asks: &[Ask], now: Instant) -> Result<String, Failure> {
        let s = self.open(uri, now)?;
        let kb = s.kb.read().unwrap();
        let mut out = String::from("<responses>\n");
        for a in asks {
            out.push_str("  ");
            out.push_str(&answer(&kb, a));
            out.push('\n');
        }
        out.push_str("</responses>\n");
        Ok(out)
    }

    /// Handles one request body from `client`. Returns the status and the
    /// XML response.
    pub fn handle(&self, body: &str, client: &str, now: Instant) -> (StatusCode, String) {
        let result = match dig::parse_request(body) {
            Err(m) => fail(FailureKind::MalformedQuery, m.0),
            Ok(Request::GetIdentifier) => Ok(format!(
                "<identifier name=\"alnmatch\" version=\"{}\"/>\n",
                env!("CARGO_PKG_VERSION")
            )),
            Ok(Request::NewKb { shared, permanent }) => {
                let uri = self.create(client, shared, permanent, now);
                tracing::info!(%uri, %client, shared, permanent, "new KB");
                Ok(format!("<response><kb uri=\"{}\"/></response>\n", escape(&uri)))
            }
            Ok(Request::ReleaseKb { uri }) => self
                .release(&uri, client, now)
                .map(|()| "<response><ok/></response>\n".to_string()),
            Ok(Request::Tells { uri, tells }) => self
                .tell(&uri, client, tells, now)
                .map(|()| "<response><ok/></response>\n".to_string()),
            Ok(Request::Asks { uri, asks }) => self.ask(&uri, &asks, now),
        };
        match result {
            Ok(body) => (StatusCode::OK, body),
            Err(f) => (
                f.kind.status(),
                format!(
                    "<error code=\"{}\" message=\"{}\"/>\n",
                    f.kind.code(),
                    escape(&f.message)
                ),
            ),
        }
    }
}

fn resolve_in(ads: &[Advertisement], e: &Expr) -> Result<Concept, Failure> {
    match e {
        Expr::Concept(c) => Ok(c.clone()),
        Expr::Individual(id) => match ads.iter().find(|a| &a.id == id) {
            Some(a) => Ok(a.concept.clone()),
            None => fail(FailureKind::MalformedQuery, format!("no individual `{id}`")),
        },
    }
}

fn answer(kb: &KnowledgeBase, a: &Ask) -> String {
    let id = escape(&a.id);
    let resolve = |e: &Expr| resolve_in(&kb.advertisements, e).map_err(|f| (f.kind.code(), f.message));
    let result = (|| -> Result<String, (&'static str, String)> {
        let lift = |e: Error| (e.code(), e.to_string());
        let t = &kb.tbox;
        let boolean = |b: bool| format!("<{b} id=\"{id}\"/>");
        Ok(match &a.kind {
            AskKind::Satisfiable(c) => boolean(ops::satisfiable(&resolve(c)?, t).map_err(lift)?),
            AskKind::Subsumes(x, y) => boolean(subsumes(&resolve(x)?, &resolve(y)?, t).map_err(lift)?),
            AskKind::MatchType(c, d) => {
                let m = ops::classify(&resolve(c)?, &resolve(d)?, t).map_err(lift)?;
                format!("<matchType id=\"{id}\">{m}</matchType>")
            }
            AskKind::Abduce { c, d, tbox_step5 } => {
                let sol = ops::hypothesis(&resolve(c)?, &resolve(d)?, t, *tbox_step5).map_err(lift)?;
                format!(
                    "<abduction id=\"{id}\" penalty=\"{}\">{}</abduction>",
                    sol.penalty,
                    dig::render(&sol.hypothesis)
                )
            }
            AskKind::Contract(c, d) => {
                let pair = ops::contraction(&resolve(c)?, &resolve(d)?, t).map_err(lift)?;
                format!(
                    "<contraction id=\"{id}\" penalty=\"{}\"><giveUp>{}</giveUp><keep>{}</keep></contraction>",
                    pair.penalty,
                    dig::render(&pair.give_up),
                    dig::render(&pair.keep)
                )
            }
            AskKind::Rank { kind, c, d } => {
                let (c, d) = (resolve(c)?, resolve(d)?);
                let (name, p) = match kind {
                    PenaltyKind::Potential => ("potential", ops::potential_penalty(&c, &d, t)),
                    PenaltyKind::Partial => ("partial", ops::partial_penalty(&c, &d, t)),
                };
                format!("<penalty id=\"{id}\" type=\"{name}\">{}</penalty>", p.map_err(lift)?)
            }
        })
    })();
    result.unwrap_or_else(|(code, message)| {
        let mut s = String::new();
        let _ = write!(s, "<error id=\"{id}\" code=\"{code}\" message=\"{}\"/>", escape(&message));
        s
    })
}

fn client_of(headers: &HeaderMap, peer: SocketAddr) -> String {
    headers
        .get(CLIENT_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(str::to_string)
        .unwrap_or_else(|| peer.ip().to_string())
}

async fn endpoint(
    State(registry): State<Arc<Registry>>,
    ConnectInfo(peer): ConnectInfo<SocketAddr>,
    headers: HeaderMap,
    body: String,
) -> Response {
    let client = client_of(&headers, peer);
    let handled = tokio::task::spawn_blocking(move || registry.handle(&body, &client, Instant::now())).await;
    let (status, body) = handled.unwrap_or_else(|e| {
        (
            StatusCode::INTERNAL_SERVER_ERROR,
            format!("<error code=\"internal\" message=\"{}\"/>\n", escape(&e.to_string())),
        )
    });
    (status, [("content-type", "application/xml")], body).into_response()
}

pub fn router(registry: Arc<Registry>) -> Router {
    Router::new()
        .route("/", post(endpoint))
        .route("/dig", post(endpoint))
        .with_state(registry)
}

/// Serves on `listener` until the task is dropped, with the reaper running
/// alongside.
pub async fn serve(listener: tokio::net::TcpListener, config: Config) -> std::io::Result<()> {
    serve_registry(listener, Arc::new(Registry::new(config))).await
}

pub async fn serve_registry(listener: tokio::net::TcpListener, registry: Arc<Registry>) -> std::io::Result<()> {
    let config = registry.config();
    let reaper = Arc::clone(&registry);
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(config.reaper_period);
        tick.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
        loop {
            tick.tick().await;
            for uri in reaper.reap(Instant::now()) {
                tracing::info!(%uri, "released idle KB");
            }
        }
    });
    axum::serve(
        listener,
        router(registry).into_make_service_with_connect_info::<SocketAddr>(),
    )
    .await
}

#[cfg(test)]
mod tests {
    use super::*;

    const OWNER: &str = "10.0.0.1";
    const OTHER: &str = "10.0.0.2";

    fn registry(ttl_ms: u64) -> Registry {
        Registry::new(Config {
            ttl: Duration::from_millis(ttl_ms),
            reaper_period: Duration::from_millis(10),
        })
    }

    fn new_kb(r: &Registry, attrs: &str, now: Instant) -> String {
        let (status, body) = r.handle(&format!("<newKB {attrs}/>"), OWNER, now);
        assert_eq!(status, StatusCode::OK);
        let start = body.find("uri=\"").unwrap() + 5;
        body[start..].split('"').next().unwrap().to_string()
    }

    #[test]
    fn owner_rule() {
        let r = registry(1000);
        let now = Instant::now();
        let uri = new_kb(&r, r#"shared="false""#, now);
        let tell = format!(r#"<tells uri="{uri}"><impliesc><catom name="A"/><catom name="B"/></impliesc></tells>"#);
        assert_eq!(r.handle(&tell, OTHER, now).0, StatusCode::FORBIDDEN);
        assert_eq!(r.handle(&tell, OWNER, now).0, StatusCode::OK);
        let ask = format!(r#"<asks uri="{uri}"><subsumes id="q"><catom name="B"/><catom name="A"/></subsumes></asks>"#);
        let (status, body) = r.handle(&ask, OTHER, now);
        assert_eq!(status, StatusCode::OK);
        assert_eq!(body, "<responses>\n  <true id=\"q\"/>\n</responses>\n");
        let shared = new_kb(&r, "", now);
        let tell = format!(r#"<tells uri="{shared}"><defconcept name="A"/></tells>"#);
        assert_eq!(r.handle(&tell, OTHER, now).0, StatusCode::OK);
    }

    #[test]
    fn ttl_and_permanence() {
        let r = registry(100);
        let t0 = Instant::now();
        let gone = new_kb(&r, "", t0);
        let kept = new_kb(&r, r#"permanent="true""#, t0);
        let later = t0 + Duration::from_millis(150);
        assert_eq!(r.reap(later), vec![gone.clone()]);
        let ask = |uri: &str| format!(r#"<asks uri="{uri}"><satisfiable id="q"><top/></satisfiable></asks>"#);
        assert_eq!(r.handle(&ask(&gone), OWNER, later).0, StatusCode::GONE);
        assert_eq!(r.handle(&ask(&kept), OWNER, later).0, StatusCode::OK);
        assert_eq!(r.handle(&ask("kb-99"), OWNER, later).0, StatusCode::NOT_FOUND);
    }

    #[test]
    fn lazy_expiry_and_touch() {
        let r = registry(100);
        let t0 = Instant::now();
        let uri = new_kb(&r, "", t0);
        let ask = format!(r#"<asks uri="{uri}"><satisfiable id="q"><top/></satisfiable></asks>"#);
        assert_eq!(r.handle(&ask, OWNER, t0 + Duration::from_millis(80)).0, StatusCode::OK);
        assert_eq!(r.handle(&ask, OWNER, t0 + Duration::from_millis(160)).0, StatusCode::OK);
        assert_eq!(r.handle(&ask, OWNER, t0 + Duration::from_millis(300)).0, StatusCode::GONE);
        assert_eq!(r.live_count(), 0);
    }

    #[test]
    fn tells_are_atomic() {
        let r = registry(1000);
        let now = Instant::now();
        let uri = new_kb(&r, "", now);
        let cyclic = format!(
            r#"<tells uri="{uri}">
                 <instanceof><individual name="o"/><catom name="A"/></instanceof>
                 <impliesc><catom name="A"/><catom name="B"/></impliesc>
                 <impliesc><catom name="B"/><catom name="A"/></impliesc>
               </tells>"#
        );
        let (status, body) = r.handle(&cyclic, OWNER, now);
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
        assert!(body.contains("invalid-tbox"));
        let ask = format!(r#"<asks uri="{uri}"><satisfiable id="q"><individual name="o"/></satisfiable></asks>"#);
        let (_, body) = r.handle(&ask, OWNER, now);
        assert!(body.contains(r#"<error id="q" code="malformed-query""#), "{body}");
    }

    #[test]
    fn malformed_and_release() {
        let r = registry(1000);
        let now = Instant::now();
        assert_eq!(r.handle("<asks>", OWNER, now).0, StatusCode::BAD_REQUEST);
        let uri = new_kb(&r, r#"shared="false""#, now);
        let release = format!(r#"<releaseKB uri="{uri}"/>"#);
        assert_eq!(r.handle(&release, OTHER, now).0, StatusCode::FORBIDDEN);
        assert_eq!(r.handle(&release, OWNER, now).0, StatusCode::OK);
        assert_eq!(r.handle(&release, OWNER, now).0, StatusCode::NOT_FOUND);
    }

    #[test]
    fn per_query_errors_do_not_fail_the_request() {
        let r = registry(1000);
        let now = Instant::now();
        let uri = new_kb(&r, "", now);
        let asks = format!(
            r#"<asks uri="{uri}">
                 <rank id="a" type="potential"><catom name="A"/><not><catom name="A"/></not></rank>
                 <rank id="b" type="partial"><catom name="A"/><not><catom name="A"/></not></rank>
               </asks>"#
        );
        let (status, body) = r.handle(&asks, OWNER, now);
        assert_eq!(status, StatusCode::OK);
        assert!(body.contains(r#"<error id="a" code="partial-match""#));
        assert!(body.contains(r#"<penalty id="b" type="partial">1</penalty>"#));
    }
}
