//! The HTTP surface. A small synchronous server: one thread per connection,
//! requests parsed with httparse, JSON bodies throughout.
//!
//! Routes:
//!   POST /query                  {user, token, query, views?}
//!   POST /graphs/{id}/write      {user, token, inserts: [lines], removes: [lines]}
//!   POST /admin/grant            {user, token, kind: "role"|"privilege", ...}
//!   POST /admin/revoke           same shape as grant
//!   GET  /audit/verify           principal via x-user / x-token headers
//!   GET  /audit/txs?user=&kind=&from=&to=
//!   GET  /views                  public: ids and names only
//!
//! Statuses: 200 ok, 400 parse, 401 auth, 403 denied, 404 unknown resource.
//! The coordinator lock is held for the decide-and-record phase; query
//! evaluation runs after release, on immutable snapshots.

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::ledger::Privilege;
use crate::query::to_sparql_json;

use super::{
    AdminPayload, Gateway, GatewayError, QueryRequest, RequestStatus, TxFilter,
};

pub const DEFAULT_LISTEN: &str = "127.0.0.1:3030";

pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: Arc<AtomicBool>,
    join: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown(mut self) {
        self.stop();
    }

    fn stop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        // Wake the accept loop.
        let _ = TcpStream::connect(self.addr);
        if let Some(join) = self.join.take() {
            let _ = join.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop();
    }
}

/// Bind and serve until `ServerHandle::shutdown`. `listen` accepts
/// `host:port`; port 0 picks an ephemeral port (see `ServerHandle::addr`).
pub fn serve(gateway: Arc<Mutex<Gateway>>, listen: &str) -> std::io::Result<ServerHandle> {
    let listener = TcpListener::bind(listen)?;
    let addr = listener.local_addr()?;
    let shutdown = Arc::new(AtomicBool::new(false));
    let flag = shutdown.clone();
    let join = std::thread::spawn(move || {
        for stream in listener.incoming() {
            if flag.load(Ordering::SeqCst) {
                break;
            }
            let Ok(stream) = stream else { continue };
            let gateway = gateway.clone();
            std::thread::spawn(move || {
                let _ = handle_connection(stream, gateway);
            });
        }
    });
    Ok(ServerHandle {
        addr,
        shutdown,
        join: Some(join),
    })
}

struct Request {
    method: String,
    path: String,
    query_string: String,
    user_header: Option<String>,
    token_header: Option<String>,
    body: Vec<u8>,
}

fn read_request(stream: &mut TcpStream) -> std::io::Result<Option<Request>> {
    let mut buf = Vec::with_capacity(4096);
    let mut chunk = [0u8; 4096];
    let header_end = loop {
        if let Some(pos) = find_header_end(&buf) {
            break pos;
        }
        if buf.len() > 1 << 20 {
            return Ok(None); // header too large
        }
        let n = stream.read(&mut chunk)?;
        if n == 0 {
            return Ok(None);
        }
        buf.extend_from_slice(&chunk[..n]);
    };

    let mut headers = [httparse::EMPTY_HEADER; 32];
    let mut parsed = httparse::Request::new(&mut headers);
    let status = parsed
        .parse(&buf[..header_end])
        .map_err(|_| std::io::Error::other("bad request head"))?;
    if status.is_partial() {
        return Ok(None);
    }

    let method = parsed.method.unwrap_or("").to_string();
    let target = parsed.path.unwrap_or("/").to_string();
    let (path, query_string) = match target.split_once('?') {
        Some((p, q)) => (p.to_string(), q.to_string()),
        None => (target, String::new()),
    };
    const MAX_BODY: usize = 16 << 20;
    let mut content_length = 0usize;
    let mut user_header = None;
    let mut token_header = None;
    for h in parsed.headers.iter() {
        let name = h.name.to_ascii_lowercase();
        let value = String::from_utf8_lossy(h.value).to_string();
        match name.as_str() {
            "content-length" => content_length = value.trim().parse().unwrap_or(0),
            "x-user" => user_header = Some(value),
            "x-token" => token_header = Some(value),
            _ => {}
        }
    }

    if content_length > MAX_BODY {
        return Ok(None);
    }
    let mut body = buf[header_end..].to_vec();
    while body.len() < content_length {
        let n = stream.read(&mut chunk)?;
        if n == 0 {
            break;
        }
        body.extend_from_slice(&chunk[..n]);
    }
    body.truncate(content_length);

    Ok(Some(Request {
        method,
        path,
        query_string,
        user_header,
        token_header,
        body,
    }))
}

fn find_header_end(buf: &[u8]) -> Option<usize> {
    buf.windows(4).position(|w| w == b"\r\n\r\n").map(|p| p + 4)
}

fn write_response(stream: &mut TcpStream, status: u16, body: &Value) -> std::io::Result<()> {
    let body = body.to_string();
    let reason = match status {
        200 => "OK",
        400 => "Bad Request",
        401 => "Unauthorized",
        403 => "Forbidden",
        404 => "Not Found",
        405 => "Method Not Allowed",
        _ => "Internal Server Error",
    };
    let head = format!(
        "HTTP/1.1 {status} {reason}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n",
        body.len()
    );
    stream.write_all(head.as_bytes())?;
    stream.write_all(body.as_bytes())
}

fn handle_connection(
    mut stream: TcpStream,
    gateway: Arc<Mutex<Gateway>>,
) -> std::io::Result<()> {
    let Some(req) = read_request(&mut stream)? else {
        return Ok(());
    };
    let (status, body) = route(&req, &gateway);
    write_response(&mut stream, status, &body)
}

fn error_body(e: &GatewayError) -> (u16, Value) {
    (e.http_status(), json!({ "error": e.to_string() }))
}

fn percent_decode(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'%' if i + 2 < bytes.len() => {
                let hex = std::str::from_utf8(&bytes[i + 1..i + 3]).unwrap_or("");
                match u8::from_str_radix(hex, 16) {
                    Ok(b) => {
                        out.push(b);
                        i += 3;
                    }
                    Err(_) => {
                        out.push(bytes[i]);
                        i += 1;
                    }
                }
            }
            b'+' => {
                out.push(b' ');
                i += 1;
            }
            b => {
                out.push(b);
                i += 1;
            }
        }
    }
    String::from_utf8_lossy(&out).into_owned()
}

fn query_params(qs: &str) -> Vec<(String, String)> {
    qs.split('&')
        .filter(|kv| !kv.is_empty())
        .map(|kv| match kv.split_once('=') {
            Some((k, v)) => (percent_decode(k), percent_decode(v)),
            None => (percent_decode(kv), String::new()),
        })
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryBody {
    user: String,
    token: String,
    query: String,
    #[serde(default)]
    views: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WriteBody {
    user: String,
    token: String,
    #[serde(default)]
    inserts: Vec<String>,
    #[serde(default)]
    removes: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AdminBody {
    user: String,
    token: String,
    kind: String,
    #[serde(default)]
    target_user: Option<String>,
    #[serde(default)]
    role: Option<String>,
    #[serde(default)]
    action: Option<String>,
    #[serde(default)]
    resource: Option<String>,
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T, GatewayError> {
    serde_json::from_slice(body).map_err(|e| GatewayError::BadRequest(format!("body: {e}")))
}

fn admin_payload(body: &AdminBody) -> Result<AdminPayload, GatewayError> {
    match body.kind.as_str() {
        "role" => {
            let user = body
                .target_user
                .clone()
                .ok_or_else(|| GatewayError::BadRequest("role grants need target_user".into()))?;
            let role = body
                .role
                .clone()
                .ok_or_else(|| GatewayError::BadRequest("role grants need role".into()))?;
            Ok(AdminPayload::Role { user, role })
        }
        "privilege" => {
            let role = body
                .role
                .clone()
                .ok_or_else(|| GatewayError::BadRequest("privilege grants need role".into()))?;
            let action = body
                .action
                .clone()
                .ok_or_else(|| GatewayError::BadRequest("privilege grants need action".into()))?;
            let resource = body
                .resource
                .clone()
                .ok_or_else(|| GatewayError::BadRequest("privilege grants need resource".into()))?;
            let privilege = match action.to_ascii_lowercase().as_str() {
                "read" => Privilege::read(resource),
                "write" => Privilege::write(resource),
                "delegate" => Privilege::delegate(resource),
                other => {
                    return Err(GatewayError::BadRequest(format!(
                        "unknown privilege action: {other}"
                    )))
                }
            };
            Ok(AdminPayload::Privilege { role, privilege })
        }
        other => Err(GatewayError::BadRequest(format!(
            "kind must be 'role' or 'privilege', got {other:?}"
        ))),
    }
}

fn graph_write_target(path: &str) -> Option<&str> {
    path.strip_prefix("/graphs/")?.strip_suffix("/write")
}

fn route(req: &Request, gateway: &Arc<Mutex<Gateway>>) -> (u16, Value) {
    match (req.method.as_str(), req.path.as_str()) {
        ("POST", "/query") => post_query(req, gateway),
        ("POST", path) if graph_write_target(path).is_some() => {
            let id = graph_write_target(path).expect("guard checked");
            post_write(req, gateway, id)
        }
        ("POST", "/admin/grant") => post_admin(req, gateway, true),
        ("POST", "/admin/revoke") => post_admin(req, gateway, false),
        ("GET", "/audit/verify") => get_audit_verify(req, gateway),
        ("GET", "/audit/txs") => get_audit_txs(req, gateway),
        ("GET", "/views") => get_views(gateway),
        ("GET" | "POST", _) => (404, json!({ "error": "no such endpoint" })),
        _ => (405, json!({ "error": "method not allowed" })),
    }
}

fn post_query(req: &Request, gateway: &Arc<Mutex<Gateway>>) -> (u16, Value) {
    let body: QueryBody = match parse_body(&req.body) {
        Ok(b) => b,
        Err(e) => return error_body(&e),
    };
    let request = QueryRequest {
        user: body.user,
        token: body.token,
        query: body.query,
        view_ids: body.views,
    };
    // Decide and record under the lock; evaluate on snapshots outside it.
    let prepared = {
        let mut gw = gateway.lock().expect("gateway lock");
        match gw.prepare_query(&request) {
            Ok(p) => p,
            Err(e) => return error_body(&e),
        }
    };
    let response = prepared.finish();
    let status = match response.status {
        RequestStatus::Ok => 200,
        RequestStatus::Denied => 403,
    };
    let body = json!({
        "status": response.status,
        "view_ids": response.view_ids,
        "results": to_sparql_json(&response.results),
        "tx_id": response.tx_id,
        "deny_reason": response.deny_reason,
    });
    (status, body)
}

fn post_write(req: &Request, gateway: &Arc<Mutex<Gateway>>, graph_id: &str) -> (u16, Value) {
    let body: WriteBody = match parse_body(&req.body) {
        Ok(b) => b,
        Err(e) => return error_body(&e),
    };
    let mut gw = gateway.lock().expect("gateway lock");
    let inserts = match gw.parse_triples(&body.inserts) {
        Ok(t) => t,
        Err(e) => return error_body(&e),
    };
    let removes = match gw.parse_triples(&body.removes) {
        Ok(t) => t,
        Err(e) => return error_body(&e),
    };
    match gw.handle_write(&body.user, &body.token, graph_id, &inserts, &removes) {
        Ok(resp) => {
            let status = match resp.status {
                RequestStatus::Ok => 200,
                RequestStatus::Denied => 403,
            };
            (
                status,
                json!({
                    "status": resp.status,
                    "inserted": resp.inserted,
                    "removed": resp.removed,
                    "tx_id": resp.tx_id,
                    "deny_reason": resp.deny_reason,
                }),
            )
        }
        Err(e) => error_body(&e),
    }
}

fn post_admin(req: &Request, gateway: &Arc<Mutex<Gateway>>, grant: bool) -> (u16, Value) {
    let body: AdminBody = match parse_body(&req.body) {
        Ok(b) => b,
        Err(e) => return error_body(&e),
    };
    let payload = match admin_payload(&body) {
        Ok(p) => p,
        Err(e) => return error_body(&e),
    };
    let mut gw = gateway.lock().expect("gateway lock");
    let result = if grant {
        gw.admin_grant(&body.user, &body.token, payload)
    } else {
        gw.admin_revoke(&body.user, &body.token, payload)
    };
    match result {
        Ok(tx_id) => (200, json!({ "tx_id": tx_id })),
        Err(e) => error_body(&e),
    }
}

fn principal_headers(req: &Request) -> (String, String) {
    (
        req.user_header.clone().unwrap_or_default(),
        req.token_header.clone().unwrap_or_default(),
    )
}

fn get_audit_verify(req: &Request, gateway: &Arc<Mutex<Gateway>>) -> (u16, Value) {
    let (user, token) = principal_headers(req);
    let mut gw = gateway.lock().expect("gateway lock");
    match gw.audit_verify(&user, &token) {
        Ok(report) => (200, serde_json::to_value(report).expect("serializable")),
        Err(e) => error_body(&e),
    }
}

fn get_audit_txs(req: &Request, gateway: &Arc<Mutex<Gateway>>) -> (u16, Value) {
    let (user, token) = principal_headers(req);
    let mut filter = TxFilter::default();
    for (k, v) in query_params(&req.query_string) {
        match k.as_str() {
            "user" => filter.user = Some(v),
            "kind" => filter.kind = Some(v),
            "from" => filter.from_height = v.parse().ok(),
            "to" => filter.to_height = v.parse().ok(),
            _ => {}
        }
    }
    let mut gw = gateway.lock().expect("gateway lock");
    match gw.audit_list(&user, &token, &filter) {
        Ok(txs) => (200, json!({ "txs": txs })),
        Err(e) => error_body(&e),
    }
}

fn get_views(gateway: &Arc<Mutex<Gateway>>) -> (u16, Value) {
    let gw = gateway.lock().expect("gateway lock");
    let views: Vec<Value> = gw
        .view_listing()
        .into_iter()
        .map(|(id, name)| json!({ "id": id, "name": name }))
        .collect();
    (200, json!({ "views": views }))
}
