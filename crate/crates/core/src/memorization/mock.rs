//! Lookup-table inference server speaking the `/v1/generate` protocol.
//!
//! Prefixes are keyed by their 128-bit token hash. Registered prefixes get
//! their continuation (cut or zero-padded to the requested length); any
//! other prefix gets `max_new_tokens` zeros. Non-greedy or malformed
//! requests are answered with HTTP 400.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tokio::task::JoinHandle;

use super::protocol::{GenerateRequest, GenerateResponse, GREEDY};
use crate::error::{Error, Result};
use crate::jsonl::JsonlReader;
use crate::model::{token_hash, TokenId};

/// One lookup-file line. Either `prefix_hash` (32 hex digits) or
/// `prefix_tokens` must be given.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix_tokens: Option<Vec<TokenId>>,
    pub continuation: Vec<TokenId>,
}

#[derive(Debug, Clone, Default)]
pub struct MockTable {
    entries: HashMap<u128, Vec<TokenId>>,
}

impl MockTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, prefix: &[TokenId], continuation: Vec<TokenId>) {
        self.entries.insert(token_hash(prefix), continuation);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut table = MockTable::new();
        for item in JsonlReader::<MockEntry>::open(path)? {
            let (line, e) = item?;
            let key = match (&e.prefix_hash, &e.prefix_tokens) {
                (Some(h), _) => u128::from_str_radix(h, 16)
                    .map_err(|_| Error::parse(path, line, format!("bad prefix_hash `{h}`")))?,
                (None, Some(t)) => token_hash(t),
                (None, None) => {
                    return Err(Error::parse(path, line, "need prefix_hash or prefix_tokens"))
                }
            };
            table.entries.insert(key, e.continuation);
        }
        Ok(table)
    }

    pub fn respond(&self, prefix: &[TokenId], max_new_tokens: usize) -> Vec<TokenId> {
        let mut out = self
            .entries
            .get(&token_hash(prefix))
            .cloned()
            .unwrap_or_default();
        out.resize(max_new_tokens, 0);
        out
    }
}

async fn generate(State(table): State<Arc<MockTable>>, body: Bytes) -> Response {
    let req: GenerateRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return (StatusCode::BAD_REQUEST, format!("malformed request: {e}")).into_response(),
    };
    if req.decoding != GREEDY {
        return (
            StatusCode::BAD_REQUEST,
            format!("decoding `{}` not supported, use `{GREEDY}`", req.decoding),
        )
            .into_response();
    }
    if req.max_new_tokens == 0 {
        return (StatusCode::BAD_REQUEST, "max_new_tokens must be positive").into_response();
    }
    Json(GenerateResponse {
        tokens: table.respond(&req.prefix_tokens, req.max_new_tokens),
        decoding: GREEDY.to_string(),
    })
    .into_response()
}

pub fn router(table: MockTable) -> Router {
    Router::new()
        .route("/v1/generate", post(generate))
        .with_state(Arc::new(table))
}

/// Serves until the task is dropped or the listener fails.
pub async fn serve_mock(listener: TcpListener, table: MockTable) -> std::io::Result<()> {
    axum::serve(listener, router(table)).await
}

/// Starts the server on an ephemeral localhost port.
pub async fn spawn_mock(table: MockTable) -> std::io::Result<(SocketAddr, JoinHandle<()>)> {
    let listener = TcpListener::bind("127.0.0.1:0").await?;
    let addr = listener.local_addr()?;
    let handle = tokio::spawn(async move {
        let _ = serve_mock(listener, table).await;
    });
    Ok((addr, handle))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn respond_pads_and_truncates() {
        let mut t = MockTable::new();
        t.insert(&[1, 2], vec![7, 8, 9]);
        assert_eq!(t.respond(&[1, 2], 2), vec![7, 8]);
        assert_eq!(t.respond(&[1, 2], 5), vec![7, 8, 9, 0, 0]);
        assert_eq!(t.respond(&[2, 1], 3), vec![0, 0, 0]);
    }

    #[test]
    fn load_by_hash_or_tokens() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("lookup.jsonl");
        let hash = crate::model::token_hash_hex(&[5, 6]);
        std::fs::write(
            &p,
            format!(
                "{{\"prefix_hash\":\"{hash}\",\"continuation\":[1]}}\n{{\"prefix_tokens\":[9],\"continuation\":[2]}}\n"
            ),
        )
        .unwrap();
        let t = MockTable::load(&p).unwrap();
        assert_eq!(t.respond(&[5, 6], 1), vec![1]);
        assert_eq!(t.respond(&[9], 1), vec![2]);
    }
}
