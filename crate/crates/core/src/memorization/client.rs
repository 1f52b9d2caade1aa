use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::protocol::{GenerateRequest, GenerateResponse, GREEDY};
use crate::error::{Error, Result};
use crate::model::TokenId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferenceEndpoint {
    pub base_url: String,
    #[serde(with = "secs")]
    pub timeout: Duration,
    pub max_in_flight: usize,
    pub retries: u32,
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

impl InferenceEndpoint {
    pub fn new(base_url: impl Into<String>) -> Self {
        InferenceEndpoint {
            base_url: base_url.into(),
            timeout: Duration::from_secs(60),
            max_in_flight: 4,
            retries: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_in_flight == 0 {
            return Err(Error::InvalidParameter("max_in_flight must be >= 1".into()));
        }
        Ok(())
    }

    pub fn client(&self) -> Result<reqwest::Client> {
        reqwest::Client::builder()
            .timeout(self.timeout)
            .build()
            .map_err(|e| Error::Transport(e.to_string()))
    }

    fn generate_url(&self) -> String {
        format!("{}/v1/generate", self.base_url.trim_end_matches('/'))
    }
}

async fn request_once(
    client: &reqwest::Client,
    url: &str,
    body: &GenerateRequest,
) -> Result<GenerateResponse> {
    let resp = client
        .post(url)
        .json(body)
        .send()
        .await
        .map_err(|e| Error::Transport(e.to_string()))?;
    let status = resp.status();
    if status != reqwest::StatusCode::OK {
        return Err(Error::Transport(format!("HTTP {status}")));
    }
    let bytes = resp.bytes().await.map_err(|e| Error::Transport(e.to_string()))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Protocol(format!("bad response body: {e}")))
}

/// Requests exactly `suffix_len` greedy tokens for `prefix`. Transport
/// failures are retried up to `endpoint.retries` times; protocol
/// violations are returned immediately.
pub async fn fetch_continuation(
    client: &reqwest::Client,
    endpoint: &InferenceEndpoint,
    prefix: &[TokenId],
    suffix_len: usize,
) -> Result<Vec<TokenId>> {
    let url = endpoint.generate_url();
    let body = GenerateRequest::greedy(prefix.to_vec(), suffix_len);
    let mut attempt = 0;
    let resp = loop {
        match request_once(client, &url, &body).await {
            Ok(r) => break r,
            Err(Error::Transport(_)) if attempt < endpoint.retries => {
                attempt += 1;
                tokio::time::sleep(Duration::from_millis(25 << attempt)).await;
            }
            Err(e) => return Err(e),
        }
    };
    if resp.decoding != GREEDY {
        return Err(Error::Protocol(format!(
            "server echoed decoding `{}`, expected `{GREEDY}`",
            resp.decoding
        )));
    }
    if resp.tokens.len() != suffix_len {
        return Err(Error::Protocol(format!(
            "server returned {} tokens, requested {suffix_len}",
            resp.tokens.len()
        )));
    }
    Ok(resp.tokens)
}
