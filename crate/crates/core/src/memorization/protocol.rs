//! `/v1/generate` wire format.

use serde::{Deserialize, Serialize};

use crate::model::TokenId;

pub const GREEDY: &str = "greedy";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub prefix_tokens: Vec<TokenId>,
    pub max_new_tokens: usize,
    pub decoding: String,
}

impl GenerateRequest {
    pub fn greedy(prefix_tokens: Vec<TokenId>, max_new_tokens: usize) -> Self {
        GenerateRequest {
            prefix_tokens,
            max_new_tokens,
            decoding: GREEDY.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateResponse {
    pub tokens: Vec<TokenId>,
    pub decoding: String,
}
