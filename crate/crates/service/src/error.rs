use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

use metaphora_core::colloc::CollocError;
use metaphora_core::concord::ConcordError;
use metaphora_core::corpus::FilterParseError;
use metaphora_core::metaphor::MetaphorError;
use metaphora_core::topics::TopicError;

/// Error returned by every endpoint as `{"error": {"code", "message"}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn bad_request(message: impl Into<String>) -> Self {
        Self { status: StatusCode::BAD_REQUEST, code: "bad_request", message: message.into() }
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self { status: StatusCode::NOT_FOUND, code: "not_found", message: message.into() }
    }

    pub fn unprocessable(message: impl Into<String>) -> Self {
        Self { status: StatusCode::UNPROCESSABLE_ENTITY, code: "unprocessable", message: message.into() }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self { status: StatusCode::INTERNAL_SERVER_ERROR, code: "internal", message: message.into() }
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for ApiError {}

#[derive(Serialize)]
struct Envelope<'a> {
    error: Body<'a>,
}

#[derive(Serialize)]
struct Body<'a> {
    code: &'a str,
    message: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Envelope { error: Body { code: self.code, message: &self.message } };
        (self.status, Json(body)).into_response()
    }
}

impl From<FilterParseError> for ApiError {
    fn from(e: FilterParseError) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

impl From<ConcordError> for ApiError {
    fn from(e: ConcordError) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

impl From<CollocError> for ApiError {
    fn from(e: CollocError) -> Self {
        match e {
            CollocError::InvalidCounts { .. } => ApiError::internal(e.to_string()),
            _ => ApiError::unprocessable(e.to_string()),
        }
    }
}

impl From<TopicError> for ApiError {
    fn from(e: TopicError) -> Self {
        match e {
            TopicError::TopicOutOfRange { .. } => ApiError::not_found(e.to_string()),
            TopicError::InvalidConfig(_) => ApiError::bad_request(e.to_string()),
            TopicError::DegenerateDesign(_) | TopicError::ModelCorpusMismatch(_) | TopicError::EmptyCorpus => {
                ApiError::unprocessable(e.to_string())
            }
            _ => ApiError::internal(e.to_string()),
        }
    }
}

impl From<MetaphorError> for ApiError {
    fn from(e: MetaphorError) -> Self {
        ApiError::unprocessable(e.to_string())
    }
}
