use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use stillmotion::Error;

/// An error response: status plus a `{"code", "message"}` JSON body.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

#[derive(Serialize)]
struct Body<'a> {
    code: &'a str,
    message: &'a str,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn not_found() -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", "unknown session")
    }

    pub fn no_mask() -> Self {
        Self::new(
            StatusCode::CONFLICT,
            "no_mask",
            "session has no mask yet; PUT clicks first",
        )
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_input", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

/// Library errors from user-supplied input are 422; the rest are 500.
impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::ClickOutOfBounds { .. }
            | Error::ConflictingClick { .. }
            | Error::NoPositiveClick
            | Error::ClicksConflict
            | Error::InvalidParameter(_)
            | Error::TooManyClusters { .. }
            | Error::NoBoundaryData
            | Error::InvalidMesh(_)
            | Error::ImageTooSmall { .. } => ApiError::invalid(e.to_string()),
            other => ApiError::internal(other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Body {
            code: self.code,
            message: &self.message,
        };
        (self.status, Json(body)).into_response()
    }
}
