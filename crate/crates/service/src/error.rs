use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use larex_core::error::FieldError;
use serde::Serialize;

pub type Result<T, E = ServiceError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("not found: {0}")]
    NotFound(String),

    #[error("bad request: {0}")]
    BadRequest(String),

    #[error(transparent)]
    Core(#[from] larex_core::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<FieldError>,
}

/// The innermost core error: replay wraps edit failures with their index.
fn root(e: &larex_core::Error) -> &larex_core::Error {
    match e {
        larex_core::Error::Edit { source, .. } => root(source),
        other => other,
    }
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        use larex_core::Error as E;
        match self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
            ServiceError::Core(e) => match root(e) {
                E::NotFound(_) => StatusCode::NOT_FOUND,
                E::Validation(_) => StatusCode::UNPROCESSABLE_ENTITY,
                E::InvalidInput(_) | E::Parse { .. } | E::Json(_) => StatusCode::BAD_REQUEST,
                E::Image { .. } => StatusCode::UNPROCESSABLE_ENTITY,
                E::Io { .. } | E::Edit { .. } => StatusCode::INTERNAL_SERVER_ERROR,
            },
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let fields = match &self {
            ServiceError::Core(e) => match root(e) {
                larex_core::Error::Validation(f) => f.clone(),
                _ => Vec::new(),
            },
            _ => Vec::new(),
        };
        let status = self.status();
        if status.is_server_error() {
            tracing::error!("{self}");
        }
        let body = ErrorBody {
            error: self.to_string(),
            fields,
        };
        (status, Json(body)).into_response()
    }
}
