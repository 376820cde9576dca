use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use posture_core::api::ErrorBody;
use posture_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Core(#[from] Error),

    #[error("control loop is not running")]
    Unavailable,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::Core(e) => match e {
                Error::Range { .. } | Error::Planning(_) | Error::Degenerate(_) => StatusCode::UNPROCESSABLE_ENTITY,
                Error::IllegalCommand { .. } => StatusCode::CONFLICT,
                Error::Input(_) => StatusCode::BAD_REQUEST,
                Error::Config(_) | Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            },
            ServiceError::Unavailable => StatusCode::SERVICE_UNAVAILABLE,
            ServiceError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = match &self {
            ServiceError::Core(e) => ErrorBody::from(e),
            other => ErrorBody {
                error: "unavailable".into(),
                message: other.to_string(),
                mode: None,
            },
        };
        (self.status(), Json(body)).into_response()
    }
}
