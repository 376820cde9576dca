use std::convert::Infallible;
use std::time::Duration;

use axum::body::{Body, Bytes};
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Query, State};
use axum::http::header::CONTENT_TYPE;
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use posture_core::api::{self, PlanMode, PlanResponse, RegionsResponse, SubjectRequest, TargetRequest};
use posture_core::control::{Command, Frame};
use posture_core::load::SplitWeights;
use posture_core::Error;
use serde::Deserialize;
use tokio::sync::watch;

use crate::{ControlHandle, ServiceError};

#[derive(Clone)]
pub struct AppState {
    pub control: ControlHandle,
    /// Ends open telemetry streams when it flips to true.
    pub shutdown: watch::Receiver<bool>,
}

type ApiResult<T> = Result<Json<T>, ServiceError>;

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| Error::Input(e.body_text()).into())
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/state", get(get_state))
        .route("/target", post(post_target))
        .route("/estop", post(post_estop))
        .route("/release", post(post_release))
        .route("/weights", post(post_weights))
        .route("/subject", post(post_subject))
        .route("/plan", get(get_plan))
        .route("/regions", get(get_regions))
        .route("/telemetry", get(get_telemetry))
        .with_state(state)
}

async fn get_state(State(s): State<AppState>) -> Json<Frame> {
    Json(s.control.snapshot())
}

async fn post_target(State(s): State<AppState>, payload: Result<Json<TargetRequest>, JsonRejection>) -> ApiResult<Frame> {
    let t = body(payload)?;
    let cmd = Command::SetTarget {
        roll_deg: t.roll_deg,
        pitch_deg: t.pitch_deg,
        split: t.split,
    };
    Ok(Json(s.control.command(cmd).await?))
}

async fn post_estop(State(s): State<AppState>) -> ApiResult<Frame> {
    Ok(Json(s.control.command(Command::EStop).await?))
}

async fn post_release(State(s): State<AppState>) -> ApiResult<Frame> {
    Ok(Json(s.control.command(Command::Release).await?))
}

async fn post_weights(State(s): State<AppState>, payload: Result<Json<SplitWeights>, JsonRejection>) -> ApiResult<Frame> {
    let w = body(payload)?;
    Ok(Json(
        s.control
            .command(Command::SetWeights {
                w_leg: w.w_leg,
                w_abd: w.w_abd,
            })
            .await?,
    ))
}

async fn post_subject(State(s): State<AppState>, payload: Result<Json<SubjectRequest>, JsonRejection>) -> ApiResult<Frame> {
    let r = body(payload)?;
    Ok(Json(s.control.command(Command::SetSubject { subject: r.subject }).await?))
}

#[derive(Debug, Deserialize)]
struct PlanQuery {
    views: Option<String>,
    subject: Option<String>,
    #[serde(default)]
    mode: PlanMode,
}

async fn get_plan(State(s): State<AppState>, query: Result<Query<PlanQuery>, QueryRejection>) -> ApiResult<PlanResponse> {
    let Query(q) = query.map_err(|e| ServiceError::from(Error::Input(e.body_text())))?;
    let views = api::parse_views(q.views.as_deref().unwrap_or(""));
    if views.is_empty() {
        return Err(Error::Input("`views` must name at least one view".into()).into());
    }
    let subject = q.subject.as_deref().filter(|v| !v.is_empty());
    let weights = s.control.snapshot().weights;
    Ok(Json(api::plan(s.control.config(), &views, subject, weights, q.mode)?))
}

async fn get_regions(State(s): State<AppState>) -> Json<RegionsResponse> {
    Json(api::regions(s.control.config()))
}

/// Newline-delimited JSON frames at the configured telemetry rate.
async fn get_telemetry(State(s): State<AppState>) -> impl IntoResponse {
    let period = Duration::from_secs_f64(1.0 / s.control.config().control.telemetry_hz);
    let interval = tokio::time::interval(period);
    let frames = s.control.subscribe();
    let stream = futures::stream::unfold(
        (interval, frames, s.shutdown),
        |(mut interval, frames, mut shutdown)| async move {
            tokio::select! {
                _ = interval.tick() => {}
                _ = shutdown.wait_for(|stop| *stop) => return None,
            }
            if frames.has_changed().is_err() {
                return None;
            }
            let mut line = serde_json::to_vec(&*frames.borrow()).expect("frames serialize");
            line.push(b'\n');
            Some((Ok::<_, Infallible>(Bytes::from(line)), (interval, frames, shutdown)))
        },
    );
    ([(CONTENT_TYPE, "application/x-ndjson")], Body::from_stream(stream))
}
