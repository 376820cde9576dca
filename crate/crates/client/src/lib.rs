//! Async client for the posture-control bench service.

use futures::{Stream, StreamExt};
use posture_core::api::{ErrorBody, PlanMode, PlanResponse, RegionsResponse, SubjectRequest, TargetRequest};
use posture_core::control::Frame;
use posture_core::load::SplitWeights;
use serde::de::DeserializeOwned;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    /// The service answered with an error status.
    #[error("service returned {status}: {}", body.message)]
    Api { status: u16, body: ErrorBody },

    #[error("request failed: {0}")]
    Http(#[from] reqwest::Error),

    #[error("malformed response: {0}")]
    Decode(#[from] serde_json::Error),
}

pub type Result<T, E = ClientError> = std::result::Result<T, E>;

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    pub fn new(base_url: impl Into<String>) -> Self {
        Client {
            base: base_url.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    async fn decode<T: DeserializeOwned>(resp: reqwest::Response) -> Result<T> {
        let status = resp.status();
        let bytes = resp.bytes().await?;
        if status.is_success() {
            return Ok(serde_json::from_slice(&bytes)?);
        }
        let body = serde_json::from_slice(&bytes).unwrap_or_else(|_| ErrorBody {
            error: "http".into(),
            message: String::from_utf8_lossy(&bytes).into_owned(),
            mode: None,
        });
        Err(ClientError::Api {
            status: status.as_u16(),
            body,
        })
    }

    async fn post<B: serde::Serialize, T: DeserializeOwned>(&self, path: &str, body: Option<&B>) -> Result<T> {
        let mut req = self.http.post(self.url(path));
        if let Some(b) = body {
            req = req.json(b);
        }
        Self::decode(req.send().await?).await
    }

    pub async fn state(&self) -> Result<Frame> {
        Self::decode(self.http.get(self.url("/state")).send().await?).await
    }

    pub async fn set_target(&self, target: &TargetRequest) -> Result<Frame> {
        self.post("/target", Some(target)).await
    }

    pub async fn estop(&self) -> Result<Frame> {
        self.post::<(), _>("/estop", None).await
    }

    pub async fn release(&self) -> Result<Frame> {
        self.post::<(), _>("/release", None).await
    }

    pub async fn set_weights(&self, weights: SplitWeights) -> Result<Frame> {
        self.post("/weights", Some(&weights)).await
    }

    pub async fn set_subject(&self, subject: Option<&str>) -> Result<Frame> {
        let body = SubjectRequest {
            subject: subject.map(str::to_string),
        };
        self.post("/subject", Some(&body)).await
    }

    pub async fn plan(&self, views: &[impl AsRef<str>], subject: Option<&str>, mode: PlanMode) -> Result<PlanResponse> {
        let views = views.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(",");
        let mode = match mode {
            PlanMode::Joint => "joint",
            PlanMode::PerView => "per_view",
        };
        let mut query = vec![("views", views.as_str()), ("mode", mode)];
        if let Some(s) = subject {
            query.push(("subject", s));
        }
        Self::decode(self.http.get(self.url("/plan")).query(&query).send().await?).await
    }

    pub async fn regions(&self) -> Result<RegionsResponse> {
        Self::decode(self.http.get(self.url("/regions")).send().await?).await
    }

    /// Live telemetry frames. The stream ends when the service closes it.
    pub async fn telemetry(&self) -> Result<impl Stream<Item = Result<Frame>> + Unpin> {
        let resp = self.http.get(self.url("/telemetry")).send().await?;
        if !resp.status().is_success() {
            return Err(Self::decode::<()>(resp).await.unwrap_err());
        }
        let bytes = resp.bytes_stream();
        Ok(Box::pin(futures::stream::unfold(
            (bytes, Vec::<u8>::new()),
            |(mut bytes, mut buf)| async move {
                loop {
                    if let Some(i) = buf.iter().position(|b| *b == b'\n') {
                        let line: Vec<u8> = buf.drain(..=i).collect();
                        let frame = serde_json::from_slice(&line).map_err(ClientError::from);
                        return Some((frame, (bytes, buf)));
                    }
                    match bytes.next().await? {
                        Ok(chunk) => buf.extend_from_slice(&chunk),
                        Err(e) => return Some((Err(e.into()), (bytes, buf))),
                    }
                }
            },
        )))
    }
}
