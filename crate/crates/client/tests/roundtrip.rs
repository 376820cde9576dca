use std::time::Duration;

use futures::StreamExt;
use posture_client::{Client, ClientError};
use posture_core::api::{PlanMode, TargetRequest};
use posture_core::control::{Mode, SplitRequest};
use posture_core::load::SplitWeights;
use posture_core::Interval;
use posture_service::{Service, ServiceOptions};

async fn service() -> (Service, Client) {
    let svc = Service::start(
        "127.0.0.1:0",
        ServiceOptions {
            speedup: 50,
            ..Default::default()
        },
    )
    .await
    .unwrap();
    let client = Client::new(format!("{}/", svc.url()));
    (svc, client)
}

#[tokio::test]
async fn drives_a_move_through_the_stream() {
    let (svc, client) = service().await;
    assert_eq!(client.state().await.unwrap().mode, Mode::Idle);
    let mut frames = client.telemetry().await.unwrap();
    let f = client
        .set_target(&TargetRequest {
            roll_deg: 20.0,
            pitch_deg: 45.0,
            split: SplitRequest::default(),
        })
        .await
        .unwrap();
    assert_eq!(f.mode, Mode::Moving);
    let held = tokio::time::timeout(Duration::from_secs(30), async {
        loop {
            let f = frames.next().await.unwrap().unwrap();
            if f.mode == Mode::Holding {
                return f;
            }
        }
    })
    .await
    .unwrap();
    assert!((held.joints.lat_deg - 10.0).abs() < 0.01);
    assert!((held.posture.pitch_deg - 45.0).abs() < 0.01);
    svc.shutdown().await.unwrap();
}

#[tokio::test]
async fn surfaces_service_errors() {
    let (svc, client) = service().await;
    match client.release().await {
        Err(ClientError::Api { status, body }) => {
            assert_eq!(status, 409);
            assert_eq!(body.mode, Some(Mode::Idle));
        }
        other => panic!("{other:?}"),
    }
    let bad = TargetRequest {
        roll_deg: 70.0,
        pitch_deg: 40.0,
        split: SplitRequest::default(),
    };
    assert!(matches!(client.set_target(&bad).await, Err(ClientError::Api { status: 422, .. })));
    assert!(matches!(client.set_subject(Some("nobody")).await, Err(ClientError::Api { status: 400, .. })));
    svc.shutdown().await.unwrap();
}

#[tokio::test]
async fn plans_regions_and_settings() {
    let (svc, client) = service().await;
    let regions = client.regions().await.unwrap();
    assert_eq!(regions.mechanism.roll, Interval::new(0.0, 65.0));
    let plan = client.plan(&["plax", "a4c"], None, PlanMode::Joint).await.unwrap();
    assert_eq!(plan.plans[0].plan.posture.roll_deg, 10.0);
    assert_eq!(plan.plans[0].plan.posture.pitch_deg, 60.0);
    let per_view = client.plan(&["a4c"], None, PlanMode::PerView).await.unwrap();
    assert_eq!(per_view.plans[0].views, ["apical_four_chamber"]);

    let f = client.set_weights(SplitWeights { w_leg: 3.0, w_abd: 1.0 }).await.unwrap();
    assert_eq!(f.weights.w_leg, 3.0);
    let f = client.set_subject(None).await.unwrap();
    assert_eq!(f.weights, SplitWeights::default());
    let f = client.estop().await.unwrap();
    assert_eq!(f.mode, Mode::EStop);
    assert_eq!(client.release().await.unwrap().mode, Mode::Holding);
    svc.shutdown().await.unwrap();
}

#[tokio::test]
async fn unreachable_service_is_transport_error() {
    let client = Client::new("http://127.0.0.1:9");
    assert!(matches!(client.state().await, Err(ClientError::Http(_))));
}
