//! HTTP/JSON control service for the simulated posture-control bench.
//!
//! A single control-loop task owns the session and advances it at the configured
//! tick rate. Handlers send commands through a bounded queue and read snapshots
//! from a watch channel, so readers never block the loop.

mod api;
mod control_loop;
mod error;

use std::net::SocketAddr;

use tokio::net::{TcpListener, ToSocketAddrs};
use tokio::sync::watch;
use tokio::task::JoinHandle;

pub use api::{router, AppState};
pub use control_loop::{spawn_control_loop, ControlHandle, ServiceOptions};
pub use error::ServiceError;

/// A running service bound to a TCP port.
pub struct Service {
    addr: SocketAddr,
    control: ControlHandle,
    shutdown: watch::Sender<bool>,
    server: JoinHandle<std::io::Result<()>>,
    control_task: JoinHandle<()>,
}

impl Service {
    pub async fn start(addr: impl ToSocketAddrs, options: ServiceOptions) -> Result<Service, ServiceError> {
        let listener = TcpListener::bind(addr).await?;
        Self::with_listener(listener, options)
    }

    pub fn with_listener(listener: TcpListener, options: ServiceOptions) -> Result<Service, ServiceError> {
        let addr = listener.local_addr()?;
        let (shutdown, shutdown_rx) = watch::channel(false);
        let (control, control_task) = spawn_control_loop(options, shutdown_rx.clone())?;
        let app = router(AppState {
            control: control.clone(),
            shutdown: shutdown_rx.clone(),
        });
        let mut stop = shutdown_rx;
        let server = tokio::spawn(async move {
            axum::serve(listener, app)
                .with_graceful_shutdown(async move {
                    let _ = stop.wait_for(|s| *s).await;
                })
                .await
        });
        tracing::info!("posture service listening on http://{addr}");
        Ok(Service {
            addr,
            control,
            shutdown,
            server,
            control_task,
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn control(&self) -> &ControlHandle {
        &self.control
    }

    pub async fn shutdown(self) -> Result<(), ServiceError> {
        let _ = self.shutdown.send(true);
        self.wait().await
    }

    /// Waits for the server and control loop to stop.
    pub async fn wait(self) -> Result<(), ServiceError> {
        let served = self.server.await.map_err(|_| ServiceError::Unavailable)?;
        drop(self.control);
        self.control_task.await.map_err(|_| ServiceError::Unavailable)?;
        served?;
        Ok(())
    }

    /// Serves until Ctrl-C, then shuts down gracefully.
    pub async fn run_until_ctrl_c(self) -> Result<(), ServiceError> {
        tokio::signal::ctrl_c().await?;
        tracing::info!("shutting down");
        self.shutdown().await
    }
}
