use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use posture_core::control::{Command, Frame, LogWriter, Session};
use posture_core::BenchConfig;
use tokio::sync::{mpsc, oneshot, watch};
use tokio::task::JoinHandle;
use tokio::time::MissedTickBehavior;

use crate::ServiceError;

const QUEUE_DEPTH: usize = 64;
const FLUSH_EVERY_TICKS: u64 = 100;

#[derive(Debug, Clone)]
pub struct ServiceOptions {
    pub config: BenchConfig,
    /// Append-only JSONL session log.
    pub log_path: Option<PathBuf>,
    /// Simulated ticks per real tick period. 1 runs in real time.
    pub speedup: u32,
}

impl Default for ServiceOptions {
    fn default() -> Self {
        ServiceOptions {
            config: BenchConfig::default(),
            log_path: None,
            speedup: 1,
        }
    }
}

struct Request {
    command: Command,
    reply: oneshot::Sender<posture_core::Result<Frame>>,
}

/// Cloneable handle to the control loop: a command queue plus the latest snapshot.
#[derive(Clone)]
pub struct ControlHandle {
    tx: mpsc::Sender<Request>,
    state: watch::Receiver<Frame>,
    config: Arc<BenchConfig>,
}

impl ControlHandle {
    pub async fn command(&self, command: Command) -> Result<Frame, ServiceError> {
        let (reply, rx) = oneshot::channel();
        self.tx
            .send(Request { command, reply })
            .await
            .map_err(|_| ServiceError::Unavailable)?;
        Ok(rx.await.map_err(|_| ServiceError::Unavailable)??)
    }

    pub fn snapshot(&self) -> Frame {
        self.state.borrow().clone()
    }

    pub fn subscribe(&self) -> watch::Receiver<Frame> {
        self.state.clone()
    }

    pub fn config(&self) -> &BenchConfig {
        &self.config
    }
}

struct Logger {
    writer: Option<LogWriter>,
    pending: u64,
}

impl Logger {
    fn drain(&mut self, session: &mut Session) {
        let entries = session.take_log();
        let Some(w) = &mut self.writer else { return };
        let res = w.append(&entries).and_then(|_| {
            self.pending += 1;
            if self.pending >= FLUSH_EVERY_TICKS {
                self.pending = 0;
                w.flush()
            } else {
                Ok(())
            }
        });
        if let Err(e) = res {
            tracing::error!("session log disabled after write failure: {e}");
            self.writer = None;
        }
    }

    fn finish(&mut self) {
        if let Some(w) = &mut self.writer {
            if let Err(e) = w.flush() {
                tracing::error!("flushing session log: {e}");
            }
        }
    }
}

/// Starts the control loop task. It owns the only [`Session`] and stops when
/// `shutdown` flips to true or every handle is dropped.
pub fn spawn_control_loop(
    options: ServiceOptions,
    mut shutdown: watch::Receiver<bool>,
) -> Result<(ControlHandle, JoinHandle<()>), ServiceError> {
    if options.speedup == 0 {
        return Err(posture_core::Error::Config("speedup must be >= 1".into()).into());
    }
    let config = Arc::new(options.config);
    let mut session = match &options.log_path {
        Some(_) => Session::recording((*config).clone())?,
        None => Session::new((*config).clone())?,
    };
    let writer = options.log_path.as_ref().map(LogWriter::create).transpose()?;
    let mut logger = Logger { writer, pending: 0 };
    logger.drain(&mut session);

    let (tx, mut rx) = mpsc::channel::<Request>(QUEUE_DEPTH);
    let (state_tx, state_rx) = watch::channel(session.snapshot());
    let dt = config.control.tick_period_s();
    let speedup = options.speedup;

    let task = tokio::spawn(async move {
        let mut interval = tokio::time::interval(Duration::from_secs_f64(dt));
        interval.set_missed_tick_behavior(MissedTickBehavior::Delay);
        loop {
            tokio::select! {
                biased;
                _ = shutdown.wait_for(|stop| *stop) => break,
                req = rx.recv() => {
                    let Some(Request { command, reply }) = req else { break };
                    let res = session.command(command);
                    if let Ok(frame) = &res {
                        state_tx.send_replace(frame.clone());
                    }
                    logger.drain(&mut session);
                    let _ = reply.send(res);
                }
                _ = interval.tick() => {
                    let mut last = None;
                    for _ in 0..speedup {
                        match session.tick(dt) {
                            Ok(f) => last = Some(f),
                            Err(e) => tracing::error!("tick failed: {e}"),
                        }
                    }
                    if let Some(f) = last {
                        state_tx.send_replace(f);
                    }
                    logger.drain(&mut session);
                }
            }
        }
        logger.finish();
        tracing::debug!("control loop stopped at t = {}", session.clock());
    });

    Ok((
        ControlHandle {
            tx,
            state: state_rx,
            config,
        },
        task,
    ))
}
