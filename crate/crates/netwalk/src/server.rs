//! WebSocket transport for [`Session`]: one session per connection at `/ws`.
//!
//! Each connection runs three tasks. The reader parses client messages into
//! a command queue; the session loop applies commands between ticks and
//! drives the tick timer; the writer forwards replies to the socket.
//!
//! Replies travel on two paths. Command replies, `saturated`, `error` and the
//! snapshot that goes with them use a bounded FIFO. Snapshots produced by the
//! play loop go through a latest-value slot, so a slow client skips
//! intermediate ticks instead of stalling the simulation. Every outbound
//! message carries a sequence number and the writer never sends a slot
//! snapshot older than the last message it sent.

use std::net::SocketAddr;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use tokio::net::TcpListener;
use tokio::sync::{mpsc, watch};
use tokio::time::{interval, Interval, MissedTickBehavior};

use crate::session::{ClientMessage, Mode, ServerMessage, Session};

type Sequenced = (u64, ServerMessage);

/// Router exposing the session endpoint at `/ws`.
pub fn router() -> Router {
    Router::new().route("/ws", get(upgrade))
}

/// Serves sessions on `listener` until the task is cancelled.
pub async fn serve(listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router()).await
}

/// Binds `addr` and serves in a background task; returns the bound address.
pub async fn spawn(addr: SocketAddr) -> std::io::Result<(SocketAddr, tokio::task::JoinHandle<std::io::Result<()>>)> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    Ok((local, tokio::spawn(serve(listener))))
}

async fn upgrade(ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(run_connection)
}

fn ticker(ms: u64) -> Interval {
    let mut t = interval(Duration::from_millis(ms));
    t.set_missed_tick_behavior(MissedTickBehavior::Skip);
    t
}

struct Outbox {
    seq: u64,
    control: mpsc::Sender<Sequenced>,
    latest: watch::Sender<Option<Sequenced>>,
}

impl Outbox {
    fn next(&mut self) -> u64 {
        self.seq += 1;
        self.seq
    }

    /// Queues a batch. Snapshots followed by another snapshot in the same
    /// batch, and play-loop snapshots not followed by `saturated`, may be
    /// dropped; everything else is delivered in order.
    async fn send_batch(&mut self, batch: Vec<ServerMessage>, from_timer: bool) -> bool {
        let last_snapshot = batch.iter().rposition(|m| matches!(m, ServerMessage::Snapshot(_)));
        let has_saturated = batch.iter().any(|m| matches!(m, ServerMessage::Saturated { .. }));
        for (i, msg) in batch.into_iter().enumerate() {
            let seq = self.next();
            let droppable = matches!(msg, ServerMessage::Snapshot(_))
                && (Some(i) != last_snapshot || (from_timer && !has_saturated));
            if droppable {
                self.latest.send_replace(Some((seq, msg)));
            } else if self.control.send((seq, msg)).await.is_err() {
                return false;
            }
        }
        true
    }
}

async fn run_connection(socket: WebSocket) {
    let (mut sink, mut stream) = socket.split();
    let (cmd_tx, mut cmd_rx) = mpsc::channel::<Result<ClientMessage, String>>(64);
    let (ctl_tx, mut ctl_rx) = mpsc::channel::<Sequenced>(256);
    let (latest_tx, mut latest_rx) = watch::channel::<Option<Sequenced>>(None);

    let writer = tokio::spawn(async move {
        let mut last_sent = 0u64;
        loop {
            let (seq, msg) = tokio::select! {
                biased;
                m = ctl_rx.recv() => match m {
                    Some(m) => m,
                    None => break,
                },
                changed = latest_rx.changed() => {
                    if changed.is_err() {
                        continue;
                    }
                    match latest_rx.borrow_and_update().clone() {
                        Some((seq, msg)) if seq > last_sent => (seq, msg),
                        _ => continue,
                    }
                }
            };
            last_sent = seq;
            if sink.send(Message::Text(msg.to_json().into())).await.is_err() {
                break;
            }
        }
    });

    let reader = tokio::spawn(async move {
        while let Some(Ok(frame)) = stream.next().await {
            let parsed = match frame {
                Message::Text(text) => ClientMessage::from_json(text.as_str()),
                Message::Binary(_) => Err("binary frames are not supported".to_string()),
                Message::Close(_) => break,
                _ => continue,
            };
            if cmd_tx.send(parsed).await.is_err() {
                break;
            }
        }
    });

    let mut outbox = Outbox { seq: 0, control: ctl_tx, latest: latest_tx };
    let mut session = Session::new();
    let mut timer = ticker(session.ms_per_tick());
    loop {
        let running = session.mode() == Mode::Running;
        let (batch, from_timer) = tokio::select! {
            cmd = cmd_rx.recv() => match cmd {
                None => break,
                Some(Ok(msg)) => {
                    let speed = session.ms_per_tick();
                    let was_running = running;
                    let out = session.handle(msg);
                    if session.ms_per_tick() != speed || (!was_running && session.mode() == Mode::Running) {
                        timer = ticker(session.ms_per_tick());
                        // The first tick of a fresh interval fires at once.
                        timer.reset();
                    }
                    (out, false)
                }
                Some(Err(message)) => (vec![ServerMessage::Error { message }], false),
            },
            _ = timer.tick(), if running => (session.on_timer(), true),
        };
        if !outbox.send_batch(batch, from_timer).await {
            break;
        }
    }
    drop(outbox);
    reader.abort();
    let _ = writer.await;
}
