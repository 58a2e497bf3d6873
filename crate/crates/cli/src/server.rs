//! Live session service over WebSocket.
//!
//! One thread owns the [`Session`]; an accept thread and one thread per
//! connection feed it through an ordered event queue. Inbound messages are
//! applied between ticks in arrival order, and outbound frames are encoded
//! snapshots, so network I/O never touches simulation state.

use std::collections::{BTreeMap, VecDeque};
use std::io;
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use crossbeam_channel::{unbounded, Receiver, RecvTimeoutError, Sender, TryRecvError};
use log::{info, warn};
use sharenav_core::config::ConfigError;
use sharenav_core::scenario::{Session, Snapshot, WorldModel};
use sharenav_core::{ControlMode, Joystick, SimConfig};
use thiserror::Error;
use tungstenite::{Message, WebSocket};

use crate::wire::{CommandKind, Inbound, Outbound, Role, StateFrame};

const READ_POLL: Duration = Duration::from_millis(5);
const IDLE_WAIT: Duration = Duration::from_millis(50);

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub world: Arc<WorldModel>,
    pub mode: ControlMode,
    pub sim: SimConfig,
    /// State broadcast rate (Hz).
    pub rate: f64,
    /// Simulated seconds per wall-clock second; 0 runs as fast as possible.
    pub speed: f64,
    /// Start ticking as soon as the server is up (and after every reset).
    pub autostart: bool,
    /// Where to write the run record when a run ends.
    pub record_out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot listen on {addr}: {source}")]
    Bind { addr: String, source: io::Error },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("broadcast rate {rate} Hz must be positive and at most the tick rate {max} Hz")]
    Rate { rate: f64, max: f64 },
    #[error("speed must be finite and non-negative, got {0}")]
    Speed(f64),
}

/// Ticks between state broadcasts for `rate` Hz.
pub fn broadcast_period(rate: f64, dt: f64) -> u64 {
    ((1.0 / (rate * dt)).round() as u64).max(1)
}

enum Event {
    Connected { id: u64, tx: Sender<String> },
    Message { id: u64, text: String },
    Disconnected { id: u64 },
}

/// A running server. Dropping it without [`Server::shutdown`] leaves the
/// threads running until the process exits.
pub struct Server {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    accept: Option<JoinHandle<()>>,
    sim: Option<JoinHandle<()>>,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs + std::fmt::Display, opts: ServeOptions) -> Result<Server, ServeError> {
        opts.sim.validate()?;
        let max = 1.0 / opts.sim.dt;
        if !(opts.rate > 0.0 && opts.rate <= max + 1e-9) {
            return Err(ServeError::Rate { rate: opts.rate, max });
        }
        if !(opts.speed >= 0.0 && opts.speed.is_finite()) {
            return Err(ServeError::Speed(opts.speed));
        }
        let shown = addr.to_string();
        let listener = TcpListener::bind(addr).map_err(|source| ServeError::Bind { addr: shown.clone(), source })?;
        let local = listener.local_addr().map_err(|source| ServeError::Bind { addr: shown, source })?;

        let stop = Arc::new(AtomicBool::new(false));
        let (events_tx, events_rx) = unbounded();
        let sim = SimLoop::new(opts, events_rx, stop.clone())?;
        let sim = std::thread::Builder::new()
            .name("sharenav-sim".into())
            .spawn(move || sim.run())
            .expect("spawn sim thread");
        let accept_stop = stop.clone();
        let accept = std::thread::Builder::new()
            .name("sharenav-accept".into())
            .spawn(move || accept_loop(listener, events_tx, accept_stop))
            .expect("spawn accept thread");
        Ok(Server {
            addr: local,
            stop,
            accept: Some(accept),
            sim: Some(sim),
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Blocks until the server stops.
    pub fn wait(mut self) {
        if let Some(h) = self.sim.take() {
            let _ = h.join();
        }
        self.shutdown_inner();
    }

    pub fn shutdown(mut self) {
        self.shutdown_inner();
    }

    fn shutdown_inner(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the blocking accept.
        let _ = TcpStream::connect(self.addr);
        for h in [self.accept.take(), self.sim.take()].into_iter().flatten() {
            let _ = h.join();
        }
    }
}

fn accept_loop(listener: TcpListener, events: Sender<Event>, stop: Arc<AtomicBool>) {
    let mut next_id = 0u64;
    for stream in listener.incoming() {
        if stop.load(Ordering::SeqCst) {
            break;
        }
        let stream = match stream {
            Ok(s) => s,
            Err(e) => {
                warn!("accept failed: {e}");
                continue;
            }
        };
        next_id += 1;
        let id = next_id;
        let events = events.clone();
        let stop = stop.clone();
        let spawned = std::thread::Builder::new()
            .name(format!("sharenav-conn-{id}"))
            .spawn(move || connection(id, stream, events, stop));
        if let Err(e) = spawned {
            warn!("cannot spawn connection thread: {e}");
        }
    }
}

fn is_timeout(e: &tungstenite::Error) -> bool {
    matches!(e, tungstenite::Error::Io(io) if matches!(io.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut))
}

fn connection(id: u64, stream: TcpStream, events: Sender<Event>, stop: Arc<AtomicBool>) {
    let _ = stream.set_nodelay(true);
    let mut ws: WebSocket<TcpStream> = match tungstenite::accept(stream) {
        Ok(ws) => ws,
        Err(e) => {
            warn!("handshake with client {id} failed: {e}");
            return;
        }
    };
    if ws.get_ref().set_read_timeout(Some(READ_POLL)).is_err() {
        return;
    }
    let (tx, rx): (Sender<String>, Receiver<String>) = unbounded();
    if events.send(Event::Connected { id, tx }).is_err() {
        return;
    }
    info!("client {id} connected");
    'conn: loop {
        if stop.load(Ordering::SeqCst) {
            let _ = ws.close(None);
            let _ = ws.flush();
            break;
        }
        let mut wrote = false;
        loop {
            match rx.try_recv() {
                Ok(text) => {
                    if ws.write(Message::Text(text)).is_err() {
                        break 'conn;
                    }
                    wrote = true;
                }
                Err(TryRecvError::Empty) => break,
                Err(TryRecvError::Disconnected) => break 'conn,
            }
        }
        if wrote && ws.flush().is_err() {
            break;
        }
        match ws.read() {
            Ok(Message::Text(text)) => {
                if events.send(Event::Message { id, text }).is_err() {
                    break;
                }
            }
            Ok(Message::Close(_)) => {
                let _ = ws.flush();
                break;
            }
            Ok(_) => {}
            Err(e) if is_timeout(&e) => {}
            Err(_) => break,
        }
    }
    info!("client {id} disconnected");
    let _ = events.send(Event::Disconnected { id });
}

struct SimLoop {
    opts: ServeOptions,
    mode: ControlMode,
    session: Session,
    events: Receiver<Event>,
    stop: Arc<AtomicBool>,
    clients: BTreeMap<u64, Sender<String>>,
    driver: Option<u64>,
    started: bool,
    /// Wall time and tick at which pacing (re)started.
    pace_origin: Option<(Instant, u64)>,
    last_stamp: f64,
    seq: u64,
    every: u64,
    held: VecDeque<Snapshot>,
    reported: bool,
}

impl SimLoop {
    fn new(opts: ServeOptions, events: Receiver<Event>, stop: Arc<AtomicBool>) -> Result<Self, ConfigError> {
        let session = Session::new(opts.world.clone(), opts.mode, opts.sim.clone())?;
        Ok(Self {
            every: broadcast_period(opts.rate, opts.sim.dt),
            mode: opts.mode,
            started: false,
            session,
            events,
            stop,
            clients: BTreeMap::new(),
            driver: None,
            pace_origin: None,
            last_stamp: f64::NEG_INFINITY,
            seq: 0,
            held: VecDeque::new(),
            reported: false,
            opts,
        })
    }

    fn run(mut self) {
        if self.opts.autostart {
            self.start();
        }
        loop {
            if self.stop.load(Ordering::SeqCst) {
                break;
            }
            let running = self.started && !self.session.is_done();
            let wait = match (running, self.next_deadline()) {
                (true, Some(deadline)) => deadline.saturating_duration_since(Instant::now()),
                (true, None) => Duration::ZERO,
                (false, _) => IDLE_WAIT,
            };
            match self.events.recv_timeout(wait) {
                Ok(ev) => self.handle(ev),
                Err(RecvTimeoutError::Timeout) => {}
                Err(RecvTimeoutError::Disconnected) => break,
            }
            while let Ok(ev) = self.events.try_recv() {
                self.handle(ev);
            }
            if self.started && !self.session.is_done() {
                self.advance();
            }
        }
    }

    /// Wall time at which the next tick is due; `None` when unpaced.
    fn next_deadline(&self) -> Option<Instant> {
        let (t0, tick0) = self.pace_origin?;
        let stepped = self.session.tick() - tick0;
        let secs = stepped as f64 * self.opts.sim.dt / self.opts.speed;
        Some(t0 + Duration::from_secs_f64(secs))
    }

    fn advance(&mut self) {
        match self.next_deadline() {
            None => self.step(),
            Some(_) => {
                while !self.session.is_done() && self.next_deadline().is_some_and(|d| d <= Instant::now()) {
                    self.step();
                }
            }
        }
    }

    fn start(&mut self) {
        if self.started {
            return;
        }
        self.started = true;
        self.pace_origin = (self.opts.speed > 0.0).then(|| (Instant::now(), self.session.tick()));
    }

    fn reset(&mut self, mode: ControlMode) {
        match Session::new(self.opts.world.clone(), mode, self.opts.sim.clone()) {
            Ok(s) => self.session = s,
            Err(e) => {
                self.broadcast(&Outbound::error(format!("reset failed: {e}")));
                return;
            }
        }
        self.mode = mode;
        self.started = false;
        self.pace_origin = None;
        self.last_stamp = f64::NEG_INFINITY;
        self.held.clear();
        self.reported = false;
        let ids: Vec<u64> = self.clients.keys().copied().collect();
        for id in ids {
            self.send(id, &self.hello(id));
        }
        if self.opts.autostart {
            self.start();
        }
    }

    fn step(&mut self) {
        if self.session.step().is_none() {
            return;
        }
        let snap = self.session.snapshot().expect("a row was just logged");
        let tick = snap.row.tick;
        let done = snap.outcome.is_some();
        self.held.push_back(snap);
        let delay = self.opts.sim.feedback_delay_ticks() as usize;
        while self.held.len() > delay + 1 {
            self.held.pop_front();
        }
        let warm = self.held.len() > delay;
        if (warm && tick.is_multiple_of(self.every)) || done {
            let shown = if done { self.held.back() } else { self.held.front() };
            if let Some(snap) = shown {
                self.seq += 1;
                let frame = StateFrame::from_snapshot(self.seq, self.mode, snap);
                self.broadcast(&Outbound::State(Box::new(frame)));
            }
        }
        if done && !self.reported {
            self.reported = true;
            self.finish();
        }
    }

    fn finish(&mut self) {
        let record = self.session.record();
        if let Some(path) = &self.opts.record_out {
            if let Err(e) = std::fs::write(path, record.to_jsonl()) {
                warn!("cannot write run record to {}: {e}", path.display());
            }
        }
        self.broadcast(&Outbound::Metrics { summary: record.summary });
    }

    fn hello(&self, id: u64) -> Outbound {
        Outbound::Hello {
            role: if self.driver == Some(id) { Role::Driver } else { Role::Observer },
            mode: self.mode,
            dt: self.opts.sim.dt,
            latency: self.opts.sim.latency,
            rate: self.opts.rate,
            started: self.started,
            world: Box::new((*self.opts.world).clone()),
        }
    }

    fn send(&self, id: u64, msg: &Outbound) {
        if let Some(tx) = self.clients.get(&id) {
            let _ = tx.send(msg.encode());
        }
    }

    fn broadcast(&self, msg: &Outbound) {
        let text = msg.encode();
        for tx in self.clients.values() {
            let _ = tx.send(text.clone());
        }
    }

    fn handle(&mut self, ev: Event) {
        match ev {
            Event::Connected { id, tx } => {
                self.clients.insert(id, tx);
                if self.driver.is_none() {
                    self.driver = Some(id);
                }
                self.send(id, &self.hello(id));
            }
            Event::Disconnected { id } => {
                self.clients.remove(&id);
                if self.driver == Some(id) {
                    self.driver = None;
                    // Lever to center, trigger up; it reaches the robot through the delay line.
                    self.session.enqueue_input(None, Joystick::NEUTRAL);
                }
            }
            Event::Message { id, text } => match Inbound::decode(&text) {
                Ok(msg) => self.apply(id, msg),
                Err(e) => self.send(id, &Outbound::error(e.to_string())),
            },
        }
    }

    fn apply(&mut self, id: u64, msg: Inbound) {
        let is_driver = self.driver == Some(id);
        match msg {
            Inbound::Command {
                command: CommandKind::Costmap,
                ..
            } => {
                let cm = self.session.current_costmap();
                self.send(id, &Outbound::costmap(self.session.tick(), &cm));
            }
            _ if !is_driver => self.send(id, &Outbound::error("observers are read-only")),
            Inbound::Input {
                t,
                jx,
                jy,
                trigger,
                mode_button,
            } => {
                if t.is_some_and(|t| !t.is_finite()) || !jx.is_finite() || !jy.is_finite() {
                    self.send(id, &Outbound::error("input values must be finite"));
                    return;
                }
                let j = Joystick {
                    jx,
                    jy,
                    trigger,
                    mode_button,
                }
                .sanitized();
                let stamp = t.map(|t| {
                    self.last_stamp = self.last_stamp.max(t);
                    self.last_stamp
                });
                self.session.enqueue_input(stamp, j);
            }
            Inbound::Command { command, mode } => match command {
                CommandKind::Start if self.session.is_done() => {
                    self.send(id, &Outbound::error("run finished; send reset first"))
                }
                CommandKind::Start => self.start(),
                CommandKind::Reset => self.reset(mode.unwrap_or(self.mode)),
                CommandKind::SetMode => match mode {
                    Some(m) => self.reset(m),
                    None => self.send(id, &Outbound::error("set_mode needs a mode")),
                },
                CommandKind::Costmap => unreachable!("handled above"),
            },
        }
    }
}
