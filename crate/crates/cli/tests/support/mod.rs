#![allow(dead_code)]

use std::net::{SocketAddr, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use sharenav_cli::server::{ServeOptions, Server};
use sharenav_cli::wire::{CommandKind, Inbound, Outbound, StateFrame};
use sharenav_core::scenario::{load_world, InputTrace, RunRecord, WorldModel};
use sharenav_core::{ControlMode, SimConfig};
use tungstenite::stream::MaybeTlsStream;
use tungstenite::{Message, WebSocket};

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(rel)
}

pub fn world(name: &str) -> Arc<WorldModel> {
    let text = std::fs::read_to_string(fixture(&format!("worlds/{name}.world"))).unwrap();
    Arc::new(load_world(&text).unwrap())
}

pub fn trace(name: &str) -> InputTrace {
    InputTrace::from_jsonl(&std::fs::read_to_string(fixture(&format!("traces/{name}.trace"))).unwrap()).unwrap()
}

pub fn options(world: Arc<WorldModel>, mode: ControlMode) -> ServeOptions {
    ServeOptions {
        world,
        mode,
        sim: SimConfig::default(),
        rate: 20.0,
        speed: 0.0,
        autostart: false,
        record_out: None,
    }
}

pub fn serve(opts: ServeOptions) -> Server {
    Server::bind("127.0.0.1:0", opts).expect("server binds")
}

pub struct Client {
    ws: WebSocket<MaybeTlsStream<TcpStream>>,
}

impl Client {
    pub fn connect(addr: SocketAddr) -> Client {
        let (ws, _) = tungstenite::connect(format!("ws://{addr}")).expect("websocket connects");
        if let MaybeTlsStream::Plain(s) = ws.get_ref() {
            s.set_read_timeout(Some(Duration::from_millis(20))).unwrap();
        }
        Client { ws }
    }

    pub fn send(&mut self, msg: &Inbound) {
        self.send_text(msg.encode());
    }

    pub fn send_text(&mut self, text: String) {
        self.ws.send(Message::Text(text)).expect("send");
    }

    pub fn command(&mut self, kind: CommandKind) {
        self.send(&Inbound::command(kind));
    }

    /// Next outbound frame, or `None` if nothing arrives within `timeout`.
    pub fn recv(&mut self, timeout: Duration) -> Option<Outbound> {
        let deadline = Instant::now() + timeout;
        loop {
            match self.ws.read() {
                Ok(Message::Text(text)) => return Some(Outbound::decode(&text).expect("valid frame")),
                Ok(Message::Close(_)) => return None,
                Ok(_) => {}
                Err(tungstenite::Error::Io(e))
                    if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {}
                Err(e) => panic!("read failed: {e}"),
            }
            if Instant::now() >= deadline {
                return None;
            }
        }
    }

    /// Reads frames until `pick` returns `Some`, panicking after `timeout`.
    pub fn until<T>(&mut self, timeout: Duration, mut pick: impl FnMut(Outbound) -> Option<T>) -> T {
        let deadline = Instant::now() + timeout;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            if left.is_zero() {
                panic!("timed out waiting for a frame");
            }
            if let Some(frame) = self.recv(left) {
                if let Some(v) = pick(frame) {
                    return v;
                }
            }
        }
    }

    pub fn state(&mut self, timeout: Duration) -> StateFrame {
        self.until(timeout, |f| match f {
            Outbound::State(s) => Some(*s),
            _ => None,
        })
    }

    pub fn close(mut self) {
        let _ = self.ws.close(None);
        let _ = self.ws.flush();
    }
}

/// Runs `trace` through a live server, unpaced, and returns the record it writes.
pub fn served_run(world: Arc<WorldModel>, mode: ControlMode, trace: &InputTrace, sim: &SimConfig) -> RunRecord {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("served.jsonl");
    let mut opts = options(world, mode);
    opts.sim = sim.clone();
    opts.record_out = Some(out.clone());
    let server = serve(opts);
    let mut client = Client::connect(server.local_addr());
    client.until(Duration::from_secs(5), |f| matches!(f, Outbound::Hello { .. }).then_some(()));
    for e in trace.events() {
        client.send(&Inbound::input(Some(e.t), e.joystick()));
    }
    client.command(CommandKind::Start);
    client.until(Duration::from_secs(120), |f| matches!(f, Outbound::Metrics { .. }).then_some(()));
    client.close();
    server.shutdown();
    RunRecord::from_jsonl(&std::fs::read_to_string(&out).unwrap()).unwrap()
}
