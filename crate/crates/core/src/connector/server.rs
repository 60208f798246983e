use std::io::{BufReader, BufWriter};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use chrono::{DateTime, Utc};

use super::message::{read_frame, write_frame};
use super::node::{handle_payload, NodeState};
use super::ConnectorError;

/// Source of the service time passed to authorization.
pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

pub fn system_clock() -> Clock {
    Arc::new(Utc::now)
}

pub fn fixed_clock(at: DateTime<Utc>) -> Clock {
    Arc::new(move || at)
}

/// A running connector: one accept thread plus one thread per connection.
pub struct NodeServer {
    addr: SocketAddr,
    state: Arc<NodeState>,
    stop: Arc<AtomicBool>,
    accept: Option<JoinHandle<()>>,
}

impl NodeServer {
    pub fn start(mut state: NodeState, listen: &str, clock: Clock) -> Result<NodeServer, ConnectorError> {
        let listener = TcpListener::bind(listen).map_err(|e| ConnectorError::Io(format!("bind {listen}: {e}")))?;
        let addr = listener.local_addr().map_err(|e| ConnectorError::Io(e.to_string()))?;
        if state.endpoint.is_empty() {
            state.endpoint = format!("tcp://{addr}");
        }
        let state = Arc::new(state);
        let stop = Arc::new(AtomicBool::new(false));
        let accept = {
            let (state, stop) = (Arc::clone(&state), Arc::clone(&stop));
            thread::Builder::new()
                .name(format!("accept-{}", state.identity.id))
                .spawn(move || accept_loop(listener, state, stop, clock))
                .map_err(|e| ConnectorError::Io(e.to_string()))?
        };
        Ok(NodeServer {
            addr,
            state,
            stop,
            accept: Some(accept),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn endpoint(&self) -> String {
        format!("tcp://{}", self.addr)
    }

    pub fn state(&self) -> &Arc<NodeState> {
        &self.state
    }

    /// Stops accepting connections and waits for the accept thread.
    pub fn stop(&mut self) {
        if let Some(handle) = self.accept.take() {
            self.stop.store(true, Ordering::SeqCst);
            // Wake the blocking accept.
            let _ = TcpStream::connect(self.addr);
            let _ = handle.join();
        }
    }

    /// Blocks until the accept thread exits.
    pub fn wait(mut self) {
        if let Some(handle) = self.accept.take() {
            let _ = handle.join();
        }
    }
}

impl Drop for NodeServer {
    fn drop(&mut self) {
        self.stop();
    }
}

fn accept_loop(listener: TcpListener, state: Arc<NodeState>, stop: Arc<AtomicBool>, clock: Clock) {
    for stream in listener.incoming() {
        if stop.load(Ordering::SeqCst) {
            break;
        }
        let Ok(stream) = stream else { continue };
        let (state, clock) = (Arc::clone(&state), Arc::clone(&clock));
        let _ = thread::Builder::new().spawn(move || serve_connection(stream, &state, &clock));
    }
}

fn serve_connection(stream: TcpStream, state: &NodeState, clock: &Clock) {
    let _ = stream.set_nodelay(true);
    let Ok(write_half) = stream.try_clone() else { return };
    let mut reader = BufReader::new(stream);
    let mut writer = BufWriter::new(write_half);
    loop {
        let payload = match read_frame(&mut reader) {
            Ok(Some(p)) => p,
            Ok(None) | Err(_) => return,
        };
        let Some(response) = handle_payload(&payload, state, clock()) else {
            return;
        };
        if write_frame(&mut writer, &response.encode()).is_err() {
            return;
        }
    }
}
