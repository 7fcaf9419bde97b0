use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::Serialize;

use super::graph::{build_graph, GraphMeta, FEATURE_DIM};
use super::protocol::{Hello, Ready, Request, Response, WireGraph, PROTOCOL_VERSION};
use super::ImprovementOperator;
use crate::error::{Error, Result};
use crate::model::{Instance, Schedule};

/// Client of an external neural operator speaking the line protocol.
///
/// One request is in flight at a time; every call to `improve` is a single round trip.
pub struct NeuralOperator {
    writer: Box<dyn Write + Send>,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
    next_id: u64,
    child: Option<Child>,
}

/// Connects to a TCP endpoint such as `127.0.0.1:7000`.
pub fn neural_operator(endpoint: &str, timeout: Duration) -> Result<NeuralOperator> {
    NeuralOperator::connect(endpoint, timeout)
}

fn protocol(msg: impl Into<String>) -> Error {
    Error::Protocol(msg.into())
}

impl NeuralOperator {
    pub fn connect(endpoint: &str, timeout: Duration) -> Result<Self> {
        let addrs: Vec<_> = endpoint
            .to_socket_addrs()
            .map_err(|e| protocol(format!("cannot resolve {endpoint}: {e}")))?
            .collect();
        let mut last = None;
        for addr in addrs {
            match TcpStream::connect_timeout(&addr, timeout) {
                Ok(stream) => {
                    let _ = stream.set_nodelay(true);
                    let reader = stream.try_clone().map_err(|e| protocol(e.to_string()))?;
                    return Self::from_streams(reader, stream, timeout);
                }
                Err(e) => last = Some(e),
            }
        }
        Err(protocol(match last {
            Some(e) => format!("cannot connect to {endpoint}: {e}"),
            None => format!("{endpoint} resolved to no address"),
        }))
    }

    /// Starts `command` and talks to it over its stdin and stdout.
    pub fn spawn(mut command: Command, timeout: Duration) -> Result<Self> {
        let mut child = command
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| protocol(format!("cannot start neural operator: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let mut op = Self::unconnected(stdout, stdin, timeout);
        op.child = Some(child);
        op.handshake()?;
        Ok(op)
    }

    /// Uses an already open byte stream pair and performs the handshake.
    pub fn from_streams<R, W>(reader: R, writer: W, timeout: Duration) -> Result<Self>
    where
        R: Read + Send + 'static,
        W: Write + Send + 'static,
    {
        let mut op = Self::unconnected(reader, writer, timeout);
        op.handshake()?;
        Ok(op)
    }

    fn unconnected<R, W>(reader: R, writer: W, timeout: Duration) -> Self
    where
        R: Read + Send + 'static,
        W: Write + Send + 'static,
    {
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(reader).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        NeuralOperator {
            writer: Box::new(writer),
            lines: rx,
            timeout,
            next_id: 0,
            child: None,
        }
    }

    fn send<T: Serialize>(&mut self, msg: &T) -> Result<()> {
        let mut line = serde_json::to_vec(msg)?;
        line.push(b'\n');
        self.writer
            .write_all(&line)
            .and_then(|_| self.writer.flush())
            .map_err(|e| protocol(format!("write failed: {e}")))
    }

    fn recv(&mut self) -> Result<String> {
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(protocol(format!("read failed: {e}"))),
            Err(RecvTimeoutError::Timeout) => {
                Err(protocol(format!("no reply within {:?}", self.timeout)))
            }
            Err(RecvTimeoutError::Disconnected) => Err(protocol("connection closed")),
        }
    }

    fn handshake(&mut self) -> Result<()> {
        self.send(&Hello::default())?;
        let line = self.recv()?;
        let ready: Ready = serde_json::from_str(&line)
            .map_err(|e| protocol(format!("bad handshake reply {line:?}: {e}")))?;
        if !ready.ready || ready.protocol != PROTOCOL_VERSION {
            return Err(protocol(format!(
                "server not ready for protocol {PROTOCOL_VERSION}: {line}"
            )));
        }
        Ok(())
    }
}

impl ImprovementOperator for NeuralOperator {
    fn improve(&mut self, batch: &[Schedule], instance: &Instance) -> Result<Vec<Schedule>> {
        let meta = GraphMeta {
            employees: instance.num_employees,
            days: instance.num_days,
            feature_dim: FEATURE_DIM,
        };
        let graphs = batch
            .iter()
            .map(|s| build_graph(s, instance).map(WireGraph::from))
            .collect::<Result<Vec<_>>>()?;
        let id = self.next_id;
        self.next_id += 1;
        self.send(&Request { id, meta, graphs })?;
        loop {
            let line = self.recv()?;
            let resp: Response = serde_json::from_str(&line)
                .map_err(|e| protocol(format!("malformed response: {e}")))?;
            // replies to requests that already timed out are dropped
            if resp.id < id {
                continue;
            }
            if resp.id != id {
                return Err(protocol(format!(
                    "response id {} for request {id}",
                    resp.id
                )));
            }
            return resp.into_schedules(batch.len(), meta);
        }
    }
}

impl Drop for NeuralOperator {
    fn drop(&mut self) {
        if let Some(child) = &mut self.child {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}
