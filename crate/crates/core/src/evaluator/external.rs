//! Client side of the `chansel-eval` protocol: newline-delimited JSON records
//! over a child process's stdin/stdout.
//!
//! ```text
//! child → {"protocol":"chansel-eval","version":1,"name":"..."}
//! host  → {"id":7,"op":"evaluate","dataset":"/data/a.ets","channels":[0,3],"seed":1}
//! child → {"id":7,"ok":true,"accuracy":0.84}   or   {"id":7,"ok":false,"error":"..."}
//! host  → {"op":"shutdown"}
//! ```
//!
//! A session is torn down after any protocol violation; an `ok:false` reply is
//! an ordinary evaluator error and leaves the session usable.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::SubsetEvaluator;
use crate::error::{Error, Result};
use crate::model::{ChannelSubset, EvalResult};

pub const PROTOCOL: &str = "chansel-eval";
pub const PROTOCOL_VERSION: u64 = 1;

const SHUTDOWN_GRACE: Duration = Duration::from_secs(2);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hello {
    pub protocol: String,
    pub version: u64,
    pub name: String,
}

#[derive(Debug, Serialize)]
struct Request<'a> {
    id: u64,
    op: &'static str,
    dataset: &'a str,
    channels: &'a [usize],
    seed: u64,
}

/// One running evaluator process; serves one request at a time.
pub struct ExternalSession {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    hello: Hello,
    next_id: u64,
    broken: bool,
}

impl ExternalSession {
    /// Starts `program` and waits up to `timeout` for its hello record.
    pub fn spawn(program: &str, args: &[String], timeout: Duration) -> Result<Self> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let mut session = ExternalSession {
            child,
            stdin,
            lines: rx,
            hello: Hello {
                protocol: String::new(),
                version: 0,
                name: String::new(),
            },
            next_id: 1,
            broken: false,
        };
        match session.handshake(timeout) {
            Ok(hello) => {
                session.hello = hello;
                Ok(session)
            }
            Err(e) => {
                session.broken = true;
                Err(e)
            }
        }
    }

    fn handshake(&mut self, timeout: Duration) -> Result<Hello> {
        let line = self.recv(timeout)?;
        let hello: Hello = serde_json::from_str(&line).map_err(|_| Error::ProtocolMalformed(line.clone()))?;
        if hello.protocol != PROTOCOL || hello.version != PROTOCOL_VERSION {
            return Err(Error::ProtocolMalformed(line));
        }
        Ok(hello)
    }

    pub fn hello(&self) -> &Hello {
        &self.hello
    }

    pub fn is_broken(&self) -> bool {
        self.broken
    }

    fn recv(&mut self, timeout: Duration) -> Result<String> {
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(Error::Io(e)),
            Err(RecvTimeoutError::Timeout) => Err(Error::ProtocolTimeout),
            Err(RecvTimeoutError::Disconnected) => Err(Error::ProcessExited(self.reap())),
        }
    }

    fn reap(&mut self) -> Option<i32> {
        let deadline = Instant::now() + SHUTDOWN_GRACE;
        loop {
            match self.child.try_wait() {
                Ok(Some(status)) => return status.code(),
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(5)),
                _ => {
                    let _ = self.child.kill();
                    return self.child.wait().ok().and_then(|s| s.code());
                }
            }
        }
    }

    fn send(&mut self, line: &str) -> Result<()> {
        let Some(stdin) = self.stdin.as_mut() else {
            return Err(Error::ProcessExited(None));
        };
        let written = stdin
            .write_all(line.as_bytes())
            .and_then(|_| stdin.write_all(b"\n"))
            .and_then(|_| stdin.flush());
        if written.is_err() {
            return Err(Error::ProcessExited(self.reap()));
        }
        Ok(())
    }

    /// Sends one evaluate request and returns the validated accuracy.
    pub fn evaluate(&mut self, dataset: &str, channels: &[usize], seed: u64, timeout: Duration) -> Result<f64> {
        if self.broken {
            return Err(Error::ProcessExited(None));
        }
        let result = self.exchange(dataset, channels, seed, timeout);
        if let Err(e) = &result {
            if !matches!(e, Error::EvaluatorError(_)) {
                self.broken = true;
            }
        }
        result
    }

    fn exchange(&mut self, dataset: &str, channels: &[usize], seed: u64, timeout: Duration) -> Result<f64> {
        let id = self.next_id;
        self.next_id += 1;
        let request = Request {
            id,
            op: "evaluate",
            dataset,
            channels,
            seed,
        };
        self.send(&serde_json::to_string(&request).expect("request serializes"))?;
        let line = self.recv(timeout)?;
        parse_reply(&line, id)
    }

    /// Asks the child to exit, then reaps it (killing it after a grace period).
    pub fn shutdown(mut self) -> Option<i32> {
        self.close()
    }

    fn close(&mut self) -> Option<i32> {
        if self.stdin.is_some() {
            let _ = self.send(r#"{"op":"shutdown"}"#);
        }
        self.stdin = None;
        if self.broken {
            let _ = self.child.kill();
        }
        self.reap()
    }
}

impl Drop for ExternalSession {
    fn drop(&mut self) {
        if let Ok(None) = self.child.try_wait() {
            self.close();
        }
    }
}

/// Checks one reply record against the request id.
pub fn parse_reply(line: &str, id: u64) -> Result<f64> {
    let malformed = || Error::ProtocolMalformed(line.to_string());
    let value: Value = serde_json::from_str(line).map_err(|_| malformed())?;
    let obj = value.as_object().ok_or_else(malformed)?;
    if obj.get("id").and_then(Value::as_u64) != Some(id) {
        return Err(malformed());
    }
    match obj.get("ok").and_then(Value::as_bool) {
        Some(true) => {
            let accuracy = obj.get("accuracy").and_then(Value::as_f64).ok_or_else(malformed)?;
            if (0.0..=1.0).contains(&accuracy) {
                Ok(accuracy)
            } else {
                Err(Error::AccuracyOutOfRange(accuracy))
            }
        }
        Some(false) => {
            let message = obj.get("error").and_then(Value::as_str).unwrap_or("unspecified error");
            Err(Error::EvaluatorError(message.to_string()))
        }
        None => Err(malformed()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalConfig {
    /// Program followed by its arguments.
    pub command: Vec<String>,
    /// ETS file the child reads.
    pub dataset: PathBuf,
    pub n_channels: usize,
    pub timeout: Duration,
    pub pool_size: usize,
}

struct Pool {
    idle: Vec<ExternalSession>,
    live: usize,
}

/// A pool of up to `pool_size` sessions, started lazily.
pub struct ExternalEvaluator {
    cfg: ExternalConfig,
    dataset: String,
    id: String,
    pool: Mutex<Pool>,
    available: Condvar,
}

impl ExternalEvaluator {
    /// Starts the first session to validate the command and learn its name.
    pub fn new(cfg: ExternalConfig) -> Result<Self> {
        if cfg.command.is_empty() {
            return Err(Error::InvalidConfig("external evaluator command is empty".into()));
        }
        if cfg.pool_size == 0 {
            return Err(Error::InvalidConfig("external pool size is zero".into()));
        }
        let dataset = absolute(&cfg.dataset)?.to_string_lossy().into_owned();
        let first = Self::start(&cfg)?;
        let id = format!("external/{}", first.hello().name);
        Ok(ExternalEvaluator {
            dataset,
            id,
            pool: Mutex::new(Pool {
                idle: vec![first],
                live: 1,
            }),
            available: Condvar::new(),
            cfg,
        })
    }

    fn start(cfg: &ExternalConfig) -> Result<ExternalSession> {
        ExternalSession::spawn(&cfg.command[0], &cfg.command[1..], cfg.timeout)
    }

    fn acquire(&self) -> Result<ExternalSession> {
        let mut pool = self.pool.lock().unwrap();
        loop {
            if let Some(s) = pool.idle.pop() {
                return Ok(s);
            }
            if pool.live < self.cfg.pool_size {
                pool.live += 1;
                drop(pool);
                return Self::start(&self.cfg).inspect_err(|_| self.retire());
            }
            pool = self.available.wait(pool).unwrap();
        }
    }

    fn retire(&self) {
        self.pool.lock().unwrap().live -= 1;
        self.available.notify_one();
    }

    fn release(&self, session: ExternalSession) {
        if session.is_broken() {
            drop(session);
            self.retire();
        } else {
            self.pool.lock().unwrap().idle.push(session);
            self.available.notify_one();
        }
    }

    /// Sessions currently running.
    pub fn live_sessions(&self) -> usize {
        self.pool.lock().unwrap().live
    }
}

impl SubsetEvaluator for ExternalEvaluator {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn evaluate(&self, subset: &ChannelSubset, seed: u64) -> Result<EvalResult> {
        subset.check_bounds(self.cfg.n_channels)?;
        let started = Instant::now();
        let mut session = self.acquire()?;
        let accuracy = session.evaluate(&self.dataset, subset.indices(), seed, self.cfg.timeout);
        self.release(session);
        Ok(EvalResult {
            subset: subset.clone(),
            accuracy: accuracy?,
            per_fold: None,
            evaluator_id: self.id.clone(),
            seed,
            wall_time_ms: started.elapsed().as_millis() as u64,
        })
    }
}

fn absolute(path: &Path) -> Result<PathBuf> {
    Ok(std::path::absolute(path)?)
}
