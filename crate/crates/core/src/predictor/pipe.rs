//! External models over a line-oriented stdin/stdout protocol.
//!
//! For each batch the parent writes a CSV header, `k` data rows and one
//! blank line to the child's stdin. The child answers with exactly `k`
//! lines on stdout, each holding one decimal number. The child is started
//! lazily, kept alive across batches and killed on any protocol failure.

use std::io::{BufRead, BufReader, Read, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use super::{check_rows, Concurrency, Predictor};
use crate::error::{Error, Result};
use crate::tabular::{Matrix, Schema};

const STDERR_TAIL: usize = 4096;

pub struct PipePredictor {
    command: String,
    features: Schema,
    batch_size: usize,
    timeout: Duration,
    child: Mutex<Option<ChildProcess>>,
}

impl std::fmt::Debug for PipePredictor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PipePredictor")
            .field("command", &self.command)
            .field("batch_size", &self.batch_size)
            .field("timeout", &self.timeout)
            .finish_non_exhaustive()
    }
}

struct ChildProcess {
    child: Child,
    input: Option<Sender<Vec<u8>>>,
    lines: Receiver<std::io::Result<String>>,
    stderr: Arc<Mutex<Vec<u8>>>,
}

impl ChildProcess {
    fn spawn(command: &str) -> Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Predict(format!("cannot start `{command}`: {e}")))?;

        let mut stdin = child.stdin.take().expect("piped stdin");
        let (input, batches) = mpsc::channel::<Vec<u8>>();
        thread::spawn(move || {
            for batch in batches {
                if stdin.write_all(&batch).and_then(|_| stdin.flush()).is_err() {
                    break;
                }
            }
        });

        let stdout = child.stdout.take().expect("piped stdout");
        let (line_tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if line_tx.send(line).is_err() {
                    break;
                }
            }
        });

        let mut stderr_pipe = child.stderr.take().expect("piped stderr");
        let stderr = Arc::new(Mutex::new(Vec::new()));
        let sink = Arc::clone(&stderr);
        thread::spawn(move || {
            let mut buf = [0u8; 1024];
            while let Ok(n) = stderr_pipe.read(&mut buf) {
                if n == 0 {
                    break;
                }
                let mut tail = sink.lock().unwrap();
                tail.extend_from_slice(&buf[..n]);
                let excess = tail.len().saturating_sub(STDERR_TAIL);
                tail.drain(..excess);
            }
        });

        Ok(ChildProcess {
            child,
            input: Some(input),
            lines,
            stderr,
        })
    }

    fn diagnostics(&mut self) -> String {
        // Give the stderr reader a moment to drain what the child wrote.
        thread::sleep(Duration::from_millis(20));
        let tail = String::from_utf8_lossy(&self.stderr.lock().unwrap())
            .trim()
            .to_string();
        if tail.is_empty() {
            String::new()
        } else {
            format!("; stderr: {tail}")
        }
    }

    fn exit_status(&mut self) -> String {
        let deadline = Instant::now() + Duration::from_secs(1);
        while Instant::now() < deadline {
            if let Ok(Some(status)) = self.child.try_wait() {
                return status.to_string();
            }
            thread::sleep(Duration::from_millis(5));
        }
        "still running".to_string()
    }
}

impl Drop for ChildProcess {
    fn drop(&mut self) {
        self.input.take();
        let deadline = Instant::now() + Duration::from_millis(200);
        while Instant::now() < deadline {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            thread::sleep(Duration::from_millis(5));
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl PipePredictor {
    pub fn new(command: impl Into<String>, features: Schema) -> Self {
        PipePredictor {
            command: command.into(),
            features,
            batch_size: 4096,
            timeout: Duration::from_secs(30),
            child: Mutex::new(None),
        }
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size.max(1);
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    fn encode(&self, rows: &Matrix, range: std::ops::Range<usize>) -> Vec<u8> {
        let mut out = csv::Writer::from_writer(Vec::new());
        out.write_record(self.features.names())
            .expect("writing to memory");
        let mut record = Vec::with_capacity(self.features.len());
        for i in range {
            record.clear();
            record.extend(
                rows.row(i)
                    .iter()
                    .zip(self.features.columns())
                    .map(|(&v, spec)| spec.format_value(v)),
            );
            out.write_record(&record).expect("writing to memory");
        }
        let mut bytes = out.into_inner().expect("writing to memory");
        bytes.push(b'\n');
        bytes
    }

    fn run_batch(&self, proc: &mut ChildProcess, payload: Vec<u8>, k: usize) -> Result<Vec<f64>> {
        let fail = |proc: &mut ChildProcess, msg: String| {
            let diag = proc.diagnostics();
            Error::Predict(format!("`{}`: {msg}{diag}", self.command))
        };
        let sent = proc.input.as_ref().map(|tx| tx.send(payload).is_ok());
        if sent != Some(true) {
            let status = proc.exit_status();
            return Err(fail(
                proc,
                format!("child stdin closed (exit status: {status})"),
            ));
        }
        let deadline = Instant::now() + self.timeout;
        let mut out = Vec::with_capacity(k);
        while out.len() < k {
            let remaining = deadline.saturating_duration_since(Instant::now());
            match proc.lines.recv_timeout(remaining) {
                Ok(Ok(line)) => {
                    let value = line.trim().parse::<f64>().ok().filter(|v| v.is_finite());
                    match value {
                        Some(v) => out.push(v),
                        None => {
                            return Err(fail(
                                proc,
                                format!(
                                    "line {} of batch is not a number: {line:?}",
                                    out.len() + 1
                                ),
                            ))
                        }
                    }
                }
                Ok(Err(e)) => return Err(fail(proc, format!("reading stdout: {e}"))),
                Err(RecvTimeoutError::Timeout) => {
                    let _ = proc.child.kill();
                    return Err(fail(
                        proc,
                        format!(
                            "timed out after {:.1}s with {} of {k} predictions",
                            self.timeout.as_secs_f64(),
                            out.len()
                        ),
                    ));
                }
                Err(RecvTimeoutError::Disconnected) => {
                    let status = proc.exit_status();
                    return Err(fail(
                        proc,
                        format!(
                            "child exited ({status}) after {} of {k} predictions",
                            out.len()
                        ),
                    ));
                }
            }
        }
        Ok(out)
    }
}

impl Predictor for PipePredictor {
    fn features(&self) -> &Schema {
        &self.features
    }

    fn predict(&self, rows: &Matrix) -> Result<Vec<f64>> {
        check_rows(&self.features, rows)?;
        let mut guard = self.child.lock().unwrap_or_else(|e| e.into_inner());
        let mut out = Vec::with_capacity(rows.nrows());
        let mut start = 0;
        while start < rows.nrows() {
            let end = (start + self.batch_size).min(rows.nrows());
            if guard.is_none() {
                *guard = Some(ChildProcess::spawn(&self.command)?);
            }
            let payload = self.encode(rows, start..end);
            let result = self.run_batch(guard.as_mut().unwrap(), payload, end - start);
            match result {
                Ok(values) => out.extend(values),
                Err(e) => {
                    guard.take();
                    return Err(e);
                }
            }
            start = end;
        }
        Ok(out)
    }

    fn concurrency(&self) -> Concurrency {
        Concurrency::Serial
    }
}
