//! Subprocess evaluator speaking one-line JSON on stdin/stdout.
//!
//! Per evaluation the harness spawns the configured command, writes
//! `{"x":[..]}` followed by a newline, closes stdin, and reads a single
//! line: `{"objectives":[..],"feasible":true}` or `{"feasible":false}`. A
//! nonzero exit status, a timeout, or unparseable output all produce an
//! infeasible record; the loop never stops for a broken evaluator.

use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use mobo::driver::Evaluation;

#[derive(Serialize)]
struct Request<'a> {
    x: &'a [f64],
}

#[derive(Deserialize)]
struct Response {
    #[serde(default)]
    objectives: Option<Vec<f64>>,
    feasible: bool,
}

#[derive(Debug, Clone)]
pub struct ExternalEvaluator {
    command: Vec<String>,
    timeout: Duration,
    n_objectives: usize,
}

impl ExternalEvaluator {
    pub fn new(command: Vec<String>, timeout: Duration, n_objectives: usize) -> Self {
        Self {
            command,
            timeout,
            n_objectives,
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Evaluation {
        match self.try_evaluate(x) {
            Ok(ev) => ev,
            Err(reason) => {
                log::warn!("external evaluation failed: {reason}");
                Evaluation::Infeasible
            }
        }
    }

    fn try_evaluate(&self, x: &[f64]) -> Result<Evaluation, String> {
        let mut child = Command::new(&self.command[0])
            .args(&self.command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| format!("spawn '{}': {e}", self.command[0]))?;

        let request =
            serde_json::to_string(&Request { x }).map_err(|e| format!("encode request: {e}"))?;
        {
            let mut stdin = child.stdin.take().ok_or("child stdin unavailable")?;
            stdin
                .write_all(request.as_bytes())
                .and_then(|_| stdin.write_all(b"\n"))
                .map_err(|e| format!("write request: {e}"))?;
            // Dropping stdin closes the pipe so line-oriented children see
            // end of input.
        }

        let stdout = child.stdout.take().ok_or("child stdout unavailable")?;
        let (tx, rx) = mpsc::channel();
        // Detached on purpose: joining could block on an orphaned grandchild
        // that still holds the pipe after the direct child is killed.
        std::thread::spawn(move || {
            let mut line = String::new();
            let result = BufReader::new(stdout).read_line(&mut line).map(|_| line);
            let _ = tx.send(result);
        });

        let line = match rx.recv_timeout(self.timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(format!("read response: {e}"));
            }
            Err(_) => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(format!("timeout after {:?}", self.timeout));
            }
        };

        let status = wait_with_timeout(&mut child, self.timeout)?;
        if !status {
            return Err(format!("nonzero exit status; output: {}", line.trim()));
        }

        let response: Response = serde_json::from_str(line.trim())
            .map_err(|e| format!("malformed response '{}': {e}", line.trim()))?;
        if !response.feasible {
            return Ok(Evaluation::Infeasible);
        }
        let objectives = response
            .objectives
            .ok_or_else(|| format!("feasible response without objectives: {}", line.trim()))?;
        if objectives.len() != self.n_objectives {
            return Err(format!(
                "expected {} objectives, got {}",
                self.n_objectives,
                objectives.len()
            ));
        }
        if objectives.iter().any(|v| !v.is_finite()) {
            return Err(format!("non-finite objectives: {objectives:?}"));
        }
        Ok(Evaluation::Feasible(objectives))
    }
}

/// Wait for exit, polling up to the timeout; returns whether the status was
/// success.
fn wait_with_timeout(child: &mut std::process::Child, timeout: Duration) -> Result<bool, String> {
    let deadline = std::time::Instant::now() + timeout;
    loop {
        match child.try_wait() {
            Ok(Some(status)) => return Ok(status.success()),
            Ok(None) => {
                if std::time::Instant::now() >= deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err("timeout waiting for child exit".into());
                }
                std::thread::sleep(Duration::from_millis(2));
            }
            Err(e) => return Err(format!("wait: {e}")),
        }
    }
}
