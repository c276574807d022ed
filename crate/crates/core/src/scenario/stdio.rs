//! Out-of-process planners speaking line-delimited JSON over stdio.
//!
//! Each tick the simulator writes one [`Observation`] object per line to the
//! child's stdin and reads one reply line:
//! `{"accel": f64, "brake_signal": f64, "predictions": {"<ped>": [[x, y], ...]}}`
//! where `brake_signal` and `predictions` are optional.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::Deserialize;

use super::planner::{Control, Observation, Planner, PlannerError};

#[derive(Deserialize)]
struct Reply {
    accel: f64,
    #[serde(default)]
    brake_signal: f64,
    #[serde(default)]
    predictions: BTreeMap<String, Vec<[f64; 2]>>,
}

pub struct StdioPlanner {
    name: String,
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
    wait: Duration,
    predictions: BTreeMap<String, Vec<[f64; 2]>>,
}

impl StdioPlanner {
    /// Starts `program` with `args`. Replies slower than `budget_ms` leave the
    /// control at zero; the simulator's own timing check then aborts the run.
    pub fn spawn(name: &str, program: &str, args: &[String], budget_ms: f64) -> Result<Self, PlannerError> {
        let err = |message: String| PlannerError { planner: name.to_string(), message };
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| err(format!("cannot start `{program}`: {e}")))?;
        let stdin = child.stdin.take().expect("stdin was piped");
        let stdout = child.stdout.take().expect("stdout was piped");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(StdioPlanner {
            name: name.to_string(),
            child,
            stdin,
            lines,
            wait: Duration::from_secs_f64(budget_ms.max(0.0) / 1000.0) + Duration::from_millis(5),
            predictions: BTreeMap::new(),
        })
    }

    fn err(&self, message: impl Into<String>) -> PlannerError {
        PlannerError { planner: self.name.clone(), message: message.into() }
    }
}

impl Planner for StdioPlanner {
    fn name(&self) -> &str {
        &self.name
    }

    fn observe(&mut self, obs: &Observation) -> Result<Control, PlannerError> {
        let mut line = serde_json::to_vec(obs).map_err(|e| self.err(e.to_string()))?;
        line.push(b'\n');
        self.stdin.write_all(&line).and_then(|_| self.stdin.flush()).map_err(|e| self.err(format!("write failed: {e}")))?;
        match self.lines.recv_timeout(self.wait) {
            Ok(reply) => {
                let r: Reply = serde_json::from_str(&reply).map_err(|e| self.err(format!("bad reply `{reply}`: {e}")))?;
                self.predictions = r.predictions;
                Ok(Control { accel: r.accel, brake_signal: r.brake_signal })
            }
            Err(RecvTimeoutError::Timeout) => {
                self.predictions.clear();
                Ok(Control::default())
            }
            Err(RecvTimeoutError::Disconnected) => Err(self.err("planner process closed its output")),
        }
    }

    fn predict(&mut self, ped: &str, horizon: usize) -> Option<Vec<[f64; 2]>> {
        self.predictions.get(ped).map(|p| p.iter().take(horizon).copied().collect())
    }
}

impl Drop for StdioPlanner {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
