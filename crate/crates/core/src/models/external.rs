//! Adapters for scorers that live outside the process.
//!
//! Subprocess protocol: each batch is written to the child's stdin as one
//! header-less CSV line per instance followed by a blank line. The child
//! answers with exactly one line per instance and flushes. Closing stdin ends
//! the child.
//!
//! HTTP protocol: `POST /score` with `{"instances": [[...], ...]}`, answered by
//! `{"scores": [...]}`.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{ConcurrencyClass, Model};
use crate::error::{AdpError, Result};
use crate::types::Instance;

/// Formats values as a CSV line using the shortest round-trip decimal form.
pub fn format_csv_line(values: &[f64]) -> String {
    let mut line = String::with_capacity(values.len() * 20);
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        line.push_str(&v.to_string());
    }
    line
}

struct ChildPipes {
    child: Child,
    stdin: Option<ChildStdin>,
    stdout: BufReader<ChildStdout>,
}

/// A long-running child process speaking the line protocol.
pub struct SubprocessClient {
    command: String,
    pipes: Mutex<ChildPipes>,
}

impl SubprocessClient {
    /// Starts `command` through `sh -c`.
    pub fn spawn(command: &str) -> Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| AdpError::ScorerFailure(format!("cannot start `{command}`: {e}")))?;
        let stdin = child.stdin.take();
        let stdout = BufReader::new(child.stdout.take().expect("stdout is piped"));
        Ok(SubprocessClient {
            command: command.to_string(),
            pipes: Mutex::new(ChildPipes { child, stdin, stdout }),
        })
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    /// Sends one batch of lines and reads back one reply line per input line.
    pub fn request(&self, lines: &[String]) -> Result<Vec<String>> {
        let failure = |what: &str, e: std::io::Error| {
            AdpError::ScorerFailure(format!("{what} `{}`: {e}", self.command))
        };
        let mut pipes = self.pipes.lock().unwrap_or_else(|e| e.into_inner());
        let stdin = pipes
            .stdin
            .as_mut()
            .ok_or_else(|| AdpError::ScorerFailure("scorer stdin already closed".into()))?;
        let mut payload = String::new();
        for line in lines {
            payload.push_str(line);
            payload.push('\n');
        }
        payload.push('\n');
        stdin.write_all(payload.as_bytes()).map_err(|e| failure("cannot write to", e))?;
        stdin.flush().map_err(|e| failure("cannot flush", e))?;

        let mut replies = Vec::with_capacity(lines.len());
        while replies.len() < lines.len() {
            let mut buf = String::new();
            let read = pipes.stdout.read_line(&mut buf).map_err(|e| failure("cannot read from", e))?;
            if read == 0 {
                return Err(AdpError::ScorerFailure(format!(
                    "`{}` closed its output after {} of {} replies",
                    self.command,
                    replies.len(),
                    lines.len()
                )));
            }
            let reply = buf.trim();
            if !reply.is_empty() {
                replies.push(reply.to_string());
            }
        }
        Ok(replies)
    }
}

impl Drop for SubprocessClient {
    fn drop(&mut self) {
        let pipes = self.pipes.get_mut().unwrap_or_else(|e| e.into_inner());
        drop(pipes.stdin.take());
        let _ = pipes.child.wait();
    }
}

/// Model scored by an external command, one decimal per reply line.
pub struct SubprocessScorer {
    client: SubprocessClient,
    dim: usize,
}

impl SubprocessScorer {
    pub fn spawn(command: &str, dim: usize) -> Result<Self> {
        Ok(SubprocessScorer { client: SubprocessClient::spawn(command)?, dim })
    }
}

impl Model for SubprocessScorer {
    fn dim(&self) -> usize {
        self.dim
    }

    fn score(&self, points: &[Instance]) -> Result<Vec<f64>> {
        let lines: Vec<String> = points.iter().map(|p| format_csv_line(p)).collect();
        self.client
            .request(&lines)?
            .iter()
            .map(|r| {
                r.parse::<f64>()
                    .map_err(|_| AdpError::ScorerFailure(format!("unparseable score `{r}`")))
            })
            .collect()
    }

    fn concurrency(&self) -> ConcurrencyClass {
        ConcurrencyClass::Serialized
    }

    fn describe(&self) -> String {
        format!("cmd:{}", self.client.command())
    }
}

#[derive(Serialize)]
struct ScoreRequest<'a> {
    instances: Vec<&'a [f64]>,
}

#[derive(Deserialize)]
struct ScoreResponse {
    scores: Vec<f64>,
}

/// Model scored by an HTTP endpoint.
pub struct HttpScorer {
    endpoint: String,
    dim: usize,
    agent: ureq::Agent,
}

impl HttpScorer {
    /// `base` may be a server root or the full `/score` endpoint.
    pub fn new(base: &str, dim: usize) -> Self {
        let trimmed = base.trim_end_matches('/');
        let endpoint = if trimmed.ends_with("/score") {
            trimmed.to_string()
        } else {
            format!("{trimmed}/score")
        };
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs(120)).build();
        HttpScorer { endpoint, dim, agent }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }
}

impl Model for HttpScorer {
    fn dim(&self) -> usize {
        self.dim
    }

    fn score(&self, points: &[Instance]) -> Result<Vec<f64>> {
        let body = ScoreRequest { instances: points.iter().map(|p| p.values()).collect() };
        let response = self.agent.post(&self.endpoint).send_json(&body).map_err(|e| match e {
            ureq::Error::Status(code, _) => {
                AdpError::ScorerFailure(format!("{} answered HTTP {code}", self.endpoint))
            }
            other => AdpError::ScorerFailure(format!("{}: {other}", self.endpoint)),
        })?;
        let parsed: ScoreResponse = response
            .into_json()
            .map_err(|e| AdpError::ScorerFailure(format!("bad response body: {e}")))?;
        if parsed.scores.len() != points.len() {
            return Err(AdpError::ScorerFailure(format!(
                "expected {} scores, got {}",
                points.len(),
                parsed.scores.len()
            )));
        }
        Ok(parsed.scores)
    }

    fn concurrency(&self) -> ConcurrencyClass {
        ConcurrencyClass::Serialized
    }

    fn describe(&self) -> String {
        format!("http:{}", self.endpoint)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_lines_round_trip() {
        let values = [0.1, -1e-300, 1.0 / 3.0, 12345678.9, 0.0];
        let line = format_csv_line(&values);
        let parsed: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(parsed, values);
    }
}
