//! Judges that compare two responses to one prompt.

use std::io::Read;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::subprocess::LineProcess;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    First,
    Second,
    Tie,
}

#[derive(Debug, thiserror::Error)]
pub enum JudgeError {
    #[error("judge input rejected: {0}")]
    InvalidInput(String),
    #[error("judge transport failed: {0}")]
    Transport(String),
    #[error("judge did not answer within {0:?}")]
    Timeout(Duration),
    #[error("judge protocol violation ({message}); raw payload: {raw:?}")]
    Protocol { message: String, raw: String },
}

/// One comparison as sent over the wire.
#[derive(Debug, Clone, Serialize)]
pub struct JudgeQuery<'a> {
    pub prompt: &'a str,
    pub first: &'a str,
    pub second: &'a str,
    pub criteria: &'a str,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JudgeReply {
    verdict: Verdict,
}

fn parse_reply(raw: &str) -> Result<Verdict, JudgeError> {
    serde_json::from_str::<JudgeReply>(raw.trim())
        .map(|r| r.verdict)
        .map_err(|e| JudgeError::Protocol {
            message: e.to_string(),
            raw: raw.to_owned(),
        })
}

/// A preference oracle. Implementations must be safe to call concurrently
/// and must not let earlier queries influence later ones.
pub trait Judge: Send + Sync {
    fn id(&self) -> String;
    fn compare(&self, prompt: &str, first: &str, second: &str) -> Result<Verdict, JudgeError>;
}

/// Validates inputs, then asks `judge` which response it prefers.
pub fn judge_pair(judge: &dyn Judge, prompt: &str, first: &str, second: &str) -> Result<Verdict, JudgeError> {
    if first.is_empty() || second.is_empty() {
        return Err(JudgeError::InvalidInput("both responses must be non-empty".into()));
    }
    judge.compare(prompt, first, second)
}

/// Prefers the response with more characters.
#[derive(Debug, Clone, Copy, Default)]
pub struct LongerWins;

impl Judge for LongerWins {
    fn id(&self) -> String {
        "mock:longer-wins".into()
    }

    fn compare(&self, _prompt: &str, first: &str, second: &str) -> Result<Verdict, JudgeError> {
        Ok(match first.chars().count().cmp(&second.chars().count()) {
            std::cmp::Ordering::Greater => Verdict::First,
            std::cmp::Ordering::Less => Verdict::Second,
            std::cmp::Ordering::Equal => Verdict::Tie,
        })
    }
}

/// Prefers the lexicographically smaller response.
#[derive(Debug, Clone, Copy, Default)]
pub struct Lexicographic;

impl Judge for Lexicographic {
    fn id(&self) -> String {
        "mock:lexicographic".into()
    }

    fn compare(&self, _prompt: &str, first: &str, second: &str) -> Result<Verdict, JudgeError> {
        Ok(match first.cmp(second) {
            std::cmp::Ordering::Less => Verdict::First,
            std::cmp::Ordering::Greater => Verdict::Second,
            std::cmp::Ordering::Equal => Verdict::Tie,
        })
    }
}

/// Always prefers whichever response is shown first: pure position bias.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysFirst;

impl Judge for AlwaysFirst {
    fn id(&self) -> String {
        "mock:always-first".into()
    }

    fn compare(&self, _prompt: &str, _first: &str, _second: &str) -> Result<Verdict, JudgeError> {
        Ok(Verdict::First)
    }
}

/// Talks to a child process: one JSON query per line on its stdin, one
/// `{"verdict":…}` line back on its stdout. Queries are serialized.
pub struct SubprocessJudge {
    command: String,
    criteria: String,
    process: Mutex<LineProcess>,
}

impl SubprocessJudge {
    pub fn spawn(command: &str, criteria: impl Into<String>, timeout: Duration) -> Result<Self, JudgeError> {
        let process = LineProcess::spawn(command, timeout).map_err(|e| JudgeError::Transport(e.to_string()))?;
        Ok(Self {
            command: command.to_owned(),
            criteria: criteria.into(),
            process: Mutex::new(process),
        })
    }
}

impl Judge for SubprocessJudge {
    fn id(&self) -> String {
        format!("cmd:{}", self.command)
    }

    fn compare(&self, prompt: &str, first: &str, second: &str) -> Result<Verdict, JudgeError> {
        let query = JudgeQuery {
            prompt,
            first,
            second,
            criteria: &self.criteria,
        };
        let line = serde_json::to_string(&query).expect("query serializes");
        let mut process = self.process.lock().map_err(|_| JudgeError::Transport("judge lock poisoned".into()))?;
        match process.request(&line) {
            Ok(reply) => parse_reply(&reply),
            Err(crate::subprocess::LineError::Timeout(d)) => Err(JudgeError::Timeout(d)),
            Err(e) => Err(JudgeError::Transport(e.to_string())),
        }
    }
}

/// POSTs the query JSON to an HTTP endpoint and expects the reply JSON as
/// the response body.
pub struct HttpJudge {
    url: String,
    criteria: String,
    agent: ureq::Agent,
}

impl HttpJudge {
    pub fn new(url: impl Into<String>, criteria: impl Into<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            url: url.into(),
            criteria: criteria.into(),
            agent,
        }
    }
}

impl Judge for HttpJudge {
    fn id(&self) -> String {
        format!("http:{}", self.url)
    }

    fn compare(&self, prompt: &str, first: &str, second: &str) -> Result<Verdict, JudgeError> {
        let query = JudgeQuery {
            prompt,
            first,
            second,
            criteria: &self.criteria,
        };
        let body = serde_json::to_string(&query).expect("query serializes");
        let resp = self
            .agent
            .post(&self.url)
            .header("content-type", "application/json")
            .send(body.as_bytes())
            .map_err(|e| match e {
                ureq::Error::Timeout(_) => JudgeError::Timeout(Duration::ZERO),
                other => JudgeError::Transport(other.to_string()),
            })?;
        let status = resp.status();
        let mut raw = String::new();
        resp.into_body()
            .into_reader()
            .read_to_string(&mut raw)
            .map_err(|e| JudgeError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(JudgeError::Protocol {
                message: format!("HTTP status {status}"),
                raw,
            });
        }
        parse_reply(&raw)
    }
}
