//! A long-lived child process that answers one JSON line per request line.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

#[derive(Debug, thiserror::Error)]
pub enum LineError {
    #[error("failed to start `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("write to child failed: {0}")]
    Write(std::io::Error),
    #[error("child closed its output")]
    Closed,
    #[error("no reply within {0:?}")]
    Timeout(Duration),
}

pub struct LineProcess {
    child: Child,
    stdin: ChildStdin,
    replies: Receiver<std::io::Result<String>>,
    timeout: Duration,
    // Set after a timeout; a late reply would otherwise answer the next request.
    desynced: bool,
}

impl LineProcess {
    /// Runs `command` through `sh -c`.
    pub fn spawn(command: &str, timeout: Duration) -> Result<Self, LineError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| LineError::Spawn {
                command: command.to_owned(),
                source,
            })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, replies) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self {
            child,
            stdin,
            replies,
            timeout,
            desynced: false,
        })
    }

    pub fn request(&mut self, line: &str) -> Result<String, LineError> {
        if self.desynced {
            return Err(LineError::Closed);
        }
        self.stdin
            .write_all(line.as_bytes())
            .and_then(|_| self.stdin.write_all(b"\n"))
            .and_then(|_| self.stdin.flush())
            .map_err(LineError::Write)?;
        match self.replies.recv_timeout(self.timeout) {
            Ok(Ok(reply)) => Ok(reply),
            Ok(Err(_)) | Err(RecvTimeoutError::Disconnected) => Err(LineError::Closed),
            Err(RecvTimeoutError::Timeout) => {
                self.desynced = true;
                Err(LineError::Timeout(self.timeout))
            }
        }
    }
}

impl Drop for LineProcess {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
