use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use crate::error::{Error, Result};

/// Environment variable holding the default solver command template.
pub const SOLVER_ENV: &str = "RESPMECH_SOLVER";

/// How to invoke an external QBF solver.
///
/// `command` is split on whitespace; a `{}` word is replaced by the path of
/// the instance file, otherwise the path is appended as the last argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub command: String,
    pub timeout: Duration,
}

impl SolverConfig {
    pub fn new(command: impl Into<String>) -> Self {
        SolverConfig {
            command: command.into(),
            timeout: Duration::from_secs(60),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    /// Configuration from `RESPMECH_SOLVER`, if set and non-empty.
    pub fn from_env() -> Option<Self> {
        std::env::var(SOLVER_ENV)
            .ok()
            .filter(|c| !c.trim().is_empty())
            .map(SolverConfig::new)
    }
}

fn verdict_from_output(status: Option<i32>, stdout: &str) -> Result<bool> {
    match status {
        Some(10) => return Ok(true),
        Some(20) => return Ok(false),
        _ => {}
    }
    for line in stdout.lines() {
        let words: Vec<&str> = line.split_whitespace().collect();
        if let ["s", "cnf", v, ..] = words.as_slice() {
            match *v {
                "1" => return Ok(true),
                "0" => return Ok(false),
                _ => {}
            }
        }
    }
    let tail: String = stdout.lines().rev().take(3).collect::<Vec<_>>().join(" | ");
    Err(Error::SolverOutput(format!(
        "exit status {}, no `s cnf` line (last output: {tail:?})",
        status.map_or("signal".to_string(), |s| s.to_string())
    )))
}

/// Writes `qdimacs` to a temporary file, runs the solver on it and reads
/// the verdict: exit status 10 is TRUE and 20 is FALSE; otherwise a result
/// line `s cnf 1` or `s cnf 0` decides.
pub fn run_external(qdimacs: &str, config: &SolverConfig) -> Result<bool> {
    let mut file = tempfile::Builder::new().suffix(".qdimacs").tempfile()?;
    file.write_all(qdimacs.as_bytes())?;
    file.flush()?;
    let path = file.path().to_string_lossy().into_owned();

    let mut words: Vec<String> = config.command.split_whitespace().map(str::to_string).collect();
    if words.is_empty() {
        return Err(Error::SolverMissing(String::new()));
    }
    if let Some(slot) = words.iter_mut().find(|w| *w == "{}") {
        *slot = path;
    } else {
        words.push(path);
    }
    let mut child = Command::new(&words[0])
        .args(&words[1..])
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|_| Error::SolverMissing(words[0].clone()))?;

    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut out = String::new();
        let _ = stdout.read_to_string(&mut out);
        out
    });
    let start = Instant::now();
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if start.elapsed() >= config.timeout {
            let _ = child.kill();
            let _ = child.wait();
            return Err(Error::SolverTimeout(config.timeout));
        }
        std::thread::sleep(Duration::from_millis(5));
    };
    let out = reader.join().unwrap_or_default();
    verdict_from_output(status.code(), &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_and_result_lines() {
        assert_eq!(verdict_from_output(Some(10), ""), Ok(true));
        assert_eq!(verdict_from_output(Some(20), ""), Ok(false));
        assert_eq!(verdict_from_output(Some(0), "c hello\ns cnf 1\n"), Ok(true));
        assert_eq!(verdict_from_output(Some(0), "s cnf 0 12 3\n"), Ok(false));
        assert!(matches!(
            verdict_from_output(Some(0), "garbage\n"),
            Err(Error::SolverOutput(_))
        ));
        assert!(matches!(verdict_from_output(None, ""), Err(Error::SolverOutput(_))));
    }

    #[test]
    fn missing_solver() {
        let cfg = SolverConfig::new("definitely-not-a-qbf-solver-xyz {}");
        assert_eq!(
            run_external("p cnf 0 0\n", &cfg),
            Err(Error::SolverMissing("definitely-not-a-qbf-solver-xyz".into()))
        );
    }

    #[cfg(unix)]
    #[test]
    fn scripted_solvers() {
        let dir = tempfile::tempdir().unwrap();
        let script = |name: &str, body: &str| {
            let p = dir.path().join(name);
            std::fs::write(&p, body).unwrap();
            format!("sh {}", p.display())
        };
        let yes = script("yes.sh", "exit 10\n");
        assert_eq!(run_external("p cnf 0 0\n", &SolverConfig::new(yes)), Ok(true));
        // the instance path is substituted for {}
        let reads = script("reads.sh", "grep -q 'p cnf 1 1' \"$1\" && echo 's cnf 0'\n");
        assert_eq!(
            run_external("p cnf 1 1\ne 1 0\n1 0\n", &SolverConfig::new(format!("{reads} {{}}"))),
            Ok(false)
        );
        let junk = script("junk.sh", "echo hello\n");
        assert!(matches!(
            run_external("p cnf 0 0\n", &SolverConfig::new(junk)),
            Err(Error::SolverOutput(_))
        ));
        let slow = script("slow.sh", "sleep 5\n");
        let cfg = SolverConfig::new(slow).with_timeout(Duration::from_millis(100));
        assert!(matches!(run_external("p cnf 0 0\n", &cfg), Err(Error::SolverTimeout(_))));
    }
}
