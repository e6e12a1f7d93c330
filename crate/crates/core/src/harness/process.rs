//! Child-process execution with a wall-clock limit, a data-segment cap
//! and an optional private network namespace.

use std::collections::BTreeMap;
use std::io::{self, Read, Write};
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::Path;
use std::process::{Command, Stdio};
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub(crate) struct ProcessSpec<'a> {
    pub argv: Vec<String>,
    pub cwd: &'a Path,
    pub env: &'a BTreeMap<String, String>,
    pub stdin: &'a [u8],
    pub timeout: Duration,
    pub memory_limit_mb: Option<u64>,
    pub isolate_network: bool,
    pub output_limit: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Exit {
    Code(i32),
    Signal(i32),
}

#[derive(Debug, Clone)]
pub(crate) struct ProcessOutput {
    pub exit: Exit,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    pub timed_out: bool,
    pub stdout_truncated: bool,
    pub duration: Duration,
}

impl ProcessOutput {
    pub fn success(&self) -> bool {
        !self.timed_out && self.exit == Exit::Code(0)
    }
}

/// Reads a pipe to the end, keeping at most `limit` bytes.
fn drain<R: Read + Send + 'static>(mut r: R, limit: usize) -> thread::JoinHandle<(Vec<u8>, bool)> {
    thread::spawn(move || {
        let mut kept = Vec::new();
        let mut truncated = false;
        let mut buf = [0u8; 8192];
        loop {
            match r.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    let room = limit.saturating_sub(kept.len());
                    if room < n {
                        truncated = true;
                    }
                    kept.extend_from_slice(&buf[..n.min(room)]);
                }
            }
        }
        (kept, truncated)
    })
}

pub(crate) fn run(spec: &ProcessSpec<'_>) -> io::Result<ProcessOutput> {
    let (program, args) = spec
        .argv
        .split_first()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "empty command"))?;
    let mut cmd = Command::new(program);
    cmd.args(args)
        .current_dir(spec.cwd)
        .envs(spec.env)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());

    let memory = spec.memory_limit_mb;
    let isolate = spec.isolate_network;
    // SAFETY: only async-signal-safe libc calls between fork and exec.
    unsafe {
        cmd.pre_exec(move || {
            if libc::setpgid(0, 0) != 0 {
                return Err(io::Error::last_os_error());
            }
            let no_core = libc::rlimit {
                rlim_cur: 0,
                rlim_max: 0,
            };
            libc::setrlimit(libc::RLIMIT_CORE, &no_core);
            if let Some(mb) = memory {
                // RLIMIT_DATA rather than RLIMIT_AS: the Go runtime and the JVM
                // reserve large PROT_NONE regions that RLIMIT_AS would count
                let bytes = mb.saturating_mul(1024 * 1024) as libc::rlim_t;
                let lim = libc::rlimit {
                    rlim_cur: bytes,
                    rlim_max: bytes,
                };
                if libc::setrlimit(libc::RLIMIT_DATA, &lim) != 0 {
                    return Err(io::Error::last_os_error());
                }
            }
            if isolate {
                // best effort: without CAP_SYS_ADMIN the namespace is unavailable
                libc::unshare(libc::CLONE_NEWNET);
            }
            Ok(())
        });
    }

    let start = Instant::now();
    let mut child = cmd.spawn()?;
    let pgid = child.id() as libc::pid_t;

    let stdin_bytes = spec.stdin.to_vec();
    let mut stdin = child.stdin.take().expect("piped stdin");
    let writer = thread::spawn(move || {
        // a program that never reads its input closes the pipe early
        let _ = stdin.write_all(&stdin_bytes);
    });
    let out = drain(child.stdout.take().expect("piped stdout"), spec.output_limit);
    let err = drain(child.stderr.take().expect("piped stderr"), spec.output_limit);

    let deadline = start + spec.timeout;
    let mut timed_out = false;
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if Instant::now() >= deadline {
            timed_out = true;
            unsafe {
                libc::kill(-pgid, libc::SIGKILL);
            }
            break child.wait()?;
        }
        thread::sleep(Duration::from_millis(2));
    };
    let duration = start.elapsed();
    // reap anything the program left behind so the pipes close
    unsafe {
        libc::kill(-pgid, libc::SIGKILL);
    }
    let _ = writer.join();
    let (stdout, stdout_truncated) = out.join().unwrap_or_default();
    let (stderr, _) = err.join().unwrap_or_default();

    let exit = match (status.code(), status.signal()) {
        (Some(code), _) => Exit::Code(code),
        (None, Some(sig)) => Exit::Signal(sig),
        (None, None) => Exit::Code(-1),
    };
    Ok(ProcessOutput {
        exit,
        stdout,
        stderr,
        timed_out,
        stdout_truncated,
        duration,
    })
}

/// Counting semaphore bounding simultaneous judged processes.
#[derive(Debug)]
pub struct ProcessSlots {
    free: Mutex<usize>,
    cv: Condvar,
}

pub(crate) struct SlotGuard<'a>(&'a ProcessSlots);

impl ProcessSlots {
    pub fn new(n: usize) -> Self {
        ProcessSlots {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    pub(crate) fn acquire(&self) -> SlotGuard<'_> {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cv.wait(free).unwrap();
        }
        *free -= 1;
        SlotGuard(self)
    }
}

impl Drop for SlotGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

pub(crate) fn find_in_path(program: &str) -> Option<std::path::PathBuf> {
    if program.contains('/') {
        let p = Path::new(program);
        return p.is_file().then(|| p.to_path_buf());
    }
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path)
        .map(|dir| dir.join(program))
        .find(|p| p.is_file())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec<'a>(argv: &[&str], cwd: &'a Path, env: &'a BTreeMap<String, String>, stdin: &'a [u8]) -> ProcessSpec<'a> {
        ProcessSpec {
            argv: argv.iter().map(|s| s.to_string()).collect(),
            cwd,
            env,
            stdin,
            timeout: Duration::from_secs(5),
            memory_limit_mb: Some(256),
            isolate_network: false,
            output_limit: 1 << 20,
        }
    }

    #[test]
    fn captures_stdout_and_exit_code() {
        let dir = tempfile::tempdir().unwrap();
        let env = BTreeMap::new();
        let out = run(&spec(
            &["sh", "-c", "cat; echo err >&2; exit 3"],
            dir.path(),
            &env,
            b"hi\n",
        ))
        .unwrap();
        assert_eq!(out.stdout, b"hi\n");
        assert_eq!(out.stderr, b"err\n");
        assert_eq!(out.exit, Exit::Code(3));
        assert!(!out.timed_out);
    }

    #[test]
    fn kills_on_timeout_including_children() {
        let dir = tempfile::tempdir().unwrap();
        let env = BTreeMap::new();
        let mut s = spec(&["sh", "-c", "sleep 30 & sleep 30"], dir.path(), &env, b"");
        s.timeout = Duration::from_millis(300);
        let t = Instant::now();
        let out = run(&s).unwrap();
        assert!(out.timed_out);
        assert!(t.elapsed() < Duration::from_secs(5));
    }

    #[test]
    fn truncates_runaway_output() {
        let dir = tempfile::tempdir().unwrap();
        let env = BTreeMap::new();
        let mut s = spec(&["sh", "-c", "yes | head -c 100000"], dir.path(), &env, b"");
        s.output_limit = 1000;
        let out = run(&s).unwrap();
        assert_eq!(out.stdout.len(), 1000);
        assert!(out.stdout_truncated);
    }

    #[test]
    fn missing_program_is_not_found() {
        let dir = tempfile::tempdir().unwrap();
        let env = BTreeMap::new();
        let err = run(&spec(&["definitely-not-a-program-xyz"], dir.path(), &env, b"")).unwrap_err();
        assert_eq!(err.kind(), io::ErrorKind::NotFound);
    }

    #[test]
    fn slots_bound_concurrency() {
        let slots = std::sync::Arc::new(ProcessSlots::new(2));
        let live = std::sync::Arc::new(std::sync::atomic::AtomicUsize::new(0));
        let peak = std::sync::Arc::new(std::sync::atomic::AtomicUsize::new(0));
        let handles: Vec<_> = (0..6)
            .map(|_| {
                let (slots, live, peak) = (slots.clone(), live.clone(), peak.clone());
                thread::spawn(move || {
                    let _g = slots.acquire();
                    let now = live.fetch_add(1, std::sync::atomic::Ordering::SeqCst) + 1;
                    peak.fetch_max(now, std::sync::atomic::Ordering::SeqCst);
                    thread::sleep(Duration::from_millis(20));
                    live.fetch_sub(1, std::sync::atomic::Ordering::SeqCst);
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert!(peak.load(std::sync::atomic::Ordering::SeqCst) <= 2);
    }
}
