#![allow(dead_code)]

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};

use tempfile::TempDir;

/// Isolated home, config dir and repository for running the `quest` binary.
pub struct Sandbox {
    pub dir: TempDir,
    pub repo: PathBuf,
}

impl Sandbox {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let repo = dir.path().join("repo");
        for sub in ["home", "config", "data"] {
            std::fs::create_dir_all(dir.path().join(sub)).unwrap();
        }
        Sandbox { dir, repo }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn command(&self, args: &[&str]) -> Command {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_quest"));
        cmd.args(args)
            .env_remove("QUEST_SERVICE")
            .env_remove("QUEST_TOKEN")
            .env_remove("QUEST_CONFIG")
            .env_remove("QUEST_ADMIN_TOKEN")
            .env("QUEST_REPO", &self.repo)
            .env("HOME", self.path("home"))
            .env("XDG_CONFIG_HOME", self.path("config"))
            .env("XDG_DATA_HOME", self.path("data"));
        cmd
    }

    pub fn quest(&self, args: &[&str]) -> Output {
        self.command(args).output().unwrap()
    }

    pub fn quest_stdin(&self, args: &[&str], input: &[u8]) -> Output {
        let mut child = self
            .command(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .unwrap();
        child.stdin.take().unwrap().write_all(input).unwrap();
        child.wait_with_output().unwrap()
    }

    /// Runs `quest`, asserts success and returns the last stdout line.
    pub fn quest_ok(&self, args: &[&str]) -> String {
        let out = self.quest(args);
        assert_success(&out, args);
        last_line(&out)
    }

    pub fn payload(&self, name: &str, files: &[(&str, &str)]) -> PathBuf {
        let dir = self.path("payloads").join(name);
        std::fs::create_dir_all(&dir).unwrap();
        for (file, content) in files {
            std::fs::write(dir.join(file), content).unwrap();
        }
        dir
    }

    /// Packs a program whose entry command is `sh {program_dir}/run.sh <args>`.
    pub fn program(&self, name: &str, script: &str, args: &str, tags: &str) -> String {
        let payload = self.payload(name, &[("run.sh", script)]);
        let meta = serde_json::json!({"entry_command": format!("sh {{program_dir}}/run.sh {args}").trim_end()});
        self.quest_ok(&[
            "pack",
            "--kind",
            "program",
            "--name",
            name,
            "--version",
            "1.0",
            "--payload",
            payload.to_str().unwrap(),
            "--tag",
            tags,
            "--meta-json",
            &meta.to_string(),
        ])
    }
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn last_line(out: &Output) -> String {
    stdout(out).lines().last().unwrap_or_default().to_owned()
}

pub fn assert_success(out: &Output, args: &[&str]) {
    assert!(
        out.status.success(),
        "quest {args:?} exited {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        stdout(out),
        stderr(out)
    );
}

/// A `quest serve` child process on an ephemeral port, killed on drop.
pub struct Server {
    child: Child,
    pub url: String,
    pub log: Option<PathBuf>,
}

impl Server {
    pub fn start(sandbox: &Sandbox, log: Option<&Path>, extra: &[&str]) -> Server {
        let mut args = vec!["serve", "--listen", "127.0.0.1:0"];
        let log_str;
        match log {
            Some(path) => {
                log_str = path.to_str().unwrap().to_owned();
                args.extend(["--log", &log_str]);
            }
            None => args.push("--in-memory"),
        }
        args.extend(extra);
        let mut child = sandbox
            .command(&args)
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .unwrap();
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap())
            .read_line(&mut line)
            .unwrap();
        assert!(!line.trim().is_empty(), "server did not report its address");
        Server {
            child,
            url: format!("http://{}", line.trim()),
            log: log.map(Path::to_path_buf),
        }
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// A local port with nothing listening on it.
pub fn dead_url() -> String {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    format!("http://{addr}")
}
