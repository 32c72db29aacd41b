use std::thread::sleep;
use std::time::Duration;

use serde_json::Value;
use ureq::Agent;

#[derive(Debug, Clone, PartialEq)]
pub enum ClientError {
    /// Connection refused, DNS failure, timeout and the like.
    Network(String),
    /// The service answered with a non-2xx status.
    Service {
        status: u16,
        code: String,
        message: String,
        field: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Get,
    Post,
    Patch,
}

#[derive(Debug, Clone)]
pub struct Reply {
    pub status: u16,
    pub body: String,
}

/// Blocking client for the scoreboard HTTP API.
#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    token: Option<String>,
    agent: Agent,
}

const BODY_LIMIT: u64 = 1 << 30;

impl Client {
    pub fn new(base_url: &str, token: Option<String>) -> Self {
        let agent: Agent = Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        Client {
            base: base_url.trim_end_matches('/').to_owned(),
            token,
            agent,
        }
    }

    fn once(&self, method: Method, path: &str, body: Option<&Value>) -> Result<Reply, ClientError> {
        let url = format!("{}{path}", self.base);
        let auth = self.token.as_ref().map(|t| format!("Bearer {t}"));
        let net = |e: ureq::Error| ClientError::Network(e.to_string());
        let payload = body.map(Value::to_string).unwrap_or_default();
        let mut response = match method {
            Method::Get => {
                let mut req = self.agent.get(&url);
                if let Some(a) = &auth {
                    req = req.header("Authorization", a);
                }
                req.call().map_err(net)?
            }
            Method::Post | Method::Patch => {
                let mut req = if method == Method::Post {
                    self.agent.post(&url)
                } else {
                    self.agent.patch(&url)
                };
                if let Some(a) = &auth {
                    req = req.header("Authorization", a);
                }
                req.header("Content-Type", "application/json")
                    .send(payload)
                    .map_err(net)?
            }
        };
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .with_config()
            .limit(BODY_LIMIT)
            .read_to_string()
            .map_err(net)?;
        if (200..300).contains(&status) {
            return Ok(Reply { status, body });
        }
        let parsed: Value = serde_json::from_str(&body).unwrap_or(Value::Null);
        let text = |k: &str| parsed.get(k).and_then(Value::as_str).map(str::to_owned);
        Err(ClientError::Service {
            status,
            code: text("code").unwrap_or_else(|| "unknown".into()),
            message: text("message").unwrap_or(body),
            field: text("field"),
        })
    }

    /// Sends the request, retrying network failures and 5xx answers with
    /// exponential backoff. Only use `attempts > 1` for idempotent calls.
    pub fn send(&self, method: Method, path: &str, body: Option<&Value>, attempts: u32) -> Result<Reply, ClientError> {
        let mut delay = Duration::from_millis(200);
        let mut attempt = 1;
        loop {
            match self.once(method, path, body) {
                Err(ClientError::Network(_)) | Err(ClientError::Service { status: 500.., .. })
                    if attempt < attempts =>
                {
                    sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    pub fn json(&self, method: Method, path: &str, body: Option<&Value>, attempts: u32) -> Result<Value, ClientError> {
        let reply = self.send(method, path, body, attempts)?;
        serde_json::from_str(&reply.body).map_err(|e| ClientError::Network(format!("unreadable response: {e}")))
    }
}
