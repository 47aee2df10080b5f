use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::ClientError;

/// Bounded exponential backoff for transient client errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            base_delay_ms: 500,
            max_delay_ms: 8_000,
        }
    }
}

impl RetryPolicy {
    /// No sleeping between attempts; for tests and the offline mock.
    pub fn immediate(max_attempts: u32) -> Self {
        RetryPolicy {
            max_attempts,
            base_delay_ms: 0,
            max_delay_ms: 0,
        }
    }

    /// Delay before attempt `n + 1` after `n` failures.
    pub fn delay(&self, failures: u32) -> Duration {
        let exp = self
            .base_delay_ms
            .saturating_mul(1u64 << failures.saturating_sub(1).min(20));
        Duration::from_millis(exp.min(self.max_delay_ms))
    }
}

/// Run `op` until it succeeds, fails permanently, or the attempt budget is
/// spent.
pub fn with_retry<T>(policy: &RetryPolicy, mut op: impl FnMut() -> Result<T, ClientError>) -> Result<T, ClientError> {
    let max = policy.max_attempts.max(1);
    let mut attempt = 0;
    loop {
        attempt += 1;
        match op() {
            Ok(v) => return Ok(v),
            Err(e) if e.is_transient() && attempt < max => {
                let d = policy.delay(attempt);
                if !d.is_zero() {
                    std::thread::sleep(d);
                }
            }
            Err(e) if e.is_transient() => {
                return Err(ClientError::RetriesExhausted {
                    attempts: attempt,
                    last: Box::new(e),
                })
            }
            Err(e) => return Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retries_then_succeeds() {
        let mut calls = 0;
        let r = with_retry(&RetryPolicy::immediate(3), || {
            calls += 1;
            if calls < 3 {
                Err(ClientError::Transport("down".into()))
            } else {
                Ok(calls)
            }
        });
        assert_eq!(r, Ok(3));
    }

    #[test]
    fn exhausts() {
        let mut calls = 0;
        let r: Result<(), _> = with_retry(&RetryPolicy::immediate(3), || {
            calls += 1;
            Err(ClientError::Transport("down".into()))
        });
        assert_eq!(calls, 3);
        assert!(matches!(r, Err(ClientError::RetriesExhausted { attempts: 3, .. })));
    }

    #[test]
    fn permanent_errors_are_not_retried() {
        let mut calls = 0;
        let r: Result<(), _> = with_retry(&RetryPolicy::immediate(3), || {
            calls += 1;
            Err(ClientError::Http { status: 400, body: "bad".into() })
        });
        assert_eq!(calls, 1);
        assert!(matches!(r, Err(ClientError::Http { status: 400, .. })));
    }

    #[test]
    fn backoff_grows_and_caps() {
        let p = RetryPolicy::default();
        assert_eq!(p.delay(1), Duration::from_millis(500));
        assert_eq!(p.delay(2), Duration::from_millis(1000));
        assert_eq!(p.delay(10), Duration::from_millis(8000));
    }
}
