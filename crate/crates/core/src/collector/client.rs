use std::cell::{Cell, RefCell};
use std::collections::HashSet;
use std::time::{Duration, Instant};

use super::{CollectError, DataSource, Endpoint, Page, SourceError};

/// Time source for pacing and backoff; swapped for [`ManualClock`] in tests.
pub trait Clock {
    /// Time elapsed since an arbitrary fixed origin.
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

impl<C: Clock + ?Sized> Clock for &C {
    fn now(&self) -> Duration {
        (**self).now()
    }

    fn sleep(&self, d: Duration) {
        (**self).sleep(d)
    }
}

#[derive(Debug, Clone)]
pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock { origin: Instant::now() }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d)
    }
}

/// Virtual clock: sleeping advances time instantly and is recorded.
#[derive(Debug, Default)]
pub struct ManualClock {
    now: Cell<Duration>,
    sleeps: RefCell<Vec<Duration>>,
}

impl ManualClock {
    pub fn advance(&self, d: Duration) {
        self.now.set(self.now.get() + d);
    }

    pub fn sleeps(&self) -> Vec<Duration> {
        self.sleeps.borrow().clone()
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        self.now.get()
    }

    fn sleep(&self, d: Duration) {
        self.sleeps.borrow_mut().push(d);
        self.advance(d);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    /// Total attempts per request, the first included.
    pub attempts: u32,
    pub initial_backoff: Duration,
    pub multiplier: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            initial_backoff: Duration::from_secs(1),
            multiplier: 2.0,
        }
    }
}

impl RetryPolicy {
    /// Wait before retry number `retry` (0-based).
    pub fn backoff(&self, retry: u32) -> Duration {
        self.initial_backoff.mul_f64(self.multiplier.powi(retry as i32))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientConfig {
    pub retry: RetryPolicy,
    /// Upper bound on requests per second leaving the client.
    pub max_requests_per_second: f64,
    /// Safety cap on pages per paginated listing.
    pub max_pages: usize,
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            retry: RetryPolicy::default(),
            max_requests_per_second: 5.0,
            max_pages: 10_000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClientStats {
    pub requests: u64,
    pub retries: u64,
    pub rate_limited: u64,
}

/// Wraps a [`DataSource`] with pacing, retries and pagination.
pub struct Client<S, C = SystemClock> {
    source: S,
    clock: C,
    config: ClientConfig,
    last_request: Option<Duration>,
    stats: ClientStats,
    request_times: Vec<Duration>,
}

impl<S: DataSource> Client<S, SystemClock> {
    pub fn new(source: S, config: ClientConfig) -> Self {
        Client::with_clock(source, config, SystemClock::default())
    }
}

impl<S: DataSource, C: Clock> Client<S, C> {
    pub fn with_clock(source: S, config: ClientConfig, clock: C) -> Self {
        Client {
            source,
            clock,
            config,
            last_request: None,
            stats: ClientStats::default(),
            request_times: Vec::new(),
        }
    }

    pub fn stats(&self) -> &ClientStats {
        &self.stats
    }

    /// Clock readings at which requests were sent.
    pub fn request_times(&self) -> &[Duration] {
        &self.request_times
    }

    pub fn into_source(self) -> S {
        self.source
    }

    fn pace(&mut self) {
        if self.config.max_requests_per_second > 0.0 {
            let interval = Duration::from_secs_f64(1.0 / self.config.max_requests_per_second);
            if let Some(last) = self.last_request {
                let due = last + interval;
                let now = self.clock.now();
                if due > now {
                    self.clock.sleep(due - now);
                }
            }
        }
        let now = self.clock.now();
        self.last_request = Some(now);
        self.request_times.push(now);
        self.stats.requests += 1;
    }

    /// One request with pacing and bounded retries.
    pub fn call<T>(&mut self, mut request: impl FnMut(&mut S) -> Result<T, SourceError>) -> Result<T, SourceError> {
        let attempts = self.config.retry.attempts.max(1);
        let mut retry = 0;
        loop {
            self.pace();
            match request(&mut self.source) {
                Ok(v) => return Ok(v),
                Err(e) if e.is_retryable() && retry + 1 < attempts => {
                    let mut wait = self.config.retry.backoff(retry);
                    if let SourceError::RateLimited { retry_after } = &e {
                        self.stats.rate_limited += 1;
                        wait = wait.max(retry_after.unwrap_or_default());
                    }
                    log::warn!("request failed ({e}); retrying in {wait:?}");
                    self.stats.retries += 1;
                    self.clock.sleep(wait);
                    retry += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Follows page tokens until the listing ends.
    pub fn paginate<T>(
        &mut self,
        endpoint: Endpoint,
        key: &str,
        mut page: impl FnMut(&mut S, Option<&str>) -> Result<Page<T>, SourceError>,
    ) -> Result<Vec<T>, CollectError> {
        let mut items = Vec::new();
        let mut token: Option<String> = None;
        let mut seen = HashSet::new();
        for _ in 0..self.config.max_pages {
            let p = self
                .call(|s| page(s, token.as_deref()))
                .map_err(|source| CollectError::Source { endpoint, key: key.to_string(), source })?;
            items.extend(p.items);
            match p.next_page_token.filter(|t| !t.is_empty()) {
                None => return Ok(items),
                Some(t) => {
                    if !seen.insert(t.clone()) {
                        return Err(CollectError::PaginationLoop { endpoint, key: key.to_string(), token: t });
                    }
                    token = Some(t);
                }
            }
        }
        Err(CollectError::TooManyPages { endpoint, key: key.to_string(), max: self.config.max_pages })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collector::TimeWindow;
    use crate::corpus::{Comment, Video};

    /// Serves numbered pages and fails according to a script.
    struct Scripted {
        failures: Vec<SourceError>,
        pages: usize,
        loop_tokens: bool,
    }

    impl DataSource for Scripted {
        fn search(&mut self, _: &str, _: &TimeWindow, token: Option<&str>) -> Result<Page<Video>, SourceError> {
            if !self.failures.is_empty() {
                return Err(self.failures.remove(0));
            }
            let k: usize = token.map_or(0, |t| t.parse().unwrap());
            let next = if self.loop_tokens { Some("1".to_string()) } else { (k + 1 < self.pages).then(|| (k + 1).to_string()) };
            Ok(Page { items: vec![], next_page_token: next })
        }

        fn related(&mut self, _: &str, _: Option<&str>) -> Result<Page<Video>, SourceError> {
            unreachable!()
        }

        fn comments(&mut self, _: &str, _: Option<&str>) -> Result<Page<Comment>, SourceError> {
            unreachable!()
        }
    }

    fn client(failures: Vec<SourceError>, clock: &ManualClock, rate: f64) -> Client<Scripted, &ManualClock> {
        let config = ClientConfig { max_requests_per_second: rate, ..ClientConfig::default() };
        Client::with_clock(Scripted { failures, pages: 1, loop_tokens: false }, config, clock)
    }

    fn search(c: &mut Client<Scripted, &ManualClock>) -> Result<Page<Video>, SourceError> {
        c.call(|s| s.search("k", &TimeWindow::default(), None))
    }

    #[test]
    fn retries_with_exponential_backoff_then_gives_up() {
        let clock = ManualClock::default();
        let t = || SourceError::Transport("reset".into());
        let mut c = client(vec![t(), t()], &clock, 0.0);
        assert!(search(&mut c).is_ok());
        assert_eq!(clock.sleeps(), vec![Duration::from_secs(1), Duration::from_secs(2)]);
        assert_eq!(c.stats().retries, 2);

        let clock = ManualClock::default();
        let mut c = client(vec![t(), t(), t()], &clock, 0.0);
        assert_eq!(search(&mut c), Err(t()));
        assert_eq!(c.stats().requests, 3);

        let clock = ManualClock::default();
        let mut c = client(vec![SourceError::Invalid("bad".into())], &clock, 0.0);
        assert!(search(&mut c).is_err());
        assert_eq!(c.stats().requests, 1);
    }

    #[test]
    fn rate_limit_honours_retry_after() {
        let clock = ManualClock::default();
        let mut c = client(vec![SourceError::RateLimited { retry_after: Some(Duration::from_secs(30)) }], &clock, 0.0);
        assert!(search(&mut c).is_ok());
        assert_eq!(clock.sleeps(), vec![Duration::from_secs(30)]);
        assert_eq!(c.stats().rate_limited, 1);
    }

    #[test]
    fn pacing_caps_requests_per_second() {
        let clock = ManualClock::default();
        let mut c = client(vec![], &clock, 4.0);
        for _ in 0..40 {
            search(&mut c).unwrap();
            clock.advance(Duration::from_millis(37));
        }
        let times = c.request_times().to_vec();
        for (i, &t) in times.iter().enumerate() {
            let in_window = times[i..].iter().take_while(|&&u| u < t + Duration::from_secs(1)).count();
            assert!(in_window <= 4, "{in_window} requests within 1 s of {t:?}");
        }
    }

    #[test]
    fn pagination_stops_and_detects_loops() {
        let clock = ManualClock::default();
        let mut c = Client::with_clock(Scripted { failures: vec![], pages: 4, loop_tokens: false }, ClientConfig::default(), &clock);
        let items = c.paginate(Endpoint::Search, "k", |s, t| s.search("k", &TimeWindow::default(), t)).unwrap();
        assert!(items.is_empty());
        assert_eq!(c.stats().requests, 4);

        let mut c = Client::with_clock(Scripted { failures: vec![], pages: 4, loop_tokens: true }, ClientConfig::default(), &clock);
        let err = c.paginate(Endpoint::Search, "k", |s, t| s.search("k", &TimeWindow::default(), t)).unwrap_err();
        assert!(matches!(err, CollectError::PaginationLoop { .. }));
    }
}
