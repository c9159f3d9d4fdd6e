use rayon::prelude::*;

/// How x-columns are handed to workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// One contiguous block of columns per worker.
    Static,
    /// Columns are claimed one at a time.
    Dynamic,
}

impl std::str::FromStr for Schedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "static" => Ok(Schedule::Static),
            "dynamic" => Ok(Schedule::Dynamic),
            other => Err(format!("unknown schedule `{other}`")),
        }
    }
}

/// A fixed-size worker pool.
pub struct Workers {
    pool: rayon::ThreadPool,
    threads: usize,
    schedule: Schedule,
}

impl std::fmt::Debug for Workers {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Workers")
            .field("threads", &self.threads)
            .field("schedule", &self.schedule)
            .finish()
    }
}

impl Workers {
    pub fn new(threads: usize, schedule: Schedule) -> Result<Self, rayon::ThreadPoolBuildError> {
        let threads = threads.max(1);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .thread_name(|i| format!("lbm-worker-{i}"))
            .build()?;
        Ok(Self {
            pool,
            threads,
            schedule,
        })
    }

    /// A single worker; handy for tests and the reference path.
    pub fn serial() -> Self {
        Self::new(1, Schedule::Static).expect("single-thread pool")
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    pub fn schedule(&self) -> Schedule {
        self.schedule
    }

    /// Run `f` on every item, stopping at the first error.
    pub(crate) fn run<T, E, F>(&self, items: Vec<T>, f: F) -> Result<(), E>
    where
        T: Send,
        E: Send,
        F: Fn(T) -> Result<(), E> + Sync + Send,
    {
        let n = items.len();
        let threads = self.threads;
        let schedule = self.schedule;
        self.pool.install(|| match schedule {
            Schedule::Dynamic => items.into_par_iter().with_max_len(1).try_for_each(&f),
            Schedule::Static => {
                let block = n.div_ceil(threads).max(1);
                items.into_par_iter().with_min_len(block).try_for_each(&f)
            }
        })
    }
}
