//! Batch line segmentation jobs.
//!
//! Each page of a job runs on the blocking pool once it holds a permit from
//! the shared worker semaphore. Cancelling stops pages that have not started;
//! pages already written keep their files.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;

use crate::error::{Result, ServiceError};
use crate::library::Library;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JobStatus {
    Running,
    Completed,
    Cancelled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PageFailure {
    pub page_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct JobProgress {
    pub id: u64,
    pub book_id: String,
    pub status: JobStatus,
    pub total: usize,
    pub completed: Vec<String>,
    pub failed: Vec<PageFailure>,
    pub skipped: Vec<String>,
}

impl JobProgress {
    fn finished(&self) -> usize {
        self.completed.len() + self.failed.len() + self.skipped.len()
    }
}

struct Job {
    progress: Mutex<JobProgress>,
    cancel: AtomicBool,
}

pub struct JobManager {
    library: Arc<Library>,
    workers: Arc<Semaphore>,
    jobs: Mutex<HashMap<u64, Arc<Job>>>,
    next_id: AtomicU64,
}

impl JobManager {
    pub fn new(library: Arc<Library>, workers: usize) -> Self {
        Self {
            library,
            workers: Arc::new(Semaphore::new(workers.max(1))),
            jobs: Mutex::default(),
            next_id: AtomicU64::new(1),
        }
    }

    /// Start a job over `pages` (all pages of the book when empty).
    pub fn start(&self, book: &str, pages: Vec<String>) -> Result<JobProgress> {
        let pages = if pages.is_empty() {
            self.library.page_files(book)?.into_iter().map(|(id, _)| id).collect()
        } else {
            self.library.book_dir(book)?;
            pages
        };
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let job = Arc::new(Job {
            progress: Mutex::new(JobProgress {
                id,
                book_id: book.to_string(),
                status: JobStatus::Running,
                total: pages.len(),
                completed: Vec::new(),
                failed: Vec::new(),
                skipped: Vec::new(),
            }),
            cancel: AtomicBool::new(false),
        });
        self.jobs.lock().unwrap_or_else(|e| e.into_inner()).insert(id, job.clone());
        let snapshot = job.progress.lock().unwrap_or_else(|e| e.into_inner()).clone();

        if pages.is_empty() {
            finish_if_done(&job);
        }
        for page in pages {
            let (job, library, workers, book) = (job.clone(), self.library.clone(), self.workers.clone(), book.to_string());
            tokio::spawn(async move {
                let permit = workers.acquire_owned().await;
                if job.cancel.load(Ordering::Acquire) || permit.is_err() {
                    record(&job, |p| p.skipped.push(page));
                    return;
                }
                let page_id = page.clone();
                let res = tokio::task::spawn_blocking(move || library.write_lines(&book, &page_id)).await;
                drop(permit);
                match res {
                    Ok(Ok(_)) => record(&job, |p| p.completed.push(page)),
                    Ok(Err(e)) => record(&job, |p| {
                        p.failed.push(PageFailure {
                            page_id: page,
                            error: e.to_string(),
                        })
                    }),
                    Err(e) => record(&job, |p| {
                        p.failed.push(PageFailure {
                            page_id: page,
                            error: format!("worker failed: {e}"),
                        })
                    }),
                }
            });
        }
        Ok(snapshot)
    }

    fn job(&self, book: &str, id: u64) -> Result<Arc<Job>> {
        self.jobs
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .get(&id)
            .filter(|j| j.progress.lock().unwrap_or_else(|e| e.into_inner()).book_id == book)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(format!("line job {id}")))
    }

    pub fn progress(&self, book: &str, id: u64) -> Result<JobProgress> {
        let job = self.job(book, id)?;
        let p = job.progress.lock().unwrap_or_else(|e| e.into_inner()).clone();
        Ok(p)
    }

    pub fn cancel(&self, book: &str, id: u64) -> Result<JobProgress> {
        let job = self.job(book, id)?;
        job.cancel.store(true, Ordering::Release);
        finish_if_done(&job);
        let p = job.progress.lock().unwrap_or_else(|e| e.into_inner()).clone();
        Ok(p)
    }
}

fn record(job: &Job, f: impl FnOnce(&mut JobProgress)) {
    f(&mut job.progress.lock().unwrap_or_else(|e| e.into_inner()));
    finish_if_done(job);
}

fn finish_if_done(job: &Job) {
    let mut p = job.progress.lock().unwrap_or_else(|e| e.into_inner());
    if p.status == JobStatus::Running && p.finished() == p.total {
        p.status = if job.cancel.load(Ordering::Acquire) {
            JobStatus::Cancelled
        } else {
            JobStatus::Completed
        };
    }
}
