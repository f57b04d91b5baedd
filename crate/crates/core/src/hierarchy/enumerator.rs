//! One-to-one enumerations of recursively enumerable sets of naturals.
//!
//! `enumerate(i)` is the `i`-th element (0-based) of the output stream, so
//! the function `phi(l)` with `l >= 1` is `enumerate(l - 1)`.

use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};

use super::machines::{content_hash, parse_table, Machine, Run, COMMITTED_TABLE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    DovetailTm,
    InjectedTest,
}

#[derive(Clone)]
enum Source {
    Table(Arc<Vec<u64>>),
    Func(Arc<dyn Fn(u64) -> u64 + Send + Sync>),
    Dovetail(Arc<Dovetailer>),
}

/// A deterministic injective stream `i -> enumerate(i)`.
#[derive(Clone)]
pub struct REEnumerator {
    label: String,
    source: Source,
}

impl fmt::Debug for REEnumerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("REEnumerator").field("label", &self.label).field("backend", &self.backend()).finish()
    }
}

impl REEnumerator {
    /// Finite injected stream. Entries must be distinct.
    pub fn from_table(label: impl Into<String>, table: Vec<u64>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = table.iter().find(|v| !seen.insert(**v)) {
            return Err(Error::Validation(format!("injected table repeats {dup}")));
        }
        Ok(REEnumerator { label: label.into(), source: Source::Table(Arc::new(table)) })
    }

    /// Injected stream given by a closure, which the caller asserts is injective.
    pub fn from_fn(label: impl Into<String>, f: impl Fn(u64) -> u64 + Send + Sync + 'static) -> Self {
        REEnumerator { label: label.into(), source: Source::Func(Arc::new(f)) }
    }

    /// `phi(l) = l`, whose image is all of `N+`.
    pub fn identity() -> Self {
        REEnumerator::from_fn("phi(l)=l", |i| i + 1)
    }

    /// Halting indices of the committed two-counter machine table.
    pub fn dovetail_tm() -> Self {
        static SHARED: std::sync::OnceLock<Arc<Dovetailer>> = std::sync::OnceLock::new();
        let d = SHARED
            .get_or_init(|| {
                Arc::new(Dovetailer::new(COMMITTED_TABLE, DEFAULT_STAGE_CAP).expect("committed table parses"))
            })
            .clone();
        REEnumerator { label: "dovetail_tm".into(), source: Source::Dovetail(d) }
    }

    /// Dovetailing over an arbitrary machine table.
    pub fn dovetail_from_table(text: &str, stage_cap: u64) -> Result<Self> {
        Ok(REEnumerator {
            label: format!("dovetail_tm:{}", &content_hash(text)[..12]),
            source: Source::Dovetail(Arc::new(Dovetailer::new(text, stage_cap)?)),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn backend(&self) -> Backend {
        match self.source {
            Source::Dovetail(_) => Backend::DovetailTm,
            _ => Backend::InjectedTest,
        }
    }

    /// Content hash of whatever fixes the stream: the machine table or the label.
    pub fn content_hash(&self) -> String {
        match &self.source {
            Source::Dovetail(d) => d.hash.clone(),
            Source::Table(t) => content_hash(&format!("{t:?}")),
            Source::Func(_) => content_hash(&self.label),
        }
    }

    pub fn try_enumerate(&self, i: u64) -> Result<u64> {
        match &self.source {
            Source::Table(t) => t.get(i as usize).copied().ok_or_else(|| {
                Error::EnumeratorExhausted(format!("injected table has {} entries, asked for index {i}", t.len()))
            }),
            Source::Func(f) => Ok(f(i)),
            Source::Dovetail(d) => d.nth(i),
        }
    }

    /// Panics if a finite backend is exhausted; see [`REEnumerator::try_enumerate`].
    pub fn enumerate(&self, i: u64) -> u64 {
        self.try_enumerate(i).unwrap_or_else(|e| panic!("{e}"))
    }

    /// `phi(l) = enumerate(l - 1)` for `l >= 1`.
    pub fn phi(&self, l: u64) -> Result<u64> {
        if l == 0 {
            return Err(Error::Validation("phi is indexed from 1".into()));
        }
        self.try_enumerate(l - 1)
    }

    pub fn prefix(&self, n: u64) -> Result<Vec<u64>> {
        (0..n).map(|i| self.try_enumerate(i)).collect()
    }

    /// An independent cursor starting at index 0.
    pub fn cursor(&self) -> Cursor {
        Cursor { e: self.clone(), pos: 0 }
    }
}

pub fn re_enumerate(r: &REEnumerator, i: u64) -> u64 {
    r.enumerate(i)
}

/// Owned position into an enumerator's stream.
pub struct Cursor {
    e: REEnumerator,
    pos: u64,
}

impl Iterator for Cursor {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let v = self.e.try_enumerate(self.pos).ok()?;
        self.pos += 1;
        Some(v)
    }
}

/// Stages beyond this are not simulated; [`Error::EnumeratorExhausted`] results.
pub const DEFAULT_STAGE_CAP: u64 = 1 << 14;

/// Stage `t` runs machines `0..=t` until each has executed `t` steps.
/// Machine `i` halting after `s` steps is therefore observed at stage
/// `max(i, s)`; within a stage, outputs are ordered by index. Output is
/// `index + 1`.
struct Dovetailer {
    machines: Vec<Machine>,
    hash: String,
    stage_cap: u64,
    state: Mutex<DovetailState>,
}

struct DovetailState {
    /// Next stage to run.
    stage: u64,
    runs: Vec<Run>,
    emitted: Vec<u64>,
}

impl Dovetailer {
    fn new(text: &str, stage_cap: u64) -> Result<Self> {
        Ok(Dovetailer {
            machines: parse_table(text)?,
            hash: content_hash(text),
            stage_cap,
            state: Mutex::new(DovetailState { stage: 0, runs: Vec::new(), emitted: Vec::new() }),
        })
    }

    fn nth(&self, i: u64) -> Result<u64> {
        let mut st = self.state.lock().expect("dovetail state poisoned");
        while st.emitted.len() as u64 <= i {
            let t = st.stage;
            if t > self.stage_cap {
                return Err(Error::EnumeratorExhausted(format!(
                    "{} halts observed by stage cap {}; index {i} requested",
                    st.emitted.len(),
                    self.stage_cap
                )));
            }
            if (t as usize) < self.machines.len() {
                st.runs.push(Run::new());
            }
            let DovetailState { runs, emitted, .. } = &mut *st;
            for (idx, run) in runs.iter_mut().enumerate() {
                if run.halted() {
                    continue;
                }
                let m = &self.machines[idx];
                while run.steps < t {
                    if run.step(m) {
                        emitted.push(idx as u64 + 1);
                        break;
                    }
                }
            }
            st.stage += 1;
        }
        Ok(st.emitted[i as usize])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn injected_table() {
        let e = REEnumerator::from_table("t", vec![3, 1, 4, 5]).unwrap();
        assert_eq!(re_enumerate(&e, 2), 4);
        assert_eq!(e.phi(2).unwrap(), 1);
        assert!(e.try_enumerate(4).is_err());
        assert!(REEnumerator::from_table("dup", vec![1, 2, 1]).is_err());
        assert_eq!(e.backend(), Backend::InjectedTest);
    }

    #[test]
    fn dovetail_deterministic_and_injective() {
        let e = REEnumerator::dovetail_tm();
        let a = re_enumerate(&e, 0);
        let b = re_enumerate(&REEnumerator::dovetail_tm(), 0);
        assert_eq!(a, b);
        let prefix = e.prefix(100).unwrap();
        let set: HashSet<_> = prefix.iter().collect();
        assert_eq!(set.len(), 100);
        assert!(prefix.iter().all(|&v| v >= 1));
        let via_cursor: Vec<u64> = e.cursor().take(100).collect();
        assert_eq!(via_cursor, prefix);
    }

    #[test]
    fn dovetail_stage_order() {
        // machine 0 halts after 3 steps, machine 1 immediately, machine 2 never
        let table = "0: INC 0 1; INC 0 2; HALT\n1: HALT\n2: INC 0 0\n3: HALT\n";
        let e = REEnumerator::dovetail_from_table(table, 64).unwrap();
        // observed at stages max(0,3)=3, max(1,1)=1, max(3,1)=3
        assert_eq!(e.prefix(3).unwrap(), vec![2, 1, 4]);
        assert!(matches!(e.try_enumerate(3), Err(Error::EnumeratorExhausted(_))));
    }
}
