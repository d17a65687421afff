//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (on by default) work is spread over a rayon
//! pool; without it, or with [`Parallelism::Sequential`], everything runs on
//! the calling thread. Output order never depends on the choice.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    /// `Threads(0)` uses rayon's default pool.
    Threads(usize),
    #[default]
    Auto,
}

impl fmt::Display for Parallelism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parallelism::Sequential => write!(f, "sequential"),
            Parallelism::Threads(n) => write!(f, "{n}"),
            Parallelism::Auto => write!(f, "auto"),
        }
    }
}

impl FromStr for Parallelism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sequential" | "seq" | "1" => Ok(Parallelism::Sequential),
            "auto" | "parallel" => Ok(Parallelism::Auto),
            n => n
                .parse::<usize>()
                .map(Parallelism::Threads)
                .map_err(|_| Error::InvalidArgument(format!("bad parallelism {s:?}"))),
        }
    }
}

impl Parallelism {
    /// Map `f` over `items`, keeping input order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Parallelism::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Parallelism::Auto | Parallelism::Threads(0) => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            #[cfg(feature = "parallel")]
            Parallelism::Threads(n) => {
                use rayon::prelude::*;
                match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                    Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
                    Err(_) => items.iter().map(f).collect(),
                }
            }
            #[cfg(not(feature = "parallel"))]
            _ => items.iter().map(f).collect(),
        }
    }

    /// Like [`map`](Self::map) for fallible work; the first error in input order wins.
    pub fn try_map<T, R, F>(self, items: &[T], f: F) -> Result<Vec<R>>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> Result<R> + Sync + Send,
    {
        self.map(items, f).into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let xs: Vec<u64> = (0..1000).collect();
        let expect: Vec<u64> = xs.iter().map(|x| x * x).collect();
        for p in [Parallelism::Sequential, Parallelism::Auto, Parallelism::Threads(3)] {
            assert_eq!(p.map(&xs, |x| x * x), expect);
        }
    }

    #[test]
    fn parses() {
        assert_eq!("sequential".parse::<Parallelism>().unwrap(), Parallelism::Sequential);
        assert_eq!("4".parse::<Parallelism>().unwrap(), Parallelism::Threads(4));
        assert!("many".parse::<Parallelism>().is_err());
    }
}
