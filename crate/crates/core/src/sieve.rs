//! Segmented sieve of Eratosthenes and prime-interval queries.

use std::sync::OnceLock;

/// Default upper limit of the shared prime table.
pub const DEFAULT_SIEVE_LIMIT: u64 = 10_000_000;

const SEGMENT: u64 = 1 << 16;

/// All primes up to a fixed limit, produced once by a segmented sieve.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn new(limit: u64) -> Self {
        let limit = limit.max(2);
        let root = (limit as f64).sqrt() as u64 + 1;
        let base = simple_sieve(root);
        let mut primes = Vec::with_capacity(estimate_pi(limit));
        let mut mark = vec![true; SEGMENT as usize];
        let mut lo = 2u64;
        while lo <= limit {
            let hi = (lo + SEGMENT - 1).min(limit);
            let len = (hi - lo + 1) as usize;
            mark[..len].iter_mut().for_each(|m| *m = true);
            for &p in &base {
                if p * p > hi {
                    break;
                }
                let mut start = (lo + p - 1) / p * p;
                if start < p * p {
                    start = p * p;
                }
                let mut m = start;
                while m <= hi {
                    mark[(m - lo) as usize] = false;
                    m += p;
                }
            }
            primes.extend(
                mark[..len]
                    .iter()
                    .enumerate()
                    .filter(|(_, &is_p)| is_p)
                    .map(|(i, _)| lo + i as u64),
            );
            lo = hi + 1;
        }
        PrimeTable { limit, primes }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Primes `p` with `p <= x`.
    pub fn up_to(&self, x: f64) -> &[u64] {
        if x < 2.0 {
            return &[];
        }
        let end = self.primes.partition_point(|&p| (p as f64) <= x);
        &self.primes[..end]
    }

    /// Primes in the half-open interval `(lo, hi]`.
    pub fn in_interval(&self, lo: f64, hi: f64) -> &[u64] {
        let start = self.primes.partition_point(|&p| (p as f64) <= lo);
        let end = self.primes.partition_point(|&p| (p as f64) <= hi);
        if end <= start {
            &[]
        } else {
            &self.primes[start..end]
        }
    }

    /// Prime counting function π(x) for x within the table.
    pub fn pi(&self, x: f64) -> usize {
        self.up_to(x).len()
    }

    pub fn is_prime(&self, n: u64) -> bool {
        if n <= self.limit {
            self.primes.binary_search(&n).is_ok()
        } else {
            is_prime_trial(n)
        }
    }
}

/// Shared table with [`DEFAULT_SIEVE_LIMIT`], built on first use.
pub fn shared() -> &'static PrimeTable {
    static TABLE: OnceLock<PrimeTable> = OnceLock::new();
    TABLE.get_or_init(|| PrimeTable::new(DEFAULT_SIEVE_LIMIT))
}

/// Table covering at least `limit`; reuses the shared table when it suffices.
pub fn table_for(limit: u64) -> std::borrow::Cow<'static, PrimeTable> {
    if limit <= DEFAULT_SIEVE_LIMIT {
        std::borrow::Cow::Borrowed(shared())
    } else {
        std::borrow::Cow::Owned(PrimeTable::new(limit))
    }
}

fn simple_sieve(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut is_p = vec![true; n + 1];
    is_p[0] = false;
    if n >= 1 {
        is_p[1] = false;
    }
    let mut i = 2;
    while i * i <= n {
        if is_p[i] {
            let mut j = i * i;
            while j <= n {
                is_p[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    is_p
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i as u64)
        .collect()
}

fn estimate_pi(x: u64) -> usize {
    let xf = x as f64;
    if xf < 10.0 {
        return 8;
    }
    (1.26 * xf / xf.ln()) as usize + 16
}

fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// If `n = p^l` for a prime `p` and `l >= 1`, returns `(p, l)`.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    let mut p = 0;
    if n % 2 == 0 {
        p = 2;
    } else {
        let mut d = 3u64;
        while d * d <= n {
            if n % d == 0 {
                p = d;
                break;
            }
            d += 2;
        }
        if p == 0 {
            return Some((n, 1));
        }
    }
    let mut m = n;
    let mut l = 0;
    while m % p == 0 {
        m /= p;
        l += 1;
    }
    (m == 1).then_some((p, l))
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_simple_sieve() {
        let t = PrimeTable::new(300_000);
        assert_eq!(t.primes(), simple_sieve(300_000).as_slice());
        assert_eq!(t.pi(1e5), 9592);
    }

    #[test]
    fn interval_queries() {
        let t = PrimeTable::new(1000);
        assert_eq!(t.in_interval(10.0, 20.0), &[11, 13, 17, 19]);
        assert_eq!(t.in_interval(11.0, 11.5), &[] as &[u64]);
        assert_eq!(t.up_to(1.0), &[] as &[u64]);
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(8), Some((2, 3)));
        assert_eq!(prime_power(17), Some((17, 1)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
        assert_eq!(prime_power(3u64.pow(5)), Some((3, 5)));
    }
}
