//! Integer factorization for the prime-divisor profiles: wheel trial
//! division for small inputs, deterministic Miller–Rabin plus Brent-cycle
//! Pollard rho above the wheel range. Everything is deterministic, so
//! profiles are reproducible.

/// Wheel increments after 7 for the 2·3·5 wheel.
const WHEEL: [u64; 8] = [4, 2, 4, 2, 4, 6, 2, 6];

/// Prime factors of `n ≥ 2` in ascending order, with multiplicity.
pub fn factorize(n: u64) -> Vec<u64> {
    assert!(n >= 2, "factorize needs n >= 2, got {n}");
    let mut factors = Vec::new();
    let mut m = n;
    for p in [2u64, 3, 5] {
        while m % p == 0 {
            factors.push(p);
            m /= p;
        }
    }
    // Trial divide with the wheel up to 1e4; this fully factors any n < 1e8.
    let mut p = 7u64;
    let mut wheel_idx = 0usize;
    while p <= 10_000 && p * p <= m {
        while m % p == 0 {
            factors.push(p);
            m /= p;
        }
        p += WHEEL[wheel_idx];
        wheel_idx = (wheel_idx + 1) % WHEEL.len();
    }
    if m > 1 {
        if m < 100_000_000 || is_prime_u64(m) {
            // No factor up to 1e4 and m < 1e8 means m is prime.
            factors.push(m);
        } else {
            split_composite(m, &mut factors);
        }
    }
    factors.sort_unstable();
    factors
}

fn split_composite(n: u64, factors: &mut Vec<u64>) {
    debug_assert!(n > 1 && !is_prime_u64(n));
    let mut c = 1u64;
    let d = loop {
        if let Some(d) = pollard_brent(n, c) {
            break d;
        }
        c += 1;
    };
    for part in [d, n / d] {
        if is_prime_u64(part) {
            factors.push(part);
        } else {
            split_composite(part, factors);
        }
    }
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for u64 (the first twelve primes as witnesses
/// cover the full range).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent-cycle Pollard rho with polynomial `x² + c`; returns a nontrivial
/// factor of composite odd `n`, or None when this `c` hits a degenerate
/// cycle.
fn pollard_brent(n: u64, c: u64) -> Option<u64> {
    if n % 2 == 0 {
        return Some(2);
    }
    let f = |x: u64| (mul_mod(x, x, n) + c) % n;
    let (mut x, mut ys) = (2u64, 2u64);
    let mut y = 2u64;
    let mut d = 1u64;
    let mut r = 1u64;
    let mut q = 1u64;
    const BATCH: u64 = 128;
    while d == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0u64;
        while k < r && d == 1 {
            ys = y;
            let lim = BATCH.min(r - k);
            for _ in 0..lim {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            d = gcd(q, n);
            k += lim;
        }
        r <<= 1;
    }
    if d == n {
        // Backtrack one step at a time.
        loop {
            ys = f(ys);
            d = gcd(x.abs_diff(ys), n);
            if d > 1 {
                break;
            }
        }
    }
    if d > 1 && d < n {
        Some(d)
    } else {
        None
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_factorizations() {
        assert_eq!(factorize(2), vec![2]);
        assert_eq!(factorize(12), vec![2, 2, 3]);
        assert_eq!(factorize(97), vec![97]);
        assert_eq!(factorize(1024), vec![2; 10]);
        assert_eq!(factorize(999_983), vec![999_983]); // prime
        assert_eq!(factorize(1_000_003), vec![1_000_003]); // prime
    }

    #[test]
    fn recomposition_exhaustive_small() {
        for n in 2u64..5000 {
            let fs = factorize(n);
            assert!(fs.windows(2).all(|w| w[0] <= w[1]));
            assert!(fs.iter().all(|&p| is_prime_u64(p)));
            assert_eq!(fs.iter().product::<u64>(), n);
        }
    }

    #[test]
    fn large_inputs_get_pollard_rho() {
        // 1e9-scale semiprimes exercise the Miller–Rabin + rho path.
        let n = 1_000_003u64 * 999_983;
        assert_eq!(factorize(n), vec![999_983, 1_000_003]);
        let n = 4_294_967_291u64; // largest prime below 2^32
        assert_eq!(factorize(n), vec![n]);
        let n = 4_294_967_291u64 * 13;
        assert_eq!(factorize(n), vec![13, 4_294_967_291]);
        // Square of a large prime.
        let p = 1_000_000_007u64;
        assert_eq!(factorize(p * p), vec![p, p]);
    }

    #[test]
    fn miller_rabin_agrees_with_trial_division() {
        for n in 2u64..3000 {
            let by_trial = (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(is_prime_u64(n), by_trial, "disagreement at {n}");
        }
        assert!(!is_prime_u64(0));
        assert!(!is_prime_u64(1));
        // Strong-pseudoprime classics.
        assert!(!is_prime_u64(3_215_031_751));
        assert!(is_prime_u64(2_147_483_647)); // 2^31 − 1
    }
}
