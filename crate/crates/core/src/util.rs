//! Small shared helpers: seed derivation, content hashing, float
//! serialization, and a deterministic parallel map.

/// splitmix64 finalizer; decorrelates related seed inputs.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derive a sub-seed from a base seed and a salt path.
///
/// Every randomized stage of a run (fold shuffles, per-clip noise,
/// trial sampling) draws its RNG through this so that one top-level
/// seed pins the whole experiment.
pub fn derive_seed(base: u64, salts: &[u64]) -> u64 {
    let mut acc = splitmix64(base);
    for &s in salts {
        acc = splitmix64(acc ^ splitmix64(s));
    }
    acc
}

/// FNV-1a over a byte slice; used for config fingerprints and clip
/// content hashes.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Hash a slice of f64 by raw bit pattern (order-sensitive).
pub fn hash_f64s(values: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Serialize an f64 with 18 significant digits so a parse round-trips
/// to the identical bit pattern. Exact zero stays compact.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 && x.is_sign_positive() {
        "0".to_string()
    } else {
        format!("{x:.17e}")
    }
}

/// Map `f` over `0..n` with up to `jobs` worker threads.
///
/// Work is dealt round-robin by index and results are reassembled in
/// index order, so the output is identical for any `jobs` value.
pub fn parallel_map_indexed<T, F>(n: usize, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let jobs = jobs.max(1).min(n.max(1));
    if jobs <= 1 {
        return (0..n).map(f).collect();
    }
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(jobs);
        for worker in 0..jobs {
            let f = &f;
            handles.push(scope.spawn(move || {
                let mut out = Vec::new();
                let mut i = worker;
                while i < n {
                    out.push((i, f(i)));
                    i += jobs;
                }
                out
            }));
        }
        for h in handles {
            for (i, v) in h.join().expect("worker panicked") {
                slots[i] = Some(v);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("missing slot")).collect()
}

/// Cosine similarity; 0.0 when either vector has zero norm.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "cosine_similarity length mismatch");
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na.sqrt() * nb.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_seed_is_stable_and_salt_sensitive() {
        assert_eq!(derive_seed(42, &[1, 2]), derive_seed(42, &[1, 2]));
        assert_ne!(derive_seed(42, &[1, 2]), derive_seed(42, &[2, 1]));
        assert_ne!(derive_seed(42, &[1]), derive_seed(43, &[1]));
    }

    #[test]
    fn fmt_f64_round_trips_bit_exact() {
        for &x in &[
            0.0,
            1.0,
            -1.0,
            0.1,
            std::f64::consts::PI,
            1e-300,
            -3.9e15,
            1.0 / 3.0,
        ] {
            let parsed: f64 = fmt_f64(x).parse().unwrap();
            assert_eq!(parsed.to_bits(), x.to_bits(), "round trip failed for {x}");
        }
    }

    #[test]
    fn parallel_map_matches_serial_for_any_job_count() {
        let f = |i: usize| (i as u64).wrapping_mul(2654435761) % 1000;
        let serial = parallel_map_indexed(100, 1, f);
        for jobs in [2, 3, 8, 200] {
            assert_eq!(serial, parallel_map_indexed(100, jobs, f));
        }
    }

    #[test]
    fn cosine_similarity_basics() {
        assert!((cosine_similarity(&[1.0, 0.0], &[1.0, 0.0]) - 1.0).abs() < 1e-15);
        assert!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).abs() < 1e-15);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 1.0]), 0.0);
    }
}
