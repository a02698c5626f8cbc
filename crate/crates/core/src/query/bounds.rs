use num_bigint::BigUint;

fn pow2(e: usize) -> BigUint {
    BigUint::from(1u32) << e
}

/// `n (12 s³ + 2k) 2^(k²)` for `s` reachable states.
pub fn sdd_size_bound(n: usize, k: usize, s: usize) -> BigUint {
    let s = BigUint::from(s);
    BigUint::from(n) * (BigUint::from(12u32) * &s * &s * &s + BigUint::from(2 * k)) * pow2(k * k)
}

/// `n · 2k · s · 2^(k²)`.
pub fn obdd_size_bound(n: usize, k: usize, s: usize) -> BigUint {
    BigUint::from(n) * BigUint::from(2 * k) * BigUint::from(s) * pow2(k * k)
}

/// `s · 2^(|φ|(w+1))`, the most nodes any single variable level may hold.
pub fn level_width_bound(s: usize, formula_size: usize, w: usize) -> BigUint {
    BigUint::from(s) * pow2(formula_size * (w + 1))
}
