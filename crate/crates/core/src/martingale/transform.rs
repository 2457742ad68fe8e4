use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::simcore::Path;
use crate::{Error, Result};

/// Largest horizon accepted by [`doubling_strategy_law`] (2^n sequences).
pub const DOUBLING_MAX_STEPS: usize = 24;

/// (H·X)_n = Σ_{m ≤ n} H_m (X_m − X_{m−1}), with (H·X)_0 = 0.
///
/// `stakes` and `x` must share a grid. `stakes[0]` is never used; the caller
/// guarantees that H_m is a function of X_0..X_{m−1}.
pub fn predictable_transform(stakes: &Path, x: &Path) -> Result<Path> {
    if !stakes.same_grid(x) {
        return Err(invalid!("stakes and process must share a grid"));
    }
    let (h, xs) = (stakes.values(), x.values());
    let mut values = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    values.push(acc);
    for m in 1..xs.len() {
        acc += h[m] * (xs[m] - xs[m - 1]);
        values.push(acc);
    }
    Ok(Path::from_parts(stakes.times().to_vec(), values))
}

/// Stakes of the doubling strategy on a ±1 coin path: bet 2^{m−1} at step
/// m as long as no toss so far has been won, then stop betting.
pub fn doubling_strategy_stakes(coin: &Path) -> Path {
    let xs = coin.values();
    let mut stakes = Vec::with_capacity(xs.len());
    stakes.push(0.0);
    let mut won = false;
    let mut stake = 1.0;
    for m in 1..xs.len() {
        stakes.push(if won { 0.0 } else { stake });
        // Decided from X_0..X_m; used for H_{m+1}.
        won |= xs[m] > xs[m - 1];
        stake *= 2.0;
    }
    Path::from_parts(coin.times().to_vec(), stakes)
}

/// Exact law of the doubling-strategy wealth after `n` fair tosses, by
/// enumerating all 2^n toss sequences through [`predictable_transform`].
pub fn doubling_strategy_law(n: usize) -> Result<Vec<(f64, f64)>> {
    let mut laws = doubling_strategy_laws(n)?;
    Ok(laws.swap_remove(n))
}

/// Exact laws of the doubling-strategy wealth after 0, 1, ..., `n` tosses
/// from one enumeration of the 2^n sequences: every prefix of length m
/// appears 2^(n−m) times, so the marginal frequencies are exact.
pub fn doubling_strategy_laws(n: usize) -> Result<Vec<Vec<(f64, f64)>>> {
    if n > DOUBLING_MAX_STEPS {
        return Err(Error::ResourceLimit(alloc::format!(
            "enumeration limited to n <= {DOUBLING_MAX_STEPS}, got {n}"
        )));
    }
    let times: Vec<f64> = (0..=n).map(|i| i as f64).collect();
    let mut counts: Vec<BTreeMap<i64, u64>> = alloc::vec![BTreeMap::new(); n + 1];
    let mut xs = alloc::vec![0.0; n + 1];
    for mask in 0u64..(1u64 << n) {
        for m in 1..=n {
            xs[m] = xs[m - 1] + if mask >> (m - 1) & 1 == 1 { 1.0 } else { -1.0 };
        }
        let coin = Path::from_parts(times.clone(), xs.clone());
        let wealth = predictable_transform(&doubling_strategy_stakes(&coin), &coin)?;
        for (c, &w) in counts.iter_mut().zip(wealth.values()) {
            *c.entry(w as i64).or_default() += 1;
        }
    }
    let total = (1u64 << n) as f64;
    Ok(counts
        .into_iter()
        .map(|c| {
            c.into_iter()
                .map(|(w, k)| (w as f64, k as f64 / total))
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::simple_walk;
    use crate::simcore::{derive_stream, MomentAccumulator};
    use alloc::vec;

    #[test]
    fn shared_enumeration_matches_direct() {
        let laws = doubling_strategy_laws(9).unwrap();
        for (m, law) in laws.iter().enumerate() {
            assert_eq!(*law, doubling_strategy_law(m).unwrap());
        }
    }

    #[test]
    fn unit_stakes_telescope() {
        let x = Path::on_integer_grid(vec![2.0, 3.5, -1.0, 4.0]).unwrap();
        let h = x.map(|_| 1.0);
        let y = predictable_transform(&h, &x).unwrap();
        for (yi, xi) in y.values().iter().zip(x.values()) {
            assert_eq!(*yi, xi - 2.0);
        }
    }

    #[test]
    fn grid_mismatch_rejected() {
        let x = Path::on_integer_grid(vec![0.0, 1.0, 2.0]).unwrap();
        let h = Path::on_integer_grid(vec![0.0, 1.0]).unwrap();
        assert!(predictable_transform(&h, &x).is_err());
    }

    #[test]
    fn doubling_law_has_two_atoms() {
        for n in 1..=20 {
            let law = doubling_strategy_law(n).unwrap();
            let ruin = 1.0 - 2f64.powi(n as i32);
            let p = 2f64.powi(-(n as i32));
            assert_eq!(law, vec![(ruin, p), (1.0, 1.0 - p)], "n={n}");
        }
        assert!(doubling_strategy_law(25).is_err());
    }

    #[test]
    fn stakes_are_predictable() {
        // Changing the toss at step m must not change stakes up to m.
        let coin = Path::on_integer_grid(vec![0.0, -1.0, -2.0, -1.0, -2.0]).unwrap();
        let stakes = doubling_strategy_stakes(&coin);
        assert_eq!(stakes.values(), &[0.0, 1.0, 2.0, 4.0, 0.0]);
        let mut other = coin.values().to_vec();
        other[3] = -3.0;
        other[4] = -4.0;
        let alt = doubling_strategy_stakes(&Path::on_integer_grid(other).unwrap());
        assert_eq!(&alt.values()[..4], &stakes.values()[..4]);
    }

    #[test]
    fn bounded_strategy_has_zero_mean() {
        // Bet +1 after an up-step, -1 after a down-step: bounded, predictable.
        let mut acc = MomentAccumulator::default();
        for id in 0..100_000 {
            let x = simple_walk(&mut derive_stream(21, id), 50);
            let xs = x.values();
            let h: Vec<f64> = (0..xs.len())
                .map(|m| {
                    if m < 2 {
                        1.0
                    } else {
                        (xs[m - 1] - xs[m - 2]).signum()
                    }
                })
                .collect();
            let hp = Path::new(x.times().to_vec(), h).unwrap();
            acc.push(*predictable_transform(&hp, &x).unwrap().last());
        }
        let e = acc.estimate().unwrap();
        assert!(e.covers(0.0, 0.0), "{e:?}");
    }
}
