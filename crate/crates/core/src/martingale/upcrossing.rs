use crate::error::invalid;
use crate::simcore::Path;
use crate::Result;

/// Number of completed upcrossings of `[a, b]`.
///
/// Two-state scan: wait for a value ≤ a, then for a value ≥ b; each
/// completed pair counts once.
pub fn upcrossings(path: &Path, a: f64, b: f64) -> Result<usize> {
    if !(a < b) {
        return Err(invalid!(
            "upcrossing band needs a < b (got a = {a}, b = {b})"
        ));
    }
    let mut below = false;
    let mut count = 0;
    for &x in path.values() {
        if !below {
            below = x <= a;
        } else if x >= b {
            count += 1;
            below = false;
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn hand_enumerated_ladder() {
        let p = Path::on_integer_grid(vec![0.0, 3.0, 1.0, 4.0, 0.0, 5.0]).unwrap();
        assert_eq!(upcrossings(&p, 0.5, 2.5).unwrap(), 2);
    }

    #[test]
    fn monotone_path_crosses_at_most_once() {
        let p = Path::on_integer_grid((0..100).map(f64::from).collect()).unwrap();
        assert_eq!(upcrossings(&p, 10.0, 20.0).unwrap(), 1);
        assert_eq!(upcrossings(&p, -5.0, 20.0).unwrap(), 0);
    }

    #[test]
    fn degenerate_band_rejected() {
        let p = Path::on_integer_grid(vec![0.0]).unwrap();
        assert!(upcrossings(&p, 1.0, 1.0).is_err());
    }
}
