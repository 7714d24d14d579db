//! Cole-Vishkin 3-coloring of directed paths and cycles.

use crate::algebra::bits_for;
use crate::error::{Error, Result};

/// An item with a unique identifier and at most one successor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CvItem {
    pub id: u64,
    pub succ: Option<usize>,
}

/// One fold: `2k + bit_k(own)` where `k` is the lowest bit index at which
/// `own` differs from the successor's color. Items without a successor use
/// `k = 0`.
pub fn cv_fold(own: u64, succ: Option<u64>) -> u64 {
    let k = match succ {
        Some(s) if s != own => (own ^ s).trailing_zeros() as u64,
        _ => 0,
    };
    2 * k + ((own >> k) & 1)
}

/// Palette bound after one fold of colors below `bound`.
pub fn cv_next_bound(bound: u64) -> u64 {
    2 * bits_for(bound) as u64
}

/// Palette bounds visited by the folding schedule, starting at `bound` and
/// ending at the first value `<= 6`.
pub fn cv_bounds(bound: u64) -> Vec<u64> {
    let mut out = vec![bound];
    let mut b = bound;
    while b > 6 {
        b = cv_next_bound(b);
        out.push(b);
    }
    out
}

/// Smallest color in `{0, 1, 2}` not used by the given neighbors.
pub fn cv_free_color(pred: Option<u64>, succ: Option<u64>) -> u64 {
    (0..3)
        .find(|c| pred != Some(*c) && succ != Some(*c))
        .expect("two neighbors leave a free color among three")
}

/// Proper coloring with colors in `{0, 1, 2}` for a disjoint union of
/// directed paths and cycles. Fails if an item has two predecessors.
pub fn cole_vishkin_3color(items: &[CvItem]) -> Result<Vec<u8>> {
    let n = items.len();
    let mut pred = vec![None; n];
    for (i, it) in items.iter().enumerate() {
        if let Some(s) = it.succ {
            if s >= n || s == i {
                return Err(Error::NotPathForest(format!("item {i} has invalid successor {s}")));
            }
            if pred[s].replace(i).is_some() {
                return Err(Error::NotPathForest(format!("item {s} has two predecessors")));
            }
        }
    }
    let mut ids: Vec<u64> = items.iter().map(|it| it.id).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::NotPathForest("identifiers are not unique".into()));
    }
    let bound = ids.last().map_or(1, |&m| m + 1);
    let mut colors: Vec<u64> = items.iter().map(|it| it.id).collect();
    for _ in 1..cv_bounds(bound).len() {
        colors = (0..n)
            .map(|i| cv_fold(colors[i], items[i].succ.map(|s| colors[s])))
            .collect();
    }
    for target in [5, 4, 3] {
        let snapshot = colors.clone();
        for i in 0..n {
            if snapshot[i] == target {
                colors[i] = cv_free_color(
                    pred[i].map(|p| snapshot[p]),
                    items[i].succ.map(|s| snapshot[s]),
                );
            }
        }
    }
    Ok(colors.into_iter().map(|c| c as u8).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn proper(items: &[CvItem], colors: &[u8]) -> bool {
        items
            .iter()
            .enumerate()
            .all(|(i, it)| it.succ.is_none_or(|s| colors[i] != colors[s]))
    }

    #[test]
    fn single_item() {
        let c = cole_vishkin_3color(&[CvItem { id: 0, succ: None }]).unwrap();
        assert_eq!(c, vec![0]);
    }

    #[test]
    fn two_items() {
        let items = [CvItem { id: 5, succ: Some(1) }, CvItem { id: 9, succ: None }];
        let c = cole_vishkin_3color(&items).unwrap();
        assert!(proper(&items, &c));
        assert!(c.iter().all(|&x| x < 3));
    }

    #[test]
    fn odd_cycle() {
        let items = [
            CvItem { id: 10, succ: Some(1) },
            CvItem { id: 20, succ: Some(2) },
            CvItem { id: 30, succ: Some(0) },
        ];
        let mut c = cole_vishkin_3color(&items).unwrap();
        assert!(proper(&items, &c));
        c.sort_unstable();
        assert_eq!(c, vec![0, 1, 2]);
    }

    #[test]
    fn two_predecessors_rejected() {
        let items = [
            CvItem { id: 1, succ: Some(2) },
            CvItem { id: 2, succ: Some(2) },
            CvItem { id: 3, succ: None },
        ];
        assert!(cole_vishkin_3color(&items).is_err());
    }

    #[test]
    fn fold_separates_successor() {
        for a in 0..64u64 {
            for b in 0..64u64 {
                if a != b {
                    // Both fold against their own successors; a chain a -> b -> c
                    // yields distinct colors for a and b whatever c is.
                    for c in 0..64u64 {
                        if c != b {
                            assert_ne!(cv_fold(a, Some(b)), cv_fold(b, Some(c)));
                        }
                    }
                    assert_ne!(cv_fold(a, Some(b)), cv_fold(b, None));
                }
            }
        }
    }
}
