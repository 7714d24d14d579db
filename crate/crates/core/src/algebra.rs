//! Pure color arithmetic: prime selection, pair and triple encodings, and
//! the update rules of the additive-group family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Color = u64;

/// Deterministic trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest prime `>= lower` (inputs below 2 are treated as 2).
pub fn select_prime(lower: u64) -> u64 {
    let mut q = lower.max(2);
    while !is_prime(q) {
        q += 1;
    }
    q
}

/// Number of bits needed to write any value in `[0, m)`; at least 1.
pub fn bits_for(m: u64) -> usize {
    if m <= 2 {
        1
    } else {
        (64 - (m - 1).leading_zeros()) as usize
    }
}

/// Integer ceiling of the square root.
pub fn ceil_sqrt(k: u64) -> u64 {
    let mut r = (k as f64).sqrt() as u64;
    while r * r > k {
        r -= 1;
    }
    while r * r < k {
        r += 1;
    }
    r
}

/// A color `i` viewed as `⟨⌊i/q⌋, i mod q⟩`. Final iff `a = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ColorPair {
    pub a: u64,
    pub b: u64,
    pub q: u64,
}

impl ColorPair {
    pub fn new(a: u64, b: u64, q: u64) -> Result<Self> {
        if a >= q || b >= q {
            return Err(Error::ColorRange {
                value: a.max(b),
                modulus: q,
            });
        }
        Ok(ColorPair { a, b, q })
    }

    pub fn is_final(&self) -> bool {
        self.a == 0
    }
}

pub fn encode_pair(i: Color, q: u64) -> Result<ColorPair> {
    if i >= q * q {
        return Err(Error::ColorRange {
            value: i,
            modulus: q * q,
        });
    }
    Ok(ColorPair {
        a: i / q,
        b: i % q,
        q,
    })
}

pub fn decode_pair(p: ColorPair) -> Color {
    p.a * p.q + p.b
}

/// True iff some neighbor pair shares the second coordinate.
pub fn has_conflict(mine: ColorPair, neighbors: &[ColorPair]) -> Result<bool> {
    let mut hit = false;
    for n in neighbors {
        if n.q != mine.q {
            return Err(Error::MixedModuli(mine.q, n.q));
        }
        hit |= n.b == mine.b;
    }
    Ok(hit)
}

/// One additive-group step.
pub fn ag_update(mine: ColorPair, conflicted: bool) -> ColorPair {
    if conflicted {
        ColorPair {
            b: (mine.b + mine.a) % mine.q,
            ..mine
        }
    } else {
        ColorPair { a: 0, ..mine }
    }
}

/// A color viewed as `⟨c, b, a⟩` base `p`, most significant digit first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ColorTriple {
    pub c: u64,
    pub b: u64,
    pub a: u64,
    pub p: u64,
}

impl ColorTriple {
    pub fn is_final(&self) -> bool {
        self.c == 0 && self.b == 0
    }
}

pub fn encode_triple(i: Color, p: u64) -> Result<ColorTriple> {
    if i >= p * p * p {
        return Err(Error::ColorRange {
            value: i,
            modulus: p * p * p,
        });
    }
    Ok(ColorTriple {
        c: i / (p * p),
        b: (i / p) % p,
        a: i % p,
        p,
    })
}

pub fn decode_triple(t: ColorTriple) -> Color {
    (t.c * t.p + t.b) * t.p + t.a
}

/// One three-coordinate step. `hold` blocks finalization of either stage
/// and forces the circling branch instead.
pub fn three_ag_update(
    mine: ColorTriple,
    b_conflicted: bool,
    a_conflicted: bool,
    hold: bool,
) -> ColorTriple {
    let p = mine.p;
    if mine.c != 0 {
        if b_conflicted || hold {
            ColorTriple {
                b: (mine.b + mine.c) % p,
                ..mine
            }
        } else {
            ColorTriple { c: 0, ..mine }
        }
    } else if a_conflicted || hold {
        ColorTriple {
            a: (mine.a + mine.b) % p,
            ..mine
        }
    } else {
        ColorTriple { b: 0, ..mine }
    }
}

/// One step modulo a possibly composite `n`. The first coordinate is a
/// working flag in `{0, 1}`; `0` is final.
pub fn agn_update(mine: ColorPair, conflicted: bool, hold: bool, n: u64) -> ColorPair {
    if mine.a == 0 {
        mine
    } else if conflicted || hold {
        ColorPair {
            a: 1,
            b: (mine.b + 1) % n,
            q: n,
        }
    } else {
        ColorPair { a: 0, b: mine.b, q: n }
    }
}

/// One arbdefective step: finalize when at most `p` conflicting neighbors
/// carry a different initial color.
pub fn arb_update(mine: ColorPair, cross_color_conflicts: usize, p: usize) -> ColorPair {
    if mine.a == 0 || cross_color_conflicts <= p {
        ColorPair { a: 0, ..mine }
    } else {
        ColorPair {
            b: (mine.a + mine.b) % mine.q,
            ..mine
        }
    }
}
