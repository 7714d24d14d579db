//! Polynomial color reduction: single steps, forbidden-set steps, the
//! interval pipeline used by the self-stabilizing layer, and Cole-Vishkin.

pub mod cv;

use serde::{Deserialize, Serialize};

use crate::algebra::{is_prime, Color};
use crate::error::{Error, Result};

/// Field size and degree of one polynomial reduction step.
///
/// A color `c < q^(d+1)` is read as `d+1` base-`q` digits; the most
/// significant digit is the constant coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinialParams {
    pub q: u64,
    pub d: u32,
    /// Source palette size.
    pub m: u64,
    pub delta: u64,
    /// Largest forbidden set the step tolerates.
    pub forbidden: u64,
}

impl LinialParams {
    /// Target palette size `q²`.
    pub fn target(&self) -> u64 {
        self.q * self.q
    }

    pub fn shrinks(&self) -> bool {
        self.target() < self.m
    }

    /// Number of distinct polynomials, `q^(d+1)`.
    pub fn capacity(&self) -> u64 {
        pow_sat(self.q, self.d + 1)
    }

    /// Coefficients of the polynomial of `color`, constant term first.
    pub fn coefficients(&self, color: Color) -> Vec<u64> {
        let mut digits = Vec::with_capacity(self.d as usize + 1);
        let mut c = color;
        for _ in 0..=self.d {
            digits.push(c % self.q);
            c /= self.q;
        }
        digits.reverse();
        digits
    }

    /// Evaluates the polynomial of `color` at `x` over `GF(q)`.
    pub fn eval(&self, color: Color, x: u64) -> u64 {
        self.coefficients(color)
            .iter()
            .rev()
            .fold(0, |acc, &coef| (acc * x + coef) % self.q)
    }
}

fn pow_sat(base: u64, exp: u32) -> u64 {
    base.checked_pow(exp).unwrap_or(u64::MAX)
}

/// Smallest `d >= 1` with `q^(d+1) >= m`.
fn min_degree(q: u64, m: u64) -> u32 {
    let mut d = 1;
    while pow_sat(q, d + 1) < m {
        d += 1;
    }
    d
}

/// Smallest prime `q` admitting some `d >= 1` with `q^(d+1) >= m` and
/// `q >= d·Δ + 2F + 1`; `d` is the minimal degree for that `q`.
pub fn linial_params(m: u64, delta: u64, forbidden: u64) -> LinialParams {
    params_with_weight(m, delta, forbidden, 2)
}

fn params_with_weight(m: u64, delta: u64, forbidden: u64, weight: u64) -> LinialParams {
    let mut q = 2;
    loop {
        if is_prime(q) {
            let d = min_degree(q, m);
            if q > d as u64 * delta + weight * forbidden {
                return LinialParams {
                    q,
                    d,
                    m,
                    delta,
                    forbidden,
                };
            }
        }
        q += 1;
    }
}

/// Final step tolerating `2Δ` forbidden colors, each costing `weight`
/// evaluation points. The degree is at least 2 and grows when a degree-2
/// field could not hold `m` polynomials.
fn final_params(m: u64, delta: u64, weight: u64) -> LinialParams {
    let forbidden = 2 * delta;
    let mut q = 2;
    loop {
        if is_prime(q) {
            let d = min_degree(q, m).max(2);
            if q > d as u64 * delta + weight * forbidden {
                return LinialParams {
                    q,
                    d,
                    m,
                    delta,
                    forbidden,
                };
            }
        }
        q += 1;
    }
}

/// Maps `my_color` to `x·q + g(x)` for the smallest `x` where its polynomial
/// differs from every neighbor polynomial and the result is not forbidden.
pub fn linial_step(
    my_color: Color,
    neighbor_colors: &[Color],
    forbidden: &[Color],
    params: &LinialParams,
) -> Result<Color> {
    let cap = params.capacity();
    if my_color >= cap {
        return Err(Error::ColorRange {
            value: my_color,
            modulus: cap,
        });
    }
    if neighbor_colors.contains(&my_color) {
        return Err(Error::ImproperInput(format!(
            "color {my_color} is shared with a neighbor"
        )));
    }
    if let Some(&c) = neighbor_colors.iter().find(|&&c| c >= cap) {
        return Err(Error::ColorRange {
            value: c,
            modulus: cap,
        });
    }
    let mine = params.coefficients(my_color);
    let theirs: Vec<Vec<u64>> = neighbor_colors
        .iter()
        .map(|&c| params.coefficients(c))
        .collect();
    let q = params.q;
    let eval = |coefs: &[u64], x: u64| coefs.iter().rev().fold(0, |acc, &c| (acc * x + c) % q);
    for x in 0..q {
        let gx = eval(&mine, x);
        let candidate = x * q + gx;
        if theirs.iter().all(|t| eval(t, x) != gx) && !forbidden.contains(&candidate) {
            return Ok(candidate);
        }
    }
    Err(Error::NoValidPoint {
        color: my_color,
        field: q,
    })
}

/// Smallest prime `q` (with minimal `d`) such that `q^(d+1) >= m` and
/// `q·p > d·Δ`, so that some point has at most `p − 1` agreeing neighbors.
pub fn defective_params(m: u64, delta: u64, p: u64) -> LinialParams {
    let mut q = 2;
    loop {
        if is_prime(q) {
            let d = min_degree(q, m);
            if q * p > d as u64 * delta {
                return LinialParams {
                    q,
                    d,
                    m,
                    delta,
                    forbidden: 0,
                };
            }
        }
        q += 1;
    }
}

/// Defect-tolerant step: the smallest `x` at which at most `p − 1` neighbor
/// polynomials agree with the own polynomial.
pub fn defective_step(
    my_color: Color,
    neighbor_colors: &[Color],
    p: u64,
    params: &LinialParams,
) -> Result<Color> {
    let q = params.q;
    for x in 0..q {
        let gx = params.eval(my_color, x);
        let agree = neighbor_colors
            .iter()
            .filter(|&&c| params.eval(c, x) == gx)
            .count() as u64;
        if agree < p {
            return Ok(x * q + gx);
        }
    }
    Err(Error::NoValidPoint {
        color: my_color,
        field: q,
    })
}

/// Chain of plain reduction steps from palette `m` while the palette shrinks.
pub fn reduction_chain(m: u64, delta: u64) -> Vec<LinialParams> {
    let mut chain = Vec::new();
    let mut m = m;
    loop {
        let p = linial_params(m, delta, 0);
        if !p.shrinks() {
            return chain;
        }
        m = p.target();
        chain.push(p);
    }
}

/// Consecutive color intervals `I_0 .. I_r`. `I_r` holds the ID-based
/// colors; `I_0 = [0, t_1)` is where the additive-group stage runs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalTable {
    pub n_bound: u64,
    pub delta: u64,
    /// Interval sizes `t_1, .., t_r, n_bound`.
    pub sizes: Vec<u64>,
    /// First color of each interval.
    pub starts: Vec<u64>,
    /// `steps[j-1]` maps offsets in `I_j` to offsets in `I_{j-1}`.
    pub steps: Vec<LinialParams>,
}

impl IntervalTable {
    pub fn r(&self) -> usize {
        self.sizes.len() - 1
    }

    /// Size of `I_{i-1}`, i.e. `t_i` for `1 <= i <= r`.
    pub fn t(&self, i: usize) -> u64 {
        self.sizes[i - 1]
    }

    /// One past the largest valid color.
    pub fn total(&self) -> u64 {
        self.starts[self.r()] + self.sizes[self.r()]
    }

    /// Initial (reset) color of the vertex with the given ID.
    pub fn id_color(&self, id: u64) -> Color {
        self.starts[self.r()] + id
    }

    /// Index `j` of the interval containing `color`, if any.
    pub fn interval_of(&self, color: Color) -> Option<usize> {
        if color >= self.total() {
            return None;
        }
        Some(self.starts.partition_point(|&s| s <= color) - 1)
    }

    /// Grows `I_0` to `size` colors and shifts the higher intervals up.
    pub fn widen_base(&mut self, size: u64) {
        if size > self.sizes[0] {
            let shift = size - self.sizes[0];
            self.sizes[0] = size;
            for s in &mut self.starts[1..] {
                *s += shift;
            }
        }
    }

    /// Field size of the `I_0` stage, `√t_1`.
    pub fn q0(&self) -> u64 {
        self.steps[0].q
    }
}

/// Worst-case interval table computable from `(n_bound, Δ)` alone. The last
/// step uses degree 2 and tolerates `2Δ` forbidden colors at two points each.
pub fn interval_table(n_bound: u64, delta: u64) -> IntervalTable {
    build_table(n_bound, delta, 2)
}

/// Variant whose last step charges one point per forbidden color, giving a
/// smaller `I_0`. The chain is cut where `I_0` comes out smallest, so `t_1`
/// may exceed `t_2`.
pub fn compact_interval_table(n_bound: u64, delta: u64) -> IntervalTable {
    let chain = reduction_chain(n_bound, delta);
    let (kept, last) = (0..=chain.len())
        .map(|k| {
            let source = if k == 0 { n_bound } else { chain[k - 1].target() };
            (k, final_params(source, delta, 1))
        })
        .min_by_key(|(k, p)| (p.target(), *k))
        .expect("at least one cut");
    assemble(n_bound, delta, &chain[..kept], last)
}

fn build_table(n_bound: u64, delta: u64, weight: u64) -> IntervalTable {
    let chain = reduction_chain(n_bound, delta);
    let mut kept = chain.len();
    let last = loop {
        let source = if kept == 0 {
            n_bound
        } else {
            chain[kept - 1].target()
        };
        let last = final_params(source, delta, weight);
        let next_kept = chain[..kept]
            .iter()
            .take_while(|p| p.target() > last.target())
            .count();
        if next_kept == kept {
            break last;
        }
        kept = next_kept;
    };
    assemble(n_bound, delta, &chain[..kept], last)
}

fn assemble(n_bound: u64, delta: u64, chain: &[LinialParams], last: LinialParams) -> IntervalTable {
    // Palettes from the smallest interval upwards.
    let mut steps = vec![last];
    steps.extend(chain.iter().rev().copied());
    let mut sizes: Vec<u64> = steps.iter().map(LinialParams::target).collect();
    sizes.push(n_bound);
    let mut starts = Vec::with_capacity(sizes.len());
    let mut acc = 0;
    for s in &sizes {
        starts.push(acc);
        acc += s;
    }
    IntervalTable {
        n_bound,
        delta,
        sizes,
        starts,
        steps,
    }
}

/// One interval-descent step: reduces `my_color ∈ I_j` (`j >= 1`) into
/// `I_{j-1}`, avoiding same-interval neighbors and, for `j = 1`, the
/// forbidden colors in `I_0`.
pub fn mod_linial(
    my_color: Color,
    same_interval: &[Color],
    forbidden: &[Color],
    table: &IntervalTable,
) -> Result<Color> {
    let j = table
        .interval_of(my_color)
        .ok_or(Error::ColorRange {
            value: my_color,
            modulus: table.total(),
        })?;
    if j == 0 {
        return Err(Error::Params(
            "interval descent called on a color already in I_0".into(),
        ));
    }
    if j >= 2 && !forbidden.is_empty() {
        return Err(Error::Params(
            "forbidden colors are only accepted when descending into I_0".into(),
        ));
    }
    let base = table.starts[j];
    let mut offsets = Vec::with_capacity(same_interval.len());
    for &c in same_interval {
        if table.interval_of(c) != Some(j) {
            return Err(Error::Params(format!("neighbor color {c} not in I_{j}")));
        }
        offsets.push(c - base);
    }
    let lower = table.starts[j - 1];
    let out = linial_step(my_color - base, &offsets, forbidden, &table.steps[j - 1])?;
    Ok(lower + out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_polynomial_maps_to_zero() {
        let p = linial_params(25, 2, 0);
        assert_eq!(linial_step(0, &[], &[], &p).unwrap(), 0);
    }

    #[test]
    fn digits_most_significant_first() {
        let p = LinialParams {
            q: 5,
            d: 1,
            m: 25,
            delta: 2,
            forbidden: 0,
        };
        assert_eq!(p.coefficients(7), vec![1, 2]);
        assert_eq!(p.eval(7, 0), 1);
        assert_eq!(p.eval(7, 3), 2);
    }

    #[test]
    fn improper_input_rejected() {
        let p = linial_params(25, 2, 0);
        assert!(matches!(
            linial_step(3, &[3, 4], &[], &p),
            Err(Error::ImproperInput(_))
        ));
    }

    #[test]
    fn final_step_needs_six_delta_plus_one() {
        for delta in 1..20 {
            let p = final_params(1, delta, 2);
            assert!(p.q > 6 * delta);
            assert_eq!(p.d, 2);
        }
    }

    #[test]
    fn final_step_raises_degree_for_large_sources() {
        let p = final_params(1 << 30, 16, 2);
        assert!(p.d > 2);
        assert!(p.capacity() >= 1 << 30);
        assert!(p.q > p.d as u64 * 16 + 64);
        assert!(p.target() < 200 * 200);
    }

    #[test]
    fn table_for_sixteen_vertices() {
        let t = interval_table(16, 2);
        assert_eq!(t.t(1), 169);
        assert_eq!(t.r(), 1);
        assert_eq!(t.sizes, vec![169, 16]);
        assert_eq!(t.id_color(3), 172);
        assert_eq!(t.interval_of(168), Some(0));
        assert_eq!(t.interval_of(169), Some(1));
        assert_eq!(t.interval_of(185), None);
    }

    #[test]
    fn descent_rejects_i0() {
        let t = interval_table(16, 2);
        assert!(mod_linial(5, &[], &[], &t).is_err());
    }
}
