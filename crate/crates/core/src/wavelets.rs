//! Compactly supported scaling functions and their dilated tensor products.
//!
//! The Haar function is evaluated analytically on the half-open support
//! `[0, 1)`. The Daubechies-2 function has no closed form; it is tabulated
//! on the dyadic grid `a + i 2^{-r}` of its support `[0, 3]` by iterating the
//! refinement equation, then evaluated by linear interpolation.

use crate::{Error, Result};

/// Default number of dyadic levels for the Daubechies-2 table.
pub const DEFAULT_CASCADE_LEVELS: u32 = 10;

const CASCADE_TOLERANCE: f64 = 1e-8;
const CASCADE_MAX_ITERATIONS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingKind {
    Haar,
    Daubechies2,
}

/// A bounded, compactly supported, orthonormal scaling function on ℝ.
#[derive(Debug, Clone)]
pub struct ScalingFunction {
    kind: ScalingKind,
    support: (f64, f64),
    /// Values at `a + i 2^{-levels}`, `i = 0..=(b-a) 2^levels`. Empty for Haar.
    table: Vec<f64>,
    levels: u32,
}

/// `1` on `[0, 1)`, `0` elsewhere.
pub fn haar_eval(x: f64) -> f64 {
    if (0.0..1.0).contains(&x) {
        1.0
    } else {
        0.0
    }
}

/// The four Daubechies-2 low-pass coefficients, normalized so they sum to √2.
pub fn daubechies2_filter() -> [f64; 4] {
    let s3 = 3f64.sqrt();
    let d = 4.0 * std::f64::consts::SQRT_2;
    [
        (1.0 + s3) / d,
        (3.0 + s3) / d,
        (3.0 - s3) / d,
        (1.0 - s3) / d,
    ]
}

/// Tabulates the Daubechies-2 scaling function on the grid of step `2^{-levels}`.
///
/// Iterates `φ ← √2 Σ_k h_k φ(2x − k)` on the grid, starting from the Haar
/// indicator, until the sup-norm change drops below 1e-8. The starting table
/// takes the value 0 at `x = 0`: the fixed point vanishes there, and a 1 at the
/// left endpoint would only decay like `(√2 h_0)^t ≈ 0.68^t`.
pub fn daubechies2_cascade(levels: u32) -> Result<ScalingFunction> {
    if levels < 6 {
        return Err(Error::InvalidParameter(format!(
            "cascade needs at least 6 levels, got {levels}"
        )));
    }
    if levels > 20 {
        return Err(Error::InvalidParameter(format!(
            "cascade levels {levels} exceed the supported maximum of 20"
        )));
    }
    let per_unit = 1usize << levels;
    let len = 3 * per_unit + 1;
    let h = daubechies2_filter();
    let gain: [f64; 4] = std::array::from_fn(|k| std::f64::consts::SQRT_2 * h[k]);

    let mut current: Vec<f64> = (0..len)
        .map(|i| if i > 0 && i <= per_unit { 1.0 } else { 0.0 })
        .collect();
    let mut next = vec![0.0; len];
    let mut change = f64::INFINITY;
    for _ in 0..CASCADE_MAX_ITERATIONS {
        change = 0.0;
        for (i, out) in next.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, g) in gain.iter().enumerate() {
                // grid index of 2x - k
                let idx = 2 * i as isize - (k * per_unit) as isize;
                if idx >= 0 && (idx as usize) < len {
                    acc += g * current[idx as usize];
                }
            }
            change = f64::max(change, (acc - current[i]).abs());
            *out = acc;
        }
        std::mem::swap(&mut current, &mut next);
        if change < CASCADE_TOLERANCE {
            return Ok(ScalingFunction {
                kind: ScalingKind::Daubechies2,
                support: (0.0, 3.0),
                table: current,
                levels,
            });
        }
    }
    Err(Error::CascadeDidNotConverge {
        iterations: CASCADE_MAX_ITERATIONS,
        change,
    })
}

impl ScalingFunction {
    pub fn haar() -> Self {
        ScalingFunction {
            kind: ScalingKind::Haar,
            support: (0.0, 1.0),
            table: Vec::new(),
            levels: 0,
        }
    }

    /// Daubechies-2 at the default table resolution.
    pub fn daubechies2() -> Result<Self> {
        daubechies2_cascade(DEFAULT_CASCADE_LEVELS)
    }

    pub fn kind(&self) -> ScalingKind {
        self.kind
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Grid step of the table (1 for Haar, whose breakpoints are the integers).
    pub fn step(&self) -> f64 {
        (-(self.levels as f64)).exp2()
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            ScalingKind::Haar => haar_eval(x),
            ScalingKind::Daubechies2 => {
                let (a, b) = self.support;
                if !(a..=b).contains(&x) {
                    return 0.0;
                }
                let pos = (x - a) * (1u64 << self.levels) as f64;
                let i = pos.floor() as usize;
                if i + 1 >= self.table.len() {
                    return *self.table.last().unwrap_or(&0.0);
                }
                let t = pos - i as f64;
                self.table[i] * (1.0 - t) + self.table[i + 1] * t
            }
        }
    }

    /// Trapezoid rule over the table; exact for Haar.
    pub fn integral(&self) -> f64 {
        self.trapezoid(|v| v)
    }

    /// `∫ x φ(x) dx`; for db2 this is `(3 − √3)/2`, the shift that lets
    /// `Σ_k φ(x − k) g(k + M)` reproduce linear `g`.
    pub fn first_moment(&self) -> f64 {
        match self.kind {
            ScalingKind::Haar => 0.5,
            ScalingKind::Daubechies2 => {
                let (a, _) = self.support;
                let h = self.step();
                let n = self.table.len();
                let inner: f64 = (1..n - 1).map(|i| (a + i as f64 * h) * self.table[i]).sum();
                let ends = 0.5 * (a * self.table[0] + (a + (n - 1) as f64 * h) * self.table[n - 1]);
                (inner + ends) * h
            }
        }
    }

    pub fn norm_squared(&self) -> f64 {
        self.trapezoid(|v| v * v)
    }

    /// `∫ φ(x) φ(x − shift) dx` over the table grid.
    pub fn overlap(&self, shift: i64) -> f64 {
        match self.kind {
            ScalingKind::Haar => {
                if shift == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            ScalingKind::Daubechies2 => {
                let per_unit = 1i64 << self.levels;
                let offset = shift * per_unit;
                let len = self.table.len() as i64;
                let mut acc = 0.0;
                for i in 0..len {
                    let j = i - offset;
                    if j < 0 || j >= len {
                        continue;
                    }
                    let w = if i == 0 || i == len - 1 { 0.5 } else { 1.0 };
                    acc += w * self.table[i as usize] * self.table[j as usize];
                }
                acc * self.step()
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self.kind {
            ScalingKind::Haar => 1.0,
            ScalingKind::Daubechies2 => self.table.iter().fold(0.0, |m, v| f64::max(m, v.abs())),
        }
    }

    /// Exact `sup_t Σ_{k∈ℤ} φ(t − k)²`.
    ///
    /// The interpolated function is linear between table nodes, so the sum of
    /// squares is convex on each piece and its maximum sits on a node.
    pub fn square_sum_sup(&self) -> f64 {
        match self.kind {
            ScalingKind::Haar => 1.0,
            ScalingKind::Daubechies2 => {
                let per_unit = 1usize << self.levels;
                (0..per_unit)
                    .map(|i| {
                        self.table
                            .iter()
                            .skip(i)
                            .step_by(per_unit)
                            .map(|v| v * v)
                            .sum::<f64>()
                    })
                    .fold(0.0, f64::max)
            }
        }
    }

    fn trapezoid(&self, g: impl Fn(f64) -> f64) -> f64 {
        match self.kind {
            ScalingKind::Haar => g(1.0),
            ScalingKind::Daubechies2 => {
                let n = self.table.len();
                let inner: f64 = self.table[1..n - 1].iter().map(|&v| g(v)).sum();
                (inner + 0.5 * (g(self.table[0]) + g(self.table[n - 1]))) * self.step()
            }
        }
    }
}

/// Evaluates `2^{j/2} φ(2^j x − k)`, or its 1-periodization on `[0, 1)` when
/// `periodized` is set.
///
/// The periodized value sums `2^{j/2} φ(2^j (x + l) − k)` over all integer
/// `l`, i.e. over every wrap of the argument by `2^j` that meets the support.
pub fn dilated(sf: &ScalingFunction, scale: u32, shift: i64, x: f64, periodized: bool) -> f64 {
    let dil = (1u64 << scale) as f64;
    let amp = dil.sqrt();
    let t = dil * x - shift as f64;
    if !periodized {
        return amp * sf.eval(t);
    }
    let (a, b) = sf.support();
    let mut l = ((a - t) / dil).ceil() as i64;
    let mut acc = 0.0;
    loop {
        let arg = t + l as f64 * dil;
        if arg > b {
            break;
        }
        acc += sf.eval(arg);
        l += 1;
    }
    amp * acc
}

/// Shifts `k` (any integer) with `φ(2^j x − k) ≠ 0` possible, paired with the
/// 1-D factor `2^{j/2} φ(2^j x − k)`. Non-periodized.
pub(crate) fn active_shifts(sf: &ScalingFunction, scale: u32, x: f64, out: &mut Vec<(i64, f64)>) {
    out.clear();
    let dil = (1u64 << scale) as f64;
    let amp = dil.sqrt();
    let t = dil * x;
    let (a, b) = sf.support();
    // 2^j x − k ∈ [a, b]  ⇔  k ∈ [t − b, t − a]
    let lo = (t - b).floor() as i64;
    let hi = (t - a).ceil() as i64;
    for k in lo..=hi {
        let v = sf.eval(t - k as f64);
        if v != 0.0 {
            out.push((k, amp * v));
        }
    }
}

/// Periodized counterpart of [`active_shifts`]: shifts in `0..2^j`.
pub(crate) fn active_shifts_periodic(
    sf: &ScalingFunction,
    scale: u32,
    x: f64,
    out: &mut Vec<(i64, f64)>,
) {
    out.clear();
    let period = 1i64 << scale;
    let mut raw = Vec::with_capacity(8);
    let (a, b) = sf.support();
    let dil = period as f64;
    // x + l must satisfy 2^j (x + l) − k ∈ [a, b] for some k ∈ [0, 2^j)
    let l_lo = (a / dil - x).floor() as i64 - 1;
    let l_hi = ((b + dil) / dil - x).ceil() as i64 + 1;
    for l in l_lo..=l_hi {
        active_shifts(sf, scale, x + l as f64, &mut raw);
        for &(k, v) in &raw {
            if (0..period).contains(&k) {
                match out.iter_mut().find(|(kk, _)| *kk == k) {
                    Some(entry) => entry.1 += v,
                    None => out.push((k, v)),
                }
            }
        }
    }
    out.retain(|(_, v)| *v != 0.0);
    out.sort_by_key(|(k, _)| *k);
}

/// `Φ_{-j,k}(x) = ∏_i 2^{j/2} φ(2^j x_i − k_i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorWavelet {
    pub scale: u32,
    pub shift: Vec<i64>,
    pub periodized: bool,
}

impl TensorWavelet {
    pub fn new(scale: u32, shift: Vec<i64>, periodized: bool) -> Self {
        TensorWavelet {
            scale,
            shift,
            periodized,
        }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn eval(&self, sf: &ScalingFunction, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(x.iter()
            .zip(&self.shift)
            .map(|(&xi, &ki)| dilated(sf, self.scale, ki, xi, self.periodized))
            .product())
    }
}
