//! Quadrature on truncated half-lines.
//!
//! Adaptive Gauss-Kronrod (7/15) on finite intervals, log-spaced panels for
//! integrands that vary over many decades, and power-law extrapolation of the
//! pieces below and above a truncation window.

use crate::sum::fsum;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod integral of `f` over `[a, b]` to absolute-or-relative `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let mut done = Vec::new();
    let mut stack = vec![(a, b, 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = gk15(&f, lo, hi);
        if err <= tol * val.abs().max(1e-300) || err < 1e-300 || depth >= 48 || hi - lo <= 1e-15 * hi.abs() {
            done.push(val);
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    fsum(done)
}

/// Integral over `[a, b]` (`0 < a < b`) using panels that are uniform in
/// `ln y`, `per_decade` of them per decade, each refined adaptively. Extra
/// `breaks` (discontinuities of `f`) are inserted as panel boundaries.
pub fn integrate_log<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, per_decade: usize, breaks: &[f64]) -> f64 {
    if !(b > a) || a <= 0.0 {
        return 0.0;
    }
    let decades = (b / a).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    let mut edges: Vec<f64> = (0..=n)
        .map(|i| a * (b / a).powf(i as f64 / n as f64))
        .collect();
    edges[0] = a;
    edges[n] = b;
    for &br in breaks {
        if br > a && br < b {
            edges.push(br);
        }
    }
    edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
    edges.dedup();
    // substitute y = e^s on each panel: smooth for power-law integrands
    let g = |s: f64| {
        let y = s.exp();
        f(y) * y
    };
    fsum(edges.windows(2).map(|w| integrate(&g, w[0].ln(), w[1].ln(), 1e-12)))
}

/// A window integral together with power-law estimates of the pieces outside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedIntegral {
    pub head: f64,
    pub window: f64,
    pub tail: f64,
}

impl TruncatedIntegral {
    pub fn total(&self) -> f64 {
        self.head + self.window + self.tail
    }

    /// Fraction of the total coming from the extrapolated tail and head.
    pub fn outside_share(&self) -> f64 {
        let t = self.total();
        if t == 0.0 {
            0.0
        } else if !t.is_finite() {
            1.0
        } else {
            (self.head + self.tail) / t
        }
    }
}

/// Local power-law exponent of `f` between `x0` and `x1`.
pub fn power_exponent(f0: f64, f1: f64, x0: f64, x1: f64) -> Option<f64> {
    if f0 > 0.0 && f1 > 0.0 && f0.is_finite() && f1.is_finite() {
        Some((f1 / f0).ln() / (x1 / x0).ln())
    } else {
        None
    }
}

/// Estimate of `∫_hi^∞ f` from the decay of `f` over the last decade below `hi`.
/// Returns infinity when the fitted exponent is `>= -1`.
pub fn tail_estimate<F: Fn(f64) -> f64>(f: &F, hi: f64) -> f64 {
    let f1 = f(hi);
    if f1 == 0.0 {
        return 0.0;
    }
    match power_exponent(f(hi / 10.0), f1, hi / 10.0, hi) {
        Some(g) if g < -1.0 - 1e-9 => f1 * hi / (-g - 1.0),
        Some(_) => f64::INFINITY,
        None => 0.0,
    }
}

/// Estimate of `∫_0^lo f` from the behaviour of `f` over the first decade above `lo`.
pub fn head_estimate<F: Fn(f64) -> f64>(f: &F, lo: f64) -> f64 {
    let f0 = f(lo);
    if f0 == 0.0 {
        return 0.0;
    }
    match power_exponent(f0, f(lo * 10.0), lo, lo * 10.0) {
        Some(g) if g > -1.0 + 1e-9 => f0 * lo / (g + 1.0),
        Some(_) => f64::INFINITY,
        None => f0 * lo,
    }
}

/// `∫_0^∞ f` as window part on `[lo, hi]` plus extrapolated head and tail.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, per_decade: usize, breaks: &[f64]) -> TruncatedIntegral {
    TruncatedIntegral {
        head: head_estimate(&f, lo),
        window: integrate_log(&f, lo, hi, per_decade, breaks),
        tail: tail_estimate(&f, hi),
    }
}

/// `n + 1` log-uniform edges from `lo` to `hi` with exact end points.
pub fn log_edges(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n > 0);
    let (l0, l1) = (lo.ln(), hi.ln());
    let mut e: Vec<f64> = (0..=n)
        .map(|i| (l0 + (l1 - l0) * i as f64 / n as f64).exp())
        .collect();
    e[0] = lo;
    e[n] = hi;
    e
}
