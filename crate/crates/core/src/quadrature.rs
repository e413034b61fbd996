//! Globally adaptive Gauss–Kronrod (10/21 point) quadrature.

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

// Tabulated nodes and weights, kept at their published precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_977_272_940,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Stopping rule for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-12, abs: 0.0, max_intervals: 4000 }
    }
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Tolerance { rel, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Piece {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = libm::fabs(fc) * WGK[10];
    let mut fvals = [0.0f64; 21];
    fvals[10] = fc;
    for k in 0..10 {
        let dx = half * XGK[k];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fvals[k] = f1;
        fvals[20 - k] = f2;
        kronrod += WGK[k] * (f1 + f2);
        abs_sum += WGK[k] * (libm::fabs(f1) + libm::fabs(f2));
        if k % 2 == 1 {
            gauss += WG[k / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * libm::fabs(fc - mean);
    for k in 0..10 {
        asc += WGK[k] * (libm::fabs(fvals[k] - mean) + libm::fabs(fvals[20 - k] - mean));
    }
    let value = kronrod * half;
    let asc = asc * libm::fabs(half);
    let abs_val = abs_sum * libm::fabs(half);
    let mut error = libm::fabs((kronrod - gauss) * half);
    if asc != 0.0 && error != 0.0 {
        let scale = libm::pow(200.0 * error / asc, 1.5);
        error = if scale < 1.0 { asc * scale } else { asc };
    }
    let round_floor = 50.0 * f64::EPSILON * abs_val;
    if abs_val > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && error < round_floor {
        error = round_floor;
    }
    Piece { a, b, value, error }
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Estimate {
    integrate_pieces(&f, &[a, b], tol)
}

/// Integrates over `[points[0], points[last]]`, starting from the given
/// subdivision. Useful when the caller knows where the integrand peaks.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: &F, points: &[f64], tol: Tolerance) -> Estimate {
    let mut heap = BinaryHeap::new();
    let mut value = 0.0;
    let mut error = 0.0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            let p = gk21(f, w[0], w[1]);
            value += p.value;
            error += p.error;
            heap.push(p);
        }
    }
    let mut count = heap.len();
    loop {
        let target = tol.abs.max(tol.rel * libm::fabs(value));
        if error <= target {
            return Estimate { value, error, converged: true };
        }
        if count >= tol.max_intervals {
            return Estimate { value, error, converged: false };
        }
        let Some(worst) = heap.pop() else {
            return Estimate { value, error, converged: true };
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval below floating-point resolution; accept it.
            return Estimate { value, error, converged: false };
        }
        let left = gk21(f, worst.a, mid);
        let right = gk21(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        count += 1;
    }
}

/// Integrates `f` over `[a, ∞)` through the map x = a + t/(1-t).
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: Tolerance) -> Estimate {
    let g = |t: f64| {
        let s = 1.0 - t;
        let x = a + t / s;
        let fx = f(x);
        if fx == 0.0 {
            0.0
        } else {
            fx / (s * s)
        }
    };
    integrate_pieces(&g, &[0.0, 0.5, 0.9, 0.99, 1.0], tol)
}
