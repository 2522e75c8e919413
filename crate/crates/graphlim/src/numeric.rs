//! Small numeric helpers shared across modules.

/// Neumaier-compensated accumulator. Used wherever sums must not depend
/// on chunking (parallel trial aggregation, long enumeration sums).
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn kahan_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = Kahan::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// k-th elementary symmetric polynomial of `xs`, by the usual
/// one-pass DP. e_0 = 1.
pub fn elementary_symmetric(xs: &[f64], k: usize) -> f64 {
    if k > xs.len() {
        return 0.0;
    }
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &x in xs {
        for j in (1..=k).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e[k]
}

/// Falling factorial (n)_k = n(n-1)...(n-k+1) as f64.
pub fn falling_factorial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).map(|i| (n - i) as f64).product()
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Formats with 15 significant digits in plain decimal notation.
pub fn fmt_sig15(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000000000".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (14 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

/// Sample mean and standard error of a slice.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = kahan_sum(xs.iter().copied()) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = kahan_sum(xs.iter().map(|x| (x - mean) * (x - mean)));
    let var = ss / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mean = kahan_sum(xs.iter().copied()) / n as f64;
    kahan_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n as f64 - 1.0)
}
