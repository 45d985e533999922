//! Studentized range distribution.
//!
//! `P(Q <= q) = ∫ f_s(s) W(q s) ds` where `s = χ_ν / √ν` and
//! `W(w) = k ∫ φ(z) [Φ(z) − Φ(z − w)]^(k−1) dz` is the range CDF of `k`
//! standard normals.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use statrs::function::gamma::ln_gamma;

use super::quadrature::integrate;
use super::special::{normal_cdf, normal_pdf};
use super::StatsError;

const INNER_TOL: f64 = 1e-11;
const OUTER_TOL: f64 = 1e-9;
const QUANTILE_TOL: f64 = 1e-10;
/// Above this the pooled SD is treated as exactly 1.
const LARGE_DF: f64 = 1e5;

fn range_cdf(w: f64, k: usize) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let km1 = (k - 1) as i32;
    let inner = |z: f64| normal_pdf(z) * (normal_cdf(z) - normal_cdf(z - w)).powi(km1);
    let v = k as f64 * integrate(inner, -8.5, 8.5 + w.min(8.5), 6, INNER_TOL);
    v.clamp(0.0, 1.0)
}

fn check(k: usize, df: f64) -> Result<(), StatsError> {
    if k < 2 || !(df >= 1.0) {
        return Err(StatsError::Domain(format!(
            "studentized range k={k}, df={df}"
        )));
    }
    Ok(())
}

/// CDF of the studentized range for `k` means and `df` error degrees of freedom.
pub fn ptukey(q: f64, k: usize, df: f64) -> Result<f64, StatsError> {
    check(k, df)?;
    if q.is_nan() {
        return Err(StatsError::Domain("studentized range q is NaN".into()));
    }
    if q <= 0.0 {
        return Ok(0.0);
    }
    if q.is_infinite() {
        return Ok(1.0);
    }
    if df > LARGE_DF {
        return Ok(range_cdf(q, k));
    }
    let half = df / 2.0;
    let log_norm = half * df.ln() - ln_gamma(half) - (half - 1.0) * 2f64.ln();
    let density = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        (log_norm + (df - 1.0) * s.ln() - df * s * s / 2.0).exp()
    };
    let spread = 12.0 / (2.0 * df).sqrt();
    let lo = (1.0 - spread).max(0.0);
    let hi = 1.0 + spread;
    let v = integrate(|s| density(s) * range_cdf(q * s, k), lo, hi, 8, OUTER_TOL);
    Ok(v.clamp(0.0, 1.0))
}

/// Critical values keyed on `(alpha bits, k, df bits)`.
type QuantileCache = Mutex<HashMap<(u64, usize, u64), f64>>;

fn cache() -> &'static QuantileCache {
    static CACHE: OnceLock<QuantileCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Upper-`alpha` critical value: the `q` with `ptukey(q) = 1 − alpha`.
pub fn qtukey(alpha: f64, k: usize, df: f64) -> Result<f64, StatsError> {
    check(k, df)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::Domain(format!("alpha {alpha} not in (0, 1)")));
    }
    let key = (alpha.to_bits(), k, df.to_bits());
    if let Some(&q) = cache().lock().expect("cache poisoned").get(&key) {
        return Ok(q);
    }
    let target = 1.0 - alpha;
    let f = |q: f64| ptukey(q, k, df).map(|p| p - target);

    let (mut a, mut fa) = (0.0, -target);
    let mut b = 2.0;
    let mut fb = f(b)?;
    while fb < 0.0 {
        a = b;
        fa = fb;
        b *= 2.0;
        if b > 1e6 {
            return Err(StatsError::Domain(format!(
                "no critical value for alpha {alpha}"
            )));
        }
        fb = f(b)?;
    }
    // Illinois-modified regula falsi on the bracket
    let mut side = 0i8;
    let mut q = b;
    for _ in 0..200 {
        q = (a * fb - b * fa) / (fb - fa);
        let fq = f(q)?;
        if (b - a).abs() < QUANTILE_TOL || fq == 0.0 {
            break;
        }
        if fq * fb > 0.0 {
            b = q;
            fb = fq;
            if side == -1 {
                fa /= 2.0;
            }
            side = -1;
        } else {
            a = q;
            fa = fq;
            if side == 1 {
                fb /= 2.0;
            }
            side = 1;
        }
        if (b - a).abs() < QUANTILE_TOL {
            q = 0.5 * (a + b);
            break;
        }
    }
    cache().lock().expect("cache poisoned").insert(key, q);
    Ok(q)
}
