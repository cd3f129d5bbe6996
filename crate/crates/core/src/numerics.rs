//! Special functions and adaptive quadrature.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{domain, Error, Result};

/// Tolerances and subdivision budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = QuadratureSpec {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        if self.abs_tol.is_nan()
            || self.abs_tol <= 0.0
            || self.rel_tol.is_nan()
            || self.rel_tol <= 0.0
            || self.max_subdivisions == 0
        {
            return domain("quadrature tolerances must be positive and the budget nonzero");
        }
        Ok(())
    }
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("bessel_j0 argument {x} is not finite"));
    }
    Ok(j0(x))
}

pub(crate) fn j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= 8.0 {
        j0_series(x)
    } else if x <= 25.0 {
        j0_trapezoid(x)
    } else {
        j0_hankel(x)
    }
}

fn j0_series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * kf);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && k > 2 {
            break;
        }
    }
    sum
}

// J0(x) = (1/pi) int_0^pi cos(x sin t) dt; the integrand is pi-periodic and
// analytic, so the trapezoid rule converges geometrically once 2M >> x.
fn j0_trapezoid(x: f64) -> f64 {
    let m = ((x + 40.0) / 2.0).ceil() as usize;
    let h = PI / m as f64;
    let sum: f64 = (0..m).map(|j| (x * (h * j as f64).sin()).cos()).sum();
    sum / m as f64
}

fn j0_hankel(x: f64) -> f64 {
    let mut p = 0.0;
    let mut q = 0.0;
    let mut t = 1.0;
    let mut prev = f64::INFINITY;
    for m in 0..60usize {
        if m > 0 {
            let odd = (2 * m - 1) as f64;
            t *= -(odd * odd) / (m as f64 * 8.0 * x);
        }
        if t.abs() > prev {
            break;
        }
        prev = t.abs();
        match m % 4 {
            0 => p += t,
            1 => q += t,
            2 => p -= t,
            _ => q -= t,
        }
        if t.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Sine integral Si(z) = int_0^z sin(t)/t dt.
pub fn sine_integral(z: f64) -> Result<f64> {
    if !z.is_finite() || z < 0.0 {
        return domain(format!(
            "sine_integral needs a finite nonnegative argument, got {z}"
        ));
    }
    si(z)
}

fn si(a: f64) -> Result<f64> {
    let v = if a <= 4.0 {
        si_series(a)
    } else if a <= 100.0 {
        let spec = QuadratureSpec::new(1e-15, 1e-15, 2000)?;
        si_series(4.0) + integrate(|t| t.sin() / t, 4.0, a, &spec)?
    } else {
        si_asymptotic(a)
    };
    Ok(v)
}

fn si_series(z: f64) -> f64 {
    let z2 = z * z;
    let mut pow_fact = z;
    let mut sum = z;
    for k in 1..100 {
        let n = (2 * k) as f64;
        pow_fact *= -z2 / (n * (n + 1.0));
        let term = pow_fact / (n + 1.0);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn si_asymptotic(z: f64) -> f64 {
    let inv2 = 1.0 / (z * z);
    let mut f = 0.0;
    let mut g = 0.0;
    let mut tf = 1.0;
    let mut tg = 1.0;
    for k in 0..40 {
        if k > 0 {
            let m = (2 * k) as f64;
            let ntf = -tf * m * (m - 1.0) * inv2;
            let ntg = -tg * m * (m + 1.0) * inv2;
            if ntf.abs() > tf.abs() || ntg.abs() > tg.abs() {
                break;
            }
            tf = ntf;
            tg = ntg;
        }
        f += tf;
        g += tg;
        if tf.abs() < 1e-18 && tg.abs() < 1e-18 {
            break;
        }
    }
    FRAC_PI_2 - (f / z) * z.cos() - (g * inv2) * z.sin()
}

/// Normalised sinc, sin(pi x)/(pi x), with sinc(0) = 1.
pub fn sinc(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("sinc argument {x} is not finite"));
    }
    Ok(sinc_unchecked(x))
}

pub(crate) fn sinc_unchecked(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    if x == x.trunc() {
        return 0.0;
    }
    let px = PI * x;
    px.sin() / px
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<Panel> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx)? + f(c + dx)?;
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kron * h;
    if !value.is_finite() {
        return domain("integrand is not finite on the interval");
    }
    Ok(Panel {
        a,
        b,
        value,
        error: ((kron - gauss) * h).abs(),
    })
}

/// Adaptive Gauss-Kronrod (7/15) integration of a fallible integrand.
pub fn try_integrate<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    spec.check()?;
    if !a.is_finite() || !b.is_finite() || a > b {
        return domain(format!(
            "integration limits [{a}, {b}] are not a finite ordered pair"
        ));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut heap = BinaryHeap::new();
    let first = gk15(&mut f, a, b)?;
    let mut total = first.value;
    let mut err = first.error;
    heap.push(first);
    loop {
        if err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            return Ok(total);
        }
        if heap.len() >= spec.max_subdivisions {
            return Err(Error::Quadrature {
                estimate: total,
                error_bound: err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Quadrature {
                estimate: total,
                error_bound: err,
            });
        }
        let left = gk15(&mut f, worst.a, mid)?;
        let right = gk15(&mut f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // refresh the running sums occasionally to stop drift
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.error).sum();
        }
    }
}

/// Adaptive Gauss-Kronrod (7/15) integration of `f` over `[a, b]`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(
        |x| {
            let y = f(x);
            if y.is_finite() {
                Ok(y)
            } else {
                domain(format!("integrand is not finite at {x}"))
            }
        },
        a,
        b,
        spec,
    )
}
