//! Special functions needed for analytic quadrature tails.

use num_complex::Complex;

use crate::Real;

/// Sine integral `Si(x) = ∫_0^x sin(t)/t dt`.
///
/// Power series below `x = 2`, Lentz continued fraction for `E1(ix)` above.
pub fn sine_integral<T: Real>(x: T) -> T {
    if x < T::zero() {
        return -sine_integral(-x);
    }
    if x == T::zero() {
        return T::zero();
    }
    let eps = T::epsilon();
    let two = T::lit(2.0);
    if x < two {
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut k = 1usize;
        loop {
            let kk = T::from_usize_lossy(2 * k);
            term = -term * x2 / (kk * (kk + T::one()));
            let add = term / (kk + T::one());
            sum = sum + add;
            if add.abs() < eps * sum.abs() {
                break;
            }
            k += 1;
            if k > 200 {
                break;
            }
        }
        return sum;
    }
    let tiny = T::min_positive_value() / eps;
    let one = Complex::new(T::one(), T::zero());
    let mut b = Complex::new(T::one(), x);
    let mut c = Complex::new(T::one() / tiny, T::zero());
    let mut d = one / b;
    let mut h = d;
    for i in 2..1000usize {
        let a = -T::from_usize_lossy((i - 1) * (i - 1));
        b = b + Complex::new(two, T::zero());
        d = one / (d * a + b);
        c = b + one * a / c;
        let del = c * d;
        h = h * del;
        if (del.re - T::one()).abs() + del.im.abs() < eps {
            break;
        }
    }
    h = Complex::new(x.cos(), -x.sin()) * h;
    T::FRAC_PI_2() + h.im
}

/// `∫_L^∞ cos(cλ)/λ² dλ` for `L > 0`.
pub fn cosine_over_square_tail<T: Real>(c: T, lower: T) -> T {
    let c = c.abs();
    if c == T::zero() {
        return T::one() / lower;
    }
    (c * lower).cos() / lower - c * (T::FRAC_PI_2() - sine_integral(c * lower))
}

/// `∫_L^∞ sin(cλ)/λ³ dλ` for `L > 0`.
pub fn sine_over_cube_tail<T: Real>(c: T, lower: T) -> T {
    let two = T::lit(2.0);
    (c * lower).sin() / (two * lower * lower) + c / two * cosine_over_square_tail(c, lower)
}

/// Natural log of the gamma function (Lanczos, g = 7), `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> T {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < T::lit(0.5) {
        // Reflection.
        return (T::PI() / (T::PI() * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(COEF[0]);
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::from_usize_lossy(i));
    }
    let t = x + T::lit(7.5);
    T::lit(0.5) * (T::lit(2.0) * T::PI()).ln() + (x + T::lit(0.5)) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma `P(shape, x)`.
pub fn regularized_gamma_p<T: Real>(shape: T, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    let eps = T::epsilon();
    let log_prefactor = shape * x.ln() - x - ln_gamma(shape);
    if x < shape + T::one() {
        let mut ap = shape;
        let mut del = T::one() / shape;
        let mut sum = del;
        for _ in 0..10_000 {
            ap = ap + T::one();
            del = del * x / ap;
            sum = sum + del;
            if del.abs() < sum.abs() * eps {
                break;
            }
        }
        (sum.ln() + log_prefactor).exp().min(T::one())
    } else {
        // Lentz continued fraction for Q.
        let tiny = T::min_positive_value() / eps;
        let mut b = x + T::one() - shape;
        let mut c = T::one() / tiny;
        let mut d = T::one() / b;
        let mut h = d;
        for i in 1..10_000usize {
            let fi = T::from_usize_lossy(i);
            let an = -fi * (fi - shape);
            b = b + T::lit(2.0);
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = T::one() / d;
            let del = d * c;
            h = h * del;
            if (del - T::one()).abs() < eps {
                break;
            }
        }
        (T::one() - (log_prefactor.exp() * h)).max(T::zero())
    }
}
