//! Small fitting helpers shared by the diagnostics.

/// Least-squares line `y = slope·x + intercept`. Returns `None` for fewer
/// than two distinct abscissae.
pub fn line_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Value at `t = 0` of the quadratic through three points `(t_i, y_i)`.
pub fn extrapolate_to_zero(t: [f64; 3], y: [f64; 3]) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        let mut l = 1.0;
        for j in 0..3 {
            if i != j {
                l *= (0.0 - t[j]) / (t[i] - t[j]);
            }
        }
        acc += l * y[i];
    }
    acc
}

/// Derivative at `x[k]` of the polynomial interpolating all given points.
pub fn lagrange_derivative(x: &[f64], y: &[f64], k: usize) -> f64 {
    let n = x.len();
    let mut d = 0.0;
    for i in 0..n {
        if i == k {
            let s: f64 = (0..n).filter(|&j| j != k).map(|j| 1.0 / (x[k] - x[j])).sum();
            d += y[k] * s;
        } else {
            let mut w = 1.0 / (x[i] - x[k]);
            for j in 0..n {
                if j != i && j != k {
                    w *= (x[k] - x[j]) / (x[i] - x[j]);
                }
            }
            d += y[i] * w;
        }
    }
    d
}
