//! Gauss-Legendre rules and composite panel-doubling integration.

use std::sync::OnceLock;

use crate::exec::Exec;
use crate::Error;

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> GaussLegendre {
        assert!(n >= 1, "a quadrature rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            // Tricomi initial guess, then Newton on P_n
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// The 16-point rule used for all line integrals.
    pub fn sixteen() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(16))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates over `[a, b]`, returning `(integral, integral of |f|)`.
    pub fn integrate<F>(&self, a: f64, b: f64, f: F) -> Result<(f64, f64), Error>
    where
        F: Fn(f64) -> Result<f64, Error>,
    {
        self.integrate_scaled(a, b, |t| f(t).map(|v| (v, v.abs())))
    }

    /// Like [`GaussLegendre::integrate`] for an integrand that also reports
    /// its magnitude, returning `(integral, integral of magnitude)`.
    pub fn integrate_scaled<F>(&self, a: f64, b: f64, f: F) -> Result<(f64, f64), Error>
    where
        F: Fn(f64) -> Result<(f64, f64), Error>,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        let mut abs_sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let (v, size) = f(mid + half * x)?;
            sum += w * v;
            abs_sum += w * size;
        }
        Ok((sum * half, abs_sum * half.abs()))
    }
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (z * p1 - p0) / (z * z - 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Adaptive {
    /// Accept when the change between levels is at most `rtol` times the
    /// integral of the integrand's magnitude.
    pub rtol: f64,
    pub initial_panels: usize,
    pub max_panels: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Adaptive {
            rtol: crate::DEFAULT_RTOL,
            initial_panels: 8,
            max_panels: 1 << 14,
        }
    }
}

impl Adaptive {
    pub fn with_rtol(rtol: f64) -> Adaptive {
        Adaptive {
            rtol,
            ..Adaptive::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Integral of the integrand's magnitude.
    pub abs_value: f64,
    pub panels: usize,
    /// Change between the last two refinement levels.
    pub change: f64,
}

fn composite<F>(f: &F, a: f64, b: f64, panels: usize, exec: Exec) -> Result<(f64, f64), Error>
where
    F: Fn(f64) -> Result<(f64, f64), Error> + Sync + Send,
{
    let rule = GaussLegendre::sixteen();
    let h = (b - a) / panels as f64;
    let parts = exec.map_range(panels, |i| {
        let lo = a + h * i as f64;
        let hi = if i + 1 == panels { b } else { lo + h };
        rule.integrate_scaled(lo, hi, f)
    });
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    for part in parts {
        let (s, a) = part?;
        sum += s;
        abs_sum += a;
    }
    Ok((sum, abs_sum))
}

/// Composite 16-point Gauss-Legendre on `[a, b]`, doubling the panel count
/// until successive levels agree to `rtol` relative to the integral of `|f|`.
pub fn integrate_adaptive<F>(
    f: F,
    a: f64,
    b: f64,
    opts: Adaptive,
    exec: Exec,
) -> Result<Quadrature, Error>
where
    F: Fn(f64) -> Result<f64, Error> + Sync + Send,
{
    integrate_adaptive_scaled(|t| f(t).map(|v| (v, v.abs())), a, b, opts, exec)
}

/// Panel doubling for an integrand returning `(value, magnitude)`. The
/// magnitude sets the convergence scale; for a sum of terms that cancel,
/// the sum of their absolute values keeps roundoff from being mistaken for
/// signal.
pub fn integrate_adaptive_scaled<F>(
    f: F,
    a: f64,
    b: f64,
    opts: Adaptive,
    exec: Exec,
) -> Result<Quadrature, Error>
where
    F: Fn(f64) -> Result<(f64, f64), Error> + Sync + Send,
{
    let mut panels = opts.initial_panels.max(1);
    let (mut prev, _) = composite(&f, a, b, panels, exec)?;
    let mut change = f64::INFINITY;
    while panels < opts.max_panels {
        panels *= 2;
        let (value, abs_value) = composite(&f, a, b, panels, exec)?;
        change = (value - prev).abs();
        if change <= opts.rtol * abs_value {
            return Ok(Quadrature {
                value,
                abs_value,
                panels,
                change,
            });
        }
        prev = value;
    }
    Err(Error::QuadratureNonConvergence { panels, change })
}
