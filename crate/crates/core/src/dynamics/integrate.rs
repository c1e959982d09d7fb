use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::linalg::Mat;
use crate::manifold::Manifold;

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Classical RK4 in ambient coordinates; stage points and the result are
    /// projected back onto the manifold.
    #[default]
    ProjectedRk4,
    /// `x ← exp(x, h·f)`; second-order systems transport the velocity along
    /// the step geodesic.
    GeodesicEuler,
}

/// Largest allowed constraint residual of a stored sample.
pub const MAX_DRIFT: f64 = 1e-8;

/// Uniformly sampled solution of a first- or second-order system.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub manifold: Manifold,
    pub h: f64,
    pub times: Vec<f64>,
    pub points: Vec<Mat>,
    /// Present for second-order and tangent-bundle systems.
    pub velocities: Option<Vec<Mat>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    pub fn velocity(&self, i: usize) -> Option<&Mat> {
        self.velocities.as_ref().map(|v| &v[i])
    }

    /// Keep every `stride`-th sample.
    pub fn subsampled(&self, stride: usize) -> Trajectory {
        let pick = |v: &Vec<Mat>| v.iter().step_by(stride).cloned().collect();
        Trajectory {
            manifold: self.manifold,
            h: self.h * stride as f64,
            times: self.times.iter().step_by(stride).copied().collect(),
            points: pick(&self.points),
            velocities: self.velocities.as_ref().map(pick),
        }
    }

    /// State at time `t`: exact on the grid, cubic Hermite (second order) or
    /// linear (first order) interpolation between samples, then projected.
    pub fn state_at(&self, t: f64) -> Result<(Mat, Option<Mat>)> {
        let (t0, t1) = (self.start(), self.end());
        let slack = 1e-9 * self.h;
        if t < t0 - slack || t > t1 + slack {
            return Err(GeoError::DegenerateInput(format!(
                "t = {t} outside the sampled span [{t0}, {t1}]"
            )));
        }
        let x = ((t - t0) / self.h).clamp(0.0, (self.len() - 1) as f64);
        let i = x.round() as usize;
        if (x - i as f64).abs() * self.h <= slack {
            return Ok((self.points[i].clone(), self.velocity(i).cloned()));
        }
        let i = (x.floor() as usize).min(self.len() - 2);
        let s = x - i as f64;
        let m = &self.manifold;
        let (p0, p1) = (&self.points[i], &self.points[i + 1]);
        match &self.velocities {
            None => Ok((m.project_point(&(p0 * (1.0 - s) + p1 * s)), None)),
            Some(vs) => {
                let (v0, v1) = (&vs[i], &vs[i + 1]);
                let h = self.h;
                let (s2, s3) = (s * s, s * s * s);
                let pos = p0 * (2.0 * s3 - 3.0 * s2 + 1.0)
                    + v0 * (h * (s3 - 2.0 * s2 + s))
                    + p1 * (-2.0 * s3 + 3.0 * s2)
                    + v1 * (h * (s3 - s2));
                let vel = (p0 * (6.0 * s2 - 6.0 * s) + p1 * (-6.0 * s2 + 6.0 * s)) / h
                    + v0 * (3.0 * s2 - 4.0 * s + 1.0)
                    + v1 * (3.0 * s2 - 2.0 * s);
                let q = m.project_point(&pos);
                let v = m.project_tangent(&q, &vel);
                Ok((q, Some(v)))
            }
        }
    }
}

fn step_count(t_span: (f64, f64), h: f64) -> Result<usize> {
    let (t0, t1) = t_span;
    if !(h > 0.0) || !(t1 > t0) {
        return Err(GeoError::DegenerateInput(format!(
            "need h > 0 and t1 > t0, got h = {h}, span [{t0}, {t1}]"
        )));
    }
    let n = ((t1 - t0) / h).round();
    if ((n * h) - (t1 - t0)).abs() > 1e-9 * (t1 - t0) {
        return Err(GeoError::DegenerateInput(format!(
            "step {h} does not divide the span [{t0}, {t1}]"
        )));
    }
    Ok(n as usize)
}

fn check_start(m: &Manifold, x0: &Mat) -> Result<()> {
    m.check_shape(x0)?;
    let r = m.constraint_residual(x0);
    if r > MAX_DRIFT {
        return Err(GeoError::ConstraintViolation(format!(
            "initial point off the manifold by {r:.3e}"
        )));
    }
    Ok(())
}

fn check_step(m: &Manifold, p: &Mat, v: &Mat, h: f64) -> Result<()> {
    let displacement = h * m.norm(p, v);
    let guard = 0.5 * m.injectivity_guard();
    if !(displacement < guard) {
        return Err(GeoError::StepTooLarge {
            displacement,
            guard,
        });
    }
    Ok(())
}

fn check_drift(m: &Manifold, p: &Mat, time: f64) -> Result<()> {
    let drift = m.constraint_residual(p);
    if !(drift <= MAX_DRIFT) {
        return Err(GeoError::ConstraintDrift { time, drift });
    }
    Ok(())
}

/// Integrate `ẋ = f(t, x)` over `t_span` with step `h`.
pub fn integrate_first_order<F>(
    m: &Manifold,
    f: F,
    x0: &Mat,
    t_span: (f64, f64),
    h: f64,
    scheme: Scheme,
) -> Result<Trajectory>
where
    F: Fn(f64, &Mat) -> Result<Mat>,
{
    check_start(m, x0)?;
    let n = step_count(t_span, h)?;
    let mut times = Vec::with_capacity(n + 1);
    let mut points = Vec::with_capacity(n + 1);
    let mut x = x0.clone();
    times.push(t_span.0);
    points.push(x.clone());
    for i in 0..n {
        let t = t_span.0 + i as f64 * h;
        let k1 = f(t, &x)?;
        check_step(m, &x, &k1, h)?;
        x = match scheme {
            Scheme::GeodesicEuler => m.exp(&x, &(k1 * h))?,
            Scheme::ProjectedRk4 => {
                let stage = |k: &Mat, a: f64| m.project_point(&(&x + k * a));
                let k2 = f(t + 0.5 * h, &stage(&k1, 0.5 * h))?;
                let k3 = f(t + 0.5 * h, &stage(&k2, 0.5 * h))?;
                let k4 = f(t + h, &stage(&k3, h))?;
                m.project_point(&(&x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)))
            }
        };
        let t_next = t_span.0 + (i + 1) as f64 * h;
        check_drift(m, &x, t_next)?;
        times.push(t_next);
        points.push(x.clone());
    }
    Ok(Trajectory {
        manifold: *m,
        h,
        times,
        points,
        velocities: None,
    })
}

/// Integrate a system on the tangent bundle, `q̇ = a(t,q,v)`,
/// `Dv/dt = b(t,q,v)`, where `g` returns `(a, b)`.
pub fn integrate_tangent_bundle<G>(
    m: &Manifold,
    g: G,
    q0: &Mat,
    v0: &Mat,
    t_span: (f64, f64),
    h: f64,
    scheme: Scheme,
) -> Result<Trajectory>
where
    G: Fn(f64, &Mat, &Mat) -> Result<(Mat, Mat)>,
{
    check_start(m, q0)?;
    let tangency = m.tangency_residual(q0, v0);
    if tangency > 1e-8 {
        return Err(GeoError::NotTangent(format!(
            "initial velocity off the tangent space by {tangency:.3e}"
        )));
    }
    let n = step_count(t_span, h)?;
    let mut times = Vec::with_capacity(n + 1);
    let mut points = Vec::with_capacity(n + 1);
    let mut velocities = Vec::with_capacity(n + 1);
    let (mut q, mut v) = (q0.clone(), v0.clone());
    times.push(t_span.0);
    points.push(q.clone());
    velocities.push(v.clone());
    // ambient rates: q̇ = a, v̇ = b + c(q; a, v)
    let rates = |t: f64, q: &Mat, v: &Mat| -> Result<(Mat, Mat)> {
        let (a, b) = g(t, q, v)?;
        let vdot = &b + m.connection_term(q, &a, v);
        Ok((a, vdot))
    };
    for i in 0..n {
        let t = t_span.0 + i as f64 * h;
        match scheme {
            Scheme::GeodesicEuler => {
                let (a, b) = g(t, &q, &v)?;
                check_step(m, &q, &a, h)?;
                let next = m.exp(&q, &(&a * h))?;
                v = m.transport(&q, &next, &(&v + b * h))?;
                q = next;
            }
            Scheme::ProjectedRk4 => {
                let (a1, b1) = rates(t, &q, &v)?;
                check_step(m, &q, &a1, h)?;
                let stage = |da: &Mat, db: &Mat, s: f64| {
                    let qs = m.project_point(&(&q + da * s));
                    let vs = m.project_tangent(&qs, &(&v + db * s));
                    (qs, vs)
                };
                let (q2, v2) = stage(&a1, &b1, 0.5 * h);
                let (a2, b2) = rates(t + 0.5 * h, &q2, &v2)?;
                let (q3, v3) = stage(&a2, &b2, 0.5 * h);
                let (a3, b3) = rates(t + 0.5 * h, &q3, &v3)?;
                let (q4, v4) = stage(&a3, &b3, h);
                let (a4, b4) = rates(t + h, &q4, &v4)?;
                let da = (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (h / 6.0);
                let db = (b1 + b2 * 2.0 + b3 * 2.0 + b4) * (h / 6.0);
                (q, v) = stage(&da, &db, 1.0);
            }
        }
        let t_next = t_span.0 + (i + 1) as f64 * h;
        check_drift(m, &q, t_next)?;
        times.push(t_next);
        points.push(q.clone());
        velocities.push(v.clone());
    }
    Ok(Trajectory {
        manifold: *m,
        h,
        times,
        points,
        velocities: Some(velocities),
    })
}

/// Integrate `∇_q̇ q̇ = force(t, q, q̇)`.
pub fn integrate_second_order<F>(
    m: &Manifold,
    force: F,
    q0: &Mat,
    v0: &Mat,
    t_span: (f64, f64),
    h: f64,
    scheme: Scheme,
) -> Result<Trajectory>
where
    F: Fn(f64, &Mat, &Mat) -> Result<Mat>,
{
    integrate_tangent_bundle(
        m,
        |t, q, v| Ok((v.clone(), force(t, q, v)?)),
        q0,
        v0,
        t_span,
        h,
        scheme,
    )
}
