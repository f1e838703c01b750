//! Numerical integration of the principal foliations in chart coordinates.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::bde::{
    bde_critical, bde_regular, directions_of, saddle_blowup_bde, lie_cartan, rotate_saddle_jet, suspension_singularities,
    Bde, LieCartanField, SingularityKind, SlopeChart, SuspensionSingularity,
};
use crate::charts::{CriticalEndJet, CriticalKind, RegularEndJet, EXACT_ORDER};
use crate::classify::{classify_critical, classify_regular, Verdict};
use crate::error::{Error, Result};
use crate::jets::JetSeries;
use crate::numeric::{eigenvector3, rk4_step};

/// Which principal foliation a leaf belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Minimal,
    Maximal,
}

impl Branch {
    pub fn name(&self) -> &'static str {
        match self {
            Branch::Minimal => "minimal",
            Branch::Maximal => "maximal",
        }
    }

    pub fn other(&self) -> Self {
        match self {
            Branch::Minimal => Branch::Maximal,
            Branch::Maximal => Branch::Minimal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Boundary,
    EndLocus,
    SingularPoint,
    StepLimit,
}

impl Termination {
    pub fn name(&self) -> &'static str {
        match self {
            Termination::Boundary => "boundary",
            Termination::EndLocus => "end_locus",
            Termination::SingularPoint => "singular_point",
            Termination::StepLimit => "step_limit",
        }
    }
}

/// The part of the chart that corresponds to actual surface points.
#[derive(Debug, Clone)]
pub enum Region {
    Everywhere,
    /// `w > 0`.
    UpperHalfPlane,
    /// `h(u, v) > 0`.
    Positive(JetSeries),
}

impl Region {
    /// Positive inside the region.
    pub fn value(&self, x: [f64; 2]) -> f64 {
        match self {
            Region::Everywhere => 1.0,
            Region::UpperHalfPlane => x[1],
            Region::Positive(h) => h.eval(x[0], x[1]),
        }
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        self.value(x) > 0.0
    }
}

/// Step-size policy and stopping rules for [`trace_field`].
#[derive(Debug, Clone)]
pub struct StepControl {
    pub initial: f64,
    pub min: f64,
    pub max: f64,
    /// Halve the step when the direction turns more than this per step (rad).
    pub turn_high: f64,
    /// Double the step when the direction turns less than this per step (rad).
    pub turn_low: f64,
    /// Largest accepted `|L dw² + M du dw + N du²| / (|Δx|² scale)` at a
    /// chord midpoint.
    pub chord_residual: f64,
    pub max_steps: usize,
    /// `[u_min, u_max, w_min, w_max]`.
    pub bounds: [f64; 4],
    pub region: Region,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            initial: 1e-3,
            min: 1e-12,
            max: 0.02,
            turn_high: 2e-3,
            turn_low: 2e-4,
            chord_residual: 5e-7,
            max_steps: 20_000,
            bounds: [-1.0, 1.0, -1.0, 1.0],
            region: Region::Everywhere,
        }
    }
}

impl StepControl {
    pub fn with_region(region: Region) -> Self {
        Self { region, ..Self::default() }
    }

    fn in_bounds(&self, x: [f64; 2]) -> bool {
        x[0] >= self.bounds[0] && x[0] <= self.bounds[1] && x[1] >= self.bounds[2] && x[1] <= self.bounds[3]
    }
}

/// A traced leaf in chart coordinates.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub points: Vec<[f64; 2]>,
    pub foliation: Branch,
    /// How the forward arc ended.
    pub termination: Termination,
    /// How the backward arc ended (the first point of `points`).
    pub start_termination: Termination,
}

fn unit(d: [f64; 2]) -> [f64; 2] {
    let n = d[0].hypot(d[1]);
    [d[0] / n, d[1] / n]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

fn angle_between(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] * b[1] - a[1] * b[0]).atan2(dot(a, b)).abs()
}

/// The two principal directions at a point, ordered `[minimal, maximal]`.
///
/// Uses normal curvatures when the equation carries its fundamental forms
/// and the angle in `[0, π)` otherwise.
pub fn branch_directions(bde: &Bde, x: [f64; 2]) -> Result<[[f64; 2]; 2]> {
    let dirs = directions_of(bde.eval(x[0], x[1]), None)?;
    let (d0, d1) = (dirs[0], *dirs.last().unwrap_or(&dirs[0]));
    let key = |d: [f64; 2]| -> f64 {
        if let Some(k) = bde.normal_curvature(x[0], x[1], d) {
            k
        } else {
            let mut t = d[1].atan2(d[0]);
            if t < 0.0 {
                t += PI;
            }
            if t >= PI {
                t -= PI;
            }
            t
        }
    };
    let both_curv = bde.normal_curvature(x[0], x[1], d0).is_some() && bde.normal_curvature(x[0], x[1], d1).is_some();
    let (k0, k1) = if both_curv {
        (key(d0), key(d1))
    } else {
        let angle = |d: [f64; 2]| {
            let mut t = d[1].atan2(d[0]);
            if t < 0.0 {
                t += PI;
            }
            if t >= PI - 1e-15 {
                t -= PI;
            }
            t
        };
        (angle(d0), angle(d1))
    };
    Ok(if k0 <= k1 { [d0, d1] } else { [d1, d0] })
}

/// Label of the foliation whose direction at `x` is closest to `d`.
pub fn label_direction(bde: &Bde, x: [f64; 2], d: [f64; 2]) -> Option<Branch> {
    let [dmin, dmax] = branch_directions(bde, x).ok()?;
    Some(if dot(dmin, d).abs() >= dot(dmax, d).abs() { Branch::Minimal } else { Branch::Maximal })
}

/// Root-following integrator with a Lie–Cartan bridge across folds.
pub struct Tracer<'a> {
    bde: &'a Bde,
    ctl: &'a StepControl,
    fields: [LieCartanField; 2],
}

enum StepOutcome {
    Point([f64; 2], [f64; 2]),
    Stop([f64; 2], Termination),
    Fail,
}

impl<'a> Tracer<'a> {
    pub fn new(bde: &'a Bde, ctl: &'a StepControl) -> Self {
        Self { bde, ctl, fields: [lie_cartan(bde, SlopeChart::P), lie_cartan(bde, SlopeChart::Q)] }
    }

    fn dir(&self, x: [f64; 2], prev: [f64; 2]) -> Option<[f64; 2]> {
        if !x[0].is_finite() || !x[1].is_finite() {
            return None;
        }
        directions_of(self.bde.eval(x[0], x[1]), Some(prev)).ok().map(|d| d[0])
    }

    fn relative_discriminant(&self, x: [f64; 2]) -> f64 {
        let v = self.bde.eval(x[0], x[1]);
        let s = v.scale();
        if s == 0.0 {
            0.0
        } else {
            v.discriminant() / (s * s)
        }
    }

    fn rk4(&self, x: [f64; 2], d: [f64; 2], h: f64) -> Option<([f64; 2], [f64; 2], f64)> {
        let k1 = self.dir(x, d)?;
        let k2 = self.dir(lerp(x, [x[0] + k1[0], x[1] + k1[1]], h / 2.0), k1)?;
        let k3 = self.dir(lerp(x, [x[0] + k2[0], x[1] + k2[1]], h / 2.0), k2)?;
        let k4 = self.dir(lerp(x, [x[0] + k3[0], x[1] + k3[1]], h), k3)?;
        let x1 = [
            x[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            x[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        let d1 = self.dir(x1, k4)?;
        let turn = angle_between(d, k1)
            .max(angle_between(k1, k4))
            .max(angle_between(k4, d1));
        Some((x1, d1, turn))
    }

    /// Clips the segment `x → x1` at the first exit from the box or region.
    fn clip(&self, x: [f64; 2], x1: [f64; 2]) -> Option<([f64; 2], Termination)> {
        let inside = |p: [f64; 2]| self.ctl.in_bounds(p) && self.ctl.region.contains(p);
        if inside(x1) {
            return None;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if inside(lerp(x, x1, mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p = lerp(x, x1, hi);
        let kind = if !self.ctl.region.contains(p) && self.ctl.in_bounds(p) {
            Termination::EndLocus
        } else {
            Termination::Boundary
        };
        Some((p, kind))
    }

    /// Like [`Self::clip`] but shortens the integration step itself, so the
    /// final chord still follows the leaf.
    fn clip_step(&self, x: [f64; 2], d: [f64; 2], h: f64, x1: [f64; 2]) -> Option<([f64; 2], Termination)> {
        let (linear, kind) = self.clip(x, x1)?;
        let inside = |p: [f64; 2]| self.ctl.in_bounds(p) && self.ctl.region.contains(p);
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut best = None;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            match self.rk4(x, d, mid * h) {
                Some((p, _, _)) if inside(p) => lo = mid,
                Some((p, _, _)) => {
                    hi = mid;
                    best = Some(p);
                }
                None => hi = mid,
            }
        }
        Some((best.unwrap_or(linear), kind))
    }

    fn chord_residual(&self, x: [f64; 2], x1: [f64; 2]) -> f64 {
        let d = [x1[0] - x[0], x1[1] - x[1]];
        let len2 = dot(d, d);
        let m = lerp(x, x1, 0.5);
        let v = self.bde.eval(m[0], m[1]);
        let s = v.scale();
        if len2 == 0.0 || s == 0.0 {
            0.0
        } else {
            v.residual(d).abs() / (len2 * s)
        }
    }

    fn step(&self, x: [f64; 2], d: [f64; 2], h: &mut f64) -> StepOutcome {
        loop {
            let attempt = self.rk4(x, d, *h).map(|(x1, d1, turn)| (x1, d1, turn, self.chord_residual(x, x1)));
            match attempt {
                Some((x1, d1, turn, res)) if turn <= self.ctl.turn_high && res <= self.ctl.chord_residual => {
                    if let Some((p, kind)) = self.clip_step(x, d, *h, x1) {
                        return StepOutcome::Stop(p, kind);
                    }
                    // the chord residual grows like h², so doubling needs headroom of 4 and then some
                    if turn < self.ctl.turn_low && res < self.ctl.chord_residual / 8.0 {
                        *h = (*h * 2.0).min(self.ctl.max);
                    }
                    return StepOutcome::Point(x1, d1);
                }
                _ => {
                    *h *= 0.5;
                    if *h < self.ctl.min {
                        return StepOutcome::Fail;
                    }
                }
            }
        }
    }

    /// Follows the leaf upstairs on `{F = 0}` until the two roots separate
    /// again. Returns the projected points and the outgoing direction.
    fn bridge(&self, x: [f64; 2], d: [f64; 2]) -> Option<(Vec<[f64; 2]>, [f64; 2])> {
        let (field, s) = if d[0].abs() >= d[1].abs() {
            (&self.fields[0], d[1] / d[0])
        } else {
            (&self.fields[1], d[0] / d[1])
        };
        let y0 = [x[0], x[1], s];
        let v0 = field.value(&y0);
        let sign = if v0[0] * d[0] + v0[1] * d[1] >= 0.0 { 1.0 } else { -1.0 };
        let f = |y: &[f64; 3]| {
            let v = field.value(y);
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n == 0.0 || !n.is_finite() {
                [f64::NAN; 3]
            } else {
                [sign * v[0] / n, sign * v[1] / n, sign * v[2] / n]
            }
        };
        let mut y = y0;
        let mut pts = Vec::new();
        let hs = 1e-4;
        for k in 0..20_000 {
            y = rk4_step(&f, &y, hs);
            if !y.iter().all(|c| c.is_finite()) {
                return None;
            }
            let p = [y[0], y[1]];
            if let Some((q, _)) = self.clip(*pts.last().unwrap_or(&x), p) {
                pts.push(q);
                return Some((pts, [f64::NAN; 2]));
            }
            pts.push(p);
            if k > 10 && self.relative_discriminant(p) > 1e-6 {
                let v = field.value(&y);
                let out = unit([sign * v[0], sign * v[1]]);
                return Some((pts, out));
            }
        }
        None
    }

    /// Marches from `x` in direction `d` until a termination condition holds
    /// or `stop` returns true for the newest point.
    pub fn march(&self, x: [f64; 2], d: [f64; 2], mut stop: impl FnMut(&[f64; 2]) -> bool) -> (Vec<[f64; 2]>, Termination) {
        let mut pts = vec![x];
        let mut x = x;
        let mut d = match self.dir(x, unit(d)) {
            Some(d) => d,
            None => return (pts, Termination::SingularPoint),
        };
        let mut h = self.ctl.initial;
        let mut bridges = 0;
        while pts.len() <= self.ctl.max_steps {
            match self.step(x, d, &mut h) {
                StepOutcome::Point(x1, d1) => {
                    pts.push(x1);
                    x = x1;
                    d = d1;
                    if stop(&x) {
                        return (pts, Termination::StepLimit);
                    }
                }
                StepOutcome::Stop(p, kind) => {
                    pts.push(p);
                    return (pts, kind);
                }
                StepOutcome::Fail => {
                    if bridges < 8 && self.relative_discriminant(x).abs() < 1e-3 {
                        if let Some((bp, out)) = self.bridge(x, d) {
                            bridges += 1;
                            let end = *bp.last().unwrap_or(&x);
                            pts.extend(bp);
                            if !out[0].is_finite() {
                                let kind = if self.ctl.region.contains(end) {
                                    Termination::Boundary
                                } else {
                                    Termination::EndLocus
                                };
                                return (pts, kind);
                            }
                            x = end;
                            d = out;
                            h = self.ctl.initial.min(1e-4);
                            continue;
                        }
                    }
                    return (pts, Termination::SingularPoint);
                }
            }
        }
        (pts, Termination::StepLimit)
    }
}

/// Traces the leaf of `branch` through `seed`, both forward and backward.
pub fn trace_field(bde: &Bde, seed: [f64; 2], branch: Branch, ctl: &StepControl) -> Result<Trajectory> {
    if !ctl.region.contains(seed) {
        return Err(Error::SeedOutsideRegion(seed[0], seed[1]));
    }
    let v = bde.eval(seed[0], seed[1]);
    if v.scale() > 0.0 && v.discriminant() < -1e-12 * v.scale() * v.scale() {
        return Err(Error::NegativeDiscriminant);
    }
    let dirs = branch_directions(bde, seed)?;
    let d = match branch {
        Branch::Minimal => dirs[0],
        Branch::Maximal => dirs[1],
    };
    let tracer = Tracer::new(bde, ctl);
    let (fwd, t_fwd) = tracer.march(seed, d, |_| false);
    let (bwd, t_bwd) = tracer.march(seed, [-d[0], -d[1]], |_| false);
    if fwd.len() == 1 && bwd.len() == 1 {
        return Err(Error::StepCollapse(ctl.min));
    }
    let mut points: Vec<[f64; 2]> = bwd.into_iter().rev().collect();
    points.extend(fwd.into_iter().skip(1));
    Ok(Trajectory { points, foliation: branch, termination: t_fwd, start_termination: t_bwd })
}

/// Largest normalised residual `|L dw² + M du dw + N du²| / (|Δx|² scale)`
/// over the chords of a polyline, evaluated at chord midpoints.
pub fn max_residual(bde: &Bde, points: &[[f64; 2]]) -> f64 {
    points
        .windows(2)
        .filter_map(|w| {
            let d = [w[1][0] - w[0][0], w[1][1] - w[0][1]];
            let len2 = dot(d, d);
            if len2 == 0.0 {
                return None;
            }
            let m = lerp(w[0], w[1], 0.5);
            let v = bde.eval(m[0], m[1]);
            let s = v.scale();
            (s > 0.0).then(|| v.residual(d).abs() / (len2 * s))
        })
        .fold(0.0, f64::max)
}

/// A separatrix of a suspension saddle, traced upstairs and projected.
#[derive(Debug, Clone)]
pub struct Separatrix {
    pub trajectory: Trajectory,
    /// The path in `(u, w, slope)` space.
    pub upstairs: Vec<[f64; 3]>,
    /// Slope coordinate of the source singularity.
    pub source_slope: f64,
    pub eigenvalue: f64,
    /// True when part of the projection lies in the finite region.
    pub enters_finite_region: bool,
}

/// Options for separatrix tracing.
#[derive(Debug, Clone, Copy)]
pub struct SeparatrixOptions {
    /// Initial offset along the eigenvector.
    pub offset: f64,
    /// Stop once the projected point is this far from the chart origin.
    pub radius: f64,
    pub max_steps: usize,
    /// Upper bound on the upstairs arc length.
    pub max_length: f64,
}

impl Default for SeparatrixOptions {
    fn default() -> Self {
        Self { offset: 1e-6, radius: 0.3, max_steps: 200_000, max_length: 4.0 }
    }
}

/// Launches both separatrices along each nonzero eigendirection of a
/// hyperbolic saddle of the suspension and projects them to the chart.
pub fn trace_separatrices(
    bde: &Bde,
    field: &LieCartanField,
    sing: &SuspensionSingularity,
    region: &Region,
    opts: SeparatrixOptions,
) -> Result<Vec<Separatrix>> {
    if sing.kind != SingularityKind::HyperbolicSaddle {
        return Err(Error::NonHyperbolic);
    }
    let p0 = sing.point();
    let mut out = Vec::new();
    for &lambda in &sing.nonzero_eigenvalues() {
        let v = eigenvector3(&sing.jacobian, lambda);
        for sign in [1.0, -1.0] {
            let start = [p0[0] + sign * opts.offset * v[0], p0[1] + sign * opts.offset * v[1], p0[2] + sign * opts.offset * v[2]];
            let time = lambda.signum();
            let upstairs = integrate_upstairs(field, start, time, p0, opts);
            let points: Vec<[f64; 2]> = std::iter::once([p0[0], p0[1]])
                .chain(upstairs.iter().map(|y| project(field.chart(), y)))
                .collect();
            let finite = points.iter().skip(1).any(|p| region.value(*p) > 1e-9);
            let mid = points[points.len() / 2];
            let dir = if points.len() > 2 {
                let k = points.len() / 2;
                [points[k + 1][0] - points[k - 1][0], points[k + 1][1] - points[k - 1][1]]
            } else {
                [1.0, 0.0]
            };
            let foliation = label_direction(bde, mid, dir).unwrap_or(Branch::Minimal);
            out.push(Separatrix {
                trajectory: Trajectory {
                    points,
                    foliation,
                    termination: Termination::Boundary,
                    start_termination: Termination::SingularPoint,
                },
                upstairs: std::iter::once(p0).chain(upstairs).collect(),
                source_slope: sing.p_value,
                eigenvalue: lambda,
                enters_finite_region: finite,
            });
        }
    }
    Ok(out)
}

fn project(_chart: SlopeChart, y: &[f64; 3]) -> [f64; 2] {
    [y[0], y[1]]
}

fn integrate_upstairs(
    field: &LieCartanField,
    start: [f64; 3],
    time: f64,
    origin: [f64; 3],
    opts: SeparatrixOptions,
) -> Vec<[f64; 3]> {
    let f = |y: &[f64; 3]| {
        let v = field.value(y);
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n == 0.0 {
            [0.0; 3]
        } else {
            [time * v[0] / n, time * v[1] / n, time * v[2] / n]
        }
    };
    let mut y = start;
    let mut out = vec![y];
    let mut arcs = vec![0.0];
    let mut arc = 0.0;
    for k in 0..opts.max_steps {
        let dist = ((y[0] - origin[0]).powi(2) + (y[1] - origin[1]).powi(2) + (y[2] - origin[2]).powi(2)).sqrt();
        let h = (0.02 * dist).clamp(1e-8, 2e-3);
        let next = rk4_step(&f, &y, h);
        if !next.iter().all(|c| c.is_finite()) || next == y {
            break;
        }
        y = next;
        out.push(y);
        arc += h;
        arcs.push(arc);
        // stalled: the path keeps turning on the spot next to a singularity
        if k >= 400 && k % 100 == 0 {
            let n = out.len();
            let back = out[n - 201];
            let moved = ((y[0] - back[0]).powi(2) + (y[1] - back[1]).powi(2) + (y[2] - back[2]).powi(2)).sqrt();
            if moved < 0.05 * (arc - arcs[n - 201]) {
                break;
            }
        }
        if arc > opts.max_length {
            break;
        }
        if y[0].hypot(y[1]) > opts.radius || y[2].abs() > 1e6 {
            break;
        }
    }
    out
}

/// Least-squares fit `w ≈ Σ c_k u^k` over the given powers; returns the coefficients.
pub fn fit_powers(points: &[[f64; 2]], powers: &[i32], u_range: (f64, f64)) -> Option<Vec<f64>> {
    let rows: Vec<&[f64; 2]> = points
        .iter()
        .filter(|p| p[0].abs() >= u_range.0 && p[0].abs() <= u_range.1)
        .collect();
    if rows.len() < powers.len() + 2 {
        return None;
    }
    let a = nalgebra::DMatrix::from_fn(rows.len(), powers.len(), |r, c| rows[r][0].powi(powers[c]));
    let b = nalgebra::DVector::from_fn(rows.len(), |r, _| rows[r][1]);
    let sol = a.svd(true, true).solve(&b, 1e-300).ok()?;
    Some(sol.iter().copied().collect())
}

/// The leaf through the origin that is tangent to the end locus, obtained by
/// integrating `dw/du` along the root of `L p² + M p + N = 0` that does not
/// vanish with `N`.
pub fn trace_contact_leaf(bde: &Bde, u_max: f64, steps: usize) -> Trajectory {
    let slope = |u: f64, w: f64| {
        let v = bde.eval(u, w);
        let disc = (v.m * v.m - 4.0 * v.l * v.n).max(0.0);
        let sgn = if v.m < 0.0 { -1.0 } else { 1.0 };
        let q = -0.5 * (v.m + sgn * disc.sqrt());
        q / v.l
    };
    let f = |y: &[f64; 2]| [1.0, slope(y[0], y[1])];
    let mut arcs = Vec::new();
    for dir in [1.0, -1.0] {
        let h = dir * u_max / steps as f64;
        let mut y = [0.0, 0.0];
        let mut pts = vec![y];
        for _ in 0..steps {
            y = rk4_step(&f, &y, h);
            pts.push(y);
        }
        arcs.push(pts);
    }
    let mut points: Vec<[f64; 2]> = arcs[1].iter().rev().copied().collect();
    points.extend(arcs[0].iter().skip(1));
    let foliation = label_direction(bde, points[points.len() - 1], [1.0, slope(u_max, points[points.len() - 1][1])])
        .unwrap_or(Branch::Minimal);
    Trajectory { points, foliation, termination: Termination::StepLimit, start_termination: Termination::StepLimit }
}

/// A labelled point of the chart plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularPoint {
    pub point: [f64; 2],
    pub label: String,
}

/// Everything needed to draw a chart-plane portrait.
#[derive(Debug, Clone)]
pub struct PhasePortrait {
    pub trajectories: Vec<Trajectory>,
    pub separatrices: Vec<Separatrix>,
    pub singular_points: Vec<SingularPoint>,
    pub suspension_singularities: Vec<SuspensionSingularity>,
    pub region: Region,
    pub bounds: [f64; 4],
}

/// Seeding policy for [`portrait`].
#[derive(Debug, Clone, Copy)]
pub struct SeedPolicy {
    /// Grid points per axis over the chart box.
    pub grid: usize,
    /// Skip a seed closer than this to a leaf of the same foliation.
    pub thinning: f64,
    pub max_steps: usize,
    /// Truncation order of the traced equation.
    pub order: usize,
}

impl Default for SeedPolicy {
    fn default() -> Self {
        Self { grid: 11, thinning: 0.02, max_steps: 6000, order: EXACT_ORDER }
    }
}

/// An end-point jet of either flavour.
#[derive(Debug, Clone)]
pub enum EndJet {
    Regular(RegularEndJet),
    Critical(CriticalEndJet),
}

impl EndJet {
    pub fn bde(&self) -> Bde {
        match self {
            EndJet::Regular(j) => bde_regular(j),
            EndJet::Critical(j) => bde_critical(j),
        }
    }

    pub fn region(&self) -> Region {
        match self {
            EndJet::Regular(_) => Region::UpperHalfPlane,
            EndJet::Critical(j) => Region::Positive(j.height(EXACT_ORDER)),
        }
    }

    pub fn verdict(&self, tol: f64) -> Verdict {
        match self {
            EndJet::Regular(j) => classify_regular(j, tol).verdict,
            EndJet::Critical(j) => classify_critical(j, tol).verdict,
        }
    }
}

struct Occupancy {
    cell: f64,
    map: HashMap<(i64, i64), Vec<[f64; 2]>>,
}

impl Occupancy {
    fn new(cell: f64) -> Self {
        Self { cell, map: HashMap::new() }
    }

    fn key(&self, p: [f64; 2]) -> (i64, i64) {
        ((p[0] / self.cell).floor() as i64, (p[1] / self.cell).floor() as i64)
    }

    fn insert_polyline(&mut self, pts: &[[f64; 2]]) {
        for w in pts.windows(2) {
            let len = (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
            let n = (len / (0.5 * self.cell)).ceil().max(1.0) as usize;
            for k in 0..=n {
                let p = lerp(w[0], w[1], k as f64 / n as f64);
                let key = self.key(p);
                self.map.entry(key).or_default().push(p);
            }
        }
    }

    fn near(&self, p: [f64; 2]) -> bool {
        let (i, j) = self.key(p);
        for di in -1..=1 {
            for dj in -1..=1 {
                if let Some(v) = self.map.get(&(i + di, j + dj)) {
                    if v.iter().any(|q| (q[0] - p[0]).hypot(q[1] - p[1]) < self.cell) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Traces both foliations from a thinned seed grid and adds the singular
/// structure that the end-point class calls for.
pub fn portrait(jet: &EndJet, policy: SeedPolicy, tol: f64) -> Result<PhasePortrait> {
    let verdict = jet.verdict(tol);
    if verdict == Verdict::Degenerate {
        return Err(Error::InvalidJet("degenerate end point has no portrait".into()));
    }
    let bde = jet.bde().truncate(policy.order);
    let region = jet.region();
    let ctl = StepControl { max_steps: policy.max_steps, ..StepControl::with_region(region.clone()) };
    let n = policy.grid.max(2);
    let seeds: Vec<[f64; 2]> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let s = |k: usize| -1.0 + 2.0 * k as f64 / (n - 1) as f64;
            [s(j), s(i)]
        })
        .filter(|p| region.value(*p) > 1e-9 && p[0].abs() < 1.0 && p[1].abs() < 1.0)
        .collect();

    let trace_family = |branch: Branch| -> Vec<Trajectory> {
        let mut occ = Occupancy::new(policy.thinning);
        let mut out = Vec::new();
        for s in &seeds {
            if occ.near(*s) {
                continue;
            }
            if let Ok(t) = trace_field(&bde, *s, branch, &ctl) {
                occ.insert_polyline(&t.points);
                out.push(t);
            }
        }
        out
    };
    let (mut trajectories, maximal) = rayon::join(|| trace_family(Branch::Minimal), || trace_family(Branch::Maximal));
    trajectories.extend(maximal);

    let mut singular_points = Vec::new();
    let mut separatrices = Vec::new();
    let mut suspension = Vec::new();
    let origin = [0.0, 0.0];
    match verdict {
        Verdict::Biregular => {}
        Verdict::InflexionHyperbolic
        | Verdict::InflexionElliptic
        | Verdict::UmbilicInflexionD1
        | Verdict::UmbilicInflexionD3 => {
            singular_points.push(SingularPoint { point: origin, label: verdict.name().to_string() });
            let field = lie_cartan(&bde, SlopeChart::P);
            let sings = suspension_singularities(&field, (-1e6, 1e6))?;
            for s in &sings {
                if s.kind == SingularityKind::HyperbolicSaddle {
                    separatrices.extend(trace_separatrices(&bde, &field, s, &region, SeparatrixOptions::default())?);
                }
            }
            suspension = sings;
        }
        Verdict::InflexionCubicContact => {
            singular_points.push(SingularPoint { point: origin, label: verdict.name().to_string() });
            let leaf = trace_contact_leaf(&bde, 0.5, 2000);
            separatrices.push(Separatrix {
                enters_finite_region: leaf.points.iter().any(|p| region.value(*p) > 1e-9),
                trajectory: leaf,
                upstairs: Vec::new(),
                source_slope: 0.0,
                eigenvalue: 0.0,
            });
        }
        Verdict::CriticalFocalDefinite | Verdict::CriticalDefiniteNonFocal => {
            singular_points.push(SingularPoint { point: origin, label: verdict.name().to_string() });
        }
        Verdict::CriticalSaddleEven | Verdict::CriticalSaddleOdd => {
            if let EndJet::Critical(j) = jet {
                let sp = saddle_blowup_trace(j)?;
                separatrices = sp.separatrices;
                suspension = sp.suspension_singularities;
            }
            singular_points.push(SingularPoint { point: origin, label: verdict.name().to_string() });
        }
        Verdict::Degenerate => unreachable!(),
    }
    Ok(PhasePortrait { trajectories, separatrices, singular_points, suspension_singularities: suspension, region, bounds: ctl.bounds })
}

/// Separatrices at a saddle critical end via the blow-up `v = u w` of each
/// branch of `h⁻¹(0)`, blown down to the `(u, v)` chart.
///
/// The second branch is handled by rotating the jet so that it becomes
/// tangent to the first axis and rotating the traced curves back.
pub fn saddle_blowup_trace(jet: &CriticalEndJet) -> Result<PhasePortrait> {
    if jet.kind() != CriticalKind::Saddle {
        return Err(Error::InvalidJet("blow-up tracing needs a saddle critical jet".into()));
    }
    if jet.third.a30 == 0.0 {
        return Err(Error::InvalidJet("blow-up tracing needs a30 != 0".into()));
    }
    let region = Region::Positive(jet.height(EXACT_ORDER));
    let t = &jet.third;
    let cubic_scale = [t.a30, t.a21, t.a12, t.a03].iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let bde = bde_critical(jet);
    let mut separatrices = Vec::new();
    let mut suspension = Vec::new();

    let rotated = rotate_saddle_jet(jet)?;
    let c = 1.0 / (1.0 + jet.a * jet.a).sqrt();
    let s = jet.a * c;
    let branches: [(CriticalEndJet, [[f64; 2]; 2]); 2] = [(*jet, [[1.0, 0.0], [0.0, 1.0]]), (rotated, [[c, -s], [s, c]])];
    for (k, (j, rot)) in branches.iter().enumerate() {
        if j.third.a30 == 0.0 {
            continue;
        }
        let blown = saddle_blowup_bde(j)?;
        let field = lie_cartan(&blown, SlopeChart::Q);
        let sings = suspension_singularities(&field, (-1e6, 1e6))?;
        let opts = SeparatrixOptions { radius: 0.05, ..SeparatrixOptions::default() };
        for sing in &sings {
            if sing.kind != SingularityKind::HyperbolicSaddle {
                continue;
            }
            for mut sep in trace_separatrices(&blown, &field, sing, &Region::Everywhere, opts)? {
                // blow down (u, w) -> (u, u w), then undo the rotation
                let down: Vec<[f64; 2]> = sep
                    .trajectory
                    .points
                    .iter()
                    .map(|p| {
                        let (ub, vb) = (p[0], p[0] * p[1]);
                        [rot[0][0] * ub + rot[0][1] * vb, rot[1][0] * ub + rot[1][1] * vb]
                    })
                    .collect();
                sep.enters_finite_region = down.iter().any(|p| strictly_inside(&region, cubic_scale, *p));
                let n = down.len();
                if n > 2 {
                    let d = [down[n - 1][0] - down[n - 2][0], down[n - 1][1] - down[n - 2][1]];
                    if let Some(b) = label_direction(&bde, down[n - 1], d) {
                        sep.trajectory.foliation = b;
                    }
                }
                sep.trajectory.points = down;
                separatrices.push(sep);
            }
        }
        if k == 0 {
            suspension = sings;
        }
    }
    Ok(PhasePortrait {
        trajectories: Vec::new(),
        separatrices,
        singular_points: vec![SingularPoint { point: [0.0, 0.0], label: "saddle critical end".into() }],
        suspension_singularities: suspension,
        region,
        bounds: [-1.0, 1.0, -1.0, 1.0],
    })
}

/// Away from the origin and clear of `h⁻¹(0)` by a margin that beats the
/// `O(|p|⁴)` error of curves lying on the end locus.
fn strictly_inside(region: &Region, cubic_scale: f64, p: [f64; 2]) -> bool {
    let r = p[0].hypot(p[1]);
    r > 1e-3 && region.value(p) > 1e-2 * cubic_scale * r.powi(3)
}

/// Sector of the finite region `(−a u + v) v > 0` a point of a saddle chart
/// lies in: `Some(0)` for `v > 0`, `Some(1)` for `v < 0`.
pub fn saddle_sector(jet: &CriticalEndJet, p: [f64; 2]) -> Option<usize> {
    let h = jet.height(EXACT_ORDER).eval(p[0], p[1]);
    if h <= 0.0 {
        return None;
    }
    Some(if p[1] > 0.0 { 0 } else { 1 })
}

/// Number of finite-region separatrices in each sector of a saddle end.
pub fn separatrices_per_sector(jet: &CriticalEndJet, portrait: &PhasePortrait) -> [usize; 2] {
    let mut counts = [0; 2];
    let region = Region::Positive(jet.height(EXACT_ORDER));
    let t = &jet.third;
    let cubic_scale = [t.a30, t.a21, t.a12, t.a03].iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    for sep in portrait.separatrices.iter().filter(|s| s.enters_finite_region) {
        let mut seen = [false; 2];
        for p in &sep.trajectory.points {
            if !strictly_inside(&region, cubic_scale, *p) {
                continue;
            }
            if let Some(k) = saddle_sector(jet, *p) {
                seen[k] = true;
            }
        }
        for k in 0..2 {
            if seen[k] {
                counts[k] += 1;
            }
        }
    }
    counts
}

/// Cumulative polar angle of a polyline about `center`, with the axes scaled
/// by `(sx, sy)` first.
pub fn unwrapped_angles(points: &[[f64; 2]], center: [f64; 2], sx: f64, sy: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(points.len());
    let mut prev: Option<f64> = None;
    let mut acc = 0.0;
    for p in points {
        let t = ((p[1] - center[1]) / sy).atan2((p[0] - center[0]) / sx);
        if let Some(q) = prev {
            let mut d = t - q;
            while d > PI {
                d -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
            }
            acc += d;
        }
        prev = Some(t);
        out.push(acc);
    }
    out
}

/// Traces the circulating leaf of a definite critical end from `(r0 b, 0)`
/// for the given number of revolutions and returns the leaf with its
/// unwrapped angle profile.
pub fn trace_circulating_leaf(jet: &CriticalEndJet, r0: f64, revolutions: f64) -> Result<(Trajectory, Vec<f64>)> {
    let bde = bde_critical(jet);
    let ctl = StepControl {
        max_steps: 400_000,
        max: 0.2 * r0,
        initial: 1e-2 * r0,
        ..StepControl::with_region(Region::Positive(jet.height(EXACT_ORDER)))
    };
    let seed = [r0 * jet.b, 0.0];
    let dirs = directions_of(bde.eval(seed[0], seed[1]), None)?;
    // the circulating direction is the one closer to the tangent (0, 1)
    let mut d = dirs
        .iter()
        .copied()
        .max_by(|x, y| x[1].abs().total_cmp(&y[1].abs()))
        .ok_or(Error::NegativeDiscriminant)?;
    if d[1] < 0.0 {
        d = [-d[0], -d[1]];
    }
    let tracer = Tracer::new(&bde, &ctl);
    let target = revolutions * 2.0 * PI;
    let (sx, sy) = (jet.b, jet.a);
    let mut acc = 0.0;
    let mut prev = 0.0_f64;
    let (points, termination) = tracer.march(seed, d, |p| {
        let t = (p[1] / sy).atan2(p[0] / sx);
        let mut dt = t - prev;
        while dt > PI {
            dt -= 2.0 * PI;
        }
        while dt < -PI {
            dt += 2.0 * PI;
        }
        acc += dt;
        prev = t;
        acc >= target
    });
    let angles = unwrapped_angles(&points, [0.0, 0.0], sx, sy);
    let foliation = label_direction(&bde, seed, d).unwrap_or(Branch::Minimal);
    Ok((Trajectory { points, foliation, termination, start_termination: Termination::StepLimit }, angles))
}

/// True when `angles` never decreases (up to `slack`).
pub fn is_monotone(angles: &[f64], slack: f64) -> bool {
    angles.windows(2).all(|w| w[1] >= w[0] - slack)
}
