//! Phase-plane contour machinery for the area-contraction results in the
//! one-dimensional case.
//!
//! Contours are closed polygons in the `(q, p)` plane, counter-clockwise
//! orientation counting as positive area. One discrete step changes the
//! enclosed signed area by `-T_s` times a damping integral, which this module
//! evaluates three independent ways: directly from the mapped polygon, as a
//! line integral of the non-potential force, and as a region integral of the
//! averaged curvature.

use std::io::{BufRead, BufReader, Read, Write};

use crate::dynamics::{self, DampingSchedule, PhasePoint};
use crate::error::{AccelError, Result};
use crate::integrators::{self, StepperConfig};
use crate::objectives::{Objective, HESSIAN_FD_STEP};

/// Simple closed polygon in the phase plane. Vertices are `[q, p]` pairs;
/// the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    vertices: Vec<[f64; 2]>,
}

/// Signed areas with magnitude below this are reported as degenerate: the
/// contour has collapsed (possible at unit step size, where the discrete map
/// loses rank on constant-curvature regions).
pub const DEGENERATE_AREA_EPS: f64 = 1e-12;

impl Contour {
    /// Validates that the polygon has at least three finite vertices, does
    /// not self-intersect, and encloses nonzero area.
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(AccelError::invalid("a contour needs at least 3 vertices"));
        }
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(AccelError::invalid("contour vertices must be finite"));
        }
        let c = Self { vertices };
        if c.signed_area().abs() <= DEGENERATE_AREA_EPS {
            return Err(AccelError::invalid("contour encloses no area"));
        }
        if !c.is_simple() {
            return Err(AccelError::invalid("contour is self-intersecting"));
        }
        Ok(c)
    }

    /// Wraps vertices without validation. Used for evolved images, which may
    /// legitimately degenerate or self-intersect at large step sizes.
    pub fn from_vertices_unchecked(vertices: Vec<[f64; 2]>) -> Self {
        Self { vertices }
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Shoelace formula; counter-clockwise polygons come out positive.
    pub fn signed_area(&self) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        let mut acc = 0.0;
        for i in 0..n {
            let j = (i + 1) % n;
            acc += v[i][0] * v[j][1] - v[j][0] * v[i][1];
        }
        0.5 * acc
    }

    /// Whether the enclosed area is numerically indistinguishable from zero.
    pub fn is_degenerate(&self) -> bool {
        self.signed_area().abs() < DEGENERATE_AREA_EPS
    }

    /// Largest vertex distance from the origin.
    pub fn max_radius(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| (v[0] * v[0] + v[1] * v[1]).sqrt())
            .fold(0.0, f64::max)
    }

    /// Diagonal of the bounding box, used as a cheap diameter proxy.
    pub fn bbox_diagonal(&self) -> f64 {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt()
    }

    fn max_edge_length(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| dist(self.vertices[i], self.vertices[(i + 1) % n]))
            .fold(0.0, f64::max)
    }

    /// Self-intersection scan: edges sorted by their minimum `q` so only
    /// horizontally overlapping pairs are tested.
    fn is_simple(&self) -> bool {
        let v = &self.vertices;
        let n = v.len();
        let edge = |i: usize| (v[i], v[(i + 1) % n]);

        // Adjacent edges may only meet at their shared vertex; a collinear
        // fold-back is a spike.
        for i in 0..n {
            let (a, b) = edge(i);
            let (_, c) = edge((i + 1) % n);
            if cross(sub2(b, a), sub2(c, b)) == 0.0 && on_segment(a, b, c) && c != b {
                return false;
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        let min_q = |i: usize| {
            let (a, b) = edge(i);
            a[0].min(b[0])
        };
        let max_q = |i: usize| {
            let (a, b) = edge(i);
            a[0].max(b[0])
        };
        order.sort_by(|&a, &b| min_q(a).partial_cmp(&min_q(b)).unwrap());
        for (rank, &i) in order.iter().enumerate() {
            for &j in &order[rank + 1..] {
                if min_q(j) > max_q(i) {
                    break;
                }
                let adjacent = (i + 1) % n == j || (j + 1) % n == i;
                if adjacent || i == j {
                    continue;
                }
                let (a, b) = edge(i);
                let (c, d) = edge(j);
                if segments_intersect(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    /// Writes `q,p` rows, one vertex per line, after a header row.
    pub fn to_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "q,p")?;
        for v in &self.vertices {
            writeln!(w, "{},{}", v[0], v[1])?;
        }
        Ok(())
    }

    /// Reads vertices from `q,p` rows (a header row is skipped if present)
    /// and validates the polygon.
    pub fn from_csv<R: Read>(r: R) -> Result<Self> {
        let mut vertices = Vec::new();
        for (lineno, line) in BufReader::new(r).lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || (lineno == 0 && trimmed.eq_ignore_ascii_case("q,p")) {
                continue;
            }
            let mut parts = trimmed.split(',');
            let q = parts
                .next()
                .ok_or_else(|| AccelError::CsvParse(format!("line {}: missing q", lineno + 1)))?;
            let p = parts
                .next()
                .ok_or_else(|| AccelError::CsvParse(format!("line {}: missing p", lineno + 1)))?;
            let q: f64 = q.trim().parse().map_err(|e| {
                AccelError::CsvParse(format!("line {}: bad q ({e})", lineno + 1))
            })?;
            let p: f64 = p.trim().parse().map_err(|e| {
                AccelError::CsvParse(format!("line {}: bad p ({e})", lineno + 1))
            })?;
            vertices.push([q, p]);
        }
        Contour::new(vertices)
    }
}

fn sub2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = sub2(a, b);
    (d[0] * d[0] + d[1] * d[1]).sqrt()
}

fn on_segment(a: [f64; 2], b: [f64; 2], x: [f64; 2]) -> bool {
    cross(sub2(b, a), sub2(x, a)) == 0.0
        && x[0] >= a[0].min(b[0])
        && x[0] <= a[0].max(b[0])
        && x[1] >= a[1].min(b[1])
        && x[1] <= a[1].max(b[1])
}

fn segments_intersect(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let d1 = cross(sub2(b, a), sub2(c, a));
    let d2 = cross(sub2(b, a), sub2(d, a));
    let d3 = cross(sub2(d, c), sub2(a, c));
    let d4 = cross(sub2(d, c), sub2(b, c));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(a, b, c))
        || (d2 == 0.0 && on_segment(a, b, d))
        || (d3 == 0.0 && on_segment(c, d, a))
        || (d4 == 0.0 && on_segment(c, d, b))
}

/// Counter-clockwise circle polygon with `m >= 16` vertices.
pub fn circle_contour(center: [f64; 2], radius: f64, m: usize) -> Result<Contour> {
    if m < 16 {
        return Err(AccelError::invalid("circle contour needs at least 16 vertices"));
    }
    if !(radius > 0.0) {
        return Err(AccelError::invalid("radius must be positive"));
    }
    let vertices = (0..m)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
            [center[0] + radius * theta.cos(), center[1] + radius * theta.sin()]
        })
        .collect();
    // Simple by construction (a radial graph around the center).
    Ok(Contour::from_vertices_unchecked(vertices))
}

/// Counter-clockwise polygon tracing the energy level set
/// `{ (q, p) : 1/2 p^2 + f(q)/L = energy }` of a one-dimensional strongly
/// convex objective. The boundary point along each ray from the origin is
/// found by doubling and bisection; the total energy is radially increasing
/// for these objectives, so the bracket always exists.
pub fn level_set_contour(obj: &Objective, energy: f64, m: usize) -> Result<Contour> {
    if obj.dim() != 1 {
        return Err(AccelError::invalid("level-set contours require a 1-d objective"));
    }
    if !(energy > 0.0) {
        return Err(AccelError::invalid("energy must be positive"));
    }
    if m < 16 {
        return Err(AccelError::invalid("level-set contour needs at least 16 vertices"));
    }
    let h = |q: f64, p: f64| 0.5 * p * p + obj.value(&[q]) / obj.lipschitz();
    let mut vertices = Vec::with_capacity(m);
    for j in 0..m {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
        let (cq, sp) = (theta.cos(), theta.sin());
        let mut hi = 1.0;
        let mut grew = 0;
        while h(hi * cq, hi * sp) < energy {
            hi *= 2.0;
            grew += 1;
            if grew > 200 {
                return Err(AccelError::LevelSet(format!(
                    "no bracket along direction {theta}"
                )));
            }
        }
        let mut lo = 0.0;
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if h(mid * cq, mid * sp) < energy {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = 0.5 * (lo + hi);
        vertices.push([r * cq, r * sp]);
    }
    Ok(Contour::from_vertices_unchecked(vertices))
}

fn map_vertex(
    obj: &Objective,
    sched: &DampingSchedule,
    v: [f64; 2],
    t: f64,
    cfg: &StepperConfig,
) -> [f64; 2] {
    let z = PhasePoint::scalar(v[0], v[1]);
    let next = integrators::semi_implicit_step(obj, sched, &z, t, cfg);
    [next.q[0], next.p[0]]
}

const REFINE_MAX_DEPTH: usize = 24;

#[allow(clippy::too_many_arguments)]
fn refine_edge(
    obj: &Objective,
    sched: &DampingSchedule,
    t: f64,
    cfg: &StepperConfig,
    a: [f64; 2],
    b: [f64; 2],
    img_a: [f64; 2],
    img_b: [f64; 2],
    threshold: f64,
    depth: usize,
    out: &mut Vec<[f64; 2]>,
) {
    if depth >= REFINE_MAX_DEPTH || dist(img_a, img_b) <= threshold {
        return;
    }
    let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    let img_mid = map_vertex(obj, sched, mid, t, cfg);
    refine_edge(obj, sched, t, cfg, a, mid, img_a, img_mid, threshold, depth + 1, out);
    out.push(img_mid);
    refine_edge(obj, sched, t, cfg, mid, b, img_mid, img_b, threshold, depth + 1, out);
}

/// Maps a contour through one discrete step. Midpoints are inserted on the
/// pre-image of any edge whose image exceeds `refine_threshold`, recursively,
/// so the polygonal image tracks the curved image contour.
pub fn evolve_contour(
    obj: &Objective,
    sched: &DampingSchedule,
    c: &Contour,
    t: f64,
    cfg: &StepperConfig,
    refine_threshold: f64,
) -> Contour {
    let v = c.vertices();
    let n = v.len();
    let images: Vec<[f64; 2]> = v.iter().map(|&x| map_vertex(obj, sched, x, t, cfg)).collect();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let j = (i + 1) % n;
        out.push(images[i]);
        refine_edge(
            obj, sched, t, cfg, v[i], v[j], images[i], images[j], refine_threshold, 0, &mut out,
        );
    }
    Contour::from_vertices_unchecked(out)
}

/// Default refinement threshold: one percent of the contour diameter.
pub fn default_refine_threshold(c: &Contour) -> f64 {
    0.01 * c.bbox_diagonal()
}

/// The three routes to the one-step area change, which agree up to a
/// discretization error that vanishes under vertex refinement.
#[derive(Debug, Clone, Copy)]
pub struct AreaContractionReport {
    /// Signed area of the mapped contour minus the signed area of the input.
    pub area_change: f64,
    /// `-T_s` times the trapezoid-rule line integral of the non-potential
    /// force along the contour.
    pub line_integral: f64,
    /// `-T_s` times the region integral of the damping density
    /// `2d + (beta/L) * hessian(q + beta p)` over the enclosed region.
    pub region_integral: f64,
}

fn fnp_scalar(obj: &Objective, sched: &DampingSchedule, v: [f64; 2], t: f64) -> f64 {
    let z = PhasePoint::scalar(v[0], v[1]);
    dynamics::non_potential_force(obj, sched, &z, t)[0]
}

fn line_integral_fnp(obj: &Objective, sched: &DampingSchedule, c: &Contour, t: f64) -> f64 {
    let v = c.vertices();
    let n = v.len();
    let g: Vec<f64> = v.iter().map(|&x| fnp_scalar(obj, sched, x, t)).collect();
    let mut acc = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        acc += 0.5 * (g[i] + g[j]) * (v[j][0] - v[i][0]);
    }
    acc
}

/// Second derivative of a 1-d objective by central differences.
fn hessian_1d(obj: &Objective, x: f64) -> f64 {
    let h = HESSIAN_FD_STEP;
    (obj.gradient(&[x + h])[0] - obj.gradient(&[x - h])[0]) / (2.0 * h)
}

/// Region integral of `integrand` over the polygon via fan decomposition from
/// the vertex centroid, each fan triangle cut into radial strips no longer
/// than the polygon's largest edge, one centroid sample per strip. Signed
/// strip areas make the decomposition exact for non-convex polygons.
fn region_integral<F: Fn(f64, f64) -> f64>(c: &Contour, integrand: F) -> f64 {
    let v = c.vertices();
    let n = v.len();
    let apex = {
        let mut acc = [0.0, 0.0];
        for x in v {
            acc[0] += x[0];
            acc[1] += x[1];
        }
        [acc[0] / n as f64, acc[1] / n as f64]
    };
    let target = c.max_edge_length().max(1e-9 * (1.0 + c.bbox_diagonal()));
    let mut total = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        let a = sub2(v[i], apex);
        let b = sub2(v[j], apex);
        let tri_area = 0.5 * cross(a, b);
        if tri_area == 0.0 {
            continue;
        }
        let reach = (a[0] * a[0] + a[1] * a[1])
            .max(b[0] * b[0] + b[1] * b[1])
            .sqrt();
        let strips = ((reach / target).ceil() as usize).clamp(1, 100_000);
        let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        for s in 0..strips {
            let t0 = s as f64 / strips as f64;
            let t1 = (s + 1) as f64 / strips as f64;
            let w = t1 * t1 - t0 * t0;
            // Centroid of the strip lies at fraction (2/3)(t1^3-t0^3)/(t1^2-t0^2)
            // along the median.
            let tc = 2.0 / 3.0 * (t1 * t1 * t1 - t0 * t0 * t0) / w;
            let x = [apex[0] + tc * mid[0], apex[1] + tc * mid[1]];
            total += integrand(x[0], x[1]) * tri_area * w;
        }
    }
    total
}

/// Evaluates the one-step area change three ways on a one-dimensional
/// objective. The evolved image uses the default refinement threshold.
pub fn area_contraction_report(
    obj: &Objective,
    sched: &DampingSchedule,
    c: &Contour,
    t: f64,
    cfg: &StepperConfig,
) -> Result<AreaContractionReport> {
    if obj.dim() != 1 {
        return Err(AccelError::invalid("area accounting requires a 1-d objective"));
    }
    let ts = cfg.step_size;
    let (d, beta) = sched.coefficients(t)?;
    let image = evolve_contour(obj, sched, c, t, cfg, default_refine_threshold(c));
    let area_change = image.signed_area() - c.signed_area();
    let line_integral = -ts * line_integral_fnp(obj, sched, c, t);
    let inv_l = 1.0 / obj.lipschitz();
    let region = region_integral(c, |q, p| {
        2.0 * d + beta * inv_l * hessian_1d(obj, q + beta * p)
    });
    Ok(AreaContractionReport {
        area_change,
        line_integral,
        region_integral: -ts * region,
    })
}

/// Instantaneous area contraction rate of the continuous flow along the
/// contour: the negated line integral of the non-potential force.
pub fn continuous_area_rate(
    obj: &Objective,
    sched: &DampingSchedule,
    c: &Contour,
    t: f64,
) -> Result<f64> {
    if obj.dim() != 1 {
        return Err(AccelError::invalid("area accounting requires a 1-d objective"));
    }
    sched.coefficients(t)?;
    Ok(-line_integral_fnp(obj, sched, c, t))
}

/// Evolves an energy level set over one step interval with (i) the reference
/// integrator and (ii) one discrete step, returning both enclosed areas as
/// `(continuous, discrete)`. The discrete map contracts at least as much.
pub fn compare_level_set_contraction(
    obj: &Objective,
    sched: &DampingSchedule,
    energy: f64,
    step_size: f64,
    m: usize,
) -> Result<(f64, f64)> {
    let c = level_set_contour(obj, energy, m)?;
    let cfg = StepperConfig::new(step_size)?;

    let substeps = 64;
    let continuous_vertices: Vec<[f64; 2]> = c
        .vertices()
        .iter()
        .map(|&v| {
            let z = PhasePoint::scalar(v[0], v[1]);
            let rec =
                integrators::reference_integrate(obj, sched, &z, 0.0, step_size, substeps)?;
            let last = rec.last();
            Ok([last.q[0], last.p[0]])
        })
        .collect::<Result<_>>()?;
    let continuous = Contour::from_vertices_unchecked(continuous_vertices).signed_area();

    let discrete = evolve_contour(obj, sched, &c, 0.0, &cfg, default_refine_threshold(&c))
        .signed_area();
    Ok((continuous, discrete))
}

/// Evolves the radius-`radius` origin circle and checks at every step that
/// the farthest vertex stays at distance at least
/// `radius * (1 - T_s (2d + beta/kappa))^(k/2)`.
///
/// The vertices are followed as genuine trajectories (no refinement). The
/// certificate that follows from L-smoothness alone is the `kappa = 1`
/// instance of the bound, where `2d + beta/kappa = 1`; larger `kappa` makes
/// the formula strictly stronger than what the area argument guarantees.
pub fn slowest_trajectory_bound(
    obj: &Objective,
    sched: &DampingSchedule,
    radius: f64,
    step_size: f64,
    steps: usize,
    m: usize,
) -> Result<bool> {
    if obj.dim() != 1 {
        return Err(AccelError::invalid("trajectory bound requires a 1-d objective"));
    }
    let kappa = sched
        .kappa()
        .ok_or_else(|| AccelError::invalid("trajectory bound needs a strongly convex schedule"))?;
    if !(step_size > 0.0 && step_size < 1.0) {
        return Err(AccelError::invalid("step size must lie in (0, 1)"));
    }
    let cfg = StepperConfig::new(step_size)?;
    let (d, beta) = sched.coefficients(0.0)?;
    let rate = 1.0 - step_size * (2.0 * d + beta / kappa);
    let circle = circle_contour([0.0, 0.0], radius, m)?;
    let mut vertices: Vec<[f64; 2]> = circle.vertices().to_vec();
    // m vertices sample the extremal direction to within pi/m, a second-order
    // deficit in the observed max radius.
    let sampling_slack = (std::f64::consts::PI / m as f64).powi(2) + 1e-9;
    for k in 1..=steps {
        let t = (k - 1) as f64 * step_size;
        for v in &mut vertices {
            *v = map_vertex(obj, sched, *v, t, &cfg);
        }
        let max_r = vertices
            .iter()
            .map(|v| (v[0] * v[0] + v[1] * v[1]).sqrt())
            .fold(0.0, f64::max);
        let bound = radius * rate.powf(k as f64 / 2.0);
        if max_r < bound * (1.0 - sampling_slack) {
            return Ok(false);
        }
    }
    Ok(true)
}
