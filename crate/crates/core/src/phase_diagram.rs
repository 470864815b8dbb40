//! Sweeps of the coupling plane, phase boundaries and transition orders.
//!
//! A boundary crossing sits between two neighbouring grid points with
//! different phase labels. Its order is decided by continuation: the winning
//! minimum on each side is followed into the other point. If it survives
//! there as a distinct local minimum, two branches coexist across the
//! crossing and the transition is first order. The jump in one-sided
//! finite-difference slopes of `F` is reported alongside as a second opinion;
//! disagreement between the two signals is flagged as insufficient
//! resolution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{
    classify_phase_with, hessian_classify, nematic_bessel_solve, polish_fixed_point, Couplings, Phase, PhasePoint, SolverOptions,
    Stability, Thermo,
};
use crate::error::{invalid, Error, Result};
use crate::quadrature::default_quadrature;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub alpha_1_range: [f64; 2],
    pub alpha_2_range: [f64; 2],
    pub n_1: usize,
    pub n_2: usize,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default = "half")]
    pub omega_r: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    /// Bisection steps used to place each boundary crossing inside its cell.
    #[serde(default = "default_refine")]
    pub refine_steps: usize,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn default_refine() -> usize {
    6
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            alpha_1_range: [0.0, 2.5],
            alpha_2_range: [0.0, 2.5],
            n_1: 101,
            n_2: 101,
            beta: 1.0,
            omega_r: 0.5,
            hbar: 1.0,
            refine_steps: default_refine(),
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_1 < 2 || self.n_2 < 2 {
            return invalid("grid needs at least two points per axis");
        }
        for r in [self.alpha_1_range, self.alpha_2_range] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] <= r[1] && r[0] >= 0.0) {
                return invalid(format!("bad coupling interval {r:?}"));
            }
        }
        self.thermo().validate()
    }

    pub fn thermo(&self) -> Thermo {
        Thermo { beta: self.beta, omega_r: self.omega_r, hbar: self.hbar }
    }

    pub fn alpha_1(&self, i: usize) -> f64 {
        lerp(self.alpha_1_range, i, self.n_1)
    }

    pub fn alpha_2(&self, j: usize) -> f64 {
        lerp(self.alpha_2_range, j, self.n_2)
    }

    pub fn alpha_2_samples(&self) -> Vec<f64> {
        (0..self.n_2).map(|j| self.alpha_2(j)).collect()
    }
}

fn lerp(r: [f64; 2], i: usize, n: usize) -> f64 {
    if i + 1 == n {
        r[1]
    } else {
        r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Alpha1,
    Alpha2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionOrder {
    FirstOrder,
    SecondOrder,
}

/// One crossing of a phase boundary between neighbouring grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCrossing {
    pub axis: Axis,
    /// Row-major indices `(i, j)` of the two grid points.
    pub from: [usize; 2],
    pub to: [usize; 2],
    pub phases: [Phase; 2],
    /// Refined boundary location `(alpha_1, alpha_2)`.
    pub location: [f64; 2],
    pub order: TransitionOrder,
    /// The other side's minimum survives as a distinct local minimum.
    pub hysteresis: bool,
    /// Free energy of the `from` branch continued to `to`, and of the `to`
    /// branch continued to `from`, where that branch is still a minimum.
    pub metastable_free_energy: [Option<f64>; 2],
    /// Mismatch between the two one-sided estimates of `dF/dalpha` at the
    /// crossing; absent when a side has a single grid point.
    pub slope_jump: Option<f64>,
    pub jump_threshold: f64,
    pub insufficient_resolution: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySegment {
    pub phases: [Phase; 2],
    pub order: TransitionOrder,
    pub axis: Axis,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayCurve {
    pub name: String,
    pub points: Vec<[f64; 2]>,
}

/// Analytic stability lines drawn over the numerical diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overlays {
    pub alpha_2: Vec<f64>,
    /// Positive nematic order parameter along the samples.
    pub theta_2: Vec<f64>,
    /// `1/(1+Theta_2)` on the positive branch.
    pub alpha_1_c: Vec<f64>,
    /// `1/(1-Theta_2)` on the negative branch (infinite where it is absent
    /// is avoided by reporting 1 for `alpha_2 <= 1`).
    pub alpha_1_c_negative: Vec<f64>,
    pub curves: Vec<OverlayCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub spec: GridSpec,
    /// Row-major over `(alpha_1 index, alpha_2 index)`.
    pub points: Vec<PhasePoint>,
    pub overlays: Overlays,
    pub crossings: Vec<BoundaryCrossing>,
    pub boundaries: Vec<BoundarySegment>,
    /// Centres of grid cells whose corners carry all three phases.
    pub triple_cells: Vec<[f64; 2]>,
    pub dropped_seeds: usize,
}

impl PhaseDiagram {
    pub fn point(&self, i: usize, j: usize) -> &PhasePoint {
        &self.points[i * self.spec.n_2 + j]
    }

    pub fn phases_present(&self) -> Vec<Phase> {
        let mut v: Vec<Phase> = self.points.iter().map(|p| p.phase).collect();
        v.sort();
        v.dedup();
        v
    }
}

/// Curves for the paramagnetic stability square and the nematic thresholds.
pub fn analytic_overlays(alpha_2_samples: &[f64]) -> Result<Overlays> {
    if alpha_2_samples.windows(2).any(|w| w[0] > w[1]) {
        return invalid("alpha_2 samples must be sorted");
    }
    let theta_2: Vec<f64> = alpha_2_samples.iter().map(|&a| nematic_bessel_solve(a)).collect();
    let alpha_1_c: Vec<f64> = theta_2.iter().map(|t| 1.0 / (1.0 + t)).collect();
    let alpha_1_c_negative: Vec<f64> = theta_2.iter().map(|t| 1.0 / (1.0 - t)).collect();
    let below: Vec<f64> = alpha_2_samples.iter().copied().filter(|&a| a <= 1.0).collect();
    let curves = vec![
        OverlayCurve { name: "paramagnetic_alpha_1".into(), points: below.iter().map(|&a| [1.0, a]).collect() },
        OverlayCurve {
            name: "paramagnetic_alpha_2".into(),
            points: if below.is_empty() { vec![] } else { vec![[0.0, 1.0], [1.0, 1.0]] },
        },
        OverlayCurve {
            name: "nematic_alpha_1_c".into(),
            points: alpha_2_samples.iter().zip(&alpha_1_c).map(|(&a2, &a1)| [a1, a2]).collect(),
        },
    ];
    Ok(Overlays { alpha_2: alpha_2_samples.to_vec(), theta_2, alpha_1_c, alpha_1_c_negative, curves })
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))
}

/// Classifies every grid point and annotates the boundaries. The result does
/// not depend on the number of workers.
pub fn sweep_grid(spec: &GridSpec, workers: usize, opts: &SolverOptions) -> Result<PhaseDiagram> {
    spec.validate()?;
    let thermo = spec.thermo();
    let quad = default_quadrature();
    let pool = pool(workers)?;
    let n = spec.n_1 * spec.n_2;
    let points: Vec<Result<PhasePoint>> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|idx| {
                let alpha = Couplings::new(spec.alpha_1(idx / spec.n_2), spec.alpha_2(idx % spec.n_2));
                classify_phase_with(quad, alpha, thermo, opts, &[])
            })
            .collect()
    });
    let points = points.into_iter().collect::<Result<Vec<_>>>()?;
    let mut diagram = PhaseDiagram {
        spec: spec.clone(),
        points,
        overlays: analytic_overlays(&spec.alpha_2_samples())?,
        crossings: Vec::new(),
        boundaries: Vec::new(),
        triple_cells: Vec::new(),
        dropped_seeds: 0,
    };
    let mut crossings = pool.install(|| transition_order(&diagram, Axis::Alpha1, opts))?;
    crossings.extend(pool.install(|| transition_order(&diagram, Axis::Alpha2, opts))?);
    diagram.boundaries = assemble_segments(&crossings);
    diagram.crossings = crossings;
    diagram.triple_cells = triple_cells(&diagram);
    Ok(diagram)
}

fn triple_cells(d: &PhaseDiagram) -> Vec<[f64; 2]> {
    let s = &d.spec;
    let mut out = Vec::new();
    for i in 0..s.n_1 - 1 {
        for j in 0..s.n_2 - 1 {
            let mut seen = [false; 3];
            for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                seen[d.point(i + di, j + dj).phase.label() as usize] = true;
            }
            if seen.iter().all(|&b| b) {
                out.push([
                    0.5 * (s.alpha_1(i) + s.alpha_1(i + 1)),
                    0.5 * (s.alpha_2(j) + s.alpha_2(j + 1)),
                ]);
            }
        }
    }
    out
}

struct Line {
    idx: Vec<[usize; 2]>,
    x: Vec<f64>,
}

fn lines(spec: &GridSpec, axis: Axis) -> Vec<Line> {
    match axis {
        Axis::Alpha1 => (0..spec.n_2)
            .map(|j| Line { idx: (0..spec.n_1).map(|i| [i, j]).collect(), x: (0..spec.n_1).map(|i| spec.alpha_1(i)).collect() })
            .collect(),
        Axis::Alpha2 => (0..spec.n_1)
            .map(|i| Line { idx: (0..spec.n_2).map(|j| [i, j]).collect(), x: (0..spec.n_2).map(|j| spec.alpha_2(j)).collect() })
            .collect(),
    }
}

/// Locates and classifies every boundary crossing along grid lines parallel
/// to `axis`.
pub fn transition_order(diagram: &PhaseDiagram, axis: Axis, opts: &SolverOptions) -> Result<Vec<BoundaryCrossing>> {
    let spec = &diagram.spec;
    let mut jobs = Vec::new();
    for line in lines(spec, axis) {
        let f: Vec<f64> = line.idx.iter().map(|&[i, j]| diagram.point(i, j).free_energy).collect();
        let labels: Vec<Phase> = line.idx.iter().map(|&[i, j]| diagram.point(i, j).phase).collect();
        for k in 0..labels.len() - 1 {
            if labels[k] != labels[k + 1] {
                jobs.push((line.idx[k], line.idx[k + 1], f.clone(), labels.clone(), line.x.clone(), k));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(a, b, f, labels, x, k)| {
            let mut c = classify_crossing(diagram, axis, a, b, opts)?;
            let x_c = match axis {
                Axis::Alpha1 => c.location[0],
                Axis::Alpha2 => c.location[1],
            };
            let (jump, threshold) = slope_jump(&f, &labels, &x, k, x_c);
            let by_slope = jump.is_finite() && jump > threshold;
            let ambiguous = !jump.is_finite() || (jump > 0.5 * threshold && jump < 2.0 * threshold);
            c.slope_jump = jump.is_finite().then_some(jump);
            c.jump_threshold = threshold;
            c.insufficient_resolution = ambiguous || by_slope != c.hysteresis;
            Ok(c)
        })
        .collect()
}

/// Slope at `at_x` of the interpolant through up to three consecutive
/// same-phase points starting at index `from` and moving away from the
/// boundary.
fn one_sided_slope(f: &[f64], labels: &[Phase], x: &[f64], from: usize, forward: bool, at_x: f64) -> f64 {
    let step = |n: usize| if forward { from.checked_add(n) } else { from.checked_sub(n) };
    let same = |k: Option<usize>| k.filter(|&k| k < f.len() && labels[k] == labels[from]);
    match (same(step(1)), same(step(2))) {
        (Some(k1), k2) => {
            let d1 = (f[k1] - f[from]) / (x[k1] - x[from]);
            match k2 {
                Some(k2) => {
                    let d2 = ((f[k2] - f[k1]) / (x[k2] - x[k1]) - d1) / (x[k2] - x[from]);
                    d1 + d2 * (2.0 * at_x - x[from] - x[k1])
                }
                None => d1,
            }
        }
        _ => f64::NAN,
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Mismatch of the two one-sided slopes of `F`, both evaluated at the
/// crossing `x_c`, and five times the typical slope change per grid step
/// inside the two adjacent phases.
fn slope_jump(f: &[f64], labels: &[Phase], x: &[f64], k: usize, x_c: f64) -> (f64, f64) {
    let h = x[1] - x[0];
    if !(h > 0.0) {
        return (0.0, 0.0);
    }
    let left = one_sided_slope(f, labels, x, k, false, x_c);
    let right = one_sided_slope(f, labels, x, k + 1, true, x_c);
    let jump = if left.is_finite() && right.is_finite() { (right - left).abs() } else { f64::NAN };
    let noise_of = |phase: Phase| {
        let d2: Vec<f64> = (1..f.len() - 1)
            .filter(|&j| labels[j - 1] == phase && labels[j] == phase && labels[j + 1] == phase)
            .map(|j| (f[j + 1] - 2.0 * f[j] + f[j - 1]).abs() / h)
            .collect();
        median(d2)
    };
    let noise = noise_of(labels[k]).max(noise_of(labels[k + 1])).max(1e-12);
    (jump, 5.0 * noise)
}

fn classify_crossing(
    d: &PhaseDiagram,
    axis: Axis,
    a: [usize; 2],
    b: [usize; 2],
    opts: &SolverOptions,
) -> Result<BoundaryCrossing> {
    let pa = d.point(a[0], a[1]);
    let pb = d.point(b[0], b[1]);
    let thermo = d.spec.thermo();
    let meta = [survives(pa, pb, thermo, opts)?, survives(pb, pa, thermo, opts)?];
    let hysteresis = meta.iter().any(Option::is_some);
    let location = refine_location(d, pa, pb, opts)?;
    Ok(BoundaryCrossing {
        axis,
        from: a,
        to: b,
        phases: [pa.phase, pb.phase],
        location,
        order: if hysteresis { TransitionOrder::FirstOrder } else { TransitionOrder::SecondOrder },
        hysteresis,
        metastable_free_energy: meta,
        slope_jump: None,
        jump_threshold: 0.0,
        insufficient_resolution: false,
    })
}

/// Follows the winner at `src` into the couplings of `dst`. Returns its free
/// energy there if it converges to a local minimum distinct from the winner.
fn survives(src: &PhasePoint, dst: &PhasePoint, thermo: Thermo, opts: &SolverOptions) -> Result<Option<f64>> {
    let quad = default_quadrature();
    let alpha = Couplings::new(dst.alpha_1, dst.alpha_2);
    let (y, m) = match polish_fixed_point(quad, alpha, src.global_min.y(), opts) {
        Ok(found) => found,
        Err(Error::NonConvergence(..)) => return Ok(None),
        Err(e) => return Err(e),
    };
    // the source phase must persist as its own branch, not relax onto the
    // destination winner or one of its mirror images
    if Phase::from_order(y[0], y[1], opts.zero_tol) != src.phase {
        return Ok(None);
    }
    if hessian_classify(y, alpha, opts)?.stability != Stability::Minimum {
        return Ok(None);
    }
    let g = alpha.alpha_1 * y[0] * y[0] + alpha.alpha_2 * y[1] * y[1] - m.log_integral;
    Ok(Some(thermo.kinetic_offset() + g / thermo.beta))
}

fn refine_location(d: &PhaseDiagram, pa: &PhasePoint, pb: &PhasePoint, opts: &SolverOptions) -> Result<[f64; 2]> {
    let thermo = d.spec.thermo();
    let quad = default_quadrature();
    let (mut lo, mut hi) = ([pa.alpha_1, pa.alpha_2], [pb.alpha_1, pb.alpha_2]);
    for _ in 0..d.spec.refine_steps {
        let mid = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
        let p = classify_phase_with(quad, Couplings::new(mid[0], mid[1]), thermo, opts, &[])?;
        if p.phase == pa.phase {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok([0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])])
}

/// Chains crossings of the same kind on consecutive grid lines into
/// polylines.
pub fn assemble_segments(crossings: &[BoundaryCrossing]) -> Vec<BoundarySegment> {
    let key = |c: &BoundaryCrossing| {
        let mut ph = c.phases;
        ph.sort();
        (c.axis == Axis::Alpha2, ph, c.order == TransitionOrder::FirstOrder)
    };
    // line index perpendicular to the crossing direction
    let line_of = |c: &BoundaryCrossing| match c.axis {
        Axis::Alpha1 => c.from[1],
        Axis::Alpha2 => c.from[0],
    };
    let mut sorted: Vec<&BoundaryCrossing> = crossings.iter().collect();
    sorted.sort_by(|a, b| {
        key(a)
            .cmp(&key(b))
            .then(line_of(a).cmp(&line_of(b)))
            .then(a.location[0].total_cmp(&b.location[0]))
            .then(a.location[1].total_cmp(&b.location[1]))
    });
    let mut segments: Vec<(BoundarySegment, usize)> = Vec::new();
    for c in sorted {
        let mut ph = c.phases;
        ph.sort();
        let extend = segments.iter_mut().rev().find(|(s, last)| {
            s.phases == ph && s.axis == c.axis && s.order == c.order && line_of(c) == last + 1
        });
        match extend {
            Some((s, last)) => {
                s.points.push(c.location);
                *last = line_of(c);
            }
            None => segments.push((
                BoundarySegment { phases: ph, order: c.order, axis: c.axis, points: vec![c.location] },
                line_of(c),
            )),
        }
    }
    segments.into_iter().map(|(s, _)| s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlays_below_bifurcation() {
        let o = analytic_overlays(&[0.0, 0.5, 1.0, 2.0]).unwrap();
        assert_eq!(&o.alpha_1_c[..3], &[1.0, 1.0, 1.0]);
        assert!(o.alpha_1_c[3] < 1.0);
        assert!(o.alpha_1_c_negative[3] > 1.0);
        assert!(analytic_overlays(&[1.0, 0.5]).is_err());
    }

    #[test]
    fn grid_spec_validation() {
        let mut s = GridSpec::default();
        assert!(s.validate().is_ok());
        s.n_1 = 1;
        assert!(s.validate().is_err());
        let s = GridSpec { alpha_1_range: [1.0, 0.5], ..GridSpec::default() };
        assert!(s.validate().is_err());
        let s = GridSpec { alpha_2_range: [-0.5, 0.5], ..GridSpec::default() };
        assert!(s.validate().is_err());
    }

    #[test]
    fn grid_endpoints_exact() {
        let s = GridSpec::default();
        assert_eq!(s.alpha_1(0), 0.0);
        assert_eq!(s.alpha_1(100), 2.5);
        assert_eq!(s.alpha_2(40), 1.0);
    }

    #[test]
    fn small_grid_below_unit_couplings() {
        // the origin is locally stable on the whole grid, but at (0.9, 0.9)
        // a ferromagnetic minimum near (0.65, 0.51) lies lower
        let spec = GridSpec { alpha_1_range: [0.0, 0.9], alpha_2_range: [0.0, 0.9], n_1: 3, n_2: 3, ..GridSpec::default() };
        let d = sweep_grid(&spec, 1, &SolverOptions::default()).unwrap();
        assert_eq!(d.points.len(), 9);
        for (k, p) in d.points.iter().enumerate() {
            let want = if k == 8 { Phase::Ferromagnetic } else { Phase::Paramagnetic };
            assert_eq!(p.phase, want, "{} {}", p.alpha_1, p.alpha_2);
        }
        let fm = d.point(2, 2).global_min;
        assert!((fm.y_1 - 0.65).abs() < 0.02 && (fm.y_2 - 0.51).abs() < 0.02, "{fm:?}");
        let spec = GridSpec { alpha_1_range: [0.0, 0.8], alpha_2_range: [0.0, 0.8], ..spec };
        let d = sweep_grid(&spec, 1, &SolverOptions::default()).unwrap();
        assert!(d.points.iter().all(|p| p.phase == Phase::Paramagnetic));
        assert!(d.crossings.is_empty());
    }

    #[test]
    fn column_crosses_into_nematic() {
        let spec = GridSpec { alpha_1_range: [0.2, 0.2], alpha_2_range: [0.5, 1.5], n_1: 2, n_2: 2, ..GridSpec::default() };
        let d = sweep_grid(&spec, 2, &SolverOptions::default()).unwrap();
        assert_eq!(d.point(0, 0).phase, Phase::Paramagnetic);
        assert_eq!(d.point(0, 1).phase, Phase::Nematic);
    }
}
