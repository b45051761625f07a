//! Initial-condition census: sweeps a box in the (u(0), v(0)) quarter-plane,
//! maps every node to its trajectory outcome, and localizes decaying
//! solutions by refining the sign structure of the per-component fates.
//!
//! The key observable is a pair of signs. A shot is `+1` in a component if
//! that component eventually crosses zero, `-1` if it stays positive and
//! bounded to the probe horizon, `0` if it decays. When one component dies
//! first the other's fate is hidden, so the probe pins the dead component to
//! the invariant zero state and continues integrating the survivor; a
//! survivor already at or below zero crossed together with its partner.
//! Decaying solutions are the common zeros of the two sign fields, and a
//! cell whose corners flip in both components brackets one, so quadtree
//! refinement converges to it.
//!
//! Signs alone cannot tell a curve of solutions from a near-miss artifact:
//! close to a symmetric solution the two sign-change curves run
//! exponentially close along the diagonal and bracket cells chain along
//! them, exactly as they do along a genuine solution curve. The tiebreaker
//! is the miss distance (closest relative approach of the trajectory to the
//! phase-space origin). On a solution curve a sign bisection lands on
//! trajectories that decay to the event floor; along an artifact chain the
//! landed trajectories bottom out far higher. Suspicious chains are probed
//! that way and either confirmed as a degenerate continuum or pruned back
//! to their best cells, and every reported hit must itself pass the miss
//! gate.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ground::ground_on_diagonal;
use crate::integrator::{
    integrate, probe, probe_from_state, Component, OutcomeKind, ShootingConfig,
};
use crate::model::{residual, Nonlinearity, Parameters};
use crate::profile::RadialProfile;
use crate::scalar::Scalar;

/// Hits closer than this in the initial-value plane count as one solution.
pub const CLUSTER_RADIUS: f64 = 1e-3;
/// Sign-based subdivision stops at this cell size. The quadrant structure
/// around a solution is crisp at coarse scales but dissolves into
/// crossing-order noise below roughly 0.01, so finer localization is done
/// by descending the miss valley instead.
const COARSE_FLOOR: f64 = 0.02;
/// Compass descent shrinks its step to this before reporting, which puts
/// hit coordinates within a few parts in 1e-5.
const DESCENT_STEP_MIN: f64 = 1e-6;
/// Early exit for the descent: this miss already means the trajectory
/// tracks a decaying solution essentially to the event floor.
const DESCENT_MISS_DONE: f64 = 1e-4;
const DESCENT_EVAL_CAP: usize = 600;
/// Safety stop for the live set; the witness pass keeps honest workloads
/// far below this.
const HARD_CAP: usize = 4096;
/// Live-set size that triggers the witness pass.
const SUSPICIOUS_TRIGGER: usize = 96;
/// Clusters at least this populous and this long are continuum suspects.
const SUSPICIOUS_MEMBERS: usize = 24;
const CHAIN_EXTENT: f64 = 0.05;
/// Cells kept per cluster after a rejected continuum suspicion.
const PRUNE_KEEP: usize = 32;
/// A witness bisection must bottom out below this miss to certify that a
/// genuine solution sits on the bracketing curve.
const WITNESS_MISS: f64 = 1e-3;
/// Reported hits must re-integrate at least this close to the origin.
const HIT_MISS_MAX: f64 = 0.05;
/// Probe horizon 15/sqrt(m) with the default decay rate m = 1/2: growth or
/// collapse is decided well before this radius.
const HORIZON_M: f64 = 0.5;

/// Rectangle of initial heights to sweep, inside the closed first quadrant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchBox<S: Scalar> {
    pub u_lo: S,
    pub u_hi: S,
    pub v_lo: S,
    pub v_hi: S,
}

impl<S: Scalar> SearchBox<S> {
    pub fn new(u_lo: S, u_hi: S, v_lo: S, v_hi: S) -> Result<Self> {
        let ok = [u_lo, u_hi, v_lo, v_hi].iter().all(|x| x.is_finite())
            && u_lo >= S::zero()
            && v_lo >= S::zero()
            && u_hi > u_lo
            && v_hi > v_lo;
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "search box must satisfy 0 <= lo < hi per axis, got u [{u_lo}, {u_hi}], \
                 v [{v_lo}, {v_hi}]"
            )));
        }
        Ok(SearchBox { u_lo, u_hi, v_lo, v_hi })
    }

    pub fn square(lo: S, hi: S) -> Result<Self> {
        SearchBox::new(lo, hi, lo, hi)
    }

    fn is_swap_symmetric(&self) -> bool {
        self.u_lo == self.v_lo && self.u_hi == self.v_hi
    }
}

/// One localized decaying solution.
#[derive(Debug, Clone)]
pub struct CensusHit<S: Scalar> {
    pub u0: S,
    pub v0: S,
    /// Closest relative approach to the phase-space origin along the tight
    /// re-integration; the depth to which the shot tracks a decaying tail.
    pub miss: S,
    /// Equation residual of the stored profile.
    pub residual: S,
    /// Tight re-integration truncated at the closest approach.
    pub profile: RadialProfile<S>,
}

/// Census over one search box. Completeness is grid-limited; the resolution
/// travels with the result and no completeness claim is made.
#[derive(Debug, Clone)]
pub struct CensusResult<S: Scalar> {
    pub params: Parameters<S>,
    pub solutions: Vec<CensusHit<S>>,
    /// A connected curve of solutions was detected instead of points.
    pub degenerate: bool,
    pub search_box: SearchBox<S>,
    pub resolution: (usize, usize),
    basin: Vec<u8>,
}

impl<S: Scalar> CensusResult<S> {
    /// Outcome code per sweep node, row-major: entry `i * nv + j` holds the
    /// node with the i-th u height and j-th v height.
    pub fn basin(&self) -> &[u8] {
        &self.basin
    }

    /// Basin map as bare CSV, one row per u height, codes 0 = decay,
    /// 1 = zero crossing, 2 = blowup, 3 = indeterminate.
    pub fn write_basin_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        let (nu, nv) = self.resolution;
        for i in 0..nu {
            let row: Vec<String> =
                self.basin[i * nv..(i + 1) * nv].iter().map(|c| c.to_string()).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.params.n,
            "q": self.params.q.as_f64(),
            "b": self.params.b.as_f64(),
            "search_box": {
                "u_lo": self.search_box.u_lo.as_f64(),
                "u_hi": self.search_box.u_hi.as_f64(),
                "v_lo": self.search_box.v_lo.as_f64(),
                "v_hi": self.search_box.v_hi.as_f64(),
            },
            "resolution": [self.resolution.0, self.resolution.1],
            "degenerate": self.degenerate,
            "solutions": self.solutions.iter().map(|h| serde_json::json!({
                "u0": h.u0.as_f64(),
                "v0": h.v0.as_f64(),
                "miss": h.miss.as_f64(),
                "residual": h.residual.as_f64(),
                "r_end": h.profile.r_end().as_f64(),
            })).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Fate<S: Scalar> {
    kind: OutcomeKind,
    su: i8,
    sv: i8,
    /// Closest relative approach over both probe legs.
    m: S,
}

fn swap_fate<S: Scalar>(f: Fate<S>) -> Fate<S> {
    Fate { kind: f.kind, su: f.sv, sv: f.su, m: f.m }
}

/// Probes one shot and resolves both component signs. After a zero crossing
/// the dead component is pinned to the invariant zero state and the
/// survivor is integrated on; a survivor at or below zero at the event
/// crossed simultaneously and counts as crossed itself.
fn signed_fate<S: Scalar>(
    f: &Nonlinearity<S>,
    params: &Parameters<S>,
    u0: S,
    v0: S,
    cfg: &ShootingConfig<S>,
) -> Fate<S> {
    let end = match probe(f, params, u0, v0, cfg) {
        Ok(e) => e,
        // Step collapse only happens on runaway growth for this family.
        Err(_) => return Fate { kind: OutcomeKind::Blowup, su: 1, sv: 1, m: S::one() },
    };
    let kind = end.kind;
    match kind {
        OutcomeKind::Decay => Fate { kind, su: 0, sv: 0, m: end.miss },
        OutcomeKind::Indeterminate => Fate { kind, su: -1, sv: -1, m: end.miss },
        OutcomeKind::Blowup => Fate { kind, su: 1, sv: 1, m: end.miss },
        OutcomeKind::ZeroCrossing => {
            let crossed = end.crossed.unwrap_or(Component::U);
            let mut y = end.end_state;
            let survivor_value = match crossed {
                Component::U => {
                    y[0] = S::zero();
                    y[1] = S::zero();
                    y[2]
                }
                Component::V => {
                    y[2] = S::zero();
                    y[3] = S::zero();
                    y[0]
                }
            };
            // The continuation only settles the survivor's sign. Its own
            // miss must not enter m: the reduced scalar flow decays along
            // whole curves of initial points (semi-trivial states whose
            // crossed component is already invalid), and folding that in
            // would carve deep fake valleys into the miss landscape. The
            // coupled trajectory up to the event is the honest depth: at a
            // genuine solution everything is small there, on a semi-trivial
            // curve the survivor is still of order one.
            let survivor = if survivor_value <= S::zero() {
                1
            } else {
                match probe_from_state(f, params, end.end_radius, y, u0.max(v0), cfg) {
                    Err(_) => 1,
                    Ok(s) => match s.kind {
                        OutcomeKind::Decay => 0,
                        OutcomeKind::Indeterminate => -1,
                        _ => 1,
                    },
                }
            };
            match crossed {
                Component::U => Fate { kind, su: 1, sv: survivor, m: end.miss },
                Component::V => Fate { kind, su: survivor, sv: 1, m: end.miss },
            }
        }
    }
}

/// Evaluates fates for a batch of points in parallel. Mirror pairs share one
/// probe: the integrator is exactly swap-equivariant, so the fate of (v, u)
/// is the component swap of the fate of (u, v). Output order matches input
/// order regardless of worker count.
fn eval_batch<S: Scalar>(
    f: &Nonlinearity<S>,
    params: &Parameters<S>,
    cfg: &ShootingConfig<S>,
    pts: &[(S, S)],
) -> Vec<Fate<S>> {
    let canonical = |u: S, v: S| -> (u64, u64) {
        let (a, b) = (u.as_f64(), v.as_f64());
        if a >= b {
            (a.to_bits(), b.to_bits())
        } else {
            (b.to_bits(), a.to_bits())
        }
    };
    let mut uniq: Vec<(u64, u64)> = pts.iter().map(|&(u, v)| canonical(u, v)).collect();
    uniq.sort_unstable();
    uniq.dedup();
    let fates: Vec<Fate<S>> = uniq
        .par_iter()
        .map(|&(hi, lo)| {
            signed_fate(f, params, S::of(f64::from_bits(hi)), S::of(f64::from_bits(lo)), cfg)
        })
        .collect();
    pts.iter()
        .map(|&(u, v)| {
            let idx = uniq.binary_search(&canonical(u, v)).expect("key was inserted above");
            if u.as_f64() >= v.as_f64() {
                fates[idx]
            } else {
                swap_fate(fates[idx])
            }
        })
        .collect()
}

/// Axis-aligned cell with fates at its four corners, ordered
/// (lo, lo), (hi, lo), (lo, hi), (hi, hi).
#[derive(Debug, Clone, Copy)]
struct Cell<S: Scalar> {
    u0: S,
    u1: S,
    v0: S,
    v1: S,
    corner: [Fate<S>; 4],
}

impl<S: Scalar> Cell<S> {
    fn centroid(&self) -> (S, S) {
        let half = S::of(0.5);
        ((self.u0 + self.u1) * half, (self.v0 + self.v1) * half)
    }

    fn size(&self) -> S {
        (self.u1 - self.u0).max(self.v1 - self.v0)
    }

    fn min_miss(&self) -> S {
        self.corner.iter().map(|c| c.m).fold(S::of(f64::INFINITY), |a, b| a.min(b))
    }

    /// The corner whose probe came closest to the origin.
    fn best_corner(&self) -> (S, S) {
        let pts = [
            (self.u0, self.v0),
            (self.u1, self.v0),
            (self.u0, self.v1),
            (self.u1, self.v1),
        ];
        let mut best = 0;
        for i in 1..4 {
            if self.corner[i].m < self.corner[best].m {
                best = i;
            }
        }
        pts[best]
    }
}

/// True when each component's sign takes both values somewhere on the
/// corners; a zero sign counts for both, being on the boundary. One corner
/// must also have aligned signs: solutions always show an aligned sector
/// (sub-sub toward the origin, super-super beyond), while corners that are
/// all anti-aligned straddle a crossing-order boundary, not a solution.
fn brackets_solution<S: Scalar>(corner: &[Fate<S>; 4]) -> bool {
    let (mut up, mut un, mut vp, mut vn, mut aligned) = (false, false, false, false, false);
    for f in corner {
        up |= f.su >= 0;
        un |= f.su <= 0;
        vp |= f.sv >= 0;
        vn |= f.sv <= 0;
        aligned |= i16::from(f.su) * i16::from(f.sv) >= 0;
    }
    up && un && vp && vn && aligned
}

fn single_linkage<S: Scalar>(pts: &[(S, S)], radius: S) -> Vec<Vec<usize>> {
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let n = pts.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let r2 = radius * radius;
    for i in 0..n {
        for j in i + 1..n {
            let du = pts[i].0 - pts[j].0;
            let dv = pts[i].1 - pts[j].1;
            if du * du + dv * dv <= r2 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                // Deterministic representative: the smaller index wins.
                if ri < rj {
                    parent[rj] = ri;
                } else {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut slot: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        match slot[root] {
            Some(c) => clusters[c].push(i),
            None => {
                slot[root] = Some(clusters.len());
                clusters.push(vec![i]);
            }
        }
    }
    clusters
}

fn bbox_extent<S: Scalar>(pts: &[(S, S)], members: &[usize]) -> S {
    let mut lo = pts[members[0]];
    let mut hi = lo;
    for &i in members {
        lo = (lo.0.min(pts[i].0), lo.1.min(pts[i].1));
        hi = (hi.0.max(pts[i].0), hi.1.max(pts[i].1));
    }
    ((hi.0 - lo.0).powi(2) + (hi.1 - lo.1).powi(2)).sqrt()
}

/// Bisects the sign flip across one cell and reports how close to the
/// origin the landed trajectory gets. On a genuine solution curve the
/// landing decays to the event floor; on a near-miss chain it bottoms out
/// orders of magnitude higher.
fn witness_miss<S: Scalar>(
    f: &Nonlinearity<S>,
    params: &Parameters<S>,
    cfg: &ShootingConfig<S>,
    cell: &Cell<S>,
) -> S {
    let pts = [
        (cell.u0, cell.v0),
        (cell.u1, cell.v0),
        (cell.u0, cell.v1),
        (cell.u1, cell.v1),
    ];
    let pair = |sign: &dyn Fn(&Fate<S>) -> i8| -> Option<(usize, usize)> {
        let mut pos = None;
        let mut neg = None;
        for (i, c) in cell.corner.iter().enumerate() {
            if sign(c) > 0 && pos.is_none() {
                pos = Some(i);
            }
            if sign(c) < 0 && neg.is_none() {
                neg = Some(i);
            }
        }
        pos.zip(neg)
    };
    let (use_u, (p, n)) = if let Some(pn) = pair(&|c| c.su) {
        (true, pn)
    } else if let Some(pn) = pair(&|c| c.sv) {
        (false, pn)
    } else {
        // A zero corner is already solution grade.
        return cell.min_miss();
    };
    let (mut a, mut b) = (pts[p], pts[n]);
    let half = S::of(0.5);
    let mut best = cell.min_miss();
    for _ in 0..48 {
        let mid = ((a.0 + b.0) * half, (a.1 + b.1) * half);
        let fate = signed_fate(f, params, mid.0, mid.1, cfg);
        best = best.min(fate.m);
        let s = if use_u { fate.su } else { fate.sv };
        if s == 0 {
            return fate.m;
        }
        if s > 0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    best
}

/// Compass walk downhill on the probe miss, the reliable signal at scales
/// where corner signs turn noisy. Around a decaying solution the miss is a
/// root-type cone with no interior minima, so the walk converges linearly
/// to a few parts in 1e-5; started inside a crossing-order zone it stalls
/// at a miss the final gate rejects.
fn descend_miss<S: Scalar>(
    f: &Nonlinearity<S>,
    params: &Parameters<S>,
    cfg: &ShootingConfig<S>,
    search: &SearchBox<S>,
    start: (S, S),
    step0: S,
) -> (S, S) {
    const DIRS: [(f64, f64); 8] = [
        (1.0, 0.0),
        (-1.0, 0.0),
        (0.0, 1.0),
        (0.0, -1.0),
        (1.0, 1.0),
        (1.0, -1.0),
        (-1.0, 1.0),
        (-1.0, -1.0),
    ];
    let clamp = |x: S, lo: S, hi: S| x.max(lo).min(hi);
    let mut at = start;
    let mut miss = signed_fate(f, params, at.0, at.1, cfg).m;
    let mut step = step0;
    let done = S::of(DESCENT_MISS_DONE);
    let min_step = S::of(DESCENT_STEP_MIN);
    let mut evals = 0usize;
    while step >= min_step && miss > done && evals < DESCENT_EVAL_CAP {
        let mut best: Option<((S, S), S)> = None;
        for (du, dv) in DIRS {
            let cand = (
                clamp(at.0 + step * S::of(du), search.u_lo, search.u_hi),
                clamp(at.1 + step * S::of(dv), search.v_lo, search.v_hi),
            );
            let m = signed_fate(f, params, cand.0, cand.1, cfg).m;
            evals += 1;
            if m < best.map_or(miss, |(_, b)| b) {
                best = Some((cand, m));
            }
        }
        match best {
            Some((pt, m)) => {
                at = pt;
                miss = m;
            }
            None => step = step * S::of(0.5),
        }
    }
    at
}

/// Re-integrates a converged hit tightly and stores the trajectory up to its
/// closest approach to the origin, which is the best numerical rendition of
/// the decaying solution the hit represents.
fn finalize_hit<S: Scalar>(
    f: &Nonlinearity<S>,
    params: &Parameters<S>,
    u0: S,
    v0: S,
    cfg: &ShootingConfig<S>,
) -> Result<CensusHit<S>> {
    let out = integrate(f, params, u0, v0, cfg)?;
    let p = &out.profile;
    let scale = u0.max(v0);
    let mag = |i: usize| {
        p.u()[i].max(p.v()[i]).max(p.du()[i].abs()).max(p.dv()[i].abs()) / scale
    };
    let mut best = p.len() - 1;
    let mut best_mag = mag(best);
    for i in 0..p.len() {
        let m = mag(i);
        if m < best_mag {
            best = i;
            best_mag = m;
        }
    }
    let keep = (best + 1).max(4).min(p.len());
    let profile = RadialProfile::from_samples(
        *params,
        p.grid()[..keep].to_vec(),
        p.u()[..keep].to_vec(),
        p.du()[..keep].to_vec(),
        p.v()[..keep].to_vec(),
        p.dv()[..keep].to_vec(),
    )?;
    let res = residual(f, &profile)?;
    Ok(CensusHit { u0, v0, miss: best_mag, residual: res, profile })
}

/// All heights u0 with a decaying diagonal shot (u0, u0). On the diagonal
/// the system collapses to the scalar equation with coupling factor 1 + b,
/// so the dichotomy bisection applies verbatim and yields exactly one height.
pub fn symmetric_slice<S: Scalar>(
    params: &Parameters<S>,
    cfg: &ShootingConfig<S>,
) -> Result<Vec<S>> {
    if !(params.b > S::of(-1.0)) {
        return Err(Error::InvalidParameters(format!(
            "diagonal reduction needs 1 + b > 0, got b = {}",
            params.b
        )));
    }
    let f = Nonlinearity::coupled_power(params);
    // The diagonal equilibrium height, strictly below the critical shot.
    let eq = (S::one() + params.b).powf(-S::one() / (S::of(2.0) * params.q - S::of(2.0)));
    let diag = ground_on_diagonal(&f, params, eq, cfg)?;
    Ok(vec![diag.height])
}

/// Sweeps `dims` cell-centered nodes over `search`, localizes every decaying
/// solution visible at that resolution, and returns hits plus the outcome
/// basin map. An empty hit list is a valid result.
pub fn census<S: Scalar>(
    params: &Parameters<S>,
    cfg: &ShootingConfig<S>,
    search: &SearchBox<S>,
    dims: (usize, usize),
) -> Result<CensusResult<S>> {
    cfg.validate()?;
    let (nu, nv) = dims;
    if nu < 32 || nv < 32 {
        return Err(Error::InvalidConfig(format!(
            "census grid must be at least 32x32, got {nu}x{nv}"
        )));
    }
    let f = Nonlinearity::coupled_power(params);
    let horizon = S::of(15.0 / HORIZON_M.sqrt());
    let probe_cfg = ShootingConfig { r_max: cfg.r_max.min(horizon), ..*cfg };
    let two = S::of(2.0);

    let du = (search.u_hi - search.u_lo) / S::of(nu as f64);
    let dv = (search.v_hi - search.v_lo) / S::of(nv as f64);
    let u_at = |i: usize| search.u_lo + (S::of(i as f64) + S::of(0.5)) * du;
    let v_at = |j: usize| search.v_lo + (S::of(j as f64) + S::of(0.5)) * dv;

    let mut nodes = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            nodes.push((u_at(i), v_at(j)));
        }
    }
    let fates = eval_batch(&f, params, &probe_cfg, &nodes);
    let basin: Vec<u8> = fates.iter().map(|ft| ft.kind.code()).collect();

    // Plaquettes between adjacent nodes that bracket a solution.
    let mut cells: Vec<Cell<S>> = Vec::new();
    for i in 0..nu - 1 {
        for j in 0..nv - 1 {
            let corner = [
                fates[i * nv + j],
                fates[(i + 1) * nv + j],
                fates[i * nv + j + 1],
                fates[(i + 1) * nv + j + 1],
            ];
            if brackets_solution(&corner) {
                cells.push(Cell {
                    u0: u_at(i),
                    u1: u_at(i + 1),
                    v0: v_at(j),
                    v1: v_at(j + 1),
                    corner,
                });
            }
        }
    }

    let floor = S::of(COARSE_FLOOR);
    let chain_extent = S::of(CHAIN_EXTENT);
    let witness_floor = S::of(WITNESS_MISS);
    let mut degenerate = false;

    // Examines clusters of the live set. Confirmed continuum clusters are
    // dropped wholesale (their cells never become hits); rejected suspects
    // are pruned to their deepest cells so near-miss chains cannot swamp
    // the budget. Returns the surviving cells.
    let vet = |cells: Vec<Cell<S>>, degenerate: &mut bool| -> Vec<Cell<S>> {
        let centroids: Vec<(S, S)> = cells.iter().map(|c| c.centroid()).collect();
        let link = S::of(CLUSTER_RADIUS).max(S::of(3.0) * cells[0].size());
        let mut keep: Vec<Cell<S>> = Vec::new();
        for mut members in single_linkage(&centroids, link) {
            let extent = bbox_extent(&centroids, &members);
            if members.len() < SUSPICIOUS_MEMBERS || extent < chain_extent {
                keep.extend(members.iter().map(|&i| cells[i]));
                continue;
            }
            members.sort_by(|&x, &y| {
                centroids[x].partial_cmp(&centroids[y]).expect("finite coordinates")
            });
            let picks = [
                members[0],
                members[members.len() / 4],
                members[members.len() / 2],
                members[3 * members.len() / 4],
                members[members.len() - 1],
            ];
            let deep = picks
                .iter()
                .filter(|&&i| witness_miss(&f, params, &probe_cfg, &cells[i]) <= witness_floor)
                .count();
            if deep >= 4 {
                *degenerate = true;
                continue;
            }
            members.sort_by(|&x, &y| {
                cells[x]
                    .min_miss()
                    .partial_cmp(&cells[y].min_miss())
                    .expect("finite miss")
                    .then(centroids[x].partial_cmp(&centroids[y]).expect("finite coordinates"))
            });
            keep.extend(members.iter().take(PRUNE_KEEP).map(|&i| cells[i]));
        }
        keep
    };

    // Quadtree refinement down to the coarse floor, with vetting whenever
    // the live set grows past the trigger.
    let mut just_vetted = false;
    while !cells.is_empty() {
        if cells.len() > SUSPICIOUS_TRIGGER {
            cells = vet(cells, &mut degenerate);
            just_vetted = true;
            if cells.is_empty() {
                break;
            }
        }
        if cells[0].size() <= floor || cells.len() > HARD_CAP {
            break;
        }
        just_vetted = false;
        let mut pts = Vec::with_capacity(cells.len() * 5);
        for c in &cells {
            let um = (c.u0 + c.u1) / two;
            let vm = (c.v0 + c.v1) / two;
            pts.push((um, c.v0));
            pts.push((c.u0, vm));
            pts.push((um, vm));
            pts.push((c.u1, vm));
            pts.push((um, c.v1));
        }
        let mid = eval_batch(&f, params, &probe_cfg, &pts);
        let mut next = Vec::new();
        for (ci, c) in cells.iter().enumerate() {
            let um = (c.u0 + c.u1) / two;
            let vm = (c.v0 + c.v1) / two;
            let m = &mid[ci * 5..ci * 5 + 5];
            let kids = [
                Cell { u0: c.u0, u1: um, v0: c.v0, v1: vm, corner: [c.corner[0], m[0], m[1], m[2]] },
                Cell { u0: um, u1: c.u1, v0: c.v0, v1: vm, corner: [m[0], c.corner[1], m[2], m[3]] },
                Cell { u0: c.u0, u1: um, v0: vm, v1: c.v1, corner: [m[1], m[2], c.corner[2], m[4]] },
                Cell { u0: um, u1: c.u1, v0: vm, v1: c.v1, corner: [m[2], m[3], m[4], c.corner[3]] },
            ];
            for kid in kids {
                if brackets_solution(&kid.corner) {
                    next.push(kid);
                }
            }
        }
        cells = next;
    }

    // Final vet catches chains that never tripped the size trigger, then
    // each remaining cluster nominates its deepest cell and a compass
    // descent on the miss finishes the localization. Cells at the floor
    // still straddle their solution by half a cell, which is far beyond
    // the tolerance of the final gate.
    if !cells.is_empty() && !just_vetted {
        cells = vet(cells, &mut degenerate);
    }
    let mut starts: Vec<((S, S), S)> = Vec::new();
    if !cells.is_empty() {
        let centroids: Vec<(S, S)> = cells.iter().map(|c| c.centroid()).collect();
        let link = S::of(CLUSTER_RADIUS).max(S::of(3.0) * cells[0].size());
        for cluster in single_linkage(&centroids, link) {
            let best = cluster
                .iter()
                .copied()
                .min_by(|&x, &y| {
                    cells[x]
                        .min_miss()
                        .partial_cmp(&cells[y].min_miss())
                        .expect("finite miss")
                        .then(
                            centroids[x]
                                .partial_cmp(&centroids[y])
                                .expect("finite coordinates"),
                        )
                })
                .expect("cluster is nonempty");
            starts.push((cells[best].best_corner(), cells[best].size()));
        }
    }
    let reps: Vec<(S, S)> = starts
        .par_iter()
        .map(|&(at, step)| descend_miss(&f, params, &probe_cfg, search, at, step))
        .collect();

    // Merge representatives closer than the cluster radius, then enforce
    // exact swap closure on symmetric boxes: keep the u >= v member of each
    // mirror pair and emit its literal swap.
    let merged = {
        let mut out = Vec::new();
        for cluster in single_linkage(&reps, S::of(CLUSTER_RADIUS)) {
            let count = S::of(cluster.len() as f64);
            let mut sum = (S::zero(), S::zero());
            for &idx in &cluster {
                sum = (sum.0 + reps[idx].0, sum.1 + reps[idx].1);
            }
            out.push((sum.0 / count, sum.1 / count));
        }
        out
    };
    let mut final_pts: Vec<(S, S)> = Vec::new();
    if search.is_swap_symmetric() {
        let band = S::of(CLUSTER_RADIUS);
        for &(a, b) in &merged {
            if (a - b).abs() <= band {
                final_pts.push((a, b));
            } else if a > b {
                final_pts.push((a, b));
                final_pts.push((b, a));
            }
        }
    } else {
        final_pts = merged;
    }
    final_pts.sort_by(|x, y| {
        x.0.partial_cmp(&y.0).unwrap().then(x.1.partial_cmp(&y.1).unwrap())
    });

    let tight = ShootingConfig { tol: (cfg.tol * S::of(1e-3)).max(S::of(1e-12)), ..*cfg };
    let hit_gate = S::of(HIT_MISS_MAX);
    let mut solutions = Vec::new();
    for (a, b) in final_pts {
        match finalize_hit(&f, params, a, b, &tight) {
            Ok(hit) if hit.miss <= hit_gate => solutions.push(hit),
            Ok(hit) => {
                log::debug!("rejecting shallow candidate ({a}, {b}), miss {}", hit.miss);
            }
            Err(e) => log::debug!("dropping census hit near ({a}, {b}): {e}"),
        }
    }

    Ok(CensusResult {
        params: *params,
        solutions,
        degenerate,
        search_box: *search,
        resolution: dims,
        basin,
    })
}
