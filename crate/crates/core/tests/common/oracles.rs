//! Independent reference implementations used to check the library.
//!
//! Nothing here calls the library's geometry or matching code; boxes are only
//! read through their public fields.
#![allow(dead_code)]

use farfield::Box3D;
use rand::Rng;

/// Footprint corners in counter-clockwise order.
pub fn footprint(b: &Box3D) -> [[f64; 2]; 4] {
    let (s, c) = b.yaw.sin_cos();
    let (hl, hw) = (b.size.length / 2.0, b.size.width / 2.0);
    [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)].map(|(u, v)| [b.center.x + c * u - s * v, b.center.y + s * u + c * v])
}

/// Horizontal extent of a convex polygon on the line at height `y`.
fn span(poly: &[[f64; 2]; 4], y: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..4 {
        let p = poly[k];
        let q = poly[(k + 1) % 4];
        let crosses = (p[1] <= y && y < q[1]) || (q[1] <= y && y < p[1]);
        if crosses {
            let x = p[0] + (y - p[1]) * (q[0] - p[0]) / (q[1] - p[1]);
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// BEV IoU by exact horizontal spans on `rows` evenly spaced scanlines.
pub fn scanline_bev_iou(a: &Box3D, b: &Box3D, rows: usize) -> f64 {
    let pa = footprint(a);
    let pb = footprint(b);
    let y_range = |p: &[[f64; 2]; 4]| p.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), c| (l.min(c[1]), h.max(c[1])));
    let (a0, a1) = y_range(&pa);
    let (b0, b1) = y_range(&pb);
    let (y0, y1) = (a0.max(b0), a1.min(b1));
    let mut inter = 0.0;
    if y1 > y0 {
        let dy = (y1 - y0) / rows as f64;
        for r in 0..rows {
            let y = y0 + (r as f64 + 0.5) * dy;
            if let (Some(sa), Some(sb)) = (span(&pa, y), span(&pb, y)) {
                inter += (sa.1.min(sb.1) - sa.0.max(sb.0)).max(0.0) * dy;
            }
        }
    }
    let area = |b: &Box3D| b.size.length * b.size.width;
    inter / (area(a) + area(b) - inter)
}

fn inside(poly: &[[f64; 2]; 4], x: f64, y: f64) -> bool {
    (0..4).all(|k| {
        let p = poly[k];
        let q = poly[(k + 1) % 4];
        (q[0] - p[0]) * (y - p[1]) - (q[1] - p[1]) * (x - p[0]) >= 0.0
    })
}

/// BEV IoU by counting pixel centers on an `n` x `n` grid over both footprints.
pub fn pixel_bev_iou(a: &Box3D, b: &Box3D, n: usize) -> f64 {
    let pa = footprint(a);
    let pb = footprint(b);
    let all: Vec<[f64; 2]> = pa.iter().chain(&pb).copied().collect();
    let (x0, x1) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), c| (l.min(c[0]), h.max(c[0])));
    let (y0, y1) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), c| (l.min(c[1]), h.max(c[1])));
    let (mut both, mut either) = (0u64, 0u64);
    for i in 0..n {
        let x = x0 + (i as f64 + 0.5) * (x1 - x0) / n as f64;
        for j in 0..n {
            let y = y0 + (j as f64 + 0.5) * (y1 - y0) / n as f64;
            let (ia, ib) = (inside(&pa, x, y), inside(&pb, x, y));
            both += (ia && ib) as u64;
            either += (ia || ib) as u64;
        }
    }
    both as f64 / either as f64
}

fn inside_box(b: &Box3D, p: [f64; 3]) -> bool {
    let (s, c) = b.yaw.sin_cos();
    let (dx, dy, dz) = (p[0] - b.center.x, p[1] - b.center.y, p[2] - b.center.z);
    let u = c * dx + s * dy;
    let v = -s * dx + c * dy;
    u.abs() <= b.size.length / 2.0 && v.abs() <= b.size.width / 2.0 && dz.abs() <= b.size.height / 2.0
}

/// Volumetric IoU from `n` uniform samples over both boxes' bounding volume.
pub fn monte_carlo_iou3d(a: &Box3D, b: &Box3D, n: usize, rng: &mut impl Rng) -> f64 {
    let reach = |b: &Box3D| (b.size.length.hypot(b.size.width) / 2.0, b.size.height / 2.0);
    let (ra, ha) = reach(a);
    let (rb, hb) = reach(b);
    let lo = [(a.center.x - ra).min(b.center.x - rb), (a.center.y - ra).min(b.center.y - rb), (a.center.z - ha).min(b.center.z - hb)];
    let hi = [(a.center.x + ra).max(b.center.x + rb), (a.center.y + ra).max(b.center.y + rb), (a.center.z + ha).max(b.center.z + hb)];
    let (mut both, mut either) = (0u64, 0u64);
    for _ in 0..n {
        let p = [rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1]), rng.random_range(lo[2]..hi[2])];
        let (ia, ib) = (inside_box(a, p), inside_box(b, p));
        both += (ia && ib) as u64;
        either += (ia || ib) as u64;
    }
    both as f64 / either as f64
}

/// Matching rule, evaluated at the ground truth's distance from the origin.
#[derive(Debug, Clone, Copy)]
pub enum Rule {
    Fixed(f64),
    Linear,
    Quadratic,
    Elliptical,
}

impl Rule {
    pub fn accepts(self, pred: [f64; 2], gt: [f64; 2]) -> bool {
        let (dx, dy) = (pred[0] - gt[0], pred[1] - gt[1]);
        let dist = (dx * dx + dy * dy).sqrt();
        let r = (gt[0] * gt[0] + gt[1] * gt[1]).sqrt();
        match self {
            Rule::Fixed(t) => dist <= t,
            Rule::Linear => dist <= r / 12.5,
            Rule::Quadratic => dist <= 0.25 + 0.0125 * r + 0.00125 * r * r,
            Rule::Elliptical => {
                let r2 = gt[0] * gt[0] + gt[1] * gt[1];
                let q = 312.5 * dx * dx + 78.125 * dy * dy;
                if r2 == 0.0 {
                    q == 0.0
                } else {
                    q / r2 <= 1.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ODet {
    pub frame: usize,
    pub xy: [f64; 2],
    pub score: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct OGt {
    pub frame: usize,
    pub xy: [f64; 2],
}

/// Step-by-step greedy matching. Returns the processing order and, per
/// detection in input order, the claimed ground-truth index.
pub fn greedy_oracle(dets: &[ODet], gts: &[OGt], rule: Rule) -> (Vec<usize>, Vec<Option<usize>>) {
    let mut done = vec![false; dets.len()];
    let mut taken = vec![false; gts.len()];
    let mut labels = vec![None; dets.len()];
    let mut order = Vec::new();
    for _ in 0..dets.len() {
        // highest remaining score, first in input order on ties
        let mut pick: Option<usize> = None;
        for i in 0..dets.len() {
            if !done[i] && pick.is_none_or(|p| dets[i].score > dets[p].score) {
                pick = Some(i);
            }
        }
        let i = pick.unwrap();
        done[i] = true;
        order.push(i);
        let mut best: Option<(f64, usize)> = None;
        for (j, g) in gts.iter().enumerate() {
            if g.frame != dets[i].frame || taken[j] || !rule.accepts(dets[i].xy, g.xy) {
                continue;
            }
            let d = ((dets[i].xy[0] - g.xy[0]).powi(2) + (dets[i].xy[1] - g.xy[1]).powi(2)).sqrt();
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, j));
            }
        }
        if let Some((_, j)) = best {
            taken[j] = true;
            labels[i] = Some(j);
        }
    }
    (order, labels)
}

/// AP from TP flags listed in processing order, by enumerating every cutoff.
pub fn ap_oracle(ranked_tp: &[bool], num_gt: usize, full_area: bool) -> Option<f64> {
    if num_gt == 0 {
        return None;
    }
    let mut points = Vec::new();
    let mut tp = 0usize;
    for (k, &hit) in ranked_tp.iter().enumerate() {
        tp += hit as usize;
        points.push((tp as f64 / num_gt as f64, tp as f64 / (k + 1) as f64));
    }
    let grid: Vec<usize> = if full_area { (0..=100).collect() } else { (10..=100).collect() };
    let mut total = 0.0;
    for &i in &grid {
        let r = i as f64 / 100.0;
        let p = points.iter().filter(|(rec, _)| *rec >= r).map(|(_, prec)| *prec).fold(0.0, f64::max);
        total += if full_area { p } else { (p - 0.1).max(0.0) / 0.9 };
    }
    Some(total / grid.len() as f64)
}

/// Size of a maximum-cardinality matching under `rule` (augmenting paths).
pub fn max_matching(dets: &[ODet], gts: &[OGt], rule: Rule) -> usize {
    let adj: Vec<Vec<usize>> = dets
        .iter()
        .map(|d| (0..gts.len()).filter(|&j| gts[j].frame == d.frame && rule.accepts(d.xy, gts[j].xy)).collect())
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; gts.len()];
    fn augment(i: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none_or(|o| augment(o, adj, owner, seen)) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }
    (0..dets.len()).filter(|&i| augment(i, &adj, &mut owner, &mut vec![false; gts.len()])).count()
}
