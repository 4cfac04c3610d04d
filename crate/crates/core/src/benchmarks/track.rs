//! Synthetic six-corner circuit with per-corner friction.

use serde::{Deserialize, Serialize};

use super::BenchmarkError;
use crate::costs::{Track, Waypoint};

/// Corner vertices of the circuit, counter-clockwise (m).
const LAYOUT: [(f64, f64); 6] = [(150.0, 0.0), (210.0, 70.0), (170.0, 150.0), (60.0, 160.0), (-30.0, 110.0), (-20.0, 20.0)];
/// Fillet radius per corner (m).
const RADII: [f64; 6] = [30.0, 26.0, 32.0, 28.0, 30.0, 24.0];

pub const CORNER_COUNT: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackSpec {
    /// Friction of corners 1..=6 in driving order.
    pub corner_friction: Vec<f64>,
    /// Friction everywhere outside the corners.
    pub default_friction: f64,
    pub half_width: f64,
    /// Multiplies the layout coordinates and radii.
    pub scale: f64,
    /// Centerline sample spacing (m).
    pub spacing: f64,
}

impl Default for TrackSpec {
    fn default() -> Self {
        Self {
            corner_friction: vec![1.0, 0.95, 0.9, 0.85, 0.8, 0.75],
            default_friction: 0.9,
            half_width: 5.0,
            scale: 1.0,
            spacing: 1.0,
        }
    }
}

/// Arc-length span of one corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerSpan {
    pub start: f64,
    pub end: f64,
    pub friction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub track: Track,
    pub corners: Vec<CornerSpan>,
}

/// Builds the closed circuit. Arc length 0 lies in the middle of the straight
/// before corner 1.
pub fn build_track(spec: &TrackSpec) -> Result<Track, BenchmarkError> {
    build_circuit(spec).map(|c| c.track)
}

/// [`build_track`] plus the arc-length span of every corner.
pub fn build_circuit(spec: &TrackSpec) -> Result<Circuit, BenchmarkError> {
    if spec.corner_friction.len() != CORNER_COUNT {
        return Err(BenchmarkError::Config(format!(
            "{} corner frictions given for {CORNER_COUNT} corners",
            spec.corner_friction.len()
        )));
    }
    if !(spec.scale > 0.0 && spec.spacing > 0.0 && spec.half_width > 0.0) {
        return Err(BenchmarkError::Config("scale, spacing and half_width must be positive".into()));
    }
    let v: Vec<(f64, f64)> = LAYOUT.iter().map(|(x, y)| (x * spec.scale, y * spec.scale)).collect();
    let n = v.len();
    let unit = |a: (f64, f64), b: (f64, f64)| {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let l = dx.hypot(dy);
        (dx / l, dy / l)
    };
    // (tangent-in point, tangent-out point, centre, start angle, sweep) per corner
    let mut arcs = Vec::with_capacity(n);
    for i in 0..n {
        let prev = v[(i + n - 1) % n];
        let next = v[(i + 1) % n];
        let u_in = unit(prev, v[i]);
        let u_out = unit(v[i], next);
        let turn = (u_in.0 * u_out.1 - u_in.1 * u_out.0).atan2(u_in.0 * u_out.0 + u_in.1 * u_out.1);
        if turn <= 0.0 {
            return Err(BenchmarkError::Config("layout must turn left at every corner".into()));
        }
        let r = RADII[i] * spec.scale;
        let d = r * (turn / 2.0).tan();
        let t_in = (v[i].0 - d * u_in.0, v[i].1 - d * u_in.1);
        let t_out = (v[i].0 + d * u_out.0, v[i].1 + d * u_out.1);
        let centre = (t_in.0 - r * u_in.1, t_in.1 + r * u_in.0);
        let start = (t_in.1 - centre.1).atan2(t_in.0 - centre.0);
        arcs.push((t_in, t_out, centre, start, turn, r));
    }

    let mut pts: Vec<(f64, f64, Option<usize>)> = Vec::new();
    let push_line = |pts: &mut Vec<(f64, f64, Option<usize>)>, a: (f64, f64), b: (f64, f64)| {
        let len = (b.0 - a.0).hypot(b.1 - a.1);
        let steps = (len / spec.spacing).ceil().max(1.0) as usize;
        for k in 0..steps {
            let f = k as f64 / steps as f64;
            pts.push((a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1), None));
        }
    };
    let last = arcs[n - 1].1;
    let first_in = arcs[0].0;
    let start = ((last.0 + first_in.0) / 2.0, (last.1 + first_in.1) / 2.0);
    push_line(&mut pts, start, first_in);
    for i in 0..n {
        let (_, t_out, c, a0, sweep, r) = arcs[i];
        let steps = (r * sweep / spec.spacing).ceil().max(2.0) as usize;
        for k in 0..steps {
            let a = a0 + sweep * k as f64 / steps as f64;
            pts.push((c.0 + r * a.cos(), c.1 + r * a.sin(), Some(i)));
        }
        let target = if i + 1 < n { arcs[i + 1].0 } else { start };
        push_line(&mut pts, t_out, target);
    }
    pts.push((start.0, start.1, None));

    let mut s = 0.0;
    let mut waypoints = Vec::with_capacity(pts.len());
    let mut corners: Vec<CornerSpan> = Vec::with_capacity(n);
    for (k, &(x, y, corner)) in pts.iter().enumerate() {
        if k > 0 {
            s += (x - pts[k - 1].0).hypot(y - pts[k - 1].1);
        }
        // a corner's last arc sample starts the segment into the next straight
        if k > 0 {
            if let Some(c) = pts[k - 1].2 {
                corners[c].end = s;
            }
        }
        let mu = match corner {
            Some(c) => {
                if corners.len() == c {
                    corners.push(CornerSpan { start: s, end: s, friction: spec.corner_friction[c] });
                }
                spec.corner_friction[c]
            }
            None => spec.default_friction,
        };
        waypoints.push(Waypoint { s, x, y, half_width: spec.half_width, mu });
    }
    Ok(Circuit { track: Track::new(waypoints)?, corners })
}
