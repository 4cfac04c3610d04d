//! Closed piecewise-linear track with per-waypoint half-width and friction.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::CostError;
use crate::types::wrap_angle;

/// One centerline sample. CSV columns: `s, x, y, half_width, mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub half_width: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub segment: usize,
    /// Arc length of the projected point.
    pub s: f64,
    /// Signed distance to the centerline, positive to the left.
    pub lateral: f64,
    /// Centerline tangent angle.
    pub heading: f64,
    pub half_width: f64,
    pub mu: f64,
}

impl Projection {
    pub fn inside(&self) -> bool {
        self.lateral.abs() <= self.half_width
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Segment {
    x: f64,
    y: f64,
    ux: f64,
    uy: f64,
    len: f64,
    s: f64,
}

/// Closed centerline. The last waypoint coincides with the first and arc
/// length increases strictly along the list.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    waypoints: Vec<Waypoint>,
    segments: Vec<Segment>,
    length: f64,
}

/// Segments searched on each side of a hint before falling back to a full scan.
const LOCAL_WINDOW: usize = 12;

impl Track {
    pub fn new(waypoints: Vec<Waypoint>) -> Result<Self, CostError> {
        if waypoints.len() < 4 {
            return Err(CostError::Track("need at least 4 waypoints".into()));
        }
        let first = waypoints[0];
        let last = waypoints[waypoints.len() - 1];
        if (first.x - last.x).hypot(first.y - last.y) > 1e-6 {
            return Err(CostError::Track("centerline is not closed".into()));
        }
        for (i, w) in waypoints.iter().enumerate() {
            if ![w.s, w.x, w.y, w.half_width, w.mu].iter().all(|v| v.is_finite()) || w.half_width <= 0.0 {
                return Err(CostError::Track(format!("waypoint {i} invalid")));
            }
            if !(w.mu > 0.0 && w.mu <= 1.2) {
                return Err(CostError::Track(format!("waypoint {i}: friction {} outside (0, 1.2]", w.mu)));
            }
        }
        if waypoints.windows(2).any(|p| p[1].s <= p[0].s) {
            return Err(CostError::Track("arc length must increase strictly".into()));
        }
        let mut segments = Vec::with_capacity(waypoints.len() - 1);
        let mut s = 0.0;
        for p in waypoints.windows(2) {
            let (dx, dy) = (p[1].x - p[0].x, p[1].y - p[0].y);
            let len = dx.hypot(dy);
            if len <= 0.0 {
                return Err(CostError::Track("zero-length segment".into()));
            }
            segments.push(Segment { x: p[0].x, y: p[0].y, ux: dx / len, uy: dy / len, len, s });
            s += len;
        }
        Ok(Self { waypoints, segments, length: s })
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    /// Centerline point and heading at arc length `s` (wrapped).
    pub fn pose_at(&self, s: f64) -> (f64, f64, f64) {
        let s = s.rem_euclid(self.length);
        let i = self.segments.partition_point(|seg| seg.s <= s).saturating_sub(1);
        let seg = &self.segments[i];
        let d = s - seg.s;
        (seg.x + d * seg.ux, seg.y + d * seg.uy, seg.uy.atan2(seg.ux))
    }

    fn project_segment(&self, i: usize, x: f64, y: f64) -> (f64, f64, f64) {
        let seg = &self.segments[i];
        let (rx, ry) = (x - seg.x, y - seg.y);
        let along = (rx * seg.ux + ry * seg.uy).clamp(0.0, seg.len);
        let (px, py) = (seg.x + along * seg.ux, seg.y + along * seg.uy);
        let dist2 = (x - px).powi(2) + (y - py).powi(2);
        let cross = seg.ux * (y - py) - seg.uy * (x - px);
        (dist2, along, cross)
    }

    fn projection_from(&self, i: usize, x: f64, y: f64) -> Projection {
        let (dist2, along, cross) = self.project_segment(i, x, y);
        let seg = &self.segments[i];
        let wp = &self.waypoints[i];
        let dist = dist2.sqrt();
        Projection {
            segment: i,
            s: seg.s + along,
            lateral: if cross >= 0.0 { dist } else { -dist },
            heading: seg.uy.atan2(seg.ux),
            half_width: wp.half_width,
            mu: wp.mu,
        }
    }

    /// Closest centerline point. With a `hint` only nearby segments are
    /// searched.
    pub fn project(&self, x: f64, y: f64, hint: Option<usize>) -> Projection {
        let n = self.segments.len();
        let best = match hint {
            Some(h) if n > 2 * LOCAL_WINDOW + 1 => {
                let mut best = (f64::INFINITY, h % n);
                for off in 0..=2 * LOCAL_WINDOW {
                    let i = (h + n + off - LOCAL_WINDOW) % n;
                    let d = self.project_segment(i, x, y).0;
                    if d < best.0 {
                        best = (d, i);
                    }
                }
                best.1
            }
            _ => {
                let mut best = (f64::INFINITY, 0);
                for i in 0..n {
                    let d = self.project_segment(i, x, y).0;
                    if d < best.0 {
                        best = (d, i);
                    }
                }
                best.1
            }
        };
        self.projection_from(best, x, y)
    }

    /// Heading error of `yaw` relative to the local tangent.
    pub fn heading_error(&self, p: &Projection, yaw: f64) -> f64 {
        wrap_angle(yaw - p.heading)
    }

    /// Signed forward progress between two arc-length positions, assuming the
    /// true displacement is shorter than half a lap.
    pub fn progress(&self, from_s: f64, to_s: f64) -> f64 {
        let mut d = (to_s - from_s).rem_euclid(self.length);
        if d > 0.5 * self.length {
            d -= self.length;
        }
        d
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), CostError> {
        let mut w = csv::Writer::from_writer(writer);
        for wp in &self.waypoints {
            w.serialize(wp)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, CostError> {
        let mut r = csv::Reader::from_reader(reader);
        let wps: Result<Vec<Waypoint>, _> = r.deserialize().collect();
        Self::new(wps?)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, CostError> {
        let f = std::fs::File::open(path.as_ref())
            .map_err(|e| CostError::Track(format!("{}: {e}", path.as_ref().display())))?;
        Self::read_csv(f)
    }
}
