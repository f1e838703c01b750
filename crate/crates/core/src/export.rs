//! SVG portraits and per-trajectory CSV.

use std::fmt::Write;

use crate::trace::{Branch, PhasePortrait, Region, Trajectory};

const SIZE: f64 = 600.0;
const LOCUS_GRID: usize = 240;

/// `0` for the minimal foliation, `1` for the maximal one.
pub fn foliation_id(b: Branch) -> u8 {
    match b {
        Branch::Minimal => 0,
        Branch::Maximal => 1,
    }
}

/// One row per point: `u,w,foliation_id`.
pub fn trajectory_csv(t: &Trajectory) -> String {
    let mut s = String::from("u,w,foliation_id\n");
    let id = foliation_id(t.foliation);
    for p in &t.points {
        let _ = writeln!(s, "{},{},{}", p[0], p[1], id);
    }
    s
}

struct View {
    bounds: [f64; 4],
}

impl View {
    fn x(&self, u: f64) -> f64 {
        (u - self.bounds[0]) / (self.bounds[1] - self.bounds[0]) * SIZE
    }

    fn y(&self, w: f64) -> f64 {
        (self.bounds[3] - w) / (self.bounds[3] - self.bounds[2]) * SIZE
    }

    fn inside(&self, p: [f64; 2]) -> bool {
        p[0] >= self.bounds[0] && p[0] <= self.bounds[1] && p[1] >= self.bounds[2] && p[1] <= self.bounds[3]
    }

    fn polyline(&self, pts: &[[f64; 2]]) -> String {
        let mut s = String::new();
        for p in pts.iter().filter(|p| self.inside(**p)) {
            let _ = write!(s, "{:.2},{:.2} ", self.x(p[0]), self.y(p[1]));
        }
        s.trim_end().to_string()
    }
}

/// Zero set of the region function by marching squares, as segments.
pub fn end_locus_segments(region: &Region, bounds: [f64; 4], n: usize) -> Vec<[[f64; 2]; 2]> {
    if matches!(region, Region::Everywhere) {
        return Vec::new();
    }
    let at = |i: usize, j: usize| {
        [
            bounds[0] + (bounds[1] - bounds[0]) * i as f64 / n as f64,
            bounds[2] + (bounds[3] - bounds[2]) * j as f64 / n as f64,
        ]
    };
    let vals: Vec<Vec<f64>> = (0..=n).map(|i| (0..=n).map(|j| region.value(at(i, j))).collect()).collect();
    let cross = |p: [f64; 2], q: [f64; 2], a: f64, b: f64| {
        let t = a / (a - b);
        [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
    };
    let mut segs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let mut hits = Vec::new();
            for k in 0..4 {
                let (a, b) = (corners[k], corners[(k + 1) % 4]);
                let (va, vb) = (vals[a.0][a.1], vals[b.0][b.1]);
                if (va > 0.0) != (vb > 0.0) {
                    hits.push(cross(at(a.0, a.1), at(b.0, b.1), va, vb));
                }
            }
            if hits.len() == 2 {
                segs.push([hits[0], hits[1]]);
            } else if hits.len() == 4 {
                segs.push([hits[0], hits[1]]);
                segs.push([hits[2], hits[3]]);
            }
        }
    }
    segs
}

/// Renders a portrait. Singular points carry `class="singular-point"`.
pub fn portrait_svg(portrait: &PhasePortrait, title: &str) -> String {
    let view = View { bounds: portrait.bounds };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, "<title>{}</title>", escape(title));
    s.push_str(
        "<style>\n\
         .leaf{fill:none;stroke-width:0.8}\n\
         .minimal{stroke:#1f5fa8}\n\
         .maximal{stroke:#c0392b;stroke-dasharray:4 2}\n\
         .separatrix{fill:none;stroke:#111;stroke-width:2}\n\
         .end-locus{stroke:#2e8b57;stroke-width:2.5}\n\
         .singular-point{fill:#f1c40f;stroke:#111;stroke-width:1}\n\
         </style>\n",
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="#ffffff"/>"##);

    s.push_str("<g class=\"foliations\">\n");
    for t in &portrait.trajectories {
        let pts = view.polyline(&t.points);
        if !pts.is_empty() {
            let _ = writeln!(s, r#"<polyline class="leaf {}" points="{}"/>"#, t.foliation.name(), pts);
        }
    }
    s.push_str("</g>\n<g class=\"separatrices\">\n");
    for sep in &portrait.separatrices {
        let pts = view.polyline(&sep.trajectory.points);
        if !pts.is_empty() {
            let _ = writeln!(s, r#"<polyline class="separatrix {}" points="{}"/>"#, sep.trajectory.foliation.name(), pts);
        }
    }
    s.push_str("</g>\n<g class=\"end-locus\">\n");
    for seg in end_locus_segments(&portrait.region, portrait.bounds, LOCUS_GRID) {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
            view.x(seg[0][0]),
            view.y(seg[0][1]),
            view.x(seg[1][0]),
            view.y(seg[1][1])
        );
    }
    s.push_str("</g>\n");
    for sp in &portrait.singular_points {
        let _ = writeln!(
            s,
            r#"<circle class="singular-point" cx="{:.2}" cy="{:.2}" r="5" data-label="{}"/>"#,
            view.x(sp.point[0]),
            view.y(sp.point[1]),
            escape(&sp.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Number of annotated singular points in an SVG document.
pub fn count_singular_points(svg: &str) -> usize {
    svg.matches(r#"class="singular-point""#).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{SingularPoint, Termination};

    fn sample() -> PhasePortrait {
        PhasePortrait {
            trajectories: vec![Trajectory {
                points: vec![[0.0, 0.1], [0.5, 0.2]],
                foliation: Branch::Maximal,
                termination: Termination::Boundary,
                start_termination: Termination::Boundary,
            }],
            separatrices: Vec::new(),
            singular_points: vec![SingularPoint { point: [0.0, 0.0], label: "x".into() }],
            suspension_singularities: Vec::new(),
            region: Region::UpperHalfPlane,
            bounds: [-1.0, 1.0, -1.0, 1.0],
        }
    }

    #[test]
    fn csv_rows() {
        let t = &sample().trajectories[0];
        assert_eq!(trajectory_csv(t), "u,w,foliation_id\n0,0.1,1\n0.5,0.2,1\n");
    }

    #[test]
    fn svg_marks_singular_points_and_locus() {
        let svg = portrait_svg(&sample(), "t");
        assert_eq!(count_singular_points(&svg), 1);
        assert!(svg.contains("<line"));
        assert!(svg.contains("leaf maximal"));
    }

    #[test]
    fn marching_squares_finds_the_axis() {
        let segs = end_locus_segments(&Region::UpperHalfPlane, [-1.0, 1.0, -1.0, 1.0], 7);
        assert!(!segs.is_empty());
        for s in segs {
            assert!(s[0][1].abs() < 1e-12 && s[1][1].abs() < 1e-12);
        }
    }
}
