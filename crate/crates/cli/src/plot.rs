//! SVG rendering of a single tour over the sensor field.

use std::fmt::Write as _;

use medop::geometry::{build_tour, Curve, GeometryError, Pose};
use medop::scenario::Scenario;

use crate::report::StoredTour;

/// Maximum spacing of path samples, meters.
pub const PATH_SAMPLE_STEP: f64 = 0.05;

const PX_PER_M: f64 = 20.0;
const MARGIN_M: f64 = 2.0;
const HEAT_CELL_M: f64 = 0.5;

/// Poses of a stored tour, or `None` if an id is unknown or the lengths
/// disagree.
pub fn tour_poses(scenario: &Scenario, tour: &StoredTour) -> Option<Vec<Pose<f64>>> {
    if tour.headings.len() != tour.ids.len() || tour.radii.len() + 1 != tour.ids.len() {
        return None;
    }
    tour.ids
        .iter()
        .zip(&tour.headings)
        .map(|(&id, &h)| {
            let [x, y] = scenario.locations[scenario.index_of(id)?].position;
            Some(Pose::new(x, y, h))
        })
        .collect()
}

/// Path samples spaced at most [`PATH_SAMPLE_STEP`] apart, endpoints included.
pub fn sample_path(poses: &[Pose<f64>], radii: &[f64]) -> Result<Vec<[f64; 2]>, GeometryError> {
    let path = build_tour(poses, radii)?;
    let total = path.length();
    let n = ((total / PATH_SAMPLE_STEP).ceil() as usize).max(1);
    (0..=n)
        .map(|i| {
            let s = (total * i as f64 / n as f64).min(total);
            path.sample(s).map(|p| [p.x, p.y])
        })
        .collect()
}

fn bounds(scenario: &Scenario) -> (f64, f64, f64, f64) {
    let pts = scenario
        .locations
        .iter()
        .map(|l| l.position)
        .chain(scenario.field.nodes.iter().map(|n| n.position));
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for [x, y] in pts {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    (x0 - MARGIN_M, y0 - MARGIN_M, x1 + MARGIN_M, y1 + MARGIN_M)
}

/// Renders the tour. The output depends only on the inputs.
pub fn render_svg(
    scenario: &Scenario,
    tour: &StoredTour,
    fitness: (f64, f64, f64),
) -> Result<String, String> {
    let poses = tour_poses(scenario, tour).ok_or("tour does not match the scenario")?;
    let points = sample_path(&poses, &tour.radii).map_err(|e| e.to_string())?;
    let (x0, y0, x1, y1) = bounds(scenario);
    let (w, h) = ((x1 - x0) * PX_PER_M, (y1 - y0) * PX_PER_M + 30.0);
    let title = format!("R={:.2}, E={:.2}, L={:.2}", fitness.0, fitness.1, fitness.2);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    let _ = writeln!(svg, "<title>{title}</title>");
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{title}</text>"#,
        w / 2.0
    );
    // World coordinates from here on, y pointing up.
    let _ = writeln!(
        svg,
        r#"<g transform="translate(0 {h:.0}) scale({PX_PER_M} -{PX_PER_M}) translate({:.4} {:.4})">"#,
        -x0, -y0
    );

    let field = &scenario.field;
    if !field.is_empty() {
        let top = field.cap.max(f64::MIN_POSITIVE);
        let _ = writeln!(svg, r#"<g id="heat" stroke="none">"#);
        let nx = ((x1 - x0) / HEAT_CELL_M).ceil() as usize;
        let ny = ((y1 - y0) / HEAT_CELL_M).ceil() as usize;
        for j in 0..ny {
            for i in 0..nx {
                let cx = x0 + (i as f64 + 0.5) * HEAT_CELL_M;
                let cy = y0 + (j as f64 + 0.5) * HEAT_CELL_M;
                let level = (field.intensity([cx, cy]) / top).min(1.0);
                if level < 0.01 {
                    continue;
                }
                let _ = writeln!(
                    svg,
                    r#"<rect x="{:.2}" y="{:.2}" width="{HEAT_CELL_M}" height="{HEAT_CELL_M}" fill="rgb(220,40,30)" fill-opacity="{:.3}"/>"#,
                    cx - HEAT_CELL_M / 2.0,
                    cy - HEAT_CELL_M / 2.0,
                    0.75 * level
                );
            }
        }
        let _ = writeln!(svg, "</g>");
        for n in &field.nodes {
            let _ = writeln!(
                svg,
                r#"<circle class="sensor" cx="{:.4}" cy="{:.4}" r="0.25" fill="darkred"/>"#,
                n.position[0], n.position[1]
            );
        }
    }

    let g = scenario.goal_index();
    for loc in &scenario.locations[1..g] {
        let side = 0.3 + 0.6 * loc.reward.clamp(0.0, 1.0);
        let _ = writeln!(
            svg,
            r#"<rect class="target" x="{:.4}" y="{:.4}" width="{side:.3}" height="{side:.3}" fill="steelblue"/>"#,
            loc.position[0] - side / 2.0,
            loc.position[1] - side / 2.0
        );
    }
    let [sx, sy] = scenario.start().position;
    let [gx, gy] = scenario.goal().position;
    let _ = writeln!(
        svg,
        r#"<circle class="start" cx="{sx:.4}" cy="{sy:.4}" r="0.5" fill="seagreen"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<rect class="goal" x="{:.4}" y="{:.4}" width="0.9" height="0.9" fill="none" stroke="black" stroke-width="0.15"/>"#,
        gx - 0.45,
        gy - 0.45
    );

    let mut coords = String::with_capacity(points.len() * 20);
    for (k, [x, y]) in points.iter().enumerate() {
        if k > 0 {
            coords.push(' ');
        }
        let _ = write!(coords, "{x:.4},{y:.4}");
    }
    let _ = writeln!(
        svg,
        r#"<polyline class="path" fill="none" stroke="black" stroke-width="0.1" points="{coords}"/>"#
    );
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Coordinates of the path polyline in an SVG produced by [`render_svg`].
pub fn polyline_points(svg: &str) -> Vec<Vec<[f64; 2]>> {
    svg.lines()
        .filter(|l| l.starts_with("<polyline"))
        .filter_map(|l| {
            let start = l.find("points=\"")? + 8;
            let end = start + l[start..].find('"')?;
            Some(
                l[start..end]
                    .split(' ')
                    .filter_map(|p| {
                        let (x, y) = p.split_once(',')?;
                        Some([x.parse().ok()?, y.parse().ok()?])
                    })
                    .collect(),
            )
        })
        .collect()
}
