//! Deterministic SVG rendering of clusters: region fills (hatch/dot
//! patterns), boundary polylines, an origin plus-marker, and a legend with
//! areas and perimeter. Identical inputs produce byte-identical output.

use std::fmt::Write as _;

use isocluster_core::energy;
use isocluster_core::geom::Point;
use isocluster_core::Cluster;

use crate::config::RenderSpec;

/// Fill styles cycled over regions by id order.
const FILL_STYLES: [&str; 4] = [
    "url(#hatch)",
    "url(#dots)",
    "#d7e5f4",
    "#f4e3d7",
];

fn fmt(v: f64) -> String {
    // Fixed three decimals in pixel space keeps output byte-stable.
    format!("{v:.3}")
}

pub fn render_cluster(cluster: &Cluster, options: &RenderSpec) -> String {
    let width = options.width as f64;
    let height = options.height as f64;

    // World bounding box, always including the origin, with a 6% margin.
    let mut min = Point::new(0.0, 0.0);
    let mut max = Point::new(0.0, 0.0);
    for v in cluster.vertices() {
        min = Point::new(min.x.min(v.pos.x), min.y.min(v.pos.y));
        max = Point::new(max.x.max(v.pos.x), max.y.max(v.pos.y));
    }
    let span = Point::new((max.x - min.x).max(1e-9), (max.y - min.y).max(1e-9));
    let margin = 0.06 * span.x.max(span.y);
    let min = Point::new(min.x - margin, min.y - margin);
    let max = Point::new(max.x + margin, max.y + margin);
    let scale = (width / (max.x - min.x)).min(height / (max.y - min.y));
    // y flips: SVG's y axis points down.
    let to_px = |q: Point| -> (f64, f64) {
        ((q.x - min.x) * scale, (max.y - q.y) * scale)
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        options.width, options.height, options.width, options.height
    );
    svg.push_str(concat!(
        "  <defs>\n",
        "    <pattern id=\"hatch\" width=\"6\" height=\"6\" patternTransform=\"rotate(45)\" patternUnits=\"userSpaceOnUse\">\n",
        "      <line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#7a9cc4\" stroke-width=\"1\"/>\n",
        "    </pattern>\n",
        "    <pattern id=\"dots\" width=\"7\" height=\"7\" patternUnits=\"userSpaceOnUse\">\n",
        "      <circle cx=\"2\" cy=\"2\" r=\"1.1\" fill=\"#c49a7a\"/>\n",
        "    </pattern>\n",
        "  </defs>\n",
    ));
    let _ = writeln!(
        svg,
        "  <rect width=\"{}\" height=\"{}\" fill=\"white\"/>",
        options.width, options.height
    );

    // Region fills.
    for (idx, region) in cluster.regions().enumerate() {
        let Ok(loops) = cluster.region_boundary(region.id) else {
            continue;
        };
        let mut d = String::new();
        for lp in &loops {
            for (i, v) in lp.iter().enumerate() {
                let (x, y) = to_px(cluster.position(*v));
                let _ = write!(d, "{}{} {} ", if i == 0 { "M" } else { "L" }, fmt(x), fmt(y));
            }
            d.push_str("Z ");
        }
        let _ = writeln!(
            svg,
            "  <path d=\"{}\" fill=\"{}\" fill-rule=\"evenodd\" stroke=\"none\"/>",
            d.trim_end(),
            FILL_STYLES[idx % FILL_STYLES.len()]
        );
    }

    // Boundary arcs as polylines.
    for arc in cluster.extract_arcs() {
        let pts = cluster.arc_positions(&arc);
        let mut d = String::new();
        for (i, q) in pts.iter().enumerate() {
            let (x, y) = to_px(*q);
            let _ = write!(d, "{}{} {} ", if i == 0 { "M" } else { "L" }, fmt(x), fmt(y));
        }
        if arc.closed {
            d.push_str("Z");
        }
        let _ = writeln!(
            svg,
            "  <path d=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.4\"/>",
            d.trim_end()
        );
    }

    // Origin marker: a plus sign.
    if options.origin_marker {
        let (ox, oy) = to_px(Point::ORIGIN);
        let arm = 0.012 * width.min(height);
        let _ = writeln!(
            svg,
            "  <path d=\"M{} {} L{} {} M{} {} L{} {}\" stroke=\"#cc2222\" stroke-width=\"1.6\"/>",
            fmt(ox - arm),
            fmt(oy),
            fmt(ox + arm),
            fmt(oy),
            fmt(ox),
            fmt(oy - arm),
            fmt(ox),
            fmt(oy + arm)
        );
    }

    // Legend: perimeter, density exponent, region areas.
    let mut y = 16.0;
    let p = cluster.density().exponent();
    if let Ok(perimeter) = energy::measure_perimeter(cluster) {
        let _ = writeln!(
            svg,
            "  <text x=\"8\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" fill=\"#333\">p={} perimeter={:.6}</text>",
            fmt(y),
            p,
            perimeter
        );
        y += 14.0;
    }
    if let Ok(areas) = energy::measure_areas(cluster) {
        for (rid, area) in areas {
            let label = cluster.region(rid).map(|r| r.label.clone()).unwrap_or_default();
            let _ = writeln!(
                svg,
                "  <text x=\"8\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" fill=\"#333\">{label}: area {:.6}</text>",
                fmt(y),
                area
            );
            y += 14.0;
        }
    }

    svg.push_str("</svg>\n");
    svg
}
